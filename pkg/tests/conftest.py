from hypothesis import settings

settings.register_profile("numerics", deadline=None, max_examples=60)
settings.load_profile("numerics")
