"""Evaluation of the absolute normalized Dirichlet kernel and its Gaussian majorant.

The two functions at the heart of the package are

    g(x) = |sin(l pi x)| / (l sin(pi x))   on [0, 1/2],

the modulus of the normalized Dirichlet kernel of length ``l``, and the
truncated Gaussian

    f(x) = exp(-pi (l^2 - 1) x^2 / 2)      on [0, x_c],  0 beyond,

cut off at the level ``y_last`` where the exponential first drops below the
floor 2/(pi (l+1)) (even ``l``) or 2/(pi (l+2)) (odd ``l``).  The module also
provides the closed-form distribution function of ``f`` and a grid check of
the pointwise domination g < f on the first arch (0, 1/l].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

PI = math.pi

# below this abscissa the sine quotient is evaluated by series to avoid 0/0
_SERIES_CUTOFF = 1e-8


@dataclass(frozen=True)
class KernelSpec:
    """Length parameter of the normalized Dirichlet kernel.

    ``l`` must be an integer >= 2.  Operations that certify the sharp norm
    bound additionally require ``l >= 6``; they enforce that themselves.
    """

    l: int

    def __post_init__(self):
        if isinstance(self.l, bool) or int(self.l) != self.l:
            raise DomainError(f"kernel length must be an integer, got {self.l!r}")
        object.__setattr__(self, "l", int(self.l))
        if self.l < 2:
            raise DomainError(f"kernel length must be >= 2, got {self.l}")


@dataclass(frozen=True)
class TruncatedGaussian:
    """Gaussian comparison function with stored cutoff data.

    ``x_c`` and ``y_last`` are computed once in :meth:`from_length` and then
    carried verbatim so every consumer sees bit-identical values.
    """

    l: int
    x_c: float
    y_last: float

    @classmethod
    def from_length(cls, l: int) -> "TruncatedGaussian":
        l = KernelSpec(l).l
        if l % 2 == 0:
            y_last = 2.0 / (PI * (l + 1))
        else:
            y_last = 2.0 / (PI * (l + 2))
        x_c = math.sqrt(2.0 * math.log(1.0 / y_last) / (PI * (l * l - 1)))
        return cls(l=l, x_c=x_c, y_last=y_last)


@dataclass(frozen=True)
class EvalPoint:
    """A sampled (abscissa, value) pair; both curves stay within [0, 1]."""

    x: float
    value: float

    def __post_init__(self):
        if not 0.0 <= self.x <= 0.5:
            raise DomainError(f"abscissa {self.x} outside [0, 1/2]")
        if not 0.0 <= self.value <= 1.0 + 1e-12:
            raise DomainError(f"value {self.value} outside [0, 1]")


def _sinc_poly(u2: np.ndarray) -> np.ndarray:
    # sin(u)/u = 1 - u^2/6 + u^4/120 + O(u^6); u^2 <= 1e-3 in all callers
    return 1.0 - u2 / 6.0 + u2 * u2 / 120.0


def kernel_values(l: int, x: np.ndarray) -> np.ndarray:
    """Vectorized g(x) without domain checks (callers guarantee x in [0, 1/2]).

    The numerator argument is reduced modulo the period before the multiply
    by pi, so l*x never feeds a huge argument into sin; near the origin the
    quotient is formed from truncated sinc series instead of 0/0.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x < _SERIES_CUTOFF
    if np.any(small):
        xs = x[small]
        num = _sinc_poly((l * PI * xs) ** 2)
        den = _sinc_poly((PI * xs) ** 2)
        out[small] = num / den
    if np.any(~small):
        xb = x[~small]
        num = np.abs(np.sin(PI * np.fmod(l * xb, 2.0)))
        den = l * np.sin(PI * xb)
        out[~small] = num / den
    return out


def eval_kernel(spec: KernelSpec, x: float) -> float:
    """g(x) = |sin(l pi x)| / (l sin(pi x)) for x in [0, 1/2]."""
    if not 0.0 <= x <= 0.5:
        raise DomainError(f"x = {x} outside [0, 1/2]")
    return float(kernel_values(spec.l, np.array([x]))[0])


def kernel_slope_values(l: int, x: np.ndarray) -> np.ndarray:
    """Vectorized derivative of the signed quotient sin(l pi x)/(l sin(pi x)).

    Away from the origin this is the quotient rule expression

        pi * (l cos(l pi x) sin(pi x) - sin(l pi x) cos(pi x)) / (l sin^2(pi x));

    below the series cutoff it falls back to h(x) * d/dx log h(x) with the
    same truncated series as :func:`kernel_values`.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x < _SERIES_CUTOFF
    if np.any(small):
        xs = x[small]
        h = _sinc_poly((l * PI * xs) ** 2) / _sinc_poly((PI * xs) ** 2)
        dlog = -(PI**2) * (l * l - 1) * xs / 3.0 - (PI**4) * (l**4 - 1) * xs**3 / 45.0
        out[small] = h * dlog
    if np.any(~small):
        xb = x[~small]
        u = PI * np.fmod(l * xb, 2.0)
        s = np.sin(PI * xb)
        out[~small] = PI * (l * np.cos(u) * s - np.sin(u) * np.cos(PI * xb)) / (l * s * s)
    return out


def kernel_slope(spec: KernelSpec, x: float) -> float:
    """Signed slope of the un-absolute kernel quotient at x in [0, 1/2]."""
    if not 0.0 <= x <= 0.5:
        raise DomainError(f"x = {x} outside [0, 1/2]")
    return float(kernel_slope_values(spec.l, np.array([x]))[0])


def gaussian_values(l: int, x: np.ndarray) -> np.ndarray:
    """Vectorized untruncated exp(-pi (l^2-1) x^2 / 2)."""
    x = np.asarray(x, dtype=float)
    return np.exp(-PI * (l * l - 1) * x * x / 2.0)


def eval_gaussian(tg: TruncatedGaussian, x: float) -> float:
    """Truncated Gaussian: the exponential on [0, x_c], zero beyond."""
    if x < 0.0:
        raise DomainError(f"x = {x} must be >= 0")
    if x > tg.x_c:
        return 0.0
    return math.exp(-PI * (tg.l * tg.l - 1) * x * x / 2.0)


def gaussian_distribution_function(tg: TruncatedGaussian, y: float) -> float:
    """Distribution function of the truncated Gaussian, in closed form.

    F(y) is the measure of {x : f(x) > y}: constant x_c below the truncation
    level, then sqrt(2 log(1/y) / (pi (l^2-1))) up to 1.  Monotone
    nonincreasing, with F(y) -> 0 as y -> 1.
    """
    if not 0.0 < y < 1.0:
        raise DomainError(f"level y = {y} outside (0, 1)")
    if y < tg.y_last:
        return tg.x_c
    return math.sqrt(2.0 * math.log(1.0 / y) / (PI * (tg.l * tg.l - 1)))


@dataclass(frozen=True)
class GaussianDominationReport:
    """Grid check of g < exp(-pi (l^2-1) x^2 / 2) on (0, 1/l]."""

    l: int
    grid_size: int
    max_diff: float
    argmax_x: float
    violation_count: int
    ok: bool


# strict inequalities are asserted with this absolute slack; rounding alone
# can produce tiny positives at equality-adjacent points (none occur here)
STRICT_SLACK = 1e-15


def check_first_arch_domination(spec: KernelSpec, grid_size: int) -> GaussianDominationReport:
    """Check the first-arch domination on a uniform grid of (0, 1/l].

    Evaluates both sides at x = i/(grid_size*l), i = 1..grid_size, and
    reports the largest value of (kernel - gaussian), which must stay below
    the strictness slack at every point.
    """
    if grid_size < 2:
        raise DomainError(f"grid_size must be >= 2, got {grid_size}")
    l = spec.l
    xs = np.arange(1, grid_size + 1, dtype=float) / (grid_size * l)
    diff = kernel_values(l, xs) - gaussian_values(l, xs)
    i = int(np.argmax(diff))
    max_diff = float(diff[i])
    violations = int(np.count_nonzero(diff >= STRICT_SLACK))
    return GaussianDominationReport(
        l=l,
        grid_size=grid_size,
        max_diff=max_diff,
        argmax_x=float(xs[i]),
        violation_count=violations,
        ok=max_diff < STRICT_SLACK,
    )
