"""Probability mass functions on the integers: convolution and max-entropy data.

A :class:`Pmf` is an offset plus a finite weight vector with trimmed support.
The quantities of interest are the maximum probability M, the max-order
entropy H = -log M, and the entropy power N = M^(-2).  Convolution of
independent summands is exact: direct summation for small supports,
transform-based beyond a size threshold, with both paths agreeing to
float accuracy.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .errors import ConvolutionOverflowError, DomainError

MASS_TOL = 1e-12
# products of support sizes up to this use plain summation; beyond it the FFT
DIRECT_LIMIT = 2**16
SUPPORT_CAP = 2**24


@dataclass(frozen=True, eq=False)
class Pmf:
    """Integer-valued law: support starts at ``offset``, weights sum to 1."""

    offset: int
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 1 or len(w) == 0:
            raise DomainError("weights must be a nonempty 1-D sequence")
        if not np.all(np.isfinite(w)):
            raise DomainError("weights must be finite")
        if np.any(w < 0.0):
            raise DomainError("weights must be nonnegative")
        if w[0] == 0.0 or w[-1] == 0.0:
            raise DomainError("support must be trimmed: end weights must be positive")
        if abs(float(w.sum()) - 1.0) > MASS_TOL:
            raise DomainError(f"weights sum to {w.sum()!r}, not 1")
        w.setflags(write=False)
        object.__setattr__(self, "offset", int(self.offset))
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def max_weight(self) -> float:
        return float(self.weights.max())

    def to_json_dict(self) -> dict:
        return {"offset": self.offset, "weights": [float(v) for v in self.weights]}

    @classmethod
    def from_json_dict(cls, d: dict) -> "Pmf":
        return cls(offset=d["offset"], weights=np.asarray(d["weights"], dtype=float))

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json(cls, s: str) -> "Pmf":
        return cls.from_json_dict(json.loads(s))


@dataclass(frozen=True)
class EntropySummary:
    """Max probability with its entropy and entropy power."""

    M: float
    H_inf: float
    N_inf: float


def uniform(l: int) -> Pmf:
    """Uniform law on {1, ..., l}."""
    if isinstance(l, bool) or int(l) != l or l < 1:
        raise DomainError(f"uniform support size must be a positive integer, got {l!r}")
    return Pmf(offset=1, weights=np.full(int(l), 1.0 / int(l)))


def entropy_summary(f: Pmf) -> EntropySummary:
    m = f.max_weight
    return EntropySummary(M=m, H_inf=-math.log(m), N_inf=m**-2)


def l_index_from_max(m: float) -> int:
    """The unique integer l with m in (1/(l+1), 1/l].

    Computed as floor(1/m) with an exactness guard so that m stored as a
    rounded 1/l still maps to l.
    """
    if not 0.0 < m <= 1.0:
        raise DomainError(f"max probability {m} outside (0, 1]")
    inv = 1.0 / m
    k = round(inv)
    if k >= 1 and abs(inv - k) < 1e-12 and m * k <= 1.0:
        return int(k)
    return int(math.floor(inv))


def l_index(f: Pmf) -> int:
    return l_index_from_max(f.max_weight)


def _clean_transform_weights(w: np.ndarray) -> np.ndarray:
    neg = w < 0.0
    if np.any(w < -1e-15):
        raise DomainError(f"transform produced weight {w.min()!r} below -1e-15")
    if np.any(neg):
        w = np.where(neg, 0.0, w)
    return w / w.sum()


def convolve(a: Pmf, b: Pmf) -> Pmf:
    """Exact law of the sum of independent variables with laws a and b."""
    out_len = len(a) + len(b) - 1
    if out_len > SUPPORT_CAP:
        raise ConvolutionOverflowError(
            f"convolution support {out_len} exceeds cap {SUPPORT_CAP}"
        )
    if len(a) * len(b) <= DIRECT_LIMIT:
        w = np.convolve(a.weights, b.weights)
    else:
        w = _clean_transform_weights(fftconvolve(a.weights, b.weights))
    start = 0
    end = len(w)
    while w[start] == 0.0:
        start += 1
    while w[end - 1] == 0.0:
        end -= 1
    return Pmf(offset=a.offset + b.offset + start, weights=w[start:end])


def convolve_many(pmfs) -> Pmf:
    pmfs = list(pmfs)
    if not pmfs:
        raise DomainError("need at least one pmf")
    acc = pmfs[0]
    for f in pmfs[1:]:
        acc = convolve(acc, f)
    return acc
