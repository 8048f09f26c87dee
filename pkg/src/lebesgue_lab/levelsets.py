"""Distribution-function comparison between the kernel and its Gaussian majorant.

For a level y in (0, 1) the kernel's distribution function

    G(y) = measure{ x in [0, 1/2] : g(x) > y }

is assembled arch by arch: the first arch is monotone decreasing (one
crossing), every full arch contributes an interval around its peak (two
crossings), and for odd lengths the final half-arch rising to g(1/2) = 1/l
contributes at most one more crossing.  With F the truncated Gaussian's
distribution function (closed form, see kernel.py), the module locates the
single level y0 where F - G changes sign from - to +, evaluates the
comparison functional (integral f^p - integral g^p) / (p y0^p) whose
monotonicity in p transfers the p = 2 comparison upward, and validates the
closed-form slope bounds that make the sign change unique.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, PreconditionError, VerificationError
from .kernel import (
    PI,
    KernelSpec,
    TruncatedGaussian,
    gaussian_distribution_function,
    kernel_slope_values,
    kernel_values,
)
from .quadrature import (
    DEFAULT_CONFIG,
    QuadratureConfig,
    adaptive_integral,
    integrate_kernel_power,
)

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

# levels this close to an arch peak are excluded from slope checks (the
# derivative of G is undefined exactly at the peaks)
PEAK_EXCLUSION = 1e-9


@dataclass(frozen=True)
class BumpProfile:
    """One arch of the kernel: its interval and peak."""

    index: int
    x_lo: float
    x_hi: float
    peak_x: float
    peak_y: float


@dataclass(frozen=True)
class SignChangeReport:
    l: int
    y0: float
    crossings: int
    F0_lt_G0: bool
    G_lt_F_above_y1: bool


@dataclass(frozen=True)
class SlopeBoundCheck:
    """Root census and slope bounds at one level between the floor and y_1."""

    l: int
    y: float
    band: int
    root_count: int
    expected_roots: int
    sum_inverse_slope: float
    sum_lower_bound: float
    worst_bound_margin: float
    ok: bool


def _golden_max(fn, a: float, b: float, tol: float = 1e-13):
    """Golden-section maximum of a unimodal scalar function on [a, b]."""
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc < fd:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fn(d)
        else:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fn(c)
    x = 0.5 * (a + b)
    return x, fn(x)


@lru_cache(maxsize=None)
def bump_profiles(spec: KernelSpec) -> tuple[BumpProfile, ...]:
    """All arches of the kernel on [0, 1/2] with located peaks.

    Arch 0 is the monotone lead-in [0, 1/l] with its maximum 1 at the origin;
    arch m >= 1 peaks strictly inside [m/l, (m+1)/l]; for odd l the final
    half-arch peaks at the right endpoint 1/2 with height exactly 1/l.
    """
    l = spec.l

    def g1(x):
        return float(kernel_values(l, np.array([x]))[0])

    profiles = [BumpProfile(0, 0.0, 1.0 / l, 0.0, 1.0)]
    full = l // 2 - 1
    for m in range(1, full + 1):
        a, b = m / l, (m + 1) / l
        px, py = _golden_max(g1, a, b)
        profiles.append(BumpProfile(m, a, b, px, py))
    if l % 2 == 1:
        m = l // 2
        profiles.append(BumpProfile(m, m / l, 0.5, 0.5, g1(0.5)))
    return tuple(profiles)


def _segment_table(spec: KernelSpec, ys: np.ndarray):
    """Flat table of monotone segments straddled by each level.

    Returns parallel arrays (level_row, lo, hi, increasing, half_arch, arch);
    one row per (level, segment) pair.  A level's superlevel measure is then
    sum(decreasing roots) - sum(increasing roots) + 1/2 per half arch, since
    each descending crossing closes an interval that an ascending crossing
    (or the left endpoint 0) opened.
    """
    rows, los, his, incs, halves, arches = [], [], [], [], [], []
    for prof in bump_profiles(spec):
        idx = np.nonzero(ys < prof.peak_y)[0]
        if len(idx) == 0:
            continue
        if prof.index == 0:
            rows.append(idx)
            los.append(np.full(len(idx), 0.0))
            his.append(np.full(len(idx), prof.x_hi))
            incs.append(np.zeros(len(idx), dtype=bool))
            halves.append(np.zeros(len(idx), dtype=bool))
            arches.append(np.zeros(len(idx), dtype=int))
        elif prof.peak_x == prof.x_hi:  # odd-l half arch
            rows.append(idx)
            los.append(np.full(len(idx), prof.x_lo))
            his.append(np.full(len(idx), prof.x_hi))
            incs.append(np.ones(len(idx), dtype=bool))
            halves.append(np.ones(len(idx), dtype=bool))
            arches.append(np.full(len(idx), prof.index, dtype=int))
        else:
            for lo, hi, inc in (
                (prof.x_lo, prof.peak_x, True),
                (prof.peak_x, prof.x_hi, False),
            ):
                rows.append(idx)
                los.append(np.full(len(idx), lo))
                his.append(np.full(len(idx), hi))
                incs.append(np.full(len(idx), inc, dtype=bool))
                halves.append(np.zeros(len(idx), dtype=bool))
                arches.append(np.full(len(idx), prof.index, dtype=int))
    if not rows:
        empty = np.empty(0)
        return (np.empty(0, dtype=int), empty, empty,
                np.empty(0, dtype=bool), np.empty(0, dtype=bool), np.empty(0, dtype=int))
    return (
        np.concatenate(rows),
        np.concatenate(los),
        np.concatenate(his),
        np.concatenate(incs),
        np.concatenate(halves),
        np.concatenate(arches),
    )


def _bisect_segments(l: int, y_flat, lo, hi, inc):
    # 60 halvings take the widest possible bracket below 1e-15
    lo = lo.copy()
    hi = hi.copy()
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        move_lo = (kernel_values(l, mid) > y_flat) ^ inc
        lo = np.where(move_lo, mid, lo)
        hi = np.where(move_lo, hi, mid)
    return 0.5 * (lo + hi)


def superlevel_measure_many(spec: KernelSpec, ys) -> np.ndarray:
    """Vectorized measure of {x in [0, 1/2] : g(x) > y} for a batch of levels."""
    ys = np.asarray(ys, dtype=float)
    if np.any((ys <= 0.0) | (ys >= 1.0)):
        raise DomainError("levels must lie in (0, 1)")
    row, lo, hi, inc, half, _ = _segment_table(spec, ys)
    out = np.zeros(len(ys))
    if len(row) == 0:
        return out
    roots = _bisect_segments(spec.l, ys[row], lo, hi, inc)
    np.add.at(out, row, np.where(inc, -roots, roots))
    np.add.at(out, row[half], 0.5)
    return out


def superlevel_measure(spec: KernelSpec, y: float) -> float:
    """Measure of the superlevel set {x in [0, 1/2] : g(x) > y}."""
    return float(superlevel_measure_many(spec, np.array([float(y)]))[0])


def level_crossings(spec: KernelSpec, y: float):
    """All solutions of g(x) = y in [0, 1/2], with their arch indices.

    Returns (roots, arches, increasing) as parallel arrays in left-to-right
    segment order; 60 rounds of bisection pin each root well below 1e-13.
    """
    if not 0.0 < y < 1.0:
        raise DomainError(f"level y = {y} outside (0, 1)")
    ys = np.array([float(y)])
    _, lo, hi, inc, _, arch = _segment_table(spec, ys)
    if len(lo) == 0:
        return np.empty(0), np.empty(0, dtype=int), np.empty(0, dtype=bool)
    roots = _bisect_segments(spec.l, np.full(len(lo), float(y)), lo, hi, inc)
    order = np.argsort(roots, kind="stable")
    return roots[order], arch[order], inc[order]


def default_level_grid(spec: KernelSpec, n: int = 2000) -> np.ndarray:
    """Log-spaced levels augmented with every arch peak and the floor level."""
    levels = np.geomspace(1e-4, 1.0 - 1e-6, n)
    knots = [p.peak_y for p in bump_profiles(spec) if p.index >= 1]
    knots.append(TruncatedGaussian.from_length(spec.l).y_last)
    return np.unique(np.concatenate([levels, np.array(knots)]))


def detect_sign_change(spec: KernelSpec, scan: np.ndarray | None = None) -> SignChangeReport:
    """Scan F - G over a level grid and refine its single sign change.

    For l >= 6 the difference must cross exactly once, from - to +; any other
    count raises.  For l < 6 the report is returned without assertion, since
    the comparison is only claimed from 6 on.
    """
    if scan is None:
        scan = default_level_grid(spec)
    else:
        scan = np.asarray(scan, dtype=float)
        if len(scan) < 1000:
            raise PreconditionError(f"scan needs >= 1000 levels, got {len(scan)}")
        scan = np.unique(scan)
    tg = TruncatedGaussian.from_length(spec.l)
    l2m1 = spec.l * spec.l - 1
    f_vals = np.where(
        scan < tg.y_last, tg.x_c, np.sqrt(2.0 * np.log(1.0 / scan) / (PI * l2m1))
    )
    diff = f_vals - superlevel_measure_many(spec, scan)

    sign = np.sign(diff)
    nz = sign != 0
    compact = sign[nz]
    flips = np.nonzero(compact[:-1] * compact[1:] < 0)[0]
    crossings = len(flips)

    y0 = math.nan
    if crossings >= 1:
        idx_nz = np.nonzero(nz)[0]
        i = idx_nz[flips[0]]
        j = idx_nz[flips[0] + 1]
        lo, hi = float(scan[i]), float(scan[j])
        flo = diff[i]
        while hi - lo > 1e-10:
            mid = 0.5 * (lo + hi)
            fm = gaussian_distribution_function(tg, mid) - superlevel_measure(spec, mid)
            if (fm < 0.0) == (flo < 0.0):
                lo = mid
            else:
                hi = mid
        y0 = 0.5 * (lo + hi)

    y1 = bump_profiles(spec)[1].peak_y if len(bump_profiles(spec)) > 1 else 1.0
    above = scan > y1
    g_lt_f_above = bool(np.all(diff[above] > 0.0)) if np.any(above) else True
    report = SignChangeReport(
        l=spec.l,
        y0=y0,
        crossings=crossings,
        F0_lt_G0=tg.x_c < 0.5,
        G_lt_F_above_y1=g_lt_f_above,
    )
    if spec.l >= 6 and (crossings != 1 or not report.F0_lt_G0 or not g_lt_f_above):
        raise VerificationError(f"sign-change pattern violated: {report}")
    return report


def comparison_functional(
    spec: KernelSpec,
    p: float,
    y0: float,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> float:
    """(2 int_0^{x_c} f^p - int |D_l|^p) / (p y0^p); nondecreasing in p."""
    if p < 2.0:
        raise PreconditionError(f"comparison functional needs p >= 2, got {p}")
    if not 0.0 < y0 < 1.0:
        raise DomainError(f"crossing level y0 = {y0} outside (0, 1)")
    tg = TruncatedGaussian.from_length(spec.l)
    l2m1 = spec.l * spec.l - 1

    def f_pow(x):
        return np.exp(-p * PI * l2m1 * np.asarray(x, dtype=float) ** 2 / 2.0)

    f_int, _, ok_f = adaptive_integral(f_pow, [(0.0, tg.x_c)], cfg)
    g_int, _, ok_g = integrate_kernel_power(spec, p, cfg)
    if not (ok_f and ok_g):
        raise VerificationError(f"comparison functional quadrature did not converge at p={p}")
    return (2.0 * f_int - g_int) / (p * y0**p)


def first_arch_slope_cap(l: int) -> float:
    """Slope bound on the first arch: (l pi / 2) ((pi/l)/sin(pi/l))^2 <= 2l."""
    return (l * PI / 2.0) * ((PI / l) / math.sin(PI / l)) ** 2


def arch_slope_cap(l: int, k: int) -> float:
    """Slope bound l pi^2 / (4k) for crossings inside arch k >= 1."""
    if k < 1:
        raise DomainError("arch index must be >= 1")
    return l * PI**2 / (4.0 * k)


def slope_sum(spec: KernelSpec, y: float) -> float:
    """Sum of 1/|g'| over all crossings of the level y (equals |G'(y)|)."""
    roots, _, _ = level_crossings(spec, y)
    slopes = np.abs(kernel_slope_values(spec.l, roots))
    return float(np.sum(1.0 / slopes))


def check_derivative_bounds(spec: KernelSpec, y: float) -> SlopeBoundCheck:
    """Validate the root census and slope bounds at a level below y_1.

    The level must lie strictly between the Gaussian floor and the first arch
    peak, away from every peak by the exclusion window.  For a level in the
    band below arch m's peak, the census is one root on the first arch and
    two per full arch up to m (one on a final half-arch), and the inverse
    slopes must sum to at least 1/(2l) + 4 m^2 / (l pi^2).
    """
    l = spec.l
    if l < 6:
        raise PreconditionError(f"slope checks require l >= 6, got {l}")
    profiles = bump_profiles(spec)
    tg = TruncatedGaussian.from_length(l)
    y1 = profiles[1].peak_y
    if not tg.y_last < y < y1:
        raise PreconditionError(f"level {y} outside ({tg.y_last}, {y1})")
    for prof in profiles[1:]:
        if abs(y - prof.peak_y) < PEAK_EXCLUSION:
            raise PreconditionError(f"level {y} within exclusion window of an arch peak")

    band = max(p.index for p in profiles[1:] if p.peak_y > y)
    half_arch = l % 2 == 1 and band == l // 2
    expected = 1 + 2 * band - (1 if half_arch else 0)

    roots, arch, _ = level_crossings(spec, y)
    if len(roots) != expected:
        raise VerificationError(
            f"root census mismatch at l={l}, y={y}: found {len(roots)}, expected {expected}"
        )

    slopes = np.abs(kernel_slope_values(l, roots))
    worst = -math.inf
    slack = 1e-9
    ok = True
    for k, s in zip(arch, slopes):
        cap = first_arch_slope_cap(l) if k == 0 else arch_slope_cap(l, int(k))
        worst = max(worst, s - cap)
        if s > cap + slack:
            ok = False
    inv_sum = float(np.sum(1.0 / slopes))
    lower = 1.0 / (2.0 * l) + 4.0 * band * band / (l * PI**2)
    if inv_sum < lower - slack:
        ok = False
    check = SlopeBoundCheck(
        l=l,
        y=float(y),
        band=band,
        root_count=len(roots),
        expected_roots=expected,
        sum_inverse_slope=inv_sum,
        sum_lower_bound=lower,
        worst_bound_margin=worst,
        ok=ok,
    )
    if not ok:
        raise VerificationError(f"slope bound failed: {check}")
    return check
