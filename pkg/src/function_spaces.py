"""
Function-space norms on the line and on half planes.

H^{1/2} and BMO/VMO act on SampledLineFunction; the Dirichlet, Bloch, B2,
Bers-L2 and Weil-Petersson norms act on HalfPlaneField samples with the
hyperbolic density 1/|y|.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid

from .constants import JN_C1, JN_C2, MIN_H12_NODES, POISSON_GAP_K
from .core_numerics import HalfPlaneField, HalfPlaneGrid, SampledLineFunction, integrate_line
from .errors import NotBeltramiError, ParameterError
from .models import NormReport

logger = logging.getLogger(__name__)

ROW_BLOCK = 256
DENSE_FACTOR = 8


@dataclass(frozen=True)
class HyperbolicDensity:
    orientation: str = "upper"

    def __call__(self, z):
        return 1.0 / np.abs(np.imag(z))


@dataclass(eq=False)
class BeltramiField(HalfPlaneField):
    """A HalfPlaneField with sup|mu| < 1"""

    def __post_init__(self):
        super().__post_init__()
        sup = float(np.abs(self.values).max())
        if sup >= 1.0:
            raise NotBeltramiError(f"sup|mu| = {sup:.6g} is not below 1", sup=sup)

    @property
    def sup(self) -> float:
        return float(np.abs(self.values).max())


def remove_mean(u: SampledLineFunction) -> SampledLineFunction:
    """Representative of u modulo constants with zero mean over its support"""
    Lb = u.support if u.support is not None else u.grid.half_extent
    mean = integrate_line(u, -Lb, Lb) / (2.0 * Lb)
    return u.with_values(u.values - mean)


# ---- H^{1/2} ----
def h12_seminorm(u: SampledLineFunction) -> NormReport:
    grid = u.grid
    if grid.n < MIN_H12_NODES:
        logger.warning("H^1/2 seminorm on %d nodes is below the %d-node policy", grid.n, MIN_H12_NODES)
    x = grid.nodes
    v = np.asarray(u.values, dtype=complex)
    w = grid.trapezoid_weights()
    band = 2.0 * grid.max_spacing

    total = 0.0
    for start in range(0, grid.n, ROW_BLOCK):
        rows = slice(start, min(start + ROW_BLOCK, grid.n))
        ds = x[rows, None] - x[None, :]
        keep = np.abs(ds) > band
        diff2 = np.abs(v[rows, None] - v[None, :]) ** 2
        kernel = np.where(keep, diff2 / np.where(keep, ds, 1.0) ** 2, 0.0)
        total += float(w[rows] @ (kernel @ w))

    L = grid.half_extent
    c_left, c_right = v[0], v[-1]
    right = np.abs(v - c_right) ** 2 / np.maximum(L - x, band)
    left = np.abs(v - c_left) ** 2 / np.maximum(x + L, band)
    total += 2.0 * float(w @ (right + left))

    if abs(c_right - c_left) > 1e-9 * max(1.0, float(np.abs(v).max())):
        logger.warning("tails differ by %.3g; the tail-tail interaction is not included",
                       abs(c_right - c_left))
    value = np.sqrt(max(total, 0.0)) / (2.0 * np.pi)
    return NormReport(value=value, grid_size=grid.n, exclusion_band=band, method="double-integral")


# ---- BMO / VMO ----
def _interval_samples(u: SampledLineFunction, a: float, b: float):
    x = u.grid.nodes
    lo, hi = np.searchsorted(x, [a, b], side="right")
    xs = np.concatenate(([a], x[lo:hi][x[lo:hi] < b], [b]))
    return xs, u(xs)


def mean_oscillation(u: SampledLineFunction, a: float, b: float) -> float:
    xs, vs = _interval_samples(u, a, b)
    length = b - a
    mean = trapezoid(vs, xs) / length
    return float(trapezoid(np.abs(vs - mean), xs) / length)


def _interval_family(L: float, min_length: float, family: str) -> Iterable[Tuple[float, float]]:
    k = 0
    while True:
        length = 2.0 * L / 2 ** k
        if length < min_length * (1 - 1e-12):
            return
        step = length if family == "dyadic" else length / DENSE_FACTOR
        count = int(round((2.0 * L - length) / step)) + 1
        for j in range(count):
            a = -L + j * step
            yield a, min(a + length, L)
        k += 1


def bmo_norm(u: SampledLineFunction, intervals: str = "dyadic") -> NormReport:
    """Sup of mean oscillation over dyadic (or 8x denser) subintervals down to 4 cells"""
    if intervals not in ("dyadic", "dense"):
        raise ParameterError(f"unknown interval family '{intervals}'")
    min_length = 4.0 * u.grid.max_spacing
    best, count = 0.0, 0
    for a, b in _interval_family(u.grid.half_extent, min_length, intervals):
        best = max(best, mean_oscillation(u, a, b))
        count += 1
    return NormReport(value=best, grid_size=u.grid.n, method=f"bmo-{intervals}",
                      details={"intervals": count})


def vmo_modulus(u: SampledLineFunction, scale: float) -> float:
    """Largest mean oscillation over dyadic intervals of length at most scale"""
    min_length = 4.0 * u.grid.max_spacing
    if scale < min_length * (1 - 1e-12):
        raise ParameterError(f"scale {scale} is below 4 grid cells ({min_length})")
    best = 0.0
    for a, b in _interval_family(u.grid.half_extent, min_length, "dyadic"):
        if b - a <= scale * (1 + 1e-12):
            best = max(best, mean_oscillation(u, a, b))
    return best


def vmo_order(u: SampledLineFunction, scales: Sequence[float]) -> float:
    """Observed order of the VMO modulus by a log-log slope fit"""
    moduli = np.array([vmo_modulus(u, s) for s in scales])
    return float(np.polyfit(np.log(scales), np.log(moduli), 1)[0])


# ---- Half-plane norms ----
def dirichlet_seminorm(phi: HalfPlaneField) -> NormReport:
    """((1/pi) int |phi'|^2 dx dy)^(1/2) with phi' given as the field"""
    energy = float(np.sum(np.abs(phi.values) ** 2 * phi.grid.area_weights())) / np.pi
    return NormReport(value=np.sqrt(energy), grid_size=phi.values.size, method="dirichlet", energy=energy)


def bloch_seminorm(phi_prime: HalfPlaneField) -> NormReport:
    lam = HyperbolicDensity(phi_prime.grid.orientation)
    value = float(np.max(np.abs(phi_prime.values) / lam(phi_prime.grid.points)))
    return NormReport(value=value, grid_size=phi_prime.values.size, method="bloch")


def b2_norm(phi: HalfPlaneField) -> NormReport:
    lam = HyperbolicDensity(phi.grid.orientation)
    value = float(np.max(np.abs(phi.values) / lam(phi.grid.points) ** 2))
    return NormReport(value=value, grid_size=phi.values.size, method="b2")


def bers_l2_norm(phi: HalfPlaneField) -> NormReport:
    y2 = phi.grid.levels[:, None] ** 2
    energy = float(np.sum(np.abs(phi.values) ** 2 * y2 * phi.grid.area_weights())) / np.pi
    return NormReport(value=np.sqrt(energy), grid_size=phi.values.size, method="bers-l2", energy=energy)


def wp_energy(mu: HalfPlaneField) -> float:
    return float(np.sum(np.abs(mu.values) ** 2 * mu.grid.hyperbolic_weights())) / np.pi


def wp_norm(mu: HalfPlaneField) -> NormReport:
    """sup|mu| + ((1/pi) int |mu|^2 / y^2)^(1/2)"""
    sup = float(np.abs(mu.values).max())
    if sup >= 1.0:
        raise NotBeltramiError(f"sup|mu| = {sup:.6g} is not below 1", sup=sup)
    energy = wp_energy(mu)
    return NormReport(value=sup + np.sqrt(energy), grid_size=mu.values.size, method="wp",
                      sup=sup, energy=energy)


# ---- John-Nirenberg ----
@dataclass
class JohnNirenbergReport:
    interval: Tuple[float, float]
    bmo: float
    distribution: Dict[float, float]
    exponential_mean: float
    p_means: Dict[int, float]
    bound: Optional[float]
    within_bound: Optional[bool]


def john_nirenberg_probe(u: SampledLineFunction, I: Tuple[float, float],
                         lambda_grid: Sequence[float], bmo: Optional[float] = None) -> JohnNirenbergReport:
    if bmo is None:
        bmo = bmo_norm(u).value
    a, b = I
    xs, vs = _interval_samples(u, a, b)
    length = b - a
    dev = np.abs(vs - trapezoid(vs, xs) / length)

    # measure of {|u - u_I| >= lambda} from trapezoid node weights
    wts = np.zeros(xs.size)
    wts[:-1] += 0.5 * np.diff(xs)
    wts[1:] += 0.5 * np.diff(xs)
    distribution = {float(lam): float(wts[dev >= lam].sum() / length) if lam > 0 else 1.0
                    for lam in lambda_grid}
    if np.all(dev == 0):
        distribution = {float(lam): 0.0 for lam in lambda_grid}

    exp_mean = float(trapezoid(np.expm1(dev), xs) / length)
    p_means = {p: float(trapezoid(dev ** p, xs) / length) for p in (1, 2, 4)}
    bound = JN_C1 * bmo / (JN_C2 - bmo) if bmo < JN_C2 else None
    within = None if bound is None else exp_mean <= bound
    return JohnNirenbergReport((a, b), bmo, distribution, exp_mean, p_means, bound, within)


# ---- Poisson extension ----
def poisson_at(u: SampledLineFunction, z) -> np.ndarray:
    """Poisson integral of the piecewise-linear interpolant of u, constant tails"""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    t = u.grid.nodes
    v = np.asarray(u.values, dtype=complex)
    slope = np.diff(v) / np.diff(t)
    out = np.empty(z.shape, dtype=complex)
    flat_z, flat_out = z.ravel(), out.ravel()
    for start in range(0, flat_z.size, ROW_BLOCK):
        zz = flat_z[start:start + ROW_BLOCK]
        x, y = zz.real[:, None], np.abs(zz.imag)[:, None]
        theta = np.arctan((t[None, :] - x) / y)
        logr2 = np.log((t[None, :] - x) ** 2 + y ** 2)
        A = v[None, :-1] + slope[None, :] * (x - t[None, :-1])
        inner = (A * np.diff(theta, axis=1)).sum(axis=1) / np.pi
        inner += (slope[None, :] * np.diff(logr2, axis=1)).sum(axis=1) * y[:, 0] / (2 * np.pi)
        tails = v[0] * (theta[:, 0] + np.pi / 2) / np.pi + v[-1] * (np.pi / 2 - theta[:, -1]) / np.pi
        flat_out[start:start + ROW_BLOCK] = inner + tails
    return out


def poisson_extend(u: SampledLineFunction, grid: HalfPlaneGrid) -> HalfPlaneField:
    return HalfPlaneField(grid, poisson_at(u, grid.points))


@dataclass
class GapProbeReport:
    bmo: float
    max_gap: float
    max_ratio: float
    constant: float
    within_bound: bool
    samples: List[Tuple[float, float, float]] = field(default_factory=list)


def poisson_gap_probe(u: SampledLineFunction, n_samples: int = 100, seed: int = 0,
                      y_range: Tuple[float, float] = (0.05, 2.0)) -> GapProbeReport:
    """Interval mean over [x-y, x+y] against the Poisson value at x+iy"""
    rng = np.random.default_rng(seed)
    L = u.grid.half_extent
    bmo = bmo_norm(u).value
    samples = []
    for _ in range(n_samples):
        y = rng.uniform(*y_range)
        x = rng.uniform(-L + y, L - y)
        mean = integrate_line(u, x - y, x + y) / (2 * y)
        gap = abs(mean - poisson_at(u, x + 1j * y)[0])
        samples.append((x, y, float(gap)))
    max_gap = max(s[2] for s in samples)
    ratio = max_gap / bmo if bmo > 0 else (0.0 if max_gap < 1e-12 else np.inf)
    return GapProbeReport(bmo, max_gap, ratio, POISSON_GAP_K, ratio <= POISSON_GAP_K, samples)
