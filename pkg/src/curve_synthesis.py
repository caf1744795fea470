"""
Curves from tangent angles and back: gamma_u, tangent-angle recovery,
chord-arc constants, normalization and the reflection J(z) = conj(z).
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .config import PAIR_BUDGET
from .constants import MIN_CURVE_SAMPLES, UNIT_SPEED_EPS
from .core_numerics import (
    LineGrid,
    MonotoneBoundaryMap,
    SampledLineFunction,
    cumulative_from_zero,
    make_line_grid,
)
from .errors import (
    DegenerateChordError,
    InvariantViolation,
    ParameterError,
    RangeError,
)
from .function_spaces import h12_seminorm, remove_mean

logger = logging.getLogger(__name__)

BLOCK = 256


@dataclass(eq=False)
class CurveSamples:
    points: np.ndarray
    arc_lengths: np.ndarray
    normalized: bool = False
    gauge: Dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=complex)
        self.arc_lengths = np.asarray(self.arc_lengths, dtype=float)
        if self.points.shape != self.arc_lengths.shape:
            raise ParameterError("points and arc lengths must have the same length")
        if np.any(np.diff(self.arc_lengths) <= 0):
            raise InvariantViolation("arc-length tags must be strictly increasing")

    @property
    def n(self) -> int:
        return self.points.size

    def speed_ratios(self) -> np.ndarray:
        return np.abs(np.diff(self.points)) / np.diff(self.arc_lengths)

    def is_unit_speed(self, eps: float = UNIT_SPEED_EPS) -> bool:
        r = self.speed_ratios()
        return bool(np.all(r >= 1 - eps) and np.all(r <= 1 + 1e-12))

    def at(self, s) -> np.ndarray:
        """Point(s) at arc length s, straight-ray tails beyond the window"""
        s = np.asarray(s, dtype=float)
        z, t = self.points, self.arc_lengths
        out = np.interp(s, t, z.real) + 1j * np.interp(s, t, z.imag)
        left, right = s < t[0], s > t[-1]
        if left.any():
            d = (z[1] - z[0]) / (t[1] - t[0])
            out = np.where(left, z[0] + d * (s - t[0]), out)
        if right.any():
            d = (z[-1] - z[-2]) / (t[-1] - t[-2])
            out = np.where(right, z[-1] + d * (s - t[-1]), out)
        return out


@dataclass(eq=False)
class TangentAngle:
    b: SampledLineFunction
    mean_removed: bool = False

    def __post_init__(self):
        if not self.b.is_real:
            raise InvariantViolation("a tangent angle must be real-valued")

    @property
    def grid(self) -> LineGrid:
        return self.b.grid

    def __neg__(self) -> "TangentAngle":
        return TangentAngle(self.b.with_values(-np.real(self.b.values)), self.mean_removed)


def variation_support(grid: LineGrid, values: np.ndarray, tol: float = 1e-12) -> float:
    """Smallest L_b (up to one cell) beyond which values are constant on each tail"""
    x = grid.nodes
    scale = max(1.0, float(np.abs(values).max()))
    varying = ((x > 0) & (np.abs(values - values[-1]) > tol * scale)) | \
              ((x < 0) & (np.abs(values - values[0]) > tol * scale))
    if not varying.any():
        return float(grid.max_spacing)
    return float(min(np.abs(x[varying]).max() + grid.max_spacing, grid.half_extent))


def as_angle(b: SampledLineFunction, mean_removed: bool = False) -> TangentAngle:
    values = np.real(b.values).astype(float)
    support = variation_support(b.grid, values)
    angle = SampledLineFunction(b.grid, values, support)
    if mean_removed:
        angle = remove_mean(angle)
    return TangentAngle(angle, mean_removed)


# ---- Operations ----
def gamma_u(u: SampledLineFunction) -> Tuple[MonotoneBoundaryMap, CurveSamples]:
    """gamma_u(x) = int_0^x exp(i u(t)) dt"""
    grid = u.grid
    gamma = cumulative_from_zero(grid, np.exp(1j * np.asarray(u.values)))
    if u.is_real:
        s = grid.nodes.copy()
    else:
        s = np.concatenate(([0.0], np.cumsum(np.abs(np.diff(gamma)))))
        s -= np.interp(0.0, grid.nodes, s)
    return MonotoneBoundaryMap(grid, gamma, False), CurveSamples(gamma, s)


def curve_from_angle(b: TangentAngle) -> CurveSamples:
    return gamma_u(b.b)[1]


def tangent_angle_from_curve(c: CurveSamples, mean_removed: bool = False) -> TangentAngle:
    """Unwrapped argument of the chords, averaged onto the sample nodes"""
    chords = np.diff(c.points) / np.diff(c.arc_lengths)
    if np.any(chords == 0):
        k = int(np.flatnonzero(chords == 0)[0])
        raise DegenerateChordError(f"duplicate consecutive points at sample {k}", index=k)
    increments = np.angle(chords[1:] / chords[:-1])
    theta = np.angle(chords[0]) + np.concatenate(([0.0], np.cumsum(increments)))
    values = np.empty(c.n)
    values[0], values[-1] = theta[0], theta[-1]
    values[1:-1] = 0.5 * (theta[:-1] + theta[1:])

    try:
        grid = LineGrid(c.arc_lengths, float(c.arc_lengths[-1]), "uniform")
    except InvariantViolation:
        # arc lengths are not symmetric: resample onto a symmetric window
        half = float(min(-c.arc_lengths[0], c.arc_lengths[-1]))
        if half <= 0:
            raise RangeError(f"arc lengths must straddle s = 0, got [{c.arc_lengths[0]:.6g}, {c.arc_lengths[-1]:.6g}]")
        grid = make_line_grid(half, c.n, "uniform")
        values = np.interp(grid.nodes, c.arc_lengths, values)
    return as_angle(SampledLineFunction(grid, values), mean_removed)


def chord_arc_constant(c: CurveSamples, pair_budget: int = PAIR_BUDGET, seed: int = 0) -> float:
    """max |s1 - s2| / |z(s1) - z(s2)| - 1 over all (or stratified) sample pairs"""
    n = c.n
    if n < MIN_CURVE_SAMPLES:
        raise ParameterError(f"need at least {MIN_CURVE_SAMPLES} samples, got {n}")
    z, s = c.points, c.arc_lengths
    worst = 1.0
    if n * (n - 1) // 2 <= pair_budget:
        for d in range(1, n):
            chord = np.abs(z[d:] - z[:-d])
            if np.any(chord == 0):
                raise DegenerateChordError("coincident points: curve is not Jordan at this resolution")
            worst = max(worst, float(np.max((s[d:] - s[:-d]) / chord)))
        return max(worst - 1.0, 0.0)

    rng = np.random.default_rng(seed)
    bands = []
    lo = 1
    while lo < n:
        bands.append((lo, min(2 * lo, n)))
        lo *= 2
    per_band = max(pair_budget // len(bands), 1)
    for lo, hi in bands:
        d = rng.integers(lo, hi, size=per_band)
        i = (rng.random(per_band) * (n - d)).astype(int)
        chord = np.abs(z[i + d] - z[i])
        if np.any(chord == 0):
            raise DegenerateChordError("coincident points: curve is not Jordan at this resolution")
        worst = max(worst, float(np.max((s[i + d] - s[i]) / chord)))
    return max(worst - 1.0, 0.0)


def normalize_curve(c: CurveSamples) -> CurveSamples:
    """Translate, rotate and scale so that z(0) = 0, z(1) > 0 and int_0^1 |z'| = 1"""
    s = c.arc_lengths
    if s[0] > 0 or s[-1] < 1:
        raise RangeError(f"s = 0 and s = 1 must be sampled; range is [{s[0]}, {s[-1]}]")
    z0, z1 = c.at(0.0), c.at(1.0)
    if c.is_unit_speed():
        length = 1.0
    else:
        inner = (s > 0) & (s < 1)
        path = np.concatenate(([z0], c.points[inner], [z1]))
        length = float(np.sum(np.abs(np.diff(path))))
    rotation = float(np.angle(z1 - z0))
    factor = np.exp(-1j * rotation) / length
    points = (c.points - z0) * factor
    gauge = {"translation": [float(z0.real), float(z0.imag)], "rotation": rotation, "scale": length}
    return CurveSamples(points, s.copy(), True, gauge)


def reflect_J(c: CurveSamples) -> CurveSamples:
    return CurveSamples(np.conj(c.points), c.arc_lengths.copy(), c.normalized, dict(c.gauge))


def is_jordan(c: CurveSamples) -> bool:
    """True when no two non-adjacent sample chords cross"""
    p = c.points
    a, b = p[:-1], p[1:]
    m = a.size

    def cross(u, v):
        return u.real * v.imag - u.imag * v.real

    for start in range(0, m, BLOCK):
        i = np.arange(start, min(start + BLOCK, m))
        pa, pb = a[i, None], b[i, None]
        d1 = cross(pb - pa, a[None, :] - pa)
        d2 = cross(pb - pa, b[None, :] - pa)
        d3 = cross(b[None, :] - a[None, :], pa - a[None, :])
        d4 = cross(b[None, :] - a[None, :], pb - a[None, :])
        hit = (d1 * d2 < 0) & (d3 * d4 < 0)
        hit &= np.abs(i[:, None] - np.arange(m)[None, :]) >= 2
        if hit.any():
            return False
    return True


def chord_arc_profile(angles: Dict[str, TangentAngle], pair_budget: int = PAIR_BUDGET) -> List[Tuple[str, float, float]]:
    """(name, ||b||_H^1/2, chord-arc constant) sorted by the H^1/2 norm"""
    rows = []
    for name, b in angles.items():
        k = chord_arc_constant(curve_from_angle(b), pair_budget)
        rows.append((name, h12_seminorm(b.b).value, k))
    rows.sort(key=lambda r: r[1])
    return rows
