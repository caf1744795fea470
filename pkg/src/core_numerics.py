"""
Grids, sampled functions, quadrature, interpolation and monotone-map algebra.

Everything here is a pure function of its inputs. The containers are frozen
dataclasses holding numpy arrays; arrays are never mutated after construction.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from .constants import GRADED_STRETCH, MIN_LEVELS, MIN_LINE_NODES
from .errors import DomainError, InvariantViolation, ParameterError

logger = logging.getLogger(__name__)

PROFILES = ("uniform", "graded")
ORIENTATIONS = ("upper", "lower")


# ---- Types ----
@dataclass(frozen=True, eq=False)
class LineGrid:
    nodes: np.ndarray
    half_extent: float
    profile: str = "uniform"

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < MIN_LINE_NODES:
            raise ParameterError(f"a line grid needs at least {MIN_LINE_NODES} nodes")
        if np.any(np.diff(nodes) <= 0):
            raise InvariantViolation("grid nodes must be strictly increasing")
        if not np.allclose(nodes, -nodes[::-1], rtol=0, atol=1e-12 * self.half_extent):
            raise InvariantViolation("grid must be symmetric about 0")
        object.__setattr__(self, "nodes", nodes)

    @property
    def n(self) -> int:
        return self.nodes.size

    @property
    def spacing(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def max_spacing(self) -> float:
        return float(self.spacing.max())

    @property
    def is_uniform(self) -> bool:
        d = self.spacing
        return bool(np.allclose(d, d[0], rtol=1e-9, atol=0))

    def trapezoid_weights(self) -> np.ndarray:
        d = self.spacing
        w = np.zeros(self.n)
        w[:-1] += 0.5 * d
        w[1:] += 0.5 * d
        return w

    def index_of(self, x: float) -> int:
        """Index of the node closest to x"""
        return int(np.argmin(np.abs(self.nodes - x)))


@dataclass(frozen=True, eq=False)
class SampledLineFunction:
    grid: LineGrid
    values: np.ndarray
    support: Optional[float] = None

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.shape != self.grid.nodes.shape:
            raise ParameterError("values must match the grid")
        if not np.all(np.isfinite(values)):
            raise InvariantViolation("sampled function has non-finite values")
        if self.support is not None:
            if self.support <= 0 or self.support > self.grid.half_extent + 1e-12:
                raise ParameterError("support half-extent must lie in (0, L]")
            x = self.grid.nodes
            scale = max(1.0, float(np.abs(values).max()))
            for tail in (x >= self.support, x <= -self.support):
                if tail.any() and np.ptp(values[tail].real) + np.ptp(values[tail].imag) > 1e-9 * scale:
                    raise InvariantViolation("values vary beyond the declared support")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_callable(cls, grid: LineGrid, fn: Callable, support: Optional[float] = None):
        return cls(grid, np.asarray(fn(grid.nodes)), support)

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values) or bool(np.all(self.values.imag == 0))

    @property
    def tails(self):
        return self.values[0], self.values[-1]

    def with_values(self, values) -> "SampledLineFunction":
        return SampledLineFunction(self.grid, values, self.support)

    def __call__(self, x):
        """Piecewise-linear evaluation with constant tails"""
        x = np.asarray(x, dtype=float)
        nodes, v = self.grid.nodes, self.values
        if np.iscomplexobj(v):
            return np.interp(x, nodes, v.real) + 1j * np.interp(x, nodes, v.imag)
        return np.interp(x, nodes, v)


@dataclass(frozen=True, eq=False)
class HalfPlaneGrid:
    x: LineGrid
    levels: np.ndarray
    orientation: str = "upper"
    per_octave: int = 1

    def __post_init__(self):
        levels = np.asarray(self.levels, dtype=float)
        if self.orientation not in ORIENTATIONS:
            raise ParameterError(f"orientation must be one of {ORIENTATIONS}")
        if levels.size < MIN_LEVELS:
            raise ParameterError(f"at least {MIN_LEVELS} levels are required")
        if levels[-1] <= 0 or levels[0] < 1:
            raise InvariantViolation("levels must satisfy y_min > 0 and y_max >= 1")
        ratio = levels[1:] / levels[:-1]
        if not np.allclose(ratio, 2.0 ** (-1.0 / self.per_octave), rtol=1e-9):
            raise InvariantViolation("levels must refine geometrically toward y = 0")
        object.__setattr__(self, "levels", levels)

    @property
    def sign(self) -> float:
        return 1.0 if self.orientation == "upper" else -1.0

    @property
    def y(self) -> np.ndarray:
        """Signed level heights"""
        return self.sign * self.levels

    @property
    def shape(self):
        return (self.levels.size, self.x.n)

    @property
    def points(self) -> np.ndarray:
        return self.x.nodes[None, :] + 1j * self.y[:, None]

    def _cell_ratio(self) -> float:
        q = 2.0 ** (0.5 / self.per_octave)
        return q - 1.0 / q

    def area_weights(self) -> np.ndarray:
        """dx dy weights, each level owning the cell [y/q, y q] with q = 2^(1/2m)"""
        dy = self.levels * self._cell_ratio()
        return dy[:, None] * self.x.trapezoid_weights()[None, :]

    def hyperbolic_weights(self) -> np.ndarray:
        """dx dy / y^2 weights, exact in y for fields constant on each cell"""
        dy = self._cell_ratio() / self.levels
        return dy[:, None] * self.x.trapezoid_weights()[None, :]

    def reflected(self) -> "HalfPlaneGrid":
        other = "lower" if self.orientation == "upper" else "upper"
        return HalfPlaneGrid(self.x, self.levels, other, self.per_octave)


@dataclass(eq=False)
class HalfPlaneField:
    grid: HalfPlaneGrid
    values: np.ndarray
    norms: dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != self.grid.shape:
            raise ParameterError("field values must match the grid shape")
        if not np.all(np.isfinite(values)):
            raise InvariantViolation("field has non-finite values")
        self.values = values


@dataclass(frozen=True, eq=False)
class MonotoneBoundaryMap:
    grid: LineGrid
    values: np.ndarray
    monotone_real: bool = True

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.shape != self.grid.nodes.shape:
            raise ParameterError("values must match the grid")
        if not np.all(np.isfinite(values)):
            raise InvariantViolation("boundary map has non-finite values")
        if self.monotone_real:
            if np.iscomplexobj(values):
                if np.any(values.imag != 0):
                    raise InvariantViolation("monotone map must be real-valued")
                values = values.real
            if np.any(np.diff(values) <= 0):
                raise InvariantViolation("monotone map must be strictly increasing")
        elif np.any(np.diff(values) == 0):
            raise InvariantViolation("consecutive boundary values must be distinct")
        object.__setattr__(self, "values", values)

    def __call__(self, x):
        return _interp_affine(np.asarray(x, dtype=float), self.grid.nodes, self.values)


# ---- Helpers ----
def _interp_affine(x, nodes, values):
    """Piecewise-linear interpolation with affine extrapolation from the end cells"""
    if np.iscomplexobj(values):
        out = np.interp(x, nodes, values.real) + 1j * np.interp(x, nodes, values.imag)
    else:
        out = np.interp(x, nodes, values)
    left = x < nodes[0]
    right = x > nodes[-1]
    if left.any():
        slope = (values[1] - values[0]) / (nodes[1] - nodes[0])
        out = np.where(left, values[0] + slope * (x - nodes[0]), out)
    if right.any():
        slope = (values[-1] - values[-2]) / (nodes[-1] - nodes[-2])
        out = np.where(right, values[-1] + slope * (x - nodes[-1]), out)
    return out


def cumulative_from_zero(grid: LineGrid, values: np.ndarray) -> np.ndarray:
    """Samples of x -> integral of values from 0 to x (trapezoid)"""
    acc = cumulative_trapezoid(values, grid.nodes, initial=0)
    if np.iscomplexobj(acc):
        at0 = np.interp(0.0, grid.nodes, acc.real) + 1j * np.interp(0.0, grid.nodes, acc.imag)
    else:
        at0 = np.interp(0.0, grid.nodes, acc)
    return acc - at0


def identity_map(grid: LineGrid) -> MonotoneBoundaryMap:
    return MonotoneBoundaryMap(grid, grid.nodes.copy(), True)


# ---- Operations ----
def make_line_grid(L: float, N: int, profile: str = "uniform") -> LineGrid:
    """Symmetric grid on [-L, L]; the graded profile clusters nodes near 0"""
    if not L > 0:
        raise ParameterError(f"half-extent must be positive, got {L}")
    if N < MIN_LINE_NODES:
        raise ParameterError(f"need at least {MIN_LINE_NODES} nodes, got {N}")
    if profile not in PROFILES:
        raise ParameterError(f"unknown grid profile '{profile}'")
    t = np.linspace(-1.0, 1.0, N)
    if profile == "uniform":
        nodes = L * t
    else:
        nodes = L * np.sinh(GRADED_STRETCH * t) / np.sinh(GRADED_STRETCH)
    # exact symmetry
    nodes = 0.5 * (nodes - nodes[::-1])
    return LineGrid(nodes, float(L), profile)


def make_half_plane_grid(x: LineGrid, levels: int, y_max: float = 2.0,
                         orientation: str = "upper", per_octave: int = 1) -> HalfPlaneGrid:
    if per_octave < 1:
        raise ParameterError("per_octave must be at least 1")
    ys = y_max * 2.0 ** (-np.arange(levels) / per_octave)
    return HalfPlaneGrid(x, ys, orientation, per_octave)


def integrate_line(f: SampledLineFunction, a: float, b: float) -> complex:
    """Trapezoid rule on the stored nodes with interpolated partial end cells"""
    if a > b:
        return -integrate_line(f, b, a)
    nodes = f.grid.nodes
    slack = 1e-12 * f.grid.half_extent
    if a < nodes[0] - slack or b > nodes[-1] + slack:
        raise DomainError(f"[{a}, {b}] is outside the grid [{nodes[0]}, {nodes[-1]}]")
    if a == b:
        return 0.0
    inner = nodes[(nodes > a) & (nodes < b)]
    xs = np.concatenate(([a], inner, [b]))
    return trapezoid(f(xs), xs)


def invert_monotone(h: MonotoneBoundaryMap) -> MonotoneBoundaryMap:
    """Piecewise-linear inverse sampled on a symmetric grid covering the range of h"""
    if not h.monotone_real:
        raise InvariantViolation("only real increasing maps can be inverted")
    R = float(max(abs(h.values[0]), abs(h.values[-1])))
    grid = make_line_grid(R, h.grid.n, "uniform")
    values = _interp_affine(grid.nodes, h.values, h.grid.nodes)
    return MonotoneBoundaryMap(grid, values, True)


def compose_maps(a: MonotoneBoundaryMap, b: MonotoneBoundaryMap) -> MonotoneBoundaryMap:
    """Samples of a o b on the grid of b"""
    if not b.monotone_real:
        raise InvariantViolation("the inner map of a composition must be real")
    return MonotoneBoundaryMap(b.grid, a(b.values), a.monotone_real)
