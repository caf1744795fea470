"""
Riemann maps onto the two sides of a curve through infinity, boundary
correspondences, the welding h = h1 o h2^-1, pre-logarithmic and Schwarzian
derivatives, Beltrami composition and the Beurling-Ahlfors extension.

Boundary correspondences are computed from the tangent angle alone. With
sigma = h1^-1 the upper-side map f satisfies Im log f' = b o sigma and
Re log f' = log sigma' on the line, and log f' is analytic in the upper half
plane, so

    log sigma1' = -H[b o sigma1] + const,    log sigma2' = +H[b o sigma2] + const

where H is the Hilbert transform. Both are solved by fixed-point iteration
with sigma(0) = 0, sigma(1) = 1, i.e. f(0) = z(0) and int_0^1 |f'| = 1. The
interior field log f' is the Cauchy integral of the same boundary data.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np
from scipy.signal import fftconvolve

from .config import LEVELS, RESOLUTION, Y_MAX
from .constants import (
    MIN_COMPOSE_DENOM,
    RECOVER_ITER_TOL,
    RECOVER_MAX_ITER,
    SELF_CONVERGENCE_TOL,
    WELD_ITER_TOL,
    WELD_MAX_ITER,
)
from .core_numerics import (
    HalfPlaneField,
    HalfPlaneGrid,
    LineGrid,
    MonotoneBoundaryMap,
    SampledLineFunction,
    compose_maps,
    cumulative_from_zero,
    invert_monotone,
    make_half_plane_grid,
    make_line_grid,
)
from .curve_synthesis import (
    CurveSamples,
    TangentAngle,
    as_angle,
    is_jordan,
    normalize_curve,
    tangent_angle_from_curve,
)
from .errors import (
    CompositionDegeneracyError,
    NotJordanError,
    NumericalFailure,
    ParameterError,
    ResolutionError,
    UnwrappingError,
)
from .function_spaces import BeltramiField, b2_norm, bers_l2_norm, bloch_seminorm, dirichlet_seminorm
from .semmes_extension import ExtensionField, beltrami_of_field

logger = logging.getLogger(__name__)

SIDES = ("left", "right")
ROW_BLOCK = 128


# ---- Hilbert transform and Cauchy integral of piecewise-linear data ----
def _require_uniform(grid: LineGrid):
    if not grid.is_uniform:
        raise ParameterError("welding computations need a uniform grid")


def _hilbert_values(x: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """H of the piecewise-linear interpolant of theta, constant tails theta[0], theta[-1]"""
    n = x.size
    h = x[1] - x[0]
    L = x[-1]
    m = np.arange(-(n - 1), n, dtype=float)

    def ratio_log(k):
        out = np.zeros_like(k)
        ok = (k != 0) & (k != 1)
        out[ok] = np.log(np.abs(k[ok]) / np.abs(k[ok] - 1))
        return out

    Lm = ratio_log(m)
    g1 = Lm * (1.0 - m)
    g2 = ratio_log(m + 1.0) * (m + 1.0)

    head = np.where(np.arange(n) < n - 1, theta, 0.0)
    tail = np.where(np.arange(n) > 0, theta, 0.0)
    cut = slice(n - 1, 2 * n - 1)
    cells = fftconvolve(head, g1)[cut] + fftconvolve(tail, g2)[cut]
    row_sums = fftconvolve((np.arange(n) < n - 1).astype(float), Lm)[cut]
    cells -= theta * row_sums

    c_left, c_right = theta[0], theta[-1]
    idx = np.arange(n)
    with np.errstate(divide="ignore"):
        lp = np.where(idx > 0, np.log(np.maximum(idx, 1) * h), 0.0)
        lm = np.where(idx < n - 1, np.log(np.maximum(n - 1 - idx, 1) * h), 0.0)
    total = cells + (theta - c_left) * lp - (theta - c_right) * lm - (c_right - c_left)
    return total / np.pi


def hilbert_transform(f: SampledLineFunction) -> SampledLineFunction:
    """(1/pi) p.v. int f(t) / (x - t) dt, defined up to a constant when the tails differ"""
    _require_uniform(f.grid)
    values = np.asarray(f.values)
    if np.iscomplexobj(values):
        out = _hilbert_values(f.grid.nodes, values.real) + 1j * _hilbert_values(f.grid.nodes, values.imag)
    else:
        out = _hilbert_values(f.grid.nodes, values)
    return SampledLineFunction(f.grid, out)


def cauchy_bracket(x: np.ndarray, theta: np.ndarray, zeta: np.ndarray) -> np.ndarray:
    """int (theta - c_mid)/(t - zeta) dt over the line, regularized at infinity, divided by pi"""
    c_left, c_right = theta[0], theta[-1]
    delta = c_right - c_left
    th = theta - 0.5 * (c_left + c_right)
    dt = np.diff(x)
    slope = np.diff(th) / dt
    L = x[-1]
    z = np.asarray(zeta, dtype=complex)
    out = np.empty(z.shape, dtype=complex)
    flat, res = z.ravel(), out.ravel()
    for start in range(0, flat.size, ROW_BLOCK):
        zz = flat[start:start + ROW_BLOCK, None]
        logs = np.log(x[None, :] - zz)
        coef = th[None, :-1] + slope[None, :] * (zz - x[None, :-1])
        cells = (slope * dt).sum() + (coef * np.diff(logs, axis=1)).sum(axis=1)
        ends = 0.5 * delta * (np.log(L - zz[:, 0]) + np.log(-L - zz[:, 0]))
        res[start:start + ROW_BLOCK] = (cells - ends) / np.pi
    return out


# ---- Boundary correspondence solver ----
@dataclass(eq=False)
class SideSolution:
    grid: LineGrid
    sigma: np.ndarray
    theta: np.ndarray
    log_sigma_prime: np.ndarray
    log_scale: float
    iterations: int

    @property
    def sigma_map(self) -> MonotoneBoundaryMap:
        return MonotoneBoundaryMap(self.grid, self.sigma, True)


def solve_side(b: Callable, grid: LineGrid, sign: float,
               max_iter: int = WELD_MAX_ITER, tol: float = WELD_ITER_TOL) -> SideSolution:
    """sigma with log sigma' = -sign H[b o sigma] + const, sigma(0) = 0, sigma(1) = 1"""
    _require_uniform(grid)
    x = grid.nodes
    sigma = x.copy()
    omega, last_err = 1.0, np.inf
    for it in range(1, max_iter + 1):
        theta = b(sigma)
        g = -sign * _hilbert_values(x, theta)
        acc = cumulative_from_zero(grid, np.exp(g - g.max()))
        scale = np.interp(1.0, x, acc)
        candidate = acc / scale
        err = float(np.max(np.abs(candidate - sigma)))
        if err > last_err and omega > 1 / 64:
            omega *= 0.5
            logger.debug("fixed point slowed at iteration %d, damping to %.3g", it, omega)
        sigma = candidate if omega == 1.0 else (1 - omega) * sigma + omega * candidate
        last_err = err
        if err < tol:
            theta = b(sigma)
            g = -sign * _hilbert_values(x, theta)
            log_scale = float(np.log(np.interp(1.0, x, cumulative_from_zero(grid, np.exp(g)))))
            return SideSolution(grid, sigma, theta, g - log_scale, -log_scale, it)
    raise ResolutionError(
        f"boundary correspondence did not converge in {max_iter} iterations (last step {last_err:.3g}); "
        "refine the resolution or reduce the tangent angle", iterations=max_iter)


# ---- Records ----
@dataclass(eq=False)
class RiemannMapPair:
    side: str
    boundary_map: MonotoneBoundaryMap
    interior_field: Optional[HalfPlaneField]
    normalization: Dict
    solution: Optional[SideSolution] = None
    # same side solved at twice the resolution, kept when certified
    reference: Optional[SideSolution] = None

    def __post_init__(self):
        if self.side not in SIDES:
            raise ParameterError(f"side must be one of {SIDES}")


@dataclass(eq=False)
class WeldingRecord:
    h: MonotoneBoundaryMap
    h1: MonotoneBoundaryMap
    h2: MonotoneBoundaryMap
    log_h_prime: SampledLineFunction
    upper: Optional[SideSolution] = None
    lower: Optional[SideSolution] = None

    def _solution(self, side: str) -> SideSolution:
        sol = self.upper if side == "upper" else self.lower
        if sol is None:
            raise ParameterError(f"the welding record carries no {side}-side solution")
        return sol

    def log_h1_prime(self, grid: LineGrid) -> SampledLineFunction:
        return _log_inverse_slope(self.h1, self._solution("upper"), grid)

    def log_h2_prime(self, grid: LineGrid) -> SampledLineFunction:
        return _log_inverse_slope(self.h2, self._solution("lower"), grid)

    def log_g_prime(self) -> SampledLineFunction:
        """log g' on the line for the lower-side map g"""
        sol = self._solution("lower")
        return SampledLineFunction(sol.grid, sol.log_sigma_prime + 1j * sol.theta)


def _log_inverse_slope(inverse: MonotoneBoundaryMap, sol: SideSolution, grid: LineGrid) -> SampledLineFunction:
    """log (sigma^-1)' = -log sigma' o sigma^-1 sampled on grid"""
    return SampledLineFunction(grid, -np.interp(inverse(grid.nodes), sol.grid.nodes, sol.log_sigma_prime))


def _log_derivative_field(sol: SideSolution, grid: HalfPlaneGrid, sign: float) -> HalfPlaneField:
    bracket = cauchy_bracket(sol.grid.nodes, sol.theta, grid.points)
    base = sol.log_scale + 1j * sol.theta[0]
    return HalfPlaneField(grid, base + sign * bracket)


def _arc_length_curve(c: CurveSamples) -> CurveSamples:
    s = np.concatenate(([0.0], np.cumsum(np.abs(np.diff(c.points)))))
    s -= np.interp(0.0, c.arc_lengths, s)
    return CurveSamples(c.points, s, c.normalized, dict(c.gauge))


def default_field_grid(x: LineGrid, orientation: str) -> HalfPlaneGrid:
    return make_half_plane_grid(x, LEVELS, Y_MAX, orientation)


def _side_grid(b: TangentAngle, resolution: int) -> LineGrid:
    n = resolution + 1 if resolution % 2 == 0 else resolution + 2
    return make_line_grid(b.grid.half_extent, n, "uniform")


def _solve_curve(c: CurveSamples, resolution: int):
    b = tangent_angle_from_curve(c)
    grid = _side_grid(b, resolution)
    return b, grid, solve_side(b.b, grid, +1.0), solve_side(b.b, grid, -1.0)


def riemann_maps(c: CurveSamples, resolution: int = RESOLUTION, with_interior: bool = True,
                 certify: bool = True, field_grid: Optional[HalfPlaneGrid] = None
                 ) -> Tuple[RiemannMapPair, RiemannMapPair]:
    """Maps f: upper half plane -> left side and g: lower half plane -> right side"""
    if not is_jordan(c):
        raise NotJordanError("sample chords intersect: the curve is not Jordan at this resolution")
    if not c.is_unit_speed():
        c = _arc_length_curve(c)
    gauge = normalize_curve(c).gauge

    b, grid, upper, lower = _solve_curve(c, resolution)
    delta = None
    references = {"left": None, "right": None}
    if certify:
        _, _, upper2, lower2 = _solve_curve(c, 2 * resolution)
        references = {"left": upper2, "right": lower2}
        x = grid.nodes
        delta = max(
            float(np.max(np.abs(c.at(upper.sigma) - c.at(np.interp(x, upper2.grid.nodes, upper2.sigma))))),
            float(np.max(np.abs(c.at(lower.sigma) - c.at(np.interp(x, lower2.grid.nodes, lower2.sigma))))),
        )
        logger.info("self-convergence under resolution doubling: delta = %.3g", delta)

    pairs = []
    for side, sol, sign, orientation in (("left", upper, 1.0, "upper"), ("right", lower, -1.0, "lower")):
        boundary = MonotoneBoundaryMap(grid, c.at(sol.sigma), False)
        interior = None
        if with_interior:
            fg = field_grid if field_grid is not None else default_field_grid(grid, orientation)
            if fg.orientation != orientation:
                fg = fg.reflected()
            interior = _log_derivative_field(sol, fg, sign)
        record = {
            "f0": [float(boundary(0.0).real), float(boundary(0.0).imag)],
            "f1": [float(boundary(1.0).real), float(boundary(1.0).imag)],
            "arc_01": float(np.interp(1.0, grid.nodes, sol.sigma) - np.interp(0.0, grid.nodes, sol.sigma)),
            "gauge": gauge,
            "resolution": grid.n - 1,
            "iterations": sol.iterations,
            "self_convergence": delta,
        }
        pairs.append(RiemannMapPair(side, boundary, interior, record, sol, references[side]))
    return pairs[0], pairs[1]


def riemann_pair_from_function(f: Callable, log_fprime: Callable, field_grid: HalfPlaneGrid,
                               side: str = "left") -> RiemannMapPair:
    """RiemannMapPair for a closed-form map, for checks against known answers"""
    x = field_grid.x
    return RiemannMapPair(
        side,
        MonotoneBoundaryMap(x, f(x.nodes.astype(complex)), False),
        HalfPlaneField(field_grid, log_fprime(field_grid.points)),
        {"closed_form": True},
    )


def _reference_solution(m: RiemannMapPair, c: CurveSamples) -> SideSolution:
    """The side of m solved again at twice its resolution"""
    b = tangent_angle_from_curve(c)
    grid = _side_grid(b, 2 * (m.solution.grid.n - 1))
    return solve_side(b.b, grid, +1.0 if m.side == "left" else -1.0)


def boundary_correspondence(m: RiemannMapPair, c: CurveSamples,
                            tol: float = SELF_CONVERGENCE_TOL) -> MonotoneBoundaryMap:
    """h with (f o h)(s) = z(s)

    Certified against the correspondence solved at twice the resolution on
    the inner 90% of the window.
    """
    if m.solution is None:
        raise ParameterError("the map pair carries no boundary solution")
    if not c.is_unit_speed():
        c = _arc_length_curve(c)
    h = invert_monotone(m.solution.sigma_map)
    reference = m.reference if m.reference is not None else _reference_solution(m, c)
    h_ref = invert_monotone(reference.sigma_map)
    s = c.arc_lengths
    inner = s[np.abs(s) <= 0.9 * min(-s[0], s[-1])]
    gap = float(np.max(np.abs(h(inner) - h_ref(inner))))
    logger.debug("%s boundary correspondence differs from the refined one by %.3g", m.side, gap)
    if gap > tol:
        raise NumericalFailure(f"{m.side} boundary correspondence moves by {gap:.3g} under resolution doubling",
                               gap=gap)
    return h


def log_slope(grid: LineGrid, values: np.ndarray) -> np.ndarray:
    x = grid.nodes
    slopes = np.diff(values) / np.diff(x)
    if np.any(slopes <= 0):
        raise NumericalFailure("welding map is not increasing at this resolution")
    mid = 0.5 * (x[1:] + x[:-1])
    return np.interp(x, mid, np.log(slopes))


def _welding_from_solutions(upper: SideSolution, lower: SideSolution) -> WeldingRecord:
    h1 = invert_monotone(upper.sigma_map)
    h2 = invert_monotone(lower.sigma_map)
    h = compose_maps(h1, lower.sigma_map)
    log_hp = SampledLineFunction(h.grid, log_slope(h.grid, h.values))
    return WeldingRecord(h, h1, h2, log_hp, upper, lower)


def welding_map(left: RiemannMapPair, right: RiemannMapPair, c: CurveSamples,
                tol: float = SELF_CONVERGENCE_TOL) -> WeldingRecord:
    """h = h1 o h2^-1 with log h' on the standard grid"""
    boundary_correspondence(left, c, tol)
    boundary_correspondence(right, c, tol)
    return _welding_from_solutions(left.solution, right.solution)


def weld_angle(b: TangentAngle, grid: LineGrid) -> WeldingRecord:
    """Welding of the curve with tangent angle b, straight from the boundary solver"""
    return _welding_from_solutions(solve_side(b.b, grid, +1.0), solve_side(b.b, grid, -1.0))


# ---- Derivatives of the log-derivative field ----
def unwrap_log_field(f: HalfPlaneField) -> HalfPlaneField:
    """Continuous branch of Im log f': top row along x, then every column downward"""
    im = f.values.imag.copy()
    im[0] = np.unwrap(im[0])
    im = np.unwrap(im, axis=0)
    if np.any(np.abs(np.diff(im, axis=1)) > np.pi):
        raise UnwrappingError("log field has a branch discontinuity that path unwrapping cannot remove")
    return HalfPlaneField(f.grid, f.values.real + 1j * im, dict(f.norms))


def _dx(values: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order centered x-derivative, lower order near the edges"""
    out = np.empty_like(values)
    out[:, 2:-2] = (values[:, :-4] - 8 * values[:, 1:-3] + 8 * values[:, 3:-1] - values[:, 4:]) / (12 * h)
    out[:, 1] = (values[:, 2] - values[:, 0]) / (2 * h)
    out[:, -2] = (values[:, -1] - values[:, -3]) / (2 * h)
    out[:, 0] = (-3 * values[:, 0] + 4 * values[:, 1] - values[:, 2]) / (2 * h)
    out[:, -1] = (3 * values[:, -1] - 4 * values[:, -2] + values[:, -3]) / (2 * h)
    return out


def _x_step(grid: HalfPlaneGrid) -> float:
    _require_uniform(grid.x)
    return float(grid.x.nodes[1] - grid.x.nodes[0])


def prelog_derivative(m: RiemannMapPair) -> HalfPlaneField:
    """log f' on the interior grid with the Dirichlet and Bloch seminorms of its derivative attached"""
    if m.interior_field is None:
        raise ParameterError("the map pair has no interior field")
    field_ = unwrap_log_field(m.interior_field)
    derivative = HalfPlaneField(field_.grid, _dx(field_.values, _x_step(field_.grid)))
    field_.norms["dirichlet"] = dirichlet_seminorm(derivative)
    field_.norms["bloch"] = bloch_seminorm(derivative)
    return field_


def schwarzian(f_prime_log: HalfPlaneField) -> HalfPlaneField:
    """S_f = N' - N^2 / 2 with N = (log f')'"""
    logf = unwrap_log_field(f_prime_log)
    h = _x_step(logf.grid)
    N = _dx(logf.values, h)
    S = HalfPlaneField(logf.grid, _dx(N, h) - 0.5 * N ** 2)
    S.norms["b2"] = b2_norm(S)
    S.norms["bers"] = bers_l2_norm(S)
    return S


# ---- Beltrami composition ----
def sample_field(f: HalfPlaneField, points: np.ndarray) -> Tuple[np.ndarray, int]:
    """Bilinear interpolation in (x, level index); points outside are clamped"""
    grid = f.grid
    x = grid.x.nodes
    levels = grid.levels
    px, py = points.real, np.maximum(np.abs(points.imag), 1e-300)
    idx = np.arange(levels.size, dtype=float)
    outside = (px < x[0]) | (px > x[-1]) | (py > levels[0]) | (py < levels[-1])
    fx = np.interp(px, x, np.arange(x.size, dtype=float))
    # levels decrease geometrically: interpolate the index in log y
    fy = np.interp(-np.log(py), -np.log(levels), idx)
    i0 = np.clip(np.floor(fx).astype(int), 0, x.size - 2)
    j0 = np.clip(np.floor(fy).astype(int), 0, levels.size - 2)
    tx, ty = fx - i0, fy - j0
    v = f.values
    out = ((1 - tx) * (1 - ty) * v[j0, i0] + tx * (1 - ty) * v[j0, i0 + 1]
           + (1 - tx) * ty * v[j0 + 1, i0] + tx * ty * v[j0 + 1, i0 + 1])
    return out, int(outside.sum())


def beltrami_compose(mu_f: BeltramiField, H: ExtensionField) -> BeltramiField:
    """mu(F o H) = (mu_H + (mu_F o H) t) / (1 + conj(mu_H) (mu_F o H) t), t = conj(dH) / dH"""
    dH = H.d_rho.values
    mu_h = H.dbar_rho.values / dH
    pulled, clamped = sample_field(mu_f, H.rho.values)
    if clamped:
        logger.warning("%d nodes map outside the mu_F window and were clamped", clamped)
    t = np.conj(dH) / dH
    denom = 1 + np.conj(mu_h) * pulled * t
    if np.abs(denom).min() < MIN_COMPOSE_DENOM:
        raise CompositionDegeneracyError(f"composition denominator reaches {np.abs(denom).min():.3g}")
    out = BeltramiField(H.grid, (mu_h + pulled * t) / denom)
    out.norms["clamped"] = clamped
    return out


# ---- Beurling-Ahlfors extension ----
def _antiderivative(h: MonotoneBoundaryMap, s: np.ndarray) -> np.ndarray:
    """Exact integral from 0 of the piecewise-linear h with affine tails"""
    x, v = h.grid.nodes, h.values
    dx = np.diff(x)
    slope = np.diff(v) / dx
    acc = np.concatenate(([0.0], np.cumsum(0.5 * (v[1:] + v[:-1]) * dx)))
    k = np.clip(np.searchsorted(x, s, side="right") - 1, 0, x.size - 2)
    d = s - x[k]
    out = acc[k] + v[k] * d + 0.5 * slope[k] * d ** 2
    zero_k = np.clip(np.searchsorted(x, 0.0, side="right") - 1, 0, x.size - 2)
    d0 = -x[zero_k]
    return out - (acc[zero_k] + v[zero_k] * d0 + 0.5 * slope[zero_k] * d0 ** 2)


def beurling_ahlfors_extension(h: MonotoneBoundaryMap, grid: Optional[HalfPlaneGrid] = None) -> ExtensionField:
    """F(x + iy) = (a + b)/2 + i (a - b) with a, b the means of h over [x, x+y] and [x-y, x]"""
    if not h.monotone_real:
        raise ParameterError("the Beurling-Ahlfors extension needs a real increasing map")
    if grid is None:
        grid = default_field_grid(h.grid, "upper")
    x = grid.x.nodes[None, :]
    y = grid.levels[:, None]
    A0, Ap, Am = _antiderivative(h, x), _antiderivative(h, x + y), _antiderivative(h, x - y)
    h0, hp, hm = h(x), h(x + y), h(x - y)
    a = (Ap - A0) / y
    bb = (A0 - Am) / y
    ax, ay = (hp - h0) / y, (hp - a) / y
    bx, by = (h0 - hm) / y, (hm - bb) / y
    F = 0.5 * (a + bb) + 1j * (a - bb)
    Fx = 0.5 * (ax + bx) + 1j * (ax - bx)
    Fy = 0.5 * (ay + by) + 1j * (ay - by)
    d, dbar = 0.5 * (Fx - 1j * Fy), 0.5 * (Fx + 1j * Fy)
    if grid.orientation == "lower":
        F, d, dbar = np.conj(F), np.conj(d), np.conj(dbar)
    boundary = MonotoneBoundaryMap(h.grid, h.values.astype(complex), False)
    ext = ExtensionField(HalfPlaneField(grid, F), boundary, HalfPlaneField(grid, d),
                         HalfPlaneField(grid, dbar), "beurling-ahlfors")
    mu = beltrami_of_field(ext)
    ext.certificate["wp"] = mu.norms["wp"]
    ext.certificate["beltrami"] = mu
    return ext


# ---- Inverse welding ----
def recover_angle(target: SampledLineFunction, grid: LineGrid, initial: Optional[TangentAngle] = None,
                  max_iter: int = RECOVER_MAX_ITER, tol: float = RECOVER_ITER_TOL) -> TangentAngle:
    """b whose welding has log h' = target on the window

    Quasi-Newton iteration on the linearization log h' ~ 2 H b at b = 0:
    b <- b - H[target - log h'(b)] / 2.
    """
    _require_uniform(grid)
    x = grid.nodes
    goal = np.real(target(x))
    values = np.zeros(grid.n) if initial is None else np.real(initial.b(x))
    for it in range(1, max_iter + 1):
        angle = as_angle(SampledLineFunction(grid, values))
        residual = goal - weld_angle(angle, grid).log_h_prime.values
        step = -0.5 * _hilbert_values(x, residual)
        step -= np.interp(0.0, x, step)
        values = values + step
        size = float(np.max(np.abs(step)))
        logger.debug("angle recovery iteration %d: step %.3g", it, size)
        if size < tol:
            return as_angle(SampledLineFunction(grid, values))
    raise ResolutionError(f"angle recovery did not converge in {max_iter} iterations", last_step=size)
