"""
Mollifier kernels, scaled convolutions, the operator R_y and the explicit
quasiconformal extensions built from them.

Convolutions are evaluated as (k_a * w)(x) = sum_m c_m k(r_m) w(x - a r_m)
on fixed trapezoid nodes r_m of [-1, 1], a = |y|. Derivative fields come
from exact kernel identities rather than differences across levels:

    d/dx (phi_a * g) = phi_a * g'          d/da (phi_a * g) = alpha_a * g'
    d/dx (phi_a * w) = -(1/a) psi_a * w    d/da (phi_a * w) = -(1/a) beta_a * w

with beta = (x phi)'.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, Optional

import numpy as np
from scipy.integrate import quad, trapezoid

from .constants import (
    BILIPSCHITZ_BRACKET,
    KERNEL_SUBNODES,
    MIN_DEL_RHO,
    RY_EPS0,
    RY_EXP_K,
    RY_MEAN_K,
)
from .core_numerics import (
    HalfPlaneField,
    HalfPlaneGrid,
    MonotoneBoundaryMap,
    SampledLineFunction,
    integrate_line,
)
from .curve_synthesis import TangentAngle, gamma_u
from .errors import (
    ConstructionError,
    DegenerateJacobianError,
    DomainError,
    KernelScaleError,
    NotQuasiconformalError,
    ParameterError,
)
from .function_spaces import BeltramiField, bmo_norm, wp_norm

logger = logging.getLogger(__name__)

KERNELS = ("phi", "psiOdd", "psiHalf", "alpha")


@dataclass(frozen=True)
class KernelSpec:
    name: str
    half_width: float = 1.0

    def __post_init__(self):
        if self.name not in KERNELS:
            raise ParameterError(f"unknown kernel '{self.name}'")

    @property
    def moments(self):
        """(mass, first moment) of the continuous kernel"""
        return {
            "phi": (1.0, 0.0),
            "psiOdd": (0.0, 1.0),
            "psiHalf": (0.0, -0.5),
            "alpha": (0.0, -_phi_second_moment()),
        }[self.name]


PHI = KernelSpec("phi")
PSI_ODD = KernelSpec("psiOdd")
PSI_HALF = KernelSpec("psiHalf")
ALPHA = KernelSpec("alpha")


# ---- Continuous kernels ----
def _bump(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return out


@lru_cache(maxsize=None)
def _phi_constant() -> float:
    mass, _ = quad(lambda t: float(_bump(t)), -1.0, 1.0, epsabs=1e-14, epsrel=1e-13)
    return 1.0 / mass


@lru_cache(maxsize=None)
def _phi_second_moment() -> float:
    c = _phi_constant()
    value, _ = quad(lambda t: c * t * t * float(_bump(t)), -1.0, 1.0, epsabs=1e-14, epsrel=1e-13)
    return value


def _phi(x):
    return _phi_constant() * _bump(x)


def _phi_prime(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1
    xi = x[inside]
    out[inside] = _phi(xi) * (-2.0 * xi / (1.0 - xi ** 2) ** 2)
    return out


def kernel_eval(spec: KernelSpec, x):
    """phi, psiOdd = -phi', psiHalf = ((1 - ix) phi)'/2, alpha = -x phi; zero outside (-1, 1)"""
    x = np.asarray(x, dtype=float)
    if spec.name == "phi":
        return _phi(x)
    if spec.name == "psiOdd":
        return -_phi_prime(x)
    if spec.name == "psiHalf":
        return 0.5 * (-1j * _phi(x) + (1 - 1j * x) * _phi_prime(x))
    return -x * _phi(x)


# ---- Discrete kernel tables ----
@dataclass(frozen=True, eq=False)
class KernelTables:
    r: np.ndarray
    weights: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    chi: np.ndarray
    psi_half: np.ndarray

    def coefficients(self, spec: KernelSpec) -> np.ndarray:
        return {"phi": self.phi, "psiOdd": self.psi, "psiHalf": self.psi_half, "alpha": self.alpha}[spec.name]


@lru_cache(maxsize=None)
def kernel_tables(n: int = KERNEL_SUBNODES) -> KernelTables:
    """Quadrature coefficients with the moment conditions enforced on the nodes"""
    r = np.linspace(-1.0, 1.0, n)
    w = np.full(n, r[1] - r[0])
    w[0] = w[-1] = 0.5 * (r[1] - r[0])
    phi = w * _phi(r)
    phi /= phi.sum()
    psi = -w * _phi_prime(r)
    psi /= np.sum(psi * r)
    beta = w * (_phi(r) + r * _phi_prime(r))
    beta -= beta.sum() * phi
    return KernelTables(
        r=r,
        weights=w,
        phi=phi,
        psi=psi,
        alpha=-r * phi,
        beta=beta,
        chi=-r * psi,
        psi_half=0.5 * (-psi - 1j * beta),
    )


def _smooth(coeffs: np.ndarray, a: float, fn: Callable, x: np.ndarray) -> np.ndarray:
    r = kernel_tables().r
    return fn(x[:, None] - a * r[None, :]) @ coeffs


def convolve_scaled(spec: KernelSpec, y: float, w: SampledLineFunction, x) -> np.ndarray:
    """(k_y * w)(x) with k_y(t) = |y|^-1 k(t/|y|)"""
    if y == 0:
        raise ParameterError("kernel scale y must be nonzero")
    a = abs(y)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if w.support is None:
        nodes = w.grid.nodes
        if np.any(x - a < nodes[0] - 1e-12) or np.any(x + a > nodes[-1] + 1e-12):
            raise DomainError("convolution window extends beyond the sampled grid")
    return _smooth(kernel_tables().coefficients(spec), a, w, x)


def ry_operator(b: TangentAngle, y: float, w: SampledLineFunction, x) -> np.ndarray:
    """R_y(w) = phi_y * (z_b' w) / phi_y * z_b'"""
    if y == 0:
        raise ParameterError("kernel scale y must be nonzero")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    phi = kernel_tables().phi
    zb_prime = lambda t: np.exp(1j * b.b(t))
    den = _smooth(phi, abs(y), zb_prime, x)
    small = np.abs(den) < RY_EPS0
    if small.any():
        raise KernelScaleError(
            f"|phi_y * z_b'| drops to {np.abs(den).min():.3g} < {RY_EPS0} at y = {y}",
            x=float(x[np.argmax(small)]), y=float(y))
    num = _smooth(phi, abs(y), lambda t: zb_prime(t) * w(t), x)
    return num / den


# ---- Extension fields ----
@dataclass(eq=False)
class ExtensionField:
    rho: HalfPlaneField
    boundary: MonotoneBoundaryMap
    d_rho: HalfPlaneField
    dbar_rho: HalfPlaneField
    source: str
    certificate: Dict = field(default_factory=dict)

    @property
    def grid(self) -> HalfPlaneGrid:
        return self.rho.grid


def _assemble(grid, rho, dx, dy, boundary, source) -> ExtensionField:
    d = 0.5 * (dx - 1j * dy)
    dbar = 0.5 * (dx + 1j * dy)
    return ExtensionField(
        rho=HalfPlaneField(grid, rho),
        boundary=boundary,
        d_rho=HalfPlaneField(grid, d),
        dbar_rho=HalfPlaneField(grid, dbar),
        source=source,
    )


def extension_base(u: SampledLineFunction, grid: HalfPlaneGrid) -> ExtensionField:
    """rho = phi_y * gamma_u - i sgn(y) psi_y * gamma_u"""
    tables = kernel_tables()
    gamma_map, _ = gamma_u(u)
    slope = lambda t: np.exp(1j * u(t))
    sgn = grid.sign
    x = grid.x.nodes
    shape = grid.shape
    rho, dx, dy = (np.empty(shape, dtype=complex) for _ in range(3))
    for j, a in enumerate(grid.levels):
        T = x[:, None] - a * tables.r[None, :]
        G, Gp = gamma_map(T), slope(T)
        rho[j] = G @ tables.phi - 1j * sgn * (G @ tables.psi)
        dx[j] = Gp @ tables.phi - 1j * sgn * (Gp @ tables.psi)
        dy[j] = sgn * (Gp @ tables.alpha) - 1j * (Gp @ tables.chi)
    return _assemble(grid, rho, dx, dy, gamma_map, "base")


def bilipschitz_certificate(e: ExtensionField) -> Dict:
    """Edge-length ratios |rho(p) - rho(q)| / |p - q| over the grid and the boundary row"""
    grid = e.grid
    rho = e.rho.values
    pts = grid.points
    x = grid.x.nodes
    ratios = [
        np.abs(np.diff(rho, axis=1)) / np.abs(np.diff(pts, axis=1)),
        np.abs(np.diff(rho, axis=0)) / np.abs(np.diff(pts, axis=0)),
        np.abs(rho[-1] - e.boundary(x)) / grid.levels[-1],
    ]
    flat = np.concatenate([r.ravel() for r in ratios])
    return {
        "min_ratio": float(flat.min()),
        "max_ratio": float(flat.max()),
        "min_del": float(np.abs(e.d_rho.values).min()),
        "edges": int(flat.size),
    }


def tau_bilipschitz(b: TangentAngle, grid: HalfPlaneGrid) -> ExtensionField:
    """Base extension at u = b, certified bi-Lipschitz on the grid"""
    tau = extension_base(b.b, grid)
    cert = bilipschitz_certificate(tau)
    lo, hi = BILIPSCHITZ_BRACKET
    tau.certificate = cert
    if cert["min_ratio"] < lo or cert["max_ratio"] > hi or cert["min_del"] < MIN_DEL_RHO:
        raise ConstructionError(
            f"bi-Lipschitz certificate failed: ratios in [{cert['min_ratio']:.4g}, {cert['max_ratio']:.4g}]",
            ratios=(cert["min_ratio"], cert["max_ratio"]))
    logger.debug("tau certified: ratios in [%.4f, %.4f]", cert["min_ratio"], cert["max_ratio"])
    return tau


def extension_general(b: TangentAngle, u: SampledLineFunction, tau: ExtensionField,
                      grid: HalfPlaneGrid) -> ExtensionField:
    """rho = phi_y * omega_u + R_y(e^{iu}) (tau - phi_y * z_b) with omega_u' = z_b' e^{iu}"""
    if tau.grid.shape != grid.shape or not np.array_equal(tau.grid.points, grid.points):
        raise ParameterError("tau must be sampled on the requested grid")
    if not np.array_equal(u.grid.nodes, b.grid.nodes):
        raise ParameterError("u and b must share a grid")
    tables = kernel_tables()
    omega_map, _ = gamma_u(SampledLineFunction(b.grid, b.b.values + u.values))
    zb_map, _ = gamma_u(b.b)
    E = lambda t: np.exp(1j * (b.b(t) + u(t)))
    e = lambda t: np.exp(1j * b.b(t))
    sgn = grid.sign
    x = grid.x.nodes

    tau_v = tau.rho.values
    tau_dx = tau.d_rho.values + tau.dbar_rho.values
    tau_dy = 1j * (tau.d_rho.values - tau.dbar_rho.values)
    shape = grid.shape
    rho, dx, dy = (np.empty(shape, dtype=complex) for _ in range(3))
    for j, a in enumerate(grid.levels):
        T = x[:, None] - a * tables.r[None, :]
        Ev, ev = E(T), e(T)
        s_omega = omega_map(T) @ tables.phi
        s_z = zb_map(T) @ tables.phi
        num, den = Ev @ tables.phi, ev @ tables.phi
        if np.abs(den).min() < RY_EPS0:
            raise KernelScaleError(f"|phi_y * z_b'| drops below {RY_EPS0} at y = {sgn * a}", y=float(sgn * a))
        R = num / den
        Rx = (-(Ev @ tables.psi) + R * (ev @ tables.psi)) / (a * den)
        Ry = -sgn * ((Ev @ tables.beta) - R * (ev @ tables.beta)) / (a * den)
        D = tau_v[j] - s_z
        rho[j] = s_omega + R * D
        dx[j] = num + Rx * D + R * (tau_dx[j] - den)
        dy[j] = sgn * (Ev @ tables.alpha) + Ry * D + R * (tau_dy[j] - sgn * (ev @ tables.alpha))
    return _assemble(grid, rho, dx, dy, omega_map, "general")


def beltrami_of_field(e: ExtensionField) -> BeltramiField:
    """mu = dbar(rho) / d(rho) with its WP norm attached"""
    d = e.d_rho.values
    min_del = float(np.abs(d).min())
    if min_del < MIN_DEL_RHO:
        raise DegenerateJacobianError(f"|d rho| = {min_del:.3g} on the grid", min_del=min_del)
    mu = e.dbar_rho.values / d
    sup = float(np.abs(mu).max())
    if sup >= 1.0:
        raise NotQuasiconformalError(f"sup|mu| = {sup:.6g}", sup=sup)
    field_ = BeltramiField(e.grid, mu)
    report = wp_norm(field_)
    report.details["min_del_rho"] = min_del
    field_.norms["wp"] = report
    return field_


# ---- Probes ----
def majorant_field(u: SampledLineFunction, grid: HalfPlaneGrid) -> HalfPlaneField:
    """(1/y) int_{-y}^{y} |u(x + t) - u(x)|^2 dt at every node"""
    tables = kernel_tables()
    x = grid.x.nodes
    ux = u(x)
    out = np.empty(grid.shape)
    for j, a in enumerate(grid.levels):
        diff = np.abs(u(x[:, None] + a * tables.r[None, :]) - ux[:, None]) ** 2
        out[j] = diff @ tables.weights
    return HalfPlaneField(grid, out)


def lemma31_ratios(b: TangentAngle, u: SampledLineFunction, xs, ys) -> np.ndarray:
    """|R_y(e^u)| / |e^{R_y(u)}| on the probe grid xs x ys"""
    exp_u = u.with_values(np.exp(u.values))
    out = np.empty((len(ys), len(xs)))
    for j, y in enumerate(ys):
        out[j] = np.abs(ry_operator(b, y, exp_u, xs)) / np.exp(ry_operator(b, y, u, xs).real)
    return out


def ry_mean_value_probe(b: TangentAngle, u: SampledLineFunction, xs, ys) -> Dict:
    """max |R_y(u)(x) - u_I| / ||u||_BMO with I = [x - y, x + y]"""
    bmo = bmo_norm(u).value
    worst = 0.0
    for y in ys:
        ry = ry_operator(b, y, u, xs)
        for x, r in zip(xs, ry):
            mean = integrate_line(u, x - y, x + y) / (2 * y)
            worst = max(worst, abs(r - mean))
    ratio = worst / bmo if bmo > 0 else 0.0
    return {"bmo": bmo, "max_gap": worst, "ratio": ratio, "constant": RY_MEAN_K, "within": ratio <= RY_MEAN_K}


def ry_exponential_probe(b: TangentAngle, u: SampledLineFunction, xs, ys) -> Dict:
    """max (1/|I|) int_I |exp(u - R_y(u)(x)) - 1| / ||u||_BMO"""
    bmo = bmo_norm(u).value
    worst = 0.0
    for y in ys:
        ry = ry_operator(b, y, u, xs)
        for x, r in zip(xs, ry):
            t = np.linspace(x - y, x + y, 65)
            worst = max(worst, float(trapezoid(np.abs(np.exp(u(t) - r) - 1), t) / (2 * y)))
    ratio = worst / bmo if bmo > 0 else 0.0
    return {"bmo": bmo, "max_mean": worst, "ratio": ratio, "constant": RY_EXP_K, "within": ratio <= RY_EXP_K}
