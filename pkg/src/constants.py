"""
Frozen numerical constants.

Thresholds marked "calibrated" were fixed once against the calibration suite
(src/fixtures.py) at the reference resolution and must not be tuned per run.
"""

# ---- Grids and sampling ----
MIN_LINE_NODES = 16
MIN_H12_NODES = 257
MIN_LEVELS = 6
GRADED_STRETCH = 4.0
KERNEL_SUBNODES = 129
UNIT_SPEED_EPS = 1e-3
MIN_CURVE_SAMPLES = 64

# ---- Kernels ----
RY_EPS0 = 0.1
MIN_DEL_RHO = 1e-6
MIN_COMPOSE_DENOM = 1e-6

# ---- Calibrated bounds ----
BMO_H12_K = 5.0           # ||u||_BMO <= K ||u||_{H^1/2}
POISSON_GAP_K = 8.0       # mean over [x-y, x+y] vs Poisson value
JN_C1 = 4.0               # exponential mean <= C1 ||u|| / (C2 - ||u||)
JN_C2 = 1.0
RY_MEAN_K = 16.6          # |R_y(u) - u_I| <= K ||u||_BMO  (2 sup(phi) / eps0)
RY_EXP_K = 20.0           # mean |exp(u - R_y u) - 1| <= K ||u||_BMO
LEMMA31_BRACKET = (0.5, 2.0)
EXT_BASE_K = 10.0         # sup|mu| <= K ||u||_{H^1/2}
EXT_GENERAL_K = 10.0      # sup|mu_rho - mu_tau| <= K ||u||_{H^1/2}
LEMMA61_K = 50.0          # |mu|^2 <= K * majorant
BILIPSCHITZ_BRACKET = (1.0 / 3.0, 3.0)
THM41_K = 3.0             # ||b o h1^-1|| within [1/K, K] * ||b||
PROP61_RATIO = 2.0
REVERSE_BRACKET = (1.0 / 3.0, 3.0)

# ---- Tolerances ----
WELD_TOL = 2e-3
TRACE_TOL = 2e-3
SELF_CONVERGENCE_TOL = 1e-3
DECOMPOSITION_TOL = 1e-3
PERTURB_TOL = 1e-3
CONTINUITY_FINAL_TOL = 0.05
CONTINUITY_NOISE = 0.10
CR_TOL = 5e-2

# ---- Fixed-point solver ----
WELD_MAX_ITER = 200
WELD_ITER_TOL = 1e-12
RECOVER_MAX_ITER = 60
RECOVER_ITER_TOL = 1e-8

DEFAULT_TOLERANCES = {
    "weld": WELD_TOL,
    "trace": TRACE_TOL,
    "self_convergence": SELF_CONVERGENCE_TOL,
    "decomposition": DECOMPOSITION_TOL,
    "perturb": PERTURB_TOL,
    "continuity_final": CONTINUITY_FINAL_TOL,
    "continuity_noise": CONTINUITY_NOISE,
    "cauchy_riemann": CR_TOL,
    "prop61_ratio": PROP61_RATIO,
}
