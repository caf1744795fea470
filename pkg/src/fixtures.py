"""
Calibration suite: smooth compactly supported profiles used for tangent
angles and perturbations.
"""

import numpy as np

from .core_numerics import LineGrid, SampledLineFunction


def bump(x, center: float = 0.0, radius: float = 2.0):
    """C-infinity bump with peak 1 at center and support [center - radius, center + radius]"""
    t = (np.asarray(x, dtype=float) - center) / radius
    out = np.zeros_like(t)
    inside = np.abs(t) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - t[inside] ** 2))
    return out


def two_bump(x):
    return bump(x, -2.0, 1.5) + bump(x, 2.0, 1.5)


def smooth_step(x):
    """C-infinity step from 0 (x <= -1) to 1 (x >= 1)"""
    x = np.asarray(x, dtype=float)

    def f(t):
        out = np.zeros_like(t)
        pos = t > 0
        out[pos] = np.exp(-1.0 / t[pos])
        return out

    a, b = f(1.0 + x), f(1.0 - x)
    return a / (a + b)


def step_pair(x):
    """Plateau of height 1 on [-2, 2], support [-4, 4]"""
    return smooth_step(np.asarray(x) + 3.0) - smooth_step(np.asarray(x) - 3.0)


def gaussian(x):
    return np.exp(-np.asarray(x, dtype=float) ** 2)


PROFILES = {
    "bump": (bump, 2.0),
    "two_bump": (two_bump, 3.5),
    "step_pair": (step_pair, 4.0),
}

# name -> (profile, amplitude)
SUITE = {
    "zero": ("bump", 0.0),
    "bump_0.1": ("bump", 0.1),
    "bump_0.3": ("bump", 0.3),
    "two_bump_0.3": ("two_bump", 0.3),
    "step_pair_0.5": ("step_pair", 0.5),
}


def sampled(grid: LineGrid, profile: str, amplitude: float = 1.0) -> SampledLineFunction:
    fn, support = PROFILES[profile]
    support = min(support, grid.half_extent)
    return SampledLineFunction(grid, amplitude * fn(grid.nodes), support)


def suite_member(grid: LineGrid, name: str) -> SampledLineFunction:
    profile, amplitude = SUITE[name]
    return sampled(grid, profile, amplitude)
