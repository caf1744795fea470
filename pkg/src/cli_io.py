"""
File formats and the command implementations behind main.py.

Functions, curves and fields are column-oriented CSV written with 17
significant digits; reports and configurations are indented JSON. Every
output file is written to a temporary file and renamed into place.
"""

import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import ValidationError

from .config import Y_MAX
from .conformal_welding import riemann_maps, welding_map
from .core_numerics import (
    HalfPlaneField,
    HalfPlaneGrid,
    LineGrid,
    MonotoneBoundaryMap,
    SampledLineFunction,
    make_half_plane_grid,
    make_line_grid,
)
from .curve_synthesis import (
    CurveSamples,
    as_angle,
    chord_arc_constant,
    curve_from_angle,
)
from .constants import DEFAULT_TOLERANCES
from .errors import (
    EXIT_INCONCLUSIVE,
    EXIT_PASS,
    EXIT_THEOREM_FAIL,
    ConfigValidationError,
    ParseError,
)
from .fixtures import PROFILES, SUITE, sampled, suite_member
from .function_spaces import bmo_norm, h12_seminorm, vmo_modulus
from .models import ExperimentReport, NormReport, RunConfig
from .semmes_extension import (
    beltrami_of_field,
    extension_base,
    extension_general,
    tau_bilipschitz,
)
from .theorem_lab import ExperimentConfig, continuity_sweep, prop61_scaling, run_all

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
VMO_SCALES = (0.5, 0.25, 0.125)


# ---- Atomic writes ----
def _atomic_write(path: Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_csv(frame: pd.DataFrame, path) -> Path:
    return _atomic_write(path, frame.to_csv(index=False, float_format=FLOAT_FORMAT))


def write_json(payload, path) -> Path:
    return _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


# ---- CSV parsing ----
def _read_columns(path, required: List[str], optional: List[str] = ()) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise ParseError(f"file not found: {path}")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skip_blank_lines=False)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ParseError(f"{path.name}: {e}", line=1)
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise ParseError(f"{path.name}: missing column(s) {missing}", line=1)
    if frame.empty:
        raise ParseError(f"{path.name}: no data rows", line=2)
    out = {}
    for col in list(required) + [c for c in optional if c in frame.columns]:
        values = np.empty(len(frame))
        for i, raw in enumerate(frame[col]):
            try:
                values[i] = float(raw)
            except ValueError:
                # header is line 1
                raise ParseError(f"{path.name}: column '{col}' has non-numeric value '{raw}'", line=i + 2)
            if not np.isfinite(values[i]):
                raise ParseError(f"{path.name}: column '{col}' is not finite", line=i + 2)
        out[col] = values
    return pd.DataFrame(out)


def _line_grid(nodes: np.ndarray) -> LineGrid:
    if nodes.size < 2:
        raise ParseError("need at least two sample rows", line=2)
    steps = np.diff(nodes)
    profile = "uniform" if np.allclose(steps, steps[0], rtol=1e-9) else "graded"
    return LineGrid(nodes, float(nodes[-1]), profile)


# ---- Functions ----
def write_function(f: SampledLineFunction, path) -> Path:
    columns = {"x": f.grid.nodes}
    if f.is_real:
        columns["value"] = np.real(f.values)
    else:
        columns["re"], columns["im"] = f.values.real, f.values.imag
    return write_csv(pd.DataFrame(columns), path)


def read_function(path) -> SampledLineFunction:
    """Real (x, value) or complex (x, re, im) samples"""
    frame = _read_columns(path, ["x"], ["value", "re", "im"])
    if "value" in frame:
        values = frame["value"].to_numpy()
    elif "re" in frame and "im" in frame:
        values = frame["re"].to_numpy() + 1j * frame["im"].to_numpy()
    else:
        raise ParseError(f"{Path(path).name}: expected a 'value' column or 're' and 'im' columns", line=1)
    return SampledLineFunction(_line_grid(frame["x"].to_numpy()), values)


# ---- Curves and boundary maps ----
def write_curve(c: CurveSamples, path) -> Path:
    return write_csv(pd.DataFrame({"s": c.arc_lengths, "re": c.points.real, "im": c.points.imag}), path)


def read_curve(path) -> CurveSamples:
    frame = _read_columns(path, ["s", "re", "im"])
    return CurveSamples(frame["re"].to_numpy() + 1j * frame["im"].to_numpy(), frame["s"].to_numpy())


def write_boundary_map(h: MonotoneBoundaryMap, path, extra: Optional[Dict[str, np.ndarray]] = None) -> Path:
    values = np.asarray(h.values)
    columns = {"x": h.grid.nodes, "re": np.real(values), "im": np.imag(values)}
    columns.update(extra or {})
    return write_csv(pd.DataFrame(columns), path)


def read_boundary_map(path) -> MonotoneBoundaryMap:
    frame = _read_columns(path, ["x", "re", "im"])
    values = frame["re"].to_numpy() + 1j * frame["im"].to_numpy()
    grid = _line_grid(frame["x"].to_numpy())
    if np.all(values.imag == 0):
        return MonotoneBoundaryMap(grid, values.real, True)
    return MonotoneBoundaryMap(grid, values, False)


# ---- Fields ----
def write_field(f: HalfPlaneField, path) -> Path:
    pts = f.grid.points
    return write_csv(pd.DataFrame({
        "x": pts.real.ravel(), "y": pts.imag.ravel(),
        "re": f.values.real.ravel(), "im": f.values.imag.ravel(),
    }), path)


def read_field(path) -> HalfPlaneField:
    """Inverse of write_field: one block of rows per level, top level first"""
    name = Path(path).name
    frame = _read_columns(path, ["x", "y", "re", "im"])
    y = frame["y"].to_numpy()
    starts = np.concatenate(([0], np.flatnonzero(np.diff(y) != 0) + 1))
    n = len(frame) // starts.size
    if len(frame) != n * starts.size or np.any(starts != n * np.arange(starts.size)):
        raise ParseError(f"{name}: levels must be equal blocks of rows", line=2)
    x = frame["x"].to_numpy().reshape(starts.size, n)
    if np.any(x != x[0]):
        bad = int(np.flatnonzero((x != x[0]).ravel())[0])
        raise ParseError(f"{name}: x nodes differ between levels", line=bad + 2)
    levels = y[starts]
    if np.any(levels == 0) or np.any(np.sign(levels) != np.sign(levels[0])):
        raise ParseError(f"{name}: levels must lie in one open half plane", line=2)
    heights = np.abs(levels)
    if heights.size < 2 or np.any(np.diff(heights) >= 0):
        raise ParseError(f"{name}: level heights must decrease", line=2)
    per_octave = max(int(round(-1.0 / np.log2(heights[1] / heights[0]))), 1)
    orientation = "upper" if levels[0] > 0 else "lower"
    grid = HalfPlaneGrid(_line_grid(x[0]), heights, orientation, per_octave)
    values = frame["re"].to_numpy() + 1j * frame["im"].to_numpy()
    return HalfPlaneField(grid, values.reshape(grid.shape))


# ---- Reports ----
def write_norms(norms: Dict[str, NormReport], path) -> Path:
    return write_json({k: v.model_dump() for k, v in norms.items()}, path)


def read_norms(path) -> Dict[str, NormReport]:
    return {k: NormReport.model_validate(v) for k, v in _read_json(path).items()}


def write_reports(reports: List[ExperimentReport], path) -> Path:
    payload = [dict(r.model_dump(), overall=r.overall) for r in reports]
    return write_json(payload, path)


def read_reports(path) -> List[ExperimentReport]:
    rows = _read_json(path)
    return [ExperimentReport.model_validate({k: v for k, v in r.items() if k != "overall"}) for r in rows]


def _read_json(path):
    path = Path(path)
    if not path.exists():
        raise ParseError(f"file not found: {path}")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ParseError(f"{path.name}: {e.msg}", line=e.lineno)


# ---- Configuration ----
def load_tolerances(path) -> Dict[str, float]:
    raw = _read_json(path)
    if not isinstance(raw, dict):
        raise ParseError("tolerance file must hold an object", line=1)
    return {k: float(v) for k, v in raw.items()}


def build_run_config(command: str, **kwargs) -> RunConfig:
    try:
        return RunConfig(command=command, **{k: v for k, v in kwargs.items() if v is not None})
    except ValidationError as e:
        raise ConfigValidationError(str(e).splitlines()[0] + ": " + "; ".join(
            f"{'.'.join(map(str, err['loc']))}: {err['msg']}" for err in e.errors()))


def _input_function(ref: str, grid: LineGrid) -> SampledLineFunction:
    """Suite member, profile name or CSV path"""
    if ref in SUITE:
        return suite_member(grid, ref)
    if ref in PROFILES:
        return sampled(grid, ref)
    f = read_function(ref)
    return SampledLineFunction(grid, f(grid.nodes))


def experiment_config(run: RunConfig) -> ExperimentConfig:
    grid = make_line_grid(run.window, run.grid_n, "uniform")
    angle = as_angle(_input_function(run.inputs.get("angle", "zero"), grid))
    perturbation = _input_function(run.inputs.get("perturbation", "bump"), grid)
    return ExperimentConfig(angle, perturbation, run.ladder, (run.grid_n,), (run.seed,),
                            dict(run.tolerances), run.resolution, run.levels)


def read_run_config(path, command: str, **overrides) -> RunConfig:
    raw = _read_json(path)
    if not isinstance(raw, dict):
        raise ParseError("configuration must hold an object", line=1)
    raw.update({k: v for k, v in overrides.items() if v is not None})
    raw.pop("command", None)
    return build_run_config(command, **raw)


def _verdict_code(reports: List[ExperimentReport]) -> int:
    overall = [r.overall for r in reports]
    if "fail" in overall:
        return EXIT_THEOREM_FAIL
    if "inconclusive" in overall:
        return EXIT_INCONCLUSIVE
    return EXIT_PASS


def _out(run: RunConfig) -> Path:
    return Path(run.out_dir)


def _on_run_grid(f: SampledLineFunction, run: RunConfig) -> SampledLineFunction:
    """f resampled onto the uniform run grid on [-window, window], constant tails outside the file"""
    grid = make_line_grid(run.window, run.grid_n, "uniform")
    if np.array_equal(grid.nodes, f.grid.nodes):
        return f
    return SampledLineFunction(grid, f(grid.nodes))


# ---- Commands ----
def cli_norms(input_path, run: RunConfig) -> Tuple[int, Dict]:
    u = _on_run_grid(read_function(input_path), run)
    norms = {"h12": h12_seminorm(u), "bmo": bmo_norm(u)}
    moduli = {str(s): vmo_modulus(u, s) for s in VMO_SCALES if s > 4 * u.grid.max_spacing}
    norms["vmo"] = NormReport(value=max(moduli.values(), default=0.0), grid_size=u.grid.n,
                              method="vmo-moduli", details=moduli)
    path = write_norms(norms, _out(run) / "norms.json")
    return EXIT_PASS, {"file": str(path), **{k: v.value for k, v in norms.items()}}


def cli_synth(angle_path, run: RunConfig) -> Tuple[int, Dict]:
    curve = curve_from_angle(as_angle(_on_run_grid(read_function(angle_path), run)))
    k = chord_arc_constant(curve, seed=run.seed)
    out = _out(run)
    write_curve(curve, out / "curve.csv")
    write_json({"chord_arc": k, "samples": curve.n}, out / "chord_arc.json")
    return EXIT_PASS, {"chord_arc": k, "file": str(out / "curve.csv")}


def cli_extend(angle_path, u_path, run: RunConfig) -> Tuple[int, Dict]:
    b = as_angle(_on_run_grid(read_function(angle_path), run))
    u = _on_run_grid(read_function(u_path), run)
    grid = make_half_plane_grid(b.grid, run.levels, Y_MAX)
    stages = {}
    if np.all(np.real(b.b.values) == 0):
        logger.info("tangent angle vanishes on the grid: using the base extension of u")
        stages["switched_to_base"] = "tangent angle is identically zero"
        ext = extension_base(u, grid)
    else:
        tau = tau_bilipschitz(b, grid)
        stages["tau"] = tau.certificate
        ext = extension_general(b, u, tau, grid)
    mu = beltrami_of_field(ext)
    out = _out(run)
    write_field(ext.rho, out / "rho.csv")
    write_field(mu, out / "mu.csv")
    summary = {"source": ext.source, "sup_mu": mu.sup, "wp": mu.norms["wp"].model_dump(), "stages": stages}
    write_json(summary, out / "beltrami.json")
    return EXIT_PASS, {"source": ext.source, "sup_mu": mu.sup, "wp": mu.norms["wp"].value}


def cli_weld(curve_path, run: RunConfig) -> Tuple[int, Dict]:
    curve = read_curve(curve_path)
    inside = np.abs(curve.arc_lengths) <= run.window
    if not inside.all():
        logger.info("keeping the %d of %d curve samples with |s| <= %g", int(inside.sum()), curve.n, run.window)
        curve = CurveSamples(curve.points[inside], curve.arc_lengths[inside])
    left, right = riemann_maps(curve, run.resolution, with_interior=False, certify=True)
    tol = run.tolerances.get("self_convergence", DEFAULT_TOLERANCES["self_convergence"])
    record = welding_map(left, right, curve, tol=tol)
    out = _out(run)
    write_boundary_map(record.h, out / "welding.csv", {"log_h_prime": record.log_h_prime.values})
    summary = {"left": left.normalization, "right": right.normalization,
               "log_h_prime_h12": h12_seminorm(record.log_h_prime).value}
    write_json(summary, out / "welding.json")
    return EXIT_PASS, {"self_convergence": left.normalization["self_convergence"],
                       "log_h_prime_h12": summary["log_h_prime_h12"]}


def cli_verify(run: RunConfig) -> Tuple[int, Dict]:
    cfg = experiment_config(run)
    reports = run_all(cfg)
    path = write_reports(reports, _out(run) / "report.json")
    return _verdict_code(reports), {"file": str(path), "config_hash": cfg.config_hash(),
                                    **{r.name: r.overall for r in reports}}


def cli_sweep(run: RunConfig) -> Tuple[int, Dict]:
    cfg = experiment_config(run)
    sweep = continuity_sweep(cfg)
    scaling = prop61_scaling(cfg)
    out = _out(run)
    series = sweep.provenance.get("series", {})
    eps = series.get("epsilons", list(cfg.epsilon_ladder))
    columns = {"forward": "distances", "h1": "h1_distances", "h2": "h2_distances",
               "g": "g_distances", "reverse": "reverse_distances"}
    write_csv(pd.DataFrame({"epsilon": eps, **{col: series.get(key, [np.nan] * len(eps))
                                              for col, key in columns.items()}}), out / "continuity.csv")
    rows = []
    for orientation, points in scaling.provenance.get("series", {}).items():
        for norm_u, sup, energy in points:
            rows.append({"orientation": orientation, "norm_u": norm_u, "sup_mu": sup, "energy_sqrt": energy})
    write_csv(pd.DataFrame(rows, columns=["orientation", "norm_u", "sup_mu", "energy_sqrt"]), out / "prop61.csv")
    write_reports([sweep, scaling], out / "sweep_report.json")
    return _verdict_code([sweep, scaling]), {sweep.name: sweep.overall, scaling.name: scaling.overall,
                                             "config_hash": cfg.config_hash()}
