"""Run simulations, predictions and oracle checks; collect and persist rows."""
from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np

from ..analysis import analyze_trajectory
from ..backgrounds import CwSpec, SolitonSpec, add_noise, cw_profile, multi_soliton_profile, soliton_profile
from ..floquet import build_linear_map, floquet_increments
from ..propagator import RunConfig, propagate
from ..spectral import resonance_info
from ..theory import center_shift, cw_predict, predict_soliton_instability
from .config import ConfigError, ExperimentConfig

__all__ = [
    "ResultRow",
    "RunOutcome",
    "UNITS",
    "run_simulate",
    "run_predict",
    "run_oracle",
    "run_point",
    "run_scan",
    "write_rows_csv",
    "write_json",
    "write_spectrum_csv",
]

log = logging.getLogger(__name__)

ORACLE_MARGIN = 5.0
METHOD_ORDER = {"simulate": 0, "predict": 1, "oracle": 2}


@dataclass
class ResultRow:
    """One method's verdict on one configuration; offsets are from ``omega_pi``."""

    digest: str
    method: str
    dz: float
    T: float
    N: int
    omega_pi: float
    stable: bool | None = None
    left_offset: float | None = None
    right_offset: float | None = None
    half_separation: float | None = None
    increment: float | None = None
    increment_endpoint: float | None = None
    increment_slope: float | None = None
    slope_stderr: float | None = None
    n_sum: int | None = None
    n_diff: int | None = None
    Omega: float | None = None
    X: float | None = None
    center_shift: float | None = None
    noise_floor: float | None = None
    blown_up: bool = False
    error: str = ""


UNITS = {
    "dz": "z",
    "T": "t",
    "omega_pi": "1/t",
    "left_offset": "1/t",
    "right_offset": "1/t",
    "half_separation": "1/t",
    "increment": "1/z",
    "increment_endpoint": "1/z",
    "increment_slope": "1/z",
    "slope_stderr": "1/z",
    "Omega": "1/t",
    "center_shift": "1/t",
    "noise_floor": "log10",
}


@dataclass
class RunOutcome:
    row: ResultRow
    details: dict[str, Any] = field(default_factory=dict)
    spectrum: tuple[np.ndarray, np.ndarray] | None = None


def _initial_field(cfg: ExperimentConfig, grid):
    bg = cfg.background.build()
    if isinstance(bg, SolitonSpec):
        u = soliton_profile(bg, cfg.beta, cfg.gamma, grid)
    elif isinstance(bg, CwSpec):
        u = cw_profile(bg, grid)
    else:
        u = multi_soliton_profile(bg, cfg.beta, cfg.gamma, grid)
    return add_noise(u, cfg.noise)


def _base_row(cfg: ExperimentConfig, method: str, grid=None) -> tuple[ResultRow, Any]:
    grid = grid or cfg.grid
    res = resonance_info(cfg.beta, cfg.dz, grid)
    return ResultRow(cfg.digest(), method, cfg.dz, grid.T, grid.N, res.omega_pi), res


def run_simulate(cfg: ExperimentConfig) -> RunOutcome:
    """Propagate, analyse the ``z_max`` spectrum and fill a row."""
    grid = cfg.grid
    row, res = _base_row(cfg, "simulate")
    rc = RunConfig(
        cfg.beta, cfg.gamma, cfg.dz, cfg.effective_z_max, cfg.record_every,
        scheme=cfg.scheme, blowup_factor=cfg.blowup_factor,
    )
    traj = propagate(_initial_field(cfg, grid), rc, grid)
    if traj.blown_up:
        row.blown_up, row.stable = True, False
        row.error = f"blow-up at step {traj.blowup_step}"
        return RunOutcome(row, {"blowup_step": traj.blowup_step})
    rep = analyze_trajectory(traj, grid, res, floor_margin=cfg.floor_margin, exclusions=cfg.exclusions)
    row.stable = rep.stable
    row.noise_floor = rep.noise_floor_final
    row.half_separation = rep.half_separation
    row.increment = rep.increment
    if not rep.stable:
        row.left_offset, row.right_offset = rep.left_offset, rep.right_offset
        row.increment_endpoint = rep.increment_endpoint.value
        row.increment_slope = rep.increment_slope.value
        row.slope_stderr = rep.increment_slope.stderr
        if rep.symmetry is not None:
            row.center_shift = rep.symmetry.center_shift
    details = {
        "noise_floor_initial": rep.noise_floor_initial,
        "peaks": [asdict(p) for p in rep.peaks],
        "symmetry": asdict(rep.symmetry) if rep.symmetry else None,
        "notes": rep.notes,
    }
    return RunOutcome(row, details, (rep.spectrum.omega, rep.spectrum.log10_mag))


def run_predict(cfg: ExperimentConfig) -> RunOutcome:
    """Asymptotic theory for soliton backgrounds, closed forms for cw."""
    grid = cfg.grid
    row, res = _base_row(cfg, "predict")
    bg = cfg.background.build()
    if isinstance(bg, CwSpec):
        pr = cw_predict(bg, cfg.beta, cfg.gamma, grid, res)
        inb = pr.rate > 0
        row.stable = not bool(inb.any())
        row.increment = float(pr.rate.max()) if inb.any() else 0.0
        row.half_separation = 0.0
        return RunOutcome(row, {"band": {str(k): v for k, v in pr.band.items()}})
    if not isinstance(bg, SolitonSpec):
        row.error = "no asymptotic theory for multi-soliton backgrounds"
        return RunOutcome(row)
    preds = predict_soliton_instability(bg, cfg.beta, cfg.gamma, grid.T, res)
    row.stable = not preds
    row.half_separation = 0.0
    row.increment = 0.0
    if preds:
        top = preds[0]
        pf = top.peak_frequencies
        row.left_offset = pf["left+"] - res.omega_pi
        row.right_offset = pf["right+"] - res.omega_pi
        row.half_separation = top.half_separation
        row.increment = top.increment
        row.n_sum, row.n_diff, row.Omega, row.X = top.n_sum, top.n_diff, top.Omega, top.X
        row.center_shift = center_shift(top.Omega, bg, cfg.beta, res)
    details = {
        "predictions": [
            {
                "n_sum": p.n_sum,
                "n_diff": p.n_diff,
                "Omega": p.Omega,
                "X": p.X,
                "increment": p.increment,
                "interval": list(p.interval),
                "rank": p.rank,
                "peak_frequencies": p.peak_frequencies,
            }
            for p in preds
        ]
    }
    return RunOutcome(row, details)


def run_oracle(cfg: ExperimentConfig) -> RunOutcome:
    """Dense Floquet eigenanalysis on the (possibly reduced) oracle grid."""
    grid = cfg.oracle_grid()
    row, res = _base_row(cfg, "oracle", grid)
    if grid.omega_max <= res.omega_pi + ORACLE_MARGIN:
        raise ConfigError(
            f"oracle grid omega_max={grid.omega_max:.3g} must exceed omega_pi+{ORACLE_MARGIN:g}"
            f"={res.omega_pi + ORACLE_MARGIN:.3g}; shrink T at fixed dt instead of N"
        )
    lmap = build_linear_map(
        cfg.background.build(), cfg.beta, cfg.gamma, cfg.dz, grid,
        variant=cfg.oracle_variant, max_n=cfg.oracle_max_n,
    )
    fr = floquet_increments(lmap, grid)
    unstable = fr.unstable()
    row.increment = max(fr.top_increment, 0.0)
    row.stable = unstable.size == 0
    row.half_separation = 0.0
    if unstable.size:
        lo, hi = fr.sidebands[0]
        row.left_offset, row.right_offset = lo - res.omega_pi, hi - res.omega_pi
        row.half_separation = 0.5 * (hi - lo)
        row.center_shift = float(fr.centroids[0] - res.omega_pi)
    details = {
        "oracle_T": grid.T,
        "oracle_N": grid.N,
        "increments": fr.increments[: max(8, unstable.size)].tolist(),
        "modes": [
            {
                "increment": float(fr.increments[i]),
                "centroid": float(fr.centroids[i]),
                "sidebands": fr.sidebands[i].tolist(),
                "resonant_fraction": float(fr.resonant_fraction[i]),
                "mass": fr.mass[i].tolist(),
            }
            for i in unstable
        ],
    }
    return RunOutcome(row, details)


RUNNERS = {"simulate": run_simulate, "predict": run_predict, "oracle": run_oracle}


def run_point(cfg: ExperimentConfig, methods=None) -> list[RunOutcome]:
    """Every requested method on one configuration; failures become error rows."""
    out = []
    for m in methods or cfg.methods:
        try:
            out.append(RUNNERS[m](cfg))
        except Exception as exc:  # noqa: BLE001 - isolate per-row failures
            log.error("%s failed at dz=%s T=%s: %s", m, cfg.dz, cfg.T, exc)
            row = ResultRow(cfg.digest(), m, cfg.dz, cfg.T, cfg.N, math.nan, error=f"{type(exc).__name__}: {exc}")
            out.append(RunOutcome(row))
    return out


def run_scan(cfg: ExperimentConfig) -> list[RunOutcome]:
    """All scan points, in parallel when ``cfg.workers > 1``; sorted by (dz, T)."""
    points = cfg.points()
    if cfg.workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
            chunks = list(ex.map(run_point, points))
    else:
        chunks = [run_point(p) for p in points]
    # the oracle may run on a reduced window, so order by the point's own T
    keyed = [((p.dz, p.T, METHOD_ORDER[o.row.method]), o) for p, c in zip(points, chunks) for o in c]
    keyed.sort(key=lambda t: t[0])
    return [o for _, o in keyed]


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return v


def write_rows_csv(rows: list[ResultRow], path: str | Path, config: ExperimentConfig | None = None) -> Path:
    """CSV with ``#`` comment lines for units and the full config."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = [f.name for f in fields(ResultRow)]
    with open(path, "w", newline="") as fh:
        fh.write("# units: " + ", ".join(f"{k}[{u}]" for k, u in UNITS.items()) + "\n")
        if config is not None:
            fh.write("# config: " + json.dumps(config.to_dict(), default=list) + "\n")
        w = csv.writer(fh)
        w.writerow(names)
        for r in rows:
            d = asdict(r)
            w.writerow([_fmt(d[n]) for n in names])
    return path


def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def write_json(outcomes: list[RunOutcome], path: str | Path, config: ExperimentConfig) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {
        "config": config.to_dict(),
        "digest": config.digest(),
        "units": UNITS,
        "results": [{"row": asdict(o.row), "details": o.details} for o in outcomes],
    }
    path.write_text(json.dumps(_clean(doc), indent=1))
    return path


def write_spectrum_csv(omega: np.ndarray, log10_mag: np.ndarray, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, np.column_stack([omega, log10_mag]), delimiter=",", header="omega,log10_abs_spectrum", comments="")
    return path
