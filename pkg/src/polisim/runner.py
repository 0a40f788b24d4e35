"""Batch execution: derived seeds, worker-pool dispatch, merging, manifests.

Results are byte-identical for any worker count: every run writes its own
directory from a fully derived seed, and the parent merges in run order.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any

import numpy as np

from . import stats
from .params import ConfigError, RunConfig, SCENARIOS, SimParams, config_from_dict
from .rng import derive_run_seed
from .simulation import run_simulation
from .state import IntegrityError


def config_to_dict(cfg: RunConfig) -> dict[str, Any]:
    return {
        "params": dataclasses.asdict(cfg.params),
        "city": dataclasses.asdict(cfg.city),
        "scenario": cfg.scenario,
        "seed": cfg.seed,
        "horizon_months": cfg.horizon_months,
        "start": {"year": cfg.start_year, "month": cfg.start_month},
        "series": cfg.series_spec,
    }


@dataclasses.dataclass
class RunOutcome:
    run_id: str
    seed: int
    scenario: str
    status: str
    months: int
    digest: str = ""
    error: str = ""
    run_dir: str = ""


def _execute_run(payload: dict) -> dict:
    """Worker entry point: one full simulation plus its CSV export."""
    run_id = payload["run_id"]
    try:
        cfg = config_from_dict(payload["config"])
        state = run_simulation(cfg)
        run_dir = Path(payload["out_dir"]) / "runs" / run_id
        stats.export_run(state.frames, run_dir, run_id, cfg.scenario, cfg.seed)
        return {"run_id": run_id, "seed": cfg.seed, "scenario": cfg.scenario,
                "status": "ok", "months": state.month_index,
                "digest": state.digest(), "run_dir": str(run_dir)}
    except IntegrityError as e:
        return {"run_id": run_id, "seed": payload["config"].get("seed", 0),
                "scenario": payload["config"].get("scenario", ""),
                "status": "integrity_error", "months": 0, "error": str(e)}
    except Exception as e:  # noqa: BLE001 -- worker boundary, reported in manifest
        return {"run_id": run_id, "seed": payload["config"].get("seed", 0),
                "scenario": payload["config"].get("scenario", ""),
                "status": "failed", "months": 0, "error": f"{type(e).__name__}: {e}"}


def _dispatch(payloads: list[dict], cpus: int) -> list[dict]:
    if cpus <= 1 or len(payloads) <= 1:
        return [_execute_run(p) for p in payloads]
    with ProcessPoolExecutor(max_workers=cpus) as pool:
        results = list(pool.map(_execute_run, payloads))
    return results


def plan_batch(base: RunConfig, n_runs: int, scenarios: list[str] | None = None,
               out_dir: str | Path = "out",
               param_points: list[tuple[str, float]] | None = None) -> list[dict]:
    """Build the worker payload list for a batch.

    Every run gets a seed derived from the master seed, the run index, and
    the sweep point (if any), so results are reproducible run by run.
    """
    scenarios = scenarios or [base.scenario]
    points = param_points or [None]
    payloads = []
    for point in points:
        for scenario in scenarios:
            for i in range(n_runs):
                doc = config_to_dict(base)
                doc["scenario"] = scenario
                label = scenario
                salt = scenario
                if point is not None:
                    name, value = point
                    doc["params"][name] = value
                    label = f"{scenario}_{name}_{value:g}"
                    salt = f"{scenario}:{name}={value!r}"
                doc["seed"] = derive_run_seed(base.seed, i, salt)
                payloads.append({
                    "config": doc,
                    "run_id": f"{label}_r{i:03d}",
                    "out_dir": str(out_dir),
                    "label": label,
                })
    return payloads


def run_batch(base: RunConfig, n_runs: int, cpus: int, out_dir: str | Path,
              scenarios: list[str] | None = None,
              param_points: list[tuple[str, float]] | None = None) -> list[RunOutcome]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payloads = plan_batch(base, n_runs, scenarios, out, param_points)
    results = _dispatch(payloads, cpus)

    outcomes = [RunOutcome(**r) for r in results]
    ok_dirs = [Path(o.run_dir) for o in outcomes if o.status == "ok"]
    if ok_dirs:
        stats.merge_runs(ok_dirs, out / "merged")

    manifest = {
        "config": config_to_dict(base),
        "runs": [dataclasses.asdict(o) for o in outcomes],
        "n_runs": n_runs,
        "scenarios": scenarios or [base.scenario],
        "points": [{"param": p[0], "value": p[1]} for p in (param_points or []) if p],
    }
    stats.write_manifest(out, manifest)
    return outcomes


def parse_sweep_spec(spec: str) -> tuple[str, list[float]] | str:
    """Parse PARAM:START:END:INTERVALS, or the POLICIES token."""
    if spec.strip().upper() == "POLICIES":
        return "POLICIES"
    parts = spec.split(":")
    if len(parts) != 4:
        raise ConfigError(
            f"sweep spec must be PARAM:START:END:INTERVALS or POLICIES, got {spec!r}")
    name = parts[0].strip().lower()
    valid = SimParams.numeric_names()
    if name not in valid:
        raise ConfigError(
            f"unknown sweep parameter {parts[0]!r}; valid names: {', '.join(valid)}")
    try:
        start, end = float(parts[1]), float(parts[2])
        intervals = int(parts[3])
    except ValueError as e:
        raise ConfigError(f"invalid sweep bounds in {spec!r}: {e}") from e
    if intervals < 2:
        raise ConfigError("sweep needs at least 2 intervals")
    values = [float(v) for v in np.linspace(start, end, intervals)]
    return name, values


def summarize_sweep(out_dir: str | Path) -> Path:
    """Comparative CSV: per-run means of every scalar indicator."""
    out = Path(out_dir)
    merged = out / "merged"
    rows = []
    for name in stats.SCALAR_INDICATORS:
        path = merged / f"{name}.csv"
        if not path.exists():
            continue
        per_run: dict[str, list[float]] = {}
        meta: dict[str, tuple[str, str]] = {}
        with path.open() as fh:
            header = fh.readline()
            del header
            for line in fh:
                month, value, run_id, scenario, seed = line.rstrip("\n").split(",")
                if value == "":
                    continue
                per_run.setdefault(run_id, []).append(float(value))
                meta[run_id] = (scenario, seed)
        for run_id in sorted(per_run):
            scenario, seed = meta[run_id]
            mean = sum(per_run[run_id]) / len(per_run[run_id])
            rows.append([name, run_id, scenario, seed, repr(mean)])
    path = out / "summary.csv"
    with path.open("w", newline="") as fh:
        fh.write("indicator,run_id,scenario,seed,mean\n")
        for row in rows:
            fh.write(",".join(str(c) for c in row) + "\n")
    return path
