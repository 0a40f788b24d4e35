"""Indicator computation and CSV/manifest export."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .entities import CONSUMER
from .state import SimState

UNDEFINED = ""   # CSV cell for undefined indicator values


def gini(values) -> float | None:
    """Mean absolute difference over twice the mean; None for an empty vector.

    Negative inputs are clamped to zero (a Gini over signed values is
    ill-defined); an all-zero vector has Gini 0.
    """
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        return None
    arr = np.clip(arr, 0.0, None)
    total = arr.sum()
    if total == 0.0:
        return 0.0
    arr = np.sort(arr)
    n = arr.size
    ranks = np.arange(1, n + 1)
    return float(np.sum((2 * ranks - n - 1) * arr) / (n * n * arr.mean()))


def gdp_by_municipality(state: SimState) -> tuple[dict[int, float], float]:
    """Sum of firm revenues this month, per municipality and metro-wide."""
    per: dict[int, float] = {m.id: 0.0 for m in state.municipalities}
    for firm in state.firms.values():
        mid = state.regions[firm.region_id].municipality_id
        per[mid] += firm.revenue_month / 100.0
    return per, sum(per.values())


def unemployment(state: SimState) -> float | None:
    labor_force = 0
    jobless = 0
    for p in state.persons.values():
        if p.in_labor_force():
            labor_force += 1
            if p.employer_id is None:
                jobless += 1
    if labor_force == 0:
        return None
    return jobless / labor_force


def weighted_mean_price(state: SimState) -> float | None:
    """Sales-weighted mean consumer price; unweighted mean when nothing sold."""
    num = 0.0
    den = 0.0
    prices = []
    for f in state.firms.values():
        if f.kind != CONSUMER:
            continue
        prices.append(f.price)
        num += f.price * f.qty_sold
        den += f.qty_sold
    if den > 0:
        return num / den
    if prices:
        return float(np.mean(prices))
    return None


def compute_frame(state: SimState) -> dict:
    """One month's indicator row."""
    rate_exists = len(state.households) > 0
    pis = [h.pi_history[-1] if h.pi_history else 0.0 for h in state.households.values()]
    per_muni_gdp, metro_gdp = gdp_by_municipality(state)

    price_now = weighted_mean_price(state)
    if state.month_index == 0 and price_now is not None:
        state.price_index_base = price_now
    base = getattr(state, "price_index_base", None)
    price_index = price_now / base if (price_now is not None and base) else None

    stock_asks = [d.ask / 100.0 for d in state.dwellings.values()]
    tx = [p / 100.0 for p in state.month_transactions]

    renter_defaults = sum(1 for h in state.households.values() if h.rent_defaulted)
    null_cons = sum(1 for h in state.households.values() if h.null_consumption)
    n_hh = len(state.households)

    profits = np.array([f.profit / 100.0 for f in state.firms.values()]) \
        if state.firms else np.array([])

    muni_gini = {}
    muni_qli = {}
    for m in state.municipalities:
        region_set = set(m.region_ids)
        local = [h.pi_history[-1] if h.pi_history else 0.0
                 for h in state.households.values()
                 if h.dwelling_id is not None
                 and state.dwellings[h.dwelling_id].region_id in region_set]
        muni_gini[m.id] = gini(local)
        muni_qli[m.id] = float(np.mean([state.regions[r].qli for r in m.region_ids]))

    frame = {
        "month": state.month_index,
        "gdp": metro_gdp,
        "gdp_municipal": per_muni_gdp,
        "gini": gini(pis) if rate_exists else None,
        "gini_municipal": muni_gini,
        "unemployment": unemployment(state),
        "price_index": price_index,
        "house_price_stock": float(np.mean(stock_asks)) if stock_asks else None,
        "house_price_transactions": float(np.mean(tx)) if tx else None,
        "rent_default_share": renter_defaults / n_hh if n_hh else None,
        "null_consumption_share": null_cons / n_hh if n_hh else None,
        "firm_profit_mean": float(profits.mean()) if profits.size else None,
        "firm_profit_q25": float(np.quantile(profits, 0.25)) if profits.size else None,
        "firm_profit_q50": float(np.quantile(profits, 0.50)) if profits.size else None,
        "firm_profit_q75": float(np.quantile(profits, 0.75)) if profits.size else None,
        "qli": muni_qli,
    }
    return frame


SCALAR_INDICATORS = [
    "gdp", "gini", "unemployment", "price_index", "house_price_stock",
    "house_price_transactions", "rent_default_share", "null_consumption_share",
    "firm_profit_mean", "firm_profit_q25", "firm_profit_q50", "firm_profit_q75",
]
MUNICIPAL_INDICATORS = ["gdp_municipal", "gini_municipal", "qli"]


def _fmt(value) -> str:
    if value is None:
        return UNDEFINED
    if isinstance(value, float):
        return repr(value)
    return str(value)


def export_run(frames: list[dict], out_dir: str | Path, run_id: str,
               scenario: str, seed: int) -> list[Path]:
    """One CSV per indicator: month, value, run_id, scenario, seed."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OSError(f"cannot create output directory {out}: {e}") from e
    written = []
    for name in SCALAR_INDICATORS:
        path = out / f"{name}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["month", "value", "run_id", "scenario", "seed"])
            for frame in frames:
                w.writerow([frame["month"], _fmt(frame[name]), run_id, scenario, seed])
        written.append(path)
    for name in MUNICIPAL_INDICATORS:
        path = out / f"{name}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["month", "municipality", "value", "run_id", "scenario", "seed"])
            for frame in frames:
                for mid in sorted(frame[name]):
                    w.writerow([frame["month"], mid, _fmt(frame[name][mid]),
                                run_id, scenario, seed])
        written.append(path)
    return written


def merge_runs(run_dirs: list[Path], out_dir: str | Path) -> list[Path]:
    """Concatenate per-run CSVs in run order into merged indicator files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name in SCALAR_INDICATORS + MUNICIPAL_INDICATORS:
        path = out / f"{name}.csv"
        header_written = False
        with path.open("w", newline="") as dst:
            for run_dir in run_dirs:
                src = Path(run_dir) / f"{name}.csv"
                if not src.exists():
                    continue
                lines = src.read_text().splitlines()
                if not lines:
                    continue
                if not header_written:
                    dst.write(lines[0] + "\n")
                    header_written = True
                for line in lines[1:]:
                    dst.write(line + "\n")
        written.append(path)
    return written


def write_manifest(out_dir: str | Path, manifest: dict) -> Path:
    path = Path(out_dir) / "manifest.json"
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return path
