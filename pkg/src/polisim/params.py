"""Simulation parameters, exogenous series, and config loading."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any


class ConfigError(ValueError):
    """Raised for invalid parameters, series, or config documents."""


SCENARIOS = ("baseline", "acquisition", "voucher", "aid")


@dataclass
class SimParams:
    """All model knobs. Defaults follow the standard-run parameter table."""

    pop: float = 0.01                # fraction of the real population instantiated
    alpha: float = 0.6               # productivity exponent
    beta: float = 10.0               # productivity divisor
    iota: float = 0.75               # firm labor-market entry probability
    eta: float = 0.3                 # fraction of distance-only vacancies
    phi: float = 0.0045              # monthly fraction of households entering the sales market
    sigma: int = 20                  # match sample size (hiring and rental)
    varsigma: int = 5                # goods-market sample size
    rho_plus: float = 1.3            # price cap ratio
    rho_minus: float = 0.7           # discount floor ratio
    tau: float = 3.0                 # neighborhood-income price weight
    gamma: float = 0.6               # max time-on-market discount bound
    kappa: float = -0.01             # time-on-market decay rate (<= 0)
    markup_pi: float = 0.15          # firm markup
    psi: float = 0.00007             # municipal efficiency index
    nu: float = 0.7                  # max loans/deposits ratio
    chi: float = 0.5                 # payment / permanent-income cap
    n_months: int = 24               # construction cash-flow horizon
    upsilon: float = 0.15            # lot cost premium
    zeta: float = 0.7                # sticky-price probability
    delta: float = 0.2               # policy budget share
    theta: float = 0.2               # policy eligibility quantile
    ltv: float = 0.7                 # loan-to-value cap
    rental_share: float = 0.3        # fraction of vacant listings routed to rental
    vacancy_share: float = 0.1       # initial vacant-dwelling fraction
    rental_price_fraction: float = 0.005  # monthly rent as fraction of house value
    tax_consumption: float = 0.02
    tax_labor: float = 0.02
    tax_firm: float = 0.05
    tax_transaction: float = 0.005
    tax_property: float = 0.00005
    reserve_multiple: float = 6.0    # months of PI held as uninvested reserve
    # Structural switches and transport costs (tested on/off in the sensitivity suite).
    use_unemployment_in_wages: bool = True
    symmetric_price_down: bool = False
    c_car: float = 1.0               # per-km transport cost, private
    c_public: float = 0.3            # per-km transport cost, public

    def validate(self) -> None:
        unit = {
            "pop": self.pop, "alpha": self.alpha, "iota": self.iota, "eta": self.eta,
            "phi": self.phi, "gamma": self.gamma, "psi": self.psi, "nu": self.nu,
            "chi": self.chi, "upsilon": self.upsilon, "zeta": self.zeta,
            "delta": self.delta, "theta": self.theta, "rental_share": self.rental_share,
            "rental_price_fraction": self.rental_price_fraction,
            "markup_pi": self.markup_pi,
        }
        for name, value in unit.items():
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {value}")
        for name in ("tax_consumption", "tax_labor", "tax_firm",
                     "tax_transaction", "tax_property"):
            rate = getattr(self, name)
            if not 0.0 <= rate < 1.0:
                raise ConfigError(f"{name} must be in [0, 1), got {rate}")
        if self.beta <= 0:
            raise ConfigError(f"beta must be > 0, got {self.beta}")
        if self.kappa > 0:
            raise ConfigError(f"kappa must be <= 0, got {self.kappa}")
        if not (self.rho_plus >= 1.0 >= self.rho_minus >= 0.0):
            raise ConfigError(
                f"need rho_plus >= 1 >= rho_minus >= 0, got {self.rho_plus}, {self.rho_minus}"
            )
        if not 0.0 < self.ltv <= 1.0:
            raise ConfigError(f"ltv must be in (0, 1], got {self.ltv}")
        if not 0.0 <= self.vacancy_share < 0.5:
            raise ConfigError(f"vacancy_share must be in [0, 0.5), got {self.vacancy_share}")
        if self.sigma < 1 or self.varsigma < 1:
            raise ConfigError("sigma and varsigma must be >= 1")
        if self.n_months < 1:
            raise ConfigError(f"n_months must be >= 1, got {self.n_months}")
        if self.tau < 0:
            raise ConfigError(f"tau must be >= 0, got {self.tau}")
        if self.reserve_multiple < 0:
            raise ConfigError("reserve_multiple must be >= 0")
        if self.c_car < 0 or self.c_public < 0:
            raise ConfigError("transport costs must be >= 0")

    @classmethod
    def numeric_names(cls) -> list[str]:
        """Parameter names accepted by the sensitivity sweep."""
        return [f.name for f in fields(cls) if f.type in ("float", "int")]

    def with_override(self, name: str, value: float) -> "SimParams":
        if name not in {f.name for f in fields(self)}:
            raise ConfigError(f"unknown parameter {name!r}")
        current = getattr(self, name)
        if isinstance(current, bool):
            value = bool(value)
        elif isinstance(current, int):
            value = int(round(value))
        p = replace(self, **{name: value})
        p.validate()
        return p


@dataclass
class ExogenousSeries:
    """Per-month exogenous inputs; every series must cover the horizon."""

    baseline_rate: list[float]
    mortgage_rate: list[float]
    firm_entry: list[int]
    population_target: dict[int, list[int]]  # municipality id -> monthly headcount

    def validate(self, horizon: int, municipality_ids: list[int] | None = None) -> None:
        for name in ("baseline_rate", "mortgage_rate", "firm_entry"):
            series = getattr(self, name)
            if len(series) < horizon:
                raise ConfigError(f"series {name} covers {len(series)} months, horizon is {horizon}")
        for name in ("baseline_rate", "mortgage_rate"):
            for t, r in enumerate(getattr(self, name)):
                if r <= 0:
                    # Eq. for permanent income divides by r; zero is a singularity.
                    raise ConfigError(f"series {name} must be > 0 everywhere, got {r} at month {t}")
        for mid, series in self.population_target.items():
            if len(series) < horizon:
                raise ConfigError(f"population_target[{mid}] covers {len(series)} months, horizon is {horizon}")
        if municipality_ids is not None:
            missing = [m for m in municipality_ids if m not in self.population_target]
            if missing:
                raise ConfigError(f"population_target missing municipalities {missing}")


@dataclass
class CityConfig:
    """Synthetic-city generator knobs (everything the input tables do not pin)."""

    n_regions: int = 9
    n_municipalities: int = 3
    scale: int = 400_000             # real population the pyramids describe
    renter_share: float = 0.3        # households owning zero dwellings
    construction_firm_share: float = 0.1
    bank_endowment_ratio: float = 1.0  # bank cash as multiple of initial household savings
    new_firm_endowment: float = 0.0
    firm_cash0: float = 100.0        # initial firms' starting cash
    firm_price0: float = 25.0        # initial unit price (near wage-flow equilibrium)
    initial_unemployment: float = 0.08
    seed_income_per_q: float = 1.4   # synthetic first-month income per qualification unit
    savings_months: float = 4.0      # initial savings ~ U[0, 2x] * this * seeded income
    plane_km: float = 16.0           # bounding box edge of the abstract km plane
    # Simplified FPM-style federal transfer: exogenous money into municipal
    # procurement. Balances the cash firms and the bank retain structurally;
    # does not enter the QLI formula or the policy budget.
    federal_transfer_per_capita: float = 0.08

    def validate(self) -> None:
        if self.n_municipalities < 1 or self.n_regions < self.n_municipalities:
            raise ConfigError("need n_regions >= n_municipalities >= 1")
        if self.scale <= 0:
            raise ConfigError(f"scale must be > 0, got {self.scale}")
        if not 0.0 <= self.renter_share < 1.0:
            raise ConfigError("renter_share must be in [0, 1)")
        if not 0.0 <= self.construction_firm_share <= 1.0:
            raise ConfigError("construction_firm_share must be in [0, 1]")
        if not 0.0 <= self.initial_unemployment <= 1.0:
            raise ConfigError("initial_unemployment must be in [0, 1]")
        if self.firm_price0 <= 0:
            raise ConfigError("firm_price0 must be > 0")


@dataclass
class RunConfig:
    """One fully-resolved simulation run: parameters, city, series, scenario."""

    params: SimParams = field(default_factory=SimParams)
    city: CityConfig = field(default_factory=CityConfig)
    scenario: str = "baseline"
    seed: int = 0
    horizon_months: int = 120
    start_year: int = 2010
    start_month: int = 1             # 1..12
    series_spec: dict[str, Any] = field(default_factory=dict)

    def validate(self) -> None:
        self.params.validate()
        self.city.validate()
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if self.horizon_months < 1:
            raise ConfigError("horizon_months must be >= 1")
        if not 1 <= self.start_month <= 12:
            raise ConfigError("start_month must be in 1..12")
        if not 0.0 < self.params.pop <= 0.05:
            raise ConfigError(f"pop must be in (0, 0.05], got {self.params.pop}")


DEFAULT_SERIES_SPEC: dict[str, Any] = {
    "baseline_rate": 0.005,
    "mortgage_rate": 0.0076,
    "firm_entry_rate": 0.002,        # monthly fraction of the initial firm count
    "population_growth_rate": 0.0005,  # monthly target growth per municipality
}


def _dataclass_from_mapping(cls, data: dict[str, Any], where: str):
    valid = {f.name for f in fields(cls)}
    unknown = set(data) - valid
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")
    return cls(**data)


def config_from_dict(doc: dict[str, Any]) -> RunConfig:
    """Build a validated RunConfig from a parsed JSON document."""
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    known = {"params", "city", "series", "scenario", "seed", "horizon_months", "start"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown top-level config keys: {sorted(unknown)}")
    params = _dataclass_from_mapping(SimParams, doc.get("params", {}), "params")
    city = _dataclass_from_mapping(CityConfig, doc.get("city", {}), "city")
    start = doc.get("start", {})
    cfg = RunConfig(
        params=params,
        city=city,
        scenario=doc.get("scenario", "baseline"),
        seed=int(doc.get("seed", 0)),
        horizon_months=int(doc.get("horizon_months", 120)),
        start_year=int(start.get("year", 2010)),
        start_month=int(start.get("month", 1)),
        series_spec=dict(doc.get("series", {})),
    )
    cfg.validate()
    build_series(cfg, municipality_ids=list(range(cfg.city.n_municipalities)),
                 initial_population={m: 1 for m in range(cfg.city.n_municipalities)},
                 initial_firms=1)  # early shape/positivity check; real series built at run time
    return cfg


def load_config(path: str | Path) -> RunConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {p} is not valid JSON: {e}") from e
    return config_from_dict(doc)


def build_series(cfg: RunConfig, municipality_ids: list[int],
                 initial_population: dict[int, int], initial_firms: int) -> ExogenousSeries:
    """Expand the config's series spec (scalars or explicit lists) over the horizon."""
    spec = dict(DEFAULT_SERIES_SPEC)
    spec.update(cfg.series_spec)
    horizon = cfg.horizon_months

    def expand(name: str, default_rate_key: str | None = None) -> list[float]:
        value = spec.get(name, spec.get(default_rate_key) if default_rate_key else None)
        if isinstance(value, list):
            return [float(v) for v in value]
        return [float(value)] * horizon

    baseline = expand("baseline_rate")
    mortgage = expand("mortgage_rate")

    if isinstance(spec.get("firm_entry"), list):
        firm_entry = [int(v) for v in spec["firm_entry"]]
    else:
        rate = float(spec["firm_entry_rate"])
        cumulative = 0.0
        firm_entry = []
        count = 0
        for t in range(horizon):
            cumulative = initial_firms * ((1.0 + rate) ** (t + 1) - 1.0)
            step = int(round(cumulative)) - count
            firm_entry.append(max(0, step))
            count += max(0, step)

    targets: dict[int, list[int]] = {}
    explicit = spec.get("population_target")
    if isinstance(explicit, dict):
        targets = {int(k): [int(v) for v in vs] for k, vs in explicit.items()}
    else:
        growth = float(spec["population_growth_rate"])
        for mid in municipality_ids:
            base = initial_population.get(mid, 0)
            targets[mid] = [int(round(base * (1.0 + growth) ** (t + 1))) for t in range(horizon)]

    series = ExogenousSeries(baseline, mortgage, firm_entry, targets)
    series.validate(horizon, municipality_ids)
    return series
