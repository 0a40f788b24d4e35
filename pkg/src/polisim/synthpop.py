"""Synthetic input generator and city instantiation.

Replaces the proprietary census tables with schema-compatible synthetic ones:
age/gender pyramids, fertility and mortality schedules, qualification CDFs,
and a center-periphery region layout on an abstract km plane.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .entities import (CONSTRUCTION, CONSUMER, FEMALE, MALE, Dwelling, Firm,
                       Household, Municipality, Person, Region)
from .params import ConfigError, RunConfig
from .rng import RngStreams
from .state import SimState, to_cents

MAX_AGE = 110
PYRAMID_MAX_AGE = 100
QUAL_LEVELS = 5


@dataclass
class RegionSpec:
    region_id: int
    municipality_id: int
    x: float
    y: float
    population_weight: float          # within its municipality, sums to 1
    qualification_cdf: list[float]    # 5 levels, monotone, ends at 1
    avg_household_size: float
    firm_count: int                   # real-scale count; instantiation multiplies by pop
    license_stock: int
    license_price: float              # currency
    licenses_per_month: int
    qli0: float


@dataclass
class InputTables:
    pyramids: dict[int, dict[str, np.ndarray]]   # municipality -> gender -> counts by age 0..100
    fertility: np.ndarray                        # by age 0..110, nonzero on 15..49
    mortality: dict[str, np.ndarray]             # gender -> by age 0..110, mortality[110] == 1
    marriage_rate: float                         # monthly, per unmarried adult
    divorce_rate: float
    car_ownership: np.ndarray                    # by income decile, non-decreasing
    population_estimates: dict[int, list[float]]  # municipality -> yearly headcount
    hdi: dict[int, float]

    def municipality_total(self, mid: int) -> float:
        return float(sum(arr.sum() for arr in self.pyramids[mid].values()))


def generate_synthetic_inputs(spec_seed: int, n_regions: int, n_municipalities: int,
                              scale: int) -> tuple[list[RegionSpec], InputTables]:
    """Generate a center-periphery synthetic metropolitan region.

    Municipality 0 is the core: larger, richer, higher QLI. Peripheral
    municipalities sit 8-14 km out with lower qualification mass.
    """
    if n_municipalities < 1 or n_regions < n_municipalities:
        raise ConfigError("need n_regions >= n_municipalities >= 1")
    if scale <= 0:
        raise ConfigError(f"scale must be > 0, got {scale}")
    rng = np.random.default_rng(np.random.SeedSequence(int(spec_seed)))

    # Region counts per municipality: core takes ~40%, remainder spread evenly.
    counts = [1] * n_municipalities
    extra = n_regions - n_municipalities
    core_extra = round(extra * 0.4) if n_municipalities > 1 else extra
    counts[0] += core_extra
    for i in range(extra - core_extra):
        counts[1 + i % (n_municipalities - 1)] += 1

    # Population share: core holds half the metro when there is a periphery.
    if n_municipalities == 1:
        shares = [1.0]
    else:
        shares = [0.5] + [0.5 / (n_municipalities - 1)] * (n_municipalities - 1)

    hdi = {}
    for mid in range(n_municipalities):
        if mid == 0:
            hdi[mid] = round(0.78 + 0.05 * rng.random(), 4)
        else:
            hdi[mid] = round(0.64 + 0.09 * rng.random(), 4)

    specs: list[RegionSpec] = []
    rid = 0
    for mid in range(n_municipalities):
        if mid == 0:
            cx, cy = 0.0, 0.0
            spread = 4.0
        else:
            angle = 2.0 * math.pi * (mid - 1) / max(1, n_municipalities - 1)
            radius = 8.0 + 6.0 * rng.random()
            cx, cy = radius * math.cos(angle), radius * math.sin(angle)
            spread = 2.5
        n = counts[mid]
        raw = rng.gamma(2.0, 1.0, size=n)
        weights = raw / raw.sum()
        weights = np.round(weights, 9)
        weights[-1] = round(1.0 - float(weights[:-1].sum()), 9)
        for k in range(n):
            theta = 2.0 * math.pi * rng.random()
            rr = spread * math.sqrt(rng.random())
            qli = hdi[mid] * (0.92 + 0.16 * rng.random())
            if mid == 0:
                qli *= 1.03
            qli = float(min(0.99, max(0.05, qli)))
            # Higher-QLI regions skew toward higher qualification levels.
            skew = (qli - 0.55) * 2.0
            level_w = np.exp(skew * np.arange(1, QUAL_LEVELS + 1) * 0.35)
            probs = level_w / level_w.sum()
            cdf = np.cumsum(probs)
            cdf[-1] = 1.0
            specs.append(RegionSpec(
                region_id=rid,
                municipality_id=mid,
                x=round(cx + rr * math.cos(theta), 4),
                y=round(cy + rr * math.sin(theta), 4),
                population_weight=float(weights[k]),
                qualification_cdf=[round(float(v), 9) for v in cdf],
                avg_household_size=round(2.4 + 1.5 * rng.random(), 3),
                firm_count=0,   # filled below once weights are final
                license_stock=int(rng.integers(2, 9)),
                license_price=round(0.05 + 0.2 * rng.random() * (qli / 0.7), 4),
                licenses_per_month=int(rng.integers(0, 3)),
                qli0=round(qli, 5),
            ))
            rid += 1

    # Firms at ~1 per 10 persons, concentrated toward the core.
    total_firms = max(n_regions, scale // 10)
    attract = np.array([
        shares[s.municipality_id] * s.population_weight * (1.3 if s.municipality_id == 0 else 1.0)
        for s in specs])
    attract = attract / attract.sum()
    alloc = _largest_remainder(attract * total_firms)
    for s, n_f in zip(specs, alloc):
        s.firm_count = max(1, int(n_f))

    pyramids: dict[int, dict[str, np.ndarray]] = {}
    for mid in range(n_municipalities):
        ages = np.arange(PYRAMID_MAX_AGE + 1, dtype=float)
        base = np.where(ages <= 24, 1.0, np.maximum(0.02, 1.0 - (ages - 24) / 70.0))
        base = base * (0.9 + 0.2 * rng.random(PYRAMID_MAX_AGE + 1))
        base = base / base.sum()
        total = scale * shares[mid]
        pyramids[mid] = {
            MALE: np.round(base * total * 0.49, 3),
            FEMALE: np.round(base * total * 0.51, 3),
        }

    fertility = np.zeros(MAX_AGE + 1)
    for age in range(15, 50):
        fertility[age] = 0.0306 * math.exp(-((age - 27.0) ** 2) / 180.0)
    fertility = np.round(fertility, 6)

    mortality: dict[str, np.ndarray] = {}
    for gender, mult in ((FEMALE, 1.0), (MALE, 1.3)):
        m = np.zeros(MAX_AGE + 1)
        for age in range(MAX_AGE + 1):
            infant = 0.0012 * math.exp(-age / 2.0)
            senesc = 0.00003 * math.exp(age * 0.082)
            m[age] = min(1.0, (infant + senesc) * mult)
        m[MAX_AGE] = 1.0
        mortality[gender] = np.round(np.minimum(m, 1.0), 8)
        mortality[gender][MAX_AGE] = 1.0

    deciles = np.arange(10)
    car = 1.0 / (1.0 + np.exp(-(deciles - 5.5) / 1.6))
    car = np.round(0.06 + 0.82 * car, 4)
    car = np.maximum.accumulate(car)

    estimates = {
        mid: [round(scale * shares[mid] * (1.006 ** y), 1) for y in range(21)]
        for mid in range(n_municipalities)
    }

    tables = InputTables(
        pyramids=pyramids,
        fertility=fertility,
        mortality=mortality,
        marriage_rate=0.001,
        divorce_rate=0.0,
        car_ownership=car,
        population_estimates=estimates,
        hdi=hdi,
    )
    return specs, tables


def _largest_remainder(targets: np.ndarray) -> list[int]:
    """Integer allocation preserving the exact rounded total."""
    floors = np.floor(targets).astype(int)
    remainder = int(round(targets.sum())) - int(floors.sum())
    order = np.argsort(-(targets - floors), kind="stable")
    out = floors.copy()
    for i in range(remainder):
        out[order[i]] += 1
    return [int(v) for v in out]


def instantiate_city(specs: list[RegionSpec], tables: InputTables,
                     config: RunConfig, rng: RngStreams) -> SimState:
    """Build the initial agent population from the synthetic inputs."""
    params = config.params
    if not 0.0 < params.pop <= 0.05:
        raise ConfigError(f"pop must be in (0, 0.05], got {params.pop}")
    state = SimState(config, series=None, rng=rng)
    state.tables = tables
    draw = rng.synthpop

    muni_regions: dict[int, list[int]] = {}
    for s in specs:
        region = Region(s.region_id, s.municipality_id, s.x, s.y, s.qli0,
                        s.license_stock, to_cents(s.license_price), s.licenses_per_month,
                        qualification_cdf=list(s.qualification_cdf))
        state.regions.append(region)
        muni_regions.setdefault(s.municipality_id, []).append(s.region_id)
    for mid in sorted(muni_regions):
        state.municipalities.append(Municipality(mid, muni_regions[mid], tables.hdi[mid]))

    created_cents = 0
    for mid in sorted(muni_regions):
        total_target = int(round(tables.municipality_total(mid) * params.pop))
        region_specs = [s for s in specs if s.municipality_id == mid]
        weights = np.array([s.population_weight for s in region_specs])
        alloc = _largest_remainder(weights * total_target)

        pyramid = tables.pyramids[mid]
        genders, ages, probs = [], [], []
        for gender in (FEMALE, MALE):
            arr = pyramid[gender]
            for age in range(len(arr)):
                if arr[age] > 0:
                    genders.append(gender)
                    ages.append(age)
                    probs.append(float(arr[age]))
        probs_arr = np.array(probs)
        probs_arr = probs_arr / probs_arr.sum()

        muni_households = 0
        for s, n_persons in zip(region_specs, alloc):
            if n_persons == 0 and total_target > 0:
                continue
            persons = _make_persons(state, s, n_persons, genders, ages, probs_arr, draw)
            households = _group_households(state, s, persons, draw)
            muni_households += len(households)
            created_cents += _endow_households(state, households, config, draw)
            _build_housing_stock(state, s, households, params, draw)
            _place_firms(state, s, params, config, draw)

        if muni_households == 0:
            # A municipality with no households would make its policy register degenerate.
            raise ConfigError(f"municipality {mid} generated zero households")

    _assign_surplus_ownership(state, draw)
    _seed_employment(state, config, draw)
    _init_income_index(state)
    _price_stock_and_contracts(state)

    for firm in state.firms.values():
        created_cents += firm.cash
    bank_cents = to_cents(config.city.bank_endowment_ratio
                          * state.bank.total_deposits / 100.0)
    state.bank.cash = bank_cents
    created_cents += bank_cents

    for m in state.municipalities:
        m.pop_prev = _municipality_population(state, m)

    # Book everything created at t0 against the external sector: total money is 0.
    state.external = -created_cents
    return state


def _make_persons(state: SimState, spec: RegionSpec, n: int, genders, ages,
                  probs: np.ndarray, draw) -> list[Person]:
    persons = []
    cdf = spec.qualification_cdf
    idx = draw.choice(len(probs), size=n, p=probs) if n else []
    for i in range(n):
        k = int(idx[i])
        age_months = ages[k] * 12 + int(draw.integers(0, 12))
        u = draw.random()
        q = 1 + sum(1 for c in cdf[:-1] if u > c)
        p = Person(state.new_person_id(), age_months, genders[k],
                   int(draw.integers(0, 12)), q, household_id=-1)
        state.persons[p.id] = p
        persons.append(p)
    return persons


def _group_households(state: SimState, spec: RegionSpec, persons: list[Person],
                      draw) -> list[Household]:
    """Chunk persons into households near the region's average size.

    Working-age adults are dealt round-robin first so households keep at
    least one potential earner where the pyramid allows (extended-family
    structure; there is no pension system to support elderly-only units).
    """
    if not persons:
        return []
    workers = [p for p in persons if 18 <= p.age_years <= 60]
    elderly = [p for p in persons if p.age_years > 60]
    minors = [p for p in persons if p.age_years < 18]
    workers = [workers[i] for i in draw.permutation(len(workers))]
    elderly = [elderly[i] for i in draw.permutation(len(elderly))]
    minors = [minors[i] for i in draw.permutation(len(minors))]

    n_households = max(1, int(round(len(persons) / spec.avg_household_size)))
    if workers:
        n_households = min(n_households, len(workers))
    households = []
    for _ in range(n_households):
        hh = Household(state.new_household_id())
        state.households[hh.id] = hh
        households.append(hh)

    for i, person in enumerate(workers + elderly + minors):
        hh = households[i % len(households)]
        hh.member_ids.append(person.id)
        person.household_id = hh.id
    return households


def _endow_households(state: SimState, households: list[Household],
                      config: RunConfig, draw) -> int:
    """Seed income history, cash, and savings; returns total cents created."""
    created = 0
    for hh in households:
        q_sum = sum(state.persons[p].qualification for p in hh.member_ids
                    if state.persons[p].age_years >= 18)
        seed_income = config.city.seed_income_per_q * max(1, q_sum)
        hh.income_sum = to_cents(seed_income)
        hh.income_months = 1
        # Right-skewed initial savings: same mean as a uniform draw, more spread.
        savings = to_cents(seed_income * config.city.savings_months
                           * 3.0 * draw.random() ** 2)
        state.credit_savings(hh, savings)
        created += savings
        for pid in hh.member_ids:
            person = state.persons[pid]
            if person.age_years >= 18:
                person.cash = to_cents(0.2 * person.qualification)
                created += person.cash
    return created


def _build_housing_stock(state: SimState, spec: RegionSpec, households: list[Household],
                         params, draw) -> None:
    n_hh = len(households)
    if n_hh == 0:
        return
    n_dw = max(n_hh, int(round(n_hh / (1.0 - params.vacancy_share))))
    dwellings = []
    for _ in range(n_dw):
        d = Dwelling(state.new_dwelling_id(), spec.region_id,
                     size=float(round(20.0 + 100.0 * draw.random(), 2)),
                     quality=int(draw.integers(1, 5)))
        state.dwellings[d.id] = d
        dwellings.append(d)

    order = list(draw.permutation(n_hh))
    shuffled = [households[i] for i in order]
    n_renters = int(round(state.config.city.renter_share * n_hh))
    renters, owners = shuffled[:n_renters], shuffled[n_renters:]

    d_order = list(draw.permutation(n_dw))
    pool = [dwellings[i] for i in d_order]
    for hh in owners:
        d = pool.pop()
        d.owner_household_id = hh.id
        d.occupant_household_id = hh.id
        hh.owned_dwelling_ids.append(d.id)
        hh.dwelling_id = d.id
    for hh in renters:
        d = pool.pop()
        d.occupant_household_id = hh.id
        hh.dwelling_id = d.id
    # Remaining pool dwellings stay vacant; owners for them (and for the rented
    # ones) are drawn later in the metro-wide surplus lottery.


def _place_firms(state: SimState, spec: RegionSpec, params, config: RunConfig,
                 draw) -> None:
    n_firms = max(1, int(round(spec.firm_count * params.pop)))
    n_construction = int(round(config.city.construction_firm_share * n_firms))
    for i in range(n_firms):
        kind = CONSTRUCTION if i < n_construction else CONSUMER
        firm = Firm(state.new_firm_id(), spec.region_id, kind,
                    price=config.city.firm_price0)
        firm.cash = to_cents(config.city.firm_cash0)
        state.firms[firm.id] = firm


def _assign_surplus_ownership(state: SimState, draw) -> None:
    """Weighted lottery over households for every dwelling without an owner."""
    unowned = [d for d in sorted(state.dwellings.values(), key=lambda x: x.id)
               if d.owner_household_id is None]
    if not unowned:
        return
    households = sorted(state.households.values(), key=lambda h: h.id)
    weights = np.array([h.savings + h.income_sum + 1.0 for h in households])
    probs = weights / weights.sum()
    picks = draw.choice(len(households), size=len(unowned), p=probs)
    for d, k in zip(unowned, picks):
        owner = households[int(k)]
        d.owner_household_id = owner.id
        owner.owned_dwelling_ids.append(d.id)


def _seed_employment(state: SimState, config: RunConfig, draw) -> None:
    """Start near-full employment so the run opens in a working economy.

    Workers are assigned to firms of their own municipality; each firm gets a
    seeded revenue history so wages flow from the first month.
    """
    u0 = config.city.initial_unemployment
    by_muni: dict[int, list[Firm]] = {}
    for firm in state.firms.values():
        by_muni.setdefault(state.regions[firm.region_id].municipality_id, []).append(firm)
    all_firms = sorted(state.firms.values(), key=lambda f: f.id)

    labor_force = [p for p in sorted(state.persons.values(), key=lambda x: x.id)
                   if p.in_labor_force()]
    for person in labor_force:
        if draw.random() < u0:
            continue
        hh = state.households[person.household_id]
        mid = state.regions[state.dwellings[hh.dwelling_id].region_id].municipality_id
        pool = by_muni.get(mid) or all_firms
        firm = pool[int(draw.integers(0, len(pool)))]
        firm.employee_ids.append(person.id)
        person.employer_id = firm.id

    alpha, beta = state.params.alpha, state.params.beta
    for firm in all_firms:
        quals = [state.persons[p].qualification for p in firm.employee_ids]
        monthly_value = sum(q ** alpha for q in quals) / beta * firm.price
        firm.prev_revenue = to_cents(monthly_value)
        firm.wage_pool = to_cents(monthly_value * (1.0 - state.params.tax_labor))


def _init_income_index(state: SimState) -> None:
    from .housing import refresh_income_index
    refresh_income_index(state)


def _price_stock_and_contracts(state: SimState) -> None:
    from .housing import ask_price
    frac = state.params.rental_price_fraction
    for d in sorted(state.dwellings.values(), key=lambda x: x.id):
        region = state.regions[d.region_id]
        d.ask = to_cents(ask_price(d.size, d.quality, region.qli, region.income_index,
                                   state.params, months_listed=0))
        occupant = d.occupant_household_id
        if occupant is not None and d.owner_household_id != occupant:
            d.rent = to_cents(frac * d.ask / 100.0)
            state.households[occupant].rent_due = d.rent


def _municipality_population(state: SimState, muni: Municipality) -> int:
    region_set = set(muni.region_ids)
    total = 0
    for hh in state.households.values():
        if hh.dwelling_id is not None and state.dwellings[hh.dwelling_id].region_id in region_set:
            total += len(hh.member_ids)
    return total


# -- CSV schema (one file per input table) ----------------------------------

def write_input_tables(specs: list[RegionSpec], tables: InputTables, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def emit(name: str, header: list[str], rows) -> None:
        path = out / name
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)
        written.append(path)

    emit("regions.csv",
         ["region_id", "municipality_id", "x", "y", "population_weight",
          "q_cdf_1", "q_cdf_2", "q_cdf_3", "q_cdf_4", "q_cdf_5",
          "avg_household_size", "firm_count", "license_stock", "license_price",
          "licenses_per_month", "qli0"],
         [[s.region_id, s.municipality_id, s.x, s.y, s.population_weight,
           *s.qualification_cdf, s.avg_household_size, s.firm_count,
           s.license_stock, s.license_price, s.licenses_per_month, s.qli0]
          for s in specs])
    emit("pyramid.csv", ["municipality_id", "gender", "age", "count"],
         [[mid, g, age, float(arr[age])]
          for mid in sorted(tables.pyramids)
          for g in (FEMALE, MALE)
          for age, arr in ((a, tables.pyramids[mid][g]) for a in range(PYRAMID_MAX_AGE + 1))])
    emit("fertility.csv", ["age", "rate"],
         [[age, float(tables.fertility[age])] for age in range(MAX_AGE + 1)])
    emit("mortality.csv", ["gender", "age", "rate"],
         [[g, age, float(tables.mortality[g][age])]
          for g in (FEMALE, MALE) for age in range(MAX_AGE + 1)])
    emit("marriage.csv", ["marriage_rate", "divorce_rate"],
         [[tables.marriage_rate, tables.divorce_rate]])
    emit("car_ownership.csv", ["decile", "probability"],
         [[i, float(tables.car_ownership[i])] for i in range(10)])
    emit("population_estimates.csv", ["municipality_id", "year_index", "population"],
         [[mid, y, v] for mid in sorted(tables.population_estimates)
          for y, v in enumerate(tables.population_estimates[mid])])
    emit("hdi.csv", ["municipality_id", "hdi"],
         [[mid, tables.hdi[mid]] for mid in sorted(tables.hdi)])
    return written


def read_input_tables(in_dir: str | Path) -> tuple[list[RegionSpec], InputTables]:
    src = Path(in_dir)

    def rows(name: str):
        with (src / name).open(newline="") as fh:
            yield from csv.DictReader(fh)

    specs = []
    for r in rows("regions.csv"):
        specs.append(RegionSpec(
            int(r["region_id"]), int(r["municipality_id"]), float(r["x"]), float(r["y"]),
            float(r["population_weight"]),
            [float(r[f"q_cdf_{i}"]) for i in range(1, 6)],
            float(r["avg_household_size"]), int(r["firm_count"]),
            int(r["license_stock"]), float(r["license_price"]),
            int(r["licenses_per_month"]), float(r["qli0"])))

    pyramids: dict[int, dict[str, np.ndarray]] = {}
    for r in rows("pyramid.csv"):
        mid, g = int(r["municipality_id"]), r["gender"]
        pyramids.setdefault(mid, {}).setdefault(g, np.zeros(PYRAMID_MAX_AGE + 1))
        pyramids[mid][g][int(r["age"])] = float(r["count"])
    fertility = np.zeros(MAX_AGE + 1)
    for r in rows("fertility.csv"):
        fertility[int(r["age"])] = float(r["rate"])
    mortality = {FEMALE: np.zeros(MAX_AGE + 1), MALE: np.zeros(MAX_AGE + 1)}
    for r in rows("mortality.csv"):
        mortality[r["gender"]][int(r["age"])] = float(r["rate"])
    marriage = list(rows("marriage.csv"))[0]
    car = np.zeros(10)
    for r in rows("car_ownership.csv"):
        car[int(r["decile"])] = float(r["probability"])
    estimates: dict[int, list[float]] = {}
    for r in rows("population_estimates.csv"):
        estimates.setdefault(int(r["municipality_id"]), []).append(float(r["population"]))
    hdi = {int(r["municipality_id"]): float(r["hdi"]) for r in rows("hdi.csv")}

    tables = InputTables(pyramids, fertility, mortality,
                         float(marriage["marriage_rate"]), float(marriage["divorce_rate"]),
                         car, estimates, hdi)
    return specs, tables
