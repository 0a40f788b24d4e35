"""Monthly event sequence and the single-run driver."""

from __future__ import annotations

from . import demographics, finance, firms, goods, govern, housing, labor, stats
from .params import RunConfig, build_series
from .rng import RngStreams
from .state import HorizonError, IntegrityError, SimState, to_cents
from .synthpop import generate_synthetic_inputs, instantiate_city


def phase_exogenous(state: SimState) -> None:
    for region in state.regions:
        region.license_stock += region.licenses_per_month
    firms.enter_new_firms(state, state.series.firm_entry[state.month_index])


def phase_production(state: SimState) -> None:
    for firm in sorted(state.firms.values(), key=lambda f: f.id):
        firms.produce(state, firm)


def phase_demographics(state: SimState) -> None:
    demographics.run_birthdays(state)


def phase_household_change(state: SimState) -> None:
    demographics.run_household_change(state)


def phase_consumption(state: SimState) -> None:
    goods.run_consumption(state)


def phase_loan_collection(state: SimState) -> None:
    finance.service_loans(state)


def phase_firm_payments(state: SimState) -> None:
    u = stats.unemployment(state) or 0.0
    for firm in sorted(state.firms.values(), key=lambda f: f.id):
        _net, gross = firms.pay_wages(state, firm, u)
        firms.close_books(state, firm, gross)
        firms.maybe_update_price(firm, state.params.zeta, state.params.markup_pi,
                                 state.rng.firms, state.params.symmetric_price_down)
        firm.prev_revenue = firm.revenue
        firm.revenue = 0
    for hh in state.households.values():
        hh.income_months += 1


def phase_construction(state: SimState) -> None:
    housing.progress_projects(state)
    housing.plan_construction(state)


def phase_labor_market(state: SimState) -> None:
    labor.run_labor_market(state)


def phase_markets(state: SimState) -> None:
    housing.refresh_income_index(state)
    housing.reprice_and_list(state)
    housing.collect_rents(state)
    housing.run_rental_market(state)
    housing.run_sales_market(state)


def phase_moving(state: SimState) -> None:
    housing.run_moving(state)


def phase_investment(state: SimState) -> None:
    """Sweep cash into the reserve up to its target; the excess becomes savings."""
    multiple = state.params.reserve_multiple
    for hh in sorted(state.households.values(), key=lambda h: h.id):
        for pid in hh.member_ids:
            person = state.persons[pid]
            hh.reserve += person.cash
            person.cash = 0
        pi = hh.pi_history[-1] if hh.pi_history else 0.0
        target = to_cents(max(0.0, multiple * pi))
        if hh.reserve > target:
            state.credit_savings(hh, hh.reserve - target)
            hh.reserve = target
    finance.pay_deposit_interest(state)


def phase_municipal(state: SimState) -> None:
    govern.run_municipal_phase(state)


def phase_stats(state: SimState) -> None:
    state.frames.append(stats.compute_frame(state))
    state.month_transactions = []
    for firm in state.firms.values():
        firm.revenue_month = 0
        firm.qty_produced = 0.0
        firm.qty_sold = 0.0


PHASES = [
    ("exogenous", phase_exogenous),
    ("production", phase_production),
    ("demographics", phase_demographics),
    ("household_change", phase_household_change),
    ("consumption", phase_consumption),
    ("loan_collection", phase_loan_collection),
    ("firm_payments", phase_firm_payments),
    ("construction", phase_construction),
    ("labor_market", phase_labor_market),
    ("markets", phase_markets),
    ("moving", phase_moving),
    ("investment", phase_investment),
    ("municipal", phase_municipal),
    ("stats", phase_stats),
]


def step_month(state: SimState) -> SimState:
    """Advance the simulation one month through the full event sequence.

    Money conservation is asserted after every phase; the grand total over
    all accounts including the external sector must not move by a cent.
    """
    if state.series is None:
        raise HorizonError("no exogenous series attached to this state")
    t = state.month_index
    if t >= len(state.series.baseline_rate):
        raise HorizonError(
            f"exogenous series exhausted: month {t} beyond horizon "
            f"{len(state.series.baseline_rate)}")
    total = state.total_money()
    for name, phase in PHASES:
        phase(state)
        now = state.total_money()
        if now != total:
            raise IntegrityError(
                f"money conservation violated in phase {name!r} of month {t}: "
                f"drift {now - total} cents")
    state.month_index += 1
    return state


def build_state(config: RunConfig) -> SimState:
    """Generate inputs, instantiate the city, and attach exogenous series."""
    config.validate()
    rng = RngStreams(config.seed)
    specs, tables = generate_synthetic_inputs(
        config.seed, config.city.n_regions, config.city.n_municipalities,
        config.city.scale)
    state = instantiate_city(specs, tables, config, rng)
    initial_pop = {m.id: m.pop_prev for m in state.municipalities}
    state.series = build_series(config, [m.id for m in state.municipalities],
                                initial_pop, initial_firms=len(state.firms))
    return state


def run_simulation(config: RunConfig) -> SimState:
    """Run the configured horizon and return the final state (frames included)."""
    state = build_state(config)
    for _ in range(config.horizon_months):
        step_month(state)
    return state
