"""Goods and services market: permanent income, firm choice, consumption."""

from __future__ import annotations

from .entities import CONSUMER, Firm, Household
from .state import SimState, to_cents


def permanent_income(mean_income: float, wealth: float, rate: float) -> float:
    """PI = i*Y + i*Y/r + w*r with i = r/(1+r); algebraically Y + w*r."""
    if rate <= 0:
        raise ValueError(f"baseline rate must be > 0, got {rate}")
    i = rate / (1.0 + rate)
    return i * mean_income + i * mean_income / rate + wealth * rate


def household_wealth(state: SimState, hh: Household) -> float:
    """Property values plus reserve and savings, net of mortgage debt, in currency."""
    w = (hh.reserve + hh.savings) / 100.0
    for did in hh.owned_dwelling_ids:
        w += state.dwellings[did].ask / 100.0
    if hh.mortgage_id is not None:
        loan = state.bank.loans[hh.mortgage_id]
        w -= (loan.outstanding + loan.arrears) / 100.0
    return w


def household_pi(state: SimState, hh: Household, rate: float) -> float:
    return permanent_income(hh.mean_income(), household_wealth(state, hh), rate)


def choose_firm(state: SimState, hh: Household, firm_ids: list[int]) -> Firm | None:
    """Sample varsigma firms; pick the nearest or the cheapest, 50/50."""
    if not firm_ids:
        return None
    rng = state.rng.goods
    k = min(state.params.varsigma, len(firm_ids))
    sample = rng.choice(len(firm_ids), size=k, replace=False)
    firms = [state.firms[firm_ids[int(i)]] for i in sample]
    home = state.household_region(hh)
    if rng.random() < 0.5:
        return min(firms, key=lambda f: (state.distance(home, f.region_id), f.id))
    return min(firms, key=lambda f: (f.price, f.id))


def consume(state: SimState, hh: Household, firm: Firm, budget_cents: int) -> int:
    """Spend up to the budget at the chosen firm, limited by its inventory.

    The firm keeps the sale net of the consumption tax, which is remitted to
    the firm's municipality. Returns cents actually spent.
    """
    params = state.params
    if budget_cents <= 0 or firm.inventory <= 0 or firm.price <= 0:
        return 0
    affordable_qty = budget_cents / 100.0 / firm.price
    quantity = min(affordable_qty, firm.inventory)
    spend = min(budget_cents, to_cents(quantity * firm.price))
    if spend <= 0:
        return 0
    gathered = state.gather(hh, spend)
    tax = to_cents(gathered / 100.0 * params.tax_consumption)
    firm.cash += gathered - tax
    firm.revenue += gathered - tax
    firm.revenue_month += gathered - tax
    firm.inventory -= quantity
    firm.qty_sold += quantity
    municipality = state.municipalities[state.regions[firm.region_id].municipality_id]
    municipality.treasury += tax
    municipality.taxes_month["consumption"] += tax
    return gathered


def run_consumption(state: SimState) -> None:
    """Monthly household consumption against last month's resources."""
    rate = state.series.baseline_rate[state.month_index]
    firm_ids = [f.id for f in state.firms.values() if f.kind == CONSUMER]
    firm_ids.sort()
    for hh in sorted(state.households.values(), key=lambda h: h.id):
        pi = household_pi(state, hh, rate)
        hh.pi_history.append(pi)
        liquid = state.household_liquid(hh)
        hh.null_consumption = liquid == 0
        if hh.null_consumption:
            continue
        budget = min(to_cents(max(0.0, pi)), liquid)
        if budget <= 0:
            continue
        firm = choose_firm(state, hh, firm_ids)
        if firm is None:
            continue
        consume(state, hh, firm, budget)
