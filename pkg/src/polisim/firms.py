"""Firm production, sticky pricing, wage payment, and monthly book closing."""

from __future__ import annotations

from .entities import CONSUMER, Firm
from .state import SimState, to_cents


def production_quantity(qualifications: list[int], alpha: float, beta: float) -> float:
    """Monthly output of a workforce: sum of q^alpha / beta over workers."""
    return sum(q ** alpha for q in qualifications) / beta


def produce(state: SimState, firm: Firm) -> float:
    """Run one production round; consumer firms stock inventory, construction
    output pays down active project cost in the construction phase."""
    quals = [state.persons[pid].qualification for pid in firm.employee_ids]
    quantity = production_quantity(quals, state.params.alpha, state.params.beta)
    firm.qty_produced += quantity
    if firm.kind == CONSUMER:
        firm.inventory += quantity
    return quantity


def maybe_update_price(firm: Firm, zeta: float, markup: float, rng,
                       symmetric_down: bool = False) -> float:
    """Sticky pricing: with probability zeta the firm skips the review.

    Otherwise the price moves up by the markup when everything produced was
    sold; a downward move only exists behind the symmetric toggle.
    """
    if rng.random() < zeta:
        return firm.price
    if firm.qty_sold >= firm.qty_produced and firm.qty_sold > 0:
        firm.price *= (1.0 + markup)
    elif symmetric_down and firm.qty_sold < firm.qty_produced:
        firm.price /= (1.0 + markup)
    return firm.price


def wage_shares(qualifications: list[int], alpha: float) -> list[float]:
    powered = [q ** alpha for q in qualifications]
    total = sum(powered)
    if total == 0:
        return [0.0 for _ in powered]
    return [p / total for p in powered]


def wage_payments(total_revenue: float, unemployment: float,
                  qualifications: list[int], alpha: float,
                  tax_labor: float) -> list[float]:
    """Net wage per worker: TR * (1 - U) * q^a / sum(q^a) * (1 - tax)."""
    return [total_revenue * (1.0 - unemployment) * s * (1.0 - tax_labor)
            for s in wage_shares(qualifications, alpha)]


def pay_wages(state: SimState, firm: Firm, unemployment: float) -> tuple[int, int]:
    """Distribute last month's revenue as wages.

    Workers receive the net wage, the labor tax goes to the firm's
    municipality. When cash cannot cover the gross bill, every payment is
    scaled down by available/bill (shares are preserved). Returns
    (net_total, gross_total) in cents.
    """
    params = state.params
    if not firm.employee_ids:
        firm.wage_pool = 0
        return 0, 0
    u = unemployment if params.use_unemployment_in_wages else 0.0
    basis = firm.prev_revenue / 100.0
    quals = [state.persons[pid].qualification for pid in firm.employee_ids]
    gross = [basis * (1.0 - u) * s for s in wage_shares(quals, params.alpha)]
    bill = to_cents(sum(gross))
    scale = 1.0
    if bill > firm.cash and bill > 0:
        scale = firm.cash / bill

    municipality = state.municipalities[state.regions[firm.region_id].municipality_id]
    net_total = 0
    gross_total = 0
    for pid, g in zip(firm.employee_ids, gross):
        gross_cents = min(to_cents(g * scale), firm.cash)
        tax_cents = to_cents(gross_cents / 100.0 * params.tax_labor)
        net_cents = gross_cents - tax_cents
        firm.cash -= gross_cents
        person = state.persons[pid]
        person.cash += net_cents
        person.wage = net_cents
        municipality.treasury += tax_cents
        municipality.taxes_month["labor"] += tax_cents
        state.households[person.household_id].record_income(net_cents)
        net_total += net_cents
        gross_total += gross_cents
    firm.wage_pool = net_total
    return net_total, gross_total


def close_books(state: SimState, firm: Firm, wage_bill_gross: int) -> int:
    """Profit for the month: revenue minus wages minus the firm tax.

    The tax is levied on positive pre-tax profit and remitted to the firm's
    municipality. Negative profit stands (it drives next round's firing).
    """
    pre_tax = firm.revenue - wage_bill_gross
    tax = 0
    if pre_tax > 0:
        tax = min(to_cents(pre_tax / 100.0 * state.params.tax_firm), firm.cash)
        firm.cash -= tax
        municipality = state.municipalities[state.regions[firm.region_id].municipality_id]
        municipality.treasury += tax
        municipality.taxes_month["firm"] += tax
    firm.profit = firm.revenue - wage_bill_gross - tax
    return firm.profit


def enter_new_firms(state: SimState, count: int) -> list[Firm]:
    """Exogenous entry: consumer firms placed by regional population weight,
    endowed against the external sector."""
    if count <= 0:
        return []
    rng = state.rng.firms
    weights = _region_population_weights(state)
    created = []
    endowment = to_cents(state.config.city.new_firm_endowment)
    price = _mean_consumer_price(state)
    for _ in range(count):
        region_id = _pick_weighted(weights, rng.random())
        firm = Firm(state.new_firm_id(), region_id, CONSUMER, price=price)
        firm.cash = endowment
        state.external -= endowment
        state.firms[firm.id] = firm
        created.append(firm)
    return created


def _region_population_weights(state: SimState) -> list[float]:
    counts = [0] * len(state.regions)
    for hh in state.households.values():
        if hh.dwelling_id is not None:
            counts[state.dwellings[hh.dwelling_id].region_id] += len(hh.member_ids)
    total = sum(counts)
    if total == 0:
        return [1.0 / len(state.regions)] * len(state.regions)
    return [c / total for c in counts]


def _pick_weighted(weights: list[float], u: float) -> int:
    acc = 0.0
    for i, w in enumerate(weights):
        acc += w
        if u <= acc:
            return i
    return len(weights) - 1


def _mean_consumer_price(state: SimState) -> float:
    prices = [f.price for f in state.firms.values() if f.kind == CONSUMER]
    if not prices:
        return 1.0
    return sum(prices) / len(prices)
