"""Municipal taxes, quality-of-life investment, and the policy experiments."""

from __future__ import annotations

import numpy as np

from .entities import MARKET_NONE, Household, Municipality, Voucher
from .state import SimState, to_cents

VOUCHER_MONTHS = 24


def collect_property_tax(state: SimState) -> int:
    """Monthly levy on owned dwellings at their current ask value."""
    rate = state.params.tax_property
    if rate <= 0:
        return 0
    collected = 0
    for hh in sorted(state.households.values(), key=lambda h: h.id):
        if not hh.owned_dwelling_ids:
            continue
        due = 0
        by_muni: dict[int, int] = {}
        for did in hh.owned_dwelling_ids:
            d = state.dwellings[did]
            tax = to_cents(d.ask / 100.0 * rate)
            due += tax
            mid = state.regions[d.region_id].municipality_id
            by_muni[mid] = by_muni.get(mid, 0) + tax
        paid = state.gather(hh, due)
        if paid <= 0:
            continue
        # Partial payment is spread in municipality order.
        remaining = paid
        for mid in sorted(by_muni):
            take = min(remaining, by_muni[mid])
            muni = state.municipalities[mid]
            muni.treasury += take
            muni.taxes_month["property"] += take
            remaining -= take
        collected += paid
    return collected


def qli_increment(taxes: float, psi: float, pop_prev: int, pop_now: int) -> float:
    """Investment rule: taxes * psi weighted by the population ratio."""
    if pop_now <= 0:
        return 0.0
    return taxes * psi * (pop_prev / pop_now)


def update_qli(state: SimState, muni: Municipality, invested_cents: int,
               pop_now: int) -> float:
    """Apply the investment increment to every region of the municipality."""
    inc = qli_increment(invested_cents / 100.0, state.params.psi, muni.pop_prev, pop_now)
    for rid in muni.region_ids:
        state.regions[rid].qli += inc
    return inc


def prior_year_pi(hh: Household) -> float:
    """Mean permanent income over the last recorded year (running history
    early in a run)."""
    window = hh.pi_history[-12:]
    if not window:
        return 0.0
    return sum(window) / len(window)


def build_register(state: SimState, muni: Municipality, theta: float) -> list[int]:
    """Resident households below the metro-wide theta quantile of prior-year
    PI, poorest first."""
    all_pi = [prior_year_pi(h) for h in state.households.values()]
    if not all_pi:
        muni.register = []
        return []
    region_set = set(muni.region_ids)
    residents = [h for h in state.households.values()
                 if h.dwelling_id is not None
                 and state.dwellings[h.dwelling_id].region_id in region_set]
    if theta >= 1.0:
        eligible = residents
    else:
        threshold = float(np.quantile(np.array(all_pi), theta))
        eligible = [h for h in residents if prior_year_pi(h) < threshold]
    eligible.sort(key=lambda h: (prior_year_pi(h), h.id))
    muni.register = [h.id for h in eligible]
    return muni.register


def committed_voucher_cents(muni: Municipality) -> int:
    return sum(v.monthly_value * v.months_left for v in muni.vouchers)


def apply_policy(state: SimState, muni: Municipality, kind: str, budget: int) -> dict:
    """Run one municipality's monthly policy round.

    The budget has already been moved into the municipal policy fund;
    acquisition and voucher rounds leave unspendable remainders there.
    """
    events = {"aid_payments": 0, "vouchers_issued": 0, "houses_transferred": 0}
    if kind == "baseline" or budget < 0:
        return events
    available = muni.policy_fund - committed_voucher_cents(muni)
    if kind == "aid":
        recipients = [state.households[h] for h in muni.register if h in state.households]
        if recipients and available > 0:
            share = available // len(recipients)
            if share > 0:
                for hh in recipients:
                    muni.policy_fund -= share
                    hh.reserve += share
                    events["aid_payments"] += 1
    elif kind == "voucher":
        for hid in muni.register:
            hh = state.households.get(hid)
            if hh is None or hh.owned_dwelling_ids or hh.voucher is not None:
                continue
            if not hh.is_renting() or hh.rent_due <= 0:
                continue
            cost = hh.rent_due * VOUCHER_MONTHS
            if cost > available:
                continue
            voucher = Voucher(hh.id, muni.id, hh.rent_due, VOUCHER_MONTHS)
            hh.voucher = voucher
            muni.vouchers.append(voucher)
            available -= cost
            events["vouchers_issued"] += 1
    elif kind == "acquisition":
        region_set = set(muni.region_ids)
        stock = [d for d in sorted(state.dwellings.values(), key=lambda x: x.id)
                 if d.owner_firm_id is not None and d.region_id in region_set]
        stock.sort(key=lambda d: (d.ask, d.id))
        recipients = [h for h in muni.register
                      if h in state.households
                      and not state.households[h].owned_dwelling_ids]
        for dwelling in stock:
            if not recipients:
                break
            if dwelling.ask > available:
                break      # cheapest-first: nothing later fits either
            hh = state.households[recipients.pop(0)]
            firm = state.firms[dwelling.owner_firm_id]
            muni.policy_fund -= dwelling.ask
            available -= dwelling.ask
            firm.cash += dwelling.ask
            firm.revenue += dwelling.ask
            firm.revenue_month += dwelling.ask
            dwelling.owner_firm_id = None
            dwelling.owner_household_id = hh.id
            dwelling.market = MARKET_NONE
            dwelling.months_listed = 0
            hh.owned_dwelling_ids.append(dwelling.id)
            events["houses_transferred"] += 1
    return events


def invest_in_qli(state: SimState, muni: Municipality, invest: int) -> None:
    """Spend the investment budget as public procurement at local firms.

    The QLI index rises by the investment rule; the money itself buys works
    and services from firms seated in the municipality (keeping the flow
    inside the economy), split equally across them.
    """
    if invest <= 0:
        return
    region_set = set(muni.region_ids)
    local = [f for f in sorted(state.firms.values(), key=lambda x: x.id)
             if f.region_id in region_set]
    if not local:
        local = sorted(state.firms.values(), key=lambda x: x.id)
    if not local:
        return
    share = invest // len(local)
    spent = 0
    for firm in local:
        firm.cash += share
        firm.revenue += share
        firm.revenue_month += share
        spent += share
    muni.treasury -= spent      # the sub-cent remainder stays in the treasury


def run_municipal_phase(state: SimState) -> None:
    """Property tax, policy budget split, policy round, QLI investment."""
    collect_property_tax(state)
    scenario = state.config.scenario
    delta = state.params.delta if scenario != "baseline" else 0.0
    for muni in state.municipalities:
        taxes = muni.taxes_total()
        budget = int(round(taxes * delta))
        invest = taxes - budget
        if budget > 0:
            muni.treasury -= budget
            muni.policy_fund += budget
        if scenario != "baseline":
            build_register(state, muni, state.params.theta)
            apply_policy(state, muni, scenario, budget)
        pop_now = _population(state, muni)
        federal = to_cents(state.config.city.federal_transfer_per_capita * pop_now)
        state.external -= federal
        muni.treasury += federal
        update_qli(state, muni, invest, pop_now)
        invest_in_qli(state, muni, invest + federal)
        muni.pop_prev = pop_now
        for key in muni.taxes_month:
            muni.taxes_month[key] = 0


def _population(state: SimState, muni: Municipality) -> int:
    region_set = set(muni.region_ids)
    total = 0
    for hh in state.households.values():
        if hh.dwelling_id is not None and state.dwellings[hh.dwelling_id].region_id in region_set:
            total += len(hh.member_ids)
    return total
