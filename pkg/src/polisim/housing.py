"""Real-estate machinery: hedonic asking prices, rental and sales markets,
construction planning, and household moving decisions."""

from __future__ import annotations

import math

from .entities import (CONSTRUCTION, MARKET_NONE, MARKET_RENTAL, MARKET_SALE,
                       ConstructionProject, Dwelling, Household)
from .finance import estimate_loan_cap, evaluate_mortgage, originate_loan
from .goods import household_pi
from .state import SimState, to_cents


def ask_price(size: float, quality: float, qli: float, income_index: float,
              params, months_listed: int) -> float:
    """Hedonic ask: H_s*H_q * QLI * (1 + tau*N_q) * time-on-market decay.

    The decay factor runs from 1 at listing down to the gamma floor.
    """
    time_factor = (1.0 - params.gamma) * math.exp(params.kappa * months_listed) + params.gamma
    return size * quality * qli * (1.0 + params.tau * income_index) * time_factor


def dwelling_rank(state: SimState, dwelling: Dwelling) -> float:
    """Comfort rank used by moving and rental upgrade decisions."""
    return dwelling.base_quality() * state.regions[dwelling.region_id].qli


def supply_acceptance_probability(state: SimState) -> float:
    """Seller-side acceptance chance for discounted offers: listed / households."""
    listed = sum(1 for d in state.dwellings.values() if d.market != MARKET_NONE)
    households = len(state.households)
    if households == 0:
        return 0.0
    return min(1.0, listed / households)


def refresh_income_index(state: SimState) -> None:
    """N_q per region: mean resident household income divided by the metro max."""
    sums = [0.0] * len(state.regions)
    counts = [0] * len(state.regions)
    for hh in state.households.values():
        if hh.dwelling_id is None:
            continue
        rid = state.dwellings[hh.dwelling_id].region_id
        sums[rid] += hh.mean_income()
        counts[rid] += 1
    means = [s / c if c else 0.0 for s, c in zip(sums, counts)]
    top = max(means) if means else 0.0
    for region, mean in zip(state.regions, means):
        region.income_index = mean / top if top > 0 else 1.0


def reprice_and_list(state: SimState) -> None:
    """Update every ask, age existing listings, and list newly vacant stock.

    New vacancies are split rental/sale by the rental_share parameter
    (floor of the share goes to rental).
    """
    params = state.params
    newly_vacant: list[Dwelling] = []
    for d in sorted(state.dwellings.values(), key=lambda x: x.id):
        if d.occupant_household_id is None:
            if d.market == MARKET_NONE:
                newly_vacant.append(d)
            else:
                d.months_listed += 1
        region = state.regions[d.region_id]
        d.ask = to_cents(ask_price(d.size, d.quality, region.qli, region.income_index,
                                   params, d.months_listed))
    if newly_vacant:
        rng = state.rng.housing
        order = rng.permutation(len(newly_vacant))
        shuffled = [newly_vacant[i] for i in order]
        n_rental = int(len(shuffled) * params.rental_share)
        for i, d in enumerate(shuffled):
            d.market = MARKET_RENTAL if i < n_rental else MARKET_SALE
            d.months_listed = 0


def collect_rents(state: SimState) -> None:
    """Monthly rent from tenants to landlords; vouchers pay from the policy fund.

    A tenant short of funds pays what it can and is flagged as defaulting;
    the landlord bears the loss.
    """
    for hh in sorted(state.households.values(), key=lambda h: h.id):
        hh.rent_defaulted = False
        if not hh.is_renting() or hh.rent_due <= 0:
            continue
        dwelling = state.dwellings[hh.dwelling_id]
        landlord = state.households.get(dwelling.owner_household_id)
        if landlord is None:
            continue
        rent = hh.rent_due
        voucher = hh.voucher
        if voucher is not None and voucher.months_left > 0:
            muni = state.municipalities[voucher.municipality_id]
            paid = min(rent, muni.policy_fund)
            muni.policy_fund -= paid
            landlord.reserve += paid
            voucher.months_left -= 1
            if voucher.months_left == 0:
                _drop_voucher(state, hh)
            continue
        paid = state.gather(hh, rent)
        landlord.reserve += paid
        if paid < rent:
            hh.rent_defaulted = True


def _drop_voucher(state: SimState, hh: Household) -> None:
    if hh.voucher is None:
        return
    muni = state.municipalities[hh.voucher.municipality_id]
    if hh.voucher in muni.vouchers:
        muni.vouchers.remove(hh.voucher)
    hh.voucher = None


def return_voucher(state: SimState, hh: Household) -> None:
    """Unused voucher months go back to the municipality when the tenant moves."""
    if hh.voucher is not None:
        hh.voucher.months_left = 0
        _drop_voucher(state, hh)


def move_household(state: SimState, hh: Household, target: Dwelling,
                   rent_cents: int | None = None) -> None:
    """Relocate a household, ending any rental contract it leaves behind."""
    if hh.dwelling_id is not None and hh.dwelling_id != target.id:
        old = state.dwellings[hh.dwelling_id]
        old.occupant_household_id = None
        if hh.is_renting():
            old.rent = 0
            return_voucher(state, hh)
        hh.rent_due = 0
    target.occupant_household_id = hh.id
    target.market = MARKET_NONE
    target.months_listed = 0
    hh.dwelling_id = target.id
    if rent_cents is not None:
        target.rent = rent_cents
        hh.rent_due = rent_cents
    else:
        target.rent = 0
        hh.rent_due = 0


def rental_listings(state: SimState) -> list[Dwelling]:
    return [d for d in sorted(state.dwellings.values(), key=lambda x: x.id)
            if d.market == MARKET_RENTAL]


def try_rent(state: SimState, hh: Household, listings: list[Dwelling],
             pi: float) -> Dwelling | None:
    """One household's rental search over a sigma-sized sample.

    Takes the best affordable listing (rent <= PI); with nothing affordable it
    proposes its PI as a discounted rent on the cheapest sampled listing,
    accepted with the supply-share probability. Declines a dwelling worse
    than the current one.
    """
    candidates = [d for d in listings if d.occupant_household_id is None
                  and d.owner_household_id != hh.id]
    if not candidates:
        return None
    rng = state.rng.housing
    k = min(state.params.sigma, len(candidates))
    sample_idx = rng.choice(len(candidates), size=k, replace=False)
    sample = [candidates[int(i)] for i in sample_idx]
    budget = to_cents(max(0.0, pi))
    frac = state.params.rental_price_fraction

    def rent_of(d: Dwelling) -> int:
        return to_cents(frac * d.ask / 100.0)

    affordable = [d for d in sample if rent_of(d) <= budget]
    chosen: Dwelling | None = None
    rent = 0
    if affordable:
        chosen = max(affordable, key=lambda d: (d.ask, d.id))
        rent = rent_of(chosen)
    else:
        cheapest = min(sample, key=lambda d: (rent_of(d), d.id))
        if budget > 0 and rng.random() < supply_acceptance_probability(state):
            chosen = cheapest
            rent = budget          # discounted proposal: tenant's full capacity
    if chosen is None:
        return None
    if hh.dwelling_id is not None:
        current = state.dwellings[hh.dwelling_id]
        if dwelling_rank(state, chosen) <= dwelling_rank(state, current):
            return None
    move_household(state, hh, chosen, rent_cents=rent)
    return chosen


def run_rental_market(state: SimState) -> int:
    """Homeless households plus a phi-share of renters search, richest first."""
    rate = state.series.baseline_rate[state.month_index]
    rng = state.rng.housing
    participants: list[tuple[float, Household]] = []
    for hh in sorted(state.households.values(), key=lambda h: h.id):
        if hh.dwelling_id is None:
            participants.append((household_pi(state, hh, rate), hh))
        elif hh.is_renting() and rng.random() < state.params.phi:
            participants.append((household_pi(state, hh, rate), hh))
    participants.sort(key=lambda pair: (-pair[0], pair[1].id))
    listings = rental_listings(state)
    moves = 0
    for pi, hh in participants:
        if try_rent(state, hh, listings, pi) is not None:
            moves += 1
    return moves


def negotiate_sale_price(ask: float, savings: float, loan_granted: float,
                         params) -> tuple[float, bool]:
    """Price negotiation for one buyer/house pair.

    Returns (price, affordable). The price is the simple average of ask and
    offer, replaced by the rho_plus cap rule when the ask overshoots the
    offer by more than rho_plus.
    """
    offer = savings + loan_granted
    if offer <= 0:
        return 0.0, False
    if ask / offer > params.rho_plus:
        price = offer * params.rho_plus / 2.0
    else:
        price = (ask + offer) / 2.0
    return price, price <= offer


def run_sales_market(state: SimState, extra_buyer_ids: list[int] | None = None) -> int:
    """Sales market: buyers sorted by purchasing power walk their sampled
    listings through the negotiation branches."""
    params = state.params
    rate = state.series.baseline_rate[state.month_index]
    rng = state.rng.housing

    buyers: list[Household] = []
    extra = set(extra_buyer_ids or ())
    for hh in sorted(state.households.values(), key=lambda h: h.id):
        if hh.id in extra or rng.random() < params.phi:
            buyers.append(hh)
    if not buyers:
        return 0

    powers = []
    for hh in buyers:
        pi = household_pi(state, hh, rate)
        cap = estimate_loan_cap(state, hh, pi)
        powers.append((hh.savings + cap, pi, hh))
    powers.sort(key=lambda triple: (-triple[0], triple[2].id))

    sales = 0
    for _power, pi, hh in powers:
        listings = [d for d in sorted(state.dwellings.values(), key=lambda x: x.id)
                    if d.market == MARKET_SALE and d.owner_household_id != hh.id]
        if not listings:
            break
        k = min(params.sigma, len(listings))
        sample_idx = rng.choice(len(listings), size=k, replace=False)
        sample = [listings[int(i)] for i in sample_idx]
        sample.sort(key=lambda d: (-d.ask, d.id))
        if _attempt_purchase(state, hh, pi, sample):
            sales += 1
    return sales


def _attempt_purchase(state: SimState, hh: Household, pi: float,
                      ranked: list[Dwelling]) -> bool:
    """Walk the buyer's ranked sample; returns True on a completed purchase."""
    params = state.params
    rng = state.rng.housing
    savings = hh.savings / 100.0
    for dwelling in ranked:
        ask = dwelling.ask / 100.0
        if savings >= ask:
            price, _ = negotiate_sale_price(ask, savings, 0.0, params)
            _settle_sale(state, hh, dwelling, price, loan_cents=0)
            return True
        if hh.mortgage_id is None and state.bank.cash > 0:
            gap = ask - savings
            granted_cents = evaluate_mortgage(state, hh, to_cents(gap), pi)
            if granted_cents > 0:
                price, affordable = negotiate_sale_price(ask, savings,
                                                         granted_cents / 100.0, params)
                if affordable:
                    loan_needed = max(0.0, price - savings)
                    if loan_needed <= params.ltv * price + 1e-12:
                        loan_cents = min(granted_cents,
                                         max(0, to_cents(price) - hh.savings))
                        _settle_sale(state, hh, dwelling, price, loan_cents=loan_cents, pi=pi)
                        return True
                    continue   # LTV unsatisfiable at this price: next house
                if _discount_purchase(state, hh, dwelling, savings, ask, rng):
                    return True
                continue       # loan too small for this house: next house
            # Declined by the bank: one discounted attempt, then leave the market.
            if _discount_purchase(state, hh, dwelling, savings, ask, rng):
                return True
            return False
        if _discount_purchase(state, hh, dwelling, savings, ask, rng):
            return True
    return False


def _discount_purchase(state: SimState, hh: Household, dwelling: Dwelling,
                       savings: float, ask: float, rng) -> bool:
    """Cash offer at full savings when savings/ask clears the rho_minus floor;
    the seller accepts with the listed-supply probability."""
    params = state.params
    if ask <= 0 or savings <= 0 or savings / ask <= params.rho_minus:
        return False
    if rng.random() >= supply_acceptance_probability(state):
        return False
    _settle_sale(state, hh, dwelling, price=savings, loan_cents=0)
    return True


def _settle_sale(state: SimState, buyer: Household, dwelling: Dwelling,
                 price: float, loan_cents: int, pi: float = 0.0) -> None:
    """Move money and title for one transaction; remits the transaction tax."""
    price_cents = to_cents(price)
    loan = None
    if loan_cents > 0:
        loan = originate_loan(state, buyer, loan_cents, pi)
        loan_cents = loan.principal
        state.monitors["mortgage_sales"].append((state.month_index, loan_cents, price_cents))
    savings_part = min(buyer.savings, price_cents - loan_cents)
    state.debit_savings(buyer, savings_part)
    shortfall = price_cents - loan_cents - savings_part
    if shortfall > 0:
        # Cent-level rounding slack comes out of the buyer's reserve.
        take = state.gather(buyer, shortfall)
        shortfall -= take
        price_cents -= shortfall
    tax = to_cents(price_cents / 100.0 * state.params.tax_transaction)
    municipality = state.municipalities[state.regions[dwelling.region_id].municipality_id]
    municipality.treasury += tax
    municipality.taxes_month["transaction"] += tax

    seller_take = price_cents - tax
    if dwelling.owner_household_id is not None:
        seller = state.households[dwelling.owner_household_id]
        seller.owned_dwelling_ids.remove(dwelling.id)
        state.credit_savings(seller, seller_take)
    elif dwelling.owner_firm_id is not None:
        firm = state.firms[dwelling.owner_firm_id]
        firm.cash += seller_take
        firm.revenue += seller_take
        firm.revenue_month += seller_take
        dwelling.owner_firm_id = None
    dwelling.owner_household_id = buyer.id
    buyer.owned_dwelling_ids.append(dwelling.id)
    dwelling.market = MARKET_NONE
    dwelling.months_listed = 0
    state.month_transactions.append(price_cents)


# -- construction ------------------------------------------------------------

def vacancy_share_now(state: SimState) -> float:
    total = len(state.dwellings)
    if total == 0:
        return 0.0
    vacant = sum(1 for d in state.dwellings.values() if d.occupant_household_id is None)
    return vacant / total


def construction_profitability(mean_comparable_ask: float, size: float, quality: float,
                               productivity_factor: float, license_price: float,
                               upsilon: float) -> float:
    """Region profitability: mean comparable ask minus the full build cost."""
    cost = size * quality * productivity_factor * license_price * (1.0 + upsilon)
    return mean_comparable_ask - cost


def progress_projects(state: SimState) -> list[Dwelling]:
    """Pay down project cost with this month's production; list finished stock."""
    finished: list[Dwelling] = []
    by_firm: dict[int, float] = {}
    for firm in state.firms.values():
        if firm.kind == CONSTRUCTION:
            by_firm[firm.id] = firm.qty_produced
    remaining: list[ConstructionProject] = []
    for project in state.projects:
        budget = by_firm.get(project.firm_id, 0.0)
        applied = min(budget, project.cost_remaining)
        project.cost_remaining -= applied
        by_firm[project.firm_id] = budget - applied
        if project.cost_remaining <= 1e-9:
            d = Dwelling(state.new_dwelling_id(), project.region_id,
                         project.size, project.quality)
            d.owner_firm_id = project.firm_id
            d.market = MARKET_SALE
            region = state.regions[d.region_id]
            d.ask = to_cents(ask_price(d.size, d.quality, region.qli,
                                       region.income_index, state.params, 0))
            state.dwellings[d.id] = d
            finished.append(d)
        else:
            remaining.append(project)
    state.projects = remaining
    return finished


def plan_construction(state: SimState) -> list[ConstructionProject]:
    """Each construction firm may start one project in its most profitable region."""
    params = state.params
    rng = state.rng.housing
    vacancy = vacancy_share_now(state)
    started: list[ConstructionProject] = []

    sale_stock = [d for d in state.dwellings.values() if d.market == MARKET_SALE]

    for firm in sorted(state.firms.values(), key=lambda f: f.id):
        if firm.kind != CONSTRUCTION:
            continue
        outstanding = sum(p.cost_remaining for p in state.projects if p.firm_id == firm.id)
        if outstanding >= params.n_months * firm.qty_produced:
            continue
        affordable = [r for r in state.regions
                      if r.license_stock > 0 and r.license_price <= firm.cash]
        if not affordable:
            continue
        if rng.random() < vacancy:
            continue
        size = float(round(20.0 + 100.0 * rng.random(), 2))
        quality = int(rng.integers(1, 5))
        factor = 1.0 + params.markup_pi * rng.random()

        best_region = None
        best_profit = 0.0
        for region in affordable:
            comparables = [d.ask / 100.0 for d in sale_stock
                           if d.region_id == region.id
                           and abs(d.size - size) <= 10.0
                           and abs(d.quality - quality) <= 1]
            if not comparables:
                continue   # no price signal in this region
            profit = construction_profitability(
                sum(comparables) / len(comparables), size, quality, factor,
                region.license_price / 100.0, params.upsilon)
            if profit > best_profit:
                best_profit = profit
                best_region = region
        if best_region is None:
            continue

        best_region.license_stock -= 1
        firm.cash -= best_region.license_price
        municipality = state.municipalities[best_region.municipality_id]
        municipality.treasury += best_region.license_price
        cost = size * quality * factor * (best_region.license_price / 100.0) * (1.0 + params.upsilon)
        project = ConstructionProject(firm.id, best_region.id, size, quality,
                                      cost, best_region.license_price)
        state.projects.append(project)
        started.append(project)
    return started


# -- moving ------------------------------------------------------------------

def decide_move(state: SimState, hh: Household) -> bool:
    """Employed households occupy their best owned dwelling; fully unemployed
    ones fall back to the worst and list the best for sale (multi-owners).

    Only dwellings not occupied by another household are considered.
    """
    if not hh.owned_dwelling_ids:
        return False
    available = [state.dwellings[d] for d in hh.owned_dwelling_ids
                 if state.dwellings[d].occupant_household_id in (None, hh.id)]
    if not available:
        return False
    employed = any(state.persons[p].employer_id is not None for p in hh.member_ids)
    available.sort(key=lambda d: (dwelling_rank(state, d), d.id))
    target = available[-1] if employed else available[0]
    moved = False
    if hh.dwelling_id != target.id:
        move_household(state, hh, target)
        moved = True
    if not employed and len(hh.owned_dwelling_ids) >= 2:
        best = available[-1]
        if best.id != target.id and best.occupant_household_id is None:
            best.market = MARKET_SALE
            best.months_listed = 0
    return moved


def run_moving(state: SimState) -> int:
    moves = 0
    for hh in sorted(state.households.values(), key=lambda h: h.id):
        if decide_move(state, hh):
            moves += 1
    return moves
