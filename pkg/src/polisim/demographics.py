"""Aging, mortality, fertility, marriage, migration, divorce, inheritance."""

from __future__ import annotations

from .entities import FEMALE, MALE, Household, Person
from .finance import write_off_household_loan
from .housing import rental_listings, try_rent
from .goods import household_pi
from .state import SimState, to_cents

ADULT_AGE_YEARS = 18
FERTILE_MIN, FERTILE_MAX = 15, 49
MAX_AGE_YEARS = 110


def run_birthdays(state: SimState) -> tuple[int, int]:
    """Yearly demographic draws for everyone whose birthday month is now.

    Returns (births, deaths).
    """
    rng = state.rng.demographics
    tables = state.tables
    month = state.calendar_month
    births = 0
    deaths = 0
    for person in [p for p in state.persons.values() if p.birthday_month == month]:
        if person.id not in state.persons:
            continue
        person.age_months += 12
        age = min(person.age_years, MAX_AGE_YEARS)
        if rng.random() < float(tables.mortality[person.gender][age]):
            _process_death(state, person)
            deaths += 1
            continue
        if (person.gender == FEMALE and FERTILE_MIN <= age <= FERTILE_MAX
                and rng.random() < float(tables.fertility[age])):
            _process_birth(state, person)
            births += 1
    return births, deaths


def _process_birth(state: SimState, mother: Person) -> None:
    """The child joins the mother's household with a fresh qualification draw."""
    rng = state.rng.demographics
    hh = state.households[mother.household_id]
    cdf = state.regions[state.household_region(hh)].qualification_cdf
    u = rng.random()
    q = 1 + sum(1 for c in cdf[:-1] if u > c)
    child = Person(state.new_person_id(), 0,
                   FEMALE if rng.random() < 0.51 else MALE,
                   state.calendar_month, q, hh.id)
    state.persons[child.id] = child
    hh.member_ids.append(child.id)


def _process_death(state: SimState, person: Person) -> None:
    """Remove the person; estate stays with the household, an emptied
    household triggers inheritance."""
    if person.employer_id is not None:
        firm = state.firms.get(person.employer_id)
        if firm and person.id in firm.employee_ids:
            firm.employee_ids.remove(person.id)
    if person.partner_id is not None:
        partner = state.persons.get(person.partner_id)
        if partner is not None:
            partner.married = False
            partner.partner_id = None
    hh = state.households[person.household_id]
    hh.member_ids.remove(person.id)
    hh.reserve += person.cash
    person.cash = 0
    del state.persons[person.id]
    if not hh.member_ids:
        process_inheritance(state, hh)


def process_inheritance(state: SimState, deceased: Household) -> int | None:
    """Wealth and property pass to the parent household, or to a random one.

    Returns the heir household id (None when the deceased was the last
    household standing).
    """
    heir: Household | None = None
    if deceased.parent_household_id is not None:
        heir = state.households.get(deceased.parent_household_id)
    if heir is None or heir.id == deceased.id:
        others = [h for h in sorted(state.households.values(), key=lambda x: x.id)
                  if h.id != deceased.id]
        if others:
            heir = others[int(state.rng.demographics.integers(0, len(others)))]

    write_off_household_loan(state, deceased)
    if deceased.dwelling_id is not None:
        old = state.dwellings[deceased.dwelling_id]
        old.occupant_household_id = None
        old.rent = 0
    if heir is not None:
        heir.reserve += deceased.reserve
        deceased.reserve = 0
        moved = deceased.savings
        if moved:
            state.debit_savings(deceased, moved)
            state.credit_savings(heir, moved)
        for did in deceased.owned_dwelling_ids:
            d = state.dwellings[did]
            d.owner_household_id = heir.id
            heir.owned_dwelling_ids.append(did)
        deceased.owned_dwelling_ids = []
    del state.households[deceased.id]
    return heir.id if heir is not None else None


# -- marriage ----------------------------------------------------------------

def _is_sole_adult(state: SimState, person: Person) -> bool:
    hh = state.households[person.household_id]
    adults = [p for p in hh.member_ids
              if state.persons[p].age_years >= ADULT_AGE_YEARS]
    return adults == [person.id]


def process_marriage(state: SimState) -> int:
    """Pair up marriage candidates; each new household must secure housing or
    the marriage is rolled back. Returns marriages completed."""
    rng = state.rng.demographics
    rate = state.tables.marriage_rate
    if rate <= 0:
        return 0
    pool = []
    for p in sorted(state.persons.values(), key=lambda x: x.id):
        if not p.married and p.age_years >= ADULT_AGE_YEARS and rng.random() < rate:
            pool.append(p)
    if len(pool) < 2:
        return 0
    order = rng.permutation(len(pool))
    shuffled = [pool[i] for i in order]
    married = 0
    for i in range(0, len(shuffled) - 1, 2):
        a, b = shuffled[i], shuffled[i + 1]
        if a.id not in state.persons or b.id not in state.persons:
            continue
        if a.household_id == b.household_id:
            continue
        if _attempt_marriage(state, a, b):
            married += 1
    return married


def _attempt_marriage(state: SimState, a: Person, b: Person) -> bool:
    undo = _MarriageUndo(state, a, b)
    new_hh = Household(state.new_household_id(), parent_household_id=a.household_id)
    state.households[new_hh.id] = new_hh

    brought_rental: list[tuple[int, int]] = []   # (dwelling_id, rent)
    for person in (a, b):
        old = state.households[person.household_id]
        if _is_sole_adult(state, person):
            # The whole household merges: children, property, and balances.
            for pid in list(old.member_ids):
                state.persons[pid].household_id = new_hh.id
                new_hh.member_ids.append(pid)
            old.member_ids = []
            for did in list(old.owned_dwelling_ids):
                d = state.dwellings[did]
                d.owner_household_id = new_hh.id
                new_hh.owned_dwelling_ids.append(did)
            old.owned_dwelling_ids = []
            new_hh.reserve += old.reserve
            old.reserve = 0
            if old.savings:
                moved = old.savings
                state.debit_savings(old, moved)
                state.credit_savings(new_hh, moved)
            new_hh.income_sum += old.income_sum
            new_hh.income_months = max(new_hh.income_months, old.income_months)
            if old.dwelling_id is not None:
                d = state.dwellings[old.dwelling_id]
                if old.is_renting():
                    brought_rental.append((d.id, d.rent))
                d.occupant_household_id = None
                d.rent = 0
                old.dwelling_id = None
                old.rent_due = 0
            if old.voucher is not None:
                # Vouchers are bound to the old contract and are forfeited.
                from .housing import return_voucher
                return_voucher(state, old)
            del state.households[old.id]
        else:
            old.member_ids.remove(person.id)
            person.household_id = new_hh.id
            new_hh.member_ids.append(person.id)
    if new_hh.income_months == 0:
        new_hh.income_months = 1

    if _secure_housing(state, new_hh, brought_rental):
        a.married = True
        b.married = True
        a.partner_id = b.id
        b.partner_id = a.id
        return True
    undo.rollback(new_hh)
    return False


def _secure_housing(state: SimState, hh: Household,
                    brought_rental: list[tuple[int, int]]) -> bool:
    from .housing import dwelling_rank, move_household

    owned_free = [state.dwellings[d] for d in hh.owned_dwelling_ids
                  if state.dwellings[d].occupant_household_id is None]
    if owned_free:
        owned_free.sort(key=lambda d: (dwelling_rank(state, d), d.id))
        employed = any(state.persons[p].employer_id is not None for p in hh.member_ids)
        move_household(state, hh, owned_free[-1] if employed else owned_free[0])
        return True
    if brought_rental:
        candidates = [(state.dwellings[did], rent) for did, rent in brought_rental
                      if state.dwellings[did].occupant_household_id is None]
        if candidates:
            candidates.sort(key=lambda pair: (dwelling_rank(state, pair[0]), pair[0].id))
            d, rent = candidates[-1]
            move_household(state, hh, d, rent_cents=rent)
            return True
    rate = state.series.baseline_rate[state.month_index] if state.series else 0.005
    pi = household_pi(state, hh, rate)
    return try_rent(state, hh, rental_listings(state), pi) is not None


class _MarriageUndo:
    """Full snapshot of the two touched households for marriage rollback."""

    def __init__(self, state: SimState, a: Person, b: Person):
        self.state = state
        self.snapshots = []
        for hid in {a.household_id, b.household_id}:
            hh = state.households[hid]
            dwelling = state.dwellings[hh.dwelling_id] if hh.dwelling_id is not None else None
            self.snapshots.append({
                "hh": hh,
                "members": list(hh.member_ids),
                "owned": list(hh.owned_dwelling_ids),
                "reserve": hh.reserve,
                "savings": hh.savings,
                "income_sum": hh.income_sum,
                "income_months": hh.income_months,
                "dwelling_id": hh.dwelling_id,
                "rent_due": hh.rent_due,
                "dwelling_rent": dwelling.rent if dwelling else 0,
                "dwelling_occupant": dwelling.occupant_household_id if dwelling else None,
                "voucher": hh.voucher,
                "voucher_months": hh.voucher.months_left if hh.voucher else 0,
            })

    def rollback(self, new_hh: Household) -> None:
        state = self.state
        if new_hh.dwelling_id is not None:
            d = state.dwellings[new_hh.dwelling_id]
            d.occupant_household_id = None
            d.rent = 0
        if new_hh.savings:
            state.debit_savings(new_hh, new_hh.savings)
        del state.households[new_hh.id]
        for snap in self.snapshots:
            hh: Household = snap["hh"]
            state.households[hh.id] = hh
            hh.member_ids = snap["members"]
            for pid in hh.member_ids:
                state.persons[pid].household_id = hh.id
            hh.owned_dwelling_ids = snap["owned"]
            for did in hh.owned_dwelling_ids:
                state.dwellings[did].owner_household_id = hh.id
            delta = snap["savings"] - hh.savings
            if delta > 0:
                state.credit_savings(hh, delta)
            elif delta < 0:
                state.debit_savings(hh, -delta)
            hh.reserve = snap["reserve"]
            hh.income_sum = snap["income_sum"]
            hh.income_months = snap["income_months"]
            hh.dwelling_id = snap["dwelling_id"]
            hh.rent_due = snap["rent_due"]
            if hh.dwelling_id is not None:
                d = state.dwellings[hh.dwelling_id]
                d.occupant_household_id = snap["dwelling_occupant"]
                d.rent = snap["dwelling_rent"]
            hh.voucher = snap["voucher"]
            if hh.voucher is not None:
                hh.voucher.months_left = snap["voucher_months"]
                muni = state.municipalities[hh.voucher.municipality_id]
                if hh.voucher not in muni.vouchers:
                    muni.vouchers.append(hh.voucher)


# -- divorce -------------------------------------------------------------------

def process_divorce(state: SimState) -> int:
    """One adult leaves into a new single household that must secure housing;
    disabled by default (rate 0)."""
    rng = state.rng.demographics
    rate = state.tables.divorce_rate
    if rate <= 0:
        return 0
    divorces = 0
    for person in [p for p in sorted(state.persons.values(), key=lambda x: x.id)
                   if p.married]:
        if rng.random() >= rate:
            continue
        if _is_sole_adult(state, person):
            continue
        old = state.households[person.household_id]
        new_hh = Household(state.new_household_id(), parent_household_id=old.id)
        state.households[new_hh.id] = new_hh
        old.member_ids.remove(person.id)
        person.household_id = new_hh.id
        new_hh.member_ids.append(person.id)
        new_hh.income_months = 1
        if _secure_housing(state, new_hh, []):
            person.married = False
            if person.partner_id is not None:
                partner = state.persons.get(person.partner_id)
                if partner is not None:
                    partner.married = False
                    partner.partner_id = None
            person.partner_id = None
            divorces += 1
        else:
            new_hh.member_ids.remove(person.id)
            old.member_ids.append(person.id)
            person.household_id = old.id
            del state.households[new_hh.id]
    return divorces


# -- migration -----------------------------------------------------------------

def municipality_population(state: SimState, muni) -> int:
    region_set = set(muni.region_ids)
    total = 0
    for hh in state.households.values():
        if hh.dwelling_id is not None and state.dwellings[hh.dwelling_id].region_id in region_set:
            total += len(hh.member_ids)
    return total


def process_migration(state: SimState) -> int:
    """Create migrant households up to each municipality's population target;
    they stay only if the rental market houses them."""
    rng = state.rng.demographics
    arrived = 0
    t = state.month_index
    for muni in state.municipalities:
        target = state.series.population_target[muni.id][t]
        current = municipality_population(state, muni)
        listings = [d for d in rental_listings(state)
                    if state.regions[d.region_id].municipality_id == muni.id]
        while current < target:
            if not listings:
                break
            hh, size = _spawn_migrant_household(state, muni, rng)
            rate = state.series.baseline_rate[t]
            pi = household_pi(state, hh, rate)
            success = try_rent(state, hh, listings, pi)
            if success is None:
                _discard_household(state, hh)
                break
            state.external -= hh.savings          # endowment enters the economy
            listings = [d for d in listings if d.occupant_household_id is None]
            current += size
            arrived += size
    return arrived


def _spawn_migrant_household(state: SimState, muni, rng) -> tuple[Household, int]:
    hh = Household(state.new_household_id())
    state.households[hh.id] = hh
    size = max(1, int(round(rng.normal(3.0, 0.9))))
    q_sum = 0
    for i in range(size):
        if i == 0:
            age_years = 21 + int(rng.integers(0, 40))
        else:
            age_years = int(rng.integers(0, 60))
        q = int(rng.integers(1, 6))
        q_sum += q if age_years >= ADULT_AGE_YEARS else 0
        p = Person(state.new_person_id(), age_years * 12 + int(rng.integers(0, 12)),
                   FEMALE if rng.random() < 0.51 else MALE,
                   int(rng.integers(0, 12)), q, hh.id)
        state.persons[p.id] = p
        hh.member_ids.append(p.id)
    seed_income = state.config.city.seed_income_per_q * max(1, q_sum)
    hh.income_sum = to_cents(seed_income)
    hh.income_months = 1
    savings = to_cents(seed_income * state.config.city.savings_months)
    hh.savings = savings                 # booked against external only on success
    state.bank.total_deposits += savings
    return hh, size


def _discard_household(state: SimState, hh: Household) -> None:
    if hh.savings:
        state.debit_savings(hh, hh.savings)
    for pid in hh.member_ids:
        del state.persons[pid]
    del state.households[hh.id]


def run_household_change(state: SimState) -> None:
    process_migration(state)
    process_marriage(state)
    process_divorce(state)
