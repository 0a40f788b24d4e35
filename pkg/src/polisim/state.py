"""Simulation state container, money movement helpers, and the conservation check.

Every monetary flow is a transfer between integer-cent accounts; exogenous
injections are booked against the external-sector account so the grand total
is constant over a run.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

from .entities import (Bank, ConstructionProject, Dwelling, Firm, Household,
                       Municipality, Person, Region)
from .params import RunConfig, ExogenousSeries
from .rng import RngStreams

SNAPSHOT_VERSION = 1


class IntegrityError(RuntimeError):
    """Ledger conservation or structural invariant violated."""


class HorizonError(RuntimeError):
    """Exogenous series exhausted before the requested month."""


def to_cents(amount: float) -> int:
    """Currency float -> integer cents, round-half-even."""
    return round(amount * 100.0)


class SimState:
    """Mutable world state for one run."""

    def __init__(self, config: RunConfig, series: ExogenousSeries, rng: RngStreams):
        self.config = config
        self.params = config.params
        self.series = series
        self.rng = rng
        self.tables = None               # InputTables, attached at instantiation
        self.month_index = 0
        self.persons: dict[int, Person] = {}
        self.households: dict[int, Household] = {}
        self.firms: dict[int, Firm] = {}
        self.dwellings: dict[int, Dwelling] = {}
        self.regions: list[Region] = []
        self.municipalities: list[Municipality] = []
        self.projects: list[ConstructionProject] = []
        self.bank = Bank()
        self.external = 0                        # external-sector account, cents
        self.next_person_id = 0
        self.next_household_id = 0
        self.next_firm_id = 0
        self.next_dwelling_id = 0
        self._distances: dict[tuple[int, int], float] = {}
        self.frames: list[dict] = []             # per-month indicator rows
        self.month_transactions: list[int] = []  # sale prices this month, cents
        self.price_index_base: float | None = None
        self.monitors: dict[str, list] = {
            "originations": [],                  # (month, amount, book_after, deposits_after)
            "mortgage_sales": [],                # (month, loan_cents, price_cents)
        }

    # -- calendar ----------------------------------------------------------

    @property
    def calendar_month(self) -> int:
        """0..11, derived from the configured start."""
        return (self.config.start_month - 1 + self.month_index) % 12

    @property
    def calendar_year(self) -> int:
        return self.config.start_year + (self.config.start_month - 1 + self.month_index) // 12

    # -- ids ---------------------------------------------------------------

    def new_person_id(self) -> int:
        self.next_person_id += 1
        return self.next_person_id - 1

    def new_household_id(self) -> int:
        self.next_household_id += 1
        return self.next_household_id - 1

    def new_firm_id(self) -> int:
        self.next_firm_id += 1
        return self.next_firm_id - 1

    def new_dwelling_id(self) -> int:
        self.next_dwelling_id += 1
        return self.next_dwelling_id - 1

    # -- geometry ----------------------------------------------------------

    def distance(self, region_a: int, region_b: int) -> float:
        key = (region_a, region_b) if region_a <= region_b else (region_b, region_a)
        d = self._distances.get(key)
        if d is None:
            ra, rb = self.regions[key[0]], self.regions[key[1]]
            d = math.hypot(ra.x - rb.x, ra.y - rb.y)
            self._distances[key] = d
        return d

    # -- household money ---------------------------------------------------

    def credit_savings(self, hh: Household, cents: int) -> None:
        hh.savings += cents
        self.bank.total_deposits += cents

    def debit_savings(self, hh: Household, cents: int) -> None:
        if cents > hh.savings:
            raise IntegrityError(f"savings overdraft on household {hh.id}")
        hh.savings -= cents
        self.bank.total_deposits -= cents

    def gather(self, hh: Household, amount: int) -> int:
        """Draw up to `amount` cents in the cash -> reserve -> savings order.

        Returns the amount actually drawn; member cash is consumed in member
        order, then the household reserve, then bank savings.
        """
        remaining = amount
        for pid in hh.member_ids:
            if remaining <= 0:
                break
            person = self.persons[pid]
            take = min(person.cash, remaining)
            person.cash -= take
            remaining -= take
        take = min(hh.reserve, remaining)
        hh.reserve -= take
        remaining -= take
        take = min(hh.savings, remaining)
        if take:
            self.debit_savings(hh, take)
            remaining -= take
        return amount - remaining

    def household_liquid(self, hh: Household) -> int:
        return sum(self.persons[p].cash for p in hh.member_ids) + hh.reserve + hh.savings

    def household_region(self, hh: Household) -> int:
        if hh.dwelling_id is not None:
            return self.dwellings[hh.dwelling_id].region_id
        return 0

    # -- ledger ------------------------------------------------------------

    def ledger_snapshot(self) -> dict[str, int]:
        """Balance per actor account plus the external sector."""
        snap: dict[str, int] = {}
        for p in self.persons.values():
            snap[f"p{p.id}"] = p.cash
        for h in self.households.values():
            snap[f"h{h.id}"] = h.reserve + h.savings
        for f in self.firms.values():
            snap[f"f{f.id}"] = f.cash
        for m in self.municipalities:
            snap[f"m{m.id}"] = m.treasury + m.policy_fund
        snap["bank"] = self.bank.cash
        snap["external"] = self.external
        return snap

    def total_money(self) -> int:
        total = self.external + self.bank.cash
        for p in self.persons.values():
            total += p.cash
        for h in self.households.values():
            total += h.reserve + h.savings
        for f in self.firms.values():
            total += f.cash
        for m in self.municipalities:
            total += m.treasury + m.policy_fund
        return total

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        def person(p: Person) -> dict:
            return {"id": p.id, "age": p.age_months, "g": p.gender, "bm": p.birthday_month,
                    "q": p.qualification, "cash": p.cash, "wage": p.wage,
                    "emp": p.employer_id, "hh": p.household_id, "car": p.has_car,
                    "mar": p.married}

        def household(h: Household) -> dict:
            return {"id": h.id, "members": h.member_ids, "dw": h.dwelling_id,
                    "owned": h.owned_dwelling_ids, "res": h.reserve, "sav": h.savings,
                    "inc": h.income_sum, "im": h.income_months, "mort": h.mortgage_id,
                    "rent": h.rent_due, "parent": h.parent_household_id,
                    "pi": h.pi_history}

        def firm(f: Firm) -> dict:
            return {"id": f.id, "reg": f.region_id, "kind": f.kind, "cash": f.cash,
                    "inv": f.inventory, "price": f.price, "emp": f.employee_ids,
                    "rev": f.revenue, "rm": f.revenue_month, "prev": f.prev_revenue,
                    "pool": f.wage_pool, "profit": f.profit,
                    "qp": f.qty_produced, "qs": f.qty_sold}

        def dwelling(d: Dwelling) -> dict:
            return {"id": d.id, "reg": d.region_id, "size": d.size, "qual": d.quality,
                    "own_h": d.owner_household_id, "own_f": d.owner_firm_id,
                    "occ": d.occupant_household_id, "mkt": d.market,
                    "T": d.months_listed, "ask": d.ask, "rent": d.rent}

        b = self.bank
        return {
            "version": SNAPSHOT_VERSION,
            "month_index": self.month_index,
            "external": self.external,
            "persons": [person(p) for p in sorted(self.persons.values(), key=lambda x: x.id)],
            "households": [household(h) for h in sorted(self.households.values(), key=lambda x: x.id)],
            "firms": [firm(f) for f in sorted(self.firms.values(), key=lambda x: x.id)],
            "dwellings": [dwelling(d) for d in sorted(self.dwellings.values(), key=lambda x: x.id)],
            "regions": [{"id": r.id, "mun": r.municipality_id, "x": r.x, "y": r.y,
                         "qli": r.qli, "lic": r.license_stock, "lp": r.license_price,
                         "lpm": r.licenses_per_month, "nq": r.income_index}
                        for r in self.regions],
            "municipalities": [{"id": m.id, "regions": m.region_ids, "tre": m.treasury,
                                "fund": m.policy_fund, "pop_prev": m.pop_prev, "hdi0": m.hdi0,
                                "vouchers": [{"hh": v.household_id, "val": v.monthly_value,
                                              "left": v.months_left} for v in m.vouchers]}
                               for m in self.municipalities],
            "projects": [{"firm": pr.firm_id, "reg": pr.region_id, "size": pr.size,
                          "qual": pr.quality, "total": pr.total_cost,
                          "left": pr.cost_remaining, "lic": pr.license_price_paid}
                         for pr in self.projects],
            "bank": {"cash": b.cash, "deposits": b.total_deposits, "next_loan": b.next_loan_id,
                     "cum": [b.cum_originated, b.cum_repaid, b.cum_interest_income,
                             b.cum_interest_paid],
                     "loans": [{"id": l.id, "hh": l.household_id, "pr": l.principal,
                                "out": l.outstanding, "rate": l.rate, "term": l.term_months,
                                "left": l.months_left, "pay": l.payment, "arr": l.arrears}
                               for l in sorted(b.loans.values(), key=lambda x: x.id)]},
            "counters": [self.next_person_id, self.next_household_id,
                         self.next_firm_id, self.next_dwelling_id],
        }

    def digest(self) -> str:
        """Canonical sha256 of the serialized state (determinism checks)."""
        payload = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()


@dataclass
class ConservationReport:
    drift: int
    total_before: int
    relative: float
    ok: bool


def check_conservation(before: dict[str, int], after: dict[str, int],
                       tolerance: float = 1e-9) -> ConservationReport:
    """Signed money drift between two ledger snapshots of the same actor universe.

    Accounts may appear or disappear between snapshots only with a zero
    balance on the side where they are missing (agents are born and die);
    anything else is a structural error.
    """
    for key in before.keys() | after.keys():
        if key in before and key in after:
            continue
        if key == "external" or key == "bank" or key.startswith("m"):
            raise IntegrityError(f"structural account {key} missing from one snapshot")
    total_before = sum(before.values())
    total_after = sum(after.values())
    drift = total_after - total_before
    relative = abs(drift) / max(1, abs(total_before))
    return ConservationReport(drift, total_before, relative, relative <= tolerance)
