"""Agent and object types. All money fields are integer minor units (cents).

Behavior lives in the market/sector modules; these classes are state plus a
few derived accessors.
"""

from __future__ import annotations

FEMALE = "f"
MALE = "m"

CONSUMER = "consumer"
CONSTRUCTION = "construction"

MARKET_NONE = "none"
MARKET_RENTAL = "rental"
MARKET_SALE = "sale"


class Person:
    __slots__ = ("id", "age_months", "gender", "birthday_month", "qualification",
                 "cash", "wage", "employer_id", "household_id", "has_car",
                 "married", "partner_id")

    def __init__(self, pid: int, age_months: int, gender: str, birthday_month: int,
                 qualification: int, household_id: int):
        self.id = pid
        self.age_months = age_months
        self.gender = gender
        self.birthday_month = birthday_month      # calendar month 0..11
        self.qualification = qualification        # fixed over the lifetime
        self.cash = 0                             # cents
        self.wage = 0                             # last wage received, cents
        self.employer_id: int | None = None
        self.household_id = household_id
        self.has_car = False
        self.married = False
        self.partner_id: int | None = None

    @property
    def age_years(self) -> int:
        return self.age_months // 12

    def in_labor_force(self) -> bool:
        return 16 <= self.age_years <= 70


class Household:
    __slots__ = ("id", "member_ids", "dwelling_id", "owned_dwelling_ids",
                 "reserve", "savings", "income_sum", "income_months",
                 "mortgage_id", "rent_due", "parent_household_id", "voucher",
                 "null_consumption", "rent_defaulted", "pi_history")

    def __init__(self, hid: int, parent_household_id: int | None = None):
        self.id = hid
        self.member_ids: list[int] = []
        self.dwelling_id: int | None = None
        self.owned_dwelling_ids: list[int] = []
        self.reserve = 0                          # cents, kept at home
        self.savings = 0                          # cents, deposited at the bank
        self.income_sum = 0                       # cents, cumulative member wage income
        self.income_months = 0                    # months over which income_sum accrued
        self.mortgage_id: int | None = None
        self.rent_due = 0                         # cents/month under the current contract
        self.parent_household_id = parent_household_id
        self.voucher: Voucher | None = None
        self.null_consumption = False             # this-month flag
        self.rent_defaulted = False               # this-month flag
        self.pi_history: list[float] = []         # monthly permanent income, currency units

    def record_income(self, amount_cents: int) -> None:
        self.income_sum += amount_cents

    def mean_income(self) -> float:
        """Average monthly member income over all recorded months, currency units."""
        if self.income_months == 0:
            return 0.0
        return self.income_sum / self.income_months / 100.0

    def liquid(self) -> int:
        return self.reserve + self.savings

    def is_renting(self) -> bool:
        return self.dwelling_id is not None and self.dwelling_id not in self.owned_dwelling_ids


class Firm:
    __slots__ = ("id", "region_id", "kind", "cash", "inventory", "price",
                 "employee_ids", "revenue", "revenue_month", "prev_revenue",
                 "wage_pool", "profit", "qty_produced", "qty_sold")

    def __init__(self, fid: int, region_id: int, kind: str, price: float = 1.0):
        self.id = fid
        self.region_id = region_id
        self.kind = kind
        self.cash = 0                             # cents
        self.inventory = 0.0                      # goods units (consumer firms)
        self.price = price                        # currency per unit
        self.employee_ids: list[int] = []
        self.revenue = 0                          # cents, wage/profit window (reset at book close)
        self.revenue_month = 0                    # cents, calendar month (reset at stats)
        self.prev_revenue = 0                     # cents, last closed window (wage basis)
        self.wage_pool = 0                        # cents, total paid last month (base wage signal)
        self.profit = 0                           # cents, last closed window
        self.qty_produced = 0.0                   # this month
        self.qty_sold = 0.0                       # this month


class ConstructionProject:
    __slots__ = ("firm_id", "region_id", "size", "quality", "total_cost",
                 "cost_remaining", "license_price_paid")

    def __init__(self, firm_id: int, region_id: int, size: float, quality: int,
                 total_cost: float, license_price_paid: int):
        self.firm_id = firm_id
        self.region_id = region_id
        self.size = size
        self.quality = quality
        self.total_cost = total_cost              # production units
        self.cost_remaining = total_cost
        self.license_price_paid = license_price_paid


class Dwelling:
    __slots__ = ("id", "region_id", "size", "quality", "owner_household_id",
                 "owner_firm_id", "occupant_household_id", "market",
                 "months_listed", "ask", "rent")

    def __init__(self, did: int, region_id: int, size: float, quality: int):
        self.id = did
        self.region_id = region_id
        self.size = size                          # H_s in [20, 120]
        self.quality = quality                    # H_q in {1..4}
        self.owner_household_id: int | None = None
        self.owner_firm_id: int | None = None     # set for unsold new construction
        self.occupant_household_id: int | None = None
        self.market = MARKET_NONE
        self.months_listed = 0                    # T, resets on delist
        self.ask = 0                              # cents, current asking price
        self.rent = 0                             # cents/month while under contract

    def base_quality(self) -> float:
        return self.size * self.quality


class Region:
    __slots__ = ("id", "municipality_id", "x", "y", "qli", "license_stock",
                 "license_price", "licenses_per_month", "income_index",
                 "qualification_cdf")

    def __init__(self, rid: int, municipality_id: int, x: float, y: float, qli: float,
                 license_stock: int, license_price: int, licenses_per_month: int,
                 qualification_cdf: list[float] | None = None):
        self.id = rid
        self.municipality_id = municipality_id
        self.x = x
        self.y = y
        self.qli = qli                            # N_m, price multiplier / HDI proxy
        self.license_stock = license_stock
        self.license_price = license_price        # cents
        self.licenses_per_month = licenses_per_month
        self.income_index = 1.0                   # N_q in [0, 1], refreshed monthly
        self.qualification_cdf = qualification_cdf or [0.2, 0.4, 0.6, 0.8, 1.0]


class Municipality:
    __slots__ = ("id", "region_ids", "treasury", "taxes_month", "policy_fund",
                 "register", "vouchers", "pop_prev", "hdi0")

    def __init__(self, mid: int, region_ids: list[int], hdi0: float):
        self.id = mid
        self.region_ids = region_ids
        self.treasury = 0                         # cents
        self.taxes_month = {"consumption": 0, "labor": 0, "firm": 0,
                            "transaction": 0, "property": 0}
        self.policy_fund = 0                      # cents, carryover for policies
        self.register: list[int] = []             # household ids, poorest first
        self.vouchers: list[Voucher] = []
        self.pop_prev = 0
        self.hdi0 = hdi0

    def taxes_total(self) -> int:
        return sum(self.taxes_month.values())


class Voucher:
    __slots__ = ("household_id", "municipality_id", "monthly_value", "months_left")

    def __init__(self, household_id: int, municipality_id: int, monthly_value: int,
                 months_left: int = 24):
        self.household_id = household_id
        self.municipality_id = municipality_id
        self.monthly_value = monthly_value        # cents, fixed at issuance
        self.months_left = months_left


class Loan:
    __slots__ = ("id", "household_id", "principal", "outstanding", "rate",
                 "term_months", "months_left", "payment", "arrears")

    def __init__(self, lid: int, household_id: int, principal: int, rate: float,
                 term_months: int, payment: int):
        self.id = lid
        self.household_id = household_id
        self.principal = principal                # cents at origination
        self.outstanding = principal              # cents
        self.rate = rate                          # monthly, fixed for the loan life
        self.term_months = term_months
        self.months_left = term_months
        self.payment = payment                    # cents, fixed annuity payment
        self.arrears = 0                          # cents carried from missed payments


class Bank:
    __slots__ = ("cash", "total_deposits", "loans", "next_loan_id",
                 "cum_originated", "cum_repaid", "cum_interest_income", "cum_interest_paid")

    def __init__(self):
        self.cash = 0                             # cents, the bank's own account
        self.total_deposits = 0                   # cents, running sum of household savings
        self.loans: dict[int, Loan] = {}
        self.next_loan_id = 0
        self.cum_originated = 0
        self.cum_repaid = 0
        self.cum_interest_income = 0
        self.cum_interest_paid = 0

    def outstanding_total(self) -> int:
        return sum(loan.outstanding for loan in self.loans.values())
