"""The bank: mortgage evaluation and origination, loan servicing, deposit interest."""

from __future__ import annotations

from .entities import Household, Loan
from .state import SimState, to_cents

MAX_TERM_MONTHS = 360
MAX_BORROWER_AGE_YEARS = 75


def loan_term_months(state: SimState, hh: Household) -> int:
    """min(360, months until the oldest member turns 75)."""
    if not hh.member_ids:
        return 0
    oldest = max(state.persons[p].age_months for p in hh.member_ids)
    runway = MAX_BORROWER_AGE_YEARS * 12 - oldest
    return max(0, min(MAX_TERM_MONTHS, runway))


def loan_cap(pi: float, chi: float, term_months: int) -> float:
    """Maximum principal: PI * chi * m (monthly capacity times term)."""
    return pi * chi * term_months


def estimate_loan_cap(state: SimState, hh: Household, pi: float) -> int:
    """Buyer-side credit estimate in cents: the cap formula without the
    origination criteria."""
    return max(0, to_cents(loan_cap(pi, state.params.chi, loan_term_months(state, hh))))


def annuity_payment(principal: float, monthly_rate: float, n_months: int) -> float:
    """Fixed monthly payment for a standard amortizing loan."""
    if n_months <= 0:
        raise ValueError("term must be positive")
    if monthly_rate <= 0:
        return principal / n_months
    return principal * monthly_rate / (1.0 - (1.0 + monthly_rate) ** -n_months)


def evaluate_mortgage(state: SimState, hh: Household, requested: int, pi: float) -> int:
    """Grant decision in cents, 0 when declined.

    Approval needs (a) positive bank cash, (b) no live mortgage, and (c) the
    post-loan book within nu of total deposits; the amount is capped at
    PI * chi * m and at the bank's cash on hand.
    """
    bank = state.bank
    if requested <= 0 or bank.cash <= 0 or hh.mortgage_id is not None:
        return 0
    term = loan_term_months(state, hh)
    if term <= 0:
        return 0
    amount = min(requested, to_cents(loan_cap(pi, state.params.chi, term)), bank.cash)
    if amount <= 0:
        return 0
    if bank.outstanding_total() + amount > state.params.nu * bank.total_deposits:
        return 0
    return amount


def originate_loan(state: SimState, hh: Household, amount: int, pi: float) -> Loan:
    """Create the loan and disburse from bank cash (the settlement routes the
    money to the seller)."""
    bank = state.bank
    term = loan_term_months(state, hh)
    rate = state.series.mortgage_rate[state.month_index]
    payment = max(1, to_cents(annuity_payment(amount / 100.0, rate, term)))
    loan = Loan(bank.next_loan_id, hh.id, amount, rate, term, payment)
    bank.next_loan_id += 1
    bank.loans[loan.id] = loan
    hh.mortgage_id = loan.id
    bank.cash -= amount
    bank.cum_originated += amount
    state.monitors["originations"].append(
        (state.month_index, amount, bank.outstanding_total(), bank.total_deposits))
    return loan


def service_loans(state: SimState) -> int:
    """Collect the monthly payment on every live loan.

    Shortfalls accumulate as arrears recovered in later months; the schedule
    itself keeps amortizing. Fully repaid loans are closed. Returns total
    cents collected.
    """
    bank = state.bank
    collected = 0
    for loan in sorted(bank.loans.values(), key=lambda l: l.id):
        hh = state.households.get(loan.household_id)
        if hh is None:
            continue
        interest = to_cents(loan.outstanding / 100.0 * loan.rate)
        if loan.months_left > 1:
            scheduled = min(loan.payment, loan.outstanding + interest)
        else:
            scheduled = loan.outstanding + interest
        due = scheduled + loan.arrears
        paid = state.gather(hh, due)
        bank.cash += paid
        collected += paid
        principal_part = min(loan.outstanding, scheduled - interest)
        loan.outstanding -= max(0, principal_part)
        loan.arrears = due - paid
        if loan.months_left > 0:
            loan.months_left -= 1
        bank.cum_repaid += max(0, principal_part)
        bank.cum_interest_income += max(0, scheduled - max(0, principal_part))
        if loan.outstanding <= 0 and loan.arrears <= 0:
            del bank.loans[loan.id]
            hh.mortgage_id = None
    return collected


def pay_deposit_interest(state: SimState) -> int:
    """Credit the baseline rate on every savings balance, debiting bank cash.

    Reserve money earns nothing. Credits stop if the bank runs out of cash
    (later household ids go uncredited that month).
    """
    bank = state.bank
    rate = state.series.baseline_rate[state.month_index]
    paid = 0
    for hh in sorted(state.households.values(), key=lambda h: h.id):
        if hh.savings <= 0:
            continue
        credit = to_cents(hh.savings / 100.0 * rate)
        credit = min(credit, bank.cash)
        if credit <= 0:
            if bank.cash <= 0:
                break
            continue
        bank.cash -= credit
        state.credit_savings(hh, credit)
        bank.cum_interest_paid += credit
        paid += credit
    return paid


def write_off_household_loan(state: SimState, hh: Household) -> None:
    """Dissolving household: the bank absorbs any remaining balance."""
    if hh.mortgage_id is None:
        return
    loan = state.bank.loans.pop(hh.mortgage_id, None)
    hh.mortgage_id = None
    del loan
