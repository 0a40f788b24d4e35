"""Monthly labor market: vacancy posting, candidate scoring, and matching."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .state import SimState

DISTANCE_ONLY = "distance_only"
FULL_SCORE = "full_score"


@dataclass
class Candidate:
    person_id: int
    qualification: int
    region_id: int
    transport_cost: float     # per km; car owners weigh distance more heavily
    last_wage: int            # cents


@dataclass
class Vacancy:
    firm_id: int
    region_id: int
    base_wage: float          # firm's total payout last month, currency
    criterion: str            # DISTANCE_ONLY with probability eta


def score(candidate: Candidate, vacancy: Vacancy, distance_km: float) -> float:
    """Match score: qualification + base wage - commute cost.

    Distance-only vacancies drop the qualification term.
    """
    s = vacancy.base_wage - distance_km * candidate.transport_cost
    if vacancy.criterion == FULL_SCORE:
        s += candidate.qualification
    return s


def assign_cars(state: SimState, candidates: list[Candidate]) -> None:
    """Private-transport access drawn monthly from the candidate's last-wage decile."""
    if not candidates:
        return
    rng = state.rng.labor
    table = state.tables.car_ownership
    wages = np.array([c.last_wage for c in candidates], dtype=float)
    deciles = np.clip((wages.argsort(kind="stable").argsort() * 10) // max(1, len(wages)), 0, 9)
    draws = rng.random(len(candidates))
    for c, d, u in zip(candidates, deciles, draws):
        has_car = u < table[int(d)]
        c.transport_cost = state.params.c_car if has_car else state.params.c_public
        state.persons[c.person_id].has_car = bool(has_car)


def collect_candidates(state: SimState) -> list[Candidate]:
    out = []
    for p in state.persons.values():
        if p.employer_id is None and p.in_labor_force():
            hh = state.households[p.household_id]
            region = state.household_region(hh)
            out.append(Candidate(p.id, p.qualification, region, state.params.c_public, p.wage))
    out.sort(key=lambda c: c.person_id)
    return out


def post_vacancies(state: SimState) -> tuple[list[Vacancy], list[int]]:
    """Each firm participates with probability iota; loss-makers fire one
    random employee, the rest post a single vacancy."""
    rng = state.rng.labor
    params = state.params
    vacancies: list[Vacancy] = []
    fired: list[int] = []
    for firm in sorted(state.firms.values(), key=lambda f: f.id):
        if rng.random() >= params.iota:
            continue
        if firm.profit < 0 and firm.employee_ids:
            victim = firm.employee_ids[int(rng.integers(0, len(firm.employee_ids)))]
            firm.employee_ids.remove(victim)
            state.persons[victim].employer_id = None
            fired.append(victim)
        else:
            criterion = DISTANCE_ONLY if rng.random() < params.eta else FULL_SCORE
            vacancies.append(Vacancy(firm.id, firm.region_id,
                                     firm.wage_pool / 100.0, criterion))
    return vacancies, fired


def clear_market(state: SimState, candidates: list[Candidate],
                 vacancies: list[Vacancy]) -> list[tuple[int, int]]:
    """Match vacancies to candidates.

    Every vacancy samples sigma candidates; vacancies are served in
    descending base wage and take their best-scoring still-unmatched
    candidate. Closes when either side is exhausted.
    """
    if not candidates or not vacancies:
        return []
    rng = state.rng.labor
    sigma = state.params.sigma

    order = rng.permutation(len(vacancies))
    shuffled = [vacancies[i] for i in order]
    # Stable sort: equal-wage vacancies keep their shuffled order.
    shuffled.sort(key=lambda v: -v.base_wage)

    samples = []
    for _ in shuffled:
        k = min(sigma, len(candidates))
        samples.append(rng.choice(len(candidates), size=k, replace=False))

    matches: list[tuple[int, int]] = []
    taken: set[int] = set()
    for vacancy, sample in zip(shuffled, samples):
        best = None
        best_score = -float("inf")
        for idx in sample:
            i = int(idx)
            if i in taken:
                continue
            c = candidates[i]
            s = score(c, vacancy, state.distance(c.region_id, vacancy.region_id))
            if s > best_score:
                best_score = s
                best = i
        if best is None:
            continue
        taken.add(best)
        c = candidates[best]
        firm = state.firms[vacancy.firm_id]
        firm.employee_ids.append(c.person_id)
        state.persons[c.person_id].employer_id = firm.id
        matches.append((vacancy.firm_id, c.person_id))
        if len(taken) == len(candidates):
            break
    return matches


def run_labor_market(state: SimState) -> list[tuple[int, int]]:
    # Candidates are collected before firings: a worker fired this round
    # re-enters the market only next month.
    candidates = collect_candidates(state)
    vacancies, _ = post_vacancies(state)
    assign_cars(state, candidates)
    return clear_market(state, candidates, vacancies)
