"""Local-search heuristics over the swap/replace neighborhood.

Three heuristics share one neighborhood and one delta-evaluation path:

  tabu search           worst-employee repair loop with a tabu ring buffer
                        and a per-employee terminating mechanism
  hill climbing         best-improvement sweeps until locally optimal
  simulated annealing   single random neighbor per step, geometric cooling

Each heuristic optionally routes candidates through a classifier filter:
every non-tabu candidate is scored (one call per affected employee) and
only the filter_size best go on to cost evaluation.

The classifier handle must expose
    score(emp_id, row, day_index, new_cell) -> float   (higher = better)
    neutral_score: float                               (stands in for the
                                                        missing second term
                                                        of replace moves)
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from time import perf_counter_ns

from .constraints import (
    STRATEGY_DEC, STRATEGIES, EvalContext, check_hard, compiled, evaluate_delta,
)
from .model import (
    EMPTY_RECORD, CandidateMove, ProblemInstance, Roster, apply_move,
    replace_move, swap_move, tabu_record_of,
)


class InfeasibleRosterError(ValueError):
    """The initial roster violates a hard rule (or cannot be constructed)."""


@dataclass
class SolverConfig:
    heuristic: str = "ts"                 # ts | hc | sa
    strategy: str = STRATEGY_DEC
    tabu_capacity: int = 10
    stop: int = 200                       # iterations without best-cost improvement
    seed: int = 0
    filter_classifier: object | None = None
    filter_size: int | float = 0.10       # int: absolute; float: fraction of
                                          # the live (non-tabu) neighborhood
    sa_initial_temp: float = 20.0
    sa_cooling: float = 0.995

    def __post_init__(self):
        if self.heuristic not in ("ts", "hc", "sa"):
            raise ValueError(f"unknown heuristic {self.heuristic!r}")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.stop < 0 or self.tabu_capacity < 0:
            raise ValueError("stop and tabu_capacity must be >= 0")
        if isinstance(self.filter_size, bool) or (
                isinstance(self.filter_size, int) and self.filter_size < 1):
            raise ValueError("integer filter_size must be >= 1")
        if isinstance(self.filter_size, float) and not 0 < self.filter_size <= 1:
            raise ValueError("fractional filter_size must be in (0, 1]")
        if self.heuristic == "sa":
            if self.sa_initial_temp <= 0:
                raise ValueError("sa_initial_temp must be > 0")
            if not 0 < self.sa_cooling < 1:
                raise ValueError("sa_cooling must be in (0, 1)")


@dataclass
class SolverTrace:
    """Counters, timings and the best-cost time series of one run."""

    instance: str = ""
    heuristic: str = ""
    strategy: str = ""
    seed: int = 0
    best_series: list[tuple[int, int, int, int]] = field(default_factory=list)
    cost_evals: int = 0
    classifier_calls: int = 0
    cost_eval_ns: int = 0
    classify_ns: int = 0
    iterations: int = 0
    commits: int = 0
    elapsed_ns: int = 0
    final_cost: int = 0
    # shadow-audit tallies (filled when a filtered run audits every candidate)
    audit_rejected: int = 0
    audit_rejected_improving: int = 0
    audit_accepted: int = 0
    audit_accepted_nonimproving: int = 0

    def record_best(self, elapsed_ns: int, best_cost: int) -> None:
        self.best_series.append(
            (elapsed_ns, best_cost, self.cost_evals, self.classifier_calls))

    def to_csv(self) -> str:
        lines = ["elapsed_us,best_Z,cost_evals,classifier_calls"]
        for t_ns, cost, evals, calls in self.best_series:
            lines.append(f"{t_ns // 1000},{cost},{evals},{calls}")
        return "\n".join(lines) + "\n"


class TabuList:
    """Ring buffer of move records; membership covers the last m insertions."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self._items: list = []

    def add(self, record) -> None:
        if self.capacity == 0:
            return
        self._items.append(record)
        if len(self._items) > self.capacity:
            self._items.pop(0)

    def __contains__(self, record) -> bool:
        return record in self._items

    def __len__(self) -> int:
        return len(self._items)


class TerminationInfo:
    """Per-employee best local cost and count of non-improving attempts."""

    def __init__(self, n: int):
        self.penalty = [math.inf] * n
        self.iteration = [0] * n

    def reset(self) -> None:
        n = len(self.penalty)
        self.penalty = [math.inf] * n
        self.iteration = [0] * n

    def note(self, emp_id: int, local_best_cost) -> None:
        i = emp_id - 1
        if local_best_cost < self.penalty[i]:
            self.penalty[i] = local_best_cost
            self.iteration[i] = 0
        else:
            self.iteration[i] += 1


def select_employee(per_emp_cost: list[int], term: TerminationInfo,
                    tabu_capacity: int) -> int | None:
    """Employee with the largest cost contribution whose attempt counter has
    not exceeded the tabu capacity; None when everyone is exhausted."""
    best = None
    best_cost = -1
    for i, cost in enumerate(per_emp_cost):
        if term.iteration[i] <= tabu_capacity and cost > best_cost:
            best = i + 1
            best_cost = cost
    return best


def _rest_ok(comp, row, j: int, val: int, min_rest: int) -> bool:
    if min_rest <= 0:
        return True
    if val and j > 0:
        prev = row[j - 1]
        if prev and 1440 + comp.start_min[val] - comp.end_min[prev] < min_rest:
            return False
    if val and j + 1 < comp.d:
        nxt = row[j + 1]
        if nxt and 1440 + comp.start_min[nxt] - comp.end_min[val] < min_rest:
            return False
    return True


def neighborhood(instance: ProblemInstance, roster: Roster, emp_a: int):
    """All hard-feasibility-preserving moves touching emp_a, in a fixed order:
    swaps employee-major then day-minor, then replaces day-major then
    shift-minor.  Moves touching fixed cells are excluded; replaces are only
    produced when the coverage rule still holds afterwards."""
    comp = compiled(instance)
    n, d, s = comp.n, comp.d, comp.s
    min_rest = instance.hard_constraints.min_rest_minutes
    fixed = comp.fixed
    ia = emp_a - 1
    row_a = roster.rows[ia]
    for emp_b in range(1, n + 1):
        if emp_b == emp_a:
            continue
        row_b = roster.rows[emp_b - 1]
        for day in range(1, d + 1):
            j = day - 1
            ca, cb = row_a[j], row_b[j]
            if ca == cb:
                continue
            if (emp_a, day) in fixed or (emp_b, day) in fixed:
                continue
            if cb and not comp.can_work[ia][cb]:
                continue
            if ca and not comp.can_work[emp_b - 1][ca]:
                continue
            if not _rest_ok(comp, row_a, j, cb, min_rest):
                continue
            if not _rest_ok(comp, row_b, j, ca, min_rest):
                continue
            yield swap_move(emp_a, emp_b, day)
    exact = instance.hard_constraints.coverage_exact
    for day in range(1, d + 1):
        j = day - 1
        if (emp_a, day) in fixed:
            continue
        old = row_a[j]
        counts = [0] * (s + 1)
        for i in range(n):
            counts[roster.rows[i][j]] += 1
        for new in range(0, s + 1):
            if new == old:
                continue
            if new and not comp.can_work[ia][new]:
                continue
            if not _rest_ok(comp, row_a, j, new, min_rest):
                continue
            if old:
                after_old = counts[old] - 1
                req = comp.required[j][old]
                if (after_old != req) if exact else (after_old < req):
                    continue
            if new and exact and counts[new] + 1 != comp.required[j][new]:
                continue
            yield replace_move(emp_a, day, new)


def greedy_initial(instance: ProblemInstance, seed: int = 0) -> Roster:
    """Seeded coverage filler: day by day, assign each demanded shift to the
    least-loaded eligible employees.  Raises InfeasibleRosterError when a
    demand cannot be met."""
    comp = compiled(instance)
    rng = random.Random(seed)
    roster = Roster.empty(instance.n, instance.d)
    for emp in instance.employees:
        for day, shift in emp.fixed_assignments:
            roster.set_cell(emp.id, day, shift)
    minutes = [0] * instance.n
    for i in range(instance.n):
        minutes[i] = sum(comp.dur[c] for c in roster.rows[i])
    min_rest = instance.hard_constraints.min_rest_minutes
    fixed = comp.fixed
    for day in range(1, instance.d + 1):
        j = day - 1
        for k in range(1, instance.s + 1):
            have = sum(1 for i in range(instance.n) if roster.rows[i][j] == k)
            need = comp.required[j][k] - have
            if need < 0 and instance.hard_constraints.coverage_exact:
                raise InfeasibleRosterError(
                    f"fixed assignments exceed coverage on day {day} shift {k}")
            ranked = []
            for i in range(instance.n):
                if roster.rows[i][j] != 0 or (i + 1, day) in fixed:
                    continue
                if not comp.can_work[i][k]:
                    continue
                if not _rest_ok(comp, roster.rows[i], j, k, min_rest):
                    continue
                ranked.append((minutes[i], rng.random(), i))
            ranked.sort()
            if len(ranked) < need:
                raise InfeasibleRosterError(
                    f"cannot cover day {day} shift {k}: "
                    f"need {need}, only {len(ranked)} eligible")
            for _, _, i in ranked[:need]:
                roster.rows[i][j] = k
                minutes[i] += comp.dur[k]
    return roster


def _require_feasible(instance: ProblemInstance, roster: Roster) -> None:
    report = check_hard(instance, roster)
    if not report.ok:
        first = report.violations[0]
        raise InfeasibleRosterError(
            f"initial roster infeasible: {first.rule} at employee "
            f"{first.employee} day {first.day} ({first.detail}); "
            f"{len(report.violations)} violation(s) total")


def _classification(scorer, roster: Roster, cand: CandidateMove,
                    trace: SolverTrace) -> float:
    """Fig-5-style score: one classifier term per affected employee, with the
    scorer's neutral score standing in for the absent term of a replace."""
    j = cand.day - 1
    t0 = perf_counter_ns()
    if cand.kind == "swap":
        ra = roster.rows[cand.emp_a - 1]
        rb = roster.rows[cand.emp_b - 1]
        score = (scorer.score(cand.emp_a, ra, j, rb[j])
                 + scorer.score(cand.emp_b, rb, j, ra[j]))
        trace.classifier_calls += 2
    else:
        ra = roster.rows[cand.emp_a - 1]
        score = scorer.score(cand.emp_a, ra, j, cand.shift) + scorer.neutral_score
        trace.classifier_calls += 1
    trace.classify_ns += perf_counter_ns() - t0
    return score


def _retain_best(scored: list, filter_size) -> list:
    """Top candidates by classification, first-encountered winning ties,
    returned in enumeration order.  `scored` holds (index, cand, record,
    classification) tuples."""
    if isinstance(filter_size, float):
        k = max(1, round(filter_size * len(scored)))
    else:
        k = filter_size
    if k >= len(scored):
        return scored
    kept = sorted(scored, key=lambda t: (-t[3], t[0]))[:k]
    kept.sort(key=lambda t: t[0])
    return kept


def _evaluate_candidates(instance, roster, cands, config, ctx, trace,
                         actual_cost, observer):
    """Cost-evaluate candidates in order; returns (cand, record, cost) of the
    strictly best one, or None when `cands` is empty."""
    best = None
    for _, cand, rec, _ in cands:
        t0 = perf_counter_ns()
        delta, emp_after = evaluate_delta(instance, roster, cand,
                                          config.strategy, ctx)
        trace.cost_eval_ns += perf_counter_ns() - t0
        trace.cost_evals += 1
        if observer is not None:
            observer(roster, cand, emp_after, ctx)
        cand_cost = actual_cost + delta
        if best is None or cand_cost < best[2]:
            best = (cand, rec, cand_cost)
    return best


def _candidate_loop(instance, roster, emp_a, config, ctx, trace, actual_cost,
                    scorer, audit, observer, tabu):
    """One inner loop of the search: enumerate non-tabu candidates, optionally
    filter through the classifier, and return the best cost-evaluated one."""
    scored = []
    idx = 0
    for cand in neighborhood(instance, roster, emp_a):
        rec = tabu_record_of(roster, cand)
        if rec in tabu:
            continue
        score = _classification(scorer, roster, cand, trace) if scorer else 0.0
        scored.append((idx, cand, rec, score))
        idx += 1
    if scorer is not None:
        kept = _retain_best(scored, config.filter_size)
        if audit:
            kept_ids = {t[0] for t in kept}
            for t in scored:
                if t[0] not in kept_ids:
                    delta, _ = evaluate_delta(instance, roster, t[1],
                                              config.strategy, ctx)
                    trace.audit_rejected += 1
                    if delta < 0:
                        trace.audit_rejected_improving += 1
    else:
        kept = scored
    best = _evaluate_candidates(instance, roster, kept, config, ctx, trace,
                                actual_cost, observer)
    if scorer is not None and audit and best is not None:
        for _, cand, rec, _ in kept:
            delta, _ = evaluate_delta(instance, roster, cand,
                                      config.strategy, ctx)
            trace.audit_accepted += 1
            if delta >= 0:
                trace.audit_accepted_nonimproving += 1
    return best


def _tabu_core(instance, initial, config, scorer, audit, observer):
    _require_feasible(instance, initial)
    roster = initial.copy()
    ctx = EvalContext(instance, roster)
    trace = SolverTrace(instance=instance.name, heuristic="ts",
                        strategy=config.strategy, seed=config.seed)
    tabu = TabuList(config.tabu_capacity)
    term = TerminationInfo(instance.n)
    t_start = perf_counter_ns()
    best_roster = roster.copy()
    best_cost = actual_cost = ctx.total
    trace.record_best(0, best_cost)
    no_improve = 0
    while no_improve < config.stop:
        emp_a = select_employee(ctx.emp_cost, term, config.tabu_capacity)
        if emp_a is None:
            break
        trace.iterations += 1
        best = _candidate_loop(instance, roster, emp_a, config, ctx, trace,
                               actual_cost, scorer, audit, observer, tabu)
        if best is None:
            # Empty or fully tabu neighborhood: count a failed attempt so the
            # terminating mechanism can retire this employee.
            term.note(emp_a, math.inf)
            tabu.add(EMPTY_RECORD)
            no_improve += 1
            continue
        cand, rec, cand_cost = best
        roster = apply_move(instance, roster, cand)
        ctx.commit(roster, cand)
        trace.commits += 1
        actual_cost = cand_cost
        if actual_cost != ctx.total:
            raise AssertionError("delta evaluation drifted from the context")
        if actual_cost < best_cost:
            best_cost = actual_cost
            best_roster = roster.copy()
            term.reset()
            tabu.add(rec)
            no_improve = 0
            trace.record_best(perf_counter_ns() - t_start, best_cost)
        else:
            no_improve += 1
            term.note(emp_a, cand_cost)
            tabu.add(EMPTY_RECORD)
    trace.elapsed_ns = perf_counter_ns() - t_start
    trace.final_cost = best_cost
    return best_roster, trace


def tabu_search(instance: ProblemInstance, initial: Roster,
                config: SolverConfig, candidate_observer=None):
    """Tabu search with cost-oriented candidate evaluation (two affected
    employees per candidate, via the configured delta strategy)."""
    return _tabu_core(instance, initial, config, scorer=None, audit=False,
                      observer=candidate_observer)


def tabu_search_filtered(instance: ProblemInstance, initial: Roster,
                         config: SolverConfig, audit: bool = False,
                         candidate_observer=None):
    """Tabu search where a classifier scores every non-tabu candidate and only
    the filter_size best are cost-evaluated.  With audit=True every classified
    candidate is additionally cost-evaluated outside the timed counters to
    tally misclassifications."""
    if config.filter_classifier is None:
        raise ValueError("config.filter_classifier is required")
    return _tabu_core(instance, initial, config,
                      scorer=config.filter_classifier, audit=audit,
                      observer=candidate_observer)


def hill_climbing(instance: ProblemInstance, initial: Roster,
                  config: SolverConfig, candidate_observer=None):
    """Best-improvement hill climbing: repeatedly accept the best strictly
    improving move over per-employee neighborhoods (worst employees first);
    stop when no employee offers an improvement."""
    _require_feasible(instance, initial)
    scorer = config.filter_classifier
    roster = initial.copy()
    ctx = EvalContext(instance, roster)
    trace = SolverTrace(instance=instance.name, heuristic="hc",
                        strategy=config.strategy, seed=config.seed)
    no_tabu = TabuList(0)
    t_start = perf_counter_ns()
    best_cost = ctx.total
    trace.record_best(0, best_cost)
    improved = True
    while improved:
        improved = False
        order = sorted(range(1, instance.n + 1),
                       key=lambda e: (-ctx.emp_cost[e - 1], e))
        for emp_a in order:
            best = _candidate_loop(instance, roster, emp_a, config, ctx, trace,
                                   best_cost, scorer, False, candidate_observer,
                                   no_tabu)
            if best is None or best[2] >= best_cost:
                continue
            cand, _, cand_cost = best
            roster = apply_move(instance, roster, cand)
            ctx.commit(roster, cand)
            trace.commits += 1
            trace.iterations += 1
            best_cost = cand_cost
            trace.record_best(perf_counter_ns() - t_start, best_cost)
            improved = True
            break
    trace.elapsed_ns = perf_counter_ns() - t_start
    trace.final_cost = best_cost
    return roster, trace


def simulated_annealing(instance: ProblemInstance, initial: Roster,
                        config: SolverConfig, candidate_observer=None):
    """Single random neighbor per step, accepted when non-worsening or with
    probability exp(-delta/T); T cools geometrically.  With a filter,
    filter_size candidates are sampled and only the best-classified one is
    cost-evaluated."""
    _require_feasible(instance, initial)
    scorer = config.filter_classifier
    rng = random.Random(config.seed)
    roster = initial.copy()
    ctx = EvalContext(instance, roster)
    trace = SolverTrace(instance=instance.name, heuristic="sa",
                        strategy=config.strategy, seed=config.seed)
    t_start = perf_counter_ns()
    best_roster = roster.copy()
    best_cost = actual_cost = ctx.total
    trace.record_best(0, best_cost)
    temp = config.sa_initial_temp
    no_improve = 0
    while no_improve < config.stop:
        emp_a = rng.randrange(1, instance.n + 1)
        cands = list(neighborhood(instance, roster, emp_a))
        if not cands:
            no_improve += 1
            temp *= config.sa_cooling
            continue
        trace.iterations += 1
        if scorer is not None:
            if isinstance(config.filter_size, float):
                k = max(1, round(config.filter_size * len(cands)))
            else:
                k = min(config.filter_size, len(cands))
            picks = rng.sample(cands, k)
            scored = [(i, c, None, _classification(scorer, roster, c, trace))
                      for i, c in enumerate(picks)]
            cand = max(scored, key=lambda t: (t[3], -t[0]))[1]
        else:
            cand = cands[rng.randrange(len(cands))]
        t0 = perf_counter_ns()
        delta, emp_after = evaluate_delta(instance, roster, cand,
                                          config.strategy, ctx)
        trace.cost_eval_ns += perf_counter_ns() - t0
        trace.cost_evals += 1
        if candidate_observer is not None:
            candidate_observer(roster, cand, emp_after, ctx)
        accept = delta <= 0 or rng.random() < math.exp(-delta / temp)
        if accept:
            roster = apply_move(instance, roster, cand)
            ctx.commit(roster, cand)
            trace.commits += 1
            actual_cost += delta
            if actual_cost < best_cost:
                best_cost = actual_cost
                best_roster = roster.copy()
                no_improve = 0
                trace.record_best(perf_counter_ns() - t_start, best_cost)
            else:
                no_improve += 1
        else:
            no_improve += 1
        temp *= config.sa_cooling
    trace.elapsed_ns = perf_counter_ns() - t_start
    trace.final_cost = best_cost
    return best_roster, trace


def run_heuristic(instance: ProblemInstance, initial: Roster,
                  config: SolverConfig, audit: bool = False,
                  candidate_observer=None):
    """Dispatch on config.heuristic (and on the presence of a filter)."""
    if config.heuristic == "ts":
        if config.filter_classifier is not None:
            return tabu_search_filtered(instance, initial, config, audit=audit,
                                        candidate_observer=candidate_observer)
        return tabu_search(instance, initial, config,
                           candidate_observer=candidate_observer)
    if config.heuristic == "hc":
        return hill_climbing(instance, initial, config,
                             candidate_observer=candidate_observer)
    return simulated_annealing(instance, initial, config,
                               candidate_observer=candidate_observer)
