"""Hard-rule feasibility checks and the soft-constraint objective.

The objective is a sum of non-negative integer penalties, decomposed per
employee so that total == sum(per-employee costs) holds exactly.  Four
soft-constraint kinds are supported:

  pattern       count matches of a token sequence (shift label, O, *) inside
                a date window; penalize shortfall below min and excess above max
  block         runs of consecutive working days; penalize blocks whose summed
                work exceeds max_work and adjacent blocks resting less than min_rest
  workload      penalize |assigned minutes - contract workload| per employee
  shiftbalance  penalize the spread between the most and least used shift type
                beyond a tolerance

Five evaluation strategies compute the exact objective change of a move
while performing different amounts of work:

  eval  re-evaluate every employee on every constraint (after state)
  dc    every employee, but only constraints the move can affect
  de    only the 1-2 affected employees, every constraint
  dec   affected employees x affected constraints
  da    like dec, but each constraint is re-evaluated only on the date
        window that is decisive for its penalty, with cached tallies
        supplying everything outside that window

All five return identical deltas; an instrumentation counter tracks the
work units spent so the ordering eval >= dc, eval >= de >= dec >= da can
be asserted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import (
    DAY_OFF, OFF_LABEL, CandidateMove, InstanceFormatError,
    InstanceSemanticError, ProblemInstance, Roster, SWAP,
)

PATTERN = "pattern"
BLOCK = "block"
WORKLOAD = "workload"
SHIFTBALANCE = "shiftbalance"

STRATEGY_EVAL = "eval"
STRATEGY_DC = "dc"
STRATEGY_DE = "de"
STRATEGY_DEC = "dec"
STRATEGY_DA = "da"
STRATEGIES = (STRATEGY_EVAL, STRATEGY_DC, STRATEGY_DE, STRATEGY_DEC, STRATEGY_DA)


class ContextDriftError(RuntimeError):
    """The evaluation context no longer matches a from-scratch recomputation."""


@dataclass(frozen=True)
class SoftConstraintSpec:
    """One soft constraint as declared in the instance file."""

    kind: str
    weight: int
    scope: frozenset[int] | None = None      # None means all employees
    pattern: str | None = None               # pattern kind
    min_count: int = 0
    max_count: int = 0
    window: tuple[int, int] | None = None
    max_work_minutes: int = 0                # block kind
    min_rest_minutes: int = 0
    tolerance: int = 0                       # shiftbalance kind

    def applies_to(self, emp_id: int) -> bool:
        return self.scope is None or emp_id in self.scope

    def validate(self, inst: ProblemInstance, path: str) -> None:
        if self.kind not in (PATTERN, BLOCK, WORKLOAD, SHIFTBALANCE):
            raise InstanceSemanticError(f"unknown kind {self.kind!r}", path + ".kind")
        if self.weight < 0:
            raise InstanceSemanticError("weight must be >= 0", path + ".weight")
        if self.scope is not None:
            for e in self.scope:
                if not 1 <= e <= inst.n:
                    raise InstanceSemanticError(f"employee {e} out of 1..{inst.n}",
                                                path + ".scope")
        if self.kind == PATTERN:
            if not self.pattern:
                raise InstanceSemanticError("pattern must be non-empty", path + ".pattern")
            labels = {st.label for st in inst.shift_types if len(st.label) == 1}
            for ch in self.pattern:
                if ch not in labels and ch not in (OFF_LABEL, "*"):
                    raise InstanceSemanticError(
                        f"pattern symbol {ch!r} is not a shift label, 'O' or '*'",
                        path + ".pattern")
            lo, hi = self.window
            if not (1 <= lo <= hi <= inst.d):
                raise InstanceSemanticError(
                    f"window {lo}..{hi} outside 1..{inst.d}", path + ".window")
            if self.min_count < 0 or self.max_count < self.min_count:
                raise InstanceSemanticError("need 0 <= min <= max", path + ".min")
        elif self.kind == BLOCK:
            if self.max_work_minutes <= 0 or self.min_rest_minutes < 0:
                raise InstanceSemanticError("bad block parameters", path)
        elif self.kind == SHIFTBALANCE:
            if self.tolerance < 0:
                raise InstanceSemanticError("tolerance must be >= 0", path + ".tolerance")

    def to_line(self) -> str:
        scope = ""
        if self.scope is not None:
            scope = " scope=" + ",".join(str(e) for e in sorted(self.scope))
        if self.kind == PATTERN:
            lo, hi = self.window
            return (f'soft pattern "{self.pattern}" min={self.min_count} '
                    f"max={self.max_count} window={lo}..{hi} weight={self.weight}{scope}")
        if self.kind == BLOCK:
            return (f"soft block max_work={self.max_work_minutes} "
                    f"min_rest={self.min_rest_minutes} weight={self.weight}{scope}")
        if self.kind == WORKLOAD:
            return f"soft workload weight={self.weight}{scope}"
        return f"soft shiftbalance tolerance={self.tolerance} weight={self.weight}{scope}"


def parse_soft_line(tokens: list[str], lineno: int) -> SoftConstraintSpec:
    """Parse the tokens after 'soft' of one constraint line."""
    kind = tokens[0]
    kv = {}
    pattern = None
    for tok in tokens[1:]:
        if "=" in tok:
            k, v = tok.split("=", 1)
            kv[k] = v
        elif pattern is None and kind == PATTERN:
            pattern = tok
        else:
            raise InstanceFormatError(f"unexpected token {tok!r}", lineno)
    scope = None
    if "scope" in kv:
        scope = frozenset(int(x) for x in kv.pop("scope").split(","))
    try:
        weight = int(kv.pop("weight"))
        if kind == PATTERN:
            lo, hi = kv.pop("window").split("..")
            return SoftConstraintSpec(
                kind=PATTERN, weight=weight, scope=scope, pattern=pattern,
                min_count=int(kv.pop("min")), max_count=int(kv.pop("max")),
                window=(int(lo), int(hi)))
        if kind == BLOCK:
            return SoftConstraintSpec(
                kind=BLOCK, weight=weight, scope=scope,
                max_work_minutes=int(kv.pop("max_work")),
                min_rest_minutes=int(kv.pop("min_rest")))
        if kind == WORKLOAD:
            return SoftConstraintSpec(kind=WORKLOAD, weight=weight, scope=scope)
        if kind == SHIFTBALANCE:
            return SoftConstraintSpec(kind=SHIFTBALANCE, weight=weight, scope=scope,
                                      tolerance=int(kv.pop("tolerance")))
    except KeyError as exc:
        raise InstanceFormatError(f"missing field {exc.args[0]!r}", lineno) from None
    raise InstanceFormatError(f"unknown soft constraint kind {kind!r}", lineno)


# ---------------------------------------------------------------------------
# Compiled form
# ---------------------------------------------------------------------------

_K_PATTERN, _K_BLOCK, _K_WORKLOAD, _K_BALANCE = 0, 1, 2, 3


class _Compiled:
    """Per-constraint evaluation data with 0-based indices."""

    __slots__ = ("kind", "weight", "toks", "s_lo", "s_hi", "mn", "mx",
                 "max_work", "min_rest", "tolerance", "scope_idx", "in_scope",
                 "relevant", "full_units")

    def __init__(self, spec: SoftConstraintSpec, inst: ProblemInstance):
        d, n = inst.d, inst.n
        self.weight = spec.weight
        if spec.scope is None:
            self.scope_idx = tuple(range(n))
            self.in_scope = [True] * n
        else:
            self.scope_idx = tuple(e - 1 for e in sorted(spec.scope))
            self.in_scope = [e + 1 in spec.scope for e in range(n)]
        if spec.kind == PATTERN:
            self.kind = _K_PATTERN
            label_to_id = {st.label: st.id for st in inst.shift_types}
            self.toks = tuple(
                DAY_OFF if ch == OFF_LABEL else (-1 if ch == "*" else label_to_id[ch])
                for ch in spec.pattern)
            lo, hi = spec.window
            self.s_lo = lo - 1
            self.s_hi = hi - len(self.toks)      # last valid 0-based start
            self.mn, self.mx = spec.min_count, spec.max_count
            self.full_units = hi - lo + 1
            self.relevant = [self.s_lo <= j <= hi - 1 and self.s_hi >= self.s_lo
                             for j in range(d)]
        else:
            self.toks = ()
            self.s_lo = self.s_hi = -1
            self.mn = self.mx = 0
            self.full_units = d
            self.relevant = [True] * d
            if spec.kind == BLOCK:
                self.kind = _K_BLOCK
                self.max_work = spec.max_work_minutes
                self.min_rest = spec.min_rest_minutes
            elif spec.kind == WORKLOAD:
                self.kind = _K_WORKLOAD
            else:
                self.kind = _K_BALANCE
                self.tolerance = spec.tolerance


class CompiledInstance:
    """Evaluation tables shared by all strategies and the hard checker."""

    def __init__(self, inst: ProblemInstance):
        self.inst = inst
        self.n, self.d, self.s = inst.n, inst.d, inst.s
        self.dur = [0] + [st.duration_minutes for st in inst.shift_types]
        self.start_min = [0] + [st.start_minute for st in inst.shift_types]
        self.end_min = [0] + [st.end_minute for st in inst.shift_types]
        self.skill_of_shift = [None] + [st.required_skill for st in inst.shift_types]
        self.targets = [e.contract_workload_minutes for e in inst.employees]
        self.fixed = inst.fixed_cells()
        self.can_work = [
            [True] + [st.required_skill is None or st.required_skill in emp.skills
                      for st in inst.shift_types]
            for emp in inst.employees
        ]
        self.cons = [_Compiled(sc, inst) for sc in inst.soft_constraints]
        self.scoped_by_emp = [
            tuple(ci for ci, c in enumerate(self.cons) if c.in_scope[i])
            for i in range(inst.n)
        ]
        self.required = [[inst.required(j + 1, k) for k in range(inst.s + 1)]
                         for j in range(inst.d)]


def compiled(inst: ProblemInstance) -> CompiledInstance:
    comp = inst.__dict__.get("_compiled")
    if comp is None:
        comp = CompiledInstance(inst)
        object.__setattr__(inst, "_compiled", comp)
    return comp


# ---------------------------------------------------------------------------
# Row-level evaluation primitives
# ---------------------------------------------------------------------------

def _count_matches(row: list[int], toks, s_lo: int, s_hi: int) -> int:
    cnt = 0
    L = len(toks)
    for p in range(s_lo, s_hi + 1):
        ok = True
        for q in range(L):
            cell = row[p + q]
            t = toks[q]
            if t == 0:
                if cell != 0:
                    ok = False
                    break
            elif t == -1:
                if cell == 0:
                    ok = False
                    break
            elif cell != t:
                ok = False
                break
        if ok:
            cnt += 1
    return cnt


def _pattern_pen(c: _Compiled, count: int) -> int:
    pen = 0
    if count < c.mn:
        pen = c.mn - count
    elif count > c.mx:
        pen = count - c.mx
    return c.weight * pen


def _row_runs(row: list[int], dur: list[int]):
    """Maximal runs of working days: (first_day, last_day, work_minutes,
    first_shift, last_shift), all 0-based."""
    runs = []
    d = len(row)
    j = 0
    while j < d:
        if row[j]:
            a = j
            wm = 0
            while j < d and row[j]:
                wm += dur[row[j]]
                j += 1
            runs.append((a, j - 1, wm, row[a], row[j - 1]))
        else:
            j += 1
    return runs


def _block_pen_from_runs(c: _Compiled, runs, start_min, end_min) -> int:
    viol = 0
    prev = None
    for r in runs:
        if r[2] > c.max_work:
            viol += 1
        if prev is not None:
            rest = r[0] * 1440 + start_min[r[3]] - (prev[1] * 1440 + end_min[prev[4]])
            if rest < c.min_rest:
                viol += 1
        prev = r
    return c.weight * viol


def _eval_one(comp: CompiledInstance, c: _Compiled, row: list[int], i: int) -> int:
    """Full-row penalty of one constraint for employee index i."""
    k = c.kind
    if k == _K_PATTERN:
        return _pattern_pen(c, _count_matches(row, c.toks, c.s_lo, c.s_hi))
    if k == _K_BLOCK:
        return _block_pen_from_runs(c, _row_runs(row, comp.dur),
                                    comp.start_min, comp.end_min)
    if k == _K_WORKLOAD:
        dur = comp.dur
        total = 0
        for cell in row:
            total += dur[cell]
        return c.weight * abs(total - comp.targets[i])
    counts = [0] * (comp.s + 1)
    for cell in row:
        counts[cell] += 1
    spread = max(counts[1:]) - min(counts[1:])
    return c.weight * max(0, spread - c.tolerance)


# ---------------------------------------------------------------------------
# Results and hard checks
# ---------------------------------------------------------------------------

@dataclass
class EvaluationResult:
    total_cost: int
    per_employee: list[int]
    per_constraint: dict[int, int] | None = None   # constraint index -> cost


@dataclass(frozen=True)
class HardViolation:
    rule: str                    # skill | rest | fixed | coverage
    employee: int | None = None  # 1-based, when applicable
    day: int | None = None
    shift: int | None = None
    detail: str = ""


@dataclass
class FeasibilityReport:
    violations: list[HardViolation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_hard(inst: ProblemInstance, roster: Roster) -> FeasibilityReport:
    """Report every hard-rule violation; an empty report means feasible."""
    comp = compiled(inst)
    report = FeasibilityReport()
    add = report.violations.append
    for i, emp in enumerate(inst.employees):
        row = roster.rows[i]
        for j, cell in enumerate(row):
            if cell:
                skill = comp.skill_of_shift[cell]
                if skill is not None and skill not in emp.skills:
                    add(HardViolation("skill", emp.id, j + 1, cell,
                                      f"requires skill {skill!r}"))
        min_rest = inst.hard_constraints.min_rest_minutes
        if min_rest > 0:
            for j in range(inst.d - 1):
                a, b = row[j], row[j + 1]
                if a and b:
                    gap = ((j + 1) * 1440 + comp.start_min[b]
                           - (j * 1440 + comp.end_min[a]))
                    if gap < min_rest:
                        add(HardViolation("rest", emp.id, j + 1, a,
                                          f"gap {gap} min < {min_rest} min"))
        for day, shift in emp.fixed_assignments:
            if roster.cell(emp.id, day) != shift:
                add(HardViolation("fixed", emp.id, day, shift,
                                  f"cell is {roster.cell(emp.id, day)}"))
    exact = inst.hard_constraints.coverage_exact
    for j in range(inst.d):
        counts = [0] * (inst.s + 1)
        for i in range(inst.n):
            counts[roster.rows[i][j]] += 1
        for k in range(1, inst.s + 1):
            req = comp.required[j][k]
            got = counts[k]
            if (exact and got != req) or (not exact and got < req):
                add(HardViolation("coverage", None, j + 1, k,
                                  f"have {got}, need {'=' if exact else '>='}{req}"))
    return report


def evaluate_full(inst: ProblemInstance, roster: Roster) -> EvaluationResult:
    """Exact objective over all employees, with per-constraint breakdown."""
    comp = compiled(inst)
    per_emp = [0] * inst.n
    per_con = {ci: 0 for ci in range(len(comp.cons))}
    for i in range(inst.n):
        row = roster.rows[i]
        for ci in comp.scoped_by_emp[i]:
            p = _eval_one(comp, comp.cons[ci], row, i)
            per_emp[i] += p
            per_con[ci] += p
    return EvaluationResult(sum(per_emp), per_emp, per_con)


def evaluate_employee(inst: ProblemInstance, roster: Roster, emp_id: int) -> int:
    """Soft penalty attributable to one employee."""
    comp = compiled(inst)
    i = emp_id - 1
    row = roster.rows[i]
    return sum(_eval_one(comp, comp.cons[ci], row, i) for ci in comp.scoped_by_emp[i])


# ---------------------------------------------------------------------------
# Evaluation context: caches enabling the delta strategies
# ---------------------------------------------------------------------------

class EvalContext:
    """Single-owner cache of penalties and tallies for one solver run.

    Holds, for the current roster: per-(employee, constraint) penalties,
    pattern match tallies by start position, working-day runs, workload
    minutes, and shift-type counts.  Probing via evaluate_delta never
    mutates the context; commit() re-syncs it after a move is applied.
    """

    def __init__(self, inst: ProblemInstance, roster: Roster):
        self.comp = compiled(inst)
        self.inst = inst
        n, ncons = inst.n, len(self.comp.cons)
        self.pen = [[0] * ncons for _ in range(n)]
        self.pat_hits: list[list[list[int] | None]] = [
            [None] * ncons for _ in range(n)]
        self.pat_count = [[0] * ncons for _ in range(n)]
        self.runs: list[list] = [[] for _ in range(n)]
        self.work = [0] * n
        self.tcounts = [[0] * (inst.s + 1) for _ in range(n)]
        self.emp_cost = [0] * n
        self.total = 0
        self.units = 0           # instrumentation: constraint-evaluation units
        self.probes = 0
        for i in range(n):
            self._refresh(roster.rows[i], i)

    def _refresh(self, row: list[int], i: int) -> None:
        comp = self.comp
        old = self.emp_cost[i]
        cost = 0
        self.runs[i] = _row_runs(row, comp.dur)
        self.work[i] = sum(comp.dur[cell] for cell in row)
        counts = [0] * (comp.s + 1)
        for cell in row:
            counts[cell] += 1
        self.tcounts[i] = counts
        for ci in comp.scoped_by_emp[i]:
            c = comp.cons[ci]
            if c.kind == _K_PATTERN:
                hits = [0] * max(0, c.s_hi - c.s_lo + 1)
                cnt = 0
                for p in range(c.s_lo, c.s_hi + 1):
                    if _count_matches(row, c.toks, p, p):
                        hits[p - c.s_lo] = 1
                        cnt += 1
                self.pat_hits[i][ci] = hits
                self.pat_count[i][ci] = cnt
                p_cost = _pattern_pen(c, cnt)
            else:
                p_cost = _eval_one(comp, c, row, i)
            self.pen[i][ci] = p_cost
            cost += p_cost
        self.emp_cost[i] = cost
        self.total += cost - old

    def commit(self, roster: Roster, move: CandidateMove) -> None:
        """Re-sync the caches after `move` was applied to `roster`."""
        for emp in move.affected_employees():
            self._refresh(roster.rows[emp - 1], emp - 1)

    def verify(self, roster: Roster) -> None:
        """Raise ContextDriftError unless the caches match a fresh build."""
        fresh = EvalContext(self.inst, roster)
        if (fresh.pen != self.pen or fresh.total != self.total
                or fresh.emp_cost != self.emp_cost
                or fresh.pat_count != self.pat_count
                or fresh.runs != self.runs or fresh.work != self.work
                or fresh.tcounts != self.tcounts):
            raise ContextDriftError("evaluation context does not match the roster")


def _after_rows(roster: Roster, move: CandidateMove) -> dict[int, list[int]]:
    """0-based employee index -> that employee's post-move row."""
    j = move.day - 1
    ia = move.emp_a - 1
    if move.kind == SWAP:
        ib = move.emp_b - 1
        ra = roster.rows[ia][:]
        rb = roster.rows[ib][:]
        ra[j], rb[j] = rb[j], ra[j]
        return {ia: ra, ib: rb}
    ra = roster.rows[ia][:]
    ra[j] = move.shift
    return {ia: ra}


def _da_delta(ctx: EvalContext, c: _Compiled, ci: int, i: int,
              before_row: list[int], after_row: list[int], j: int) -> tuple[int, int]:
    """Windowed re-evaluation of one constraint; returns (delta, units)."""
    comp = ctx.comp
    k = c.kind
    if k == _K_WORKLOAD:
        new_work = ctx.work[i] - comp.dur[before_row[j]] + comp.dur[after_row[j]]
        pen = c.weight * abs(new_work - comp.targets[i])
        return pen - ctx.pen[i][ci], 1
    if k == _K_BALANCE:
        counts = ctx.tcounts[i][:]
        counts[before_row[j]] -= 1
        counts[after_row[j]] += 1
        spread = max(counts[1:]) - min(counts[1:])
        pen = c.weight * max(0, spread - c.tolerance)
        return pen - ctx.pen[i][ci], 1
    if k == _K_PATTERN:
        L = len(c.toks)
        lo = max(c.s_lo, j - L + 1)
        hi = min(c.s_hi, j)
        if lo > hi:
            return 0, 0
        hits = ctx.pat_hits[i][ci]
        before_local = 0
        for p in range(lo, hi + 1):
            before_local += hits[p - c.s_lo]
        after_local = _count_matches(after_row, c.toks, lo, hi)
        new_count = ctx.pat_count[i][ci] - before_local + after_local
        pen = _pattern_pen(c, new_count)
        return pen - ctx.pen[i][ci], hi - lo + 1
    # block: re-evaluate the day-off-bounded segment around the changed day,
    # keeping the nearest runs outside it so boundary rest gaps stay exact.
    runs = ctx.runs[i]
    prv = cur = nxt = None
    for r in runs:
        if r[1] < j:
            prv = r
        elif r[0] <= j:
            cur = r
        else:
            nxt = r
            break
    d = comp.d
    if cur is not None:
        seg_lo, seg_hi = cur[0], cur[1]
    else:
        seg_lo = prv[0] if (prv is not None and prv[1] == j - 1) else j
        seg_hi = nxt[1] if (nxt is not None and nxt[0] == j + 1) else j
    before_chain = []
    prev_out = next_out = None
    for r in runs:
        if r[1] < seg_lo:
            prev_out = r
        elif r[0] > seg_hi:
            next_out = r
            break
        else:
            before_chain.append(r)
    # After-side runs inside the segment only.
    after_seg = []
    p = seg_lo
    while p <= seg_hi:
        if after_row[p]:
            a = p
            wm = 0
            while p <= seg_hi and after_row[p]:
                wm += comp.dur[after_row[p]]
                p += 1
            after_seg.append((a, p - 1, wm, after_row[a], after_row[p - 1]))
        else:
            p += 1
    # Work violations of the two boundary runs appear on both sides of the
    # subtraction, so they cancel and need no special handling.
    head = [prev_out] if prev_out is not None else []
    tail = [next_out] if next_out is not None else []
    pen_before = _block_pen_from_runs(c, head + before_chain + tail,
                                      comp.start_min, comp.end_min)
    pen_after = _block_pen_from_runs(c, head + after_seg + tail,
                                     comp.start_min, comp.end_min)
    return pen_after - pen_before, seg_hi - seg_lo + 1


def evaluate_delta(inst: ProblemInstance, roster: Roster, move: CandidateMove,
                   strategy: str, ctx: EvalContext) -> tuple[int, dict[int, int]]:
    """Exact objective change of `move`, plus post-move costs of the
    affected employees.  The context is read, never written (probe mode);
    call ctx.commit() after applying a move you decided to keep."""
    comp = ctx.comp
    changed = _after_rows(roster, move)
    j = move.day - 1
    ctx.probes += 1

    if strategy == STRATEGY_DA:
        delta = 0
        emp_after = {}
        for i, after_row in changed.items():
            before_row = roster.rows[i]
            d_i = 0
            for ci in comp.scoped_by_emp[i]:
                c = comp.cons[ci]
                if not c.relevant[j]:
                    continue
                dd, units = _da_delta(ctx, c, ci, i, before_row, after_row, j)
                d_i += dd
                ctx.units += units
            delta += d_i
            emp_after[i + 1] = ctx.emp_cost[i] + d_i
        return delta, emp_after

    if strategy in (STRATEGY_DE, STRATEGY_DEC):
        only_relevant = strategy == STRATEGY_DEC
        delta = 0
        emp_after = {}
        for i, after_row in changed.items():
            d_i = 0
            for ci in comp.scoped_by_emp[i]:
                c = comp.cons[ci]
                if only_relevant and not c.relevant[j]:
                    continue
                d_i += _eval_one(comp, c, after_row, i) - ctx.pen[i][ci]
                ctx.units += c.full_units
            delta += d_i
            emp_after[i + 1] = ctx.emp_cost[i] + d_i
        return delta, emp_after

    if strategy == STRATEGY_DC:
        delta = 0
        emp_delta = {i: 0 for i in changed}
        for ci, c in enumerate(comp.cons):
            if not c.relevant[j]:
                continue
            if not any(c.in_scope[i] for i in changed):
                continue
            for i in c.scope_idx:
                row = changed.get(i)
                p = _eval_one(comp, c, row if row is not None else roster.rows[i], i)
                ctx.units += c.full_units
                diff = p - ctx.pen[i][ci]
                delta += diff
                if row is not None:
                    emp_delta[i] += diff
        return delta, {i + 1: ctx.emp_cost[i] + d for i, d in emp_delta.items()}

    if strategy == STRATEGY_EVAL:
        total_after = 0
        emp_after = {}
        for i in range(comp.n):
            row = changed.get(i)
            if row is None:
                row = roster.rows[i]
            cost = 0
            for ci in comp.scoped_by_emp[i]:
                cost += _eval_one(comp, comp.cons[ci], row, i)
                ctx.units += comp.cons[ci].full_units
            total_after += cost
            if i in changed:
                emp_after[i + 1] = cost
        return total_after - ctx.total, emp_after

    raise ValueError(f"unknown strategy {strategy!r}")
