"""Problem instances, rosters, moves, and the native instance file format.

An instance fixes the planning horizon (d days), the shift catalogue
(s shift types, indexed 1..s, 0 meaning day off) and the employees
(indexed 1..n).  A roster is a dense n x d matrix of shift indices.
Moves are either swaps of two cells in the same day column or the
replacement of one cell, and each move projects onto a tabu record
capturing the cells it touched.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

DAY_OFF = 0
OFF_LABEL = "O"


class InstanceFormatError(ValueError):
    """Syntax error in an instance file; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class InstanceSemanticError(ValueError):
    """Semantic error (bad index, duplicate id, ...); carries a field path."""

    def __init__(self, message: str, path: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class MoveError(ValueError):
    """Raised when a move violates its preconditions (bad index, fixed cell)."""


@dataclass(frozen=True)
class ShiftType:
    id: int                       # 1..s, contiguous
    label: str                    # short tag, e.g. "D", "N"
    start_minute: int             # minutes from midnight
    duration_minutes: int
    required_skill: str | None = None

    @property
    def end_minute(self) -> int:
        return self.start_minute + self.duration_minutes


@dataclass(frozen=True)
class Employee:
    id: int                       # 1..n, contiguous
    contract_workload_minutes: int
    skills: frozenset[str] = frozenset()
    fixed_assignments: tuple[tuple[int, int], ...] = ()   # (day, shift-or-0)


@dataclass(frozen=True)
class CoverageDemand:
    day: int                      # 1..d
    shift: int                    # 1..s
    required_count: int


@dataclass(frozen=True)
class HardConfig:
    """Switches for the hard rules.

    min_rest_minutes applies to consecutive working days only; 0 disables it.
    coverage_exact selects count == required (True) or count >= required.
    """

    min_rest_minutes: int = 0
    coverage_exact: bool = True


@dataclass(frozen=True)
class ProblemInstance:
    name: str
    n: int
    d: int
    s: int
    shift_types: tuple[ShiftType, ...]
    employees: tuple[Employee, ...]
    coverage: tuple[CoverageDemand, ...]
    soft_constraints: tuple = ()          # of constraints.SoftConstraintSpec
    hard_constraints: HardConfig = HardConfig()

    def __post_init__(self):
        _validate_instance(self)

    def shift_by_label(self, label: str) -> ShiftType:
        for st in self.shift_types:
            if st.label == label:
                return st
        raise KeyError(label)

    def required(self, day: int, shift: int) -> int:
        """Coverage demand for (day, shift); missing pairs default to 0."""
        return self._coverage_map.get((day, shift), 0)

    @property
    def _coverage_map(self) -> dict[tuple[int, int], int]:
        m = self.__dict__.get("_cov_cache")
        if m is None:
            m = {(c.day, c.shift): c.required_count for c in self.coverage}
            object.__setattr__(self, "_cov_cache", m)
        return m

    def fixed_cells(self) -> dict[tuple[int, int], int]:
        """(employee id, day) -> pinned shift value, for all fixed assignments."""
        out: dict[tuple[int, int], int] = {}
        for emp in self.employees:
            for day, shift in emp.fixed_assignments:
                out[(emp.id, day)] = shift
        return out

    def contract_groups(self) -> dict[str, list[int]]:
        """Employees grouped by contract signature (workload + constraint scopes).

        Group keys are "g0", "g1", ... ordered by each group's smallest
        employee id, so the keys are stable across runs.
        """
        sig_to_emps: dict[tuple, list[int]] = {}
        for emp in self.employees:
            scoped = tuple(
                ci for ci, sc in enumerate(self.soft_constraints)
                if sc.applies_to(emp.id)
            )
            sig = (emp.contract_workload_minutes, scoped)
            sig_to_emps.setdefault(sig, []).append(emp.id)
        ordered = sorted(sig_to_emps.values(), key=min)
        return {f"g{k}": emps for k, emps in enumerate(ordered)}

    def group_of(self, emp_id: int) -> str:
        for key, emps in self.contract_groups().items():
            if emp_id in emps:
                return key
        raise KeyError(emp_id)


def _validate_instance(inst: ProblemInstance) -> None:
    if inst.n < 1:
        raise InstanceSemanticError("n must be >= 1", "n")
    if inst.d < 1:
        raise InstanceSemanticError("d must be >= 1", "d")
    if inst.s < 1:
        raise InstanceSemanticError("s must be >= 1", "s")
    if [st.id for st in inst.shift_types] != list(range(1, inst.s + 1)):
        raise InstanceSemanticError("shift ids must be 1..s contiguous", "shifts")
    labels = [st.label for st in inst.shift_types]
    if len(set(labels)) != len(labels):
        raise InstanceSemanticError("duplicate shift label", "shifts")
    if OFF_LABEL in labels or "*" in labels:
        raise InstanceSemanticError("shift label 'O' and '*' are reserved", "shifts")
    for st in inst.shift_types:
        if st.duration_minutes <= 0:
            raise InstanceSemanticError(
                "duration must be positive", f"shifts[{st.id}].duration")
    if [e.id for e in inst.employees] != list(range(1, inst.n + 1)):
        raise InstanceSemanticError("employee ids must be 1..n contiguous", "employees")
    for e in inst.employees:
        for fi, (day, shift) in enumerate(e.fixed_assignments):
            path = f"employees[{e.id}].fixed[{fi}]"
            if not 1 <= day <= inst.d:
                raise InstanceSemanticError(f"day {day} out of 1..{inst.d}", path + ".day")
            if not 0 <= shift <= inst.s:
                raise InstanceSemanticError(f"shift {shift} out of 0..{inst.s}", path + ".shift")
    seen: set[tuple[int, int]] = set()
    for ci, c in enumerate(inst.coverage):
        path = f"coverage[{ci}]"
        if not 1 <= c.day <= inst.d:
            raise InstanceSemanticError(f"day {c.day} out of 1..{inst.d}", path + ".day")
        if not 1 <= c.shift <= inst.s:
            raise InstanceSemanticError(f"shift {c.shift} out of 1..{inst.s}", path + ".shift")
        if c.required_count < 0:
            raise InstanceSemanticError("required count must be >= 0", path + ".count")
        if (c.day, c.shift) in seen:
            raise InstanceSemanticError(
                f"duplicate demand for day {c.day} shift {c.shift}", path)
        seen.add((c.day, c.shift))
    for ci, sc in enumerate(inst.soft_constraints):
        sc.validate(inst, f"constraints[{ci}]")


class Roster:
    """Dense assignment: rows[i][j] is the shift of employee i+1 on day j+1.

    Value 0 means day off.  The equivalent binary tensor view sets at most
    one bit per (employee, day), so one-shift-per-day holds structurally.
    """

    __slots__ = ("n", "d", "rows")

    def __init__(self, rows: list[list[int]]):
        self.rows = rows
        self.n = len(rows)
        self.d = len(rows[0]) if rows else 0

    @classmethod
    def empty(cls, n: int, d: int) -> "Roster":
        return cls([[DAY_OFF] * d for _ in range(n)])

    def copy(self) -> "Roster":
        return Roster([row[:] for row in self.rows])

    def cell(self, emp_id: int, day: int) -> int:
        return self.rows[emp_id - 1][day - 1]

    def set_cell(self, emp_id: int, day: int, shift: int) -> None:
        self.rows[emp_id - 1][day - 1] = shift

    def row(self, emp_id: int) -> list[int]:
        return self.rows[emp_id - 1]

    def __eq__(self, other) -> bool:
        return isinstance(other, Roster) and self.rows == other.rows

    def __hash__(self):
        return hash(tuple(tuple(r) for r in self.rows))

    def to_binary_tensor(self, s: int) -> list[list[list[int]]]:
        """The 0/1 tensor view: t[i][j][k-1] == 1 iff shift k is assigned."""
        return [
            [[1 if cell == k else 0 for k in range(1, s + 1)] for cell in row]
            for row in self.rows
        ]

    @classmethod
    def from_binary_tensor(cls, tensor: list[list[list[int]]]) -> "Roster":
        rows = []
        for trow in tensor:
            row = []
            for bits in trow:
                hot = [k + 1 for k, b in enumerate(bits) if b]
                if len(hot) > 1:
                    raise ValueError("more than one shift set for a day")
                row.append(hot[0] if hot else DAY_OFF)
            rows.append(row)
        return cls(rows)


SWAP = "swap"
REPLACE = "replace"


@dataclass(frozen=True)
class CandidateMove:
    """A swap of two cells in one day column, or a replacement of one cell.

    Swap: emp_a and emp_b exchange their (differing) cells on `day`.
    Replace: emp_a's cell on `day` becomes `shift` (which must differ).
    """

    kind: str                     # SWAP or REPLACE
    emp_a: int
    day: int
    emp_b: int | None = None      # swap only
    shift: int | None = None      # replace only

    def affected_employees(self) -> tuple[int, ...]:
        if self.kind == SWAP:
            return (self.emp_a, self.emp_b)
        return (self.emp_a,)


EMPTY_RECORD = ("empty",)


def swap_move(emp_a: int, emp_b: int, day: int) -> CandidateMove:
    return CandidateMove(kind=SWAP, emp_a=emp_a, emp_b=emp_b, day=day)


def replace_move(emp_a: int, day: int, shift: int) -> CandidateMove:
    return CandidateMove(kind=REPLACE, emp_a=emp_a, day=day, shift=shift)


def _check_move(instance: ProblemInstance, roster: Roster, move: CandidateMove) -> None:
    if not 1 <= move.day <= roster.d:
        raise MoveError(f"day {move.day} out of range")
    if not 1 <= move.emp_a <= roster.n:
        raise MoveError(f"employee {move.emp_a} out of range")
    fixed = instance.fixed_cells()
    if move.kind == SWAP:
        if move.emp_b is None or not 1 <= move.emp_b <= roster.n:
            raise MoveError(f"employee {move.emp_b} out of range")
        if move.emp_a == move.emp_b:
            raise MoveError("swap requires two distinct employees")
        a = roster.cell(move.emp_a, move.day)
        b = roster.cell(move.emp_b, move.day)
        if a == b:
            raise MoveError("swap of identical cells is a null move")
        if (move.emp_a, move.day) in fixed or (move.emp_b, move.day) in fixed:
            raise MoveError("swap touches a fixed assignment")
    else:
        if move.shift is None or not 0 <= move.shift <= instance.s:
            raise MoveError(f"shift {move.shift} out of range")
        if roster.cell(move.emp_a, move.day) == move.shift:
            raise MoveError("replace with the current cell is a null move")
        if (move.emp_a, move.day) in fixed:
            raise MoveError("replace touches a fixed assignment")


def apply_move(instance: ProblemInstance, roster: Roster, move: CandidateMove) -> Roster:
    """Return a new roster with the move applied; the input is not mutated."""
    _check_move(instance, roster, move)
    out = roster.copy()
    if move.kind == SWAP:
        a = out.cell(move.emp_a, move.day)
        b = out.cell(move.emp_b, move.day)
        out.set_cell(move.emp_a, move.day, b)
        out.set_cell(move.emp_b, move.day, a)
    else:
        out.set_cell(move.emp_a, move.day, move.shift)
    return out


def tabu_record_of(roster: Roster, move: CandidateMove) -> tuple:
    """Project a move onto its tabu tuple, using the pre-move cell contents."""
    if move.kind == SWAP:
        return (SWAP, move.emp_a, move.emp_b,
                roster.cell(move.emp_a, move.day),
                roster.cell(move.emp_b, move.day), move.day)
    return (REPLACE, move.emp_a,
            roster.cell(move.emp_a, move.day), move.shift, move.day)


# ---------------------------------------------------------------------------
# Instance file format
# ---------------------------------------------------------------------------
#
#   instance <name> n=<int> d=<int> s=<int>
#   shifts:
#     <id> <label> <start_minute> <duration> [skill]
#   employees:
#     <id> <workload_minutes> [skills=a,b] [fixed=(day,shift);...]
#   coverage:
#     <day> <shift> <count>        or        all <shift> <count>
#   constraints:
#     soft pattern "<tokens>" min=<i> max=<i> window=<a>..<b> weight=<i> [scope=1,2]
#     soft block max_work=<min> min_rest=<min> weight=<i> [scope=...]
#     soft workload weight=<i> [scope=...]
#     soft shiftbalance tolerance=<i> weight=<i> [scope=...]
#     hard rest min_gap=<minutes>
#     hard coverage mode=<exact|min>
#
# '#' starts a comment; blank lines are ignored.

_HEADER_RE = re.compile(r"^instance\s+(\S+)\s+n=(\d+)\s+d=(\d+)\s+s=(\d+)$")


def _parse_kv(tokens: list[str], lineno: int) -> dict[str, str]:
    out = {}
    for tok in tokens:
        if "=" not in tok:
            raise InstanceFormatError(f"expected key=value, got {tok!r}", lineno)
        k, v = tok.split("=", 1)
        out[k] = v
    return out


def _split_quoted(line: str, lineno: int) -> list[str]:
    """Split on whitespace, keeping double-quoted strings as single tokens."""
    toks = re.findall(r'"[^"]*"|\S+', line)
    return [t[1:-1] if t.startswith('"') else t for t in toks]


def parse_instance(text: str):
    """Parse the native instance format into a validated ProblemInstance."""
    from . import constraints as _con

    name = None
    n = d = s = None
    shifts: list[ShiftType] = []
    employees: list[Employee] = []
    coverage: dict[tuple[int, int], int] = {}
    softs: list = []
    hard_rest = 0
    hard_cov_exact = True
    section = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if name is None:
            m = _HEADER_RE.match(line)
            if not m:
                raise InstanceFormatError(
                    "expected 'instance <name> n=<int> d=<int> s=<int>'", lineno)
            name, n, d, s = m.group(1), int(m.group(2)), int(m.group(3)), int(m.group(4))
            continue
        if line.endswith(":") and line[:-1] in ("shifts", "employees", "coverage", "constraints"):
            section = line[:-1]
            continue
        if section == "shifts":
            toks = line.split()
            if len(toks) not in (4, 5):
                raise InstanceFormatError("shift line needs 4 or 5 fields", lineno)
            try:
                shifts.append(ShiftType(
                    id=int(toks[0]), label=toks[1],
                    start_minute=int(toks[2]), duration_minutes=int(toks[3]),
                    required_skill=toks[4] if len(toks) == 5 else None))
            except ValueError as exc:
                raise InstanceFormatError(str(exc), lineno) from None
        elif section == "employees":
            toks = line.split()
            if len(toks) < 2:
                raise InstanceFormatError("employee line needs id and workload", lineno)
            try:
                emp_id, workload = int(toks[0]), int(toks[1])
            except ValueError:
                raise InstanceFormatError("employee id/workload must be integers", lineno) from None
            skills: frozenset[str] = frozenset()
            fixed: list[tuple[int, int]] = []
            for tok in toks[2:]:
                kv = _parse_kv([tok], lineno)
                if "skills" in kv:
                    skills = frozenset(x for x in kv["skills"].split(",") if x)
                elif "fixed" in kv:
                    for part in kv["fixed"].split(";"):
                        m = re.fullmatch(r"\((\d+),(\S+)\)", part)
                        if not m:
                            raise InstanceFormatError(
                                f"bad fixed assignment {part!r}", lineno)
                        fixed.append((int(m.group(1)), m.group(2)))
                else:
                    raise InstanceFormatError(f"unknown employee field {tok!r}", lineno)
            employees.append((emp_id, workload, skills, tuple(fixed)))
        elif section == "coverage":
            toks = line.split()
            if len(toks) != 3:
                raise InstanceFormatError("coverage line needs 3 fields", lineno)
            if toks[0] == "all":
                shift, count = int(toks[1]), int(toks[2])
                for day in range(1, (d or 0) + 1):
                    coverage[(day, shift)] = count
            else:
                try:
                    day, shift, count = int(toks[0]), int(toks[1]), int(toks[2])
                except ValueError:
                    raise InstanceFormatError("coverage fields must be integers", lineno) from None
                coverage[(day, shift)] = count
        elif section == "constraints":
            toks = _split_quoted(line, lineno)
            if toks[0] == "hard":
                if len(toks) < 3:
                    raise InstanceFormatError("hard line needs a rule and parameters", lineno)
                kv = _parse_kv(toks[2:], lineno)
                if toks[1] == "rest":
                    hard_rest = int(kv["min_gap"])
                elif toks[1] == "coverage":
                    hard_cov_exact = kv.get("mode", "exact") == "exact"
                else:
                    raise InstanceFormatError(f"unknown hard rule {toks[1]!r}", lineno)
            elif toks[0] == "soft":
                try:
                    softs.append(_con.parse_soft_line(toks[1:], lineno))
                except (KeyError, ValueError) as exc:
                    if isinstance(exc, InstanceFormatError):
                        raise
                    raise InstanceFormatError(str(exc), lineno) from None
            else:
                raise InstanceFormatError(f"unknown constraint line {toks[0]!r}", lineno)
        else:
            raise InstanceFormatError("content outside a section", lineno)

    if name is None:
        raise InstanceFormatError("missing instance header", 1)
    # Fixed assignments were parsed with label placeholders; resolve them now.
    label_to_id = {st.label: st.id for st in shifts}
    label_to_id[OFF_LABEL] = DAY_OFF
    emps = []
    for emp_id, workload, skills, fixed in employees:
        resolved = []
        for fi, (day, shift_tok) in enumerate(fixed):
            if shift_tok.isdigit() or (shift_tok.startswith("-") and shift_tok[1:].isdigit()):
                shift = int(shift_tok)
            elif shift_tok in label_to_id:
                shift = label_to_id[shift_tok]
            else:
                raise InstanceSemanticError(
                    f"unknown shift {shift_tok!r}",
                    f"employees[{emp_id}].fixed[{fi}].shift")
            resolved.append((day, shift))
        emps.append(Employee(id=emp_id, contract_workload_minutes=workload,
                             skills=skills, fixed_assignments=tuple(resolved)))

    return ProblemInstance(
        name=name, n=n, d=d, s=s,
        shift_types=tuple(shifts),
        employees=tuple(emps),
        coverage=tuple(CoverageDemand(day, shift, cnt)
                       for (day, shift), cnt in sorted(coverage.items())),
        soft_constraints=tuple(softs),
        hard_constraints=HardConfig(min_rest_minutes=hard_rest,
                                    coverage_exact=hard_cov_exact),
    )


def serialize_instance(inst: ProblemInstance) -> str:
    """Render an instance back into the native format (parse round-trips)."""
    lines = [f"instance {inst.name} n={inst.n} d={inst.d} s={inst.s}"]
    lines.append("shifts:")
    for st in inst.shift_types:
        extra = f" {st.required_skill}" if st.required_skill else ""
        lines.append(f"{st.id} {st.label} {st.start_minute} {st.duration_minutes}{extra}")
    lines.append("employees:")
    for emp in inst.employees:
        parts = [str(emp.id), str(emp.contract_workload_minutes)]
        if emp.skills:
            parts.append("skills=" + ",".join(sorted(emp.skills)))
        if emp.fixed_assignments:
            parts.append("fixed=" + ";".join(
                f"({day},{shift})" for day, shift in emp.fixed_assignments))
        lines.append(" ".join(parts))
    lines.append("coverage:")
    for c in inst.coverage:
        lines.append(f"{c.day} {c.shift} {c.required_count}")
    lines.append("constraints:")
    if inst.hard_constraints.min_rest_minutes:
        lines.append(f"hard rest min_gap={inst.hard_constraints.min_rest_minutes}")
    if not inst.hard_constraints.coverage_exact:
        lines.append("hard coverage mode=min")
    for sc in inst.soft_constraints:
        lines.append(sc.to_line())
    return "\n".join(lines) + "\n"


def serialize_roster(inst: ProblemInstance, roster: Roster) -> str:
    """Roster as a text section using shift labels, one employee per line."""
    labels = {st.id: st.label for st in inst.shift_types}
    labels[DAY_OFF] = OFF_LABEL
    lines = [f"roster {inst.name} n={roster.n} d={roster.d}", "assignment:"]
    for i, row in enumerate(roster.rows, start=1):
        lines.append(f"{i} " + " ".join(labels[c] for c in row))
    return "\n".join(lines) + "\n"


def parse_roster(inst: ProblemInstance, text: str) -> Roster:
    ids = {st.label: st.id for st in inst.shift_types}
    ids[OFF_LABEL] = DAY_OFF
    rows: list[list[int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line or line.startswith("roster ") or line == "assignment:":
            continue
        toks = line.split()
        try:
            rows.append([ids[t] for t in toks[1:]])
        except KeyError as exc:
            raise InstanceFormatError(f"unknown shift label {exc.args[0]!r}", lineno) from None
    if len(rows) != inst.n or any(len(r) != inst.d for r in rows):
        raise InstanceSemanticError(
            f"roster shape mismatch, expected {inst.n}x{inst.d}", "assignment")
    return Roster(rows)
