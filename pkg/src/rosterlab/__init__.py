"""Nurse rostering toolchain: solvers, exact delta evaluation, and
classifier-filtered candidate search with training and benchmarking."""

from .model import (
    CandidateMove, CoverageDemand, Employee, HardConfig, ProblemInstance,
    Roster, ShiftType, apply_move, parse_instance, parse_roster,
    replace_move, serialize_instance, serialize_roster, swap_move,
    tabu_record_of,
)
from .constraints import (
    STRATEGIES, EvalContext, EvaluationResult, FeasibilityReport,
    SoftConstraintSpec, check_hard, evaluate_delta, evaluate_employee,
    evaluate_full,
)

__all__ = [
    "CandidateMove", "CoverageDemand", "Employee", "HardConfig",
    "ProblemInstance", "Roster", "ShiftType", "apply_move",
    "parse_instance", "parse_roster", "replace_move", "serialize_instance",
    "serialize_roster", "swap_move", "tabu_record_of",
    "STRATEGIES", "EvalContext", "EvaluationResult", "FeasibilityReport",
    "SoftConstraintSpec", "check_hard", "evaluate_delta",
    "evaluate_employee", "evaluate_full",
]
