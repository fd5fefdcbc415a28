"""Hash-consed symbolic expressions with memoized differentiation and DAG code generation."""

from .calculus import JacobianResult, cache_stats, derivative, jacobian
from .codegen import Instruction, Ref, StraightLineProgram, emit_dag, emit_tree, render_source
from .interner import InternStats, InternTable
from .term import DomainError, Kind, Mode, Session, Term, UnboundVariable, count_nodes, deep_eq, render
from .vm import ArityMismatch, PreparedProgram, ValidationError, eval_tree, prepare, run

__all__ = [
    "ArityMismatch", "DomainError", "Instruction", "InternStats", "InternTable",
    "JacobianResult", "Kind", "Mode", "PreparedProgram", "Ref", "Session",
    "StraightLineProgram", "Term", "UnboundVariable", "ValidationError",
    "cache_stats", "count_nodes", "deep_eq", "derivative", "emit_dag", "emit_tree",
    "eval_tree", "jacobian", "prepare", "render", "render_source", "run",
]
