"""Four-stage benchmark (jacobian, codegen, prepare, evaluate) with CSV output."""

from __future__ import annotations

import csv
import random
import time
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

from .calculus import jacobian
from .codegen import StraightLineProgram, emit_dag, emit_tree, render_source
from .problems import GENERATORS, sample_inputs
from .term import Mode, Session, count_nodes
from .vm import prepare, run

CSV_HEADER = ("family", "size", "mode", "stage", "repeat", "time_ns",
              "allocated_nodes", "distinct_nodes", "instructions", "intern_hit_rate")
STAGES = ("jacobian", "codegen", "prepare", "evaluate")
EVAL_SAMPLES = 1000
# rough CPython footprint of one node: slotted object + operand tuple
NODE_BYTES_ESTIMATE = 120


@dataclass(frozen=True)
class ProblemSpec:
    family: str
    size: int
    seed: int = 0
    mode: Mode = Mode.CONSING
    repeats: int = 1

    def __post_init__(self) -> None:
        if self.family not in GENERATORS:
            raise ValueError(f"unknown family {self.family!r}")
        minimum = 2 if self.family == "reaction" else 1
        if self.size < minimum:
            raise ValueError(f"{self.family} size must be >= {minimum}")
        if self.repeats < 1:
            raise ValueError("repeats must be positive")
        object.__setattr__(self, "mode", Mode(self.mode))


@dataclass(frozen=True)
class BenchRecord:
    family: str
    size: int
    mode: str
    stage: str
    time_ns: int
    allocated_nodes: int = 0
    distinct_nodes: int = 0
    instructions: int = 0
    intern_hit_rate: float = 0.0
    repeat_index: int = 0

    @property
    def estimated_bytes(self) -> int:
        return self.allocated_nodes * NODE_BYTES_ESTIMATE

    def csv_row(self) -> list:
        return [self.family, self.size, self.mode, self.stage, self.repeat_index,
                self.time_ns, self.allocated_nodes, self.distinct_nodes,
                self.instructions, f"{self.intern_hit_rate:.6f}"]


def build_problem(spec: ProblemSpec, session: Session):
    return GENERATORS[spec.family](spec.size, spec.seed, session)


def build_program(spec: ProblemSpec) -> tuple[Session, StraightLineProgram]:
    """Generate the problem and lower its row-major Jacobian."""
    session = Session(spec.mode)
    eqs, variables = build_problem(spec, session)
    jac = jacobian(eqs, variables, session)
    emit = emit_dag if session.consing else emit_tree
    return session, emit(jac.entries(), variables)


def jacobian_source(spec: ProblemSpec) -> str:
    _, program = build_program(spec)
    return render_source(program, f"{spec.family}_{spec.size}_jacobian")


def run_bench(spec: ProblemSpec) -> list[BenchRecord]:
    records: list[BenchRecord] = []
    clock = time.perf_counter_ns
    mode = spec.mode.value

    def record(stage: str, elapsed: int, repeat: int, **metrics) -> None:
        records.append(BenchRecord(spec.family, spec.size, mode, stage, elapsed,
                                   repeat_index=repeat, **metrics))

    for rep in range(spec.repeats):
        session = Session(spec.mode)
        eqs, variables = build_problem(spec, session)

        t0 = clock()
        jac = jacobian(eqs, variables, session)
        t1 = clock()
        stats = session.stats()
        record("jacobian", t1 - t0, rep, allocated_nodes=jac.allocated_nodes,
               distinct_nodes=jac.distinct_nodes, intern_hit_rate=stats.hit_rate)

        roots = jac.entries()
        emit = emit_dag if session.consing else emit_tree
        t0 = clock()
        program = emit(roots, variables)
        t1 = clock()
        record("codegen", t1 - t0, rep, instructions=len(program))

        t0 = clock()
        prepared = prepare(program)
        t1 = clock()
        record("prepare", t1 - t0, rep, instructions=prepared.register_file_size)

        rng = random.Random(spec.seed)
        inputs = [sample_inputs(spec.family, len(variables), rng) for _ in range(EVAL_SAMPLES)]
        t0 = clock()
        for x in inputs:
            run(prepared, x)
        t1 = clock()
        record("evaluate", t1 - t0, rep, instructions=len(program))
    return records


def write_csv(records: Iterable[BenchRecord], fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow(r.csv_row())


def best_of(records: Sequence[BenchRecord]) -> dict[tuple, BenchRecord]:
    """Fastest repeat per (family, size, mode, stage)."""
    best: dict[tuple, BenchRecord] = {}
    for r in records:
        key = (r.family, r.size, r.mode, r.stage)
        if key not in best or r.time_ns < best[key].time_ns:
            best[key] = r
    return best


SHARING_HEADER = ("family", "size", "naive_allocated_nodes", "consing_distinct_nodes",
                  "sharing_ratio", "naive_instructions", "consing_instructions",
                  "instruction_ratio")


@dataclass(frozen=True)
class SharingRow:
    family: str
    size: int
    naive_allocated_nodes: int
    consing_distinct_nodes: int
    naive_instructions: int
    consing_instructions: int

    @property
    def sharing_ratio(self) -> float:
        return self.naive_allocated_nodes / self.consing_distinct_nodes

    @property
    def instruction_ratio(self) -> float:
        return self.naive_instructions / max(self.consing_instructions, 1)

    def csv_row(self) -> list:
        return [self.family, self.size, self.naive_allocated_nodes,
                self.consing_distinct_nodes, f"{self.sharing_ratio:.6f}",
                self.naive_instructions, self.consing_instructions,
                f"{self.instruction_ratio:.6f}"]


def sharing_row(consing: Sequence[BenchRecord], naive: Sequence[BenchRecord]) -> SharingRow:
    def pick(recs, stage):
        return next(r for r in recs if r.stage == stage)

    cj, nj = pick(consing, "jacobian"), pick(naive, "jacobian")
    return SharingRow(cj.family, cj.size, nj.allocated_nodes, cj.distinct_nodes,
                      pick(naive, "codegen").instructions, pick(consing, "codegen").instructions)


def sweep(family: str, sizes: Sequence[int], seed: int, repeats: int = 1
          ) -> tuple[list[BenchRecord], list[SharingRow]]:
    """Run both modes at each size; returns raw records and sharing ratios."""
    records: list[BenchRecord] = []
    rows = []
    for n in sizes:
        c = run_bench(ProblemSpec(family, n, seed, Mode.CONSING, repeats))
        nv = run_bench(ProblemSpec(family, n, seed, Mode.NAIVE, repeats))
        records += c + nv
        rows.append(sharing_row(c, nv))
    return records, rows


def write_sharing_csv(rows: Iterable[SharingRow], fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SHARING_HEADER)
    for r in rows:
        w.writerow(r.csv_row())


def demo_fig1() -> str:
    """Report for the (a+b)(c+d) ... / ... example expression."""
    s = Session(Mode.CONSING)
    a, b, c, d = s.vars("a b c d")
    x = (a + b) * (c + d)
    y = (a - b) * (c - d)
    z = (a + b) * (c - d)
    w = (a - b) * (c + d)
    term = (x + y) / (z - w)
    distinct, occurrences = count_nodes(term)
    dag = emit_dag([term], [a, b, c, d])
    tree = emit_tree([term], [a, b, c, d])
    (value,) = run(prepare(dag), [1.0, 2.0, 3.0, 4.0])
    lines = [
        f"term: {term}",
        f"distinct={distinct} occurrences={occurrences}",
        f"dag_instructions={len(dag)} tree_instructions={len(tree)}",
        f"value={value!r} at (a, b, c, d) = (1, 2, 3, 4)",
        "",
        render_source(dag, "fig1").rstrip(),
    ]
    return "\n".join(lines) + "\n"
