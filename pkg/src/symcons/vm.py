"""Register-machine evaluation of straight-line programs, plus a tree oracle."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Mapping, Sequence

from . import numeric
from .codegen import BINARY_OPS, UNARY_OPS, StraightLineProgram
from .term import Kind, Term, UnboundVariable


class ValidationError(ValueError):
    """A program failed validation in :func:`prepare`."""


class ArityMismatch(ValueError):
    """Wrong number of inputs supplied to :func:`run`."""


class Outputs(list):
    """Program outputs; ``nonfinite`` is set when any register went inf/nan."""

    nonfinite: bool = False


_FN = {**numeric.BINARY, **numeric.UNARY}


@dataclass(frozen=True)
class PreparedProgram:
    program: StraightLineProgram
    register_file_size: int
    prep_time: float
    # flat frame layout: [params | immediates | registers]
    _code: tuple
    _consts: tuple
    _outputs: tuple
    _reg_base: int

    @property
    def n_params(self) -> int:
        return len(self.program.params)


def prepare(p: StraightLineProgram) -> PreparedProgram:
    """Validate SSA form and reference ranges, then lay out the frame."""
    start = time.perf_counter()
    n_params = len(p.params)
    n_regs = len(p.instructions)
    consts: list[float] = []
    const_slot: dict[float, int] = {}

    def slot_of(ref, i: int | None) -> int:
        where = "output" if i is None else f"instruction {i}"
        space, value = ref
        if space == "p":
            if not isinstance(value, int) or not 0 <= value < n_params:
                raise ValidationError(f"{where}: parameter slot {value} out of range")
            return value
        if space == "t":
            limit = n_regs if i is None else i
            if not isinstance(value, int) or not 0 <= value < limit:
                raise ValidationError(f"{where}: register t{value} is not defined before use")
            return -1 - value
        if space == "k":
            value = float(value)
            if not math.isfinite(value):
                raise ValidationError(f"{where}: non-finite immediate {value!r}")
            key = value  # -0.0 never reaches here: constants are normalized
            if key not in const_slot:
                const_slot[key] = len(consts)
                consts.append(value)
            return n_params + const_slot[key]
        raise ValidationError(f"{where}: unknown reference space {space!r}")

    raw = []
    for i, ins in enumerate(p.instructions):
        if ins.dest != i:
            raise ValidationError(f"instruction {i}: destination t{ins.dest} breaks single assignment")
        if ins.op in BINARY_OPS:
            arity = 2
        elif ins.op in UNARY_OPS:
            arity = 1
        else:
            raise ValidationError(f"instruction {i}: unknown op {ins.op!r}")
        if len(ins.args) != arity:
            raise ValidationError(f"instruction {i}: {ins.op} takes {arity} argument(s)")
        raw.append((ins.op, [slot_of(a, i) for a in ins.args]))
    outs = [slot_of(r, None) for r in p.outputs]

    base = n_params + len(consts)

    def fix(s: int) -> int:
        return base + (-1 - s) if s < 0 else s

    code = []
    for i, (op, slots) in enumerate(raw):
        slots = [fix(s) for s in slots]
        code.append((_FN[op], base + i, slots[0], slots[1] if len(slots) > 1 else -1))
    out_slots = tuple(fix(s) for s in outs)
    elapsed = time.perf_counter() - start
    return PreparedProgram(p, n_regs, elapsed, tuple(code), tuple(consts), out_slots, base)


def run(pp: PreparedProgram, inputs: Sequence[float]) -> Outputs:
    if len(inputs) != pp.n_params:
        raise ArityMismatch(f"expected {pp.n_params} inputs, got {len(inputs)}")
    frame = [float(x) for x in inputs]
    frame.extend(pp._consts)
    frame.extend([0.0] * pp.register_file_size)
    for fn, dest, a, b in pp._code:
        if b < 0:
            frame[dest] = fn(frame[a])
        else:
            frame[dest] = fn(frame[a], frame[b])
    out = Outputs(frame[s] for s in pp._outputs)
    isfinite = math.isfinite
    out.nonfinite = not all(isfinite(x) for x in frame[pp._reg_base:]) or not all(isfinite(x) for x in out)
    return out


def _env_by_name(env: Mapping) -> dict[str, float]:
    return {(k if isinstance(k, str) else k.name): float(v) for k, v in env.items()}


def eval_tree(root: Term, env: Mapping[Term | str, float]) -> float:
    """Recursive evaluation with the same operand order and left fold as lowering."""
    values = _env_by_name(env)
    memo: dict[int, float] = {}

    def ev(t: Term) -> float:
        hit = memo.get(id(t))
        if hit is not None:
            return hit
        kind = t.kind
        if kind is Kind.CONST:
            r = t.payload
        elif kind is Kind.VAR:
            try:
                r = values[t.payload]
            except KeyError:
                raise UnboundVariable(t.payload) from None
        elif kind is Kind.CALL:
            r = numeric.UNARY[t.payload](ev(t.operands[0]))
        else:
            fn = _KIND_FN[kind]
            ops = t.operands
            r = fn(ev(ops[0]), ev(ops[1]))
            for op in ops[2:]:
                r = fn(r, ev(op))
        memo[id(t)] = r
        return r

    return ev(root)


_KIND_FN = {Kind.ADD: numeric.add, Kind.SUB: numeric.sub, Kind.MUL: numeric.mul,
            Kind.DIV: numeric.div, Kind.POW: numeric.pow_}
