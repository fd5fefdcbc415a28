"""Lower term DAGs to straight-line programs.

``emit_dag`` visits each reachable node once in ascending id order, which is
a topological order because operands are always older than their users; the
result is CSE for free. ``emit_tree`` is the DAG-unaware baseline that emits
one instruction per tree occurrence.

Program text form (one item per line)::

    params a b c
    t0 = add p0 p1
    t1 = mul t0 k(2.0)
    out t1

References are ``pN`` (parameter slot), ``tN`` (register) or ``k(<repr>)``
(immediate).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from .term import Kind, Term, UnboundVariable, reachable

BINARY_OPS = ("add", "sub", "mul", "div", "pow")
UNARY_OPS = ("sin", "cos", "exp", "log", "sqrt")

_KIND_OP = {Kind.ADD: "add", Kind.SUB: "sub", Kind.MUL: "mul",
            Kind.DIV: "div", Kind.POW: "pow"}


class Ref(NamedTuple):
    space: str  # "p" parameter, "t" register, "k" immediate
    value: int | float

    def __str__(self) -> str:
        if self.space == "k":
            return f"k({self.value!r})"
        return f"{self.space}{self.value}"

    @classmethod
    def parse(cls, text: str) -> "Ref":
        if text.startswith("k(") and text.endswith(")"):
            return cls("k", float(text[2:-1]))
        if text[:1] in ("p", "t") and text[1:].isdigit():
            return cls(text[0], int(text[1:]))
        raise ValueError(f"bad reference {text!r}")


class Instruction(NamedTuple):
    dest: int
    op: str
    args: tuple[Ref, ...]


@dataclass
class StraightLineProgram:
    params: list[str]
    instructions: list[Instruction] = field(default_factory=list)
    outputs: list[Ref] = field(default_factory=list)
    source_term_count: int = 0

    def __len__(self) -> int:
        return len(self.instructions)

    def dumps(self) -> str:
        lines = ["params " + " ".join(self.params) if self.params else "params"]
        for ins in self.instructions:
            lines.append(f"t{ins.dest} = {ins.op} " + " ".join(map(str, ins.args)))
        lines.append("out " + " ".join(map(str, self.outputs)))
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "StraightLineProgram":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0].split()[0] != "params":
            raise ValueError("program text must start with a params line")
        params = lines[0].split()[1:]
        instructions = []
        outputs: list[Ref] = []
        for ln in lines[1:]:
            parts = ln.split()
            if parts[0] == "out":
                outputs = [Ref.parse(p) for p in parts[1:]]
                continue
            if len(parts) < 4 or parts[1] != "=" or not parts[0].startswith("t"):
                raise ValueError(f"bad instruction line {ln!r}")
            instructions.append(Instruction(int(parts[0][1:]), parts[2],
                                            tuple(Ref.parse(p) for p in parts[3:])))
        return cls(params, instructions, outputs)


class _Emitter:
    def __init__(self, params: Sequence[Term]) -> None:
        self.slots = {p.name: i for i, p in enumerate(params)}
        self.program = StraightLineProgram([p.name for p in params])

    def leaf(self, t: Term) -> Ref:
        if t.kind is Kind.CONST:
            return Ref("k", t.payload)
        slot = self.slots.get(t.payload)
        if slot is None:
            raise UnboundVariable(t.payload)
        return Ref("p", slot)

    def emit(self, op: str, args: tuple[Ref, ...]) -> Ref:
        dest = len(self.program.instructions)
        self.program.instructions.append(Instruction(dest, op, args))
        return Ref("t", dest)

    def lower(self, t: Term, operand_refs: list[Ref]) -> Ref:
        self.program.source_term_count += 1
        if t.kind is Kind.CALL:
            return self.emit(t.payload, (operand_refs[0],))
        op = _KIND_OP[t.kind]
        acc = self.emit(op, (operand_refs[0], operand_refs[1]))
        for ref in operand_refs[2:]:
            acc = self.emit(op, (acc, ref))
        return acc


def _check_params(params: Sequence[Term]) -> None:
    for p in params:
        if p.kind is not Kind.VAR:
            raise ValueError("params must be variables")


def emit_dag(roots: Sequence[Term], params: Sequence[Term]) -> StraightLineProgram:
    """One instruction chain per distinct reachable non-leaf node."""
    _check_params(params)
    em = _Emitter(params)
    refs: dict[int, Ref] = {}
    for t in sorted(reachable(roots).values(), key=lambda n: n.id):
        if t.is_leaf:
            refs[id(t)] = em.leaf(t)
        else:
            refs[id(t)] = em.lower(t, [refs[id(op)] for op in t.operands])
    em.program.outputs = [refs[id(r)] for r in roots]
    return em.program


def emit_tree(roots: Sequence[Term], params: Sequence[Term]) -> StraightLineProgram:
    """Baseline emitter: re-emits every occurrence, ignoring node identity."""
    _check_params(params)
    em = _Emitter(params)

    def walk(t: Term) -> Ref:
        if t.is_leaf:
            return em.leaf(t)
        return em.lower(t, [walk(op) for op in t.operands])

    em.program.outputs = [walk(r) for r in roots]
    return em.program


_INFIX = {"add": "+", "sub": "-", "mul": "*", "div": "/"}


def _c_ref(ref: Ref) -> str:
    if ref.space == "k":
        text = repr(float(ref.value))
        return f"({text})" if text.startswith("-") else text
    return f"{ref.space}{ref.value}"


def render_source(p: StraightLineProgram, name: str) -> str:
    """C-like source text: ``double`` params, one ``double tN`` per instruction."""
    sig = ", ".join([f"double p{i}" for i in range(len(p.params))] + ["double *out"])
    lines = [f"/* {name}: " + (", ".join(f"p{i}={n}" for i, n in enumerate(p.params)) or "no params") + " */",
             f"void {name}({sig})", "{"]
    for ins in p.instructions:
        args = [_c_ref(a) for a in ins.args]
        if ins.op in _INFIX:
            expr = f"{args[0]} {_INFIX[ins.op]} {args[1]}"
        else:
            expr = f"{ins.op}({', '.join(args)})"
        lines.append(f"    double t{ins.dest} = {expr};")
    for i, ref in enumerate(p.outputs):
        lines.append(f"    out[{i}] = {_c_ref(ref)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
