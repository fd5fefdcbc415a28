"""Immutable expression nodes and the canonicalizing constructor.

Every node is built through :meth:`Session.make`, which normalizes the
candidate (flatten, fold constants, drop identities, sort commutative
operands) and then either interns it (consing mode) or allocates a fresh
node (naive mode). The node object itself is the handle; ``node.id`` is its
session-unique integer id.
"""

from __future__ import annotations

import enum
import functools
import math
from typing import Iterable, Mapping, Sequence

from . import numeric
from .interner import InternStats, InternTable, structural_hash


class DomainError(ValueError):
    """Constant folding would produce a non-finite value."""


class Kind(enum.IntEnum):
    # value doubles as the canonical rank for commutative operand order
    CONST = 0
    VAR = 1
    CALL = 2
    POW = 3
    MUL = 4
    DIV = 5
    SUB = 6
    ADD = 7


class Mode(str, enum.Enum):
    CONSING = "consing"
    NAIVE = "naive"


FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt")

_ARITY = {Kind.SUB: 2, Kind.DIV: 2, Kind.POW: 2, Kind.CALL: 1,
          Kind.CONST: 0, Kind.VAR: 0}
_BINARY_FN = {Kind.SUB: numeric.sub, Kind.DIV: numeric.div, Kind.POW: numeric.pow_}


class Term:
    __slots__ = ("id", "kind", "payload", "operands", "hash", "session", "__weakref__")

    def __init__(self, id: int, kind: Kind, payload, operands: tuple, hash_: int,
                 session: "Session") -> None:
        self.id = id
        self.kind = kind
        self.payload = payload
        self.operands = operands
        self.hash = hash_
        self.session = session

    @property
    def is_leaf(self) -> bool:
        return self.kind is Kind.CONST or self.kind is Kind.VAR

    @property
    def value(self) -> float:
        if self.kind is not Kind.CONST:
            raise TypeError(f"{self.kind.name} node has no numeric value")
        return self.payload

    @property
    def name(self) -> str:
        if self.kind is not Kind.VAR:
            raise TypeError(f"{self.kind.name} node has no name")
        return self.payload

    def is_const(self, value: float | None = None) -> bool:
        return self.kind is Kind.CONST and (value is None or self.payload == value)

    def __repr__(self) -> str:
        return f"<Term #{self.id} {render(self)}>"

    def __str__(self) -> str:
        return render(self)

    # Operator sugar so expressions read like ordinary arithmetic.
    def _lift(self, other) -> "Term":
        if isinstance(other, Term):
            return other
        return self.session.const(other)

    def __add__(self, other):
        return self.session.add(self, self._lift(other))

    def __radd__(self, other):
        return self.session.add(self._lift(other), self)

    def __sub__(self, other):
        return self.session.sub(self, self._lift(other))

    def __rsub__(self, other):
        return self.session.sub(self._lift(other), self)

    def __mul__(self, other):
        return self.session.mul(self, self._lift(other))

    def __rmul__(self, other):
        return self.session.mul(self._lift(other), self)

    def __truediv__(self, other):
        return self.session.div(self, self._lift(other))

    def __rtruediv__(self, other):
        return self.session.div(self._lift(other), self)

    def __pow__(self, other):
        return self.session.pow(self, self._lift(other))

    def __rpow__(self, other):
        return self.session.pow(self._lift(other), self)

    def __neg__(self):
        return self.session.mul(self.session.const(-1.0), self)


def _payload_key(t: Term):
    return t.payload if t.payload is not None else ""


def _sort_key(t: Term):
    return (int(t.kind), _payload_key(t), t.hash)


def structural_cmp(s: Term, t: Term) -> int:
    """Total order on structures; independent of ids and of session mode."""
    if s is t:
        return 0
    ks, kt = _sort_key(s), _sort_key(t)
    if ks != kt:
        return -1 if ks < kt else 1
    if len(s.operands) != len(t.operands):
        return -1 if len(s.operands) < len(t.operands) else 1
    for a, b in zip(s.operands, t.operands):
        c = structural_cmp(a, b)
        if c:
            return c
    return 0


def _canonical_sort(ops: list[Term]) -> list[Term]:
    ops.sort(key=_sort_key)
    keys = [_sort_key(t) for t in ops]
    if len(set(keys)) != len(keys):
        # equal (kind, payload, hash) between different structures: break the tie deeply
        ops.sort(key=functools.cmp_to_key(structural_cmp))
    return ops


class Session:
    """Owns an intern table, id counter, allocation counter and memo caches.

    ``hasher`` is a test seam: when given, it replaces the structural hash
    (called with ``(tag, payload, operand_hashes)``) so that bucket
    collisions can be forced.
    """

    def __init__(self, mode: Mode | str = Mode.CONSING, *, memoize: bool = True,
                 hasher=None) -> None:
        self.mode = Mode(mode)
        self.table = InternTable()
        self.memoize = memoize
        self.memo: dict[str, object] = {}
        self.allocations = 0
        self._hasher = hasher or structural_hash

    @property
    def consing(self) -> bool:
        return self.mode is Mode.CONSING

    def stats(self) -> InternStats:
        return self.table.stats()

    def purge(self) -> int:
        return self.table.purge()

    # -- leaves -------------------------------------------------------------

    def const(self, value: float) -> Term:
        return self.make(Kind.CONST, float(value))

    def var(self, name: str) -> Term:
        return self.make(Kind.VAR, str(name))

    def vars(self, names: str | Iterable[str]) -> list[Term]:
        if isinstance(names, str):
            names = names.replace(",", " ").split()
        return [self.var(n) for n in names]

    # -- operators ----------------------------------------------------------

    def add(self, *ops: Term) -> Term:
        return self.make(Kind.ADD, None, ops)

    def mul(self, *ops: Term) -> Term:
        return self.make(Kind.MUL, None, ops)

    def sub(self, a: Term, b: Term) -> Term:
        return self.make(Kind.SUB, None, (a, b))

    def div(self, a: Term, b: Term) -> Term:
        return self.make(Kind.DIV, None, (a, b))

    def pow(self, a: Term, b: Term | float) -> Term:
        if not isinstance(b, Term):
            b = self.const(b)
        return self.make(Kind.POW, None, (a, b))

    def call(self, fn: str, arg: Term) -> Term:
        return self.make(Kind.CALL, fn, (arg,))

    # -- construction -------------------------------------------------------

    def make(self, kind: Kind, payload=None, operands: Sequence[Term] = ()) -> Term:
        """Normalize and construct a node; returns the canonical handle."""
        kind = Kind(kind)
        operands = tuple(operands)
        for op in operands:
            if op.session is not self:
                raise ValueError("operand belongs to a different session")
        if kind is Kind.ADD or kind is Kind.MUL:
            return self._make_nary(kind, operands)
        arity = _ARITY[kind]
        if len(operands) != arity:
            raise ValueError(f"{kind.name} takes {arity} operand(s), got {len(operands)}")
        if kind is Kind.CONST:
            value = float(payload)
            if not math.isfinite(value):
                raise DomainError(f"non-finite constant {value!r}")
            return self._node(kind, value + 0.0 if value else 0.0, ())
        if kind is Kind.VAR:
            if not payload:
                raise ValueError("variable needs a name")
            return self._node(kind, str(payload), ())
        if kind is Kind.CALL:
            if payload not in FUNCTIONS:
                raise ValueError(f"unknown function {payload!r}")
            (arg,) = operands
            if arg.kind is Kind.CONST:
                if payload in ("log", "sqrt") and arg.payload < 0.0:
                    raise DomainError(f"{payload} of negative constant {arg.payload!r}")
                return self._fold(numeric.UNARY[payload](arg.payload), f"{payload}({arg.payload!r})")
            return self._node(kind, payload, operands)
        a, b = operands
        if a.kind is Kind.CONST and b.kind is Kind.CONST:
            if kind is Kind.DIV and b.payload == 0.0:
                raise DomainError("division by constant zero")
            if kind is Kind.POW and a.payload == 0.0 and b.payload < 0.0:
                raise DomainError("zero raised to a negative power")
            return self._fold(_BINARY_FN[kind](a.payload, b.payload), f"{kind.name}({a.payload!r}, {b.payload!r})")
        if kind is Kind.DIV:
            if b.is_const(0.0):
                raise DomainError("division by constant zero")
            if b.is_const(1.0):
                return a
        elif kind is Kind.SUB:
            if b.is_const(0.0):
                return a
        elif kind is Kind.POW:
            if b.is_const(1.0):
                return a
            if b.is_const(0.0):
                return self.const(1.0)
        return self._node(kind, None, operands)

    def _fold(self, value: float, what: str) -> Term:
        if not math.isfinite(value):
            raise DomainError(f"folding {what} is not finite")
        return self.const(value)

    def _make_nary(self, kind: Kind, operands: tuple) -> Term:
        flat: list[Term] = []
        for op in operands:
            if op.kind is kind:
                flat.extend(op.operands)
            else:
                flat.append(op)
        consts = sorted(t.payload for t in flat if t.kind is Kind.CONST)
        rest = [t for t in flat if t.kind is not Kind.CONST]
        if kind is Kind.ADD:
            acc, unit = 0.0, 0.0
            for c in consts:
                acc = numeric.add(acc, c)
        else:
            acc, unit = 1.0, 1.0
            for c in consts:
                acc = numeric.mul(acc, c)
            if acc == 0.0 and consts:
                return self.const(0.0)
        if consts and not math.isfinite(acc):
            raise DomainError(f"folding {kind.name} constants is not finite")
        if consts and acc != unit:
            rest.append(self.const(acc))
        if not rest:
            return self.const(acc if consts else unit)
        if len(rest) == 1:
            return rest[0]
        return self._node(kind, None, tuple(_canonical_sort(rest)))

    def _node(self, kind: Kind, payload, operands: tuple) -> Term:
        h = self._hasher(int(kind), payload, [op.hash for op in operands])
        if self.consing:
            return self.table.intern(kind, payload, operands, h, lambda nid: self._alloc(nid, kind, payload, operands, h))
        return self._alloc(self.table.fresh_id(), kind, payload, operands, h)

    def _alloc(self, nid: int, kind: Kind, payload, operands: tuple, h: int) -> Term:
        self.allocations += 1
        return Term(nid, kind, payload, operands, h, self)

    # -- queries ------------------------------------------------------------

    def struct_eq(self, s: Term, t: Term) -> bool:
        """Structural equality; pointer comparison when consing."""
        if self.consing:
            return s is t
        return deep_eq(s, t)

    def substitute(self, root: Term, bindings: Mapping[Term | str, Term]) -> Term:
        """Replace variables (matched by name) and rebuild through :meth:`make`."""
        by_name = {(k if isinstance(k, str) else k.name): v for k, v in bindings.items()}
        done: dict[int, Term] = {}

        def walk(t: Term) -> Term:
            hit = done.get(t.id)
            if hit is not None:
                return hit
            if t.kind is Kind.VAR:
                out = by_name.get(t.payload, t)
            elif t.kind is Kind.CONST:
                out = t
            else:
                new_ops = [walk(op) for op in t.operands]
                if all(a is b for a, b in zip(new_ops, t.operands)):
                    out = t
                else:
                    out = self.make(t.kind, t.payload, new_ops)
            done[t.id] = out
            return out

        return walk(root)


def deep_eq(s: Term, t: Term) -> bool:
    """Full structural comparison that never looks at ids."""
    seen: set[tuple[int, int]] = set()

    def eq(x: Term, y: Term) -> bool:
        if x is y:
            return True
        key = (id(x), id(y))
        if key in seen:
            return True
        if (x.kind is not y.kind or x.payload != y.payload
                or len(x.operands) != len(y.operands) or x.hash != y.hash):
            return False
        if not all(eq(a, b) for a, b in zip(x.operands, y.operands)):
            return False
        seen.add(key)
        return True

    return eq(s, t)


def reachable(roots: Iterable[Term]) -> dict[int, Term]:
    """All nodes reachable from ``roots``, keyed by object identity."""
    found: dict[int, Term] = {}
    stack = list(roots)
    while stack:
        t = stack.pop()
        if id(t) in found:
            continue
        found[id(t)] = t
        stack.extend(t.operands)
    return found


def count_nodes(root: Term) -> tuple[int, int]:
    """Return ``(distinct, occurrences)``: DAG node count and tree-expansion size."""
    nodes = sorted(reachable([root]).values(), key=lambda t: t.id)
    size: dict[int, int] = {}
    for t in nodes:
        size[id(t)] = 1 + sum(size[id(op)] for op in t.operands)
    return len(nodes), size[id(root)]


_INFIX = {Kind.ADD: " + ", Kind.MUL: " * ", Kind.SUB: " - ", Kind.DIV: " / ", Kind.POW: "^"}


def render(t: Term) -> str:
    """Deterministic, fully parenthesized infix text (no parser is provided)."""
    if t.kind is Kind.CONST:
        return repr(t.payload)
    if t.kind is Kind.VAR:
        return t.payload
    if t.kind is Kind.CALL:
        return f"{t.payload}({render(t.operands[0])})"
    parts = []
    for op in t.operands:
        s = render(op)
        parts.append(s if op.is_leaf or op.kind is Kind.CALL else f"({s})")
    return _INFIX[t.kind].join(parts)


class UnboundVariable(KeyError):
    """A reachable variable has no parameter slot or environment value."""
