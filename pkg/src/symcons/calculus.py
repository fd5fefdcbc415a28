"""Symbolic differentiation and Jacobians, memoized on node identity."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

from .term import Kind, Session, Term, reachable


@dataclass
class DiffCache:
    """(node id, variable id) -> derivative, valid only inside its session."""
    entries: dict[tuple[int, int], Term] = field(default_factory=dict)
    hits: int = 0
    misses: int = 0


def diff_cache(session: Session) -> DiffCache:
    cache = session.memo.get("diff")
    if cache is None:
        cache = session.memo["diff"] = DiffCache()
    return cache


def cache_stats(session: Session) -> tuple[int, int]:
    cache = diff_cache(session)
    return cache.hits, cache.misses


def derivative(t: Term, v: Term) -> Term:
    """d t / d v, built through the session's normalizing constructor."""
    if v.kind is not Kind.VAR:
        raise ValueError("can only differentiate with respect to a variable")
    s = t.session
    cache = diff_cache(s)
    memo = s.memoize
    entries = cache.entries

    def d(u: Term) -> Term:
        if memo:
            key = (u.id, v.id)
            hit = entries.get(key)
            if hit is not None:
                cache.hits += 1
                return hit
            cache.misses += 1
        out = _rule(s, u, v, d)
        if memo:
            entries[key] = out
        return out

    return d(t)


def _rule(s: Session, u: Term, v: Term, d) -> Term:
    kind = u.kind
    if kind is Kind.CONST:
        return s.const(0.0)
    if kind is Kind.VAR:
        return s.const(1.0 if u.payload == v.payload else 0.0)
    ops = u.operands
    if kind is Kind.ADD:
        return s.add(*(d(op) for op in ops))
    if kind is Kind.SUB:
        return s.sub(d(ops[0]), d(ops[1]))
    if kind is Kind.MUL:
        terms = []
        for i, op in enumerate(ops):
            dop = d(op)
            if dop.is_const(0.0):
                continue
            terms.append(s.mul(*ops[:i], dop, *ops[i + 1:]))
        return s.add(*terms)
    if kind is Kind.DIV:
        a, b = ops
        da, db = d(a), d(b)
        return s.div(s.sub(s.mul(da, b), s.mul(a, db)), s.pow(b, 2.0))
    if kind is Kind.POW:
        base, expo = ops
        if expo.kind is Kind.CONST:
            return s.mul(expo, s.pow(base, expo.payload - 1.0), d(base))
        return s.mul(u, s.add(s.mul(d(expo), s.call("log", base)),
                              s.div(s.mul(expo, d(base)), base)))
    # unary call: chain rule
    (arg,) = ops
    darg = d(arg)
    fn = u.payload
    if fn == "sin":
        return s.mul(s.call("cos", arg), darg)
    if fn == "cos":
        return s.mul(s.const(-1.0), s.call("sin", arg), darg)
    if fn == "exp":
        return s.mul(u, darg)
    if fn == "log":
        return s.div(darg, arg)
    if fn == "sqrt":
        return s.div(darg, s.mul(s.const(2.0), u))
    raise ValueError(f"no derivative rule for {fn!r}")


@dataclass
class JacobianResult:
    matrix: list[list[Term]]
    distinct_nodes: int
    build_time: float
    allocated_nodes: int

    @property
    def shape(self) -> tuple[int, int]:
        cols = len(self.matrix[0]) if self.matrix else 0
        return len(self.matrix), cols

    def entries(self) -> list[Term]:
        """Row-major flattening."""
        return [t for row in self.matrix for t in row]


def jacobian(eqs: Sequence[Term], variables: Sequence[Term],
             session: Session | None = None) -> JacobianResult:
    """Entry (i, j) is d eqs[i] / d variables[j]; one cache serves all entries.

    ``allocated_nodes`` is the session's cumulative node allocation count at
    the end of the build, so it covers the equations themselves as well.
    """
    names = [v.name for v in variables]
    if len(set(names)) != len(names):
        raise ValueError("jacobian variables must be distinct")
    if session is None:
        session = (eqs[0] if eqs else variables[0]).session
    start = time.perf_counter()
    matrix = [[derivative(e, v) for v in variables] for e in eqs]
    elapsed = time.perf_counter() - start
    distinct = len(reachable(t for row in matrix for t in row))
    return JacobianResult(matrix, distinct, elapsed, session.allocations)
