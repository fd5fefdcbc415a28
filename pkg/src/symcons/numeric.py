"""IEEE-754 scalar kernels shared by constant folding and every evaluator.

All evaluation paths (constant folding, the tree evaluator and the register
machine) call these same functions, which is what makes their results
bitwise comparable. None of them raise: domain and pole violations return
inf/nan the way C's libm would.
"""

from __future__ import annotations

import math
import operator

INF = math.inf
NAN = math.nan


def div(a: float, b: float) -> float:
    try:
        return a / b
    except ZeroDivisionError:
        if a == 0.0 or a != a:
            return NAN
        return math.copysign(INF, a) * math.copysign(1.0, b)


def _is_odd_integer(x: float) -> bool:
    return math.isfinite(x) and x == int(x) and int(x) % 2 == 1


def pow_(a: float, b: float) -> float:
    try:
        return math.pow(a, b)
    except OverflowError:
        if a < 0.0 and _is_odd_integer(b):
            return -INF
        return INF
    except ValueError:
        if a == 0.0 and b < 0.0:
            if _is_odd_integer(b):
                return math.copysign(INF, a)
            return INF
        return NAN


def exp(a: float) -> float:
    try:
        return math.exp(a)
    except OverflowError:
        return INF


def log(a: float) -> float:
    if a != a or a < 0.0:
        return NAN
    if a == 0.0:
        return -INF
    return math.log(a)


def sqrt(a: float) -> float:
    if a != a or a < 0.0:
        return NAN
    return math.sqrt(a)


def sin(a: float) -> float:
    return math.sin(a) if math.isfinite(a) else NAN


def cos(a: float) -> float:
    return math.cos(a) if math.isfinite(a) else NAN


add = operator.add
sub = operator.sub
mul = operator.mul

BINARY = {"add": add, "sub": sub, "mul": mul, "div": div, "pow": pow_}
UNARY = {"sin": sin, "cos": cos, "exp": exp, "log": log, "sqrt": sqrt}
