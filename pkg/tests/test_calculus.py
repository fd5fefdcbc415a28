import random

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from recipes import Singular, build, swell_poly, mp_central_difference, random_recipe, signature
from symcons import (DomainError, Kind, Mode, Session, cache_stats, derivative, emit_dag,
                     eval_tree, jacobian, prepare, run)
from symcons.problems import gen_reaction
from symcons.term import reachable


@pytest.fixture
def s():
    return Session()


def test_leaf_derivatives(s):
    x, c = s.vars("x c")
    assert derivative(x, x) is s.const(1)
    assert derivative(c, x) is s.const(0)
    assert derivative(s.const(5), x) is s.const(0)


def test_power_rule(s):
    x = s.var("x")
    d = derivative(s.pow(x, 2.0), x)
    assert d is s.mul(s.const(2), x)
    assert [op.kind for op in d.operands] == [Kind.CONST, Kind.VAR]


def test_requires_variable(s):
    x = s.var("x")
    with pytest.raises(ValueError):
        derivative(x, s.add(x, s.const(1)))


@pytest.mark.parametrize("fn, expected", [
    ("sin", "cos(x)"),
    ("cos", "-1.0 * sin(x)"),
    ("exp", "exp(x)"),
    ("log", "1.0 / x"),
    ("sqrt", "1.0 / (2.0 * sqrt(x))"),
])
def test_chain_rule_forms(s, fn, expected):
    x = s.var("x")
    assert str(derivative(s.call(fn, x), x)) == expected


def _fd(prepared, x0, h=1e-6):
    return (run(prepared, [x0 + h])[0] - run(prepared, [x0 - h])[0]) / (2 * h)


@pytest.mark.parametrize("x0", [0.1, 0.3, 0.7])
def test_swell_poly_against_finite_differences(s, x0):
    f, x = swell_poly(s)
    df = derivative(f, x)
    fd = _fd(prepare(emit_dag([f], [x])), x0)
    got = run(prepare(emit_dag([df], [x])), [x0])[0]
    assert abs(got - fd) / abs(fd) <= 1e-6


def test_swell_poly_derivative_shares_repeated_factors(s):
    f, x = swell_poly(s)
    df = derivative(f, x)
    one = s.const(1.0)
    linear = signature(one - 2 * x)
    quadratic = signature(one - 8 * x + 8 * x ** 2)
    nodes = reachable([df]).values()
    assert sum(signature(t) == linear for t in nodes) == 1
    assert sum(signature(t) == quadratic for t in nodes) == 1
    # four summands, as in the displayed expansion
    assert df.kind is Kind.ADD and len(df.operands) == 4


def test_general_power_rule(s):
    x = s.var("x")
    t = s.pow(x, x)
    d = derivative(t, x)
    x0 = 1.7
    expected = x0 ** x0 * (mpmath.log(x0) + 1)
    assert eval_tree(d, {"x": x0}) == pytest.approx(float(expected), rel=1e-12)


def test_domain_error_propagates(s):
    x = s.var("x")
    t = s.pow(s.const(-2.0), x)
    with pytest.raises(DomainError):
        derivative(t, x)


def test_linearity(s):
    x, y = s.vars("x y")
    u = s.mul(s.call("sin", x), y)
    w = s.div(x, s.add(y, s.const(1)))
    assert derivative(s.add(u, w), x) is s.add(derivative(u, x), derivative(w, x))


def test_jacobian_small(s):
    x1, x2 = s.vars("x1 x2")
    jac = jacobian([x1 * x2, x1 + x2], [x1, x2])
    one = s.const(1)
    assert jac.matrix == [[x2, x1], [one, one]]
    assert jac.shape == (2, 2)
    assert jac.distinct_nodes <= jac.allocated_nodes


def test_jacobian_empty(s):
    x = s.var("x")
    jac = jacobian([], [x], s)
    assert jac.matrix == [] and jac.distinct_nodes == 0


def test_jacobian_rejects_repeated_variables(s):
    x = s.var("x")
    with pytest.raises(ValueError):
        jacobian([x], [x, x])


def test_cache_stats_fresh(s):
    assert cache_stats(s) == (0, 0)


def test_second_derivative_call_is_one_hit(s):
    f, x = swell_poly(s)
    d1 = derivative(f, x)
    hits, misses = cache_stats(s)
    allocs = s.allocations
    d2 = derivative(f, x)
    assert d2 is d1
    assert cache_stats(s) == (hits + 1, misses)
    assert s.allocations == allocs


def test_duplicated_rows_cost_only_hits(s):
    x, y = s.vars("x y")
    g = s.call("exp", x * y) / (x + s.const(2))
    derivative_row = [derivative(g, v) for v in (x, y)]
    hits, misses = cache_stats(s)
    allocs = s.allocations
    jac = jacobian([g], [x, y])
    assert jac.matrix[0] == derivative_row
    assert s.allocations == allocs
    assert cache_stats(s) == (hits + 2, misses)


def test_cache_does_not_change_results(s):
    f, x = swell_poly(s)
    memoized = derivative(f, x)
    s.memoize = False
    assert derivative(f, x) is memoized


def test_reaction_sharing_between_modes():
    c, n = Session(Mode.CONSING), Session(Mode.NAIVE)
    jc = jacobian(*gen_reaction(40, 7, c), c)
    jn = jacobian(*gen_reaction(40, 7, n), n)
    assert jn.allocated_nodes / jc.distinct_nodes > 1


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_random_derivatives_against_oracle(seed):
    rng = random.Random(seed)
    recipe = random_recipe(rng, 6)
    s = Session()
    try:
        t = build(recipe, s)
        x = s.var("x")
        d = derivative(t, x)
    except DomainError:
        return
    for _ in range(20):
        env = {v: rng.uniform(-2, 2) for v in "xyz"}
        try:
            fd = float(mp_central_difference(recipe, {k: mpmath.mpf(v) for k, v in env.items()}, "x"))
        except Singular:
            continue
        if abs(fd) < 1e-30:  # below the oracle's noise floor
            fd = 0.0
        got = eval_tree(d, env)
        assert abs(got - fd) <= 1e-6 * abs(fd) + 1e-12
        break
