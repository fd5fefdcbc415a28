import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from recipes import build, swell_poly, fig1, random_recipe
from symcons import (ArityMismatch, DomainError, Instruction, Mode, Ref, Session,
                     StraightLineProgram, UnboundVariable, ValidationError, emit_dag,
                     emit_tree, eval_tree, prepare, run)
from symcons import numeric


@pytest.fixture
def s():
    return Session()


def _bits(values):
    return [float(v).hex() if not math.isnan(v) else "nan" for v in values]


def test_prepare_shared_square(s):
    a, b = s.vars("a b")
    sq = s.mul(s.add(a, b), s.add(a, b))
    pp = prepare(emit_dag([sq], [a, b]))
    assert pp.register_file_size == 2
    assert pp.prep_time >= 0
    assert run(pp, [1.0, 2.0]) == [9.0]


@pytest.mark.parametrize("program, needle", [
    (StraightLineProgram(["a"], [Instruction(0, "add", (Ref("p", 0), Ref("t", 0)))], [Ref("t", 0)]),
     "instruction 0"),
    (StraightLineProgram(["a"], [Instruction(0, "add", (Ref("p", 0), Ref("p", 1)))], [Ref("t", 0)]),
     "parameter slot"),
    (StraightLineProgram(["a"], [Instruction(0, "tan", (Ref("p", 0),))], [Ref("t", 0)]),
     "unknown op"),
    (StraightLineProgram(["a"], [Instruction(0, "sin", (Ref("p", 0), Ref("p", 0)))], [Ref("t", 0)]),
     "argument"),
    (StraightLineProgram(["a"], [Instruction(3, "sin", (Ref("p", 0),))], [Ref("t", 0)]),
     "single assignment"),
    (StraightLineProgram(["a"], [], [Ref("t", 0)]), "output"),
    (StraightLineProgram(["a"], [Instruction(0, "add", (Ref("p", 0), Ref("k", math.inf)))], [Ref("t", 0)]),
     "immediate"),
])
def test_validation_errors(program, needle):
    with pytest.raises(ValidationError, match=needle):
        prepare(program)


def test_validation_reports_first_bad_instruction():
    good = Instruction(0, "add", (Ref("p", 0), Ref("p", 0)))
    bad1 = Instruction(1, "mul", (Ref("t", 5), Ref("p", 0)))
    bad2 = Instruction(2, "mul", (Ref("t", 9), Ref("p", 0)))
    with pytest.raises(ValidationError, match="instruction 1"):
        prepare(StraightLineProgram(["a"], [good, bad1, bad2], [Ref("t", 2)]))


def test_fig1_program(s):
    term, params = fig1(s)
    pp = prepare(emit_dag([term], params))
    assert pp.register_file_size == 11
    out = run(pp, [1.0, 2.0, 3.0, 4.0])
    assert out == [5.5] and not out.nonfinite


def test_fig1_hand_arithmetic(s):
    term, _ = fig1(s)
    a, b, c, d = 1.0, 2.0, 3.0, 4.0
    numerator = (a + b) * (c + d) + (a - b) * (c - d)
    denominator = (a + b) * (c - d) - (a - b) * (c + d)
    assert (numerator, denominator) == (22.0, 4.0)
    assert eval_tree(term, {"a": a, "b": b, "c": c, "d": d}) == 5.5


def test_identity_program(s):
    a = s.var("a")
    assert run(prepare(emit_dag([a], [a])), [2.5]) == [2.5]


def test_runtime_division_by_zero_flags(s):
    x = s.var("x")
    out = run(prepare(emit_dag([s.div(s.const(1), x)], [x])), [0.0])
    assert out == [math.inf] and out.nonfinite


def test_runtime_domain_violations_flag(s):
    x = s.var("x")
    pp = prepare(emit_dag([s.call("log", x), s.call("sqrt", x)], [x]))
    out = run(pp, [-1.0])
    assert all(math.isnan(v) for v in out) and out.nonfinite
    assert not run(pp, [4.0]).nonfinite


def test_arity_mismatch(s):
    a = s.var("a")
    with pytest.raises(ArityMismatch):
        run(prepare(emit_dag([a], [a])), [1.0, 2.0])


def test_eval_tree_examples(s):
    assert eval_tree(s.const(6), {}) == 6.0
    f, x = swell_poly(s)
    assert eval_tree(f, {x: 0.5}) == 0.0
    with pytest.raises(UnboundVariable):
        eval_tree(s.add(x, s.var("y")), {x: 1.0})


@pytest.mark.parametrize("fn, args, expected", [
    (numeric.div, (1.0, 0.0), math.inf),
    (numeric.div, (-1.0, 0.0), -math.inf),
    (numeric.div, (1.0, -0.0), -math.inf),
    (numeric.pow_, (0.0, -1.0), math.inf),
    (numeric.pow_, (-0.0, -1.0), -math.inf),
    (numeric.pow_, (10.0, 400.0), math.inf),
    (numeric.pow_, (-10.0, 401.0), -math.inf),
    (numeric.exp, (1000.0,), math.inf),
    (numeric.log, (0.0,), -math.inf),
])
def test_ieee_kernels(fn, args, expected):
    assert fn(*args) == expected


@pytest.mark.parametrize("fn, args", [
    (numeric.div, (0.0, 0.0)), (numeric.pow_, (-8.0, 0.5)), (numeric.log, (-1.0,)),
    (numeric.sqrt, (-1.0,)), (numeric.sin, (math.inf,)), (numeric.cos, (math.nan,)),
])
def test_ieee_kernels_nan(fn, args):
    assert math.isnan(fn(*args))


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_pipelines_agree_bitwise(seed):
    rng = random.Random(seed)
    s = Session()
    try:
        t = build(random_recipe(rng, 6), s)
    except DomainError:
        return
    params = s.vars("x y z")
    dag, tree = prepare(emit_dag([t], params)), prepare(emit_tree([t], params))
    xs = [rng.uniform(-3, 3) for _ in params]
    oracle = eval_tree(t, dict(zip("xyz", xs)))
    assert _bits(run(dag, xs)) == _bits(run(tree, xs)) == _bits([oracle])


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_naive_tree_program_matches_consing_dag(seed):
    rng = random.Random(seed)
    recipe = random_recipe(rng, 6)
    c, n = Session(), Session(Mode.NAIVE)
    try:
        tc = build(recipe, c)
    except DomainError:
        return
    tn = build(recipe, n)
    xs = [rng.uniform(-3, 3) for _ in range(3)]
    a = run(prepare(emit_dag([tc], c.vars("x y z"))), xs)
    b = run(prepare(emit_tree([tn], n.vars("x y z"))), xs)
    assert _bits(a) == _bits(b)
