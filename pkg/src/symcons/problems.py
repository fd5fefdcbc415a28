"""Seeded synthetic problem families for the benchmark.

``reaction``: a mass-action / Michaelis-Menten / Hill network, each species'
right-hand side being its production terms minus its decay terms. Every rate
expression is built twice (once per equation it enters), so the naive
representation holds genuine duplicates.

``region``: ``size`` property polynomials in (p, T), each the sum of 12
terms ``c * (p/16.53)**I * (T/1386 - 0.5)**J``.
"""

from __future__ import annotations

import random

from .term import Session, Term

RATE_RANGE = (0.1, 10.0)
REACTION_TYPES = ("binding", "conversion", "michaelis_menten", "hill")
REGION_TERMS = 12


def _rate_builder(s: Session, species: list[Term], rng: random.Random):
    kind = rng.choice(REACTION_TYPES)
    n = len(species)
    i = rng.randrange(n)
    k = rng.uniform(*RATE_RANGE)
    if kind == "binding":
        j = rng.randrange(n - 1)
        j += j >= i
        return lambda: s.mul(s.const(k), species[i], species[j])
    if kind == "conversion":
        return lambda: s.mul(s.const(k), species[i])
    big_k = rng.uniform(*RATE_RANGE)
    if kind == "michaelis_menten":
        return lambda: s.div(s.mul(s.const(k), species[i]), s.add(s.const(big_k), species[i]))
    # Hill, coefficient 2; k is unused so both draws stay aligned across types
    return lambda: s.div(s.pow(species[i], 2.0),
                         s.add(s.pow(s.const(big_k), 2.0), s.pow(species[i], 2.0)))


def gen_reaction(n: int, seed: int, session: Session) -> tuple[list[Term], list[Term]]:
    if n < 2:
        raise ValueError("reaction family needs at least 2 species")
    rng = random.Random(seed)
    s = session
    species = s.vars(f"s{i + 1}" for i in range(n))
    rhs: list[list[Term]] = [[] for _ in range(n)]
    for _ in range(4 * n):
        build = _rate_builder(s, species, rng)
        produced = rng.randrange(n)
        consumed = rng.randrange(n - 1)
        consumed += consumed >= produced
        rhs[produced].append(build())
        rhs[consumed].append(s.mul(s.const(-1.0), build()))
    eqs = [s.add(*terms) for terms in rhs]
    return eqs, species


def gen_region(n: int, seed: int, session: Session) -> tuple[list[Term], list[Term]]:
    if n < 1:
        raise ValueError("region family needs at least 1 property")
    rng = random.Random(seed)
    s = session
    p, temp = s.vars("p T")
    props = []
    for _ in range(n):
        terms = []
        for _ in range(REGION_TERMS):
            c = rng.uniform(-10.0, 10.0)
            i = rng.randint(0, 5)
            j = rng.randint(0, 8)
            reduced_p = s.div(p, s.const(16.53))
            reduced_t = s.sub(s.div(temp, s.const(1386.0)), s.const(0.5))
            terms.append(s.mul(s.const(c), s.pow(reduced_p, float(i)), s.pow(reduced_t, float(j))))
        props.append(s.add(*terms))
    return props, [p, temp]


GENERATORS = {"reaction": gen_reaction, "region": gen_region}

# sampling boxes for evaluation inputs
INPUT_RANGES = {"reaction": (0.1, 2.0)}
REGION_RANGES = ((1.0, 10.0), (280.0, 600.0))


def sample_inputs(family: str, n_vars: int, rng: random.Random) -> list[float]:
    if family == "region":
        return [rng.uniform(lo, hi) for lo, hi in REGION_RANGES]
    lo, hi = INPUT_RANGES[family]
    return [rng.uniform(lo, hi) for _ in range(n_vars)]
