"""Shared generators for the test suite: exhaustive and random well-sorted
types, and random configurations over a type pool."""

from __future__ import annotations

import random

from dispcalc.types import (
    SEP,
    DiscProduct,
    Extract,
    Infix,
    LeftProj,
    NondetExtract,
    NondetInfix,
    Over,
    Prim,
    Product,
    RightProj,
    Segment,
    Split,
    Under,
    UnitI,
    UnitJ,
    sort_of,
)
from dispcalc.configurations import config_sort, is_configuration

DEFAULT_PRIMS = (Prim("n", 0), Prim("s", 0), Prim("p", 1))


def type_levels(prims, max_conn: int):
    """levels[c] = every well-sorted type with exactly c connectives."""
    levels = [list(prims)]
    for c in range(1, max_conn + 1):
        out = []
        if c == 1:
            out += [UnitI(), UnitJ()]
        for t in levels[c - 1]:
            st = sort_of(t)
            if st >= 1:
                out.append(LeftProj(t))
                out.append(RightProj(t))
            out += [Split(k, t) for k in range(1, st + 2)]
        for i in range(c):
            for a in levels[i]:
                for b in levels[c - 1 - i]:
                    sa, sb = sort_of(a), sort_of(b)
                    out.append(Product(a, b))
                    if sb >= sa:
                        out.append(Under(a, b))
                        out.append(Over(b, a))
                        out.append(NondetExtract(b, a))
                        out += [Extract(k, b, a) for k in range(1, sb - sa + 2)]
                    if sa >= 1:
                        out += [DiscProduct(k, a, b) for k in range(1, sa + 1)]
                        if sb >= sa - 1:
                            out += [Infix(k, a, b) for k in range(1, sa + 1)]
                        if 1 <= sb - sa + 1 <= sa:
                            out.append(NondetInfix(a, b))
        levels.append(out)
    return levels


def iter_types(prims, max_conn: int):
    for level in type_levels(prims, max_conn):
        yield from level


def random_type(rng: random.Random, prims=DEFAULT_PRIMS, connectives: int = 3):
    """A random well-sorted type with exactly `connectives` connectives."""
    if connectives == 0:
        return rng.choice(prims)
    for _ in range(80):
        t = _random_build(rng, prims, connectives)
        if t is not None:
            return t
    # dense fallback: wrap a primitive in splits, always well sorted
    t = rng.choice(prims)
    for _ in range(connectives):
        t = Split(rng.randint(1, sort_of(t) + 1), t)
    return t


def _random_build(rng, prims, budget):
    if budget == 0:
        return rng.choice(prims)
    shape = rng.random()
    if budget == 1 and shape < 0.15:
        return rng.choice((UnitI(), UnitJ()))
    if shape < 0.4:
        sub = _random_build(rng, prims, budget - 1)
        if sub is None:
            return None
        st = sort_of(sub)
        ctor = rng.choice(("lp", "rp", "split"))
        if ctor == "split":
            return Split(rng.randint(1, st + 1), sub)
        if st < 1:
            return None
        return LeftProj(sub) if ctor == "lp" else RightProj(sub)
    left_budget = rng.randint(0, budget - 1)
    a = _random_build(rng, prims, left_budget)
    b = _random_build(rng, prims, budget - 1 - left_budget)
    if a is None or b is None:
        return None
    sa, sb = sort_of(a), sort_of(b)
    options = [Product(a, b)]
    if sb >= sa:
        options += [
            Under(a, b),
            Over(b, a),
            NondetExtract(b, a),
            Extract(rng.randint(1, sb - sa + 1), b, a),
        ]
    if sa >= 1:
        options.append(DiscProduct(rng.randint(1, sa), a, b))
        if sb >= sa - 1:
            options.append(Infix(rng.randint(1, sa), a, b))
        if 1 <= sb - sa + 1 <= sa:
            options.append(NondetInfix(a, b))
    return rng.choice(options)


def random_configuration(rng: random.Random, pool, max_items: int = 4):
    """A random configuration over segments of the pooled types."""
    tokens = []
    for _ in range(rng.randint(0, max_items)):
        kind = rng.random()
        if kind < 0.25:
            tokens.append(SEP)
            continue
        t = rng.choice(pool)
        s = sort_of(t)
        tokens.append(Segment(t, 0))
        for j in range(1, s + 1):
            for sub in random_configuration(rng, pool, max_items=1):
                tokens.append(sub)
            tokens.append(Segment(t, j))
    result = tuple(tokens)
    assert is_configuration(result)
    return result


def random_preconfiguration(rng: random.Random, pool, max_tokens: int = 6):
    """Arbitrary token soup: segments of pooled types and separators."""
    vocab = [SEP]
    for t in pool:
        for j in range(sort_of(t) + 1):
            vocab.append(Segment(t, j))
    return tuple(rng.choice(vocab) for _ in range(rng.randint(0, max_tokens)))
