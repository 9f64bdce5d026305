"""Separated monoids, their intercalation algebras, and finite string models.

A separated string is a tuple of generator names in which the name "1"
is the separator; its sort is its separator count.  Concatenation and
"replace the k-th separator" make the strings of each sort an algebra
satisfying a fixed equational theory (associativities, mixed permutation
and association, units), which check_da_axioms tests on random instances.

Same-sort string sets interpret types: products act pointwise, residuals
quantify over a declared finite universe (generators plus a length bound),
so residual results are bounded approximations while product results are
exact.  rho_embed recodes any indexed alphabet into three generators.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from functools import lru_cache

from .configurations import (
    Config,
    enumerate_configurations,
    config_sort,
    type_equivalent,
)
from .prover import Hypersequent, SearchBudgetExceeded, SearchCache, prove
from .types import (
    IMPLICATIVE_NODES,
    RESIDUAL_FREE_NODES,
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
    SortedType,
    Under,
    UnitI,
    UnitJ,
    print_type,
    sort_of,
    subformulas,
)

SEPARATOR = "1"
SepString = tuple  # tuple of generator names; "1" is the separator


def string_sort(x: SepString) -> int:
    return sum(1 for a in x if a == SEPARATOR)


def da_plus(x: SepString, y: SepString) -> SepString:
    return tuple(x) + tuple(y)


def da_times(k: int, x: SepString, y: SepString) -> SepString:
    """Replace the k-th separator of x by y."""
    positions = [i for i, a in enumerate(x) if a == SEPARATOR]
    if not 1 <= k <= len(positions):
        raise ValueError(f"separator index {k} out of range 1..{len(positions)}")
    p = positions[k - 1]
    return tuple(x[:p]) + tuple(y) + tuple(x[p + 1 :])


def unique_decomposition(x: SepString) -> list[SepString]:
    """The sort+1 maximal separator-free pieces, in order."""
    pieces, start = [], 0
    x = tuple(x)
    for i, a in enumerate(x):
        if a == SEPARATOR:
            pieces.append(x[start:i])
            start = i + 1
    pieces.append(x[start:])
    return pieces


def parse_string(text: str) -> SepString:
    """`a+1+b` with + between atoms; `0` is the empty string."""
    text = text.strip()
    if text == "0":
        return ()
    atoms = tuple(part.strip() for part in text.split("+"))
    if any(not a for a in atoms):
        raise ValueError(f"malformed string {text!r}")
    return atoms


def show_string(x: SepString) -> str:
    return "+".join(x) if x else "0"


# --------------------------------------------------------------------------
# Equational oracle.


@dataclass(frozen=True)
class AxiomCheck:
    name: str
    passes: int
    failures: int
    counterexample: str | None = None


def _random_string(rng: random.Random, alphabet, sort: int, max_atoms: int = 4):
    atoms = [rng.choice(alphabet) for _ in range(rng.randint(0, max_atoms))]
    atoms += [SEPARATOR] * sort
    rng.shuffle(atoms)
    return tuple(atoms)


def check_da_axioms(alphabet=("a", "b"), samples: int = 1000, seed: int = 0):
    """Test every defining equation on random instances that satisfy its
    side condition; returns one AxiomCheck per equation."""
    rng = random.Random(seed)
    alphabet = tuple(a for a in alphabet if a != SEPARATOR)

    def rs(sort, max_atoms=4):
        return _random_string(rng, alphabet, sort, max_atoms)

    checks: list[AxiomCheck] = []

    def run(name: str, draw) -> None:
        passes = failures = 0
        counterexample = None
        for _ in range(samples):
            lhs, rhs, note = draw()
            if lhs == rhs:
                passes += 1
            else:
                failures += 1
                if counterexample is None:
                    counterexample = f"{note}: {show_string(lhs)} != {show_string(rhs)}"
        checks.append(AxiomCheck(name, passes, failures, counterexample))

    def continuous_assoc():
        x, y, z = rs(rng.randint(0, 2)), rs(rng.randint(0, 2)), rs(rng.randint(0, 2))
        return (
            da_plus(da_plus(x, y), z),
            da_plus(x, da_plus(y, z)),
            f"x={show_string(x)} y={show_string(y)} z={show_string(z)}",
        )

    def disc_assoc_inward():
        # x *i (y *j z) = (x *i y) *(i+j-1) z
        sx, sy = rng.randint(1, 3), rng.randint(1, 3)
        x, y, z = rs(sx), rs(sy), rs(rng.randint(0, 2))
        i, j = rng.randint(1, sx), rng.randint(1, sy)
        return (
            da_times(i, x, da_times(j, y, z)),
            da_times(i + j - 1, da_times(i, x, y), z),
            f"i={i} j={j} x={show_string(x)} y={show_string(y)} z={show_string(z)}",
        )

    def disc_assoc_outward():
        # (x *i y) *j z = x *i (y *(j-i+1) z)   for i <= j <= i+s(y)-1
        sx, sy = rng.randint(1, 3), rng.randint(1, 3)
        x, y, z = rs(sx), rs(sy), rs(rng.randint(0, 2))
        i = rng.randint(1, sx)
        j = rng.randint(i, i + sy - 1)
        return (
            da_times(j, da_times(i, x, y), z),
            da_times(i, x, da_times(j - i + 1, y, z)),
            f"i={i} j={j} x={show_string(x)} y={show_string(y)} z={show_string(z)}",
        )

    def mixed_perm_high():
        # (x *i y) *j z = (x *(j-s(y)+1) z) *i y   for j > i+s(y)-1
        sy = rng.randint(0, 2)
        # need a separator of x strictly after position i+s(y)-1
        i_limit = rng.randint(1, 2)
        sx = rng.randint(i_limit + 1, i_limit + 2)
        x, y, z = rs(sx), rs(sy), rs(rng.randint(0, 2))
        i = rng.randint(1, i_limit)
        j = rng.randint(i + sy, sx + sy - 1)
        return (
            da_times(j, da_times(i, x, y), z),
            da_times(i, da_times(j - sy + 1, x, z), y),
            f"i={i} j={j} x={show_string(x)} y={show_string(y)} z={show_string(z)}",
        )

    def mixed_perm_low():
        # (x *i z) *j y = (x *j y) *(i+s(y)-1) z   for j < i
        sy = rng.randint(0, 2)
        sx = rng.randint(2, 4)
        x, y, z = rs(sx), rs(sy), rs(rng.randint(0, 2))
        i = rng.randint(2, sx)
        j = rng.randint(1, i - 1)
        return (
            da_times(j, da_times(i, x, z), y),
            da_times(i + sy - 1, da_times(j, x, y), z),
            f"i={i} j={j} x={show_string(x)} y={show_string(y)} z={show_string(z)}",
        )

    def mixed_assoc_left():
        # (x + y) *i z = (x *i z) + y   for 1 <= i <= s(x)
        sx = rng.randint(1, 3)
        x, y, z = rs(sx), rs(rng.randint(0, 2)), rs(rng.randint(0, 2))
        i = rng.randint(1, sx)
        return (
            da_times(i, da_plus(x, y), z),
            da_plus(da_times(i, x, z), y),
            f"i={i} x={show_string(x)} y={show_string(y)} z={show_string(z)}",
        )

    def mixed_assoc_right():
        # (x + y) *i z = x + (y *(i-s(x)) z)   for s(x)+1 <= i <= s(x)+s(y)
        sx, sy = rng.randint(0, 2), rng.randint(1, 3)
        x, y, z = rs(sx), rs(sy), rs(rng.randint(0, 2))
        i = rng.randint(sx + 1, sx + sy)
        return (
            da_times(i, da_plus(x, y), z),
            da_plus(x, da_times(i - sx, y, z)),
            f"i={i} x={show_string(x)} y={show_string(y)} z={show_string(z)}",
        )

    def unit_plus():
        x = rs(rng.randint(0, 3))
        return (da_plus((), x), da_plus(x, ()), f"x={show_string(x)}")

    def unit_times_left():
        x = rs(rng.randint(0, 3))
        return (da_times(1, (SEPARATOR,), x), x, f"x={show_string(x)}")

    def unit_times_right():
        sx = rng.randint(1, 3)
        x = rs(sx)
        i = rng.randint(1, sx)
        return (da_times(i, x, (SEPARATOR,)), x, f"i={i} x={show_string(x)}")

    run("continuous-associativity", continuous_assoc)
    run("discontinuous-associativity-inward", disc_assoc_inward)
    run("discontinuous-associativity-outward", disc_assoc_outward)
    run("mixed-permutation-high", mixed_perm_high)
    run("mixed-permutation-low", mixed_perm_low)
    run("mixed-associativity-left", mixed_assoc_left)
    run("mixed-associativity-right", mixed_assoc_right)
    run("unit-concatenation", unit_plus)
    run("unit-intercalation-left", unit_times_left)
    run("unit-intercalation-right", unit_times_right)
    return checks


# --------------------------------------------------------------------------
# Same-sort sets and the powerset operations.


@dataclass(frozen=True)
class SameSortSet:
    sort: int
    elements: frozenset

    def __post_init__(self):
        for x in self.elements:
            if string_sort(x) != self.sort:
                raise ValueError(
                    f"{show_string(x)} has sort {string_sort(x)}, not {self.sort}"
                )

    @classmethod
    def of(cls, elements, sort: int | None = None) -> "SameSortSet":
        elements = frozenset(tuple(x) for x in elements)
        if sort is None:
            sorts = {string_sort(x) for x in elements}
            if len(sorts) != 1:
                raise ValueError("cannot infer the sort of this set")
            sort = sorts.pop()
        return cls(sort, elements)

    def __iter__(self):
        return iter(sorted(self.elements))

    def __len__(self):
        return len(self.elements)

    def __contains__(self, x):
        return tuple(x) in self.elements


@dataclass(frozen=True)
class Universe:
    """Generator alphabet plus the length bound used by residuals."""

    generators: tuple[str, ...]
    maxlen: int

    def __post_init__(self):
        if SEPARATOR in self.generators:
            raise ValueError("the separator is implicit; do not declare it")

    def strings(self, sort: int) -> tuple[SepString, ...]:
        return _universe_strings(self.generators, self.maxlen, sort)


@lru_cache(maxsize=256)
def _universe_strings(generators, maxlen, sort):
    alphabet = generators + (SEPARATOR,)
    out = []
    for n in range(maxlen + 1):
        for combo in itertools.product(alphabet, repeat=n):
            if string_sort(combo) == sort:
                out.append(combo)
    return tuple(out)


def set_concat(a: SameSortSet, b: SameSortSet) -> SameSortSet:
    return SameSortSet(
        a.sort + b.sort,
        frozenset(da_plus(x, y) for x in a.elements for y in b.elements),
    )


def set_wrap(k: int, a: SameSortSet, b: SameSortSet) -> SameSortSet:
    if not 1 <= k <= a.sort:
        raise ValueError(f"separator index {k} out of range 1..{a.sort}")
    return SameSortSet(
        a.sort + b.sort - 1,
        frozenset(da_times(k, x, y) for x in a.elements for y in b.elements),
    )


def set_under(a: SameSortSet, b: SameSortSet, universe: Universe) -> SameSortSet:
    target = b.sort - a.sort
    if target < 0:
        raise ValueError("no strings of negative sort")
    members = [
        d
        for d in universe.strings(target)
        if all(da_plus(x, d) in b.elements for x in a.elements)
    ]
    return SameSortSet(target, frozenset(members))


def set_over(b: SameSortSet, a: SameSortSet, universe: Universe) -> SameSortSet:
    target = b.sort - a.sort
    if target < 0:
        raise ValueError("no strings of negative sort")
    members = [
        d
        for d in universe.strings(target)
        if all(da_plus(d, x) in b.elements for x in a.elements)
    ]
    return SameSortSet(target, frozenset(members))


def set_up(k: int, b: SameSortSet, a: SameSortSet, universe: Universe) -> SameSortSet:
    target = b.sort - a.sort + 1
    if target < 1 or not 1 <= k <= target:
        raise ValueError(f"separator index {k} out of range 1..{max(target, 0)}")
    members = [
        d
        for d in universe.strings(target)
        if all(da_times(k, d, x) in b.elements for x in a.elements)
    ]
    return SameSortSet(target, frozenset(members))


def set_down(k: int, a: SameSortSet, b: SameSortSet, universe: Universe) -> SameSortSet:
    if not 1 <= k <= a.sort:
        raise ValueError(f"separator index {k} out of range 1..{a.sort}")
    target = b.sort - a.sort + 1
    if target < 0:
        raise ValueError("no strings of negative sort")
    members = [
        d
        for d in universe.strings(target)
        if all(da_times(k, x, d) in b.elements for x in a.elements)
    ]
    return SameSortSet(target, frozenset(members))


# --------------------------------------------------------------------------
# Valuations and type interpretation.


class Valuation:
    """Finite interpretation of primitives inside a bounded universe."""

    def __init__(self, universe: Universe, assignment: dict):
        self.universe = universe
        self.assignment = dict(assignment)
        for name, sset in self.assignment.items():
            if not isinstance(sset, SameSortSet):
                raise TypeError(f"value of {name!r} must be a SameSortSet")

    def of(self, prim: Prim) -> SameSortSet:
        try:
            sset = self.assignment[prim.name]
        except KeyError:
            raise ValueError(f"unbound primitive {prim.name!r}") from None
        if sset.sort != prim.sort:
            raise ValueError(
                f"valuation gives {prim.name!r} sort {sset.sort},"
                f" declared {prim.sort}"
            )
        return sset


def interpret_type(t: SortedType, v: Valuation) -> SameSortSet:
    u = v.universe
    unit_i = SameSortSet(0, frozenset({()}))
    unit_j = SameSortSet(1, frozenset({(SEPARATOR,)}))
    match t:
        case Prim():
            return v.of(t)
        case UnitI():
            return unit_i
        case UnitJ():
            return unit_j
        case Product(a, b):
            return set_concat(interpret_type(a, v), interpret_type(b, v))
        case DiscProduct(k, a, b):
            return set_wrap(k, interpret_type(a, v), interpret_type(b, v))
        case Under(a, b):
            return set_under(interpret_type(a, v), interpret_type(b, v), u)
        case Over(b, a):
            return set_over(interpret_type(b, v), interpret_type(a, v), u)
        case Extract(k, b, a):
            return set_up(k, interpret_type(b, v), interpret_type(a, v), u)
        case Infix(k, a, b):
            return set_down(k, interpret_type(a, v), interpret_type(b, v), u)
        case NondetExtract(b, a):
            bb, aa = interpret_type(b, v), interpret_type(a, v)
            d = bb.sort - aa.sort + 1
            result = set_up(1, bb, aa, u)
            for i in range(2, d + 1):
                step = set_up(i, bb, aa, u)
                result = SameSortSet(result.sort, result.elements & step.elements)
            return result
        case NondetInfix(a, b):
            aa, bb = interpret_type(a, v), interpret_type(b, v)
            d = bb.sort - aa.sort + 1
            result = set_down(1, aa, bb, u)
            for i in range(2, d + 1):
                step = set_down(i, aa, bb, u)
                result = SameSortSet(result.sort, result.elements & step.elements)
            return result
        case LeftProj(a):
            return set_over(interpret_type(a, v), unit_j, u)
        case RightProj(a):
            return set_under(unit_j, interpret_type(a, v), u)
        case Split(k, a):
            return set_up(k, interpret_type(a, v), unit_i, u)
    raise TypeError(f"not a type: {t!r}")


def interpret_config(tokens: Config, v: Valuation) -> SameSortSet:
    return interpret_type(type_equivalent(tokens), v)


def residual_free(t: SortedType) -> bool:
    return all(isinstance(s, RESIDUAL_FREE_NODES) for s in subformulas(t))


@dataclass(frozen=True)
class ModelCheck:
    holds: bool
    exact: bool
    witness: SepString | None = None


def check_sequent_in_model(h: Hypersequent, v: Valuation) -> ModelCheck:
    """Inclusion of the antecedent's denotation in the succedent's.

    Exact when every type in the sequent is residual-free; otherwise the
    verdict is a bounded-universe advisory and any witness is only a
    falsification candidate.
    """
    lhs = interpret_config(h.antecedent, v)
    rhs = interpret_type(h.succedent, v)
    exact = residual_free(h.succedent) and all(
        residual_free(tok.owner)
        for tok in h.antecedent
        if isinstance(tok, Segment)
    )
    extra = lhs.elements - rhs.elements
    witness = min(extra) if extra else None
    return ModelCheck(holds=not extra, exact=exact, witness=witness)


# --------------------------------------------------------------------------
# The three-generator recoding.


def rho_embed(x: SepString, alphabet) -> SepString:
    """Atom-wise image: the i-th alphabet entry goes to a b^i a; the
    separator stays put.  Injective and sort-preserving."""
    alphabet = tuple(alphabet)
    index = {name: i + 1 for i, name in enumerate(alphabet)}
    out: list[str] = []
    for atom in x:
        if atom == SEPARATOR:
            out.append(SEPARATOR)
        else:
            try:
                i = index[atom]
            except KeyError:
                raise ValueError(f"atom {atom!r} not in the alphabet") from None
            out.append("a")
            out.extend("b" * i)
            out.append("a")
    return tuple(out)


def rho_set(xs, alphabet) -> frozenset:
    return frozenset(rho_embed(x, alphabet) for x in xs)


# --------------------------------------------------------------------------
# Bounded canonical interpretations: all configurations over segments of
# subformulas that prove a goal type, up to a token bound.


@dataclass(frozen=True)
class CanonicalSlice:
    goal_type: SortedType
    axioms: tuple
    token_bound: int
    members: frozenset


def _signed_counts(counts: dict, t: SortedType, sign: int) -> None:
    match t:
        case Prim(name, _):
            counts[name] = counts.get(name, 0) + sign
        case UnitI() | UnitJ():
            pass
        case Product(a, b) | DiscProduct(_, a, b):
            _signed_counts(counts, a, sign)
            _signed_counts(counts, b, sign)
        case Under(a, b) | Infix(_, a, b) | NondetInfix(a, b):
            _signed_counts(counts, a, -sign)
            _signed_counts(counts, b, sign)
        case Over(b, a) | Extract(_, b, a) | NondetExtract(b, a):
            _signed_counts(counts, b, sign)
            _signed_counts(counts, a, -sign)
        case LeftProj(a) | RightProj(a) | Split(_, a):
            _signed_counts(counts, a, sign)


def _sequent_balance(h: Hypersequent) -> dict:
    """Per-primitive antecedent-minus-succedent signed occurrence counts.

    Every rule of the calculus preserves this vector, and each use of a
    ground axiom shifts it by the axiom's own balance, so feasibility is
    a necessary condition for derivability (the usual count invariance).
    """
    counts: dict = {}
    for tok in h.antecedent:
        if isinstance(tok, Segment) and tok.index == 0:
            _signed_counts(counts, tok.owner, +1)
    _signed_counts(counts, h.succedent, -1)
    return {name: value for name, value in counts.items() if value}


def _balance_feasible(balance: dict, axiom_vectors, max_uses: int = 8) -> bool:
    if not balance:
        return True
    if not axiom_vectors:
        return False
    names = set(balance)
    for vec in axiom_vectors:
        names.update(vec)
    for uses in itertools.product(range(max_uses + 1), repeat=len(axiom_vectors)):
        if all(
            balance.get(name, 0)
            - sum(k * vec.get(name, 0) for k, vec in zip(uses, axiom_vectors))
            == 0
            for name in names
        ):
            return True
    return False


def _axioms_unusable(balance: dict, axiom_vectors, max_uses: int = 8) -> bool:
    """True when count invariance forces zero axiom uses for this goal."""
    if balance or not axiom_vectors:
        return False
    names = set()
    for vec in axiom_vectors:
        names.update(vec)
    for uses in itertools.product(range(max_uses + 1), repeat=len(axiom_vectors)):
        if not any(uses):
            continue
        if all(
            sum(k * vec.get(name, 0) for k, vec in zip(uses, axiom_vectors)) == 0
            for name in names
        ):
            return False
    return True


def canonical_slice(
    c: SortedType,
    axioms=(),
    bound: int = 6,
    *,
    max_depth: int = 6,
    max_nodes_per_candidate: int = 50_000,
) -> CanonicalSlice:
    """Configurations over subformula segments, up to `bound` tokens, that
    the prover derives as antecedents of the goal type.

    The goal type must use implicative connectives only.  With axioms the
    search runs depth-bounded with Cut over the subformula pool of the
    goal and axioms, so membership means provable within those bounds;
    candidates whose search exhausts max_nodes_per_candidate are left out.
    """
    bad = [
        print_type(s)
        for s in subformulas(c)
        if not isinstance(s, IMPLICATIVE_NODES)
    ]
    if bad:
        raise ValueError(
            f"{print_type(c)} is outside the implicative fragment: {', '.join(bad)}"
        )
    axioms = tuple(axioms)
    pool: dict[SortedType, None] = {}
    for s in subformulas(c):
        pool[s] = None
    for ax in axioms:
        for s in subformulas(ax.succedent):
            pool[s] = None
        for tok in ax.antecedent:
            if isinstance(tok, Segment):
                for s in subformulas(tok.owner):
                    pool[s] = None
    target = sort_of(c)
    cache = SearchCache()
    axiom_vectors = tuple(_sequent_balance(ax) for ax in axioms)
    members = []
    for tokens in enumerate_configurations(tuple(pool), bound, sort=target):
        goal = Hypersequent(tokens, c)
        balance = _sequent_balance(goal)
        if not _balance_feasible(balance, axiom_vectors):
            continue
        try:
            if axioms and not _axioms_unusable(balance, axiom_vectors):
                found = prove(
                    goal,
                    axioms=axioms,
                    max_depth=max_depth,
                    cut_pool=tuple(pool),
                    cache=cache,
                    max_nodes=max_nodes_per_candidate,
                )
            else:
                # count invariance rules the axioms out, so the terminating
                # cut-free search decides the candidate outright
                found = prove(goal, max_nodes=max_nodes_per_candidate)
        except SearchBudgetExceeded:
            continue
        if found:
            members.append(tokens)
    return CanonicalSlice(c, axioms, bound, frozenset(members))


# --------------------------------------------------------------------------
# Model files.
#
#   generators a b
#   maxlen 4
#   val p = {a+1+b, b+1+a}
#
# `0` is the empty string and `1` the separator.


def parse_model(text: str) -> Valuation:
    generators: tuple[str, ...] | None = None
    maxlen: int | None = None
    raw_vals: dict[str, frozenset] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if line.startswith("generators"):
                generators = tuple(line.split()[1:])
                if not generators:
                    raise ValueError("no generators listed")
            elif line.startswith("maxlen"):
                parts = line.split()
                if len(parts) != 2 or not parts[1].isdigit():
                    raise ValueError("expected `maxlen N`")
                maxlen = int(parts[1])
            elif line.startswith("val"):
                body = line[3:].strip()
                name, eq, rhs = body.partition("=")
                if not eq:
                    raise ValueError("expected `val name = {...}`")
                name = name.strip()
                rhs = rhs.strip()
                if not (rhs.startswith("{") and rhs.endswith("}")):
                    raise ValueError("expected a {...} set")
                inner = rhs[1:-1].strip()
                strings = (
                    frozenset(parse_string(p) for p in inner.split(","))
                    if inner
                    else frozenset()
                )
                raw_vals[name] = strings
            else:
                raise ValueError(f"unrecognised directive {line.split()[0]!r}")
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    if generators is None:
        raise ValueError("model file must declare generators")
    if maxlen is None:
        raise ValueError("model file must declare maxlen")
    universe = Universe(generators, maxlen)
    assignment = {}
    for name, strings in raw_vals.items():
        if strings:
            assignment[name] = SameSortSet.of(strings)
        else:
            assignment[name] = SameSortSet(0, frozenset())
    return Valuation(universe, assignment)
