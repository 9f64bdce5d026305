import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from dispcalc.algebra import (
    SEPARATOR,
    CanonicalSlice,
    SameSortSet,
    Universe,
    Valuation,
    canonical_slice,
    check_da_axioms,
    check_sequent_in_model,
    da_plus,
    da_times,
    interpret_config,
    interpret_type,
    parse_model,
    parse_string,
    rho_embed,
    rho_set,
    residual_free,
    set_concat,
    set_over,
    set_under,
    set_up,
    set_wrap,
    show_string,
    string_sort,
    unique_decomposition,
)
from dispcalc.prover import Hypersequent, prove
from dispcalc.types import (
    SEP,
    Prim,
    Product,
    Segment,
    Signature,
    Split,
    Under,
    UnitI,
    UnitJ,
    figure_of,
    parse_type,
)

SIG = Signature({"n": 0, "s": 0, "p": 1})
N, S, P = SIG.primitive("n"), SIG.primitive("s"), SIG.primitive("p")


class TestStrings:
    def test_plus_is_concatenation(self):
        assert da_plus(("a",), ("b",)) == ("a", "b")
        x = ("a", "1", "b")
        assert da_plus((), x) == x == da_plus(x, ())

    def test_times_replaces_separator(self):
        assert da_times(1, ("a", "1", "b"), ("c",)) == ("a", "c", "b")
        assert da_times(1, ("1",), ("x", "1", "y")) == ("x", "1", "y")

    def test_times_out_of_range(self):
        with pytest.raises(ValueError):
            da_times(2, ("a", "1"), ())

    def test_sorts_add(self):
        x, y = ("a", "1"), ("1", "1", "b")
        assert string_sort(da_plus(x, y)) == 3
        assert string_sort(da_times(1, y, x)) == string_sort(y) + string_sort(x) - 1

    def test_parse_show_roundtrip(self):
        for text in ["0", "a", "a+1+b", "1+1"]:
            assert show_string(parse_string(text)) == text

    def test_unique_decomposition(self):
        assert unique_decomposition(("a", "1", "b")) == [("a",), ("b",)]
        assert unique_decomposition(("1", "1")) == [(), (), ()]
        assert unique_decomposition(("a", "b", "1", "c")) == [("a", "b"), ("c",)]

    @given(st.integers(0, 10**9))
    @settings(max_examples=200, deadline=None)
    def test_decomposition_roundtrip(self, seed):
        rng = random.Random(seed)
        atoms = [rng.choice("ab1") for _ in range(rng.randint(0, 8))]
        x = tuple(atoms)
        pieces = unique_decomposition(x)
        assert len(pieces) == string_sort(x) + 1
        rebuilt = list(pieces[0])
        for piece in pieces[1:]:
            rebuilt.append(SEPARATOR)
            rebuilt.extend(piece)
        assert tuple(rebuilt) == x


class TestAxiomOracle:
    def test_all_axioms_pass(self):
        checks = check_da_axioms(samples=400, seed=3)
        assert len(checks) == 10
        for check in checks:
            assert check.failures == 0, check

    def test_seeded_reproducibility(self):
        a = check_da_axioms(samples=50, seed=9)
        b = check_da_axioms(samples=50, seed=9)
        assert a == b

    def test_concrete_discontinuous_associativity(self):
        x, y, z = ("a", "1", "1", "b"), ("c", "1", "d"), ("e",)
        lhs = da_times(1, x, da_times(1, y, z))
        rhs = da_times(1, da_times(1, x, y), z)
        assert lhs == rhs == ("a", "c", "e", "d", "1", "b")

    def test_concrete_mixed_permutation(self):
        x, y, z = ("a", "1", "b", "1", "c"), ("d",), ("e",)
        # with i=1 and sortless y, separator j=1 of the result sits past
        # y's block, which is separator 2 of the original host
        lhs = da_times(1, da_times(1, x, y), z)
        rhs = da_times(1, da_times(2, x, z), y)
        assert lhs == rhs == ("a", "d", "b", "e", "c")


class TestSetOps:
    def test_concat(self):
        a = SameSortSet.of([("a",)])
        b = SameSortSet.of([("b",)])
        assert set_concat(a, b).elements == {("a", "b")}

    def test_wrap(self):
        host = SameSortSet.of([("a", "1", "b")])
        fill = SameSortSet.of([("c",)])
        assert set_wrap(1, host, fill).elements == {("a", "c", "b")}

    def test_over_residual(self):
        u = Universe(("a", "b"), 2)
        got = set_over(SameSortSet.of([("a", "b")]), SameSortSet.of([("b",)]), u)
        assert got.elements == {("a",)}

    def test_under_residual_with_empty_argument_is_whole_universe(self):
        u = Universe(("a",), 1)
        got = set_under(SameSortSet(0, frozenset()), SameSortSet(0, frozenset()), u)
        assert got.elements == set(u.strings(0))

    def test_same_sort_enforced(self):
        with pytest.raises(ValueError):
            SameSortSet(0, frozenset({("1",)}))
        with pytest.raises(ValueError):
            SameSortSet.of([("a",), ("1",)])


class TestInterpretation:
    def setup_method(self):
        self.universe = Universe(("a", "b"), 3)
        self.v = Valuation(
            self.universe,
            {
                "n": SameSortSet.of([("a",)]),
                "s": SameSortSet.of([("a", "b")]),
                "p": SameSortSet.of([("a", "1", "b")]),
            },
        )

    def test_units(self):
        assert interpret_type(UnitI(), self.v).elements == {()}
        assert interpret_type(UnitJ(), self.v).elements == {("1",)}

    def test_split_enumerates_gap_insertions(self):
        u = Universe(("a",), 2)
        v = Valuation(u, {"s": SameSortSet.of([("a",)])})
        got = interpret_type(Split(1, S), v)
        assert got.elements == {("1", "a"), ("a", "1")}

    def test_left_projection_matches_its_definition(self):
        # lp(p) is everything that gives p when a separator is appended
        got = interpret_type(parse_type("lp(p)", SIG), self.v)
        brute = {
            d
            for d in self.universe.strings(0)
            if da_plus(d, ("1",)) in interpret_type(P, self.v).elements
        }
        assert got.elements == brute

    def test_nondet_extract_is_intersection(self):
        t = parse_type("(p * p) UP n", SIG)
        direct = interpret_type(t, self.v)
        parts = [
            interpret_type(parse_type(f"(p * p) up{{{i}}} n", SIG), self.v)
            for i in (1, 2)
        ]
        assert direct.elements == parts[0].elements & parts[1].elements

    def test_config_interpretation_goes_through_type_equivalent(self):
        tokens = (SEP, Segment(N, 0))
        got = interpret_config(tokens, self.v)
        assert got.elements == {("1", "a")}
        assert interpret_config((), self.v).elements == {()}

    def test_unbound_primitive(self):
        with pytest.raises(ValueError):
            interpret_type(Prim("zz", 0), self.v)


class TestModelChecking:
    def setup_method(self):
        self.v = Valuation(
            Universe(("a", "b"), 3),
            {
                "n": SameSortSet.of([("a",)]),
                "s": SameSortSet.of([("b",)]),
            },
        )

    def test_residual_free_exact(self):
        h = Hypersequent(figure_of(Product(N, S)), Product(N, S))
        verdict = check_sequent_in_model(h, self.v)
        assert verdict.holds and verdict.exact

    def test_disjoint_primitives_yield_witness(self):
        h = Hypersequent((Segment(N, 0),), S)
        verdict = check_sequent_in_model(h, self.v)
        assert not verdict.holds
        assert verdict.witness == ("a",)

    def test_residuals_are_advisory(self):
        h = Hypersequent((Segment(N, 0), Segment(Under(N, S), 0)), S)
        v = Valuation(
            Universe(("a", "b"), 3),
            {"n": SameSortSet.of([("a",)]), "s": SameSortSet.of([("b",)])},
        )
        verdict = check_sequent_in_model(h, v)
        assert not verdict.exact
        assert verdict.holds

    def test_residual_free_predicate(self):
        assert residual_free(Product(N, UnitJ()))
        assert not residual_free(Under(N, S))


class TestRho:
    ALPHABET = ("g1", "g2", "g3")

    def test_separator_fixed(self):
        assert rho_embed(("1",), self.ALPHABET) == ("1",)

    def test_indexed_generator(self):
        assert rho_embed(("g2",), self.ALPHABET) == ("a", "b", "b", "a")

    def test_atomwise(self):
        got = rho_embed(("g1", "1", "g1"), self.ALPHABET)
        assert got == ("a", "b", "a", "1", "a", "b", "a")

    @given(st.integers(0, 10**9))
    @settings(max_examples=200, deadline=None)
    def test_homomorphism_and_injectivity(self, seed):
        rng = random.Random(seed)

        def rand_string(sort):
            atoms = [rng.choice(self.ALPHABET) for _ in range(rng.randint(0, 4))]
            atoms += [SEPARATOR] * sort
            rng.shuffle(atoms)
            return tuple(atoms)

        x, y = rand_string(rng.randint(0, 2)), rand_string(rng.randint(0, 2))
        rx, ry = rho_embed(x, self.ALPHABET), rho_embed(y, self.ALPHABET)
        assert string_sort(rx) == string_sort(x)
        assert rho_embed(da_plus(x, y), self.ALPHABET) == da_plus(rx, ry)
        if string_sort(x) >= 1:
            k = rng.randint(1, string_sort(x))
            assert rho_embed(da_times(k, x, y), self.ALPHABET) == da_times(k, rx, ry)
        assert (rx == ry) == (x == y)

    def test_intersection_distribution(self):
        rng = random.Random(4)
        for _ in range(50):
            sort = rng.randint(0, 2)
            family = []
            for _ in range(rng.randint(1, 3)):
                members = set()
                for _ in range(rng.randint(0, 4)):
                    atoms = [rng.choice(self.ALPHABET) for _ in range(rng.randint(0, 3))]
                    atoms += [SEPARATOR] * sort
                    rng.shuffle(atoms)
                    members.add(tuple(atoms))
                family.append(frozenset(members))
            meet = frozenset.intersection(*family)
            assert rho_set(meet, self.ALPHABET) == frozenset.intersection(
                *[rho_set(f, self.ALPHABET) for f in family]
            )


class TestCanonicalSlices:
    def test_primitive_slice_is_eta_only(self):
        got = canonical_slice(N, (), 3)
        assert got.members == {(Segment(N, 0),)}

    def test_axiom_adds_members(self):
        q = Prim("q", 0)
        ax = Hypersequent((Segment(q, 0),), N)
        got = canonical_slice(N, (ax,), 3)
        assert (Segment(q, 0),) in got.members
        assert (Segment(N, 0),) in got.members

    def test_figure_always_member(self):
        for text in ["n", "n\\s", "s up{1} n", "lp(p)"]:
            t = parse_type(text, SIG)
            got = canonical_slice(t, (), 5)
            assert figure_of(t) in got.members

    def test_members_reprove(self):
        t = parse_type("s up{1} n", SIG)
        got = canonical_slice(t, (), 5)
        for member in got.members:
            assert prove(Hypersequent(member, t))

    def test_non_implicative_rejected(self):
        with pytest.raises(ValueError):
            canonical_slice(Product(N, S), (), 3)
        with pytest.raises(ValueError):
            canonical_slice(UnitI(), (), 3)


class TestModelFiles:
    TEXT = """
# demo
generators a b
maxlen 3
val n = {a}
val s = {a+b, b}
val p = {a+1+b}
"""

    def test_parse(self):
        v = parse_model(self.TEXT)
        assert v.universe == Universe(("a", "b"), 3)
        assert v.of(N).elements == {("a",)}
        assert v.of(P).elements == {("a", "1", "b")}

    def test_sort_mismatch_caught(self):
        v = parse_model(self.TEXT)
        with pytest.raises(ValueError):
            v.of(Prim("p", 2))

    def test_errors_carry_line_numbers(self):
        with pytest.raises(ValueError) as exc:
            parse_model("generators a\nmaxlen x\n")
        assert "line 2" in str(exc.value)
        with pytest.raises(ValueError) as exc:
            parse_model("maxlen 2\nval p = {a}\n")
        assert "generators" in str(exc.value)
