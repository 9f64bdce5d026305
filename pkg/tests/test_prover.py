import random

import pytest
from hypothesis import given, settings, strategies as st

from dispcalc.configurations import config_sort, wrap
from dispcalc.prover import (
    Bindings,
    Derivation,
    Hypersequent,
    RuleInstance,
    SearchBudgetExceeded,
    check_derivation,
    clear_prove_cache,
    eta_expand,
    expansions,
    measure,
    parse_sequent,
    prove,
)
from dispcalc.types import (
    SEP,
    Extract,
    NondetExtract,
    Over,
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
    print_type,
    sort_of,
)

from gen import DEFAULT_PRIMS, iter_types, random_type

SIG = Signature({"n": 0, "s": 0, "p": 1})
N, S, P = SIG.primitive("n"), SIG.primitive("s"), SIG.primitive("p")


def seq(text):
    return parse_sequent(text, SIG)


class TestMeasure:
    def test_primitive_identity(self):
        assert measure(seq("n => n")) == 0

    def test_unit(self):
        assert measure(seq(" => I")) == 1

    def test_figure_of_j(self):
        assert measure(seq("J => J")) == 2

    def test_occurrences_counted_once(self):
        # a sort-1 type occurrence contributes its connectives once,
        # not once per segment
        h = seq("p up{1} p => p up{1} p")
        assert measure(h) == 2


class TestExpansions:
    def test_primitive_axiom_only(self):
        insts = expansions(seq("n => n"))
        assert [i.rule for i in insts] == ["Ax"]

    def test_empty_to_unit(self):
        insts = expansions(seq(" => I"))
        assert [i.rule for i in insts] == ["IR"]

    def test_figure_of_j_has_jl(self):
        insts = expansions(seq("J => J"))
        jl = [i for i in insts if i.rule == "JL"]
        assert jl and jl[0].premises == (seq("1 => J"),)

    def test_under_left(self):
        insts = expansions(seq("n, n\\s => s"))
        under = [i for i in insts if i.rule == "\\L"]
        assert any(i.premises == (seq("n => n"), seq("s => s")) for i in under)

    def test_sort_preservation_and_descent(self):
        rng = random.Random(5)
        for _ in range(120):
            t = random_type(rng, connectives=rng.randint(0, 3))
            goal = Hypersequent(figure_of(t), t)
            m = measure(goal)
            for inst in expansions(goal):
                for p in inst.premises:
                    assert config_sort(p.antecedent) == sort_of(p.succedent)
                    assert measure(p) < m


class TestProve:
    def test_eta_by_search(self):
        t = parse_type("(n\\s) up{1} n", SIG)
        assert prove(Hypersequent(figure_of(t), t))

    def test_separator_proves_discontinuous_unit(self):
        assert prove(seq("1 => J"))

    def test_distinct_primitives_unprovable(self):
        assert prove(seq("n => s")) == []

    def test_results_pass_checking(self):
        rng = random.Random(11)
        for _ in range(60):
            t = random_type(rng, connectives=rng.randint(0, 3))
            for d in prove(Hypersequent(figure_of(t), t), max_solutions=3):
                assert check_derivation(d) == []

    def test_multiple_solutions_distinct(self):
        ds = prove(seq("n, n\\s => s"), max_solutions=5)
        assert len(ds) == len(set(ds))

    def test_budget_error_is_distinct(self):
        clear_prove_cache()
        with pytest.raises(SearchBudgetExceeded):
            prove(seq("n, n\\s => s"), max_nodes=1)

    def test_deterministic(self):
        h = seq("n, (s/s), (n\\s) => s")
        first = prove(h, max_solutions=4)
        clear_prove_cache()
        second = prove(h, max_solutions=4)
        assert first == second

    def test_particle_verb_sentences(self):
        v = parse_type("lp(split{1}(n\\s) UP n)", SIG)
        grammatical = [
            (Segment(N, 0), Segment(v, 0), Segment(N, 0), Segment(v, 1)),
            (Segment(N, 0), Segment(v, 0), Segment(v, 1), Segment(N, 0)),
        ]
        for ante in grammatical:
            found = prove(Hypersequent(ante, S))
            assert found and check_derivation(found[0]) == []
        scrambled = (Segment(N, 0), Segment(N, 0), Segment(v, 0), Segment(v, 1))
        assert prove(Hypersequent(scrambled, S)) == []

    def test_invalid_goal_rejected(self):
        with pytest.raises(ValueError):
            prove(Hypersequent((SEP,), UnitI()))


class TestCutAndAxioms:
    def test_cut_still_proves(self):
        h = seq("n, n\\s => s")
        assert prove(h, cut=True, max_depth=6)

    def test_cut_does_not_prove_garbage(self):
        assert prove(seq("n => s"), cut=True, max_depth=6) == []

    def test_ground_axiom(self):
        q = Prim("q", 0)
        ax = Hypersequent((Segment(q, 0),), N)
        goal = Hypersequent((Segment(q, 0),), N)
        found = prove(goal, axioms=(ax,))
        assert found and check_derivation(found[0]) == []

    def test_axiom_feeds_rule(self):
        q = Prim("q", 0)
        ax = Hypersequent((Segment(q, 0),), N)
        goal = Hypersequent(
            (Segment(q, 0), Segment(Under(N, S), 0)), S
        )
        found = prove(goal, axioms=(ax,))
        assert found and check_derivation(found[0]) == []

    def test_sorted_axiom_with_substitution(self):
        # the axiom antecedent has a gapped occurrence, so matching must
        # recurse through the gap
        ante = (Segment(P, 0), Segment(N, 0), Segment(P, 1))
        ax = Hypersequent(ante, S)
        found = prove(Hypersequent(ante, S), axioms=(ax,))
        assert found and check_derivation(found[0]) == []
        axr_nodes = [found[0]]
        assert found[0].rule == "AxR"
        assert {p.succedent for p in found[0].instance.premises} == {P, N}

    def test_cut_admissible_on_small_sample(self):
        rng = random.Random(23)
        pool = [t for t in iter_types((Prim("n", 0), Prim("s", 0)), 2)]
        for _ in range(40):
            t = rng.choice(pool)
            h = Hypersequent(figure_of(t), t)
            with_cut = bool(prove(h, cut=True, max_depth=6))
            without = bool(prove(h))
            assert with_cut == without


class TestCheckDerivation:
    def test_valid_eta_chain(self):
        d = prove(seq("J => J"))[0]
        assert check_derivation(d) == []

    def test_axiom_restricted_to_primitives(self):
        t = parse_type("n\\s", SIG)
        bogus = Derivation(
            RuleInstance("Ax", Hypersequent(figure_of(t), t), ())
        )
        problems = check_derivation(bogus)
        assert any("primitive" in p for p in problems)

    def test_wrong_premise_count_flagged(self):
        t = NondetExtract(P, N)  # two gap choices, so UPR wants 2 premises
        goal = Hypersequent(figure_of(t), t)
        one = Hypersequent(wrap(figure_of(t), 1, figure_of(N)), P)
        bogus = Derivation(
            RuleInstance("UPR", goal, (one,)),
            (eta_helper(one),),
        )
        problems = check_derivation(bogus)
        assert any("premise count" in p for p in problems)

    def test_tampered_conclusion_flagged(self):
        d = prove(seq("n, n\\s => s"))[0]
        inst = d.instance
        tampered = Derivation(
            RuleInstance(
                inst.rule,
                Hypersequent(inst.conclusion.antecedent, N),
                inst.premises,
                inst.bindings,
            ),
            d.children,
        )
        assert check_derivation(tampered) != []


def eta_helper(h):
    found = prove(h)
    assert found
    return found[0]


class TestEtaExpand:
    def test_primitive_is_single_axiom(self):
        d = eta_expand(N)
        assert d.rule == "Ax" and d.children == ()

    def test_continuous_unit(self):
        d = eta_expand(UnitI())
        assert d.rule == "IL"
        assert d.children[0].rule == "IR"
        assert check_derivation(d) == []

    def test_under(self):
        d = eta_expand(Under(N, S))
        assert d.rule == "\\R"
        assert d.size() == 4
        assert check_derivation(d) == []

    def test_exhaustive_small(self):
        for t in iter_types(DEFAULT_PRIMS, 2):
            d = eta_expand(t)
            assert d.conclusion == Hypersequent(figure_of(t), t)
            assert check_derivation(d) == [], print_type(t)

    @given(st.integers(0, 10**9))
    @settings(max_examples=100, deadline=None)
    def test_random_types(self, seed):
        rng = random.Random(seed)
        t = random_type(rng, connectives=rng.randint(0, 5))
        d = eta_expand(t)
        assert check_derivation(d) == []


class TestResiduation:
    @given(st.integers(0, 10**9))
    @settings(max_examples=40, deadline=None)
    def test_three_way_equivalence(self, seed):
        rng = random.Random(seed)
        a = random_type(rng, connectives=rng.randint(0, 1))
        b = random_type(rng, connectives=rng.randint(0, 1))
        c = random_type(rng, connectives=rng.randint(0, 2))
        if sort_of(c) != sort_of(a) + sort_of(b):
            return
        r1 = bool(prove(Hypersequent(figure_of(a) + figure_of(b), c)))
        r2 = bool(prove(Hypersequent(figure_of(a), Over(c, b))))
        r3 = bool(prove(Hypersequent(figure_of(b), Under(a, c))))
        assert r1 == r2 == r3


class TestParseSequent:
    def test_empty_antecedent(self):
        assert seq(" => I").antecedent == ()

    def test_mismatched_sorts_rejected(self):
        with pytest.raises(ValueError):
            seq("p => s")

    def test_needs_one_arrow(self):
        from dispcalc.types import TypeSyntaxError

        with pytest.raises(TypeSyntaxError):
            seq("n => n => n")
