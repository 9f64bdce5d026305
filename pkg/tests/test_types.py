import random

import pytest
from hypothesis import given, settings, strategies as st

from dispcalc.types import (
    SEP,
    DiscProduct,
    Extract,
    IllSortedType,
    Infix,
    LeftProj,
    NondetExtract,
    NondetInfix,
    Over,
    Prim,
    Product,
    RightProj,
    Segment,
    Signature,
    Split,
    TypeSyntaxError,
    Under,
    UnitI,
    UnitJ,
    connective_count,
    figure_of,
    parse_type,
    print_type,
    segments_of,
    sort_of,
    subformulas,
    validate_type,
)

from gen import DEFAULT_PRIMS, iter_types, random_type

SIG = Signature({"n": 0, "s": 0, "p": 1})
N, S, P = SIG.primitive("n"), SIG.primitive("s"), SIG.primitive("p")


class TestSortOf:
    def test_units(self):
        assert sort_of(UnitI()) == 0
        assert sort_of(UnitJ()) == 1

    def test_extract_over_same_primitive_has_one_gap(self):
        assert sort_of(Extract(1, P, P)) == 1
        p0 = Prim("q", 0)
        assert sort_of(Extract(1, p0, p0)) == 1

    def test_under_of_sort_zero(self):
        assert sort_of(Under(N, S)) == 0

    def test_synthetic_stack(self):
        # split{1}(n\s) has sort 1; UP n gives 2; lp takes it back to 1
        t = LeftProj(NondetExtract(Split(1, Under(N, S)), N))
        assert sort_of(Split(1, Under(N, S))) == 1
        assert sort_of(NondetExtract(Split(1, Under(N, S)), N)) == 2
        assert sort_of(t) == 1

    def test_negative_sort_raises(self):
        with pytest.raises(IllSortedType):
            sort_of(LeftProj(N))


class TestValidate:
    def test_unit_ok(self):
        assert validate_type(UnitJ()) == []

    def test_extract_index_out_of_range(self):
        problems = validate_type(Extract(2, S, N))
        assert len(problems) == 1
        assert "k=2 exceeds s(B)-s(A)+1=1" in problems[0]

    def test_projection_needs_sort(self):
        problems = validate_type(LeftProj(N))
        assert any("projection needs sort >= 1" in p for p in problems)

    def test_split_index_bound(self):
        assert validate_type(Split(2, N)) != []
        assert validate_type(Split(1, N)) == []

    def test_nondet_infix_gap_range(self):
        # d = s(B)-s(A)+1 must land in 1..s(A)
        assert validate_type(NondetInfix(P, P)) == []
        assert validate_type(NondetInfix(P, S)) != []
        assert validate_type(NondetInfix(P, Product(P, P))) != []

    def test_enumerated_types_all_validate(self):
        for t in iter_types(DEFAULT_PRIMS, 2):
            assert validate_type(t) == [], print_type(t)


class TestSegmentsAndFigures:
    def test_sort_zero_single_segment(self):
        assert segments_of(N) == (Segment(N, 0),)

    def test_extract_two_segments(self):
        t = Extract(1, P, P)
        assert segments_of(t) == (Segment(t, 0), Segment(t, 1))

    def test_split_two_segments(self):
        t = Split(1, S)
        assert len(segments_of(t)) == 2

    def test_figure_sort_zero_is_the_type(self):
        assert figure_of(N) == (Segment(N, 0),)

    def test_figure_interleaves_separators(self):
        t = Extract(1, P, P)
        assert figure_of(t) == (Segment(t, 0), SEP, Segment(t, 1))
        j = UnitJ()
        assert figure_of(j) == (Segment(j, 0), SEP, Segment(j, 1))

    @given(st.integers(0, 10**9))
    @settings(max_examples=150, deadline=None)
    def test_segment_count_is_sort_plus_one(self, seed):
        t = random_type(random.Random(seed), connectives=seed % 4)
        assert len(segments_of(t)) == sort_of(t) + 1
        fig = figure_of(t)
        assert sum(1 for tok in fig if tok is SEP or tok == SEP) == sort_of(t)


class TestParsePrint:
    def test_under(self):
        assert parse_type("n\\s", SIG) == Under(N, S)

    def test_lexical_assignment(self):
        t = parse_type("lp(split{1}(n\\s) UP n)", SIG)
        assert t == LeftProj(NondetExtract(Split(1, Under(N, S)), N))

    def test_extract(self):
        assert parse_type("s up{1} s", SIG) == Extract(1, S, S)

    def test_indexed_product_and_infix(self):
        assert parse_type("p o{1} n", SIG) == DiscProduct(1, P, N)
        assert parse_type("p dn{1} p", SIG) == Infix(1, P, P)

    def test_nondet(self):
        assert parse_type("s UP n", SIG) == NondetExtract(S, N)
        assert parse_type("p DN p", SIG) == NondetInfix(P, P)

    def test_units_and_projections(self):
        assert parse_type("I", SIG) == UnitI()
        assert parse_type("J", SIG) == UnitJ()
        assert parse_type("rp(p)", SIG) == RightProj(P)

    def test_nested_needs_parens(self):
        t = parse_type("(n * n) * n", SIG)
        assert t == Product(Product(N, N), N)
        with pytest.raises(TypeSyntaxError):
            parse_type("n * n * n", SIG)

    def test_syntax_error_positions(self):
        with pytest.raises(TypeSyntaxError) as exc:
            parse_type("n \\", SIG)
        assert "column" in str(exc.value)

    def test_unknown_primitive(self):
        with pytest.raises(TypeSyntaxError):
            parse_type("zz", SIG)

    def test_default_sort_signature(self):
        sig = Signature(default_sort=0)
        assert parse_type("whatever", sig) == Prim("whatever", 0)

    def test_ill_sorted_rejected(self):
        with pytest.raises(IllSortedType):
            parse_type("s up{2} n", SIG)

    @given(st.integers(0, 10**9))
    @settings(max_examples=300, deadline=None)
    def test_roundtrip(self, seed):
        rng = random.Random(seed)
        t = random_type(rng, connectives=rng.randint(0, 4))
        assert parse_type(print_type(t), SIG) == t


class TestMisc:
    def test_connective_count(self):
        assert connective_count(N) == 0
        assert connective_count(UnitI()) == 1
        assert connective_count(Under(N, Product(S, UnitJ()))) == 3

    def test_subformulas(self):
        t = Under(N, Product(S, N))
        subs = subformulas(t)
        assert set(subs) == {t, N, Product(S, N), S}

    def test_nondet_extract_sort_matches_first_extract(self):
        for t in iter_types(DEFAULT_PRIMS, 2):
            if isinstance(t, NondetExtract):
                ext = Extract(1, t.val, t.arg)
                if not validate_type(ext):
                    assert sort_of(t) == sort_of(ext)

    def test_signature_rules(self):
        sig = Signature()
        with pytest.raises(ValueError):
            sig.declare("split", 0)
        sig.declare("ok", 2)
        with pytest.raises(ValueError):
            sig.declare("ok", 1)
        with pytest.raises(ValueError):
            sig.declare("bad", -1)

    def test_signature_from_text(self):
        sig = Signature.from_text("# comment\nn 0\n\ns 1\n")
        assert sig.primitive("s") == Prim("s", 1)
        with pytest.raises(ValueError) as exc:
            Signature.from_text("n zero")
        assert "line 1" in str(exc.value)
