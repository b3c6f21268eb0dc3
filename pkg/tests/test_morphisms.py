import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import principal_factors
from jbtk.factors import HermIII, RectI, SpinIV, SymplII, parse_factor, rank
from jbtk.morphisms import (
    UNIT,
    ZERO,
    AdmissibilityError,
    Column,
    MorphismClass,
    MorphismError,
    NoRealization,
    RectRect,
    UnsupportedMorphism,
    admissible,
    block_from_matrix,
    block_literal,
    block_matrix,
    block_options,
    check_block,
    check_morphism,
    compose,
    identity,
    is_admissible,
    iter_morphisms,
    parse_block,
    standard_form,
    tro_multiplicity,
    zero_morphism,
)

P6 = principal_factors(6)


def single(f, g, b):
    return MorphismClass((f,), (g,), ((b,),))


@pytest.mark.parametrize(
    "block, src, tgt, ok",
    [
        (RectRect(1, 2), "I(2,3)", "I(8,7)", True),
        (Column(1), "III(2)", "II(5)", True),
        (Column(3), "II(3)", "II(8)", False),
        (Column(1), "III(3)", "II(5)", False),
        (Column(1), "I(2,3)", "III(5)", True),
        (Column(1), "I(2,3)", "III(4)", False),
        (Column(2), "III(3)", "I(6,7)", True),
        (Column(2), "III(3)", "I(5,7)", False),
        (UNIT, "IV(5)", "IV(7)", True),
        (UNIT, "IV(7)", "IV(5)", False),
        (UNIT, "I(1,2)", "IV(4)", True),
        (UNIT, "I(1,3)", "IV(5)", False),
    ],
)
def test_admissibility_table(block, src, tgt, ok):
    assert admissible(block, parse_factor(src), parse_factor(tgt)) is ok


def test_violation_message_names_inequality():
    with pytest.raises(AdmissibilityError, match=r"2αn≤N: 6>5") as exc:
        check_block(Column(1), HermIII(3), SymplII(5))
    assert (exc.value.lhs, exc.value.rhs) == (6, 5)


def test_unsupported_pairs_raise():
    with pytest.raises(UnsupportedMorphism):
        admissible(UNIT, SpinIV(5), HermIII(9))


@pytest.mark.parametrize("lit", [[2, 1], [3], "u", 0])
def test_block_literal_round_trip(lit):
    assert block_literal(parse_block(lit)) == lit


@pytest.mark.parametrize("bad", [[1, 2, 3], "x", -1, [-1], 1.5])
def test_bad_block_literal(bad):
    with pytest.raises(MorphismError):
        parse_block(bad)


def test_tro_expansion():
    assert block_matrix(RectRect(1, 2), RectI(2, 3), RectI(8, 7)).tolist() == [[1, 2], [2, 1]]
    assert block_matrix(Column(1), HermIII(2), SymplII(5)).tolist() == [[2]]
    assert block_matrix(Column(3), RectI(2, 3), HermIII(20)).tolist() == [[3, 3]]
    assert block_matrix(Column(3), HermIII(3), RectI(9, 9)).tolist() == [[3], [3]]


def test_block_from_matrix_parity():
    with pytest.raises(NoRealization, match="even"):
        block_from_matrix(np.array([[3]]), SymplII(3), HermIII(8))
    with pytest.raises(NoRealization):
        block_from_matrix(np.array([[1, 2], [1, 1]]), RectI(2, 3), RectI(9, 9))


@given(st.sampled_from(P6), st.sampled_from(P6), st.data())
def test_block_matrix_round_trip(f, g, data):
    b = data.draw(st.sampled_from(block_options(f, g)))
    assert block_from_matrix(block_matrix(b, f, g), f, g) == b


@given(st.sampled_from(P6), st.sampled_from(P6), st.data())
def test_rank_gate(f, g, data):
    b = data.draw(st.sampled_from(block_options(f, g)))
    if b != ZERO:
        assert rank(f) <= rank(g)


def test_compose_example():
    f = single(HermIII(2), RectI(3, 3), Column(1))
    g = single(RectI(3, 3), HermIII(8), Column(1))
    assert compose(g, f) == single(HermIII(2), HermIII(8), Column(2))


def test_compose_mismatch():
    f = single(HermIII(3), HermIII(4), Column(1))
    with pytest.raises(MorphismError):
        compose(f, f)


def _morphisms(fs):
    return st.sampled_from(fs).flatmap(
        lambda f: st.sampled_from(fs).flatmap(
            lambda g: st.sampled_from(block_options(f, g)).map(lambda b: single(f, g, b))
        )
    )


@settings(max_examples=200)
@given(st.sampled_from(P6), st.sampled_from(P6), st.sampled_from(P6), st.sampled_from(P6), st.data())
def test_composition_closed_and_associative(a, b, c, d, data):
    f = single(a, b, data.draw(st.sampled_from(block_options(a, b))))
    g = single(b, c, data.draw(st.sampled_from(block_options(b, c))))
    h = single(c, d, data.draw(st.sampled_from(block_options(c, d))))
    gf = compose(g, f)
    assert is_admissible(gf)
    assert np.array_equal(tro_multiplicity(gf), tro_multiplicity(g).dot(tro_multiplicity(f)))
    assert compose(h, gf) == compose(compose(h, g), f)


@given(st.sampled_from(P6), st.sampled_from(P6), st.data())
def test_identity_and_zero_laws(f, g, data):
    m = single(f, g, data.draw(st.sampled_from(block_options(f, g))))
    assert compose(m, identity((f,))) == m
    assert compose(identity((g,)), m) == m
    assert compose(zero_morphism((g,), (f,)), m) == zero_morphism((f,), (f,))


def test_joint_capacity():
    m = MorphismClass((HermIII(3), HermIII(3)), (HermIII(5),), ((Column(1), Column(1)),))
    with pytest.raises(AdmissibilityError, match="6>5"):
        check_morphism(m)
    ok = MorphismClass((HermIII(3), HermIII(3)), (HermIII(6),), ((Column(1), Column(1)),))
    check_morphism(ok)


def test_iter_morphisms_are_admissible_and_distinct():
    src, tgt = (RectI(2, 3), HermIII(3)), (RectI(5, 6), SymplII(9))
    ms = list(iter_morphisms(src, tgt))
    assert len(ms) == len(set(ms)) > 5
    assert all(is_admissible(m) for m in ms)
    # brute force over single-block options agrees with the filtered product
    opts = [[block_options(s, t) for s in src] for t in tgt]
    brute = {
        MorphismClass(src, tgt, (r0, r1))
        for r0 in itertools.product(*opts[0])
        for r1 in itertools.product(*opts[1])
        if is_admissible(MorphismClass(src, tgt, (r0, r1)))
    }
    assert brute == set(ms)


@pytest.mark.parametrize(
    "src, tgt, block, label",
    [
        ("I(2,3)", "III(10)", Column(1), "(B)_{1,+}"),
        ("III(2)", "II(6)", Column(1), "(B)_{1,-}"),
        ("II(3)", "II(7)", Column(2), "(A)_{2,0}"),
        ("I(2,3)", "I(8,7)", RectRect(1, 2), "(A)_{1,2}"),
        ("III(3)", "I(4,5)", Column(1), "(A)_{1,0}"),
    ],
)
def test_standard_form_labels(src, tgt, block, label):
    (sb,) = standard_form(single(parse_factor(src), parse_factor(tgt), block))
    assert sb.label() == label


def test_standard_form_packing():
    m = MorphismClass((SymplII(3), RectI(2, 3)), (SymplII(16),), ((Column(2), Column(1)),))
    a, b = standard_form(m)
    assert (a.cls, a.source, a.row, a.rows) == ("A", 0, 0, 6)
    assert (b.cls, b.source, b.row, b.rows, b.eps) == ("B", 1, 6, 5, -1)
