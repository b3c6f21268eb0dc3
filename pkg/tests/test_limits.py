import dataclasses

import numpy as np
import pytest

from conftest import FIXTURES, PRINCIPAL_DIAGRAMS
from jbtk.bratteli import from_rows, load, telescope
from jbtk.ktheory import KMap, k0_of_morphism
from jbtk.limits import (
    LimitError,
    compare,
    limit_presentation,
    obstructions,
    telescope_invariant,
    verify_witness,
)


def _identity_chain(n_rows=5):
    rows = [["I(2,3)"]] * n_rows
    return from_rows(rows, [((k, 0), (k + 1, 0), [1, 0]) for k in range(n_rows - 1)])


def test_two_level_rect_telescope():
    d = from_rows([["I(2,3)"], ["I(8,7)"]], [((0, 0), (1, 0), [1, 2])])
    t = telescope_invariant(d, 1)
    assert [m.tolist() for m in t.maps] == [[[1, 2], [2, 1]]]


def test_identity_telescope():
    t = telescope_invariant(_identity_chain(), 4)
    assert all(m.tolist() == [[1, 0], [0, 1]] for m in t.maps)
    lp = limit_presentation(t, 4)
    assert lp.scale_image == t.levels[0].scale
    assert lp.delta_plus_image == t.levels[0].delta_plus
    assert lp.stabilized
    assert lp.free_rank == 2 and lp.sigma == (1, 0)


def test_symplectic_doubling():
    t = telescope_invariant(load(FIXTURES / "sympl-doubling.json"), 3)
    assert [m.tolist() for m in t.maps] == [[[2]]] * 3
    lp = limit_presentation(t, 3)
    # level-k scale {0..3*2^k} pushed by 2^(3-k)
    want = {(8 * j,) for j in range(4)} | {(4 * j,) for j in range(7)} | {(2 * j,) for j in range(13)}
    want |= {(j,) for j in range(25)}
    assert lp.scale_image == want
    assert lp.invariant_factors == ((2,), (2,), (2,))


def test_zero_map_collapses_images():
    d = from_rows([["III(3)"], ["III(3)"], ["III(4)"]], [((0, 0), (1, 0), [1])])
    t = telescope_invariant(d, 2)
    lp = limit_presentation(t, 2)
    assert lp.scale_image == {(k,) for k in range(5)}
    assert limit_presentation(t, 1).scale_image == {(k,) for k in range(4)}
    assert lp.kernel_ranks == (0, 1)


def test_limit_errors():
    t = telescope_invariant(_identity_chain(), 2)
    with pytest.raises(LimitError):
        limit_presentation(t, 3)
    with pytest.raises(LimitError):
        telescope_invariant(load(FIXTURES / "mixed.json"), 2)


@pytest.mark.parametrize("name", PRINCIPAL_DIAGRAMS)
def test_images_grow_along_maps(name):
    t = telescope_invariant(load(FIXTURES / f"{name}.json"), 3)
    for N in range(3):
        a, b = limit_presentation(t, N), limit_presentation(t, N + 1)
        for name_ in ("scale_image", "delta_plus_image", "delta_minus_image"):
            pushed = {tuple(int(x) for x in t.maps[N].matrix.dot(np.array(v, dtype=object))) for v in getattr(a, name_)}
            assert pushed <= getattr(b, name_)


@pytest.mark.parametrize("name", PRINCIPAL_DIAGRAMS + ("sympl-chain", "rect-swapped"))
def test_compare_self_at_depth_two(name):
    d = load(FIXTURES / f"{name}.json")
    res = compare(d, d, depth=2)
    assert res.verdict == "Isomorphic" and verify_witness(res.witness)


@pytest.mark.parametrize("a, b", [("rect-chain", "rect-swapped"), ("p1", "p1-telescoped")])
def test_compare_symmetric(a, b):
    da, db = load(FIXTURES / f"{a}.json"), load(FIXTURES / f"{b}.json")
    assert compare(da, db, 6).verdict == compare(db, da, 6).verdict == "Isomorphic"


def test_witness_morphisms_round_trip():
    d = load(FIXTURES / "p1.json")
    w = compare(d, telescope(d, stride=2), 6).witness
    for m, g in zip(w.morphisms, w.maps):
        assert np.array_equal(k0_of_morphism(m).matrix, g.matrix)
    js = w.to_json()
    assert len(js["gamma"]) + len(js["delta"]) == len(w.maps)


def test_corrupted_witness_fails():
    d = load(FIXTURES / "finite-mixing.json")
    w = compare(d, telescope(d, stride=2), 6).witness
    mat = w.maps[1].matrix.copy()
    mat[0, 0] += 1
    bad = dataclasses.replace(w, maps=[w.maps[0], KMap(mat, w.maps[1].source, w.maps[1].target)] + w.maps[2:])
    assert not verify_witness(bad)
    assert not verify_witness(dataclasses.replace(w, maps=w.maps[:2]))


def test_inconclusive_on_small_budget():
    d = load(FIXTURES / "p1.json")
    res = compare(d, load(FIXTURES / "p1-telescoped.json"), 6, budget=3)
    assert res.verdict == "Inconclusive" and res.exit_code == 4


def test_distinguished_obstruction_is_recomputable():
    h, s = load(FIXTURES / "herm-chain.json"), load(FIXTURES / "sympl-chain.json")
    res = compare(h, s, 6)
    assert res.verdict == "Distinguished" and res.exit_code == 3
    name = res.obstruction["name"]
    assert obstructions(telescope_invariant(h, 6))[name]["value"] == res.obstruction["A"]
    assert obstructions(telescope_invariant(s, 6))[name]["value"] == res.obstruction["B"]


@pytest.mark.parametrize("name", PRINCIPAL_DIAGRAMS)
def test_equal_telescopes_never_distinguished(name):
    d = load(FIXTURES / f"{name}.json")
    ta, tb = telescope_invariant(d, 5), telescope_invariant(load(FIXTURES / f"{name}.json"), 5)
    assert ta.same_as(tb)
    assert obstructions(ta) == obstructions(tb)


def test_rank_obstruction():
    # the rank-2 rectangular chain against a rank-1 hermitian chain
    res = compare(load(FIXTURES / "rect-chain.json"), load(FIXTURES / "herm-chain.json"), 6)
    assert res.verdict == "Distinguished"
    assert res.obstruction["name"] == "rationalRank"
