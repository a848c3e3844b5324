import random
from fractions import Fraction as F

import pytest

from centralleaf import linalg
from centralleaf.errors import ConfigurationError, PreconditionError
from centralleaf.rootdata import (LatticeAction, build_classical, coinvariants,
                                  datum_from_document, dominance_leq,
                                  dominant_rep, is_dominant, parse_group_name)

ALL_DATA = [build_classical("GL", 2), build_classical("GL", 3),
            build_classical("GL", 4), build_classical("SL", 3),
            build_classical("Sp", 4), build_classical("GSp", 4)]


def test_build_examples():
    gl2 = build_classical("GL", 2)
    assert set(gl2.roots) == {(1, -1), (-1, 1)}
    assert gl2.two_rho == (1, -1)
    gl3 = build_classical("GL", 3)
    assert gl3.two_rho == (2, 0, -2)
    sp4 = build_classical("Sp", 4)
    assert sp4.two_rho == (4, 2)


def test_build_errors():
    with pytest.raises(ConfigurationError):
        build_classical("SO", 5)
    with pytest.raises(ConfigurationError):
        build_classical("Sp", 3)
    with pytest.raises(ConfigurationError):
        build_classical("GL", 0)


@pytest.mark.parametrize("datum", ALL_DATA, ids=lambda d: f"{d.group_tag}{d.cochar_rank}")
def test_root_coroot_pairings(datum):
    for chi, v in zip(datum.roots, datum.coroots):
        assert datum.pair(chi, v) == 2
    # negation permutes the roots, positive/negative halves partition
    assert set(datum.roots) == {tuple(-x for x in chi) for chi in datum.roots}
    neg = {tuple(-x for x in chi) for chi in datum.positive_roots}
    assert neg | set(datum.positive_roots) == set(datum.roots)
    assert not neg & set(datum.positive_roots)


@pytest.mark.parametrize("tag,n", [("SL", 3), ("Sp", 4), ("SL", 2)])
def test_two_rho_on_simple_coroots_semisimple(tag, n):
    datum = build_classical(tag, n)
    for v in datum.simple_coroots:
        assert datum.pair(datum.two_rho, v) == 2


def test_weyl_group_orders():
    assert len(build_classical("GL", 2).weyl_elements) == 2
    assert len(build_classical("GL", 4).weyl_elements) == 24
    assert len(build_classical("Sp", 4).weyl_elements) == 8
    assert len(build_classical("GSp", 4).weyl_elements) == 8


def test_dominant_rep_examples():
    gl2 = build_classical("GL", 2)
    assert dominant_rep(gl2, (0, 1)) == (1, 0)
    gl3 = build_classical("GL", 3)
    assert dominant_rep(gl3, (0, 1, 0)) == (1, 0, 0)
    assert dominant_rep(gl2, (F(-1, 2), F(-1, 2))) == (F(-1, 2), F(-1, 2))


@pytest.mark.parametrize("datum", ALL_DATA, ids=lambda d: f"{d.group_tag}{d.cochar_rank}")
def test_dominant_rep_orbit_invariance(datum):
    # dominant_rep(w v) = dominant_rep(v) for random Weyl words, exactly
    rng = random.Random(20260810)
    count = 1000 // len(ALL_DATA) + 40
    for _ in range(count):
        v = tuple(F(rng.randint(-8, 8), rng.randint(1, 4)) for _ in range(datum.cochar_rank))
        w = linalg.identity(datum.cochar_rank)
        for _ in range(rng.randint(0, 6)):
            w = linalg.mat_mul(w, datum.simple_reflections[rng.randrange(datum.rank)]) \
                if datum.rank else w
        wv = linalg.mat_vec(w, v)
        assert dominant_rep(datum, wv) == dominant_rep(datum, v)
        dom = dominant_rep(datum, v)
        assert datum.pair(datum.two_rho, dom) >= 0


def test_dominance_examples():
    gl2 = build_classical("GL", 2)
    assert dominance_leq(gl2, (F(1, 2), F(1, 2)), (1, 0))
    assert not dominance_leq(gl2, (2, -1), (1, 0))
    gl3 = build_classical("GL", 3)
    assert dominance_leq(gl3, (1, 0, 0), (1, 0, 0))
    with pytest.raises(PreconditionError):
        dominance_leq(gl2, (0, 1), (1, 0))


def test_dominance_is_partial_order_gl3():
    gl3 = build_classical("GL", 3)
    span = range(-2, 3)
    dominants = [v for v in
                 ((a, b, c) for a in span for b in span for c in span)
                 if is_dominant(gl3, v)]
    leq = {(u, v) for u in dominants for v in dominants
           if dominance_leq(gl3, u, v)}
    for u in dominants:
        assert (u, u) in leq
    for (u, v) in leq:
        if (v, u) in leq:
            assert u == v
    for (u, v) in leq:
        for w in dominants:
            if (v, w) in leq:
                assert (u, w) in leq


def test_coinvariants_examples():
    gl2 = build_classical("GL", 2)
    swap = ((0, 1), (1, 0))
    co = coinvariants(gl2, LatticeAction((swap,), 2))
    assert (co.free_rank, co.torsion) == (1, ())

    gl1 = build_classical("GL", 1)
    co2 = coinvariants(gl1, LatticeAction((((-1,),),), 2))
    assert (co2.free_rank, co2.torsion) == (0, (2,))

    gl3 = build_classical("GL", 3)
    co3 = coinvariants(gl3, LatticeAction.trivial(3))
    assert (co3.free_rank, co3.torsion) == (3, ())
    assert co3.projection == linalg.identity(3)


def test_coinvariants_rank_nullity():
    gl2 = build_classical("GL", 2)
    swap = ((0, 1), (1, 0))
    co = coinvariants(gl2, LatticeAction((swap,), 2))
    # relation image of (id - swap) has rank 1; free_rank 1 + 1 = rank 2
    relation = ((1, -1), (-1, 1))
    divisors, _ = linalg.smith_with_transform(relation)
    image_rank = sum(1 for d in divisors if d != 0)
    assert co.free_rank + image_rank == gl2.cochar_rank


def test_coinvariants_projection_kills_relations():
    gl2 = build_classical("GL", 2)
    swap = ((0, 1), (1, 0))
    act = LatticeAction((swap,), 2)
    co = coinvariants(gl2, act)
    for j in range(2):
        e = tuple(1 if i == j else 0 for i in range(2))
        ge = linalg.mat_vec(swap, e)
        diff = tuple(a - b for a, b in zip(e, ge))
        assert co.project(diff) == co.project((0, 0))


def test_coinvariants_rejects_bad_generator():
    gl2 = build_classical("GL", 2)
    with pytest.raises(ConfigurationError):
        coinvariants(gl2, LatticeAction((((2, 0), (0, 1)),), 2))


def test_datum_document_interface():
    assert datum_from_document({"group": "GL", "n": 2}).two_rho == (1, -1)
    custom = datum_from_document({
        "group": "custom",
        "roots": [(1, -1), (-1, 1)],
        "coroots": [(1, -1), (-1, 1)],
        "simple_indices": [0],
    })
    assert custom.two_rho == (1, -1)
    with pytest.raises(ConfigurationError):
        datum_from_document({"group": "GL", "n": 2, "bogus": 1})
    assert parse_group_name("GSp4").group_tag == "GSp"
    with pytest.raises(ConfigurationError):
        parse_group_name("E8")
