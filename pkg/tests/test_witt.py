import dataclasses
import itertools
import random

import pytest

from centralleaf.errors import NotPDivisibleError, PreconditionError
from centralleaf.isocrystal import MonomialIsocrystal, slopes_monomial
from centralleaf.witt import (NilpotentPolyRing, ZModRing,
                              display_check, display_doc, display_from_doc,
                              display_from_element, int_of_witt_digits,
                              structure_polynomials, truncate, witt, witt_add,
                              witt_arith, witt_digits_of_int, witt_frobenius,
                              witt_ghost, witt_mul, witt_neg, witt_scalar,
                              witt_verschiebung)


def test_structure_polynomials_are_integral():
    # derivation asserts denominator-freeness; touching (p, m) pairs is the test
    for p, m in ((2, 3), (3, 3), (2, 4), (5, 2)):
        polys = structure_polynomials(p, m)
        assert len(polys["add"]) == m and len(polys["mul"]) == m
        assert len(polys["frob"]) == m - 1


def test_addition_example_prime_field():
    # W_2 over the prime field is Z/4: (1,0) + (1,0) = (0,1), the image of 2
    ring = ZModRing(2, 1)
    a = witt(ring, 2, (1, 0))
    assert witt_add(a, a).components == (0, 1)
    assert witt_digits_of_int(2, 2, 2) == (0, 1)


def test_ghost_definitional():
    ring = ZModRing(2, 5)
    a = witt(ring, 2, (3, 7))
    assert witt_ghost(a) == (3, (3 ** 2 + 2 * 7) % 32)


@pytest.mark.parametrize("p", [2, 3])
def test_ghost_is_ring_homomorphism(p):
    # 500 random pairs in W_3 over Z/p^5, exact
    ring = ZModRing(p, 5)
    rng = random.Random(1000 + p)
    for _ in range(500):
        a = witt(ring, p, tuple(rng.randrange(ring.modulus) for _ in range(3)))
        b = witt(ring, p, tuple(rng.randrange(ring.modulus) for _ in range(3)))
        ga, gb = witt_ghost(a), witt_ghost(b)
        assert witt_ghost(witt_add(a, b)) == tuple(ring.add(x, y)
                                                   for x, y in zip(ga, gb))
        assert witt_ghost(witt_mul(a, b)) == tuple(ring.mul(x, y)
                                                   for x, y in zip(ga, gb))
        assert witt_ghost(witt_neg(a)) == tuple(ring.neg(x) for x in ga)


@pytest.mark.parametrize("p", [2, 3])
def test_frobenius_verschiebung_identities(p):
    ring = ZModRing(p, 5)
    rng = random.Random(55 + p)
    one = witt(ring, p, (1, 0, 0))
    for _ in range(100):
        a = witt(ring, p, tuple(rng.randrange(ring.modulus) for _ in range(3)))
        # F(V(a)) = p * a, compared at the truncated length
        fv = witt_frobenius(witt_verschiebung(a))
        assert fv.components == truncate(witt_scalar(a, p), 2).components
        # V(F(a)) = a * V(1)
        vf = witt_verschiebung(witt_frobenius(a))
        rhs = witt_mul(a, witt_verschiebung(one))
        assert truncate(vf, 2).components == truncate(rhs, 2).components


def test_frobenius_reduces_to_p_power_mod_p():
    for p in (2, 3):
        ring = ZModRing(p, 4)
        rng = random.Random(p)
        for _ in range(50):
            a = witt(ring, p, tuple(rng.randrange(ring.modulus) for _ in range(3)))
            fa = witt_frobenius(a)
            for i in range(2):
                assert (fa.components[i] - a.components[i] ** p) % p == 0


def test_witt_arith_dispatcher():
    ring = ZModRing(2, 3)
    a = witt(ring, 2, (1, 1, 0))
    assert witt_arith("V", a).components == (0, 1, 1)
    with pytest.raises(PreconditionError):
        witt_arith("divide", a, a)


def test_digit_isomorphism_round_trip():
    for p in (2, 3):
        for m in (1, 2, 3):
            for x in range(p ** m):
                assert int_of_witt_digits(witt_digits_of_int(x, p, m), p) == x


def test_digit_isomorphism_is_additive_oracle():
    # the universal polynomials over F_p agree with integer arithmetic in Z/p^m
    for p in (2, 3):
        m = 3
        ring = ZModRing(p, 1)
        rng = random.Random(77 + p)
        for _ in range(100):
            x, y = rng.randrange(p ** m), rng.randrange(p ** m)
            a = witt(ring, p, witt_digits_of_int(x, p, m))
            b = witt(ring, p, witt_digits_of_int(y, p, m))
            assert witt_add(a, b).components == witt_digits_of_int((x + y) % p ** m, p, m)
            assert witt_mul(a, b).components == witt_digits_of_int((x * y) % p ** m, p, m)


def test_nilpotent_coefficients():
    ring = NilpotentPolyRing(2, 3, (2,))
    x = ring.variable(0)
    a = witt(ring, 2, (x, ring.one()))
    b = witt(ring, 2, (ring.one(), x))
    ga, gb = witt_ghost(a), witt_ghost(b)
    gs = witt_ghost(witt_add(a, b))
    assert gs == tuple(ring.add(u, v) for u, v in zip(ga, gb))
    assert ring.mul(x, x) == ring.zero()


def test_display_ordinary_example():
    b = MonomialIsocrystal(2, (0, 1), (0, -1))  # diag(1, p^-1)
    datum = display_from_element(b, 2)
    report = display_check(datum)
    assert report.passed and report.psi_invertible
    assert report.hodge_rank == 1
    # M1 = span(e1, p e2)
    assert datum.m1_columns == ((1, 0), (0, 2))


def test_display_rejects_bad_window():
    with pytest.raises(NotPDivisibleError):
        display_from_element(MonomialIsocrystal(2, (0, 1), (0, 1)), 2)
    # slope inside the window but the lattice itself not display-compatible
    with pytest.raises(NotPDivisibleError):
        display_from_element(MonomialIsocrystal(2, (1, 0), (-2, 1)), 2)


def test_display_supersingular_window():
    b = MonomialIsocrystal(2, (1, 0), (0, -1))  # [[0,1],[p^-1,0]]
    report = display_check(display_from_element(b, 2))
    assert report.passed and report.hodge_rank == 1


def test_display_degenerate_failures():
    base = display_from_element(MonomialIsocrystal(2, (0, 1), (0, -1)), 2)
    zero = tuple(tuple(0 for _ in range(2)) for _ in range(2))
    no_phi1 = dataclasses.replace(base, phi1=zero)
    report = display_check(no_phi1)
    assert not report.phi1_generates and not report.passed
    broken = dataclasses.replace(base, phi=zero)
    report2 = display_check(broken)
    assert not report2.phi_compatible and report2.witness == 0


def test_display_witt_component_round_trip():
    for p in (2, 3):
        base = display_from_element(MonomialIsocrystal(2, (1, 0), (0, -1)), p)
        doc = display_doc(base)
        assert display_from_doc(doc) == base
        # entries really are Witt component vectors over the prime field
        assert all(all(0 <= digit < p for digit in entry)
                   for row in doc["phi"] for entry in row)


@pytest.mark.parametrize("p", [2, 3])
def test_displays_for_all_small_monomials(p):
    # every monomial of size <= 4 with exponents in {-1, 0} builds a display
    # passing all four axioms
    count = 0
    for n in (1, 2, 3, 4):
        for perm in itertools.permutations(range(n)):
            for exps in itertools.product((-1, 0), repeat=n):
                b = MonomialIsocrystal(n, perm, exps)
                assert all(-1 <= s <= 0 for s in slopes_monomial(b))
                report = display_check(display_from_element(b, p))
                assert report.passed and report.psi_invertible
                assert report.hodge_rank == sum(1 for e in exps if e == -1)
                count += 1
    assert count > 100
