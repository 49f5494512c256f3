"""Ring layer: exact phases, Galois rings, Frobenius, traces, lifts."""

import itertools
from fractions import Fraction

import pytest

from orbitrep.localring import (QZPhase, local_ring, least_irreducible,
                                is_irreducible_mod_p, lift_lambda, mu_defect,
                                tau_level, unit_group_basis, ring_roots)


def test_qzphase_arithmetic():
    a = QZPhase(1, 3)
    b = QZPhase(5, 9)
    assert (a + b).frac == Fraction(8, 9)
    assert (a - b).frac == Fraction(7, 9)
    assert (-a).frac == Fraction(2, 3)
    assert (a * 3).is_zero()
    assert a + QZPhase(2, 3) == QZPhase()
    assert hash(QZPhase(2, 6)) == hash(QZPhase(1, 3))
    z = QZPhase(1, 4).to_complex()
    assert abs(z - 1j) < 1e-12


def test_least_irreducible_frozen():
    # lexicographically least monic irreducibles, low-to-high coefficients
    assert least_irreducible(3, 2) == (1, 0)          # x^2 + 1
    assert least_irreducible(5, 2) == (1, 1)          # x^2 + x + 1
    assert least_irreducible(3, 4) == (1, 0, 1, 1)
    assert least_irreducible(3, 6) == (1, 0, 0, 0, 1, 1)
    for p, d in ((3, 2), (5, 2), (3, 4), (3, 6)):
        coeffs = list(least_irreducible(p, d)) + [1]
        assert is_irreducible_mod_p(coeffs, p)


def test_ring_cardinalities():
    assert local_ring(3, 2).cardinality == 9
    assert local_ring(3, 2, 2).cardinality == 81
    assert local_ring(3, 3, 2).cardinality == 729
    assert len(list(local_ring(3, 2, 2).units())) == 72
    assert len(list(local_ring(3, 3, 2).units())) == 648


def test_rejects_bad_parameters():
    with pytest.raises(ValueError):
        local_ring(2, 2)
    with pytest.raises(ValueError):
        local_ring(4, 1)
    with pytest.raises(ValueError):
        local_ring(3, 0)
    with pytest.raises(ValueError):
        local_ring(3, 2, 2, modulus=(0, 0))  # x^2, reducible


def test_inverse_exhaustive_small():
    for ring in (local_ring(3, 2), local_ring(3, 2, 2), local_ring(5, 2)):
        for x in ring.units():
            assert x * x.inv() == ring.one
    with pytest.raises(ZeroDivisionError):
        local_ring(3, 2).elem(3).inv()


def test_frobenius_structure():
    R = local_ring(3, 2, 2)
    xi = R.generator()
    # x^2 = -1 for the modulus x^2 + 1, so frobenius(x) = x^3 = -x
    assert R.frobenius(xi) == -xi
    for x in itertools.islice(R.elements(), 30):
        assert R.frobenius(x, 2) == x
        assert R.frobenius(x + R.one) == R.frobenius(x) + R.one
    a, b = R.elem((2, 5)), R.elem((7, 1))
    assert R.frobenius(a * b) == R.frobenius(a) * R.frobenius(b)


def test_traces():
    R = local_ring(3, 2, 2)
    xi = R.generator()
    assert R.trace_abs(xi) == 0           # x + x^3 = x - x = 0
    assert R.trace_abs(R.one) == 2
    L = local_ring(3, 2, 4)
    for x in itertools.islice(L.elements(), 20):
        t = L.trace_to(x, 2)
        assert L.frobenius(t, 2) == t     # lands in the fixed ring of F^2


def test_lift_and_defect():
    R3 = local_ring(3, 1)
    R9 = local_ring(3, 2)
    for a in R3.elements():
        lifted = lift_lambda(a, 2)
        assert R9.reduce(lifted, 1) == a
        assert all(c < 3 for c in lifted.coeffs)
    # lam(x) + lam(y) - lam(x+y) = p * mu, exhaustively at d = 1 and d = 2
    for ring in (local_ring(3, 2), local_ring(3, 2, 2)):
        up = ring.at_level(ring.r + 1)
        for x in ring.elements():
            for y in ring.elements():
                lx = lift_lambda(x, up)
                ly = lift_lambda(y, up)
                lxy = lift_lambda(x + y, up)
                mu = mu_defect(x, y)
                assert lx + ly - lxy == lift_lambda(mu, up) * ring.p


def test_tau_level_frozen():
    R9 = local_ring(3, 2)
    assert tau_level(1, R9.elem(1)) == QZPhase(1, 3)
    assert tau_level(1, R9.elem(5)) == QZPhase(2, 3)
    assert tau_level(2, R9.elem(1)) == QZPhase(1, 9)
    G = local_ring(3, 2, 2)
    assert tau_level(1, G.one) == QZPhase(2, 3)
    assert tau_level(2, G.generator()).is_zero()
    # additive in the argument
    a, b = G.elem((4, 7)), G.elem((2, 3))
    assert tau_level(2, a) + tau_level(2, b) == tau_level(2, a + b)


def test_unit_group_primary_orders():
    assert sorted(unit_group_basis(local_ring(3, 2, 2)).primary_orders()) == [3, 3, 8]
    assert sorted(unit_group_basis(local_ring(3, 2)).primary_orders()) == [2, 3]
    assert sorted(unit_group_basis(local_ring(3, 3, 2)).primary_orders()) == [8, 9, 9]


def test_ring_roots_newton():
    R = local_ring(3, 3, 2)
    # roots of x^2 + 1 in GR(27, 2): the generator class and its negative
    roots = ring_roots([R.one, R.zero, R.one], R)
    assert len(roots) == 2
    for z in roots:
        assert z * z + R.one == R.zero
