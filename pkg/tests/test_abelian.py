"""Finite abelian groups: generator extraction, characters, partial
extension, additive coboundary solving in Q/Z."""

import itertools

from orbitrep.localring import QZPhase, local_ring, unit_group_basis
from orbitrep.abelian import FinAbelian, extend_partial_character, coboundary_witness


def klein_four():
    elems = [(a, b) for a in range(2) for b in range(2)]
    mul = lambda x, y: ((x[0] + y[0]) % 2, (x[1] + y[1]) % 2)
    return FinAbelian(elems, mul, (0, 0))


def test_unit_groups_frozen():
    g9 = unit_group_basis(local_ring(3, 2))
    assert g9.order == 6
    assert g9.orders == [6]
    assert g9.primary_orders() == [2, 3]
    g92 = unit_group_basis(local_ring(3, 2, 2))
    assert g92.order == 72
    assert g92.primary_orders() == [3, 3, 8]
    g272 = unit_group_basis(local_ring(3, 3, 2))
    assert g272.order == 648
    assert g272.primary_orders() == [8, 9, 9]


def test_dlog_roundtrip():
    g = unit_group_basis(local_ring(3, 2, 2))
    for x in g.elements:
        e = g.dlog(x)
        acc = g.identity
        for gen, k in zip(g.gens, e):
            for _ in range(k):
                acc = g.mul(acc, gen)
        assert acc == x


def test_invariant_factor_chain():
    g = unit_group_basis(local_ring(3, 3, 2))
    for a, b in zip(g.orders, g.orders[1:]):
        assert b % a == 0


def test_characters_orthogonal():
    g = klein_four()
    chars = list(g.characters())
    assert len(chars) == g.character_count() == 4
    for c1 in chars:
        for c2 in chars:
            s = sum(c1.value(x).to_complex() * c2.value(x).to_complex().conjugate()
                    for x in g.elements)
            assert abs(s - (4 if c1 == c2 else 0)) < 1e-12
    for ch in chars:
        for x in g.elements:
            for y in g.elements:
                assert ch.value(g.mul(x, y)) == ch.value(x) + ch.value(y)


def test_extend_partial_character():
    R9 = local_ring(3, 2)
    g = unit_group_basis(R9)
    # order-3 subgroup {1, 4, 7}; a character there extends in [6:3] = 2 ways
    sub = [R9.elem(1), R9.elem(4), R9.elem(7)]
    full = next(ch for ch in g.characters() if not ch.value(R9.elem(4)).is_zero())
    target = {x: full.value(x) for x in sub}
    exts = extend_partial_character(g, sub, lambda x: target[x])
    assert len(exts) == 2
    for ch in exts:
        for x in sub:
            assert ch.value(x) == target[x]
    # trivial target extends to the full dual of the quotient
    trivial = extend_partial_character(g, sub, lambda x: QZPhase())
    assert len(trivial) == 2


def test_coboundary_witness_positive():
    g = klein_four()
    alpha = {x: QZPhase(i, 4) for i, x in enumerate(g.elements)}
    cocycle = lambda x, y: alpha[x] + alpha[y] - alpha[g.mul(x, y)]
    w = coboundary_witness(g, cocycle)
    assert w is not None
    for x in g.elements:
        for y in g.elements:
            assert cocycle(x, y) == w[x] + w[y] - w[g.mul(x, y)]


def test_coboundary_witness_negative():
    # pairing cocycle c((a,b),(a',b')) = (1/2) b a' has a nondegenerate
    # antisymmetrization, so it is not a coboundary
    g = klein_four()
    cocycle = lambda x, y: QZPhase(x[1] * y[0], 2)
    assert coboundary_witness(g, cocycle) is None
