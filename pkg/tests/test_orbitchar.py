"""Adjoint orbits, regularity diagnostics, orbit characters psi_beta,
stabilizers and centralizer smoothness."""

import itertools
import random
from collections import Counter

from orbitrep.localring import QZPhase, local_ring
from orbitrep.linalg import poly_deg, poly_is_irreducible
from orbitrep.groupscheme import (Mat, GroupSpec, identity_mat, zero_mat,
                                  basis_mat, commutator, lie_basis,
                                  kernel_elements, enumerate_group, GroupTable)
from orbitrep.orbitchar import (charpoly_mat, minpoly_mat, eval_poly_mat,
                                jordan_decomposition, is_squarefree_poly,
                                rank_of, centralizer_in_lie, regularity_test,
                                adjoint_orbits, centralizer_units,
                                algebra_span_elements, PsiBeta,
                                stabilizer_report, smoothness_proxy,
                                lift_beta, companion_mat)

R3 = local_ring(3, 1)
R9 = local_ring(3, 2)
F9 = local_ring(3, 1, 2)

GL2_F3 = GroupSpec.gl(2, R3)
GL2_Z9 = GroupSpec.gl(2, R9)

# companion matrix of x^2 - x - 1 (irreducible mod 3): the running
# regular witness
BETA_BAR = companion_mat(R3, (2, 2))


def test_witness_shape():
    assert BETA_BAR == Mat(R3, [[0, 1], [1, 1]])


def test_charpoly_minpoly():
    cp = charpoly_mat(BETA_BAR)
    assert cp == [R3.elem(2), R3.elem(2), R3.one]
    assert poly_is_irreducible(cp, R3)
    assert minpoly_mat(BETA_BAR) == cp
    ident = identity_mat(R3, 2)
    assert charpoly_mat(ident) == [R3.one, R3.one, R3.one]   # (x-1)^2
    assert minpoly_mat(ident) == [R3.elem(2), R3.one]        # x - 1
    # Cayley-Hamilton on random matrices
    rng = random.Random(3)
    for _ in range(20):
        m = Mat(R3, [[rng.randrange(3) for _ in range(3)] for _ in range(3)])
        assert eval_poly_mat(charpoly_mat(m), m) == zero_mat(R3, 3)
        mp = minpoly_mat(m)
        assert eval_poly_mat(mp, m) == zero_mat(R3, 3)
        assert poly_deg(mp) <= 3


def test_jordan_decomposition():
    m = Mat(R3, [[1, 1], [0, 1]])
    s, n = jordan_decomposition(m)
    assert s == identity_mat(R3, 2)
    assert n == basis_mat(R3, 2, 0, 1)
    rng = random.Random(7)
    for _ in range(20):
        m = Mat(R3, [[rng.randrange(3) for _ in range(3)] for _ in range(3)])
        s, n = jordan_decomposition(m)
        assert s + n == m
        assert s @ n == n @ s
        assert n @ n @ n == zero_mat(R3, 3)
        assert is_squarefree_poly(minpoly_mat(s), R3)


def test_rank_of():
    assert rank_of(GL2_F3) == 2
    assert rank_of(GroupSpec.gl(3, R3)) == 3
    assert rank_of(GroupSpec.gsp(4, R3)) == 3
    assert rank_of(GroupSpec.u(identity_mat(F9, 3))) == 3
    assert rank_of(GroupSpec.go(identity_mat(local_ring(5, 1), 3))) == 2


def test_regularity_witness():
    diag = regularity_test(GL2_F3, BETA_BAR)
    assert diag["regular"] and diag["cyclic"]
    assert diag["residually_semisimple"]
    assert diag["charpoly_irreducible"]
    assert not diag["residually_central"]
    assert diag["centralizer_dim"] == 2


def test_regularity_central_and_nilpotent():
    central = regularity_test(GL2_F3, identity_mat(R3, 2))
    assert not central["regular"]
    assert central["residually_central"]
    assert central["centralizer_dim"] == 4
    nilp = regularity_test(GL2_F3, basis_mat(R3, 2, 0, 1))
    assert nilp["regular"]
    assert not nilp["residually_semisimple"]
    assert not nilp["charpoly_irreducible"]


def test_orbits_gl2_f3_frozen():
    orbits = adjoint_orbits(GL2_F3)
    assert len(orbits) == 12
    assert [o["size"] for o in orbits] == [1, 1, 1, 6, 6, 6, 8, 8, 8, 12, 12, 12]
    assert sum(o["regular"] for o in orbits) == 9
    assert sum(o["smoothly_regular"] for o in orbits) == 9
    # size-6 orbits are the residually irreducible ones, size-1 central
    for o in orbits:
        assert o["charpoly_irreducible"] == (o["size"] == 6)
        assert o["residually_central"] == (o["size"] == 1)


def test_orbits_gl2_f5_frozen():
    orbits = adjoint_orbits(GroupSpec.gl(2, local_ring(5, 1)))
    assert len(orbits) == 30
    assert Counter(o["size"] for o in orbits) == {1: 5, 20: 10, 24: 5, 30: 10}
    assert sum(o["regular"] for o in orbits) == 25
    assert sum(o["smoothly_regular"] for o in orbits) == 25


def test_orbits_gl3_f3_frozen():
    orbits = adjoint_orbits(GroupSpec.gl(3, R3))
    assert len(orbits) == 39
    assert sum(o["size"] for o in orbits) == 3 ** 9
    assert sum(o["regular"] for o in orbits) == 27
    assert sum(o["smoothly_regular"] for o in orbits) == 27


def test_centralizer_units_frozen():
    # the witness centralizer over F_3 is F_9^x, order 8; brute force agrees
    cent = centralizer_units(GL2_F3, BETA_BAR)
    assert len(cent) == 8
    brute = [g for g in enumerate_group(GL2_F3) if g @ BETA_BAR == BETA_BAR @ g]
    assert {g.key() for g in cent} == {g.key() for g in brute}
    # the full algebra span F_3[beta] has 9 points
    assert len(algebra_span_elements(GL2_F3, BETA_BAR)) == 9


def test_psi_beta_frozen_value():
    psi = PsiBeta(GL2_Z9, BETA_BAR, 1)
    k = identity_mat(R9, 2) + basis_mat(R9, 2, 0, 1).scale(R9.elem(3))
    assert psi.value(k) == QZPhase(1, 3)
    assert psi.value(identity_mat(R9, 2)).is_zero()


def test_psi_beta_homomorphism_exhaustive():
    psi = PsiBeta(GL2_Z9, BETA_BAR, 1)
    ker = kernel_elements(GL2_Z9, 1)
    assert len(ker) == 81
    assert psi.homomorphism_check(itertools.product(ker, ker))


def test_stabilizer_report_frozen():
    table = GroupTable(GL2_Z9)
    rep = stabilizer_report(GL2_Z9, BETA_BAR, 1, table=table)
    assert rep["stabilizer_order"] == 648
    assert rep["centralizer_order"] == 72
    assert rep["kernel_order"] == 81
    assert rep["intersection_order"] == 9
    assert rep["image_match"]
    assert rep["factorization_holds"]
    assert rep["stabilizer_order"] * rep["intersection_order"] == 72 * 81


def test_stabilizer_report_mat_route():
    # the slow Mat route must agree with the vectorized table route
    rep = stabilizer_report(GL2_Z9, BETA_BAR, 1,
                            elements=enumerate_group(GL2_Z9))
    assert rep["stabilizer_order"] == 648
    assert rep["centralizer_order"] == 72
    assert rep["kernel_order"] == 81
    assert rep["factorization_holds"]


def test_smoothness_proxy_frozen():
    out = smoothness_proxy(GL2_Z9, BETA_BAR)
    assert out["orders"] == [8, 72]
    assert out["holds"]
    assert out["centralizer_dim_fp"] == 2


def test_lift_beta():
    b = lift_beta(GroupSpec.gl(2, R9), BETA_BAR, 2)
    assert b.reduce(1) == BETA_BAR
    assert lie_basis(GroupSpec.gl(2, R9), 2).contains(b)


def test_companion_charpoly_roundtrip():
    coeffs = (R3.elem(1), R3.elem(2), R3.elem(0))
    m = companion_mat(R3, coeffs)
    cp = charpoly_mat(m)
    assert cp[:-1] == list(coeffs) and cp[-1] == R3.one
