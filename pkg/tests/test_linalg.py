"""Exact linear algebra: field Gauss, Hensel-lifted null spaces, SNF,
modular solving, polynomial layer."""

import itertools
import random

import pytest

from orbitrep.localring import local_ring
from orbitrep.linalg import (rref_field, nullspace_field, solve_field,
                             det_field, inv_field, nullspace_modp,
                             solve_modp, nullspace_zmod, smith_normal_form,
                             ZModSolver, poly_mul, poly_divmod, poly_gcd,
                             poly_eval, poly_deg, poly_is_irreducible,
                             factor_poly)

F3 = local_ring(3, 1)


def _m(rows):
    return [[F3.elem(c) for c in r] for r in rows]


def test_rref_and_rank():
    red, pivots = rref_field(_m([[1, 2, 0], [2, 4, 1], [0, 0, 2]]), F3)
    assert pivots == [0, 2]
    assert red[0][:2] == [F3.one, F3.elem(2)]


def test_nullspace_field():
    ns = nullspace_field(_m([[1, 2, 0], [2, 4, 1]]), F3)
    assert len(ns) == 1
    v = ns[0]
    for row in _m([[1, 2, 0], [2, 4, 1]]):
        assert sum((a * b for a, b in zip(row, v)), F3.zero).is_zero()


def test_solve_field():
    rows = _m([[1, 1], [1, 2]])
    x = solve_field(rows, [F3.elem(2), F3.elem(0)], F3)
    assert x == [F3.elem(1), F3.elem(1)]
    assert solve_field(_m([[1, 1], [2, 2]]), [F3.one, F3.one], F3) is None


def test_det_field_dual_route():
    # Gaussian determinant must agree with cofactor expansion
    def cofactor_det(rows):
        n = len(rows)
        if n == 1:
            return rows[0][0]
        acc = F3.zero
        for j in range(n):
            minor = [r[:j] + r[j + 1:] for r in rows[1:]]
            term = rows[0][j] * cofactor_det(minor)
            acc = acc + term if j % 2 == 0 else acc - term
        return acc
    rng = random.Random(7)
    for _ in range(40):
        rows = _m([[rng.randrange(3) for _ in range(4)] for _ in range(4)])
        assert det_field(rows, F3) == cofactor_det(rows)


def test_inv_field():
    rows = _m([[1, 2], [1, 1]])
    inv = inv_field(rows, F3)
    prod = [[sum((a * b for a, b in zip(r, col)), F3.zero)
             for col in zip(*inv)] for r in rows]
    assert prod == [[F3.one, F3.zero], [F3.zero, F3.one]]


def test_nullspace_zmod_lift():
    # kernel of (1 1 1) mod 27 is free of rank 2; lift is compatible with
    # the mod-3 kernel coefficientwise
    rows = [[1, 1, 1]]
    base = nullspace_modp(rows, 3)
    lifted = nullspace_zmod(rows, 3, 3)
    assert len(lifted) == len(base) == 2
    for lv, bv in zip(lifted, base):
        assert [c % 3 for c in lv] == bv
        assert sum(lv) % 27 == 0
    with pytest.raises(ValueError):
        nullspace_zmod([[3]], 3, 2)  # x = 0 mod 3 does not lift freely


def test_smith_normal_form():
    A = [[2, 4, 4], [-6, 6, 12], [10, 4, 16]]
    D, U, V = smith_normal_form(A)
    diag = [D[i][i] for i in range(3)]
    assert diag == [2, 2, 156]
    assert diag[0] > 0 and diag[1] % diag[0] == 0 and diag[2] % diag[1] == 0
    # U A V == D
    UA = [[sum(U[i][k] * A[k][j] for k in range(3)) for j in range(3)]
          for i in range(3)]
    UAV = [[sum(UA[i][k] * V[k][j] for k in range(3)) for j in range(3)]
           for i in range(3)]
    assert UAV == D
    D2, U2, V2, Vinv = smith_normal_form(A, want_vinv=True)
    VVi = [[sum(V2[i][k] * Vinv[k][j] for k in range(3)) for j in range(3)]
           for i in range(3)]
    assert VVi == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]


def test_zmod_solver():
    s = ZModSolver([[2, 3], [4, 1]], 9)
    assert s.solve([1, 5]) == [5, 3]
    s2 = ZModSolver([[3, 6]], 9)
    assert s2.solve([1]) is None
    assert s2.solve([3]) == [1, 0]
    # random consistency sweep: solver answer satisfies the system
    rng = random.Random(3)
    rows = [[rng.randrange(27) for _ in range(4)] for _ in range(3)]
    s3 = ZModSolver(rows, 27)
    for _ in range(25):
        x = [rng.randrange(27) for _ in range(4)]
        rhs = [sum(a * v for a, v in zip(row, x)) % 27 for row in rows]
        got = s3.solve(rhs)  # internal assert verifies A got = rhs
        assert got is not None


def test_poly_layer():
    f = [F3.elem(1), F3.elem(0), F3.elem(1)]            # x^2 + 1
    g = [F3.elem(2), F3.elem(1)]                        # x + 2
    prod = poly_mul(f, g, F3)
    assert poly_deg(prod) == 3
    q, rem = poly_divmod(prod, g, F3)
    assert q == f and poly_deg(rem) < 0
    assert poly_eval(f, F3.elem(1), F3) == F3.elem(2)
    # x^2 - 1 = (x-1)(x+1); gcd with x - 1
    h = [F3.elem(2), F3.elem(0), F3.elem(1)]
    gc = poly_gcd(h, [F3.elem(2), F3.elem(1)], F3)
    assert gc == [F3.elem(2), F3.elem(1)]


def test_factor_poly():
    # x^2 + 1 is irreducible mod 3; x^2 + 2 = (x+1)(x+2)
    assert poly_is_irreducible([F3.one, F3.zero, F3.one], F3)
    fac = factor_poly([F3.elem(2), F3.zero, F3.one], F3)
    assert sorted((poly_deg(f), m) for f, m in fac) == [(1, 1), (1, 1)]
    # (x+1)^2 detected with multiplicity
    sq = poly_mul([F3.one, F3.one], [F3.one, F3.one], F3)
    fac2 = factor_poly(sq, F3)
    assert fac2 == [([F3.one, F3.one], 2)]
    # factorization multiplies back (degree check over F_9)
    F9 = local_ring(3, 1, 2)
    xi = F9.generator()
    f = [xi, F9.one, F9.one, F9.one]
    fac3 = factor_poly(f, F9)
    assert sum(poly_deg(g) * m for g, m in fac3) == 3
