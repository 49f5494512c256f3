"""Group schemes over Z/p^r: matrix layer, Lie algebras, filtration
conditions, enumeration, lifting, dense GL tables."""

import random

import numpy as np
import pytest

from orbitrep.localring import local_ring
from orbitrep.groupscheme import (Mat, GroupSpec, identity_mat, zero_mat,
                                  basis_mat, mat_from_zvec, commutator,
                                  ad_action, divide_by_p_power, lie_basis,
                                  check_conditions, check_condition_I,
                                  quadratic_section, kernel_elements,
                                  enumerate_group, hensel_lift_element,
                                  primitive_root_mod_pr, gl_generators,
                                  GroupTable, encode_mat_array, det_array,
                                  adjugate_array, unit_inverse_table)

R3 = local_ring(3, 1)
R9 = local_ring(3, 2)
R27 = local_ring(3, 3)
F9 = local_ring(3, 1, 2)


def u_spec(n, ring=F9):
    return GroupSpec.u(identity_mat(ring, n))


def go_spec(n, ring):
    return GroupSpec.go(identity_mat(ring, n))


# ------------------------------------------------------------ matrices

def test_mat_algebra():
    a = Mat(R9, [[1, 2], [3, 4]])
    b = Mat(R9, [[0, 1], [1, 0]])
    assert (a @ b) == Mat(R9, [[2, 1], [4, 3]])
    assert a + b - b == a
    assert (-a) + a == zero_mat(R9, 2)
    assert a.transpose() == Mat(R9, [[1, 3], [2, 4]])
    assert a.trace() == R9.elem(5)
    assert a.det() == R9.elem(-2)
    assert commutator(a, b) == a @ b - b @ a


def test_mat_inverse_exact():
    rng = random.Random(11)
    found = 0
    while found < 20:
        m = Mat(R27, [[rng.randrange(27) for _ in range(3)] for _ in range(3)])
        if not m.is_invertible():
            continue
        found += 1
        assert m @ m.inv() == identity_mat(R27, 3)
        assert m.inv() @ m == identity_mat(R27, 3)


def test_mat_lift_reduce():
    m = Mat(R27, [[5, 26], [9, 1]])
    assert m.reduce(1).lift(3).reduce(1) == m.reduce(1)
    assert m.reduce(2).ring is R9
    k = identity_mat(R27, 2) + basis_mat(R27, 2, 0, 1).scale(R27.elem(9))
    x = divide_by_p_power(k - identity_mat(R27, 2), 2)
    assert x == basis_mat(R27.at_level(1), 2, 0, 1)


def test_tau_transpose():
    m = Mat(F9, [[F9.generator(), F9.one], [F9.zero, F9.generator()]])
    t = m.tau_transpose(1)
    assert t.rows[0][0] == F9.frobenius(F9.generator())
    assert t.rows[0][1] == F9.zero
    assert t.tau_transpose(1) == m


def test_ad_action():
    g = Mat(R9, [[1, 1], [0, 1]])
    x = basis_mat(R9, 2, 1, 0)
    y = ad_action(g, x)
    assert y == g @ x @ g.inv()


# ------------------------------------------------------------ specs

def test_spec_validation():
    # p = 2 is rejected at the ring layer already
    with pytest.raises(ValueError):
        local_ring(2, 1)
    with pytest.raises(ValueError):
        GroupSpec.gsp(3, R3)          # odd size
    with pytest.raises(ValueError):
        GroupSpec.gsp(6, R3)          # p | m
    with pytest.raises(ValueError):
        go_spec(3, R3)                # p | n
    with pytest.raises(ValueError):
        GroupSpec.u(identity_mat(R3, 2))   # needs even residue degree
    with pytest.raises(ValueError):
        GroupSpec.gsp(2, F9)          # forms require d = 1 scalars here


def test_similitude_and_membership():
    sp = GroupSpec.gsp(2, R3)
    g = Mat(R3, [[2, 0], [0, 1]])
    assert sp.contains(g)
    assert sp.nu_of(g) == R3.elem(2)
    assert not sp.contains(Mat(R3, [[1, 0], [0, 0]]))
    u1 = u_spec(1)
    xi = F9.generator()
    norm_one = [x for x in F9.units() if x * F9.frobenius(x) == F9.one]
    assert len(norm_one) == 4
    for x in norm_one:
        assert u1.contains(Mat(F9, [[x]]))
    # 1 + xi has norm (1+xi)(1-xi) = 2, not a unitary point
    assert not u1.contains(Mat(F9, [[F9.one + xi]]))


def test_group_order_formulas():
    assert GroupSpec.gl(2, R3).group_order() == 48
    assert GroupSpec.gl(2, R9).group_order() == 3888
    assert GroupSpec.gl(2, R27).group_order() == 314928
    assert GroupSpec.gl(3, local_ring(5, 1)).group_order() == 1488000
    assert GroupSpec.gsp(4, R3).group_order() == 103680
    assert u_spec(3).group_order() == 24192
    assert u_spec(2).group_order() == 96


# ------------------------------------------------------------ Lie layer

def test_lie_dimensions_frozen():
    assert lie_basis(GroupSpec.gl(2, R3)).dim == 4
    assert lie_basis(GroupSpec.gsp(4, R3)).dim == 11
    assert lie_basis(u_spec(3)).dim == 9
    assert lie_basis(go_spec(3, local_ring(5, 1))).dim == 4
    # fp dimension = dim x scalar residue degree
    assert lie_basis(u_spec(3)).zdim() == 9
    assert lie_basis(GroupSpec.gsp(4, R3)).zdim() == 11


def test_lie_bracket_closure():
    rng = random.Random(5)
    for spec in (GroupSpec.gsp(4, R3), u_spec(3), go_spec(3, local_ring(5, 1))):
        lb = lie_basis(spec)
        for _ in range(15):
            x = lb.random_element(rng)
            y = lb.random_element(rng)
            assert lb.contains(commutator(x, y))
            assert spec.lie_contains(x + y)


def test_lie_coords_roundtrip():
    lb = lie_basis(GroupSpec.gsp(4, R9))
    rng = random.Random(9)
    for _ in range(10):
        x = lb.random_element(rng)
        assert lb.from_coords(lb.coords(x)) == x


def test_lie_lift_element():
    spec2 = GroupSpec.gsp(4, R9)
    lb1 = lie_basis(spec2, 1)
    lb2 = lie_basis(spec2, 2)
    rng = random.Random(13)
    for _ in range(10):
        xbar = lb1.random_element(rng)
        x = lb2.lift_element(xbar, lb1)
        assert lb2.contains(x)
        assert x.reduce(1) == xbar


def test_trace_form_nondegenerate():
    rep = check_condition_I(GroupSpec.gl(2, R3))
    assert rep["holds"]
    assert rep["gram_det"] == [2]
    for spec in (GroupSpec.gsp(4, R3), u_spec(3), go_spec(3, local_ring(5, 1))):
        assert check_condition_I(spec)["holds"]


# -------------------------------------------------- filtration conditions

def test_conditions_gl2():
    for r in (2, 3):
        rep = check_conditions(GroupSpec.gl(2, local_ring(3, r)))
        assert rep["holds"], rep


def test_conditions_go3():
    rep = check_conditions(go_spec(3, local_ring(5, 2)))
    assert rep["holds"], rep


def test_quadratic_section_exact_membership():
    # 1 + p X' + (p^2/2) X'^2 lands in G(O_3) for every lift X' of X
    spec = GroupSpec.gsp(2, R27)
    lb = lie_basis(spec, 2)
    rng = random.Random(17)
    for _ in range(20):
        x = lb.random_element(rng)
        k = quadratic_section(spec, x, 2)
        assert spec.contains(k)
        assert k.reduce(1) == identity_mat(R3, 2)


# ------------------------------------------------------------ enumeration

def test_enumerate_gl2_f3():
    g = enumerate_group(GroupSpec.gl(2, R3))
    assert len(g) == 48
    assert len({m.key() for m in g}) == 48


def test_enumerate_gsp2_f3():
    # Sp_2 = SL_2, so GSp_2 = GL_2; the isometry path must agree with
    # the GL count
    g = enumerate_group(GroupSpec.gsp(2, R3))
    assert len(g) == 48
    sp = GroupSpec.gsp(2, R3)
    for m in g[:10]:
        assert sp.contains(m)


def test_enumerate_unitary():
    assert len(enumerate_group(u_spec(1))) == 4
    g2 = enumerate_group(u_spec(2))
    assert len(g2) == 96
    sp = u_spec(2)
    rng = random.Random(23)
    for _ in range(20):
        a, b = rng.choice(g2), rng.choice(g2)
        assert sp.contains(a @ b)


def test_enumerate_level_two_form():
    ring = local_ring(3, 2, 2)
    sp = GroupSpec.u(identity_mat(ring, 1))
    g = enumerate_group(sp)
    assert len(g) == 12        # 4 residue points x 3 kernel elements
    for m in g:
        assert sp.contains(m)


def test_kernel_elements():
    spec = GroupSpec.gl(2, R9)
    ker = kernel_elements(spec, 1)
    assert len(ker) == 81
    keys = {k.key() for k in ker}
    rng = random.Random(29)
    for _ in range(30):
        a, b = rng.choice(ker), rng.choice(ker)
        assert (a @ b).key() in keys
    for k in ker:
        assert k.reduce(1) == identity_mat(R3, 2)


def test_hensel_lift():
    spec1 = GroupSpec.gsp(2, R3)
    spec2 = GroupSpec.gsp(2, R9)
    for g1 in enumerate_group(spec1):
        g = hensel_lift_element(spec2, g1)
        assert spec2.contains(g)
        assert g.reduce(1) == g1


# ------------------------------------------------------------ GL tables

def test_primitive_roots():
    for p, r in ((3, 1), (3, 2), (3, 3), (5, 1), (5, 2)):
        g = primitive_root_mod_pr(p, r)
        order = p ** (r - 1) * (p - 1)
        assert pow(g, order, p ** r) == 1
        seen = set()
        x = 1
        for _ in range(order):
            x = x * g % p ** r
            seen.add(x)
        assert len(seen) == order


def test_generators_generate():
    spec = GroupSpec.gl(2, R3)
    gens = gl_generators(spec)
    frontier = [identity_mat(R3, 2)]
    seen = {frontier[0].key()}
    while frontier:
        nxt = []
        for g in frontier:
            for s in gens:
                h = g @ s
                if h.key() not in seen:
                    seen.add(h.key())
                    nxt.append(h)
        frontier = nxt
    assert len(seen) == 48


def test_group_table_frozen_class_counts():
    t1 = GroupTable(GroupSpec.gl(2, R3))
    assert t1.size == 48
    _, reps, sizes = t1.class_data()
    assert len(reps) == 8
    assert int(sizes.sum()) == 48
    t2 = GroupTable(GroupSpec.gl(2, R9))
    assert t2.size == 3888
    assert len(t2.class_data()[1]) == 78
    t3 = GroupTable(GroupSpec.gl(2, R27))
    assert t3.size == 314928
    assert len(t3.class_data()[1]) == 720


def test_group_table_ops():
    t = GroupTable(GroupSpec.gl(2, R9))
    rng = random.Random(31)
    ids = np.array([rng.randrange(t.size) for _ in range(50)])
    inv = t.inv_ids(ids)
    prod = t.mul_ids(ids, inv)
    assert np.all(prod == t.id_index)
    # index/mat round trip
    for i in ids[:10]:
        assert t.index_of(t.mat_of(int(i))) == int(i)
    # class labels constant on conjugation
    labels = t.class_labels()
    s = t.mat_of(7)
    perm = t.conj_perm(s)
    assert np.array_equal(labels[perm], labels)


def test_array_helpers():
    rng = np.random.default_rng(41)
    for n in (2, 3):
        m = rng.integers(0, 27, size=(40, n, n))
        adj = adjugate_array(m, 27)
        det = det_array(m, 27)
        prod = np.einsum("nij,njk->nik", m, adj) % 27
        expect = det[:, None, None] * np.eye(n, dtype=np.int64)[None] % 27
        assert np.array_equal(prod, expect)
    codes = encode_mat_array(np.arange(8).reshape(2, 2, 2), 9)
    assert codes[0] == 0 + 1 * 9 + 2 * 81 + 3 * 729
    tab = unit_inverse_table(27, 3)
    for u in range(1, 27):
        if u % 3:
            assert u * tab[u] % 27 == 1
