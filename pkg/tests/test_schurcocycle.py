"""Section data, distinguished vectors, and centralizer-group cocycles.

Frozen oracles: quotient dimensions and centralizer-group orders are
pinned from independent counts (unit groups of F[beta], classical order
formulas); triviality runs through two independent routes (table
symmetry and an explicit coboundary solve) that must agree.
"""

import itertools

import pytest

from orbitrep.localring import QZPhase, local_ring
from orbitrep.groupscheme import GroupSpec, Mat, basis_mat, identity_mat
from orbitrep.orbitchar import companion_mat, regularity_test, minpoly_mat
from orbitrep.linalg import poly_deg
from orbitrep.schurcocycle import (CocycleTable, RhoChar, all_rho_chars,
                                   build_symplectic, centralizer_c_group,
                                   cocycle, gamma, jordan_section_check,
                                   overgroup_restriction_check,
                                   scalar_extension_check,
                                   section_independence_check, schur_sweep,
                                   triviality, v_of)

R3 = local_ring(3, 1)
R5 = local_ring(5, 1)
GL2 = GroupSpec.gl(2, R3)
GL3 = GroupSpec.gl(3, R3)

# companion matrix of an irreducible quadratic: regular, irreducible class
BETA_REG = companion_mat(R3, (2, 2))
E12 = basis_mat(R3, 2, 0, 1)
MIXED = Mat(R3, [[0, 1, 0], [0, 0, 0], [0, 0, 1]])
# regular cyclic element of gsp_4(F_3), found by seeded search and frozen
BETA_GSP = Mat(R3, [[0, 2, 1, 0], [0, 1, 0, 1], [2, 2, 0, 0], [2, 0, 1, 2]])


def test_datum_regular_class():
    datum = build_symplectic(GL2, BETA_REG, policy="lex")
    assert datum.dim_v == 2 and datum.dim_fp == 2
    assert len(datum.cent) == 2
    # Gram matrix alternating with zero diagonal, already asserted in
    # the constructor; re-check the shape and one value here
    z = datum.scalars.zero
    assert datum.gram[0][0] == z and datum.gram[1][1] == z
    assert datum.gram[0][1] == -datum.gram[1][0] != z
    first, second = datum.polarization()
    assert len(first) == 1 and len(second) == 1
    one = datum.scalars.one
    assert datum.pairing(first[0], second[0]) == one


def test_datum_rejects_bad_sections():
    cent = build_symplectic(GL2, BETA_REG).cent
    with pytest.raises(AssertionError):
        # centralizer elements cannot complete a complement
        build_symplectic(GL2, BETA_REG, complement=cent)
    # the orthogonal policy needs B nondegenerate on the centralizer;
    # for the nilpotent class it is not (B(E12, E12) = 0)
    with pytest.raises(ValueError):
        build_symplectic(GL2, E12, policy="orthogonal")


def test_gamma_identity_and_linearity():
    datum = build_symplectic(GL2, BETA_REG)
    one = identity_mat(R3, 2)
    zero = Mat(R3, [[0, 0], [0, 0]])
    for w in datum.fp_section:
        assert datum.gamma(w, one) == zero
    g = next(g for g in centralizer_c_group(GL2, BETA_REG)
             if g != one)
    # additivity over the whole quotient
    reps = [datum.from_w_coords(c)
            for c in itertools.product(range(3), repeat=datum.dim_fp)]
    for v in reps:
        for w in datum.fp_section:
            assert datum.gamma(v + w, g) == \
                datum.gamma(v, g) + datum.gamma(w, g)


def test_v_of_defining_equation_exhaustive():
    datum = build_symplectic(GL2, BETA_REG)
    rho = RhoChar(datum.cent, [1, 2])
    group = centralizer_c_group(GL2, BETA_REG)
    assert len(group) == 8  # unit group of F_9 realized in F[beta]
    reps = [datum.from_w_coords(c)
            for c in itertools.product(range(3), repeat=datum.dim_fp)]
    for g in group:
        vg = v_of(datum, rho, g)
        for v in reps:
            lhs = rho.value(gamma(datum, v, g))
            rhs = datum.tau(datum.pairing(v, vg))
            assert lhs == rhs


def test_nilpotent_class_all_characters_trivial():
    datum = build_symplectic(GL2, E12)
    group = centralizer_c_group(GL2, E12)
    assert len(group) == 6
    count = 0
    for rho in all_rho_chars(datum):
        t = CocycleTable(datum, rho, group)  # 2-cocycle identity asserted
        verdict = triviality(t)
        assert verdict["symmetric"] and verdict["trivial"]
        assert verdict["agree"]  # both routes concur
        assert t.multiplication_law()
        if verdict["witness"] is not None:
            # re-check the witness as an explicit coboundary
            alpha = verdict["witness"]
            for g in group:
                for h in group:
                    assert t.value(g, h) == \
                        alpha[g] + alpha[h] - alpha[g @ h]
        count += 1
    assert count == 9


def test_regular_class_tables():
    datum = build_symplectic(GL2, BETA_REG)
    group = centralizer_c_group(GL2, BETA_REG)
    for rho in all_rho_chars(datum):
        t = cocycle(datum, rho, group)
        assert t.cocycle_identity()
        assert t.multiplication_law()
        assert t.symmetric()
        assert not t.v_table[t.id_index].any()


def test_orthogonal_section_kills_v():
    # split semisimple class, form nondegenerate on its centralizer:
    # the orthogonal-complement section forces v_g = 0 and c = 0
    ss = Mat(R3, [[1, 0], [0, 2]])
    datum = build_symplectic(GL2, ss, policy="orthogonal")
    group = centralizer_c_group(GL2, ss)
    assert len(group) == 4
    for rho in all_rho_chars(datum):
        t = CocycleTable(datum, rho, group)
        assert not t.v_table.any()
        assert not t.table.any()


def test_section_independence_nilpotent():
    for seed in (5, 11):
        rep = section_independence_check(GL2, E12, [1, 2], seed=seed)
        assert rep["alpha_matches"]
        assert rep["ratio_is_coboundary"]
        assert rep["same_symmetry"]
        assert rep["holds"]


def test_section_independence_regular_explicit_other():
    # lex versus orthogonal complements on a split regular class
    ss = Mat(R3, [[1, 0], [0, 2]])
    other = build_symplectic(GL2, ss, policy="orthogonal").section_basis
    rep = section_independence_check(GL2, ss, [2, 1],
                                     other_complement=other)
    assert rep["holds"]


def test_scalar_extension():
    rep = scalar_extension_check(GL2, E12, [1, 2], 2)
    assert rep["equal"] and rep["holds"]
    rep = scalar_extension_check(GL2, BETA_REG, [0, 1], 2)
    assert rep["equal"]
    with pytest.raises(ValueError):
        scalar_extension_check(GL2, E12, [1, 2], 3)


def test_overgroup_restriction_gsp4():
    diag = regularity_test(GroupSpec.gsp(4, R3), BETA_GSP)
    assert diag["regular"]
    assert poly_deg(minpoly_mat(BETA_GSP)) == 4
    gsp4 = GroupSpec.gsp(4, R3)
    datum = build_symplectic(gsp4, BETA_GSP)
    assert datum.dim_v == 8
    group = centralizer_c_group(gsp4, BETA_GSP)
    assert len(group) == 18
    rep = overgroup_restriction_check(gsp4, GroupSpec.gl(4, R3),
                                      BETA_GSP, [1, 0, 2])
    assert rep["no_leakage"]
    assert rep["same_v"]
    assert rep["equal"]
    assert rep["holds"]
    assert rep["orthogonal_section_dim"] == 4


def test_jordan_adapted_section():
    # nilpotent: semisimple part 0, adapted subalgebra is all of gl_2
    rep = jordan_section_check(GL2, E12, [1, 2])
    assert rep["applicable"] and rep["x_in_levi"]
    assert rep["argument_in_centralizer"]
    assert rep["subtracted_reading"]
    assert rep["added_reading_zero_extension"]
    # the additive reading is extension-dependent, hence not the identity
    assert not rep["added_reading_other_extension"]
    assert rep["levi_dim_fp"] == 4

    # mixed class: 2-step nilpotent block plus a separate eigenvalue
    rep = jordan_section_check(GL3, MIXED, [1, 0, 2])
    assert rep["applicable"] and rep["x_in_levi"]
    assert rep["argument_in_centralizer"]
    assert rep["subtracted_reading"]
    assert rep["holds"]
    assert rep["levi_dim_fp"] == 5


def test_sweep_gl2_f3():
    recs = schur_sweep(GL2)
    reg = [r for r in recs if r.get("regular")]
    skipped = [r for r in recs if not r.get("regular")]
    assert len(reg) == 81  # 9 regular classes x 9 characters
    assert len(skipped) == 3  # the central classes
    assert all(r["symmetric"] and r["trivial"] for r in reg)
    assert sum(r.get("witness_checked", False) for r in reg) == 9
    orbits = {tuple(r["orbit"]) for r in reg}
    assert len(orbits) == 9


def test_rho_char_domain_guard():
    datum = build_symplectic(GL2, BETA_REG)
    rho = RhoChar(datum.cent, [1, 0])
    # E12 is not in F[beta] for this regular class
    assert E12 not in datum.cent
    with pytest.raises(AssertionError):
        rho.value(E12)
