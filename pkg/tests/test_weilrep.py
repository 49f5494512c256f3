"""Weil representation layer: the central character family, the exact
monomial model, descent through the coordinate groups, intertwiners and
the canonical extension operators, at the smallest odd level."""

import json
import random

import numpy as np
import pytest

from orbitrep.groupscheme import GroupSpec, Mat, identity_mat, kernel_elements
from orbitrep.localring import QZPhase, local_ring
from orbitrep.orbitchar import companion_mat
from orbitrep.schurcocycle import RhoChar
from orbitrep.weilrep import (HeisenbergElem, KWeilRep, MonomialRep,
                              canonical_u, commutator_pairing_check,
                              extension_descent_check, heisenberg_checks,
                              induction_report, intertwiners, psi_family,
                              schrodinger, weil_check, weil_context, in_z,
                              z_subgroup)

R27 = local_ring(3, 3, 1)
SPEC = GroupSpec.gl(2, R27)
# residue irreducible, split semisimple, and nilpotent regular lifts
BETA = companion_mat(R27, (2, 2))
BETA_SPLIT = Mat(R27, [[1, 0], [0, 2]])
BETA_NILP = Mat(R27, [[0, 1], [0, 0]])

CTX = weil_context(SPEC, BETA)
RHO = RhoChar(CTX.datum.cent, [1, 2])
ZS = z_subgroup(CTX)
FAM = psi_family(CTX, RHO, z_elements=ZS)
KREP = KWeilRep(CTX, FAM)


def test_context_shape():
    assert CTX.l == 2 and CTX.r == 3 and CTX.p == 3
    assert CTX.datum.dim_fp == 2
    # dimension of the distinguished representation: p^(dim V / 2)
    assert CTX.dim == 3 == KREP.dim


def test_z_subgroup_order_and_structure():
    # two independent counts: the parametrization predicts
    # p^dim(centralizer) * |deeper kernel|, and the deeper kernel is
    # enumerated independently
    deep = kernel_elements(SPEC, 2)
    assert len(deep) == 81
    assert len(ZS) == 3 ** len(CTX.datum.cent) * len(deep) == 729
    zkeys = {z.key() for z in ZS}
    assert all(k.key() in zkeys for k in deep)  # contains K_l
    rng = random.Random(0)
    for _ in range(40):
        a, b = rng.choice(ZS), rng.choice(ZS)
        assert (a @ b).key() in zkeys  # closed under product
        x = CTX.random_kernel_element(rng)
        assert (x @ a @ x.inv()).key() in zkeys  # normal in the kernel
    # index in the kernel is the residue module order
    assert 3 ** 8 // len(ZS) == 9 == 3 ** CTX.datum.dim_fp


def test_psi_family_character():
    # additivity on deterministic pairs (the factory already certified
    # random pairs and lift independence by assertion)
    rng = random.Random(7)
    for _ in range(50):
        a, b = rng.choice(ZS), rng.choice(ZS)
        assert FAM.value(a) + FAM.value(b) == FAM.value(a @ b)
    # restriction to the deeper kernel is the linear character there
    for k in kernel_elements(SPEC, 2):
        assert FAM.value(k) == FAM.deep_value(k)
    # the family is rho-twisted: the quadratic section of a centralizer
    # element picks up exactly rho of its residue
    from orbitrep.groupscheme import quadratic_section
    from orbitrep.localring import tau_level
    for coeffs in ((1, 0), (0, 1), (2, 2)):
        xbar = CTX.datum.from_cent_coords(coeffs)
        h = quadratic_section(SPEC, xbar, CTX.l)
        want = tau_level(CTX.l, CTX.bform(xbar.lift(3), BETA)) \
            + RHO.value(xbar)
        assert FAM.value(h) == want
    # off-center elements are rejected
    w = CTX.datum.from_w_coords((1, 0))
    with pytest.raises(AssertionError):
        FAM.value(CTX.k_elem(w.lift(2)))


def test_commutator_pairing_is_residue_pairing():
    rep = commutator_pairing_check(CTX, FAM)
    assert rep == {"pairing_matches": True, "nondegenerate": True,
                   "classes": 9}


def test_heisenberg_group():
    assert heisenberg_checks(CTX.datum, samples=120)
    d = CTX.datum
    u = d.from_w_coords((1, 0))
    v = d.from_w_coords((0, 1))
    prod = HeisenbergElem(d, u) * HeisenbergElem(d, v)
    # the product phase is half the pairing value
    half = (d.p + 1) // 2
    assert prod.v == u + v
    assert prod.s == d.tau(d.pairing(u, v)) * half


def test_monomial_rep_algebra():
    third = QZPhase(1, 3)
    a = MonomialRep([1, 2, 0], [third, QZPhase(), third * 2])
    b = MonomialRep([2, 0, 1], [third * 2, third, QZPhase()])
    ident = MonomialRep.identity(3)
    assert a @ a.inv() == ident and a.inv() @ a == ident
    assert (a @ b) @ a == a @ (b @ a)
    assert a.scaled(third).ph[0] == third * 2
    assert ident.scalar_part() == QZPhase()
    assert a.scalar_part() is None
    c = a.to_complex()
    assert np.abs(c.conj().T @ c - np.eye(3)).max() < 1e-12
    assert abs(a.trace_complex()) < 1e-12  # no fixed point
    with pytest.raises(AssertionError):
        MonomialRep([0, 0, 1], [QZPhase()] * 3)


def test_schrodinger_model_exact_heisenberg_rep():
    d = CTX.datum
    model = KREP.model
    assert model.size == 3
    rng = random.Random(11)
    for _ in range(200):
        a = HeisenbergElem(d, d.from_w_coords(
            [rng.randrange(3) for _ in range(2)]), QZPhase(rng.randrange(3), 3))
        b = HeisenbergElem(d, d.from_w_coords(
            [rng.randrange(3) for _ in range(2)]), QZPhase(rng.randrange(3), 3))
        assert model.pi_elem(a) @ model.pi_elem(b) == model.pi_elem(a * b)
    # the center acts by the phase
    zero = d.from_w_coords((0, 0))
    s = QZPhase(2, 3)
    assert model.pi(zero, s).scalar_part() == s


def test_kernel_rep_homomorphism_and_homothety():
    rng = random.Random(3)
    for _ in range(150):
        g = CTX.random_kernel_element(rng)
        h = CTX.random_kernel_element(rng)
        assert KREP.value(g) @ KREP.value(h) == KREP.value(g @ h)
    rep = KREP.homothety_report()
    assert rep == {"ok": True, "checked": 729}


def test_induction_multiplicity_oracle():
    rep = induction_report(CTX, KREP)
    assert rep["dim"] == 3 and rep["dim_ind"] == 9
    assert rep["dim_ind_is_square"]
    assert rep["multiplicity_ok"] and rep["frobenius_agrees"]
    assert abs(rep["multiplicity"] - 3) < 1e-9
    assert rep["kernel_order"] == 6561 and rep["central_order"] == 729


def test_extension_descent():
    rep = extension_descent_check(CTX, KREP)
    assert rep["holds"], rep
    ctx2 = weil_context(SPEC, BETA_NILP)
    krep2 = schrodinger(ctx2, RhoChar(ctx2.datum.cent, [1, 0]))
    rep2 = extension_descent_check(ctx2, krep2, pair_samples=80,
                                   kernel_samples=25, descent_samples=50)
    assert rep2["holds"], rep2


def test_intertwiners_defect_equals_cocycle():
    iset = intertwiners(CTX, KREP)
    # the residue acting group of the irreducible orbit is the quadratic
    # extension's unit group; scalars act trivially on the module
    assert len(iset.residues) == 8
    assert iset.sigma_order == 4
    assert max(iset.residuals.values()) <= 1e-9
    ident_key = np.eye(2, dtype=np.int64).tobytes()
    assert np.abs(iset.t_of[ident_key] - np.eye(3)).max() == 0.0
    rep = iset.defect_report()
    assert rep["matches"] and rep["pairs"] == 64 and rep["worst"] <= 1e-9
    conj = iset.conjugation_report(samples=60)
    assert conj["worst"] <= 1e-9
    # every intertwiner is unitary
    for t in iset.t_of.values():
        assert np.abs(t.conj().T @ t - np.eye(3)).max() <= 1e-9


def test_intertwiners_zero_rho():
    krep0 = schrodinger(CTX, RhoChar(CTX.datum.cent, [0, 0]), z_elements=ZS)
    iset = intertwiners(CTX, krep0)
    # the zero twist has vanishing distinguished vectors and cocycle
    assert not iset.table.v_table.any()
    assert not iset.table.table.any()
    assert iset.defect_report()["matches"]


def test_intertwiners_reject_unstable_element():
    bad = Mat(R27, [[1, 1], [0, 1]])  # does not centralize the residue
    assert not CTX.in_stable_units(bad)
    with pytest.raises(AssertionError):
        intertwiners(CTX, KREP, acting=[identity_mat(R27, 2), bad])


def test_canonical_family():
    fam = canonical_u(CTX, KREP, samples=60)
    rep = fam.report
    assert rep["meet_size"] == 81
    assert rep["identity_on_meet"] <= 1e-12
    assert rep["multiplicativity"] <= 1e-9
    assert rep["conjugation"] <= 1e-9
    # multiplicative at residue level on a sample at full level
    rng = random.Random(9)
    iset = fam.iset
    fulls = list(iset.full_by_residue.values())
    for _ in range(20):
        g, h = rng.choice(fulls), rng.choice(fulls)
        assert np.abs(fam.u(g) @ fam.u(h) - fam.u(g @ h)).max() <= 1e-9
    for g in fam.meet:
        assert in_z(CTX, g)


def test_weil_check_reports():
    for beta, coeffs in ((BETA, [1, 2]), (BETA_SPLIT, [2, 0]),
                         (BETA_NILP, [0, 1])):
        rep = weil_check(SPEC, beta, rho_coeffs=coeffs)
        assert rep["ok"], rep
        assert rep["dim"] == 3 and rep["z_order"] == 729
        assert rep["homothety_ok"] and rep["descent_ok"]
        assert rep["cU_equals_c"]
        assert max(rep["residuals"].values()) <= 1e-9
        json.dumps(rep)  # CLI-ready
