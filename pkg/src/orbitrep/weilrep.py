"""Weil-type representation of the depth-(l-1) congruence kernel at odd
level r = 2l-1, attached to a smoothly regular orbit.

The residue module V = g(F)/g_beta(F) carries the alternating pairing
<x, y> = B([x, y], beta); the congruence quotient K_{l-1}/K_r is a
two-step group whose commutator phases reproduce that pairing.  The
construction here realizes the distinguished irreducible representation
of K_{l-1}(O_r) with central character psi_{beta,rho} concretely, as
exact monomial matrices indexed by one Lagrangian leg of V, and extends
it to the orbit's stabilizer units by solving for the intertwining
operators of the residue symplectic action.

Everything is exact (phases in Q/Z) except the intertwiner family
T(sigma), which lives in a complex matrix space with no canonical
basis; its scalars are snapped back to roots of unity and certified.
"""

import cmath
import itertools
import math
import random

import numpy as np

from .abelian import FinAbelian, coboundary_witness
from .groupscheme import (_scalar_mult_mat, commutator, divide_by_p_power,
                          identity_mat, inv2, kernel_elements, lie_basis,
                          quadratic_section, zero_mat)
from .linalg import inv_modp
from .localring import QZPhase, tau_level
from .orbitchar import centralizer_units
from .schurcocycle import (CocycleTable, RhoChar, build_symplectic,
                           triviality)


def _phase_num(ph, p):
    """Numerator of a Q/Z phase whose denominator divides p."""
    f = ph.frac
    assert p % f.denominator == 0, "phase outside the p-torsion"
    return f.numerator * (p // f.denominator) % p


def _divisible(m, pk):
    """Every coefficient of the matrix is divisible by pk."""
    return all(c % pk == 0 for row in m.rows for e in row for c in e.coeffs)


# ----------------------------------------------------------- the context


class WeilContext:
    """Bundle for the odd-level constructions: the group at level
    r = 2l-1 >= 3, a lifted orbit representative, and the symplectic
    datum of its residue."""

    def __init__(self, spec, beta, datum):
        ring = spec.ring
        assert ring.r >= 3 and ring.r % 2 == 1, "odd level r >= 3 required"
        assert beta.ring is ring, "representative not over the group ring"
        assert datum.spec.ring.p == ring.p
        assert datum.spec.n == spec.n and datum.spec.family == spec.family
        assert datum.beta_bar == beta.reduce(1), "datum residue mismatch"
        self.spec = spec
        self.ring = ring
        self.p = ring.p
        self.r = ring.r
        self.l = (ring.r + 1) // 2
        self.beta = beta
        self.datum = datum
        self.ident = identity_mat(ring, spec.n)
        self.inv2_scalar = inv2(spec.scalar_ring)
        self.dim = self.p ** (datum.dim_fp // 2)

    def bform(self, x, y):
        """Trace pairing at full level, in the scalar ring."""
        return self.spec.trace_form(x, y)

    def depth_residue(self, h):
        """X mod p for h = 1 + p^{l-1} X; the residue of the kernel
        coordinate."""
        return divide_by_p_power(h - self.ident, self.l - 1, 1)

    def kernel_coordinate(self, h):
        """X mod p^l for h = 1 + p^{l-1} X, over O_l."""
        return divide_by_p_power(h - self.ident, self.l - 1)

    def k_elem(self, x):
        """1 + p^{l-1} X at full level, for X over any level <= l."""
        c = self.ring.elem(self.p ** (self.l - 1))
        return self.ident + x.lift(self.r).scale(c)

    def in_kernel(self, h, depth=None):
        """Congruence test h = 1 mod p^depth (default depth l-1)."""
        depth = self.l - 1 if depth is None else depth
        return _divisible(h - self.ident, self.p ** depth)

    def random_kernel_element(self, rng):
        """Uniform element of K_{l-1}(O_r) through the coordinate
        parametrization."""
        return self.k_elem(lie_basis(self.spec, self.l).random_element(rng))

    def in_stable_units(self, g, ginv=None):
        """Membership in the acting set: Ad(g) fixes the representative
        to depth l and fixes the residue centralizer elementwise."""
        if ginv is None:
            ginv = g.inv()
        moved = g @ self.beta @ ginv - self.beta
        if not _divisible(moved, self.p ** self.l):
            return False
        gb, gbinv = g.reduce(1), ginv.reduce(1)
        return all(gb @ x @ gbinv == x for x in self.datum.cent)


def weil_context(spec, beta, policy="lex", complement=None, tau=None):
    """Build the context from a group at odd level and a representative
    whose residue is smoothly regular."""
    datum = build_symplectic(spec.at_level(1), beta.reduce(1),
                             policy=policy, complement=complement, tau=tau)
    return WeilContext(spec, beta, datum)


# ------------------------------------------------- the central subgroup


def z_subgroup(ctx, budget=2 * 10 ** 6):
    """The preimage of the residue centralizer inside K_{l-1}(O_r):
    elements 1 + p^{l-1}(lift(Xbar) + p*S) with Xbar centralizing the
    residue orbit representative and S free over O_{l-1}."""
    assert ctx.spec.family == "GL", \
        "kernel parametrization wired for the full matrix family"
    p, ring = ctx.p, ctx.ring
    deep = lie_basis(ctx.spec, ctx.l - 1)
    assert p ** (len(ctx.datum.cent) + (ctx.l - 1) * deep.zdim()) <= budget, \
        "central subgroup exceeds budget"
    pe = ring.elem(p)
    out = []
    for coeffs in itertools.product(range(p), repeat=len(ctx.datum.cent)):
        lam = ctx.datum.from_cent_coords(coeffs).lift(ctx.r)
        for s in deep.span_iter(budget=budget):
            out.append(ctx.k_elem(lam + s.lift(ctx.r).scale(pe)))
    assert len({h.key() for h in out}) == len(out), "parametrization collision"
    return out


def in_z(ctx, h):
    """h lies over the residue centralizer (the section component of its
    depth residue vanishes)."""
    if not ctx.in_kernel(h):
        return False
    cent, sect = ctx.datum.split(ctx.depth_residue(h))
    return not any(sect)


# -------------------------------------------------- the character family


class PsiFamily:
    """The character family on the central subgroup: the quadratic base
    character of K_{l-1} restricted to it, twisted by a character rho of
    the residue centralizer.

    psi_base(1 + p^{l-1} X) = tau(p^{-l} B(X, beta) - (2p)^{-1} B(X^2, beta))
    value(h) = psi_base(h) + rho(depth residue of h)      (h central)
    """

    def __init__(self, ctx, rho, z_elements=None):
        self.ctx = ctx
        self.rho = rho
        self.z_elements = z_subgroup(ctx) if z_elements is None else z_elements
        self.psi_base_table = {}
        self.psi_table = {}
        for h in self.z_elements:
            base = self.psi_base(h)
            self.psi_base_table[h.key()] = base
            self.psi_table[h.key()] = base + rho.value(
                ctx.datum.gbeta_part(ctx.depth_residue(h)))
        # numerators of the commutator pairing on the residue module
        self.d_psi_gram = ctx.datum.phase_gram

    def psi_base(self, h):
        """The quadratic character of all of K_{l-1}(O_r); depends only
        on the kernel coordinate mod p^l."""
        ctx = self.ctx
        x = ctx.kernel_coordinate(h).lift(ctx.r)
        lead = tau_level(ctx.l, ctx.bform(x, ctx.beta))
        quad = tau_level(1, ctx.inv2_scalar * ctx.bform(x @ x, ctx.beta))
        return lead - quad

    def value(self, h):
        hit = self.psi_table.get(h.key())
        if hit is not None:
            return hit
        ctx = self.ctx
        cent, sect = ctx.datum.split(ctx.depth_residue(h))
        assert not any(sect), "element outside the central subgroup"
        res = self.psi_base(h) + self.rho.value(
            ctx.datum.from_cent_coords(cent))
        self.psi_table[h.key()] = res
        return res

    def deep_value(self, k):
        """The base character on the deeper kernel K_l(O_r):
        1 + p^l S maps to tau(p^{-(l-1)} B(S, beta))."""
        ctx = self.ctx
        s = divide_by_p_power(k - ctx.ident, ctx.l)
        lvl = ctx.l - 1
        b = ctx.spec.at_level(lvl).trace_form(s, ctx.beta.reduce(lvl))
        return tau_level(lvl, b)

    def commutator_value(self, g, h):
        """psi_base on the commutator of two kernel elements (which
        lands in the deeper kernel)."""
        return self.deep_value(g @ h @ g.inv() @ h.inv())


def psi_family(ctx, rho, z_elements=None, samples=60, seed=0):
    """Construct the family and certify that it is a character: value
    additive on random central pairs, the quadratic base independent of
    the choice of kernel coordinate lift, and the restriction to the
    deeper kernel equal to the linear character there."""
    beta = ctx.beta
    fam = PsiFamily(ctx, rho, z_elements=z_elements)
    rng = random.Random(seed)
    zs = fam.z_elements
    for _ in range(samples):
        a, b = rng.choice(zs), rng.choice(zs)
        assert fam.value(a) + fam.value(b) == fam.value(a @ b), \
            "central character fails additivity"
    # lift independence: perturb the coordinate by p^l junk
    junk_basis = lie_basis(ctx.spec, 1)
    pl = ctx.ring.elem(ctx.p ** ctx.l)
    for _ in range(samples // 3 + 1):
        h = rng.choice(zs)
        x = ctx.kernel_coordinate(h).lift(ctx.r)
        x = x + junk_basis.random_element(rng).lift(ctx.r).scale(pl)
        lead = tau_level(ctx.l, ctx.bform(x, beta))
        quad = tau_level(1, ctx.inv2_scalar * ctx.bform(x @ x, beta))
        assert lead - quad == fam.psi_base_table[h.key()], \
            "base character depends on the coordinate lift"
    return fam


def commutator_pairing_check(ctx, fam):
    """The commutator phase on K_{l-1}/Z equals the residue pairing,
    exhaustively over section representatives; nondegeneracy is the
    invertibility of the pairing numerators."""
    datum = ctx.datum
    p = ctx.p
    reps = [datum.from_w_coords(c) for c in
            itertools.product(range(p), repeat=datum.dim_fp)]
    ok = True
    for u in reps:
        gu = ctx.k_elem(u)
        for v in reps:
            want = datum.tau(datum.pairing(u, v))
            got = fam.commutator_value(gu, ctx.k_elem(v))
            ok = ok and (want == got)
    nondeg = int(round(float(np.linalg.det(
        ctx.datum.phase_gram.astype(float))))) % p != 0
    return {"pairing_matches": ok, "nondegenerate": nondeg,
            "classes": len(reps)}


# ------------------------------------------ Heisenberg group and model


class HeisenbergElem:
    """(v, s) with v a section representative of the residue module and
    s a phase; the product twists by half the pairing."""

    __slots__ = ("datum", "v", "s")

    def __init__(self, datum, v, s=None):
        self.datum = datum
        self.v = v
        self.s = QZPhase() if s is None else s

    def __mul__(self, other):
        d = self.datum
        assert other.datum is d
        half = (d.p + 1) // 2  # inverse of 2 mod p
        tw = d.tau(d.pairing(self.v, other.v)) * half
        return HeisenbergElem(d, self.v + other.v, self.s + other.s + tw)

    def inv(self):
        return HeisenbergElem(self.datum, self.v.scale(
            self.datum.ring.elem(self.datum.p - 1)), -self.s)

    def __eq__(self, other):
        return (isinstance(other, HeisenbergElem)
                and self.v == other.v and self.s == other.s)

    def key(self):
        return (self.v.key(), self.s.frac)


def heisenberg_checks(datum, samples=200, seed=0):
    """Associativity, identity and inverses on random triples; the
    center is the phase circle."""
    rng = random.Random(seed)
    p = datum.p

    def rand_elem():
        coords = [rng.randrange(p) for _ in range(datum.dim_fp)]
        return HeisenbergElem(datum, datum.from_w_coords(coords),
                              QZPhase(rng.randrange(p), p))

    ident = HeisenbergElem(datum, zero_mat(datum.ring, datum.spec.n))
    for _ in range(samples):
        a, b, c = rand_elem(), rand_elem(), rand_elem()
        assert (a * b) * c == a * (b * c), "associativity fails"
        assert a * ident == a and ident * a == a
        assert a * a.inv() == ident
    return True


class MonomialRep:
    """A square matrix with one nonzero root-of-unity entry per row and
    column: column j carries phase ph[j] at row tgt[j].  Composition,
    inverse and scalar twist stay exact."""

    __slots__ = ("tgt", "ph")

    def __init__(self, tgt, ph):
        self.tgt = np.asarray(tgt, dtype=np.int64)
        self.ph = list(ph)
        assert len(set(self.tgt.tolist())) == len(self.ph), \
            "not a permutation"

    @classmethod
    def identity(cls, n):
        return cls(np.arange(n), [QZPhase()] * n)

    @property
    def size(self):
        return len(self.ph)

    def __matmul__(self, other):
        tgt = self.tgt[other.tgt]
        ph = [other.ph[j] + self.ph[int(other.tgt[j])]
              for j in range(len(self.ph))]
        return MonomialRep(tgt, ph)

    def inv(self):
        n = len(self.ph)
        tgt = np.empty(n, dtype=np.int64)
        ph = [None] * n
        for j in range(n):
            tgt[int(self.tgt[j])] = j
            ph[int(self.tgt[j])] = -self.ph[j]
        return MonomialRep(tgt, ph)

    def scaled(self, s):
        return MonomialRep(self.tgt, [x + s for x in self.ph])

    def __eq__(self, other):
        return (isinstance(other, MonomialRep)
                and (self.tgt == other.tgt).all() and self.ph == other.ph)

    def scalar_part(self):
        """The phase when the matrix is a homothety, else None."""
        n = len(self.ph)
        if not (self.tgt == np.arange(n)).all():
            return None
        if any(x != self.ph[0] for x in self.ph):
            return None
        return self.ph[0]

    def to_complex(self):
        n = len(self.ph)
        out = np.zeros((n, n), dtype=complex)
        for j in range(n):
            out[int(self.tgt[j]), j] = self.ph[j].to_complex()
        return out

    def trace_complex(self):
        return sum((self.ph[j].to_complex()
                    for j in range(len(self.ph)) if self.tgt[j] == j),
                   start=0j)


class SchrodingerModel:
    """The exact irreducible model of the Heisenberg group on functions
    over one Lagrangian leg of the residue module.

    (v, s) acts on the delta function at u by translation along the
    W'-component of v and a phase linear in the W-component:
    delta_u -> s + tau(2^{-1}<v_-, v_+> + <u - v_-, v_+>) at u - v_-.
    """

    def __init__(self, datum):
        self.datum = datum
        p = datum.p
        self.p = p
        first, second = datum.polarization()
        self.lagrangian = first
        self.opposite = second
        blocks_f = _fp_block(datum, first)
        blocks_s = _fp_block(datum, second)
        self.half = len(blocks_f)
        assert 2 * self.half == datum.dim_fp
        cols = [datum.w_coords(m) for m in blocks_f + blocks_s]
        self.basis_change = np.array(cols, dtype=np.int64).T % p
        self.basis_inv = np.array(
            inv_modp([r.tolist() for r in self.basis_change], p),
            dtype=np.int64)
        self.points = np.array(
            list(itertools.product(range(p), repeat=self.half)),
            dtype=np.int64)
        self.radix = np.array([p ** (self.half - 1 - i)
                               for i in range(self.half)], dtype=np.int64)
        self.size = len(self.points)
        self.inv2p = pow(2, -1, p)
        self.gram = datum.phase_gram

    def split_coords(self, v):
        """(a, b): coordinates of the two Lagrangian components in the
        polarized basis, for v in the section subspace."""
        y = (self.basis_inv @ self.datum.w_coords(v)) % self.p
        return y[:self.half], y[self.half:]

    def point_matrix(self, coords):
        """The section matrix of a point of the Lagrangian leg."""
        orig = (self.basis_change[:, :self.half] @
                np.asarray(coords, dtype=np.int64)) % self.p
        return self.datum.from_w_coords(orig)

    def pi(self, v, s=None):
        """The operator of (v, s) as an exact monomial matrix."""
        p = self.p
        s = QZPhase() if s is None else s
        a, b = self.split_coords(v)
        vm = (self.basis_change[:, :self.half] @ a) % p
        vp = (self.basis_change[:, self.half:] @ b) % p
        base = self.inv2p * int(vm @ self.gram @ vp)
        shifted = (self.points - a) % p
        diff_orig = (shifted @ self.basis_change[:, :self.half].T) % p
        extras = (diff_orig @ (self.gram @ vp)) % p
        tgt = shifted @ self.radix
        ph = [s + QZPhase(base + int(e), p) for e in extras]
        return MonomialRep(tgt, ph)

    def pi_elem(self, h):
        return self.pi(h.v, h.s)


def _fp_block(datum, field_basis):
    """Scalar-power multiples of each field basis vector, giving a prime
    field basis of their span (mirrors the Lie basis block order)."""
    sc = datum.scalars
    gens = [sc.one]
    if sc.d > 1:
        xi = sc.generator()
        for _ in range(sc.d - 1):
            gens.append(gens[-1] * xi)
    return [_scalar_mult_mat(m, c, datum.spec)
            for m in field_basis for c in gens]


# --------------------------------------- the kernel representation


class KWeilRep:
    """The distinguished irreducible representation of K_{l-1}(O_r) with
    central character psi: the quadratic base phase times rho on the
    centralizer component times a Heisenberg translation."""

    def __init__(self, ctx, fam, model=None):
        self.ctx = ctx
        self.psi = fam
        self.model = SchrodingerModel(ctx.datum) if model is None else model
        self.dim = self.model.size

    def value(self, g):
        ctx = self.ctx
        x = ctx.kernel_coordinate(g).lift(ctx.r)
        lead = tau_level(ctx.l, ctx.bform(x, ctx.beta))
        quad = tau_level(1, ctx.inv2_scalar * ctx.bform(x @ x, ctx.beta))
        cent, sect = ctx.datum.split(x.reduce(1))
        ph = (lead - quad
              + self.psi.rho.value(ctx.datum.from_cent_coords(cent)))
        return self.model.pi(ctx.datum.from_w_coords(sect), ph)

    def homothety_report(self):
        """On the whole central subgroup the operator is the homothety
        by the character value."""
        checked = 0
        for h in self.psi.z_elements:
            sc = self.value(h).scalar_part()
            if sc is None or sc != self.psi.value(h):
                return {"ok": False, "checked": checked}
            checked += 1
        return {"ok": True, "checked": checked}


def schrodinger(ctx, rho, z_elements=None, samples=60, seed=0):
    """Model factory: certify the character family, then return the
    kernel representation."""
    fam = psi_family(ctx, rho, z_elements=z_elements,
                     samples=samples, seed=seed)
    return KWeilRep(ctx, fam)


def induction_report(ctx, krep, budget=2 * 10 ** 6):
    """Brute-force character theory over the whole kernel: the induced
    character of psi from the central subgroup has dimension dim^2 and
    contains the representation with multiplicity exactly dim; the
    Frobenius route through restriction must agree."""
    fam = krep.psi
    kelems = kernel_elements(ctx.spec, ctx.l - 1, budget=budget)
    p = ctx.p
    datum = ctx.datum
    reps = [ctx.k_elem(datum.from_w_coords(c).lift(ctx.l))
            for c in itertools.product(range(p), repeat=datum.dim_fp)]
    rep_invs = [g.inv() for g in reps]
    index = len(reps)
    psi_c = {h.key(): fam.value(h).to_complex() for h in fam.z_elements}
    total = 0j
    seen_z = 0
    for k in kelems:
        if not in_z(ctx, k):
            continue
        seen_z += 1
        ind = sum(psi_c[(x @ k @ xi).key()]
                  for x, xi in zip(reps, rep_invs))
        total += krep.value(k).trace_complex() * ind.conjugate()
    mult = total / len(kelems)
    frob = sum(krep.value(z).trace_complex()
               * fam.value(z).to_complex().conjugate()
               for z in fam.z_elements) / len(fam.z_elements)
    dim_ind = index  # induced from a linear character
    return {
        "dim": krep.dim,
        "dim_ind": dim_ind,
        "dim_ind_is_square": dim_ind == krep.dim ** 2,
        "multiplicity": mult,
        "multiplicity_ok": abs(mult - krep.dim) < 1e-9,
        "frobenius": frob,
        "frobenius_agrees": abs(frob - mult) < 1e-9,
        "kernel_order": len(kelems),
        "central_order": seen_z,
    }


# --------------------------------- descent through the coordinate groups


def carry_defect(ctx, x, y):
    """mu with lift(x) + lift(y) - lift(x+y) = p * mu, over O_{l-1}."""
    lvl = ctx.l
    dif = x.lift(lvl) + y.lift(lvl) - (x + y).lift(lvl)
    return divide_by_p_power(dif, 1, ctx.l - 1)


def fiber_mul(ctx, a, b):
    """Product in the fiber product of the two coordinate groups over
    the residue Lie algebra: the first deep leg absorbs the halved
    commutator (it feeds the phase collapse), the second the lift carry
    (it feeds the base phase)."""
    (x, s, t), (y, s2, t2) = a, b
    lvl = ctx.l - 1
    ring = ctx.ring.at_level(lvl)
    cg = commutator(x, y).lift(lvl).scale(
        inv2(ring) * ring.elem(ctx.p ** (ctx.l - 2)))
    return (x + y, s + s2 + cg, t + t2 + carry_defect(ctx, x, y))


def fiber_to_group(ctx, a):
    """The surjection onto K_{l-1}(O_r): the quadratic section of the
    residue leg times the deep kernel element of the sum of deep legs."""
    x, s, t = a
    sec = quadratic_section(ctx.spec, x, ctx.l)
    join = (s + t).lift(ctx.r).scale(ctx.ring.elem(ctx.p ** ctx.l))
    return sec @ (ctx.ident + join)


def fiber_preimage(ctx, k, rng=None):
    """A preimage of a kernel element under the surjection; the split of
    the deep leg is free and randomized when an rng is given."""
    x = ctx.depth_residue(k)
    rest = quadratic_section(ctx.spec, x, ctx.l).inv() @ k
    total = divide_by_p_power(rest - ctx.ident, ctx.l)
    lvl = ctx.l - 1
    if rng is None:
        s = zero_mat(ctx.ring.at_level(lvl), ctx.spec.n)
    else:
        s = lie_basis(ctx.spec, lvl).random_element(rng)
    a = (x, s, total - s)
    assert fiber_to_group(ctx, a) == k, "preimage reconstruction failed"
    return a


def phase_group_mul(ctx, a, b):
    """Product in the quotient phase group: residue legs add, scalar
    legs add with the halved commutator pairing against the orbit."""
    (x, s), (y, t) = a, b
    lvl = ctx.l - 1
    ring = ctx.ring.at_level(lvl)
    spec = ctx.spec.at_level(lvl)
    c = spec.trace_form(commutator(x, y).lift(lvl), ctx.beta.reduce(lvl))
    c = inv2(spec.scalar_ring) * spec.scalar_ring.elem(
        ctx.p ** (ctx.l - 2)) * c
    return (x + y, s + t + c)


def to_phase_group(ctx, a):
    """Collapse a fiber element to the phase group: the first deep leg
    only enters through its pairing with the orbit representative."""
    x, s, t = a
    lvl = ctx.l - 1
    b = ctx.spec.at_level(lvl).trace_form(s, ctx.beta.reduce(lvl))
    return (x, b)


def base_phase(ctx, a):
    """The quadratic base phase of a fiber element: tau at depth l of
    B(lift(residue leg) + p * second deep leg, beta)."""
    x, s, t = a
    arg = x.lift(ctx.r) + t.lift(ctx.r).scale(ctx.ring.elem(ctx.p))
    return tau_level(ctx.l, ctx.bform(arg, ctx.beta))


def center_char(ctx, rho, y, s):
    """The character of the center of the phase group: rho on the
    centralizer leg plus tau at depth l-1 on the scalar leg."""
    return rho.value(y) + tau_level(ctx.l - 1, s)


def phase_group_pi(ctx, krep, a):
    """The model operator of a phase group element: split the residue
    leg into centralizer and section parts, feed the centralizer part to
    the central character and the section part to the Heisenberg
    action."""
    x, s = a
    cent, sect = ctx.datum.split(x)
    ph = center_char(ctx, krep.psi.rho,
                     ctx.datum.from_cent_coords(cent), s)
    return krep.model.pi(ctx.datum.from_w_coords(sect), ph)


def extension_descent_check(ctx, krep, pair_samples=200, kernel_samples=50,
                            descent_samples=100, seed=0):
    """Certify the whole descent chain at once.

    The fiber product surjects onto K_{l-1}(O_r); its collapse to the
    phase group is a homomorphism; the kernel of the surjection is
    annihilated by the product of the base phase and the central
    character; and the base-phase-twisted model operator of the collapse
    descends exactly to the kernel representation.
    """
    rng = random.Random(seed)
    lb1 = lie_basis(ctx.spec, 1)
    lbd = lie_basis(ctx.spec, ctx.l - 1)

    def rand_fiber():
        return (lb1.random_element(rng), lbd.random_element(rng),
                lbd.random_element(rng))

    star_hom = spade_hom = True
    for _ in range(pair_samples):
        a, b = rand_fiber(), rand_fiber()
        ab = fiber_mul(ctx, a, b)
        star_hom = star_hom and (
            fiber_to_group(ctx, a) @ fiber_to_group(ctx, b)
            == fiber_to_group(ctx, ab))
        pa, pb = to_phase_group(ctx, a), to_phase_group(ctx, b)
        qa = phase_group_mul(ctx, pa, pb)
        qb = to_phase_group(ctx, ab)
        spade_hom = spade_hom and qa[0] == qb[0] and qa[1] == qb[1]

    # kernel: residue leg zero, deep legs opposite
    kernel_killed = lands_deep = True
    rho = krep.psi.rho
    zero1 = zero_mat(ctx.ring.at_level(1), ctx.spec.n)
    for _ in range(kernel_samples):
        s = lbd.random_element(rng)
        a = (zero1, s, zero_mat(s.ring, ctx.spec.n) - s)
        assert fiber_to_group(ctx, a) == ctx.ident
        x, sc = to_phase_group(ctx, a)
        total = base_phase(ctx, a) + center_char(ctx, rho, x, sc)
        kernel_killed = kernel_killed and total.is_zero()
        b = (zero1, s, lbd.random_element(rng))
        lands_deep = lands_deep and ctx.in_kernel(
            fiber_to_group(ctx, b), depth=ctx.l)

    # character descent on the central subgroup, preimage-independent
    psi_descends = True
    zs = krep.psi.z_elements
    for _ in range(descent_samples // 2):
        z = rng.choice(zs)
        a = fiber_preimage(ctx, z, rng=rng)
        x, sc = to_phase_group(ctx, a)
        got = base_phase(ctx, a) + center_char(
            ctx, rho, ctx.datum.gbeta_part(x), sc)
        psi_descends = psi_descends and got == krep.psi.value(z)

    # operator descent on the whole kernel
    rep_descends = True
    for _ in range(descent_samples):
        k = ctx.random_kernel_element(rng)
        a = fiber_preimage(ctx, k, rng=rng)
        op = phase_group_pi(ctx, krep, to_phase_group(ctx, a))
        rep_descends = rep_descends and (
            op.scaled(base_phase(ctx, a)) == krep.value(k))

    out = {"star_homomorphism": star_hom,
           "phase_collapse_homomorphism": spade_hom,
           "kernel_killed": kernel_killed,
           "kernel_lands_deep": lands_deep,
           "character_descends": psi_descends,
           "rep_descends": rep_descends}
    out["holds"] = all(out.values())
    return out


# --------------------------------------------------- intertwiners


def _solve_intertwiner(model, sigma, tol=1e-9):
    """The operator conjugating the Heisenberg action by the symplectic
    residue action: pi(v) T = T pi(v.sigma) on generators.  The solution
    space must be one-dimensional."""
    n = model.size
    p = model.p
    if (sigma == np.eye(model.datum.dim_fp, dtype=np.int64)).all():
        return np.eye(n, dtype=complex), 0.0
    datum = model.datum
    rows = []
    for i, w in enumerate(datum.fp_section):
        before = model.pi(w).to_complex()
        moved = datum.from_w_coords(sigma[i] % p)
        after = model.pi(moved).to_complex()
        block = np.zeros((n * n, n * n), dtype=complex)
        for idx in range(n * n):
            e = np.zeros((n, n), dtype=complex)
            e.flat[idx] = 1.0
            block[:, idx] = (before @ e - e @ after).reshape(-1)
        rows.append(block)
    m = np.concatenate(rows, axis=0)
    _, sv, vh = np.linalg.svd(m)
    null = int((sv < tol * max(1.0, sv[0])).sum())
    if null != 1:
        raise ValueError(
            "intertwiner space has dimension %d, expected 1" % null)
    t = vh[-1].conj().reshape(n, n)
    gram = t.conj().T @ t
    scale = math.sqrt(abs(gram[0, 0].real))
    t = t / scale
    # fix the unit scalar by forcing det = 1; any two homomorphism
    # normalizations then differ by n-th roots of unity, so the product
    # defect below is an exact n-th root
    det = complex(np.linalg.det(t))
    t = t * cmath.exp(-1j * cmath.phase(det) / n)
    resid = float(np.abs(t.conj().T @ t - np.eye(n)).max())
    return t, resid


def _snap_phase(z, den, tol):
    """Nearest root of unity of order dividing den; the distance must be
    within tol."""
    mag = abs(z)
    assert abs(mag - 1.0) <= tol, "not a unit scalar"
    ang = cmath.phase(z) / (2 * math.pi)
    k = round(ang * den) % den
    err = abs(z - cmath.exp(2j * math.pi * k / den))
    assert err <= tol, "scalar does not snap to a root of unity"
    return QZPhase(k, den), err


def _extract_scalar(m, tol):
    """m must be scalar * identity within tol; return the scalar and the
    off-pattern residual."""
    n = m.shape[0]
    c = complex(np.trace(m)) / n
    resid = float(np.abs(m - c * np.eye(n)).max())
    assert resid <= tol, "operator is not a homothety"
    return c, resid


class IntertwinerSet:
    """Intertwining operators for a commuting family inside the orbit's
    depth-l stabilizer: per residue sigma a complex unitary T(sigma),
    normalized to a homomorphism on the generated symplectic group, and
    the induced operators U(g) = pi(v_g) T(sigma_g) whose defect cocycle
    must reproduce the exact centralizer cocycle."""

    def __init__(self, ctx, krep, acting, tol=1e-9, snap_tol=1e-6):
        self.ctx = ctx
        self.krep = krep
        self.tol = tol
        self.snap_tol = snap_tol
        datum = ctx.datum
        p = ctx.p
        residues = []
        self.full_by_residue = {}
        for g in acting:
            ginv = g.inv()
            assert ctx.in_stable_units(g, ginv), \
                "element outside the stable unit set"
            res = g.reduce(1)
            if res.key() not in self.full_by_residue:
                self.full_by_residue[res.key()] = g
                residues.append(res)
        self.residues = residues
        self.table = CocycleTable(datum, krep.psi.rho, residues)
        self.index = {g.key(): i for i, g in enumerate(residues)}
        # distinct symplectic residue actions and their intertwiners
        self.sigma_of = []
        sigmas = {}
        inter_resid = 0.0
        unit_resid = 0.0
        for i, g in enumerate(residues):
            sig = datum.sigma_matrix(g, self.table.invs[i])
            key = sig.tobytes()
            if key not in sigmas:
                t, ur = _solve_intertwiner(krep.model, sig, tol=tol)
                sigmas[key] = (sig, t)
                unit_resid = max(unit_resid, ur)
            self.sigma_of.append(key)
        # normalize to a homomorphism on the generated group
        sig_keys = list(sigmas)
        dim_v = datum.dim_fp
        ident_key = np.eye(dim_v, dtype=np.int64).tobytes()
        assert ident_key in sigmas, "acting set misses the identity"

        def sig_mul(a, b):
            prod = (sigmas[a][0] @ sigmas[b][0]) % p
            return prod.astype(np.int64).tobytes()

        closure = set(sig_keys)
        frontier = list(sig_keys)
        while frontier:
            nxt = []
            for a in frontier:
                for b in sig_keys:
                    c = sig_mul(a, b)
                    if c not in closure:
                        closure.add(c)
                        arr = np.frombuffer(c, dtype=np.int64).reshape(
                            dim_v, dim_v)
                        t, ur = _solve_intertwiner(krep.model, arr, tol=tol)
                        sigmas[c] = (arr, t)
                        unit_resid = max(unit_resid, ur)
                        nxt.append(c)
            frontier = nxt
        group = FinAbelian(sorted(closure), sig_mul, ident_key)
        den = krep.model.size  # det-1 normalization forces d^dim = 1
        defect = {}
        snap_err = 0.0
        for a in closure:
            ta = sigmas[a][1]
            for b in closure:
                prod = sig_mul(a, b)
                m = ta @ sigmas[b][1] @ sigmas[prod][1].conj().T
                c, resid = _extract_scalar(m, snap_tol)
                ph, err = _snap_phase(c, den, snap_tol)
                snap_err = max(snap_err, err, resid)
                defect[(a, b)] = ph
        witness = coboundary_witness(group, lambda a, b: defect[(a, b)])
        if witness is None:
            raise ValueError("intertwiner normalization unsat: the scalar "
                             "defect is not a coboundary")
        self.t_of = {k: sigmas[k][1] * complex((-witness[k]).to_complex())
                     for k in closure}
        hom_resid = 0.0
        for a in closure:
            for b in closure:
                delta = np.abs(self.t_of[a] @ self.t_of[b]
                               - self.t_of[sig_mul(a, b)]).max()
                hom_resid = max(hom_resid, float(delta))
        # intertwining residual on random full Heisenberg elements
        rng = random.Random(1)
        model = krep.model
        for key in closure:
            arr, _ = sigmas[key]
            t = self.t_of[key]
            for _ in range(4):
                coords = np.array([rng.randrange(p) for _ in range(dim_v)],
                                  dtype=np.int64)
                v = datum.from_w_coords(coords)
                mv = datum.from_w_coords((coords @ arr) % p)
                delta = np.abs(model.pi(v).to_complex() @ t
                               - t @ model.pi(mv).to_complex()).max()
                inter_resid = max(inter_resid, float(delta))
        self._u_cache = {}
        self.residuals = {"unitarity": unit_resid,
                          "intertwining": inter_resid,
                          "homomorphism": hom_resid,
                          "snap": snap_err}
        self.sigma_order = len(closure)

    def u(self, i):
        """U at the i-th residue: the Heisenberg translation by the
        distinguished vector composed with the intertwiner."""
        hit = self._u_cache.get(i)
        if hit is None:
            datum = self.ctx.datum
            vmat = datum.from_w_coords(self.table.v_table[i])
            hit = (self.krep.model.pi(vmat).to_complex()
                   @ self.t_of[self.sigma_of[i]])
            self._u_cache[i] = hit
        return hit

    def u_of(self, g):
        return self.u(self.index[g.reduce(1).key()])

    def defect_report(self):
        """U(g) U(h) = c(g, h) U(gh) with the scalar snapped to an exact
        phase; it must equal the centralizer cocycle entry for every
        pair."""
        p = self.ctx.p
        tab = self.table
        worst = 0.0
        matches = True
        for i in range(len(self.residues)):
            ui = self.u(i)
            for j in range(len(self.residues)):
                m = ui @ self.u(j) @ self.u(int(tab.prod[i, j])).conj().T
                c, resid = _extract_scalar(m, self.snap_tol)
                ph, err = _snap_phase(c, p, self.snap_tol)
                worst = max(worst, resid, err)
                if ph != QZPhase(int(tab.table[i, j]), p):
                    matches = False
        return {"matches": matches, "pairs": len(self.residues) ** 2,
                "worst": worst}

    def conjugation_report(self, samples=100, seed=0):
        """pi(g^{-1} x g) = U(g)^{-1} pi(x) U(g) over random kernel
        elements and acting elements at full level."""
        rng = random.Random(seed)
        fulls = list(self.full_by_residue.values())
        worst = 0.0
        for _ in range(samples):
            g = rng.choice(fulls)
            x = self.ctx.random_kernel_element(rng)
            u = self.u_of(g)
            lhs = self.krep.value(g.inv() @ x @ g).to_complex()
            rhs = u.conj().T @ self.krep.value(x).to_complex() @ u
            worst = max(worst, float(np.abs(lhs - rhs).max()))
        return {"worst": worst, "samples": samples}


def intertwiners(ctx, krep, acting=None, tol=1e-9, snap_tol=1e-6):
    """Build the intertwiner family; the default acting set is the unit
    group of the representative's centralizer at full level."""
    if acting is None:
        acting = centralizer_units(ctx.spec, ctx.beta)
    return IntertwinerSet(ctx, krep, acting, tol=tol, snap_tol=snap_tol)


# ------------------------------------------- the canonical operators


class CanonicalFamily:
    """The corrected operator family on the stabilizer units: at the
    residue level it is multiplicative and restricts to the identity
    over the kernel, so it extends the kernel representation to the
    stabilizer."""

    def __init__(self, iset, alpha):
        self.iset = iset
        self.alpha = alpha
        self._cache = {}

    def u(self, g):
        res = g.reduce(1)
        key = res.key()
        hit = self._cache.get(key)
        if hit is None:
            twist = complex((-self.alpha[res]).to_complex())
            hit = twist * self.iset.u(self.iset.index[key])
            self._cache[key] = hit
        return hit


def canonical_u(ctx, krep, acting=None, tol=1e-9, snap_tol=1e-6,
                samples=100, seed=0):
    """The canonical extension operators on the centralizer unit group.

    Preconditions checked: the acting group is commutative, meets the
    kernel inside the central subgroup, and its residue cocycle is
    trivial.  A triviality failure blocks the construction.  The
    returned family is multiplicative at residue level and is the
    identity on the intersection with the kernel.
    """
    if acting is None:
        acting = centralizer_units(ctx.spec, ctx.beta)
    rng = random.Random(seed)
    for _ in range(samples):
        a, b = rng.choice(acting), rng.choice(acting)
        assert a @ b == b @ a, "acting set is not commutative"
    meet = [g for g in acting if ctx.in_kernel(g)]
    for g in meet:
        assert in_z(ctx, g), "kernel intersection leaves the center"
    iset = IntertwinerSet(ctx, krep, acting, tol=tol, snap_tol=snap_tol)
    verdict = triviality(iset.table)
    if not verdict["trivial"]:
        raise ValueError("centralizer cocycle is not trivial on the acting "
                         "group; no canonical extension exists")
    fam = CanonicalFamily(iset, verdict["witness"])
    # multiplicativity at residue level, exhaustively
    mult_resid = 0.0
    res = iset.residues
    for i, g in enumerate(res):
        ug = fam.u(g)
        for j, h in enumerate(res):
            prod = fam.u(res[int(iset.table.prod[i, j])])
            delta = np.abs(ug @ fam.u(h) - prod).max()
            mult_resid = max(mult_resid, float(delta))
    assert mult_resid <= 1e-7, "corrected family is not multiplicative"
    ident_resid = 0.0
    for g in meet:
        ident_resid = max(ident_resid, float(np.abs(
            fam.u(g) - np.eye(krep.dim)).max()))
    conj = iset.conjugation_report(samples=samples, seed=seed + 1)
    fam.report = {"multiplicativity": mult_resid,
                  "identity_on_meet": ident_resid,
                  "meet_size": len(meet),
                  "conjugation": conj["worst"],
                  "residuals": iset.residuals}
    fam.meet = meet
    return fam


# --------------------------------------------------------- orchestration


def weil_check(spec, beta, rho_coeffs=None, policy="lex", seed=0,
               tol=1e-9, snap_tol=1e-6):
    """End-to-end certification at one orbit and one centralizer
    character; returns a JSON-ready report."""
    ctx = weil_context(spec, beta, policy=policy)
    if rho_coeffs is None:
        rho_coeffs = [1] * len(ctx.datum.cent)
    rho = RhoChar(ctx.datum.cent, rho_coeffs)
    krep = schrodinger(ctx, rho, seed=seed)
    hom = krep.homothety_report()
    descent = extension_descent_check(ctx, krep, seed=seed)
    iset = intertwiners(ctx, krep, tol=tol, snap_tol=snap_tol)
    defect = iset.defect_report()
    conj = iset.conjugation_report(seed=seed)
    residuals = dict(iset.residuals)
    residuals["cocycle"] = defect["worst"]
    residuals["conjugation"] = conj["worst"]
    can = canonical_u(ctx, krep, seed=seed)
    residuals["multiplicativity"] = can.report["multiplicativity"]
    out = {
        "p": ctx.p, "r": ctx.r, "l": ctx.l,
        "dim": krep.dim,
        "z_order": len(krep.psi.z_elements),
        "module_order": ctx.p ** ctx.datum.dim_fp,
        "rho": [int(c) for c in rho_coeffs],
        "homothety_ok": hom["ok"],
        "descent_ok": descent["holds"],
        "cU_equals_c": defect["matches"],
        "canonical_meet": can.report["meet_size"],
        "residuals": residuals,
    }
    out["ok"] = (out["homothety_ok"] and out["descent_ok"]
                 and out["cU_equals_c"]
                 and max(residuals.values()) <= 1e-6)
    return out
