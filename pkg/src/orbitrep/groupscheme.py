"""Classical matrix group schemes over finite local rings.

Families over O = Z/p^r (entries possibly in an unramified extension):

* GL_n        -- all invertible matrices;
* GSp_n       -- similitudes of the standard alternating form J (n even),
                 g J tg = nu(g) J;
* GO(S)       -- similitudes of a symmetric unimodular S, g S tg = nu(g) S;
* U(S)        -- isometries of a Hermitian S over GR(p^r, 2), the twist
                 being the Frobenius tau: g S t(g^tau) = S.

The Lie algebra g(O_s) of each family is computed as the null space of
the linearized defining equations (mod-p null space, Hensel-lifted level
by level), giving a free module of constant rank; the congruence kernels
K_l(O_r) = ker(G(O_r) -> G(O_l)) are parametrized by it.

Also here: the three filtration conditions (nondegenerate trace form;
K_l(O_r) isomorphic to g(O_{l'}) via X -> 1 + p^l X for r = l + l';
the quadratic section X -> 1 + p^{l-1} X + 2^{-1} p^{2l-2} X^2 into
K_{l-1}(O_r) for odd r = 2l - 1), exact group enumeration at desk
scale, and conjugacy classes for GL via certified generators.
"""

import itertools
import random

import numpy as np

from .localring import local_ring, lift_lambda, RingElem
from .linalg import nullspace_zmod, ZModSolver, inv_field, det_field


# ------------------------------------------------------------- matrices

class Mat:
    """Immutable n x n matrix over a LocalRing."""

    __slots__ = ("ring", "rows")

    def __init__(self, ring, rows):
        self.ring = ring
        self.rows = tuple(tuple(ring.elem(x) for x in row) for row in rows)

    @property
    def n(self):
        return len(self.rows)

    def key(self):
        r = self.ring
        return (r.p, r.r, r.d, r.modulus, tuple(tuple(e.coeffs for e in row) for row in self.rows))

    def __eq__(self, other):
        return isinstance(other, Mat) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        if self.ring.d == 1:
            return "Mat(%r)" % ([[e.coeffs[0] for e in row] for row in self.rows],)
        return "Mat(%r)" % ([[list(e.coeffs) for e in row] for row in self.rows],)

    def __add__(self, other):
        return Mat(self.ring, [[a + b for a, b in zip(r1, r2)]
                               for r1, r2 in zip(self.rows, other.rows)])

    def __sub__(self, other):
        return Mat(self.ring, [[a - b for a, b in zip(r1, r2)]
                               for r1, r2 in zip(self.rows, other.rows)])

    def __neg__(self):
        return Mat(self.ring, [[-a for a in row] for row in self.rows])

    def __matmul__(self, other):
        n = self.n
        rows = []
        for i in range(n):
            ri = self.rows[i]
            row = []
            for j in range(n):
                acc = self.ring.zero
                for k in range(n):
                    acc = acc + ri[k] * other.rows[k][j]
                row.append(acc)
            rows.append(row)
        return Mat(self.ring, rows)

    def scale(self, c):
        return Mat(self.ring, [[c * a for a in row] for row in self.rows])

    def transpose(self):
        return Mat(self.ring, list(zip(*self.rows)))

    def tau_transpose(self, e):
        """Transpose with entrywise frobenius^e."""
        R = self.ring
        return Mat(R, [[R.frobenius(self.rows[j][i], e) for j in range(self.n)]
                       for i in range(self.n)])

    def trace(self):
        acc = self.ring.zero
        for i in range(self.n):
            acc = acc + self.rows[i][i]
        return acc

    def det(self):
        n = self.n
        acc = self.ring.zero
        for perm in itertools.permutations(range(n)):
            sgn = _perm_sign(perm)
            term = self.ring.one
            for i in range(n):
                term = term * self.rows[i][perm[i]]
            acc = acc + term if sgn > 0 else acc - term
        return acc

    def is_invertible(self):
        return self.det().is_unit()

    def inv(self):
        """Inverse by residue-field Gauss plus Newton lifting."""
        R = self.ring
        n = self.n
        fld = R.at_level(1)
        res = [[R.reduce(e, 1) for e in row] for row in self.rows]
        x0 = inv_field(res, fld)
        X = Mat(R, [[lift_lambda(e, R.r) for e in row] for row in x0])
        ident = identity_mat(R, n)
        two = ident + ident
        level = 1
        while level < R.r:
            X = X @ (two - self @ X)
            level *= 2
        assert X @ self == ident, "inverse lifting failed"
        return X

    def reduce(self, s):
        R = self.ring
        return Mat(R.at_level(s), [[R.reduce(e, s) for e in row] for row in self.rows])

    def lift(self, s):
        return Mat(self.ring.at_level(s), [[lift_lambda(e, s) for e in row] for row in self.rows])

    def to_zvec(self):
        """Flat integer coordinates, row-major then coefficientwise."""
        out = []
        for row in self.rows:
            for e in row:
                out.extend(e.coeffs)
        return out

    def entries(self):
        for row in self.rows:
            for e in row:
                yield e


def _perm_sign(perm):
    sgn = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, clen = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            clen += 1
        if clen % 2 == 0:
            sgn = -sgn
    return sgn


def identity_mat(ring, n):
    return Mat(ring, [[ring.one if i == j else ring.zero for j in range(n)] for i in range(n)])


def zero_mat(ring, n):
    return Mat(ring, [[ring.zero] * n for _ in range(n)])


def mat_from_zvec(ring, n, vec):
    d = ring.d
    rows = []
    it = iter(vec)
    for _ in range(n):
        row = []
        for _ in range(n):
            row.append(ring.elem(tuple(next(it) for _ in range(d))))
        rows.append(row)
    return Mat(ring, rows)


def basis_mat(ring, n, i, j, c=None):
    rows = [[ring.zero] * n for _ in range(n)]
    rows[i][j] = c if c is not None else ring.one
    return Mat(ring, rows)


def commutator(x, y):
    return x @ y - y @ x


def divide_by_p_power(mat, l, lp=None):
    """(mat)/p^l as a matrix over O_{l'}; every coefficient must be
    divisible by p^l."""
    R = mat.ring
    pl = R.p ** l
    lp = lp if lp is not None else R.r - l
    tgt = R.at_level(lp)
    rows = []
    for row in mat.rows:
        out = []
        for e in row:
            assert all(c % pl == 0 for c in e.coeffs), "entry not divisible by p^l"
            out.append(tgt.elem(tuple((c // pl) % tgt.pr for c in e.coeffs)))
        rows.append(out)
    return Mat(tgt, rows)

def ad_action(g, x, ginv=None):
    """Ad(g) x = g x g^{-1}."""
    if ginv is None:
        ginv = g.inv()
    return g @ x @ ginv


# ----------------------------------------------------------- group specs

class GroupSpec:
    """A classical group scheme over a fixed ring level.

    family in {"GL", "GSp", "GO", "U"}; `form` is None for GL, the
    alternating/symmetric/Hermitian matrix otherwise.  `tau_exp` is the
    Frobenius power used for the Hermitian twist (d/2 for U, 0 else).
    """

    def __init__(self, family, n, ring, form=None):
        if ring.p == 2:
            raise ValueError("p must be odd")
        self.family = family
        self.n = n
        self.ring = ring
        self.form = form
        self.tau_exp = 0
        if family == "GL":
            assert form is None
        elif family == "GSp":
            if n % 2:
                raise ValueError("GSp needs even size")
            if (n // 2) % ring.p == 0:
                raise ValueError("GSp_{2m} requires p not dividing m")
            if ring.d != 1:
                raise ValueError("GSp is implemented over Z/p^r entries")
            if form is None:
                m = n // 2
                rows = [[0] * n for _ in range(n)]
                for i in range(m):
                    rows[i][m + i] = 1
                    rows[m + i][i] = -1 % ring.pr
                form = Mat(ring, rows)
            self.form = form
        elif family == "GO":
            if n % ring.p == 0:
                raise ValueError("GO_n requires p not dividing n")
            if ring.d != 1:
                raise ValueError("GO is implemented over Z/p^r entries")
            assert form is not None and form == form.transpose() and form.is_invertible()
            self.form = form
        elif family == "U":
            if ring.d % 2:
                raise ValueError("U needs a quadratic unramified extension (even d)")
            self.tau_exp = ring.d // 2
            assert form is not None and form == form.tau_transpose(self.tau_exp)
            assert form.is_invertible()
        else:
            raise ValueError("unknown family %r" % (family,))
        # scalar ring: the ring the Lie algebra is a free module over
        if family == "U":
            self.scalar_ring = local_ring(ring.p, ring.r, 1)
        else:
            self.scalar_ring = ring

    # constructors
    @staticmethod
    def gl(n, ring):
        return GroupSpec("GL", n, ring)

    @staticmethod
    def gsp(n, ring):
        return GroupSpec("GSp", n, ring)

    @staticmethod
    def go(form):
        return GroupSpec("GO", form.n, form.ring, form)

    @staticmethod
    def u(form):
        return GroupSpec("U", form.n, form.ring, form)

    def __repr__(self):
        return "%s_%d(%r)" % (self.family, self.n, self.ring)

    def key(self):
        r = self.ring
        return (self.family, self.n, r.p, r.r, r.d, r.modulus,
                self.form.key() if self.form is not None else None)

    def at_level(self, s):
        form = self.form.reduce(s) if self.form is not None and s <= self.ring.r else (
            self.form.lift(s) if self.form is not None else None)
        if self.family == "GL":
            return GroupSpec("GL", self.n, self.ring.at_level(s))
        return GroupSpec(self.family, self.n, self.ring.at_level(s), form)

    @property
    def level(self):
        return self.ring.r

    def residue_spec(self):
        return self.at_level(1)

    # -- membership -------------------------------------------------------

    def nu_of(self, g):
        """Similitude factor, or None if g is not in the group."""
        if self.family == "GL":
            return self.ring.one if g.det().is_unit() else None
        if self.family == "U":
            lhs = g @ self.form @ g.tau_transpose(self.tau_exp)
            return self.ring.one if lhs == self.form else None
        lhs = g @ self.form @ g.transpose()
        nu = None
        for i in range(self.n):
            for j in range(self.n):
                if self.form.rows[i][j].is_unit():
                    nu = lhs.rows[i][j] * self.form.rows[i][j].inv()
                    break
            if nu is not None:
                break
        if nu is None or not nu.is_unit():
            return None
        return nu if lhs == self.form.scale(nu) else None

    def contains(self, g):
        return self.nu_of(g) is not None

    def lie_nu_of(self, x):
        """Lie similitude factor of x, or None if x is not in g."""
        if self.family == "GL":
            return self.ring.zero
        if self.family == "U":
            lhs = x @ self.form + self.form @ x.tau_transpose(self.tau_exp)
            return self.ring.zero if lhs == zero_mat(self.ring, self.n) else None
        lhs = x @ self.form + self.form @ x.transpose()
        nu = None
        for i in range(self.n):
            for j in range(self.n):
                if self.form.rows[i][j].is_unit():
                    nu = lhs.rows[i][j] * self.form.rows[i][j].inv()
                    break
            if nu is not None:
                break
        return nu if lhs == self.form.scale(nu) else None

    def lie_contains(self, x):
        return self.lie_nu_of(x) is not None

    def trace_form(self, x, y):
        """B(x, y) = tr(xy), composed with the absolute ring trace for the
        Hermitian family (the trace form of the doubled realization).
        Returns an element of the scalar ring."""
        t = (x @ y).trace()
        if self.family == "U":
            val = self.ring.trace_abs(t)
            return self.scalar_ring.elem(val)
        return t

    def group_order(self, level=None):
        """Exact order |G(O_level)| from the classical level-1 formulas
        (GL, GSp, U) times the kernel contribution; GO is not covered."""
        q = self.ring.p ** (self.ring.d if self.family != "U" else self.ring.d // 2)
        n = self.n
        if self.family == "GL":
            base = 1
            for i in range(n):
                base *= q ** n - q ** i
        elif self.family == "GSp":
            m = n // 2
            base = (q - 1) * q ** (m * m)
            for i in range(1, m + 1):
                base *= q ** (2 * i) - 1
        elif self.family == "U":
            base = q ** (n * (n - 1) // 2)
            for i in range(1, n + 1):
                base *= q ** i - (-1) ** i
        else:
            raise ValueError("no closed order formula wired for GO")
        level = level or self.level
        zdim = len(lie_basis(self, 1).mats) * (1 if self.family == "U" else self.ring.d)
        return base * self.ring.p ** (zdim * (level - 1))


# ----------------------------------------------------------- Lie algebra

_LIE_CACHE = {}

class LieBasis:
    """Basis of g(O_s) as a free module over the scalar ring."""

    def __init__(self, spec, level, mats, scalars):
        self.spec = spec
        self.level = level
        self.mats = mats
        self.scalars = scalars.at_level(level)
        self.dim = len(mats)
        self._solver = None

    def zdim(self):
        return self.dim * self.scalars.d

    def _coord_solver(self):
        if self._solver is None:
            cols = []
            sc = self.scalars
            gens = [sc.one]
            if sc.d > 1:
                xi = sc.generator()
                for _ in range(sc.d - 1):
                    gens.append(gens[-1] * xi)
            self._scalar_powers = gens
            for e in self.mats:
                for c in gens:
                    m = _scalar_mult_mat(e, c, self.spec)
                    cols.append(m.to_zvec())
            rows = [[col[i] for col in cols] for i in range(len(cols[0]))]
            self._solver = ZModSolver(rows, self.scalars.pr)
        return self._solver

    def coords(self, x):
        """Coefficients over the scalar ring, or None if x is outside."""
        solver = self._coord_solver()
        sol = solver.solve(x.to_zvec())
        if sol is None:
            return None
        sc = self.scalars
        d = sc.d
        return [sc.elem(tuple(sol[i * d:(i + 1) * d])) for i in range(self.dim)]

    def contains(self, x):
        return self.coords(x) is not None

    def from_coords(self, coeffs):
        acc = zero_mat(self.mats[0].ring, self.spec.n)
        for c, e in zip(coeffs, self.mats):
            acc = acc + _scalar_mult_mat(e, c, self.spec)
        return acc

    def lift_element(self, x, source):
        """Lift x from a lower-level basis of the same algebra, matching
        coefficients (the bases reduce to each other levelwise)."""
        c = source.coords(x)
        assert c is not None
        return self.from_coords([lift_lambda(ci, self.level) for ci in c])

    def fp_basis(self):
        """Basis over Z/p^level: scalar powers times each basis matrix."""
        sc = self.scalars
        gens = [sc.one]
        if sc.d > 1:
            xi = sc.generator()
            for _ in range(sc.d - 1):
                gens.append(gens[-1] * xi)
        return [_scalar_mult_mat(e, c, self.spec) for e in self.mats for c in gens]

    def span_iter(self, budget=10 ** 6):
        """All elements of g(O_level), lexicographic in coefficients."""
        size = self.scalars.cardinality ** self.dim
        if size > budget:
            raise ValueError("Lie algebra of size %d exceeds budget %d" % (size, budget))
        for combo in itertools.product(list(self.scalars.elements()), repeat=self.dim):
            yield self.from_coords(combo)

    def random_element(self, rng):
        sc = self.scalars
        coeffs = [sc.elem(tuple(rng.randrange(sc.pr) for _ in range(sc.d)))
                  for _ in range(self.dim)]
        return self.from_coords(coeffs)


def _scalar_mult_mat(m, c, spec):
    """c * m for c in the scalar ring (embedded diagonally; for U the
    scalars are the base ring acting coefficientwise)."""
    R = m.ring
    if c.ring is R:
        return m.scale(c)
    assert c.ring.d == 1
    return m.scale(R.elem(c.coeffs[0]))


def lie_basis(spec, level=None):
    """Basis of the solution module of the linearized defining equations
    over O_level; free of constant rank by Hensel lifting (errors on a
    dimension drop)."""
    level = level or spec.level
    key = (spec.key(), level)
    got = _LIE_CACHE.get(key)
    if got is not None:
        return got
    sp = spec.at_level(level) if level != spec.level else spec
    ring = sp.ring
    n = sp.n
    if sp.family == "GL":
        mats = [basis_mat(ring, n, i, j) for i in range(n) for j in range(n)]
        lb = LieBasis(spec, level, mats, sp.scalar_ring)
        _LIE_CACHE[key] = lb
        return lb
    d = ring.d
    nun = 0 if sp.family == "U" else 1  # one base-ring unknown for nu
    ncols = n * n * d + nun
    cols = []
    for k in range(ncols):
        vec = [0] * ncols
        vec[k] = 1
        x = mat_from_zvec(ring, n, vec[:n * n * d])
        if sp.family == "U":
            eq = x @ sp.form + sp.form @ x.tau_transpose(sp.tau_exp)
        else:
            nu = ring.elem(vec[-1])
            eq = x @ sp.form + sp.form @ x.transpose() - sp.form.scale(nu)
        cols.append(eq.to_zvec())
    rows = [[col[i] for col in cols] for i in range(len(cols[0]))]
    null = nullspace_zmod(rows, ring.p, level, ncols=ncols)
    mats = [mat_from_zvec(ring, n, v[:n * n * d]) for v in null]
    lb = LieBasis(spec, level, mats, sp.scalar_ring)
    _LIE_CACHE[key] = lb
    return lb


def inv2(ring):
    """2^{-1} in the ring (p odd)."""
    return ring.elem(pow(2, -1, ring.pr))


# --------------------------------------------- filtration condition checks

def check_condition_I(spec):
    """Nondegeneracy of the trace form on g(F): Gram determinant over the
    residue field of the scalars."""
    sp = spec.at_level(1)
    lb = lie_basis(spec, 1)
    fld = lb.scalars
    gram = [[_as_scalar(sp.trace_form(x, y), fld) for y in lb.mats] for x in lb.mats]
    det = det_field(gram, fld)
    return {"check": "condition_I", "family": spec.family, "n": spec.n,
            "dim": lb.dim, "gram_det": list(det.coeffs), "holds": det.is_unit()}


def _as_scalar(t, fld):
    if t.ring is fld:
        return t
    # value must lie in the scalar subring
    assert all(c == 0 for c in t.coeffs[1:]), "trace form left the scalar ring"
    return fld.elem(t.coeffs[0])


def check_condition_II(spec, l, budget_full=2 * 10 ** 4, samples=200, seed=0):
    """r = l + l', 0 < l' <= l: X -> 1 + p^l X is an isomorphism
    g(O_{l'}) -> K_l(O_r).  Exhaustive when |g(O_{l'})| fits the budget,
    else basis + seeded samples; the complement direction (elements of
    gl outside g do not land in G) is always sampled."""
    r = spec.level
    lp = r - l
    assert 0 < lp <= l, "need r = l + l' with 0 < l' <= l"
    ring = spec.ring
    n = spec.n
    pl = ring.p ** l
    lb = lie_basis(spec, lp)
    size = lb.scalars.cardinality ** lb.dim
    rng = random.Random(seed)
    ident = identity_mat(ring, n)

    def embed(x):
        return ident + x.lift(r).scale(ring.elem(pl))

    report = {"check": "condition_II", "family": spec.family, "n": spec.n,
              "r": r, "l": l, "l_prime": lp, "lie_size": size}
    exhaustive = size <= budget_full
    report["exhaustive"] = exhaustive
    if exhaustive:
        seen = set()
        ok_member = True
        for x in lb.span_iter(budget=budget_full):
            g = embed(x)
            if not spec.contains(g):
                ok_member = False
                break
            seen.add(g.key())
        report["image_in_group"] = ok_member
        report["image_size"] = len(seen)
        report["injective"] = len(seen) == size
    else:
        pool = [lb.random_element(rng) for _ in range(samples)]
        pool.extend(lb.mats)
        report["image_in_group"] = all(spec.contains(embed(x)) for x in pool)
        keys = {embed(x).key() for x in pool}
        report["injective"] = len(keys) == len({x.key() for x in pool})
        report["image_size"] = size  # by injectivity of x -> 1 + p^l x
    # homomorphism: (1+p^l X)(1+p^l Y) = 1 + p^l(X+Y) needs p^{2l} = 0
    pairs = []
    if size * size <= budget_full:
        elems = list(lb.span_iter(budget=budget_full))
        pairs = [(x, y) for x in elems for y in elems]
    else:
        pairs = [(lb.random_element(rng), lb.random_element(rng)) for _ in range(samples)]
        pairs += [(x, y) for x in lb.mats for y in lb.mats]
    report["homomorphism"] = all(embed(x) @ embed(y) == embed(x + y) for x, y in pairs)
    # kernel: 1 + p^l X = 1 iff X = 0 mod p^{l'}
    report["kernel_trivial"] = all(
        embed(x) != ident for x in (lb.mats + [lb.random_element(rng) for _ in range(20)])
        if any(not e.is_zero() for e in x.entries()))
    # K_l is no bigger: matrices 1 + p^l Y with Y in gl outside g stay outside G
    if spec.family == "GL":
        report["complement_excluded"] = True   # g = gl, nothing to exclude
    else:
        bad = 0
        trials = 0
        full = lie_basis(GroupSpec.gl(n, ring.at_level(lp)), lp)
        for _ in range(samples):
            y = full.random_element(rng)
            if lb.contains(y):
                continue
            trials += 1
            if spec.contains(embed(y)):
                bad += 1
        report["complement_excluded"] = bad == 0 and trials > 0
        report["complement_trials"] = trials
    report["holds"] = all(report[k] for k in
                          ("image_in_group", "injective", "homomorphism",
                           "kernel_trivial", "complement_excluded"))
    return report


def quadratic_section(spec, x, l):
    """1 + p^{l-1} X + 2^{-1} p^{2l-2} X^2 at the spec's level, for X
    lifted from level l (odd r = 2l - 1)."""
    ring = spec.ring
    X = x.lift(spec.level)
    n = spec.n
    c1 = ring.elem(ring.p ** (l - 1))
    c2 = inv2(ring) * ring.elem(ring.p ** (2 * l - 2))
    return identity_mat(ring, n) + X.scale(c1) + (X @ X).scale(c2)


def check_condition_III(spec, budget_full=2 * 10 ** 4, samples=200, seed=0):
    """Odd r = 2l - 1: the quadratic section carries g(O_l) into
    G(O_r) and induces a bijection g(F) -> K_{l-1}(O_r)/K_l(O_r)."""
    r = spec.level
    if r < 3 or r % 2 == 0:
        return {"check": "condition_III", "family": spec.family, "n": spec.n,
                "r": r, "holds": True, "vacuous": True}
    l = (r + 1) // 2
    lb = lie_basis(spec, l)
    size = lb.scalars.cardinality ** lb.dim
    rng = random.Random(seed)
    if size <= budget_full:
        pool = list(lb.span_iter(budget=budget_full))
        exhaustive = True
    else:
        pool = [lb.random_element(rng) for _ in range(samples)] + list(lb.mats)
        exhaustive = False
    in_group = all(spec.contains(quadratic_section(spec, x, l)) for x in pool)
    # class mod K_l depends only on X mod p, injectively
    lb1 = lie_basis(spec, 1)
    fld = lb1.scalars
    res_size = fld.cardinality ** lb1.dim
    reps = {}
    well_defined = True
    injective = True
    if res_size <= budget_full:
        res_pool = list(lb1.span_iter(budget=budget_full))
    else:
        res_pool = [lb1.random_element(rng) for _ in range(samples)] + list(lb1.mats)
    ring_l = lb.mats[0].ring
    ident_l = identity_mat(ring_l, spec.n)
    for xbar in res_pool:
        x = lb.lift_element(xbar, lb1)
        g = quadratic_section(spec, x, l)
        # two lifts of xbar agree mod K_l
        alt = x + lb.random_element(rng).scale(ring_l.elem(ring_l.p))
        g2 = quadratic_section(spec, alt, l)
        if (g.inv() @ g2).reduce(l) != ident_l:
            well_defined = False
        key = g.reduce(l).key()
        prev = reps.get(key)
        if prev is not None and prev != xbar.key():
            injective = False
        reps[key] = xbar.key()
    return {"check": "condition_III", "family": spec.family, "n": spec.n,
            "r": r, "l": l, "vacuous": False, "exhaustive": exhaustive,
            "in_group": in_group, "well_defined_mod_K_l": well_defined,
            "injective_mod_K_l": injective,
            "residue_count": len(reps),
            "holds": in_group and well_defined and injective}


def check_conditions(spec):
    """All applicable filtration conditions for the spec at its level."""
    out = {"spec": repr(spec), "conditions": []}
    out["conditions"].append(check_condition_I(spec))
    r = spec.level
    for l in range((r + 1) // 2, r):
        out["conditions"].append(check_condition_II(spec, l))
    out["conditions"].append(check_condition_III(spec))
    out["holds"] = all(c["holds"] for c in out["conditions"])
    return out


# ------------------------------------------------------------ enumeration

def kernel_elements(spec, l, budget=10 ** 6):
    """K_l(O_r) = {1 + p^l X : X in g(O_{l'})} as Mat list.  For GL this
    is the congruence kernel for any l; for forms it requires 2l >= r
    (below that the kernel needs quadratic correction terms)."""
    r = spec.level
    lp = r - l
    assert spec.family == "GL" or 2 * l >= r
    lb = lie_basis(spec, lp)
    ring = spec.ring
    pl = ring.elem(ring.p ** l)
    ident = identity_mat(ring, spec.n)
    return [ident + x.lift(r).scale(pl) for x in lb.span_iter(budget=budget)]


def enumerate_group(spec, budget=10 ** 6):
    """All elements of G(O_r) at desk scale, deterministic order.

    GL: level-1 scan by invertibility, then kernel cosets.
    Forms (GSp/GO/U): level-1 row-extension enumeration (exact), and for
    r = 2 the product with the kernel parametrization."""
    r = spec.level
    if spec.family == "GL":
        return _enumerate_gl(spec, budget)
    level1 = _enumerate_isometries(spec.at_level(1), budget)
    if r == 1:
        return level1
    if r == 2:
        lb = lie_basis(spec, 1)
        total = len(level1) * lb.scalars.cardinality ** lb.dim
        if total > budget:
            raise ValueError("|G| = %d exceeds budget %d" % (total, budget))
        out = []
        kern = kernel_elements(spec, 1, budget)
        for g1 in level1:
            g = hensel_lift_element(spec, g1)
            for k in kern:
                out.append(g @ k)
        return out
    raise ValueError("enumeration for forms is wired for r <= 2")


def _enumerate_gl(spec, budget):
    ring = spec.ring
    n = spec.n
    fld = ring.at_level(1)
    order = spec.group_order()
    if order > budget:
        raise ValueError("|G| = %d exceeds budget %d" % (order, budget))
    lvl1 = []
    for combo in itertools.product(list(fld.elements()), repeat=n * n):
        m = Mat(fld, [combo[i * n:(i + 1) * n] for i in range(n)])
        if m.is_invertible():
            lvl1.append(m)
    if spec.level == 1:
        return lvl1
    kern = kernel_elements(spec, 1, budget)
    out = []
    for g1 in lvl1:
        g = g1.lift(spec.level)
        for k in kern:
            out.append(g @ k)
    return out


_MUL_TENSOR_CACHE = {}

def ring_mul_tensor(ring):
    """(d, d, d) tensor T with (a*b)_g = sum_{c,f} a_c b_f T[c,f,g]."""
    key = (ring.p, ring.r, ring.d, ring.modulus)
    tens = _MUL_TENSOR_CACHE.get(key)
    if tens is None:
        d = ring.d
        tens = np.zeros((d, d, d), dtype=np.int64)
        for i in range(d):
            for j in range(d):
                prod = ring._mul(tuple(int(i == k) for k in range(d)),
                                 tuple(int(j == k) for k in range(d)))
                tens[i, j] = prod
        _MUL_TENSOR_CACHE[key] = tens
    return tens


def _enumerate_isometries(spec, budget):
    """Level-1 enumeration of {g : g S tg^(tau) = nu S} by extending one
    row at a time (numpy-vectorized; exact by construction)."""
    assert spec.level == 1
    ring = spec.ring
    n, d, p = spec.n, spec.ring.d, spec.ring.p
    mul = ring_mul_tensor(ring)
    frob_cols = np.array(ring.frobenius_matrix(), dtype=np.int64)  # [src][dst]

    def tau_arr(a):
        # apply frobenius^tau_exp to the last axis
        out = a
        for _ in range(spec.tau_exp):
            out = np.tensordot(out, frob_cols, axes=([-1], [0])) % p
        return out

    S = np.array([[e.coeffs for e in row] for row in spec.form.rows], dtype=np.int64)
    cand = np.array(list(itertools.product(range(p), repeat=n * d)),
                    dtype=np.int64).reshape(-1, n, d)  # all rows
    # pairing of each candidate row with anything: row_i S tau(row_j)^t
    tc = tau_arr(cand)  # (C, n, d)
    Sc = np.einsum("kld,Cle,def->Ckf", S, tc, mul) % p       # S tau(row_C)^t, by column k
    diag = np.einsum("Ckc,Ckf,cfg->Cg", cand, Sc, mul) % p   # row_C S tau(row_C)^t
    nus = [np.array((1,) + (0,) * (d - 1), dtype=np.int64)] if spec.family == "U" else \
        [np.array(u.coeffs, dtype=np.int64) for u in ring.units()]
    results = []
    for nu in nus:
        targ = np.einsum("c,ijd,cde->ije", nu, S, mul) % p  # nu * S
        partial = np.zeros((1, 0, n, d), dtype=np.int64)
        ok = True
        for i in range(n):
            P = partial.shape[0]
            if P == 0:
                ok = False
                break
            self_ok = np.all(diag == targ[i, i], axis=1)
            mask = self_ok[None, :].repeat(P, axis=0)  # (P, C)
            for j in range(i):
                # row_j S tau(row_i)^t = targ[j, i]
                pr = np.einsum("Pkc,Ckf,cfg->PCg", partial[:, j], Sc, mul) % p
                mask &= np.all(pr == targ[j, i][None, None, :], axis=2)
                # row_i S tau(row_j)^t = targ[i, j]
                tpj = tau_arr(partial[:, j])  # (P, n, d)
                Spj = np.einsum("kld,Ple,def->Pkf", S, tpj, mul) % p
                pr2 = np.einsum("Ckc,Pkf,cfg->PCg", cand, Spj, mul) % p
                mask &= np.all(pr2 == targ[i, j][None, None, :], axis=2)
            idx_p, idx_c = np.nonzero(mask)
            if idx_p.size == 0:
                ok = False
                break
            if idx_p.size > budget:
                raise ValueError("enumeration exceeds budget")
            partial = np.concatenate([partial[idx_p], cand[idx_c][:, None, :, :]], axis=1)
        if not ok:
            continue
        results.append(partial)
    # full solutions preserve a nondegenerate form up to a unit, hence are
    # invertible; distinct nu give disjoint fibers, so no duplicates arise
    mats = []
    for block in results:
        for g in block:
            rows = [[ring.elem(tuple(int(c) for c in g[i, j0])) for j0 in range(n)]
                    for i in range(n)]
            mats.append(Mat(ring, rows))
    return mats


def _form_defect(spec, g, nu):
    twisted = g.tau_transpose(spec.tau_exp) if spec.family == "U" else g.transpose()
    return g @ spec.form @ twisted - spec.form.scale(nu)


def _current_nu(spec, g):
    """Similitude factor read off at a unit entry of the form (1 for U)."""
    if spec.family == "U":
        return spec.ring.one
    lhs = g @ spec.form @ g.transpose()
    for i in range(spec.n):
        for j in range(spec.n):
            if spec.form.rows[i][j].is_unit():
                return lhs.rows[i][j] * spec.form.rows[i][j].inv()
    raise AssertionError("form has no unit entry")


def hensel_lift_element(spec, g1):
    """Lift a level-1 group element to the spec's level by Newton steps:
    g <- g(1 + p^k Z) with Z solving the linearized defining equation."""
    if spec.family == "GL":
        return g1.lift(spec.level)
    ring = spec.ring
    n = spec.n
    fld = ring.at_level(1)
    g = g1.lift(spec.level)
    for k in range(1, spec.level):
        pk = ring.p ** k
        nu = _current_nu(spec, g)
        defect = _form_defect(spec, g, nu)
        dvec = defect.to_zvec()
        assert all(c % pk == 0 for c in dvec), "defect order dropped"
        E = mat_from_zvec(fld, n, [(c // pk) % ring.p for c in dvec])
        # g(1+p^k Z) S t(...)^tau = g S tg^tau + p^k g(ZS + S tZ^tau)tg^tau,
        # so Z must solve Z S + S tZ^tau - mu S = -(g^-1 E tg^-tau) over F.
        gri = g.reduce(1).inv()
        gri_tw = gri.tau_transpose(spec.tau_exp) if spec.family == "U" else gri.transpose()
        epull = gri @ E @ gri_tw
        z = _lie_correction(spec, epull)
        g = g @ (identity_mat(ring, n) + z.lift(spec.level).scale(ring.elem(pk)))
        d2 = _form_defect(spec, g, _current_nu(spec, g))
        assert all(c % (pk * ring.p) == 0 for c in d2.to_zvec()), "lift failed"
    assert spec.contains(g)
    return g


# --------------------------------------------- GL tables, conjugacy classes

def primitive_root_mod_pr(p, r):
    """Smallest generator of the cyclic group (Z/p^r)^x, certified by
    order checks against the prime factors of phi."""
    phi = p ** (r - 1) * (p - 1)
    fac = set()
    m, t = phi, 2
    while t * t <= m:
        while m % t == 0:
            fac.add(t)
            m //= t
        t += 1
    if m > 1:
        fac.add(m)
    q = p ** r
    for g in range(2, q):
        if g % p == 0:
            continue
        if all(pow(g, phi // f, q) != 1 for f in fac):
            assert pow(g, phi, q) == 1
            return g
    raise AssertionError("no primitive root found")


def gl_generators(spec):
    """Generating set of GL_n(Z/p^r): the elementary transvections
    E_ij(1) and diag(u, 1, ..., 1) for u generating the units.

    Elementary matrices generate SL_n over a local ring and E_ij(a) is a
    power of E_ij(1), so these generate the kernel of det together with
    a full set of determinants."""
    assert spec.family == "GL" and spec.ring.d == 1
    ring, n = spec.ring, spec.n
    out = []
    for i in range(n):
        for j in range(n):
            if i != j:
                out.append(identity_mat(ring, n) + basis_mat(ring, n, i, j))
    u = primitive_root_mod_pr(ring.p, ring.r)
    rows = [[u if i == j == 0 else (1 if i == j else 0) for j in range(n)] for i in range(n)]
    out.append(Mat(ring, rows))
    return out


class GroupTable:
    """GL_n(Z/p^r) as indexed integer arrays (n <= 3, d = 1).

    Elements live in an (N, n, n) array sorted by their mixed-radix
    encoding; `lookup` inverts the encoding.  Products, inverses and
    conjugacy classes are numpy-vectorized."""

    def __init__(self, spec, budget=10 ** 6):
        assert spec.family == "GL" and spec.ring.d == 1 and spec.n <= 3
        self.spec = spec
        self.ring = spec.ring
        self.n = spec.n
        self.q = spec.ring.pr
        order = spec.group_order()
        if order > budget:
            raise ValueError("|G| = %d exceeds budget %d" % (order, budget))
        n, q = self.n, self.q
        if q ** (n * n) > 5 * 10 ** 7:
            raise ValueError("encoding space too large for a dense lookup")
        grids = np.meshgrid(*([np.arange(q)] * (n * n)), indexing="ij")
        allm = np.stack([g.reshape(-1) for g in grids], axis=1).reshape(-1, n, n)
        dets = det_array(allm, q)
        mask = dets % spec.ring.p != 0
        self.elems = np.ascontiguousarray(allm[mask].astype(np.int64))
        self.size = self.elems.shape[0]
        assert self.size == order, "enumeration disagrees with the order formula"
        codes = encode_mat_array(self.elems, q)
        self.lookup = np.full(q ** (n * n), -1, dtype=np.int64)
        self.lookup[codes] = np.arange(self.size)
        self._labels = None
        ident = identity_mat(self.ring, n)
        self.id_index = self.index_of(ident)

    def index_of(self, mat):
        code = 0
        mult = 1
        for row in mat.rows:
            for e in row:
                code += e.coeffs[0] * mult
                mult *= self.q
        idx = int(self.lookup[code])
        assert idx >= 0, "matrix not in the group table"
        return idx

    def mat_of(self, idx):
        arr = self.elems[idx]
        return Mat(self.ring, [[int(arr[i, j]) for j in range(self.n)] for i in range(self.n)])

    def indices_of(self, arr):
        """Indices of an (N, n, n) array of matrices mod q."""
        idx = self.lookup[encode_mat_array(arr % self.q, self.q)]
        assert np.all(idx >= 0)
        return idx

    def mul_ids(self, a, b):
        prod = np.einsum("nij,njk->nik", self.elems[a], self.elems[b]) % self.q
        return self.indices_of(prod)

    def inv_ids(self, a):
        mats = self.elems[a]
        adj = adjugate_array(mats, self.q)
        dets = det_array(mats, self.q)
        dinv = unit_inverse_table(self.q, self.ring.p)[dets]
        inv = adj * dinv[:, None, None] % self.q
        return self.indices_of(inv)

    def conj_perm(self, s):
        """Permutation id -> index of s^{-1} g s."""
        sidx = self.index_of(s)
        sinv = int(self.inv_ids(np.array([sidx]))[0])
        left = np.einsum("ij,njk->nik", self.elems[sinv], self.elems) % self.q
        full = np.einsum("nij,jk->nik", left, self.elems[sidx]) % self.q
        return self.indices_of(full)

    def class_labels(self):
        """Conjugacy class label (the minimal member index) per element,
        by label propagation over conjugation by the generators."""
        if self._labels is not None:
            return self._labels
        perms = [self.conj_perm(s) for s in gl_generators(self.spec)]
        labels = np.arange(self.size, dtype=np.int64)
        changed = True
        while changed:
            changed = False
            for perm in perms:
                pulled = labels[perm]
                upd = np.minimum(pulled, labels)
                # push the better label both ways along the edge
                np.minimum.at(upd, perm, labels)
                if not np.array_equal(upd, labels):
                    labels = upd
                    changed = True
        # compress to dense class ids
        uniq, inv = np.unique(labels, return_inverse=True)
        self._labels = inv
        self._class_reps = uniq
        self._class_sizes = np.bincount(inv)
        return self._labels

    def class_data(self):
        labels = self.class_labels()
        return labels, self._class_reps, self._class_sizes


def encode_mat_array(arr, q):
    n = arr.shape[-1]
    flat = arr.reshape(arr.shape[0], n * n)
    mult = q ** np.arange(n * n, dtype=np.int64)
    return flat @ mult


def det_array(m, q):
    if m.shape[-1] == 1:
        return m[:, 0, 0] % q
    if m.shape[-1] == 2:
        return (m[:, 0, 0] * m[:, 1, 1] - m[:, 0, 1] * m[:, 1, 0]) % q
    if m.shape[-1] == 3:
        return (m[:, 0, 0] * m[:, 1, 1] * m[:, 2, 2]
                + m[:, 0, 1] * m[:, 1, 2] * m[:, 2, 0]
                + m[:, 0, 2] * m[:, 1, 0] * m[:, 2, 1]
                - m[:, 0, 2] * m[:, 1, 1] * m[:, 2, 0]
                - m[:, 0, 1] * m[:, 1, 0] * m[:, 2, 2]
                - m[:, 0, 0] * m[:, 1, 2] * m[:, 2, 1]) % q
    raise ValueError("vectorized determinant wired for n <= 3")


def adjugate_array(m, q):
    n = m.shape[-1]
    if n == 1:
        return np.ones_like(m)
    if n == 2:
        out = np.empty_like(m)
        out[:, 0, 0] = m[:, 1, 1]
        out[:, 0, 1] = -m[:, 0, 1] % q
        out[:, 1, 0] = -m[:, 1, 0] % q
        out[:, 1, 1] = m[:, 0, 0]
        return out % q
    if n == 3:
        out = np.empty_like(m)
        for i in range(3):
            for j in range(3):
                r = [k for k in range(3) if k != j]
                c = [k for k in range(3) if k != i]
                minor = (m[:, r[0], c[0]] * m[:, r[1], c[1]]
                         - m[:, r[0], c[1]] * m[:, r[1], c[0]])
                out[:, i, j] = (-1) ** (i + j) * minor % q
        return out % q
    raise ValueError("vectorized adjugate wired for n <= 3")


_UINV_CACHE = {}

def unit_inverse_table(q, p):
    tab = _UINV_CACHE.get(q)
    if tab is None:
        tab = np.zeros(q, dtype=np.int64)
        for u in range(q):
            if u % p:
                tab[u] = pow(u, -1, q)
        _UINV_CACHE[q] = tab
    return tab


_LIE_CORR_CACHE = {}

def _lie_correction(spec, epull):
    """Solve Z S + S tZ^(tau) - mu S = -epull over the residue field (mu
    is the similitude unknown, absent for U)."""
    fld = epull.ring
    n = spec.n
    d = fld.d
    key = spec.key()
    solver = _LIE_CORR_CACHE.get(key)
    if solver is None:
        sp1 = spec.at_level(1)
        nun = 0 if spec.family == "U" else 1
        ncols = n * n * d + nun
        cols = []
        for k in range(ncols):
            vec = [0] * ncols
            vec[k] = 1
            z = mat_from_zvec(fld, n, vec[:n * n * d])
            if spec.family == "U":
                eq = z @ sp1.form + sp1.form @ z.tau_transpose(sp1.tau_exp)
            else:
                eq = z @ sp1.form + sp1.form @ z.transpose() - sp1.form.scale(fld.elem(vec[-1]))
            cols.append(eq.to_zvec())
        rows = [[col[i] for col in cols] for i in range(len(cols[0]))]
        solver = ZModSolver(rows, fld.p)
        _LIE_CORR_CACHE[key] = solver
    target = [(-c) % fld.p for c in epull.to_zvec()]
    sol = solver.solve(target)
    assert sol is not None, "linearized correction unsolvable"
    return mat_from_zvec(fld, n, sol[:n * n * d])
