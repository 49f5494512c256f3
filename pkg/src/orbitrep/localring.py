"""Exact arithmetic in finite local principal ideal rings.

O = Z/p^r for an odd prime p, together with its unramified extensions
GR(p^r, d) = (Z/p^r)[x]/(f), f monic of degree d and irreducible mod p
(Galois rings).  The maximal ideal is (p), the residue field is F_{p^d},
and reduction/lifting between levels s <= r is coefficientwise.

Elements are immutable coefficient tuples (c_0, ..., c_{d-1}) with
0 <= c_i < p^r.  Also provided here:

* QZPhase -- exact values in Q/Z (roots of unity as reduced fractions),
* tau_level -- the additive character tau(p^{-s} u) = u/p^s mod 1,
  applied after the absolute trace when d > 1,
* lift_lambda / mu_defect -- the coefficientwise least-nonnegative lift
  between levels and its carry defect divided by p,
* frobenius, traces, Teichmueller-free root lifting, unit group data.
"""

from fractions import Fraction
import itertools


# ---------------------------------------------------------------- phases

class QZPhase:
    """An element of Q/Z, stored as a reduced fraction in [0, 1).

    Addition is the group law; multiplying by an int repeats it.  The
    associated root of unity is exp(2*pi*i*frac).
    """

    __slots__ = ("frac",)

    def __init__(self, num=0, den=None):
        if den is None:
            f = Fraction(num)
        else:
            f = Fraction(num, den)
        self.frac = f % 1

    def __add__(self, other):
        return QZPhase(self.frac + other.frac)

    def __sub__(self, other):
        return QZPhase(self.frac - other.frac)

    def __neg__(self):
        return QZPhase(-self.frac)

    def __mul__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        return QZPhase(self.frac * k)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, QZPhase) and self.frac == other.frac

    def __hash__(self):
        return hash(("QZPhase", self.frac))

    def __repr__(self):
        return "QZPhase(%s)" % self.frac

    @property
    def denominator(self):
        return self.frac.denominator

    def is_zero(self):
        return self.frac == 0

    def to_complex(self):
        import cmath
        return cmath.exp(2j * cmath.pi * float(self.frac))


ZERO_PHASE = QZPhase(0)


# ------------------------------------------------- polynomials over F_p
# tiny helpers on coefficient lists (ascending), used for modulus choice

def _pmod(a, f, p):
    a = [c % p for c in a]
    df = len(f) - 1
    while len(a) > df:
        lead = a[-1]
        if lead:
            shift = len(a) - 1 - df
            for i in range(df + 1):
                a[shift + i] = (a[shift + i] - lead * f[i]) % p
        a.pop()
    while len(a) > 1 and a[-1] == 0:
        a.pop()
    return a or [0]

def _pmul(a, b, p):
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return out

def _ppowmod(a, e, f, p):
    res = [1]
    base = _pmod(a, f, p)
    while e:
        if e & 1:
            res = _pmod(_pmul(res, base, p), f, p)
        base = _pmod(_pmul(base, base, p), f, p)
        e >>= 1
    return res

def _pgcd(a, b, p):
    a = [c % p for c in a]
    b = [c % p for c in b]
    while any(b):
        # reduce a mod b after making b monic
        inv = pow(b[-1], p - 2, p)
        b = [c * inv % p for c in b]
        a, b = b, _pmod(a, b, p)
        while len(b) > 1 and b[-1] == 0:
            b.pop()
    return a

def is_irreducible_mod_p(coeffs, p):
    """Irreducibility over F_p of the monic polynomial with the given
    ascending coefficient list (leading 1 included)."""
    f = [c % p for c in coeffs]
    d = len(f) - 1
    assert d >= 2 and f[-1] % p == 1
    def xqk_minus_x(k):
        # x^(p^k) - x reduced mod f
        t = [0, 1]
        for _ in range(k):
            t = _ppowmod(t, p, f, p)
        t = t + [0] * (2 - len(t))
        t[1] = (t[1] - 1) % p
        while len(t) > 1 and t[-1] == 0:
            t.pop()
        return t
    if xqk_minus_x(d) != [0]:
        return False
    for q in {q for q in range(2, d + 1) if d % q == 0 and all(q % k for k in range(2, q))}:
        g = _pgcd(f, xqk_minus_x(d // q), p)
        if len(g) > 1:
            return False
    return True

def least_irreducible(p, d):
    """Lexicographically least monic irreducible of degree d over F_p,
    as the tuple of non-leading coefficients (c_0, ..., c_{d-1})."""
    if d == 1:
        return (0,)
    for tail in itertools.product(range(p), repeat=d):
        if is_irreducible_mod_p(list(tail) + [1], p):
            return tail
    raise AssertionError("no irreducible polynomial found")


def _is_small_prime(p):
    return p >= 2 and all(p % k for k in range(2, int(p ** 0.5) + 1))


# ------------------------------------------------------------ the rings

_RING_CACHE = {}

def local_ring(p, r, d=1, modulus=None):
    """Cached constructor for Z/p^r (d = 1) or GR(p^r, d)."""
    if modulus is None and d > 1:
        modulus = least_irreducible(p, d)
    key = (p, r, d, tuple(int(c) % p ** r for c in modulus) if modulus else None)
    ring = _RING_CACHE.get(key)
    if ring is None:
        ring = LocalRing(p, r, d, modulus)
        _RING_CACHE[key] = ring
    return ring


class LocalRing:
    """Z/p^r for d = 1, the Galois ring GR(p^r, d) otherwise.

    Use local_ring() so that equal parameters give the identical object.
    """

    def __init__(self, p, r, d=1, modulus=None):
        if not _is_small_prime(p) or p == 2:
            raise ValueError("p must be an odd prime, got %r" % (p,))
        if r < 1 or d < 1:
            raise ValueError("need level r >= 1 and degree d >= 1")
        self.p, self.r, self.d = p, r, d
        self.pr = p ** r
        if modulus is None:
            modulus = least_irreducible(p, d) if d > 1 else (0,)
        self.modulus = tuple(int(c) % self.pr for c in modulus)
        if len(self.modulus) != d:
            raise ValueError("modulus must list the %d non-leading coefficients" % d)
        if d > 1 and not is_irreducible_mod_p(list(self.modulus) + [1], p):
            raise ValueError("modulus is reducible mod p")
        # reduction of x^k for k = d .. 2d-2 modulo the monic modulus
        red = []
        cur = [(-c) % self.pr for c in self.modulus]  # x^d
        red.append(tuple(cur))
        for _ in range(d - 2):
            cur = [0] + cur
            lead = cur.pop()
            cur = [(cur[i] - lead * self.modulus[i]) % self.pr for i in range(d)]
            red.append(tuple(cur))
        self._xred = red
        self._frob_matrix = None
        self.zero = RingElem(self, (0,) * d)
        self.one = RingElem(self, (1,) + (0,) * (d - 1))

    # -- basic structure -------------------------------------------------

    @property
    def cardinality(self):
        return self.pr ** self.d

    def __repr__(self):
        if self.d == 1:
            return "Z/%d^%d" % (self.p, self.r)
        return "GR(%d^%d,%d)" % (self.p, self.r, self.d)

    def elem(self, value):
        if isinstance(value, RingElem):
            assert value.ring is self
            return value
        if isinstance(value, int):
            return RingElem(self, (value % self.pr,) + (0,) * (self.d - 1))
        coeffs = tuple(int(c) % self.pr for c in value)
        assert len(coeffs) <= self.d
        return RingElem(self, coeffs + (0,) * (self.d - len(coeffs)))

    def generator(self):
        assert self.d > 1
        return RingElem(self, (0, 1) + (0,) * (self.d - 2))

    def elements(self):
        """All elements, lexicographic in the coefficient tuple."""
        for coeffs in itertools.product(range(self.pr), repeat=self.d):
            yield RingElem(self, coeffs)

    def units(self):
        for x in self.elements():
            if x.is_unit():
                yield x

    def at_level(self, s):
        assert 1 <= s
        if s == self.r:
            return self
        return local_ring(self.p, s, self.d, self.modulus if self.d > 1 else None)

    def residue_field(self):
        return self.at_level(1)

    def reduce(self, x, s):
        """Reduction O_r -> O_s, s <= r."""
        assert x.ring is self and s <= self.r
        tgt = self.at_level(s)
        q = tgt.pr
        return RingElem(tgt, tuple(c % q for c in x.coeffs))

    # -- arithmetic kernels ----------------------------------------------

    def _mul(self, a, b):
        d, q = self.d, self.pr
        if d == 1:
            return (a[0] * b[0] % q,)
        prod = [0] * (2 * d - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    prod[i + j] += ai * bj
        out = list(prod[:d])
        for k in range(d, 2 * d - 1):
            c = prod[k]
            if c:
                red = self._xred[k - d]
                for i in range(d):
                    out[i] += c * red[i]
        return tuple(c % q for c in out)

    def inv(self, x):
        """Inverse of a unit: residue-field inverse, then Hensel lifting."""
        if not x.is_unit():
            raise ZeroDivisionError("not a unit: %r" % (x,))
        p, d = self.p, self.d
        res = tuple(c % p for c in x.coeffs)
        if d == 1:
            y = (pow(res[0], p - 2, p),)
        else:
            # Fermat in F_{p^d}
            fld = self.at_level(1)
            y = fld._pow(res, p ** d - 2)
        y = tuple(y) + (0,) * (d - len(y))
        # y <- y(2 - x y), doubling the level of precision
        level = 1
        while level < self.r:
            xy = self._mul(x.coeffs, y)
            two_minus = ((2 - xy[0]) % self.pr,) + tuple((-c) % self.pr for c in xy[1:])
            y = self._mul(y, two_minus)
            level *= 2
        out = RingElem(self, tuple(c % self.pr for c in y))
        assert out * x == self.one
        return out

    def _pow(self, coeffs, e):
        out = self.one.coeffs
        base = coeffs
        while e:
            if e & 1:
                out = self._mul(out, base)
            base = self._mul(base, base)
            e >>= 1
        return out

    # -- Frobenius and traces ----------------------------------------------

    def frobenius_matrix(self):
        """Matrix (columns = images of 1, x, .., x^{d-1}) of the unique ring
        automorphism lifting c -> c^p on the residue field."""
        if self._frob_matrix is not None:
            return self._frob_matrix
        d = self.d
        if d == 1:
            self._frob_matrix = ((1,),)
            return self._frob_matrix
        xi = self.generator()
        z = xi ** self.p
        # Newton: move z to the root of the modulus congruent to it mod p
        f = list(self.modulus) + [1]
        def feval(t, coeffs):
            acc = self.zero
            for c in reversed(coeffs):
                acc = acc * t + self.elem(c)
            return acc
        fprime = [(i * f[i]) % self.pr for i in range(1, d + 1)]
        for _ in range(max(1, self.r.bit_length()) + 2):
            fz = feval(z, f)
            if fz == self.zero:
                break
            z = z - fz * self.inv(feval(z, fprime))
        assert feval(z, f) == self.zero, "Frobenius root lifting failed"
        cols = []
        zp = self.one
        for _ in range(d):
            cols.append(zp.coeffs)
            zp = zp * z
        self._frob_matrix = tuple(cols)
        return self._frob_matrix

    def frobenius(self, x, times=1):
        assert x.ring is self
        times %= self.d
        out = x
        for _ in range(times):
            cols = self.frobenius_matrix()
            acc = [0] * self.d
            for c, col in zip(out.coeffs, cols):
                if c:
                    for i in range(self.d):
                        acc[i] += c * col[i]
            out = RingElem(self, tuple(v % self.pr for v in acc))
        return out

    def trace_abs(self, x):
        """Absolute trace to Z/p^r, returned as an int in [0, p^r)."""
        acc, cur = self.zero, x
        for _ in range(self.d):
            acc = acc + cur
            cur = self.frobenius(cur)
        assert all(c == 0 for c in acc.coeffs[1:]), "trace left the base ring"
        return acc.coeffs[0]

    def trace_to(self, x, e):
        """Partial trace onto the fixed ring of frobenius^e (e must divide d)."""
        assert self.d % e == 0
        acc, cur = self.zero, x
        for _ in range(self.d // e):
            acc = acc + cur
            cur = self.frobenius(cur, e)
        return acc


class RingElem:
    """Immutable element of a LocalRing; coefficient tuple low -> high."""

    __slots__ = ("ring", "coeffs")

    def __init__(self, ring, coeffs):
        self.ring = ring
        self.coeffs = coeffs

    def key(self):
        r = self.ring
        return (r.p, r.r, r.d, r.modulus, self.coeffs)

    def __eq__(self, other):
        return isinstance(other, RingElem) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        if self.ring.d == 1:
            return "%d(mod %d)" % (self.coeffs[0], self.ring.pr)
        return "%s%r" % (list(self.coeffs), self.ring)

    def __add__(self, other):
        q = self.ring.pr
        return RingElem(self.ring, tuple((a + b) % q for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other):
        q = self.ring.pr
        return RingElem(self.ring, tuple((a - b) % q for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self):
        q = self.ring.pr
        return RingElem(self.ring, tuple((-a) % q for a in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, int):
            q = self.ring.pr
            return RingElem(self.ring, tuple(a * other % q for a in self.coeffs))
        assert other.ring is self.ring, "mixed rings"
        return RingElem(self.ring, self.ring._mul(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def __pow__(self, e):
        if e < 0:
            return self.ring.inv(self) ** (-e)
        return RingElem(self.ring, self.ring._pow(self.coeffs, e))

    def inv(self):
        return self.ring.inv(self)

    def is_unit(self):
        p = self.ring.p
        return any(c % p for c in self.coeffs)

    def is_zero(self):
        return all(c == 0 for c in self.coeffs)

    def as_int(self):
        assert self.ring.d == 1
        return self.coeffs[0]

    def residue(self):
        return self.ring.reduce(self, 1)


# ----------------------------------------------------- lifts and defects

def lift_lambda(x, target):
    """Coefficientwise least-nonnegative lift O_s -> O_t (t >= s); the
    multiplicative-free set section with lift(0) = 0."""
    if isinstance(target, int):
        target = x.ring.at_level(target)
    assert target.p == x.ring.p and target.d == x.ring.d and target.r >= x.ring.r
    return RingElem(target, x.coeffs)


def mu_defect(x, y):
    """The carry defect of the lift: lam(x) + lam(y) - lam(x+y) = p * mu,
    computed exactly; returned in the ring of x."""
    ring = x.ring
    assert y.ring is ring
    q, p = ring.pr, ring.p
    out = tuple((a + b - ((a + b) % q)) // p % q for a, b in zip(x.coeffs, y.coeffs))
    return RingElem(ring, out)


# ------------------------------------------------------------ characters

def tau_level(s, x):
    """tau(p^{-s} x) in Q/Z for x in a local ring: reduce mod p^s, take the
    absolute trace when d > 1, divide by p^s."""
    ring = x.ring
    assert s >= 1
    if ring.r != s:
        x = ring.reduce(x, s) if ring.r > s else lift_lambda(x, s)
    t = x.ring.trace_abs(x)
    return QZPhase(t, x.ring.p ** s)


def unit_group_basis(ring, budget=10 ** 6):
    """Cyclic-factor basis of the unit group, as a FinAbelian instance."""
    from .abelian import FinAbelian
    n_units = ring.p ** (ring.r * ring.d) - ring.p ** ((ring.r * ring.d) - ring.d)
    if n_units > budget:
        raise ValueError("unit group of size %d exceeds budget %d" % (n_units, budget))
    elems = list(ring.units())
    assert len(elems) == n_units
    return FinAbelian(elems, lambda a, b: a * b, ring.one)


# ------------------------------------------------------------- root finding

def ring_roots(coeffs, ring):
    """All simple roots in the ring of a polynomial with RingElem coefficients
    (ascending); residue roots are found by scanning F_{p^d} and Hensel-lifted.
    Roots whose derivative value is not a unit are skipped."""
    def feval(t, cs):
        acc = ring.zero
        for c in reversed(cs):
            acc = acc * t + c
        return acc
    deriv = [c * i for i, c in enumerate(coeffs)][1:]
    fld = ring.at_level(1)
    res_coeffs = [ring.reduce(c, 1) for c in coeffs]
    res_deriv = [ring.reduce(c, 1) for c in deriv] if deriv else []
    roots = []
    for cand in fld.elements():
        acc = fld.zero
        for c in reversed(res_coeffs):
            acc = acc * cand + c
        if not acc.is_zero():
            continue
        dacc = fld.zero
        for c in reversed(res_deriv):
            dacc = dacc * cand + c
        if not dacc.is_unit():
            continue
        z = lift_lambda(cand, ring.r)
        for _ in range(max(1, ring.r.bit_length()) + 2):
            fz = feval(z, coeffs)
            if fz.is_zero():
                break
            z = z - fz * ring.inv(feval(z, deriv))
        assert feval(z, coeffs).is_zero()
        roots.append(z)
    return roots
