"""Finite abelian groups given by explicit elements.

FinAbelian takes an element list and a multiplication callable and
computes a cyclic-factor basis (via the Smith normal form of a
triangular relation lattice), discrete logarithms for every element,
and the exact character group.  Also here: extension of a character
from a subgroup by filtering, and 2-coboundary witnesses over Z/m for
phase-valued 2-cocycles on such groups.

Elements must be hashable; the input order fixes all tie-breaking.
"""

from fractions import Fraction
from math import lcm

from .localring import QZPhase
from .linalg import smith_normal_form, ZModSolver


class FinAbelian:
    """A finite abelian group with multiplication table access.

    gens/orders give independent generators of cyclic factors
    (orders[i] > 1, orders sorted by the divisibility chain from the
    Smith normal form).  dlog(x) is the exponent tuple of x in them.
    """

    def __init__(self, elements, mul, identity):
        self.elements = list(elements)
        self.mul = mul
        self.identity = identity
        self.order = len(self.elements)
        self._build()

    def _build(self):
        mul = self.mul
        raw_gens = []
        dlog_raw = {self.identity: ()}
        assert self.identity in set(self.elements), "identity not in element list"
        ladder = []  # row i: minimal m_i with g_i^{m_i} in previous subgroup
        for x in self.elements:
            if x in dlog_raw:
                continue
            k = len(raw_gens)
            raw_gens.append(x)
            old = list(dlog_raw.items())
            old_set = set(dlog_raw)
            for h, vec in old:
                dlog_raw[h] = vec + (0,)
            # add cosets H_old * x^j until x^m falls back into H_old;
            # m is then the minimal relation exponent for this generator
            power, j = x, 1
            while power not in old_set:
                for h, vec in old:
                    hx = mul(h, power)
                    assert hx not in dlog_raw, "cosets not disjoint; mul not abelian?"
                    dlog_raw[hx] = vec + (j,)
                power = mul(power, x)
                j += 1
            base_vec = dlog_raw[power][:k]  # exponents of x^m over the old gens
            ladder.append([-int(c) for c in base_vec] + [j])
        nfull = len(raw_gens)
        for key in dlog_raw:
            vec = dlog_raw[key]
            if len(vec) < nfull:
                dlog_raw[key] = vec + (0,) * (nfull - len(vec))
        assert len(dlog_raw) == self.order, "element list is not a group"
        self._raw_gens = raw_gens
        if nfull == 0:
            self.gens, self.orders = [], []
            self._dlog = {self.identity: ()}
            self.exponent = 1
            return
        rel = [row + [0] * (nfull - len(row)) for row in ladder]
        D, U, V, Vinv = smith_normal_form(rel, want_vinv=True)
        diag = [D[i][i] for i in range(nfull)]
        # new generators h_j = prod g_i^{Vinv[j][i]}; y = V^T x mod d
        assert all(d > 0 for d in diag), "relation lattice not of full rank"
        keep = [j for j in range(nfull) if diag[j] != 1]
        gens = []
        for j in keep:
            acc = self.identity
            for i in range(nfull):
                acc = mul(acc, self._pow(raw_gens[i], Vinv[j][i] % self.order))
            gens.append(acc)
        self.gens = gens
        self.orders = [diag[j] for j in keep]
        self._dlog = {}
        for elem, x in dlog_raw.items():
            y = tuple(
                sum(V[i][j] * x[i] for i in range(nfull)) % diag[j]
                for j in keep)
            self._dlog[elem] = y
        self.exponent = lcm(*self.orders) if self.orders else 1
        prod = 1
        for d in self.orders:
            prod *= d
        assert prod == self.order, "structure mismatch: %r vs %d" % (self.orders, self.order)
        # certify the discrete logs
        for elem, y in self._dlog.items():
            acc = self.identity
            for g, e in zip(self.gens, y):
                acc = mul(acc, self._pow(g, e))
            assert acc == elem, "dlog reconstruction failed"

    def _pow(self, x, e):
        acc, base = self.identity, x
        while e:
            if e & 1:
                acc = self.mul(acc, base)
            base = self.mul(base, base)
            e >>= 1
        return acc

    def dlog(self, x):
        return self._dlog[x]

    def primary_orders(self):
        """Multiset of prime-power cyclic factor orders (the invariant
        factors split by the primes dividing them)."""
        out = []
        for d in self.orders:
            n = d
            q = 2
            while n > 1:
                if n % q == 0:
                    pk = 1
                    while n % q == 0:
                        n //= q
                        pk *= q
                    out.append(pk)
                q += 1
        return sorted(out)

    def __contains__(self, x):
        return x in self._dlog

    def characters(self):
        """All characters, as AbChar objects (lexicographic in the
        exponent tuples on the cyclic factors)."""
        import itertools
        for t in itertools.product(*[range(d) for d in self.orders]):
            yield AbChar(self, t)

    def character_count(self):
        return self.order

    def subgroup(self, elements):
        """FinAbelian structure on a subset (must be a subgroup);
        duplicates in the input are dropped."""
        seen, uniq = set(), []
        for x in elements:
            if x not in seen:
                seen.add(x)
                uniq.append(x)
        return FinAbelian(uniq, self.mul, self.identity)


class AbChar:
    """A character of a FinAbelian group: exponent t_j on generator j,
    value prod exp(2 pi i t_j y_j / d_j)."""

    __slots__ = ("group", "exps")

    def __init__(self, group, exps):
        self.group = group
        self.exps = tuple(exps)

    def value(self, x):
        y = self.group.dlog(x)
        f = Fraction(0)
        for t, e, d in zip(self.exps, y, self.group.orders):
            if t and e:
                f += Fraction(t * e, d)
        return QZPhase(f)

    def __eq__(self, other):
        return isinstance(other, AbChar) and self.group is other.group and self.exps == other.exps

    def __hash__(self):
        return hash(("AbChar", id(self.group), self.exps))

    def __repr__(self):
        return "AbChar%r" % (list(self.exps),)


def extend_partial_character(group, sub_elements, target):
    """All characters of `group` agreeing with `target` on the subgroup
    generated by sub_elements.  `target` maps subgroup elements to
    QZPhase.  Returns a (possibly empty) list of AbChar."""
    sub = group.subgroup(sub_elements)
    probes = sub.gens if sub.gens else []
    out = []
    for ch in group.characters():
        if all(ch.value(g) == target(g) for g in probes):
            # the generators pin the whole subgroup, but double-check identity
            out.append(ch)
    return out


def coboundary_witness(group, cocycle, pairs=None):
    """Solve c(g,h) = alpha(g) + alpha(h) - alpha(gh) in Q/Z.

    `cocycle` maps pairs of group elements to QZPhase.  The solve runs
    over Z/m with m = lcm(cocycle denominators, group exponent) times
    the cocycle denominator lcm -- large enough that a solution over the
    circle group exists iff one exists over Z/m.  Returns a dict
    g -> QZPhase or None (not a coboundary).
    """
    elems = group.elements
    index = {g: i for i, g in enumerate(elems)}
    if pairs is None:
        pairs = [(g, h) for g in elems for h in elems]
    dens = [cocycle(g, h).denominator for g, h in pairs]
    cden = lcm(*dens) if dens else 1
    # any circle-valued solution has alpha^(cden * exponent) = 1, so the
    # finite solve below is complete, not just sufficient
    m = cden * group.exponent
    cache = getattr(group, "_cob_cache", None)
    if cache is None:
        cache = group._cob_cache = {}
    key = (m, len(pairs))
    solver = cache.get(key)
    rhs = []
    rows = []
    for g, h in pairs:
        gh = group.mul(g, h)
        if solver is None:
            row = [0] * len(elems)
            row[index[g]] += 1
            row[index[h]] += 1
            row[index[gh]] -= 1
            rows.append(row)
        val = cocycle(g, h).frac
        assert m % val.denominator == 0
        rhs.append(val.numerator * (m // val.denominator) % m)
    if solver is None:
        solver = ZModSolver(rows, m)
        cache[key] = solver
    x = solver.solve(rhs)
    if x is None:
        return None
    return {g: QZPhase(x[index[g]], m) for g in elems}
