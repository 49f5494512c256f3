"""Exact linear algebra over F_{p^d}, Z/p^r and Z.

Three layers are used by the rest of the package:

* Gaussian elimination over a residue field (entries are level-1
  RingElem values, every nonzero entry is invertible);
* integer matrices mod p: plain int Gauss, plus Hensel lifting of
  null spaces to Z/p^r -- the lift certifies that the solution module
  is free of constant rank and raises on a dimension drop;
* Smith normal form over Z with unimodular transforms, wrapped in
  ZModSolver for linear systems A x = b (mod m) with arbitrary m.

Also here: dense polynomial helpers over a residue field (charpoly via
expansion, minpoly via linear dependence, naive factorization at desk
scale).
"""


# ------------------------------------------------- field linear algebra

def rref_field(rows, fld):
    """Reduced row echelon form; returns (new_rows, pivot_columns)."""
    rows = [list(r) for r in rows]
    nrows = len(rows)
    ncols = len(rows[0]) if rows else 0
    pivots = []
    rank = 0
    for col in range(ncols):
        piv = None
        for i in range(rank, nrows):
            if not rows[i][col].is_zero():
                piv = i
                break
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = rows[rank][col].inv()
        rows[rank] = [inv * v for v in rows[rank]]
        for i in range(nrows):
            if i != rank and not rows[i][col].is_zero():
                c = rows[i][col]
                rows[i] = [a - c * b for a, b in zip(rows[i], rows[rank])]
        pivots.append(col)
        rank += 1
    return rows, pivots


def nullspace_field(rows, fld, ncols=None):
    """Basis of the right null space of the matrix (list of coefficient
    vectors over the field)."""
    if not rows:
        ncols = ncols or 0
        basis = []
        for j in range(ncols):
            v = [fld.zero] * ncols
            v[j] = fld.one
            basis.append(v)
        return basis
    ncols = len(rows[0])
    red, pivots = rref_field(rows, fld)
    free = [j for j in range(ncols) if j not in pivots]
    basis = []
    for j in free:
        v = [fld.zero] * ncols
        v[j] = fld.one
        for i, pc in enumerate(pivots):
            v[pc] = -red[i][j]
        basis.append(v)
    return basis


def solve_field(rows, rhs, fld):
    """One solution of A x = b over the field, or None."""
    if not rows:
        return []
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    red, pivots = rref_field(aug, fld)
    ncols = len(rows[0])
    if ncols in pivots:
        return None
    x = [fld.zero] * ncols
    for i, pc in enumerate(pivots):
        x[pc] = red[i][-1]
    return x


def det_field(rows, fld):
    """Determinant over the field by Gaussian elimination."""
    a = [list(r) for r in rows]
    n = len(a)
    det = fld.one
    for col in range(n):
        piv = next((i for i in range(col, n) if not a[i][col].is_zero()), None)
        if piv is None:
            return fld.zero
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det = det * a[col][col]
        inv = a[col][col].inv()
        for i in range(col + 1, n):
            c = a[i][col] * inv
            if not c.is_zero():
                a[i] = [x - c * y for x, y in zip(a[i], a[col])]
    return det


def inv_field(rows, fld):
    """Inverse of a square matrix over the field (assumed invertible)."""
    n = len(rows)
    aug = [list(r) + [fld.one if i == j else fld.zero for j in range(n)]
           for i, r in enumerate(rows)]
    red, pivots = rref_field(aug, fld)
    assert pivots == list(range(n)), "matrix not invertible"
    return [row[n:] for row in red]


# ------------------------------------------------ integer Gauss mod p

def _rref_modp(rows, p):
    rows = [[c % p for c in r] for r in rows]
    nrows, ncols = len(rows), len(rows[0]) if rows else 0
    pivots, rank = [], 0
    for col in range(ncols):
        piv = next((i for i in range(rank, nrows) if rows[i][col] % p), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][col], p - 2, p)
        rows[rank] = [v * inv % p for v in rows[rank]]
        for i in range(nrows):
            if i != rank and rows[i][col]:
                c = rows[i][col]
                rows[i] = [(a - c * b) % p for a, b in zip(rows[i], rows[rank])]
        pivots.append(col)
        rank += 1
    return rows, pivots


def nullspace_modp(rows, p, ncols=None):
    if not rows:
        ncols = ncols or 0
        return [[1 if i == j else 0 for j in range(ncols)] for i in range(ncols)]
    ncols = len(rows[0])
    red, pivots = _rref_modp(rows, p)
    basis = []
    for j in (j for j in range(ncols) if j not in pivots):
        v = [0] * ncols
        v[j] = 1
        for i, pc in enumerate(pivots):
            v[pc] = (-red[i][j]) % p
        basis.append(v)
    return basis


def solve_modp(rows, rhs, p):
    if not rows:
        return []
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    red, pivots = _rref_modp(aug, p)
    ncols = len(rows[0])
    if ncols in pivots:
        return None
    x = [0] * ncols
    for i, pc in enumerate(pivots):
        x[pc] = red[i][-1]
    return x


def inv_modp(rows, p):
    """Inverse of a square integer matrix mod p (assumed invertible)."""
    n = len(rows)
    aug = [[c % p for c in r] + [1 if i == j else 0 for j in range(n)]
           for i, r in enumerate(rows)]
    red, pivots = _rref_modp(aug, p)
    assert pivots == list(range(n)), "matrix not invertible mod %d" % p
    return [row[n:] for row in red]


def nullspace_zmod(rows, p, r, ncols=None):
    """Basis of {x : A x = 0 mod p^r}, obtained from the mod-p null space
    by Hensel lifting.  Raises ValueError if a basis vector fails to lift
    (solution module not free of constant rank)."""
    base = nullspace_modp(rows, p, ncols=ncols)
    if r == 1 or not rows:
        return base
    q = p ** r
    out = []
    for x in base:
        x = list(x)
        for k in range(1, r):
            pk = p ** k
            resid = [(sum(a * v for a, v in zip(row, x)) // pk) % p for row in rows]
            y = solve_modp(rows, [(-c) % p for c in resid], p)
            if y is None:
                raise ValueError("dimension drop while lifting null space mod %d^%d" % (p, k + 1))
            x = [(a + pk * b) % (pk * p) for a, b in zip(x, y)]
        out.append([c % q for c in x])
    return out


# ------------------------------------------------------- Smith normal form

def smith_normal_form(mat, want_vinv=False):
    """U A V = D with U, V unimodular and D diagonal with d_i | d_{i+1}.
    Returns (D, U, V), or (D, U, V, Vinv) when want_vinv."""
    A = [list(map(int, row)) for row in mat]
    m = len(A)
    n = len(A[0]) if m else 0
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]
    Vinv = [[int(i == j) for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]
        Vinv[i], Vinv[j] = Vinv[j], Vinv[i]

    def addmul_row(dst, src, c):
        A[dst] = [a + c * b for a, b in zip(A[dst], A[src])]
        U[dst] = [a + c * b for a, b in zip(U[dst], U[src])]

    def addmul_col(dst, src, c):
        for row in A:
            row[dst] += c * row[src]
        for row in V:
            row[dst] += c * row[src]
        Vinv[src] = [a - c * b for a, b in zip(Vinv[src], Vinv[dst])]

    def negate_row(i):
        A[i] = [-a for a in A[i]]
        U[i] = [-a for a in U[i]]

    def diagonalize():
        t = 0
        while t < min(m, n):
            best = None
            for i in range(t, m):
                for j in range(t, n):
                    a = A[i][j]
                    if a and (best is None or abs(a) < abs(best[2])):
                        best = (i, j, a)
            if best is None:
                break
            i, j, _ = best
            swap_rows(t, i)
            swap_cols(t, j)
            done = False
            while not done:
                done = True
                for i in range(t + 1, m):
                    if A[i][t]:
                        c = A[i][t] // A[t][t]
                        addmul_row(i, t, -c)
                        if A[i][t]:
                            swap_rows(t, i)
                            done = False
                for j in range(t + 1, n):
                    if A[t][j]:
                        c = A[t][j] // A[t][t]
                        addmul_col(j, t, -c)
                        if A[t][j]:
                            swap_cols(t, j)
                            done = False
            if A[t][t] < 0:
                negate_row(t)
            t += 1

    diagonalize()
    # enforce the divisibility chain d_k | d_{k+1}
    while True:
        bad = None
        for k in range(min(m, n) - 1):
            a, b = A[k][k], A[k + 1][k + 1]
            if a and b % a:
                bad = k
                break
        if bad is None:
            break
        addmul_col(bad, bad + 1, 1)
        diagonalize()
    if want_vinv:
        return A, U, V, Vinv
    return A, U, V


class ZModSolver:
    """Solve A x = b (mod m) repeatedly for fixed A, m via one SNF."""

    def __init__(self, rows, m):
        import math
        self._gcd = math.gcd
        self.m = int(m)
        self.rows = [list(r) for r in rows]
        self.nrows = len(rows)
        self.ncols = len(rows[0]) if rows else 0
        D, U, V = smith_normal_form(rows) if rows else ([], [], [])
        self.D = [D[i][i] for i in range(min(self.nrows, self.ncols))]
        self.U, self.V = U, V

    def solve(self, rhs):
        """One solution vector (ints mod m), or None."""
        m = self.m
        if not self.rows:
            return []
        c = [sum(u * b for u, b in zip(row, rhs)) % m for row in self.U]
        y = [0] * self.ncols
        for i in range(self.nrows):
            di = self.D[i] if i < len(self.D) else 0
            ci = c[i]
            if di == 0:
                if ci % m:
                    return None
                continue
            g = self._gcd(di, m)
            if ci % g:
                return None
            mm = m // g
            if mm > 1:
                y[i] = (ci // g) * pow((di // g) % mm, -1, mm) % mm
        x = [sum(self.V[i][j] * y[j] for j in range(self.ncols)) % m for i in range(self.ncols)]
        for row, b in zip(self.rows, rhs):
            assert sum(a * v for a, v in zip(row, x)) % m == b % m
        return x


# --------------------------------------------- polynomials over a field
# coefficient lists of RingElem, ascending; normalized = no zero tail

def poly_norm(f, fld):
    f = list(f)
    while len(f) > 1 and f[-1].is_zero():
        f.pop()
    return f or [fld.zero]

def poly_deg(f):
    return len(f) - 1 if not (len(f) == 1 and f[0].is_zero()) else -1

def poly_mul(f, g, fld):
    out = [fld.zero] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if not a.is_zero():
            for j, b in enumerate(g):
                out[i + j] = out[i + j] + a * b
    return poly_norm(out, fld)

def poly_add(f, g, fld):
    n = max(len(f), len(g))
    out = []
    for i in range(n):
        a = f[i] if i < len(f) else fld.zero
        b = g[i] if i < len(g) else fld.zero
        out.append(a + b)
    return poly_norm(out, fld)

def poly_divmod(f, g, fld):
    f = poly_norm(f, fld)
    g = poly_norm(g, fld)
    assert poly_deg(g) >= 0
    q = [fld.zero] * max(1, len(f) - len(g) + 1)
    rem = list(f)
    ginv = g[-1].inv()
    while poly_deg(rem) >= poly_deg(g):
        shift = poly_deg(rem) - poly_deg(g)
        c = rem[-1] * ginv
        q[shift] = q[shift] + c
        for i, b in enumerate(g):
            rem[shift + i] = rem[shift + i] - c * b
        rem = poly_norm(rem, fld)
        if poly_deg(rem) < 0:
            break
    return poly_norm(q, fld), poly_norm(rem, fld)

def poly_gcd(f, g, fld):
    f, g = poly_norm(f, fld), poly_norm(g, fld)
    while poly_deg(g) >= 0:
        _, rem = poly_divmod(f, g, fld)
        f, g = g, rem
    if poly_deg(f) >= 0:
        f = [c * f[-1].inv() for c in f]
    return f

def poly_eval(f, x, fld):
    acc = fld.zero
    for c in reversed(f):
        acc = acc * x + c
    return acc

def poly_derivative(f, fld):
    return poly_norm([c * i for i, c in enumerate(f)][1:] or [fld.zero], fld)

def poly_monic(f, fld):
    f = poly_norm(f, fld)
    return [c * f[-1].inv() for c in f]


def factor_poly(f, fld):
    """Multiset of (monic irreducible factor, multiplicity); naive trial
    division by candidate factors of increasing degree -- fine at desk
    scale (degree <= 6, |field| <= 81)."""
    import itertools
    f = poly_monic(f, fld)
    factors = []
    elems = None
    d_try = 1
    while poly_deg(f) > 0:
        if 2 * d_try > poly_deg(f):
            factors.append((f, 1))
            break
        if elems is None:
            elems = list(fld.elements())
        found = False
        for tail in itertools.product(elems, repeat=d_try):
            cand = list(tail) + [fld.one]
            if poly_deg(cand) != d_try:
                continue
            q, rem = poly_divmod(f, cand, fld)
            if poly_deg(rem) < 0:
                mult = 1
                f = q
                while True:
                    q, rem = poly_divmod(f, cand, fld)
                    if poly_deg(rem) < 0:
                        mult += 1
                        f = q
                    else:
                        break
                factors.append((cand, mult))
                found = True
                break
        if not found:
            d_try += 1
    return factors


def poly_is_irreducible(f, fld):
    f = poly_norm(f, fld)
    if poly_deg(f) <= 0:
        return False
    fac = factor_poly(f, fld)
    return len(fac) == 1 and fac[0][1] == 1 and poly_deg(fac[0][0]) == poly_deg(f)
