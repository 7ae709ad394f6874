"""Exact arithmetic in F_q = F_{p^k} and matrices over it.

Field elements are represented as integers in ``range(q)`` encoding the
coefficient vector of the residue polynomial in base p, little-endian:
the element sum(c_i * x^i) corresponds to sum(c_i * p^i).  The zero
element is 0 and the multiplicative identity is 1 for every field.  All
operations go through the owning :class:`Fq` descriptor, which verifies
its defining polynomial at construction.

Matrices are immutable tuples of row tuples of element codes, wrapped in
:class:`Mat` together with the owning field.  ``enumerate_gl`` lists all
of GL_n(F_q) in row-major radix order of the entry codes and provides a
bijective matrix <-> index map that every downstream table keys on.
"""

from functools import lru_cache

from .errors import (
    EnumerationBoundExceeded,
    NonPrimeCharacteristic,
    ReduciblePolynomial,
    SingularMatrix,
)

DEFAULT_Q_BOUND = 2**20
DEFAULT_GL_BOUND = 10**6


def is_prime(n):
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def _poly_from_code(code, p):
    """Base-p digits of ``code``, little-endian, without trailing zeros."""
    coeffs = []
    while code:
        coeffs.append(code % p)
        code //= p
    return coeffs


class Fq:
    """Descriptor for F_{p^k} with arithmetic on int-coded elements.

    ``poly`` is the dense monic defining polynomial over F_p, a tuple of
    length k+1, little-endian; for k = 1 it is (c, 1) for x + c.
    """

    def __init__(self, p, k, poly=None, q_bound=DEFAULT_Q_BOUND):
        if not is_prime(p):
            raise NonPrimeCharacteristic(f"p = {p} is not prime")
        if k < 1:
            raise ReduciblePolynomial(f"extension degree {k} < 1")
        q = p**k
        if q > q_bound:
            raise EnumerationBoundExceeded(f"q = {q} exceeds bound {q_bound}")
        self.p = p
        self.k = k
        self.q = q
        if poly is None:
            poly = find_irreducible(p, k)
        poly = tuple(c % p for c in poly)
        if len(poly) != k + 1 or poly[-1] != 1:
            raise ReduciblePolynomial(f"defining polynomial must be monic of degree {k}")
        if not _is_irreducible(poly, p):
            raise ReduciblePolynomial(f"{poly} is reducible over F_{p}")
        self.poly = poly
        self._mul_table = None
        self._inv_table = None
        if q <= 256:
            self._build_tables()

    # -- representation ------------------------------------------------

    def coeffs(self, a):
        """Coefficient list over F_p of length k for element code ``a``."""
        cs = _poly_from_code(a, self.p)
        return cs + [0] * (self.k - len(cs))

    def from_coeffs(self, cs):
        return sum((c % self.p) * self.p**i for i, c in enumerate(cs))

    def __repr__(self):
        return f"Fq(p={self.p}, k={self.k}, poly={self.poly})"

    def __eq__(self, other):
        return isinstance(other, Fq) and (self.p, self.k, self.poly) == (other.p, other.k, other.poly)

    def __hash__(self):
        return hash((self.p, self.k, self.poly))

    def descriptor_key(self):
        """Canonical tuple identifying this field in cache keys."""
        return (self.p, self.k) + self.poly

    # -- arithmetic ----------------------------------------------------

    def add(self, a, b):
        p = self.p
        if p == 2:
            return a ^ b
        r = 0
        mul = 1
        while a or b:
            r += ((a + b) % p) * mul
            a //= p
            b //= p
            mul *= p
        return r

    def neg(self, a):
        p = self.p
        if p == 2:
            return a
        r = 0
        mul = 1
        while a:
            r += (-a % p) * mul
            a //= p
            mul *= p
        return r

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def _mul_raw(self, a, b):
        p, k = self.p, self.k
        ca = _poly_from_code(a, p)
        cb = _poly_from_code(b, p)
        prod = [0] * (len(ca) + len(cb) - 1) if ca and cb else []
        for i, x in enumerate(ca):
            if not x:
                continue
            for j, y in enumerate(cb):
                prod[i + j] = (prod[i + j] + x * y) % p
        # reduce modulo the defining polynomial
        for deg in range(len(prod) - 1, k - 1, -1):
            c = prod[deg]
            if c:
                prod[deg] = 0
                for i in range(k):
                    prod[deg - k + i] = (prod[deg - k + i] - c * self.poly[i]) % p
        return sum(c * p**i for i, c in enumerate(prod[:k]))

    def _build_tables(self):
        q = self.q
        self._mul_table = [[0] * q for _ in range(q)]
        for a in range(q):
            for b in range(a, q):
                v = self._mul_raw(a, b)
                self._mul_table[a][b] = v
                self._mul_table[b][a] = v
        self._inv_table = [0] * q
        for a in range(1, q):
            for b in range(1, q):
                if self._mul_table[a][b] == 1:
                    self._inv_table[a] = b
                    break

    def mul(self, a, b):
        if self._mul_table is not None:
            return self._mul_table[a][b]
        return self._mul_raw(a, b)

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of 0 in F_q")
        if self._inv_table is not None:
            return self._inv_table[a]
        return self.pow(a, self.q - 2)

    def pow(self, a, e):
        if a == 0:
            return 0 if e else 1
        e %= self.q - 1
        r = 1
        base = a
        while e:
            if e & 1:
                r = self.mul(r, base)
            base = self.mul(base, base)
            e >>= 1
        return r

    def frobenius(self, a):
        return self.pow(a, self.p)

    def trace_to_prime(self, a):
        """Absolute trace Tr_{F_q/F_p}(a) as an integer mod p."""
        t = 0
        x = a
        for _ in range(self.k):
            t = self.add(t, x)
            x = self.frobenius(x)
        # t lies in the prime subfield, i.e. t < p
        assert t < self.p
        return t

    def elements(self):
        return range(self.q)

    def units(self):
        return range(1, self.q)


def _is_irreducible(poly, p):
    """Irreducibility over F_p by exhaustive root/factor search (small q)."""
    k = len(poly) - 1
    if k == 1:
        return True

    def evaluate(coeffs, x):
        acc = 0
        for c in reversed(coeffs):
            acc = (acc * x + c) % p
        return acc

    if any(evaluate(poly, x) == 0 for x in range(p)):
        return False
    if k <= 3:
        return True  # no roots and degree <= 3 means irreducible
    # trial division by all monic polynomials of degree 2 .. k//2
    for deg in range(2, k // 2 + 1):
        for code in range(p**deg):
            divisor = _poly_from_code(code, p) + [0] * (deg - len(_poly_from_code(code, p))) + [1]
            if _poly_divides(divisor, poly, p):
                return False
    return True


def _poly_divides(d, f, p):
    r = list(f)
    dd = len(d) - 1
    for i in range(len(r) - 1, dd - 1, -1):
        c = r[i]
        if c:
            for j in range(dd + 1):
                r[i - dd + j] = (r[i - dd + j] - c * d[j]) % p
    return all(c == 0 for c in r)


@lru_cache(maxsize=None)
def find_irreducible(p, k):
    """First monic irreducible of degree k over F_p in lexicographic order.

    Lexicographic in the little-endian coefficient code, so the result is
    deterministic across runs.
    """
    for code in range(p**k):
        low = _poly_from_code(code, p)
        poly = tuple(low + [0] * (k - len(low)) + [1])
        if _is_irreducible(poly, p):
            return poly
    raise ReduciblePolynomial(f"no irreducible of degree {k} over F_{p}")  # pragma: no cover


@lru_cache(maxsize=None)
def make_field(p, k, poly=None, q_bound=DEFAULT_Q_BOUND):
    return Fq(p, k, poly, q_bound)


class Mat:
    """Immutable square matrix over an Fq, entries as element codes."""

    __slots__ = ("field", "n", "rows", "_hash")

    def __init__(self, field, rows):
        self.field = field
        self.rows = tuple(tuple(r) for r in rows)
        self.n = len(self.rows)
        self._hash = hash((field.q, self.rows))

    def __eq__(self, other):
        return isinstance(other, Mat) and self.rows == other.rows and self.field == other.field

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Mat({self.rows})"

    def __getitem__(self, ij):
        return self.rows[ij[0]][ij[1]]

    def __mul__(self, other):
        F = self.field
        n = self.n
        a, b = self.rows, other.rows
        out = []
        for i in range(n):
            row = []
            ai = a[i]
            for j in range(n):
                s = 0
                for t in range(n):
                    x = ai[t]
                    if x:
                        s = F.add(s, F.mul(x, b[t][j]))
                row.append(s)
            out.append(row)
        return Mat(F, out)

    def det(self):
        F = self.field
        n = self.n
        m = [list(r) for r in self.rows]
        det = 1
        for col in range(n):
            piv = None
            for r in range(col, n):
                if m[r][col]:
                    piv = r
                    break
            if piv is None:
                return 0
            if piv != col:
                m[col], m[piv] = m[piv], m[col]
                det = F.neg(det)
            det = F.mul(det, m[col][col])
            inv = F.inv(m[col][col])
            for r in range(col + 1, n):
                if m[r][col]:
                    f = F.mul(m[r][col], inv)
                    for c in range(col, n):
                        m[r][c] = F.sub(m[r][c], F.mul(f, m[col][c]))
        return det

    def trace(self):
        F = self.field
        t = 0
        for i in range(self.n):
            t = F.add(t, self.rows[i][i])
        return t

    def inv(self):
        F = self.field
        n = self.n
        m = [list(r) + [1 if i == j else 0 for j in range(n)] for i, r in enumerate(self.rows)]
        for col in range(n):
            piv = None
            for r in range(col, n):
                if m[r][col]:
                    piv = r
                    break
            if piv is None:
                raise SingularMatrix("matrix not invertible over F_q")
            if piv != col:
                m[col], m[piv] = m[piv], m[col]
            inv = F.inv(m[col][col])
            m[col] = [F.mul(inv, v) for v in m[col]]
            for r in range(n):
                if r != col and m[r][col]:
                    f = m[r][col]
                    m[r] = [F.sub(m[r][c], F.mul(f, m[col][c])) for c in range(2 * n)]
        return Mat(F, [row[n:] for row in m])

    def transpose(self):
        return Mat(self.field, zip(*self.rows))

    def is_identity(self):
        return all(self.rows[i][j] == (1 if i == j else 0) for i in range(self.n) for j in range(self.n))

    def code(self):
        """Row-major radix encoding over [0, q^{n*n})."""
        q = self.field.q
        c = 0
        for row in self.rows:
            for v in row:
                c = c * q + v
        return c


def identity(field, n):
    return Mat(field, [[1 if i == j else 0 for j in range(n)] for i in range(n)])


def scalar_mat(field, n, a):
    return Mat(field, [[a if i == j else 0 for j in range(n)] for i in range(n)])


def mat_from_code(field, n, code):
    q = field.q
    entries = []
    for _ in range(n * n):
        entries.append(code % q)
        code //= q
    entries.reverse()
    return Mat(field, [entries[i * n:(i + 1) * n] for i in range(n)])


def gl_order(n, q):
    r = 1
    for i in range(n):
        r *= q**n - q**i
    return r


class GLGroup:
    """Enumerated GL_n(F_q) with the canonical index maps.

    ``mats[i]`` is the i-th invertible matrix in row-major radix order;
    ``index[mat] -> i`` inverts it.  Inverse and product helpers work on
    indices so that downstream tables stay integer-typed.
    """

    def __init__(self, n, field, bound=DEFAULT_GL_BOUND):
        order = gl_order(n, field.q)
        if order > bound:
            raise EnumerationBoundExceeded(f"|GL_{n}(F_{field.q})| = {order} exceeds bound {bound}")
        self.n = n
        self.field = field
        self.order = order
        mats = []
        q = field.q
        for code in range(q ** (n * n)):
            m = mat_from_code(field, n, code)
            if m.det():
                mats.append(m)
        assert len(mats) == order
        self.mats = mats
        self.index = {m: i for i, m in enumerate(mats)}
        self._inv = None

    def inv_index(self, i):
        if self._inv is None:
            self._inv = [self.index[m.inv()] for m in self.mats]
        return self._inv[i]

    def identity_index(self):
        return self.index[identity(self.field, self.n)]

    def __len__(self):
        return self.order

    def __iter__(self):
        return iter(self.mats)


@lru_cache(maxsize=None)
def enumerate_gl(n, field, bound=DEFAULT_GL_BOUND):
    return GLGroup(n, field, bound)
