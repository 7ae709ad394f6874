"""The computation field F_{l'} standing in for characteristic-zero coefficients.

All character-theoretic values of GL_n(F_q) live in Z[zeta_M] where M is a
multiple of the group exponent; reducing modulo a prime l' = 1 (mod M) that
exceeds |GL_n(F_q)| keeps every integer we care about (degrees, invariant
dimensions, inner products) in bijection with its lift in [0, l').  Elements
of F_{l'} are plain Python ints.
"""

from functools import lru_cache
from math import gcd, isqrt

from .errors import SearchBudgetExceeded
from .fq import gl_order, is_prime

DEFAULT_PRIME_BOUND = 10**8


def _lcm(a, b):
    return a // gcd(a, b) * b


def gl_exponent_multiple(n, q, p):
    """A multiple of the exponent of GL_n(F_q).

    Semisimple element orders divide lcm(q^d - 1, d <= n); unipotent parts
    have order p^ceil(log_p n).  Overshooting is harmless (M only needs to be
    a multiple of the exponent).
    """
    m = 1
    for d in range(1, n + 1):
        m = _lcm(m, q**d - 1)
    ppart = 1
    while ppart < n:
        ppart *= p
    return m * ppart


class ComputationField:
    """Prime field F_{l'} with a distinguished root of unity zeta_M."""

    def __init__(self, lprime, M, zeta):
        self.lprime = lprime
        self.M = M
        self.zeta = zeta

    def __repr__(self):
        return f"ComputationField(l'={self.lprime}, M={self.M}, zeta={self.zeta})"

    def inv(self, a):
        return pow(a, -1, self.lprime)

    def root_of_unity(self, order):
        """A fixed primitive ``order``-th root of unity (order must divide M)."""
        if self.M % order:
            raise ValueError(f"order {order} does not divide M = {self.M}")
        return pow(self.zeta, self.M // order, self.lprime)

    def lift(self, a):
        """Canonical integer lift in [0, l')."""
        return a % self.lprime


def _prime_factors(n):
    fs = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            fs.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        fs.append(n)
    return fs


def _element_of_order(M, lprime):
    """Deterministic search for an element of exact multiplicative order M."""
    cof = (lprime - 1) // M
    maximal = [M // r for r in _prime_factors(M)]
    for a in range(2, lprime):
        x = pow(a, cof, lprime)
        if x == 1:
            continue
        if all(pow(x, e, lprime) != 1 for e in maximal):
            return x
    raise SearchBudgetExceeded(f"no element of order {M} mod {lprime}")  # pragma: no cover


@lru_cache(maxsize=None)
def make_computation_field(n, field, lprime_override=None, prime_bound=DEFAULT_PRIME_BOUND):
    """Smallest prime l' = 1 (mod M) with l' > |GL_n(F_q)|, plus zeta_M.

    M = lcm(exponent multiple of GL_n(F_q), p).  An override prime is
    accepted if it satisfies both constraints.
    """
    q, p = field.q, field.p
    order = gl_order(n, q)
    M = _lcm(gl_exponent_multiple(n, q, p), p)
    if lprime_override is not None:
        lp = lprime_override
        if not is_prime(lp) or lp % M != 1 or lp <= order:
            raise SearchBudgetExceeded(
                f"override l' = {lp} violates l' = 1 mod {M}, l' > {order}")
        return ComputationField(lp, M, _element_of_order(M, lp))
    lp = (max(order, 2) // M) * M + 1
    while lp <= prime_bound:
        if lp > order and lp % M == 1 and is_prime(lp):
            return ComputationField(lp, M, _element_of_order(M, lp))
        lp += M
    raise SearchBudgetExceeded(f"no prime l' = 1 mod {M} with l' > {order} below {prime_bound}")


# -- dense linear algebra over F_{l'} ----------------------------------------
#
# Row vectors and matrices are lists/tuples of ints reduced mod l'.  Sizes
# here are the class counts of desk-scale groups (c <= ~25), so cubic
# algorithms are fine.


def mat_mul_mod(A, B, lp):
    n, m = len(A), len(B[0])
    k = len(B)
    out = []
    for i in range(n):
        Ai = A[i]
        row = []
        for j in range(m):
            s = 0
            for t in range(k):
                a = Ai[t]
                if a:
                    s += a * B[t][j]
            row.append(s % lp)
        out.append(row)
    return out


def mat_vec_mod(A, v, lp):
    return [sum(a * x for a, x in zip(row, v)) % lp for row in A]


def rref_mod(rows, lp):
    """Reduced row echelon form; returns (rref rows, pivot column list)."""
    m = [list(r) for r in rows]
    if not m:
        return [], []
    cols = len(m[0])
    pivots = []
    r = 0
    for c in range(cols):
        piv = None
        for i in range(r, len(m)):
            if m[i][c] % lp:
                piv = i
                break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = pow(m[r][c], -1, lp)
        m[r] = [(v * inv) % lp for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] % lp:
                f = m[i][c]
                m[i] = [(m[i][j] - f * m[r][j]) % lp for j in range(cols)]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def kernel_mod(A, lp):
    """Basis of the right kernel of A (list of column vectors)."""
    if not A:
        return []
    cols = len(A[0])
    R, pivots = rref_mod(A, lp)
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for fc in free:
        v = [0] * cols
        v[fc] = 1
        for r, pc in enumerate(pivots):
            v[pc] = (-R[r][fc]) % lp
        basis.append(v)
    return basis


def charpoly_mod(A, lp):
    """Characteristic polynomial det(xI - A), low-to-high coefficients.

    Computed by evaluating det(xI - A) at deg+1 points and interpolating;
    requires l' > deg which always holds here.
    """
    d = len(A)
    if d == 0:
        return [1]
    xs = list(range(d + 1))
    ys = []
    for x in xs:
        M = [[(x * (i == j) - A[i][j]) % lp for j in range(d)] for i in range(d)]
        ys.append(_det_mod(M, lp))
    return _lagrange_interp(xs, ys, lp)


def _det_mod(M, lp):
    n = len(M)
    m = [row[:] for row in M]
    det = 1
    for c in range(n):
        piv = None
        for r in range(c, n):
            if m[r][c] % lp:
                piv = r
                break
        if piv is None:
            return 0
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = -det
        det = (det * m[c][c]) % lp
        inv = pow(m[c][c], -1, lp)
        for r in range(c + 1, n):
            if m[r][c] % lp:
                f = (m[r][c] * inv) % lp
                m[r] = [(m[r][j] - f * m[c][j]) % lp for j in range(n)]
    return det % lp


def _lagrange_interp(xs, ys, lp):
    n = len(xs)
    coeffs = [0] * n
    for i in range(n):
        # numerator polynomial prod_{j != i} (x - x_j)
        num = [1]
        denom = 1
        for j in range(n):
            if j == i:
                continue
            num = _poly_mul(num, [(-xs[j]) % lp, 1], lp)
            denom = (denom * (xs[i] - xs[j])) % lp
        f = (ys[i] * pow(denom, -1, lp)) % lp
        for t, c in enumerate(num):
            coeffs[t] = (coeffs[t] + f * c) % lp
    return coeffs


def _poly_mul(a, b, lp):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % lp
    return out


def poly_roots_mod(coeffs, lp, scan_bound=200000):
    """All roots in F_{l'} of the given polynomial, by full scan.

    Desk-scale l' stays well below the scan bound; larger fields would need
    a proper factorization algorithm and are rejected.
    """
    if lp > scan_bound:
        raise SearchBudgetExceeded(f"root scan over F_{lp} beyond bound {scan_bound}")
    roots = []
    for x in range(lp):
        acc = 0
        for c in reversed(coeffs):
            acc = (acc * x + c) % lp
        if acc == 0:
            roots.append(x)
    return roots


def sqrt_bounded(value, bound, lp):
    """The integer d in [1, bound] with d*d = value mod l', if any.

    Since bound^2 < l', the square is not reduced and d is unique.
    """
    if bound * bound >= lp:
        raise ValueError("sqrt_bounded requires bound^2 < l'")
    v = value % lp
    d = isqrt(v)
    if d <= bound and d * d == v:
        return d
    return None
