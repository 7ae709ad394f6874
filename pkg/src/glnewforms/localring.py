"""Truncated local-field arithmetic: scalars and matrices in a finite window.

The base field F is either equal-characteristic F_q((t)) (the default; the
uniformizer is t and coefficient extraction is additive, so additive
characters of F are exactly computable) or mixed-characteristic with residue
field F_p and q = p (elements are p-adic mantissas).

A scalar is stored as (valuation, digits, prec): the element is known exactly
modulo pi^prec and its digits run from exponent ``val`` upward.  Elements
constructed from literals are exact (prec = +inf); arithmetic propagates the
correct precision and *reading* past the known precision raises
WindowOverflow -- results are never silently truncated below a validity
threshold.

psi_level on the ring selects the additive-character normalization: level 1
means conductor p (trivial on p, not on o), level 0 means conductor o
(trivial on o, not on p^-1).
"""

import math

from .errors import NotIntegral, SingularMatrix, WindowOverflow
from .fq import Fq, Mat

INF = math.inf


class LocalRing:
    """Descriptor of the working window over F_q((t)) or Q_p."""

    def __init__(self, residue: Fq, mode="equal", psi_level=1, pole_bound=8, work_prec=24):
        if mode not in ("equal", "mixed"):
            raise ValueError(f"unknown mode {mode!r}")
        if mode == "mixed" and residue.k != 1:
            raise ValueError("mixed mode requires a prime residue field (q = p)")
        if psi_level not in (0, 1):
            raise ValueError("psi_level must be 0 (conductor o) or 1 (conductor p)")
        self.residue = residue
        self.mode = mode
        self.psi_level = psi_level
        self.pole_bound = pole_bound
        self.work_prec = work_prec

    def __repr__(self):
        base = f"F_{self.residue.q}((t))" if self.mode == "equal" else f"Q_{self.residue.p}-window"
        return f"LocalRing({base}, B={self.pole_bound}, N={self.work_prec})"

    # -- constructors ----------------------------------------------------

    def zero(self):
        return W(self, 0, (), INF)

    def one(self):
        return self.constant(1)

    def constant(self, c):
        """Exact lift of a residue-field element (Teichmueller-free: the
        constant-coefficient lift in equal characteristic, the integer lift
        in mixed mode)."""
        c = c % self.residue.q
        if c == 0:
            return self.zero()
        return W(self, 0, (c,), INF)

    def uniformizer(self, k=1):
        if k < -self.pole_bound:
            raise WindowOverflow(f"pole order {-k} exceeds window bound {self.pole_bound}")
        return W(self, k, (1,), INF)

    def from_digits(self, val, digits, prec=INF):
        return W(self, val, tuple(d % self.residue.q for d in digits), prec)

    def random_integral(self, rng, min_val=0, prec=None):
        """Uniform element of p^{min_val} known to precision ``prec``."""
        if prec is None:
            prec = self.work_prec
        q = self.residue.q
        digits = [rng.randrange(q) for _ in range(prec - min_val)]
        return W(self, min_val, tuple(digits), prec)

    def psi_value(self, x, comp):
        """Additive character of F at psi_level, valued in F_{l'}.

        Level 1 (conductor p): psibar(coefficient of t^0); level 0
        (conductor o): psibar(coefficient of t^-1).  Exact in equal
        characteristic; mixed mode requires zeta_{p^s} in F_{l'} for the
        needed depth and is rejected when absent.
        """
        want = 0 if self.psi_level == 1 else -1  # exponent whose digit psi reads
        if self.mode == "equal":
            zp = comp.root_of_unity(self.residue.p)
            c = x.coeff(want)
            return pow(zp, self.residue.trace_to_prime(c), comp.lprime)
        # mixed: psi(x) = zeta_{p^s}^{x * p^{s-level...}}; needs deep p-power roots
        p = self.residue.p
        depth = max(0, want + 1 - _known_val(x)) + 1
        order = p**depth
        if comp.M % order:
            raise WindowOverflow(
                f"mixed-mode psi needs a p^{depth}-th root of unity; l' = 1 mod {order} fails")
        zeta = comp.root_of_unity(order)
        # x mod p^{want+1}, scaled to an integer exponent
        e = 0
        for i in range(_known_val(x), want + 1):
            e += x.coeff(i) * p ** (i - _known_val(x))
        shift = _known_val(x) - (want + 1) + depth
        return pow(zeta, e * p**max(0, shift), comp.lprime)


def _known_val(x):
    return x.val if x.digits else 0


class W:
    """Window scalar; see module docstring for the representation."""

    __slots__ = ("ring", "val", "digits", "prec")

    def __init__(self, ring, val, digits, prec):
        # normalize: strip leading zero digits into the valuation, clamp at prec
        q = ring.residue.q
        digits = tuple(d % q for d in digits)
        while digits and digits[0] == 0:
            digits = digits[1:]
            val += 1
        if prec is not INF:
            if digits and val + len(digits) > prec:
                digits = digits[: prec - val]
                while digits and digits[0] == 0:
                    digits = digits[1:]
                    val += 1
            if not digits:
                val = 0
        self.ring = ring
        self.val = val if digits else (INF if prec is INF else 0)
        self.digits = digits
        self.prec = prec

    # -- queries ---------------------------------------------------------

    @property
    def is_exact_zero(self):
        return not self.digits and self.prec is INF

    @property
    def is_zeroish(self):
        """Indistinguishable from zero at the known precision."""
        return not self.digits

    def valuation(self):
        """Exact valuation; raises on elements indistinguishable from zero."""
        if self.digits:
            return self.val
        if self.prec is INF:
            return INF
        raise WindowOverflow("valuation unknown: element is 0 mod pi^%s" % self.prec)

    def val_at_least(self, bound):
        """True iff val(x) >= bound is certain; raises if undecidable."""
        if self.digits:
            return self.val >= bound
        if self.prec is INF or self.prec >= bound:
            return True
        raise WindowOverflow(f"cannot certify val >= {bound} at precision {self.prec}")

    def coeff(self, e):
        """Digit at exponent e (mixed mode: base-p digit)."""
        if self.prec is not INF and e >= self.prec:
            raise WindowOverflow(f"coefficient at {e} beyond precision {self.prec}")
        if not self.digits or e < self.val or e >= self.val + len(self.digits):
            return 0
        return self.digits[e - self.val]

    def truncate(self, prec):
        if prec > self.prec:
            raise WindowOverflow(f"cannot extend precision {self.prec} to {prec}")
        return W(self.ring, self.val if self.digits else 0, self.digits, prec)

    def lift_prec(self, prec):
        """Reinterpret an exact element at finite precision (for sampling)."""
        return W(self.ring, self.val if self.digits else 0, self.digits, min(self.prec, prec))

    def __repr__(self):
        if self.is_exact_zero:
            return "W(0)"
        body = " + ".join(f"{d}*t^{self.val + i}" for i, d in enumerate(self.digits) if d)
        if not body:
            body = "0"
        return f"W({body} mod t^{self.prec})"

    def __eq__(self, other):
        """Equality to the common precision (exact when both are exact)."""
        d = self - other
        if d.is_exact_zero:
            return True
        if d.digits:
            return False
        raise WindowOverflow("equality undecidable: difference is 0 mod pi^%s" % d.prec)

    def __hash__(self):
        raise TypeError("window scalars are not hashable")

    # -- arithmetic --------------------------------------------------------

    def _digit_add(self, a, b):
        F = self.ring.residue
        return F.add(a, b) if self.ring.mode == "equal" else None

    def __add__(self, other):
        if isinstance(other, int):
            other = self.ring.constant(other)
        ring = self.ring
        prec = min(self.prec, other.prec)
        if not self.digits:
            return other.truncate(prec)
        if not other.digits:
            return self.truncate(prec)
        lo = min(self.val, other.val)
        hi_self = self.val + len(self.digits)
        hi_other = other.val + len(other.digits)
        hi = max(hi_self, hi_other)
        if prec is not INF:
            hi = min(hi, prec)
        if ring.mode == "equal":
            F = ring.residue
            out = []
            for e in range(lo, hi):
                a = self.digits[e - self.val] if self.val <= e < hi_self else 0
                b = other.digits[e - other.val] if other.val <= e < hi_other else 0
                out.append(F.add(a, b))
            return W(ring, lo, out, prec)
        p = ring.residue.p
        ln = hi - lo
        ma = _mant(self, lo, ln, p)
        mb = _mant(other, lo, ln, p)
        return _from_mant(ring, lo, ma + mb, prec)

    def __radd__(self, other):
        return self.__add__(other)

    def __neg__(self):
        ring = self.ring
        if ring.mode == "equal":
            F = ring.residue
            return W(ring, self.val if self.digits else 0,
                     tuple(F.neg(d) for d in self.digits), self.prec)
        if not self.digits:
            return self
        # mixed mode: -x has an infinite p-adic expansion even for exact x,
        # so exact inputs are clamped to the working precision
        p = ring.residue.p
        prec = self.prec if self.prec is not INF else self.val + ring.work_prec
        ln = prec - self.val
        m = _mant(self, self.val, ln, p)
        return _from_mant(ring, self.val, (p**ln - m) % p**ln, prec)

    def __sub__(self, other):
        if isinstance(other, int):
            other = self.ring.constant(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            other = self.ring.constant(other)
        ring = self.ring
        if not self.digits or not other.digits:
            # product with something indistinguishable from zero
            if self.is_exact_zero or other.is_exact_zero:
                return ring.zero()
            a, b = (self, other) if not self.digits else (other, self)
            vb = b.val if b.digits else b.prec  # valuation of b, or a lower bound
            return W(ring, 0, (), a.prec + vb)
        prec = min(
            self.prec + other.val if self.prec is not INF else INF,
            other.prec + self.val if other.prec is not INF else INF,
        )
        val = self.val + other.val
        if ring.mode == "equal":
            F = ring.residue
            la, lb = self.digits, other.digits
            ln = len(la) + len(lb) - 1
            if prec is not INF:
                ln = min(ln, prec - val)
            out = [0] * ln
            for i, a in enumerate(la):
                if not a or i >= ln:
                    continue
                for j, b in enumerate(lb):
                    if i + j >= ln:
                        break
                    if b:
                        out[i + j] = F.add(out[i + j], F.mul(a, b))
            return W(ring, val, out, prec)
        p = ring.residue.p
        ma = _mant(self, self.val, len(self.digits), p)
        mb = _mant(other, other.val, len(other.digits), p)
        return _from_mant(ring, val, ma * mb, prec)

    def __rmul__(self, other):
        return self.__mul__(other)

    def inv(self, length=None):
        """Multiplicative inverse.

        The result carries the correct precision: relative precision is
        preserved, so an input known mod pi^p with valuation v yields an
        inverse known mod pi^{p - 2v}.  Exact inputs get ``length`` relative
        digits (default: the ring's working precision).
        """
        if not self.digits:
            raise WindowOverflow("cannot invert an element indistinguishable from zero")
        ring = self.ring
        # unit part u = x * t^{-val}, inverted to `length` relative digits
        if self.prec is not INF:
            length = self.prec - self.val
        elif length is None:
            length = ring.work_prec
        if ring.mode == "equal":
            F = ring.residue
            u = list(self.digits) + [0] * max(0, length - len(self.digits))
            u = u[:length]
            inv0 = F.inv(u[0])
            out = [inv0] + [0] * (length - 1)
            for e in range(1, length):
                s = 0
                for j in range(1, e + 1):
                    if j < len(u) and u[j]:
                        s = F.add(s, F.mul(u[j], out[e - j]))
                out[e] = F.neg(F.mul(inv0, s))
            new_prec = (self.prec - 2 * self.val) if self.prec is not INF else (-self.val + length)
            return W(ring, -self.val, out, new_prec)
        p = ring.residue.p
        m = _mant(self, self.val, length, p)
        minv = pow(m, -1, p**length)
        new_prec = (self.prec - 2 * self.val) if self.prec is not INF else (-self.val + length)
        return _from_mant(ring, -self.val, minv, new_prec)

    def __truediv__(self, other):
        if isinstance(other, int):
            other = self.ring.constant(other)
        return self * other.inv()

    def shift(self, k):
        """Multiplication by pi^k (exact)."""
        if not self.digits:
            return W(self.ring, 0, (), self.prec + k if self.prec is not INF else INF)
        return W(self.ring, self.val + k, self.digits, self.prec + k if self.prec is not INF else INF)

    def residue_code(self):
        """Reduction in F_q; requires integrality."""
        if not self.val_at_least(0):
            raise NotIntegral("negative valuation; no residue")
        return self.coeff(0)


def _mant(x, base_val, length, p):
    m = 0
    for i in range(length):
        e = base_val + i
        if x.val <= e < x.val + len(x.digits):
            m += x.digits[e - x.val] * p**i
    return m


def _from_mant(ring, val, mant, prec):
    p = ring.residue.p
    digits = []
    if prec is not INF:
        mant %= p ** max(0, prec - val)
    m = mant
    while m:
        digits.append(m % p)
        m //= p
    return W(ring, val, digits, prec)


class WMat:
    """Square matrix of window scalars."""

    __slots__ = ("ring", "n", "rows")

    def __init__(self, ring, rows):
        self.ring = ring
        self.rows = tuple(tuple(r) for r in rows)
        self.n = len(self.rows)

    def __repr__(self):
        return "WMat([\n  " + ",\n  ".join(str(list(r)) for r in self.rows) + "\n])"

    def __getitem__(self, ij):
        return self.rows[ij[0]][ij[1]]

    def __mul__(self, other):
        n = self.n
        ring = self.ring
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                s = ring.zero()
                for t in range(n):
                    a = self.rows[i][t]
                    b = other.rows[t][j]
                    if a.is_exact_zero or b.is_exact_zero:
                        continue
                    s = s + a * b
                row.append(s)
            out.append(row)
        return WMat(ring, out)

    def __add__(self, other):
        return WMat(self.ring, [[a + b for a, b in zip(r1, r2)]
                                for r1, r2 in zip(self.rows, other.rows)])

    def __sub__(self, other):
        return WMat(self.ring, [[a - b for a, b in zip(r1, r2)]
                                for r1, r2 in zip(self.rows, other.rows)])

    def scale(self, c):
        return WMat(self.ring, [[c * v for v in r] for r in self.rows])

    def det(self):
        n = self.n
        ring = self.ring
        m = [list(r) for r in self.rows]
        det = ring.one()
        sign = 1
        for col in range(n):
            piv, pv = None, None
            for r in range(col, n):
                x = m[r][col]
                if x.digits and (pv is None or x.val < pv):
                    piv, pv = r, x.val
            if piv is None:
                # column indistinguishable from zero: det only known to be deep
                floor = min(m[r][col].prec for r in range(col, n))
                if floor is INF:
                    return ring.zero()
                return W(ring, 0, (), floor) * det
            if piv != col:
                m[col], m[piv] = m[piv], m[col]
                sign = -sign
            det = det * m[col][col]
            inv = m[col][col].inv()
            for r in range(col + 1, n):
                if not m[r][col].is_exact_zero:
                    f = m[r][col] * inv
                    for c in range(col, n):
                        m[r][c] = m[r][c] - f * m[col][c]
        if sign < 0:
            det = -det
        return det

    def inv(self):
        n = self.n
        ring = self.ring
        m = [list(r) + [ring.one() if i == j else ring.zero() for j in range(n)]
             for i, r in enumerate(self.rows)]
        for col in range(n):
            piv, pv = None, None
            for r in range(col, n):
                x = m[r][col]
                if x.digits and (pv is None or x.val < pv):
                    piv, pv = r, x.val
            if piv is None:
                raise SingularMatrix("window matrix has no usable pivot")
            if piv != col:
                m[col], m[piv] = m[piv], m[col]
            inv = m[col][col].inv()
            m[col] = [inv * v for v in m[col]]
            for r in range(n):
                if r != col and not m[r][col].is_exact_zero:
                    f = m[r][col]
                    m[r] = [m[r][c] - f * m[col][c] for c in range(2 * n)]
        return WMat(ring, [row[n:] for row in m])

    def trace(self):
        s = self.ring.zero()
        for i in range(self.n):
            s = s + self.rows[i][i]
        return s

    def is_integral(self):
        return all(v.val_at_least(0) for r in self.rows for v in r)

    def reduce_mod_p(self, field=None):
        """Reduction in GL_n(F_q) (entries at t^0); raises NotIntegral."""
        field = field or self.ring.residue
        return Mat(field, [[v.residue_code() for v in r] for r in self.rows])

    def det_valuation(self):
        return self.det().valuation()

    def transpose(self):
        return WMat(self.ring, list(zip(*self.rows)))


def wmat_identity(ring, n):
    return WMat(ring, [[ring.one() if i == j else ring.zero() for j in range(n)]
                       for i in range(n)])


def wmat_diag_powers(ring, exps):
    n = len(exps)
    return WMat(ring, [[ring.uniformizer(exps[i]) if i == j else ring.zero()
                        for j in range(n)] for i in range(n)])


def lift_residue_matrix(ring, mat):
    """Exact constant lift of a matrix over the residue field."""
    return WMat(ring, [[ring.constant(v) for v in row] for row in mat.rows])


def window_policy(n, m):
    """(pole bound B, absolute precision N) defaults for parameters (n, m)."""
    B = (n - 1) * (m + 1)
    N = 2 * n * (m + 1) + B
    return B, N
