"""The depth-zero engine: conductors, oldforms, newform vectors, coefficients.

A depth-zero representation is modeled by its inducing data: a cuspidal row
tau of the character table of GL_n(F_q) together with a central-character
extension (the free unramified parameter omega(pi_unif) and omega_tau on
units) and a choice of additive character.  Everything downstream -- Mackey
sums, the Bessel-vector average, matrix coefficients, Whittaker newforms --
is computed exactly over F_{l'}.

Value functions on GL_n(F_q) are tuples indexed by the group enumeration.
"""

import random
from dataclasses import dataclass
from math import comb

from .bessel import (
    AdditiveCharacter,
    bessel_bop_average,
    bessel_from_character,
    bop_elements,
    unipotent_upper_elements,
)
from .chartable import invariant_dim, unipotent_radical_elements
from .cosets import (
    Truncation,
    diagonal_reduction_pattern,
    enumerate_family,
    family_d_size,
    reduction_image,
    sigma_transversal,
    support_membership,
)
from .errors import NotInSupport, VerificationFailure, WindowOverflow
from .fq import Mat, identity, scalar_mat
from .localring import WMat, lift_residue_matrix, wmat_diag_powers
from .patterns import sigma


class DepthZeroRep:
    """Cuspidal type (K_n, tau) with central extension and psi choice."""

    def __init__(self, table, row, ring, omega_unif=1, psi_c=1):
        if table.classes.group.n < 2:
            raise VerificationFailure("depth-zero engine requires n >= 2")
        if not table.cuspidal[row]:
            raise VerificationFailure(f"row {row} is not cuspidal")
        self.table = table
        self.row = row
        self.ring = ring
        self.group = table.classes.group
        self.n = self.group.n
        self.comp = table.comp
        self.omega_unif = omega_unif % self.comp.lprime
        self.psi = AdditiveCharacter(self.group.field, self.comp, psi_c)
        self.omega_units = table.central_character(row)
        self._bessel = None
        self._v0 = None
        self._dual = None
        self._transversal = None

    @property
    def bessel(self):
        if self._bessel is None:
            self._bessel = bessel_from_character(self.table, self.row, self.psi)
        return self._bessel

    @property
    def newform_value(self):
        """V0 = sum_{b in B^op} b . B, the value of f_new at Sigma_n."""
        if self._v0 is None:
            self._v0 = bessel_bop_average(self.bessel)
        return self._v0

    def dual(self):
        """Contragredient datum: tau-vee, psibar^{-1}, omega(pi_unif)^{-1}."""
        if self._dual is None:
            row_d = self.table.contragredient_row(self.row)
            self._dual = DepthZeroRep(
                self.table, row_d, self.ring,
                omega_unif=pow(self.omega_unif, -1, self.comp.lprime),
                psi_c=self.group.field.neg(self.psi.c))
        return self._dual

    def transversal(self):
        """y_1, ..., y_r with y_1 = 1 for (K(n) cap K^Sigma) \\ K(n)."""
        if self._transversal is None:
            ys = sigma_transversal(self.ring, self.n, self.n)
            ident = [i for i, y in enumerate(ys)
                     if all((y.rows[a][b] - (self.ring.one() if a == b else self.ring.zero())).is_zeroish
                            for a in range(self.n) for b in range(self.n))]
            if ident:
                ys.insert(0, ys.pop(ident[0]))
            self._transversal = ys
        return self._transversal

    def omega_z(self, v, unit_code=1):
        """omega_pi(pi_unif^v * unit)."""
        lp = self.comp.lprime
        out = pow(self.omega_unif, v, lp) if v >= 0 else pow(pow(self.omega_unif, -1, lp), -v, lp)
        if unit_code != 1:
            out = (out * self.omega_units[unit_code]) % lp
        return out


# -- Mackey sums: conductor and oldforms ---------------------------------------


def mackey_contribution(rep, dz, m):
    """dim Hom over the reduction image of K_n cap g K_n(m) g^{-1}.

    Diagonal reps get the exact invariant dimension of tau over the pattern
    image; non-diagonal reps are certified to contain a unipotent radical,
    which kills invariants by cuspidality.
    """
    kind, elems, block = reduction_image(rep, dz.ring, m, dz.group.field)
    if kind == "group":
        return invariant_dim(dz.row, dz.table, elems, check_closure=False)
    i, j = block
    rad = unipotent_radical_elements(dz.group.field, dz.n, i)
    if invariant_dim(dz.row, dz.table, rad, check_closure=False) != 0:
        raise VerificationFailure(f"cuspidal row has N_{{{i},{j}}}-invariants")
    return 0


def _diag_tail_certificate(dz, m, alpha_max):
    """All diagonal cosets with a_{n-1} > alpha_max vanish.

    For a_{n-1} >= m the image pattern frees the whole first column below
    the diagonal, so it contains N_{1,n-1}; verified here on sample exponents
    (the bound formula is uniform in alpha).
    """
    n = dz.n
    field = dz.group.field
    rad = unipotent_radical_elements(field, n, 1)
    if invariant_dim(dz.row, dz.table, rad, check_closure=False) != 0:
        raise VerificationFailure("cuspidal row has N_{1,n-1}-invariants")
    for bump in (1, 3):
        base = [min(a, alpha_max) for a in range(n - 1)]
        alpha = tuple(sorted(base[:-1] + [alpha_max + bump]))
        pat = diagonal_reduction_pattern(dz.ring, n, m, alpha)
        elems = set(pat.reduction_elements(field))
        for r in rad:
            if r not in elems:
                raise VerificationFailure("tail pattern does not contain N_{1,n-1}")
    return True


def oldform_dimension(dz, m, trunc=None, deep_samples=6, seed=0):
    """dim pi^{K_n(m)} as the Mackey sum over all representative families.

    The strictly-increasing diagonals below m each contribute 1; every other
    family member is verified to contribute 0 (exactly for diagonals, by
    unipotent-radical certificates otherwise).  Streams are truncated by
    ``trunc``; the diagonal tail carries a uniform certificate and the
    residue/alpha tails of C and A2B are spot-checked on ``deep_samples``
    seeded deep parameters.
    """
    n = dz.n
    if m == 0:
        full = invariant_dim(dz.row, dz.table, list(dz.group.mats), check_closure=False)
        if full != 0:
            raise VerificationFailure("cuspidal row invariant under all of GL_n")
        return 0
    if trunc is None:
        trunc = Truncation(alpha_max=m + 1, residue_level=min(m, 2))
    total = 0
    strict = 0
    for rep in enumerate_family(dz.ring, "B", n, m, trunc):
        c = mackey_contribution(rep, dz, m)
        alpha = rep.alpha
        is_strict = (all(alpha[i] < alpha[i + 1] for i in range(n - 2))
                     and alpha[0] >= 1 and alpha[-1] < m)
        if c != (1 if is_strict else 0):
            raise VerificationFailure(
                f"diagonal coset {alpha} contributed {c} (expected {int(is_strict)})")
        total += c
        strict += is_strict
    for tag in ("C", "A2B"):
        for rep in enumerate_family(dz.ring, tag, n, m, trunc):
            c = mackey_contribution(rep, dz, m)
            if c != 0:
                raise VerificationFailure(f"{tag} coset contributed {c} != 0")
    _diag_tail_certificate(dz, m, trunc.alpha_max if trunc.alpha_max is not None else m)
    _deep_family_samples(dz, m, trunc, deep_samples, seed)
    expected = family_d_size(n, m)
    if total != expected or strict != expected:
        raise VerificationFailure(
            f"Mackey sum {total} != |D_n({m})| = {expected} at n={n}")
    return total


def _deep_family_samples(dz, m, trunc, count, seed):
    """Certify witness vanishing at random parameters beyond the truncation."""
    if count <= 0:
        return
    rng = random.Random(seed)
    n = dz.n
    deep = Truncation(alpha_max=(trunc.alpha_max or m) + 3, residue_level=None)
    for tag in ("C", "A2B"):
        pool = []
        for rep in enumerate_family(dz.ring, tag, n, m, deep):
            shallow_alpha = trunc.alpha_max is None or max(rep.alpha) <= trunc.alpha_max
            lev = trunc.level(m)
            shallow_res = all(c < dz.group.field.q ** lev for c in rep.residues)
            if not (shallow_alpha and shallow_res):
                pool.append(rep)
            if len(pool) >= 4000:
                break
        rng.shuffle(pool)
        for rep in pool[:count]:
            if mackey_contribution(rep, dz, m) != 0:
                raise VerificationFailure(f"deep {tag} sample contributed nonzero")


def conductor_depth_zero(dz, trunc=None):
    """c(pi) = n: the Mackey sum vanishes for m < n and is 1 at m = n."""
    n = dz.n
    for m in range(1, n):
        d = oldform_dimension(dz, m, trunc)
        if d != 0:
            raise VerificationFailure(f"dim pi^K({m}) = {d} != 0 below the conductor")
    if oldform_dimension(dz, n, trunc) != 1:
        raise VerificationFailure("newform space is not one-dimensional")
    # Bushnell's formula at depth zero: c = n (1 + d(pi)) with d(pi) = 0
    if n != n * (1 + 0):
        raise VerificationFailure("conductor inconsistent with n(1 + depth)")
    return n


# -- the newform vector ----------------------------------------------------------


@dataclass
class InducedVector:
    """Finite-support vector in the compactly induced model.

    ``support`` lists (transversal index, value function on GL_n(F_q)); the
    vector transforms by omega_pi tau under Z_n K_n on the left.
    """
    rep: DepthZeroRep
    support: list


def newform_vector(dz):
    """f_new as an InducedVector: value V0 on every coset Sigma_n y_i."""
    v0 = dz.newform_value
    return InducedVector(dz, [(i, v0) for i in range(len(dz.transversal()))])


def _translated_value(dz, v, kbar, scale):
    """x |-> scale * sum_b B(x kbar b), as a value tuple."""
    g = dz.group
    lp = dz.comp.lprime
    B = dz.bessel
    bops = bop_elements(g.field, g.n)
    shifted = [kbar * b for b in bops]
    out = []
    for x in g.mats:
        s = 0
        for kb in shifted:
            s += B.value(x * kb)
        out.append((scale * s) % lp)
    return tuple(out)


def newform_eval(dz, g):
    """Value function of f_new at a window matrix g (zero off the support)."""
    n = dz.n
    try:
        v, k, y = support_membership(dz.ring, g, n, n, dz.transversal())
    except NotInSupport:
        return None
    kbar = k.reduce_mod_p(dz.group.field)
    return _translated_value(dz, dz.newform_value, kbar, dz.omega_z(v))


def _zk_part(dz, w):
    """(v, kbar) with w = pi^v k in Z_n K_n, or None."""
    try:
        dv = w.det().valuation()
    except WindowOverflow:
        return None
    if dv is None or dv % dz.n != 0:
        return None
    v = dv // dz.n
    k = WMat(dz.ring, [[x.shift(-v) for x in row] for row in w.rows])
    if not k.is_integral():
        return None
    kbar = k.reduce_mod_p(dz.group.field)
    if kbar.det() == 0:
        return None
    return v, kbar


def newform_integral_eval(dz, g):
    """f_new(g) = integral over K_n(n) of the translated Bessel vector.

    Realized as the finite sum over the transversal y_i of the averages over
    Sigma K_n(n) Sigma^{-1} cap K_n, whose reduction is B^op_{n-1}; the Haar
    measure gives Sigma K(n)^{Sigma^{-1}} cap K^1 volume 1.
    """
    n = dz.n
    ring = dz.ring
    sig = sigma(ring, n)
    total = None
    lp = dz.comp.lprime
    for y in dz.transversal():
        w = g * (sig * y).inv()
        zk = _zk_part(dz, w)
        if zk is None:
            continue
        v, kbar = zk
        term = _translated_value(dz, dz.newform_value, kbar, dz.omega_z(v))
        if total is None:
            total = list(term)
        else:
            total = [(a + b) % lp for a, b in zip(total, term)]
    if total is None:
        return None
    return tuple(total)


# -- matrix coefficients ----------------------------------------------------------


def whittaker_pairing(dz, w1, w2):
    """<W, W'> = |U|^{-1} sum_{g} W(g) W'(g) over GL_n(F_q)."""
    lp = dz.comp.lprime
    u = len(unipotent_upper_elements(dz.group.field, dz.n))
    s = sum(a * b for a, b in zip(w1, w2)) % lp
    return (s * pow(u, -1, lp)) % lp


def _pairing_by_kbar(dz):
    """Cache of <x |-> sum_b B(x kbar b), V0-vee> for every kbar in GL_n(F_q)."""
    if getattr(dz, "_pair_cache", None) is None:
        dual = dz.dual()
        v0_dual = dual.newform_value
        g = dz.group
        cache = []
        for idx in range(g.order):
            kbar = g.mats[idx]
            val = _translated_value(dz, dz.newform_value, kbar, 1)
            cache.append(whittaker_pairing(dz, val, v0_dual))
        dz._pair_cache = cache
    return dz._pair_cache


def matrix_coeff_direct(dz, g):
    """c_{f_new, f_new-vee}(g) by the bilinear pairing over the support cosets."""
    ring = dz.ring
    sig = sigma(ring, dz.n)
    lp = dz.comp.lprime
    cache = _pairing_by_kbar(dz)
    ys = dz.transversal()
    total = 0
    for y in ys:
        try:
            v, k, _ = support_membership(ring, sig * y * g, dz.n, dz.n, ys)
        except NotInSupport:
            continue
        kbar_idx = dz.group.index[k.reduce_mod_p(dz.group.field)]
        total = (total + dz.omega_z(v) * cache[kbar_idx]) % lp
    return total


def matrix_coeff_formula(dz, g):
    """The closed double-sum formula on the support of the coefficient.

    c(g) = sum over (i, j) with g in y_j^{-1} Z_n K_n^{Sigma} y_i of
    |G|/(|U| dim tau) * sum_{b, b'} Btilde(b Sigma y_j g y_i^{-1} Sigma^{-1} b').
    """
    ring = dz.ring
    n = dz.n
    lp = dz.comp.lprime
    sig = sigma(ring, n)
    siginv = sig.inv()
    ys = dz.transversal()
    bops = [lift_residue_matrix(ring, b) for b in bop_elements(dz.group.field, n)]
    bops_bar = bop_elements(dz.group.field, n)
    dimtau = dz.table.degrees[dz.row]
    const = (dz.group.order * pow(len(unipotent_upper_elements(dz.group.field, n)) * dimtau,
                                  -1, lp)) % lp
    B = dz.bessel
    total = 0
    for i, yi in enumerate(ys):
        yi_inv = yi.inv()
        for j, yj in enumerate(ys):
            w = sig * yj * g * yi_inv * siginv
            zk = _zk_part(dz, w)
            if zk is None:
                continue
            v, kbar = zk
            s = 0
            for b in bops_bar:
                bk = b * kbar
                for b2 in bops_bar:
                    s += B.value(bk * b2)
            total = (total + const * dz.omega_z(v) * s) % lp
    return total


# -- Whittaker newform -------------------------------------------------------------


def iwasawa_utk(ring, g):
    """g = u d k with u upper unitriangular, d = diag(pi^{a_i}), k in K_n.

    Returns (a, u, k) or raises NotInSupport when no pivot is available.
    """
    n = g.n
    work = [list(r) for r in g.rows]
    L = wmat_identity_rows(ring, n)
    for r in range(n - 1, -1, -1):
        piv, pv = None, None
        for c in range(n):
            x = work[r][c]
            if x.digits and (pv is None or x.val < pv):
                piv, pv = c, x.val
        if piv is None:
            raise NotInSupport("no pivot in Iwasawa reduction")
        pivot = work[r][piv]
        for i in range(r):
            x = work[i][piv]
            if x.is_zeroish:
                continue
            f = x * pivot.inv()
            for c in range(n):
                work[i][c] = work[i][c] - f * work[r][c]
            for c in range(n):
                L[i][c] = L[i][c] - f * L[r][c]
        # clear other columns of row r by K-side ops (implicitly: row r now has
        # minimal-valuation pivot; integrality of k is checked at the end)
    A = WMat(ring, work)   # A = L g with L in U_n
    # torus part: row r has gcd-valuation = min val of the row
    vals = []
    for r in range(n):
        vr = min((x.val for x in work[r] if x.digits), default=None)
        if vr is None:
            raise NotInSupport("zero row in Iwasawa reduction")
        vals.append(vr)
    dinv = wmat_diag_powers(ring, [-v for v in vals])
    k = dinv * A
    if not k.is_integral():
        raise NotInSupport("Iwasawa k-part not integral")
    det = k.det()
    if not (det.digits and det.val == 0):
        raise NotInSupport("Iwasawa k-part not invertible")
    Lm = WMat(ring, L)
    u = Lm.inv()
    return vals, u, k


def wmat_identity_rows(ring, n):
    return [[ring.one() if i == j else ring.zero() for j in range(n)] for i in range(n)]


def gelfand_whittaker(dz, w):
    """W_{Gel, psi'}(w) for psi' of conductor p: omega(z) psi'(u) B(kbar).

    Support Z_n U_n K_n; zero is returned off it.
    """
    try:
        vals, u, k = iwasawa_utk(dz.ring, w)
    except NotInSupport:
        return 0
    if len(set(vals)) != 1:
        return 0
    v = vals[0]
    lp = dz.comp.lprime
    # psi'(u) with conductor p: digit at t^0 of the superdiagonal sum
    F = dz.group.field
    s = 0
    try:
        for i in range(dz.n - 1):
            s = F.add(s, u.rows[i][i + 1].coeff(0))
    except WindowOverflow:
        raise
    psi_u = dz.psi(s)
    return (dz.omega_z(v) * psi_u * dz.bessel.value(k.reduce_mod_p(F))) % lp


def _principal_unitriangulars(ring, n, depth):
    """Transversal of (U_n cap K_n) \\ {u in U_n : val(u_ij) >= -depth}.

    Each strictly-upper entry runs over pure principal parts (digits at
    exponents -depth .. -1); left multiplication by integral unitriangulars
    reduces any u to exactly one such representative.
    """
    q = ring.residue.q
    positions = [(i, j) for i in range(n) for j in range(i + 1, n)]
    span = depth * len(positions)
    for code in range(q**span):
        rows = [[ring.one() if i == j else ring.zero() for j in range(n)] for i in range(n)]
        cc = code
        for (i, j) in positions:
            digits = []
            for _ in range(depth):
                digits.append(cc % q)
                cc //= q
            rows[i][j] = ring.from_digits(-depth, digits + [0])
        yield WMat(ring, rows)


def whittaker_newform_expr1(dz, g, support_depth=None):
    """U_n-integral of the matrix coefficient against psi^{-1}.

    The integrand u |-> psi^{-1}(u) c_{f_new, f_new-vee}(u g) is constant on
    left (U_n cap K_n(n))-cosets (c is left-K_n(n)-invariant and psi of
    conductor o is trivial on integral superdiagonals), and its support is
    contained in entries of valuation >= -2(n-1); the sum runs over the
    principal-part coset transversal in that window.  The measure constant
    is dropped -- it cancels in the identity normalization.
    """
    ring = dz.ring
    n = dz.n
    lp = dz.comp.lprime
    if support_depth is None:
        support_depth = 2 * (n - 1)
    comp = dz.comp
    total = 0
    for u in _principal_unitriangulars(ring, n, support_depth):
        c = matrix_coeff_direct(dz, u * g)
        if c:
            s = ring.zero()
            for i in range(n - 1):
                s = s + u.rows[i][i + 1]
            psi_val = ring_psi_level0_inverse(dz, s)
            total = (total + psi_val * c) % lp
    return total


def ring_psi_level0_inverse(dz, x):
    """psi^{-1}(x) for the conductor-o character derived from dz.psi.

    psi(x) = psibar(digit of x at t^{-1}); the inverse character flips the
    sign of the residue argument.
    """
    c = x.coeff(-1)
    return dz.psi.inverse()(c)


def whittaker_newform_expr2(dz, g):
    """Average of the Gelfand function: sum over y_i and B^op lifts."""
    ring = dz.ring
    n = dz.n
    lp = dz.comp.lprime
    sig = sigma(ring, n)
    siginv = sig.inv()
    total = 0
    for y in dz.transversal():
        w = sig * g * y.inv() * siginv
        for x in bop_elements(dz.group.field, n):
            total = (total + gelfand_whittaker(dz, w * lift_residue_matrix(ring, x))) % lp
    return total


def whittaker_newform(dz, g, method="both"):
    """The normalized Whittaker newform W(g), W(1) = 1.

    With method="both" the two integral expressions are computed and
    compared (VerificationFailure on disagreement).
    """
    from .localring import wmat_identity
    lp = dz.comp.lprime
    one = wmat_identity(dz.ring, dz.n)
    n1 = whittaker_newform_expr1(dz, one)
    n2 = whittaker_newform_expr2(dz, one)
    if n1 == 0 or n2 == 0:
        raise VerificationFailure("Whittaker newform vanishes at the identity")
    v1 = (whittaker_newform_expr1(dz, g) * pow(n1, -1, lp)) % lp
    if method == "expr1":
        return v1
    v2 = (whittaker_newform_expr2(dz, g) * pow(n2, -1, lp)) % lp
    if method == "expr2":
        return v2
    if v1 != v2:
        raise VerificationFailure(f"Whittaker expressions disagree: {v1} != {v2}")
    return v1
