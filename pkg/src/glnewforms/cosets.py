"""Double-coset representative families and their Mackey-theoretic images.

Representatives for K_n Z_n \\ G_n / K_n(m) come in the families

  A1, A2 : coset representatives for K_n / K_n(m) (unit last coordinate /
           first unit in position j);
  B      : diagonal pi-power matrices diag(pi^{a_{n-1}}, ..., pi^{a_1}, 1)
           with non-decreasing exponents (Cartan);
  C      : B-diagonal with an extra last row (v_{n-1}, ..., v_1, 1), each
           v_i = 0 or val(v_i) < a_i;
  A2B    : products (B element) * (A2 element);
  D      : the strictly-increasing diagonals 0 < a_1 < ... < a_{n-1} < m.

For diagonal representatives the reduction image of K_n cap g K_n(m) g^{-1}
in GL_n(F_q) is an exact pattern subgroup computed by entrywise valuation
arithmetic.  For non-diagonal representatives the image is only certified to
contain a full unipotent radical N_{i,j}(F_q): explicit witness matrices
X(a, b, c) / X(a, b, c, d) / Y(a, b, c, d) in K_n(m) are constructed, their
conjugates recomputed in window arithmetic, and the reductions collected;
that containment forces the vanishing of invariants for cuspidal rows.
"""

from dataclasses import dataclass, field as dc_field
from itertools import product as iproduct

from .errors import NotInSupport, PartitionFailure, UnknownFamily, WitnessConjugationFailure
from .fq import Mat
from .localring import WMat, wmat_diag_powers, wmat_identity
from .patterns import (
    conductor_subgroup,
    conjugate_pattern,
    full_k,
    pattern_intersect,
    pattern_transversal,
    sigma,
)


# -- residues o/p^m as int codes ----------------------------------------------


class ResidueRing:
    """o/p^m with elements coded as integers in [0, q^m).

    Equal characteristic: base-q digit vectors (polynomial arithmetic);
    mixed: plain integers mod p^m.
    """

    def __init__(self, ring, m):
        self.ring = ring
        self.field = ring.residue
        self.m = m
        self.size = self.field.q ** m

    def _digits(self, code):
        q = self.field.q
        return [code // q**i % q for i in range(self.m)]

    def _encode(self, digits):
        q = self.field.q
        return sum(d * q**i for i, d in enumerate(digits))

    def neg(self, a):
        if self.ring.mode == "mixed":
            return (-a) % self.size
        F = self.field
        return self._encode([F.neg(d) for d in self._digits(a)])

    def mul(self, a, b):
        if self.ring.mode == "mixed":
            return (a * b) % self.size
        F = self.field
        da, db = self._digits(a), self._digits(b)
        out = [0] * self.m
        for i, x in enumerate(da):
            if not x:
                continue
            for j, y in enumerate(db):
                if i + j >= self.m:
                    break
                if y:
                    out[i + j] = F.add(out[i + j], F.mul(x, y))
        return self._encode(out)

    def inv(self, a):
        if not self.is_unit(a):
            raise ZeroDivisionError("not a unit in o/p^m")
        if self.ring.mode == "mixed":
            return pow(a, -1, self.size)
        F = self.field
        da = self._digits(a)
        out = [F.inv(da[0])] + [0] * (self.m - 1)
        for e in range(1, self.m):
            s = 0
            for j in range(1, e + 1):
                if da[j]:
                    s = F.add(s, F.mul(da[j], out[e - j]))
            out[e] = F.neg(F.mul(out[0], s))
        return self._encode(out)

    def is_unit(self, a):
        return (a % self.field.p if self.ring.mode == "mixed" else a % self.field.q) != 0

    def val(self, a):
        """Valuation in [0, m], with m meaning the zero residue."""
        if a == 0:
            return self.m
        if self.ring.mode == "mixed":
            v = 0
            while a % self.field.p == 0:
                a //= self.field.p
                v += 1
            return v
        d = self._digits(a)
        return next(i for i, x in enumerate(d) if x)

    def units(self):
        return (a for a in range(self.size) if self.is_unit(a))

    def mul_table_by(self, c):
        """Array t with t[a] = c * a, for bulk target computations."""
        return [self.mul(c, a) for a in range(self.size)]

    def lift(self, a, exact=True):
        """Exact window-scalar lift of the residue (digit lift)."""
        if self.ring.mode == "mixed":
            digits = []
            x = a
            while x:
                digits.append(x % self.field.p)
                x //= self.field.p
            return self.ring.from_digits(0, digits)
        return self.ring.from_digits(0, self._digits(a))


# -- family enumeration --------------------------------------------------------


@dataclass(frozen=True)
class CosetRep:
    family: str
    n: int
    alpha: tuple = ()          # (a_1, ..., a_{n-1}) non-decreasing
    residues: tuple = ()       # family-specific residue codes
    j: int = 0                 # A2 / C position parameter when relevant
    matrix: WMat = dc_field(default=None, compare=False)


@dataclass(frozen=True)
class Truncation:
    """Caps for infinite family streams.

    alpha_max bounds the largest diagonal exponent; residue_level caps the
    depth m' <= m at which residues are enumerated (full depth when None).
    """
    alpha_max: int = None
    residue_level: int = None

    def level(self, m):
        return m if self.residue_level is None else min(m, self.residue_level)


def _alpha_tuples(n, lo_strict, alpha_max, strict=False):
    """Non-decreasing (or strictly increasing) (a_1, .., a_{n-1}) in [lo, max]."""
    def gen(prefix, start):
        if len(prefix) == n - 1:
            yield tuple(prefix)
            return
        for a in range(start, alpha_max + 1):
            yield from gen(prefix + [a], a + 1 if strict else a)
    return gen([], lo_strict)


def _diag_matrix(ring, n, alpha):
    # realized as diag(pi^{a_{n-1}}, ..., pi^{a_1}, 1)
    return wmat_diag_powers(ring, [alpha[n - 2 - i] for i in range(n - 1)] + [0])


def realize_a1(ring, n, res, v_codes, x_code):
    rows = [[ring.one() if i == j else ring.zero() for j in range(n)] for i in range(n - 1)]
    last = [res.lift(c) for c in v_codes] + [res.lift(x_code)]
    return WMat(ring, rows + [last])


def realize_a2(ring, n, res, j, w1, w2, w3, x_code):
    rows = [[ring.zero() for _ in range(n)] for _ in range(n)]
    for i in range(n - j - 1):
        rows[i][i] = ring.one()
    r = n - j - 1  # the w-row, 0-indexed
    for t, c in enumerate(w1):
        rows[r][t] = res.lift(c)
    rows[r][n - j - 1] = res.lift(w2)
    for t, c in enumerate(w3):
        rows[r][n - j + t] = res.lift(c)
    rows[r][n - 1] = res.lift(x_code)
    for t in range(j - 1):
        rows[n - j + t][n - j + t] = ring.one()
    rows[n - 1][n - j - 1] = ring.one()
    return WMat(ring, rows)


def realize_c(ring, n, res, alpha, v_codes):
    mat = _diag_matrix(ring, n, alpha)
    rows = [list(r) for r in mat.rows]
    for t, c in enumerate(v_codes):      # columns 0..n-2 hold v_{n-1}, ..., v_1
        if c:
            rows[n - 1][t] = res.lift(c)
    return WMat(ring, rows)


def enumerate_family(ring, tag, n, m, trunc=Truncation()):
    """Stream of CosetRep in deterministic lexicographic order."""
    if tag not in ("A1", "A2", "B", "C", "D", "A2B"):
        raise UnknownFamily(tag)
    lev = trunc.level(m)
    res = ResidueRing(ring, lev)
    amax = trunc.alpha_max if trunc.alpha_max is not None else m

    if tag == "A1":
        for v in iproduct(range(res.size), repeat=n - 1):
            for x in res.units():
                yield CosetRep("A1", n, residues=v + (x,),
                               matrix=realize_a1(ring, n, res, v, x))
        return

    if tag == "A2":
        for j in range(1, n):
            w1_iter = iproduct(range(res.size), repeat=n - j - 1)
            for w1 in w1_iter:
                for w2 in range(res.size):
                    if res.is_unit(w2):
                        continue
                    for w3 in iproduct([c for c in range(res.size) if not res.is_unit(c)],
                                       repeat=j - 1):
                        for x in res.units():
                            yield CosetRep("A2", n, j=j, residues=w1 + (w2,) + w3 + (x,),
                                           matrix=realize_a2(ring, n, res, j, w1, w2, w3, x))
        return

    if tag == "B":
        for alpha in _alpha_tuples(n, 0, amax):
            yield CosetRep("B", n, alpha=alpha, matrix=_diag_matrix(ring, n, alpha))
        return

    if tag == "D":
        for alpha in _alpha_tuples(n, 1, m - 1, strict=True):
            yield CosetRep("D", n, alpha=alpha, matrix=_diag_matrix(ring, n, alpha))
        return

    if tag == "C":
        for alpha in _alpha_tuples(n, 0, amax):
            # v_i = 0 or val(v_i) < a_i; enumerated over o/p^lev codes
            choices = []
            for i in range(1, n):  # v_i for i = 1..n-1
                ai = alpha[i - 1]
                ok = [0] + [c for c in range(1, res.size) if res.val(c) < min(ai, lev)]
                choices.append(ok)
            # column order of v in the matrix is v_{n-1}, ..., v_1
            for v_rev in iproduct(*reversed(choices)):
                if not any(v_rev):
                    continue  # diagonal reps belong to family B
                yield CosetRep("C", n, alpha=alpha, residues=v_rev,
                               matrix=realize_c(ring, n, res, alpha, v_rev))
        return

    # A2B: products diag(alpha) * a2
    for alpha in _alpha_tuples(n, 0, amax):
        d = _diag_matrix(ring, n, alpha)
        for rep in enumerate_family(ring, "A2", n, m, trunc):
            yield CosetRep("A2B", n, alpha=alpha, j=rep.j, residues=rep.residues,
                           matrix=d * rep.matrix)


def family_d_size(n, m):
    """|D_n(m)| = binom(m-1, n-1) (0 for m < n)."""
    from math import comb
    if m < 1:
        return 0
    return comb(m - 1, n - 1)


# -- K_n / K_n(m) partition check ---------------------------------------------


def _target_a1(res, v, x):
    """(0,...,0,1) * A^{-1} for the A1 matrix with parameters (v, x)."""
    c = res.neg(res.inv(x))
    return tuple(res.mul(c, vi) for vi in v) + (res.inv(x),)


def _target_a2(res, n, j, w1, w2, w3, x):
    c = res.neg(res.inv(x))
    return (tuple(res.mul(c, w) for w in w1) + (res.inv(x),)
            + tuple(res.mul(c, w) for w in w3) + (res.mul(c, w2),))


def verify_coset_partition(ring, n, m, spot_checks=20, seed=0):
    """A1 u A2 hits each last-row orbit vector exactly once.

    K_n acts on row vectors over o/p^m; K_n(m) is the stabilizer of
    (0, ..., 0, 1), so coset representatives biject with the orbit = vectors
    with at least one unit coordinate.  Targets are computed by closed
    formulas from the parameters; a seeded sample is cross-checked against
    window-matrix inversion.
    """
    import random
    res = ResidueRing(ring, m)
    q = ring.residue.q
    total_codes = res.size ** n
    hit = bytearray(total_codes)
    count = 0
    rng = random.Random(seed)
    checked = 0

    def mark(vec, build_matrix):
        nonlocal count, checked
        code = 0
        for coord in reversed(vec):
            code = code * res.size + coord
        if hit[code]:
            raise PartitionFailure(f"vector {vec} hit twice")
        hit[code] = 1
        count += 1
        if checked < spot_checks and rng.random() < 0.05:
            checked += 1
            inv = build_matrix().inv()
            got = []
            for jj in range(n):
                x = inv.rows[n - 1][jj]
                got.append(res._encode([x.coeff(e) for e in range(m)]))
            if tuple(got) != tuple(vec):
                raise PartitionFailure(
                    f"closed-form target {vec} disagrees with matrix inverse {got}")

    # family A1, grouped by the unit x so multiplication by -x^{-1} is one table
    for x in res.units():
        xinv = res.inv(x)
        table = res.mul_table_by(res.neg(xinv))
        for v in iproduct(range(res.size), repeat=n - 1):
            vec = tuple(table[vi] for vi in v) + (xinv,)
            mark(vec, lambda v=v, x=x: realize_a1(ring, n, res, v, x))

    nonunits = [c for c in range(res.size) if not res.is_unit(c)]
    for j in range(1, n):
        for x in res.units():
            xinv = res.inv(x)
            table = res.mul_table_by(res.neg(xinv))
            for w1 in iproduct(range(res.size), repeat=n - j - 1):
                for w2 in nonunits:
                    for w3 in iproduct(nonunits, repeat=j - 1):
                        vec = (tuple(table[w] for w in w1) + (xinv,)
                               + tuple(table[w] for w in w3) + (table[w2],))
                        mark(vec, lambda j=j, w1=w1, w2=w2, w3=w3, x=x:
                             realize_a2(ring, n, res, j, w1, w2, w3, x))

    nonunit_count = len(nonunits)
    expected = total_codes - nonunit_count ** n
    if count != expected:
        raise PartitionFailure(f"covered {count} vectors, orbit has {expected}")
    for code in range(total_codes):
        cc = code
        has_unit = False
        for _ in range(n):
            if res.is_unit(cc % res.size):
                has_unit = True
                break
            cc //= res.size
        if has_unit != bool(hit[code]):
            raise PartitionFailure(f"orbit/coverage mismatch at code {code}")
    return {"n": n, "q": q, "m": m, "cosets": count, "spot_checks": checked}


# -- reduction images and vanishing certificates --------------------------------


def diagonal_reduction_pattern(ring, n, m, alpha):
    """Pattern of the image of K_n cap g K_n(m) g^{-1}, g = diag(alpha-powers)."""
    g = _diag_matrix(ring, n, alpha)
    return pattern_intersect(full_k(ring, n), conjugate_pattern(conductor_subgroup(ring, n, m), g))


def reduction_image(rep, ring, m, fq_field):
    """Explicit image data for Mackey contributions, as (kind, elements, block).

    Diagonal families (B, D): ("group", exact element list, None).
    Non-diagonal C and A2B: ("contains", certified reductions, (i, j)) --
    the reductions generate N_{i,j}(F_q) inside the image.
    """
    if rep.family in ("B", "D"):
        pat = diagonal_reduction_pattern(ring, rep.n, m, rep.alpha)
        return ("group", pat.reduction_elements(fq_field), None)
    if rep.family == "A2B":
        red = _a2b_witness_reductions(rep, ring, m, fq_field)
        return ("contains", red, (rep.n - 1, 1))
    if rep.family == "C":
        red, j0 = _c_witness_reductions(rep, ring, m, fq_field)
        return ("contains", red, (rep.n - j0, j0))
    raise UnknownFamily(rep.family)


def _check_witness(ring, g, ginv, X, kpattern, fq_field):
    """X in K_n(m)-pattern, g X g^{-1} in K_n; returns the reduction."""
    if not kpattern.contains(X):
        raise WitnessConjugationFailure("witness not in K_n(m)")
    Y = g * X * ginv
    if not Y.is_integral():
        raise WitnessConjugationFailure("conjugated witness not integral")
    red = Y.reduce_mod_p(fq_field)
    if red.det() == 0:
        raise WitnessConjugationFailure("conjugated witness reduces to a singular matrix")
    return red


def _a2b_witness_reductions(rep, ring, m, fq_field):
    """All of N_{n-1,1}(F_q) realized by conjugated X(a, b, c) witnesses."""
    n = rep.n
    j = rep.j
    res = _res_of(rep, ring, m)
    w1 = rep.residues[: n - j - 1]
    w2 = rep.residues[n - j - 1]
    w3 = rep.residues[n - j:-1]
    x = rep.residues[-1]
    alpha = rep.alpha
    aj = alpha[j - 1]
    g = rep.matrix
    ginv = g.inv()
    kpat = conductor_subgroup(ring, n, m)
    q = fq_field.q

    A_exps = [alpha[n - 2 - i] for i in range(n - j - 1)]   # diag(pi^{a_{n-1}},..,pi^{a_{j+1}})
    B_exps = [alpha[j - 2 - i] for i in range(j - 1)]       # diag(pi^{a_{j-1}},..,pi^{a_1})
    w1l = [res.lift(c) for c in w1]
    w3l = [res.lift(c) for c in w3]
    xl = res.lift(x)
    paj = ring.uniformizer(aj)

    reductions = set()
    for avec in iproduct(range(q), repeat=n - j - 1):
        for bvec in iproduct(range(q), repeat=j - 1):
            for c in range(q):
                rows = [[ring.one() if i2 == j2 else ring.zero() for j2 in range(n)]
                        for i2 in range(n)]
                r = n - j - 1
                cl = ring.constant(c)
                for t2 in range(n - j - 1):
                    rows[r][t2] = (ring.constant(avec[t2]) * ring.uniformizer(A_exps[t2])
                                   + paj * cl * w1l[t2])
                for t2 in range(j - 1):
                    rows[r][n - j + t2] = (ring.constant(bvec[t2]) * ring.uniformizer(B_exps[t2])
                                           + paj * cl * w3l[t2])
                rows[r][n - 1] = xl * paj * cl
                X = WMat(ring, rows)
                red = _check_witness(ring, g, ginv, X, kpat, fq_field)
                expected = [[1 if i2 == j2 else 0 for j2 in range(n)] for i2 in range(n)]
                for t2 in range(n - j - 1):
                    expected[n - 1][t2] = avec[t2]
                expected[n - 1][n - j - 1] = c
                for t2 in range(j - 1):
                    expected[n - 1][n - j + t2] = bvec[t2]
                if red != Mat(fq_field, expected):
                    raise WitnessConjugationFailure(
                        f"A2B witness reduction mismatch for {rep}")
                reductions.add(red)
    if len(reductions) != q ** (n - 1):
        raise WitnessConjugationFailure("A2B witnesses do not fill N_{n-1,1}")
    return reductions


def _res_of(rep, ring, m):
    # residues of a rep are coded at the level they were enumerated with;
    # the level is recoverable from the largest code seen, but we simply
    # re-create the ring at full depth m for lifting (codes embed).
    return ResidueRing(ring, m)


def _c_witness_reductions(rep, ring, m, fq_field):
    """Witness reductions generating N_{n-j0, j0} for non-diagonal C reps."""
    n = rep.n
    res = _res_of(rep, ring, m)
    # v in matrix column order: (v_{n-1}, ..., v_1) at columns 0..n-2
    v_cols = rep.residues
    nz = [i for i in range(1, n) if v_cols[n - 1 - i]]  # indices i with v_i != 0
    j0 = min(nz)
    g = rep.matrix
    ginv = g.inv()
    kpat = conductor_subgroup(ring, n, m)
    reductions = _c_witnesses_recursive(ring, res, rep.alpha, v_cols, n, g, ginv, kpat, fq_field)
    # group generated must contain N_{n-j0, j0}
    gen = _close_under_product(reductions, fq_field)
    needed = _n_ij_elements(fq_field, n, n - j0)
    missing = [x for x in needed if x not in gen]
    if missing:
        raise WitnessConjugationFailure(f"C witnesses generate too little for {rep}")
    return gen, j0


def _n_ij_elements(fq_field, n, i_block):
    """N_{i_block, n-i_block}(F_q) inside GL_n."""
    from .chartable import unipotent_radical_elements
    return unipotent_radical_elements(fq_field, n, i_block)


def _close_under_product(mats, fq_field):
    elems = set(mats)
    frontier = list(elems)
    while frontier:
        new = []
        for a in frontier:
            for b in list(elems):
                for c in (a * b, b * a):
                    if c not in elems:
                        elems.add(c)
                        new.append(c)
        frontier = new
    return elems


def _c_witnesses_recursive(ring, res, alpha, v_cols, r, g_full, ginv_full, kpat, fq_field,
                           embed_offset=0):
    """Witness reductions for an r x r C-block sitting at the bottom-right of
    the full matrix, verified by conjugation with the *full* representative."""
    n_full = g_full.n
    q = fq_field.q
    nz = [i for i in range(1, r) if v_cols[r - 1 - i]]
    assert nz, "diagonal rep passed to C witness generator"
    k = max(nz)
    out = []

    if len(nz) == 1:
        # base case: single nonzero coordinate at position j = k
        j = k
        aj = alpha[j - 1]
        x = v_cols[r - 1 - j]
        xinvw = res.lift(x).inv()
        A_exps = [alpha[r - 2 - t] for t in range(r - j - 1)]
        B_exps = [alpha[j - 2 - t] for t in range(j - 1)]
        paj = ring.uniformizer(aj)
        for avec in iproduct(range(q), repeat=r - j - 1):
            for b in range(q):
                for cmat in iproduct(range(q), repeat=(j - 1) * (r - j - 1)):
                    for dvec in iproduct(range(q), repeat=j - 1):
                        rows = [[ring.one() if i2 == j2 else ring.zero()
                                 for j2 in range(r)] for i2 in range(r)]
                        rr = r - j - 1
                        for t2 in range(r - j - 1):
                            rows[rr][t2] = xinvw * ring.constant(avec[t2]) * ring.uniformizer(A_exps[t2])
                        rows[rr][rr] = ring.one() + paj * xinvw * ring.constant(b)
                        for ii in range(j - 1):
                            binv = ring.uniformizer(-B_exps[ii])
                            for t2 in range(r - j - 1):
                                rows[r - j + ii][t2] = binv * ring.constant(
                                    cmat[ii * (r - j - 1) + t2]) * ring.uniformizer(A_exps[t2])
                            rows[r - j + ii][rr] = binv * ring.constant(dvec[ii]) * paj
                        X = _embed_bottom_right(ring, n_full, WMat(ring, rows))
                        red = _check_witness(ring, g_full, ginv_full, X, kpat, fq_field)
                        out.append(red)
        return out

    # inductive case: peel the leftmost nonzero coordinate x = v_k
    r1 = k
    inner_alpha = alpha[: r1 - 1]
    inner_vcols = v_cols[r - 1 - (r1 - 1): r - 1]  # columns of v_{r1-1}, ..., v_1
    inner = _c_witnesses_recursive(ring, res, inner_alpha, inner_vcols, r1,
                                   g_full, ginv_full, kpat, fq_field)
    out.extend(inner)

    # outer Y(a, b, c, d) witnesses at level r
    j = min(nz)
    a_r1 = alpha[r1 - 1]
    x = v_cols[r - 1 - k]
    xl = res.lift(x)
    xinvw = xl.inv()
    A_exps = [alpha[r - 2 - t] for t in range(r - r1 - 1)]
    C_exps = [alpha[j - 2 - t] for t in range(j - 1)]
    par1 = ring.uniformizer(a_r1)
    for avec in iproduct(range(q), repeat=r - r1 - 1):
        for b in range(q):
            for cmat in iproduct(range(q), repeat=(j - 1) * (r - r1 - 1)):
                for dvec in iproduct(range(q), repeat=j - 1):
                    rows = [[ring.one() if i2 == j2 else ring.zero()
                             for j2 in range(r)] for i2 in range(r)]
                    rr = r - r1 - 1
                    for t2 in range(r - r1 - 1):
                        rows[rr][t2] = xinvw * ring.constant(avec[t2]) * ring.uniformizer(A_exps[t2])
                    rows[rr][rr] = ring.one() + par1 * xinvw * ring.constant(b)
                    for ii in range(j - 1):
                        cinv = ring.uniformizer(-C_exps[ii])
                        row_i = r - j + ii
                        for t2 in range(r - r1 - 1):
                            rows[row_i][t2] = cinv * ring.constant(
                                cmat[ii * (r - r1 - 1) + t2]) * ring.uniformizer(A_exps[t2])
                        rows[row_i][rr] = cinv * ring.constant(dvec[ii]) * par1
                    X = _embed_bottom_right(ring, n_full, WMat(ring, rows))
                    red = _check_witness(ring, g_full, ginv_full, X, kpat, fq_field)
                    out.append(red)
    return out


def _embed_bottom_right(ring, n_full, block):
    r = block.n
    if r == n_full:
        return block
    rows = [[ring.one() if i == j else ring.zero() for j in range(n_full)]
            for i in range(n_full)]
    off = n_full - r
    for i in range(r):
        for j in range(r):
            rows[off + i][off + j] = block.rows[i][j]
    return WMat(ring, rows)


# -- support of the newform -----------------------------------------------------


def left_coset_key(g):
    """Canonical key of the left coset K_n * g (Hermite form over o).

    Row operations over o (left K_n action) bring g to an upper triangular
    form with diagonal pi^{a_i} and above-diagonal entries reduced modulo the
    column pivot; the resulting digit data is a complete coset invariant.
    """
    ring = g.ring
    n = g.n
    m = [list(r) for r in g.rows]
    for col in range(n):
        piv, pv = None, None
        for r in range(col, n):
            x = m[r][col]
            if x.digits and (pv is None or x.val < pv):
                piv, pv = r, x.val
        if piv is None:
            raise WitnessConjugationFailure("singular matrix has no coset key")
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
        unit_inv = (m[col][col] * ring.uniformizer(-pv)).inv()
        m[col] = [unit_inv * v for v in m[col]]     # pivot becomes exactly pi^pv
        for r in range(n):
            if r == col:
                continue
            x = m[r][col]
            if x.is_zeroish:
                continue
            if r > col:
                f = x * ring.uniformizer(-pv)       # integral quotient
            else:
                # reduce above-diagonal entry modulo pi^pv
                if x.val >= pv:
                    f = x * ring.uniformizer(-pv)
                else:
                    digits = [x.coeff(e) for e in range(pv, x.val + len(x.digits))]
                    f = ring.from_digits(0, digits)
            m[r] = [m[r][c] - f * m[col][c] for c in range(n)]
    key = []
    for i in range(n):
        a_i = m[i][i].valuation()
        row = [a_i]
        for j in range(i + 1, n):
            a_j = m[j][j].valuation()
            row.append(tuple(m[i][j].coeff(e) for e in range(a_j)))
        key.append(tuple(row))
    return tuple(key)


def _km_candidates(ring, n, m, depth):
    """All of K_n(m) modulo 1 + p^depth M_n, as exact lifts."""
    res = ResidueRing(ring, depth)
    q = ring.residue.q
    free_rows = []
    for code_top in iproduct(range(res.size), repeat=n * (n - 1)):
        rows = []
        it = iter(code_top)
        for i in range(n - 1):
            rows.append([res.lift(next(it)) for _ in range(n)])
        # last row of K_n(m) is (0, ..., 0, 1) mod p^depth since m >= depth
        last = [ring.zero() for _ in range(n - 1)] + [ring.one()]
        rows.append(last)
        cand = WMat(ring, rows)
        red = [[cand.rows[i][j].coeff(0) for j in range(n)] for i in range(n)]
        if Mat(ring.residue, red).det():
            free_rows.append(cand)
    return free_rows


def sigma_transversal(ring, n, m, verify=True):
    """Exact transversal y of (K_n(m) cap Sigma_n^{-1} K_n Sigma_n) \\ K_n(m).

    Right cosets biject with left cosets K_n Sigma_n y, so candidates are
    deduplicated by the canonical Hermite key of Sigma_n y.  The coset of y
    only depends on y mod p^{n-1}, so lifting a full residue enumeration is
    exhaustive.  Distinctness and coverage are verified when requested.
    """
    if m < n - 1:
        raise NotInSupport("sigma transversal requires m >= n - 1")
    km = conductor_subgroup(ring, n, m)
    k_sig = conjugate_pattern(full_k(ring, n),
                              wmat_diag_powers(ring, [-(n - 1 - i) for i in range(n)]))
    inter = pattern_intersect(km, k_sig)
    sig = wmat_diag_powers(ring, [n - 1 - i for i in range(n)])
    seen = {}
    for cand in _km_candidates(ring, n, m, n - 1):
        key = left_coset_key(sig * cand)
        if key not in seen:
            seen[key] = cand
    reps = list(seen.values())
    if verify:
        for a in range(len(reps)):
            for b in range(a + 1, len(reps)):
                if inter.contains(reps[a] * reps[b].inv()):
                    raise PartitionFailure("sigma transversal lifts collide")
        import random
        rng = random.Random(0)
        for _ in range(25):
            x = km.sample(rng)
            hits = sum(1 for T in reps if inter.contains(x * T.inv()))
            if hits != 1:
                raise PartitionFailure(f"element covered by {hits} sigma-cosets")
    return reps


def support_membership(ring, g, n, m, transversal=None):
    """Decompose g = pi^v k Sigma_n y (k in K_n, y in K_n(m)) or raise.

    The central part is pinned by the determinant: val(det g) must equal
    n v + n(n-1)/2 for an integer v.
    """
    dv = g.det().valuation()
    num = dv - n * (n - 1) // 2
    if num % n != 0:
        raise NotInSupport(f"det valuation {dv} incompatible with Z K Sigma K({m})")
    v = num // n
    gs = WMat(ring, [[x.shift(-v) for x in row] for row in g.rows])
    sig_inv = wmat_diag_powers(ring, [-(n - 1 - i) for i in range(n)])
    ys = transversal if transversal is not None else sigma_transversal(ring, n, m)
    for y in ys:
        k = gs * y.inv() * sig_inv
        if k.is_integral():
            det = k.det()
            if det.digits and det.val == 0:
                return v, k, y
    raise NotInSupport("no transversal element exhibits membership")
