"""Pattern subgroups of GL_n(o): entrywise valuation bounds plus congruences.

A pattern records, per entry, a lower bound on the valuation, an optional
affine congruence (entry = delta_ij mod pi^m), and a determinant-unit flag.
The conductor subgroups K_n(m), the maximal compact K_n, and all their
conjugates by monomial matrices used here are of this shape.

Closure under product and inverse holds for every pattern this module
constructs because the bound matrices satisfy the triangle inequality
b[i][j] <= b[i][k] + b[k][j] (they arise from conjugating K_n(m), whose
bounds satisfy it, by diagonal matrices, and intersecting with such);
``verify_group_axioms`` spot-checks this numerically.
"""

import random

from .errors import NotASubgroup, NotMonomial, WindowOverflow
from .fq import Mat
from .localring import WMat, wmat_diag_powers, wmat_identity


class PatternGroup:
    """Subgroup of GL_n(F) cut out by entry bounds and congruences.

    bounds: n x n integer matrix (valuation lower bounds).
    congruences: dict (i, j) -> (target in {0, 1}, exponent m): the entry
    satisfies entry = target (mod pi^m) in addition to its bound.
    """

    def __init__(self, ring, n, bounds, congruences=None, det_unit=True):
        self.ring = ring
        self.n = n
        self.bounds = tuple(tuple(row) for row in bounds)
        self.congruences = dict(congruences or {})
        self.det_unit = det_unit

    def __repr__(self):
        return f"PatternGroup(n={self.n}, bounds={self.bounds}, cong={self.congruences})"

    def __eq__(self, other):
        return (isinstance(other, PatternGroup) and self.bounds == other.bounds
                and self.congruences == other.congruences and self.det_unit == other.det_unit)

    def contains(self, wmat):
        """Exact membership test; raises WindowOverflow if undecidable."""
        n = self.n
        for i in range(n):
            for j in range(n):
                if not wmat.rows[i][j].val_at_least(self.bounds[i][j]):
                    return False
        for (i, j), (target, m) in self.congruences.items():
            d = wmat.rows[i][j] - self.ring.constant(target)
            if not d.val_at_least(m):
                return False
        if self.det_unit:
            det = wmat.det()
            if det.is_zeroish:
                raise WindowOverflow("determinant undecidable at this precision")
            if det.valuation() != 0:
                return False
        return True

    def sample(self, rng, prec=None):
        """Uniform element at the given precision (det-unit by retry)."""
        ring = self.ring
        prec = prec or ring.work_prec
        n = self.n
        while True:
            rows = []
            for i in range(n):
                row = []
                for j in range(n):
                    x = ring.random_integral(rng, self.bounds[i][j], prec)
                    if (i, j) in self.congruences:
                        target, m = self.congruences[(i, j)]
                        # entry = target + pi^m * (integral)
                        x = ring.constant(target) + ring.random_integral(rng, m, prec)
                    row.append(x)
                rows.append(row)
            cand = WMat(ring, rows)
            if not self.det_unit:
                return cand
            det = cand.det()
            if det.digits and det.val == 0:
                return cand

    def reduction_elements(self, field):
        """The image in GL_n(F_q) as an explicit matrix list.

        Valid for patterns whose congruence exponents are >= 1: the image is
        exactly the invertible matrices supported on entries with bound <= 0,
        with congruence entries pinned to their targets.
        """
        n = self.n
        free = []
        fixed = {}
        for i in range(n):
            for j in range(n):
                if (i, j) in self.congruences:
                    target, m = self.congruences[(i, j)]
                    if m >= 1:
                        fixed[(i, j)] = target
                        continue
                if self.bounds[i][j] <= 0:
                    free.append((i, j))
                else:
                    fixed[(i, j)] = 0
        q = field.q
        out = []
        for code in range(q ** len(free)):
            rows = [[0] * n for _ in range(n)]
            for (i, j), v in fixed.items():
                rows[i][j] = v
            cc = code
            for (i, j) in free:
                rows[i][j] = cc % q
                cc //= q
            m = Mat(field, rows)
            if m.det():
                out.append(m)
        return out

    def verify_group_axioms(self, rng, samples=20, prec=None):
        """Randomized closure check: products and inverses stay inside."""
        prec = prec or self.ring.work_prec
        for _ in range(samples):
            a = self.sample(rng, prec)
            b = self.sample(rng, prec)
            if not self.contains(a * b):
                raise NotASubgroup(f"pattern not closed under product: {self}")
            if not self.contains(a.inv()):
                raise NotASubgroup(f"pattern not closed under inverse: {self}")
        return True


def full_k(ring, n):
    """K_n = GL_n(o)."""
    return PatternGroup(ring, n, [[0] * n for _ in range(n)])


def principal_k1(ring, n, r=1):
    """K_n^r = 1 + pi^r M_n(o)."""
    bounds = [[r] * n for _ in range(n)]
    cong = {(i, i): (1, r) for i in range(n)}
    return PatternGroup(ring, n, bounds, cong)


def conductor_subgroup(ring, n, m):
    """K_n(m): last row (c, d) with c in p^m, d in 1 + p^m; K_n(0) = K_n."""
    if m < 0:
        raise ValueError("conductor level must be >= 0")
    if m == 0:
        return full_k(ring, n)
    bounds = [[0] * n for _ in range(n)]
    for j in range(n - 1):
        bounds[n - 1][j] = m
    cong = {(n - 1, n - 1): (1, m)}
    return PatternGroup(ring, n, bounds, cong)


def sigma(ring, n):
    """Sigma_n = diag(pi^{n-1}, ..., pi, 1)."""
    return wmat_diag_powers(ring, [n - 1 - i for i in range(n)])


def t_m(ring, n, m):
    """t_m = diag(pi^{(n-1)m}, ..., pi^m, 1)."""
    return wmat_diag_powers(ring, [(n - 1 - i) * m for i in range(n)])


def sigma_mn(ring, m, n):
    """Sigma_{m,n} = diag(pi^{(m+1)(n-1)}, ..., 1) = t_m * Sigma_n."""
    return wmat_diag_powers(ring, [(m + 1) * (n - 1 - i) for i in range(n)])


def _monomial_data(g):
    """(sigma, exps) for a monomial matrix with entries pi^k: row i has its
    nonzero entry pi^{exps[i]} in column sigma[i]."""
    n = g.n
    sigma_map = [None] * n
    exps = [0] * n
    seen_cols = set()
    for i in range(n):
        nz = [(j, v) for j, v in enumerate(g.rows[i]) if not v.is_zeroish]
        if len(nz) != 1:
            raise NotMonomial("matrix is not monomial")
        j, v = nz[0]
        if j in seen_cols:
            raise NotMonomial("matrix is not monomial")
        seen_cols.add(j)
        if len(v.digits) != 1 or v.digits[0] != 1:
            raise NotMonomial("monomial entries must be pure uniformizer powers")
        sigma_map[i] = j
        exps[i] = v.val
    return sigma_map, exps


def conjugate_pattern(P, g):
    """The pattern of g P g^{-1} for monomial g with uniformizer-power entries.

    (g X g^{-1})[i][j] = pi^{v_i - v_j} X[sigma(i)][sigma(j)], so bounds shift
    by v_i - v_j and congruences transport; exact for monomial g.
    """
    sig, exps = _monomial_data(g)
    n = P.n
    bounds = [[P.bounds[sig[i]][sig[j]] + exps[i] - exps[j] for j in range(n)] for i in range(n)]
    cong = {}
    inv_sig = {sig[i]: i for i in range(n)}
    for (a, b), (target, m) in P.congruences.items():
        i, j = inv_sig[a], inv_sig[b]
        shift = exps[i] - exps[j]
        if target != 0 and shift != 0:
            raise NotMonomial("cannot transport a unit congruence across a scaling")
        cong[(i, j)] = (target, m + shift)
    return PatternGroup(P.ring, n, bounds, cong, P.det_unit)


def pattern_intersect(P, Q):
    if P.n != Q.n:
        raise ValueError("dimension mismatch")
    n = P.n
    bounds = [[max(P.bounds[i][j], Q.bounds[i][j]) for j in range(n)] for i in range(n)]
    cong = dict(P.congruences)
    for key, (target, m) in Q.congruences.items():
        if key in cong:
            t0, m0 = cong[key]
            if t0 != target:
                raise NotASubgroup("incompatible congruence targets in intersection")
            cong[key] = (target, max(m0, m))
        else:
            cong[key] = (target, m)
    return PatternGroup(P.ring, n, bounds, cong, P.det_unit or Q.det_unit)


def is_subpattern(P, Q):
    """True iff Q's constraints imply P's (so Q <= P as groups)."""
    n = P.n
    for i in range(n):
        for j in range(n):
            if Q.bounds[i][j] < P.bounds[i][j]:
                cong = Q.congruences.get((i, j))
                if cong is None or cong[1] < P.bounds[i][j]:
                    return False
    for key, (target, m) in P.congruences.items():
        qc = Q.congruences.get(key)
        if qc is None or qc[0] != target or qc[1] < m:
            return False
    return True


def pattern_index(P, Q):
    """[P : Q] for a pattern pair P >= Q differing in off-diagonal bounds.

    Computed entrywise as the product of freed residue counts q^{Q.b - P.b}.
    Congruence exponents must agree and no diagonal entry may be freed (such
    cases would couple entries through invertibility).
    """
    if not is_subpattern(P, Q):
        raise NotASubgroup("pattern_index requires Q <= P")
    n = P.n
    q = P.ring.residue.q
    idx = 1
    for i in range(n):
        for j in range(n):
            pb, qb = P.bounds[i][j], Q.bounds[i][j]
            if (i, j) in Q.congruences:
                pc = P.congruences.get((i, j))
                qc = Q.congruences[(i, j)]
                if pc != qc:
                    raise NotASubgroup("congruence-changing index not supported")
                continue
            if qb > pb:
                if i == j:
                    raise NotASubgroup("diagonal-entry index not supported")
                idx *= q ** (qb - pb)
    return idx


def pattern_transversal(P, Q, verify=True, verify_samples=25, seed=0):
    """Representatives T of the right cosets Q\\P, with Q <= P as above.

    The lifts are 1 + sum of freed-entry contributions c * pi^e over
    representatives of p^{P.b}/p^{Q.b}; distinctness is certified exactly
    (T T'^{-1} not in Q) and coverage is spot-checked on random elements of
    P when ``verify`` is set.
    """
    ring = P.ring
    n = P.n
    q = ring.residue.q
    freed = []
    for i in range(n):
        for j in range(n):
            if (i, j) in Q.congruences:
                continue
            if Q.bounds[i][j] > P.bounds[i][j]:
                freed.append((i, j, P.bounds[i][j], Q.bounds[i][j]))
    # enumerate residues lexicographically per entry
    def entry_values(lo, hi):
        span = hi - lo
        vals = []
        for code in range(q**span):
            digits = []
            cc = code
            for _ in range(span):
                digits.append(cc % q)
                cc //= q
            vals.append(ring.from_digits(lo, digits))
        return vals

    choices = [entry_values(lo, hi) for (_, _, lo, hi) in freed]
    reps = []
    idx_total = 1
    for ch in choices:
        idx_total *= len(ch)
    counters = [0] * len(freed)
    for _ in range(idx_total):
        m = wmat_identity(ring, n)
        rows = [list(r) for r in m.rows]
        for pos, (i, j, lo, hi) in enumerate(freed):
            rows[i][j] = rows[i][j] + choices[pos][counters[pos]]
        reps.append(WMat(ring, rows))
        for pos in range(len(freed)):
            counters[pos] += 1
            if counters[pos] < len(choices[pos]):
                break
            counters[pos] = 0
    if verify:
        _verify_transversal(P, Q, reps, verify_samples, seed)
    return reps


def _verify_transversal(P, Q, reps, samples, seed):
    # pairwise distinct cosets
    for a in range(len(reps)):
        for b in range(a + 1, len(reps)):
            if Q.contains(reps[a] * reps[b].inv()):
                raise NotASubgroup("transversal lifts collide in a coset")
    # coverage on random elements of P
    rng = random.Random(seed)
    for _ in range(samples):
        x = P.sample(rng)
        hits = sum(1 for T in reps if Q.contains(x * T.inv()))
        if hits != 1:
            raise NotASubgroup(f"element of P covered by {hits} cosets (expected 1)")
