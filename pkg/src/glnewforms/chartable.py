"""Conjugacy classes and irreducible characters of GL_n(F_q) over F_{l'}.

The character table is produced by the Dixon-Schneider method: the class
multiplication matrices M_i act on class-function space, their common
one-dimensional eigenspaces are the normalized central characters
omega_k = |C_k| chi(g_k) / deg(chi), and the genuine character values are
recovered from the orthogonality relations.  Everything is exact in F_{l'}.

Cuspidality of a row is decided by vanishing of the averaged character sum
over the unipotent radicals N_{i,j} of all (maximal) standard parabolics;
radical containment makes the maximal ones sufficient.
"""

import random

from math import isqrt

from .computefield import (
    charpoly_mod,
    kernel_mod,
    mat_vec_mod,
    poly_roots_mod,
    rref_mod,
    sqrt_bounded,
)
from .errors import (
    EigenspaceSplitFailure,
    InconsistentOrthogonality,
    NonInvertibleOrder,
    NonRegularTheta,
    NotAGroup,
)
from .fq import Mat, enumerate_gl, make_field, scalar_mat


class ClassData:
    """Conjugacy classes of an enumerated GL_n(F_q)."""

    def __init__(self, group):
        self.group = group
        order = group.order
        class_of = [-1] * order
        reps = []
        sizes = []
        members = []
        inv_idx = [group.inv_index(i) for i in range(order)]
        for i in range(order):
            if class_of[i] != -1:
                continue
            cls = len(reps)
            x = group.mats[i]
            orbit = set()
            for j in range(order):
                g = group.mats[j]
                y = group.mats[inv_idx[j]] * x * g
                orbit.add(group.index[y])
            for idx in orbit:
                class_of[idx] = cls
            reps.append(i)
            sizes.append(len(orbit))
            members.append(sorted(orbit))
        self.class_of = class_of
        self.reps = reps            # representative = least enumeration index
        self.sizes = sizes
        self.members = members
        self.num_classes = len(reps)
        self.identity_class = class_of[group.identity_index()]
        self.inverse_class = [class_of[inv_idx[r]] for r in reps]

    def class_of_mat(self, mat):
        return self.class_of[self.group.index[mat]]


def conjugacy_classes(n, field, bound=10**6):
    return ClassData(enumerate_gl(n, field, bound))


def _class_mult_matrix(classes, i):
    """M_i with (M_i)[j][k] = a_{ijk} = #{x in C_i : x^{-1} g_k in C_j}.

    The class-algebra relation omega_i omega_j = sum_k a_{ijk} omega_k then
    reads M_i w = omega_i w on the vector w = (omega_k)_k of normalized
    character values.
    """
    g = classes.group
    c = classes.num_classes
    M = [[0] * c for _ in range(c)]
    for k in range(c):
        gk = g.mats[classes.reps[k]]
        for xi in classes.members[i]:
            xinv = g.mats[g.inv_index(xi)]
            M[classes.class_of[g.index[xinv * gk]]][k] += 1
    return M


class CharacterTable:
    """Rows of irreducible character values, one column per class."""

    def __init__(self, classes, comp, values, degrees, seed):
        self.classes = classes
        self.comp = comp
        self.values = values      # list of rows, entries in F_{l'}
        self.degrees = degrees    # integer lifts of values at the identity
        self.seed = seed
        self.cuspidal = [self._is_cuspidal_row(r) for r in range(len(values))]

    @property
    def num_rows(self):
        return len(self.values)

    def value(self, row, mat):
        return self.values[row][self.classes.class_of_mat(mat)]

    def inner(self, r1, r2):
        """<chi_{r1}, chi_{r2}> in F_{l'}."""
        cl, lp = self.classes, self.comp.lprime
        total = 0
        for k in range(cl.num_classes):
            total += cl.sizes[k] * self.values[r1][k] * self.values[r2][cl.inverse_class[k]]
        return (total * pow(cl.group.order, -1, lp)) % lp

    def _is_cuspidal_row(self, row):
        return is_cuspidal(row, self)

    def cuspidal_rows(self):
        return [r for r in range(self.num_rows) if self.cuspidal[r]]

    def contragredient_row(self, row):
        """Row index r with chi_r(g) = chi_row(g^{-1}) for all g."""
        cl = self.classes
        target = tuple(self.values[row][cl.inverse_class[k]] for k in range(cl.num_classes))
        for r in range(self.num_rows):
            if tuple(self.values[r]) == target:
                return r
        raise InconsistentOrthogonality("contragredient row missing from table")

    def central_character(self, row):
        """omega(z) = chi(z*1)/deg on the centre F_q^x, as a dict."""
        F = self.classes.group.field
        lp = self.comp.lprime
        dinv = pow(self.degrees[row], -1, lp)
        n = self.classes.group.n
        out = {}
        for z in F.units():
            out[z] = (self.value(row, scalar_mat(F, n, z)) * dinv) % lp
        return out


def dixon_character_table(classes, comp, seed=0, split_budget=40):
    """Full irreducible character table via Dixon-Schneider over F_{l'}."""
    c = classes.num_classes
    lp = comp.lprime
    Ms = [_class_mult_matrix(classes, i) for i in range(c)]
    rng = random.Random(seed)

    # split class-function space into common eigenspaces of the M_i
    spaces = [[_unit_vec(c, i) for i in range(c)]]
    tries = 0
    sweep = 0
    while any(len(S) > 1 for S in spaces):
        if tries < split_budget:
            op = _random_combo(Ms, rng, lp)
        elif sweep < c:
            op = Ms[sweep]
            sweep += 1
        else:
            raise EigenspaceSplitFailure(
                f"common eigenspaces not one-dimensional after {tries} random tries")
        tries += 1
        spaces = _split_spaces(spaces, op, lp)
    eigvecs = [S[0] for S in spaces]

    id_cls = classes.identity_class
    rows = []
    order = classes.group.order
    for w in eigvecs:
        if w[id_cls] % lp == 0:
            raise EigenspaceSplitFailure("eigenvector vanishes at the identity class")
        winv = pow(w[id_cls], -1, lp)
        w = [(x * winv) % lp for x in w]      # now w_k = |C_k| chi(g_k) / deg
        t = 0
        for k in range(c):
            t += w[k] * w[classes.inverse_class[k]] * pow(classes.sizes[k], -1, lp)
        t %= lp
        d2 = (order * pow(t, -1, lp)) % lp
        deg = sqrt_bounded(d2, isqrt(order), lp)
        if deg is None:
            raise InconsistentOrthogonality("degree^2 has no admissible integer square root")
        row = [(deg * w[k] * pow(classes.sizes[k], -1, lp)) % lp for k in range(c)]
        rows.append((deg, row))

    rows.sort(key=lambda dr: (dr[0], [v % lp for v in dr[1]]))
    table = CharacterTable(classes, comp,
                           [r for _, r in rows], [d for d, _ in rows], seed)

    if sum(d * d for d in table.degrees) != order:
        raise InconsistentOrthogonality("sum of squared degrees != |G|")
    for i in range(c):
        for j in range(c):
            if table.inner(i, j) != (1 if i == j else 0):
                raise InconsistentOrthogonality(f"<chi_{i}, chi_{j}> != delta")
    return table


def _unit_vec(c, i):
    v = [0] * c
    v[i] = 1
    return v


def _random_combo(Ms, rng, lp):
    c = len(Ms)
    coeffs = [rng.randrange(lp) for _ in range(c)]
    M = [[0] * c for _ in range(c)]
    for t, co in enumerate(coeffs):
        if co:
            Mt = Ms[t]
            for i in range(c):
                Mi = M[i]
                Mti = Mt[i]
                for j in range(c):
                    Mi[j] = (Mi[j] + co * Mti[j]) % lp
    return M


def _split_spaces(spaces, op, lp):
    out = []
    for S in spaces:
        if len(S) == 1:
            out.append(S)
            continue
        # matrix A of op restricted to span(S), in the coordinates of the
        # basis S itself (so eigenvectors of A map back through S)
        d = len(S)
        images = [mat_vec_mod(op, v, lp) for v in S]
        A_cols = [_coords_in_basis(S, img, lp) for img in images]
        A = [[A_cols[j][i] for j in range(d)] for i in range(d)]
        cp = charpoly_mod(A, lp)
        roots = poly_roots_mod(cp, lp)
        if len(roots) <= 1:
            out.append(S)
            continue
        covered = 0
        for lam in roots:
            B = [[(A[i][j] - lam * (i == j)) % lp for j in range(d)] for i in range(d)]
            sub = []
            for kv in kernel_mod(B, lp):
                w = [0] * len(S[0])
                for t, coef in enumerate(kv):
                    if coef:
                        for idx in range(len(w)):
                            w[idx] = (w[idx] + coef * S[t][idx]) % lp
                sub.append(w)
            if sub:
                covered += len(sub)
                out.append(sub)
        if covered != d:
            raise EigenspaceSplitFailure("class operator not diagonalizable on subspace")
    return out


def _coords_in_basis(S, v, lp):
    """Coordinates of v in the basis S (list of row vectors), or raise."""
    d = len(S)
    cols = len(v)
    # augmented system: columns are the S[t], right-hand side v
    aug = [[S[t][r] for t in range(d)] + [v[r]] for r in range(cols)]
    R, pivots = rref_mod(aug, lp)
    coords = [0] * d
    for r, pc in enumerate(pivots):
        if pc == d:
            raise EigenspaceSplitFailure("operator image left the invariant subspace")
        coords[pc] = R[r][d]
    # consistency: rows beyond the pivots must be zero (rref guarantees)
    return coords


# -- cuspidality and invariant dimensions -------------------------------------


def unipotent_radical_elements(field, n, n1):
    """N_{n1, n2}(F_q): block lower unitriangular with block sizes (n1, n - n1)."""
    n2 = n - n1
    positions = [(i, j) for i in range(n1, n) for j in range(n1)]
    elems = []
    q = field.q
    total = q ** len(positions)
    for code in range(total):
        rows = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
        cc = code
        for (i, j) in positions:
            rows[i][j] = cc % q
            cc //= q
        elems.append(Mat(field, rows))
    return elems


def is_cuspidal(row, table):
    """True iff the averaged chi-sum over every N_{n1,n2} vanishes."""
    cl = table.classes
    F = cl.group.field
    n = cl.group.n
    lp = table.comp.lprime
    for n1 in range(1, n):
        elems = unipotent_radical_elements(F, n, n1)
        s = sum(table.values[row][cl.class_of_mat(u)] for u in elems) % lp
        if (s * pow(len(elems), -1, lp)) % lp != 0:
            return False
    return True


def invariant_dim(row, table, subgroup, check_closure=True):
    """dim of the trivial-isotypic part of row restricted to ``subgroup``.

    Computed as the lifted value of (1/|H|) sum_h chi(h); exact because all
    dimensions are below l'.  ``subgroup`` is a list of Mat over the table's
    field.
    """
    cl = table.classes
    lp = table.comp.lprime
    h = len(subgroup)
    if h == 0 or h % table.comp.lprime == 0:
        raise NonInvertibleOrder(f"|H| = {h} not invertible mod l'")
    if check_closure:
        _verify_closure(subgroup)
    s = sum(table.values[row][cl.class_of_mat(x)] for x in subgroup) % lp
    val = (s * pow(h, -1, lp)) % lp
    if val > table.degrees[row]:
        raise NonInvertibleOrder("invariant dimension lift exceeds the degree")
    return val


def _verify_closure(subgroup, sample_limit=10**4):
    elems = set(subgroup)
    if len(elems) != len(subgroup):
        raise NotAGroup("duplicate elements in subgroup list")
    if len(elems) ** 2 <= sample_limit:
        for a in subgroup:
            for b in subgroup:
                if a * b not in elems:
                    raise NotAGroup("subgroup list not closed under product")
    else:
        rng = random.Random(0)
        for _ in range(sample_limit):
            a = subgroup[rng.randrange(len(subgroup))]
            b = subgroup[rng.randrange(len(subgroup))]
            if a * b not in elems:
                raise NotAGroup("subgroup list not closed under product (sampled)")


# -- classical GL_2 cuspidal character oracle ---------------------------------


def gl2_regular_orbits(q):
    """Representatives a of the regular orbits {a, qa} mod q^2 - 1."""
    mod = q * q - 1
    seen = set()
    orbits = []
    for a in range(mod):
        if a in seen:
            continue
        b = (a * q) % mod
        seen.add(a)
        seen.add(b)
        if a != b:
            orbits.append(a)
    return orbits


def gl2_cuspidal_oracle(field, table, theta_index):
    """Class function of the classical cuspidal character chi_theta of GL_2(F_q).

    theta is the character of F_{q^2}^x sending a fixed generator to
    zeta_{q^2-1}^theta_index; it must be regular (theta != theta^q).  Values:
    deg = q - 1; (q-1) theta(z) on central z; -theta(z) on z * unipotent;
    0 on split semisimple; -(theta(lam) + theta(lam^q)) on elliptic with
    eigenvalue lam.  Returned as a list over the table's class order.
    """
    q = field.q
    mod = q * q - 1
    if (theta_index * q - theta_index) % mod == 0:
        raise NonRegularTheta(f"theta index {theta_index} is Galois-fixed")
    comp = table.comp
    lp = comp.lprime
    zeta = comp.root_of_unity(mod)

    ext = make_field(field.p, 2 * field.k)
    # embed F_q into F_{q^2}: smallest root of our defining polynomial
    emb_gen = None
    if field.k == 1:
        emb = {a: a % field.p for a in field.elements()}
        # prime field embeds as constants; addition/multiplication agree on ints < p
        emb = {a: a for a in field.elements()}
    else:
        for cand in range(ext.q):
            acc = 0
            # evaluate field.poly at cand inside ext
            for c in reversed(field.poly):
                acc = ext.add(ext.mul(acc, cand), c % field.p)
            if acc == 0:
                emb_gen = cand
                break
        emb = {}
        for a in field.elements():
            val = 0
            for i, c in enumerate(field.coeffs(a)):
                term = c % field.p
                term_val = term
                # c * emb_gen^i with prime-subfield scalar c
                pw = 1
                for _ in range(i):
                    pw = ext.mul(pw, emb_gen)
                contrib = 0
                for _ in range(term):
                    contrib = ext.add(contrib, pw)
                val = ext.add(val, contrib)
            emb[a] = val

    # discrete log table for F_{q^2}^x w.r.t. the smallest generator
    gen = None
    for cand in range(2, ext.q):
        x, order = cand, 1
        while x != 1:
            x = ext.mul(x, cand)
            order += 1
        if order == mod:
            gen = cand
            break
    dlog = {}
    x = 1
    for e in range(mod):
        dlog[x] = e
        x = ext.mul(x, gen)

    def theta(elt_ext):
        return pow(zeta, (theta_index * dlog[elt_ext]) % mod, lp)

    cl = table.classes
    F = field
    values = []
    for rep_idx in cl.reps:
        g = cl.group.mats[rep_idx]
        a, b = g.rows[0]
        c, d = g.rows[1]
        tr = F.add(a, d)
        det = g.det()
        # char poly x^2 - tr x + det over F_q; find roots in F_{q^2}
        roots = [x for x in range(ext.q)
                 if ext.add(ext.mul(x, x), ext.add(ext.neg(ext.mul(emb[tr], x)), emb[det])) == 0]
        if len(roots) == 1 or (len(roots) == 2 and roots[0] == roots[1]):
            roots = roots * 2
        lam, mu = roots[0], roots[1] if len(roots) > 1 else roots[0]
        in_base = set(emb.values())
        if lam == mu and lam in in_base:
            z = lam
            if g.rows == ((a, 0), (0, a)):
                values.append(((q - 1) * theta(z)) % lp)
            else:
                values.append((-theta(z)) % lp)
        elif lam in in_base and mu in in_base:
            values.append(0)
        else:
            values.append((-(theta(lam) + theta(ext.pow(lam, q)))) % lp)
    return values


def match_oracle_rows(field, table):
    """Map each regular theta-orbit to the equal Dixon row; asserts bijectivity
    with the cuspidal rows found by is_cuspidal."""
    matches = {}
    for a in gl2_regular_orbits(field.q):
        vals = gl2_cuspidal_oracle(field, table, a)
        hits = [r for r in range(table.num_rows) if list(table.values[r]) == vals]
        if len(hits) != 1:
            raise InconsistentOrthogonality(f"oracle row for theta={a} matches {len(hits)} rows")
        matches[a] = hits[0]
    oracle_rows = sorted(set(matches.values()))
    if oracle_rows != table.cuspidal_rows():
        raise InconsistentOrthogonality("cuspidal rows disagree with the GL_2 oracle")
    return matches
