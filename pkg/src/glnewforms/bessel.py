"""Bessel functions of cuspidal characters of GL_n(F_q) and Whittaker machinery.

Two independent constructions of the Bessel function are provided:

* ``bessel_from_character`` averages the trace character against the inverse
  additive character over the upper unitriangular subgroup,
  B(a) = |U|^{-1} sum_u psibar^{-1}(u) chi(a u);
* ``bessel_via_model`` realizes the induced space ind_U^G(psibar) as explicit
  functions on G, projects onto the isotypic component of the given row with
  the central projector, and extracts the unique right-(U, psibar)-equivariant
  line, normalized to 1 at the identity.

Both must produce identical value arrays; the second is the oracle for the
first.  Whittaker-space vectors are plain value arrays indexed by the group
enumeration, left-equivariant under (U, psibar).
"""

from .computefield import kernel_mod, rref_mod
from .errors import NotCuspidal, NotIntegral, ProjectionRankMismatch
from .fq import Mat, identity


def unipotent_upper_elements(field, n):
    """All upper unitriangular matrices in GL_n(F_q)."""
    positions = [(i, j) for i in range(n) for j in range(i + 1, n)]
    q = field.q
    elems = []
    for code in range(q ** len(positions)):
        rows = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
        cc = code
        for (i, j) in positions:
            rows[i][j] = cc % q
            cc //= q
        elems.append(Mat(field, rows))
    return elems


def bop_elements(field, n):
    """B^op_{n-1}(F_q) embedded in GL_n(F_q) via g |-> diag(g, 1).

    Lower triangular invertible (n-1)x(n-1) blocks; for n = 2 this is the
    embedded GL_1(F_q).
    """
    q = field.q
    diag_pos = [(i, i) for i in range(n - 1)]
    low_pos = [(i, j) for i in range(n - 1) for j in range(i)]
    elems = []
    for dcode in range((q - 1) ** len(diag_pos)):
        diag = []
        dd = dcode
        for _ in diag_pos:
            diag.append(1 + dd % (q - 1))
            dd //= q - 1
        for lcode in range(q ** len(low_pos)):
            rows = [[0] * n for _ in range(n)]
            for i in range(n - 1):
                rows[i][i] = diag[i]
            rows[n - 1][n - 1] = 1
            cc = lcode
            for (i, j) in low_pos:
                rows[i][j] = cc % q
                cc //= q
            elems.append(Mat(field, rows))
    return elems


def mirabolic_elements(group):
    """P_n(F_q): last row (0, ..., 0, 1)."""
    n = group.n
    out = []
    for m in group.mats:
        if m.rows[n - 1] == tuple([0] * (n - 1) + [1]):
            out.append(m)
    return out


class AdditiveCharacter:
    """psibar(x) = zeta_p^{Tr(c x)} on F_q, extended to U by the superdiagonal sum."""

    def __init__(self, field, comp, c=1):
        if c % field.q == 0:
            raise ValueError("additive character must be nontrivial (c != 0)")
        self.field = field
        self.comp = comp
        self.c = c % field.q
        zp = comp.root_of_unity(field.p)
        self.values = tuple(pow(zp, field.trace_to_prime(field.mul(self.c, x)), comp.lprime)
                            for x in range(field.q))

    def __call__(self, x):
        return self.values[x]

    def inverse(self):
        return AdditiveCharacter(self.field, self.comp, self.field.neg(self.c))

    def on_unipotent(self, mat):
        F = self.field
        s = 0
        for i in range(mat.n - 1):
            s = F.add(s, mat.rows[i][i + 1])
        return self.values[s]


class BesselTable:
    """Value array of B_{tau, psibar} over the group enumeration."""

    def __init__(self, table, row, psi, values):
        self.table = table
        self.row = row
        self.psi = psi
        self.values = tuple(v % table.comp.lprime for v in values)
        self.group = table.classes.group

    def value(self, mat):
        return self.values[self.group.index[mat]]

    def __eq__(self, other):
        return isinstance(other, BesselTable) and self.values == other.values

    def check_invariants(self):
        """B(1) = 1 and full (U, psibar)-bi-equivariance."""
        g = self.group
        lp = self.table.comp.lprime
        if self.value(identity(g.field, g.n)) != 1:
            return False
        U = unipotent_upper_elements(g.field, g.n)
        for u1 in U:
            f1 = self.psi.on_unipotent(u1)
            for m in g.mats:
                if (self.value(u1 * m) - f1 * self.value(m)) % lp:
                    return False
        for u2 in U:
            f2 = self.psi.on_unipotent(u2)
            for m in g.mats:
                if (self.value(m * u2) - f2 * self.value(m)) % lp:
                    return False
        return True


def bessel_from_character(table, row, psi):
    if not table.cuspidal[row]:
        raise NotCuspidal(f"row {row} is not cuspidal")
    g = table.classes.group
    lp = table.comp.lprime
    U = unipotent_upper_elements(g.field, g.n)
    uinv = pow(len(U), -1, lp)
    psi_inv = [psi.inverse().on_unipotent(u) for u in U]
    values = []
    for m in g.mats:
        s = 0
        for u, f in zip(U, psi_inv):
            s += f * table.value(row, m * u)
        values.append((s * uinv) % lp)
    return BesselTable(table, row, psi, values)


class WhittakerSpace:
    """ind_U^G(psibar) as functions on G, with the coset bookkeeping.

    A vector is a value tuple on the coset representatives of U\\G; the
    value at any g is psibar(u) * f(x_i) for the decomposition g = u x_i.
    """

    def __init__(self, group, psi):
        self.group = group
        self.psi = psi
        U = unipotent_upper_elements(group.field, group.n)
        reps = []
        coset_rep = [-1] * group.order   # group index -> rep position
        coset_fac = [0] * group.order    # psibar(u) factor
        for i, m in enumerate(group.mats):
            if coset_rep[i] != -1:
                continue
            t = len(reps)
            reps.append(m)
            for u in U:
                j = group.index[u * m]
                coset_rep[j] = t
                coset_fac[j] = psi.on_unipotent(u)
        self.U = U
        self.reps = reps
        self.coset_rep = coset_rep
        self.coset_fac = coset_fac
        self.dim = len(reps)

    def decompose(self, mat):
        """(rep position t, psibar factor) with mat = u x_t."""
        i = self.group.index[mat]
        return self.coset_rep[i], self.coset_fac[i]

    def evaluate(self, vec, mat):
        t, f = self.decompose(mat)
        return (f * vec[t]) % self.psi.comp.lprime

    def right_translate(self, vec, g):
        """rho(g) vec, i.e. the function x |-> vec-function(x g)."""
        lp = self.psi.comp.lprime
        out = []
        for x in self.reps:
            t, f = self.decompose(x * g)
            out.append((f * vec[t]) % lp)
        return out

    def full_values(self, vec):
        lp = self.psi.comp.lprime
        return tuple((self.coset_fac[i] * vec[self.coset_rep[i]]) % lp
                     for i in range(self.group.order))

    def random_vector(self, rng):
        lp = self.psi.comp.lprime
        return [rng.randrange(lp) for _ in range(self.dim)]


def bessel_via_model(table, row, psi):
    """Independent oracle for the Bessel function via the induced model."""
    if not table.cuspidal[row]:
        raise NotCuspidal(f"row {row} is not cuspidal")
    g = table.classes.group
    lp = table.comp.lprime
    space = WhittakerSpace(g, psi)
    r = space.dim
    deg = table.degrees[row]

    # central projector P = (deg/|G|) sum_g chi(g^{-1}) rho(g), as an r x r matrix
    P = [[0] * r for _ in range(r)]
    chi_inv = [table.values[row][table.classes.inverse_class[c]]
               for c in range(table.classes.num_classes)]
    for i, x in enumerate(space.reps):
        Pi = P[i]
        for j, m in enumerate(g.mats):
            # g-term contributes chi(g^{-1}) * psibar(u) at column t for x*g = u x_t
            t = space.coset_rep[g.index[x * m]]
            f = space.coset_fac[g.index[x * m]]
            Pi[t] = (Pi[t] + chi_inv[table.classes.class_of[j]] * f) % lp
    scale = (deg * pow(g.order, -1, lp)) % lp
    P = [[(scale * v) % lp for v in row_] for row_ in P]

    # isotypic component = column space of the projector P
    Pt = [[P[i][j] for i in range(r)] for j in range(r)]
    basis, _ = rref_mod(Pt, lp)
    if len(basis) != deg:
        raise ProjectionRankMismatch(
            f"isotypic rank {len(basis)} != degree {deg} (multiplicity one violated)")

    # cut out right-(U, psibar)-equivariance: rho(u) f = psibar(u) f for all u,
    # solving for coefficients z with f = sum z_t basis_t
    cond_rows = []
    for u in space.U:
        fpsi = psi.on_unipotent(u)
        cols = []
        for vec in basis:
            tr = space.right_translate(vec, u)
            cols.append([(a - fpsi * b) % lp for a, b in zip(tr, vec)])
        for pos in range(r):
            cond_rows.append([cols[t][pos] for t in range(len(basis))])
    ker = kernel_mod(cond_rows, lp)
    if len(ker) != 1:
        raise ProjectionRankMismatch(
            f"(U, psibar)-bi-equivariant subspace has dimension {len(ker)} != 1")
    z = ker[0]
    vec = [0] * r
    for t, co in enumerate(z):
        if co:
            for i in range(r):
                vec[i] = (vec[i] + co * basis[t][i]) % lp
    # normalize at the identity
    one = space.evaluate(vec, identity(g.field, g.n))
    if one == 0:
        raise ProjectionRankMismatch("bi-equivariant vector vanishes at the identity")
    oneinv = pow(one, -1, lp)
    vec = [(v * oneinv) % lp for v in vec]
    return BesselTable(table, row, psi, space.full_values(vec))


def check_bessel_properties(btab, model_check=True):
    """Per-property report for (B1)-(B4); counterexamples are group indices."""
    table = btab.table
    g = btab.group
    F = g.field
    n = g.n
    lp = table.comp.lprime
    report = {}

    U_set = {m for m in unipotent_upper_elements(F, n)}
    bad = None
    for p in mirabolic_elements(g):
        nonzero = btab.value(p) != 0
        if nonzero != (p in U_set):
            bad = g.index[p]
            break
    report["B1"] = {"passed": bad is None, "counterexample": bad}

    recomputed = bessel_from_character(table, btab.row, btab.psi)
    report["B2"] = {"passed": recomputed.values == btab.values, "counterexample": None}

    omega = table.central_character(btab.row)
    bad = None
    for z in F.units():
        for m in g.mats:
            zm = Mat(F, [[F.mul(z, v) for v in row] for row in m.rows])
            if (btab.value(zm) - omega[z] * btab.value(m)) % lp:
                bad = (z, g.index[m])
                break
        if bad:
            break
    report["B3"] = {"passed": bad is None, "counterexample": bad}

    dual_row = table.contragredient_row(btab.row)
    dual = bessel_from_character(table, dual_row, btab.psi.inverse())
    bad = None
    for i, m in enumerate(g.mats):
        if (btab.values[g.inv_index(i)] - dual.values[i]) % lp:
            bad = i
            break
    report["B4"] = {"passed": bad is None, "counterexample": bad}

    if model_check:
        oracle = bessel_via_model(table, btab.row, btab.psi)
        report["model"] = {"passed": oracle.values == btab.values, "counterexample": None}

    report["all_passed"] = all(v["passed"] for v in report.values() if isinstance(v, dict))
    return report


def bessel_bop_average(btab):
    """g |-> sum_{b in B^op_{n-1}} B(g b); the value of f_new at the Sigma coset.

    Fixed by right translation by every element of B^op_{n-1} and equal to 1
    at the identity (only b = 1 meets the unipotent support of B there).
    """
    g = btab.group
    lp = btab.table.comp.lprime
    bops = bop_elements(g.field, g.n)
    out = []
    for m in g.mats:
        s = 0
        for b in bops:
            s += btab.value(m * b)
        out.append(s % lp)
    return tuple(out)


def averaging_lemma_check(alpha, group, psi, g):
    """(1/|U_r|) sum_{u, b} psibar^{-1}(u) alpha(b u g) == alpha(g).

    ``alpha`` is a full value tuple over the group enumeration of a left
    (U, psibar)-equivariant function.
    """
    lp = psi.comp.lprime
    U = unipotent_upper_elements(group.field, group.n)
    bops = bop_elements(group.field, group.n)
    s = 0
    psi_inv = psi.inverse()
    for u in U:
        fu = psi_inv.on_unipotent(u)
        ug = u * g
        for b in bops:
            s += fu * alpha[group.index[b * ug]]
    s = (s * pow(len(U), -1, lp)) % lp
    return s == alpha[group.index[g]] % lp


def random_equivariant_function(group, psi, rng):
    """Random left-(U, psibar)-equivariant function as a full value tuple."""
    space = WhittakerSpace(group, psi)
    vec = space.random_vector(rng)
    return space.full_values(vec)


def gelfand_whittaker_finite(btab, wmat):
    """The finite ingredient B(kbar) of the Gelfand Whittaker function.

    ``wmat`` must be a window matrix over the local ring with integral
    entries and unit determinant; raises NotIntegral otherwise.
    """
    reduced = wmat.reduce_mod_p(btab.group.field)
    if reduced.det() == 0:
        raise NotIntegral("matrix does not lie in GL_n(o)")
    return btab.value(reduced)
