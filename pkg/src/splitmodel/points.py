"""Points of the special fiber: validation of the defining conditions, the
pair of stratum invariants (h, l), explicit chart constructions, the
dimension formula, and exhaustive or sampled stratum censuses.

A point is a pair of subspaces (F, G) of the frame's 2n-space: F of rank n
and isotropic for the symmetric pairing, G of rank s squeezed between the
images of (t+pi) and the kernel of (t-pi).  Its stratum is labeled by
h = dim t*F and l = dim(G meet G-perp') for the modified pairing.
"""

from __future__ import annotations

import random
from typing import NamedTuple

from .errors import (
    AmbientMismatch,
    BadParameters,
    BudgetExceeded,
    InvalidPoint,
    ParityViolated,
    RelationViolated,
    RingUnsupported,
)
from .frame import Frame, build_frame, congruence_transform, normal_form_gram, orthogonal
from .linalg import (
    Matrix,
    Subspace,
    charpoly,
    columns_contain,
    gaussian_binomial,
    gpoly_mul,
    hstack,
    intermediate_subspaces_iter,
    kernel_basis,
    rank,
    residual_rank,
    solve_local,
    solve_right,
    subspaces_iter,
)
from .rings import PrimeField


class StratumLabel(NamedTuple):
    h: int
    l: int


class ValidationReport:
    """Per-condition outcome of point validation.  Conditions that cannot
    be evaluated over the coefficient ring are None ("skipped") and do not
    count against the verdict."""

    __slots__ = ("ranks", "containment", "isotropy", "splitting_a",
                 "splitting_b", "spin", "kottwitz")

    def __init__(self, ranks, containment, isotropy, splitting_a,
                 splitting_b, spin, kottwitz):
        self.ranks = ranks
        self.containment = containment
        self.isotropy = isotropy
        self.splitting_a = splitting_a
        self.splitting_b = splitting_b
        self.spin = spin
        self.kottwitz = kottwitz

    @property
    def verdict(self) -> bool:
        flags = (self.ranks, self.containment, self.isotropy,
                 self.splitting_a, self.splitting_b, self.spin, self.kottwitz)
        return all(f for f in flags if f is not None)

    def passes_closed_conditions(self) -> bool:
        """Conditions (1)-(3) only, the ones defining the closed subfunctor."""
        return bool(self.ranks and self.containment and self.isotropy
                    and self.splitting_a and self.splitting_b)

    def first_failure(self):
        for name in ("ranks", "containment", "isotropy", "splitting_a",
                     "splitting_b", "spin", "kottwitz"):
            if getattr(self, name) is False:
                return name
        return None

    def as_dict(self):
        return {"ranks": self.ranks, "containment": self.containment,
                "isotropy": self.isotropy, "splitting_a": self.splitting_a,
                "splitting_b": self.splitting_b, "spin": self.spin,
                "kottwitz": self.kottwitz, "verdict": self.verdict}

    def __repr__(self):
        return f"ValidationReport({self.as_dict()!r})"


class ModelPoint:
    """A candidate point: basis matrices for F (n rows) and G (s rows) in
    frame coordinates.  Rows are basis vectors of length 2n."""

    __slots__ = ("frame", "ring", "F_rows", "G_rows", "r", "s",
                 "predicted_label", "report")

    def __init__(self, frame: Frame, F_rows: Matrix, G_rows: Matrix,
                 predicted_label=None):
        n = frame.n
        if F_rows.ring is not frame.ring or G_rows.ring is not frame.ring:
            raise AmbientMismatch("point and frame coefficient rings differ")
        if F_rows.ncols != 2 * n or G_rows.ncols != 2 * n:
            raise AmbientMismatch("basis vectors must have length 2n")
        self.frame = frame
        self.ring = frame.ring
        self.F_rows = F_rows
        self.G_rows = G_rows
        self.s = G_rows.nrows
        self.r = n - self.s
        self.predicted_label = predicted_label
        self.report = None
        if self.s > self.r:
            raise BadParameters("signature needs s <= r")
        # construction-time sanity: ranks and containment
        if _basis_rank(F_rows) != n or _basis_rank(G_rows) != self.s:
            raise InvalidPoint("basis matrices are not of full rank")
        if not _rows_contained(F_rows, G_rows):
            raise InvalidPoint("G is not contained in F")

    def F_subspace(self) -> Subspace:
        return Subspace(self.ring, 2 * self.frame.n, self.F_rows.rows())

    def G_subspace(self) -> Subspace:
        return Subspace(self.ring, 2 * self.frame.n, self.G_rows.rows())

    def validate(self, kottwitz=False) -> ValidationReport:
        self.report = validate(self.frame, self.F_rows, self.G_rows,
                               kottwitz=kottwitz)
        return self.report

    def __repr__(self):
        return (f"ModelPoint(n={self.frame.n}, s={self.s} over "
                f"{self.ring!r})")


def _basis_rank(rows: Matrix) -> int:
    if rows.ring.is_field:
        return rank(rows)
    return residual_rank(rows)


def _rows_contained(outer: Matrix, inner: Matrix) -> bool:
    """Row span of inner inside row span of outer (columns after transpose)."""
    return columns_contain(outer.transpose(), inner.transpose())


def _as_rows_matrix(ring, n2, obj, expected_rows=None):
    if isinstance(obj, Subspace):
        rows = [list(r) for r in obj.basis]
    elif isinstance(obj, Matrix):
        rows = obj.rows()
    else:
        rows = [list(r) for r in obj]
    M = Matrix(ring, rows)
    if M.ncols != n2:
        raise AmbientMismatch("wrong ambient dimension")
    if expected_rows is not None and M.nrows != expected_rows:
        raise AmbientMismatch("wrong number of basis vectors")
    return M


def validate(frame: Frame, F, G, kottwitz=False) -> ValidationReport:
    """Check the defining conditions of a point (F, G) over the frame's
    coefficient ring.

    (1) ranks n and s with G inside F; (2) F isotropic for the symmetric
    pairing; (3) (t+pi)F inside G and (t-pi)G = 0; (4) parity of
    rank((t+pi) on F) equals parity of s -- evaluated on field points only,
    reported as skipped (None) otherwise.  The optional Kottwitz flag also
    compares the characteristic polynomial of t on F with the split form
    prescribed by the signature.
    """
    ring = frame.ring
    n = frame.n
    F_rows = _as_rows_matrix(ring, 2 * n, F)
    G_rows = _as_rows_matrix(ring, 2 * n, G)
    s = G_rows.nrows
    r = n - s

    ranks_ok = (F_rows.nrows == n and _basis_rank(F_rows) == n
                and _basis_rank(G_rows) == s)
    containment = ranks_ok and _rows_contained(F_rows, G_rows)

    # (2): every symmetric pairing of basis vectors of F vanishes
    isotropy = (F_rows * frame.gram_sym * F_rows.transpose()).is_zero()

    pi = frame.pi
    t = frame.t_matrix
    I2n = Matrix.identity(ring, 2 * n)
    t_plus = t + I2n * pi
    t_minus = t - I2n * pi

    # (3a): (t+pi)F inside G
    image_a = (t_plus * F_rows.transpose())
    if ranks_ok:
        splitting_a = columns_contain(G_rows.transpose(), image_a)
    else:
        splitting_a = False
    # (3b): (t-pi)G = 0
    splitting_b = (t_minus * G_rows.transpose()).is_zero()

    if ring.is_field:
        spin = (rank(F_rows * t_plus.transpose()) - s) % 2 == 0
    else:
        spin = None  # skipped: defined via field-point form only

    kott = None
    if kottwitz:
        kott = _kottwitz_check(frame, F_rows, r, s)

    return ValidationReport(ranks_ok, containment, isotropy, splitting_a,
                            splitting_b, spin, kott)


def _kottwitz_check(frame: Frame, F_rows: Matrix, r: int, s: int):
    """char poly of t acting on F equals (T+pi)^r (T-pi)^s."""
    ring = frame.ring
    n = frame.n
    cols = F_rows.transpose()
    t_cols = frame.t_matrix * cols
    coeffs = []
    for j in range(n):
        b = t_cols.col(j)
        if ring.is_field:
            x = solve_right(cols, b)
        else:
            x = solve_local(cols, b)
        if x is None:
            return False
        coeffs.append(x)
    action = Matrix.from_cols(ring, coeffs)
    got = charpoly(action)
    pi = frame.pi
    one = ring.one
    target = (one,)
    for _ in range(r):
        target = gpoly_mul(target, (pi, one), ring)
    for _ in range(s):
        target = gpoly_mul(target, (-pi, one), ring)
    return tuple(got) == tuple(target)


# ---------------------------------------------------------------------------
# stratum invariants
# ---------------------------------------------------------------------------

def invariants(point: ModelPoint) -> StratumLabel:
    """(h, l) of a validated field point: h = dim tF,
    l = dim(G meet G-perp')."""
    frame = point.frame
    ring = point.ring
    if not ring.is_field:
        raise RingUnsupported("invariants are defined for field points")
    report = point.report or point.validate()
    if not report.passes_closed_conditions():
        raise InvalidPoint("point fails the closed conditions")
    h = rank(point.F_rows * frame.t_matrix.transpose())
    G = point.G_subspace()
    Gperp = orthogonal(frame, G, "modified")
    l = G.intersect(Gperp).dim
    s = point.s
    if not (0 <= h <= l <= s) or (l - s) % 2 != 0:
        raise InvalidPoint(f"invariant bookkeeping violated: h={h}, l={l}, s={s}")
    return StratumLabel(h, l)


def stratum_dimension(r: int, s: int, h: int, l: int) -> int:
    """Dimension of the (h, l) stratum for signature (r, s)."""
    if not (0 <= h <= l <= s <= r):
        raise BadParameters("need 0 <= h <= l <= s <= r")
    if (l - s) % 2 != 0 or (h - l) % 2 != 0:
        raise BadParameters("labels must satisfy h = l = s mod 2")
    d = l - h
    return r * s - d * (d - 1) // 2


# ---------------------------------------------------------------------------
# chart constructions
# ---------------------------------------------------------------------------

def _base_field(ring):
    return getattr(ring, "base", ring)


def _coerce_square(ring, obj, size, name):
    if obj is None:
        return Matrix.zero(ring, size, size)
    if isinstance(obj, Matrix):
        M = obj.map_entries(ring.coerce, ring)
    else:
        M = Matrix(ring, [list(r) for r in obj])
    if M.nrows != size or M.ncols != size:
        raise BadParameters(f"{name} must be {size}x{size}")
    return M


def _coerce_rect(ring, obj, nrows, ncols, name):
    if obj is None:
        return Matrix.zero(ring, nrows, ncols)
    if isinstance(obj, Matrix):
        M = obj.map_entries(ring.coerce, ring)
    else:
        M = Matrix(ring, [list(r) for r in obj])
    if M.nrows != nrows or M.ncols != ncols:
        raise BadParameters(f"{name} must be {nrows}x{ncols}")
    return M


def chart_transform(n: int, case_matrix: Matrix, ring) -> Matrix:
    """C over ring with C^t (gram_mod) C = the chart's normal-form matrix.

    The congruence is solved over the residue field and coerced up, which
    is valid because both matrices have entries there."""
    base = _base_field(ring)
    from .frame import _j_matrix  # same basis convention
    A = -_j_matrix(base, n)
    B = case_matrix if case_matrix.ring is base else case_matrix.map_entries(
        base.coerce, base)
    C = congruence_transform(A, B)
    if ring is base:
        return C
    return C.map_entries(ring.coerce, ring)


def _point_from_ft_columns(frame: Frame, C: Matrix, f_cols, t_cols,
                           g_f_cols, g_t_cols, predicted=None) -> ModelPoint:
    """Assemble a ModelPoint from chart coordinates.

    Each column is given by its f-part and tf-part coefficient vectors
    (length n); frame coordinates are C applied to each part."""
    ring = frame.ring
    n = frame.n

    def to_frame_vec(fpart, tpart):
        top = C.apply_to_vector(fpart)
        bot = C.apply_to_vector(tpart)
        return top + bot

    F_rows = Matrix(ring, [to_frame_vec(f, t) for f, t in zip(f_cols, t_cols)],
                    coerce=False)
    G_rows = Matrix(ring, [to_frame_vec(f, t) for f, t in zip(g_f_cols, g_t_cols)],
                    coerce=False)
    return ModelPoint(frame, F_rows, G_rows, predicted_label=predicted)


def _unit_vec(ring, n, i):
    v = [ring.zero] * n
    v[i] = ring.one
    return v


def chart_point_eps(n: int, s: int, X=None, W=None, X0=None, W0=None,
                    ring=None) -> ModelPoint:
    """Point of the chart around the worst point.

    Even s: parameters X (arbitrary s x s) and W (s x s skew with
    (X - X^t)W = 0); predicted invariants (rk W, dim ker(X - X^t)).
    Odd s: X0, W0 of size s-1 with the same relations; the ambient chart
    pads them with a zero first row and column and adds one extra plain
    basis vector, so predicted invariants gain 1 + each entry.
    """
    if ring is None:
        ring = PrimeField(3)
    if n % 2 != 0 or n < 4 or not (1 <= s <= n // 2):
        raise BadParameters("need even n >= 4 and 1 <= s <= n/2")
    r = n - s
    q = (r - s) // 2
    if s % 2 == 0:
        if X0 is not None or W0 is not None:
            raise BadParameters("even s takes X and W")
        X = _coerce_square(ring, X, s, "X")
        W = _coerce_square(ring, W, s, "W")
    else:
        if X is not None or W is not None:
            raise BadParameters("odd s takes X0 and W0")
        X0 = _coerce_square(ring, X0, s - 1, "X0")
        W0 = _coerce_square(ring, W0, s - 1, "W0")
        z = ring.zero
        X = Matrix(ring, [[z] * s] + [[z] + row for row in X0.rows()],
                   coerce=False)
        W = Matrix(ring, [[z] * s] + [[z] + row for row in W0.rows()],
                   coerce=False)
    if not (W + W.transpose()).is_zero():
        raise RelationViolated("W must be skew")
    K = X - X.transpose()
    if not (K * W).is_zero():
        raise RelationViolated("(X - X^t) W must vanish")

    frame = build_frame(n, ring=ring)
    T = normal_form_gram(s, s, s, n, "eps-stratum", ring=_base_field(ring)).matrix
    C = chart_transform(n, T, ring)
    zvec = [ring.zero] * n

    def m_col(j):
        v = [ring.zero] * n
        v[j] = ring.one
        for i in range(s):
            v[n - s + i] = X.data[i][j]
        return v

    g_t = [m_col(j) for j in range(s)]
    g_f = [list(zvec) for _ in range(s)]

    f_cols = []
    t_cols = []
    # pure image-of-t columns: the s G-columns, then the two q-blocks
    for j in range(s):
        f_cols.append(list(zvec))
        t_cols.append(m_col(j))
    for j in range(q):
        f_cols.append(list(zvec))
        t_cols.append(_unit_vec(ring, n, s + j))
    for j in range(q):
        f_cols.append(list(zvec))
        t_cols.append(_unit_vec(ring, n, s + q + j))
    XW = X * W
    if s % 2 == 0:
        mixed = range(s)
    else:
        mixed = range(1, s)
        # the replaced column: a plain f-vector
        f_cols.append(_unit_vec(ring, n, 0))
        t_cols.append(list(zvec))
    for j in mixed:
        fv = [ring.zero] * n
        for i in range(s):
            fv[i] = W.data[i][j]
            fv[n - s + i] = XW.data[i][j]
        f_cols.append(fv)
        t_cols.append(_unit_vec(ring, n, n - s + j))

    if ring.is_field:
        # the extra plain basis vector of the odd chart contributes one
        # more dimension to the image of t
        h_pred = rank(W) + (0 if s % 2 == 0 else 1)
        predicted = StratumLabel(h_pred, s - rank(K))
    else:
        predicted = None
    point = _point_from_ft_columns(frame, C, f_cols, t_cols, g_f, g_t,
                                   predicted=predicted)
    point.validate()
    return point


def chart_point_general(n: int, s: int, h: int, l: int, Y2=None, Z=None,
                        ring=None) -> ModelPoint:
    """Point of the chart adapted to the (h, l) stratum: parameters Y2 and
    skew Z of size (l-h) with (Y2 - Y2^t) Z = 0; predicted invariants
    (h + rk Z, h + dim ker(Y2 - Y2^t))."""
    if ring is None:
        ring = PrimeField(3)
    if n % 2 != 0 or n < 4 or not (0 <= h <= l <= s <= n // 2):
        raise BadParameters("need even n >= 4 and 0 <= h <= l <= s <= n/2")
    if (s - l) % 2 != 0 or (l - h) % 2 != 0:
        raise ParityViolated("need h = l = s mod 2")
    r = n - s
    d = l - h
    Y2 = _coerce_square(ring, Y2, d, "Y2")
    Z = _coerce_square(ring, Z, d, "Z")
    if not (Z + Z.transpose()).is_zero():
        raise RelationViolated("Z must be skew")
    K = Y2 - Y2.transpose()
    if not (K * Z).is_zero():
        raise RelationViolated("(Y2 - Y2^t) Z must vanish")

    frame = build_frame(n, ring=ring)
    T = normal_form_gram(h, l, s, n, "general", ring=_base_field(ring)).matrix
    C = chart_transform(n, T, ring)
    zvec = [ring.zero] * n
    # block offsets for sizes (h, l-h, s-l, r-l, l-h, h)
    off1 = h
    off4 = n - l

    def with_y2_tail(idx):
        """t-column e_idx plus the Y2 correction when idx sits in block 2."""
        v = _unit_vec(ring, n, idx)
        if off1 <= idx < off1 + d:
            ip = idx - off1
            for j in range(d):
                v[off4 + j] = v[off4 + j] + Y2.data[j][ip]
        return v

    g_f, g_t = [], []
    for i in range(h):
        g_f.append(list(zvec))
        g_t.append(_unit_vec(ring, n, i))
    for i in range(d):
        g_f.append(list(zvec))
        g_t.append(with_y2_tail(off1 + i))
    for i in range(s - l):
        g_f.append(list(zvec))
        g_t.append(_unit_vec(ring, n, l + i))

    f_cols, t_cols = [], []
    for i in range(n - l):
        f_cols.append(list(zvec))
        t_cols.append(with_y2_tail(i))
    for j in range(h):
        f_cols.append(_unit_vec(ring, n, j))
        t_cols.append(list(zvec))
    YZ = Y2 * Z
    for j in range(d):
        fv = [ring.zero] * n
        for i in range(d):
            fv[off1 + i] = Z.data[i][j]
            fv[off4 + i] = YZ.data[i][j]
        f_cols.append(fv)
        t_cols.append(_unit_vec(ring, n, off4 + j))

    if ring.is_field:
        predicted = StratumLabel(h + rank(Z), h + (d - rank(K)))
    else:
        predicted = None
    point = _point_from_ft_columns(frame, C, f_cols, t_cols, g_f, g_t,
                                   predicted=predicted)
    point.validate()
    return point


def chart_point_local(n: int, s: int, X=None, Y=None, Z=None, A=None, B=None,
                      ring=None, pi=None) -> ModelPoint:
    """Point of the affine chart over a ring carrying a uniformizer value.

    Parameters per the presentation: X, Y of size q x s (q = (r-s)/2),
    Z, A, B of size s x s, subject to A^t B + B^t A = 0 and
    (Z - Z^t + X^t Y - Y^t X) B = 2 pi A.  A defaults to the identity."""
    if ring is None:
        ring = PrimeField(3)
    if n % 2 != 0 or n < 4 or not (1 <= s <= n // 2):
        raise BadParameters("need even n >= 4 and 1 <= s <= n/2")
    pi = ring.zero if pi is None else ring.coerce(pi)
    r = n - s
    q = (r - s) // 2
    X = _coerce_rect(ring, X, q, s, "X")
    Y = _coerce_rect(ring, Y, q, s, "Y")
    Z = _coerce_square(ring, Z, s, "Z")
    A = Matrix.identity(ring, s) if A is None else _coerce_square(ring, A, s, "A")
    B = _coerce_square(ring, B, s, "B")
    Q = Z - Z.transpose()
    if q > 0:
        Q = Q + X.transpose() * Y - Y.transpose() * X
    if not (A.transpose() * B + B.transpose() * A).is_zero():
        raise RelationViolated("A^t B + B^t A must vanish")
    if not (Q * B - A * (pi + pi)).is_zero():
        raise RelationViolated("(Z - Z^t + X^t Y - Y^t X) B must equal 2 pi A")

    frame = build_frame(n, ring=ring, pi=pi)
    T = normal_form_gram(s, s, s, n, "eps-stratum", ring=_base_field(ring)).matrix
    C = chart_transform(n, T, ring)

    def m_col(j):
        v = [ring.zero] * n
        v[j] = ring.one
        for i in range(q):
            v[s + i] = X.data[i][j]
            v[s + q + i] = Y.data[i][j]
        for i in range(s):
            v[n - s + i] = Z.data[i][j]
        return v

    def n_col(group, j):
        v = [ring.zero] * n
        if group == 0:
            v[s + j] = ring.one
            for i in range(s):
                v[n - s + i] = Y.data[j][i]
        else:
            v[s + q + j] = ring.one
            for i in range(s):
                v[n - s + i] = -X.data[j][i]
        return v

    M_cols = [m_col(j) for j in range(s)]
    MB = Matrix.from_cols(ring, M_cols) * B

    g_f = [[pi * c for c in col] for col in M_cols]
    g_t = [list(col) for col in M_cols]

    f_cols = [list(col) for col in g_f]
    t_cols = [list(col) for col in g_t]
    for group in (0, 1):
        for j in range(q):
            nc = n_col(group, j)
            f_cols.append([-(pi * c) for c in nc])
            t_cols.append(nc)
    for j in range(s):
        n1 = [ring.zero] * n
        for i in range(s):
            n1[n - s + i] = A.data[i][j]
        f_cols.append([MB.data[i][j] - pi * n1[i] for i in range(n)])
        t_cols.append(n1)

    point = _point_from_ft_columns(frame, C, f_cols, t_cols, g_f, g_t)
    point.validate(kottwitz=not pi.is_zero())
    return point


# ---------------------------------------------------------------------------
# census
# ---------------------------------------------------------------------------

class StratumCensus:
    __slots__ = ("params", "strata", "rejected", "seed")

    def __init__(self, params, strata, rejected, seed):
        self.params = params
        self.strata = strata
        self.rejected = rejected
        self.seed = seed

    def labels(self):
        return {lab for lab, c in self.strata.items() if c > 0}

    def to_json_dict(self):
        return {
            "params": self.params,
            "strata": [{"h": lab[0], "l": lab[1], "count": self.strata[lab]}
                       for lab in sorted(self.strata)],
            "rejected": dict(sorted(self.rejected.items())),
            "seed": self.seed,
        }

    def __repr__(self):
        return f"StratumCensus({self.params!r}, strata={dict(self.strata)!r})"


_REJECT_REASONS = ("rank", "isotropy", "splitting-a", "splitting-b", "spin")


def _reject_reason(report: ValidationReport) -> str:
    name = report.first_failure()
    return {"ranks": "rank", "containment": "rank", "isotropy": "isotropy",
            "splitting_a": "splitting-a", "splitting_b": "splitting-b",
            "spin": "spin"}.get(name, "rank")


def _census_exhaustive(n, s, q, budget, seed, workers):
    field = PrimeField(q)
    frame = build_frame(n, ring=field)
    n2 = 2 * n
    zrow = [field.zero] * n

    g_list = list(subspaces_iter(field, n, s))
    # candidate count precheck: sum over G of the intermediate-subspace count
    total = 0
    per_g = []
    for Gproj in g_list:
        G = Subspace(field, n2, [zrow + list(row) for row in Gproj.basis])
        Gperp = orthogonal(frame, G, "modified")
        L = G.sum(Gperp)
        l_of_g = n - L.dim
        cnt = gaussian_binomial(s + l_of_g, l_of_g, q)
        per_g.append((G, L))
        total += cnt
    if total > budget:
        raise BudgetExceeded(f"{total} candidates exceed budget {budget}")

    strata = {}
    rejected = {rr: 0 for rr in _REJECT_REASONS}
    examined = 0
    # deterministic round-robin sharding; merged associatively
    shards = [[] for _ in range(workers)]
    for idx, item in enumerate(per_g):
        shards[idx % workers].append(item)
    for shard in shards:
        for G, L in shard:
            upper_rows = ([list(row[n:]) + [field.zero] * n for row in G.basis]
                          + [[field.zero] * n + row for row in
                             Matrix.identity(field, n).rows()])
            U = Subspace(field, n2, upper_rows)
            for F in intermediate_subspaces_iter(L, U, n):
                examined += 1
                point = ModelPoint(frame, F.matrix(),
                                   Matrix.from_rows(field,
                                                    [list(rw) for rw in G.basis]))
                report = point.validate()
                if not report.verdict:
                    rejected[_reject_reason(report)] += 1
                    continue
                lab = invariants(point)
                strata[lab] = strata.get(lab, 0) + 1
    params = {"n": n, "s": s, "q": q, "strategy": "exhaustive",
              "budget": budget, "workers": workers, "examined": examined}
    return StratumCensus(params, strata, rejected, seed)


def random_skew(field, rng, size):
    data = [[field.zero] * size for _ in range(size)]
    for i in range(size):
        for j in range(i + 1, size):
            c = field.random(rng)
            data[i][j] = c
            data[j][i] = -c
    return Matrix(field, data, coerce=False)


def random_symmetric(field, rng, size):
    data = [[field.zero] * size for _ in range(size)]
    for i in range(size):
        data[i][i] = field.random(rng)
        for j in range(i + 1, size):
            c = field.random(rng)
            data[i][j] = c
            data[j][i] = c
    return Matrix(field, data, coerce=False)


def random_skew_annihilating(field, rng, W: Matrix):
    """Random skew K with K W = 0, uniform over the solution space."""
    size = W.nrows
    pairs = [(i, j) for i in range(size) for j in range(i + 1, size)]
    if not pairs:
        return Matrix.zero(field, size, size)
    # linear map: skew coordinates -> entries of K*W
    rows = []
    for a in range(size):
        for b in range(size):
            row = []
            for (i, j) in pairs:
                # contribution of K[i][j] = c, K[j][i] = -c to (K W)[a][b]
                coef = field.zero
                if a == i:
                    coef = coef + W.data[j][b]
                if a == j:
                    coef = coef - W.data[i][b]
                row.append(coef)
            rows.append(row)
    M = Matrix(field, rows, coerce=False)
    basis = kernel_basis(M)
    coeffs = [field.random(rng) for _ in basis]
    data = [[field.zero] * size for _ in range(size)]
    for c, vec in zip(coeffs, basis):
        for (i, j), entry in zip(pairs, vec):
            data[i][j] = data[i][j] + c * entry
            data[j][i] = data[j][i] - c * entry
    return Matrix(field, data, coerce=False)


def sample_eps_chart_point(n, s, field, rng) -> ModelPoint:
    """Seeded random point of the worst-point chart with valid relations."""
    size = s if s % 2 == 0 else s - 1
    W = random_skew(field, rng, size)
    K = random_skew_annihilating(field, rng, W)
    S = random_symmetric(field, rng, size)
    half = (field.one + field.one).inverse()
    Xm = (K + S).map_entries(lambda c: c * half)
    if s % 2 == 0:
        return chart_point_eps(n, s, X=Xm, W=W, ring=field)
    return chart_point_eps(n, s, X0=Xm, W0=W, ring=field)


def sample_general_chart_point(n, s, h, l, field, rng) -> ModelPoint:
    """Seeded random point of the chart adapted to the (h, l) stratum.

    Draws skew Z, then a skew complement annihilating it, so the chart
    relation (Y2 - Y2^t) Z = 0 holds by construction."""
    d = l - h
    if d == 0:
        return chart_point_general(n, s, h, l, ring=field)
    Z = random_skew(field, rng, d)
    K = random_skew_annihilating(field, rng, Z)
    S = random_symmetric(field, rng, d)
    half = (field.one + field.one).inverse()
    Y2 = K.map_entries(lambda c: c * half) + S
    return chart_point_general(n, s, h, l, Y2=Y2, Z=Z, ring=field)


def _census_sampled(n, s, q, budget, seed, workers):
    field = PrimeField(q)
    strata = {}
    rejected = {rr: 0 for rr in _REJECT_REASONS}
    examined = 0
    mismatches = 0
    per_worker = [budget // workers + (1 if w < budget % workers else 0)
                  for w in range(workers)]
    for w in range(workers):
        rng = random.Random(seed * 1000003 + w)
        for _ in range(per_worker[w]):
            examined += 1
            point = sample_eps_chart_point(n, s, field, rng)
            report = point.report
            if not report.verdict:
                rejected[_reject_reason(report)] += 1
                continue
            lab = invariants(point)
            if point.predicted_label is not None and lab != point.predicted_label:
                mismatches += 1
            strata[lab] = strata.get(lab, 0) + 1
    params = {"n": n, "s": s, "q": q, "strategy": "chart-sampled",
              "budget": budget, "workers": workers, "examined": examined,
              "prediction_mismatches": mismatches}
    return StratumCensus(params, strata, rejected, seed)


def census(n: int, s: int, q: int, strategy: str = "exhaustive",
           budget: int = 10 ** 8, seed: int = 0, workers: int = 1) -> StratumCensus:
    """Count validated points per stratum label.

    Exhaustive strategy enumerates G over the s-dimensional subspaces of
    the image of t, then F over the interval [G + G-perp', preimage of G
    under t]; every candidate runs the full validator.  Chart-sampled
    strategy draws `budget` seeded random points of the worst-point chart.
    """
    if n % 2 != 0 or n < 4 or not (1 <= s <= n // 2):
        raise BadParameters("need even n >= 4 and 1 <= s <= n/2")
    if workers < 1:
        raise BadParameters("workers must be positive")
    if strategy == "exhaustive":
        return _census_exhaustive(n, s, q, budget, seed, workers)
    if strategy == "chart-sampled":
        return _census_sampled(n, s, q, budget, seed, workers)
    raise BadParameters(f"unknown strategy {strategy!r}")


def iter_validated_points(n: int, s: int, q: int, budget: int = 10 ** 8):
    """Yield (point, label) over every validated point of the exhaustive
    walk, in the same candidate order the exhaustive census uses."""
    if n % 2 != 0 or n < 4 or not (1 <= s <= n // 2):
        raise BadParameters("need even n >= 4 and 1 <= s <= n/2")
    field = PrimeField(q)
    frame = build_frame(n, ring=field)
    n2 = 2 * n
    zrow = [field.zero] * n

    per_g = []
    total = 0
    for Gproj in subspaces_iter(field, n, s):
        G = Subspace(field, n2, [zrow + list(row) for row in Gproj.basis])
        Gperp = orthogonal(frame, G, "modified")
        L = G.sum(Gperp)
        total += gaussian_binomial(s + n - L.dim, n - L.dim, q)
        per_g.append((G, L))
    if total > budget:
        raise BudgetExceeded(f"{total} candidates exceed budget {budget}")

    for G, L in per_g:
        upper_rows = ([list(row[n:]) + [field.zero] * n for row in G.basis]
                      + [[field.zero] * n + row for row in
                         Matrix.identity(field, n).rows()])
        U = Subspace(field, n2, upper_rows)
        for F in intermediate_subspaces_iter(L, U, n):
            point = ModelPoint(frame, F.matrix(),
                               Matrix.from_rows(field,
                                                [list(rw) for rw in G.basis]))
            if point.validate().verdict:
                yield point, invariants(point)


# ---------------------------------------------------------------------------
# first-order deformations
# ---------------------------------------------------------------------------

def tangent_report(point: ModelPoint) -> int:
    """Dimension of the space of first-order deformations of (F, G)
    satisfying the linearized closed conditions (1)-(3).

    Unknowns are maps F -> V/F and G -> V/G in the standard Grassmannian
    parametrization, so trivial reparametrizations are already quotiented
    out."""
    frame = point.frame
    field = point.ring
    if not field.is_field:
        raise RingUnsupported("tangent computation runs over field points")
    report = point.report or point.validate()
    if not report.passes_closed_conditions():
        raise InvalidPoint("point fails the closed conditions")

    n2 = 2 * frame.n
    F = point.F_subspace()
    G = point.G_subspace()
    nF, sG = F.dim, G.dim
    compF = [c for c in range(n2) if c not in F.pivots]
    compG = [c for c in range(n2) if c not in G.pivots]
    dF, dG = len(compF), len(compG)

    def reduce_mod(sub: Subspace, v):
        v = list(v)
        for row, p in zip(sub.basis, sub.pivots):
            c = v[p]
            if not c.is_zero():
                v = [a - c * b for a, b in zip(v, row)]
        return v

    f_basis = [list(row) for row in F.basis]
    g_basis = [list(row) for row in G.basis]
    I2n = Matrix.identity(field, n2)
    t_plus = frame.t_matrix + I2n * frame.pi
    t_minus = frame.t_matrix - I2n * frame.pi

    # unknown layout: phi[i][k] (i < nF, k < dF), then delta[a][k] (a < sG, k < dG)
    nvars = nF * dF + sG * dG

    def phi_idx(i, k):
        return i * dF + k

    def delta_idx(a, k):
        return nF * dF + a * dG + k

    rows = []

    def new_row():
        return [field.zero] * nvars

    # (2) linearized isotropy: (f_i, phi_j) + (phi_i, f_j) = 0
    gram = frame.gram_sym
    fg = [gram.apply_to_vector(f) for f in f_basis]  # gram . f_i
    for i in range(nF):
        for j in range(i, nF):
            row = new_row()
            for k, c in enumerate(compF):
                # phi_j coefficient against f_i: e_c . gram . f_i
                row[phi_idx(j, k)] = row[phi_idx(j, k)] + fg[i][c]
                row[phi_idx(i, k)] = row[phi_idx(i, k)] + fg[j][c]
            rows.append(row)

    # (3b) linearized: (t - pi) . delta_a = 0
    for a in range(sG):
        for coord in range(n2):
            row = new_row()
            for k, c in enumerate(compG):
                row[delta_idx(a, k)] = t_minus.data[coord][c]
            rows.append(row)

    # coefficients of (t + pi) f_j in the G basis, and of g_a in the F basis
    Gcols = Matrix.from_cols(field, g_basis)
    Fcols = Matrix.from_cols(field, f_basis)
    c_of = []
    for j in range(nF):
        tf = t_plus.apply_to_vector(f_basis[j])
        c_of.append(solve_right(Gcols, tf))
    u_of = []
    for a in range(sG):
        u_of.append(solve_right(Fcols, g_basis[a]))

    # (3a) linearized: (t + pi) phi_j - sum_a c_a(j) delta_a = 0 mod G
    red_tc = [reduce_mod(G, t_plus.apply_to_vector(_unit_vec(field, n2, c)))
              for c in range(n2)]
    red_e_G = [reduce_mod(G, _unit_vec(field, n2, c)) for c in range(n2)]
    for j in range(nF):
        for coord in range(n2):
            row = new_row()
            nontrivial = False
            for k, c in enumerate(compF):
                val = red_tc[c][coord]
                if not val.is_zero():
                    nontrivial = True
                row[phi_idx(j, k)] = val
            for a in range(sG):
                ca = c_of[j][a]
                if ca.is_zero():
                    continue
                for k, c in enumerate(compG):
                    val = ca * red_e_G[c][coord]
                    if not val.is_zero():
                        nontrivial = True
                    row[delta_idx(a, k)] = row[delta_idx(a, k)] - val
            if nontrivial:
                rows.append(row)

    # (1) linearized: delta_a - sum_j u_aj phi_j = 0 mod F
    red_e_F = [reduce_mod(F, _unit_vec(field, n2, c)) for c in range(n2)]
    for a in range(sG):
        for coord in range(n2):
            row = new_row()
            nontrivial = False
            for k, c in enumerate(compG):
                val = red_e_F[c][coord]
                if not val.is_zero():
                    nontrivial = True
                row[delta_idx(a, k)] = val
            for j in range(nF):
                uj = u_of[a][j]
                if uj.is_zero():
                    continue
                for k, c in enumerate(compF):
                    val = uj * red_e_F[c][coord]
                    if not val.is_zero():
                        nontrivial = True
                    row[phi_idx(j, k)] = row[phi_idx(j, k)] - val
            if nontrivial:
                rows.append(row)

    if not rows:
        return nvars
    system = Matrix(field, rows, coerce=False)
    return len(kernel_basis(system))
