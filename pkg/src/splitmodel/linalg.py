"""Exact linear algebra over the coefficient rings.

Matrices are dense lists of lists of ring elements.  Row reduction over
fields produces canonical reduced row echelon forms, which makes Subspace
equality structural.  Over local rings (truncated series, dual numbers)
elimination only ever pivots on units; ranks are read off the residue
field.  A Smith-type normal form with powers of the distinguished variable
as elementary divisors is provided for matrices over a rational function
field, localized at that variable.
"""

from __future__ import annotations

import itertools

from .errors import (
    BadDimension,
    NotAField,
    NotInvertible,
    RingUnsupported,
    Singular,
)
from .rings import FunctionField, SeriesRing, poly_trim


class Matrix:
    """Immutable-by-convention dense matrix over a fixed ring."""

    __slots__ = ("ring", "nrows", "ncols", "data")

    def __init__(self, ring, data, coerce=True):
        if coerce:
            data = [[ring.coerce(x) for x in row] for row in data]
        self.ring = ring
        self.data = data
        self.nrows = len(data)
        self.ncols = len(data[0]) if data else 0
        for row in data:
            if len(row) != self.ncols:
                raise BadDimension("ragged rows")

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, ring, nrows, ncols):
        z = ring.zero
        return cls(ring, [[z] * ncols for _ in range(nrows)], coerce=False)

    @classmethod
    def identity(cls, ring, n):
        z, o = ring.zero, ring.one
        return cls(ring, [[o if i == j else z for j in range(n)] for i in range(n)],
                   coerce=False)

    @classmethod
    def diagonal(cls, ring, entries):
        entries = [ring.coerce(e) for e in entries]
        n = len(entries)
        z = ring.zero
        return cls(ring, [[entries[i] if i == j else z for j in range(n)]
                          for i in range(n)], coerce=False)

    @classmethod
    def from_rows(cls, ring, rows):
        return cls(ring, [list(r) for r in rows])

    @classmethod
    def from_cols(cls, ring, cols):
        cols = [list(c) for c in cols]
        if not cols:
            return cls(ring, [], coerce=False)
        return cls(ring, [[cols[j][i] for j in range(len(cols))]
                          for i in range(len(cols[0]))])

    @classmethod
    def block(cls, ring, grid):
        """Assemble from a 2d grid of matrices (entries may be Matrix or
        integer 0 placeholders, whose sizes are inferred)."""
        row_heights = [None] * len(grid)
        col_widths = [None] * len(grid[0])
        for i, brow in enumerate(grid):
            for j, blk in enumerate(brow):
                if isinstance(blk, Matrix):
                    row_heights[i] = blk.nrows
                    col_widths[j] = blk.ncols
        if any(h is None for h in row_heights) or any(w is None for w in col_widths):
            raise BadDimension("cannot infer block sizes")
        rows = []
        for i, brow in enumerate(grid):
            for r in range(row_heights[i]):
                row = []
                for j, blk in enumerate(brow):
                    if isinstance(blk, Matrix):
                        row.extend(blk.data[r])
                    else:
                        row.extend([ring.zero] * col_widths[j])
                rows.append(row)
        return cls(ring, rows, coerce=False)

    # -- accessors ----------------------------------------------------------

    def row(self, i):
        return list(self.data[i])

    def col(self, j):
        return [self.data[i][j] for i in range(self.nrows)]

    def rows(self):
        return [list(r) for r in self.data]

    def cols(self):
        return [self.col(j) for j in range(self.ncols)]

    def submatrix(self, rows, cols):
        return Matrix(self.ring, [[self.data[i][j] for j in cols] for i in rows],
                      coerce=False)

    def map_entries(self, fn, ring=None):
        ring = ring or self.ring
        return Matrix(ring, [[fn(x) for x in row] for row in self.data], coerce=False)

    def copy_data(self):
        return [list(r) for r in self.data]

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise BadDimension("shape mismatch in addition")
        return Matrix(self.ring,
                      [[a + b for a, b in zip(r1, r2)]
                       for r1, r2 in zip(self.data, other.data)], coerce=False)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return Matrix(self.ring, [[-a for a in row] for row in self.data], coerce=False)

    def __mul__(self, other):
        if isinstance(other, Matrix):
            if self.ncols != other.nrows:
                raise BadDimension("shape mismatch in product")
            z = self.ring.zero
            bt = [other.col(j) for j in range(other.ncols)]
            out = []
            for row in self.data:
                orow = []
                for colv in bt:
                    acc = z
                    for a, b in zip(row, colv):
                        acc = acc + a * b
                    orow.append(acc)
                out.append(orow)
            return Matrix(self.ring, out, coerce=False)
        c = self.ring.coerce(other)
        return Matrix(self.ring, [[a * c for a in row] for row in self.data],
                      coerce=False)

    def __rmul__(self, other):
        c = self.ring.coerce(other)
        return Matrix(self.ring, [[c * a for a in row] for row in self.data],
                      coerce=False)

    def transpose(self):
        return Matrix(self.ring, [[self.data[i][j] for i in range(self.nrows)]
                                  for j in range(self.ncols)], coerce=False)

    def apply_to_vector(self, v):
        z = self.ring.zero
        out = []
        for row in self.data:
            acc = z
            for a, b in zip(row, v):
                acc = acc + a * b
            out.append(acc)
        return out

    def is_zero(self):
        return all(x.is_zero() for row in self.data for x in row)

    def __eq__(self, other):
        return (isinstance(other, Matrix) and other.ring is self.ring
                and other.data == self.data)

    def __hash__(self):
        return hash((id(self.ring), tuple(tuple(r) for r in self.data)))

    def __repr__(self):
        body = "\n".join("[" + ", ".join(repr(x) for x in row) + "]"
                         for row in self.data)
        return f"Matrix({self.nrows}x{self.ncols} over {self.ring!r})\n{body}"


def hstack(*mats):
    ring = mats[0].ring
    n = mats[0].nrows
    rows = [[] for _ in range(n)]
    for m in mats:
        if m.nrows != n:
            raise BadDimension("hstack height mismatch")
        for i in range(n):
            rows[i].extend(m.data[i])
    return Matrix(ring, rows, coerce=False)


def vstack(*mats):
    ring = mats[0].ring
    c = mats[0].ncols
    rows = []
    for m in mats:
        if m.ncols != c:
            raise BadDimension("vstack width mismatch")
        rows.extend(m.copy_data())
    return Matrix(ring, rows, coerce=False)


# ---------------------------------------------------------------------------
# elimination over fields
# ---------------------------------------------------------------------------

def rref(M: Matrix):
    """Reduced row echelon form over a field.  Returns (R, pivot_columns)."""
    if not M.ring.is_field:
        raise NotAField(f"row reduction needs a field, got {M.ring!r}")
    data = M.copy_data()
    nrows, ncols = M.nrows, M.ncols
    pivots = []
    r = 0
    for c in range(ncols):
        pr = None
        for i in range(r, nrows):
            if not data[i][c].is_zero():
                pr = i
                break
        if pr is None:
            continue
        data[r], data[pr] = data[pr], data[r]
        inv = data[r][c].inverse()
        data[r] = [x * inv for x in data[r]]
        for i in range(nrows):
            if i != r and not data[i][c].is_zero():
                f = data[i][c]
                data[i] = [a - f * b for a, b in zip(data[i], data[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return Matrix(M.ring, data, coerce=False), pivots


def rank(M: Matrix) -> int:
    return len(rref(M)[1])


def det(M: Matrix):
    """Determinant over a field, by elimination."""
    if not M.ring.is_field:
        raise NotAField("determinant by elimination needs a field")
    if M.nrows != M.ncols:
        raise BadDimension("determinant of a non-square matrix")
    data = M.copy_data()
    n = M.nrows
    acc = M.ring.one
    for c in range(n):
        pr = None
        for i in range(c, n):
            if not data[i][c].is_zero():
                pr = i
                break
        if pr is None:
            return M.ring.zero
        if pr != c:
            data[c], data[pr] = data[pr], data[c]
            acc = -acc
        acc = acc * data[c][c]
        inv = data[c][c].inverse()
        for i in range(c + 1, n):
            if not data[i][c].is_zero():
                f = data[i][c] * inv
                data[i] = [a - f * b for a, b in zip(data[i], data[c])]
    return acc


def inverse(M: Matrix) -> Matrix:
    """Inverse over a field; raises Singular when the matrix is not
    invertible."""
    if M.nrows != M.ncols:
        raise BadDimension("inverse of a non-square matrix")
    n = M.nrows
    aug = hstack(M, Matrix.identity(M.ring, n))
    R, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise Singular("matrix is not invertible")
    return R.submatrix(range(n), range(n, 2 * n))


def kernel_basis(M: Matrix):
    """Basis of the right kernel {v : M v = 0} over a field, as a list of
    vectors."""
    R, pivots = rref(M)
    ring = M.ring
    free = [c for c in range(M.ncols) if c not in pivots]
    basis = []
    for fc in free:
        v = [ring.zero] * M.ncols
        v[fc] = ring.one
        for r, pc in enumerate(pivots):
            v[pc] = -R.data[r][fc]
        basis.append(v)
    return basis


def solve_right(M: Matrix, b):
    """One solution of M x = b over a field, or None."""
    aug = hstack(M, Matrix.from_cols(M.ring, [b]))
    R, pivots = rref(aug)
    if M.ncols in pivots:
        return None
    x = [M.ring.zero] * M.ncols
    for r, pc in enumerate(pivots):
        x[pc] = R.data[r][M.ncols]
    return x


# ---------------------------------------------------------------------------
# elimination over local rings (unit pivots only)
# ---------------------------------------------------------------------------

def _residue_matrix(M: Matrix):
    ring = M.ring
    if ring.is_field:
        return M
    if isinstance(ring, SeriesRing):
        return M.map_entries(lambda x: x.residue(), ring.base)
    raise RingUnsupported(f"no residue map for {ring!r}")


def residual_rank(M: Matrix) -> int:
    """Rank of the image over the residue field."""
    return rank(_residue_matrix(M))


def echelon_local(M: Matrix):
    """Row echelon form using only unit pivots.  Returns (R, pivots) where
    pivots lists (row, col) pairs; rows beyond the pivots may retain
    non-unit entries when the matrix has deficient residual rank."""
    ring = M.ring
    data = M.copy_data()
    nrows, ncols = M.nrows, M.ncols
    pivots = []
    r = 0
    for c in range(ncols):
        pr = None
        for i in range(r, nrows):
            if ring.is_unit(data[i][c]):
                pr = i
                break
        if pr is None:
            continue
        data[r], data[pr] = data[pr], data[r]
        inv = data[r][c].inverse()
        data[r] = [x * inv for x in data[r]]
        for i in range(nrows):
            if i != r and not data[i][c].is_zero():
                f = data[i][c]
                data[i] = [a - f * b for a, b in zip(data[i], data[r])]
        pivots.append((r, c))
        r += 1
        if r == nrows:
            break
    return Matrix(ring, data, coerce=False), pivots


def solve_local(A: Matrix, b):
    """One solution of A x = b over a local ring (or field), for A with
    full residual column rank.  Returns the coefficient list, or None when
    the system is inconsistent."""
    ring = A.ring
    if not ring.is_field and residual_rank(A) != A.ncols:
        raise RingUnsupported("local solve needs a free basis")
    aug = hstack(A, Matrix.from_cols(ring, [b]))
    R, pivots = echelon_local(aug)
    x = [ring.zero] * A.ncols
    for r, c in pivots:
        if c == A.ncols:
            return None
        x[c] = R.data[r][A.ncols]
    pivot_rows = {r for r, _ in pivots}
    for i in range(R.nrows):
        if i not in pivot_rows and not R.data[i][A.ncols].is_zero():
            return None
    return x


def columns_contain(A: Matrix, B: Matrix) -> bool:
    """Whether every column of B lies in the column span of A.

    Over a local ring this is only decided when A's columns have full
    residual rank (then the span is a free direct summand); the caller is
    expected to have checked that already.
    """
    if A.nrows != B.nrows:
        raise BadDimension("ambient dimension mismatch")
    ring = A.ring
    if not ring.is_field and residual_rank(A) != A.ncols:
        raise RingUnsupported("containment over a local ring needs a free basis")
    aug = hstack(A, B)
    R, pivots = echelon_local(aug)
    for r, c in pivots:
        if c >= A.ncols:
            return False
    pivot_rows = {r for r, _ in pivots}
    for i in range(R.nrows):
        if i in pivot_rows:
            continue
        if any(not R.data[i][j].is_zero() for j in range(A.ncols, aug.ncols)):
            return False
    return True


# ---------------------------------------------------------------------------
# subspaces of k^n (field coefficients), canonical RREF row bases
# ---------------------------------------------------------------------------

class Subspace:
    """A linear subspace of ring^n stored by its canonical reduced row
    echelon basis, so == and hash are structural."""

    __slots__ = ("ring", "ambient", "basis", "pivots")

    def __init__(self, ring, ambient, vectors):
        self.ring = ring
        self.ambient = ambient
        if vectors:
            M = Matrix.from_rows(ring, vectors)
            if M.ncols != ambient:
                raise BadDimension("vector length differs from ambient dimension")
            R, pivots = rref(M)
            self.basis = tuple(tuple(R.data[i]) for i in range(len(pivots)))
            self.pivots = tuple(pivots)
        else:
            self.basis = ()
            self.pivots = ()

    @property
    def dim(self):
        return len(self.basis)

    def matrix(self) -> Matrix:
        if not self.basis:
            return Matrix(self.ring, [], coerce=False)
        return Matrix.from_rows(self.ring, self.basis)

    def contains_vector(self, v) -> bool:
        v = [self.ring.coerce(x) for x in v]
        for row, p in zip(self.basis, self.pivots):
            c = v[p]
            if not c.is_zero():
                v = [a - c * b for a, b in zip(v, row)]
        return all(x.is_zero() for x in v)

    def contains(self, other: "Subspace") -> bool:
        return all(self.contains_vector(row) for row in other.basis)

    def sum(self, other: "Subspace") -> "Subspace":
        return Subspace(self.ring, self.ambient,
                        [list(r) for r in self.basis + other.basis])

    def intersect(self, other: "Subspace") -> "Subspace":
        if self.dim == 0 or other.dim == 0:
            return Subspace(self.ring, self.ambient, [])
        A = self.matrix().transpose()
        B = other.matrix().transpose()
        # x = A a = B b; kernel of [A | -B] gives the coefficient pairs
        K = kernel_basis(hstack(A, -B))
        vectors = []
        for k in K:
            a = k[: self.dim]
            vec = [self.ring.zero] * self.ambient
            for coeff, row in zip(a, self.basis):
                for i in range(self.ambient):
                    vec[i] = vec[i] + coeff * row[i]
            vectors.append(vec)
        return Subspace(self.ring, self.ambient, vectors)

    def perp(self, gram: Matrix) -> "Subspace":
        """Vectors v with (basis row) . gram . v = 0 for every basis row."""
        if self.dim == 0:
            return Subspace(self.ring, self.ambient,
                            Matrix.identity(self.ring, self.ambient).rows())
        M = self.matrix() * gram
        return Subspace(self.ring, self.ambient, kernel_basis(M))

    def __eq__(self, other):
        return (isinstance(other, Subspace) and other.ring is self.ring
                and other.ambient == self.ambient and other.basis == self.basis)

    def __hash__(self):
        return hash((id(self.ring), self.ambient, self.basis))

    def __repr__(self):
        return f"Subspace(dim {self.dim} of {self.ring!r}^{self.ambient})"


def subspaces_iter(field, ambient: int, dim: int):
    """All dim-dimensional subspaces of field^ambient, one per canonical
    RREF pattern."""
    if dim < 0 or dim > ambient:
        return
    if dim == 0:
        yield Subspace(field, ambient, [])
        return
    els = list(field.elements())
    for pivots in itertools.combinations(range(ambient), dim):
        # free positions: right of the pivot, not a pivot column
        free = []
        for r, p in enumerate(pivots):
            for c in range(p + 1, ambient):
                if c not in pivots:
                    free.append((r, c))
        for values in itertools.product(els, repeat=len(free)):
            rows = [[field.zero] * ambient for _ in range(dim)]
            for r, p in enumerate(pivots):
                rows[r][p] = field.one
            for (r, c), v in zip(free, values):
                rows[r][c] = v
            sub = Subspace.__new__(Subspace)
            sub.ring = field
            sub.ambient = ambient
            sub.basis = tuple(tuple(r) for r in rows)
            sub.pivots = tuple(pivots)
            yield sub


def gaussian_binomial(n: int, k: int, q: int) -> int:
    if k < 0 or k > n:
        return 0
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def intermediate_subspaces_iter(lower: Subspace, upper: Subspace, dim: int):
    """Subspaces S with lower <= S <= upper and dim(S) = dim.

    Enumerated through the quotient upper/lower, so the count is the
    Gaussian binomial of (dim(upper)-dim(lower)) choose (dim-dim(lower)).
    """
    field = lower.ring
    if not upper.contains(lower):
        raise BadDimension("lower subspace not inside upper subspace")
    d = dim - lower.dim
    if d < 0 or dim > upper.dim:
        return
    # complement vectors of lower inside upper
    comp = []
    current = lower
    for row in upper.basis:
        if not current.contains_vector(row):
            comp.append(list(row))
            current = current.sum(Subspace(field, lower.ambient, [list(row)]))
    assert len(comp) == upper.dim - lower.dim
    for quot in subspaces_iter(field, len(comp), d):
        vectors = [list(r) for r in lower.basis]
        for coeffs in quot.basis:
            vec = [field.zero] * lower.ambient
            for c, cv in zip(coeffs, comp):
                for i in range(lower.ambient):
                    vec[i] = vec[i] + c * cv[i]
            vectors.append(vec)
        yield Subspace(field, lower.ambient, vectors)


# ---------------------------------------------------------------------------
# generic-coefficient univariate polynomials and characteristic polynomials
# ---------------------------------------------------------------------------

def gpoly_add(a, b):
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, bi in enumerate(b):
        out[i] = out[i] + bi
    return poly_trim(out)


def gpoly_mul(a, b, ring):
    if not a or not b:
        return ()
    out = [ring.zero] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai.is_zero():
            continue
        for j, bj in enumerate(b):
            out[i + j] = out[i + j] + ai * bj
    return poly_trim(out)


def gpoly_neg(a):
    return tuple(-c for c in a)


def charpoly(M: Matrix):
    """det(T*I - M) as an ascending coefficient tuple over M.ring.

    Division-free: expansion by minors with memoization on column subsets,
    fine for the desk-scale sizes used here and valid over any commutative
    coefficient ring.
    """
    if M.nrows != M.ncols:
        raise BadDimension("characteristic polynomial of a non-square matrix")
    ring = M.ring
    n = M.nrows
    one, zero = ring.one, ring.zero
    # entries of T*I - M as polynomial tuples in T
    entries = [[(-M.data[i][j], one) if i == j else
                ((-M.data[i][j],) if not M.data[i][j].is_zero() else ())
                for j in range(n)] for i in range(n)]
    memo = {}

    def minor(cols):
        if not cols:
            return (one,)
        if cols in memo:
            return memo[cols]
        i = n - len(cols)
        acc = ()
        for idx, c in enumerate(cols):
            e = entries[i][c]
            if not e:
                continue
            sub = minor(cols[:idx] + cols[idx + 1:])
            term = gpoly_mul(e, sub, ring)
            if idx % 2 == 1:
                term = gpoly_neg(term)
            acc = gpoly_add(acc, term)
        memo[cols] = acc
        return acc

    p = minor(tuple(range(n)))
    # pad to full degree n+1
    p = tuple(p) + (zero,) * (n + 1 - len(p))
    return p


# ---------------------------------------------------------------------------
# Smith-type form over a rational function field, localized at the variable
# ---------------------------------------------------------------------------

def smith_form_local(M: Matrix):
    """Diagonalize M over the local ring at the distinguished variable of a
    FunctionField: returns (U, D, V, exponents) with U*M*V = D, D diagonal
    with exact variable-power entries in ascending exponent order, and U, V
    invertible over the local ring.

    Every nonzero rational function is a unit of the local ring times a
    power of the variable, so the reduction always succeeds on nonsingular
    input; a zero row or column can never be cleared and raises Singular.
    """
    ring = M.ring
    if not isinstance(ring, FunctionField):
        raise RingUnsupported("smith_form_local expects a FunctionField matrix")
    if M.nrows != M.ncols:
        raise BadDimension("square matrices only")
    n = M.nrows
    A = M.copy_data()
    U = Matrix.identity(ring, n).copy_data()
    V = Matrix.identity(ring, n).copy_data()

    def row_op(dst, src, f):
        A[dst] = [a + f * b for a, b in zip(A[dst], A[src])]
        U[dst] = [a + f * b for a, b in zip(U[dst], U[src])]

    def col_op(dst, src, f):
        for i in range(n):
            A[i][dst] = A[i][dst] + f * A[i][src]
        for i in range(n):
            V[i][dst] = V[i][dst] + f * V[i][src]

    for k in range(n):
        # pivot: minimal valuation in the remaining block, lowest row wins ties
        best = None
        for i in range(k, n):
            for j in range(k, n):
                if A[i][j].is_zero():
                    continue
                v = A[i][j].valuation()
                if best is None or v < best[0]:
                    best = (v, i, j)
        if best is None:
            raise Singular("matrix is singular over the function field")
        _, pi, pj = best
        if pi != k:
            A[k], A[pi] = A[pi], A[k]
            U[k], U[pi] = U[pi], U[k]
        if pj != k:
            for i in range(n):
                A[i][k], A[i][pj] = A[i][pj], A[i][k]
            for i in range(n):
                V[i][k], V[i][pj] = V[i][pj], V[i][k]
        # clear the pivot row and column; quotients are integral because the
        # pivot has minimal valuation
        for i in range(k + 1, n):
            if not A[i][k].is_zero():
                row_op(i, k, -(A[i][k] / A[k][k]))
        for j in range(k + 1, n):
            if not A[k][j].is_zero():
                col_op(j, k, -(A[k][j] / A[k][k]))
    # normalize each diagonal entry to an exact power of the variable
    exps = []
    for k in range(n):
        a = A[k][k].valuation()
        exps.append(a)
        unit = A[k][k] / ring.monomial(a)
        inv = unit.inverse()
        A[k] = [inv * x for x in A[k]]
        U[k] = [inv * x for x in U[k]]
    # ascending exponent order via simultaneous row/col swaps
    order = sorted(range(n), key=lambda i: exps[i])
    A2 = [[A[order[i]][order[j]] for j in range(n)] for i in range(n)]
    U2 = [U[order[i]] for i in range(n)]
    V2 = [[V[i][order[j]] for j in range(n)] for i in range(n)]
    exps = [exps[i] for i in order]
    return (Matrix(ring, U2, coerce=False), Matrix(ring, A2, coerce=False),
            Matrix(ring, V2, coerce=False), exps)


def is_u_integral(M: Matrix) -> bool:
    """All entries regular at the distinguished variable."""
    return all(x.is_integral() for row in M.data for x in row)
