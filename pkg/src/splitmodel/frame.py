"""The standard ambient frame: a rank-2n module with a square-zero operator
t, a symmetric pairing, and the perfect alternating pairing induced on the
image of t, together with the block normal forms of that alternating pairing
used by the chart constructions.

Basis ordering is fixed once and for all:

    b_1..b_m     = pi^-1 * e_1 .. pi^-1 * e_m
    b_{m+1}..b_n = e_{m+1} .. e_n
    b_{n+1}..b_{n+m}  = e_1 .. e_m
    b_{n+m+1}..b_{2n} = pi * e_{m+1} .. pi * e_n

so that t sends b_i to b_{n+i} and b_{n+i} to pi^2 * b_i.  All matrices in
this package are written in this ordering.
"""

from __future__ import annotations

from .errors import BadDimension, BadParameters, NotInTLambda, Singular
from .linalg import Matrix, Subspace, inverse, kernel_basis
from .rings import PrimeField


def _h_antidiag(ring, m):
    z, o = ring.zero, ring.one
    return Matrix(ring, [[o if i + j == m - 1 else z for j in range(m)]
                         for i in range(m)], coerce=False)


def _j_matrix(ring, n):
    """J = [[0, -H],[H, 0]] of size n = 2m; J^2 = -I."""
    m = n // 2
    H = _h_antidiag(ring, m)
    Z = Matrix.zero(ring, m, m)
    return Matrix.block(ring, [[Z, -H], [H, Z]])


class Frame:
    """Immutable container for the ambient data.  ``pi`` is the value the
    uniformizer takes in the coefficient ring: zero in the special fiber,
    the distinguished variable over a function field in it."""

    __slots__ = ("ring", "n", "m", "pi", "labels", "t_matrix", "gram_sym",
                 "gram_mod")

    def __init__(self, ring, n, pi):
        self.ring = ring
        self.n = n
        self.m = n // 2
        self.pi = pi
        m = self.m
        self.labels = tuple(
            [f"pi^-1*e_{i}" for i in range(1, m + 1)]
            + [f"e_{i}" for i in range(m + 1, n + 1)]
            + [f"e_{i}" for i in range(1, m + 1)]
            + [f"pi*e_{i}" for i in range(m + 1, n + 1)])
        I = Matrix.identity(ring, n)
        Z = Matrix.zero(ring, n, n)
        self.t_matrix = Matrix.block(ring, [[Z, I * (pi * pi)], [I, Z]])
        J = _j_matrix(ring, n)
        self.gram_sym = Matrix.block(ring, [[Z, J], [-J, Z]])
        self.gram_mod = -J

    def t_apply(self, v):
        return self.t_matrix.apply_to_vector([self.ring.coerce(x) for x in v])

    def basis_vector(self, i):
        """b_i as a coordinate vector, 1-indexed."""
        z = self.ring.zero
        v = [z] * (2 * self.n)
        v[i - 1] = self.ring.one
        return v

    def t_lambda(self) -> Subspace:
        """The span of the last n basis vectors (image of t in the special
        fiber)."""
        rows = [self.basis_vector(self.n + i) for i in range(1, self.n + 1)]
        return Subspace(self.ring, 2 * self.n, rows)

    def in_t_lambda(self, v) -> bool:
        return all(self.ring.coerce(x).is_zero() for x in v[: self.n])

    def __repr__(self):
        return f"Frame(n={self.n} over {self.ring!r}, pi={self.pi!r})"


def build_frame(n: int, ring=None, pi=None) -> Frame:
    """The standard frame of even dimension n >= 4.

    With no arguments beyond n this is the special fiber over F_3 (pi = 0).
    Pass a ring carrying a distinguished element to work with pi != 0.
    """
    if n % 2 != 0 or n < 4:
        raise BadDimension("frame dimension must be even and at least 4")
    if ring is None:
        ring = PrimeField(3)
    pi = ring.zero if pi is None else ring.coerce(pi)
    return Frame(ring, n, pi)


def pair(frame: Frame, x, y, kind: str = "symmetric"):
    """Evaluate the symmetric pairing on the 2n-space or the modified
    alternating pairing on the span of the last n basis vectors."""
    ring = frame.ring
    x = [ring.coerce(c) for c in x]
    y = [ring.coerce(c) for c in y]
    if kind == "symmetric":
        if len(x) != 2 * frame.n or len(y) != 2 * frame.n:
            raise BadDimension("symmetric pairing takes 2n-vectors")
        gy = frame.gram_sym.apply_to_vector(y)
        acc = ring.zero
        for a, b in zip(x, gy):
            acc = acc + a * b
        return acc
    if kind == "modified":
        if len(x) != 2 * frame.n or len(y) != 2 * frame.n:
            raise BadDimension("modified pairing takes 2n-vectors")
        if not frame.in_t_lambda(x) or not frame.in_t_lambda(y):
            raise NotInTLambda("modified pairing is defined on the image of t")
        xt = x[frame.n:]
        yt = y[frame.n:]
        gy = frame.gram_mod.apply_to_vector(yt)
        acc = ring.zero
        for a, b in zip(xt, gy):
            acc = acc + a * b
        return acc
    raise BadParameters(f"unknown pairing kind {kind!r}")


def orthogonal(frame: Frame, U: Subspace, kind: str = "symmetric") -> Subspace:
    """Orthogonal complement for the chosen pairing.  The modified kind
    stays inside the span of the last n basis vectors and returns the
    complement there (dimension n - dim U)."""
    ring = frame.ring
    n2 = 2 * frame.n
    if U.ambient != n2:
        raise BadDimension("subspace does not live in the 2n-space")
    if kind == "symmetric":
        return U.perp(frame.gram_sym)
    if kind == "modified":
        for row in U.basis:
            if not frame.in_t_lambda(row):
                raise NotInTLambda("modified complement needs U inside im(t)")
        if U.dim == 0:
            return frame.t_lambda()
        tails = Matrix(ring, [list(row[frame.n:]) for row in U.basis],
                       coerce=False)
        ker = kernel_basis(tails * frame.gram_mod)
        z = ring.zero
        vectors = [[z] * frame.n + list(v) for v in ker]
        return Subspace(ring, n2, vectors)
    raise BadParameters(f"unknown pairing kind {kind!r}")


# ---------------------------------------------------------------------------
# block normal forms of the alternating pairing in chart bases
# ---------------------------------------------------------------------------

class NormalFormGram:
    __slots__ = ("h", "l", "s", "n", "case", "matrix")

    def __init__(self, h, l, s, n, case, matrix):
        self.h = h
        self.l = l
        self.s = s
        self.n = n
        self.case = case
        self.matrix = matrix

    def __repr__(self):
        return f"NormalFormGram({self.case}, h={self.h}, l={self.l}, s={self.s}, n={self.n})"


def _std_skew(ring, size, sign=1):
    """[[0, sign*I],[-sign*I, 0]] of even size."""
    half = size // 2
    I = Matrix.identity(ring, half)
    Z = Matrix.zero(ring, half, half)
    return Matrix.block(ring, [[Z, I * sign], [-(I * sign), Z]])


_CASES = ("eps-stratum", "general", "schubert-selfdual", "schubert-pimodular")


def normal_form_gram(h: int, l: int, s: int, n: int, case: str,
                     ring=None) -> NormalFormGram:
    """The n x n matrix of the alternating (or, in the selfdual case,
    symmetric) pairing in the chart basis for the given stratum data."""
    if ring is None:
        ring = PrimeField(3)
    if case not in _CASES:
        raise BadParameters(f"unknown case {case!r}")
    if n % 2 != 0 or n < 4:
        raise BadParameters("n must be even and at least 4")
    m = n // 2
    r = n - s
    if not (0 <= h <= l <= s <= m):
        raise BadParameters("need 0 <= h <= l <= s <= n/2")
    if case != "schubert-selfdual":
        if (l - s) % 2 != 0:
            raise BadParameters("parity: l and s must agree mod 2")
    z = ring.zero

    def assemble(blocks, sizes):
        k = len(sizes)
        offs = [0]
        for sz in sizes:
            offs.append(offs[-1] + sz)
        data = [[z] * n for _ in range(n)]
        for (bi, bj), blk in blocks.items():
            for i in range(sizes[bi]):
                for j in range(sizes[bj]):
                    data[offs[bi] + i][offs[bj] + j] = blk.data[i][j]
        assert offs[k] == n
        return Matrix(ring, data, coerce=False)

    if case == "eps-stratum":
        q = (r - s) // 2
        sizes = [s, q, q, s]
        Is = Matrix.identity(ring, s)
        Iq = Matrix.identity(ring, q)
        T = assemble({(0, 3): Is, (1, 2): Iq, (2, 1): -Iq, (3, 0): -Is}, sizes)
        return NormalFormGram(h, l, s, n, case, T)

    sizes = [h, l - h, s - l, r - l, l - h, h]
    Ih = Matrix.identity(ring, h)
    Ilh = Matrix.identity(ring, l - h)
    if case == "general":
        blocks = {(0, 5): Ih, (1, 4): Ilh,
                  (2, 2): _std_skew(ring, s - l),
                  (3, 3): _std_skew(ring, r - l),
                  (4, 1): -Ilh, (5, 0): -Ih}
    elif case == "schubert-pimodular":
        blocks = {(0, 5): -Ih, (1, 4): -Ilh,
                  (2, 2): _std_skew(ring, s - l, sign=-1),
                  (3, 3): _std_skew(ring, r - l, sign=-1),
                  (4, 1): Ilh, (5, 0): Ih}
    else:  # schubert-selfdual
        blocks = {(0, 5): Ih, (1, 4): Ilh,
                  (2, 2): Matrix.identity(ring, s - l),
                  (3, 3): Matrix.identity(ring, r - l),
                  (4, 1): Ilh, (5, 0): Ih}
    T = assemble(blocks, sizes)
    return NormalFormGram(h, l, s, n, case, T)


# ---------------------------------------------------------------------------
# change of alternating bases
# ---------------------------------------------------------------------------

def symplectic_basis(A: Matrix) -> Matrix:
    """P with P^t A P in the standard form blockdiag([[0,1],[-1,0]], ...),
    for a nondegenerate skew matrix A over a field."""
    ring = A.ring
    n = A.nrows
    if n % 2 != 0:
        raise BadParameters("nondegenerate skew matrices have even size")

    def form(u, v):
        Av = A.apply_to_vector(v)
        acc = ring.zero
        for a, b in zip(u, Av):
            acc = acc + a * b
        return acc

    pool = [ [ring.one if i == j else ring.zero for j in range(n)]
             for i in range(n) ]
    cols = []
    while pool:
        v = pool.pop(0)
        w = None
        for idx, cand in enumerate(pool):
            val = form(v, cand)
            if not val.is_zero():
                w = pool.pop(idx)
                w = [val.inverse() * c for c in w]
                break
        if w is None:
            raise Singular("skew form is degenerate")
        new_pool = []
        for zv in pool:
            a = form(v, zv)
            b = form(w, zv)
            # z' = z - a*w + b*v is orthogonal to both v and w
            zp = [zc - a * wc + b * vc for zc, wc, vc in zip(zv, w, v)]
            new_pool.append(zp)
        pool = new_pool
        cols.append(v)
        cols.append(w)
    return Matrix.from_cols(ring, cols)


def congruence_transform(A: Matrix, B: Matrix) -> Matrix:
    """C with C^t A C = B, for nondegenerate skew A, B of equal size over a
    field."""
    if A.nrows != B.nrows:
        raise BadDimension("sizes differ")
    PA = symplectic_basis(A)
    PB = symplectic_basis(B)
    return PA * inverse(PB)
