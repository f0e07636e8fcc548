"""Exact linear algebra over Z/m: Howell forms, kernels, quotients, complements.

Submodules of (Z/m)^w are represented as row spans in Howell normal form.
The Howell form is the canonical echelon basis whose span is closed under
annihilators: any span element vanishing on the first j coordinates lies in
the span of the rows with pivots beyond j.  That closure is what makes
membership tests and canonical comparison work over Z/m when m is composite.

Finite abelian quotients (Z/m)^w / V are presented in invariant-factor
coordinates via an integer Smith normal form of the relation lattice.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np


class NotASummandError(ValueError):
    """Raised when a submodule admits no direct complement."""


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, s, t) with s*a + t*b = g = gcd(a, b)."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_r, old_s, old_t


def unit_for(a: int, m: int) -> int:
    """A unit u mod m with (u * a) % m == gcd(a, m).

    Scaling a row by u is span-preserving and turns its leading entry into a
    divisor of m, the normalization the Howell form requires.
    """
    a %= m
    if a == 0 or m == 1:
        return 1
    g = gcd(a, m)
    b = a // g
    m1 = m // g
    if m1 == 1:
        return 1
    u0 = pow(b, -1, m1)
    # q := largest divisor of m coprime to m1; CRT-lift u0 to a unit mod m.
    q = m
    d = gcd(q, m1)
    while d > 1:
        q //= d
        d = gcd(q, m1)
    if q == 1:
        return u0 % m
    _, s, t = _egcd(m1, q)
    return (u0 * t * q + s * m1) % (m1 * q) % m


def annihilator(a: int, m: int) -> int:
    """Smallest x > 0 with x*a = 0 mod m (and 1 for a = 0... which still works)."""
    return m // gcd(a, m)


def _as_matrix(rows, width: int) -> np.ndarray:
    arr = np.array(list(rows), dtype=np.int64)
    if arr.size == 0:
        return np.zeros((0, width), dtype=np.int64)
    return arr.reshape(-1, width)


def _howell_core(rows: np.ndarray, m: int, width: int, reduce_cols: int) -> tuple[list[np.ndarray], list[int], list[np.ndarray]]:
    """Row-reduce to Howell form over the first reduce_cols columns.

    Returns (finalized rows, their pivot columns, leftover rows that are zero
    on the reduced columns).  Row operations are span-preserving.
    """
    work: list[np.ndarray] = [r % m for r in rows if np.any(r % m)]
    done: list[np.ndarray] = []
    pivots: list[int] = []
    for c in range(reduce_cols):
        nz = [r for r in work if r[c] != 0]
        rest = [r for r in work if r[c] == 0]
        if not nz:
            work = rest
            continue
        piv = nz[0]
        for r in nz[1:]:
            a, b = int(piv[c]), int(r[c])
            g, s, t = _egcd(a, b)
            newp = (s * piv + t * r) % m
            newr = ((a // g) * r - (b // g) * piv) % m
            piv, r2 = newp, newr
            if np.any(r2):
                rest.append(r2)
        u = unit_for(int(piv[c]), m)
        if u != 1:
            piv = (piv * u) % m
        b = int(piv[c])
        # entries above the pivot become canonical representatives mod b
        for q in done:
            f = int(q[c]) // b
            if f:
                q -= f * piv
                q %= m
        ann = m // b
        if ann > 1:
            extra = (piv * ann) % m
            if np.any(extra):
                rest.append(extra)
        done.append(piv)
        pivots.append(c)
        work = rest
    leftover = [r for r in work if np.any(r)]
    return done, pivots, leftover


@dataclass(frozen=True)
class HowellBasis:
    """Canonical basis of a submodule of (Z/m)^width, rows in Howell form."""

    modulus: int
    width: int
    rows: np.ndarray
    pivots: tuple[int, ...]

    def __post_init__(self):
        self.rows.setflags(write=False)

    @property
    def nrows(self) -> int:
        return self.rows.shape[0]

    def pivot_values(self) -> list[int]:
        return [int(self.rows[i, c]) for i, c in enumerate(self.pivots)]

    def span_size(self) -> int:
        size = 1
        for b in self.pivot_values():
            size *= self.modulus // b
        return size

    def ambient_size(self) -> int:
        return self.modulus ** self.width

    def index(self) -> int:
        """Index of the span in the full ambient module (exact integer)."""
        return self.ambient_size() // self.span_size()

    def reduce(self, vectors: np.ndarray) -> np.ndarray:
        """Canonical residues of row vectors modulo the span (batched)."""
        V = np.atleast_2d(np.asarray(vectors, dtype=np.int64)) % self.modulus
        R = V.copy()
        for i, c in enumerate(self.pivots):
            b = int(self.rows[i, c])
            q = R[:, c] // b
            nzq = q != 0
            if np.any(nzq):
                R[nzq] = (R[nzq] - q[nzq, None] * self.rows[i][None, :]) % self.modulus
        return R if np.asarray(vectors).ndim == 2 else R[0]

    def reduce_with_coords(self, vectors: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        V = np.atleast_2d(np.asarray(vectors, dtype=np.int64)) % self.modulus
        R = V.copy()
        C = np.zeros((R.shape[0], self.nrows), dtype=np.int64)
        for i, c in enumerate(self.pivots):
            b = int(self.rows[i, c])
            q = R[:, c] // b
            C[:, i] = q
            nzq = q != 0
            if np.any(nzq):
                R[nzq] = (R[nzq] - q[nzq, None] * self.rows[i][None, :]) % self.modulus
        return R, C

    def contains(self, vector: np.ndarray) -> bool:
        return not np.any(self.reduce(np.asarray(vector, dtype=np.int64)))

    def contains_all(self, vectors: np.ndarray) -> bool:
        vecs = np.atleast_2d(np.asarray(vectors, dtype=np.int64))
        if vecs.shape[0] == 0:
            return True
        return not np.any(self.reduce(vecs))

    def coords(self, vector: np.ndarray) -> Optional[np.ndarray]:
        """Coordinates over the basis rows, or None if not in the span."""
        res, c = self.reduce_with_coords(np.asarray(vector, dtype=np.int64))
        if np.any(res):
            return None
        return c[0]

    def key(self) -> bytes:
        return self.rows.tobytes() + bytes(str((self.modulus, self.width)), "ascii")

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, HowellBasis)
            and self.modulus == other.modulus
            and self.width == other.width
            and self.rows.shape == other.rows.shape
            and bool(np.all(self.rows == other.rows))
        )

    def __hash__(self):
        return hash(self.key())

    def enumerate_span(self, limit: int = 1 << 21) -> Iterator[np.ndarray]:
        """Yield every span element; refuses spans larger than limit."""
        size = self.span_size()
        if size > limit:
            raise ValueError(f"span of size {size} exceeds enumeration limit {limit}")
        reps = [self.modulus // b for b in self.pivot_values()]
        vec = np.zeros(self.width, dtype=np.int64)
        if not reps:
            yield vec
            return
        counters = [0] * len(reps)
        while True:
            yield vec.copy()
            i = 0
            while i < len(reps):
                counters[i] += 1
                vec = (vec + self.rows[i]) % self.modulus
                if counters[i] < reps[i]:
                    break
                vec = (vec - counters[i] * self.rows[i]) % self.modulus
                counters[i] = 0
                i += 1
            else:
                return

    def to_lists(self) -> list[list[int]]:
        return [[int(x) for x in row] for row in self.rows]


def howell_form(rows, m: int, width: int) -> HowellBasis:
    """Canonical Howell basis of the span of the given row vectors."""
    mat = _as_matrix(rows, width)
    done, pivots, _ = _howell_core(mat, m, width, width)
    out = _as_matrix(done, width)
    return HowellBasis(m, width, out, tuple(pivots))


def zero_basis(m: int, width: int) -> HowellBasis:
    return HowellBasis(m, width, np.zeros((0, width), dtype=np.int64), ())


def full_basis(m: int, width: int) -> HowellBasis:
    return howell_form(np.eye(width, dtype=np.int64), m, width)


def howell_with_transform(rows, m: int, width: int) -> tuple[HowellBasis, np.ndarray, np.ndarray]:
    """Howell form H of the span plus transforms.

    Returns (H, U, K) with H.rows == U @ rows mod m, and K spanning all row
    combinations that vanish: K @ rows == 0 mod m.
    """
    mat = _as_matrix(rows, width)
    n = mat.shape[0]
    aug = np.hstack([mat, np.eye(n, dtype=np.int64)])
    done, pivots, leftover = _howell_core(aug, m, width + n, width)
    H = _as_matrix([r[:width] for r in done], width)
    U = _as_matrix([r[width:] for r in done], n)
    K = _as_matrix([r[width:] for r in leftover], n)
    return HowellBasis(m, width, H, tuple(pivots)), U, K


def solve_in_span(rows, m: int, width: int, targets: np.ndarray) -> list[Optional[np.ndarray]]:
    """For each target vector t, coefficients c with c @ rows = t mod m, else None.

    The generating rows need not be in canonical form.
    """
    H, U, _ = howell_with_transform(rows, m, width)
    T = np.atleast_2d(np.asarray(targets, dtype=np.int64))
    res, coords = H.reduce_with_coords(T)
    out: list[Optional[np.ndarray]] = []
    for i in range(T.shape[0]):
        if np.any(res[i]):
            out.append(None)
        else:
            out.append((coords[i] @ U) % m)
    return out


def span_sum(a: HowellBasis, b: HowellBasis) -> HowellBasis:
    if (a.modulus, a.width) != (b.modulus, b.width):
        raise ValueError("ambient mismatch")
    return howell_form(np.vstack([a.rows, b.rows]), a.modulus, a.width)


def left_kernel(rows, m: int, width: int) -> HowellBasis:
    """All u with u @ rows = 0 mod m, as a Howell basis of length len(rows)."""
    mat = _as_matrix(rows, width)
    _, _, K = howell_with_transform(mat, m, width)
    return howell_form(K, m, mat.shape[0])


def span_intersection(a: HowellBasis, b: HowellBasis) -> HowellBasis:
    """Intersection via the kernel of the stacked relation matrix."""
    if (a.modulus, a.width) != (b.modulus, b.width):
        raise ValueError("ambient mismatch")
    stacked = np.vstack([a.rows, b.rows])
    K = left_kernel(stacked, a.modulus, a.width)
    xs = K.rows[:, : a.nrows]
    vecs = (xs @ a.rows) % a.modulus if a.nrows else np.zeros((0, a.width), dtype=np.int64)
    return howell_form(vecs, a.modulus, a.width)


def matrix_image(mat: np.ndarray, m: int) -> HowellBasis:
    """Row span of a matrix."""
    M = np.asarray(mat, dtype=np.int64)
    return howell_form(M, m, M.shape[1])


def matrix_kernel(mat: np.ndarray, m: int) -> HowellBasis:
    """Left kernel {u : u @ mat = 0 mod m}."""
    M = np.asarray(mat, dtype=np.int64)
    return left_kernel(M, m, M.shape[1])


def kernel_into(mat: np.ndarray, m: int, target: HowellBasis) -> HowellBasis:
    """{u : u @ mat lies in the target span}."""
    M = np.asarray(mat, dtype=np.int64)
    if M.shape[1] != target.width:
        raise ValueError("width mismatch")
    stacked = np.vstack([M, target.rows])
    K = left_kernel(stacked, m, target.width)
    return howell_form(K.rows[:, : M.shape[0]], m, M.shape[0])


def submodule_index(basis: HowellBasis) -> int:
    return basis.index()


# ---------------------------------------------------------------------------
# Integer Smith normal form with column transforms.
# ---------------------------------------------------------------------------


def smith_normal_form(mat: Sequence[Sequence[int]], ncols: int) -> tuple[list[int], list[list[int]], list[list[int]]]:
    """Diagonalize an integer matrix by unimodular row and column operations.

    Returns (diag, V, Vinv) where diag carries the invariant factors in a
    divisibility chain (d1 | d2 | ...), V is the accumulated column transform
    and Vinv its inverse: for the relation lattice L spanned by the input
    rows, L @ V equals the span of diag(d) (rows are discarded; only column
    data is needed for quotient coordinates).
    """
    A = [[int(x) for x in row] for row in mat]
    nr = len(A)
    nc = ncols
    if nr == 0:
        A = [[0] * nc]
        nr = 1
    V = [[1 if i == j else 0 for j in range(nc)] for i in range(nc)]
    Vi = [[1 if i == j else 0 for j in range(nc)] for i in range(nc)]

    def swap_cols(i, j):
        for r in A:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]
        Vi[i], Vi[j] = Vi[j], Vi[i]

    def add_col(dst, src, q):
        # col_dst += q * col_src
        for r in A:
            r[dst] += q * r[src]
        for r in V:
            r[dst] += q * r[src]
        for k in range(nc):
            Vi[src][k] -= q * Vi[dst][k]

    def negate_col(j):
        for r in A:
            r[j] = -r[j]
        for r in V:
            r[j] = -r[j]
        for k in range(nc):
            Vi[j][k] = -Vi[j][k]

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]

    def add_row(dst, src, q):
        row_s = A[src]
        row_d = A[dst]
        for k in range(nc):
            row_d[k] += q * row_s[k]

    t = 0
    while t < min(nr, nc):
        # locate a nonzero entry of minimal magnitude in the working block
        best = None
        for i in range(t, nr):
            for j in range(t, nc):
                v = A[i][j]
                if v != 0 and (best is None or abs(v) < abs(best[2])):
                    best = (i, j, v)
        if best is None:
            break
        i, j, _ = best
        if i != t:
            swap_rows(t, i)
        if j != t:
            swap_cols(t, j)
        while True:
            # clear column t by row ops
            again = False
            for i in range(nr):
                if i == t or A[i][t] == 0:
                    continue
                q = A[i][t] // A[t][t]
                add_row(i, t, -q)
                if A[i][t] != 0:
                    swap_rows(i, t)
                    again = True
            # clear row t by column ops
            for j in range(nc):
                if j == t or A[t][j] == 0:
                    continue
                q = A[t][j] // A[t][t]
                add_col(j, t, -q)
                if A[t][j] != 0:
                    swap_cols(j, t)
                    again = True
            if not again:
                break
        if A[t][t] < 0:
            negate_col(t)
        t += 1
    rank = t
    diag = [A[i][i] for i in range(rank)]
    # enforce the divisibility chain d1 | d2 | ...
    changed = True
    while changed:
        changed = False
        for i in range(rank - 1):
            a, b = diag[i], diag[i + 1]
            if a and b % a != 0:
                g, s, _t2 = _egcd(a, b)
                lc = a // g * b
                diag[i], diag[i + 1] = g, lc
                # update transforms: the pair of coordinates mixes
                # col_i' = s*col_i + (b//g)*? ; rebuild via explicit 2x2 blocks.
                # Using: lattice spanned by a*e_i, b*e_j; new basis g*e_i', lc*e_j'
                # with e_i' = e_i + t'*e_j ... do it with elementary ops on V/Vi:
                _apply_pair_transform(V, Vi, i, i + 1, a, b, g, lc)
                changed = True
    return diag, V, Vi


def _apply_pair_transform(V, Vi, i, j, a, b, g, lc):
    """Rewrite coordinates so the lattice a*e_i + b*e_j becomes g*e_i + lc*e_j."""
    # Find s, t with s*a + t*b = g.  New coordinate vectors:
    #   f_i = s*e_i + t*e_j          (then a*e_i + b*e_j contains g*f_i)
    #   f_j = -(b//g)*e_i + (a//g)*e_j
    # The column transform C = [[s, -(b//g)], [t, a//g]] has det 1.
    _, s, t = _egcd(a, b)
    nc = len(V)
    for r in V:
        x, y = r[i], r[j]
        r[i] = s * x + t * y
        r[j] = -(b // g) * x + (a // g) * y
    # inverse of [[s, -(b//g)],[t, a//g]] is [[a//g, b//g],[-t, s]]
    for k in range(nc):
        x, y = Vi[i][k], Vi[j][k]
        Vi[i][k] = (a // g) * x + (b // g) * y
        Vi[j][k] = -t * x + s * y


# ---------------------------------------------------------------------------
# Quotient presentations
# ---------------------------------------------------------------------------


@dataclass
class QuotientPresentation:
    """Invariant-factor coordinates for U/V with V <= U <= (Z/m)^width.

    Elements of the quotient are coordinate vectors y with y[i] taken mod
    factors[i]; project/lift convert between ambient vectors and coordinates.
    """

    modulus: int
    numerator: HowellBasis
    denominator: HowellBasis
    factors: tuple[int, ...] = field(init=False)
    _cols: np.ndarray = field(init=False)
    _V: np.ndarray = field(init=False)
    _Vi: np.ndarray = field(init=False)

    def __post_init__(self):
        m = self.modulus
        U, Vden = self.numerator, self.denominator
        s = U.nrows
        if s == 0:
            self.factors = ()
            self._cols = np.zeros(0, dtype=np.int64)
            self._V = np.zeros((0, 0), dtype=np.int64)
            self._Vi = np.zeros((0, 0), dtype=np.int64)
            return
        if not U.contains_all(Vden.rows):
            raise ValueError("denominator not contained in numerator")
        rel = kernel_into(U.rows, m, Vden)
        rel_rows = [list(r) for r in rel.rows] + [
            [m if i == j else 0 for j in range(s)] for i in range(s)
        ]
        diag, V, Vi = smith_normal_form(rel_rows, s)
        diag = list(diag) + [0] * (s - len(diag))
        # relation lattice contains m*Z^s, so every diagonal entry is positive
        facs = []
        cols = []
        for j, d in enumerate(diag):
            if d == 0:
                raise AssertionError("relation lattice must have full rank")
            if d > 1:
                facs.append(int(d))
                cols.append(j)
        self.factors = tuple(facs)
        self._cols = np.array(cols, dtype=np.int64)
        self._V = np.array(V, dtype=object)
        self._Vi = np.array(Vi, dtype=object)

    @property
    def rank(self) -> int:
        return len(self.factors)

    def size(self) -> int:
        n = 1
        for d in self.factors:
            n *= d
        return n

    def project(self, vectors: np.ndarray) -> np.ndarray:
        """Coordinates of ambient vectors (rows) in the quotient."""
        vecs = np.atleast_2d(np.asarray(vectors, dtype=np.int64))
        res, coords = self.numerator.reduce_with_coords(vecs)
        if np.any(res):
            raise ValueError("vector not in the numerator module")
        if self.rank == 0:
            out = np.zeros((vecs.shape[0], 0), dtype=np.int64)
        else:
            full = coords.astype(object) @ self._V
            sel = full[:, self._cols]
            out = np.array(
                [[int(sel[i, j]) % self.factors[j] for j in range(self.rank)] for i in range(sel.shape[0])],
                dtype=np.int64,
            ).reshape(vecs.shape[0], self.rank)
        return out if np.asarray(vectors).ndim == 2 else out[0]

    def lift(self, ycoords: np.ndarray) -> np.ndarray:
        """A representative ambient vector for quotient coordinates (rows)."""
        ys = np.atleast_2d(np.asarray(ycoords, dtype=np.int64))
        s = self.numerator.nrows
        out = np.zeros((ys.shape[0], self.numerator.width), dtype=np.int64)
        if s:
            full = np.zeros((ys.shape[0], s), dtype=object)
            for j, col in enumerate(self._cols):
                full[:, int(col)] = ys[:, j]
            c = full @ self._Vi
            cint = np.array([[int(x) % self.modulus for x in row] for row in c], dtype=np.int64)
            out = (cint @ self.numerator.rows) % self.modulus
        return out if np.asarray(ycoords).ndim == 2 else out[0]

    def submodule_preimage(self, coord_rows: np.ndarray) -> HowellBasis:
        """Ambient Howell basis of the submodule spanned by quotient coordinates."""
        rows = [self.lift(r) for r in np.atleast_2d(np.asarray(coord_rows, dtype=np.int64))]
        allrows = list(rows) + [r for r in self.denominator.rows]
        return howell_form(allrows, self.modulus, self.numerator.width)

    def validate(self) -> None:
        """Round-trip sanity: project(lift) is the identity on coordinates."""
        if self.rank == 0:
            return
        eye = np.eye(self.rank, dtype=np.int64)
        back = self.project(self.lift(eye))
        if not np.array_equal(back % np.array(self.factors), eye % np.array(self.factors)):
            raise AssertionError("quotient presentation round-trip failed")


def free_cover(factors: Sequence[int], m: int) -> tuple[HowellBasis, HowellBasis]:
    """(numerator, denominator) presenting prod Z/factors inside (Z/m)^r."""
    r = len(factors)
    num = full_basis(m, r)
    den_rows = [np.eye(r, dtype=np.int64)[i] * factors[i] for i in range(r)]
    return num, howell_form(den_rows, m, r)


# ---------------------------------------------------------------------------
# Complements
# ---------------------------------------------------------------------------


def complement_submodule(S: HowellBasis, U: HowellBasis, V: HowellBasis, m: int) -> HowellBasis:
    """A complement C of S in U relative to V: S + C = U, S ^ C = V.

    V <= S <= U must hold.  Raises NotASummandError when no complement
    exists; the test is conclusive because the quotient U/V splits off S/V
    iff every invariant-factor generator of (U/V)/(S/V) lifts to an element
    of matching order.
    """
    w = U.width
    if not U.contains_all(S.rows) or not S.contains_all(V.rows):
        raise ValueError("expected V <= S <= U")
    Q = QuotientPresentation(m, U, V)
    r = Q.rank
    if r == 0:
        return howell_form(V.rows, m, w)
    sbar = Q.project(S.rows) if S.nrows else np.zeros((0, r), dtype=np.int64)
    den_rows = [np.eye(r, dtype=np.int64)[i] * Q.factors[i] for i in range(r)]
    s_pre = howell_form(list(sbar) + den_rows, m, r)
    # present (free r-space)/s_pre; generators with invariant factors e_j
    T = QuotientPresentation(m, full_basis(m, r), s_pre)
    den_mat = _as_matrix(den_rows, r)
    gens: list[np.ndarray] = []
    for j, e in enumerate(T.factors):
        y = T.lift(np.eye(T.rank, dtype=np.int64)[j])
        t = (e * y) % m
        # e*y must vanish in the quotient after adjusting by S, i.e. lie in
        # e*S + D; solve over the combined span and keep the S-part.
        scaled = np.vstack([(e * s_pre.rows) % m, den_mat])
        sol = solve_in_span(scaled, m, r, t[None, :])[0]
        if sol is None:
            raise NotASummandError("submodule is not a direct summand")
        s_adj = (sol[: s_pre.nrows] @ s_pre.rows) % m if s_pre.nrows else np.zeros(r, dtype=np.int64)
        gens.append((y - s_adj) % m)
    c_pre = howell_form(gens + den_rows, m, r)
    # sanity: direct sum inside the quotient
    inter = span_intersection(s_pre, c_pre)
    den = howell_form(den_rows, m, r)
    if inter != den:
        raise AssertionError("complement intersection is not trivial")
    if span_sum(s_pre, c_pre).span_size() != full_basis(m, r).span_size():
        raise AssertionError("complement sum does not fill the quotient")
    ambient_rows = [Q.lift(row) for row in c_pre.rows] + [r_ for r_ in V.rows]
    C = howell_form(ambient_rows, m, w)
    if span_intersection(S, C) != howell_form(V.rows, m, w):
        raise AssertionError("ambient complement intersection mismatch")
    if span_sum(S, C) != U:
        raise AssertionError("ambient complement sum mismatch")
    return C


def pure_complement(S: HowellBasis, m: int, width: int) -> HowellBasis:
    """Complement of S in the full module (Z/m)^width, or NotASummandError."""
    return complement_submodule(S, full_basis(m, width), zero_basis(m, width), m)


# ---------------------------------------------------------------------------
# Elementary-abelian quotients and hyperplanes
# ---------------------------------------------------------------------------


@dataclass
class ElementaryQuotient:
    """Coordinates for J/R when the quotient is elementary abelian of exponent p.

    Requires p*J <= R (true for radical quotients).  A greedy pass over J's
    basis rows picks representatives that are F_p-independent modulo R;
    coordinates are recovered through the Howell transform of the combined
    span, so no Smith form is needed.
    """

    modulus: int
    p: int
    numerator: HowellBasis
    denominator: HowellBasis
    basis: np.ndarray = field(init=False)   # rows: ambient reps of an F_p-basis
    _solver: HowellBasis = field(init=False)
    _transform: np.ndarray = field(init=False)

    def __post_init__(self):
        J, R = self.numerator, self.denominator
        m = self.modulus
        reps: list[np.ndarray] = []
        current = R
        for row in J.rows:
            if not current.contains(row):
                reps.append(row)
                current = howell_form(np.vstack([current.rows, row[None, :]]), m, J.width)
        self.basis = np.array(reps, dtype=np.int64).reshape(-1, J.width)
        combined = np.vstack([self.basis, R.rows]) if (len(reps) or R.nrows) else np.zeros((0, J.width), dtype=np.int64)
        self._solver, self._transform, _ = howell_with_transform(combined, m, J.width)
        # sanity: each representative contributes exactly p to the index
        if current.span_size() != J.span_size():
            raise ValueError("representatives do not span the quotient")
        expected = J.span_size() // R.span_size()
        if self.p ** len(reps) != expected:
            raise ValueError("quotient is not elementary abelian of exponent p")

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def project(self, vectors: np.ndarray) -> np.ndarray:
        vecs = np.atleast_2d(np.asarray(vectors, dtype=np.int64))
        res, coords = self._solver.reduce_with_coords(vecs)
        if np.any(res):
            raise ValueError("vector not in the numerator module")
        full = (coords @ self._transform) % self.modulus
        out = full[:, : self.dim] % self.p
        return out if np.asarray(vectors).ndim == 2 else out[0]

    def lift(self, coords: np.ndarray) -> np.ndarray:
        cs = np.atleast_2d(np.asarray(coords, dtype=np.int64)) % self.p
        out = (cs @ self.basis) % self.modulus if self.dim else np.zeros((cs.shape[0], self.numerator.width), dtype=np.int64)
        return out if np.asarray(coords).ndim == 2 else out[0]


def _normalized_functionals(p: int, d: int) -> Iterator[np.ndarray]:
    """Nonzero functionals on F_p^d, one per scalar class, lexicographic order."""
    phi = np.zeros(d, dtype=np.int64)
    # first nonzero coordinate equals 1
    for lead in range(d - 1, -1, -1):
        tail = d - lead - 1
        counters = np.zeros(tail, dtype=np.int64)
        while True:
            phi = np.zeros(d, dtype=np.int64)
            phi[lead] = 1
            phi[lead + 1 :] = counters
            yield phi
            i = tail - 1
            while i >= 0:
                counters[i] += 1
                if counters[i] < p:
                    break
                counters[i] = 0
                i -= 1
            else:
                break
            if tail == 0:
                break


def hyperplanes_avoiding(
    J: HowellBasis,
    radJ: HowellBasis,
    v: np.ndarray,
    p: int,
    mode: str = "exhaustive",
    rng: Optional[np.random.Generator] = None,
    max_samples: int = 10000,
) -> Iterator[HowellBasis]:
    """Maximal submodules of J containing radJ and avoiding v.

    J/radJ must be elementary abelian over F_p.  Yields ambient Howell bases.
    Exhaustive mode enumerates one hyperplane per linear functional class in
    lexicographic order; random mode samples functionals uniformly.
    """
    if not J.contains(np.asarray(v, dtype=np.int64)):
        raise ValueError("element does not lie in the module")
    eq = ElementaryQuotient(J.modulus, p, J, radJ)
    d = eq.dim
    vbar = eq.project(np.asarray(v, dtype=np.int64))
    if not np.any(vbar):
        return
    def basis_for(phi: np.ndarray) -> HowellBasis:
        # kernel of phi inside F_p^d, lifted and joined with radJ
        ker_rows = []
        lead = int(np.nonzero(phi)[0][0])
        for j in range(d):
            if j == lead:
                continue
            row = np.zeros(d, dtype=np.int64)
            row[j] = 1
            row[lead] = (-int(phi[j])) % p
            ker_rows.append(row)
        lifted = [eq.lift(r) for r in ker_rows]
        rows = lifted + [r for r in radJ.rows]
        return howell_form(rows, J.modulus, J.width)

    if mode == "exhaustive":
        for phi in _normalized_functionals(p, d):
            if int(phi @ vbar) % p != 0:
                yield basis_for(phi)
    elif mode == "random":
        if rng is None:
            rng = np.random.default_rng()
        for _ in range(max_samples):
            phi = rng.integers(0, p, size=d)
            if not np.any(phi):
                continue
            # normalize leading coefficient to 1 so classes are unique
            lead = int(np.nonzero(phi)[0][0])
            phi = (phi * pow(int(phi[lead]), -1, p)) % p
            if int(phi @ vbar) % p != 0:
                yield basis_for(phi)
    else:
        raise ValueError(f"unknown sampling mode {mode!r}")
