"""Exact integer matrices and full-rank sublattices of Z^d.

Matrices are tuples of row tuples of Python ints. A lattice is stored by its
canonical column Hermite normal form: lower triangular, positive diagonal,
and every entry left of the diagonal reduced into ``[0, diag)`` of its row.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd, prod

import numpy as np

IntMatrix = tuple  # tuple[tuple[int, ...], ...]
Vector = tuple  # tuple[int, ...]


class LatticeError(ValueError):
    pass


# -- matrix helpers ---------------------------------------------------------


def as_matrix(rows) -> IntMatrix:
    m = tuple(tuple(int(x) for x in row) for row in rows)
    if not m or any(len(r) != len(m[0]) for r in m):
        raise LatticeError("malformed matrix")
    return m


def identity(d: int) -> IntMatrix:
    return tuple(tuple(int(i == j) for j in range(d)) for i in range(d))


def transpose(m: IntMatrix) -> IntMatrix:
    return tuple(zip(*m))


def matmul(a, b):
    bt = transpose(b)
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a)


def matvec(a, v) -> Vector:
    return tuple(sum(x * y for x, y in zip(row, v)) for row in a)


def scalar_matrix(d: int, c: int) -> IntMatrix:
    return tuple(tuple(c if i == j else 0 for j in range(d)) for i in range(d))


def matpow(m: IntMatrix, n: int) -> IntMatrix:
    result = identity(len(m))
    base = m
    while n:
        if n & 1:
            result = matmul(result, base)
        base = matmul(base, base)
        n >>= 1
    return result


def det(m) -> int:
    """Bareiss fraction-free determinant."""
    a = [list(r) for r in m]
    n = len(a)
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def columns(m: IntMatrix) -> list[Vector]:
    return [tuple(c) for c in transpose(m)]


def from_columns(cols) -> IntMatrix:
    return transpose(tuple(tuple(c) for c in cols))


def sup_norm(v) -> int:
    return max((abs(x) for x in v), default=0)


def vadd(u, v) -> Vector:
    return tuple(a + b for a, b in zip(u, v))


def vsub(u, v) -> Vector:
    return tuple(a - b for a, b in zip(u, v))


def vneg(v) -> Vector:
    return tuple(-a for a in v)


def _ext_gcd(a: int, b: int):
    # returns (g, x, y) with a*x + b*y = g >= 0
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


@dataclass(frozen=True)
class RatMatrix:
    """Rational matrix held as an integer numerator over one positive denominator."""

    num: IntMatrix
    den: int = 1

    def __post_init__(self):
        if self.den <= 0:
            raise LatticeError("denominator must be positive")
        g = self.den
        for row in self.num:
            for x in row:
                g = gcd(g, x)
        if g > 1:
            object.__setattr__(self, "num", tuple(tuple(x // g for x in r) for r in self.num))
            object.__setattr__(self, "den", self.den // g)

    @classmethod
    def from_fractions(cls, rows) -> RatMatrix:
        rows = [[Fraction(x) for x in r] for r in rows]
        den = 1
        for r in rows:
            for x in r:
                den = den * x.denominator // gcd(den, x.denominator)
        return cls(tuple(tuple(int(x * den) for x in r) for r in rows), den)

    @classmethod
    def from_int(cls, m) -> RatMatrix:
        return cls(as_matrix(m), 1)

    @property
    def d(self) -> int:
        return len(self.num)

    def entries(self) -> list[list[Fraction]]:
        return [[Fraction(x, self.den) for x in r] for r in self.num]

    def __matmul__(self, other):
        if isinstance(other, RatMatrix):
            return RatMatrix(matmul(self.num, other.num), self.den * other.den)
        return RatMatrix(matmul(self.num, as_matrix(other)), self.den)

    def rmul(self, m) -> RatMatrix:
        return RatMatrix(matmul(as_matrix(m), self.num), self.den)

    def inverse(self) -> RatMatrix:
        return RatMatrix.from_fractions(_fraction_inverse(self.entries()))

    def apply_integral(self, v) -> Vector:
        """Image of an integer vector; raises when it is not integral."""
        w = matvec(self.num, v)
        if any(x % self.den for x in w):
            raise LatticeError(f"image of {tuple(v)} is not integral")
        return tuple(x // self.den for x in w)

    def integral_on(self, basis: IntMatrix) -> IntMatrix | None:
        """self @ basis as an integer matrix, or None when not integral."""
        p = matmul(self.num, basis)
        if any(x % self.den for r in p for x in r):
            return None
        return tuple(tuple(x // self.den for x in r) for r in p)


def _fraction_inverse(a):
    n = len(a)
    m = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(a)]
    for c in range(n):
        p = next((r for r in range(c, n) if m[r][c] != 0), None)
        if p is None:
            raise LatticeError("singular matrix")
        m[c], m[p] = m[p], m[c]
        inv = 1 / m[c][c]
        m[c] = [x * inv for x in m[c]]
        for r in range(n):
            if r != c and m[r][c] != 0:
                f = m[r][c]
                m[r] = [x - f * y for x, y in zip(m[r], m[c])]
    return [r[n:] for r in m]


# -- normal forms -----------------------------------------------------------


def _column_hnf(m, track: bool):
    """Column HNF of a d x k matrix of full row rank; returns (H d x d, U k x k or None)."""
    d, k = len(m), len(m[0])
    a = [list(r) for r in m]
    u = [[int(i == j) for j in range(k)] for i in range(k)] if track else None

    def colop(i, j, p, q, r, s):
        # (col_i, col_j) <- (p*col_i + q*col_j, r*col_i + s*col_j)
        for mat in (a, u) if track else (a,):
            for row in mat:
                x, y = row[i], row[j]
                row[i], row[j] = p * x + q * y, r * x + s * y

    for i in range(d):
        for j in range(i + 1, k):
            if a[i][j] == 0:
                continue
            x, y = a[i][i], a[i][j]
            g, p, q = _ext_gcd(x, y)
            colop(i, j, p, q, -y // g, x // g)
        if a[i][i] == 0:
            raise LatticeError("degenerate lattice")
        if a[i][i] < 0:
            for mat in (a, u) if track else (a,):
                for row in mat:
                    row[i] = -row[i]
    for j in range(d):
        for i in range(j + 1, d):
            q = a[i][j] // a[i][i]
            if q:
                for mat in (a, u) if track else (a,):
                    for row in mat:
                        row[j] -= q * row[i]
    h = tuple(tuple(r[:d]) for r in a)
    return h, (tuple(tuple(r) for r in u) if track else None)


def hnf(m) -> tuple[Lattice, IntMatrix]:
    """Canonical lattice of the column span of ``m`` and unimodular U with m @ U = H."""
    m = as_matrix(m)
    if len(m) != len(m[0]):
        raise LatticeError("hnf expects a square matrix; use lattice_from_generators")
    if det(m) == 0:
        raise LatticeError("degenerate lattice")
    h, u = _column_hnf(m, track=True)
    return Lattice(h), u


def lattice(m) -> Lattice:
    return hnf(m)[0]


def lattice_from_generators(cols) -> Lattice:
    """Lattice spanned by an arbitrary (full rank) family of column vectors."""
    cols = [tuple(int(x) for x in c) for c in cols]
    if not cols:
        raise LatticeError("degenerate lattice")
    h, _ = _column_hnf(from_columns(cols), track=False)
    return Lattice(h)


@dataclass(frozen=True)
class SNFTriple:
    U: IntMatrix
    S: IntMatrix
    V: IntMatrix

    @property
    def diagonal(self) -> tuple[int, ...]:
        return tuple(self.S[i][i] for i in range(len(self.S)))


def snf(m) -> SNFTriple:
    """Smith normal form U @ m @ V = S with d_1 | d_2 | ... ; zero pivots sink to the end."""
    m = as_matrix(m)
    n, k = len(m), len(m[0])
    a = [list(r) for r in m]
    u = [[int(i == j) for j in range(n)] for i in range(n)]
    v = [[int(i == j) for j in range(k)] for i in range(k)]

    def rowop(i, j, p, q, r, s):
        for mat in (a, u):
            ri, rj = mat[i], mat[j]
            mat[i] = [p * x + q * y for x, y in zip(ri, rj)]
            mat[j] = [r * x + s * y for x, y in zip(ri, rj)]

    def colop(i, j, p, q, r, s):
        for mat in (a, v):
            for row in mat:
                x, y = row[i], row[j]
                row[i], row[j] = p * x + q * y, r * x + s * y

    def swap_rows(i, j):
        for mat in (a, u):
            mat[i], mat[j] = mat[j], mat[i]

    def swap_cols(i, j):
        for mat in (a, v):
            for row in mat:
                row[i], row[j] = row[j], row[i]

    for t in range(min(n, k)):
        nz = [(abs(a[i][j]), i, j) for i in range(t, n) for j in range(t, k) if a[i][j]]
        if not nz:
            break
        _, i0, j0 = min(nz)
        swap_rows(t, i0)
        swap_cols(t, j0)
        while True:
            for j in range(t + 1, k):
                if a[t][j]:
                    x, y = a[t][t], a[t][j]
                    if y % x == 0:
                        colop(t, j, 1, 0, -(y // x), 1)
                    else:
                        g, p, q = _ext_gcd(x, y)
                        colop(t, j, p, q, -y // g, x // g)
            for i in range(t + 1, n):
                if a[i][t]:
                    x, y = a[t][t], a[i][t]
                    if y % x == 0:
                        rowop(t, i, 1, 0, -(y // x), 1)
                    else:
                        g, p, q = _ext_gcd(x, y)
                        rowop(t, i, p, q, -y // g, x // g)
            if any(a[t][j] for j in range(t + 1, k)):
                continue
            bad = next(
                ((i, j) for i in range(t + 1, n) for j in range(t + 1, k) if a[i][j] % a[t][t]),
                None,
            )
            if bad is None:
                break
            # fold the offending row into row t to force divisibility
            rowop(t, bad[0], 1, 1, 0, 1)
        if a[t][t] < 0:
            for mat in (a, u):
                mat[t] = [-x for x in mat[t]]
    return SNFTriple(
        tuple(tuple(r) for r in u), tuple(tuple(r) for r in a), tuple(tuple(r) for r in v)
    )


def snf_diagonal(m) -> tuple[int, ...]:
    return snf(m).diagonal


# -- lattices ---------------------------------------------------------------


@dataclass(frozen=True)
class Lattice:
    basis: IntMatrix

    def __post_init__(self):
        b = self.basis
        d = len(b)
        for i in range(d):
            if b[i][i] <= 0:
                raise LatticeError("basis diagonal must be positive")
            for j in range(d):
                if j > i and b[i][j] != 0:
                    raise LatticeError("basis is not lower triangular")
                if j < i and not 0 <= b[i][j] < b[i][i]:
                    raise LatticeError("basis is not reduced")

    @classmethod
    def whole(cls, d: int) -> Lattice:
        return cls(identity(d))

    @property
    def d(self) -> int:
        return len(self.basis)

    @property
    def diagonal(self) -> tuple[int, ...]:
        return tuple(self.basis[i][i] for i in range(self.d))

    @cached_property
    def index(self) -> int:
        return prod(self.diagonal)

    @cached_property
    def strides(self) -> tuple[int, ...]:
        out, s = [], 1
        for h in self.diagonal:
            out.append(s)
            s *= h
        return tuple(out)

    @cached_property
    def basis_array(self) -> np.ndarray:
        return np.array(self.basis, dtype=object)

    def reduce(self, v) -> Vector:
        return reduce(v, self)

    def contains(self, v) -> bool:
        return contains(self, v)

    def label_index(self, label) -> int:
        """Mixed-radix position of a reduced label (first coordinate fastest)."""
        return sum(x * s for x, s in zip(label, self.strides))

    def label_at(self, idx: int) -> Vector:
        out = []
        for h in self.diagonal:
            idx, r = divmod(idx, h)
            out.append(r)
        return tuple(out)

    def __str__(self):
        return f"Lattice({[list(r) for r in self.basis]})"


def index(L: Lattice) -> int:
    return L.index


def reduce(v, L: Lattice) -> Vector:
    """Canonical representative of v + L inside the HNF fundamental box."""
    v = [int(x) for x in v]
    if len(v) != L.d:
        raise LatticeError("dimension mismatch")
    b = L.basis
    for i in range(L.d):
        q = v[i] // b[i][i]
        if q:
            for j in range(i, L.d):
                v[j] -= q * b[j][i]
    return tuple(v)


def coordinates(v, L: Lattice) -> Vector | None:
    """Integer x with basis @ x = v, or None if v is not in L."""
    v = [int(x) for x in v]
    b = L.basis
    x = []
    for i in range(L.d):
        q, r = divmod(v[i], b[i][i])
        if r:
            return None
        x.append(q)
        for j in range(i, L.d):
            v[j] -= q * b[j][i]
    return tuple(x)


def contains(L: Lattice, v) -> bool:
    if len(v) != L.d:
        raise LatticeError("dimension mismatch")
    return not any(reduce(v, L))


def leq(L1: Lattice, L2: Lattice) -> bool:
    """True iff L1 is a sublattice of L2."""
    if L1.d != L2.d:
        raise LatticeError("dimension mismatch")
    return all(contains(L2, c) for c in columns(L1.basis))


def coset_reps(outer: Lattice, inner: Lattice) -> list[Vector]:
    """Reduced representatives of outer/inner, ordered by mixed-radix label position."""
    if not leq(inner, outer):
        raise LatticeError("inner lattice is not contained in outer lattice")
    d = outer.d
    # inner = outer @ T with T lower triangular; the box of T's diagonal enumerates outer/inner
    radii = [inner.diagonal[i] // outer.diagonal[i] for i in range(d)]
    ob = outer.basis
    reps = []
    for k in itertools.product(*(range(r) for r in reversed(radii))):
        k = k[::-1]
        reps.append(reduce(matvec(ob, k), inner))
    reps.sort(key=inner.label_index)
    return reps


def random_unimodular(d: int, entry_bound: int, seed: int) -> IntMatrix:
    """Product of 3*d seeded elementary matrices with multipliers in [-bound, bound].

    Each factor is either a row negation or a transvection row_i += c * row_j;
    a 1x1 result is therefore +-1.
    """
    if entry_bound < 1:
        raise LatticeError("entry_bound must be >= 1")
    rng = random.Random(seed)
    m = [list(r) for r in identity(d)]
    for _ in range(3 * d):
        if d == 1 or rng.random() < 0.2:
            i = rng.randrange(d)
            m[i] = [-x for x in m[i]]
        else:
            i, j = rng.sample(range(d), 2)
            c = rng.choice([x for x in range(-entry_bound, entry_bound + 1) if x])
            m[i] = [x + c * y for x, y in zip(m[i], m[j])]
    return tuple(tuple(r) for r in m)


def bounded_unimodulars(d: int, entry_bound: int):
    """All integer matrices with entries in [-b, b] and det +-1.

    Ordered by max entry, then by total entry size, then lexicographically, so
    the identity comes first.
    """
    rng = range(-entry_bound, entry_bound + 1)
    found = []
    for entries in itertools.product(rng, repeat=d * d):
        m = tuple(tuple(entries[i * d:(i + 1) * d]) for i in range(d))
        if abs(det(m)) == 1:
            found.append(m)
    found.sort(key=lambda m: (
        max(abs(x) for r in m for x in r),
        sum(abs(x) for r in m for x in r),
        m != identity(d),
        m,
    ))
    return found


# -- batch paths (int64 kernels, exact fallback) ----------------------------


def box_vectors(d: int, radius: int) -> np.ndarray:
    """All integer vectors with sup-norm <= radius, ordered by (sup-norm, lex)."""
    axes = np.arange(-radius, radius + 1, dtype=np.int64)
    grid = np.stack(np.meshgrid(*([axes] * d), indexing="ij"), axis=-1).reshape(-1, d)
    norms = np.abs(grid).max(axis=1)
    order = np.lexsort(tuple(grid[:, j] for j in reversed(range(d))) + (norms,))
    return grid[order]


def coset_indices(vecs, L: Lattice) -> np.ndarray:
    """Mixed-radix coset positions of many vectors at once."""
    from . import _kernels

    vecs = np.asarray(vecs)
    if vecs.size == 0:
        return np.zeros(0, dtype=np.int64)
    big = max(abs(int(vecs.max())), abs(int(vecs.min())))
    bmax = max(abs(x) for r in L.basis for x in r)
    if vecs.dtype != object and _kernels.fits_int64(big, bmax, L.d) and L.index < 2**62:
        hnf_arr = np.array(L.basis, dtype=np.int64)
        strides = np.array(L.strides, dtype=np.int64)
        return _kernels.coset_index(vecs.astype(np.int64), hnf_arr, strides)
    return np.array([L.label_index(reduce(v, L)) for v in vecs.tolist()], dtype=object)


def short_representatives(L: Lattice, wanted, bound: int) -> dict:
    """Minimal sup-norm vector (ties: lexicographic) in each wanted coset of L.

    ``wanted`` holds mixed-radix coset positions; cosets with no representative
    of norm <= bound are absent from the result.
    """
    wanted = set(int(w) for w in wanted)
    found: dict = {}
    radius = 1
    while True:
        r = min(radius, bound)
        box = box_vectors(L.d, r)
        idx = coset_indices(box, L)
        _, first = np.unique(idx, return_index=True)
        for pos in first:
            key = int(idx[pos])
            if key in wanted and key not in found:
                found[key] = tuple(int(x) for x in box[pos])
        if len(found) == len(wanted) or r >= bound:
            return found
        radius *= 2
