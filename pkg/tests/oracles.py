"""Independent reference computations used to check the library.

Nothing here imports odorigid. Everything works from the defining matrices
with Fractions and brute force, so agreement is meaningful.
"""

import itertools
from fractions import Fraction
from functools import reduce as fold
from math import gcd


def det(m):
    """Cofactor expansion; fine for the tiny sizes used in tests."""
    n = len(m)
    if n == 1:
        return m[0][0]
    total = 0
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        total += (-1) ** j * m[0][j] * det(minor)
    return total


def solve(m, v):
    """x with m x = v over Q, or None when m is singular."""
    n = len(m)
    a = [[Fraction(x) for x in row] + [Fraction(v[i])] for i, row in enumerate(m)]
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return None
        a[c], a[piv] = a[piv], a[c]
        for r in range(n):
            if r != c and a[r][c] != 0:
                f = a[r][c] / a[c][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return [a[i][n] / a[i][i] for i in range(n)]


def in_span(m, v):
    """Is v an integer combination of the columns of m?"""
    x = solve(m, v)
    return x is not None and all(t.denominator == 1 for t in x)


def determinantal_divisors(m):
    """Smith invariants d_k = D_k / D_{k-1}, with D_k the gcd of all k x k minors."""
    n = len(m)
    D = [1]
    for k in range(1, n + 1):
        minors = [
            det([[m[i][j] for j in cols] for i in rows])
            for rows in itertools.combinations(range(n), k)
            for cols in itertools.combinations(range(n), k)
        ]
        D.append(fold(gcd, (abs(x) for x in minors), 0))
    return tuple(D[k] // D[k - 1] for k in range(1, n + 1))


def matmul(a, b):
    return [[sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]))] for i in range(len(a))]


def matpow(m, n):
    out = [[int(i == j) for j in range(len(m))] for i in range(len(m))]
    for _ in range(n):
        out = matmul(out, m)
    return out


def box(d, r):
    return list(itertools.product(range(-r, r + 1), repeat=d))


class Quotient:
    """Z^d modulo the column span of `m`.

    Two vectors are congruent iff m^-1 (v - w) is integral, so the fractional
    parts of m^-1 v name the coset.
    """

    def __init__(self, m):
        self.m = m
        self.d = len(m)
        self.size = abs(det(m))
        self.inv = [solve(m, [int(i == j) for i in range(self.d)]) for j in range(self.d)]
        self.reps, self.keys = [], {}
        r = 0
        while len(self.reps) < self.size:
            for v in box(self.d, r):
                if max(map(abs, v), default=0) == r and self.key(v) not in self.keys:
                    self.keys[self.key(v)] = len(self.reps)
                    self.reps.append(v)
            r += 1

    def key(self, v):
        x = [sum(self.inv[j][i] * v[j] for j in range(self.d)) for i in range(self.d)]
        return tuple(t - (t.numerator // t.denominator) for t in x)

    def find(self, v):
        return self.keys.get(self.key(v))

    def addition(self):
        return [[self.find([a + b for a, b in zip(x, y)]) for y in self.reps] for x in self.reps]


def depth_image_count(m_level, m_depth):
    """Distinct permutations of Z^d/L_N induced by piecewise translations constant on L_n cells.

    Each cell c of L_n gets a translation class t_c in Z^d/L_N; the table is
    kept when the induced map on Z^d/L_N is a bijection.
    """
    QN = Quotient(m_depth)
    add = QN.addition()
    Qn = Quotient(m_level)
    cell_of = [Qn.find(x) for x in QN.reps]
    k = max(cell_of) + 1
    seen = set()
    for table in itertools.product(range(QN.size), repeat=k):
        image = tuple(add[x][table[cell_of[x]]] for x in range(QN.size))
        if len(set(image)) == QN.size:
            seen.add(image)
    return len(seen)
