"""Truncated Z^d-odometers: nested lattice chains and their coset points.

Levels are numbered from 0, where level 0 is Z^d itself (the trivial
partition) and levels 1..N are the lattices of the chain. A point at depth n
is a coset of the level-n lattice, stored by its reduced label only; coarser
coordinates are recomputed by reduction because the chain is nested.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .lattice import (
    IntMatrix,
    Lattice,
    LatticeError,
    as_matrix,
    box_vectors,
    contains,
    coset_indices,
    coset_reps,
    det,
    hnf,
    leq,
    matmul,
    matpow,
    reduce,
    vadd,
)

RULES = ("explicit", "matrix_power", "scaled_power")


class ChainError(ValueError):
    def __init__(self, message, level=None):
        super().__init__(message if level is None else f"{message} at level {level}")
        self.level = level


@dataclass(frozen=True)
class ChainSpec:
    """How to generate levels 1..depth.

    explicit:      level n -> matrices[n-1]
    matrix_power:  level n -> base^n
    scaled_power:  level n -> front @ base^(n-1)   (side="right": base^(n-1) @ front)
    """

    d: int
    rule: str
    depth: int
    matrices: tuple = ()
    base: IntMatrix | None = None
    front: IntMatrix | None = None
    side: str = "left"

    def level_matrix(self, n: int) -> IntMatrix:
        if self.rule == "explicit":
            return as_matrix(self.matrices[n - 1])
        if self.rule == "matrix_power":
            return matpow(as_matrix(self.base), n)
        if self.rule == "scaled_power":
            p = matpow(as_matrix(self.base), n - 1)
            f = as_matrix(self.front)
            return matmul(f, p) if self.side == "left" else matmul(p, f)
        raise ChainError(f"unknown chain rule {self.rule!r}")

    def with_depth(self, depth: int) -> ChainSpec:
        return ChainSpec(self.d, self.rule, depth, self.matrices, self.base, self.front, self.side)


def explicit_spec(matrices, d: int | None = None) -> ChainSpec:
    mats = tuple(as_matrix(m) for m in matrices)
    return ChainSpec(d or len(mats[0]), "explicit", len(mats), matrices=mats)


def power_spec(base, depth: int) -> ChainSpec:
    base = as_matrix(base)
    return ChainSpec(len(base), "matrix_power", depth, base=base)


def scaled_spec(front, base, depth: int, side: str = "left") -> ChainSpec:
    front, base = as_matrix(front), as_matrix(base)
    return ChainSpec(len(base), "scaled_power", depth, base=base, front=front, side=side)


def z1_spec(moduli) -> ChainSpec:
    """Chain of subgroups a_1 Z > a_2 Z > ... of Z."""
    return explicit_spec([[[int(a)]] for a in moduli], d=1)


@dataclass(frozen=True)
class Chain:
    d: int
    lattices: tuple  # levels 1..N
    spec: ChainSpec | None = field(default=None, compare=False)

    @property
    def depth(self) -> int:
        return len(self.lattices)

    @property
    def indices(self) -> list[int]:
        return [L.index for L in self.lattices]

    def level(self, n: int) -> Lattice:
        if not 0 <= n <= self.depth:
            raise ChainError(f"level {n} outside 0..{self.depth}")
        return Lattice.whole(self.d) if n == 0 else self.lattices[n - 1]

    def index(self, n: int) -> int:
        return self.level(n).index

    @cached_property
    def _points(self) -> dict:
        return {}

    def points(self, n: int) -> list[tuple]:
        """Reduced labels of Z^d / L_n in mixed-radix order."""
        if n not in self._points:
            L = self.level(n)
            self._points[n] = [L.label_at(i) for i in range(L.index)]
        return self._points[n]

    def truncate(self, depth: int) -> Chain:
        if depth > self.depth:
            raise ChainError(f"depth {depth} exceeds chain length {self.depth}")
        spec = self.spec.with_depth(depth) if self.spec else None
        return Chain(self.d, self.lattices[:depth], spec)


def make_chain(spec: ChainSpec) -> Chain:
    lattices = []
    for n in range(1, spec.depth + 1):
        m = spec.level_matrix(n)
        if len(m) != spec.d or det(m) == 0:
            raise ChainError("singular matrix", n)
        L = hnf(m)[0]
        if lattices:
            prev = lattices[-1]
            if not leq(L, prev):
                raise ChainError("not nested", n)
            if L == prev:
                warnings.warn(f"level {n} repeats level {n - 1}", stacklevel=2)
        lattices.append(L)
    return Chain(spec.d, tuple(lattices), spec)


def chain_from_lattices(lattices, d: int | None = None) -> Chain:
    lattices = tuple(lattices)
    for n in range(1, len(lattices)):
        if not leq(lattices[n], lattices[n - 1]):
            raise ChainError("not nested", n + 1)
    return Chain(d or lattices[0].d, lattices, None)


@dataclass(frozen=True, order=True)
class TruncatedPoint:
    depth: int
    label: tuple

    def to_json(self) -> dict:
        return {"depth": self.depth, "label": [str(x) for x in self.label]}


def point(chain: Chain, v, depth: int | None = None) -> TruncatedPoint:
    depth = chain.depth if depth is None else depth
    return TruncatedPoint(depth, reduce(v, chain.level(depth)))


def identity_point(chain: Chain, depth: int | None = None) -> TruncatedPoint:
    return point(chain, (0,) * chain.d, depth)


def act(chain: Chain, g, x: TruncatedPoint) -> TruncatedPoint:
    if len(g) != chain.d:
        raise ChainError("dimension mismatch")
    return TruncatedPoint(x.depth, reduce(vadd(x.label, g), chain.level(x.depth)))


def cylinder(chain: Chain, x: TruncatedPoint, m: int) -> TruncatedPoint:
    if m > x.depth:
        raise ChainError(f"cylinder level {m} deeper than point depth {x.depth}")
    return TruncatedPoint(m, reduce(x.label, chain.level(m)))


def ultrametric(chain: Chain, x: TruncatedPoint, y: TruncatedPoint) -> Fraction:
    """2^-m for the first level m where x and y split; 0 if they agree through their depth.

    Zero only means "equal at this truncation"; deeper levels are not seen.
    """
    if x.depth != y.depth:
        raise ChainError("depth mismatch")
    for n in range(1, x.depth + 1):
        L = chain.level(n)
        if reduce(x.label, L) != reduce(y.label, L):
            return Fraction(1, 2**n)
    return Fraction(0)


def return_times(chain: Chain, n: int, ball: int) -> set:
    """Box elements sending the identity point of depth n back into the identity cylinder."""
    L = chain.level(n)
    box = box_vectors(chain.d, ball)
    hits = coset_indices(box, L) == 0
    return {tuple(int(x) for x in v) for v in box[hits]}


def freeness_witness(chain: Chain, g) -> int | None:
    """Smallest level whose lattice misses g, or None if g survives to the chain depth."""
    if not any(g):
        raise ChainError("freeness witness needs a nonzero vector")
    for n in range(1, chain.depth + 1):
        if not contains(chain.level(n), g):
            return n
    return None


def orbit_cover(chain: Chain, x: TruncatedPoint, bound: int) -> int:
    """Number of depth-n cosets reached from x by group elements of sup-norm <= bound."""
    L = chain.level(x.depth)
    box = box_vectors(chain.d, bound) + np.array(x.label, dtype=np.int64)
    return len(np.unique(coset_indices(box, L)))


def minimality_bound(chain: Chain, n: int) -> int:
    return max(chain.level(n).diagonal) * chain.d


# -- factors ----------------------------------------------------------------


@dataclass(frozen=True)
class FactorSpec:
    chain: Chain
    levels: tuple  # strictly increasing levels of `chain`, each in 1..N

    def __post_init__(self):
        lv = tuple(self.levels)
        if any(b <= a for a, b in zip(lv, lv[1:])) or not lv:
            raise ChainError("factor levels must be strictly increasing")
        if lv[0] < 1 or lv[-1] > self.chain.depth:
            raise ChainError("factor levels outside the chain")

    @cached_property
    def coarse(self) -> Chain:
        return Chain(self.chain.d, tuple(self.chain.level(n) for n in self.levels), None)

    def fine_level(self, k: int) -> int:
        return 0 if k == 0 else self.levels[k - 1]


def factor_point(f: FactorSpec, x: TruncatedPoint) -> TruncatedPoint:
    """Image of a fine point at depth levels[k-1] as a coarse point at depth k."""
    if x.depth == 0:
        return x
    if x.depth not in f.levels:
        raise ChainError(f"depth {x.depth} is not in the factor subsequence")
    k = f.levels.index(x.depth) + 1
    return TruncatedPoint(k, reduce(x.label, f.chain.level(x.depth)))


def all_points(chain: Chain, depth: int) -> list[TruncatedPoint]:
    return [TruncatedPoint(depth, lab) for lab in chain.points(depth)]


def coset_cells(chain: Chain, fine: int, coarse: int) -> list[int]:
    """For each depth-`fine` point (in order) the position of its level-`coarse` cell."""
    Lc = chain.level(coarse)
    pts = np.array(chain.points(fine), dtype=np.int64).reshape(-1, chain.d)
    return [int(i) for i in coset_indices(pts, Lc)]


def level_reps(chain: Chain, outer: int, inner: int) -> list[tuple]:
    return coset_reps(chain.level(outer), chain.level(inner))


def describe(chain: Chain) -> dict:
    return {
        "dimension": chain.d,
        "depth": chain.depth,
        "indices": [str(i) for i in chain.indices],
        "hnf_bases": [[[str(x) for x in r] for r in L.basis] for L in chain.lattices],
    }


__all__ = [
    "Chain",
    "ChainError",
    "ChainSpec",
    "FactorSpec",
    "LatticeError",
    "RULES",
    "TruncatedPoint",
    "act",
    "all_points",
    "chain_from_lattices",
    "coset_cells",
    "cylinder",
    "describe",
    "explicit_spec",
    "factor_point",
    "freeness_witness",
    "identity_point",
    "level_reps",
    "make_chain",
    "minimality_bound",
    "orbit_cover",
    "point",
    "power_spec",
    "return_times",
    "scaled_spec",
    "ultrametric",
    "z1_spec",
]

