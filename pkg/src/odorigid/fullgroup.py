"""Level-n elements of the topological full group as piecewise translations.

An element of level n assigns a translation vector t_c in Z^d to each coset c
of L_n and acts on a point x of depth >= n by x -> x + t_c where c is the
level-n cell of x. Translations are kept unreduced so that the orbit cocycle
f(e, x) = t_c takes values in Z^d, not in a quotient.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .lattice import Lattice, contains, coset_indices, reduce, vadd, vneg, vsub
from .odometer import Chain, ChainError, FactorSpec, TruncatedPoint, act, level_reps

DEFAULT_CAP = 10**6


class FullGroupError(ValueError):
    pass


def enumeration_cap() -> int:
    return int(os.environ.get("ODORIGID_ENUM_CAP", DEFAULT_CAP))


@dataclass(frozen=True)
class PiecewiseTranslation:
    chain: Chain
    level: int
    translations: tuple  # aligned with chain.points(level)

    def table(self) -> dict:
        return dict(zip(self.chain.points(self.level), self.translations))

    def translation_at(self, cell_label) -> tuple:
        L = self.chain.level(self.level)
        return self.translations[L.label_index(cell_label)]

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "table": [
                {"coset": [str(x) for x in c], "vector": [str(x) for x in t]}
                for c, t in zip(self.chain.points(self.level), self.translations)
            ],
        }


def _coset_map(chain: Chain, level: int, translations) -> list[int]:
    L = chain.level(level)
    return [
        L.label_index(reduce(vadd(c, t), L))
        for c, t in zip(chain.points(level), translations)
    ]


def make_element(chain: Chain, level: int, table) -> PiecewiseTranslation:
    """Validate a translation table (dict label -> vector, or a list in coset order)."""
    pts = chain.points(level)
    if isinstance(table, dict):
        L = chain.level(level)
        norm = {reduce(k, L): tuple(int(x) for x in v) for k, v in table.items()}
        if set(norm) != set(pts) or len(norm) != len(table):
            raise FullGroupError(f"table must cover the {len(pts)} cosets of level {level}")
        translations = tuple(norm[p] for p in pts)
    else:
        translations = tuple(tuple(int(x) for x in v) for v in table)
        if len(translations) != len(pts):
            raise FullGroupError(f"table must cover the {len(pts)} cosets of level {level}")
    if any(len(t) != chain.d for t in translations):
        raise FullGroupError("translation of wrong dimension")
    image = _coset_map(chain, level, translations)
    seen: dict = {}
    for i, j in enumerate(image):
        if j in seen:
            raise FullGroupError(
                f"not a bijection on cosets: {pts[seen[j]]} and {pts[i]} both map to {pts[j]}"
            )
        seen[j] = i
    return PiecewiseTranslation(chain, level, translations)


def identity_element(chain: Chain, level: int = 0) -> PiecewiseTranslation:
    zero = (0,) * chain.d
    return PiecewiseTranslation(chain, level, (zero,) * chain.index(level))


def translation_element(chain: Chain, g, level: int = 0) -> PiecewiseTranslation:
    g = tuple(int(x) for x in g)
    return PiecewiseTranslation(chain, level, (g,) * chain.index(level))


def cocycle(e: PiecewiseTranslation, x: TruncatedPoint) -> tuple:
    """f(e, x): the translation e applies at x."""
    if x.depth < e.level:
        raise FullGroupError(f"point depth {x.depth} below element level {e.level}")
    return e.translation_at(reduce(x.label, e.chain.level(e.level)))


def apply(e: PiecewiseTranslation, x: TruncatedPoint) -> TruncatedPoint:
    return act(e.chain, cocycle(e, x), x)


def lift_level(e: PiecewiseTranslation, levels: int = 1) -> PiecewiseTranslation:
    target = e.level + levels
    if target > e.chain.depth:
        raise FullGroupError(f"cannot lift past chain depth {e.chain.depth}")
    Lc = e.chain.level(e.level)
    tr = tuple(e.translation_at(reduce(c, Lc)) for c in e.chain.points(target))
    return PiecewiseTranslation(e.chain, target, tr)


def lift_to(e: PiecewiseTranslation, level: int) -> PiecewiseTranslation:
    if level < e.level:
        raise FullGroupError("cannot lower an element's level")
    return e if level == e.level else lift_level(e, level - e.level)


def compose(a: PiecewiseTranslation, b: PiecewiseTranslation) -> PiecewiseTranslation:
    """The element x -> a(b(x)); both are lifted to the larger level first."""
    if a.chain != b.chain:
        raise FullGroupError("elements live on different chains")
    n = max(a.level, b.level)
    a, b = lift_to(a, n), lift_to(b, n)
    L = a.chain.level(n)
    tr = []
    for c, tb in zip(a.chain.points(n), b.translations):
        tr.append(vadd(a.translation_at(reduce(vadd(c, tb), L)), tb))
    return PiecewiseTranslation(a.chain, n, tuple(tr))


def perm_part(e: PiecewiseTranslation) -> tuple:
    """The coset permutation as a tuple: position i -> image position."""
    return tuple(_coset_map(e.chain, e.level, e.translations))


def inverse(e: PiecewiseTranslation) -> PiecewiseTranslation:
    sigma = perm_part(e)
    tr = [None] * len(sigma)
    for i, j in enumerate(sigma):
        tr[j] = vneg(e.translations[i])
    return PiecewiseTranslation(e.chain, e.level, tuple(tr))


def induced_map(e: PiecewiseTranslation, depth: int | None = None) -> tuple:
    """The permutation of depth-N cosets that e induces (positions in mixed-radix order)."""
    depth = e.chain.depth if depth is None else depth
    if depth < e.level:
        raise FullGroupError("depth below element level")
    L = e.chain.level(depth)
    Lc = e.chain.level(e.level)
    return tuple(
        L.label_index(reduce(vadd(x, e.translation_at(reduce(x, Lc))), L))
        for x in e.chain.points(depth)
    )


def same_map(a: PiecewiseTranslation, b: PiecewiseTranslation, depth: int | None = None) -> bool:
    return induced_map(a, depth) == induced_map(b, depth)


# -- semidirect structure ---------------------------------------------------


@dataclass(frozen=True)
class SemidirectForm:
    level: int
    perm: tuple
    kernel: tuple  # vectors of L_n, one per coset
    reps: tuple  # one representative vector per coset, aligned with chain.points(level)


def _check_reps(chain: Chain, level: int, reps) -> tuple:
    L = chain.level(level)
    reps = tuple(tuple(int(x) for x in r) for r in reps)
    if [L.label_index(reduce(r, L)) for r in reps] != list(range(L.index)):
        raise FullGroupError("reps must list one representative per coset, in coset order")
    return reps


def semidirect_decompose(e: PiecewiseTranslation, reps=None) -> SemidirectForm:
    """Split t_c = rep(sigma c) - rep(c) + k_c with k_c in L_n."""
    chain, n = e.chain, e.level
    reps = _check_reps(chain, n, reps if reps is not None else chain.points(n))
    sigma = perm_part(e)
    L = chain.level(n)
    kernel = []
    for i, t in enumerate(e.translations):
        k = vsub(t, vsub(reps[sigma[i]], reps[i]))
        if not contains(L, k):
            raise FullGroupError("kernel part escaped L_n (internal inconsistency)")
        kernel.append(k)
    return SemidirectForm(n, sigma, tuple(kernel), reps)


def recombine(chain: Chain, form: SemidirectForm) -> PiecewiseTranslation:
    reps = form.reps
    tr = tuple(
        vadd(vsub(reps[form.perm[i]], reps[i]), form.kernel[i]) for i in range(len(reps))
    )
    return make_element(chain, form.level, tr)


def semidirect_product(a: SemidirectForm, b: SemidirectForm) -> SemidirectForm:
    """(s_a, k_a)(s_b, k_b) = (s_a s_b, c -> k_a(s_b c) + k_b(c))."""
    if a.level != b.level or a.reps != b.reps:
        raise FullGroupError("forms must share level and representatives")
    perm = tuple(a.perm[j] for j in b.perm)
    kernel = tuple(vadd(a.kernel[b.perm[i]], b.kernel[i]) for i in range(len(b.perm)))
    return SemidirectForm(a.level, perm, kernel, a.reps)


def semidirect_law_check(chain: Chain, a: SemidirectForm, b: SemidirectForm) -> bool:
    """Does composing the recombined elements agree with the semidirect multiplication?"""
    product = compose(recombine(chain, a), recombine(chain, b))
    return semidirect_decompose(product, a.reps) == semidirect_product(a, b)


# -- embeddings -------------------------------------------------------------


def embed_factor(e: PiecewiseTranslation, f: FactorSpec) -> PiecewiseTranslation:
    """Pull a coarse-chain element back along the factor map to the fine chain."""
    if e.chain != f.coarse:
        raise FullGroupError("element does not live on the factor's coarse chain")
    n = f.fine_level(e.level)
    Lc = f.coarse.level(e.level)
    tr = tuple(e.translation_at(reduce(c, Lc)) for c in f.chain.points(n))
    return PiecewiseTranslation(f.chain, n, tr)


# -- finite images ----------------------------------------------------------


def depth_image_order(chain: Chain, n: int, depth: int) -> int:
    k = chain.index(n)
    return (chain.index(depth) // k) ** k * math.factorial(k)


@dataclass
class DepthImage:
    level: int
    depth: int
    order: int
    expected: int
    maps: np.ndarray | None  # sorted rows, present when small

    def to_json(self, limit: int = 64) -> dict:
        out = {
            "level": self.level,
            "depth": self.depth,
            "order": str(self.order),
            "formula": str(self.expected),
            "formula_matches": self.order == self.expected,
        }
        if self.maps is not None and len(self.maps) <= limit:
            out["maps"] = [[int(x) for x in row] for row in self.maps]
        return out


def _addition_table(L: Lattice, pts) -> np.ndarray:
    arr = np.array(pts, dtype=np.int64).reshape(len(pts), L.d)
    sums = arr[:, None, :] + arr[None, :, :]
    return coset_indices(sums.reshape(-1, L.d), L).reshape(len(pts), len(pts)).astype(np.int64)


def enumerate_depth_image(
    chain: Chain, n: int, depth: int, cap: int | None = None, keep: int = 4096
) -> DepthImage:
    """All distinct permutations of Z^d/L_depth induced by level-n elements.

    Enumerates every coset permutation of level n together with every choice of
    kernel part in L_n / L_depth, builds the induced maps with the batch kernel
    and deduplicates; the count is returned next to the closed-form order.
    """
    if not 0 <= n <= depth <= chain.depth:
        raise FullGroupError("need 0 <= level <= depth <= chain depth")
    cap = enumeration_cap() if cap is None else cap
    expected = depth_image_order(chain, n, depth)
    if expected > cap:
        raise FullGroupError(f"enumeration needs {expected} induced maps, cap is {cap}")
    LN = chain.level(depth)
    Ln = chain.level(n)
    pts = chain.points(depth)
    if LN.index > 4096:
        raise FullGroupError(f"depth {depth} has {LN.index} cosets; too many to tabulate")
    add = _addition_table(LN, pts)
    cells = np.array(
        coset_indices(np.array(pts, dtype=np.int64).reshape(-1, chain.d), Ln), dtype=np.int64
    )
    reps = chain.points(n)
    k = len(reps)
    kernel_reps = level_reps(chain, n, depth)
    kidx = np.array([LN.label_index(r) for r in kernel_reps], dtype=np.int64)
    choices = np.array(list(itertools.product(range(len(kidx)), repeat=k)), dtype=np.int64)
    choices = choices.reshape(-1, k)
    batches = []
    for sigma in itertools.permutations(range(k)):
        base = np.array(
            [LN.label_index(reduce(vsub(reps[sigma[c]], reps[c]), LN)) for c in range(k)],
            dtype=np.int64,
        )
        tq = add[base[None, :], kidx[choices]]
        batches.append(_kernels.induced_maps(add, cells, np.ascontiguousarray(tq)))
    maps = np.unique(np.concatenate(batches), axis=0)
    return DepthImage(n, depth, len(maps), expected, maps if len(maps) <= keep else None)


def random_element(chain: Chain, level: int, rng, spread: int = 2) -> PiecewiseTranslation:
    """Random coset permutation with kernel parts that are small combinations of L_n's basis."""
    reps = chain.points(level)
    k = len(reps)
    sigma = list(range(k))
    rng.shuffle(sigma)
    L = chain.level(level)
    basis_cols = list(zip(*L.basis))
    tr = []
    for c in range(k):
        coeffs = [rng.randint(-spread, spread) for _ in basis_cols]
        kv = tuple(sum(a * col[i] for a, col in zip(coeffs, basis_cols)) for i in range(chain.d))
        tr.append(vadd(vsub(reps[sigma[c]], reps[c]), kv))
    return PiecewiseTranslation(chain, level, tuple(tr))


__all__ = [
    "ChainError",
    "DepthImage",
    "FullGroupError",
    "PiecewiseTranslation",
    "SemidirectForm",
    "apply",
    "cocycle",
    "compose",
    "depth_image_order",
    "embed_factor",
    "enumerate_depth_image",
    "identity_element",
    "induced_map",
    "inverse",
    "lift_level",
    "lift_to",
    "make_element",
    "perm_part",
    "random_element",
    "recombine",
    "same_map",
    "semidirect_decompose",
    "semidirect_law_check",
    "semidirect_product",
    "translation_element",
]
