"""Orbit equivalences between truncated odometers and their orbit cocycles.

An ``OEMap`` is an explicit bijection from the depth-N cosets of the source
chain (the H-system Y) to the depth-N cosets of the target chain (the
G-system X). At depth N the orbit cocycle f(s, y) is only known modulo the
target lattice L_N; every comparison in this module is therefore done in
Z^d / L_N, and integer lifts are the minimal sup-norm representatives found
inside the search bound.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from .lattice import (
    Lattice,
    RatMatrix,
    as_matrix,
    columns,
    coordinates,
    coset_indices,
    lattice_from_generators,
    reduce,
    short_representatives,
    vadd,
    vsub,
)
from .odometer import Chain, chain_from_lattices, coset_cells


class OEError(ValueError):
    pass


def standard_generators(d: int) -> list[tuple]:
    gens = []
    for j in range(d):
        e = tuple(int(i == j) for i in range(d))
        gens.append(e)
        gens.append(tuple(-x for x in e))
    return gens


@dataclass(frozen=True)
class OEMap:
    source: Chain  # (Y, H)
    target: Chain  # (X, G)
    depth: int
    table: tuple  # source position -> target position, depth-N cosets in mixed-radix order
    theta: RatMatrix | None = None
    reps_source: tuple = ()
    reps_target: tuple = ()  # reps_target[i] = a_f for f = reps_source[i]
    base_level: int = 1
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        n = len(self.table)
        if n != self.source.index(self.depth) or n != self.target.index(self.depth):
            raise OEError("table size does not match the depth-N coset counts")
        if sorted(self.table) != list(range(n)):
            raise OEError("table is not a bijection")

    def __call__(self, y_label) -> tuple:
        LY = self.source.level(self.depth)
        return self.target.points(self.depth)[self.table[LY.label_index(reduce(y_label, LY))]]

    def inverse(self) -> OEMap:
        inv = [0] * len(self.table)
        for i, j in enumerate(self.table):
            inv[j] = i
        theta = self.theta.inverse() if self.theta is not None else None
        return OEMap(
            self.target, self.source, self.depth, tuple(inv), theta,
            self.reps_target, self.reps_source, self.base_level, dict(self.meta),
        )

    def to_json(self) -> dict:
        def chain_json(c):
            return [[[str(x) for x in r] for r in L.basis] for L in c.lattices]

        out = {
            "depth": self.depth,
            "source_chain": chain_json(self.source),
            "target_chain": chain_json(self.target),
            "table": self.table,
            "base_level": self.base_level,
        }
        if self.theta is not None:
            out["theta"] = {
                "numerator": [[str(x) for x in r] for r in self.theta.num],
                "denominator": str(self.theta.den),
            }
            out["reps_source"] = [[str(x) for x in v] for v in self.reps_source]
            out["reps_target"] = [[str(x) for x in v] for v in self.reps_target]
        return out

    @classmethod
    def from_json(cls, data: dict) -> OEMap:
        def chain_of(bases):
            return chain_from_lattices([Lattice(as_matrix(b)) for b in bases])

        theta = None
        if "theta" in data:
            theta = RatMatrix(as_matrix(data["theta"]["numerator"]), int(data["theta"]["denominator"]))
        return cls(
            chain_of(data["source_chain"]),
            chain_of(data["target_chain"]),
            int(data["depth"]),
            tuple(int(x) for x in data["table"]),
            theta,
            tuple(tuple(int(x) for x in v) for v in data.get("reps_source", [])),
            tuple(tuple(int(x) for x in v) for v in data.get("reps_target", [])),
            int(data.get("base_level", 1)),
        )


def identity_oe(chain: Chain, depth: int | None = None) -> OEMap:
    depth = chain.depth if depth is None else depth
    n = chain.index(depth)
    return OEMap(chain, chain, depth, tuple(range(n)), RatMatrix.from_int(_eye(chain.d)))


def random_oe(source: Chain, target: Chain, depth: int, seed: int) -> OEMap:
    """Seeded uniformly random bijection; the negative control for check_oe."""
    n = source.index(depth)
    perm = list(range(n))
    random.Random(seed).shuffle(perm)
    return OEMap(source, target, depth, tuple(perm))


def _eye(d):
    return tuple(tuple(int(i == j) for j in range(d)) for i in range(d))


def build_oe(witness, depth: int | None = None, bijection=None) -> OEMap:
    """Orbit equivalence from a structural-conjugacy witness theta: H_b -> G_b.

    On the identity cell D of level b (b = witness.base_level) the map is
    y -> theta(y); on the cell f + D it is y -> a_f + theta(y - f), where
    f ranges over the reduced representatives of Z^d / H_b and f -> a_f is
    the given bijection onto representatives of Z^d / G_b (default: pair the
    canonical orders, which sends 0 to 0).
    """
    from .rigidity import verify_struct_conj

    source, target = witness.source, witness.target
    depth = min(source.depth, target.depth) if depth is None else depth
    b = witness.base_level
    verify_struct_conj(target, source, witness.theta, depth, base_level=b)
    HY, GX = source.level(b), target.level(b)
    f_reps = tuple(source.points(b))
    if bijection is None:
        a_reps = tuple(target.points(b))
    else:
        pairs = {reduce(f, HY): tuple(int(x) for x in a) for f, a in bijection}
        a_reps = tuple(pairs[f] for f in f_reps)
        if sorted(GX.label_index(reduce(a, GX)) for a in a_reps) != list(range(GX.index)):
            raise OEError("bijection does not hit every coset of the target base level")
    zero = (0,) * source.d
    if any(reduce(a_reps[f_reps.index(zero)], GX)):
        raise OEError("the representative bijection must send the identity to the identity")
    LY, LX = source.level(depth), target.level(depth)
    table = []
    for y in source.points(depth):
        f = reduce(y, HY)
        a = a_reps[HY.label_index(f)]
        image = vadd(a, witness.theta.apply_integral(vsub(y, f)))
        table.append(LX.label_index(reduce(image, LX)))
    return OEMap(source, target, depth, tuple(table), witness.theta, f_reps, a_reps, b)


# -- verification -----------------------------------------------------------


@dataclass
class GeneratorCheck:
    generator: tuple
    level: int  # minimal constancy level m(s)
    values: dict  # level-m cell position -> lifted cocycle vector (None if not found)
    found: bool
    failing_point: tuple | None = None
    reason: str = ""

    @property
    def ok(self) -> bool:
        return self.found and self.failing_point is None


@dataclass
class DirectionCheck:
    name: str
    generators: list
    checks: list

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)


@dataclass
class OEReport:
    depth: int
    search_bound: int
    forward: DirectionCheck
    backward: DirectionCheck

    @property
    def verdict(self) -> str:
        return "PASS" if self.forward.ok and self.backward.ok else "FAIL"

    @property
    def first_failure(self):
        for direction in (self.forward, self.backward):
            for c in direction.checks:
                if not c.ok:
                    return direction.name, c
        return None

    def to_json(self) -> dict:
        def dir_json(dc):
            return [
                {
                    "generator": [str(x) for x in c.generator],
                    "level": c.level,
                    "found": c.found,
                    "values": {
                        str(k): (None if v is None else [str(x) for x in v])
                        for k, v in sorted(c.values.items())
                    },
                    **(
                        {"failing_point": [str(x) for x in c.failing_point], "reason": c.reason}
                        if c.failing_point is not None or not c.found
                        else {}
                    ),
                }
                for c in dc.checks
            ]

        return {
            "depth": self.depth,
            "search_bound": self.search_bound,
            "verdict": self.verdict,
            "forward": dir_json(self.forward),
            "backward": dir_json(self.backward),
        }


def default_search_bound(phi: OEMap) -> int:
    diag = [x for c in (phi.source, phi.target) for L in c.lattices[: phi.depth] for x in L.diagonal]
    return 2 * max(diag + [1])


def _classes(phi: OEMap, s) -> np.ndarray:
    """Coset position in Z^d/L_N^X of phi(s.y) - phi(y), for every depth-N source point y."""
    N = phi.depth
    LY, LX = phi.source.level(N), phi.target.level(N)
    ys = np.array(phi.source.points(N), dtype=np.int64).reshape(-1, phi.source.d)
    moved = coset_indices(ys + np.array(s, dtype=np.int64), LY).astype(np.int64)
    table = np.array(phi.table, dtype=np.int64)
    xs = np.array(phi.target.points(N), dtype=np.int64).reshape(-1, phi.target.d)
    diff = xs[table[moved]] - xs[table]
    return np.asarray(coset_indices(diff, LX), dtype=np.int64)


def _constancy_level(cells_by_level, classes) -> int:
    for m, cells in enumerate(cells_by_level):
        pairs = np.unique(np.stack([cells, classes], axis=1), axis=0)
        if len(pairs) == len(np.unique(cells)):
            return m
    return len(cells_by_level) - 1


def _check_direction(phi: OEMap, gens, bound: int, name: str) -> DirectionCheck:
    N = phi.depth
    cells_by_level = [np.array(coset_cells(phi.source, N, m), dtype=np.int64) for m in range(N + 1)]
    LX = phi.target.level(N)
    checks = []
    for s in gens:
        s = tuple(int(x) for x in s)
        classes = _classes(phi, s)
        m = _constancy_level(cells_by_level, classes)
        cells = cells_by_level[m]
        cell_class = {}
        for c, k in zip(cells.tolist(), classes.tolist()):
            cell_class.setdefault(c, k)
        lifts = short_representatives(LX, set(cell_class.values()), bound)
        values = {c: lifts.get(k) for c, k in sorted(cell_class.items())}
        found = all(v is not None for v in values.values())
        failing, reason = None, ""
        if m >= N:
            coarse = cells_by_level[N - 1]
            first = {}
            for i, (c, k) in enumerate(zip(coarse.tolist(), classes.tolist())):
                if c in first and first[c] != k:
                    failing = phi.source.points(N)[i]
                    reason = f"cocycle not constant on level-{N - 1} cylinders"
                    break
                first.setdefault(c, k)
        if not found:
            missing = next(c for c, v in values.items() if v is None)
            i = int(np.nonzero(cells == missing)[0][0])
            failing = failing or phi.source.points(N)[i]
            reason = reason or f"no cocycle value within sup-norm {bound}"
        checks.append(GeneratorCheck(s, m, values, found, failing, reason))
    return DirectionCheck(name, [tuple(g) for g in gens], checks)


def check_oe(phi: OEMap, gens=None, search_bound: int | None = None, dual_gens=None) -> OEReport:
    """Check that phi and phi^-1 both have orbit cocycles constant below depth N."""
    gens = standard_generators(phi.source.d) if gens is None else gens
    dual_gens = standard_generators(phi.target.d) if dual_gens is None else dual_gens
    bound = default_search_bound(phi) if search_bound is None else search_bound
    fwd = _check_direction(phi, gens, bound, "forward")
    bwd = _check_direction(phi.inverse(), dual_gens, bound, "backward")
    return OEReport(phi.depth, bound, fwd, bwd)


# -- cocycle tables and theta extraction ------------------------------------


@dataclass(frozen=True)
class CocycleTable:
    source: Chain
    target: Chain
    depth: int
    level: int
    generators: tuple
    values: tuple  # values[g][cell position at `level`] -> vector

    def value(self, s, y_label) -> tuple:
        gi = self.generators.index(tuple(s))
        L = self.source.level(self.level)
        return self.values[gi][L.label_index(reduce(y_label, L))]

    def to_json(self) -> dict:
        cells = self.source.points(self.level)
        return {
            "depth": self.depth,
            "level": self.level,
            "entries": [
                {
                    "generator": [str(x) for x in s],
                    "coset": [str(x) for x in c],
                    "value": [str(x) for x in v],
                }
                for s, row in zip(self.generators, self.values)
                for c, v in zip(cells, row)
            ],
        }


def cocycle_table(phi: OEMap, gens=None, search_bound: int | None = None) -> CocycleTable:
    report = check_oe(phi, gens, search_bound)
    if report.verdict != "PASS":
        where, c = report.first_failure
        raise OEError(f"{where} check failed for generator {c.generator}: {c.reason}")
    m = max(c.level for c in report.forward.checks)
    rows = []
    for c in report.forward.checks:
        coarse = phi.source.level(c.level)
        rows.append(
            tuple(
                c.values[coarse.label_index(reduce(cell, coarse))]
                for cell in phi.source.points(m)
            )
        )
    gens = tuple(c.generator for c in report.forward.checks)
    return CocycleTable(phi.source, phi.target, phi.depth, m, gens, tuple(rows))


def generator_word(h) -> list[tuple]:
    """Greedy word in +-e_j spelling h (coordinate by coordinate)."""
    d = len(h)
    word = []
    for j, x in enumerate(h):
        step = tuple((1 if x > 0 else -1) * int(i == j) for i in range(d))
        word.extend([step] * abs(x))
    return word


def telescope(table: CocycleTable, h, y_label) -> tuple[tuple, tuple]:
    """(f(h, y), h.y): the generator cocycle summed along the greedy word for h."""
    LY = table.source.level(table.depth)
    cur = reduce(y_label, LY)
    total = (0,) * table.target.d
    for s in reversed(generator_word(h)):
        total = vadd(total, table.value(s, cur))
        cur = reduce(vadd(cur, s), LY)
    return total, cur


def evaluate_cocycle(table: CocycleTable, h, y_label) -> tuple:
    return telescope(table, h, y_label)[0]


@dataclass(frozen=True)
class ThetaPiece:
    cell: tuple  # level-n coset label of the source
    level: int
    basis: tuple  # HNF basis of the source lattice at `level`
    images: tuple  # images[j] = theta_i(basis column j), lifted

    def matrix(self) -> RatMatrix:
        img = tuple(zip(*self.images)) if self.images else ()
        inv = RatMatrix.from_int(self.basis).inverse()
        return inv.rmul(img)

    def apply(self, h) -> tuple:
        L = Lattice(self.basis)
        x = coordinates(h, L)
        if x is None:
            raise OEError(f"{tuple(h)} is not in the piece's domain lattice")
        out = (0,) * len(self.basis)
        for coef, img in zip(x, self.images):
            out = vadd(out, tuple(coef * v for v in img))
        return out


def extract_theta(table: CocycleTable, n: int | None = None) -> list[ThetaPiece]:
    """One homomorphism theta_i on the level-n source lattice per level-n cell.

    The default level is the constancy level of the table, but at least 1.
    """
    n = max(table.level, min(1, table.depth)) if n is None else n
    if not table.level <= n <= table.depth:
        raise OEError(f"level must lie in {table.level}..{table.depth}")
    needed = set(standard_generators(table.source.d))
    if not needed <= set(table.generators):
        raise OEError("extraction needs the standard generators +-e_j in the table")
    Ln = table.source.level(n)
    basis = columns(Ln.basis)
    pieces = []
    for cell in table.source.points(n):
        images = []
        for h in basis:
            value, end = telescope(table, h, cell)
            if reduce(end, Ln) != reduce(cell, Ln):
                raise OEError("word evaluation left the expected coset")
            images.append(value)
        pieces.append(ThetaPiece(cell, n, Ln.basis, tuple(images)))
    return pieces


def congruent(u, v, L: Lattice) -> bool:
    return not any(reduce(vsub(u, v), L))


def theta_agrees(piece: ThetaPiece, theta: RatMatrix, target: Chain, depth: int) -> bool:
    """theta_i and theta coincide on the piece's lattice as maps into Z^d / L_depth."""
    LX = target.level(depth)
    return all(
        congruent(img, theta.apply_integral(h), LX)
        for h, img in zip(columns(piece.basis), piece.images)
    )


def pieces_agree(pieces, target: Chain, depth: int) -> bool:
    LX = target.level(depth)
    first = pieces[0]
    return all(
        congruent(a, b, LX) for p in pieces[1:] for a, b in zip(first.images, p.images)
    )


def maps_levels(piece: ThetaPiece, source: Chain, target: Chain, depth: int) -> list[bool]:
    """For k = level..depth: does theta_i(L_k^H) + L_N^G equal L_k^G?"""
    LN = target.level(depth)
    out = []
    for k in range(piece.level, depth + 1):
        gens = [piece.apply(h) for h in columns(source.level(k).basis)]
        span = lattice_from_generators(gens + columns(LN.basis))
        out.append(span == target.level(k))
    return out


def homomorphism_holds(table: CocycleTable, piece: ThetaPiece) -> bool:
    """theta_i(u + v) = theta_i(u) + theta_i(v) on pairs of basis columns, mod L_N."""
    LX = table.target.level(table.depth)
    cols = columns(piece.basis)
    for i, u in enumerate(cols):
        for v in cols[i:]:
            whole = evaluate_cocycle(table, vadd(u, v), piece.cell)
            split = vadd(piece.apply(u), piece.apply(v))
            if not congruent(whole, split, LX):
                return False
    return True


__all__ = [
    "CocycleTable",
    "GeneratorCheck",
    "OEError",
    "OEMap",
    "OEReport",
    "ThetaPiece",
    "build_oe",
    "check_oe",
    "cocycle_table",
    "congruent",
    "default_search_bound",
    "evaluate_cocycle",
    "extract_theta",
    "generator_word",
    "homomorphism_holds",
    "identity_oe",
    "maps_levels",
    "pieces_agree",
    "random_oe",
    "standard_generators",
    "telescope",
    "theta_agrees",
]

