"""Structural conjugacy witnesses, SNF obstructions and the A_0/B_0 example.

A witness is a rational matrix theta with theta(L_n^H) = L_n^G for every
level n = b..depth, where b is the base level (1 by default: the first
listed lattice of each chain plays the role of the finite-index subgroup
that theta identifies). Every negative verdict records the depth or bound
it was obtained at.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import sympy

from .lattice import (
    IntMatrix,
    LatticeError,
    RatMatrix,
    bounded_unimodulars,
    det,
    identity,
    lattice,
    snf_diagonal,
)
from .odometer import Chain, make_chain, power_spec, scaled_spec

A0 = ((4, 1), (0, 1))
B0 = ((2, 0), (0, 2))


class StructConjError(ValueError):
    def __init__(self, level: int, reason: str):
        super().__init__(f"level {level}: {reason}")
        self.level = level
        self.reason = reason


@dataclass(frozen=True)
class StructConjWitness:
    theta: RatMatrix  # maps source levels onto target levels
    source: Chain  # {H_n}
    target: Chain  # {G_n}
    depth: int
    base_level: int = 1

    def inverse(self) -> StructConjWitness:
        return StructConjWitness(self.theta.inverse(), self.target, self.source, self.depth, self.base_level)

    def to_json(self) -> dict:
        return {
            "theta": {
                "numerator": [[str(x) for x in r] for r in self.theta.num],
                "denominator": str(self.theta.den),
            },
            "verified_depth": self.depth,
            "base_level": self.base_level,
            "index_check": [str(self.target.index(self.base_level)), str(self.source.index(self.base_level))],
        }


def struct_conj_failure(chain_G: Chain, chain_H: Chain, theta: RatMatrix, depth: int, base_level: int = 1):
    """None if theta is a witness through `depth`, else (level, reason) for the first violation."""
    if chain_G.d != chain_H.d or theta.d != chain_G.d:
        raise LatticeError("dimension mismatch")
    if depth > min(chain_G.depth, chain_H.depth):
        raise StructConjError(depth, "depth exceeds a chain")
    b = base_level
    if chain_G.index(b) != chain_H.index(b):
        return b, f"index mismatch [G:G_b]={chain_G.index(b)} vs [H:H_b]={chain_H.index(b)}"
    base_image = theta.integral_on(chain_H.level(b).basis)
    if base_image is None:
        return b, "theta is not integral on H_b"
    if det(base_image) == 0:
        return b, "theta is singular"
    for n in range(b, depth + 1):
        image = theta.integral_on(chain_H.level(n).basis)
        if image is None:
            return n, "theta(H_n) is not integral"
        if lattice(image) != chain_G.level(n):
            return n, "theta(H_n) != G_n"
    return None


def verify_struct_conj(chain_G: Chain, chain_H: Chain, theta, depth: int, base_level: int = 1) -> StructConjWitness:
    """Witness that theta: H_b -> G_b carries H_n onto G_n for n = b..depth."""
    if not isinstance(theta, RatMatrix):
        theta = RatMatrix.from_fractions(theta)
    failure = struct_conj_failure(chain_G, chain_H, theta, depth, base_level)
    if failure is not None:
        raise StructConjError(*failure)
    return StructConjWitness(theta, chain_H, chain_G, depth, base_level)


@dataclass
class SearchResult:
    witness: StructConjWitness | None
    tried: int
    entry_bound: int
    note: str = ""

    def to_json(self) -> dict:
        out = {"found": self.witness is not None, "tried": self.tried, "entry_bound": self.entry_bound}
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        else:
            out["verdict"] = self.note or f"none found within entry bound {self.entry_bound}"
        return out


def search_struct_conj(chain_G: Chain, chain_H: Chain, entry_bound: int, depth: int, base_level: int = 1) -> SearchResult:
    """Try theta = basis(G_b) U basis(H_b)^-1 over bounded unimodular U (sound, not complete)."""
    b = base_level
    if chain_G.index(b) != chain_H.index(b):
        return SearchResult(None, 0, entry_bound, f"index mismatch at level {b}; no witness can exist")
    BG = RatMatrix.from_int(chain_G.level(b).basis)
    BH_inv = RatMatrix.from_int(chain_H.level(b).basis).inverse()
    tried = 0
    for U in bounded_unimodulars(chain_G.d, entry_bound):
        tried += 1
        theta = (BG @ U) @ BH_inv
        if struct_conj_failure(chain_G, chain_H, theta, depth, b) is None:
            return SearchResult(StructConjWitness(theta, chain_H, chain_G, depth, b), tried, entry_bound)
    return SearchResult(None, tried, entry_bound)


# -- SNF obstruction --------------------------------------------------------


def level_matrix(chain: Chain, n: int) -> IntMatrix:
    if n == 0:
        return identity(chain.d)
    if chain.spec is not None:
        return chain.spec.level_matrix(n)
    return chain.level(n).basis


def _persistent_unit(chain: Chain) -> bool:
    """Matrix-power chain whose triangular base has a +-1 diagonal entry: every power keeps it."""
    spec = chain.spec
    if spec is None or spec.rule != "matrix_power":
        return False
    m = spec.base
    d = len(m)
    upper = all(m[i][j] == 0 for i in range(d) for j in range(i))
    lower = all(m[i][j] == 0 for i in range(d) for j in range(i + 1, d))
    return (upper or lower) and any(abs(m[i][i]) == 1 for i in range(d))


@dataclass
class ObstructionReport:
    max_n: int
    source_snf: tuple  # SNF of the source's base-level matrix
    target_snfs: list  # SNF of the target's level-n matrix, n = 0..max_n
    matches: list  # n with equal SNF
    reverse_source_snf: tuple
    reverse_target_snfs: list
    reverse_matches: list
    all_n: bool = False

    @property
    def certificate(self) -> bool:
        return not self.matches

    @property
    def scope(self) -> str:
        if not self.certificate:
            return "none"
        return "all n" if self.all_n else f"depth-bounded (n <= {self.max_n})"

    def to_json(self) -> dict:
        def diag(t):
            return [str(x) for x in t]

        return {
            "max_n": self.max_n,
            "source_snf": diag(self.source_snf),
            "target_snf_by_level": [diag(t) for t in self.target_snfs],
            "first_invariants": {
                "source": str(self.source_snf[0]),
                "target_by_level": [str(t[0]) for t in self.target_snfs],
            },
            "matching_levels": self.matches,
            "reverse": {
                "source_snf": diag(self.reverse_source_snf),
                "target_snf_by_level": [diag(t) for t in self.reverse_target_snfs],
                "matching_levels": self.reverse_matches,
            },
            "certificate": self.certificate,
            "scope": self.scope,
        }


def snf_obstruction(chain_G: Chain, chain_H: Chain, max_n: int, base_level: int = 1) -> ObstructionReport:
    """Compare SNF(H_b) with SNF(G_n), n = 0..max_n.

    Conjugacy by some Lambda in GL_d(Z) forces B P = Lambda A_n for some n and
    P in GL_d(Z), where B and A_n are the defining matrices; two-sided
    unimodular equivalence means equal SNF, so an empty match list certifies
    non-conjugacy over the checked range.
    """
    if chain_G.d != chain_H.d:
        raise LatticeError("dimension mismatch")
    b = base_level
    nG, nH = _reach(chain_G, max_n), _reach(chain_H, max_n)
    src = snf_diagonal(level_matrix(chain_H, b))
    tgt = [snf_diagonal(level_matrix(chain_G, n)) for n in range(nG + 1)]
    rsrc = snf_diagonal(level_matrix(chain_G, b))
    rtgt = [snf_diagonal(level_matrix(chain_H, n)) for n in range(nH + 1)]
    matches = [n for n, t in enumerate(tgt) if t == src]
    rmatches = [n for n, t in enumerate(rtgt) if t == rsrc]
    all_n = not matches and _persistent_unit(chain_G) and src[0] > 1
    return ObstructionReport(nG, src, tgt, matches, rsrc, rtgt, rmatches, all_n)


def _reach(chain: Chain, max_n: int) -> int:
    # chains with a generation rule can be extended; explicit lists stop at their length
    if chain.spec is not None and chain.spec.rule != "explicit":
        return max_n
    return min(max_n, chain.depth)


def _level_chain(chain: Chain, n: int) -> Chain:
    if chain.depth >= n:
        return chain
    if chain.spec is None:
        raise LatticeError(f"chain has depth {chain.depth} < {n} and no generation rule")
    return make_chain(chain.spec.with_depth(n))


# -- d = 1 ------------------------------------------------------------------


@dataclass
class SupernaturalVerdict:
    verdict: str
    depth: int
    moduli_a: list
    moduli_b: list
    primes: dict = field(default_factory=dict)
    unmatched_a: list = field(default_factory=list)
    unmatched_b: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "depth": self.depth,
            "moduli_a": [str(x) for x in self.moduli_a],
            "moduli_b": [str(x) for x in self.moduli_b],
            "unmatched_a": [str(x) for x in self.unmatched_a],
            "unmatched_b": [str(x) for x in self.unmatched_b],
            "primes": self.primes,
        }


def _valuation(n: int, p: int) -> int:
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def supernatural_equiv(chain_a: Chain, chain_b: Chain, depth: int | None = None) -> SupernaturalVerdict:
    """Do two chains a_n Z, b_n Z define the same Z-odometer, as far as `depth` shows?

    Every modulus of one chain should divide some modulus of the other. A
    failure is a truncation artifact when the offending primes are still
    growing in both chains at the last level; it is inconclusive when the
    other chain has merely stalled, and a depth-bounded negative when a prime
    is missing from the other chain altogether.
    """
    if chain_a.d != 1 or chain_b.d != 1:
        raise LatticeError("supernatural comparison needs d = 1 chains")
    depth = min(chain_a.depth, chain_b.depth) if depth is None else depth
    a = [chain_a.index(n) for n in range(depth + 1)]
    b = [chain_b.index(n) for n in range(depth + 1)]
    un_a = [x for x in a[1:] if not any(y % x == 0 for y in b[1:])]
    un_b = [y for y in b[1:] if not any(x % y == 0 for x in a[1:])]
    primes = sorted(set(sympy.primefactors(a[-1])) | set(sympy.primefactors(b[-1])))
    per_prime = {}
    verdict = "EQUIVALENT"
    for p in primes:
        ea, eb = _valuation(a[-1], p), _valuation(b[-1], p)
        ga = ea > _valuation(a[-2], p)
        gb = eb > _valuation(b[-2], p)
        if ea == 0 or eb == 0:
            status = "missing"
        elif ea == eb or (ga and gb):
            status = "consistent"
        else:
            status = "stalled"
        per_prime[str(p)] = {"exp_a": ea, "exp_b": eb, "growing_a": ga, "growing_b": gb, "status": status}
    statuses = {v["status"] for v in per_prime.values()}
    if "missing" in statuses:
        verdict = "NOT-EQUIVALENT-AT-DEPTH"
    elif (un_a or un_b) and "stalled" in statuses:
        verdict = "INCONCLUSIVE"
    return SupernaturalVerdict(verdict, depth, a[1:], b[1:], per_prime, un_a, un_b)


# -- the worked example -----------------------------------------------------


def paper_chains(depth: int) -> tuple[Chain, Chain]:
    """(A, B): A_n = A_0^n and B_n = B_0 A_0^(n-1), levels 1..depth."""
    return make_chain(power_spec(A0, depth)), make_chain(scaled_spec(B0, A0, depth))


def theta_candidates() -> dict:
    a = RatMatrix.from_int(A0)
    b = RatMatrix.from_int(B0)
    return {"A0*B0^-1": a @ b.inverse(), "B0*A0^-1": b @ a.inverse()}


@dataclass
class ExampleReport:
    sections: dict

    @property
    def ok(self) -> bool:
        return all(s.get("ok", True) for s in self.sections.values())


class ExampleFailure(RuntimeError):
    def __init__(self, step: str, detail: str):
        super().__init__(f"{step}: {detail}")
        self.step = step


def paper_example(depth: int = 3, conj_depth: int = 5, max_n: int = 10, swap: bool = False) -> ExampleReport:
    """Structural conjugacy, a constructed orbit equivalence, and the SNF obstruction."""
    from .orbit import build_oe, check_oe

    full = max(depth, conj_depth, max_n)
    A, B = paper_chains(full)
    names = ("A", "B")
    target, source = (A, B) if not swap else (B, A)
    if swap:
        names = ("B", "A")
    sections: dict = {}

    sections["chains"] = {
        name: {
            "rule": chain.spec.rule,
            "indices": [str(i) for i in chain.indices[:conj_depth]],
            "hnf_bases": [[[str(x) for x in r] for r in L.basis] for L in chain.lattices[:conj_depth]],
        }
        for name, chain in zip(("A", "B"), (A, B))
    }

    orientation = {}
    chosen = None
    for label, theta in theta_candidates().items():
        fail = struct_conj_failure(target, source, theta, conj_depth)
        orientation[label] = "witness" if fail is None else f"fails at level {fail[0]}: {fail[1]}"
        if fail is None and chosen is None:
            chosen = (label, theta)
    if chosen is None:
        raise ExampleFailure("struct-conj", "neither orientation of theta is a witness")
    witness = verify_struct_conj(target, source, chosen[1], conj_depth)
    try:
        verify_struct_conj(target, source, RatMatrix.from_int(identity(2)), conj_depth)
        identity_verdict = "witness"
    except StructConjError as err:
        identity_verdict = f"fails at level {err.level}: {err.reason}"
    sections["struct_conj"] = {
        "source": names[1],
        "target": names[0],
        "theta": chosen[0],
        "witness": witness.to_json(),
        "orientation_checks": orientation,
        "identity_theta": identity_verdict,
        "index_check": f"{target.index(1)} = {source.index(1)}",
        "levels_verified": list(range(1, conj_depth + 1)),
        "ok": True,
    }

    phi = build_oe(StructConjWitness(witness.theta, source.truncate(depth), target.truncate(depth), depth), depth)
    report = check_oe(phi)
    if report.verdict != "PASS":
        raise ExampleFailure("check-oe", f"constructed map failed: {report.first_failure}")
    sections["orbit_equivalence"] = {
        "depth": depth,
        "cosets": phi.source.index(depth),
        "constancy_levels": {
            "forward": [c.level for c in report.forward.checks],
            "backward": [c.level for c in report.backward.checks],
        },
        "verdict": report.verdict,
        "ok": True,
    }

    obs = snf_obstruction(_level_chain(A, max_n), _level_chain(B, max_n), max_n)
    if not obs.certificate:
        raise ExampleFailure("conj-obstruction", f"SNF matches at levels {obs.matches}")
    first_inv_target = sorted({t[0] for t in obs.target_snfs})
    sections["obstruction"] = {
        **obs.to_json(),
        "divisibility": (
            f"first invariant of B_0 is {obs.source_snf[0]}; every A_0^n has first invariant "
            f"{first_inv_target}, so 2 cannot divide every entry of A_0^n"
        ),
        "ok": obs.certificate,
    }

    freeness = {
        "(-1,3) in every level of A": all(A.level(n).contains((-1, 3)) for n in range(1, full + 1)),
        "note": "A_0 fixes (-1,3); the A- and B-odometers are not free through the checked depth",
    }
    sections["freeness"] = freeness
    return ExampleReport(sections)


__all__ = [
    "A0",
    "B0",
    "ExampleFailure",
    "ExampleReport",
    "ObstructionReport",
    "SearchResult",
    "StructConjError",
    "StructConjWitness",
    "SupernaturalVerdict",
    "paper_chains",
    "paper_example",
    "random_witness",
    "search_struct_conj",
    "snf_obstruction",
    "struct_conj_failure",
    "supernatural_equiv",
    "theta_candidates",
    "verify_struct_conj",
]



def random_witness(seed: int, d: int = 2, depth: int = 3, entry_bound: int = 2) -> StructConjWitness:
    """Seeded structural-conjugacy witness on a random nested chain.

    H_1 is a random nonsingular matrix, H_{n+1} = H_n M_n with random M_n of
    determinant 2..4, G_1 = V H_1 for a random unimodular V, and
    theta = basis(G_1) U basis(H_1)^-1 for a random unimodular U with
    transvection multipliers bounded by ``entry_bound``; G_n := theta H_n.
    """
    import random

    from .lattice import matmul, random_unimodular

    from .odometer import explicit_spec

    rng = random.Random(seed)

    def small(lo, hi):
        while True:
            m = tuple(tuple(rng.randint(-2, 2) for _ in range(d)) for _ in range(d))
            if lo <= abs(det(m)) <= hi:
                return m

    h_mats = [small(2, 6)]
    for _ in range(depth - 1):
        h_mats.append(matmul(h_mats[-1], small(2, 4)))
    H = make_chain(explicit_spec(h_mats, d))
    V = random_unimodular(d, entry_bound, rng.randrange(2**31))
    U = random_unimodular(d, entry_bound, rng.randrange(2**31))
    G1 = lattice(matmul(V, H.level(1).basis))
    theta = (RatMatrix.from_int(G1.basis) @ U) @ RatMatrix.from_int(H.level(1).basis).inverse()
    G = make_chain(explicit_spec([theta.integral_on(m) for m in h_mats], d))
    return verify_struct_conj(G, H, theta, depth)
