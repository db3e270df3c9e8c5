"""Command-line entry point: ``odorigid <command> [options]``.

The JSON report goes to stdout (sorted keys, integers as decimal strings, no
timing) so identical invocations give identical bytes. A short summary and the
wall-clock time go to stderr. Exit codes: 0 expectations met, 1 verified
negative, 2 usage or input error, 3 internal inconsistency.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__, _kernels
from .config import ConfigError, bundled_config, parse_config
from .fullgroup import (
    FullGroupError,
    apply as fg_apply,
    cocycle,
    compose,
    depth_image_order,
    enumerate_depth_image,
    random_element,
    semidirect_decompose,
    semidirect_law_check,
)
from .lattice import LatticeError, RatMatrix, box_vectors, vadd
from .odometer import (
    ChainError,
    TruncatedPoint,
    act,
    describe,
    freeness_witness,
    identity_point,
    minimality_bound,
    orbit_cover,
    return_times,
    ultrametric,
)
from .orbit import (
    OEError,
    OEMap,
    build_oe,
    check_oe,
    cocycle_table,
    extract_theta,
    homomorphism_holds,
    maps_levels,
    pieces_agree,
    random_oe,
    standard_generators,
    theta_agrees,
)
from .rigidity import (
    ExampleFailure,
    StructConjError,
    StructConjWitness,
    paper_example,
    search_struct_conj,
    snf_obstruction,
    struct_conj_failure,
    supernatural_equiv,
    theta_candidates,
)

OK, NEGATIVE, USAGE, INTERNAL = 0, 1, 2, 3


class Inconsistency(RuntimeError):
    """An invariant that the library guarantees did not hold."""


class Outcome:
    def __init__(self, result: dict, verdict: str, code: int = OK, summary: str = "", artifact=None):
        self.result = result
        self.verdict = verdict
        self.code = code
        self.summary = summary or verdict
        self.artifact = artifact


def stringify(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): stringify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [stringify(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalar
        return stringify(obj.item())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(stringify(obj), indent=2, sort_keys=True) + "\n"


# -- argument helpers -------------------------------------------------------


def parse_theta(text: str) -> RatMatrix:
    """A named candidate (``A0*B0^-1``) or rows split by ';', entries by ',' (fractions allowed)."""
    named = theta_candidates()
    if text in named:
        return named[text]
    try:
        rows = [[Fraction(x.strip()) for x in row.split(",")] for row in text.split(";")]
        return RatMatrix.from_fractions(rows)
    except (ValueError, ZeroDivisionError, LatticeError):
        raise ConfigError(f"cannot parse theta {text!r}; use rows like '2,1/2;0,1/2' or one of {sorted(named)}")


def theta_json(theta: RatMatrix | None):
    if theta is None:
        return None
    return {"numerator": [list(r) for r in theta.num], "denominator": theta.den}


class Context:
    def __init__(self, args):
        self.args = args
        self.systems = parse_config(args.config) if args.config else bundled_config()
        self.by_name = {s.name: s for s in self.systems}

    def chain(self, name: str):
        if name not in self.by_name:
            raise ConfigError(f"unknown system {name!r}; configured: {sorted(self.by_name)}")
        return self.by_name[name].chain(self.args.depth)

    def pair(self):
        source, target = self.chain(self.args.source), self.chain(self.args.target)
        if source.d != target.d:
            raise ConfigError("source and target have different dimensions")
        return source, target, min(source.depth, target.depth)

    def witness(self, source, target, depth) -> StructConjWitness | None:
        a = self.args
        if a.theta is not None:
            theta = parse_theta(a.theta)
            fail = struct_conj_failure(target, source, theta, depth)
            if fail is not None:
                raise StructConjError(*fail)
            return StructConjWitness(theta, source, target, depth)
        found = search_struct_conj(target, source, a.search, depth)
        return found.witness

    def inputs(self) -> dict:
        skip = {"func", "config"}
        out = {k: v for k, v in sorted(vars(self.args).items()) if k not in skip and v is not None}
        out["config"] = Path(self.args.config).name if self.args.config else "<bundled paper_example.json>"
        return out


# -- commands ---------------------------------------------------------------


def cmd_info(ctx: Context) -> Outcome:
    chain = ctx.chain(ctx.args.system)
    spec = chain.spec
    res = {"system": ctx.args.system, "rule": spec.rule, **describe(chain)}
    return Outcome(res, "OK", summary=f"{ctx.args.system}: d={chain.d}, indices {chain.indices}")


def cmd_orbits(ctx: Context) -> Outcome:
    a = ctx.args
    chain = ctx.chain(a.system)
    n = chain.depth if a.level is None else a.level
    if not 0 <= n <= chain.depth:
        raise ConfigError(f"level {n} outside 0..{chain.depth}")
    bound = minimality_bound(chain, n)
    reached = orbit_cover(chain, identity_point(chain, n), bound)
    rng = random.Random(a.seed)
    pts = chain.points(n)
    failures = 0
    for _ in range(a.samples):
        g = tuple(rng.randint(-a.ball, a.ball) for _ in range(chain.d))
        x = TruncatedPoint(n, rng.choice(pts))
        y = TruncatedPoint(n, rng.choice(pts))
        if ultrametric(chain, act(chain, g, x), act(chain, g, y)) != ultrametric(chain, x, y):
            failures += 1
    if failures:
        raise Inconsistency(f"{failures} isometry samples failed")
    free = {}
    for e in standard_generators(chain.d)[::2]:
        w = freeness_witness(chain, e)
        free[",".join(map(str, e))] = "survives to depth" if w is None else w
    res = {
        "system": a.system,
        "level": n,
        "cosets": chain.index(n),
        "orbit_cover": {"bound": bound, "reached": reached, "minimal_at_depth": reached == chain.index(n)},
        "isometry": {"samples": a.samples, "ball": a.ball, "failures": failures},
        "freeness_levels": free,
    }
    verdict = "MINIMAL" if reached == chain.index(n) else "NOT-MINIMAL-WITHIN-BOUND"
    return Outcome(res, verdict, OK if verdict == "MINIMAL" else NEGATIVE,
                   f"{a.system} level {n}: {reached}/{chain.index(n)} cosets reached, isometry holds")


def cmd_return_times(ctx: Context) -> Outcome:
    a = ctx.args
    chain = ctx.chain(a.system)
    n = chain.depth if a.level is None else a.level
    got = sorted(return_times(chain, n, a.ball))
    box = box_vectors(chain.d, a.ball)
    direct = sorted(v for v in map(tuple, box.tolist()) if chain.level(n).contains(v))
    if got != direct:
        raise Inconsistency("return times differ from the lattice members in the ball")
    res = {"system": a.system, "level": n, "ball": a.ball, "count": len(got), "vectors": got,
           "equals_lattice_in_ball": True}
    return Outcome(res, "OK", summary=f"{len(got)} return times in the ball of radius {a.ball}")


def cmd_struct_conj(ctx: Context) -> Outcome:
    a = ctx.args
    source, target, depth = ctx.pair()
    res = {"source": a.source, "target": a.target, "depth": depth}
    try:
        w = ctx.witness(source, target, depth)
    except StructConjError as err:
        w = None
        res["failure"] = {"level": err.level, "reason": err.reason}
    if w is None and a.theta is None:
        res["search"] = search_struct_conj(target, source, a.search, depth).to_json()
    if w is not None:
        res["witness"] = w.to_json()
        verdict = "WITNESS"
    else:
        verdict = "NO-WITNESS-AT-DEPTH" if a.theta is None else "NOT-A-WITNESS"
    wanted = a.expect or "witness"
    met = (verdict == "WITNESS") == (wanted == "witness")
    return Outcome(res, verdict, OK if met else NEGATIVE, f"{a.source} -> {a.target}: {verdict} (depth {depth})")


def cmd_conj_obstruction(ctx: Context) -> Outcome:
    a = ctx.args
    source, target, _ = ctx.pair()
    obs = snf_obstruction(target, source, a.max_n)
    verdict = "NON-CONJUGATE" if obs.certificate else "NO-OBSTRUCTION"
    res = {"source": a.source, "target": a.target, **obs.to_json()}
    code = OK
    if a.expect == "conjugate" and obs.certificate:
        code = NEGATIVE
    if a.expect == "non-conjugate" and not obs.certificate:
        code = NEGATIVE
    return Outcome(res, verdict, code, f"{verdict} ({obs.scope})")


def cmd_build_oe(ctx: Context) -> Outcome:
    a = ctx.args
    source, target, depth = ctx.pair()
    w = ctx.witness(source, target, depth)
    if w is None:
        return Outcome({"source": a.source, "target": a.target, "depth": depth}, "NO-WITNESS", NEGATIVE,
                       f"no structural-conjugacy witness within entry bound {a.search}")
    phi = build_oe(w, depth)
    report = check_oe(phi)
    if report.verdict != "PASS":
        raise Inconsistency("an orbit equivalence built from a witness failed check_oe")
    res = {"source": a.source, "target": a.target, "oe": phi.to_json(), "check": report.verdict}
    return Outcome(res, "BUILT", summary=f"built OE on {len(phi.table)} cosets at depth {depth}; check PASS",
                   artifact=phi.to_json())


def _load_or_build(ctx: Context) -> OEMap:
    a = ctx.args
    if a.oe:
        try:
            return OEMap.from_json(json.loads(Path(a.oe).read_text()))
        except (OSError, ValueError, KeyError) as exc:
            raise ConfigError(f"cannot read OE map {a.oe}: {exc}")
    if a.source is None or a.target is None:
        raise ConfigError("give --oe FILE or both --source and --target")
    source, target, depth = ctx.pair()
    if getattr(a, "random", False):
        return random_oe(source, target, depth, a.seed)
    w = ctx.witness(source, target, depth)
    if w is None:
        raise ConfigError(f"no witness within entry bound {a.search}; pass --theta")
    return build_oe(w, depth)


def cmd_check_oe(ctx: Context) -> Outcome:
    a = ctx.args
    phi = _load_or_build(ctx)
    report = check_oe(phi, search_bound=a.bound)
    res = report.to_json()
    res["cosets"] = len(phi.table)
    fail = report.first_failure
    if fail is not None:
        res["first_failure"] = {"direction": fail[0], "generator": list(fail[1].generator), "reason": fail[1].reason}
    wanted = a.expect or "pass"
    code = OK if (report.verdict == "PASS") == (wanted == "pass") else NEGATIVE
    return Outcome(res, report.verdict, code, f"verdict {report.verdict} at depth {phi.depth}")


def cmd_extract_theta(ctx: Context) -> Outcome:
    a = ctx.args
    phi = _load_or_build(ctx)
    report = check_oe(phi, search_bound=a.bound)
    if report.verdict != "PASS":
        return Outcome(report.to_json(), "FAIL", NEGATIVE, "map is not a continuous orbit equivalence at this depth")
    table = cocycle_table(phi, search_bound=a.bound)
    pieces = extract_theta(table, a.level)
    N = phi.depth
    agree = pieces_agree(pieces, phi.target, N)
    res = {
        "depth": N,
        "cocycle_table": table.to_json(),
        "pieces": [
            {
                "cell": list(p.cell),
                "level": p.level,
                "theta": theta_json(p.matrix()),
                "maps_levels": maps_levels(p, phi.source, phi.target, N),
                "homomorphism": homomorphism_holds(table, p),
            }
            for p in pieces
        ],
        "pieces_agree_mod_L_N": agree,
    }
    if phi.theta is not None:
        res["known_theta"] = theta_json(phi.theta)
        res["agrees_with_known_theta_mod_L_N"] = all(theta_agrees(p, phi.theta, phi.target, N) for p in pieces)
        if not res["agrees_with_known_theta_mod_L_N"]:
            raise Inconsistency("extracted theta disagrees with the theta the map was built from")
    if not agree:
        raise Inconsistency("pieces of an extracted theta disagree")
    return Outcome(res, "EXTRACTED", summary=f"{len(pieces)} pieces at level {pieces[0].level}, all agree mod L_{N}")


def cmd_fullgroup(ctx: Context) -> Outcome:
    a = ctx.args
    chain = ctx.chain(a.system)
    depth = chain.depth if a.image_depth is None else min(a.image_depth, chain.depth)
    n = a.level
    if not 0 <= n <= depth:
        raise ConfigError(f"need 0 <= level <= depth, got level {n}, depth {depth}")
    res = {"system": a.system, "level": n, "depth": depth, "formula": depth_image_order(chain, n, depth)}
    verdict = "OK"
    if a.enumerate:
        img = enumerate_depth_image(chain, n, depth, cap=a.cap)
        res["enumeration"] = img.to_json()
        res["element_count"] = img.order
        if img.order != img.expected:
            raise Inconsistency(f"enumerated {img.order} maps, formula gives {img.expected}")
    rng = random.Random(a.seed)
    bad_cocycle = bad_law = 0
    pts = chain.points(depth)
    for _ in range(a.samples):
        x = TruncatedPoint(depth, rng.choice(pts))
        e1, e2 = random_element(chain, n, rng), random_element(chain, n, rng)
        lhs = cocycle(compose(e1, e2), x)
        rhs = vadd(cocycle(e1, fg_apply(e2, x)), cocycle(e2, x))
        bad_cocycle += lhs != rhs
        bad_law += not semidirect_law_check(chain, semidirect_decompose(e1), semidirect_decompose(e2))
    if bad_cocycle or bad_law:
        raise Inconsistency(f"cocycle failures {bad_cocycle}, semidirect law failures {bad_law}")
    res["samples"] = {"count": a.samples, "cocycle_identity_failures": 0, "semidirect_law_failures": 0}
    summary = f"[[G]]_{n} image at depth {depth}: order {res['formula']}"
    if a.enumerate:
        summary += f", enumerated {res['element_count']}"
    return Outcome(res, verdict, summary=summary)


def cmd_supernatural(ctx: Context) -> Outcome:
    a = ctx.args
    ca, cb = ctx.chain(a.a), ctx.chain(a.b)
    v = supernatural_equiv(ca, cb)
    code = OK
    if a.expect and a.expect.upper() != v.verdict:
        code = NEGATIVE
    return Outcome({"a": a.a, "b": a.b, **v.to_json()}, v.verdict, code, f"{a.a} vs {a.b}: {v.verdict}")


def cmd_paper_example(ctx: Context) -> Outcome:
    a = ctx.args
    depth = 3 if a.depth is None else a.depth
    try:
        rep = paper_example(depth=depth, conj_depth=a.conj_depth, max_n=a.max_n, swap=a.swap)
    except ExampleFailure as err:
        return Outcome({"failed_step": err.step, "detail": str(err)}, "FAILED", NEGATIVE, str(err))
    sc = rep.sections["struct_conj"]
    summary = (
        f"witness theta={sc['theta']} (index {sc['index_check']}), "
        f"OE {rep.sections['orbit_equivalence']['verdict']} at depth {depth}, "
        f"obstruction {rep.sections['obstruction']['scope']}"
    )
    return Outcome(rep.sections, "CERTIFIED", OK if rep.ok else NEGATIVE, summary)


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="system configuration JSON (default: bundled example systems)")
    common.add_argument("--depth", type=int, help="override per-system depth, capped by the configured length")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="write the machine-readable artifact here")
    common.add_argument("--cap", type=int, help="enumeration cap (default: $ODORIGID_ENUM_CAP or 10^6)")

    p = argparse.ArgumentParser(prog="odorigid", description=__doc__.splitlines()[0], parents=[common])
    p.add_argument("--version", action="version", version=f"odorigid {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    def add(name, func, help):
        sp = sub.add_parser(name, help=help, parents=[common])
        sp.set_defaults(func=func)
        return sp

    def theta_opts(sp):
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--theta", help="witness matrix, e.g. 'A0*B0^-1' or '2,1/2;0,1/2'")
        g.add_argument("--search", type=int, default=2, help="entry bound for the unimodular search")

    sp = add("info", cmd_info, "chain data of one system")
    sp.add_argument("--system", required=True)

    sp = add("orbits", cmd_orbits, "orbit cover, isometry samples and freeness levels")
    sp.add_argument("--system", required=True)
    sp.add_argument("--level", type=int)
    sp.add_argument("--samples", type=int, default=200)
    sp.add_argument("--ball", type=int, default=8)

    sp = add("return-times", cmd_return_times, "return times of the identity cylinder")
    sp.add_argument("--system", required=True)
    sp.add_argument("--level", type=int)
    sp.add_argument("--ball", type=int, default=3)

    sp = add("struct-conj", cmd_struct_conj, "verify or search a structural-conjugacy witness")
    sp.add_argument("--source", required=True, help="system H (theta maps its levels)")
    sp.add_argument("--target", required=True, help="system G")
    theta_opts(sp)
    sp.add_argument("--expect", choices=["witness", "none"])

    sp = add("conj-obstruction", cmd_conj_obstruction, "SNF non-conjugacy certificate")
    sp.add_argument("--source", required=True)
    sp.add_argument("--target", required=True)
    sp.add_argument("--max-n", type=int, default=10)
    sp.add_argument("--expect", choices=["conjugate", "non-conjugate"])

    sp = add("build-oe", cmd_build_oe, "orbit equivalence from a witness")
    sp.add_argument("--source", required=True)
    sp.add_argument("--target", required=True)
    theta_opts(sp)

    for name, func, help in (
        ("check-oe", cmd_check_oe, "local constancy of both orbit cocycles"),
        ("extract-theta", cmd_extract_theta, "recover theta from the orbit cocycle"),
    ):
        sp = add(name, func, help)
        sp.add_argument("--oe", help="OE map written by build-oe --out")
        sp.add_argument("--source")
        sp.add_argument("--target")
        theta_opts(sp)
        sp.add_argument("--bound", type=int, help="search bound for cocycle representatives")
        if name == "check-oe":
            sp.add_argument("--random", action="store_true", help="seeded random bijection (negative control)")
            sp.add_argument("--expect", choices=["pass", "fail"])
        else:
            sp.add_argument("--level", type=int)

    sp = add("fullgroup", cmd_fullgroup, "finite images of the level-n full group")
    sp.add_argument("--system", required=True)
    sp.add_argument("--level", type=int, required=True)
    sp.add_argument("--image-depth", type=int, help="depth of the image (default: chain depth)")
    sp.add_argument("--enumerate", action="store_true")
    sp.add_argument("--samples", type=int, default=100)

    sp = add("supernatural", cmd_supernatural, "d = 1 supernatural-number comparison")
    sp.add_argument("--a", required=True)
    sp.add_argument("--b", required=True)
    sp.add_argument("--expect", choices=["equivalent", "not-equivalent-at-depth", "inconclusive"])

    sp = add("paper-example", cmd_paper_example, "the A_0/B_0 structural-conjugacy example")
    sp.add_argument("--conj-depth", type=int, default=5)
    sp.add_argument("--max-n", type=int, default=10)
    sp.add_argument("--swap", action="store_true")
    return p


def _fix_globals(argv):
    # global flags may appear before or after the subcommand; argparse lets the
    # subparser default overwrite an earlier value, so re-read them here
    pre = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    for flag in ("--config", "--out"):
        pre.add_argument(flag)
    for flag in ("--depth", "--seed", "--cap"):
        pre.add_argument(flag, type=int)
    known, _ = pre.parse_known_args(argv)
    return {k: v for k, v in vars(known).items() if v is not None}


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code not in (0, None) else OK
    for k, v in _fix_globals(argv).items():
        setattr(args, k, v)
    start = time.perf_counter()
    try:
        ctx = Context(args)
        outcome = args.func(ctx)
        inputs = ctx.inputs()
    except Inconsistency as err:
        print(f"internal inconsistency: {err}", file=stderr)
        return INTERNAL
    except (ConfigError, ChainError, LatticeError, OEError, StructConjError, FullGroupError) as err:
        print(f"error: {err}", file=stderr)
        return USAGE
    elapsed = time.perf_counter() - start
    report = {
        "command": args.command,
        "inputs": inputs,
        "library_version": __version__,
        "verdict": outcome.verdict,
        "exit_code": outcome.code,
        "result": outcome.result,
    }
    if args.depth is not None:
        report["depth_override"] = args.depth
    text = dumps(report)
    stdout.write(text)
    if args.out:
        artifact = report if outcome.artifact is None else outcome.artifact
        Path(args.out).write_text(dumps(artifact))
    print(f"{args.command}: {outcome.summary}", file=stderr)
    print(f"time {elapsed:.3f}s, kernels: {_kernels.backend()}", file=stderr)
    return outcome.code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
