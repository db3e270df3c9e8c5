import json

import pytest
from hypothesis import given, settings, strategies as st

from odorigid.lattice import RatMatrix, identity, reduce
from odorigid.odometer import make_chain, power_spec, z1_spec
from odorigid.orbit import (
    OEError,
    OEMap,
    build_oe,
    check_oe,
    cocycle_table,
    congruent,
    evaluate_cocycle,
    extract_theta,
    generator_word,
    homomorphism_holds,
    identity_oe,
    maps_levels,
    pieces_agree,
    random_oe,
    standard_generators,
    theta_agrees,
)
from odorigid.rigidity import StructConjError, paper_chains, random_witness, theta_candidates, verify_struct_conj

A0 = ((4, 1), (0, 1))


@pytest.fixture(scope="module")
def z24():
    return make_chain(z1_spec([2, 4]))


@pytest.fixture(scope="module")
def flip(z24):
    w = verify_struct_conj(z24, z24, RatMatrix.from_int(((-1,),)), 2)
    return build_oe(w, 2, bijection=[((0,), (0,)), ((1,), (-1,))])


@pytest.fixture(scope="module")
def example_oe():
    A, B = paper_chains(3)
    w = verify_struct_conj(A, B, theta_candidates()["A0*B0^-1"], 3)
    return build_oe(w, 3)


# -- build_oe ---------------------------------------------------------------


def test_identity_build(z24):
    w = verify_struct_conj(z24, z24, RatMatrix.from_int(((1,),)), 2)
    assert build_oe(w).table == (0, 1, 2, 3)
    assert identity_oe(z24).table == (0, 1, 2, 3)


def test_flip_is_negation_mod_four(z24, flip):
    for y in range(4):
        assert flip((y,)) == ((-y) % 4,)


def test_flip_needs_explicit_bijection(z24):
    # the canonical pairing of reps sends 1 to 1, which yields the identity table
    w = verify_struct_conj(z24, z24, RatMatrix.from_int(((-1,),)), 2)
    assert build_oe(w).table != (0, 3, 2, 1)


def test_example_oe_is_a_bijection(example_oe):
    assert len(example_oe.table) == 64
    assert sorted(example_oe.table) == list(range(64))


def test_build_rejects_non_witness():
    A, B = paper_chains(2)
    from odorigid.rigidity import StructConjWitness

    bad = StructConjWitness(RatMatrix.from_int(identity(2)), B, A, 2)
    with pytest.raises(StructConjError):
        build_oe(bad)


def test_build_rejects_bad_bijection(z24):
    w = verify_struct_conj(z24, z24, RatMatrix.from_int(((1,),)), 2)
    with pytest.raises(OEError):
        build_oe(w, 2, bijection=[((0,), (0,)), ((1,), (0,))])
    with pytest.raises(OEError):
        build_oe(w, 2, bijection=[((0,), (1,)), ((1,), (0,))])


def test_oemap_validation(z24):
    with pytest.raises(OEError):
        OEMap(z24, z24, 2, (0, 1, 2))
    with pytest.raises(OEError):
        OEMap(z24, z24, 2, (0, 1, 1, 2))


def test_oemap_json_roundtrip(example_oe):
    data = json.loads(json.dumps(example_oe.to_json()))
    back = OEMap.from_json(data)
    assert back.table == example_oe.table
    assert back.theta == example_oe.theta
    assert back.source.lattices == example_oe.source.lattices


def test_inverse_map(example_oe):
    inv = example_oe.inverse()
    for y in example_oe.source.points(3)[:20]:
        assert inv(example_oe(y)) == y


# -- check_oe ---------------------------------------------------------------


def test_identity_passes(z24):
    rep = check_oe(identity_oe(z24))
    assert rep.verdict == "PASS"
    for c in rep.forward.checks:
        assert c.level == 0
        assert c.values == {0: c.generator}


def test_flip_passes_with_negated_values(flip):
    rep = check_oe(flip)
    assert rep.verdict == "PASS"
    for c in rep.forward.checks:
        assert c.level == 0
        assert c.values[0] == tuple(-x for x in c.generator)


def test_example_oe_passes(example_oe):
    rep = check_oe(example_oe)
    assert rep.verdict == "PASS"
    assert [c.level for c in rep.forward.checks] == [1, 1, 0, 0]
    assert all(c.level <= 1 for c in rep.backward.checks)


def test_random_bijection_fails_and_names_a_point():
    A = make_chain(power_spec(A0, 2))
    rep = check_oe(random_oe(A, A, 2, seed=11))
    assert rep.verdict == "FAIL"
    where, c = rep.first_failure
    assert where in ("forward", "backward")
    assert c.failing_point is not None and c.reason
    assert rep.to_json()["verdict"] == "FAIL"


def test_tiny_search_bound_fails(example_oe):
    rep = check_oe(example_oe, search_bound=0)
    assert rep.verdict == "FAIL"
    assert "sup-norm 0" in rep.first_failure[1].reason


# -- cocycle tables ---------------------------------------------------------


def test_identity_cocycle_table(z24):
    t = cocycle_table(identity_oe(z24))
    assert t.level == 0
    for s, row in zip(t.generators, t.values):
        assert row == (s,)


def test_flip_cocycle_table(flip):
    t = cocycle_table(flip)
    assert t.level == 0
    for s, row in zip(t.generators, t.values):
        assert row == ((-s[0],),)


def test_example_cocycle_table_regression(example_oe):
    # computed once and frozen; values are minimal sup-norm lifts mod L_3 of the A chain
    t = cocycle_table(example_oe)
    assert t.level == 1
    assert t.generators == ((1, 0), (-1, 0), (0, 1), (0, -1))
    assert t.values == (
        ((0, 1), (3, 2), (0, 1), (3, 2)),
        ((-3, -2), (0, -1), (-3, -2), (0, -1)),
        ((1, -1), (1, -1), (1, -1), (1, -1)),
        ((-1, 1), (-1, 1), (-1, 1), (-1, 1)),
    )


def test_cocycle_table_raises_on_fail():
    A = make_chain(power_spec(A0, 2))
    with pytest.raises(OEError):
        cocycle_table(random_oe(A, A, 2, seed=3))


def test_cocycle_table_json(flip):
    data = cocycle_table(flip).to_json()
    assert data["level"] == 0
    assert {"generator": ["1"], "coset": ["0"], "value": ["-1"]} in data["entries"]


def test_generator_word():
    assert generator_word((2, -1)) == [(1, 0), (1, 0), (0, -1)]
    assert generator_word((0, 0)) == []


def test_cocycle_telescopes(example_oe):
    t = cocycle_table(example_oe)
    LX = example_oe.target.level(3)
    for y in example_oe.source.points(3)[::7]:
        for h in ((2, 1), (-1, 3), (0, -2)):
            moved = reduce((y[0] + h[0], y[1] + h[1]), example_oe.source.level(3))
            diff = tuple(a - b for a, b in zip(example_oe(moved), example_oe(y)))
            assert congruent(evaluate_cocycle(t, h, y), diff, LX)


# -- theta extraction -------------------------------------------------------


def test_identity_extracts_identity(z24):
    pieces = extract_theta(cocycle_table(identity_oe(z24)))
    assert all(p.matrix() == RatMatrix.from_int(((1,),)) for p in pieces)


def test_flip_extracts_minus_identity(flip):
    pieces = extract_theta(cocycle_table(flip))
    assert all(p.matrix() == RatMatrix.from_int(((-1,),)) for p in pieces)


def test_example_extraction_agrees_mod_LN(example_oe):
    t = cocycle_table(example_oe)
    pieces = extract_theta(t)
    assert len(pieces) == 4
    assert pieces_agree(pieces, example_oe.target, 3)
    for p in pieces:
        assert theta_agrees(p, example_oe.theta, example_oe.target, 3)
        assert all(maps_levels(p, example_oe.source, example_oe.target, 3))
        assert homomorphism_holds(t, p)


def test_example_extraction_differs_by_fixed_vector(example_oe):
    # the lifts differ from theta by multiples of (-1, 3), which A0 fixes
    p = extract_theta(cocycle_table(example_oe))[0]
    exact = [example_oe.theta.apply_integral(h) for h in ((2, 0), (0, 2))]
    for a, b in zip(p.images, exact):
        d = (a[0] - b[0], a[1] - b[1])
        assert d[0] * 3 == -d[1]


def test_extract_level_range(flip):
    t = cocycle_table(flip)
    with pytest.raises(OEError):
        extract_theta(t, 5)


def test_piece_apply_outside_domain(example_oe):
    p = extract_theta(cocycle_table(example_oe))[0]
    with pytest.raises(OEError):
        p.apply((1, 0))


@settings(max_examples=8)
@given(st.integers(0, 10**5), st.sampled_from([1, 2]))
def test_round_trip_random_witness(seed, d):
    w = random_witness(seed, d=d, depth=3)
    phi = build_oe(w, 3)
    assert check_oe(phi).verdict == "PASS"
    pieces = extract_theta(cocycle_table(phi))
    assert pieces_agree(pieces, w.target, 3)
    assert all(theta_agrees(p, w.theta, w.target, 3) for p in pieces)


def test_standard_generators():
    assert standard_generators(2) == [(1, 0), (-1, 0), (0, 1), (0, -1)]
