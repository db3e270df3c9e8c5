import random
import warnings
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from odorigid.lattice import contains, coset_reps, lattice, reduce
from odorigid.odometer import (
    ChainError,
    FactorSpec,
    TruncatedPoint,
    act,
    all_points,
    chain_from_lattices,
    coset_cells,
    cylinder,
    describe,
    explicit_spec,
    factor_point,
    freeness_witness,
    identity_point,
    make_chain,
    minimality_bound,
    orbit_cover,
    point,
    power_spec,
    return_times,
    scaled_spec,
    ultrametric,
    z1_spec,
)

A0 = ((4, 1), (0, 1))
B0 = ((2, 0), (0, 2))


def z(*moduli):
    return make_chain(z1_spec(moduli))


# -- construction -----------------------------------------------------------


def test_power_chain_indices():
    chain = make_chain(power_spec(A0, 3))
    assert chain.indices == [4, 16, 64]
    assert len(coset_reps(chain.level(0), chain.level(1))) == 4


def test_explicit_scalar_chain():
    chain = make_chain(explicit_spec([B0, ((4, 0), (0, 4))]))
    assert chain.indices == [4, 16]


def test_not_nested_names_level():
    with pytest.raises(ChainError, match="not nested at level 2"):
        make_chain(explicit_spec([A0, B0]))


def test_singular_level():
    with pytest.raises(ChainError, match="singular matrix at level 1"):
        make_chain(explicit_spec([((1, 2), (2, 4))]))


def test_repeated_level_warns():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        make_chain(z1_spec([2, 2, 4]))
    assert any("repeats" in str(w.message) for w in caught)


def test_scaled_chain_sides():
    left = make_chain(scaled_spec(B0, A0, 3))
    right = make_chain(scaled_spec(B0, A0, 3, side="right"))
    # 2I commutes with everything, so both sides give the same chain
    assert left.lattices == right.lattices
    assert left.level(1) == lattice(B0)


def test_level_zero_is_everything():
    chain = z(2, 4)
    assert chain.index(0) == 1
    assert chain.points(0) == [(0,)]
    with pytest.raises(ChainError):
        chain.level(3)


def test_chain_from_lattices_checks_nesting():
    with pytest.raises(ChainError, match="level 2"):
        chain_from_lattices([lattice(A0), lattice(B0)])


def test_truncate_and_describe():
    chain = make_chain(power_spec(A0, 3)).truncate(2)
    info = describe(chain)
    assert info["indices"] == ["4", "16"]
    assert info["hnf_bases"][0] == [["1", "0"], ["1", "4"]]
    with pytest.raises(ChainError):
        chain.truncate(5)


# -- action -----------------------------------------------------------------


def test_act_zero_is_trivial():
    chain = make_chain(power_spec(A0, 2))
    x = point(chain, (3, 5))
    assert act(chain, (0, 0), x) == x


def test_act_mod_two():
    chain = make_chain(explicit_spec([B0]))
    assert act(chain, (1, 0), point(chain, (1, 1))).label == (0, 1)


def test_act_a0_depth_one():
    chain = make_chain(power_spec(A0, 1))
    assert act(chain, (0, 1), point(chain, (0, 3))).label == (0, 0)


def test_act_dimension_mismatch():
    chain = z(2, 4)
    with pytest.raises(ChainError):
        act(chain, (1, 1), identity_point(chain))


@given(st.integers(-40, 40), st.integers(-40, 40), st.integers(-40, 40), st.integers(-40, 40))
def test_action_is_additive(a, b, c, d):
    chain = make_chain(power_spec(A0, 2))
    x = point(chain, (a, b))
    g, h = (c, d), (d - c, a)
    gh = (g[0] + h[0], g[1] + h[1])
    assert act(chain, g, act(chain, h, x)) == act(chain, gh, x)


# -- metric and cylinders ---------------------------------------------------


def test_ultrametric_examples():
    chain = z(2, 4)
    x = point(chain, (0,))
    assert ultrametric(chain, x, x) == 0
    assert ultrametric(chain, x, point(chain, (2,))) == Fraction(1, 4)
    assert ultrametric(chain, x, point(chain, (1,))) == Fraction(1, 2)


def test_ultrametric_depth_mismatch():
    chain = z(2, 4)
    with pytest.raises(ChainError):
        ultrametric(chain, point(chain, (0,), 1), point(chain, (0,), 2))


@given(st.data())
def test_ultrametric_inequality(data):
    chain = make_chain(power_spec(A0, 3))
    pts = chain.points(3)
    x, y, w = (TruncatedPoint(3, data.draw(st.sampled_from(pts))) for _ in range(3))
    assert ultrametric(chain, x, w) <= max(ultrametric(chain, x, y), ultrametric(chain, y, w))


def test_cylinder_examples():
    chain = z(2, 4)
    x = point(chain, (3,))
    assert cylinder(chain, x, 2) == x
    assert cylinder(chain, x, 1) == TruncatedPoint(1, (1,))
    with pytest.raises(ChainError):
        cylinder(chain, point(chain, (3,), 1), 2)


def test_cylinder_agrees_with_coset_labels():
    chain = make_chain(power_spec(A0, 2))
    for lab in chain.points(2):
        c = cylinder(chain, TruncatedPoint(2, lab), 1)
        assert c.label == reduce(lab, chain.level(1))
        assert c.label in chain.points(1)


# -- return times and freeness ----------------------------------------------


def test_return_times_mod_two():
    chain = make_chain(explicit_spec([B0]))
    got = return_times(chain, 1, 3)
    assert got == {(a, b) for a in (-2, 0, 2) for b in (-2, 0, 2)}
    assert len(got) == 9


def test_return_times_a0():
    chain = make_chain(power_spec(A0, 1))
    got = return_times(chain, 1, 4)
    box = [(a, b) for a in range(-4, 5) for b in range(-4, 5)]
    assert got == {v for v in box if contains(chain.level(1), v)}


def test_return_times_ball_zero():
    assert return_times(make_chain(power_spec(A0, 2)), 2, 0) == {(0, 0)}


def test_freeness_witness_examples():
    chain = z(2, 4)
    assert freeness_witness(chain, (1,)) == 1
    assert freeness_witness(chain, (2,)) == 2
    assert freeness_witness(make_chain(power_spec(A0, 3)), (4, 0)) == 2


def test_a0_chain_is_not_free():
    # A0 fixes (-1, 3), so it sits in every A0^n Z^2
    chain = make_chain(power_spec(A0, 8))
    assert freeness_witness(chain, (-1, 3)) is None


def test_freeness_witness_rejects_zero():
    with pytest.raises(ChainError):
        freeness_witness(z(2, 4), (0,))


def test_orbit_cover_is_minimal():
    for chain in (make_chain(power_spec(A0, 3)), z(2, 6, 12)):
        n = chain.depth
        bound = minimality_bound(chain, n)
        assert orbit_cover(chain, identity_point(chain, n), bound) == chain.index(n)


# -- factors ----------------------------------------------------------------


def test_factor_same_terminal_lattice():
    chain = z(2, 4, 8)
    f = FactorSpec(chain, (1, 3))
    x = point(chain, (5,))
    assert factor_point(f, x) == TruncatedPoint(2, (5,))
    assert f.coarse.indices == [2, 8]
    assert cylinder(f.coarse, factor_point(f, x), 1) == TruncatedPoint(1, (1,))


def test_factor_identity_subsequence():
    chain = z(2, 4, 8)
    f = FactorSpec(chain, (1, 2, 3))
    for x in all_points(chain, 3):
        assert factor_point(f, x) == x


def test_factor_spec_validation():
    chain = z(2, 4, 8)
    with pytest.raises(ChainError):
        FactorSpec(chain, (2, 1))
    with pytest.raises(ChainError):
        FactorSpec(chain, (1, 4))
    with pytest.raises(ChainError):
        factor_point(FactorSpec(chain, (1, 3)), point(chain, (1,), 2))


def test_factor_is_equivariant():
    chain = make_chain(power_spec(A0, 3))
    f = FactorSpec(chain, (1, 3))
    rng = random.Random(5)
    for _ in range(50):
        x = TruncatedPoint(3, rng.choice(chain.points(3)))
        g = (rng.randint(-9, 9), rng.randint(-9, 9))
        assert factor_point(f, act(chain, g, x)) == act(f.coarse, g, factor_point(f, x))


def test_coset_cells():
    chain = z(2, 4)
    assert coset_cells(chain, 2, 1) == [0, 1, 0, 1]
