import itertools
import random

import pytest
from hypothesis import given, strategies as st

from odorigid.fullgroup import (
    FullGroupError,
    SemidirectForm,
    apply,
    cocycle,
    compose,
    depth_image_order,
    embed_factor,
    enumerate_depth_image,
    identity_element,
    induced_map,
    inverse,
    lift_level,
    lift_to,
    make_element,
    perm_part,
    random_element,
    recombine,
    same_map,
    semidirect_decompose,
    semidirect_law_check,
    semidirect_product,
    translation_element,
)
from odorigid.lattice import vadd
from odorigid.odometer import FactorSpec, TruncatedPoint, act, factor_point, make_chain, point, power_spec, z1_spec

import oracles

A0 = ((4, 1), (0, 1))


@pytest.fixture
def z24():
    return make_chain(z1_spec([2, 4]))


@pytest.fixture
def swap(z24):
    return make_element(z24, 1, {(0,): (1,), (1,): (-1,)})


# -- elements ---------------------------------------------------------------


def test_zero_table_is_identity(z24):
    e = make_element(z24, 1, [(0,), (0,)])
    assert e == identity_element(z24, 1)
    assert perm_part(e) == (0, 1)


def test_global_shift_is_valid(z24):
    e = make_element(z24, 1, {(0,): (1,), (1,): (1,)})
    assert perm_part(e) == (1, 0)
    assert same_map(e, translation_element(z24, (1,)))


def test_non_bijective_table_rejected(z24):
    with pytest.raises(FullGroupError, match="not a bijection on cosets"):
        make_element(z24, 1, [(1,), (0,)])


def test_incomplete_table_rejected(z24):
    with pytest.raises(FullGroupError):
        make_element(z24, 1, {(0,): (0,)})


def test_apply_examples(z24, swap):
    x = point(z24, (0,))
    assert apply(identity_element(z24, 1), x) == x
    assert apply(swap, x) == TruncatedPoint(2, (1,))
    g = translation_element(z24, (3,))
    for lab in z24.points(2):
        y = TruncatedPoint(2, lab)
        assert apply(g, y) == act(z24, (3,), y)


def test_apply_needs_deep_enough_point(z24, swap):
    with pytest.raises(FullGroupError):
        cocycle(swap, TruncatedPoint(0, (0,)))


def test_compose_and_inverse(z24, swap):
    ident = identity_element(z24, 1)
    assert compose(swap, ident) == swap
    assert compose(swap, inverse(swap)).translations == ((0,), (0,))
    assert compose(swap, swap).translations == ((0,), (0,))


def test_inverse_examples(z24, swap):
    assert inverse(identity_element(z24, 1)) == identity_element(z24, 1)
    assert inverse(swap) == swap
    assert inverse(translation_element(z24, (3,))) == translation_element(z24, (-3,))


def test_perm_part_examples(z24, swap):
    assert perm_part(identity_element(z24, 1)) == (0, 1)
    assert perm_part(swap) == (1, 0)
    kernel_only = make_element(z24, 1, [(2,), (-4,)])
    assert perm_part(kernel_only) == (0, 1)


def test_lift(z24, swap):
    lifted = lift_level(swap)
    assert lifted.level == 2
    assert lifted.translations == ((1,), (-1,), (1,), (-1,))
    assert same_map(lifted, swap)
    assert lift_level(identity_element(z24, 0), 2) == identity_element(z24, 2)
    assert lift_to(lift_level(identity_element(z24, 0)), 2) == lift_level(identity_element(z24, 0), 2)
    with pytest.raises(FullGroupError):
        lift_level(swap, 2)
    with pytest.raises(FullGroupError):
        lift_to(swap, 0)


def test_compose_lifts_mixed_levels(z24, swap):
    g = translation_element(z24, (1,))
    e = compose(g, swap)
    assert e.level == 1
    for lab in z24.points(2):
        x = TruncatedPoint(2, lab)
        assert apply(e, x) == apply(g, apply(swap, x))


@given(st.integers(0, 10**6))
def test_cocycle_identity_on_a0(seed):
    chain = make_chain(power_spec(A0, 2))
    rng = random.Random(seed)
    a = random_element(chain, rng.choice([0, 1, 2]), rng)
    b = random_element(chain, rng.choice([0, 1, 2]), rng)
    x = TruncatedPoint(2, rng.choice(chain.points(2)))
    assert cocycle(compose(a, b), x) == vadd(cocycle(a, apply(b, x)), cocycle(b, x))


@given(st.integers(0, 10**6))
def test_inverse_undoes(seed):
    chain = make_chain(power_spec(A0, 2))
    rng = random.Random(seed)
    e = random_element(chain, 1, rng)
    assert same_map(compose(e, inverse(e)), identity_element(chain, 1))
    assert induced_map(compose(inverse(e), e)) == tuple(range(chain.index(2)))


# -- semidirect structure ---------------------------------------------------


def test_decompose_examples(z24, swap):
    form = semidirect_decompose(identity_element(z24, 1))
    assert form.perm == (0, 1) and form.kernel == ((0,), (0,))
    form = semidirect_decompose(translation_element(z24, (2,), 1))
    assert form.perm == (0, 1) and form.kernel == ((2,), (2,))
    form = semidirect_decompose(swap, reps=[(0,), (1,)])
    assert form.perm == (1, 0) and form.kernel == ((0,), (0,))
    assert recombine(z24, form) == swap


def test_decompose_bad_reps(swap):
    with pytest.raises(FullGroupError):
        semidirect_decompose(swap, reps=[(1,), (0,)])


def test_law_trivial(z24):
    f = semidirect_decompose(identity_element(z24, 1))
    assert semidirect_law_check(z24, f, f)


def test_law_exhaustive_index_two(z24):
    reps = ((0,), (1,))
    forms = [
        SemidirectForm(1, perm, tuple((k,) for k in ks), reps)
        for perm in ((0, 1), (1, 0))
        for ks in itertools.product((0, 2, -2), repeat=2)
    ]
    assert len(forms) == 18
    assert all(semidirect_law_check(z24, a, b) for a in forms for b in forms)


@given(st.integers(0, 10**6))
def test_law_random_index_four(seed):
    chain = make_chain(power_spec(A0, 2))
    rng = random.Random(seed)
    a = semidirect_decompose(random_element(chain, 1, rng))
    b = semidirect_decompose(random_element(chain, 1, rng))
    assert semidirect_law_check(chain, a, b)


def test_product_needs_matching_forms(z24, swap):
    chain = make_chain(power_spec(A0, 2))
    a = semidirect_decompose(swap)
    b = semidirect_decompose(identity_element(chain, 1))
    with pytest.raises(FullGroupError):
        semidirect_product(a, b)


# -- factor embedding -------------------------------------------------------


def test_embed_identity():
    chain = make_chain(z1_spec([2, 4, 8]))
    f = FactorSpec(chain, (1, 3))
    e = embed_factor(identity_element(f.coarse, 1), f)
    assert same_map(e, identity_element(chain, 1))


@given(st.integers(0, 10**6))
def test_embed_is_equivariant_and_multiplicative(seed):
    chain = make_chain(power_spec(A0, 3))
    f = FactorSpec(chain, (1, 3))
    rng = random.Random(seed)
    a = random_element(f.coarse, rng.choice([0, 1, 2]), rng)
    b = random_element(f.coarse, rng.choice([0, 1, 2]), rng)
    ea, eb = embed_factor(a, f), embed_factor(b, f)
    x = TruncatedPoint(3, rng.choice(chain.points(3)))
    assert factor_point(f, apply(ea, x)) == apply(a, factor_point(f, x))
    assert same_map(embed_factor(compose(a, b), f), compose(ea, eb))


def test_embed_wrong_chain(z24, swap):
    f = FactorSpec(make_chain(z1_spec([2, 4, 8])), (1, 3))
    with pytest.raises(FullGroupError):
        embed_factor(swap, f)


# -- finite images ----------------------------------------------------------


def test_depth_image_z24(z24):
    img = enumerate_depth_image(z24, 1, 2)
    assert img.order == img.expected == 8
    assert oracles.depth_image_count([[2]], [[4]]) == 8


def test_depth_image_top_level_is_symmetric_group(z24):
    for chain, n in ((z24, 2), (make_chain(power_spec(A0, 1)), 1)):
        img = enumerate_depth_image(chain, n, n)
        # four cosets, no kernel left: all of S_4
        assert img.order == img.expected == 24


def test_depth_image_level_zero_is_translations(z24):
    img = enumerate_depth_image(z24, 0, 2)
    assert img.order == 4
    chain = make_chain(power_spec(A0, 2))
    assert enumerate_depth_image(chain, 0, 2).order == 16


def test_depth_image_a0():
    # oracle: 6144, frozen
    chain = make_chain(power_spec(A0, 2))
    assert enumerate_depth_image(chain, 1, 2).order == 6144
    assert depth_image_order(chain, 1, 2) == 6144


def test_depth_image_cap(z24):
    with pytest.raises(FullGroupError, match="needs 8 induced maps"):
        enumerate_depth_image(z24, 1, 2, cap=5)


def test_depth_image_cap_from_env(z24, monkeypatch):
    monkeypatch.setenv("ODORIGID_ENUM_CAP", "7")
    with pytest.raises(FullGroupError):
        enumerate_depth_image(z24, 1, 2)


def test_depth_image_maps_are_induced_maps(z24):
    img = enumerate_depth_image(z24, 1, 2)
    rng = random.Random(3)
    rows = {tuple(int(x) for x in r) for r in img.maps}
    for _ in range(30):
        assert induced_map(random_element(z24, 1, rng)) in rows
