import math

import numpy as np
import pytest

from layercake.errors import InvalidGrid, InvalidInput, SizeLimit
from layercake.measure import MeasureSpace, PiecewiseWeight
from layercake.rearrange import permutation_saturation_oracle
from layercake.schema import radial_weight
from layercake.symmetrize import (
    GridFunction,
    annulus_slack,
    associated_weight,
    rearrange_2d,
    saturation_2d_check,
    spherical_normability_suite,
    spherical_profile,
    spherical_vbar,
    steiner,
    steiner_norm_identity,
)
from oracles import fstar_oracle


def test_spherical_profile_of_unit_disc_mass():
    # 4 cells of mass pi/4 each, total pi
    h = math.sqrt(math.pi / 4)
    prof = spherical_profile(GridFunction.of(np.ones((2, 2)), h))
    assert prof(np.array([0.99, 0.0])) == 1.0
    assert prof(np.array([0.0, 1.01])) == 0.0
    assert prof.breakpoints()[-1][0] == pytest.approx(math.pi)


def test_spherical_profile_matches_sort_and_stack():
    rng = np.random.default_rng(0)
    for _ in range(30):
        vals = rng.integers(0, 4, size=(3, 4)).astype(float)
        g = GridFunction.of(vals, 0.5)
        prof = spherical_profile(g)
        oracle = fstar_oracle(vals.ravel().tolist(), [0.25] * 12)
        for s in np.linspace(0, 3.2, 65):
            assert prof.profile(s) == oracle(s)


def test_spherical_profile_equimeasurable():
    rng = np.random.default_rng(1)
    for _ in range(20):
        vals = rng.uniform(0, 3, size=(4, 4))
        g = GridFunction.of(vals, 0.5)
        prof = spherical_profile(g)
        for p in (1, 2):
            assert prof.profile.lp_norm(p) == pytest.approx(float(np.sum(vals**p) * 0.25) ** (1 / p), rel=1e-12)


def test_steiner_slice_example():
    out = steiner(GridFunction.of([[0, 3, 1, 2, 0]]), 1)
    np.testing.assert_array_equal(out.values, [[0, 2, 3, 1, 0]])


def test_steiner_fixed_point_and_multiset():
    rng = np.random.default_rng(2)
    for _ in range(20):
        g = GridFunction.of(rng.integers(0, 5, size=(4, 6)))
        once = steiner(g, 1)
        np.testing.assert_array_equal(np.sort(once.values, axis=1), np.sort(g.values, axis=1))
        np.testing.assert_array_equal(steiner(once, 1).values, once.values)
        # nonincreasing in |y| along each slice
        centers = np.abs(np.arange(6) + 0.5 - 3)
        for row in once.values:
            order = np.argsort(centers, kind="stable")
            assert all(row[order][i] >= row[order][i + 1] for i in range(5))


def test_steiner_full_order_is_spherical_sampling():
    rng = np.random.default_rng(3)
    g = GridFunction.of(rng.integers(0, 5, size=(6, 6)), 0.5)
    prof = spherical_profile(g)
    out = steiner(g, 2)
    for idx in np.ndindex(6, 6):
        assert out.values[idx] == prof(g.centers()[idx])


def test_steiner_asymmetric_grid():
    g = GridFunction(MeasureSpace.grid((2, 2), 1.0, (0.0, 0.0)), np.ones((2, 2)))
    with pytest.raises(InvalidGrid):
        steiner(g, 1)
    with pytest.raises(InvalidInput):
        steiner(GridFunction.of(np.ones((2, 2))), 3)


def test_rearrange_2d_example():
    np.testing.assert_array_equal(rearrange_2d(GridFunction.of([[1, 2], [3, 4]])).values, [[4, 3], [2, 1]])
    single = rearrange_2d(GridFunction.of([[0, 0], [0, 7]]))
    assert single.values[0, 0] == 7 and single.values.sum() == 7


def test_rearrange_2d_routes_agree():
    rng = np.random.default_rng(4)
    for _ in range(10):
        g = GridFunction.of(rng.integers(0, 6, size=(5, 4)), 0.5)
        a, b = rearrange_2d(g, "iterated"), rearrange_2d(g, "set-transform")
        np.testing.assert_array_equal(a.values, b.values)


def test_associated_weight_k1_two_point():
    v = lambda xb, y: math.exp(-abs(y)) * (1 + 0.5 * y)
    aw = associated_weight(v, 1)
    for y in (0.1, 0.7, 2.0):
        assert aw.at_radius(None, y) == v(None, y) + v(None, -y)
        assert aw.at_s(None, 2 * y) == aw.at_radius(None, y)


def test_associated_weight_k2_abs_closed_form():
    aw = associated_weight(lambda xb, y: float(np.linalg.norm(y)), 2, nodes=64)
    for s in (0.5, 2.0, 9.0):
        assert aw.at_s(None, s) == pytest.approx(2 * math.pi * math.sqrt(s / math.pi), abs=1e-9)


def test_associated_weight_radial_constant():
    aw = associated_weight(lambda xb, y: 3.0, 2, nodes=16)
    assert aw.at_s(None, 1.0) == pytest.approx(3 * 2 * math.pi, abs=1e-12)
    with pytest.raises(InvalidInput):
        associated_weight(lambda xb, y: 1.0, 3)


def test_spherical_vbar_exact_for_radial():
    vb = spherical_vbar(radial_weight("exp-radial", 2), 2)
    for s in (0.1, 1.0, 5.0):
        assert vb(s) == pytest.approx(2 * math.pi * math.exp(-math.sqrt(s / math.pi)), rel=1e-14)


@pytest.mark.parametrize("kind,expected", [("exp-radial", "holds"), ("abs-radial", "fails"), ("const-radial", "holds")])
def test_spherical_suite_verdicts(kind, expected):
    rep = spherical_normability_suite(radial_weight(kind, 2), seed=0)
    assert set(rep.verdicts.values()) == {expected}
    assert rep.consistent
    if expected == "fails":
        assert rep.witnesses["b"]["slack"] < 0


def test_annulus_slack_closed_form():
    # v = 1: V(r) = pi r^2, so the slack is exactly 0
    V = lambda r: math.pi * r * r
    assert annulus_slack(V, 2, 1.0, 2.0, 0.1) == pytest.approx(0.0, abs=1e-12)


def test_suite_rejects_p_below_one():
    with pytest.raises(InvalidInput):
        spherical_normability_suite(radial_weight("exp-radial", 2), p=0.5)


def test_steiner_identity_unit_weight_is_l1():
    rng = np.random.default_rng(5)
    g = GridFunction.of(rng.integers(0, 4, size=(4, 4)), 0.5)
    lhs, rhs = steiner_norm_identity(g, lambda xb, y: 1.0, 1, 1)
    assert lhs == pytest.approx(float(g.values.sum()) * 0.25, rel=1e-12)
    assert rhs == pytest.approx(lhs, rel=1e-12)
    assert steiner_norm_identity(GridFunction.of(np.zeros((2, 2))), lambda xb, y: 1.0, 1, 1) == (0.0, 0.0)


def test_steiner_identity_k2_quadrature():
    rng = np.random.default_rng(6)
    g = GridFunction.of(rng.integers(0, 3, size=(2, 4, 4)), 0.5)
    v = lambda xb, y: math.exp(-float(np.linalg.norm(y)))
    lhs, rhs = steiner_norm_identity(g, v, 1, k=2, nodes=64)
    assert lhs == pytest.approx(rhs, rel=1e-7)


def test_steiner_cc_iff_vbar_decreasing_piecewise():
    """For k = 1 and piecewise-constant weights, CC over Steiner images holds
    exactly when vbar(xbar, .) is decreasing."""
    from layercake.lorentz import LorentzParams, concavity_search
    from layercake.measure import SliceWeight
    from layercake.transform import steiner as steiner_transform

    grid = MeasureSpace.grid((3, 6), 1.0)
    R = steiner_transform(grid, 1)
    dec = PiecewiseWeight([0, 1, 2], [3, 2, 1])
    inc = PiecewiseWeight([0, 1, 2], [1, 2, 3])
    for pw, decreasing in ((dec, True), (inc, False)):
        v = lambda xb, y, pw=pw: pw(abs(y))
        params = LorentzParams(1, SliceWeight(R.codomain, v), R)
        rep = concavity_search(params, seed=1, trials=300)
        assert rep.violated is (not decreasing)


def test_saturation_2d():
    lhs, rhs = saturation_2d_check([[4, 3], [2, 1]], [1, 0])
    assert lhs == rhs
    lhs, rhs = saturation_2d_check(np.full((2, 2), 3.0), [2, 1])
    assert lhs == rhs == 3 * 2 * 3
    with pytest.raises(SizeLimit):
        saturation_2d_check(np.ones((4, 4)), [1, 1, 1, 1])


def test_saturation_2d_degenerates_to_permutations():
    f = [[3, 1, 2]]
    v = [3, 2, 1]
    lhs, rhs = saturation_2d_check(f, v)
    assert lhs == rhs == permutation_saturation_oracle([3, 1, 2], v)[0]
