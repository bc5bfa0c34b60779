import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from layercake.errors import PreconditionViolation, SizeLimit, SpaceMismatch
from layercake.measure import MeasureSpace, StepFunction
from layercake.rearrange import (
    decreasing_rearrangement,
    evaluate,
    hl_pairing,
    permutation_saturation_oracle,
    rearrange,
    sort_and_stack,
    sorted_pairing,
)
from layercake.transform import classical, shifted, spherical
from layercake.tree import HomogeneousTree, tree_transformation
from oracles import dominated_pair, fstar_oracle, monotone_violations, power_mismatches, random_function, sandwich_violations

values_and_masses = st.integers(1, 7).flatmap(
    lambda n: st.tuples(
        st.lists(st.integers(0, 9), min_size=n, max_size=n),
        st.lists(st.integers(1, 8).map(lambda m: m / 4), min_size=n, max_size=n),
    )
)


def test_classical_example():
    X = MeasureSpace.discrete([1, 2, 1])
    F = rearrange(classical(X), StepFunction.from_array(X, [5, 2, 3]))
    assert [F(t) for t in (0.5, 1.5, 2.5, 3.5, 4.5)] == [5, 3, 2, 2, 0]
    assert F.is_nested()


def test_zero_function_rearranges_to_zero():
    X = MeasureSpace.discrete([1, 1])
    assert rearrange(classical(X), StepFunction.zero(X)).is_zero()


def test_rearrange_space_mismatch():
    f = StepFunction.from_array(MeasureSpace.discrete([1, 1]), [1, 2])
    with pytest.raises(SpaceMismatch):
        rearrange(classical(MeasureSpace.discrete([1, 1, 1])), f)


def test_csv_profile_header():
    X = MeasureSpace.discrete([1, 1])
    text = rearrange(classical(X), StepFunction.from_array(X, [1, 2])).to_csv()
    assert text.splitlines()[0] == "t,value"


@given(values_and_masses)
@settings(max_examples=200, deadline=None)
def test_classical_matches_sort_and_stack(vm):
    vals, masses = vm
    X = MeasureSpace.discrete(masses)
    F = rearrange(classical(X), StepFunction.from_array(X, vals))
    oracle = fstar_oracle(vals, masses)
    for t in F.probe_points():
        assert F(t) == oracle(t)


@given(values_and_masses)
@settings(max_examples=200, deadline=None)
def test_shifted_identity(vm):
    vals, masses = vm
    X = MeasureSpace.discrete(masses)
    F = rearrange(shifted(X), StepFunction.from_array(X, vals))
    fstar = fstar_oracle(vals, masses)
    ts = sorted({0.0, *F.probe_points(), *(0.5 * t for t in F.probe_points())})
    for t in ts:
        assert abs(F(t) - (fstar(t / 2) - fstar(t))) <= 1e-12


@given(values_and_masses)
@settings(max_examples=100, deadline=None)
def test_classical_is_idempotent(vm):
    vals, masses = vm
    X = MeasureSpace.discrete(masses)
    fstar = decreasing_rearrangement(StepFunction.from_array(X, vals))
    twice = rearrange(classical(fstar.space), fstar)
    for t in twice.probe_points():
        assert twice(t) == fstar(t)


def _instances():
    rng = np.random.default_rng(2024)
    T = HomogeneousTree(2, 2)
    grid = MeasureSpace.grid((3, 3), 0.5)
    for i in range(30):
        X = MeasureSpace.discrete((rng.integers(1, 9, size=6) / 4).tolist())
        yield "classical", classical(X), rng
        yield "spherical", spherical(grid), rng
        yield "tree", tree_transformation(T), rng


@pytest.mark.parametrize("p", [0.5, 1, 2, 3])
def test_power_commutation(p):
    for _, R, rng in _instances():
        assert power_mismatches(R, random_function(R.domain, rng), p) == []


def test_level_set_sandwich():
    for _, R, rng in _instances():
        assert sandwich_violations(R, random_function(R.domain, rng)) == []


def test_monotonicity_in_f():
    for _, R, rng in _instances():
        g, f = dominated_pair(R.domain, rng)
        assert monotone_violations(R, g, f) == []


def test_fatou_for_increasing_chains():
    rng = np.random.default_rng(5)
    X = MeasureSpace.discrete([1, 2, 1, 1, 3])
    R = classical(X)
    for _ in range(50):
        steps = np.cumsum(rng.integers(0, 3, size=(4, 5)), axis=0)
        chain = [rearrange(R, StepFunction.from_array(X, row)) for row in steps]
        pts = sorted({t for F in chain for t in F.probe_points()})
        for t in pts:
            vals = [F(t) for F in chain]
            assert vals == sorted(vals)


def test_equimeasurability_classical():
    rng = np.random.default_rng(9)
    for _ in range(100):
        X = MeasureSpace.discrete((rng.integers(1, 9, size=5) / 4).tolist())
        f = random_function(X, rng)
        fstar = decreasing_rearrangement(f)
        for p in (0.5, 1, 2):
            assert math.isclose(f.lp_norm(p), fstar.lp_norm(p), rel_tol=1e-12, abs_tol=1e-300)


def test_shifted_layers_are_not_nested():
    X = MeasureSpace.discrete([1, 1])
    F = rearrange(shifted(X), StepFunction.from_array(X, [2, 1]))
    assert not F.is_nested()
    assert [evaluate(F, t) for t in (0.5, 1.5, 3.0, 4.0)] == [0, 1, 1, 0]


def test_hl_pairing_example():
    X = MeasureSpace.discrete([1, 1])
    f, g = StepFunction.from_array(X, [3, 1]), StepFunction.from_array(X, [1, 2])
    assert hl_pairing(classical(X), f, g) == (5, 7)
    assert hl_pairing(classical(X), f, StepFunction.zero(X)) == (0, 0)


def test_hl_pairing_indicator_equality():
    X = MeasureSpace.discrete([1, 2, 1])
    chi = StepFunction.from_array(X, [1, 0, 1])
    lhs, rhs = hl_pairing(classical(X), chi, chi)
    assert lhs == rhs == 2


def test_hl_pairing_needs_monotone_fatou():
    X = MeasureSpace.discrete([1, 1])
    f = StepFunction.from_array(X, [1, 2])
    with pytest.raises(PreconditionViolation):
        hl_pairing(shifted(X), f, f)


def test_hl_chain_on_random_pairs():
    rng = np.random.default_rng(17)
    for _ in range(300):
        X = MeasureSpace.discrete((rng.integers(1, 9, size=6) / 4).tolist())
        R = classical(X)
        lhs, rhs = hl_pairing(R, random_function(X, rng, integer=False), random_function(X, rng, integer=False))
        assert lhs <= rhs + 1e-12


def test_permutation_oracle_examples():
    assert permutation_saturation_oracle([3, 1], [2, 1])[0] == 7
    # largest with largest: 3*3 + 2*2 + 1*1
    assert permutation_saturation_oracle([1, 2, 3], [3, 2, 1])[0] == 14
    assert permutation_saturation_oracle([2, 2, 2], [5, 1, 0])[0] == 12
    with pytest.raises(SizeLimit):
        permutation_saturation_oracle([1] * 11, [1] * 11)


@given(st.lists(st.floats(0, 10, allow_nan=False), min_size=1, max_size=7))
@settings(max_examples=100, deadline=None)
def test_permutation_oracle_equals_sorted_pairing(f):
    u = sorted((float(i) for i in range(len(f))), reverse=True)
    best, sigma = permutation_saturation_oracle(f, u)
    assert best == sorted_pairing(f, u)
    assert math.fsum(f[i] * u[sigma[i]] for i in range(len(f))) == best


def test_sort_and_stack_skips_zeros():
    assert sort_and_stack([0, 2, 1], [1, 1, 2]) == [(0.0, 1.0, 2), (1.0, 3.0, 1)]
