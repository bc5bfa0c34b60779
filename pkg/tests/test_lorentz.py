import math

import numpy as np
import pytest

from layercake.errors import InvalidInput, PreconditionViolation, SizeLimit
from layercake.lorentz import (
    LorentzParams,
    concavity_slack,
    lorentz_norm,
    lp_equality_check,
    p_growth_closed_form,
    p_growth_experiment,
    p_growth_sequence,
    quasinorm_ratio,
    quasinorm_search,
    saturation_check,
    structured_pair,
    triangle_ratio,
    triangle_search,
)
from layercake.measure import HALF_LINE, AtomSet, MeasureSpace, PowerWeight, StepFunction, UnitWeight
from layercake.transform import classical, shifted
from oracles import random_function

X = MeasureSpace.discrete([1, 1, 1, 1, 1, 1])
INC = LorentzParams(1, PowerWeight(1.0), classical(X))
DEC = LorentzParams(1, PowerWeight(-0.5), classical(X))


def test_norm_of_indicator_is_weight_mass():
    A = AtomSet(X, frozenset({0, 3}))
    assert lorentz_norm(DEC, StepFunction.indicator(A)) == pytest.approx(2 * math.sqrt(2))


def test_norm_matches_weighted_integral_of_fstar():
    # f* = 3 on [0,1), 1 on [1,3); v = t  =>  int (f*)^2 t dt = 9/2 + 4
    f = StepFunction.from_array(X, [3, 1, 1, 0, 0, 0])
    params = LorentzParams(2, PowerWeight(1.0), classical(X))
    assert lorentz_norm(params, f) == pytest.approx(math.sqrt(9 / 2 + 4), rel=1e-14)


def test_norm_homogeneous_and_monotone():
    rng = np.random.default_rng(1)
    for _ in range(100):
        f = random_function(X, rng)
        c = float(rng.integers(1, 5))
        assert lorentz_norm(DEC, f.scale(c)) == pytest.approx(c * lorentz_norm(DEC, f), rel=1e-13)
        g = StepFunction.from_array(X, np.minimum(f.to_array(), rng.integers(0, 10, size=6)))
        assert lorentz_norm(DEC, g) <= lorentz_norm(DEC, f) + 1e-12


def test_params_validation():
    with pytest.raises(InvalidInput):
        LorentzParams(0, UnitWeight(HALF_LINE), classical(X))
    with pytest.raises(InvalidInput):
        LorentzParams(1, UnitWeight(X), classical(X))


def test_quasinorm_ratio_and_errors():
    A, B = AtomSet(X, frozenset({0})), AtomSet(X, frozenset({1}))
    # V(R) = t^2/2 for v = t: 2 / (1/2 + 1/2)
    assert quasinorm_ratio(INC, A, B) == pytest.approx(2.0)
    with pytest.raises(InvalidInput):
        quasinorm_ratio(INC, A, X.empty())


def test_quasinorm_search_reports_finite_constant():
    rep = quasinorm_search(DEC, seed=3, trials=100)
    assert not rep.violated and 0 < rep.value <= 1.0 + 1e-12


def test_quasi_norm_sufficiency_chain():
    rng = np.random.default_rng(4)
    C = quasinorm_search(INC, seed=4, trials=300).value
    for _ in range(100):
        f, g = random_function(X, rng), random_function(X, rng)
        lhs = lorentz_norm(INC, f + g)
        rhs = 2 * C * (lorentz_norm(INC, f) + lorentz_norm(INC, g))
        assert lhs <= rhs + 1e-12


def test_concavity_slack_signs():
    A, B = AtomSet(X, frozenset({0, 1})), AtomSet(X, frozenset({1, 2}))
    assert concavity_slack(DEC, A, B) >= 0
    assert concavity_slack(INC, A, B) < 0


def test_structured_pair_shapes():
    A, B = AtomSet(X, frozenset({0, 1})), AtomSet(X, frozenset({1, 2}))
    f, g = structured_pair(A, B, 0.1)
    np.testing.assert_allclose(f.to_array(), [1.1, 1.1, 1, 0, 0, 0])
    np.testing.assert_allclose(g.to_array(), [1, 1.1, 1.1, 0, 0, 0])


def test_negative_slack_gives_triangle_violation():
    # the concavity-theorem construction turns a CC failure into a triangle failure
    A, B = AtomSet(X, frozenset({0, 1})), AtomSet(X, frozenset({1, 2}))
    assert concavity_slack(INC, A, B) < -1e-6
    assert max(triangle_ratio(INC, *structured_pair(A, B, d)) for d in (1, 0.1, 0.01)) > 1


def test_triangle_search_dichotomy_small():
    assert not triangle_search(DEC, seed=0, trials=300).violated
    rep = triangle_search(INC, seed=0, trials=300)
    assert rep.violated and rep.value > 1


def test_triangle_search_deterministic():
    assert triangle_search(INC, seed=9, trials=20).to_dict() == triangle_search(INC, seed=9, trials=20).to_dict()


def test_p_growth_first_value_and_agreement():
    seq = p_growth_experiment(0.5, 16)
    assert seq[0] == pytest.approx(1.0, abs=1e-15)
    closed = p_growth_closed_form(0.5, 16)
    assert max(abs(a - b) for a, b in zip(seq, closed)) <= 1e-12
    assert all(b >= a for a, b in zip(seq, seq[1:]))


def test_p_growth_bounded_at_one():
    assert max(p_growth_sequence(1.0, 32)) <= 2


def test_p_growth_rejects_p_at_least_one():
    with pytest.raises(InvalidInput):
        p_growth_experiment(1.0, 4)


def test_lp_equality():
    rng = np.random.default_rng(6)
    for _ in range(50):
        f = random_function(X, rng, integer=False)
        for p in (0.5, 1, 2):
            a, b = lp_equality_check(classical(X), f, p)
            assert math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-300)


def test_lp_equality_precondition():
    from layercake.transform import Flags, SetTransformation

    R = classical(X)
    fake = SetTransformation("fake", X, HALF_LINE, Flags(measure_preserving=False), R.rule)
    with pytest.raises(PreconditionViolation):
        lp_equality_check(fake, StepFunction.from_array(X, [1, 0, 0, 0, 0, 0]), 1)


def test_saturation_examples():
    assert saturation_check([3, 1], [2, 1]) == (7, 7)
    assert saturation_check([1, 4, 2], [3, 1, 0]) == (14, 14)
    assert saturation_check([2, 2, 2], [3, 1, 0]) == (8, 8)
    with pytest.raises(SizeLimit):
        saturation_check([1] * 9, [1] * 9)
    with pytest.raises(InvalidInput):
        saturation_check([1, 2], [1])


def test_saturation_random_decreasing_v():
    rng = np.random.default_rng(8)
    for _ in range(50):
        n = int(rng.integers(1, 7))
        f = rng.integers(0, 10, size=n).tolist()
        v = sorted(rng.integers(0, 10, size=n).tolist(), reverse=True)
        lhs, rhs = saturation_check(f, v)
        assert lhs == rhs


def test_saturation_unsorted_v_sorts_both():
    f, v = [1, 4, 2], [0, 3, 1]
    lhs, _ = saturation_check(f, v)
    assert lhs == sum(a * b for a, b in zip(sorted(f), sorted(v)))


def test_shifted_norm_is_finite_sum():
    params = LorentzParams(1, UnitWeight(HALF_LINE), shifted(X))
    f = StepFunction.from_array(X, [2, 1, 0, 0, 0, 0])
    # layers: 1 on [1,2), 1 on [2,4)
    assert lorentz_norm(params, f) == 3
