import math

import pytest

from layercake.errors import InvalidInput
from layercake.measure import HALF_LINE, IntervalUnion, MeasureSpace, RadialBall, StepFunction
from layercake.rearrange import rearrange
from layercake.schema import (
    rearranged_to_json,
    set_from_json,
    set_to_json,
    space_from_json,
    space_to_json,
    step_from_json,
    step_to_json,
    weight_from_json,
)
from layercake.transform import classical


@pytest.mark.parametrize(
    "obj",
    [{"kind": "discrete", "masses": [1, 2, 0.5]}, {"kind": "half-line"}, {"kind": "grid", "shape": [2, 3], "h": 0.5}],
)
def test_space_round_trip(obj):
    sp = space_from_json(obj)
    assert space_from_json(space_to_json(sp)) == sp


def test_set_round_trip():
    X = MeasureSpace.discrete([1, 1, 1])
    s = X.from_mask([True, False, True])
    assert set_from_json(set_to_json(s), X) == s
    iv = IntervalUnion.of([(0, 1), (2, 3.5)])
    assert set_from_json(set_to_json(iv), HALF_LINE) == iv


def test_step_forms_agree():
    sp = {"kind": "discrete", "masses": [1, 1, 1]}
    a = step_from_json({"space": sp, "values": [2, 0, 1]})
    b = step_from_json({"space": sp, "pairs": [{"value": 1, "set": {"atoms": [0, 2]}}, {"value": 1, "set": {"atoms": [0]}}]})
    assert a == b
    assert step_from_json(step_to_json(a)) == a


def test_rearranged_output_reingests():
    X = MeasureSpace.discrete([1, 2, 1])
    F = rearrange(classical(X), StepFunction.from_array(X, [5, 2, 3]))
    g = step_from_json(rearranged_to_json(F))
    assert g.space == HALF_LINE
    assert all(g(t) == F(t) for t in F.probe_points())


def test_step_errors():
    with pytest.raises(InvalidInput):
        step_from_json({"values": [1]})
    with pytest.raises(InvalidInput):
        step_from_json({"space": {"kind": "half-line"}, "pairs": [{"value": 1}]})


def test_weights():
    assert weight_from_json({"kind": "power", "alpha": -0.5}).integral(IntervalUnion.prefix(1)) == pytest.approx(2.0)
    v = weight_from_json({"kind": "exp-radial", "n": 2})
    r = 1.5
    assert v.integral(RadialBall(v.space, r)) == pytest.approx(2 * math.pi * (1 - math.exp(-r) * (1 + r)), rel=1e-14)
    with pytest.raises(InvalidInput):
        weight_from_json({"kind": "gaussian"})
