"""JSON encodings of spaces, sets, step functions, weights and transformations.

Spaces::

    {"kind": "discrete", "masses": [1, 2, 1]}
    {"kind": "half-line"}
    {"kind": "grid", "shape": [4, 4], "h": 1.0, "origin": [-2, -2]}

Sets (the space is supplied by the enclosing object)::

    {"atoms": [0, 2]}            atom ids of a discrete space
    {"cells": [[0, 1], [2, 2]]}  grid cell indices
    {"intervals": [[0, 1.5]]}    half-open intervals on the half-line

Step functions carry their space plus either per-atom values or layers::

    {"space": {...}, "values": [5, 2, 2]}
    {"space": {...}, "pairs": [{"value": 2, "set": {...}}, ...]}

Weights::

    {"kind": "unit"} | {"kind": "power", "alpha": -0.5, "scale": 1}
    {"kind": "piecewise", "breaks": [0, 1], "values": [1, 3]}
    {"kind": "exp-radial"} | {"kind": "abs-radial"} (spherical, on R^n)

Transformations::

    {"kind": "classical" | "shifted" | "spherical" | "steiner" | "multidim2d", ...}
"""
from __future__ import annotations

import math

import numpy as np

from .errors import InvalidInput
from .measure import (
    DISCRETE,
    GRID,
    HALF_LINE_KIND,
    AtomSet,
    GridRegion,
    HypographRegion,
    IntervalUnion,
    MeasureSpace,
    PiecewiseWeight,
    PowerWeight,
    RadialBall,
    RadialWeight,
    SlabRegion,
    StepFunction,
    UnitWeight,
    canonical_step,
)


def _num(x):
    if isinstance(x, (float, np.floating)) and math.isinf(x):
        return "inf"
    return float(x)


def space_to_json(space: MeasureSpace) -> dict:
    if space.kind == DISCRETE:
        return {"kind": DISCRETE, "masses": list(space.masses)}
    if space.kind == GRID:
        return {"kind": GRID, "shape": list(space.shape), "h": space.h, "origin": list(space.origin)}
    if space.kind == "euclidean":
        return {"kind": "euclidean", "n": space.dim}
    if space.kind == "slabs":
        return {"kind": "slabs", "shape": list(space.shape), "h": space.h, "origin": list(space.origin), "k": space.k}
    return {"kind": space.kind}


def space_from_json(obj: dict) -> MeasureSpace:
    try:
        kind = obj["kind"]
        if kind == DISCRETE:
            return MeasureSpace.discrete(obj["masses"])
        if kind == HALF_LINE_KIND:
            return MeasureSpace.half_line()
        if kind == GRID:
            return MeasureSpace.grid(obj["shape"], obj.get("h", 1.0), obj.get("origin"))
    except KeyError as exc:
        raise InvalidInput(f"space: missing field {exc}") from None
    raise InvalidInput(f"space: unsupported kind {obj.get('kind')!r}")


def set_to_json(s) -> dict:
    if isinstance(s, AtomSet):
        return {"atoms": sorted(s.atoms)}
    if isinstance(s, GridRegion):
        return {"cells": sorted(list(c) for c in s.cells)}
    if isinstance(s, IntervalUnion):
        return {"intervals": [[_num(a), _num(b)] for a, b in s.intervals]}
    if isinstance(s, RadialBall):
        return {"ball": {"n": s.space.dim, "radius": s.radius}}
    if isinstance(s, HypographRegion):
        return {"hypograph": {"edges": list(s.edges), "heights": list(s.heights)}}
    if isinstance(s, SlabRegion):
        return {"slabs": {"k": s.space.k, "radii": list(s.radii)}}
    raise InvalidInput(f"cannot encode {type(s).__name__}")


def set_from_json(obj: dict, space: MeasureSpace):
    if "atoms" in obj:
        return AtomSet(space, frozenset(int(a) for a in obj["atoms"]))
    if "cells" in obj:
        cells = frozenset(tuple(int(i) for i in c) for c in obj["cells"])
        if any(len(c) != len(space.shape) or any(not 0 <= i < s for i, s in zip(c, space.shape)) for c in cells):
            raise InvalidInput("set: cell index outside the grid")
        return GridRegion(space, cells)
    if "intervals" in obj:
        return IntervalUnion.of((float(a), float(b)) for a, b in obj["intervals"])
    raise InvalidInput(f"set: expected one of atoms/cells/intervals, got {sorted(obj)}")


def step_to_json(f: StepFunction) -> dict:
    out = {"space": space_to_json(f.space), "values": list(f.values), "levels": [set_to_json(s) for s in f.levels]}
    return out


def step_from_json(obj: dict) -> StepFunction:
    # rearranged output carries its space as "codomain"
    space_obj = obj.get("space", obj.get("codomain"))
    if space_obj is None:
        raise InvalidInput("step function: missing field 'space'")
    space = space_from_json(space_obj)
    if "levels" in obj:
        levels = [set_from_json(s, space) for s in obj["levels"]]
        return StepFunction(space, tuple(float(v) for v in obj["values"]), tuple(levels))
    if "values" in obj:
        return StepFunction.from_array(space, obj["values"])
    if "pairs" in obj:
        pairs = []
        for i, p in enumerate(obj["pairs"]):
            if "value" not in p or "set" not in p:
                raise InvalidInput(f"step function: pairs[{i}] needs 'value' and 'set'")
            pairs.append((float(p["value"]), set_from_json(p["set"], space)))
        return canonical_step(pairs, space)
    raise InvalidInput("step function: expected 'values', 'levels' or 'pairs'")


def rearranged_to_json(F) -> dict:
    return {
        "transform": F.transform.descriptor(),
        "codomain": space_to_json(F.codomain),
        "values": list(F.values),
        "levels": [set_to_json(s) for s in F.levels],
    }


def weight_from_json(obj: dict, space: MeasureSpace | None = None):
    kind = obj.get("kind")
    if kind == "unit":
        return UnitWeight(space if space is not None else MeasureSpace.half_line())
    if kind == "power":
        return PowerWeight(float(obj["alpha"]), float(obj.get("scale", 1.0)))
    if kind == "piecewise":
        return PiecewiseWeight(obj["breaks"], obj["values"])
    if kind in ("exp-radial", "abs-radial", "const-radial"):
        n = int(obj.get("n", 2))
        return radial_weight(kind, n, float(obj.get("c", 1.0)))
    raise InvalidInput(f"weight: unsupported kind {kind!r}")


def radial_weight(kind: str, n: int, c: float = 1.0) -> RadialWeight:
    """Named radial weights with closed-form radial moments."""
    if kind == "exp-radial":
        if n == 2:
            return RadialWeight(2, lambda r: math.exp(-r), lambda r: 1.0 - math.exp(-r) * (1.0 + r), "exp(-|x|)")
        return RadialWeight(n, lambda r: math.exp(-r), name="exp(-|x|)")
    if kind == "abs-radial":
        return RadialWeight(n, lambda r: r, lambda r: r ** (n + 1) / (n + 1), "|x|")
    if kind == "const-radial":
        return RadialWeight(n, lambda r: c, lambda r: c * r**n / n, f"{c}")
    raise InvalidInput(f"weight: unsupported kind {kind!r}")
