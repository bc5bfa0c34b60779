"""Set transformations R and checkers for their structural properties."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import InvalidGrid, InvalidInput, SpaceMismatch
from .measure import (
    DISCRETE,
    GRID,
    HALF_LINE,
    AtomSet,
    HypographRegion,
    IntervalUnion,
    MeasureSpace,
    RadialBall,
    SlabRegion,
    StepFunction,
    ball_volume,
    random_step_function,
)

PROPERTIES = ("monotone", "fatou", "measure-preserving", "intersection", "nondegenerate", "maps-empty-to-null")
MEASURE_TOL = 1e-12


@dataclass(frozen=True)
class Flags:
    monotone: bool = True
    measure_preserving: bool = True
    fatou: bool = True
    maps_empty_to_null: bool = True

    def as_dict(self) -> dict:
        return {
            "monotone": self.monotone,
            "measure-preserving": self.measure_preserving,
            "fatou": self.fatou,
            "maps-empty-to-null": self.maps_empty_to_null,
        }


@dataclass(frozen=True, eq=False)
class SetTransformation:
    kind: str
    domain: MeasureSpace
    codomain: MeasureSpace
    flags: Flags
    rule: Callable = field(repr=False)
    params: dict = field(default_factory=dict)

    def __call__(self, e):
        return apply(self, e)

    def descriptor(self) -> dict:
        """JSON-ready description (kind + parameters)."""
        return {"kind": self.kind, **{k: v for k, v in self.params.items() if not k.startswith("_")}}


def apply(R: SetTransformation, e):
    if e.space != R.domain:
        raise SpaceMismatch(f"{R.kind} expects sets of its domain, got a {e.space.kind} set")
    return R.rule(e)


# --------------------------------------------------------------------------
# built-in transformations
# --------------------------------------------------------------------------


def classical(domain: MeasureSpace) -> SetTransformation:
    """R(E) = [0, mu(E)): the usual decreasing rearrangement."""
    return SetTransformation("classical", domain, HALF_LINE, Flags(), lambda e: IntervalUnion.prefix(e.measure()))


def shifted(domain: MeasureSpace) -> SetTransformation:
    """R(E) = [mu(E), 2 mu(E)): measure preserving but not monotone."""

    def rule(e):
        m = e.measure()
        return IntervalUnion(((m, 2 * m),)) if m > 0 else IntervalUnion(())

    return SetTransformation("shifted", domain, HALF_LINE, Flags(monotone=False, fatou=False), rule)


def spherical(domain: MeasureSpace, n: int | None = None) -> SetTransformation:
    """R(E) = centered ball in R^n with the measure of E."""
    if n is None:
        if domain.kind != GRID:
            raise InvalidInput("dimension n is required unless the domain is a grid")
        n = len(domain.shape)
    target = MeasureSpace.euclidean(n)
    return SetTransformation(
        "spherical", domain, target, Flags(), lambda e: RadialBall.of_measure(target, e.measure()), {"n": n}
    )


def check_symmetric(grid: MeasureSpace, k: int) -> None:
    n = len(grid.shape)
    if not 1 <= k <= n:
        raise InvalidInput(f"Steiner order k={k} outside 1..{n}")
    for d in range(n - k, n):
        if not math.isclose(grid.origin[d], -grid.shape[d] * grid.h / 2, rel_tol=0, abs_tol=1e-12 * grid.h):
            raise InvalidGrid(f"grid axis {d} is not symmetric about 0")


def steiner(domain: MeasureSpace, k: int) -> SetTransformation:
    """Order-k Steiner symmetrization of grid regions.

    Each section along the last k axes becomes a centered k-ball with the
    section's k-dimensional measure.
    """
    if domain.kind != GRID:
        raise InvalidInput("Steiner symmetrization acts on grid regions")
    check_symmetric(domain, k)
    target = MeasureSpace.slabs(domain, k)
    n = len(domain.shape)
    slice_shape = domain.shape[: n - k]
    section_cell = domain.h**k
    sigma = ball_volume(k)

    def rule(e):
        counts = np.zeros(slice_shape, dtype=int) if slice_shape else np.zeros((), dtype=int)
        for c in e.cells:
            counts[c[: n - k]] += 1
        radii = tuple(float((m * section_cell / sigma) ** (1.0 / k)) if m else 0.0 for m in counts.ravel())
        return SlabRegion(target, radii)

    return SetTransformation("steiner", domain, target, Flags(), rule, {"k": k})


def multidim2d(domain: MeasureSpace) -> SetTransformation:
    """Two-dimensional rearrangement of a planar grid region.

    Vertical sections (axis 1) are pushed down to [0, phi(x)) and the section
    lengths are then sorted decreasingly in x, giving a hypograph in the
    quadrant.
    """
    if domain.kind != GRID or len(domain.shape) != 2:
        raise InvalidInput("the 2D rearrangement acts on planar grids")
    h = domain.h

    def rule(e):
        counts = np.zeros(domain.shape[0], dtype=int)
        for x, _ in e.cells:
            counts[x] += 1
        lengths = sorted((c * h for c in counts if c), reverse=True)
        return HypographRegion.of([(i + 1) * h for i in range(len(lengths))], lengths)

    return SetTransformation("multidim2d", domain, MeasureSpace.quadrant(), Flags(), rule)


def initial_segment(domain: MeasureSpace, order: Sequence[int], kind: str = "tree-initial-segment") -> SetTransformation:
    """R(A) = the first |A| atoms of a fixed total order (counting measure)."""
    if domain.kind != DISCRETE or any(m != 1.0 for m in domain.masses):
        raise InvalidInput("initial segments need a counting-measure atom space")
    order = tuple(order)
    if sorted(order) != list(range(domain.size)):
        raise InvalidInput("order must enumerate every atom once")
    return SetTransformation(
        kind, domain, domain, Flags(), lambda e: AtomSet(domain, frozenset(order[: len(e.atoms)])), {"_order": order}
    )


def user_table(
    domain: MeasureSpace,
    codomain: MeasureSpace,
    table: Mapping[frozenset, object],
    flags: Flags | None = None,
    trials: int = 200,
    seed: int = 0,
) -> SetTransformation:
    """An explicit finite map from atom sets of `domain` to sets of `codomain`.

    Registration rejects tables sending the empty set to a non-null set and
    replaces `flags` by whatever a `trials`-witness check confirms.
    """
    if domain.kind != DISCRETE:
        raise InvalidInput("user tables are keyed by atom sets")
    table = {frozenset(k): v for k, v in table.items()}
    if len(table) != 2 ** domain.size:
        raise InvalidInput("the table must list every subset of the domain")
    for v in table.values():
        if v.space != codomain:
            raise SpaceMismatch("table value outside the codomain")
    if table[frozenset()].measure() != 0:
        raise InvalidInput("R(empty set) must be a null set")

    R = SetTransformation("user-table", domain, codomain, flags or Flags(), lambda e: table[e.atoms])
    checked = Flags(
        monotone=check_property(R, "monotone", seed=seed, trials=trials).holds,
        measure_preserving=check_property(R, "measure-preserving", seed=seed, trials=trials).holds,
        fatou=check_property(R, "fatou", seed=seed, trials=trials).holds,
    )
    if flags is not None:
        declared = flags.as_dict()
        bad = [k for k, v in checked.as_dict().items() if declared[k] and not v]
        if bad:
            raise InvalidInput(f"declared flags fail their checks: {bad}")
    return SetTransformation("user-table", domain, codomain, checked, R.rule)


REGISTRY = {
    "classical": classical,
    "shifted": shifted,
    "spherical": spherical,
    "steiner": steiner,
    "multidim2d": multidim2d,
}


# --------------------------------------------------------------------------
# property checks
# --------------------------------------------------------------------------


@dataclass
class CheckReport:
    property: str
    verdict: str
    trials: int
    seed: int
    counterexample: dict | None = None
    notes: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return self.verdict == "holds-on-witnesses"

    def to_dict(self) -> dict:
        return {
            "condition": self.property,
            "verdict": self.verdict,
            "trials": self.trials,
            "seed": self.seed,
            "counterexample": self.counterexample,
            "notes": self.notes,
        }


def _same(a, b, tol: float) -> bool:
    return a.issubset(b, tol) and b.issubset(a, tol)


def _rel_close(x: float, y: float) -> bool:
    return abs(x - y) <= MEASURE_TOL * max(1.0, abs(x), abs(y))


def _chain(space: MeasureSpace, rng, length: int = 4) -> list:
    top = space.random_set(rng)
    chain = [top]
    for _ in range(length - 1):
        chain.append(chain[-1].intersection(space.random_set(rng)))
    return chain[::-1]


def _witness(R, prop: str, rng):
    """Run one trial; return None on success or a dict describing the failure."""
    from .schema import set_to_json, step_to_json

    X = R.domain
    if prop == "monotone":
        F = X.random_set(rng)
        E = F.intersection(X.random_set(rng))
        if not apply(R, E).issubset(apply(R, F)):
            return {"E": set_to_json(E), "F": set_to_json(F), "R(E)": set_to_json(apply(R, E)), "R(F)": set_to_json(apply(R, F))}
    elif prop == "fatou":
        chain = _chain(X, rng)
        images = [apply(R, a) for a in chain]
        nested = all(a.issubset(b) for a, b in zip(images, images[1:]))
        union = images[0]
        for im in images[1:]:
            union = union.union(im) if nested else union
        if not nested or not _same(union, apply(R, chain[-1]), MEASURE_TOL):
            return {"chain": [set_to_json(a) for a in chain], "images": [set_to_json(a) for a in images]}
    elif prop == "measure-preserving":
        E = X.random_set(rng)
        m, n = E.measure(), apply(R, E).measure()
        if not _rel_close(m, n):
            return {"E": set_to_json(E), "mu(E)": m, "nu(R(E))": n}
    elif prop == "intersection":
        A, B = X.random_set(rng), X.random_set(rng)
        lhs = A.intersection(B).measure()
        rhs = apply(R, A).intersection(apply(R, B)).measure()
        if lhs > rhs + MEASURE_TOL * max(1.0, lhs):
            return {"A": set_to_json(A), "B": set_to_json(B), "mu(A&B)": lhs, "nu(R(A)&R(B))": rhs}
    elif prop == "nondegenerate":
        f = random_step_function(X, rng)
        if f.is_zero():
            return None
        if all(apply(R, s).measure() == 0 for s in f.levels):
            return {"f": step_to_json(f)}
    elif prop == "maps-empty-to-null":
        if apply(R, X.empty()).measure() != 0:
            return {"R(empty)": set_to_json(apply(R, X.empty()))}
    else:
        raise InvalidInput(f"unknown property {prop!r}; expected one of {PROPERTIES}")
    return None


def check_property(R: SetTransformation, prop: str, seed: int = 0, trials: int = 100) -> CheckReport:
    """Search seeded random witnesses for a violation of `prop`.

    A clean run only means no violation was found on the witnesses.
    """
    if trials < 1:
        raise InvalidInput("at least one trial is required")
    if prop not in PROPERTIES:
        raise InvalidInput(f"unknown property {prop!r}; expected one of {PROPERTIES}")
    rng = np.random.default_rng(seed)
    notes = []
    if prop == "nondegenerate" and R.kind == "shifted" and R.domain.is_finite:
        # constant functions: the layer-cake output is c on [m, 2m), not zero
        from .rearrange import rearrange
        from .schema import rearranged_to_json

        out = rearrange(R, StepFunction.indicator(R.domain.full()))
        notes.append({"constant-function-output": rearranged_to_json(out), "flag": "nonzero output for a constant function"})
    for i in range(trials):
        bad = _witness(R, prop, rng)
        if bad is not None:
            return CheckReport(prop, "violated", i + 1, seed, bad, notes)
    return CheckReport(prop, "holds-on-witnesses", trials, seed, None, notes)


def verify_flags(R: SetTransformation, seed: int = 0, trials: int = 50) -> dict:
    """Re-check every declared-true flag; returns {flag: verdict}."""
    out = {}
    for name, declared in R.flags.as_dict().items():
        if declared:
            out[name] = check_property(R, name, seed=seed, trials=trials).verdict
    return out


def check_noncancellation(R: SetTransformation, weight, seed: int = 0, trials: int = 100) -> CheckReport:
    """mu(A) > 0 must imply V(R(A)) > 0 on random witnesses."""
    from .schema import set_to_json

    rng = np.random.default_rng(seed)
    for i in range(trials):
        A = R.domain.random_set(rng)
        if A.measure() > 0 and not weight.integral(apply(R, A)) > 0:
            return CheckReport("non-cancellation", "violated", i + 1, seed, {"A": set_to_json(A)})
    return CheckReport("non-cancellation", "holds-on-witnesses", trials, seed)
