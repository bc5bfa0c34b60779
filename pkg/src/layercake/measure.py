"""Measure spaces, measurable sets, canonical step functions and weights.

Every function handled by the library is a nonnegative simple function, so
all integrals reduce to finite sums over level sets.  Sets come in a few
concrete shapes (atoms, grid cells, half-open interval unions on the
half-line, centered balls, hypographs of decreasing step boundaries and
per-slice symmetric slabs) and each one knows its own measure and
elementary set algebra.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import integrate

from .errors import (
    Diverged,
    InvalidGrid,
    InvalidInput,
    SpaceMismatch,
    UnsupportedCombination,
)

DISCRETE = "discrete"
HALF_LINE_KIND = "half-line"
GRID = "grid"
EUCLIDEAN = "euclidean"
QUADRANT = "quadrant"
SLABS = "slabs"


def ball_volume(n: int) -> float:
    """Lebesgue measure of the unit ball in R^n."""
    if n < 1:
        raise InvalidInput(f"dimension must be >= 1, got {n}")
    # exact constants where gamma would leave a rounding residue
    if n == 1:
        return 2.0
    if n == 2:
        return math.pi
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere in R^n (two points when n == 1)."""
    return n * ball_volume(n)


# --------------------------------------------------------------------------
# spaces
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MeasureSpace:
    kind: str
    masses: tuple = ()
    shape: tuple = ()
    h: float = 1.0
    origin: tuple = ()
    dim: int = 0
    k: int = 0

    def __post_init__(self):
        if self.kind == DISCRETE:
            if any(not (m > 0) or math.isinf(m) for m in self.masses):
                raise InvalidInput("atom masses must be positive and finite")
        elif self.kind in (GRID, SLABS):
            if not self.shape or any(int(s) < 1 for s in self.shape):
                raise InvalidGrid(f"bad grid shape {self.shape}")
            if not (self.h > 0):
                raise InvalidGrid("cell side must be positive")
            if len(self.origin) != len(self.shape):
                raise InvalidGrid("origin and shape dimensions differ")

    # constructors -------------------------------------------------------
    @classmethod
    def discrete(cls, masses: Iterable[float]) -> MeasureSpace:
        return cls(DISCRETE, masses=tuple(float(m) for m in masses))

    @classmethod
    def half_line(cls) -> MeasureSpace:
        return HALF_LINE

    @classmethod
    def grid(cls, shape: Sequence[int], h: float = 1.0, origin: Sequence[float] | None = None) -> MeasureSpace:
        shape = tuple(int(s) for s in shape)
        if origin is None:
            origin = tuple(-s * h / 2 for s in shape)
        return cls(GRID, shape=shape, h=float(h), origin=tuple(float(o) for o in origin))

    @classmethod
    def euclidean(cls, n: int) -> MeasureSpace:
        return cls(EUCLIDEAN, dim=int(n))

    @classmethod
    def quadrant(cls) -> MeasureSpace:
        return QUADRANT_SPACE

    @classmethod
    def slabs(cls, grid: MeasureSpace, k: int) -> MeasureSpace:
        """Codomain of order-k Steiner symmetrization of `grid`.

        The first n-k grid axes survive as slices; within every slice the
        set is a centered k-dimensional ball.
        """
        if grid.kind != GRID:
            raise SpaceMismatch("slabs are built over a grid")
        return cls(SLABS, shape=grid.shape, h=grid.h, origin=grid.origin, k=int(k))

    # basic facts -------------------------------------------------------
    @property
    def ndim(self) -> int:
        if self.kind in (GRID, SLABS):
            return len(self.shape)
        if self.kind == EUCLIDEAN:
            return self.dim
        if self.kind == QUADRANT:
            return 2
        return 1

    @property
    def is_finite(self) -> bool:
        return self.kind in (DISCRETE, GRID)

    @property
    def cell_mass(self) -> float:
        return self.h ** len(self.shape)

    @property
    def size(self) -> int:
        if self.kind == DISCRETE:
            return len(self.masses)
        if self.kind == GRID:
            return int(np.prod(self.shape))
        raise UnsupportedCombination(f"{self.kind} space has no finite size")

    @property
    def total_mass(self) -> float:
        if self.kind == DISCRETE:
            return float(sum(self.masses))
        if self.kind == GRID:
            return self.size * self.cell_mass
        return math.inf

    def points(self) -> list:
        """Atom ids or cell indices of a finite space."""
        if self.kind == DISCRETE:
            return list(range(len(self.masses)))
        if self.kind == GRID:
            return list(product(*(range(s) for s in self.shape)))
        raise UnsupportedCombination(f"{self.kind} space is not finite")

    def mass_array(self) -> np.ndarray:
        if self.kind == DISCRETE:
            return np.asarray(self.masses, dtype=float)
        if self.kind == GRID:
            return np.full(self.shape, self.cell_mass)
        raise UnsupportedCombination(f"{self.kind} space is not finite")

    def cell_center(self, idx: Sequence[int]) -> np.ndarray:
        return np.array([o + (i + 0.5) * self.h for o, i in zip(self.origin, idx)])

    # sets ----------------------------------------------------------------
    def empty(self):
        if self.kind == DISCRETE:
            return AtomSet(self, frozenset())
        if self.kind == GRID:
            return GridRegion(self, frozenset())
        if self.kind == HALF_LINE_KIND:
            return IntervalUnion(())
        if self.kind == EUCLIDEAN:
            return RadialBall(self, 0.0)
        if self.kind == QUADRANT:
            return HypographRegion((), ())
        if self.kind == SLABS:
            return SlabRegion(self, (0.0,) * self.n_slices)
        raise InvalidInput(self.kind)

    def full(self):
        if self.kind == DISCRETE:
            return AtomSet(self, frozenset(self.points()))
        if self.kind == GRID:
            return GridRegion(self, frozenset(self.points()))
        raise UnsupportedCombination(f"{self.kind} space has infinite measure")

    def from_mask(self, mask) -> AtomSet | GridRegion:
        mask = np.asarray(mask, dtype=bool)
        if self.kind == DISCRETE:
            return AtomSet(self, frozenset(np.flatnonzero(mask).tolist()))
        if self.kind == GRID:
            return GridRegion(self, frozenset(map(tuple, np.argwhere(mask).tolist())))
        raise UnsupportedCombination(f"{self.kind} space has no mask form")

    def random_set(self, rng: np.random.Generator, density: float | None = None):
        """A random measurable set used as a property-check witness."""
        if self.kind in (DISCRETE, GRID):
            dens = rng.uniform(0.1, 0.9) if density is None else density
            shape = (self.size,) if self.kind == DISCRETE else self.shape
            return self.from_mask(rng.random(shape) < dens)
        if self.kind == HALF_LINE_KIND:
            k = int(rng.integers(1, 4))
            # quarter-unit endpoints so that coincidences actually occur
            pts = np.sort(rng.integers(0, 40, size=2 * k)) / 4.0
            return IntervalUnion.of(zip(pts[::2], pts[1::2]))
        raise UnsupportedCombination(f"no random sets on {self.kind}")

    # slabs ---------------------------------------------------------------
    @property
    def n_slices(self) -> int:
        return int(np.prod(self.shape[: len(self.shape) - self.k])) if self.kind == SLABS else 0

    def slice_indices(self) -> list:
        return list(product(*(range(s) for s in self.shape[: len(self.shape) - self.k])))


HALF_LINE = MeasureSpace(HALF_LINE_KIND)
QUADRANT_SPACE = MeasureSpace(QUADRANT)


def _same_space(a, b):
    if a.space != b.space:
        raise SpaceMismatch(f"sets live in different spaces: {a.space.kind} vs {b.space.kind}")


# --------------------------------------------------------------------------
# sets
# --------------------------------------------------------------------------


class _FiniteSet:
    """Shared behaviour of atom sets and grid regions."""

    space: MeasureSpace
    members: frozenset

    def _make(self, members):
        return type(self)(self.space, frozenset(members))

    def measure(self) -> float:
        if self.space.kind == DISCRETE:
            m = self.space.masses
            return float(math.fsum(m[i] for i in self.members))
        return len(self.members) * self.space.cell_mass

    def contains(self, point) -> bool:
        return (tuple(point) if isinstance(point, (list, np.ndarray)) else point) in self.members

    def union(self, other):
        self._check(other)
        return self._make(self.members | other.members)

    def intersection(self, other):
        self._check(other)
        return self._make(self.members & other.members)

    def difference(self, other):
        self._check(other)
        return self._make(self.members - other.members)

    def issubset(self, other, tol: float = 0.0) -> bool:
        self._check(other)
        return self.members <= other.members

    def is_empty(self) -> bool:
        return not self.members

    def mask(self) -> np.ndarray:
        if self.space.kind == DISCRETE:
            out = np.zeros(len(self.space.masses), dtype=bool)
            out[list(self.members)] = True
            return out
        out = np.zeros(self.space.shape, dtype=bool)
        for c in self.members:
            out[c] = True
        return out

    def _check(self, other):
        if type(other) is not type(self):
            raise UnsupportedCombination(f"{type(self).__name__} with {type(other).__name__}")
        _same_space(self, other)

    def probe_points(self) -> list:
        return self.space.points()


@dataclass(frozen=True)
class AtomSet(_FiniteSet):
    space: MeasureSpace
    atoms: frozenset = frozenset()

    @property
    def members(self):
        return self.atoms

    def __post_init__(self):
        n = len(self.space.masses)
        if any(not (0 <= a < n) for a in self.atoms):
            raise SpaceMismatch("atom id outside the space")


@dataclass(frozen=True)
class GridRegion(_FiniteSet):
    space: MeasureSpace
    cells: frozenset = frozenset()

    @property
    def members(self):
        return self.cells


@dataclass(frozen=True)
class IntervalUnion:
    """Sorted disjoint half-open intervals [a, b) in [0, inf)."""

    intervals: tuple = ()
    space: MeasureSpace = field(default=HALF_LINE, repr=False)

    def __post_init__(self):
        prev = -math.inf
        for a, b in self.intervals:
            if not (a < b) or a < 0 or a <= prev:
                raise InvalidInput(f"intervals must be nonempty, sorted, disjoint and non-adjacent: {self.intervals}")
            prev = b

    @classmethod
    def of(cls, pairs: Iterable[tuple[float, float]]) -> IntervalUnion:
        """Normalize arbitrary [a, b) pairs (overlapping, adjacent or empty)."""
        ivs = sorted((float(a), float(b)) for a, b in pairs if b > a)
        merged: list[list[float]] = []
        for a, b in ivs:
            if merged and a <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        return cls(tuple((a, b) for a, b in merged))

    @classmethod
    def prefix(cls, length: float) -> IntervalUnion:
        return cls(((0.0, float(length)),)) if length > 0 else cls(())

    def measure(self) -> float:
        return float(math.fsum(b - a for a, b in self.intervals))

    def contains(self, t) -> bool:
        return any(a <= t < b for a, b in self.intervals)

    def _sweep(self, other, keep: Callable[[bool, bool], bool]) -> IntervalUnion:
        if not isinstance(other, IntervalUnion):
            raise UnsupportedCombination(f"IntervalUnion with {type(other).__name__}")
        cuts = sorted({x for iv in self.intervals + other.intervals for x in iv})
        pieces = []
        for a, b in zip(cuts, cuts[1:]):
            if math.isinf(b):
                mid = a + 1.0
            else:
                mid = 0.5 * (a + b)
            if keep(self.contains(mid), other.contains(mid)):
                pieces.append((a, b))
        return IntervalUnion.of(pieces)

    def union(self, other):
        return self._sweep(other, lambda x, y: x or y)

    def intersection(self, other):
        return self._sweep(other, lambda x, y: x and y)

    def difference(self, other):
        return self._sweep(other, lambda x, y: x and not y)

    def issubset(self, other, tol: float = 0.0) -> bool:
        if not isinstance(other, IntervalUnion):
            raise UnsupportedCombination(f"IntervalUnion with {type(other).__name__}")
        return all(any(c - tol <= a and b <= d + tol for c, d in other.intervals) for a, b in self.intervals)

    def is_empty(self) -> bool:
        return not self.intervals

    def endpoints(self) -> list[float]:
        return [x for iv in self.intervals for x in iv]

    @staticmethod
    def probe_points_for(sets: Sequence[IntervalUnion]) -> list[float]:
        cuts = sorted({0.0} | {x for s in sets for x in s.endpoints() if math.isfinite(x)})
        mids = [0.5 * (a + b) for a, b in zip(cuts, cuts[1:])]
        return sorted(set(cuts + mids + [cuts[-1] + 1.0]))


@dataclass(frozen=True)
class RadialBall:
    """Open centered ball {|x| < radius} in R^n."""

    space: MeasureSpace
    radius: float = 0.0

    def __post_init__(self):
        if self.radius < 0:
            raise InvalidInput("radius must be nonnegative")

    @classmethod
    def of_measure(cls, space: MeasureSpace, m: float) -> RadialBall:
        return cls(space, (m / ball_volume(space.dim)) ** (1.0 / space.dim) if m > 0 else 0.0)

    def measure(self) -> float:
        return ball_volume(self.space.dim) * self.radius ** self.space.dim

    def contains(self, x) -> bool:
        r = float(np.linalg.norm(x)) if np.ndim(x) else abs(float(x))
        return r < self.radius

    def _check(self, other):
        if not isinstance(other, RadialBall):
            raise UnsupportedCombination(f"RadialBall with {type(other).__name__}")
        _same_space(self, other)

    def union(self, other):
        self._check(other)
        return self if self.radius >= other.radius else other

    def intersection(self, other):
        self._check(other)
        return self if self.radius <= other.radius else other

    def difference(self, other):
        raise UnsupportedCombination("difference of balls is an annulus, not a ball")

    def issubset(self, other, tol: float = 0.0) -> bool:
        self._check(other)
        return self.radius <= other.radius + tol

    def is_empty(self) -> bool:
        return self.radius == 0.0

    @staticmethod
    def probe_points_for(sets: Sequence[RadialBall]) -> list[float]:
        """Radii at which a radial step function should be inspected."""
        cuts = sorted({0.0} | {s.radius for s in sets})
        mids = [0.5 * (a + b) for a, b in zip(cuts, cuts[1:])]
        return sorted(set(cuts + mids + [cuts[-1] + 1.0]))


@dataclass(frozen=True)
class HypographRegion:
    """{(s, t) : 0 <= t < phi(s)} for a decreasing right-continuous step phi.

    `edges[i]` is the right end of the i-th step (the first starts at 0) and
    `heights[i]` its value.
    """

    edges: tuple = ()
    heights: tuple = ()
    space: MeasureSpace = field(default=QUADRANT_SPACE, repr=False)

    def __post_init__(self):
        if len(self.edges) != len(self.heights):
            raise InvalidInput("edges and heights differ in length")
        prev_e, prev_h = 0.0, math.inf
        for e, hgt in zip(self.edges, self.heights):
            if not (e > prev_e) or not (0 < hgt <= prev_h):
                raise InvalidInput(f"boundary must be a positive decreasing step function: {self}")
            prev_e, prev_h = e, hgt

    @classmethod
    def of(cls, edges: Sequence[float], heights: Sequence[float]) -> HypographRegion:
        """Normalize: drop zero steps, merge equal neighbours."""
        out_e, out_h = [], []
        left = 0.0
        for e, hgt in zip(edges, heights):
            if e <= left:
                continue
            left = e
            if hgt <= 0:
                break
            if out_h and out_h[-1] == hgt:
                out_e[-1] = float(e)
            else:
                out_e.append(float(e))
                out_h.append(float(hgt))
        return cls(tuple(out_e), tuple(out_h))

    def boundary(self, s: float) -> float:
        if s < 0:
            return 0.0
        for e, hgt in zip(self.edges, self.heights):
            if s < e:
                return hgt
        return 0.0

    def measure(self) -> float:
        left, total = 0.0, []
        for e, hgt in zip(self.edges, self.heights):
            total.append((e - left) * hgt)
            left = e
        return float(math.fsum(total))

    def contains(self, point) -> bool:
        s, t = point
        return 0 <= t < self.boundary(s)

    def _combine(self, other, pick):
        if not isinstance(other, HypographRegion):
            raise UnsupportedCombination(f"HypographRegion with {type(other).__name__}")
        cuts = sorted(set(self.edges) | set(other.edges))
        hs, left = [], 0.0
        for e in cuts:
            mid = 0.5 * (left + e)
            hs.append(pick(self.boundary(mid), other.boundary(mid)))
            left = e
        return HypographRegion.of(cuts, hs)

    def union(self, other):
        return self._combine(other, max)

    def intersection(self, other):
        return self._combine(other, min)

    def difference(self, other):
        raise UnsupportedCombination("difference of hypographs is not a hypograph")

    def issubset(self, other, tol: float = 0.0) -> bool:
        cuts = sorted({0.0} | set(self.edges) | set(other.edges))
        return all(self.boundary(0.5 * (a + b)) <= other.boundary(0.5 * (a + b)) + tol for a, b in zip(cuts, cuts[1:]))

    def is_empty(self) -> bool:
        return not self.edges

    @staticmethod
    def probe_points_for(sets: Sequence[HypographRegion]) -> list[tuple[float, float]]:
        s_cuts = sorted({0.0} | {e for r in sets for e in r.edges})
        t_cuts = sorted({0.0} | {v for r in sets for v in r.heights})
        s_pts = sorted(set(s_cuts + [0.5 * (a + b) for a, b in zip(s_cuts, s_cuts[1:])] + [s_cuts[-1] + 1]))
        t_pts = sorted(set(t_cuts + [0.5 * (a + b) for a, b in zip(t_cuts, t_cuts[1:])] + [t_cuts[-1] + 1]))
        return [(s, t) for s in s_pts for t in t_pts]


@dataclass(frozen=True)
class SlabRegion:
    """Per-slice centered balls: {(xbar, y) : xbar in slice i, |y| < radii[i]}.

    Slices are the cells of the first n-k grid axes, enumerated in row-major
    order; each contributes h^(n-k) * sigma_k * r^k to the measure.
    """

    space: MeasureSpace
    radii: tuple = ()

    def __post_init__(self):
        if len(self.radii) != self.space.n_slices or any(r < 0 for r in self.radii):
            raise InvalidInput("one nonnegative radius per slice is required")

    def measure(self) -> float:
        k = self.space.k
        w = self.space.h ** (len(self.space.shape) - k)
        return float(math.fsum(w * ball_volume(k) * r**k for r in self.radii))

    def contains(self, point) -> bool:
        i, y = point
        r = float(np.linalg.norm(y)) if np.ndim(y) else abs(float(y))
        return r < self.radii[i]

    def _combine(self, other, pick):
        if not isinstance(other, SlabRegion):
            raise UnsupportedCombination(f"SlabRegion with {type(other).__name__}")
        _same_space(self, other)
        return SlabRegion(self.space, tuple(pick(a, b) for a, b in zip(self.radii, other.radii)))

    def union(self, other):
        return self._combine(other, max)

    def intersection(self, other):
        return self._combine(other, min)

    def difference(self, other):
        raise UnsupportedCombination("difference of slabs is not a slab")

    def issubset(self, other, tol: float = 0.0) -> bool:
        return all(a <= b + tol for a, b in zip(self.radii, other.radii))

    def is_empty(self) -> bool:
        return not any(self.radii)

    @staticmethod
    def probe_points_for(sets: Sequence[SlabRegion]) -> list[tuple[int, float]]:
        if not sets:
            return []
        pts = []
        for i in range(sets[0].space.n_slices):
            rads = RadialBall.probe_points_for([RadialBall(MeasureSpace.euclidean(1), s.radii[i]) for s in sets])
            pts.extend((i, r) for r in rads)
        return pts


MeasurableSet = AtomSet | GridRegion | IntervalUnion | RadialBall | HypographRegion | SlabRegion


def measure(space: MeasureSpace, s: MeasurableSet) -> float:
    if s.space != space:
        raise SpaceMismatch(f"set from {s.space.kind} space measured in {space.kind} space")
    return s.measure()


def set_algebra(op: str, a: MeasurableSet, b: MeasurableSet) -> MeasurableSet:
    if type(a) is not type(b):
        raise UnsupportedCombination(f"{type(a).__name__} {op} {type(b).__name__}")
    if op == "union":
        return a.union(b)
    if op in ("intersect", "intersection"):
        return a.intersection(b)
    if op in ("diff", "difference"):
        return a.difference(b)
    raise InvalidInput(f"unknown set operation {op!r}")


def probe_points(sets: Sequence[MeasurableSet], space: MeasureSpace) -> list:
    """A complete test set of points for step data built on `sets`."""
    if space.kind in (DISCRETE, GRID):
        return space.points()
    if space.kind == HALF_LINE_KIND:
        return IntervalUnion.probe_points_for(sets)
    if space.kind == EUCLIDEAN:
        return RadialBall.probe_points_for(sets)
    if space.kind == QUADRANT:
        return HypographRegion.probe_points_for(sets)
    if space.kind == SLABS:
        return SlabRegion.probe_points_for(sets) if sets else SlabRegion.probe_points_for([space.empty()])
    raise InvalidInput(space.kind)


# --------------------------------------------------------------------------
# step functions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class StepFunction:
    """f = sum_j (a_j - a_{j+1}) chi_{F_j}, a_1 > ... > a_N > 0, F_1 < ... < F_N."""

    space: MeasureSpace
    values: tuple = ()
    levels: tuple = ()

    def __post_init__(self):
        if len(self.values) != len(self.levels):
            raise InvalidInput("values and levels differ in length")
        for a, b in zip(self.values, self.values[1:]):
            if not a > b:
                raise InvalidInput("values must be strictly decreasing")
        if self.values and not self.values[-1] > 0:
            raise InvalidInput("values must be positive")
        for s in self.levels:
            if s.space != self.space:
                raise SpaceMismatch("level set outside the function's space")
        prev = None
        for s in self.levels:
            if prev is not None and not (prev.issubset(s) and s.measure() > prev.measure()):
                raise InvalidInput("levels must be strictly nested")
            prev = s

    @classmethod
    def zero(cls, space: MeasureSpace) -> StepFunction:
        return cls(space)

    @classmethod
    def indicator(cls, s: MeasurableSet, value: float = 1.0) -> StepFunction:
        return canonical_step([(value, s)], s.space)

    @classmethod
    def from_array(cls, space: MeasureSpace, arr) -> StepFunction:
        """Build from per-atom (or per-cell) values of a finite space."""
        arr = np.asarray(arr, dtype=float)
        expect = (space.size,) if space.kind == DISCRETE else space.shape
        if arr.shape != tuple(expect):
            raise InvalidInput(f"array shape {arr.shape} does not match space {expect}")
        if (arr < 0).any() or not np.isfinite(arr).all():
            raise InvalidInput("values must be finite and nonnegative")
        vals = np.unique(arr[arr > 0])[::-1]
        levels = tuple(space.from_mask(arr >= a) for a in vals)
        return cls(space, tuple(float(a) for a in vals), levels)

    @property
    def n_levels(self) -> int:
        return len(self.values)

    def is_zero(self) -> bool:
        return not self.values

    def layers(self) -> list[tuple[float, MeasurableSet]]:
        """(b_j, F_j) with b_j = a_j - a_{j+1}."""
        nxt = self.values[1:] + (0.0,)
        return [(a - b, s) for a, b, s in zip(self.values, nxt, self.levels)]

    def __call__(self, x) -> float:
        for a, s in zip(self.values, self.levels):
            if s.contains(x):
                return a
        return 0.0

    def level_set(self, t: float) -> MeasurableSet:
        """{f > t}."""
        out = self.space.empty()
        for a, s in zip(self.values, self.levels):
            if a > t:
                out = s
        return out

    def distribution(self, t: float) -> float:
        return self.level_set(t).measure()

    def power(self, p: float) -> StepFunction:
        if not p > 0:
            raise InvalidInput("exponent must be positive")
        return StepFunction(self.space, tuple(a**p for a in self.values), self.levels)

    def scale(self, c: float) -> StepFunction:
        if c < 0:
            raise InvalidInput("scale must be nonnegative")
        if c == 0:
            return StepFunction.zero(self.space)
        return StepFunction(self.space, tuple(c * a for a in self.values), self.levels)

    def __add__(self, other: StepFunction) -> StepFunction:
        if other.space != self.space:
            raise SpaceMismatch("cannot add functions on different spaces")
        return canonical_step(self.layers() + other.layers(), self.space)

    def to_array(self) -> np.ndarray:
        shape = (self.space.size,) if self.space.kind == DISCRETE else self.space.shape
        out = np.zeros(shape)
        for b, s in self.layers():
            out[s.mask()] += b
        return out

    def lp_norm(self, p: float) -> float:
        """(integral f^p dmu)^(1/p), summed over the disjoint pieces F_j minus F_{j-1}."""
        if self.space.is_finite:
            arr = self.to_array()
            return float(np.sum(arr**p * self.space.mass_array())) ** (1 / p)
        prev = 0.0
        terms = []
        for a, s in zip(self.values, self.levels):
            m = s.measure()
            terms.append(a**p * (m - prev))
            prev = m
        return math.fsum(terms) ** (1 / p)


def _pieces(sets: Sequence[MeasurableSet], space: MeasureSpace):
    """Elementary pieces refining `sets` and, for each, a representative point."""
    if space.kind in (DISCRETE, GRID):
        return None
    if space.kind == HALF_LINE_KIND:
        cuts = sorted({x for s in sets for x in s.endpoints()})
        out = []
        for a, b in zip(cuts, cuts[1:]):
            out.append((IntervalUnion(((a, b),)), a + 1.0 if math.isinf(b) else 0.5 * (a + b)))
        return out
    raise UnsupportedCombination(f"canonical_step is not available on {space.kind} spaces")


def canonical_step(pairs: Sequence[tuple[float, MeasurableSet]], space: MeasureSpace | None = None) -> StepFunction:
    """Turn a layered sum  sum_k c_k chi_{S_k}  into its canonical StepFunction."""
    pairs = list(pairs)
    if space is None:
        if not pairs:
            raise InvalidInput("an empty pair list needs an explicit space")
        space = pairs[0][1].space
    for c, s in pairs:
        if c < 0 or not math.isfinite(c):
            raise InvalidInput(f"layer value must be finite and nonnegative, got {c}")
        if s.space != space:
            raise SpaceMismatch("layers come from different spaces")
    if space.kind in (DISCRETE, GRID):
        shape = (space.size,) if space.kind == DISCRETE else space.shape
        arr = np.zeros(shape)
        for c, s in pairs:
            arr[s.mask()] += c
        return StepFunction.from_array(space, arr)
    pieces = _pieces([s for _, s in pairs], space)
    vals = [math.fsum(c for c, s in pairs if s.contains(pt)) for _, pt in pieces]
    distinct = sorted({v for v in vals if v > 0}, reverse=True)
    levels = []
    for a in distinct:
        acc = space.empty()
        for (piece, _), v in zip(pieces, vals):
            if v >= a:
                acc = acc.union(piece)
        levels.append(acc)
    return StepFunction(space, tuple(distinct), tuple(levels))


def random_step_function(space: MeasureSpace, rng: np.random.Generator, n_values: int | None = None, integer: bool = False) -> StepFunction:
    """A random nonnegative simple function used as a witness."""
    if space.is_finite:
        shape = (space.size,) if space.kind == DISCRETE else space.shape
        k = int(rng.integers(1, 5)) if n_values is None else n_values
        palette = rng.integers(1, 10, size=k).astype(float) if integer else rng.uniform(0.1, 5.0, size=k)
        palette = np.concatenate([[0.0], palette])
        return StepFunction.from_array(space, palette[rng.integers(0, len(palette), size=shape)])
    k = int(rng.integers(1, 4)) if n_values is None else n_values
    layers = [(float(rng.integers(1, 10)) if integer else float(rng.uniform(0.1, 5.0)), space.random_set(rng)) for _ in range(k)]
    return canonical_step(layers, space)


# --------------------------------------------------------------------------
# weights
# --------------------------------------------------------------------------


class Weight:
    """A nonnegative locally integrable density v on a codomain space.

    Subclasses supply `integral(S)`, the exact (or quadrature) value of
    V(S) = int_S v dnu.
    """

    space: MeasureSpace

    def integral(self, s: MeasurableSet) -> float:
        raise NotImplementedError

    def __call__(self, point) -> float:
        raise NotImplementedError

    def _check(self, s):
        if s.space != self.space:
            raise SpaceMismatch(f"weight on {self.space.kind} integrated over a {s.space.kind} set")


class UnitWeight(Weight):
    def __init__(self, space: MeasureSpace):
        self.space = space

    def integral(self, s):
        self._check(s)
        m = s.measure()
        if math.isinf(m):
            raise Diverged(f"unbounded set {s}")
        return m

    def __call__(self, point):
        return 1.0

    def __repr__(self):
        return f"UnitWeight({self.space.kind})"


class PowerWeight(Weight):
    """v(t) = scale * t**alpha on the half-line, alpha > -1."""

    def __init__(self, alpha: float, scale: float = 1.0):
        if not alpha > -1:
            raise InvalidInput("alpha must exceed -1 for local integrability")
        if scale < 0:
            raise InvalidInput("scale must be nonnegative")
        self.space = HALF_LINE
        self.alpha = float(alpha)
        self.scale = float(scale)

    def antiderivative(self, t: float) -> float:
        return self.scale * t ** (self.alpha + 1) / (self.alpha + 1)

    def integral(self, s):
        self._check(s)
        total = []
        for a, b in s.intervals:
            if math.isinf(b):
                if self.scale == 0:
                    continue
                raise Diverged(f"power weight over [{a}, inf)")
            total.append(self.antiderivative(b) - self.antiderivative(a))
        return math.fsum(total)

    def __call__(self, t):
        return self.scale * t**self.alpha if t > 0 else (0.0 if self.alpha > 0 else math.inf)

    def __repr__(self):
        return f"PowerWeight(alpha={self.alpha}, scale={self.scale})"


class PiecewiseWeight(Weight):
    """Piecewise constant on [breaks[i], breaks[i+1]); the last piece runs to infinity."""

    def __init__(self, breaks: Sequence[float], values: Sequence[float]):
        breaks = [float(b) for b in breaks]
        if not breaks or breaks[0] != 0.0 or any(b >= c for b, c in zip(breaks, breaks[1:])):
            raise InvalidInput("breaks must start at 0 and increase")
        if len(values) != len(breaks) or any(v < 0 for v in values):
            raise InvalidInput("one nonnegative value per piece")
        self.space = HALF_LINE
        self.breaks = breaks
        self.values = [float(v) for v in values]

    def integral(self, s):
        self._check(s)
        ends = self.breaks[1:] + [math.inf]
        total = []
        for a, b in s.intervals:
            for lo, hi, v in zip(self.breaks, ends, self.values):
                left, right = max(a, lo), min(b, hi)
                if right > left and v > 0:
                    if math.isinf(right):
                        raise Diverged(f"piecewise weight over [{left}, inf)")
                    total.append(v * (right - left))
        return math.fsum(total)

    def __call__(self, t):
        out = 0.0
        for lo, v in zip(self.breaks, self.values):
            if t >= lo:
                out = v
        return out

    def __repr__(self):
        return f"PiecewiseWeight({self.breaks}, {self.values})"


class FunctionWeight(Weight):
    """A callable density on the half-line, integrated by adaptive quadrature."""

    def __init__(self, func: Callable[[float], float], name: str = "v"):
        self.space = HALF_LINE
        self.func = func
        self.name = name

    def integral(self, s):
        self._check(s)
        total = []
        for a, b in s.intervals:
            val, _ = integrate.quad(self.func, a, b, epsabs=1e-14, epsrel=1e-13, limit=200)
            if not math.isfinite(val):
                raise Diverged(f"{self.name} over [{a}, {b})")
            total.append(val)
        return math.fsum(total)

    def __call__(self, t):
        return self.func(t)

    def __repr__(self):
        return f"FunctionWeight({self.name})"


class AtomWeight(Weight):
    """Per-atom or per-cell density table on a finite space."""

    def __init__(self, space: MeasureSpace, table):
        table = np.asarray(table, dtype=float)
        expect = (space.size,) if space.kind == DISCRETE else space.shape
        if table.shape != tuple(expect) or (table < 0).any():
            raise InvalidInput("weight table must be nonnegative and match the space")
        self.space = space
        self.table = table

    def integral(self, s):
        self._check(s)
        return float(np.sum(self.table[s.mask()] * self.space.mass_array()[s.mask()]))

    def __call__(self, point):
        return float(self.table[point])


class RadialWeight(Weight):
    """v(x) = profile(|x|) on R^n.

    `moment`, when given, is the closed form of int_0^r profile(rho) rho^(n-1) drho.
    """

    def __init__(self, n: int, profile: Callable[[float], float], moment: Callable[[float], float] | None = None, name: str = "v"):
        self.space = MeasureSpace.euclidean(n)
        self.n = n
        self.profile = profile
        self.moment = moment
        self.name = name

    def integral(self, s):
        self._check(s)
        r = s.radius
        if math.isinf(r):
            raise Diverged(f"{self.name} over all of R^{self.n}")
        if r == 0:
            return 0.0
        if self.moment is not None:
            m = self.moment(r)
        else:
            m, _ = integrate.quad(lambda rho: self.profile(rho) * rho ** (self.n - 1), 0.0, r, epsabs=1e-15, epsrel=1e-13, limit=200)
        return sphere_area(self.n) * m

    def __call__(self, x):
        return self.profile(float(np.linalg.norm(x)) if np.ndim(x) else abs(float(x)))

    def __repr__(self):
        return f"RadialWeight(n={self.n}, {self.name})"


class SliceWeight(Weight):
    """A density v(xbar, y) on the Steiner codomain of a grid.

    `func(xbar, y)` receives the slice center xbar (array of n-k coordinates)
    and y (scalar for k=1, length-2 array for k=2).  The xbar dependence is
    frozen at slice centers.
    """

    def __init__(self, space: MeasureSpace, func: Callable, angular_nodes: int = 256, name: str = "v"):
        if space.kind != SLABS or space.k not in (1, 2):
            raise InvalidInput("slice weights need a slab space with k in {1, 2}")
        self.space = space
        self.func = func
        self.angular_nodes = angular_nodes
        self.name = name
        self._centers = [self._slice_center(i) for i in space.slice_indices()]

    def _slice_center(self, idx):
        return np.array([o + (i + 0.5) * self.space.h for o, i in zip(self.space.origin, idx)])

    def slice_center(self, i: int) -> np.ndarray:
        return self._centers[i]

    def ball_integral(self, i: int, r: float) -> float:
        """int_{|y| < r} v(xbar_i, y) dy."""
        if r == 0:
            return 0.0
        xb = self._centers[i]
        if self.space.k == 1:
            left, _ = integrate.quad(lambda y: self.func(xb, y), -r, 0.0, epsabs=1e-15, epsrel=1e-13, limit=200)
            right, _ = integrate.quad(lambda y: self.func(xb, y), 0.0, r, epsabs=1e-15, epsrel=1e-13, limit=200)
            return left + right
        M = self.angular_nodes
        th = 2 * np.pi * np.arange(M) / M
        ring = lambda rho: rho * (2 * np.pi / M) * sum(self.func(xb, np.array([rho * np.cos(a), rho * np.sin(a)])) for a in th)
        val, _ = integrate.quad(ring, 0.0, r, epsabs=1e-15, epsrel=1e-12, limit=200)
        return val

    def integral(self, s):
        self._check(s)
        w = self.space.h ** (len(self.space.shape) - self.space.k)
        return math.fsum(w * self.ball_integral(i, r) for i, r in enumerate(s.radii))

    def __call__(self, point):
        i, y = point
        return self.func(self._centers[i], y)


class RowWeight(Weight):
    """A density on the quadrant depending only on t: v(s, t) = w(t)."""

    def __init__(self, t_weight: Weight):
        if t_weight.space != HALF_LINE:
            raise InvalidInput("row weight needs a half-line weight in t")
        self.space = QUADRANT_SPACE
        self.t_weight = t_weight

    def integral(self, s):
        self._check(s)
        left, total = 0.0, []
        for e, hgt in zip(s.edges, s.heights):
            total.append((e - left) * self.t_weight.integral(IntervalUnion.prefix(hgt)))
            left = e
        return math.fsum(total)

    def __call__(self, point):
        return self.t_weight(point[1])


def weight_integral(v: Weight, s: MeasurableSet) -> float:
    return v.integral(s)
