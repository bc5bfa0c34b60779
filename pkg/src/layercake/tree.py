"""Finite homogeneous rooted trees with counting measure.

Vertices are child-index paths from the root o (the empty path).  The
boundary of the depth-d truncation is represented by its q^d leaves in
lexicographic order, and I(x) is the interval of leaf indices below x.

x <| y holds when x is an ancestor of y (or equal), or when every leaf ray
through y precedes every leaf ray through x.  Any two vertices are then
comparable, so the order is total: ancestors come first and, among disjoint
subtrees, the one further right comes first.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Mapping, Sequence

import numpy as np

from .errors import InvalidInput
from .measure import AtomSet, MeasureSpace
from .transform import SetTransformation, initial_segment


@dataclass(frozen=True)
class HomogeneousTree:
    q: int
    d: int
    paths: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if self.q < 2 or self.d < 0:
            raise InvalidInput("need branching q >= 2 and depth d >= 0")
        paths = [p for depth in range(self.d + 1) for p in product(range(self.q), repeat=depth)]
        object.__setattr__(self, "paths", tuple(paths))

    @cached_property
    def index(self) -> dict:
        return {p: i for i, p in enumerate(self.paths)}

    @property
    def size(self) -> int:
        return len(self.paths)

    @property
    def root(self) -> int:
        return 0

    @cached_property
    def space(self) -> MeasureSpace:
        return MeasureSpace.discrete([1.0] * self.size)

    def vertex(self, path: str | Sequence[int]) -> int:
        """Vertex id of a path given as a child-index string ("" is the root) or sequence."""
        key = tuple(int(c) for c in path)
        if key not in self.index:
            raise InvalidInput(f"no vertex at path {path!r}")
        return self.index[key]

    def path_str(self, x: int) -> str:
        return "".join(str(c) for c in self.paths[x])

    def depth(self, x: int) -> int:
        return len(self.paths[x])

    def ray_interval(self, x: int) -> tuple[int, int]:
        """(leftmost, rightmost) leaf index under x."""
        p = self.paths[x]
        lo = 0
        for c in p:
            lo = lo * self.q + c
        width = self.q ** (self.d - len(p))
        lo *= width
        return lo, lo + width - 1

    def is_ancestor(self, x: int, y: int) -> bool:
        px, py = self.paths[x], self.paths[y]
        return py[: len(px)] == px

    def geodesic(self, x: int) -> list[int]:
        """[o, x] as vertex ids."""
        p = self.paths[x]
        return [self.index[p[:i]] for i in range(len(p) + 1)]

    @cached_property
    def canonical_order(self) -> tuple:
        """A fixed linear extension of <|; ties go to (leftmost ray, depth)."""
        n = self.size
        succ = [[] for _ in range(n)]
        indeg = [0] * n
        for x in range(n):
            for y in range(n):
                if x != y and order_leq(self, x, y):
                    succ[x].append(y)
                    indeg[y] += 1
        key = lambda v: (self.ray_interval(v)[0], self.depth(v), v)
        heap = [key(v) for v in range(n) if indeg[v] == 0]
        heapq.heapify(heap)
        out = []
        while heap:
            v = heapq.heappop(heap)[-1]
            out.append(v)
            for w in succ[v]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    heapq.heappush(heap, key(w))
        if len(out) != n:
            raise RuntimeError("the order relation has a cycle")
        return tuple(out)

    @cached_property
    def position(self) -> dict:
        return {v: i for i, v in enumerate(self.canonical_order)}


def order_leq(T: HomogeneousTree, x: int, y: int) -> bool:
    """x <| y: ancestor-or-equal, or max I(y) < min I(x)."""
    if T.is_ancestor(x, y):
        return True
    return T.ray_interval(y)[1] < T.ray_interval(x)[0]


def tree_rearrange(T: HomogeneousTree, A) -> AtomSet:
    """A* = the first |A| vertices of the canonical order."""
    members = A.atoms if isinstance(A, AtomSet) else frozenset(A)
    return AtomSet(T.space, frozenset(T.canonical_order[: len(members)]))


def tree_transformation(T: HomogeneousTree) -> SetTransformation:
    return initial_segment(T.space, T.canonical_order)


def weights_from_paths(T: HomogeneousTree, values: Mapping[str, float]) -> np.ndarray:
    """Vertex weight array from a {path-string: value} map covering every vertex."""
    out = np.full(T.size, np.nan)
    for path, val in values.items():
        out[T.vertex(path)] = float(val)
    if np.isnan(out).any():
        missing = [T.path_str(i) for i in np.flatnonzero(np.isnan(out))]
        raise InvalidInput(f"weights missing for vertices {missing}")
    if (out < 0).any():
        raise InvalidInput("tree weights must be nonnegative")
    return out


def linearly_decreasing_weight(T: HomogeneousTree) -> np.ndarray:
    """Strictly decreasing along the canonical order: size - position."""
    return np.array([float(T.size - T.position[v]) for v in range(T.size)])


@dataclass
class TreeReport:
    verdict: str
    witness: dict | None = None

    @property
    def holds(self) -> bool:
        return self.verdict == "holds"


def linearly_decreasing_check(T: HomogeneousTree, v) -> TreeReport:
    """Exhaustive: x <| y must give v(x) >= v(y)."""
    v = np.asarray(v, dtype=float)
    for x in range(T.size):
        for y in range(T.size):
            if x != y and order_leq(T, x, y) and v[x] < v[y]:
                return TreeReport("violated", {"x": T.path_str(x), "y": T.path_str(y), "v(x)": float(v[x]), "v(y)": float(v[y])})
    return TreeReport("holds")


def _V(v, s) -> float:
    return float(sum(v[i] for i in s))


def cc_linear_suite(T: HomogeneousTree, v) -> dict:
    """Concavity on the proof family versus linear decrease.

    For each pair x <| y (x != y) the family is read in the canonical order:
    [a, b] is the order interval between a and b, "1" is the vertex right
    after o, so A = [o, x] and B = [1, y].  The claimed images
    A* = A, B* = [o, y-1], (A u B)* = [o, y], (A n B)* = [o, x-1] are checked
    against `tree_rearrange` and any mismatch is flagged.
    """
    v = np.asarray(v, dtype=float)
    order = T.canonical_order
    pos = T.position
    worst, cc_wit, flags = np.inf, None, []
    for x in range(T.size):
        for y in range(T.size):
            if x == y or not order_leq(T, x, y):
                continue
            k, m = pos[x], pos[y]
            A = frozenset(order[: k + 1])
            B = frozenset(order[1 : m + 1])
            U, I = A | B, A & B
            stars = {name: tree_rearrange(T, S).atoms for name, S in (("A", A), ("B", B), ("AuB", U), ("AnB", I))}
            claimed = {"A": A, "B": frozenset(order[:m]), "AuB": frozenset(order[: m + 1]), "AnB": frozenset(order[:k])}
            for name in stars:
                if stars[name] != claimed[name]:
                    flags.append({"x": T.path_str(x), "y": T.path_str(y), "set": name})
            slack = _V(v, stars["A"]) + _V(v, stars["B"]) - _V(v, stars["AuB"]) - _V(v, stars["AnB"])
            if slack < worst:
                worst = slack
                cc_wit = {"x": T.path_str(x), "y": T.path_str(y), "slack": float(slack)}
    tol = 1e-12 * max(1.0, float(np.abs(v).sum()))
    cc_holds = bool(worst >= -tol)
    lin = linearly_decreasing_check(T, v)
    return {
        "cc": {"verdict": "holds" if cc_holds else "violated", "min_slack": float(worst) if np.isfinite(worst) else 0.0, "witness": None if cc_holds else cc_wit},
        "linear": {"verdict": lin.verdict, "witness": lin.witness},
        "consistent": (not cc_holds) or lin.holds,
        "flags": flags,
        "reading": "order-interval",
    }
