"""Layer-cake rearrangement engine and the pairing oracles built on it."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from itertools import permutations
from typing import Sequence

import numpy as np

from .errors import InvalidInput, PreconditionViolation, SizeLimit, SpaceMismatch
from .measure import HALF_LINE_KIND, MeasureSpace, StepFunction, probe_points
from .transform import SetTransformation, apply

ORACLE_MAX_N = 10


@dataclass(frozen=True, eq=False)
class RearrangedFunction:
    """f*_R stored as (values, R-images of the level sets).

    The pointwise value is sum_j (a_j - a_{j+1}) chi_{R(F_j)}(y), the layer-cake
    integral evaluated exactly for simple f.  Levels are nested whenever R is
    monotone; otherwise they are kept as the raw layer family.
    """

    codomain: MeasureSpace
    values: tuple
    levels: tuple
    transform: SetTransformation = field(repr=False)
    source: StepFunction = field(repr=False)

    def layers(self) -> list:
        nxt = self.values[1:] + (0.0,)
        return [(a - b, s) for a, b, s in zip(self.values, nxt, self.levels)]

    def __call__(self, y) -> float:
        return evaluate(self, y)

    def is_zero(self) -> bool:
        return all(s.measure() == 0 for s in self.levels)

    def is_nested(self) -> bool:
        return all(a.issubset(b) for a, b in zip(self.levels, self.levels[1:]))

    def power(self, p: float) -> RearrangedFunction:
        """Pointwise p-th power; only meaningful when levels are nested."""
        return RearrangedFunction(self.codomain, tuple(a**p for a in self.values), self.levels, self.transform, self.source)

    def probe_points(self) -> list:
        return probe_points(list(self.levels), self.codomain)

    def to_csv(self, points: Sequence[float] | None = None) -> str:
        """(t, value) profile for half-line codomains."""
        if self.codomain.kind != HALF_LINE_KIND:
            raise InvalidInput("CSV profiles are defined for half-line codomains")
        pts = self.probe_points() if points is None else points
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "value"])
        for t in pts:
            w.writerow([repr(float(t)), repr(evaluate(self, t))])
        return buf.getvalue()


def rearrange(R: SetTransformation, f: StepFunction) -> RearrangedFunction:
    if f.space != R.domain:
        raise SpaceMismatch(f"function on {f.space.kind} space, transformation expects {R.domain.kind}")
    levels = tuple(apply(R, s) for s in f.levels)
    return RearrangedFunction(R.codomain, f.values, levels, R, f)


def evaluate(F: RearrangedFunction, y) -> float:
    terms = [b for b, s in F.layers() if s.contains(y)]
    return math.fsum(terms)


def decreasing_rearrangement(f: StepFunction):
    """Classical f* as a StepFunction on the half-line."""
    from .transform import classical

    F = rearrange(classical(f.space), f)
    return StepFunction(F.codomain, F.values, F.levels)


def sort_and_stack(values: Sequence[float], masses: Sequence[float]) -> list[tuple[float, float, float]]:
    """Oracle for f* on a discrete space: (start, end, value) pieces.

    Atom values are sorted descending and laid end to end with their masses.
    """
    order = sorted(range(len(values)), key=lambda i: -values[i])
    out, t = [], 0.0
    for i in order:
        if values[i] <= 0:
            break
        out.append((t, t + masses[i], values[i]))
        t += masses[i]
    return out


def _integral_fg(f: StepFunction, g: StepFunction) -> float:
    if f.space.is_finite:
        return float(np.sum(f.to_array() * g.to_array() * f.space.mass_array()))
    return math.fsum(b * c * F.intersection(G).measure() for b, F in f.layers() for c, G in g.layers())


def hl_pairing(R: SetTransformation, f: StepFunction, g: StepFunction) -> tuple[float, float]:
    """(int_X f g dmu, int_Y f*_R g*_R dnu), both as exact finite sums."""
    if not (R.flags.monotone and R.flags.fatou):
        raise PreconditionViolation(f"{R.kind} is not declared monotone with the Fatou property")
    if f.space != R.domain or g.space != R.domain:
        raise SpaceMismatch("both functions must live on the transformation's domain")
    Ff, Fg = rearrange(R, f), rearrange(R, g)
    rhs = math.fsum(b * c * S.intersection(T).measure() for b, S in Ff.layers() for c, T in Fg.layers())
    return _integral_fg(f, g), rhs


def permutation_saturation_oracle(f: Sequence[float], u: Sequence[float]) -> tuple[float, tuple[int, ...]]:
    """Brute-force sup over bijections sigma of sum_i f_i u_sigma(i).

    Returns the supremum and one maximizing sigma.  For nonincreasing u this
    equals the sorted pairing sum_i f*_i u_i.
    """
    n = len(f)
    if len(u) != n:
        raise InvalidInput("f and u must have the same length")
    if n > ORACLE_MAX_N:
        raise SizeLimit(f"n={n} exceeds the brute-force limit {ORACLE_MAX_N}")
    best, arg = -math.inf, tuple(range(n))
    for sigma in permutations(range(n)):
        val = math.fsum(f[i] * u[sigma[i]] for i in range(n))
        if val > best:
            best, arg = val, sigma
    return best, arg


def sorted_pairing(f: Sequence[float], u: Sequence[float]) -> float:
    return math.fsum(a * b for a, b in zip(sorted(f, reverse=True), u))
