"""Weighted Lorentz functionals Lambda^p_R(v) and their normability checks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import permutations
from typing import Sequence

import numpy as np

from .errors import InvalidInput, NonCancellationViolated, PreconditionViolation, SizeLimit
from .measure import HALF_LINE, IntervalUnion, StepFunction, UnitWeight, Weight, canonical_step, random_step_function
from .rearrange import sorted_pairing
from .transform import SetTransformation, apply, classical

TRIANGLE_TOL = 1e-10
STRUCTURED_DELTAS = (1.0, 0.1, 0.01)


@dataclass(frozen=True)
class LorentzParams:
    p: float
    weight: Weight
    transform: SetTransformation

    def __post_init__(self):
        if not self.p > 0:
            raise InvalidInput(f"exponent p must be positive, got {self.p}")
        if self.weight.space != self.transform.codomain:
            raise InvalidInput("weight must live on the transformation's codomain")

    def V(self, s) -> float:
        """V(R(s)) for a domain set s."""
        return self.weight.integral(apply(self.transform, s))


def lorentz_norm(params: LorentzParams, f: StepFunction) -> float:
    """(sum_j (a_j^p - a_{j+1}^p) V(R(F_j)))^(1/p)."""
    p = params.p
    nxt = f.values[1:] + (0.0,)
    terms = [(a**p - b**p) * params.V(s) for a, b, s in zip(f.values, nxt, f.levels)]
    total = math.fsum(terms)
    return total ** (1.0 / p) if total > 0 else 0.0


def quasinorm_ratio(params: LorentzParams, A, B) -> float:
    """V(R(A u B)) / (V(R(A)) + V(R(B)))."""
    if not (A.measure() > 0 and B.measure() > 0):
        raise InvalidInput("both sets need positive measure")
    den = params.V(A) + params.V(B)
    if den == 0:
        raise NonCancellationViolated("V(R(A)) + V(R(B)) vanishes for sets of positive measure")
    return params.V(A.union(B)) / den


def concavity_slack(params: LorentzParams, A, B) -> float:
    """V(R(A)) + V(R(B)) - V(R(A u B)) - V(R(A n B)); negative means CC fails."""
    return params.V(A) + params.V(B) - params.V(A.union(B)) - params.V(A.intersection(B))


@dataclass
class SearchReport:
    condition: str
    value: float
    violated: bool
    trials: int
    seed: int
    witness: dict | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "verdict": "violated" if self.violated else "no violation found",
            "value": self.value,
            "witness": self.witness,
            "seed": self.seed,
            "trials": self.trials,
            **self.extra,
        }


def _positive_set(space, rng):
    while True:
        s = space.random_set(rng)
        if s.measure() > 0:
            return s


def quasinorm_search(params: LorentzParams, seed: int = 0, trials: int = 200) -> SearchReport:
    """Largest quasinorm ratio over random set pairs; finite C certifies the witnesses."""
    from .schema import set_to_json

    rng = np.random.default_rng(seed)
    worst, wit = -math.inf, None
    for _ in range(trials):
        A, B = _positive_set(params.transform.domain, rng), _positive_set(params.transform.domain, rng)
        r = quasinorm_ratio(params, A, B)
        if r > worst:
            worst, wit = r, {"A": set_to_json(A), "B": set_to_json(B)}
    return SearchReport("quasi-norm", worst, not math.isfinite(worst), trials, seed, wit)


def concavity_search(params: LorentzParams, seed: int = 0, trials: int = 200) -> SearchReport:
    """Most negative concavity slack over random set pairs."""
    from .schema import set_to_json

    rng = np.random.default_rng(seed)
    worst, wit = math.inf, None
    X = params.transform.domain
    for _ in range(trials):
        A, B = X.random_set(rng), X.random_set(rng)
        s = concavity_slack(params, A, B)
        if s < worst:
            worst, wit = s, {"A": set_to_json(A), "B": set_to_json(B)}
    return SearchReport("concavity", worst, worst < -TRIANGLE_TOL, trials, seed, wit)


def structured_pair(A, B, delta: float) -> tuple[StepFunction, StepFunction]:
    """The near-equality pair f = (1+d)chi_A + chi_{(AuB)\\A}, g = (1+d)chi_B + chi_{(AuB)\\B}."""
    U = A.union(B)
    space = A.space
    f = canonical_step([(1 + delta, A), (1.0, U.difference(A))], space)
    g = canonical_step([(1 + delta, B), (1.0, U.difference(B))], space)
    return f, g


def triangle_ratio(params: LorentzParams, f: StepFunction, g: StepFunction) -> float:
    den = lorentz_norm(params, f) + lorentz_norm(params, g)
    if den == 0:
        return 0.0
    return lorentz_norm(params, f + g) / den


def triangle_search(params: LorentzParams, seed: int = 0, trials: int = 1000, deltas: Sequence[float] = STRUCTURED_DELTAS) -> SearchReport:
    """Worst ||f+g|| / (||f|| + ||g||) over random pairs and the structured family.

    Every trial draws one random pair of step functions and one set pair
    (A, B) fed through `structured_pair` for each delta.  A ratio above
    1 + 1e-10 certifies that the functional is not a norm; anything else is
    only "no violation found".
    """
    from .schema import set_to_json, step_to_json

    rng = np.random.default_rng(seed)
    X = params.transform.domain
    best = {"random": (-math.inf, None), "structured": (-math.inf, None)}
    for _ in range(trials):
        f, g = random_step_function(X, rng), random_step_function(X, rng)
        r = triangle_ratio(params, f, g)
        if r > best["random"][0]:
            best["random"] = (r, {"family": "random", "f": step_to_json(f), "g": step_to_json(g)})
        A, B = X.random_set(rng), X.random_set(rng)
        for d in deltas:
            f, g = structured_pair(A, B, d)
            r = triangle_ratio(params, f, g)
            if r > best["structured"][0]:
                best["structured"] = (r, {"family": "structured", "delta": d, "A": set_to_json(A), "B": set_to_json(B)})
    worst, wit = max(best.values(), key=lambda rw: rw[0])
    families = {name: {"value": r, "violated": r > 1 + TRIANGLE_TOL, "witness": w} for name, (r, w) in best.items()}
    return SearchReport("triangle", worst, worst > 1 + TRIANGLE_TOL, trials, seed, wit, {"families": families})


# --------------------------------------------------------------------------
# p < 1 divergence
# --------------------------------------------------------------------------


def p_growth_closed_form(p: float, N: int) -> list[float]:
    """(1/n) ||sum_{k<=n} 2^k chi_{A_k}|| with V(R(A_k)) = 2^(-kp), for n = 1..N."""
    out = []
    for n in range(1, N + 1):
        terms = []
        for k in range(1, n + 1):
            top = 2.0 ** (k + 1) - 2.0
            nxt = 2.0 ** (-(k + 1) * p) if k < n else 0.0
            terms.append(top**p * (2.0 ** (-k * p) - nxt))
        out.append(math.fsum(terms) ** (1 / p) / n)
    return out


def p_growth_sequence(p: float, N: int) -> list[float]:
    """Same sequence computed through the layer-cake engine.

    A_k = [0, 2^(-kp)) on the half-line, classical R and v = 1, so that
    V(R(A_k)) = 2^(-kp) and each ||2^k chi_{A_k}|| = 1.
    """
    if N < 1:
        raise InvalidInput("N must be at least 1")
    params = LorentzParams(p, UnitWeight(HALF_LINE), classical(HALF_LINE))
    sets = [IntervalUnion.prefix(2.0 ** (-k * p)) for k in range(1, N + 1)]
    out = []
    for n in range(1, N + 1):
        f = canonical_step([(2.0**k, sets[k - 1]) for k in range(1, n + 1)], HALF_LINE)
        out.append(lorentz_norm(params, f) / n)
    return out


def p_growth_experiment(p: float, N: int) -> list[float]:
    if not 0 < p < 1:
        raise InvalidInput("the growth experiment is only meaningful for 0 < p < 1")
    return p_growth_sequence(p, N)


# --------------------------------------------------------------------------
# equalities
# --------------------------------------------------------------------------


def lp_equality_check(R: SetTransformation, f: StepFunction, p: float) -> tuple[float, float]:
    """(||f||_{L^p}, ||f||_{Lambda^p_R(1)}); equal when R preserves measure."""
    if not R.flags.measure_preserving:
        raise PreconditionViolation(f"{R.kind} is not declared measure preserving")
    params = LorentzParams(p, UnitWeight(R.codomain), R)
    return f.lp_norm(p), lorentz_norm(params, f)


def _distinct_permutations(items: Sequence[float]):
    seen = set()
    for perm in permutations(items):
        if perm not in seen:
            seen.add(perm)
            yield perm


def saturation_check(f: Sequence[float], v: Sequence[float]) -> tuple[float, float]:
    """Discrete classical saturation on n unit atoms.

    LHS: max over every arrangement h of the multiset v of sum f_i h_i.
    RHS: sum f*_i v_i.
    """
    n = len(f)
    if len(v) != n:
        raise InvalidInput("v must have one entry per atom")
    if n > 8:
        raise SizeLimit(f"n={n} exceeds the brute-force limit 8")
    lhs = max(math.fsum(a * b for a, b in zip(f, h)) for h in _distinct_permutations(tuple(v)))
    return lhs, sorted_pairing(f, v)
