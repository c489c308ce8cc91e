"""The (s, p, t) bin-ball game with an optimal adversary.

Throw s balls independently into r bins, each bin receiving any given
ball with probability at most p; an adversary then deletes t balls so
that the survivors occupy as few bins as possible.  The game's cost is
the number of bins the s - t survivors still occupy.  Emptying whole bins
cheapest-first is an optimal adversary: each ball spent on a larger bin
frees at most as many bins as one spent on a smaller bin, so the greedy
exchange argument applies; a brute-force oracle cross-checks this on
small instances.

Monte-Carlo verifiers measure how often the cost clears the two
concentration thresholds, (1-mu)(1-sp)s - t and 1/(20p).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np

from .errors import ParameterError

_PROB_TOL = 1e-12


@dataclass(frozen=True)
class GameSpec:
    s: int
    p: float
    t: int
    r: int | None = None
    probs: tuple[float, ...] | None = None
    mu: float = 0.3

    def resolve(self) -> "GameSpec":
        """Fill defaults (uniform over ceil(1/p) bins) and validate."""
        if self.s < 0:
            raise ParameterError("ball count s must be non-negative")
        if not 0 < self.p <= 1:
            raise ParameterError("probability cap p must be in (0, 1]")
        if not 0 <= self.t <= max(self.s, 0):
            raise ParameterError("removal budget t must be in [0, s]")
        if not 0 < self.mu < 1:
            raise ParameterError("slack mu must be in (0, 1)")
        r = self.r if self.r is not None else math.ceil(1 / self.p)
        if r < 1 / self.p:
            raise ParameterError(f"need r >= 1/p bins: r={r}, 1/p={1 / self.p:.6g}")
        if self.probs is None:
            probs = tuple([1.0 / r] * r)
        else:
            probs = tuple(self.probs)
            if len(probs) != r:
                raise ParameterError("probs length must equal bin count r")
            if abs(sum(probs) - 1.0) > _PROB_TOL:
                raise ParameterError("bin probabilities must sum to 1")
            if max(probs) > self.p + _PROB_TOL:
                raise ParameterError("every bin probability must be <= p")
        return GameSpec(self.s, self.p, self.t, r, probs, self.mu)


@dataclass
class GameOutcome:
    occupancy: np.ndarray
    cost: int


def optimal_removal(occupancy, t: int) -> int:
    """Occupied-bin count after an optimal t-ball removal (empty whole bins
    in ascending order of occupancy while the budget lasts)."""
    counts = sorted(c for c in occupancy if c > 0)
    if t > sum(counts):
        raise ParameterError("cannot remove more balls than were thrown")
    emptied = 0
    budget = t
    for c in counts:
        if budget < c:
            break
        budget -= c
        emptied += 1
    return len(counts) - emptied


def exhaustive_removal(occupancy, t: int) -> int:
    """Brute-force oracle: minimum occupied-bin count over every way of
    removing t balls (per-bin removal vectors enumerated recursively)."""
    occ = [c for c in occupancy if c > 0]
    s = sum(occ)
    if s > 16:
        raise ParameterError(f"instance too large for enumeration: s={s}")
    if t > s:
        raise ParameterError("cannot remove more balls than were thrown")

    best = len(occ)

    def recurse(i: int, budget: int, nonempty: int) -> None:
        nonlocal best
        if nonempty >= best:
            return
        if i == len(occ):
            if budget == 0:
                best = nonempty
            return
        for take in range(min(budget, occ[i]) + 1):
            still = 1 if take < occ[i] else 0
            recurse(i + 1, budget - take, nonempty + still)

    recurse(0, t, 0)
    return best


def play(spec: GameSpec, rng: np.random.Generator) -> GameOutcome:
    """Run one game: multinomial throw, then the optimal adversary."""
    spec = spec.resolve()
    occupancy = rng.multinomial(spec.s, spec.probs)
    return GameOutcome(occupancy, optimal_removal(occupancy, min(spec.t, spec.s)))


def simulate_costs(spec: GameSpec, trials: int, rng: np.random.Generator) -> np.ndarray:
    """Vectorized costs of independent games.

    Equivalent to the greedy adversary per trial: with per-trial occupancy
    sorted ascending, the cost is the number of prefix-sums exceeding t
    (zero bins contribute nothing and the budget empties the cheapest bins
    first).  Trials run in fixed-size chunks off one generator stream.
    """
    spec = spec.resolve()
    t = min(spec.t, spec.s)
    costs = np.empty(trials, dtype=np.int64)
    chunk = max(1, min(trials, (1 << 21) // max(spec.r, 1)))
    done = 0
    while done < trials:
        size = min(chunk, trials - done)
        occ = rng.multinomial(spec.s, spec.probs, size=size)
        occ.sort(axis=1)
        prefix = occ.cumsum(axis=1)
        costs[done : done + size] = (prefix > t).sum(axis=1)
        done += size
    return costs


@dataclass
class LemmaCheck:
    lemma: int
    spec: GameSpec
    trials: int
    threshold: float
    required: float
    frequency: float
    passed: bool
    mean_cost: float = field(default=float("nan"))

    def csv_row(self) -> dict:
        return {
            "lemma": self.lemma,
            "s": self.spec.s,
            "r": self.spec.r,
            "p": self.spec.p,
            "t": self.spec.t,
            "mu": self.spec.mu,
            "trials": self.trials,
            "threshold": self.threshold,
            "frequency": self.frequency,
            "required": self.required,
            "pass": self.passed,
        }


def verify_cost_floor(spec: GameSpec, trials: int, rng: np.random.Generator) -> LemmaCheck:
    """Check the additive cost floor (1-mu)(1-sp)s - t, which must hold
    with probability at least 1 - exp(-mu^2 s / 3) when sp <= 1/3."""
    spec = spec.resolve()
    if spec.s * spec.p > 1 / 3 + _PROB_TOL:
        raise ParameterError(
            f"hypothesis requires s*p <= 1/3: s*p = {spec.s * spec.p:.6g}"
        )
    threshold = (1 - spec.mu) * (1 - spec.s * spec.p) * spec.s - spec.t
    required = 1 - math.exp(-spec.mu**2 * spec.s / 3)
    costs = simulate_costs(spec, trials, rng)
    frequency = float(np.mean(costs >= threshold))
    slack = 3 * math.sqrt(max(required * (1 - required), 0.0) / trials)
    return LemmaCheck(
        lemma=3,
        spec=spec,
        trials=trials,
        threshold=threshold,
        required=required,
        frequency=frequency,
        passed=frequency >= required - slack,
        mean_cost=float(costs.mean()),
    )


# Calibration: the multiplicative floor holds "with probability
# 1 - 1/2^Omega(s)" with an unspecified constant; 0.99 is the pinned bar.
MULTIPLICATIVE_FLOOR_PASS_BAR = 0.99


def verify_cost_floor_multiplicative(
    spec: GameSpec, trials: int, rng: np.random.Generator
) -> LemmaCheck:
    """Check the multiplicative cost floor 1/(20p), which must hold with
    overwhelming probability when s/2 >= t and s/2 >= 1/p."""
    spec = spec.resolve()
    if spec.s / 2 < spec.t:
        raise ParameterError(f"hypothesis requires s/2 >= t: s={spec.s}, t={spec.t}")
    if spec.s / 2 < 1 / spec.p:
        raise ParameterError(
            f"hypothesis requires s/2 >= 1/p: s={spec.s}, 1/p={1 / spec.p:.6g}"
        )
    threshold = 1 / (20 * spec.p)
    required = MULTIPLICATIVE_FLOOR_PASS_BAR
    costs = simulate_costs(spec, trials, rng)
    frequency = float(np.mean(costs >= threshold))
    return LemmaCheck(
        lemma=4,
        spec=spec,
        trials=trials,
        threshold=threshold,
        required=required,
        frequency=frequency,
        passed=frequency >= required,
        mean_cost=float(costs.mean()),
    )


def all_occupancies(s_max: int, r: int):
    """Every occupancy vector (as a sorted tuple) with r bins and at most
    s_max balls; enumeration helper for oracle cross-checks."""
    for comb in combinations_with_replacement(range(s_max + 1), r):
        if sum(comb) <= s_max:
            yield comb
