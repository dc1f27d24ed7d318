"""Guess enumeration, multilinear relaxation, continuous greedy and
randomized rounding.

The pipeline works on a normalized instance (all bounds equal to 1).  A
guess fixes chosen elements E1, discarded elements E0 and a geometric
estimate of the optimum's covering values; the residual problem over the
remaining elements is relaxed, ascended by discretized continuous greedy,
scaled down by 1/(1+delta), rounded independently, and stripped of the
elements that are large in some critical packing row.  The best rounded set
that packs within the bounds and covers at least (1-eps) wins.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Optional, Sequence

from .core import (
    InfeasibleError,
    Instance,
    Params,
    SubmodularOracle,
    iter_bits,
    mask_of,
    normalize,
    popcount,
    subset_key,
    to_fraction,
)
from .lp import linear_max_over_polytope


class GuessInfeasibleError(InfeasibleError):
    """The residual polytope of a guess is empty."""


# ---------------------------------------------------------------------------
# guesses


@dataclass(frozen=True)
class Guess:
    """A triplet (discarded, chosen, cover targets) with its derived data.

    All derived fields are exact rationals computed against the normalized
    instance: residuals, critical row sets, and the large-element masks for
    non-critical rows (which a consistent guess must keep empty) and for
    critical packing rows (stripped after rounding).
    """

    instance: Instance = field(compare=False)
    discarded: int               # E0 bitmask
    chosen: int                  # E1 bitmask
    cover_targets: tuple         # c', one positive rational per covering row
    alpha: Fraction
    beta: Fraction
    delta: Fraction
    gamma: Fraction
    residual_pack: tuple = field(init=False, compare=False)
    residual_cover: tuple = field(init=False, compare=False)
    critical_pack: frozenset = field(init=False, compare=False)
    critical_cover: frozenset = field(init=False, compare=False)
    large_pack: int = field(init=False, compare=False)
    large_cover: int = field(init=False, compare=False)
    critical_large: int = field(init=False, compare=False)
    undetermined: int = field(init=False, compare=False)

    def __post_init__(self):
        inst = self.instance
        if len(self.cover_targets) != inst.c:
            raise ValueError("cover target per covering row required")
        chosen_pack = inst.pack_value(self.chosen)
        chosen_cover = inst.cover_value(self.chosen)
        r = tuple(1 - v for v in chosen_pack)
        s = tuple(max(Fraction(0), Fraction(t) - v)
                  for t, v in zip(self.cover_targets, chosen_cover))
        y = frozenset(i for i, v in enumerate(r) if v <= self.delta)
        z = frozenset(j for j, v in enumerate(s)
                      if v <= self.delta * self.cover_targets[j])
        undet = ((1 << inst.n) - 1) & ~(self.discarded | self.chosen)
        large_p = mask_of(
            ell for ell in iter_bits(undet)
            if any(inst.packing[i][ell] >= self.alpha * r[i]
                   for i in range(inst.p) if i not in y))
        large_c = mask_of(
            ell for ell in iter_bits(undet)
            if any(inst.covering[j][ell] >= self.alpha * s[j]
                   for j in range(inst.c) if j not in z))
        large_crit = mask_of(
            ell for ell in iter_bits(undet)
            if any(inst.packing[i][ell] >= self.beta * r[i] for i in y))
        object.__setattr__(self, "residual_pack", r)
        object.__setattr__(self, "residual_cover", s)
        object.__setattr__(self, "critical_pack", y)
        object.__setattr__(self, "critical_cover", z)
        object.__setattr__(self, "large_pack", large_p)
        object.__setattr__(self, "large_cover", large_c)
        object.__setattr__(self, "critical_large", large_crit)
        object.__setattr__(self, "undetermined", undet)

    def is_consistent(self) -> bool:
        return (self.discarded & self.chosen == 0
                and all(t >= 1 for t in self.cover_targets)
                and all(v >= 0 for v in self.residual_pack)
                and self.large_pack == 0 and self.large_cover == 0)

    def residual_elements(self) -> tuple:
        return tuple(iter_bits(self.undetermined))


def residual_objective(guess: Guess, t_mask: int):
    """g(T) = f(T + E1) - f(E1): monotone, submodular, zero on the empty set."""
    if t_mask & ~guess.undetermined:
        raise ValueError("T must avoid both chosen and discarded elements")
    oracle = guess.instance.objective
    return oracle.eval(t_mask | guess.chosen) - oracle.eval(guess.chosen)


def greedy_marginal_order(oracle: SubmodularOracle, mask: int) -> tuple:
    """Order a set so each element has maximal marginal given its prefix."""
    remaining = list(iter_bits(mask))
    order = []
    cur = 0
    while remaining:
        state = oracle.begin(cur)
        best = max(remaining, key=lambda e: (oracle.gain(state, e), -e))
        order.append(best)
        remaining.remove(best)
        cur |= 1 << best
    return tuple(order)


def correct_guess_for(inst: Instance, params: Params, optimum: int) -> Guess:
    """The guess the existence argument constructs for a known optimum:
    chosen = top-gamma greedy prefix plus the optimum's large elements,
    cover targets on the geometric grid just below the optimum's coverage."""
    oracle = inst.objective
    order = greedy_marginal_order(oracle, optimum)
    gamma_count = min(len(order), int(math.ceil(params.gamma)))
    top = mask_of(order[:gamma_count])
    threshold = params.alpha * params.delta
    cov = inst.cover_value(optimum)
    targets = tuple(_grid_floor(Fraction(v), params.delta) for v in cov)
    big = mask_of(
        ell for ell in iter_bits(optimum)
        if any(inst.packing[i][ell] >= threshold for i in range(inst.p))
        or any(inst.covering[j][ell] >= threshold * targets[j] for j in range(inst.c)))
    chosen = top | big
    discarded = _build_discarded(inst, chosen, targets, params)
    return Guess(instance=inst, discarded=discarded, chosen=chosen,
                 cover_targets=targets, alpha=params.alpha, beta=params.beta,
                 delta=params.delta, gamma=params.gamma)


def is_correct(guess: Guess, optimum: int) -> bool:
    """The four correctness clauses against a fixed optimal solution."""
    inst = guess.instance
    if guess.chosen & ~optimum:
        return False
    if guess.discarded & optimum:
        return False
    order = greedy_marginal_order(inst.objective, optimum)
    # gamma may exceed |O|; then all of O must be chosen
    gamma_count = min(len(order), int(math.ceil(guess.gamma)))
    if mask_of(order[:gamma_count]) & ~guess.chosen:
        return False
    cov = inst.cover_value(optimum)
    for t, v in zip(guess.cover_targets, cov):
        if not (1 <= t <= v < (1 + guess.delta) * t):
            return False
    return True


def _grid_floor(value: Fraction, delta: Fraction) -> Fraction:
    """Largest (1+delta)^j <= value with j >= 0 (value must be >= 1)."""
    if value < 1:
        raise ValueError("grid point requires value >= 1")
    step = 1 + delta
    point = Fraction(1)
    while point * step <= value:
        point *= step
    return point


def _build_discarded(inst: Instance, chosen: int, targets: tuple,
                     params: Params) -> int:
    """E0 for a candidate (E1, c'): high-marginal leftovers plus the large
    elements of the intermediate guess H = (empty, E1, c')."""
    oracle = inst.objective
    f_chosen = oracle.eval(chosen)
    threshold = f_chosen / params.gamma
    state = oracle.begin(chosen)
    high = mask_of(
        ell for ell in range(inst.n)
        if not (chosen >> ell) & 1 and oracle.gain(state, ell) > threshold)
    h = Guess(instance=inst, discarded=0, chosen=chosen, cover_targets=targets,
              alpha=params.alpha, beta=params.beta, delta=params.delta,
              gamma=params.gamma)
    return high | h.large_pack | h.large_cover


@dataclass
class GuessList:
    guesses: list
    truncated: bool
    pairs_examined: int


def enumerate_guesses(inst: Instance, params: Params, budget: int = 100_000) -> GuessList:
    """All consistent guesses from the (cover grid) x (chosen subsets)
    product, stopping with a truncation flag once the budget is spent."""
    n = inst.n
    if any(b != 1 for b in inst.pack_bound) or any(b != 1 for b in inst.cover_bound):
        raise ValueError("guess enumeration expects a normalized instance")
    grid_max = (0 if n <= 1 else
                math.ceil(math.log(n) / math.log(1 + float(params.delta))))
    # every target tuple costs at least one unit of budget, so a longer grid
    # could never be reached anyway (matters under the strict schedule, whose
    # tiny delta would otherwise materialize thousands of exact powers)
    grid = []
    point = Fraction(1)
    for _ in range(min(grid_max, budget) + 1):
        grid.append(point)
        point *= 1 + params.delta
    size_cap = min(n, math.ceil(params.gamma + (inst.p + inst.c) / (params.alpha * params.delta)))

    guesses = []
    pairs = 0
    truncated = False
    for targets in _product_tuples(grid, inst.c):
        for chosen in _subsets_by_size(n, size_cap):
            if pairs >= budget:
                truncated = True
                break
            pairs += 1
            if any(v > 1 for v in inst.pack_value(chosen)):
                continue
            discarded = _build_discarded(inst, chosen, targets, params)
            guess = Guess(instance=inst, discarded=discarded, chosen=chosen,
                          cover_targets=targets, alpha=params.alpha,
                          beta=params.beta, delta=params.delta,
                          gamma=params.gamma)
            if guess.is_consistent():
                guesses.append(guess)
        if truncated:
            break
    return GuessList(guesses=guesses, truncated=truncated, pairs_examined=pairs)


def _product_tuples(grid, c):
    if c == 0:
        yield ()
        return
    for rest in _product_tuples(grid, c - 1):
        for v in grid:
            yield (v,) + rest


def _subsets_by_size(n, cap):
    for size in range(min(n, cap) + 1):
        for combo in combinations(range(n), size):
            yield mask_of(combo)


# ---------------------------------------------------------------------------
# multilinear estimation and continuous greedy


@dataclass(frozen=True)
class MultilinearEstimate:
    mean: float
    stderr: float
    mean_exact: object       # exact rational average of the sampled values


def multilinear_estimate(oracle: SubmodularOracle, x: Sequence[float],
                         samples: int, seed: int) -> MultilinearEstimate:
    """Monte-Carlo estimate of E[f(R)] with elements drawn independently."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if len(x) != oracle.n:
        raise ValueError("probability vector length mismatch")
    rng = random.Random(seed)
    fixed = 0
    variable = []
    for i, p in enumerate(x):
        if not 0 <= p <= 1:
            raise ValueError("probabilities must lie in [0, 1]")
        if p == 1:
            fixed |= 1 << i
        elif p > 0:
            variable.append((i, p))
    total = Fraction(0)
    total_sq = Fraction(0)
    for _ in range(samples):
        mask = fixed
        for i, p in enumerate(x):
            if 0 < p < 1:
                if rng.random() < p:
                    mask |= 1 << i
        v = Fraction(oracle.eval(mask))
        total += v
        total_sq += v * v
    mean = total / samples
    if samples > 1:
        var = (total_sq - samples * mean * mean) / (samples - 1)
        stderr = math.sqrt(max(0.0, float(var)) / samples)
    else:
        stderr = float("nan")
    return MultilinearEstimate(mean=float(mean), stderr=stderr, mean_exact=mean)


def exact_multilinear_linear(oracle, x):
    """F(x) for a linear oracle: w . x + f(empty)."""
    return sum(float(w) * float(p) for w, p in zip(oracle.weights, x))


def continuous_greedy(guess: Guess, steps: int = 100,
                      samples_per_grad: int = 200, seed: int = 0) -> dict:
    """Discretized ascent over the residual polytope.

    Returns the fractional point as {element: float}.  Raises
    GuessInfeasibleError when the polytope is empty.
    """
    inst = guess.instance
    elements = guess.residual_elements()
    pack_rows = [[inst.packing[i][e] for e in elements] for i in range(inst.p)]
    cover_rows = [[inst.covering[j][e] for e in elements] for j in range(inst.c)]
    status, _ = linear_max_over_polytope(
        [0.0] * len(elements), pack_rows, guess.residual_pack,
        cover_rows, guess.residual_cover)
    if status != "optimal":
        raise GuessInfeasibleError("empty residual polytope")
    if not elements:
        return {}

    oracle = inst.objective
    rng = random.Random(seed)
    x = [0.0] * len(elements)
    for _step in range(steps):
        weights = [0.0] * len(elements)
        for _ in range(samples_per_grad):
            mask = guess.chosen
            for idx, e in enumerate(elements):
                if x[idx] > 0 and rng.random() < x[idx]:
                    mask |= 1 << e
            state = oracle.begin(mask)
            for idx, e in enumerate(elements):
                if not (mask >> e) & 1:
                    weights[idx] += float(oracle.gain(state, e))
        weights = [w / samples_per_grad for w in weights]
        status, v = linear_max_over_polytope(
            weights, pack_rows, guess.residual_pack,
            cover_rows, guess.residual_cover)
        if status != "optimal":
            raise GuessInfeasibleError("residual polytope became unsolvable")
        x = [min(1.0, xi + vi / steps) for xi, vi in zip(x, v)]
    return {e: x[idx] for idx, e in enumerate(elements)}


# ---------------------------------------------------------------------------
# rounding


@dataclass(frozen=True)
class RoundOutcome:
    sampled: int             # R_D
    kept: int                # R'_D = R_D minus the critical-large elements
    solution: int            # S_D = E1 + R'_D


def round_and_filter(guess: Guess, x_bar: dict, seed: int) -> RoundOutcome:
    """Independent inclusion with probabilities x_bar, then strip the
    elements that are large in some critical packing row."""
    rng = random.Random(seed)
    sampled = 0
    for e in sorted(x_bar):
        p = x_bar[e]
        if not 0 <= p <= 1:
            raise ValueError("x_bar must lie in [0, 1]")
        if not (guess.undetermined >> e) & 1:
            raise ValueError("x_bar supported outside the residual elements")
        if p > 0 and rng.random() < p:
            sampled |= 1 << e
    kept = sampled & ~guess.critical_large
    return RoundOutcome(sampled=sampled, kept=kept, solution=guess.chosen | kept)


# ---------------------------------------------------------------------------
# the full pipeline


@dataclass
class GuessDiagnostics:
    chosen_size: int
    discarded_size: int
    critical_pack_rows: int
    critical_cover_rows: int
    critical_large_size: int
    filter_pass: int
    filter_fail: int
    infeasible_polytope: bool
    best_value: object


@dataclass
class MainResult:
    found: bool
    solution: int
    value: object
    cover_ratio: object
    pack_ratio: object
    trials: int
    guesses_enumerated: int
    truncated: bool
    diagnostics: list


def solve_main(inst: Instance, epsilon, seed: int = 0, budget: int = 100_000,
               params: Optional[Params] = None, trials: int = 20,
               steps: int = 100, samples_per_grad: int = 200) -> MainResult:
    """Enumerate guesses, ascend, round repeatedly, and keep the best set
    that packs within the bounds and covers at least (1 - eps).

    Without an explicit ``params`` override the analysis schedule is used;
    its constants are honest but astronomically conservative, so practical
    runs pass Params.from_delta with a workable delta.
    """
    epsilon = to_fraction(epsilon)
    norm = normalize(inst)
    b = max(1, norm.p + norm.c)
    if params is None:
        params = Params.from_epsilon(epsilon, b)
    enum = enumerate_guesses(norm, params, budget=budget)

    one = Fraction(1)
    need_cover = 1 - epsilon
    best = None
    diagnostics = []
    seen_residuals = set()
    for g_idx, guess in enumerate(enum.guesses):
        # identical residual problems (same E0/E1 and clamped cover residuals)
        # would be solved identically; skip repeats
        sig = (guess.discarded, guess.chosen, guess.residual_cover)
        if sig in seen_residuals:
            continue
        seen_residuals.add(sig)
        diag = GuessDiagnostics(
            chosen_size=popcount(guess.chosen),
            discarded_size=popcount(guess.discarded),
            critical_pack_rows=len(guess.critical_pack),
            critical_cover_rows=len(guess.critical_cover),
            critical_large_size=popcount(guess.critical_large),
            filter_pass=0, filter_fail=0, infeasible_polytope=False,
            best_value=None)
        diagnostics.append(diag)
        try:
            x_star = continuous_greedy(
                guess, steps=steps, samples_per_grad=samples_per_grad,
                seed=_child_seed(seed, g_idx, 0))
        except GuessInfeasibleError:
            diag.infeasible_polytope = True
            continue
        scale = 1 / (1 + float(params.delta))
        x_bar = {e: p * scale for e, p in x_star.items()}
        # trial 0 is the empty rounding outcome (always a possible draw)
        candidates = [guess.chosen]
        for t in range(1, trials + 1):
            out = round_and_filter(guess, x_bar, seed=_child_seed(seed, g_idx, t))
            candidates.append(out.solution)
        for cand in candidates:
            loads_p = norm.pack_value(cand)
            loads_c = norm.cover_value(cand)
            if all(v <= one for v in loads_p) and all(v >= need_cover for v in loads_c):
                diag.filter_pass += 1
                val = norm.objective.eval(cand)
                if diag.best_value is None or val > diag.best_value:
                    diag.best_value = val
                if (best is None or val > best[1]
                        or (val == best[1] and subset_key(cand) < subset_key(best[0]))):
                    best = (cand, val)
            else:
                diag.filter_fail += 1

    if best is None:
        return MainResult(found=False, solution=0, value=0, cover_ratio=None,
                          pack_ratio=None, trials=trials,
                          guesses_enumerated=len(enum.guesses),
                          truncated=enum.truncated, diagnostics=diagnostics)
    mask, value = best
    loads_p = norm.pack_value(mask)
    loads_c = norm.cover_value(mask)
    return MainResult(
        found=True, solution=mask, value=value,
        cover_ratio=min(loads_c) if loads_c else None,
        pack_ratio=max(loads_p) if loads_p else Fraction(0),
        trials=trials, guesses_enumerated=len(enum.guesses),
        truncated=enum.truncated, diagnostics=diagnostics)


def _child_seed(seed: int, guess_index: int, trial: int) -> int:
    return (seed * 1_000_003 + guess_index * 10_007 + trial) & 0x7FFFFFFF
