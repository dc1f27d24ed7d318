"""Single packing / single covering DP with big-element guessing and
forbidden sets.

Small elements are sorted by cover-per-pack ratio; the forbidden set for a
packing level p' is the cheapest prefix whose pack value reaches p - p', kept
out of the table so it can later complete any cell to full coverage.  Big
elements (pack value >= eps * bound) are handled by brute-force guessing.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .core import (
    BudgetExceededError,
    Instance,
    Rational,
    iter_bits,
    mask_of,
    subset_key,
    _rat,
)
from .greedy_dp import scale_instance

GUESS_BUDGET = 1_000_000


def _require_single_row(inst: Instance) -> None:
    if inst.p != 1 or inst.c != 1:
        raise ValueError("forbidden-set DP requires exactly one packing and one covering row")
    if not inst.is_integer():
        raise ValueError("forbidden-set DP requires integer data")


@dataclass(frozen=True)
class ForbiddenIndex:
    """Prefix index over the small elements.

    ``order`` sorts small elements by non-increasing C/P (pack-value-0
    elements first, ties by element index) and ``prefix_pack`` holds the
    running pack value, so the forbidden set for any packing level is a
    prefix length.
    """

    order: tuple
    prefix_pack: tuple       # prefix_pack[i] = pack value of the first i elements
    prefix_cover: tuple
    pack_bound: int

    def prefix_len(self, p_prime: int) -> int:
        """Length of the smallest prefix with pack value >= bound - p_prime
        (all of the small elements if even that falls short)."""
        need = self.pack_bound - p_prime
        lo, hi = 0, len(self.order)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.prefix_pack[mid] >= need:
                hi = mid
            else:
                lo = mid + 1
        return lo

    def forbidden_mask(self, p_prime: int) -> int:
        return mask_of(self.order[: self.prefix_len(p_prime)])

    def forbidden_pack(self, p_prime: int) -> int:
        return self.prefix_pack[self.prefix_len(p_prime)]

    def forbidden_cover(self, p_prime: int) -> int:
        return self.prefix_cover[self.prefix_len(p_prime)]


def big_elements(inst: Instance, epsilon: Rational) -> int:
    """Mask of elements with pack value >= epsilon * bound."""
    _require_single_row(inst)
    epsilon = _rat(epsilon)
    threshold = epsilon * inst.pack_bound[0]
    return mask_of(i for i, v in enumerate(inst.packing[0]) if v >= threshold)


def build_forbidden_index(inst: Instance, epsilon: Rational,
                          small_mask: int | None = None) -> ForbiddenIndex:
    _require_single_row(inst)
    if small_mask is None:
        small_mask = ((1 << inst.n) - 1) & ~big_elements(inst, epsilon)
    pack = inst.packing[0]
    cover = inst.covering[0]

    def ratio_key(i):
        # non-increasing C/P; P = 0 sorts first (unbounded ratio)
        if pack[i] == 0:
            return (0, 0, i)
        return (1, -Fraction(cover[i], pack[i]), i)

    order = tuple(sorted(iter_bits(small_mask), key=ratio_key))
    prefix_pack = [0]
    prefix_cover = [0]
    for i in order:
        prefix_pack.append(prefix_pack[-1] + int(pack[i]))
        prefix_cover.append(prefix_cover[-1] + int(cover[i]))
    return ForbiddenIndex(
        order=order,
        prefix_pack=tuple(prefix_pack),
        prefix_cover=tuple(prefix_cover),
        pack_bound=int(inst.pack_bound[0]),
    )


@dataclass
class ForbiddenOutcome:
    found: bool
    best_set: int
    best_value: object
    guesses_tried: int
    cells: dict              # final guess's populated cells, for diagnostics
    all_tables: list         # (guess mask, table) per guess when retained


def _enumerate_guesses(inst: Instance, big_mask: int, epsilon: Fraction):
    big = list(iter_bits(big_mask))
    max_size = min(len(big), math.ceil(1 / epsilon))
    count = sum(math.comb(len(big), k) for k in range(max_size + 1))
    if count > GUESS_BUDGET:
        raise BudgetExceededError(
            f"{count} big-element guesses exceed budget {GUESS_BUDGET}")
    pack = inst.packing[0]
    bound = inst.pack_bound[0]
    for size in range(max_size + 1):
        for combo in combinations(big, size):
            if sum(pack[i] for i in combo) <= bound:
                yield mask_of(combo)


def _run_single_dp(inst: Instance, guess_mask: int, index: ForbiddenIndex,
                   excluded_mask: int, forb_cache: dict):
    """Populate the (cover, pack) table seeded with the guess; forward form.

    Cells are swept in ascending pack level, then ascending cover value, so
    every predecessor is final before it is extended (zero-pack elements only
    move to higher cover within a level).  Extensions from (c', p') skip the
    cell itself, the forbidden prefix at level p', and the non-guessed big
    elements, which the guessing step removed from the instance.
    """
    pack = tuple(int(v) for v in inst.packing[0])
    cover = tuple(int(v) for v in inst.covering[0])
    p_bound = int(inst.pack_bound[0])
    oracle = inst.objective
    n = inst.n

    g_cov = sum(cover[i] for i in iter_bits(guess_mask))
    g_pak = sum(pack[i] for i in iter_bits(guess_mask))
    table = {(g_cov, g_pak): (guess_mask, oracle.eval(guess_mask))}
    by_level: dict = {g_pak: [g_cov]}
    for p_cur in range(p_bound + 1):
        worklist = sorted(by_level.get(p_cur, ()))
        if not worklist:
            continue
        if p_cur not in forb_cache:
            forb_cache[p_cur] = index.forbidden_mask(p_cur)
        forb = forb_cache[p_cur] | excluded_mask
        wi = 0
        while wi < len(worklist):
            c_cur = worklist[wi]
            wi += 1
            mask, value = table[(c_cur, p_cur)]
            state = oracle.begin(mask)
            blocked = mask | forb
            for elem in range(n):
                bit = 1 << elem
                if blocked & bit:
                    continue
                p_new = p_cur + pack[elem]
                if p_new > p_bound:
                    continue
                c_new = c_cur + cover[elem]
                new_value = value + oracle.gain(state, elem)
                key = (c_new, p_new)
                cur = table.get(key)
                if (cur is None or new_value > cur[1]
                        or (new_value == cur[1]
                            and subset_key(mask | bit) < subset_key(cur[0]))):
                    table[key] = (mask | bit, new_value)
                    if cur is None:
                        if p_new == p_cur:
                            # zero-pack extension: lands ahead of the scan
                            bisect.insort(worklist, c_new)
                        else:
                            by_level.setdefault(p_new, []).append(c_new)
    return table


def forbidden_dp_solve(inst: Instance, epsilon: Rational,
                       skip_guessing: bool = False,
                       keep_all_tables: bool = False) -> ForbiddenOutcome:
    """Best of T[c', p'] + F_{p'} with full coverage, over all big-element
    guesses."""
    _require_single_row(inst)
    epsilon = Fraction(_rat(epsilon))
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    c_bound = int(inst.cover_bound[0])
    oracle = inst.objective

    if skip_guessing:
        big_mask = 0
        guesses = [0]
    else:
        big_mask = big_elements(inst, epsilon)
        guesses = list(_enumerate_guesses(inst, big_mask, epsilon))
    small_mask = ((1 << inst.n) - 1) & ~big_mask
    index = build_forbidden_index(inst, epsilon, small_mask=small_mask)

    best = None
    last_cells = {}
    all_tables = []
    forb_cache: dict = {}
    for guess_mask in guesses:
        table = _run_single_dp(inst, guess_mask, index,
                               excluded_mask=big_mask & ~guess_mask,
                               forb_cache=forb_cache)
        last_cells = table
        if keep_all_tables:
            all_tables.append((guess_mask, table))
        for (c_cur, p_cur), (mask, _value) in table.items():
            if c_cur + index.forbidden_cover(p_cur) < c_bound:
                continue
            candidate = mask | index.forbidden_mask(p_cur)
            val = oracle.eval(candidate)
            if (best is None or val > best[1]
                    or (val == best[1] and subset_key(candidate) < subset_key(best[0]))):
                best = (candidate, val)
    if best is None:
        return ForbiddenOutcome(False, 0, 0, len(guesses), last_cells, all_tables)
    return ForbiddenOutcome(True, best[0], best[1], len(guesses), last_cells,
                            all_tables)


def cardinality_solve(inst: Instance, k: int) -> ForbiddenOutcome:
    """Cardinality packing row: no guessing needed and the unit-weight
    forbidden prefixes never overshoot, so the bound k holds exactly."""
    _require_single_row(inst)
    if any(v != 1 for v in inst.packing[0]):
        raise ValueError("cardinality variant requires an all-ones packing row")
    if inst.pack_bound[0] != k:
        raise ValueError("pack bound must equal k")
    if k < 0:
        raise ValueError("k must be non-negative")
    return forbidden_dp_solve(inst, Fraction(1, max(2 * k, 2)), skip_guessing=True)


@dataclass
class PolynomialOutcome:
    found: bool
    best_set: int
    best_value: object
    cover_ratio: object
    pack_ratio: object


def solve_polynomial(inst: Instance, epsilon: Rational) -> PolynomialOutcome:
    """Scale to integers with parameter eps/2, solve, and map back.

    The output covers at least (1 - eps) and packs at most (1 + eps) of the
    original bounds while keeping the DP's value guarantee.
    """
    if inst.p != 1 or inst.c != 1:
        raise ValueError("solve_polynomial requires exactly one packing and one covering row")
    epsilon = Fraction(_rat(epsilon))
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    scaled = scale_instance(inst, epsilon / 2).scaled
    outcome = forbidden_dp_solve(scaled, epsilon / 2)
    if not outcome.found:
        return PolynomialOutcome(False, 0, 0, None, None)
    mask = outcome.best_set
    loads_p = inst.pack_value(mask)
    loads_c = inst.cover_value(mask)
    pack_ratio = (Fraction(loads_p[0]) / inst.pack_bound[0]
                  if inst.pack_bound[0] > 0 else Fraction(0))
    cover_ratio = (Fraction(loads_c[0]) / inst.cover_bound[0]
                   if inst.cover_bound[0] > 0 else None)
    return PolynomialOutcome(
        found=True,
        best_set=mask,
        best_value=inst.objective.eval(mask),
        cover_ratio=cover_ratio,
        pack_ratio=pack_ratio,
    )
