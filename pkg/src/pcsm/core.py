"""Instance model, submodular oracles and feasibility predicates.

Everything in this module is exact: matrices, bounds and oracle values are
Fractions (or ints, which mix freely with Fractions).  Subsets of the ground
set are plain int bitmasks; Python ints are unbounded so this representation
works for any n.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence, Union

Rational = Union[int, Fraction]


class PcsmError(Exception):
    """Base class for solver errors."""


class BudgetExceededError(PcsmError):
    """A configured enumeration/table budget would be exceeded; refusing."""


class InfeasibleError(PcsmError):
    """The instance (or a residual subproblem) has no feasible solution."""


# ---------------------------------------------------------------------------
# bitmask subsets


def mask_of(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_to_tuple(mask: int) -> tuple:
    return tuple(iter_bits(mask))


def subset_key(mask: int) -> tuple:
    """Sort key realizing the 'lexicographically smallest subset' tie-break."""
    return mask_to_tuple(mask)


def popcount(mask: int) -> int:
    return bin(mask).count("1")


# ---------------------------------------------------------------------------
# submodular oracles


class SubmodularOracle:
    """Value oracle for a monotone submodular set function.

    Subclasses implement ``eval(mask)`` returning an exact rational and must
    be monotone and submodular; both properties are exercised by sampled
    checks in the test suite rather than assumed.
    """

    kind = "abstract"
    n = 0

    def eval(self, mask: int) -> Rational:
        raise NotImplementedError

    def begin(self, mask: int):
        """Reusable state for repeated marginal queries against one base set."""
        return (mask, self.eval(mask))

    def gain(self, state, elem: int) -> Rational:
        mask, value = state
        return self.eval(mask | (1 << elem)) - value

    def marginal(self, mask: int, elem: int) -> Rational:
        """f(S + elem) - f(S); override when a faster form exists."""
        bit = 1 << elem
        if mask & bit:
            raise ValueError(f"element {elem} already in subset")
        return self.gain(self.begin(mask), elem)

    def to_json_obj(self) -> dict:
        raise NotImplementedError


class LinearOracle(SubmodularOracle):
    kind = "linear"

    def __init__(self, weights: Sequence[Rational]):
        self.weights = tuple(_rat(w) for w in weights)
        if any(w < 0 for w in self.weights):
            raise ValueError("linear weights must be non-negative")
        self.n = len(self.weights)

    def eval(self, mask: int) -> Rational:
        return sum(self.weights[i] for i in iter_bits(mask))

    def begin(self, mask: int):
        return None

    def gain(self, state, elem: int) -> Rational:
        return self.weights[elem]

    def marginal(self, mask: int, elem: int) -> Rational:
        if mask & (1 << elem):
            raise ValueError(f"element {elem} already in subset")
        return self.weights[elem]

    def to_json_obj(self) -> dict:
        return {"kind": "linear", "weights": [_rat_json(w) for w in self.weights]}


class CoverageOracle(SubmodularOracle):
    """Weighted coverage: f(S) = total weight of universe items hit by S."""

    kind = "coverage"

    def __init__(self, universe: int, element_sets: Sequence[Iterable[int]],
                 universe_weights: Sequence[Rational]):
        self.universe = universe
        self.universe_weights = tuple(_rat(w) for w in universe_weights)
        if len(self.universe_weights) != universe:
            raise ValueError("universe_weights length must equal universe size")
        if any(w < 0 for w in self.universe_weights):
            raise ValueError("universe weights must be non-negative")
        self.element_masks = tuple(mask_of(s) for s in element_sets)
        for em in self.element_masks:
            if em >> universe:
                raise ValueError("element set references item outside universe")
        self.n = len(self.element_masks)

    def covered(self, mask: int) -> int:
        cov = 0
        for i in iter_bits(mask):
            cov |= self.element_masks[i]
        return cov

    def eval(self, mask: int) -> Rational:
        return sum(self.universe_weights[u] for u in iter_bits(self.covered(mask)))

    def begin(self, mask: int):
        return self.covered(mask)

    def gain(self, state, elem: int) -> Rational:
        new = self.element_masks[elem] & ~state
        return sum(self.universe_weights[u] for u in iter_bits(new))

    def marginal(self, mask: int, elem: int) -> Rational:
        if mask & (1 << elem):
            raise ValueError(f"element {elem} already in subset")
        new = self.element_masks[elem] & ~self.covered(mask)
        return sum(self.universe_weights[u] for u in iter_bits(new))

    def to_json_obj(self) -> dict:
        return {
            "kind": "coverage",
            "universe": self.universe,
            "element_sets": [sorted(iter_bits(m)) for m in self.element_masks],
            "universe_weights": [_rat_json(w) for w in self.universe_weights],
        }


class ConcaveOfModularOracle(SubmodularOracle):
    """f(S) = min(sum of weights over S, cap)."""

    kind = "concave_of_modular"

    def __init__(self, weights: Sequence[Rational], cap: Rational):
        self.weights = tuple(_rat(w) for w in weights)
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be non-negative")
        self.cap = _rat(cap)
        if self.cap < 0:
            raise ValueError("cap must be non-negative")
        self.n = len(self.weights)

    def eval(self, mask: int) -> Rational:
        return min(sum(self.weights[i] for i in iter_bits(mask)), self.cap)

    def begin(self, mask: int):
        return sum(self.weights[i] for i in iter_bits(mask))

    def gain(self, state, elem: int) -> Rational:
        return min(state + self.weights[elem], self.cap) - min(state, self.cap)

    def to_json_obj(self) -> dict:
        return {
            "kind": "concave_of_modular",
            "weights": [_rat_json(w) for w in self.weights],
            "cap": _rat_json(self.cap),
        }


def marginal(oracle: SubmodularOracle, mask: int, elem: int) -> Rational:
    """f(A + elem) - f(A), which is non-negative for monotone oracles."""
    if not (0 <= elem < oracle.n):
        raise ValueError(f"element {elem} out of range [0, {oracle.n})")
    return oracle.marginal(mask, elem)


# ---------------------------------------------------------------------------
# instances


@dataclass(frozen=True)
class Instance:
    """Ground set with packing/covering matrices, bounds and an objective.

    Feasible sets S satisfy ``packing @ 1_S <= pack_bound`` and
    ``covering @ 1_S >= cover_bound`` componentwise.
    """

    n: int
    packing: tuple          # p rows, each a tuple of n rationals
    covering: tuple         # c rows
    pack_bound: tuple
    cover_bound: tuple
    objective: SubmodularOracle = field(compare=False)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be non-negative")
        for name, rows in (("packing", self.packing), ("covering", self.covering)):
            for row in rows:
                if len(row) != self.n:
                    raise ValueError(f"{name} row length {len(row)} != n={self.n}")
                if any(v < 0 for v in row):
                    raise ValueError(f"{name} entries must be non-negative")
        if len(self.pack_bound) != len(self.packing):
            raise ValueError("pack_bound length mismatch")
        if len(self.cover_bound) != len(self.covering):
            raise ValueError("cover_bound length mismatch")
        if any(v < 0 for v in self.pack_bound) or any(v < 0 for v in self.cover_bound):
            raise ValueError("bounds must be non-negative")
        if self.objective.n != self.n:
            raise ValueError("objective arity mismatch")

    @property
    def p(self) -> int:
        return len(self.packing)

    @property
    def c(self) -> int:
        return len(self.covering)

    def pack_value(self, mask: int) -> tuple:
        return tuple(sum(row[i] for i in iter_bits(mask)) for row in self.packing)

    def cover_value(self, mask: int) -> tuple:
        return tuple(sum(row[i] for i in iter_bits(mask)) for row in self.covering)

    def is_integer(self) -> bool:
        def ints(vals):
            return all(Fraction(v).denominator == 1 for v in vals)
        return (all(ints(r) for r in self.packing) and all(ints(r) for r in self.covering)
                and ints(self.pack_bound) and ints(self.cover_bound))


def make_instance(packing, covering, pack_bound, cover_bound, objective) -> Instance:
    """Build an Instance, normalizing all numeric entries to exact rationals."""
    packing = tuple(tuple(_rat(v) for v in row) for row in packing)
    covering = tuple(tuple(_rat(v) for v in row) for row in covering)
    return Instance(
        n=objective.n,
        packing=packing,
        covering=covering,
        pack_bound=tuple(_rat(v) for v in pack_bound),
        cover_bound=tuple(_rat(v) for v in cover_bound),
        objective=objective,
    )


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    pack_violations: tuple   # per packing row: max(0, load - bound)
    cover_deficits: tuple    # per covering row: max(0, bound - load)


def is_feasible(inst: Instance, mask: int) -> FeasibilityReport:
    loads_p = inst.pack_value(mask)
    loads_c = inst.cover_value(mask)
    pv = tuple(max(0, load - b) for load, b in zip(loads_p, inst.pack_bound))
    cd = tuple(max(0, b - load) for load, b in zip(loads_c, inst.cover_bound))
    return FeasibilityReport(
        feasible=all(v == 0 for v in pv) and all(d == 0 for d in cd),
        pack_violations=pv,
        cover_deficits=cd,
    )


@dataclass(frozen=True)
class ViolationProfile:
    pack_ratio: Rational     # max_i load_i / bound_i  (0 when p = 0)
    cover_ratio: object      # min_j load_j / bound_j  (inf when c = 0)


def violation_profile(inst: Instance, mask: int) -> ViolationProfile:
    if any(b == 0 for b in inst.pack_bound) or any(b == 0 for b in inst.cover_bound):
        raise ValueError("violation_profile requires strictly positive bounds")
    loads_p = inst.pack_value(mask)
    loads_c = inst.cover_value(mask)
    pack_ratio = max((Fraction(l) / b for l, b in zip(loads_p, inst.pack_bound)),
                     default=Fraction(0))
    cover_ratio = min((Fraction(l) / b for l, b in zip(loads_c, inst.cover_bound)),
                      default=float("inf"))
    return ViolationProfile(pack_ratio=pack_ratio, cover_ratio=cover_ratio)


def normalize(inst: Instance) -> Instance:
    """Rescale so every bound equals 1 (the continuous track's convention).

    Covering entries are clamped at their row bound first; a single element
    already covers a row completely, so every predicate of the form
    ``cover >= tau * bound`` with tau <= 1 is unchanged, and normalized
    entries stay in [0, 1].  Covering rows with bound 0 are always satisfied
    and get dropped.  A packing row with bound 0 keeps its feasible sets:
    elements with positive entries become entry 2 against bound 1, i.e.
    permanently unpackable.
    """
    packing, covering = [], []
    for row, b in zip(inst.packing, inst.pack_bound):
        if b == 0:
            packing.append(tuple(Fraction(2) if v > 0 else Fraction(0) for v in row))
        else:
            packing.append(tuple(Fraction(v) / b for v in row))
    for row, b in zip(inst.covering, inst.cover_bound):
        if b == 0:
            continue
        covering.append(tuple(min(Fraction(v), Fraction(b)) / b for v in row))
    return Instance(
        n=inst.n,
        packing=tuple(packing),
        covering=tuple(covering),
        pack_bound=tuple(Fraction(1) for _ in packing),
        cover_bound=tuple(Fraction(1) for _ in covering),
        objective=inst.objective,
    )


@dataclass(frozen=True)
class Params:
    """Knobs of the enumeration/rounding pipeline.

    The defaults tie alpha, beta and gamma to delta the way the analysis
    fixes them (alpha = delta^3, beta = delta^2 / 3b, gamma = 1 / delta^3).
    """

    epsilon: Fraction
    delta: Fraction
    alpha: Fraction
    beta: Fraction
    gamma: Fraction
    m: int = 1

    def __post_init__(self):
        if not 0 < self.epsilon:
            raise ValueError("epsilon must be positive")
        for name in ("delta", "alpha", "beta"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0, 1)")
        if self.gamma < 1:
            raise ValueError("gamma must be >= 1")
        if self.m < 1:
            raise ValueError("m must be >= 1")

    @classmethod
    def from_delta(cls, epsilon, delta, b: int) -> "Params":
        delta = to_fraction(delta)
        return cls(
            epsilon=to_fraction(epsilon),
            delta=delta,
            alpha=delta ** 3,
            beta=delta ** 2 / (3 * b),
            gamma=1 / delta ** 3,
        )

    @classmethod
    def from_epsilon(cls, epsilon, b: int) -> "Params":
        """Schedule of the analysis: delta just below min{1/15b, eps/(30b^3+2)}."""
        epsilon = to_fraction(epsilon)
        cap = min(Fraction(1, 15 * b), epsilon / (30 * b ** 3 + 2))
        return cls.from_delta(epsilon, cap * Fraction(999, 1000), b)


# ---------------------------------------------------------------------------
# JSON instance schema


def _rat(v) -> Rational:
    if isinstance(v, (int, Fraction)):
        return v
    if isinstance(v, float):
        if not v.is_integer():
            raise ValueError(
                f"refusing inexact float {v!r}; use an int or 'a/b' string")
        return int(v)
    if isinstance(v, str):
        return Fraction(v)
    raise TypeError(f"cannot interpret {v!r} as a rational")


def to_fraction(v) -> Fraction:
    """Exact conversion for parameters; floats go through their decimal
    literal so 0.2 becomes 1/5, not the binary expansion."""
    if isinstance(v, float):
        return Fraction(str(v))
    return Fraction(v)


def _rat_json(v: Rational):
    f = Fraction(v)
    if f.denominator == 1:
        return f.numerator
    return f"{f.numerator}/{f.denominator}"


def oracle_from_json_obj(obj: dict) -> SubmodularOracle:
    kind = obj.get("kind")
    if kind == "linear":
        return LinearOracle([_rat(w) for w in obj["weights"]])
    if kind == "coverage":
        return CoverageOracle(
            universe=obj["universe"],
            element_sets=obj["element_sets"],
            universe_weights=[_rat(w) for w in obj["universe_weights"]],
        )
    if kind == "concave_of_modular":
        return ConcaveOfModularOracle(
            weights=[_rat(w) for w in obj["weights"]],
            cap=_rat(obj["cap"]),
        )
    raise ValueError(f"unknown objective kind {kind!r}")


def instance_from_json_obj(obj: dict) -> Instance:
    oracle = oracle_from_json_obj(obj["objective"])
    if obj["n"] != oracle.n:
        raise ValueError("n does not match objective arity")
    return make_instance(
        packing=[[_rat(v) for v in row] for row in obj["packing"]],
        covering=[[_rat(v) for v in row] for row in obj["covering"]],
        pack_bound=[_rat(v) for v in obj["pack_bound"]],
        cover_bound=[_rat(v) for v in obj["cover_bound"]],
        objective=oracle,
    )


def instance_to_json_obj(inst: Instance) -> dict:
    return {
        "n": inst.n,
        "packing": [[_rat_json(v) for v in row] for row in inst.packing],
        "covering": [[_rat_json(v) for v in row] for row in inst.covering],
        "pack_bound": [_rat_json(v) for v in inst.pack_bound],
        "cover_bound": [_rat_json(v) for v in inst.cover_bound],
        "objective": inst.objective.to_json_obj(),
    }


def load_instance(path) -> Instance:
    with open(path, "r", encoding="utf-8") as fh:
        return instance_from_json_obj(json.load(fh))


def dump_instance(inst: Instance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(instance_to_json_obj(inst), fh, indent=2, sort_keys=True)
        fh.write("\n")
