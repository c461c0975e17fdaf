"""Generic descent engine over the integer lattice.

Works for any integer-valued function oracle whose restriction to unit-raise
neighborhoods is submodular (discrete midpoint convexity).  The minimization
loop repeatedly raises a chosen item set's coordinates by one; with any
selection rule whose sets satisfy the local-minimality condition below, the
loop lands on the unique componentwise-minimal minimizer.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from itertools import combinations, product
from math import prod
from typing import Callable

from .errors import (BudgetExceededError, ContractError, ConvexityError,
                     IterationCapError)
from .instance import ItemSet, PriceVector
from .itemsets import chi_add, items_from_mask, proper_submasks

_SEED_LIMIT = 1 << 64


@dataclass(frozen=True, eq=False)
class FunctionOracle:
    """Deterministic integer function on Z^n.

    ``fn`` returns None outside the function's domain (read as +infinity).
    ``box`` declares per-coordinate bounds containing every finite query;
    ``value_floor`` is any known lower bound on the minimum, used to derive
    a default iteration cap for the descent loop.
    """

    n: int
    fn: Callable[[PriceVector], int | None]
    box: tuple[PriceVector, PriceVector] | None = None
    value_floor: int | None = None

    def __call__(self, p: PriceVector) -> int | None:
        return self.fn(p)


class StrategyKind(enum.Enum):
    """Which set-selection rule the descent loop uses each iteration."""

    MINIMAL_DESCENT = "minimal_descent"
    STEEPEST_MINIMAL = "steepest_minimal"
    FIRST_GP_MINIMAL = "first_gp_minimal"
    MAXIMAL_GP_MINIMAL = "maximal_gp_minimal"


@dataclass(frozen=True)
class Step:
    """One descent iteration: the chosen set and the value drop it caused."""

    p_before: PriceVector
    chosen_set: ItemSet
    g_before: int
    g_after: int
    deficiency_like: int

    def __post_init__(self):
        if not self.chosen_set:
            raise ContractError("descent step chose the empty set")
        if self.g_after >= self.g_before:
            raise ContractError("descent step failed to decrease the objective")


@dataclass(frozen=True)
class Trajectory:
    """Ordered record of a full descent run."""

    start: PriceVector
    steps: tuple[Step, ...]
    p_final: PriceVector

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class LnatCounterexample:
    """Pair of points and a shift violating discrete midpoint convexity."""

    p: PriceVector
    q: PriceVector
    lam: int


def _memoized(g: FunctionOracle) -> FunctionOracle:
    memo: dict[PriceVector, int | None] = {}

    def fn(p: PriceVector) -> int | None:
        hit = memo.get(p, _memoized)
        if hit is _memoized:
            hit = g.fn(p)
            memo[p] = hit
        return hit

    return FunctionOracle(n=g.n, fn=fn, box=g.box, value_floor=g.value_floor)


def is_lnat_convex_on_box(g: FunctionOracle,
                          box: tuple[PriceVector, PriceVector] | None = None, *,
                          budget: int = 2_000_000) -> LnatCounterexample | None:
    """Exhaustive discrete-midpoint-convexity check over a box.

    Scans every in-box pair (p, q) and every shift 0..diameter; returns the
    first violation in lexicographic (p, q, shift) order, or None.
    """
    if box is None:
        box = g.box
    if box is None:
        raise ValueError("no box given and the oracle declares none")
    lo, hi = tuple(box[0]), tuple(box[1])
    if len(lo) != g.n or len(hi) != g.n or any(a > b for a, b in zip(lo, hi)):
        raise ValueError("box bounds must be two n-vectors with lo <= hi")
    volume = prod(b - a + 1 for a, b in zip(lo, hi))
    diameter = max(b - a for a, b in zip(lo, hi))
    work = volume * volume * (diameter + 1)
    if work > budget:
        raise BudgetExceededError(
            f"convexity check needs {work} inequality tests, budget is {budget}")
    gm = _memoized(g)
    points = list(product(*(range(a, b + 1) for a, b in zip(lo, hi))))
    for p in points:
        gp = gm(p)
        for q in points:
            gq = gm(q)
            lhs = None if (gp is None or gq is None) else gp + gq
            for lam in range(diameter + 1):
                a = tuple(min(pc + lam, qc) for pc, qc in zip(p, q))
                b = tuple(max(pc, qc - lam) for pc, qc in zip(p, q))
                ga = gm(a)
                gb = gm(b)
                if ga is None or gb is None:
                    if lhs is not None:
                        return LnatCounterexample(p=p, q=q, lam=lam)
                    continue
                if lhs is not None and lhs < ga + gb:
                    return LnatCounterexample(p=p, q=q, lam=lam)
    return None


def is_gp_minimal(g: FunctionOracle, p: PriceVector, X: ItemSet) -> bool:
    """True iff every proper subset raise lands strictly above the raise by X.

    With Y = {} this forces a strict descent, so such sets are always valid
    choices for the loop's raise step.
    """
    p = tuple(p)
    mask = _item_mask(X, g.n)
    if mask == 0:
        raise ValueError("X must be nonempty")
    target = g.fn(chi_add(p, mask))
    if target is None:
        return False
    for sub in proper_submasks(mask):
        val = g.fn(chi_add(p, sub))
        if val is not None and val <= target:
            return False
    return True


def _item_mask(X, n: int) -> int:
    mask = 0
    for i in X:
        if not isinstance(i, int) or isinstance(i, bool) or not 1 <= i <= n:
            raise ValueError(f"item label {i!r} outside 1..{n}")
        mask |= 1 << (i - 1)
    return mask


def minimal_descent_set(g: FunctionOracle, p: PriceVector) -> ItemSet | None:
    """First descent set in (cardinality, lexicographic) scan order.

    The minimum-cardinality guarantee makes the result inclusion-minimal.
    Returns None when no raise descends.
    """
    p = tuple(p)
    base = g.fn(p)
    if base is None:
        raise ValueError("p is outside the oracle's domain")
    for k in range(1, g.n + 1):
        for combo in combinations(range(1, g.n + 1), k):
            mask = 0
            for i in combo:
                mask |= 1 << (i - 1)
            val = g.fn(chi_add(p, mask))
            if val is not None and val < base:
                return frozenset(combo)
    return None


def minimal_minimizer_step(g: FunctionOracle, p: PriceVector) -> ItemSet:
    """Intersection of all sets minimizing the one-step change g(p + chi_X) - g(p).

    The intersection must itself attain the minimum; if it does not, the
    step function is not submodular and the input is rejected.
    """
    p = tuple(p)
    base = g.fn(p)
    if base is None:
        raise ValueError("p is outside the oracle's domain")
    size = 1 << g.n
    vals: list[int | None] = [None] * size
    best = 0  # step of the empty set
    vals[0] = base
    for mask in range(1, size):
        val = g.fn(chi_add(p, mask))
        vals[mask] = val
        if val is not None and val - base < best:
            best = val - base
    meet = None
    for mask in range(size):
        val = vals[mask]
        if val is not None and val - base == best:
            meet = mask if meet is None else meet & mask
    if vals[meet] is None or vals[meet] - base != best:
        raise ConvexityError("step function not submodular")
    return items_from_mask(meet)


def first_gp_minimal(g: FunctionOracle, p: PriceVector, seed: int) -> ItemSet | None:
    """First locally-minimal descent set in a seeded pseudorandom subset order.

    The order is a Fisher-Yates shuffle of all nonempty subset indices, so a
    fixed seed always yields the same choice.  Returns None when no raise
    descends.
    """
    _check_seed(seed)
    p = tuple(p)
    base = g.fn(p)
    if base is None:
        raise ValueError("p is outside the oracle's domain")
    order = list(range(1, 1 << g.n))
    random.Random(seed).shuffle(order)
    for mask in order:
        val = g.fn(chi_add(p, mask))
        if val is None or val >= base:
            continue
        if is_gp_minimal(g, p, items_from_mask(mask)):
            return items_from_mask(mask)
    return None


def maximal_gp_minimal(g: FunctionOracle, p: PriceVector) -> ItemSet:
    """Unique maximal locally-minimal descent set, computed two ways.

    Takes the union of all such sets and checks it against the minimal
    minimizer of the one-step change; disagreement means the oracle is not
    midpoint convex.  Degenerates to the empty set when nothing descends.
    """
    p = tuple(p)
    union = 0
    for mask in range(1, 1 << g.n):
        if is_gp_minimal(g, p, items_from_mask(mask)):
            union |= mask
    other = minimal_minimizer_step(g, p)
    if items_from_mask(union) != other:
        raise ConvexityError(
            "union of locally-minimal descent sets disagrees with the minimal minimizer")
    return other


def _check_seed(seed: int) -> None:
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < _SEED_LIMIT:
        raise ValueError("seed must be an unsigned 64-bit integer")


def minimize(g: FunctionOracle, p0: PriceVector, strategy: StrategyKind, *,
             seed: int = 0, iteration_cap: int | None = None,
             max_items: int = 24) -> tuple[PriceVector, Trajectory]:
    """Run the ascending descent loop from p0 with the given selection rule.

    The caller must start at or below the minimal minimizer; this is not
    checkable here and is validated externally against brute force.  Each
    iteration first proves termination by scanning all unit raises, then
    advances by the strategy's chosen set.  Returns the final point and the
    full trajectory.
    """
    if not isinstance(strategy, StrategyKind):
        raise ValueError(f"unknown strategy {strategy!r}")
    _check_seed(seed)
    if g.n > max_items:
        raise ValueError(f"n={g.n} exceeds the subset-enumeration cap {max_items}")
    p = tuple(p0)
    gm = _memoized(g)
    base = gm(p)
    if base is None:
        raise ValueError("start point is outside the oracle's domain")
    if iteration_cap is None:
        if g.value_floor is None:
            raise ValueError("iteration_cap required when the oracle declares no value_floor")
        iteration_cap = base - g.value_floor + 1
    size = 1 << g.n
    steps: list[Step] = []
    while True:
        descending = False
        for mask in range(1, size):
            val = gm(chi_add(p, mask))
            if val is not None and val < base:
                descending = True
                break
        if not descending:
            break
        if len(steps) >= iteration_cap:
            raise IterationCapError(
                f"no minimizer reached within {iteration_cap} iterations")
        if strategy is StrategyKind.MINIMAL_DESCENT:
            chosen = minimal_descent_set(gm, p)
        elif strategy is StrategyKind.STEEPEST_MINIMAL:
            chosen = minimal_minimizer_step(gm, p)
        elif strategy is StrategyKind.FIRST_GP_MINIMAL:
            chosen = first_gp_minimal(gm, p, seed)
        else:
            chosen = maximal_gp_minimal(gm, p)
        if not chosen:
            raise ContractError("strategy found no set although a descent exists")
        q = chi_add(p, _item_mask(chosen, g.n))
        after = gm(q)
        if after is None or after >= base:
            raise ContractError("strategy returned a non-descent set")
        steps.append(Step(p_before=p, chosen_set=frozenset(chosen), g_before=base,
                          g_after=after, deficiency_like=base - after))
        p = q
        base = after
    trajectory = Trajectory(start=tuple(p0), steps=tuple(steps), p_final=p)
    return p, trajectory
