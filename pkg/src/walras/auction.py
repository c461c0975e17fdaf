"""Auction-facing layer over the generic descent engine.

Translates overdemanded / excess-demand semantics into the lattice engine's
terms, runs the ascending auction, and certifies equilibria with explicit
allocations.
"""

from __future__ import annotations

from dataclasses import dataclass

from .demand import DemandCache, _check_price
from .errors import BudgetExceededError, ContractError, ConvexityError
from .instance import (DEFAULT_BUDGET, EXPLICIT_TABLE, MULTI, UNIT, Bundle,
                       Instance, ItemSet, PriceVector, verify_mnat_exc)
from .itemsets import (chi_sub, items_from_mask, mask_from_items, mask_weight,
                       proper_submasks, subset_sums)
from .lnat import StrategyKind, Trajectory, minimize
from .lyapunov import LyapunovOracle


@dataclass(frozen=True)
class UnitAllocation:
    """Assignment of bidders to items; 0 means the bidder buys nothing."""

    assignment: tuple[int, ...]

    def __post_init__(self):
        taken = [a for a in self.assignment if a != 0]
        if len(taken) != len(set(taken)):
            raise ValueError("allocation assigns an item to two bidders")


@dataclass(frozen=True)
class MultiAllocation:
    """One bundle per bidder; a valid allocation sums exactly to the supply."""

    bundles: tuple[Bundle, ...]


Allocation = UnitAllocation | MultiAllocation


@dataclass(frozen=True)
class StepDiagnostics:
    """Demand-side view of one auction iteration."""

    chosen_set: ItemSet
    deficiency: int
    demanded_units: int
    supply_units: int


@dataclass(frozen=True)
class AuctionResult:
    p_min: PriceVector
    trajectory: Trajectory
    allocation: Allocation | None
    diagnostics: tuple[StepDiagnostics, ...]
    allocation_error: str | None = None


def is_overdemanded(X: ItemSet, p: PriceVector, instance: Instance, *,
                    demand: DemandCache | None = None) -> bool:
    """True when the minimal aggregate demand from X exceeds its supply."""
    dc = demand if demand is not None else DemandCache(instance)
    p = _check_price(instance, p)
    mask = mask_from_items(X, instance.n)
    return dc.deficiency_mask(mask, p) > 0


def is_excess_demand(X: ItemSet, p: PriceVector, instance: Instance, *,
                     demand: DemandCache | None = None) -> bool:
    """True when every nonempty part of X is strictly overdemanded.

    Unit model: bidders confined to X who demand inside Z outnumber Z.
    Multi model: the extra units bidders must take from Z exceed Z's supply.
    """
    dc = demand if demand is not None else DemandCache(instance)
    p = _check_price(instance, p)
    mask = mask_from_items(X, instance.n)
    if mask == 0:
        raise ValueError("X must be nonempty")
    if instance.model == UNIT:
        only_in_x = dc.only_demanders_mask(mask, p)
        for z in _nonempty_submasks(mask):
            if (dc.some_demanders_mask(z, p) & only_in_x).bit_count() <= z.bit_count():
                return False
        return True
    vectors = [dc.mu_vector(b, p) for b in range(instance.m)]
    for z in _nonempty_submasks(mask):
        gap = sum(vec[mask] - vec[mask ^ z] for vec in vectors)
        if gap <= mask_weight(z, instance.u):
            return False
    return True


def _nonempty_submasks(mask: int):
    yield mask
    for sub in proper_submasks(mask):
        if sub:
            yield sub


def excess_demand_table(instance: Instance, p: PriceVector, *,
                        demand: DemandCache | None = None) -> list[bool]:
    """``is_excess_demand`` for every item subset at once, indexed by bitmask.

    Index 0 is False by convention (excess-demand sets are nonempty).
    Agrees with the per-set predicate; equality is test-enforced.
    """
    dc = demand if demand is not None else DemandCache(instance)
    p = _check_price(instance, p)
    size = 1 << instance.n
    out = [False] * size
    if instance.model == UNIT:
        only = dc.only_demanders_table(p)
        some = dc.some_demanders_table(p)
        for mask in range(1, size):
            ox = only[mask]
            ok = True
            for z in _nonempty_submasks(mask):
                if (some[z] & ox).bit_count() <= z.bit_count():
                    ok = False
                    break
            out[mask] = ok
        return out
    vectors = [dc.mu_vector(b, p) for b in range(instance.m)]
    supply = subset_sums(instance.u, instance.n)
    for mask in range(1, size):
        ok = True
        for z in _nonempty_submasks(mask):
            gap = sum(vec[mask] - vec[mask ^ z] for vec in vectors)
            if gap <= supply[z]:
                ok = False
                break
        out[mask] = ok
    return out


def ascending_auction(instance: Instance,
                      strategy: StrategyKind = StrategyKind.STEEPEST_MINIMAL,
                      p0: PriceVector | None = None, *,
                      seed: int = 0,
                      iteration_cap: int | None = None,
                      budget: int = DEFAULT_BUDGET,
                      allocation_budget: int = DEFAULT_BUDGET,
                      oracle: LyapunovOracle | None = None) -> AuctionResult:
    """Run the ascending auction from p0 (default all-zero prices).

    The start must lie at or below the minimal equilibrium price; zero always
    does.  Explicit-table valuations are admitted only after passing the
    substitutes exchange check, since nothing below is guaranteed otherwise.
    Allocation extraction is best-effort: on budget exhaustion the result is
    still returned, with ``allocation_error`` set.
    """
    for b, v in enumerate(instance.valuations):
        if v.family == EXPLICIT_TABLE:
            bad = verify_mnat_exc(v, instance.u, budget=budget)
            if bad is not None:
                raise ConvexityError(
                    f"valuations[{b}] violates the substitutes exchange property: "
                    f"x={bad.x} y={bad.y} i={bad.i}")
    ly = oracle if oracle is not None else LyapunovOracle(instance, budget=budget)
    if p0 is None:
        p0 = (0,) * instance.n
    p0 = _check_price(instance, p0)
    p_final, trajectory = minimize(ly.function_oracle(), p0, strategy,
                                   seed=seed, iteration_cap=iteration_cap)
    diagnostics = []
    for step in trajectory.steps:
        mask = mask_from_items(step.chosen_set, instance.n)
        delta = ly.deficiency_mask(mask, step.p_before)
        supply = mask_weight(mask, instance.u)
        diagnostics.append(StepDiagnostics(chosen_set=step.chosen_set,
                                           deficiency=delta,
                                           demanded_units=delta + supply,
                                           supply_units=supply))
    allocation = None
    allocation_error = None
    try:
        allocation = extract_allocation(instance, p_final,
                                        budget=allocation_budget, demand=ly.demand)
    except BudgetExceededError:
        allocation_error = "allocation search budget exceeded"
    return AuctionResult(p_min=p_final, trajectory=trajectory,
                         allocation=allocation, diagnostics=tuple(diagnostics),
                         allocation_error=allocation_error)


# --- allocation extraction -------------------------------------------------


def _augment(left_adj: list[list[int]], right_size: int) -> tuple[list[int | None], int]:
    """Kuhn's augmenting-path maximum matching; returns (owner per right vertex, size)."""
    owner: list[int | None] = [None] * right_size

    def try_assign(left: int, seen: list[bool]) -> bool:
        for r in left_adj[left]:
            if not seen[r]:
                seen[r] = True
                if owner[r] is None or try_assign(owner[r], seen):
                    owner[r] = left
                    return True
        return False

    size = 0
    for left in range(len(left_adj)):
        if try_assign(left, [False] * right_size):
            size += 1
    return owner, size


def _combine_matchings(match_b: dict[int, int], m2: dict[int, int]) -> dict[int, int]:
    """Merge two matchings so items covered by the first and bidders covered
    by the second all stay covered (alternating-path exchange)."""
    item_owner = {i: b for b, i in match_b.items()}
    for b0 in sorted(m2):
        if b0 in match_b:
            continue
        b = b0
        while True:
            i = m2.get(b)
            if i is None:
                break
            prev = item_owner.get(i)
            match_b[b] = i
            item_owner[i] = b
            if prev is None:
                break
            del match_b[prev]
            b = prev
    return match_b


def _extract_unit(instance: Instance, p: PriceVector, dc: DemandCache) -> UnitAllocation | None:
    n, m = instance.n, instance.m
    dmasks = [dc.unit_demand_mask(b, p) for b in range(m)]
    priced = [i for i in range(1, n + 1) if p[i - 1] > 0]
    must_buy = [b for b in range(m) if not dmasks[b] & 1]
    # First matching covers every positively priced item.
    adj_items = [[b for b in range(m) if dmasks[b] >> i & 1] for i in priced]
    owner_b, size = _augment(adj_items, m)
    if size != len(priced):
        return None
    match_b = {b: priced[owner_b[b]] for b in range(m) if owner_b[b] is not None}
    # Second matching covers every bidder that cannot fall back to item 0.
    adj_bidders = [[i - 1 for i in range(1, n + 1) if dmasks[b] >> i & 1]
                   for b in must_buy]
    owner_i, size = _augment(adj_bidders, n)
    if size != len(must_buy):
        return None
    m2 = {}
    for i in range(n):
        if owner_i[i] is not None:
            m2[must_buy[owner_i[i]]] = i + 1
    match_b = _combine_matchings(match_b, m2)
    assignment = tuple(match_b.get(b, 0) for b in range(m))
    for b in range(m):
        if assignment[b] == 0 and not dmasks[b] & 1:
            raise ContractError("matching left a bidder without its fallback item")
    return UnitAllocation(assignment=assignment)


def _extract_multi(instance: Instance, p: PriceVector, dc: DemandCache,
                   budget: int) -> MultiAllocation | None:
    n, m, u = instance.n, instance.m, instance.u
    if m == 0:
        return None  # supply is positive, so nothing can clear it
    sets = [dc.demand_set(b, p) for b in range(m)]
    maxs = [tuple(max(x[j] for x in ds) for j in range(n)) for ds in sets]
    mins = [tuple(min(x[j] for x in ds) for j in range(n)) for ds in sets]
    suffix_max = [(0,) * n] * (m + 1)
    suffix_min = [(0,) * n] * (m + 1)
    for k in range(m - 1, -1, -1):
        suffix_max[k] = tuple(maxs[k][j] + suffix_max[k + 1][j] for j in range(n))
        suffix_min[k] = tuple(mins[k][j] + suffix_min[k + 1][j] for j in range(n))
    chosen: list[Bundle | None] = [None] * m
    nodes = 0

    def walk(k: int, remaining: tuple[int, ...]) -> bool:
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise BudgetExceededError(
                f"allocation search exceeded budget {budget}")
        if k == m:
            return all(r == 0 for r in remaining)
        hi = suffix_max[k + 1]
        lo = suffix_min[k + 1]
        for x in sets[k]:
            fits = True
            rest = []
            for j in range(n):
                r = remaining[j] - x[j]
                if r < 0 or r > hi[j] or r < lo[j]:
                    fits = False
                    break
                rest.append(r)
            if fits:
                chosen[k] = x
                if walk(k + 1, tuple(rest)):
                    return True
        return False

    if walk(0, u):
        return MultiAllocation(bundles=tuple(chosen))  # type: ignore[arg-type]
    return None


def extract_allocation(instance: Instance, p: PriceVector, *,
                       budget: int = DEFAULT_BUDGET,
                       demand: DemandCache | None = None) -> Allocation | None:
    """Find an allocation certifying p as an equilibrium price, or None.

    Unit model: augmenting-path matching where every positively priced item
    must be sold and unmatched bidders fall back to item 0.  Multi model:
    depth-first search over the product of demand sets with remaining-supply
    pruning.  Budget exhaustion raises, distinct from a proven None.
    """
    p = _check_price(instance, p)
    dc = demand if demand is not None else DemandCache(instance, budget=budget)
    if instance.model == UNIT:
        return _extract_unit(instance, p, dc)
    return _extract_multi(instance, p, dc, budget)


def allocation_certifies(instance: Instance, p: PriceVector,
                         allocation: Allocation) -> bool:
    """Check an allocation against the equilibrium conditions at p."""
    p = _check_price(instance, p)
    dc = DemandCache(instance)
    if instance.model == UNIT:
        if not isinstance(allocation, UnitAllocation) or len(allocation.assignment) != instance.m:
            return False
        sold = set()
        for b, a in enumerate(allocation.assignment):
            mask = dc.unit_demand_mask(b, p)
            if not mask >> a & 1:
                return False
            if a != 0:
                sold.add(a)
        return all(p[i - 1] == 0 for i in range(1, instance.n + 1) if i not in sold)
    if not isinstance(allocation, MultiAllocation) or len(allocation.bundles) != instance.m:
        return False
    for b, x in enumerate(allocation.bundles):
        if x not in dc.demand_set(b, p):
            return False
    total = tuple(sum(x[j] for x in allocation.bundles) for j in range(instance.n))
    return total == instance.u


@dataclass(frozen=True)
class DescentWitness:
    """A unit price move (raise for direction +1, cut for -1) that lowers
    the Lyapunov value, disproving equilibrium at the tested price."""

    direction: int
    items: ItemSet


@dataclass(frozen=True)
class EquilibriumVerdict:
    equilibrium: bool
    allocation: Allocation | None
    witness: DescentWitness | None


def verify_equilibrium(instance: Instance, p: PriceVector, *,
                       budget: int = DEFAULT_BUDGET,
                       oracle: LyapunovOracle | None = None) -> EquilibriumVerdict:
    """Decide whether p is an equilibrium price, with a certificate either way.

    Success carries an allocation; failure carries a unit price move that
    lowers the Lyapunov value (none exists only in the degenerate bidderless
    multi-unit case, where no allocation can clear a positive supply).
    """
    p = _check_price(instance, p)
    ly = oracle if oracle is not None else LyapunovOracle(instance, budget=budget)
    allocation = extract_allocation(instance, p, budget=budget, demand=ly.demand)
    if allocation is not None:
        return EquilibriumVerdict(equilibrium=True, allocation=allocation, witness=None)
    base = ly.value(p)
    size = 1 << instance.n
    for mask in range(1, size):
        if ly.step_mask(mask, p) < 0:
            return EquilibriumVerdict(False, None,
                                      DescentWitness(+1, items_from_mask(mask)))
    supp = 0
    for k, c in enumerate(p):
        if c > 0:
            supp |= 1 << k
    for mask in range(1, size):
        if mask & ~supp:
            continue
        if ly.value(chi_sub(p, mask)) < base:
            return EquilibriumVerdict(False, None,
                                      DescentWitness(-1, items_from_mask(mask)))
    if instance.model == MULTI and instance.m == 0:
        return EquilibriumVerdict(False, None, None)
    raise ConvexityError(
        "price is locally optimal yet admits no allocation; "
        "valuations are outside the substitutes class")
