"""Demand oracles for both auction models.

The canonical multi-unit demand computation is exhaustive enumeration of the
bundle box; a greedy single-improvement fast path and a lexicographic
minimum-take shortcut exist as test-gated optimizations.  The unit model has
its own oracle around the artificial no-purchase item 0 and never routes
through the multi-model code.
"""

from __future__ import annotations

from itertools import product

from .errors import BudgetExceededError
from .instance import (DEFAULT_BUDGET, MULTI, SEPARABLE_CONCAVE, UNIT,
                       UNIT_DEMAND, Bundle, Instance, ItemSet, PriceVector,
                       box_volume, evaluate)
from .itemsets import mask_from_items, subset_sums


def _check_bidder(instance: Instance, b: int) -> None:
    if isinstance(b, bool) or not isinstance(b, int) or not 0 <= b < instance.m:
        raise IndexError(f"bidder index out of range: {b!r} (m={instance.m})")


def _check_price(instance: Instance, p) -> PriceVector:
    t = tuple(p)
    if len(t) != instance.n:
        raise ValueError(f"price vector must have {instance.n} components")
    for i, c in enumerate(t):
        if isinstance(c, bool) or not isinstance(c, int) or c < 0:
            raise ValueError(f"price p[{i}] must be a nonnegative integer")
    return t


class DemandCache:
    """Per-instance demand computations with memoization.

    Instances are immutable, so cached answers never go stale.  One cache may
    be shared freely by the Lyapunov oracle, the auction layer and sweeps.
    """

    def __init__(self, instance: Instance, *, budget: int = DEFAULT_BUDGET):
        self.instance = instance
        self.budget = budget
        self._n = instance.n
        if instance.model == MULTI:
            volume = box_volume(instance.u)
            if volume > budget:
                raise BudgetExceededError(
                    f"bundle box volume {volume} exceeds budget {budget}")
            self._bundles: tuple[Bundle, ...] = tuple(
                product(*(range(c + 1) for c in instance.u)))
            self._values: dict[int, list[int]] = {}
        self._unit_masks: dict[tuple[int, PriceVector], int] = {}
        self._mu_vectors: dict[tuple[int, PriceVector], tuple[int, ...]] = {}
        self._demand_sets: dict[tuple[int, PriceVector], tuple[Bundle, ...]] = {}

    # -- shared ------------------------------------------------------------

    def _bidder_values(self, b: int) -> list[int]:
        vals = self._values.get(b)
        if vals is None:
            v = self.instance.valuations[b]
            vals = [evaluate(v, x) for x in self._bundles]
            self._values[b] = vals
        return vals

    # -- unit model ----------------------------------------------------------

    def unit_demand_mask(self, b: int, p: PriceVector) -> int:
        """Demand set as a bitmask: bit 0 is the artificial item, bit i item i."""
        key = (b, p)
        mask = self._unit_masks.get(key)
        if mask is None:
            values = self.instance.valuations[b].values
            best = 0
            for w, c in zip(values, p):
                if w - c > best:
                    best = w - c
            mask = 1 if best == 0 else 0
            for i, (w, c) in enumerate(zip(values, p)):
                if w - c == best:
                    mask |= 1 << (i + 1)
            self._unit_masks[key] = mask
        return mask

    def unit_demand_set(self, b: int, p: PriceVector) -> frozenset[int]:
        mask = self.unit_demand_mask(b, p)
        out = set()
        i = 0
        while mask:
            if mask & 1:
                out.add(i)
            mask >>= 1
            i += 1
        return frozenset(out)

    def only_demanders_mask(self, items_mask: int, p: PriceVector) -> int:
        """Bitmask of bidders whose whole demand set lies inside the item set."""
        blocked = ~(items_mask << 1)
        out = 0
        for b in range(self.instance.m):
            if self.unit_demand_mask(b, p) & blocked == 0:
                out |= 1 << b
        return out

    def some_demanders_mask(self, items_mask: int, p: PriceVector) -> int:
        """Bitmask of bidders demanding at least one item of the item set."""
        probe = items_mask << 1
        out = 0
        for b in range(self.instance.m):
            if self.unit_demand_mask(b, p) & probe:
                out |= 1 << b
        return out

    def only_demanders_table(self, p: PriceVector) -> list[int]:
        """``only_demanders_mask`` for every item subset at once.

        Walks each bidder's supersets instead of re-testing all subsets;
        agrees with the per-set method (equality is test-enforced).
        """
        size = 1 << self._n
        full = size - 1
        out = [0] * size
        for b in range(self.instance.m):
            dm = self.unit_demand_mask(b, p)
            if dm & 1:
                continue  # the no-purchase option never lies inside an item set
            d = dm >> 1
            bit = 1 << b
            s = d
            while True:
                out[s] |= bit
                if s == full:
                    break
                s = (s + 1) | d
        return out

    def some_demanders_table(self, p: PriceVector) -> list[int]:
        """``some_demanders_mask`` for every item subset at once."""
        size = 1 << self._n
        full = size - 1
        miss = [0] * size
        base = 0
        for b in range(self.instance.m):
            d = self.unit_demand_mask(b, p) >> 1
            if d == 0:
                continue
            bit = 1 << b
            base |= bit
            w = full ^ d
            t = w
            while True:
                miss[t] |= bit
                if t == 0:
                    break
                t = (t - 1) & w
        return [base ^ miss[s] for s in range(size)]

    def deficiency_table(self, p: PriceVector) -> list[int]:
        """Deficiency of every item subset at once, indexed by subset bitmask."""
        inst = self.instance
        size = 1 << self._n
        if inst.model == UNIT:
            only = self.only_demanders_table(p)
            return [only[s].bit_count() - s.bit_count() for s in range(size)]
        vectors = [self.mu_vector(b, p) for b in range(inst.m)]
        supply = subset_sums(inst.u, self._n)
        return [sum(vec[s] for vec in vectors) - supply[s] for s in range(size)]

    # -- multi model -----------------------------------------------------------

    def demand_set(self, b: int, p: PriceVector) -> tuple[Bundle, ...]:
        """All payoff-maximizing bundles, in lexicographic order."""
        key = (b, p)
        cached = self._demand_sets.get(key)
        if cached is None:
            values = self._bidder_values(b)
            best = None
            arg: list[Bundle] = []
            for x, w in zip(self._bundles, values):
                payoff = w - sum(c * q for c, q in zip(p, x))
                if best is None or payoff > best:
                    best = payoff
                    arg = [x]
                elif payoff == best:
                    arg.append(x)
            cached = tuple(arg)
            self._demand_sets[key] = cached
        return cached

    def mu_vector(self, b: int, p: PriceVector) -> tuple[int, ...]:
        """Minimum take from every item subset, indexed by subset bitmask."""
        key = (b, p)
        cached = self._mu_vectors.get(key)
        if cached is None:
            n = self._n
            size = 1 << n
            mins = [None] * size
            for x in self.demand_set(b, p):
                sums = subset_sums(x, n)
                for mask in range(size):
                    cur = mins[mask]
                    if cur is None or sums[mask] < cur:
                        mins[mask] = sums[mask]
            cached = tuple(mins)
            self._mu_vectors[key] = cached
        return cached

    def indirect_utility(self, b: int, p: PriceVector) -> int:
        """Best payoff max(v(x) - p.x); per-family shortcut where one exists."""
        v = self.instance.valuations[b]
        if v.family == SEPARABLE_CONCAVE:
            total = 0
            for j, row in enumerate(v._prefix):
                c = p[j]
                total += max(w - k * c for k, w in enumerate(row))
            return total
        if v.family == UNIT_DEMAND:
            best = 0
            for w, c in zip(v.values, p):
                if w - c > best:
                    best = w - c
            return best
        return self.indirect_utility_enum(b, p)

    def indirect_utility_enum(self, b: int, p: PriceVector) -> int:
        """Best payoff by full enumeration of the bundle box (canonical path)."""
        values = self._bidder_values(b)
        best = None
        for x, w in zip(self._bundles, values):
            payoff = w - sum(c * q for c, q in zip(p, x))
            if best is None or payoff > best:
                best = payoff
        return best

    def mu_lex(self, b: int, X_mask: int, p: PriceVector) -> int:
        """Minimum take from X via a single argmax scan with lexicographic tie-break.

        Internal optimization; must agree with the demand-set scan.
        """
        values = self._bidder_values(b)
        n = self._n
        best = None
        take = None
        for x, w in zip(self._bundles, values):
            payoff = w - sum(c * q for c, q in zip(p, x))
            y = 0
            mask = X_mask
            k = 0
            while mask:
                if mask & 1:
                    y += x[k]
                mask >>= 1
                k += 1
            if best is None or payoff > best or (payoff == best and y < take):
                best = payoff
                take = y
        return take

    # -- deficiency ------------------------------------------------------------

    def deficiency_mask(self, X_mask: int, p: PriceVector) -> int:
        """Demanded units from X minus supplied units, from demand primitives."""
        inst = self.instance
        if inst.model == UNIT:
            return self.only_demanders_mask(X_mask, p).bit_count() - X_mask.bit_count()
        demanded = sum(self.mu_vector(b, p)[X_mask] for b in range(inst.m))
        supply = 0
        mask = X_mask
        k = 0
        while mask:
            if mask & 1:
                supply += inst.u[k]
            mask >>= 1
            k += 1
        return demanded - supply


# --- free-function oracle surface ----------------------------------------


def unit_demand_set(b: int, p: PriceVector, instance: Instance) -> frozenset[int]:
    """Payoff-maximizing items for a unit-demand bidder, 0 meaning "buy nothing"."""
    if instance.model != UNIT:
        raise ValueError("unit_demand_set requires model 'unit'")
    _check_bidder(instance, b)
    p = _check_price(instance, p)
    return DemandCache(instance).unit_demand_set(b, p)


def demand_set(b: int, p: PriceVector, instance: Instance, *,
               budget: int = DEFAULT_BUDGET) -> frozenset[Bundle]:
    """All payoff-maximizing bundles of a multi-demand bidder."""
    if instance.model != MULTI:
        raise ValueError("demand_set requires model 'multi'")
    _check_bidder(instance, b)
    p = _check_price(instance, p)
    return frozenset(DemandCache(instance, budget=budget).demand_set(b, p))


def mu(b: int, X: ItemSet, p: PriceVector, instance: Instance, *,
       budget: int = DEFAULT_BUDGET) -> int:
    """Minimum number of units bidder b takes from item set X across its demand set."""
    if instance.model != MULTI:
        raise ValueError("mu requires model 'multi'")
    _check_bidder(instance, b)
    p = _check_price(instance, p)
    mask = mask_from_items(X, instance.n)
    return DemandCache(instance, budget=budget).mu_vector(b, p)[mask]


def bidders_only_demanding(Y: ItemSet, p: PriceVector, instance: Instance) -> frozenset[int]:
    """Bidders whose demand set is contained in Y (item 0 never is, by convention)."""
    if instance.model != UNIT:
        raise ValueError("bidders_only_demanding requires model 'unit'")
    p = _check_price(instance, p)
    mask = mask_from_items(Y, instance.n)
    out = DemandCache(instance).only_demanders_mask(mask, p)
    return frozenset(b for b in range(instance.m) if out >> b & 1)


def bidders_demanding_some(Y: ItemSet, p: PriceVector, instance: Instance) -> frozenset[int]:
    """Bidders demanding at least one item of Y."""
    if instance.model != UNIT:
        raise ValueError("bidders_demanding_some requires model 'unit'")
    p = _check_price(instance, p)
    mask = mask_from_items(Y, instance.n)
    out = DemandCache(instance).some_demanders_mask(mask, p)
    return frozenset(b for b in range(instance.m) if out >> b & 1)


def greedy_demand_bundle(b: int, p: PriceVector, instance: Instance) -> Bundle:
    """One payoff-maximizing bundle by greedy unit increments.

    Correct for gross-substitutes valuations; the equality of its payoff with
    the enumeration maximum is enforced by tests, not assumed here.
    """
    if instance.model != MULTI:
        raise ValueError("greedy_demand_bundle requires model 'multi'")
    _check_bidder(instance, b)
    p = _check_price(instance, p)
    v = instance.valuations[b]
    u = instance.u
    x = [0] * instance.n
    worth = evaluate(v, tuple(x))
    while True:
        best_gain = 0
        best_j = None
        for j in range(instance.n):
            if x[j] < u[j]:
                x[j] += 1
                gain = evaluate(v, tuple(x)) - worth - p[j]
                x[j] -= 1
                if gain > best_gain:
                    best_gain = gain
                    best_j = j
        if best_j is None:
            return tuple(x)
        x[best_j] += 1
        worth += best_gain + p[best_j]
