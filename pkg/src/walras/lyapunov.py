"""Lyapunov functions for both auction models, plus the deficiency statistic.

The Lyapunov value of a price vector is the bidders' total indirect utility
plus the revenue term; its minimizers are exactly the equilibrium prices.
``deficiency`` is computed from demand-side primitives and ``step`` from two
Lyapunov evaluations, so the identity ``step == -deficiency`` cross-validates
the two routes instead of holding by construction.
"""

from __future__ import annotations

from .demand import DemandCache, _check_price
from .instance import (DEFAULT_BUDGET, UNIT, Instance, ItemSet, PriceVector,
                       max_total_value)
from .itemsets import chi_add, mask_from_items
from .lnat import FunctionOracle


class LyapunovOracle:
    """Memoized Lyapunov function of one instance.

    The memo is keyed by exact price vector; values never change across
    calls.  Reads and inserts are safe under CPython's GIL.
    """

    def __init__(self, instance: Instance, *, demand: DemandCache | None = None,
                 budget: int = DEFAULT_BUDGET):
        self.instance = instance
        self.demand = demand if demand is not None else DemandCache(instance, budget=budget)
        self._memo: dict[PriceVector, int] = {}
        self._ceiling = max_total_value(instance)

    def value(self, p: PriceVector) -> int:
        t = tuple(p)
        hit = self._memo.get(t)
        if hit is not None:
            return hit
        t = _check_price(self.instance, t)
        inst = self.instance
        if inst.model == UNIT:
            total = sum(t)
            for v in inst.valuations:
                best = 0
                for w, c in zip(v.values, t):
                    if w - c > best:
                        best = w - c
                total += best
        else:
            dc = self.demand
            total = sum(c * q for c, q in zip(t, inst.u))
            for b in range(inst.m):
                total += dc.indirect_utility(b, t)
        self._memo[t] = total
        return total

    def step_mask(self, X_mask: int, p: PriceVector) -> int:
        return self.value(chi_add(tuple(p), X_mask)) - self.value(p)

    def step(self, X: ItemSet, p: PriceVector) -> int:
        """Lyapunov change when raising every price in X by one unit."""
        return self.step_mask(mask_from_items(X, self.instance.n), p)

    def deficiency_mask(self, X_mask: int, p: PriceVector) -> int:
        return self.demand.deficiency_mask(X_mask, tuple(p))

    def deficiency(self, X: ItemSet, p: PriceVector) -> int:
        """Demanded units from X minus supply of X, via demand primitives."""
        return self.demand.deficiency_mask(mask_from_items(X, self.instance.n),
                                           _check_price(self.instance, p))

    def price_ceiling(self) -> int:
        return self._ceiling

    def function_oracle(self, *, slack: int = 2) -> FunctionOracle:
        """Adapter for the generic lattice-minimization engine.

        Declares the box [0, ceiling + slack]^n; queries outside it read as
        +infinity.  Zero is a valid floor since the value dominates p.u >= 0.
        """
        n = self.instance.n
        hi = self._ceiling + slack
        box = ((0,) * n, (hi,) * n)

        def fn(q: PriceVector) -> int | None:
            if any(c < 0 or c > hi for c in q):
                return None
            return self.value(q)

        return FunctionOracle(n=n, fn=fn, box=box, value_floor=0)


def lyapunov(p: PriceVector, instance: Instance, *, budget: int = DEFAULT_BUDGET) -> int:
    """Lyapunov value at p: total indirect utility plus revenue at full supply."""
    return LyapunovOracle(instance, budget=budget).value(p)


def lyapunov_step(X: ItemSet, p: PriceVector, instance: Instance, *,
                  budget: int = DEFAULT_BUDGET) -> int:
    """lyapunov(p + chi_X) - lyapunov(p); equals -deficiency(X, p) for valid inputs."""
    return LyapunovOracle(instance, budget=budget).step(X, p)


def deficiency(X: ItemSet, p: PriceVector, instance: Instance, *,
               budget: int = DEFAULT_BUDGET) -> int:
    """Deficiency of X at p, from demand primitives (never from Lyapunov values)."""
    return LyapunovOracle(instance, budget=budget).deficiency(X, p)
