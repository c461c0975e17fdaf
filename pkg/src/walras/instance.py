"""Auction instances, valuation families, and the JSON disk format.

Everything here is exact integer arithmetic: valuations, prices and bundle
values are Python ints, never floats.  All types are immutable after
construction and safe to share across workers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import accumulate, product
from math import prod
from typing import Iterator, Mapping

from .errors import BudgetExceededError, InstanceFormatError

Bundle = tuple[int, ...]
PriceVector = tuple[int, ...]
ItemSet = frozenset[int]

UNIT = "unit"
MULTI = "multi"
MODELS = (UNIT, MULTI)

UNIT_DEMAND = "unit_demand"
SEPARABLE_CONCAVE = "separable_concave"
EXPLICIT_TABLE = "explicit_table"
FAMILIES = (UNIT_DEMAND, SEPARABLE_CONCAVE, EXPLICIT_TABLE)

#: Default cap on valuation evaluations per verifier / oracle call.
DEFAULT_BUDGET = 10**6


def _as_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"{where}: must be an integer")
    return value


def _as_nonneg_int(value, where: str) -> int:
    v = _as_int(value, where)
    if v < 0:
        raise ValueError(f"{where}: must be nonnegative")
    return v


def box_volume(u: Bundle) -> int:
    """Number of integer bundles in the box [0, u]."""
    return prod(c + 1 for c in u)


def iter_box(u: Bundle) -> Iterator[Bundle]:
    """Iterate the box [0, u] in lexicographic order."""
    return product(*(range(c + 1) for c in u))


@dataclass(frozen=True)
class Valuation:
    """One bidder's valuation, tagged by family.

    Exactly one payload field is populated:

    * ``values`` (unit_demand): per-item worth of a single unit; a bundle is
      worth its best contained item, the empty bundle worth 0.
    * ``marginals`` (separable_concave): per item, the worth of each extra
      unit, nonincreasing within an item.
    * ``table`` (explicit_table): a total map from every bundle in its box to
      an integer, stored as sorted (bundle, value) pairs.

    Raw valuations may violate monotonicity or normalization (the verifiers
    below report such defects); assembling an :class:`Instance` enforces them.
    """

    family: str
    values: tuple[int, ...] | None = None
    marginals: tuple[tuple[int, ...], ...] | None = None
    table: tuple[tuple[Bundle, int], ...] | None = None

    def __post_init__(self):
        if self.family == UNIT_DEMAND:
            if self.values is None or self.marginals is not None or self.table is not None:
                raise ValueError("values: unit_demand valuation takes exactly the 'values' payload")
            vals = tuple(_as_nonneg_int(v, f"values[{k}]") for k, v in enumerate(self.values))
            if not vals:
                raise ValueError("values: must not be empty")
            object.__setattr__(self, "values", vals)
        elif self.family == SEPARABLE_CONCAVE:
            if self.marginals is None or self.values is not None or self.table is not None:
                raise ValueError("marginals: separable_concave valuation takes exactly the 'marginals' payload")
            rows = []
            for i, row in enumerate(self.marginals):
                r = tuple(_as_nonneg_int(v, f"marginals[{i}][{k}]") for k, v in enumerate(row))
                if not r:
                    raise ValueError(f"marginals[{i}]: must list at least one unit")
                if any(r[k] < r[k + 1] for k in range(len(r) - 1)):
                    raise ValueError(f"marginals[{i}]: must be nonincreasing")
                rows.append(r)
            if not rows:
                raise ValueError("marginals: must not be empty")
            object.__setattr__(self, "marginals", tuple(rows))
            prefix = tuple(tuple(accumulate(row, initial=0)) for row in rows)
            object.__setattr__(self, "_prefix", prefix)
        elif self.family == EXPLICIT_TABLE:
            if self.table is None or self.values is not None or self.marginals is not None:
                raise ValueError("entries: explicit_table valuation takes exactly the 'entries' payload")
            pairs = []
            n = None
            for k, (x, v) in enumerate(self.table):
                xs = tuple(_as_nonneg_int(c, f"entries[{k}].x[{j}]") for j, c in enumerate(x))
                if n is None:
                    n = len(xs)
                elif len(xs) != n:
                    raise ValueError(f"entries[{k}].x: expected {n} components")
                pairs.append((xs, _as_int(v, f"entries[{k}].v")))
            if not pairs or n == 0:
                raise ValueError("entries: must cover a nonempty box")
            pairs.sort()
            box = tuple(max(x[j] for x, _ in pairs) for j in range(n))
            if len(pairs) != box_volume(box):
                raise ValueError("entries: must map every bundle in the box exactly once")
            for k in range(len(pairs) - 1):
                if pairs[k][0] == pairs[k + 1][0]:
                    raise ValueError(f"entries: duplicate bundle {pairs[k][0]}")
            object.__setattr__(self, "table", tuple(pairs))
            object.__setattr__(self, "_lookup", dict(pairs))
        else:
            raise ValueError(f"family: unknown family tag {self.family!r}")

    @property
    def n(self) -> int:
        if self.family == UNIT_DEMAND:
            return len(self.values)
        if self.family == SEPARABLE_CONCAVE:
            return len(self.marginals)
        return len(self.table[0][0])

    def box(self) -> Bundle:
        """Upper corner of this valuation's bundle domain."""
        if self.family == UNIT_DEMAND:
            return (1,) * len(self.values)
        if self.family == SEPARABLE_CONCAVE:
            return tuple(len(row) for row in self.marginals)
        return tuple(max(x[j] for x, _ in self.table) for j in range(self.n))

    @staticmethod
    def unit_demand(values) -> "Valuation":
        return Valuation(family=UNIT_DEMAND, values=tuple(values))

    @staticmethod
    def separable(marginals) -> "Valuation":
        return Valuation(family=SEPARABLE_CONCAVE, marginals=tuple(tuple(r) for r in marginals))

    @staticmethod
    def from_table(entries: Mapping[Bundle, int]) -> "Valuation":
        return Valuation(family=EXPLICIT_TABLE,
                         table=tuple((tuple(x), v) for x, v in entries.items()))


def evaluate(v: Valuation, x: Bundle) -> int:
    """Exact worth of bundle ``x`` under valuation ``v``.

    Raises ValueError when ``x`` falls outside the valuation's box.
    """
    box = v.box()
    if len(x) != len(box):
        raise ValueError(f"bundle out of box: expected {len(box)} components, got {len(x)}")
    for j, (c, cap) in enumerate(zip(x, box)):
        if isinstance(c, bool) or not isinstance(c, int) or not 0 <= c <= cap:
            raise ValueError(f"bundle out of box: component {j + 1} is {c!r}, box allows 0..{cap}")
    if v.family == UNIT_DEMAND:
        worth = 0
        for c, w in zip(x, v.values):
            if c and w > worth:
                worth = w
        return worth
    if v.family == SEPARABLE_CONCAVE:
        prefix = v._prefix
        return sum(prefix[j][c] for j, c in enumerate(x))
    return v._lookup[tuple(x)]


@dataclass(frozen=True)
class MnatCounterexample:
    """Witness that the single-improvement exchange property fails.

    For bundles ``x, y`` and 1-based item ``i`` with ``x(i) > y(i)``, no item
    ``k`` (including the "drop it" option k=0) makes the exchange profitable.
    """

    x: Bundle
    y: Bundle
    i: int


def verify_mnat_exc(v: Valuation, u: Bundle | None = None, *,
                    budget: int = DEFAULT_BUDGET) -> MnatCounterexample | None:
    """Exhaustively test the gross-substitutes exchange axiom on the box [0, u].

    Returns None when the axiom holds, else the first violating triple in
    lexicographic (x, y, ascending i) order.  The budget counts valuation
    evaluations, including memoized lookups during the pair scan.
    """
    if u is None:
        u = v.box()
    else:
        u = tuple(u)
        if len(u) != v.n or any(c < 0 or c > cap for c, cap in zip(u, v.box())):
            raise ValueError("u: verification box must lie inside the valuation's box")
    volume = box_volume(u)
    if volume > budget:
        raise BudgetExceededError(
            f"verification box volume {volume} exceeds budget {budget}")
    spent = volume
    bundles = list(iter_box(u))
    worth = {x: evaluate(v, x) for x in bundles}
    n = len(u)
    for x in bundles:
        wx = worth[x]
        for y in bundles:
            wy = worth[y]
            need = wx + wy
            up = [j for j in range(n) if x[j] > y[j]]
            if not up:
                continue
            down = [j for j in range(n) if x[j] < y[j]]
            for j in up:
                ok = False
                for k in down + [None]:
                    xx = list(x)
                    yy = list(y)
                    xx[j] -= 1
                    yy[j] += 1
                    if k is not None:
                        xx[k] += 1
                        yy[k] -= 1
                    spent += 2
                    if spent > budget:
                        raise BudgetExceededError(
                            f"exchange check exceeded budget {budget}")
                    if worth[tuple(xx)] + worth[tuple(yy)] >= need:
                        ok = True
                        break
                if not ok:
                    return MnatCounterexample(x=x, y=y, i=j + 1)
    return None


@dataclass(frozen=True)
class MonotonicityCounterexample:
    """Witness against monotone-nondecreasing, zero-normalized valuations."""

    x: Bundle | None
    i: int | None
    message: str


def verify_monotone_normalized(v: Valuation, u: Bundle | None = None, *,
                               budget: int = DEFAULT_BUDGET) -> MonotonicityCounterexample | None:
    """Check v(0) = 0 and componentwise monotonicity over the box [0, u]."""
    if u is None:
        u = v.box()
    else:
        u = tuple(u)
    volume = box_volume(u)
    n = len(u)
    if volume * (n + 1) > budget:
        raise BudgetExceededError(
            f"monotonicity scan of volume {volume} exceeds budget {budget}")
    if evaluate(v, (0,) * n) != 0:
        return MonotonicityCounterexample(x=None, i=None, message="v(0)≠0")
    for x in iter_box(u):
        wx = evaluate(v, x)
        for j in range(n):
            if x[j] < u[j]:
                step = list(x)
                step[j] += 1
                if evaluate(v, tuple(step)) < wx:
                    return MonotonicityCounterexample(
                        x=x, i=j + 1,
                        message=f"v decreases from {x} when adding item {j + 1}")
    return None


@dataclass(frozen=True)
class Instance:
    """A complete auction problem: model tag, supply, and bidder valuations."""

    model: str
    n: int
    u: Bundle
    valuations: tuple[Valuation, ...]

    def __post_init__(self):
        if self.model not in MODELS:
            raise InstanceFormatError(f"model: must be one of {MODELS}, got {self.model!r}")
        n = _as_int(self.n, "n")
        if n < 1:
            raise InstanceFormatError("n: must be a positive integer")
        u = tuple(self.u)
        if len(u) != n:
            raise InstanceFormatError(f"u: expected {n} entries, got {len(u)}")
        for i, c in enumerate(u):
            if isinstance(c, bool) or not isinstance(c, int) or c < 1:
                raise InstanceFormatError(f"u[{i}]: supply must be positive")
        if self.model == UNIT and any(c != 1 for c in u):
            raise InstanceFormatError("u: must be all ones for model 'unit'")
        object.__setattr__(self, "u", u)
        vals = tuple(self.valuations)
        object.__setattr__(self, "valuations", vals)
        for b, v in enumerate(vals):
            if not isinstance(v, Valuation):
                raise InstanceFormatError(f"valuations[{b}]: not a Valuation")
            if self.model == UNIT and v.family != UNIT_DEMAND:
                raise InstanceFormatError(
                    f"valuations[{b}].family: model 'unit' requires family 'unit_demand'")
            if v.box() != u:
                raise InstanceFormatError(
                    f"valuations[{b}]: domain box {v.box()} does not match supply {u}")
            if v.family == EXPLICIT_TABLE:
                bad = verify_monotone_normalized(v, u)
                if bad is not None:
                    raise InstanceFormatError(f"valuations[{b}]: {bad.message}")

    @property
    def m(self) -> int:
        return len(self.valuations)


def max_total_value(instance: Instance) -> int:
    """Largest worth any bidder assigns to the full supply bundle.

    The Lyapunov function is strictly increasing in any price coordinate
    beyond this value, so it bounds every minimizer's components.
    """
    if instance.m == 0:
        return 0
    if instance.model == UNIT:
        return max(max(v.values) for v in instance.valuations)
    return max(evaluate(v, instance.u) for v in instance.valuations)


# --- on-disk format ------------------------------------------------------

_TOP_KEYS = {"model", "n", "m", "u", "valuations"}
_FAMILY_KEYS = {
    UNIT_DEMAND: {"family", "values"},
    SEPARABLE_CONCAVE: {"family", "marginals"},
    EXPLICIT_TABLE: {"family", "entries"},
}


def _parse_valuation(raw, where: str) -> Valuation:
    if not isinstance(raw, dict):
        raise InstanceFormatError(f"{where}: must be a JSON object")
    family = raw.get("family")
    if family not in FAMILIES:
        raise InstanceFormatError(f"{where}.family: unknown family tag {family!r}")
    extra = set(raw) - _FAMILY_KEYS[family]
    if extra:
        raise InstanceFormatError(f"{where}.{sorted(extra)[0]}: unknown field")
    try:
        if family == UNIT_DEMAND:
            values = raw.get("values")
            if not isinstance(values, list):
                raise ValueError("values: must be a list")
            return Valuation.unit_demand(values)
        if family == SEPARABLE_CONCAVE:
            marginals = raw.get("marginals")
            if not isinstance(marginals, list) or not all(isinstance(r, list) for r in marginals):
                raise ValueError("marginals: must be a list of lists")
            return Valuation.separable(marginals)
        entries = raw.get("entries")
        if not isinstance(entries, list):
            raise ValueError("entries: must be a list")
        pairs = []
        for k, e in enumerate(entries):
            if not isinstance(e, dict) or set(e) != {"x", "v"} or not isinstance(e["x"], list):
                raise ValueError(f"entries[{k}]: must be an object with keys 'x' and 'v'")
            pairs.append((tuple(e["x"]), e["v"]))
        return Valuation(family=EXPLICIT_TABLE, table=tuple(pairs))
    except ValueError as exc:
        raise InstanceFormatError(f"{where}.{exc}") from None


def parse_instance(text: str) -> Instance:
    """Parse the JSON instance format into a validated Instance."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"malformed JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise InstanceFormatError("instance: must be a JSON object")
    extra = set(raw) - _TOP_KEYS
    if extra:
        raise InstanceFormatError(f"{sorted(extra)[0]}: unknown field")
    for key in ("model", "n", "m", "valuations"):
        if key not in raw:
            raise InstanceFormatError(f"{key}: missing required field")
    model = raw["model"]
    if model not in MODELS:
        raise InstanceFormatError(f"model: must be 'unit' or 'multi', got {model!r}")
    try:
        n = _as_int(raw["n"], "n")
        m = _as_int(raw["m"], "m")
    except ValueError as exc:
        raise InstanceFormatError(str(exc)) from None
    if n < 1:
        raise InstanceFormatError("n: must be a positive integer")
    if m < 0:
        raise InstanceFormatError("m: must be nonnegative")
    if "u" in raw:
        u = raw["u"]
        if not isinstance(u, list):
            raise InstanceFormatError("u: must be a list")
        if len(u) != n:
            raise InstanceFormatError(f"u: expected {n} entries, got {len(u)}")
        for i, c in enumerate(u):
            if isinstance(c, bool) or not isinstance(c, int):
                raise InstanceFormatError(f"u[{i}]: must be an integer")
            if c < 1:
                raise InstanceFormatError(f"u[{i}]: supply must be positive")
        u = tuple(u)
    elif model == UNIT:
        u = (1,) * n
    else:
        raise InstanceFormatError("u: missing required field for model 'multi'")
    raw_vals = raw["valuations"]
    if not isinstance(raw_vals, list):
        raise InstanceFormatError("valuations: must be a list")
    if len(raw_vals) != m:
        raise InstanceFormatError("m: does not match the number of valuation records")
    valuations = tuple(_parse_valuation(rv, f"valuations[{k}]")
                       for k, rv in enumerate(raw_vals))
    return Instance(model=model, n=n, u=u, valuations=valuations)


def serialize_instance(instance: Instance) -> str:
    """Serialize an Instance to its canonical JSON text (round-trips exactly)."""
    vals = []
    for v in instance.valuations:
        if v.family == UNIT_DEMAND:
            vals.append({"family": v.family, "values": list(v.values)})
        elif v.family == SEPARABLE_CONCAVE:
            vals.append({"family": v.family, "marginals": [list(r) for r in v.marginals]})
        else:
            vals.append({"family": v.family,
                         "entries": [{"x": list(x), "v": w} for x, w in v.table]})
    doc = {"model": instance.model, "n": instance.n, "m": instance.m,
           "u": list(instance.u), "valuations": vals}
    return json.dumps(doc, indent=2) + "\n"


def load_instance(path: str) -> Instance:
    """Read and parse an instance file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InstanceFormatError(f"{path}: {exc.strerror or exc}") from None
    return parse_instance(text)
