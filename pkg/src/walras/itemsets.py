"""Bitmask helpers for sets of items labelled 1..n.

Item ``i`` corresponds to bit ``i - 1``.  Masks keep the exhaustive subset
scans cheap; public APIs exchange ``frozenset[int]`` values.
"""

from __future__ import annotations

from typing import Iterable, Iterator


def mask_from_items(items: Iterable[int], n: int) -> int:
    """Pack a collection of 1-based item labels into a bitmask."""
    mask = 0
    for i in items:
        if not isinstance(i, int) or isinstance(i, bool) or not 1 <= i <= n:
            raise ValueError(f"item label {i!r} outside 1..{n}")
        mask |= 1 << (i - 1)
    return mask


def items_from_mask(mask: int) -> frozenset[int]:
    """Unpack a bitmask into the frozenset of 1-based item labels."""
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return frozenset(out)


def chi_add(p: tuple[int, ...], mask: int) -> tuple[int, ...]:
    """Return ``p + chi_X`` for the item set encoded by ``mask``."""
    return tuple(c + ((mask >> k) & 1) for k, c in enumerate(p))


def chi_sub(p: tuple[int, ...], mask: int) -> tuple[int, ...]:
    """Return ``p - chi_X`` for the item set encoded by ``mask``."""
    return tuple(c - ((mask >> k) & 1) for k, c in enumerate(p))


def mask_weight(mask: int, weights: tuple[int, ...]) -> int:
    """Sum ``weights`` over the coordinates selected by ``mask``."""
    total = 0
    k = 0
    while mask:
        if mask & 1:
            total += weights[k]
        mask >>= 1
        k += 1
    return total


def proper_submasks(mask: int) -> Iterator[int]:
    """Yield every proper submask of ``mask``, including 0, excluding ``mask``."""
    sub = (mask - 1) & mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def subset_sums(vec: tuple[int, ...], n: int) -> list[int]:
    """Table of ``sum(vec[k] for k in mask)`` for every mask over n coordinates."""
    size = 1 << n
    out = [0] * size
    for mask in range(1, size):
        low = mask & -mask
        out[mask] = out[mask ^ low] + vec[low.bit_length() - 1]
    return out
