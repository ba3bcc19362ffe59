"""Weighted integer partitions and the Faa di Bruno chain rule.

Every partition-indexed sum in the expansion machinery runs over the
non-negative solutions of ``p_1 + 2 p_2 + ... + k p_k = k``.  They are
enumerated here once, in lexicographic order, and cached.
"""

from __future__ import annotations

from functools import lru_cache
from math import factorial
from typing import Sequence

from .errors import ArityError, BoundsError

MAX_PARTITION_ORDER = 32
MAX_CHAIN_ORDER = 20


class WeightedPartition(tuple):
    """Tuple of counts ``(p_1, ..., p_k)`` with ``sum(r * p_r) == k``."""

    __slots__ = ()

    @property
    def weight(self) -> int:
        """The ``k`` this tuple partitions, ``sum(r * p_r)``."""
        return sum((r + 1) * p for r, p in enumerate(self))

    @property
    def size(self) -> int:
        """Number of parts, ``j = sum(p_r)``."""
        return sum(self)


def _generate(k: int) -> list[WeightedPartition]:
    out: list[WeightedPartition] = []
    counts = [0] * k

    def rec(r: int, remaining: int) -> None:
        # r is the 1-based part size whose multiplicity is chosen next
        if r > k:
            if remaining == 0:
                out.append(WeightedPartition(counts))
            return
        for p in range(remaining // r + 1):
            counts[r - 1] = p
            rec(r + 1, remaining - r * p)
        counts[r - 1] = 0

    rec(1, k)
    return out


@lru_cache(maxsize=None)
def _cached(k: int) -> tuple[WeightedPartition, ...]:
    return tuple(_generate(k))


def enumerate_weighted_partitions(k: int) -> list[WeightedPartition]:
    """All ``(p_1, ..., p_k)`` with ``p_1 + 2 p_2 + ... + k p_k = k``.

    The result is in lexicographic order and has ``p(k)`` entries, where
    ``p`` is the integer partition function.
    """
    if not isinstance(k, int) or k < 1 or k > MAX_PARTITION_ORDER:
        raise BoundsError(f"k must be an integer in [1, {MAX_PARTITION_ORDER}], got {k!r}")
    return list(_cached(k))


@lru_cache(maxsize=None)
def set_partition_weight(counts: WeightedPartition) -> int:
    """Exact ``k! / prod(p_r! * (r!)**p_r)`` for a weighted partition of ``k``."""
    k = counts.weight
    denom = 1
    for r, p in enumerate(counts, start=1):
        denom *= factorial(p) * factorial(r) ** p
    return factorial(k) // denom


def faa_di_bruno(outer_derivs: Sequence[complex], inner_derivs: Sequence[complex], p: int) -> complex:
    """``p``-th derivative of ``z(y(t))`` from derivatives of ``z`` and ``y``.

    Parameters
    ----------
    outer_derivs
        ``outer_derivs[j]`` is the ``j``-th derivative of ``z`` evaluated at
        ``y(t)``; index 0 (the value itself) is not used.
    inner_derivs
        ``inner_derivs[r]`` is the ``r``-th derivative of ``y`` at ``t``.
    p
        Derivative order, ``1 <= p <= 20``.
    """
    if not isinstance(p, int) or p < 1 or p > MAX_CHAIN_ORDER:
        raise BoundsError(f"p must be an integer in [1, {MAX_CHAIN_ORDER}], got {p!r}")
    if len(outer_derivs) < p + 1 or len(inner_derivs) < p + 1:
        raise ArityError(
            f"order {p} needs derivatives 0..{p} of both functions; got "
            f"{len(outer_derivs)} outer and {len(inner_derivs)} inner values"
        )
    total = 0j
    for counts in enumerate_weighted_partitions(p):
        term = complex(outer_derivs[counts.size]) * set_partition_weight(counts)
        for r, kr in enumerate(counts, start=1):
            if kr:
                term *= complex(inner_derivs[r]) ** kr
        total += term
    return total
