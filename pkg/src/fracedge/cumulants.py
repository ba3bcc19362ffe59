"""Moments, cumulants and probabilists' Hermite polynomials."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Sequence

import numpy as np

from .combinatorics import enumerate_weighted_partitions, set_partition_weight
from .errors import BoundsError, PreconditionError
from .poly import Poly
from .series import as_series, series_exp, series_log

MAX_HERMITE_ORDER = 64


@dataclass(frozen=True)
class MomentVector:
    """Raw moments with ``alpha[k] = E X**k``; ``alpha[0]`` is always 1.

    ``exact`` holds the same values as fractions; it is filled from the
    floats unless a conversion produced it, so chained conversions stay exact.
    """

    alpha: tuple[float, ...]
    exact: tuple[Fraction, ...] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        alpha = tuple(float(a) for a in self.alpha)
        if len(alpha) < 2 or abs(alpha[0] - 1.0) > 1e-12:
            raise PreconditionError("moment vector needs alpha[0] = 1 and at least alpha[1]")
        object.__setattr__(self, "alpha", (1.0,) + alpha[1:])
        if self.exact is None or len(self.exact) != len(alpha):
            object.__setattr__(self, "exact", (Fraction(1),) + tuple(Fraction(a) for a in alpha[1:]))

    @classmethod
    def of(cls, *values: float) -> MomentVector:
        """Build from ``alpha_1, ..., alpha_m``."""
        return cls((1.0,) + tuple(values))

    @property
    def m(self) -> int:
        return len(self.alpha) - 1

    @property
    def variance(self) -> float:
        return self.alpha[2] - self.alpha[1] ** 2 if self.m >= 2 else float("nan")

    def __getitem__(self, k: int) -> float:
        return self.alpha[k]


@dataclass(frozen=True)
class CumulantVector:
    """Cumulants with ``gamma[k] = gamma_k``; ``gamma[0]`` is always 0."""

    gamma: tuple[float, ...]
    standardized: bool = False
    exact: tuple[Fraction, ...] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "gamma", tuple(float(g) for g in self.gamma))
        if self.exact is None or len(self.exact) != len(self.gamma):
            object.__setattr__(self, "exact", tuple(Fraction(g) for g in self.gamma))
        if len(self.gamma) < 2 or self.gamma[0] != 0.0:
            raise PreconditionError("cumulant vector needs gamma[0] = 0 and at least gamma[1]")
        if self.standardized:
            if self.m < 2 or abs(self.gamma[1]) > 1e-12 or abs(self.gamma[2] - 1.0) > 1e-12:
                raise PreconditionError("standardized cumulants need gamma_1 = 0 and gamma_2 = 1")

    @classmethod
    def of(cls, *values: float) -> CumulantVector:
        """Build from ``gamma_1, ..., gamma_m``."""
        return cls((0.0,) + tuple(values))

    @classmethod
    def standard(cls, *higher: float) -> CumulantVector:
        """Standardized vector from ``gamma_3, ..., gamma_m``."""
        return cls((0.0, 0.0, 1.0) + tuple(higher), standardized=True)

    @property
    def m(self) -> int:
        return len(self.gamma) - 1

    def __getitem__(self, k: int) -> float:
        return self.gamma[k]

    def truncated(self, m: int) -> CumulantVector:
        if m > self.m:
            raise BoundsError(f"cannot truncate order-{self.m} cumulants to order {m}")
        return CumulantVector(self.gamma[: m + 1], self.standardized, self.exact[: m + 1])

    def as_standardized(self) -> CumulantVector:
        return CumulantVector(self.gamma, True, self.exact)


def _partition_term(values: Sequence[Fraction], counts) -> Fraction:
    # k! prod (a_r / r!)**k_r / k_r!, with the exact integer weight
    term = Fraction(set_partition_weight(counts))
    for r, kr in enumerate(counts, start=1):
        if kr:
            term *= values[r] ** kr
    return term


def cumulants_from_moments(moments: MomentVector) -> CumulantVector:
    """Cumulants via the partition sum over weighted partitions of each order.

    Sums run in exact rational arithmetic and are rounded once at the end;
    in floating point they cancel heavily once moments stray from those of
    a well-spread law.
    """
    a = moments.exact
    gamma = [Fraction(0)]
    for p in range(1, moments.m + 1):
        total = Fraction(0)
        for counts in enumerate_weighted_partitions(p):
            j = counts.size
            total += (-1) ** (j - 1) * factorial(j - 1) * _partition_term(a, counts)
        gamma.append(total)
    return CumulantVector(tuple(float(g) for g in gamma), exact=tuple(gamma))


def moments_from_cumulants(cumulants: CumulantVector) -> MomentVector:
    """Inverse of :func:`cumulants_from_moments` (complete Bell polynomials)."""
    g = cumulants.exact
    alpha = [Fraction(1)]
    for p in range(1, cumulants.m + 1):
        alpha.append(sum((_partition_term(g, c) for c in enumerate_weighted_partitions(p)), Fraction(0)))
    return MomentVector(tuple(float(a) for a in alpha), exact=tuple(alpha))


def cumulants_by_series(moments: MomentVector) -> CumulantVector:
    """Independent route: Taylor-expand ``log sum alpha_k u**k / k!``.

    With ``u = i t`` this is the log of the characteristic function, so the
    ``k``-th coefficient times ``k!`` is ``gamma_k``.
    """
    m = moments.m
    coeffs = [moments.alpha[k] / factorial(k) for k in range(m + 1)]
    log_series = series_log(as_series(coeffs, m))
    return CumulantVector(tuple([0.0] + [log_series[k].real * factorial(k) for k in range(1, m + 1)]))


def moments_by_series(cumulants: CumulantVector) -> MomentVector:
    m = cumulants.m
    coeffs = [cumulants.gamma[k] / factorial(k) for k in range(m + 1)]
    exp_series = series_exp(as_series(coeffs, m))
    return MomentVector(tuple(exp_series[k].real * factorial(k) for k in range(m + 1)))


def hermite(k: int) -> Poly:
    """Probabilists' Hermite polynomial ``He_k`` with integer coefficients."""
    if not isinstance(k, int) or k < 0 or k > MAX_HERMITE_ORDER:
        raise BoundsError(f"Hermite order must be in [0, {MAX_HERMITE_ORDER}], got {k!r}")
    return _hermite_cached(k)


@lru_cache(maxsize=None)
def _hermite_cached(k: int) -> Poly:
    # He_{k} = x He_{k-1} - (k-1) He_{k-2}
    if k == 0:
        return Poly((1,))
    if k == 1:
        return Poly((0, 1))
    return Poly((0, 1)) * _hermite_cached(k - 1) - _hermite_cached(k - 2) * (k - 1)


def hermite_values(kmax: int, x) -> np.ndarray:
    """Rows ``He_0(x), ..., He_kmax(x)`` by the three-term recurrence."""
    x = np.asarray(x, dtype=float)
    out = np.empty((kmax + 1,) + x.shape)
    out[0] = 1.0
    if kmax >= 1:
        out[1] = x
    for j in range(1, kmax):
        out[j + 1] = x * out[j] - j * out[j - 1]
    return out
