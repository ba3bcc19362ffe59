"""Expansion polynomials, density corrections and the order-m approximants.

Conventions: the Fourier transform is ``int exp(i t x) f(x) dx`` and
polynomials ``P_k``/``a_k`` are stored in the variable ``t`` so that the
Fourier-side factor is ``P_k(i t)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial, floor, pi, sqrt

import numpy as np

from .combinatorics import enumerate_weighted_partitions
from .cumulants import CumulantVector, hermite
from .errors import BoundsError, NumericError, PreconditionError
from .poly import Poly
from .series import as_series, series_log, series_mul

_INV_SQRT_2PI = 1.0 / sqrt(2.0 * pi)


@dataclass(frozen=True)
class ExpansionOrder:
    """Moment order ``s >= 2`` split into ``m = floor(s)`` and ``s - m``."""

    s: float
    m: int = field(init=False)
    alpha_frac: float = field(init=False)

    def __post_init__(self) -> None:
        if not np.isfinite(self.s) or self.s < 2:
            raise PreconditionError(f"moment order s must be >= 2, got {self.s!r}")
        m = int(floor(self.s))
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "alpha_frac", float(self.s - m))


def _require_standardized(cumulants: CumulantVector) -> None:
    if cumulants.m < 2 or abs(cumulants[1]) > 1e-12 or abs(cumulants[2] - 1.0) > 1e-12:
        raise PreconditionError("expansion polynomials need standardized cumulants (gamma_1=0, gamma_2=1)")


def _partition_coefficient(counts, cumulants: CumulantVector) -> float:
    # prod_j (gamma_{j+2}/(j+2)!)**p_j / p_j!, with one exact integer denominator
    num = 1.0
    den = 1
    for j, p in enumerate(counts, start=1):
        if p:
            num *= cumulants[j + 2] ** p
            den *= factorial(p) * factorial(j + 2) ** p
    return num / den


def _expansion_terms(k: int, max_part: int, cumulants: CumulantVector):
    """Yield ``(number_of_parts, weight)`` for partitions of ``k`` with parts <= max_part."""
    for counts in enumerate_weighted_partitions(k):
        if any(counts[max_part:]):
            continue
        if counts.size and max(j for j, p in enumerate(counts, start=1) if p) + 2 > cumulants.m:
            continue
        w = _partition_coefficient(counts, cumulants)
        if w != 0.0:
            yield counts.size, w


def ak_polynomial(k: int, m: int, cumulants: CumulantVector) -> Poly:
    """Coefficient of ``z**k`` in ``exp(W_z(t))`` as a polynomial in ``t``.

    Only cumulants up to order ``m`` enter, i.e. parts of size at most ``m-2``.
    """
    if k < 1:
        raise BoundsError(f"a_k needs k >= 1, got {k}")
    if m < 3 or m > cumulants.m:
        raise BoundsError(f"need 3 <= m <= {cumulants.m}, got m={m}")
    _require_standardized(cumulants)
    coeffs = [0.0] * (3 * k + 1)
    for j, w in _expansion_terms(k, m - 2, cumulants):
        coeffs[k + 2 * j] += w
    return Poly(coeffs)


def pk_polynomial(k: int, cumulants: CumulantVector) -> Poly:
    """``P_k(t)``; depends on ``gamma_3, ..., gamma_{k+2}`` only."""
    if k < 1 or k > cumulants.m - 2:
        raise BoundsError(f"P_k needs 1 <= k <= {cumulants.m - 2}, got k={k}")
    return ak_polynomial(k, k + 2, cumulants)


@dataclass(frozen=True)
class HermiteTerm:
    """``q_k(x) = phi(x) * sum_j c_j He_j(x)`` kept in Hermite form."""

    k: int
    hermite_coeffs: tuple[tuple[int, float], ...]

    @property
    def poly(self) -> Poly:
        out = Poly((0,))
        for order, c in self.hermite_coeffs:
            out = out + hermite(order) * c
        return out

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(-0.5 * x * x) * _INV_SQRT_2PI * self.poly(x)


def qk_density_term(k: int, cumulants: CumulantVector) -> HermiteTerm:
    if k < 1 or k > cumulants.m - 2:
        raise BoundsError(f"q_k needs 1 <= k <= {cumulants.m - 2}, got k={k}")
    _require_standardized(cumulants)
    acc: dict[int, float] = {}
    for j, w in _expansion_terms(k, k, cumulants):
        acc[k + 2 * j] = acc.get(k + 2 * j, 0.0) + w
    return HermiteTerm(k, tuple(sorted(acc.items())))


@dataclass(frozen=True)
class EdgeworthApproximant:
    """The order-``m`` approximant at sample count ``n``.

    ``density(x)`` is ``phi_m`` and ``fourier(t)`` is ``u_m(t, n**-0.5)``.
    """

    order: ExpansionOrder
    cumulants: CumulantVector
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise PreconditionError(f"sample count must be positive, got {self.n}")
        if self.cumulants.m < self.order.m:
            raise PreconditionError(
                f"order m={self.order.m} needs cumulants through gamma_{self.order.m}, have {self.cumulants.m}"
            )
        _require_standardized(self.cumulants)

    @property
    def m(self) -> int:
        return self.order.m

    @property
    def corrections(self) -> tuple[HermiteTerm, ...]:
        return tuple(qk_density_term(k, self.cumulants) for k in range(1, self.m - 1))

    @property
    def fourier_polys(self) -> tuple[Poly, ...]:
        return tuple(pk_polynomial(k, self.cumulants) for k in range(1, self.m - 1))

    def density(self, x):
        return phi_m(self, x)

    def fourier(self, t, z: float | None = None):
        return u_m_fourier(self, t, self.n ** -0.5 if z is None else z)


def phi_m(approx: EdgeworthApproximant, x):
    x = np.asarray(x, dtype=float)
    poly = Poly((1,))
    for k, q in enumerate(approx.corrections, start=1):
        poly = poly + q.poly * approx.n ** (-k / 2)
    return np.exp(-0.5 * x * x) * _INV_SQRT_2PI * poly(x)


def _u_m(polys, t, z):
    t = np.asarray(t, dtype=float)
    it = 1j * t
    acc = np.ones_like(it)
    for k, pk in enumerate(polys, start=1):
        acc = acc + pk(it) * z**k
    return np.exp(-0.5 * t * t) * acc


def u_m_fourier(approx: EdgeworthApproximant, t, z):
    """``exp(-t^2/2) (1 + sum_{k<=m-2} P_k(i t) z^k)``."""
    return _u_m(approx.fourier_polys, t, z)


def e_m(cumulants: CumulantVector, m: int, t):
    """``u_m(t, 1)``: the projection ``T_m`` applied to a law with these cumulants."""
    if m < 2 or m > cumulants.m:
        raise BoundsError(f"need 2 <= m <= {cumulants.m}, got {m}")
    return _u_m([pk_polynomial(k, cumulants) for k in range(1, m - 1)], t, 1.0)


def tm_projection_check(cumulants: CumulantVector, m: int) -> CumulantVector:
    """Cumulants of ``e_m`` read off its Taylor series at the origin.

    Works in ``u = i t``: ``e_m = exp(u^2/2) (1 + sum P_k(u))`` and the
    cumulants are ``k!`` times the coefficients of its logarithm.
    """
    if m < 3 or m > cumulants.m:
        raise BoundsError(f"need 3 <= m <= {cumulants.m}, got {m}")
    gauss = np.zeros(m + 1, dtype=complex)
    for j in range(0, m + 1, 2):
        gauss[j] = 0.5 ** (j // 2) / factorial(j // 2)
    poly = Poly((1,))
    for k in range(1, m - 1):
        poly = poly + pk_polynomial(k, cumulants)
    series = series_mul(gauss, as_series(poly.as_array(), m))
    logs = series_log(series)
    return CumulantVector(tuple([0.0] + [logs[k].real * factorial(k) for k in range(1, m + 1)]))


def cumulant_polynomial(cumulants: CumulantVector, m: int, t, z):
    """``W_z(t) = sum_{k=1}^{m-2} gamma_{k+2}/(k+2)! (i t)^{k+2} z^k``."""
    if m > cumulants.m:
        raise BoundsError(f"m={m} exceeds cumulant order {cumulants.m}")
    it = 1j * np.asarray(t)
    return sum((cumulants[k + 2] / factorial(k + 2)) * it ** (k + 2) * z**k for k in range(1, m - 1)) + 0j * it


def _tail_terms(cumulants: CumulantVector, m: int, z, t, K: int) -> np.ndarray:
    it = 1j * t
    return np.array([abs(ak_polynomial(k, m, cumulants)(it) * z**k) for k in range(1, K + 1)])


def tail_bound_check(cumulants: CumulantVector, m: int, z: complex, t: complex, K: int) -> tuple[float, float]:
    """Both sides of the tail estimate for ``sum_{k>=m-1} |a_k(i t) z^k|``.

    The infinite sum is cut at ``K``; a ``NumericError`` is raised unless the
    last two retained terms are at most half the two before them (or are
    negligible), so the partial sum is a faithful stand-in for the tail.
    """
    if abs(t) > 1:
        raise PreconditionError(f"tail bound is stated for |t| <= 1, got |t|={abs(t):.6g}")
    if m < 3 or m > cumulants.m:
        raise BoundsError(f"need 3 <= m <= {cumulants.m}, got {m}")
    if K < m + 2:
        raise BoundsError(f"truncation K={K} leaves no room for the tail guard (need K >= {m + 2})")
    terms = _tail_terms(cumulants, m, z, t, K)
    lhs = float(terms[m - 2 :].sum())
    last, before = max(terms[-2:]), max(terms[-4:-2])
    if last > 0.5 * before and last > 1e-15 * max(lhs, 1e-300):
        raise NumericError(f"tail of a_k(it)z^k not yet geometric at K={K} (last={last:.3e}, before={before:.3e})")
    cz = sum(abs(cumulants[k]) / factorial(k) * abs(z) ** (k - 2) for k in range(3, m + 1))
    rhs = float(np.expm1(cz) * abs(t) ** (m + 1))
    return lhs, rhs


def exp_cumulant_residual(cumulants: CumulantVector, m: int, t, z, K: int) -> float:
    """``|exp(W_z(t)) - 1 - sum_{k=1}^K a_k(i t) z^k|``."""
    w = cumulant_polynomial(cumulants, m, t, z)
    partial = sum(ak_polynomial(k, m, cumulants)(1j * t) * z**k for k in range(1, K + 1))
    return float(abs(np.expm1(w) - partial))


def expansion_remainder(cumulants: CumulantVector, m: int, t, z) -> float:
    """``|exp(W_z(t)) - 1 - sum_{k<=m-2} P_k(i t) z^k|``, the tail sum in closed form."""
    w = cumulant_polynomial(cumulants, m, t, z)
    head = sum(pk_polynomial(k, cumulants)(1j * t) * z**k for k in range(1, m - 1))
    return float(abs(np.expm1(w) - head))

