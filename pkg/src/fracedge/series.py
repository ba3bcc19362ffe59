"""Truncated power series arithmetic.

A series is a 1-D complex array ``c`` standing for ``sum(c[j] * u**j)``
modulo ``u**len(c)``.  Used as the independent route for cumulants and for
the projection fixed-point check.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericError


def as_series(coeffs, order: int) -> np.ndarray:
    """Copy ``coeffs`` into a complex array of length ``order + 1``."""
    out = np.zeros(order + 1, dtype=complex)
    c = np.asarray(coeffs, dtype=complex).ravel()
    m = min(len(c), order + 1)
    out[:m] = c[:m]
    return out


def series_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = min(len(a), len(b))
    return np.convolve(a[:n], b[:n])[:n]


def series_exp(a: np.ndarray) -> np.ndarray:
    """``exp`` of a truncated series, via ``k e_k = sum_j j a_j e_{k-j}``."""
    n = len(a)
    e = np.zeros(n, dtype=complex)
    e[0] = np.exp(a[0])
    ja = np.arange(n) * a
    for k in range(1, n):
        e[k] = np.dot(ja[1 : k + 1], e[k - 1 :: -1][:k]) / k
    return e


def series_log(a: np.ndarray) -> np.ndarray:
    """Principal ``log`` of a truncated series with non-zero constant term."""
    n = len(a)
    if a[0] == 0:
        raise NumericError("log of a power series with zero constant term")
    b = np.zeros(n, dtype=complex)
    b[0] = np.log(a[0])
    for k in range(1, n):
        acc = sum(j * b[j] * a[k - j] for j in range(1, k))
        b[k] = (a[k] - acc / k) / a[0]
    return b
