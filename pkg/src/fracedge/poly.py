"""Dense univariate polynomials with (possibly complex) coefficients."""

from __future__ import annotations

from dataclasses import dataclass
from numbers import Number
from typing import Iterable, Sequence

import numpy as np


def _trim(coeffs: Sequence) -> tuple:
    c = list(coeffs)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return tuple(c) if c else (0,)


@dataclass(frozen=True)
class Poly:
    """Polynomial ``sum(coeffs[j] * x**j)``.

    Coefficients are kept exactly as given (ints stay ints), trailing zeros
    are trimmed, and the zero polynomial is ``Poly((0,))`` with degree -1.
    """

    coeffs: tuple

    def __init__(self, coeffs: Iterable = (0,)) -> None:
        object.__setattr__(self, "coeffs", _trim(tuple(coeffs)))

    @classmethod
    def monomial(cls, power: int, coeff: Number = 1) -> Poly:
        return cls((0,) * power + (coeff,))

    @property
    def degree(self) -> int:
        if len(self.coeffs) == 1 and self.coeffs[0] == 0:
            return -1
        return len(self.coeffs) - 1

    @property
    def low_degree(self) -> int:
        """Smallest power carrying a non-zero coefficient (-1 for zero)."""
        for j, c in enumerate(self.coeffs):
            if c != 0:
                return j
        return -1

    def is_zero(self) -> bool:
        return self.degree < 0

    def coeff(self, j: int):
        return self.coeffs[j] if 0 <= j < len(self.coeffs) else 0

    def as_array(self, size: int | None = None) -> np.ndarray:
        """Coefficients as a complex array, zero padded to ``size``."""
        n = len(self.coeffs) if size is None else size
        out = np.zeros(n, dtype=complex)
        m = min(n, len(self.coeffs))
        out[:m] = [complex(c) for c in self.coeffs[:m]]
        return out

    def __call__(self, x):
        # Horner; works for scalars and numpy arrays alike
        acc = np.zeros_like(np.asarray(x, dtype=complex)) if np.ndim(x) else 0j
        for c in reversed(self.coeffs):
            acc = acc * x + c
        if all(isinstance(c, (int, float)) or np.isrealobj(c) for c in self.coeffs):
            if np.isrealobj(x):
                return np.real(acc)
        return acc

    def __add__(self, other: Poly | Number) -> Poly:
        if not isinstance(other, Poly):
            other = Poly((other,))
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly(self.coeff(j) + other.coeff(j) for j in range(n))

    __radd__ = __add__

    def __neg__(self) -> Poly:
        return Poly(-c for c in self.coeffs)

    def __sub__(self, other: Poly | Number) -> Poly:
        return self + (-other if isinstance(other, Poly) else Poly((-other,)))

    def __mul__(self, other: Poly | Number) -> Poly:
        if not isinstance(other, Poly):
            return Poly(c * other for c in self.coeffs)
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly(out)

    __rmul__ = __mul__

    def allclose(self, other: Poly, atol: float = 0.0, rtol: float = 1e-14) -> bool:
        n = max(len(self.coeffs), len(other.coeffs))
        a, b = self.as_array(n), other.as_array(n)
        return bool(np.allclose(a, b, atol=atol, rtol=rtol))

    def __repr__(self) -> str:
        return f"Poly({list(self.coeffs)!r})"
