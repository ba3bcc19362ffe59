"""Binomial smoothing of an unbounded density.

The density is split at a threshold ``M`` into ``rho = a p + b q`` with
``p`` bounded.  Convolution terms with few ``p`` factors are dropped and the
rest renormalized, which gives a bounded density within ``2 beta_n`` (in
total variation) of the true density of the normalized sum.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from math import comb, lgamma, log, sqrt
from typing import Iterable, Sequence, TextIO

import numpy as np
from scipy import integrate
from scipy.special import logsumexp

from .charfun import DistributionModel, v_n
from .errors import BoundsError, PreconditionError, ResolutionError
from .gridoracle import GridDensity, _convolve_pair, self_convolve

MAX_SMOOTHING_N = 64


@dataclass
class SmoothingDecomposition:
    M: float
    a: float
    b: float
    p_part: GridDensity
    q_part: GridDensity | None
    c: float
    trivial: bool = False
    m: int | None = None

    @property
    def h(self) -> float:
        return self.p_part.h


def threshold_split(rho: GridDensity, c: float, bounded: bool | None = None) -> SmoothingDecomposition:
    """Split ``rho`` at the smallest grid value ``M`` with ``int_{rho>M} rho < c/2``.

    For a bounded density (``bounded=True``, or the grid's own ``bounded``
    tag) ``M`` is the maximum and the split is trivial.
    """
    if not (0.0 < c < 1.0):
        raise PreconditionError(f"c must lie in (0, 1), got {c}")
    vals = rho.values
    if vals.min() < -1e-12:
        raise PreconditionError("threshold split needs a non-negative density grid")
    if bounded is None:
        bounded = bool(rho.meta.get("bounded", False))
    if bounded:
        p = GridDensity(rho.h, vals / rho.mass(), meta=dict(rho.meta))
        return SmoothingDecomposition(float(vals.max()), 1.0, 0.0, p, None, c, trivial=True)
    order = np.argsort(vals, kind="stable")[::-1]
    top = vals[order]
    cum = rho.h * np.cumsum(top)
    # number of largest cells whose mass stays below c/2
    k = int(np.searchsorted(cum, 0.5 * c, side="left"))
    if k == 0:
        raise ResolutionError(f"the largest grid cell alone carries mass {cum[0]:.3e} >= c/2; refine the grid")
    M = float(top[k])
    high = vals > M
    b = float(rho.h * vals[high].sum())
    a = float(rho.h * vals[~high].sum())
    if b <= 0:
        raise ResolutionError("threshold leaves no mass above M; the grid cannot resolve the peak")
    p = GridDensity(rho.h, np.where(high, 0.0, vals) / a, meta=dict(rho.meta))
    q = GridDensity(rho.h, np.where(high, vals, 0.0) / b, meta=dict(rho.meta))
    return SmoothingDecomposition(M, a, b, p, q, c)


def beta_n(n: int, m: int, a: float, b: float) -> float:
    """``sum_{k=0}^{m+1} C(n,k) a^k b^(n-k)``."""
    return float(sum(comb(n, k) * a**k * b ** (n - k) for k in range(0, min(m + 1, n) + 1)))


def log_beta_n(n: int, m: int, a: float, b: float) -> float:
    if b == 0.0:
        return -np.inf if n > m + 1 else log(sum(comb(n, k) * a**k * b ** (n - k) for k in range(n + 1)))
    terms = [lgamma(n + 1) - lgamma(k + 1) - lgamma(n - k + 1) + k * log(a) + (n - k) * log(b) for k in range(0, min(m + 1, n) + 1)]
    return float(logsumexp(terms))


def first_good_n(m: int, a: float, b: float, c: float, n_max: int = 2000) -> int | None:
    """Smallest ``n_1`` with ``beta_n < c^n / 2`` for every ``n_1 <= n <= n_max``."""
    n1 = None
    for n in range(1, n_max + 1):
        ok = log_beta_n(n, m, a, b) < n * log(c) - log(2.0)
        if ok and n1 is None:
            n1 = n
        elif not ok:
            n1 = None
    return n1


@dataclass
class ModifiedDensityReport:
    n: int
    beta_n: float
    tv_gap: float
    bound_2beta: float
    rho_tilde: GridDensity
    mass: float

    @property
    def within_bound(self) -> bool:
        return self.tv_gap <= self.bound_2beta


def modified_density(decomp: SmoothingDecomposition, n: int, m: int, budget: float = 1e-6) -> ModifiedDensityReport:
    """Build ``rho~_n`` from the binomial terms with at least ``m+2`` bounded factors."""
    if n < m + 2:
        raise PreconditionError(f"need n >= m + 2 = {m + 2}, got n={n}")
    if n > MAX_SMOOTHING_N:
        raise BoundsError(f"n={n} exceeds the desk-scale cap {MAX_SMOOTHING_N}")
    h = decomp.h
    rho = decomp.p_part if decomp.trivial else GridDensity(
        h, decomp.a * decomp.p_part.values + decomp.b * decomp.q_part.values
    )
    rho_n = self_convolve(rho, n, budget=budget)
    n_max = (rho_n.values.size - 1) // 2
    if decomp.trivial:
        vals = rho_n.values
        beta = 0.0
    else:
        a, b = decomp.a, decomp.b
        beta = beta_n(n, m, a, b)
        p_pows = [np.array([1.0 / h])]
        for _ in range(n):
            p_pows.append(_convolve_pair(p_pows[-1], decomp.p_part.values, h, n_max)[0])
        acc = np.zeros(2 * n_max + 1)
        q_pow = np.array([1.0 / h])
        for j in range(0, n - m - 1):
            k = n - j
            term, _ = _convolve_pair(p_pows[k], q_pow, h, n_max)
            off = n_max - (term.size - 1) // 2
            acc[off : off + term.size] += comb(n, k) * a**k * b**j * term
            q_pow, _ = _convolve_pair(q_pow, decomp.q_part.values, h, n_max)
        vals = acc / (1.0 - beta)
    tilde = GridDensity(h / sqrt(n), vals * sqrt(n), meta={"n": n, "source": "smoothing"})
    target = GridDensity(h / sqrt(n), rho_n.values * sqrt(n))
    mass = tilde.mass()
    if abs(mass - 1.0) > max(budget, 1e-6):
        raise ResolutionError(f"modified density integrates to {mass:.9f}, not 1")
    tv = float(tilde.h * np.abs(tilde.values - target.values).sum())
    return ModifiedDensityReport(n, beta, tv, 2.0 * beta, tilde, mass)


def reports_to_csv(reports: Iterable[ModifiedDensityReport], out: TextIO) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["n", "beta_n", "tv_gap", "bound_2beta"])
    for r in reports:
        w.writerow([r.n, f"{r.beta_n:.17g}", f"{r.tv_gap:.17g}", f"{r.bound_2beta:.17g}"])


@dataclass
class TailProbeReport:
    n: int
    T: np.ndarray
    integrals: np.ndarray
    sigma2: float
    fit_residual: float
    notes: list[str] = field(default_factory=list)

    @property
    def decreasing(self) -> bool:
        return bool(np.all(np.diff(self.integrals) < 0))


def _tail_integral(f, T: float) -> float:
    total, a = 0.0, T
    for _ in range(80):
        piece, _err = integrate.quad(f, a, a + max(1.0, a), limit=400, epsabs=0.0, epsrel=1e-10)
        total += piece
        a += max(1.0, a)
        if piece <= 1e-15 * max(total, 1e-300):
            break
    return 2.0 * total


def tail_integral_probe(source: DistributionModel | SmoothingDecomposition, n_list: Sequence[int], T_list: Sequence[float], m: int = 2) -> list[TailProbeReport]:
    """Tail integrals ``int_{|t|>=T} |v~_n(t)| dt`` and a log-quadratic fit in ``T``.

    For a model the integrand is ``|v(t/sqrt n)|^n``, integrated adaptively.
    For a decomposition it is the transform of ``rho~_n`` built from the
    grid transforms of ``p`` and ``q``; a grid transform is periodic, so the
    integral stops at the grid's Nyquist frequency and a note is added if
    the integrand has not died out there.
    """
    out = []
    for n in n_list:
        T = np.asarray(T_list, dtype=float)
        if np.any(T < 0) or np.any(T > sqrt(n) * (1 + 1e-12)):
            raise PreconditionError(f"T values must lie in [0, sqrt(n)] = [0, {sqrt(n):.4g}]")
        notes = []
        if isinstance(source, DistributionModel):
            f = lambda t, n=n: float(abs(v_n(source, np.array([t]), n)[0]))
            I = np.array([_tail_integral(f, float(x)) for x in T])
        else:
            I, note = _decomposition_tail(source, n, m, T)
            if note:
                notes.append(note)
        pos = I > 0
        if pos.sum() >= 2:
            slope, icpt = np.polyfit(-(T[pos] ** 2), np.log(I[pos]), 1)
            fit = np.exp(icpt - slope * T[pos] ** 2)
            resid = float(np.max(np.abs(fit - I[pos]) / I[pos]))
        else:
            slope, resid = float("nan"), float("nan")
            notes.append("fewer than two positive tail integrals")
        out.append(TailProbeReport(n, T, I, float(slope), resid, notes))
    return out


def _half_spectrum(g: GridDensity, pad: int) -> tuple[np.ndarray, np.ndarray]:
    """Grid transform ``h sum_j f_j exp(i tau x_j)`` on ``0 <= tau <= pi/h``."""
    size = pad * g.values.size
    spec = g.h * np.fft.ifft(g.values, n=size) * size
    tau = 2.0 * np.pi * np.arange(size) / (size * g.h)
    keep = tau <= np.pi / g.h
    # node 0 sits at x = -L: undo that shift
    return tau[keep], spec[keep] * np.exp(-1j * tau[keep] * g.L)


def _decomposition_tail(decomp: SmoothingDecomposition, n: int, m: int, T: np.ndarray, pad: int = 8):
    tau, ph = _half_spectrum(decomp.p_part, pad)
    if decomp.trivial:
        mod = np.abs(ph) ** n
    else:
        a, b = decomp.a, decomp.b
        _, qh = _half_spectrum(decomp.q_part, pad)
        beta = beta_n(n, m, a, b)
        s = sum(comb(n, k) * a**k * b ** (n - k) * ph**k * qh ** (n - k) for k in range(m + 2, n + 1))
        mod = np.abs(s) / (1.0 - beta)
    t = tau * sqrt(n)
    seg = 0.5 * (mod[1:] + mod[:-1]) * np.diff(t)
    tail_from = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])
    I = 2.0 * np.interp(T, t, tail_from)
    note = ""
    if mod[-1] * sqrt(n) / max(I.min(), 1e-300) > 1e-3:
        note = f"integrand not negligible at the grid Nyquist frequency (|v~|={mod[-1]:.2e})"
    return I, note
