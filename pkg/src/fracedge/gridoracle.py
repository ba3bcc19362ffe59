"""Ground-truth densities of normalized sums on uniform grids.

Two independent routes: repeated grid convolution of the summand density,
and trapezoidal Fourier inversion of ``v(t/sqrt(n))**n``.  They share no
numerical machinery beyond numpy's FFT.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field
from math import ceil, floor, pi, sqrt
from typing import Optional, TextIO

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline
from scipy.signal import fftconvolve

from .charfun import DistributionModel, v_n
from .edgeworth import EdgeworthApproximant, phi_m
from .errors import ConfigurationError, PreconditionError, TruncationError

DEFAULT_H = 1.0 / 256.0
DEFAULT_L = 16.0
DEFAULT_L_MAX = 64.0
MAX_FFT_SIZE = 2**24

# error powers eliminated at each level count: c2*h^2 (levels=2), c1*h + c2*h^2 (levels=3)
_RICHARDSON_POWERS = {1: (), 2: (2,), 3: (1, 2)}


def _richardson_weights(levels: int, ratio: int) -> np.ndarray:
    """Weights on spacings ``h, h/ratio, h/ratio^2, ...`` cancelling the listed error powers."""
    powers = _RICHARDSON_POWERS[levels]
    A = np.ones((levels, levels))
    for row, p in enumerate(powers, start=1):
        A[row] = [float(ratio) ** (-p * j) for j in range(levels)]
    rhs = np.zeros(levels)
    rhs[0] = 1.0
    return np.linalg.solve(A, rhs)


@dataclass
class GridDensity:
    """Samples ``values[i] ~ f(x_i)`` with ``x_i = (i - N) h``, ``i = 0..2N``."""

    h: float
    values: np.ndarray
    mass_lost: float = 0.0
    error_budget: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.h <= 0:
            raise PreconditionError(f"grid spacing must be positive, got {self.h}")
        if self.values.ndim != 1 or self.values.size % 2 == 0:
            raise PreconditionError("grid values must be a 1-D array of odd length (symmetric grid)")

    @property
    def N(self) -> int:
        return (self.values.size - 1) // 2

    @property
    def L(self) -> float:
        return self.N * self.h

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.values.size) - self.N) * self.h

    def mass(self) -> float:
        return float(self.h * self.values.sum())

    def moment(self, k: int) -> float:
        return float(self.h * np.sum(self.x**k * self.values))

    def check_probability(self, tol: float = 1e-6) -> None:
        m = self.mass()
        if abs(m - 1.0) > tol:
            raise PreconditionError(f"grid mass {m:.12g} differs from 1 by more than {tol:g}")
        if self.values.min() < -1e-12:
            raise PreconditionError(f"grid has negative values down to {self.values.min():.3e}")

    def at(self, x) -> np.ndarray:
        """Cubic spline interpolation; zero outside the grid."""
        x = np.asarray(x, dtype=float)
        spline = CubicSpline(self.x, self.values)
        out = spline(x)
        return np.where(np.abs(x) <= self.L * (1 + 1e-12), out, 0.0)

    def restricted(self, L: float) -> GridDensity:
        """Keep nodes with ``|x| <= L``; dropped mass is added to ``mass_lost``."""
        keep = int(floor(L / self.h + 1e-9))
        if keep >= self.N:
            return self
        lo, hi = self.N - keep, self.N + keep + 1
        dropped = self.h * (np.abs(self.values[:lo]).sum() + np.abs(self.values[hi:]).sum())
        return GridDensity(self.h, self.values[lo:hi].copy(), self.mass_lost + dropped, self.error_budget, dict(self.meta))

    def to_csv(self, out: str | TextIO) -> None:
        """Two columns ``x, value`` with a header row, 17 significant digits."""
        if isinstance(out, str):
            with open(out, "w", newline="") as fh:
                self.to_csv(fh)
            return
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["x", "value"])
        for xi, vi in zip(self.x, self.values):
            w.writerow([f"{xi:.17g}", f"{vi:.17g}"])

    def to_csv_string(self) -> str:
        buf = io.StringIO()
        self.to_csv(buf)
        return buf.getvalue()

    @classmethod
    def from_function(cls, f, h: float, L: float) -> GridDensity:
        N = int(ceil(L / h - 1e-9))
        x = (np.arange(2 * N + 1) - N) * h
        return cls(h, np.asarray(f(x), dtype=float))

    @classmethod
    def from_model(cls, model: DistributionModel, h: float = DEFAULT_H, L: float = DEFAULT_L, method: str | None = None) -> GridDensity:
        """Sample a model density on an aligned grid.

        ``method="point"`` puts breakpoints on nodes and uses the mean of the
        one-sided limits there (the trapezoid rule then stays second order for
        piecewise smooth densities).  ``method="cell"`` stores exact cell
        averages from the distribution function, with breakpoints on cell
        boundaries; it is the only option for densities that blow up.
        """
        method = method or ("point" if model.bounded_density else "cell")
        if method not in ("point", "cell"):
            raise ConfigurationError(f"unknown sampling method {method!r}")
        hh = aligned_spacing(model, h, method)
        N = int(ceil(L / hh - 1e-9))
        x = (np.arange(2 * N + 1) - N) * hh
        if method == "cell":
            edges = (np.arange(2 * N + 2) - N - 0.5) * hh
            for bp in model.breakpoints:
                # a rounded edge next to an integrable singularity would leak ~sqrt(eps) mass
                edges[np.abs(edges - bp) < 1e-9 * hh] = bp
            a, b = edges[:-1], edges[1:]
            # sf differences on the right half keep relative accuracy in the tail
            vals = np.where(x > 0, model.sf(a) - model.sf(b), model.cdf(b) - model.cdf(a)) / hh
            lost = float(model.cdf(-N * hh - hh / 2) + model.sf(N * hh + hh / 2))
        else:
            vals = np.asarray(model.density(x), dtype=float)
            for bp in model.breakpoints:
                j = int(round(bp / hh)) + N
                if 0 <= j < x.size:
                    eps = 1e-12 * max(1.0, abs(bp))
                    vals[j] = 0.5 * (float(model.density(bp - eps)) + float(model.density(bp + eps)))
            lost = float(model.cdf(-N * hh) + model.sf(N * hh))
        g = cls(hh, vals, mass_lost=lost)
        g.meta.update(model=model.name, method=method, bounded=model.bounded_density)
        return g


def aligned_spacing(model: DistributionModel, h: float, method: str = "point") -> float:
    """Largest spacing ``<= h`` putting every breakpoint on a node (point) or a cell edge (cell)."""
    if not model.breakpoints:
        return h
    b = min(abs(bp) for bp in model.breakpoints if bp != 0)
    if method == "point":
        k = ceil(b / h - 1e-12)
        hh = b / k
    else:
        k = ceil(b / h - 0.5 - 1e-12)
        hh = b / (k + 0.5)
    for bp in model.breakpoints:
        r = bp / hh if method == "point" else bp / hh - 0.5
        if abs(r - round(r)) > 1e-9:
            raise ConfigurationError(f"breakpoints of {model.name} cannot be aligned on one grid")
    return hh


def _convolve_pair(a: np.ndarray, b: np.ndarray, h: float, n_max: int) -> tuple[np.ndarray, float]:
    c = fftconvolve(a, b) * h
    n = (c.size - 1) // 2
    if n <= n_max:
        return c, 0.0
    cut = n - n_max
    lost = h * (np.abs(c[:cut]).sum() + np.abs(c[-cut:]).sum())
    return c[cut:-cut], lost


def self_convolve(f: GridDensity, n: int, L_max: float | None = None, budget: float = 1e-6) -> GridDensity:
    """``n``-fold convolution power by binary powering.

    The support is cut back to ``L_max`` after every product; the mass cut
    off is accumulated and must stay below ``budget``.  The default
    ``L_max`` is the larger of 64 and eight standard deviations of the sum.
    """
    if n < 1:
        raise PreconditionError(f"n must be positive, got {n}")
    if L_max is None:
        sd = sqrt(max(f.moment(2) - f.moment(1) ** 2, 0.0))
        L_max = max(DEFAULT_L_MAX, 8.0 * sqrt(n) * sd + abs(n * f.moment(1)))
    n_max = int(ceil(L_max / f.h - 1e-9))
    h = f.h
    lost = f.mass_lost * n
    result: Optional[np.ndarray] = None
    base = f.values
    k = n
    while k:
        if k & 1:
            if result is None:
                result = base
            else:
                result, dl = _convolve_pair(result, base, h, n_max)
                lost += dl
        k >>= 1
        if k:
            base, dl = _convolve_pair(base, base, h, n_max)
            # a truncated square feeds (at most) n/2 later factors
            lost += dl * k
    assert result is not None
    if lost > budget:
        raise TruncationError(f"convolution truncation lost mass {lost:.3e} > budget {budget:.1e}", lost)
    out = GridDensity(h, np.array(result, copy=True), mass_lost=lost, meta=dict(f.meta, n=n))
    return out


def normalized_sum_density(
    model: DistributionModel,
    n: int,
    L: float = DEFAULT_L,
    h: float = DEFAULT_H,
    levels: int | None = None,
    L_max: float | None = None,
    budget: float = 1e-6,
    method: str | None = None,
) -> GridDensity:
    """``sqrt(n) rho^{*n}(x sqrt(n))`` on the grid of spacing ``h/sqrt(n)``.

    The rescaled convolution grid is used as is (no interpolation).  With
    ``levels > 1`` the computation is repeated on refined grids and the
    results are combined to cancel the lattice error terms of order ``h``
    and ``h^2``.  Point-sampled grids are refined by halving; cell-averaged
    grids by thirds, since halving would move breakpoints off cell edges.
    By default point grids use three levels and cell grids one.
    """
    base = GridDensity.from_model(model, h, L, method)
    if levels is None:
        # a blow-up in the density leaves no clean expansion in h to extrapolate
        levels = 3 if base.meta["method"] == "point" else 1
    if levels not in _RICHARDSON_POWERS:
        raise ConfigurationError(f"levels must be one of {sorted(_RICHARDSON_POWERS)}")
    h0 = base.h
    if L_max is None:
        sd = sqrt(max(base.moment(2) - base.moment(1) ** 2, 0.0))
        L_max = max(DEFAULT_L_MAX, 8.0 * sqrt(n) * sd)
    n0 = int(ceil(L_max / h0 - 1e-9))
    L_exact = n0 * h0
    rows = []
    lost = 0.0
    ratio = 2 if base.meta["method"] == "point" else 3
    for j in range(levels):
        r = ratio**j
        f = base if j == 0 else GridDensity.from_model(model, h0 / r, L, base.meta["method"])
        if abs(f.h * r - h0) > 1e-12 * h0:
            raise ConfigurationError(f"refined grid for {model.name} lost its alignment")
        g = self_convolve(f, n, L_max=L_exact, budget=budget)
        vals, extra = g.values, 0.0
        nn = (vals.size - 1) // 2
        c = n0 * r
        if nn > c:
            # only possible for n = 1, where nothing was convolved
            extra = f.h * (np.abs(vals[: nn - c]).sum() + np.abs(vals[nn + c + 1 :]).sum())
            vals, nn = vals[nn - c : nn + c + 1], c
        full = np.zeros(2 * c + 1)
        full[c - nn : c + nn + 1] = vals
        rows.append(full[::r])
        lost = max(lost, g.mass_lost + extra)
    vals = sum(w * row for w, row in zip(_richardson_weights(levels, ratio), rows))
    spread = float(np.max(np.abs(rows[-1] - vals))) * sqrt(n) if levels > 1 else 0.0
    out = GridDensity(h0 / sqrt(n), vals * sqrt(n), mass_lost=lost, error_budget=spread)
    out.meta.update(model=model.name, n=n, levels=levels, source="convolution")
    return out


def charfn_tail_bound(model: DistributionModel, n: int, T: float) -> float:
    """``(1/pi) int_T^inf env(t/sqrt n)^n dt``, bounding the cutoff error of inversion.

    Integrated over dyadic panels; if the panel masses stop shrinking the
    integral is declared divergent.
    """
    if model.envelope is None:
        raise ConfigurationError(f"{model.name} has no characteristic-function envelope")
    g = lambda t: float(model.envelope(np.asarray(t / sqrt(n))) ** n)
    total, prev = 0.0, None
    a = max(T, 1e-12)
    for _ in range(200):
        b = 2.0 * a
        panel, _err = integrate.quad(g, a, b, epsabs=0.0, epsrel=1e-8, limit=200)
        total += panel
        if prev is not None and panel > 0.75 * prev and panel > 1e-300:
            if a > 1e6 * max(T, 1.0):
                return float("inf")
        if panel <= 1e-17 * max(total, 1e-300) or panel < 1e-300:
            return total / pi
        prev = panel
        a = b
    return float("inf")


def auto_cutoff(model: DistributionModel, n: int, budget: float) -> float:
    """Smallest cutoff (to ~1%) whose tail bound is within ``budget``."""
    T = 1.0
    while charfn_tail_bound(model, n, T) > budget:
        T *= 2.0
        if T > 2.0**40:
            raise ConfigurationError(
                f"{model.name}, n={n}: |v_n| is not integrable enough to meet tail budget {budget:g}"
            )
    lo, hi = T / 2.0, T
    while hi - lo > 0.01 * hi:
        mid = 0.5 * (lo + hi)
        if charfn_tail_bound(model, n, mid) > budget:
            lo = mid
        else:
            hi = mid
    return hi


def invert_charfn(
    model: DistributionModel,
    n: int,
    t_cutoff: float | None,
    x_grid,
    tail_budget: float = 1e-6,
    min_period: float = 128.0,
) -> GridDensity:
    """``(1/2pi) int_{|t|<=T} exp(-itx) v_n(t) dt`` on a symmetric uniform grid.

    The trapezoid sum is evaluated with one FFT whose output nodes contain
    the requested grid.  The neglected tail ``|t| > T`` is bounded through
    the model's envelope and must not exceed ``tail_budget``.
    """
    x = np.asarray(x_grid.x if isinstance(x_grid, GridDensity) else x_grid, dtype=float)
    if x.size < 3 or x.size % 2 == 0:
        raise PreconditionError("x grid must be symmetric with an odd number of points")
    dx_grid = (x[-1] - x[0]) / (x.size - 1)
    if not np.allclose(np.diff(x), dx_grid, rtol=1e-9, atol=0) or abs(x[0] + x[-1]) > 1e-9 * abs(x[0]):
        raise PreconditionError("x grid must be uniform and symmetric about 0")
    if t_cutoff is None:
        t_cutoff = auto_cutoff(model, n, tail_budget)
    tail = charfn_tail_bound(model, n, t_cutoff)
    if not tail <= tail_budget:
        raise ConfigurationError(
            f"{model.name}, n={n}: tail beyond t={t_cutoff:g} is bounded by {tail:.3e} > budget {tail_budget:.1e}"
        )
    M = max(1, int(ceil(t_cutoff * dx_grid / pi)))
    N = 1
    while N * dx_grid / M < max(min_period, 2.0 * (x[-1] - x[0])):
        N *= 2
    if N > MAX_FFT_SIZE:
        raise ConfigurationError(f"inversion needs FFT size {N} > {MAX_FFT_SIZE}; lower the cutoff or coarsen x")
    dx = dx_grid / M
    dt = 2.0 * pi / (N * dx)
    j = np.fft.fftfreq(N, d=1.0 / N)
    t = j * dt
    vals = np.where(np.abs(t) <= t_cutoff, v_n(model, t, n), 0.0) * np.exp(-1j * t * x[0])
    # trapezoid end weights at the cutoff
    edge = np.isclose(np.abs(t), t_cutoff, rtol=0, atol=1e-12 * t_cutoff)
    vals[edge] *= 0.5
    rho = (dt / (2.0 * pi)) * np.fft.fft(vals).real
    out = GridDensity(dx_grid, rho[: M * x.size : M][: x.size], error_budget=tail)
    out.meta.update(model=model.name, n=n, t_cutoff=float(t_cutoff), fft_size=N, source="inversion")
    return out


@dataclass
class WeightedErrorReport:
    value: float
    argmax: float
    boundary_flag: bool


def weighted_error_report(rho_n: GridDensity, approx: EdgeworthApproximant, weight_power: float) -> WeightedErrorReport:
    """``max (1 + |x|^w) |rho_n(x) - phi_m(x)|`` over the grid.

    ``boundary_flag`` is set when the weighted error is still growing over
    the outer tenth of the grid, i.e. the window may be too narrow.  Errors
    below 1e-10 are treated as grid noise and never flagged.
    """
    x = rho_n.x
    werr = (1.0 + np.abs(x) ** weight_power) * np.abs(rho_n.values - phi_m(approx, x))
    i = int(np.argmax(werr))
    outer = np.abs(x) >= 0.9 * rho_n.L
    flag = bool(outer.any() and werr[outer].max() >= 0.5 * werr[i] and werr[i] > 1e-10)
    return WeightedErrorReport(float(werr[i]), float(x[i]), flag)


def nonuniform_error(rho_n: GridDensity, approx: EdgeworthApproximant, weight_power: float) -> float:
    rep = weighted_error_report(rho_n, approx, weight_power)
    if rep.boundary_flag:
        warnings.warn(f"weighted error still large at grid edge |x|={rho_n.L:g}", RuntimeWarning, stacklevel=2)
    return rep.value


def tv_error(rho_n: GridDensity, approx: EdgeworthApproximant) -> float:
    """Riemann sum ``h sum |rho_n - phi_m|``."""
    return float(rho_n.h * np.sum(np.abs(rho_n.values - phi_m(approx, rho_n.x))))
