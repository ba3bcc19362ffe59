"""Distribution zoo and characteristic-function side quantities.

Each model carries an analytic characteristic function ``v``.  Where a
closed-form ``log v`` exists it is used for ``v_n = v(t/sqrt(n))**n`` so that
large powers do not amplify rounding in ``v``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial, inf, log, pi, sqrt
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, special, stats

from .cumulants import CumulantVector, MomentVector, cumulants_from_moments
from .edgeworth import ExpansionOrder, _u_m, cumulant_polynomial, pk_polynomial
from .errors import BranchError, ConfigurationError, NumericError, PreconditionError

MAX_MOMENT_ORDER = 8


@dataclass(frozen=True)
class DistributionModel:
    """A named law with density, characteristic function and exact moments.

    ``envelope(t)`` is a non-increasing bound on ``|v(t)|`` in ``|t|``, used for
    tail budgets.  ``breakpoints`` are points where the density is not
    smooth; grids are aligned so these fall on cell boundaries.
    """

    name: str
    density: Callable[[np.ndarray], np.ndarray]
    cdf: Callable[[np.ndarray], np.ndarray]
    sf: Callable[[np.ndarray], np.ndarray]
    charfn: Callable[[np.ndarray], np.ndarray]
    moments: MomentVector
    s_max: float
    standardized: bool = True
    log_charfn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    envelope: Optional[Callable[[np.ndarray], np.ndarray]] = None
    breakpoints: tuple[float, ...] = ()
    support: tuple[float, float] = (-inf, inf)
    bounded_density: bool = True

    def cumulants(self, m: int | None = None) -> CumulantVector:
        """Standardized cumulant vector through order ``m``."""
        mv = self.moments if m is None else MomentVector(self.moments.alpha[: m + 1])
        if m is not None and m > self.moments.m:
            raise PreconditionError(f"{self.name}: moments known through order {self.moments.m}, asked for {m}")
        g = cumulants_from_moments(mv)
        return CumulantVector(g.gamma, standardized=self.standardized)

    def log_v(self, t):
        if self.log_charfn is not None:
            return self.log_charfn(np.asarray(t, dtype=float))
        return np.log(self.charfn(np.asarray(t, dtype=float)).astype(complex))


def _gaussian_moments(m: int) -> MomentVector:
    return MomentVector(tuple(0.0 if k % 2 else float(special.factorial2(k - 1, exact=True)) if k else 1.0 for k in range(m + 1)))


def _moments_from_cumulant_list(gammas: Sequence[float]) -> MomentVector:
    from .cumulants import moments_from_cumulants

    return moments_from_cumulants(CumulantVector(tuple(gammas)))


def gaussian() -> DistributionModel:
    d = stats.norm()
    return DistributionModel(
        name="gaussian",
        density=d.pdf,
        cdf=d.cdf,
        sf=d.sf,
        charfn=lambda t: np.exp(-0.5 * np.asarray(t, dtype=float) ** 2) + 0j,
        log_charfn=lambda t: -0.5 * np.asarray(t, dtype=float) ** 2 + 0j,
        envelope=lambda t: np.exp(-0.5 * np.asarray(t, dtype=float) ** 2),
        moments=_gaussian_moments(MAX_MOMENT_ORDER),
        s_max=inf,
    )


def uniform() -> DistributionModel:
    r3 = sqrt(3.0)
    d = stats.uniform(loc=-r3, scale=2 * r3)

    def charfn(t):
        return np.sinc(r3 * np.asarray(t, dtype=float) / pi) + 0j

    def envelope(t):
        a = np.abs(r3 * np.asarray(t, dtype=float))
        # below u=1 the alternating series bounds sinc; beyond, |sinc| <= min(sin 1, 1/u)
        return np.where(a < 1.0, 1.0 - a * a / 6.0 + a**4 / 120.0, np.minimum(np.sin(1.0), 1.0 / np.maximum(a, 1.0)))

    alpha = [1.0] + [0.0 if k % 2 else 3.0 ** (k // 2) / (k + 1) for k in range(1, MAX_MOMENT_ORDER + 1)]
    return DistributionModel(
        name="uniform",
        density=d.pdf,
        cdf=d.cdf,
        sf=d.sf,
        charfn=charfn,
        envelope=envelope,
        moments=MomentVector(tuple(alpha)),
        s_max=inf,
        breakpoints=(-r3, r3),
        support=(-r3, r3),
    )


def exp1() -> DistributionModel:
    """Exp(1) - 1."""
    d = stats.expon(loc=-1.0)

    def log_charfn(t):
        t = np.asarray(t, dtype=float)
        return -1j * t - np.log(1.0 - 1j * t)

    gammas = [0.0, 0.0] + [float(factorial(k - 1)) for k in range(2, MAX_MOMENT_ORDER + 1)]
    return DistributionModel(
        name="exp1",
        density=d.pdf,
        cdf=d.cdf,
        sf=d.sf,
        charfn=lambda t: np.exp(log_charfn(t)),
        log_charfn=log_charfn,
        envelope=lambda t: 1.0 / np.sqrt(1.0 + np.asarray(t, dtype=float) ** 2),
        moments=_moments_from_cumulant_list(gammas),
        s_max=inf,
        breakpoints=(-1.0,),
        support=(-1.0, inf),
    )


def student_t(nu: float = 4.5) -> DistributionModel:
    """Student-t with ``nu > 4`` degrees of freedom scaled to unit variance."""
    if nu <= 4:
        raise ConfigurationError("standardized Student-t in the zoo needs nu > 4 (finite fourth moment)")
    scale = sqrt((nu - 2.0) / nu)
    d = stats.t(df=nu, scale=scale)
    half = nu / 2.0
    log_norm = special.gammaln(half) + (half - 1.0) * log(2.0)

    def log_charfn(t):
        x = np.sqrt(nu) * scale * np.abs(np.asarray(t, dtype=float))
        out = np.zeros_like(x)
        nz = x > 0
        xs = x[nz]
        # x^{nu/2} K_{nu/2}(x) / (Gamma(nu/2) 2^{nu/2-1}), with K scaled to avoid underflow
        out[nz] = half * np.log(xs) + np.log(special.kve(half, xs)) - xs - log_norm
        return out + 0j

    def charfn(t):
        return np.exp(log_charfn(t))

    alpha = (1.0, 0.0, 1.0, 0.0, 3.0 + 6.0 / (nu - 4.0))
    return DistributionModel(
        name="student_t",
        density=d.pdf,
        cdf=d.cdf,
        sf=d.sf,
        charfn=charfn,
        log_charfn=log_charfn,
        envelope=lambda t: np.real(charfn(t)),
        moments=MomentVector(alpha),
        s_max=nu,
    )


def chi2_1() -> DistributionModel:
    """(chi^2_1 - 1)/sqrt(2); the density blows up at the left end of the support."""
    r2 = sqrt(2.0)
    d = stats.chi2(df=1, loc=-1.0 / r2, scale=1.0 / r2)

    def log_charfn(t):
        t = np.asarray(t, dtype=float)
        return -1j * t / r2 - 0.5 * np.log(1.0 - 1j * r2 * t)

    gammas = [0.0, 0.0] + [2.0 ** (k / 2.0 - 1.0) * factorial(k - 1) for k in range(2, MAX_MOMENT_ORDER + 1)]
    return DistributionModel(
        name="chi2_1",
        density=d.pdf,
        cdf=d.cdf,
        sf=d.sf,
        charfn=lambda t: np.exp(log_charfn(t)),
        log_charfn=log_charfn,
        envelope=lambda t: (1.0 + 2.0 * np.asarray(t, dtype=float) ** 2) ** -0.25,
        moments=_moments_from_cumulant_list(gammas),
        s_max=inf,
        breakpoints=(-1.0 / r2,),
        support=(-1.0 / r2, inf),
        bounded_density=False,
    )


_ZOO = {"gaussian": gaussian, "uniform": uniform, "exp1": exp1, "student_t": student_t, "chi2_1": chi2_1}


def zoo() -> list[DistributionModel]:
    return [make() for make in _ZOO.values()]


def model_names() -> list[str]:
    return list(_ZOO)


def get_model(name: str) -> DistributionModel:
    try:
        return _ZOO[name]()
    except KeyError:
        raise ConfigurationError(f"unknown model {name!r}; choose from {', '.join(_ZOO)}") from None


def quadrature_charfn(model: DistributionModel, t: float, cutoff: float = 1e-14) -> complex:
    """``E exp(i t X)`` by adaptive quadrature of the density (oracle route)."""
    lo, hi = model.support
    if not np.isfinite(lo):
        lo = _density_edge(model, -1.0, cutoff)
    if not np.isfinite(hi):
        hi = _density_edge(model, 1.0, cutoff)
    pts = [b for b in model.breakpoints if lo < b < hi]
    f = lambda x: float(model.density(x))
    kw = dict(epsabs=1e-12, epsrel=1e-10, limit=400)
    if t == 0:
        re, err = integrate.quad(f, lo, hi, points=pts or None, **kw)
        return complex(re)
    if model.bounded_density:
        re, e1 = integrate.quad(f, lo, hi, weight="cos", wvar=t, **kw)
        im, e2 = integrate.quad(f, lo, hi, weight="sin", wvar=t, **kw)
    else:
        # the oscillatory rule cannot absorb the endpoint singularity; plain QAGS
        # handles one unit next to it and the oscillatory rule the rest
        mid = lo + 1.0
        r0, e0 = integrate.quad(lambda x: f(x) * np.cos(t * x), lo, mid, **kw)
        i0, f0 = integrate.quad(lambda x: f(x) * np.sin(t * x), lo, mid, **kw)
        r1, e1 = integrate.quad(f, mid, hi, weight="cos", wvar=t, **kw)
        i1, e2 = integrate.quad(f, mid, hi, weight="sin", wvar=t, **kw)
        re, im, e1, e2 = r0 + r1, i0 + i1, e0 + e1, f0 + e2
    if max(e1, e2) > 1e-8:
        raise NumericError(f"{model.name}: charfn quadrature at t={t} estimated error {max(e1, e2):.2e}")
    return complex(re, im)


def _density_edge(model: DistributionModel, direction: float, cutoff: float) -> float:
    x = direction
    while model.density(x) > cutoff and abs(x) < 1e6:
        x *= 2.0
    return x


def v_n(model: DistributionModel, t, n: int):
    """Characteristic function of the normalized sum, ``v(t/sqrt(n))**n``."""
    if not model.standardized:
        raise PreconditionError(f"{model.name} is not standardized")
    if n < 1:
        raise PreconditionError(f"n must be positive, got {n}")
    tau = np.asarray(t, dtype=float) / sqrt(n)
    if model.log_charfn is not None:
        return np.exp(n * model.log_charfn(tau))
    return model.charfn(tau) ** n


def _arg_increment(v: Callable, a: float, b: float, va: complex, vb: complex, depth: int = 0) -> float:
    if va == 0 or vb == 0:
        where = a if va == 0 else b
        raise BranchError(f"characteristic function vanishes at {where:.12g}", where)
    d = float(np.angle(vb / va))
    if abs(d) < pi / 4:
        return d
    if depth > 50 or abs(b - a) < 1e-12 * (1.0 + abs(b)):
        mid = 0.5 * (a + b)
        raise BranchError(f"characteristic function vanishes near {mid:.12g}", mid)
    c = 0.5 * (a + b)
    vc = complex(v(c))
    return _arg_increment(v, a, c, va, vc, depth + 1) + _arg_increment(v, c, b, vc, vb, depth + 1)


def continuous_log(v: Callable, tau: float, pieces: int = 32) -> complex:
    """``log v(tau)`` continued from ``log v(0) = 0`` along ``[0, tau]``."""
    nodes = np.linspace(0.0, tau, pieces + 1)
    vals = [complex(v(x)) for x in nodes]
    arg = 0.0
    for j in range(pieces):
        arg += _arg_increment(v, nodes[j], nodes[j + 1], vals[j], vals[j + 1])
    mag = abs(vals[-1])
    return complex(log(mag), arg)


def psi_z(model: DistributionModel, t, z: float):
    """``t^2/2 + log v(t z) / z^2`` with the continuously tracked branch."""
    if z == 0:
        raise PreconditionError("psi_z needs z != 0")
    v = lambda x: model.charfn(np.asarray(x, dtype=float))
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.array([0.5 * x * x + continuous_log(v, x * z) / z**2 for x in ts])
    return out if np.ndim(t) else complex(out[0])


def w_z(cumulants: CumulantVector, t, z, m: int):
    """``W_z(t) = sum_{k=1}^{m-2} gamma_{k+2}/(k+2)! (it)^{k+2} z^k``."""
    return cumulant_polynomial(cumulants, m, t, z)


@dataclass
class ResidualProbeReport:
    n_values: tuple[int, ...]
    t_grid: np.ndarray
    p: int
    max_residual: np.ndarray
    scaled_residual: np.ndarray
    slope: float
    remainder_normalized: np.ndarray
    window_c: float = 1.0
    notes: list[str] = field(default_factory=list)

    def scaled_nonincreasing(self, upper_half: bool = True, slack: float = 0.0) -> bool:
        seq = self.scaled_residual
        if upper_half:
            seq = seq[len(seq) // 2 :]
        return bool(np.all(np.diff(seq) <= slack * np.abs(seq[:-1])))


def residual_probe(
    model: DistributionModel,
    order: ExpansionOrder,
    n_list: Sequence[int],
    t_grid: Sequence[float],
    window_c: float = 1.0,
) -> ResidualProbeReport:
    """Normalized gaps ``v_n - u_m`` and the second-order remainder ``r_n``.

    ``R(n)`` is the max over ``t_grid`` of ``|v_n - u_m(t, n^-1/2)|`` divided by
    ``(|t|^s + |t|^{s+3(m-2)}) e^{-t^2/2}``; ``t = 0`` is skipped since both
    numerator and weight vanish there.
    """
    if order.s > model.s_max:
        raise PreconditionError(f"s={order.s} exceeds {model.name} moment order {model.s_max}")
    s, m = order.s, order.m
    t = np.asarray(t_grid, dtype=float)
    t = t[t != 0.0]
    if t.size == 0:
        raise PreconditionError("t grid has no non-zero points")
    ns = tuple(int(n) for n in n_list)
    for n in ns:
        if np.max(np.abs(t)) > window_c * n ** (1.0 / 6.0) * (1 + 1e-12):
            raise PreconditionError(f"t grid exceeds the window |t| <= {window_c}*n^(1/6) at n={n}")
    cum = model.cumulants(m)
    polys = [pk_polynomial(k, cum) for k in range(1, m - 1)]
    gauss = np.exp(-0.5 * t * t)
    weight = (np.abs(t) ** s + np.abs(t) ** (s + 3 * (m - 2))) * gauss
    weight_r = (1.0 + np.abs(t) ** (4 * m * m)) * gauss
    R, rem = [], []
    for n in ns:
        vn = v_n(model, t, n)
        um = _u_m(polys, t, n**-0.5)
        R.append(float(np.max(np.abs(vn - um) / weight)))
        tau = t / sqrt(n)
        inner = model.charfn(tau) - _u_m(polys, tau, 1.0)
        r_n = (vn - um) - n * inner * gauss
        rem.append(float(np.max(np.abs(r_n) / weight_r)))
    R = np.array(R)
    scaled = R * np.array(ns, dtype=float) ** ((s - 2.0) / 2.0)
    notes = []
    if len(ns) >= 2 and np.all(R > 0):
        slope = float(np.polyfit(np.log(ns), np.log(R), 1)[0])
    else:
        slope = float("nan")
        notes.append("slope undefined (fewer than two n or zero residuals)")
    return ResidualProbeReport(ns, t, 0, R, scaled, slope, np.array(rem), window_c, notes)
