"""Invariant batteries shared by ``fracedge verify`` and the test-suite."""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial, sqrt
from typing import Callable

import numpy as np

from .charfun import get_model
from .cumulants import (
    CumulantVector,
    MomentVector,
    cumulants_by_series,
    cumulants_from_moments,
    hermite,
    moments_from_cumulants,
)
from .edgeworth import (
    exp_cumulant_residual,
    expansion_remainder,
    pk_polynomial,
    qk_density_term,
    tail_bound_check,
    tm_projection_check,
)
from .fractional import (
    LEFT,
    RIGHT,
    SignedMeasureSpec,
    fractional_fourier_check,
    fractional_parts_identity_check,
    liouville_derivative,
    liouville_integral,
    scaled_decay_check,
)
from .gridoracle import GridDensity, invert_charfn, normalized_sum_density
from .smoothing import first_good_n, log_beta_n, modified_density, threshold_split

SEED = 20240917


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str


def _rel(a, b) -> float:
    return float(abs(a - b) / max(abs(b), 1e-300))


# ----- cumulants -------------------------------------------------------------

def random_moments(rng: np.random.Generator, m: int) -> MomentVector:
    return MomentVector.of(*rng.uniform(-2.0, 2.0, size=m))


def check_series_equivalence(count: int = 100, mmax: int = 8) -> CheckResult:
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(count):
        mv = random_moments(rng, int(rng.integers(2, mmax + 1)))
        a = np.array(cumulants_from_moments(mv).gamma)
        b = np.array(cumulants_by_series(mv).gamma)
        scale = np.maximum(np.abs(b), 1.0)
        worst = max(worst, float(np.max(np.abs(a - b) / scale)))
    return CheckResult("cumulant partition formula = series-log oracle", worst < 1e-10, f"max rel err {worst:.2e}")


def check_round_trip(count: int = 100, mmax: int = 8) -> CheckResult:
    rng = np.random.default_rng(SEED + 1)
    worst = 0.0
    for _ in range(count):
        mv = random_moments(rng, int(rng.integers(2, mmax + 1)))
        back = np.array(moments_from_cumulants(cumulants_from_moments(mv)).alpha)
        ref = np.array(mv.alpha)
        worst = max(worst, float(np.max(np.abs(back - ref) / np.maximum(np.abs(ref), 1.0))))
    return CheckResult("moments -> cumulants -> moments round trip", worst < 1e-12, f"max rel err {worst:.2e}")


def check_hermite_orthogonality(kmax: int = 8, nodes: int = 64) -> CheckResult:
    x, w = np.polynomial.hermite_e.hermegauss(nodes)
    w = w / sqrt(2.0 * np.pi)
    worst = 0.0
    for j in range(kmax + 1):
        for k in range(kmax + 1):
            val = float(np.dot(w, hermite(j)(x) * hermite(k)(x)))
            worst = max(worst, abs(val - (factorial(k) if j == k else 0.0)))
    return CheckResult("Hermite orthogonality under the Gaussian weight", worst < 1e-8, f"max abs err {worst:.2e}")


# ----- edgeworth -------------------------------------------------------------

def random_standard_cumulants(rng: np.random.Generator, m: int, spread: float = 2.0) -> CumulantVector:
    return CumulantVector.standard(*rng.uniform(-spread, spread, size=m - 2))


def fourier_duality_error(k: int, cum: CumulantVector, t: np.ndarray, nodes: int = 96) -> float:
    x, w = np.polynomial.hermite_e.hermegauss(nodes)
    # hermegauss integrates against exp(-x^2/2); q_k carries phi(x), so divide it back out
    q = qk_density_term(k, cum)
    qx = q.poly(x) / sqrt(2.0 * np.pi)
    lhs = np.exp(1j * np.outer(t, x)) @ (w * qx)
    rhs = np.exp(-0.5 * t * t) * pk_polynomial(k, cum)(1j * t)
    return float(np.max(np.abs(lhs - rhs)))


def check_fourier_duality(kmax: int = 4, trials: int = 5) -> CheckResult:
    rng = np.random.default_rng(SEED + 2)
    t = np.linspace(-5.0, 5.0, 201)
    worst = 0.0
    for _ in range(trials):
        cum = random_standard_cumulants(rng, kmax + 2)
        for k in range(1, kmax + 1):
            worst = max(worst, fourier_duality_error(k, cum, t))
    return CheckResult("Fourier duality of q_k and exp(-t^2/2) P_k(it)", worst < 1e-8, f"sup err {worst:.2e}")


def check_projection_fixed_point(trials: int = 20, perturb: float = 0.0) -> CheckResult:
    rng = np.random.default_rng(SEED + 3)
    worst = 0.0
    for _ in range(trials):
        m = int(rng.integers(3, 7))
        cum = random_standard_cumulants(rng, m)
        out = np.array(tm_projection_check(cum, m).gamma)
        expect = np.array(cum.gamma)
        if perturb and m >= 4:
            expect[4] += perturb
        worst = max(worst, float(np.max(np.abs(out - expect))))
    label = "projection T_m fixed point" + (f" (gamma_4 perturbed by {perturb:g})" if perturb else "")
    return CheckResult(label, worst < 1e-10, f"max abs err {worst:.2e}")


def check_mutation_detected() -> CheckResult:
    mutated = check_projection_fixed_point(perturb=1e-3)
    return CheckResult("perturbed gamma_4 is caught by the fixed-point check", not mutated.ok, mutated.detail)


def _random_point(rng: np.random.Generator) -> tuple[complex, complex]:
    t = rng.uniform(0, 1) * np.exp(1j * rng.uniform(0, 2 * np.pi))
    z = rng.uniform(0, 1) * np.exp(1j * rng.uniform(0, 2 * np.pi))
    return complex(t), complex(z)


def check_identity_and_tail(points: int = 100, K: int = 15) -> CheckResult:
    rng = np.random.default_rng(SEED + 4)
    worst_ratio, worst_trunc = 0.0, 0.0
    for _ in range(points):
        m = int(rng.integers(3, 7))
        cum = random_standard_cumulants(rng, m)
        t, z = _random_point(rng)
        lhs, rhs = tail_bound_check(cum, m, z, t, K)
        rem = expansion_remainder(cum, m, t, z)
        trunc = exp_cumulant_residual(cum, m, t, z, K)
        bound = 1.01 * rhs
        worst_ratio = max(worst_ratio, lhs / bound if bound > 0 else 0.0, rem / bound if bound > 0 else 0.0)
        worst_trunc = max(worst_trunc, trunc / bound if bound > 0 else trunc)
    ok = worst_ratio <= 1.0 and worst_trunc <= 1.0
    return CheckResult(
        "exp(W_z) expansion tail within (e^C(z)-1)|t|^(m+1)",
        ok,
        f"max tail/bound {worst_ratio:.3f}, max K-truncation residual/bound {worst_trunc:.2e}",
    )


# ----- fractional ------------------------------------------------------------

BUMPS: dict[str, Callable] = {
    "gauss(2, 0.5)": lambda t: np.exp(-2.0 * (np.asarray(t) - 2.0) ** 2),
    "gauss(1, 0.3)": lambda t: np.exp(-((np.asarray(t) - 1.0) ** 2) / 0.18),
    "x^2 e^-2x": lambda t: np.asarray(t) ** 2 * np.exp(-2.0 * np.asarray(t)),
}

PARTS_PAIRS: dict[str, tuple[Callable, Callable]] = {
    "e^-x, x^2 e^-x": (lambda x: np.exp(-x), lambda x: x**2 * np.exp(-x)),
    "bump, bump": (lambda x: np.exp(-2.0 * (x - 2.0) ** 2), lambda x: x**2 * np.exp(-((x - 1.5) ** 2))),
}

ATOM_MEASURES: dict[str, tuple[SignedMeasureSpec, int]] = {
    "d1 - d-1": (SignedMeasureSpec(atoms=((1.0, 1.0), (-1.0, -1.0))), 0),
    "d1 - 2d0 + d-1": (SignedMeasureSpec(atoms=((1.0, 1.0), (0.0, -2.0), (-1.0, 1.0))), 1),
}


def check_eigen_identities() -> CheckResult:
    worst = 0.0
    for lam in (0.5, 1.0, 2.0):
        y = lambda t, lam=lam: np.exp(-lam * np.asarray(t))
        for a in (0.25, 0.5, 0.75):
            for x in (0.5, 1.0, 3.0):
                ref_i = lam**-a * np.exp(-lam * x)
                ref_d = lam**a * np.exp(-lam * x)
                worst = max(worst, _rel(liouville_integral(RIGHT, y, a, x), ref_i), _rel(liouville_derivative(RIGHT, y, a, x), ref_d))
    return CheckResult("exponential eigen-identities (27 cases, integral and derivative)", worst < 1e-6, f"max rel err {worst:.2e}")


def roundtrip_error(y: Callable, a: float, xs=(0.7, 1.5, 2.5)) -> float:
    inner = lambda s: np.array([liouville_integral(LEFT, y, a, si) for si in np.atleast_1d(s)])
    return max(abs(liouville_derivative(LEFT, inner, a, x) - float(y(x))) for x in xs)


def check_roundtrip(a: float = 0.4) -> CheckResult:
    worst = max(roundtrip_error(y, a) for y in BUMPS.values())
    return CheckResult("D^a I^a y = y on three bumps", worst < 1e-4, f"max abs err {worst:.2e}")


def check_parts(a: float = 0.5) -> CheckResult:
    worst = 0.0
    for f, g in PARTS_PAIRS.values():
        lhs, rhs = fractional_parts_identity_check(f, g, a)
        worst = max(worst, abs(lhs - rhs) / (1.0 + abs(lhs)))
    return CheckResult("fractional integration by parts (2 pairs)", worst < 1e-6, f"max scaled gap {worst:.2e}")


def check_fourier_relation(a: float = 0.5) -> CheckResult:
    worst, sups = 0.0, []
    for V, m in ATOM_MEASURES.values():
        rep = fractional_fourier_check(V, a, m, [0.5, 1.0, 3.0])
        worst = max(worst, rep.max_rel_discrepancy)
        sups.append(rep.decay_sup)
    ok = worst < 1e-5 and all(np.isfinite(sups))
    return CheckResult("Fourier relation for D^a and decay shape (2 measures)", ok, f"max rel err {worst:.2e}, sup (1+x)^a|D^a g| {max(sups):.3g}")


def check_scaled_decay(a: float = 0.5) -> CheckResult:
    t = np.linspace(-6.0, 6.0, 49)
    z = [1.0, 0.5, 0.25, 0.125]
    ok, parts = True, []
    for name, (V, m) in ATOM_MEASURES.items():
        rep = scaled_decay_check(V, a, m, z, t)
        ok &= rep.decreasing and rep.bounded
        parts.append(name + ": " + ", ".join(f"{e:.3g}" for e in rep.eps_hat))
    return CheckResult("normalized eps(z) decreasing as z -> 0", ok, "; ".join(parts))


# ----- smoothing -------------------------------------------------------------

def check_smoothing(c: float = 0.5, m: int = 2, n_values=range(4, 21)) -> CheckResult:
    rho = GridDensity.from_model(get_model("chi2_1"), L=32.0)
    d = threshold_split(rho, c)
    worst = 0.0
    for n in n_values:
        rep = modified_density(d, n, m)
        worst = max(worst, rep.tv_gap / rep.bound_2beta)
    n1 = first_good_n(m, d.a, d.b, c)
    tail_ok = n1 is not None and all(log_beta_n(n, m, d.a, d.b) < n * np.log(c) - np.log(2) for n in range(n1, 65))
    ok = worst <= 1.0 and tail_ok and d.b < c / 2
    return CheckResult("binomial smoothing: tv_gap <= 2 beta_n, beta_n < c^n/2 past n_1", ok, f"max tv/2beta {worst:.3f}, n_1 = {n1}")


def check_bounded_identity(n: int = 8, m: int = 2) -> CheckResult:
    rho = GridDensity.from_model(get_model("uniform"))
    d = threshold_split(rho, 0.5)
    rep = modified_density(d, n, m)
    ok = d.trivial and rep.tv_gap == 0.0 and rep.beta_n == 0.0
    return CheckResult("bounded density passes through smoothing unchanged", ok, f"trivial={d.trivial}, tv_gap={rep.tv_gap:.1e}")


# ----- oracle ----------------------------------------------------------------

def oracle_gap(model_name: str, n: int, window: float = 8.0, tail_budget: float = 1e-5) -> float:
    md = get_model(model_name)
    conv = normalized_sum_density(md, n).restricted(window)
    inv = invert_charfn(md, n, None, conv.x, tail_budget=tail_budget)
    return float(np.max(np.abs(conv.values - inv.values)))


def check_oracles(models=("uniform", "exp1"), n_values=(2, 4, 8, 16)) -> CheckResult:
    gaps = {(md, n): oracle_gap(md, n) for md in models for n in n_values}
    worst = max(gaps.values())
    return CheckResult("convolution and inversion oracles agree on [-8, 8]", worst < 1e-4, f"max sup gap {worst:.2e}")


SUITES: dict[str, list[Callable[[], CheckResult]]] = {
    "cumulants": [check_series_equivalence, check_round_trip, check_hermite_orthogonality],
    "edgeworth": [check_fourier_duality, check_projection_fixed_point, check_mutation_detected, check_identity_and_tail],
    "fractional": [check_eigen_identities, check_roundtrip, check_parts, check_fourier_relation, check_scaled_decay],
    "smoothing": [check_smoothing, check_bounded_identity],
    "oracle": [check_oracles],
}


def run_suite(name: str) -> list[CheckResult]:
    if name == "all":
        return [check() for suite in SUITES.values() for check in suite]
    return [check() for check in SUITES[name]]
