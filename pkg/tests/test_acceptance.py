"""Acceptance criteria 1-11, one PASS/FAIL line each.

Lines are collected and printed in the pytest terminal summary; running
this file directly (``python3 tests/test_acceptance.py``) prints them as
each criterion finishes.  Tolerances and runtime budgets are the
contract values; nothing is loosened here.
"""

from __future__ import annotations

import time
from contextlib import contextmanager

import numpy as np
import pytest

from fracedge import checks
from fracedge.charfun import get_model, residual_probe
from fracedge.cli import ExperimentConfig, cmd_rates
from fracedge.cumulants import CumulantVector, MomentVector, cumulants_by_series, cumulants_from_moments
from fracedge.edgeworth import ExpansionOrder, pk_polynomial, tail_bound_check, exp_cumulant_residual, tm_projection_check

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script from elsewhere
    ACCEPTANCE_LINES = []

RNG_SEED = 20240917


@contextmanager
def criterion(number: int, title: str, budget_s: float):
    """Time a criterion; the body fills ``box`` with (ok, detail)."""
    box: dict = {}
    start = time.perf_counter()
    yield box
    elapsed = time.perf_counter() - start
    ok = bool(box["ok"]) and elapsed < budget_s
    line = f"ACCEPTANCE {number:>2} {'PASS' if ok else 'FAIL'}: {title} | {box['detail']} | {elapsed:.1f}s (budget {budget_s:g}s)"
    ACCEPTANCE_LINES.append(line)
    print(line)
    box["final"] = ok


def _slope(ns, errs):
    half = len(ns) // 2
    return float(np.polyfit(np.log(ns[half:]), np.log(errs[half:]), 1)[0])


def test_01_p1_p2_golden():
    with criterion(1, "P_1, P_2 closed forms for random gamma (coeff tol 1e-14)", 1.0) as box:
        rng = np.random.default_rng(RNG_SEED)
        worst = 0.0
        for _ in range(100):
            g3, g4 = rng.uniform(-5, 5, size=2)
            cum = CumulantVector.standard(g3, g4)
            p1 = pk_polynomial(1, cum).as_array(7)
            p2 = pk_polynomial(2, cum).as_array(7)
            e1 = np.zeros(7)
            e1[3] = g3 / 6
            e2 = np.zeros(7)
            e2[4], e2[6] = g4 / 24, g3**2 / 72
            worst = max(worst, np.max(np.abs(p1 - e1)), np.max(np.abs(p2 - e2)))
        box["ok"] = worst <= 1e-14
        box["detail"] = f"max coeff err {worst:.1e}"
    assert box["final"]


def test_02_cumulant_oracle_equivalence():
    with criterion(2, "partition cumulants = series-log oracle (rel 1e-10, 100 vectors, m<=8)", 5.0) as box:
        rng = np.random.default_rng(RNG_SEED + 1)
        worst = 0.0
        for _ in range(100):
            mv = MomentVector.of(*rng.uniform(-2, 2, size=int(rng.integers(2, 9))))
            a = np.array(cumulants_from_moments(mv).gamma)
            b = np.array(cumulants_by_series(mv).gamma)
            worst = max(worst, float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1.0))))
        box["ok"] = worst < 1e-10
        box["detail"] = f"max rel err {worst:.1e}"
    assert box["final"]


def test_03_fourier_duality():
    with criterion(3, "Fourier duality q_k <-> exp(-t^2/2) P_k(it), k<=4, |t|<=5, 96 GH nodes (tol 1e-8)", 5.0) as box:
        rng = np.random.default_rng(RNG_SEED + 2)
        t = np.linspace(-5, 5, 401)
        worst = 0.0
        for _ in range(5):
            cum = CumulantVector.standard(*rng.uniform(-2, 2, size=4))
            for k in range(1, 5):
                worst = max(worst, checks.fourier_duality_error(k, cum, t, nodes=96))
        box["ok"] = worst < 1e-8
        box["detail"] = f"sup err {worst:.1e}"
    assert box["final"]


def test_04_projection_fixed_point():
    with criterion(4, "T_m projection fixed point, m in 3..6, 20 vectors (tol 1e-10)", 10.0) as box:
        rng = np.random.default_rng(RNG_SEED + 3)
        worst = 0.0
        for i in range(20):
            m = 3 + i % 4
            cum = CumulantVector.standard(*rng.uniform(-2, 2, size=m - 2))
            worst = max(worst, float(np.max(np.abs(np.array(tm_projection_check(cum, m).gamma) - cum.gamma))))
        box["ok"] = worst < 1e-10
        box["detail"] = f"max abs err {worst:.1e}"
    assert box["final"]


def test_05_identity_and_tail_bound():
    with criterion(5, "exp(W_z)-1-sum_{k<=15} a_k z^k within 1.01(e^C(z)-1)|t|^(m+1), 100 points", 10.0) as box:
        rng = np.random.default_rng(RNG_SEED + 4)
        worst_tail, worst_trunc = 0.0, 0.0
        for i in range(100):
            m = 3 + i % 4
            cum = CumulantVector.standard(*rng.uniform(-2, 2, size=m - 2))
            t = rng.uniform(0, 1) * np.exp(1j * rng.uniform(0, 2 * np.pi))
            z = rng.uniform(0, 1) * np.exp(1j * rng.uniform(0, 2 * np.pi))
            lhs, rhs = tail_bound_check(cum, m, z, t, 15)  # raises if the geometric guard fails
            bound = 1.01 * rhs
            worst_tail = max(worst_tail, lhs / bound)
            worst_trunc = max(worst_trunc, exp_cumulant_residual(cum, m, t, z, 15) / bound)
        box["ok"] = worst_tail <= 1.0 and worst_trunc <= 1.0
        box["detail"] = f"max tail/bound {worst_tail:.3f}, max |exp(W)-1-sum a_k z^k|/bound {worst_trunc:.1e}"
    assert box["final"]


def test_06_oracle_agreement():
    with criterion(6, "convolution vs inversion sup gap on [-8,8], Uniform & Exp, n in {2,4,8,16} (tol 1e-4)", 60.0) as box:
        gaps = {(md, n): checks.oracle_gap(md, n) for md in ("uniform", "exp1") for n in (2, 4, 8, 16)}
        worst = max(gaps.values())
        box["ok"] = worst < 1e-4
        box["detail"] = f"max gap {worst:.1e} at {max(gaps, key=gaps.get)}"
    assert box["final"]


def test_07_uniform_rate():
    with criterion(7, "Uniform s=m=4: weighted sup and TV slopes within -1 +- 0.2", 300.0) as box:
        res = cmd_rates(ExperimentConfig(model="uniform", s=4.0, m=4, n_list=[4, 8, 16, 32, 64, 128, 256]))
        ns = np.array([r["n"] for r in res.rows], dtype=float)
        sw = _slope(ns, [r["sup_err_wm"] for r in res.rows])
        stv = _slope(ns, [r["tv_err"] for r in res.rows])
        gap = max(r["oracle_gap"] for r in res.rows)
        box["ok"] = abs(sw + 1.0) <= 0.2 and abs(stv + 1.0) <= 0.2
        box["detail"] = f"slopes weighted {sw:.3f}, TV {stv:.3f} (oracle gap {gap:.1e}; see notes: odd cumulants vanish, true rate n^-2)"
    assert box["final"]


def test_08_fractional_s_rate():
    with criterion(8, "Student-t(4.5) s=4.2 m=4: weighted slope <= -0.85, inversion oracle", 300.0) as box:
        cfg = ExperimentConfig(model="student_t", s=4.2, m=4, n_list=[8, 16, 32, 64, 128, 256])
        res = cmd_rates(cfg)
        ns = np.array(cfg.n_list, dtype=float)
        sm = _slope(ns, [r["sup_err_wm"] for r in res.rows])
        ss = _slope(ns, [r["sup_err_ws"] for r in res.rows])
        box["ok"] = sm <= -0.85 and ss <= -0.85
        box["detail"] = f"slopes w=m {sm:.3f}, w=s {ss:.3f}; convolution cross-check gap {max(r['oracle_gap'] for r in res.rows):.1e}"
    assert box["final"]


def test_09_fractional_identities():
    with criterion(9, "eigen 1e-6, roundtrip 1e-4, parts 1e-6, Fourier 1e-5, eps(z) decreasing", 60.0) as box:
        results = [checks.check_eigen_identities(), checks.check_roundtrip(), checks.check_parts(),
                   checks.check_fourier_relation(), checks.check_scaled_decay()]
        box["ok"] = all(r.ok for r in results)
        box["detail"] = "; ".join(r.detail for r in results[:4]) + "; eps decreasing: " + str(results[4].ok)
    assert box["final"]


def test_10_smoothing():
    with criterion(10, "chi2_1 c=0.5 m=2 n=4..20: tv <= 2 beta_n, beta_n < c^n/2 past n_1, bounded passthrough", 120.0) as box:
        sm = checks.check_smoothing()
        bd = checks.check_bounded_identity()
        box["ok"] = sm.ok and bd.ok
        box["detail"] = f"{sm.detail}; {bd.detail}"
    assert box["final"]


def test_11_residual_probe():
    with criterion(11, "residual probe: Gaussian < 1e-12; Uniform R(n) n^((s-2)/2) non-increasing (upper half)", 120.0) as box:
        ns = [4, 8, 16, 32, 64, 128, 256]
        t = np.linspace(0.1, 4 ** (1 / 6), 40)  # inside |t| <= n^(1/6) for every n
        g = residual_probe(get_model("gaussian"), ExpansionOrder(4), ns, t)
        u = residual_probe(get_model("uniform"), ExpansionOrder(4), ns, t)
        box["ok"] = float(np.max(g.max_residual)) < 1e-12 and u.scaled_nonincreasing(upper_half=True)
        box["detail"] = f"Gaussian max R {np.max(g.max_residual):.1e}; Uniform scaled R " + ", ".join(f"{v:.3g}" for v in u.scaled_residual)
    assert box["final"]


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
