import io
from math import comb

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fracedge import BoundsError, PreconditionError, ResolutionError
from fracedge.charfun import get_model
from fracedge.gridoracle import GridDensity, _convolve_pair, self_convolve
from fracedge.smoothing import (
    beta_n,
    first_good_n,
    log_beta_n,
    modified_density,
    reports_to_csv,
    tail_integral_probe,
    threshold_split,
)


@pytest.fixture(scope="module")
def chi2_split():
    rho = GridDensity.from_model(get_model("chi2_1"), L=32.0)
    return rho, threshold_split(rho, 0.5)


def test_reconstruction(chi2_split):
    rho, d = chi2_split
    assert np.max(np.abs(d.a * d.p_part.values + d.b * d.q_part.values - rho.values)) < 1e-10
    assert d.a + d.b == pytest.approx(rho.mass(), abs=1e-12)
    assert d.b < d.c / 2
    assert np.max(d.p_part.values) * d.a <= d.M + 1e-12
    assert d.p_part.mass() == pytest.approx(1.0) and d.q_part.mass() == pytest.approx(1.0)


def test_threshold_is_smallest_admissible(chi2_split):
    rho, d = chi2_split
    # lowering M to the next grid value would push the upper mass to c/2 or beyond
    nxt = np.max(rho.values[rho.values < d.M])
    assert rho.h * rho.values[rho.values >= d.M].sum() >= d.c / 2 or nxt < d.M


@given(st.integers(1, 60), st.integers(0, 5), st.floats(0.01, 0.99))
def test_log_beta_matches_beta(n, m, b):
    a = 1.0 - b
    direct = beta_n(n, m, a, b)
    assert np.exp(log_beta_n(n, m, a, b)) == pytest.approx(direct, rel=1e-10)


def test_beta_small_case():
    a, b = 0.7, 0.3
    assert beta_n(3, 1, a, b) == pytest.approx(1.0 - a**3)
    assert beta_n(2, 3, a, b) == pytest.approx(1.0)


def test_first_good_n(chi2_split):
    _, d = chi2_split
    n1 = first_good_n(2, d.a, d.b, 0.5)
    assert all(log_beta_n(n, 2, d.a, d.b) < n * np.log(0.5) - np.log(2) for n in range(n1, 65))
    assert not log_beta_n(n1 - 1, 2, d.a, d.b) < (n1 - 1) * np.log(0.5) - np.log(2)
    assert first_good_n(2, 0.5, 0.5, 0.5) is None


@pytest.mark.parametrize("n", [4, 7, 10])
def test_modified_density_bounds(chi2_split, n):
    _, d = chi2_split
    rep = modified_density(d, n, 2)
    assert rep.within_bound
    assert rep.mass == pytest.approx(1.0, abs=1e-6)
    assert rep.rho_tilde.values.max() < np.inf


def test_modified_density_against_subtraction(chi2_split):
    # independent route: full n-fold convolution minus the dropped binomial terms
    rho, d = chi2_split
    n, m = 5, 2
    h = d.h
    full = self_convolve(GridDensity(h, d.a * d.p_part.values + d.b * d.q_part.values), n).values
    nm = (full.size - 1) // 2
    dropped = np.zeros_like(full)
    for k in range(0, m + 2):
        term = np.array([1.0 / h])
        for _ in range(k):
            term = _convolve_pair(term, d.p_part.values, h, nm)[0]
        for _ in range(n - k):
            term = _convolve_pair(term, d.q_part.values, h, nm)[0]
        off = nm - (term.size - 1) // 2
        dropped[off : off + term.size] += comb(n, k) * d.a**k * d.b ** (n - k) * term
    expect = (full - dropped) / (1 - beta_n(n, m, d.a, d.b)) * np.sqrt(n)
    got = modified_density(d, n, m).rho_tilde.values
    assert np.max(np.abs(got - expect)) < 1e-9 * np.max(expect)


def test_bounded_input_is_identity():
    rho = GridDensity.from_model(get_model("uniform"))
    d = threshold_split(rho, 0.5)
    assert d.trivial and d.b == 0.0
    rep = modified_density(d, 6, 2)
    assert rep.tv_gap == 0.0 and rep.beta_n == 0.0


def test_bounded_override():
    rho = GridDensity.from_model(get_model("exp1"))
    assert threshold_split(rho, 0.5).trivial
    forced = threshold_split(rho, 0.5, bounded=False)
    assert not forced.trivial and forced.b < 0.25


def test_preconditions(chi2_split):
    _, d = chi2_split
    with pytest.raises(PreconditionError):
        modified_density(d, 3, 2)
    with pytest.raises(BoundsError):
        modified_density(d, 65, 2)
    with pytest.raises(PreconditionError):
        threshold_split(d.p_part, 1.0)
    spike = GridDensity(0.5, np.array([0.0, 0.2, 1.6, 0.2, 0.0]))
    with pytest.raises(ResolutionError):
        threshold_split(spike, 0.5, bounded=False)


def test_reports_csv(chi2_split):
    _, d = chi2_split
    buf = io.StringIO()
    reports_to_csv([modified_density(d, n, 2) for n in (4, 5)], buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "n,beta_n,tv_gap,bound_2beta"
    assert [ln.split(",")[0] for ln in lines[1:]] == ["4", "5"]


def test_tail_probe_gaussian():
    rep = tail_integral_probe(get_model("gaussian"), [16], np.linspace(1, 4, 7))[0]
    assert rep.decreasing
    # int_T^inf e^{-t^2/2} behaves like e^{-T^2/2}/T, so the fitted rate sits a bit above 1/2
    assert 0.5 <= rep.sigma2 <= 0.65
    with pytest.raises(PreconditionError):
        tail_integral_probe(get_model("gaussian"), [4], [3.0])


def test_tail_probe_smoothed_chi2(chi2_split):
    _, d = chi2_split
    rep = tail_integral_probe(d, [8], [1.0, 1.5, 2.0, 2.5], m=2)[0]
    assert rep.decreasing and rep.sigma2 > 0


def test_grid_spectrum_matches_direct_sum():
    from fracedge.smoothing import _half_spectrum

    g = GridDensity.from_model(get_model("exp1"), h=1 / 32, L=12)
    tau, spec = _half_spectrum(g, 4)
    pick = [0, 7, 100, len(tau) - 1]
    direct = g.h * np.exp(1j * np.outer(tau[pick], g.x)) @ g.values
    assert np.allclose(spec[pick], direct, atol=1e-12)
