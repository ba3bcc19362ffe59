from math import gamma

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from fracedge import NumericError, PreconditionError
from fracedge import checks
from fracedge.fractional import (
    LEFT,
    RIGHT,
    FractionalOrder,
    SignedMeasureSpec,
    fractional_fourier_check,
    fractional_parts_identity_check,
    gaussian_weighted_transform,
    liouville_derivative,
    liouville_integral,
    scaled_decay_check,
)

orders = st.floats(0.05, 0.95)
points = st.floats(0.1, 4.0)


@given(orders, st.floats(0.0, 3.0), points)
def test_left_integral_of_power(a, b, x):
    got = liouville_integral(LEFT, lambda t: t**b, a, x)
    assert got == pytest.approx(gamma(b + 1) / gamma(b + 1 + a) * x ** (b + a), rel=1e-10)


@given(orders, st.floats(0.5, 3.0), st.floats(0.3, 4.0))
def test_left_derivative_of_power(a, b, x):
    got = liouville_derivative(LEFT, lambda t: t**b, a, x)
    assert got == pytest.approx(gamma(b + 1) / gamma(b + 1 - a) * x ** (b - a), rel=1e-6)


@given(orders, st.floats(0.3, 3.0), points)
def test_right_exponential_eigenfunctions(a, lam, x):
    y = lambda t: np.exp(-lam * t)
    assert liouville_integral(RIGHT, y, a, x) == pytest.approx(lam**-a * np.exp(-lam * x), rel=1e-9)
    assert liouville_derivative(RIGHT, y, a, x) == pytest.approx(lam**a * np.exp(-lam * x), rel=1e-6)


def _qaws_left(y, a, x, cuts=()):
    # QUADPACK's algebraic-weight rule carries the (x - t)^(a-1) factor exactly
    edges = [0.0, *[c for c in cuts if 0 < c < x], x]
    total = 0.0
    for lo, hi in zip(edges[:-2], edges[1:-1]):
        total += integrate.quad(lambda t: (x - t) ** (a - 1) * y(t), lo, hi, epsabs=0, epsrel=1e-13)[0]
    total += integrate.quad(y, edges[-2], x, weight="alg", wvar=(0.0, a - 1), epsabs=0, epsrel=1e-13)[0]
    return total / gamma(a)


def _qaws_right(y, a, x):
    near = integrate.quad(y, x, x + 1, weight="alg", wvar=(a - 1, 0.0), epsabs=0, epsrel=1e-13)[0]
    far = integrate.quad(lambda t: (t - x) ** (a - 1) * y(t), x + 1, np.inf, epsabs=1e-15, epsrel=1e-13)[0]
    return (near + far) / gamma(a)


@pytest.mark.parametrize("a", [0.2, 0.5, 0.8])
@pytest.mark.parametrize("x", [0.3, 1.7, 5.0])
def test_against_weighted_quadpack(a, x):
    bump = lambda t: np.exp(-((t - 1.5) ** 2))
    assert liouville_integral(LEFT, bump, a, x) == pytest.approx(_qaws_left(bump, a, x), rel=1e-11, abs=1e-15)
    assert liouville_integral(RIGHT, bump, a, x) == pytest.approx(_qaws_right(bump, a, x), rel=1e-11, abs=1e-15)


def test_kinked_function_with_breakpoints():
    hat = lambda t: np.maximum(0.0, 1.0 - np.abs(np.asarray(t, dtype=float) - 1.0))
    for x in (1.3, 2.5):
        ref = _qaws_left(hat, 0.4, x, cuts=(1.0, 2.0))
        assert liouville_integral(LEFT, hat, 0.4, x, breakpoints=(0.0, 1.0, 2.0)) == pytest.approx(ref, rel=1e-10)


def test_semigroup_on_exponential():
    # I^a I^b e^{-t} on the right side stays an eigenfunction with eigenvalue 1
    inner = lambda s: np.array([liouville_integral(RIGHT, lambda t: np.exp(-t), 0.3, si) for si in np.atleast_1d(s)])
    assert liouville_integral(RIGHT, inner, 0.4, 1.0) == pytest.approx(np.exp(-1.0), rel=1e-9)


def test_roundtrip_on_bumps():
    for y in checks.BUMPS.values():
        assert checks.roundtrip_error(y, 0.4) < 1e-4


@pytest.mark.parametrize("pair", list(checks.PARTS_PAIRS))
@pytest.mark.parametrize("a", [0.3, 0.5, 0.7])
def test_integration_by_parts(pair, a):
    f, g = checks.PARTS_PAIRS[pair]
    lhs, rhs = fractional_parts_identity_check(f, g, a)
    assert abs(lhs - rhs) < 1e-6 * (1 + abs(lhs))


def test_argument_checks():
    y = lambda t: np.exp(-t)
    for bad in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(PreconditionError):
            liouville_integral(LEFT, y, bad, 1.0)
    with pytest.raises(PreconditionError):
        FractionalOrder(1.0)
    with pytest.raises(PreconditionError):
        liouville_integral(LEFT, y, 0.5, 0.0)
    with pytest.raises(PreconditionError):
        liouville_integral("up", y, 0.5, 1.0)
    with pytest.raises(NumericError):
        liouville_integral(RIGHT, lambda t: np.ones_like(t), 0.5, 1.0)
    assert liouville_integral(LEFT, y, FractionalOrder(0.5), 1.0) == pytest.approx(liouville_integral(LEFT, y, 0.5, 1.0))


def test_measure_basics():
    V = SignedMeasureSpec(atoms=((1.0, 1.0), (0.0, -2.0), (-1.0, 1.0)))
    assert [V.moment(k) for k in range(4)] == [0.0, 0.0, 2.0, 0.0]
    assert V.vanishing_order() == 1
    assert V.total_variation() == 4.0
    x = np.linspace(-3, 3, 7)
    assert np.allclose(V.fourier(x), 2 * np.cos(x) - 2)


def test_measure_with_density_part():
    # uniform density on [-1, 1] minus a unit atom at 0: moments 0 and 1 vanish
    V = SignedMeasureSpec(atoms=((0.0, -1.0),), density_part=lambda u: 0.5 * (abs(u) <= 1), density_support=(-1.0, 1.0))
    assert V.vanishing_order() == 1
    x = np.array([0.5, 2.0])
    assert np.allclose(V.fourier(x), np.sin(x) / x - 1, atol=1e-12)
    assert V.total_variation() == pytest.approx(2.0)


def test_zero_measure():
    V = SignedMeasureSpec()
    assert V.is_zero()
    rep = fractional_fourier_check(V, 0.5, 3, [1.0])
    assert rep.max_rel_discrepancy == 0.0 and rep.notes == ["zero measure"]


def test_fourier_relation_for_atom_measures():
    for V, m in checks.ATOM_MEASURES.values():
        rep = fractional_fourier_check(V, 0.5, m, [0.5, 2.0])
        assert rep.max_rel_discrepancy < 1e-5
        assert rep.decay_bounded


def test_fourier_check_preconditions():
    V, _ = checks.ATOM_MEASURES["d1 - d-1"]
    with pytest.raises(PreconditionError):
        fractional_fourier_check(V, 0.5, 0, [0.0])
    with pytest.raises(PreconditionError):
        fractional_fourier_check(V, 0.5, 1, [1.0])  # first moment is 2
    with pytest.raises(PreconditionError):
        fractional_fourier_check(SignedMeasureSpec(atoms=((1.0, 1.0), (-1.0, -1.0)), moment_order=0.2), 0.5, 0, [1.0])


def test_gaussian_weighted_transform_closed_form():
    # V = delta_1 - delta_-1: int e^{itx} 2i sin(zx) e^{-x^2/2} dx
    V, _ = checks.ATOM_MEASURES["d1 - d-1"]
    t, z = 0.7, 0.5
    ref = np.sqrt(2 * np.pi) * (np.exp(-0.5 * (t + z) ** 2) - np.exp(-0.5 * (t - z) ** 2))
    assert gaussian_weighted_transform(V, t, z) == pytest.approx(ref, abs=1e-13)


def test_scaled_decay():
    V, m = checks.ATOM_MEASURES["d1 - 2d0 + d-1"]
    rep = scaled_decay_check(V, 0.5, m, [1.0, 0.5, 0.25], np.linspace(-4, 4, 17))
    assert rep.decreasing and rep.bounded
    with pytest.raises(PreconditionError):
        scaled_decay_check(V, 0.5, m, [1.5], [0.0])
