from itertools import product
from math import factorial

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from fracedge import ArityError, BoundsError
from fracedge.combinatorics import enumerate_weighted_partitions, faa_di_bruno, set_partition_weight

# integer partition function p(k), OEIS A000041
PARTITION_COUNTS = [1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42, 56, 77, 101, 135, 176, 231, 297, 385, 490, 627]


def brute_force(k):
    ranges = [range(k // r + 1) for r in range(1, k + 1)]
    return sorted(c for c in product(*ranges) if sum((r + 1) * p for r, p in enumerate(c)) == k)


@pytest.mark.parametrize("k", range(1, 9))
def test_matches_brute_force_enumeration(k):
    assert [tuple(c) for c in enumerate_weighted_partitions(k)] == brute_force(k)


@pytest.mark.parametrize("k", range(1, 21))
def test_count_is_partition_function(k):
    assert len(enumerate_weighted_partitions(k)) == PARTITION_COUNTS[k]


def test_k4_listing():
    assert [tuple(c) for c in enumerate_weighted_partitions(4)] == [
        (0, 0, 0, 1), (0, 2, 0, 0), (1, 0, 1, 0), (2, 1, 0, 0), (4, 0, 0, 0)
    ]


@pytest.mark.parametrize("k", [0, -1, 33])
def test_bounds(k):
    with pytest.raises(BoundsError):
        enumerate_weighted_partitions(k)


def test_partition_attributes():
    for c in enumerate_weighted_partitions(7):
        assert c.weight == 7
        assert c.size == sum(c)


@pytest.mark.parametrize("k", range(1, 13))
def test_set_partition_weights_sum_to_bell_number(k):
    total = sum(set_partition_weight(c) for c in enumerate_weighted_partitions(k))
    assert total == int(sp.bell(k))


def test_set_partition_weight_is_exact_integer():
    c = enumerate_weighted_partitions(20)[-1]  # twenty singletons
    assert set_partition_weight(c) == 1
    assert isinstance(set_partition_weight(enumerate_weighted_partitions(20)[7]), int)


def _derivs(expr, var, at, p):
    return [complex(sp.N(sp.diff(expr, var, j).subs(var, at), 30)) for j in range(p + 1)]


@pytest.mark.parametrize("p", range(1, 9))
def test_exp_of_sin_against_symbolic_derivative(p):
    t, y = sp.symbols("t y")
    t0 = 0.37
    inner = sp.sin(t)
    outer = _derivs(sp.exp(y), y, sp.sin(t0), p)
    got = faa_di_bruno(outer, _derivs(inner, t, t0, p), p)
    ref = complex(sp.N(sp.diff(sp.exp(sp.sin(t)), t, p).subs(t, t0), 30))
    assert abs(got - ref) <= 1e-11 * max(1.0, abs(ref))


@pytest.mark.parametrize("p", [1, 2, 3, 5])
def test_log_of_polynomial_against_finite_differences(p):
    # log(1 + t + t^3/2) at t0, derivative from a high-order finite-difference stencil
    t, y = sp.symbols("t y")
    t0 = 0.2
    inner = 1 + t + t**3 / 2
    got = faa_di_bruno(_derivs(sp.log(y), y, inner.subs(t, t0), p), _derivs(inner, t, t0, p), p)
    f = sp.lambdify(t, sp.log(inner), "mpmath")
    import mpmath

    mpmath.mp.dps = 40
    ref = float(mpmath.diff(f, t0, p))
    assert abs(got.real - ref) <= 1e-10 * max(1.0, abs(ref))


@given(st.integers(1, 10), st.floats(-2, 2))
def test_identity_outer_returns_inner_derivative(p, c):
    inner = [0.0] + [c * (j + 1) for j in range(p)]
    outer = [0.0, 1.0] + [0.0] * (p - 1)
    assert faa_di_bruno(outer, inner, p) == pytest.approx(inner[p])


@given(st.integers(1, 12), st.floats(-1.5, 1.5))
def test_linear_inner_scales_outer(p, a):
    # z(a t): the p-th derivative is a^p z^(p)
    outer = list(np.linspace(1.0, 2.0, p + 1))
    inner = [0.0, a] + [0.0] * (p - 1)
    assert faa_di_bruno(outer, inner, p) == pytest.approx(a**p * outer[p], rel=1e-12, abs=1e-300)


def test_arity_and_bounds():
    with pytest.raises(ArityError):
        faa_di_bruno([1, 1, 1], [0, 1, 1], 3)
    with pytest.raises(BoundsError):
        faa_di_bruno([1] * 30, [1] * 30, 21)
    with pytest.raises(BoundsError):
        faa_di_bruno([1, 1], [1, 1], 0)


def test_exp_of_identity_gives_bell_numbers():
    # d^p/dt^p exp(e^t - 1) at 0 is the Bell number B_p
    for p in range(1, 11):
        assert faa_di_bruno([1.0] * (p + 1), [0.0] + [1.0] * p, p).real == pytest.approx(float(sp.bell(p)))
    assert factorial(3) == 6
