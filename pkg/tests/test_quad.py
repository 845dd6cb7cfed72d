import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as si

from cpforge.quad import (
    QuadratureSpec,
    gauss_kronrod,
    integrate,
    integrate_semi_infinite,
    principal_value,
)


def test_exponential():
    r = integrate_semi_infinite(lambda t: np.exp(-t), QuadratureSpec(1e-12))
    assert r.converged and abs(r.value - 1) < 1e-10


def test_first_moment():
    r = integrate_semi_infinite(lambda t: t * np.exp(-2 * t), QuadratureSpec(1e-12))
    assert r.value == pytest.approx(0.25, rel=1e-10)


def test_perfect_conductor_reduction():
    r = integrate_semi_infinite(lambda v: 2 / v**2 - 2 / v**4, QuadratureSpec(1e-12), lower=1.0)
    assert r.value == pytest.approx(4 / 3, rel=1e-10)


def test_finite_interval_and_tuple_unpacking():
    value, err = integrate(np.sin, 0.0, math.pi, QuadratureSpec(1e-12))
    assert value == pytest.approx(2.0, rel=1e-12) and err < 1e-10


def test_vector_integrand():
    r = gauss_kronrod(lambda x: np.stack([x, x * x]), 0.0, 1.0, QuadratureSpec(1e-12))
    assert np.allclose(r.value, [0.5, 1 / 3], rtol=1e-12)


def test_non_convergence_is_flagged():
    r = gauss_kronrod(lambda x: 1 / np.sqrt(np.abs(x - 0.3)), 0.0, 1.0, QuadratureSpec(1e-14, max_subdivisions=3))
    assert not r.converged


def test_spec_validation():
    for kwargs in ({"rel_tol": 0}, {"rel_tol": 1}, {"max_subdivisions": 0}, {"abs_tol": -1}, {"t_max": 0}):
        with pytest.raises(ValueError):
            QuadratureSpec(**kwargs)


def test_pv_symmetric():
    r = principal_value(lambda w: np.ones_like(w), 1.0, 0.0, 2.0, QuadratureSpec(1e-12))
    assert abs(r.value) < 1e-12


def test_pv_zero():
    assert principal_value(lambda w: np.zeros_like(w), 1.0, 0.0, 3.0).value == 0.0


def test_pv_exponential_against_ei():
    # [DERIVED] PV int_0^inf e^-w/(1-w) dw = e^-1 Ei(1)
    ref = float(mpmath.e**-1 * mpmath.ei(1))
    r = principal_value(lambda w: np.exp(-w), 1.0, 0.0, math.inf, QuadratureSpec(1e-12))
    assert r.value == pytest.approx(ref, rel=1e-10)


def test_pv_exponential_against_scipy_cauchy():
    # independent oracle: QUADPACK's Cauchy-weight rule on [0, 30] plus the tail
    head, _ = si.quad(lambda w: -np.exp(-w), 0, 30, weight="cauchy", wvar=1.0, epsabs=1e-14)
    r = principal_value(lambda w: np.exp(-w), 1.0, 0.0, 30.0, QuadratureSpec(1e-12))
    assert r.value == pytest.approx(head, rel=1e-9)


def test_pv_pole_outside_is_plain_integral():
    r = principal_value(lambda w: np.ones_like(w), 5.0, 0.0, 1.0, QuadratureSpec(1e-12))
    assert r.value == pytest.approx(math.log(5 / 4), rel=1e-12)


def test_deterministic():
    f = lambda t: np.exp(-t) * np.cos(3 * t)
    a = integrate_semi_infinite(f, QuadratureSpec(1e-10))
    b = integrate_semi_infinite(f, QuadratureSpec(1e-10))
    assert a.value == b.value and a.error == b.error


def test_scale_must_be_positive():
    with pytest.raises(ValueError):
        integrate_semi_infinite(np.exp, scale=0.0)


# battery for conservative error estimates: int_0^inf t^k e^{-a t} cos(b t)
BATTERY = [(k, a, b) for k in range(4) for a in (0.5, 1, 3) for b in (0, 1, 4)]


def test_error_estimates_are_conservative():
    hits = 0
    for k, a, b in BATTERY:
        exact = float(mpmath.re(mpmath.factorial(k) / mpmath.mpc(a, -b) ** (k + 1)))
        r = integrate_semi_infinite(lambda t: t**k * np.exp(-a * t) * np.cos(b * t), QuadratureSpec(1e-6))
        hits += abs(r.value - exact) <= max(r.error, 1e-15)
    assert hits >= 0.95 * len(BATTERY)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 10), st.floats(0.1, 10))
def test_semi_infinite_against_closed_form(a, scale):
    r = integrate_semi_infinite(lambda t: np.exp(-a * t), QuadratureSpec(1e-10), scale=scale)
    assert r.value == pytest.approx(1 / a, rel=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.2, 5), st.floats(0.1, 4))
def test_pv_against_scipy(pole, k):
    b = 2 * pole + 1
    ref, _ = si.quad(lambda w: -np.exp(-k * w), 0, b, weight="cauchy", wvar=pole, epsabs=1e-13, epsrel=1e-12)
    r = principal_value(lambda w: np.exp(-k * w), pole, 0.0, b, QuadratureSpec(1e-11))
    assert r.value == pytest.approx(ref, rel=1e-8, abs=1e-12)
