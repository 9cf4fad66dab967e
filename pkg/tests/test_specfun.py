import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import erfcx, gamma as sp_gamma, wofz

from winterdecay.specfun import (FaddeevaOverflowError, SpecialFunctionError, erfc_scaled,
                                 faddeeva, gamma_real)

finite = st.floats(-20, 20, allow_nan=False)


def _rel(a, b):
    return np.abs(a - b) / np.maximum(np.abs(b), 1e-300)


def test_faddeeva_at_origin():
    assert faddeeva(0) == 1


def test_faddeeva_on_imaginary_axis_matches_mpmath():
    expected = complex(mpmath.e * mpmath.erfc(1))
    assert abs(faddeeva(1j) - expected) < 1e-15
    assert abs(expected.real - 0.427584) < 1e-6


def test_asymptotic_series_on_the_diagonal():
    z = 50 * np.exp(1j * np.pi / 4)
    series = 1j / (math.sqrt(math.pi) * z) * (1 + 1 / (2 * z**2) + 3 / (4 * z**4) + 15 / (8 * z**6))
    assert abs(faddeeva(z) - series) / abs(series) < 1e-10


def test_upper_half_plane_against_scipy():
    rng = np.random.default_rng(1)
    mag = 10 ** rng.uniform(-4, 4, 5000)
    ang = rng.uniform(0, np.pi, 5000)
    z = mag * np.exp(1j * ang)
    assert np.max(_rel(faddeeva(z), wofz(z))) < 1e-10


def test_lower_half_plane_against_scipy():
    rng = np.random.default_rng(2)
    z = rng.uniform(-6, 6, 3000) - 1j * rng.uniform(0, 6, 3000)
    assert np.max(_rel(faddeeva(z), wofz(z))) < 1e-10


def test_region_boundaries_are_continuous():
    for radius in (0.5, 8.0):
        ang = np.linspace(0, np.pi, 50)
        z = radius * np.exp(1j * ang)
        inner, outer = faddeeva(z * (1 - 1e-12)), faddeeva(z * (1 + 1e-12))
        assert np.max(_rel(inner, outer)) < 1e-10


def test_faddeeva_spot_values_against_mpmath():
    for z in (0.3 + 0.2j, 2.5 + 1.1j, -3.0 + 0.5j, 12.0 + 0.01j, 1.5 - 0.7j):
        expected = complex(mpmath.exp(-mpmath.mpc(z) ** 2) * mpmath.erfc(-1j * mpmath.mpc(z)))
        assert abs(faddeeva(z) - expected) / abs(expected) < 1e-12


def test_reflection_identity_on_random_points():
    rng = np.random.default_rng(3)
    r = 20 * np.sqrt(rng.uniform(0, 1, 1000))
    z = r * np.exp(2j * np.pi * rng.uniform(0, 1, 1000))
    refl = 2 * np.exp(-z * z)
    finite_mask = np.isfinite(refl)
    z, refl = z[finite_mask], refl[finite_mask]
    w, wm = faddeeva(z), faddeeva(-z)
    scale = np.maximum.reduce([np.abs(w), np.abs(wm), np.abs(refl)])
    assert np.max(np.abs(w + wm - refl) / scale) < 1e-10


@given(finite, finite)
def test_conjugation_symmetry(x, y):
    z = complex(x, y)
    try:
        lhs = faddeeva(-z.conjugate())
    except FaddeevaOverflowError:
        return
    assert abs(lhs - faddeeva(z).conjugate()) <= 1e-13 * abs(lhs)


@given(st.floats(-30, 30))
def test_real_axis_real_part(x):
    assert abs(faddeeva(x).real - math.exp(-x * x)) < 1e-12


def test_vectorized_and_scalar_agree():
    z = np.array([0.1 + 0.1j, 3 + 2j, -9 + 1j, 2 - 1j])
    assert np.all(faddeeva(z) == np.array([faddeeva(complex(v)) for v in z]))
    assert isinstance(faddeeva(1 + 1j), complex)


def test_overflow_in_lower_half_plane():
    with pytest.raises(FaddeevaOverflowError) as info:
        faddeeva(0.1 - 30j)
    assert info.value.z == 0.1 - 30j
    assert isinstance(info.value, OverflowError)
    assert isinstance(info.value, SpecialFunctionError)


def test_non_finite_input_rejected():
    with pytest.raises(ValueError):
        faddeeva(complex(np.nan, 0))
    with pytest.raises(ValueError):
        faddeeva(np.array([1j, np.inf]))


def test_erfc_scaled_values():
    assert erfc_scaled(0) == 1
    assert abs(erfc_scaled(1) - math.e * math.erfc(1)) < 1e-15
    u = np.linspace(-5, 25, 200)
    assert np.max(_rel(erfc_scaled(u), erfcx(u))) < 1e-12


def test_erfc_scaled_complex_against_mpmath():
    u = -np.exp(-1j * np.pi / 4) * np.pi * np.sqrt(0.1)
    expected = complex(mpmath.exp(mpmath.mpc(u) ** 2) * mpmath.erfc(mpmath.mpc(u)))
    assert abs(erfc_scaled(u) - expected) / abs(expected) < 1e-13


def test_gamma_special_values():
    assert abs(gamma_real(1.0) - 1) < 1e-15
    assert abs(gamma_real(0.5) - math.sqrt(math.pi)) < 1e-14
    assert abs(gamma_real(1 / 3) - 2.678938534707747) < 1e-12
    assert abs(gamma_real(5.0) - 24) < 1e-12


def test_gamma_one_third_against_integral():
    # t = s^3 removes the endpoint singularity: Gamma(1/3) = 3 int_0^inf exp(-s^3) ds
    val = 3 * mpmath.quad(lambda s: mpmath.exp(-s**3), [0, 1, 2, mpmath.inf])
    assert abs(gamma_real(1 / 3) / float(val) - 1) < 1e-12


def test_gamma_against_scipy():
    x = np.linspace(1e-3, 30, 3001)
    assert np.max(_rel(gamma_real(x), sp_gamma(x))) < 1e-12


@given(st.floats(1e-6, 29))
def test_gamma_recursion(x):
    assert abs(gamma_real(x + 1) / (x * gamma_real(x)) - 1) < 1e-12


@pytest.mark.parametrize("x", [0.0, -1.0, -0.5, float("nan")])
def test_gamma_domain(x):
    with pytest.raises(ValueError):
        gamma_real(x)
