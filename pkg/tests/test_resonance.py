import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import lambert_resonances
from winterdecay.resonance import (CollisionError, ConvergenceError, ModelParams, PoleError,
                                   Resonance, find_resonances, initial_guess, krein_lambda,
                                   pole_residual)


@pytest.mark.parametrize("kwargs", [dict(alpha=0.0), dict(alpha=-1.0), dict(alpha=float("inf")),
                                    dict(alpha=1.0, R=0.0), dict(alpha=1.0, R=-2.0),
                                    dict(alpha=1.0, n_max=0), dict(alpha=1.0, n_max=2.5)])
def test_model_params_validation(kwargs):
    with pytest.raises(ValueError):
        ModelParams(**kwargs)


def test_model_params_derived_quantities():
    p = ModelParams(500.0, 2.0, 10)
    assert p.revival_period == pytest.approx(8 / math.pi)
    assert p.moving_time(1.0) == pytest.approx(1 + 2 / 1000)
    assert p.fingerprint() == {"alpha": 500.0, "R": 2.0, "n_max": 10}


def test_roots_match_lambert_w_closed_form(resonances500, params500):
    oracle = lambert_resonances(params500.alpha, params500.R, params500.n_max)
    assert np.max(np.abs(resonances500.k - oracle) / np.abs(oracle)) < 1e-12


@pytest.mark.parametrize("alpha,R", [(0.05, 1.0), (3.0, 1.0), (40.0, 0.5), (1e4, 2.0)])
def test_other_parameters_match_oracle(alpha, R):
    p = ModelParams(alpha, R, 200)
    k = find_resonances(p).k
    oracle = lambert_resonances(alpha, R, 200)
    assert np.max(np.abs(k - oracle) / np.abs(oracle)) < 1e-11


def test_residual_invariants(resonances500, params500):
    k = resonances500.k
    bound = 1e-12 * params500.alpha * np.maximum(1, np.abs(k))
    assert np.all(np.abs(pole_residual(k, params500)) <= bound)
    assert np.all(k.real > 0) and np.all(k.imag < 0)
    assert np.all(np.diff(k.real) > 0)


def test_mirror_closure(resonances500, params500):
    n, k = resonances500.signed()
    assert list(n[:3]) == [-1000, -999, -998] and list(n[-2:]) == [999, 1000]
    assert np.all(k[:1000] == -np.conj(k[1000:][::-1]))
    d = pole_residual(k, params500)
    assert np.allclose(d[:1000], -np.conj(d[1000:][::-1]), rtol=0, atol=1e-15 * 500 * 4000)


@given(st.floats(-50, 50), st.floats(-5, 5), st.floats(0.1, 1e3))
def test_residual_mirror_identity(x, y, alpha):
    p = ModelParams(alpha)
    k = complex(x, y)
    d, dm = pole_residual(k, p), pole_residual(-k.conjugate(), p)
    assert abs(dm + d.conjugate()) <= 1e-12 * max(1.0, abs(d))


def test_resonance_mirror_object():
    r = Resonance(3, 9.4 - 0.01j)
    assert r.mirror() == Resonance(-3, -9.4 - 0.01j)


def test_set_access(resonances500):
    assert len(resonances500) == 1000
    assert resonances500[0].n == 1 and resonances500[-1].n == 1000
    assert [r.n for r in resonances500[2:5]] == [3, 4, 5]
    with pytest.raises(ValueError):
        resonances500.k[0] = 0


def test_widths_grow(resonances500):
    assert np.all(np.diff(-resonances500.k.imag) >= 0)


def test_initial_guess_value():
    g = initial_guess(1, ModelParams(500.0))
    k0 = math.pi
    assert g == pytest.approx(k0 * (1 - 1 / 500 + 1 / 500**2) - 1j * k0**2 / 500**2, rel=1e-15)
    assert abs(g.real - 3.135322) < 5e-7 and abs(g.imag + 3.94784e-5) < 5e-10
    g2 = initial_guess(2, ModelParams(500.0))
    assert g2.real == pytest.approx(2 * g.real, rel=1e-15)
    assert initial_guess(3, ModelParams(1e12, 2.0)) == pytest.approx(3 * math.pi / 2, rel=1e-11)


def test_guess_error_is_cubic():
    for alpha in (500.0, 2000.0, 8000.0):
        n_top = int(alpha / (2 * math.pi))
        p = ModelParams(alpha, 1.0, n_top)
        res = find_resonances(p)
        err = np.abs(res.k - initial_guess(res.n, p)) / np.abs(res.k)
        assert np.all(err <= (res.n * math.pi / alpha) ** 3)
        assert err[0] * alpha**3 < 20


def test_guess_residual_small():
    p = ModelParams(500.0)
    assert abs(pole_residual(initial_guess(1, p), p)) < 1e-3 * p.alpha


def test_krein_lambda_against_extended_precision():
    p = ModelParams(500.0)
    with mpmath.workdps(40):
        k = mpmath.mpf(1)
        expected = -500 / (1 + (1j * 500 / (2 * k)) * (1 - mpmath.exp(2j * k)))
    assert abs(krein_lambda(1.0, p) - complex(expected)) < 1e-13 * abs(complex(expected))


def test_krein_lambda_small_alpha():
    for alpha in (1e-3, 1e-5):
        lam = krein_lambda(2.0 - 0.1j, ModelParams(alpha))
        assert abs(lam + alpha) < 10 * alpha**2


def test_krein_lambda_poles(resonances500, params500):
    with pytest.raises(PoleError):
        krein_lambda(resonances500.k[0], params500)
    with pytest.raises(ValueError):
        krein_lambda(0, params500)
    assert np.isfinite(krein_lambda(resonances500.k[0] + 1e-3, params500))


def test_free_particle_residual():
    p = ModelParams(1e-300)
    k = np.array([0.5, 1 + 2j, -3j])
    assert np.allclose(pole_residual(k, p), 2 * k)


def test_convergence_error_reports_index():
    with pytest.raises(ConvergenceError) as info:
        find_resonances(ModelParams(500.0, 1.0, 5), max_iter=0)
    assert info.value.index == 1


def test_collision_error():
    with pytest.raises(CollisionError) as info:
        find_resonances(ModelParams(500.0, 1.0, 5), collision_tol=1.0)
    assert info.value.indices == (1, 2)


def test_no_bound_states(resonances500):
    assert not np.any((np.abs(resonances500.k.real) < 1e-12) & (resonances500.k.imag > 0))
