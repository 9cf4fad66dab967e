import numpy as np
import pytest
from scipy.special import lambertw

from winterdecay import InitialState, ModelParams, build_spectral, find_resonances
from winterdecay import propagator as prop

ACCEPTANCE_LINES = []


def lambert_resonances(alpha, R, n_max):
    """Closed-form roots k_n = (i/2R)(W_{-n}(aR e^{aR}) - aR), independent of the solver."""
    aR = alpha * R
    # aR e^{aR} overflows beyond aR ~ 700; there solve w + log w = log x + 2 pi i n instead
    out = []
    for n in range(1, n_max + 1):
        if aR < 700:
            w = lambertw(aR * np.exp(aR), -n)
        else:
            w = _lambert_log(aR + np.log(aR), -n)
        out.append((1j / (2 * R)) * (w - aR))
    k = np.asarray(out)
    return np.where(k.real < 0, -np.conj(k), k)


def _lambert_log(log_x, branch):
    # Newton on w + log(w) = log_x + 2 pi i branch, valid away from the branch point
    target = log_x + 2j * np.pi * branch
    w = target - np.log(target)
    for _ in range(100):
        f = w + np.log(w) - target
        w_new = w - f / (1 + 1 / w)
        if abs(w_new - w) < 1e-15 * abs(w):
            return w_new
        w = w_new
    return w


def radial_norm(spectral, t, panels=800, order=20):
    """int_0^R |phi(r,t)|^2 dr by composite Gauss-Legendre over the truncated series."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0, spectral.params.R, panels + 1)
    half = np.diff(edges)[:, None] / 2
    r = ((edges[:-1, None] + edges[1:, None]) / 2 + half * x).ravel()
    wts = (half * w).ravel()
    total = 0.0
    for i in range(0, len(r), 2000):
        phi = prop.wavefunction(r[i:i + 2000], t, spectral)
        total += float(np.sum(wts[i:i + 2000] * np.abs(phi) ** 2))
    return total


@pytest.fixture(scope="session")
def params500():
    return ModelParams(500.0, 1.0, 1000)


@pytest.fixture(scope="session")
def resonances500(params500):
    return find_resonances(params500)


@pytest.fixture(scope="session")
def linear500(params500, resonances500):
    return build_spectral(params500, InitialState.linear(), resonances500)


@pytest.fixture(scope="session")
def constant500(params500, resonances500):
    return build_spectral(params500, InitialState.constant(), resonances500)


@pytest.fixture(scope="session")
def small_spectral():
    p = ModelParams(50.0, 1.0, 60)
    return build_spectral(p, InitialState.linear())


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
