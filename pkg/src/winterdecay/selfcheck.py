"""Fast invariant suite used by the ``selfcheck`` subcommand."""

from dataclasses import dataclass

import numpy as np

from . import propagator as prop
from .resonance import ModelParams, find_resonances, pole_residual
from .specfun import faddeeva, gamma_real
from .states import assemble_spectral, build_spectral, q_squared, residue_sum_check

MUTATIONS = ("q-sign", "mirror")


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def near_simple_rational(x, max_q=8, radius=0.01):
    """True if x is within ``radius`` of some p/q with q <= max_q."""
    return any(abs(x - round(x * q) / q) < radius for q in range(1, max_q + 1))


def generic_times(count, period, lo=0.05, hi=1.15, seed=0):
    """Random times in [lo T, hi T] at least T/100 away from p/q T with q <= 8."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        x = rng.uniform(lo, hi)
        if not near_simple_rational(x):
            out.append(x * period)
    return np.sort(np.asarray(out))


def mutate(spectral, kind):
    """Return a corrupted copy of the spectral data for mutation testing.

    'q-sign' flips the sign of Q for one state (harmless, observables are
    bilinear in v_n); 'mirror' uses k_{-n} = -k_n instead of -conj(k_n).
    """
    n = len(spectral.indices) // 2
    k, Q = np.array(spectral.k), np.array(spectral.Q)
    if kind == "q-sign":
        i = spectral.position(min(3, n))
        Q[i] = -Q[i]
    elif kind == "mirror":
        k[:n] = -k[n:][::-1]
        Q = np.sqrt(q_squared(k, spectral.params))
    else:
        raise ValueError(f"unknown mutation {kind!r}")
    return assemble_spectral(spectral.params, spectral.initial, spectral.indices, k, Q)


def check_specfun(seed=0, n=200):
    rng = np.random.default_rng(seed)
    z = rng.uniform(-5, 5, n) + 1j * rng.uniform(-5, 5, n)
    w, wm = faddeeva(z), faddeeva(-z)
    refl = 2 * np.exp(-z * z)
    scale = np.maximum(np.abs(w), np.abs(refl))
    e_refl = float(np.max(np.abs(wm - (refl - w)) / scale))
    e_conj = float(np.max(np.abs(faddeeva(np.conj(z)) - np.conj(wm)) / np.maximum(np.abs(wm), 1e-300)))
    x = rng.uniform(0.1, 20.0, n)
    e_gamma = float(np.max(np.abs(gamma_real(x + 1) / (x * gamma_real(x)) - 1)))
    k = rng.uniform(-50, 50, n) + 1j * rng.uniform(-5, 0, n)
    e_m0 = float(np.max(np.abs(prop.time_kernel(k, 0.0) - 0.5)))
    ok = bool(e_refl < 1e-10 and e_conj < 1e-10 and e_gamma < 1e-12 and e_m0 < 1e-15)
    return CheckResult("special functions", ok,
                       f"reflection {e_refl:.1e}, conjugation {e_conj:.1e}, "
                       f"gamma {e_gamma:.1e}, M(k,0) {e_m0:.1e}")


def check_residuals(params):
    res = find_resonances(ModelParams(params.alpha, params.R, min(50, params.n_max)))
    k = res.k
    ratio = np.abs(pole_residual(k, params)) / (1e-10 * params.alpha * np.maximum(1, np.abs(k)))
    ok = bool(np.all(ratio <= 1) and np.all(k.real > 0) and np.all(k.imag < 0))
    return CheckResult("resonance residuals", ok, f"max |D|/bound {ratio.max():.2e}")


def residue_sum_sizes(n_max):
    return sorted({max(1, n_max // 10), max(1, (3 * n_max) // 10), n_max})


def residue_sums(spectral, sizes, r=None, r_prime=None):
    """|sum_n v_n(r) v_n(r') / k_n| truncated at each size in ``sizes``."""
    p = spectral.params
    r = p.R / 2 if r is None else r
    r_prime = p.R / 3 if r_prime is None else r_prime
    values = []
    for m in sizes:
        keep = np.abs(spectral.indices) <= m
        sub = assemble_spectral(ModelParams(p.alpha, p.R, m), spectral.initial,
                                spectral.indices[keep], spectral.k[keep], spectral.Q[keep])
        values.append(abs(residue_sum_check(sub, r, r_prime)))
    return values


def check_residue_sum(spectral, tol=1e-3):
    """The truncated residue sum must be small next to the sum of its term magnitudes.

    The truncated value oscillates with the cutoff, so a strict decrease over
    a few cutoffs is reported but not required.
    """
    p = spectral.params
    v = spectral.state_values([p.R / 2, p.R / 3])
    terms = v[0] * v[1] / spectral.k
    ratio = abs(terms.sum()) / float(np.sum(np.abs(terms)))
    sizes = residue_sum_sizes(len(spectral.indices) // 2)
    trend = ", ".join(f"N={m}: {x:.2e}" for m, x in zip(sizes, residue_sums(spectral, sizes)))
    return CheckResult("residue sum rule", bool(ratio < tol), f"relative size {ratio:.2e} ({trend})")


def check_realness(spectral):
    T = spectral.params.revival_period
    try:
        prop.decay_law(np.linspace(0, 1.2 * T, 7), spectral)
    except prop.RealnessError as exc:
        return CheckResult("realness", False, str(exc))
    r = np.linspace(0, spectral.params.R, 101)
    phi0 = prop.wavefunction(r, 0.0, spectral)
    rel = float(np.max(np.abs(phi0.imag)) / np.max(np.abs(phi0)))
    return CheckResult("realness", bool(rel < 1e-8), f"max |Im phi(r,0)| / max |phi| = {rel:.2e}")


def check_derivative(spectral, count=5):
    T = spectral.params.revival_period
    times = generic_times(count, T, seed=1)
    h = 1e-6 * T
    fd = (prop.decay_law(times + h, spectral) - prop.decay_law(times - h, spectral)) / (2 * h)
    an = prop.decay_derivative(times, spectral)
    err = float(np.max(np.abs(an - fd) / np.abs(fd)))
    return CheckResult("derivative consistency", bool(err <= 1e-3), f"max relative error {err:.2e}")


def run_selfcheck(params, initial, mutation=None):
    results = [check_specfun(), check_residuals(params)]
    spectral = build_spectral(params, initial)
    if mutation:
        spectral = mutate(spectral, mutation)
    results += [check_residue_sum(spectral), check_realness(spectral), check_derivative(spectral)]
    return results
