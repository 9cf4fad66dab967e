"""Model parameters and resonances of the delta-shell (Winter) model.

Units are hbar = 2m = 1. The s-wave Hamiltonian is -d^2/dr^2 + alpha*delta(r - R);
its resonances are the zeros of

    D(k) = 2k + i*alpha*(1 - exp(2ikR))

in the lower half-plane. Positive indices n label the fourth-quadrant zeros in
order of increasing real part; k_{-n} = -conj(k_n) are their mirror partners.
"""

from collections.abc import Sequence
from dataclasses import dataclass
import math

import numpy as np

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 100
COLLISION_TOL = 1e-8
# longest Newton step, as a fraction of the spacing pi/R between resonances
MAX_STEP_FRACTION = 0.25
HOMOTOPY_STEPS = 60
_EPS = np.finfo(float).eps


class ResonanceError(RuntimeError):
    """Base class for resonance solver failures."""


class ConvergenceError(ResonanceError):
    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"Newton iteration failed for resonance n={index}")


class CollisionError(ResonanceError):
    def __init__(self, first, second):
        self.indices = (first, second)
        super().__init__(f"resonances n={first} and n={second} coincide")


class PoleError(ZeroDivisionError):
    """krein_lambda was evaluated at (numerically) a resonance."""


@dataclass(frozen=True)
class ModelParams:
    """Coupling strength, shell radius and the number of retained resonances."""

    alpha: float
    R: float = 1.0
    n_max: int = 1000

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not (math.isfinite(self.R) and self.R > 0):
            raise ValueError(f"R must be positive, got {self.R}")
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be a positive integer, got {self.n_max}")

    @property
    def revival_period(self):
        """T = 2R^2/pi, the hard-wall revival period."""
        return 2.0 * self.R**2 / math.pi

    def moving_time(self, t):
        """t_alpha = t (1 + 2/(alpha R))."""
        return t * (1.0 + 2.0 / (self.alpha * self.R))

    def fingerprint(self):
        return {"alpha": float(self.alpha), "R": float(self.R), "n_max": int(self.n_max)}


@dataclass(frozen=True)
class Resonance:
    n: int
    k: complex

    def mirror(self):
        return Resonance(-self.n, -self.k.conjugate())


def _d(k, alpha, R):
    return 2.0 * k + 1j * alpha * (1.0 - np.exp(2j * k * R))


def _d_prime(k, alpha, R):
    return 2.0 + 2.0 * alpha * R * np.exp(2j * k * R)


def pole_residual(k, params):
    """D(k) = 2k + i alpha (1 - exp(2ikR)); entire, vanishing exactly at the poles."""
    d = _d(np.asarray(k, dtype=complex), params.alpha, params.R)
    return complex(d) if d.ndim == 0 else d


def residual_bound(k, params, tol=NEWTON_TOL):
    return tol * params.alpha * np.maximum(1.0, np.abs(k))


def krein_lambda(k, params, pole_tol=NEWTON_TOL):
    """Krein coefficient lambda(k) = -alpha / (1 + (i alpha / 2k)(1 - exp(2ikR))).

    Raises PoleError when |D(k)| is within the solver's residual bound, i.e.
    when k is a resonance to working precision.
    """
    k = complex(k)
    if k == 0:
        raise ValueError("krein_lambda is undefined at k = 0")
    d = pole_residual(k, params)
    if abs(d) <= residual_bound(k, params, pole_tol):
        raise PoleError(f"k = {k!r} is a pole of lambda (|D| = {abs(d):.3e})")
    return -params.alpha * 2.0 * k / d


def _guess(n, alpha, R):
    k0 = n * math.pi / R
    aR = alpha * R
    return k0 * (1.0 - 1.0 / aR + 1.0 / aR**2) - 1j * k0**2 / (alpha**2 * R)


def initial_guess(n, params):
    """Large-alpha expansion of k_n around the hard-wall value n*pi/R.

    Accurate to relative O((alpha R)^-3) while n*pi << alpha*R.
    """
    g = _guess(np.asarray(n), params.alpha, params.R)
    return complex(g) if np.ndim(g) == 0 else g


def _newton(k, alpha, R, tol, max_iter):
    """Damped Newton on D for an array of seeds (alpha may be an array).

    Returns the iterates and a mask of those meeting the residual bound.
    """
    k = np.array(k, dtype=complex)
    alpha = np.broadcast_to(np.asarray(alpha, dtype=float), k.shape)
    max_step = MAX_STEP_FRACTION * math.pi / R
    done = np.zeros(k.shape, dtype=bool)
    for _ in range(max_iter + 1):
        idx = np.flatnonzero(~done)
        if idx.size == 0:
            break
        ka, aa = k[idx], alpha[idx]
        with np.errstate(over="ignore", invalid="ignore"):
            e = np.exp(2j * ka * R)
            d = 2.0 * ka + 1j * aa * (1.0 - e)
            step = d / (2.0 + 2.0 * aa * R * e)
            # rounding level of D, dominated by the phase error of exp(2ikR)
            floor = 8 * _EPS * (2 * np.abs(ka) + aa * np.abs(e)) * (1 + 2 * np.abs(ka) * R)
        ok = np.abs(d) <= tol * aa * np.maximum(1.0, np.abs(ka)) + floor
        done[idx[ok]] = True
        move = ~ok & np.isfinite(step)
        step = step[move]
        size = np.abs(step)
        step = np.where(size > max_step, step * (max_step / np.maximum(size, 1e-300)), step)
        k[idx[move]] = ka[move] - step
    return k, done


def _polish(k, params):
    """One extra Newton step, kept only where it lowers |D|."""
    d = _d(k, params.alpha, params.R)
    k1 = k - d / _d_prime(k, params.alpha, params.R)
    better = np.abs(_d(k1, params.alpha, params.R)) < np.abs(d)
    return np.where(better, k1, k)


def _index_consistent(n, k, params):
    # Re k_n drifts from n*pi/R (alpha -> inf) down towards (n - 1/4)*pi/R (n*pi >> alpha R)
    x = k.real * params.R / math.pi
    return (x > n - 0.5) & (x <= n + 1e-9) & (k.imag < 0)


def _homotopy(n, params, tol, max_iter):
    """Continue roots in alpha, starting where the large-alpha guess is reliable."""
    n = np.asarray(n)
    alpha_start = np.maximum(params.alpha, 4.0 * n * math.pi / params.R)
    k = _guess(n, alpha_start, params.R)
    ok = np.ones(n.shape, dtype=bool)
    for j in range(1, HOMOTOPY_STEPS + 1):
        alphas = alpha_start * (params.alpha / alpha_start) ** (j / HOMOTOPY_STEPS)
        k, conv = _newton(k, alphas, params.R, tol, max_iter)
        ok &= conv
    return k, ok


class ResonanceSet(Sequence):
    """Fourth-quadrant resonances k_1..k_N of one ModelParams, with mirrors on demand."""

    def __init__(self, params, k):
        self.params = params
        self.k = np.asarray(k, dtype=complex)
        self.k.setflags(write=False)

    def __len__(self):
        return len(self.k)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        if i < 0:
            i += len(self)
        return Resonance(i + 1, complex(self.k[i]))

    @property
    def n(self):
        return np.arange(1, len(self.k) + 1)

    def signed(self):
        """Indices -N..-1, 1..N and the matching wavenumbers, k_{-n} = -conj(k_n)."""
        n = np.concatenate([-self.n[::-1], self.n])
        k = np.concatenate([-np.conj(self.k[::-1]), self.k])
        return n, k

    def residuals(self):
        return np.abs(pole_residual(self.k, self.params))


def find_resonances(params, tol=NEWTON_TOL, max_iter=NEWTON_MAX_ITER,
                    collision_tol=COLLISION_TOL):
    """Resonances n = 1..params.n_max by damped Newton from initial_guess.

    Seeds that fail to converge, or that land on a root belonging to another
    index, are recomputed by continuation in alpha from alpha >= 4 n pi / R.
    """
    n = np.arange(1, params.n_max + 1)
    k, conv = _newton(initial_guess(n, params), params.alpha, params.R, tol, max_iter)
    bad = ~(conv & _index_consistent(n, k, params))
    if bad.any():
        kh, convh = _homotopy(n[bad], params, tol, max_iter)
        k[bad] = kh
        conv[bad] = convh
        bad = ~(conv & _index_consistent(n, k, params))
        if bad.any():
            raise ConvergenceError(int(n[bad][0]))
    k = _polish(k, params)

    gaps = np.abs(np.diff(k))
    close = gaps < collision_tol * np.abs(k[1:])
    if close.any():
        i = int(np.flatnonzero(close)[0])
        raise CollisionError(i + 1, i + 2)
    if np.any(np.diff(k.real) <= 0):
        i = int(np.flatnonzero(np.diff(k.real) <= 0)[0])
        raise CollisionError(i + 1, i + 2)
    return ResonanceSet(params, k)
