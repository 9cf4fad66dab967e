"""Resonant (Gamow) states, initial states and the spectral data built from them.

Resonant states are v_n(r) = sqrt(2) Q_n sin(k_n r) on [0, R] with

    Q_n^2 = -2i k_n^2 / (2k_n + alpha^2 R sin 2k_nR + alpha sin 2k_nR + 2 k_n alpha R cos 2k_nR)

and Q_n its principal square root. Every observable is bilinear in the v_n, so
the branch of the root never matters.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .resonance import Resonance, find_resonances

DEGENERATE_TOL = 1e-14
SINC_SWITCH = 1e-8

LINEAR = "linear"
CONSTANT = "constant"
TABULATED = "tabulated"


class DegenerateStateError(ZeroDivisionError):
    pass


@dataclass(frozen=True)
class ResonantState:
    resonance: Resonance
    Q: complex

    @property
    def k(self):
        return self.resonance.k

    @property
    def n(self):
        return self.resonance.n


def q_squared(k, params):
    """Normalization Q_n^2 of the resonant state at wavenumber k (array-aware)."""
    k = np.asarray(k, dtype=complex)
    a, R = params.alpha, params.R
    s2, c2 = np.sin(2 * k * R), np.cos(2 * k * R)
    den = 2 * k + a * a * R * s2 + a * s2 + 2 * k * a * R * c2
    if np.any(np.abs(den) < DEGENERATE_TOL):
        raise DegenerateStateError("vanishing denominator in Q^2")
    q2 = -2j * k * k / den
    return complex(q2) if q2.ndim == 0 else q2


def build_state(res, params):
    """Attach the principal-branch normalization Q to a resonance."""
    return ResonantState(res, complex(np.sqrt(q_squared(res.k, params))))


def eval_state(state, r):
    r = np.asarray(r, dtype=float)
    v = math.sqrt(2.0) * state.Q * np.sin(state.k * r)
    return complex(v) if v.ndim == 0 else v


@dataclass(frozen=True, eq=False)
class InitialState:
    """Reduced initial wave function phi(r, 0), supported on [0, R].

    Tabulated states are linearly interpolated between samples and linearly
    extrapolated over the end gaps to r = 0 and r = R; they are scaled to unit
    norm on construction (``scale`` records the factor applied).
    """

    kind: str
    R: float = 1.0
    r_samples: np.ndarray = None
    phi_samples: np.ndarray = None
    scale: float = 1.0
    _nodes: tuple = field(default=None, repr=False)

    @classmethod
    def linear(cls, R=1.0):
        """phi(r, 0) = sqrt(3) R^{-3/2} r: constant 3D wave function inside the shell."""
        return cls(LINEAR, float(R))

    @classmethod
    def constant(cls, R=1.0):
        """phi(r, 0) = R^{-1/2}: constant reduced wave function."""
        return cls(CONSTANT, float(R))

    @classmethod
    def tabulated(cls, r, phi, R=1.0, normalize=True):
        r = np.asarray(r, dtype=float)
        phi = np.asarray(phi, dtype=float)
        if r.ndim != 1 or r.shape != phi.shape or r.size < 2:
            raise ValueError("tabulated state needs two equal-length columns with >= 2 rows")
        if np.any(np.diff(r) <= 0):
            raise ValueError("tabulated radii must be strictly increasing")
        if r[0] <= 0 or r[-1] >= R:
            raise ValueError(f"tabulated radii must lie strictly inside (0, {R})")
        nodes_r, nodes_phi = _extend_to_ends(r, phi, R)
        norm = math.sqrt(_piecewise_linear_square_integral(nodes_r, nodes_phi))
        if norm == 0:
            raise ValueError("tabulated state has zero norm")
        scale = 1.0 / norm if normalize else 1.0
        return cls(TABULATED, float(R), r, phi, scale, (nodes_r, nodes_phi * scale))

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        inside = (r >= 0) & (r <= self.R)
        if self.kind == LINEAR:
            val = math.sqrt(3.0) * self.R**-1.5 * r
        elif self.kind == CONSTANT:
            val = np.full(r.shape, self.R**-0.5)
        else:
            nr, nphi = self._nodes
            val = np.interp(r, nr, nphi)
        return np.where(inside, val, 0.0)

    def norm_squared(self):
        if self.kind in (LINEAR, CONSTANT):
            return 1.0
        return _piecewise_linear_square_integral(*self._nodes)

    def describe(self):
        return self.kind


def _extend_to_ends(r, phi, R):
    s0 = (phi[1] - phi[0]) / (r[1] - r[0])
    s1 = (phi[-1] - phi[-2]) / (r[-1] - r[-2])
    left = phi[0] - s0 * r[0]
    right = phi[-1] + s1 * (R - r[-1])
    return np.concatenate([[0.0], r, [R]]), np.concatenate([[left], phi, [right]])


def _piecewise_linear_square_integral(r, phi):
    h = np.diff(r)
    a, b = phi[:-1], phi[1:]
    return float(np.sum(h * (a * a + a * b + b * b) / 3.0))


def _sine_moments(k, init):
    """int_0^R phi0(r) sin(k r) dr, exact for every supported initial-state kind."""
    k = np.asarray(k, dtype=complex)
    R = init.R
    if init.kind == LINEAR:
        return math.sqrt(3.0) * R**-1.5 * (np.sin(k * R) - k * R * np.cos(k * R)) / k**2
    if init.kind == CONSTANT:
        return R**-0.5 * (1.0 - np.cos(k * R)) / k
    # continuous piecewise-linear f: integrate by parts twice
    nr, nphi = init._nodes
    slopes = np.diff(nphi) / np.diff(nr)
    kk = k[..., None]
    boundary = (nphi[0] - nphi[-1] * np.cos(k * R)) / k
    sin_nodes = np.sin(kk * nr)
    inner = np.sum(slopes * (sin_nodes[..., 1:] - sin_nodes[..., :-1]), axis=-1) / k**2
    return boundary + inner


def coeff_C(state, init):
    """C_n = int_0^R phi(r, 0) v_n(r) dr."""
    return complex(math.sqrt(2.0) * state.Q * _sine_moments(state.k, init))


def _half_sinc(x, R):
    """sin(xR) / (2x), with its Taylor branch near x = 0."""
    x = np.asarray(x, dtype=complex)
    small = np.abs(x) < SINC_SWITCH
    safe = np.where(small, 1.0, x)
    xr2 = (x * R) ** 2
    return np.where(small, 0.5 * R * (1.0 - xr2 / 6.0), np.sin(safe * R) / (2.0 * safe))


def overlap_matrix(k, Q, R):
    """I_nl = int_0^R v_n(r) conj(v_l(r)) dr for all pairs (Hermitian by construction)."""
    k = np.asarray(k, dtype=complex)
    Q = np.asarray(Q, dtype=complex)
    kc = np.conj(k)
    diff = k[:, None] - kc[None, :]
    summ = k[:, None] + kc[None, :]
    return 2.0 * Q[:, None] * np.conj(Q)[None, :] * (_half_sinc(diff, R) - _half_sinc(summ, R))


def overlap_I(state_n, state_l, R):
    return complex(overlap_matrix([state_n.k, state_l.k], [state_n.Q, state_l.Q], R)[0, 1])


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Everything the time evolution needs for one (params, initial state) pair.

    Arrays run over the signed indices -N..-1, 1..N.
    """

    params: object
    initial: InitialState
    indices: np.ndarray
    k: np.ndarray
    Q: np.ndarray
    C: np.ndarray
    I: np.ndarray

    def position(self, n):
        N = len(self.indices) // 2
        if n == 0 or abs(n) > N:
            raise KeyError(n)
        return n + N if n < 0 else n + N - 1

    def coefficient(self, n):
        return complex(self.C[self.position(n)])

    def overlap(self, n, l):
        return complex(self.I[self.position(n), self.position(l)])

    def state(self, n):
        i = self.position(n)
        return ResonantState(Resonance(int(n), complex(self.k[i])), complex(self.Q[i]))

    def states(self):
        return [self.state(int(n)) for n in self.indices]

    def state_values(self, r):
        """v_n(r) for every index, shape (len(r), 2N)."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        return math.sqrt(2.0) * self.Q[None, :] * np.sin(np.outer(r, self.k))

    def state_derivatives(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        return math.sqrt(2.0) * (self.Q * self.k)[None, :] * np.cos(np.outer(r, self.k))

    def fingerprint(self):
        return {**self.params.fingerprint(), "state": self.initial.describe()}


def assemble_spectral(params, initial, indices, k, Q):
    """SpectralData from explicit wavenumbers and normalizations."""
    k = np.asarray(k, dtype=complex)
    Q = np.asarray(Q, dtype=complex)
    C = math.sqrt(2.0) * Q * _sine_moments(k, initial)
    I = overlap_matrix(k, Q, params.R)
    for a in (k, Q, C, I):
        a.setflags(write=False)
    return SpectralData(params, initial, np.asarray(indices), k, Q, C, I)


def build_spectral(params, initial, resonances=None):
    """Resonances (found if not given), their mirrors, C_n and I_nl."""
    if resonances is None:
        resonances = find_resonances(params)
    if abs(initial.R - params.R) > 1e-12 * params.R:
        raise ValueError("initial state and model use different radii")
    indices, k = resonances.signed()
    return assemble_spectral(params, initial, indices, k, np.sqrt(q_squared(k, params)))


def residue_sum_check(spectral, r, r_prime):
    """Truncated sum over all indices of v_n(r) v_n(r') / k_n (zero in the full limit)."""
    v = spectral.state_values([r, r_prime])
    return complex(np.sum(v[0] * v[1] / spectral.k))
