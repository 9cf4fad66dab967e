"""Time evolution inside the shell from the resonance expansion.

The propagator is u(t, r, r') = sum_n M(k_n, t) v_n(r) v_n(r') with the time
kernel M(k, t) = 1/2 exp(u^2) erfc(u), u = -exp(-i pi/4) k sqrt(t), and the
decay law is the double series P(t) = sum_{n,l} a_n I_nl conj(a_l) with
a_n = C_n M(k_n, t).

For large |u| the kernel behaves like exp(u^2) [n > 0 only] + b/(k sqrt(t)) with
the same constant b for every index. Since sum_n v_n(r) v_n(r') / k_n = 0, that
background term adds nothing to the full series, but truncating it leaves a
boundary layer at r = R that spoils phi(R, t), phi'(R, t) and slows the
convergence of P. By default the background is subtracted from every kernel
value once the highest retained resonance is in the asymptotic regime
(k_max^2 t >= REGULARIZATION_ONSET); at smaller t the plain kernel is used.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math

import numpy as np

from .specfun import FaddeevaOverflowError, erfc_scaled

_ROT = complex(math.cos(-math.pi / 4), math.sin(-math.pi / 4))  # exp(-i pi/4)
BACKGROUND = -complex(math.cos(math.pi / 4), math.sin(math.pi / 4)) / (2.0 * math.sqrt(math.pi))
REGULARIZATION_ONSET = 16.0
IMAG_TOL = 1e-10
CHUNK = 64


class RealnessError(ArithmeticError):
    """The decay-law contraction produced a non-negligible imaginary part."""


class EmptyWindowError(ValueError):
    pass


class QuadratureError(ArithmeticError):
    pass


class KernelOverflowError(FaddeevaOverflowError):
    """The time kernel overflowed; carries the offending (k, t) pair."""

    def __init__(self, k, t, z):
        super().__init__(z)
        self.k, self.t = k, t
        self.args = (f"time kernel overflows at k = {k!r}, t = {t!r}",)


def time_kernel(k, t):
    """M(k, t) = 1/2 exp(u^2) erfc(u), u = -exp(-i pi/4) k sqrt(t)."""
    if np.any(np.asarray(t) < 0):
        raise ValueError("time_kernel needs t >= 0")
    k_arr, t_arr = np.broadcast_arrays(np.asarray(k, dtype=complex), np.asarray(t, dtype=float))
    try:
        return 0.5 * erfc_scaled(-_ROT * k_arr * np.sqrt(t_arr))
    except FaddeevaOverflowError as exc:
        u = exc.z / 1j
        i = int(np.argmin(np.abs(-_ROT * k_arr * np.sqrt(t_arr) - u)))
        raise KernelOverflowError(complex(k_arr.flat[i]), float(t_arr.flat[i]), exc.z) from None


def kernel_background(k, t):
    """Large-|u| background of M shared by all indices: b / (k sqrt(t))."""
    return BACKGROUND / (np.asarray(k, dtype=complex) * np.sqrt(t))


def regularization_active(t, spectral):
    k_max = float(np.max(np.abs(spectral.k.real)))
    return np.asarray(t) * k_max**2 >= REGULARIZATION_ONSET


def kernel_matrix(spectral, times, regularize=True):
    """M(k_n, t) for every time (rows) and signed index (columns)."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < 0):
        raise ValueError("times must be >= 0")
    K = time_kernel(spectral.k[None, :], times[:, None])
    if regularize:
        on = regularization_active(times, spectral)
        if on.any():
            K[on] -= kernel_background(spectral.k[None, :], times[on, None])
    return K


def _amplitudes(spectral, times, regularize):
    return spectral.C[None, :] * kernel_matrix(spectral, times, regularize)


def wavefunction(r, t, spectral, regularize=True):
    """phi(r, t) = sum_n C_n M(k_n, t) v_n(r), for scalar t and scalar or array r."""
    a = _amplitudes(spectral, t, regularize)[0]
    phi = spectral.state_values(r) @ a
    return complex(phi[0]) if np.ndim(r) == 0 else phi


def wavefunction_derivative(r, t, spectral, regularize=True):
    a = _amplitudes(spectral, t, regularize)[0]
    d = spectral.state_derivatives(r) @ a
    return complex(d[0]) if np.ndim(r) == 0 else d


def propagator_series(t, r, r_prime, spectral, regularize=True):
    """u(t, r, r') = sum_n M(k_n, t) v_n(r) v_n(r')."""
    m = kernel_matrix(spectral, t, regularize)[0]
    v = spectral.state_values([r, r_prime])
    return complex(np.sum(m * v[0] * v[1]))


def _contract(spectral, A):
    P = np.einsum("tn,tn->t", A, np.conj(A) @ spectral.I.T)
    worst = float(np.max(np.abs(P.imag))) if P.size else 0.0
    if worst >= IMAG_TOL:
        raise RealnessError(f"decay law has imaginary part {worst:.3e}")
    return P.real


def _boundary_current(spectral, A):
    R = spectral.params.R
    phi = A @ spectral.state_values(R)[0]
    dphi = A @ spectral.state_derivatives(R)[0]
    return -2.0 * np.imag(dphi * np.conj(phi))


def decay_law(t, spectral, regularize=True):
    """P(t) = a^T I conj(a) with a_n = C_n M(k_n, t); scalar or array t."""
    P = _contract(spectral, _amplitudes(spectral, t, regularize))
    return float(P[0]) if np.ndim(t) == 0 else P


def decay_derivative(t, spectral, regularize=True):
    """dP/dt = -2 Im(phi'(R, t) conj(phi(R, t))) from the boundary current."""
    if np.any(np.asarray(t) <= 0):
        raise ValueError("decay_derivative needs t > 0")
    d = _boundary_current(spectral, _amplitudes(spectral, t, regularize))
    return float(d[0]) if np.ndim(t) == 0 else d


@dataclass
class DecayCurve:
    times: np.ndarray
    P: np.ndarray
    Pdot: np.ndarray = None
    params: dict = field(default_factory=dict)
    n_max: int = 0

    @property
    def revival_period(self):
        return 2.0 * self.params["R"] ** 2 / math.pi


@dataclass
class Snapshot:
    t: float
    r_grid: np.ndarray
    density: np.ndarray

    def norm(self):
        return float(np.trapezoid(self.density, self.r_grid))


def _curve_chunk(spectral, times, regularize):
    A = _amplitudes(spectral, times, regularize)
    P = _contract(spectral, A)
    Pdot = np.full(times.shape, np.nan)
    pos = times > 0
    if pos.any():
        Pdot[pos] = _boundary_current(spectral, A[pos])
    return P, Pdot


def decay_curve(spectral, times, threads=1, regularize=True):
    """P and dP/dt on a time grid, evaluated in fixed-size chunks.

    The chunking does not depend on ``threads``, so results are identical for
    any thread count. dP/dt is NaN at t = 0.
    """
    times = np.asarray(times, dtype=float)
    chunks = [times[i:i + CHUNK] for i in range(0, len(times), CHUNK)]
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: _curve_chunk(spectral, c, regularize), chunks))
    else:
        parts = [_curve_chunk(spectral, c, regularize) for c in chunks]
    P = np.concatenate([p for p, _ in parts]) if parts else np.empty(0)
    Pdot = np.concatenate([d for _, d in parts]) if parts else np.empty(0)
    return DecayCurve(times, P, Pdot, spectral.params.fingerprint(), spectral.params.n_max)


def snapshot(spectral, t, r_grid, regularize=True):
    r_grid = np.asarray(r_grid, dtype=float)
    phi = wavefunction(r_grid, t, spectral, regularize)
    return Snapshot(float(t), r_grid, np.abs(phi) ** 2)


def smeared_log_derivative(curve, window):
    """Boxcar average of Pdot/P over a centered window of the given length.

    Windows are clipped at the ends of the grid. NaN derivative samples (t = 0)
    are left out of the averages.
    """
    t = np.asarray(curve.times, dtype=float)
    if curve.Pdot is None:
        raise ValueError("curve has no derivative samples")
    if len(t) > 1 and window <= np.max(np.diff(t)):
        raise ValueError("smearing window must exceed the grid spacing")
    lo = np.searchsorted(t, t - window / 2, side="left")
    hi = np.searchsorted(t, t + window / 2, side="right")
    interior = (t - window / 2 >= t[0]) & (t + window / 2 <= t[-1])
    counts = hi - lo
    if not interior.any() or counts[interior].min() < 3:
        raise EmptyWindowError("fewer than 3 samples per smearing window")
    L = np.asarray(curve.Pdot, dtype=float) / np.asarray(curve.P, dtype=float)
    valid = np.isfinite(L)
    csum = np.concatenate([[0.0], np.cumsum(np.where(valid, L, 0.0))])
    ccount = np.concatenate([[0], np.cumsum(valid)])
    n = ccount[hi] - ccount[lo]
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(n > 0, (csum[hi] - csum[lo]) / np.maximum(n, 1), np.nan)


def spectral_kernel(k, r, r_prime, params):
    """p(k, r, r') = 2k sin(kr) sin(kr') / (pi (2k^2 + 2 alpha^2 sin^2 kR + 2 k alpha sin 2kR))."""
    k = np.asarray(k, dtype=float)
    a, R = params.alpha, params.R
    den = 2 * k * k + 2 * a * a * np.sin(k * R) ** 2 + 2 * k * a * np.sin(2 * k * R)
    return 2 * k * np.sin(k * r) * np.sin(k * r_prime) / (math.pi * den)


def free_propagator(t, r, r_prime):
    """Exact alpha = 0 s-wave kernel (e^{i(r-r')^2/4t} - e^{i(r+r')^2/4t}) / sqrt(4 pi i t)."""
    pref = 1.0 / np.sqrt(4j * math.pi * t)
    return complex(pref * (np.exp(1j * (r - r_prime) ** 2 / (4 * t))
                           - np.exp(1j * (r + r_prime) ** 2 / (4 * t))))


def _denominator_terms(k, params):
    a, R = params.alpha, params.R
    s2, c2 = np.sin(2 * k * R), np.cos(2 * k * R)
    den = k * k + a * a * np.sin(k * R) ** 2 + k * a * s2
    d1 = 2 * k + a * a * R * s2 + a * s2 + 2 * k * a * R * c2
    d2 = 2 + 2 * a * a * R * R * c2 + 4 * a * R * c2 - 4 * k * a * R * R * s2
    return den, d1, d2


def _real_axis_peaks(params, k_cutoff):
    """Minima of the real denominator of p, one per interval of length pi/R, with widths."""
    R = params.R
    j = np.arange(1, int(k_cutoff * R / math.pi) + 2)
    lo = (j - 0.5) * math.pi / R
    hi = (j + 0.5) * math.pi / R
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        _, d1, _ = _denominator_terms(mid, params)
        neg = d1 < 0
        lo = np.where(neg, mid, lo)
        hi = np.where(neg, hi, mid)
    peak = 0.5 * (lo + hi)
    den, _, d2 = _denominator_terms(peak, params)
    width = np.where(d2 > 0, np.sqrt(2 * np.abs(den) / np.maximum(d2, 1e-300)), math.pi / R)
    keep = peak < k_cutoff
    return peak[keep], width[keep]


def _breakpoints(t, r, r_prime, params, k_cutoff, max_phase):
    R = params.R
    pts = [0.0]
    k = 0.0
    while k < k_cutoff:
        k = min(k + max_phase / (2 * k * t + 2 * R + r + r_prime), k_cutoff)
        pts.append(k)
    base = np.asarray(pts)
    peaks, widths = _real_axis_peaks(params, k_cutoff)
    extra = [base]
    spacing = math.pi / R
    grading = 2.0 ** np.arange(-3, 40)
    for p, w in zip(peaks, widths):
        steps = w * grading
        steps = steps[steps < spacing / 2]
        if steps.size:
            extra.append(np.concatenate([[p], p - steps, p + steps]))
    allpts = np.unique(np.concatenate(extra))
    return allpts[(allpts >= 0) & (allpts <= k_cutoff)]


def _remainder_integrand(k, t, r, r_prime, params):
    # (p - p_free) 2k e^{-ik^2 t}; the free part is handled in closed form
    a, R = params.alpha, params.R
    ss = np.sin(k * r) * np.sin(k * r_prime)
    num = -2 * a * a * np.sin(k * R) ** 2 - 2 * k * a * np.sin(2 * k * R)
    den = 2 * k * k + 2 * a * a * np.sin(k * R) ** 2 + 2 * k * a * np.sin(2 * k * R)
    g = (2 * ss / math.pi) * num / den
    return g, g * np.exp(-1j * k * k * t)


def _panel_sum(edges, nodes, weights, f):
    total = 0.0 + 0.0j
    step = max(1, 200000 // len(nodes))
    for i in range(0, len(edges) - 1, step):
        a = edges[i:i + step + 1]
        left, right = a[:-1], a[1:]
        half = 0.5 * (right - left)
        mid = 0.5 * (right + left)
        x = mid[:, None] + half[:, None] * nodes[None, :]
        total += np.sum(half[:, None] * weights[None, :] * f(x))
    return total


def direct_propagate(t, r, r_prime, params, k_cutoff=4000.0, nodes=20, max_phase=4.0,
                     tol=1e-7):
    """u(t, r, r') by quadrature of p(k, r, r') e^{-ik^2 t} 2k over 0 < k < k_cutoff.

    Independent of the resonance expansion: the free (alpha = 0) kernel is
    added in closed form, the remainder is integrated with Gauss-Legendre panels
    graded around the real-axis peaks of p, and the tail beyond k_cutoff is
    approximated by its leading endpoint term. Raises QuadratureError when a
    half-order rule on the same panels disagrees by more than ``tol``.
    """
    if t <= 0:
        raise ValueError("direct_propagate needs t > 0")
    edges = _breakpoints(t, r, r_prime, params, k_cutoff, max_phase)

    def f(x):
        return _remainder_integrand(x, t, r, r_prime, params)[1]

    x_hi, w_hi = np.polynomial.legendre.leggauss(nodes)
    x_lo, w_lo = np.polynomial.legendre.leggauss(max(nodes // 2, 4))
    hi = _panel_sum(edges, x_hi, w_hi, f)
    lo = _panel_sum(edges, x_lo, w_lo, f)
    if abs(hi - lo) > tol:
        raise QuadratureError(f"panel quadrature unconverged: |difference| = {abs(hi - lo):.3e}")
    g_end, _ = _remainder_integrand(np.asarray(k_cutoff), t, r, r_prime, params)
    tail = g_end * np.exp(-1j * k_cutoff**2 * t) / (2j * k_cutoff * t)
    return complex(free_propagator(t, r, r_prime) + hi + tail)
