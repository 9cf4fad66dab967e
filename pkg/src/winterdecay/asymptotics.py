"""Large-alpha analysis: tail sums, the asymptotic boundary wave function,
quadratic Gauss sums and the limit of dP/dt at the moving revival time.

Throughout, k_{n,0} = n pi / R are the hard-wall wavenumbers.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import math

import numpy as np

from .specfun import gamma_real

BOUNDED = "bounded-pattern"
LINEAR_GROWTH = "linear"
SUBLINEAR = "sublinear"

BOUNDED_MAX_EXPONENT = 0.1
LINEAR_EXPONENT_RANGE = (0.9, 1.1)
FIT_L_MIN = 1000
FIT_POINTS = 40
# exp(-x) < 1e-16 beyond this
_DAMPING_CUTOFF = 16 * math.log(10)


class GaussClassificationError(ArithmeticError):
    """Empirical growth class disagrees with the parity rule for a rational time."""

    def __init__(self, t, empirical, predicted):
        self.t, self.empirical, self.predicted = t, empirical, predicted
        super().__init__(f"t={t}: fitted class {empirical!r}, parity rule says {predicted!r}")


def derivative_limit(R=1.0):
    """lim dP/dt(T_alpha) for the linear initial state: -4 / (3 sqrt(3) R^2)."""
    return -4.0 / (3.0 * math.sqrt(3.0) * R * R)


def cubic_moment(j):
    """I_j = int_0^inf exp(-x^3) x^j dx = Gamma((j+1)/3) / 3."""
    if j <= -1:
        raise ValueError("cubic_moment needs j > -1")
    return gamma_real((j + 1) / 3.0) / 3.0


def limit_from_moments(R=1.0):
    """-(24/R^3)(R/pi)^2 (R/2T) I_0 I_1 with T = 2R^2/pi, from computed moments."""
    T = 2.0 * R * R / math.pi
    return -(24.0 / R**3) * (R / math.pi) ** 2 * (R / (2.0 * T)) * cubic_moment(0) * cubic_moment(1)


def _damping_exponent(n, t, params):
    k0 = n * math.pi / params.R
    return 2.0 * k0**3 * t / (params.alpha**2 * params.R)


def _n_terms(t, params, extra=0.0):
    # first n with damping exponent above the cutoff (plus a margin for growing powers)
    x = (_DAMPING_CUTOFF + extra) * params.alpha**2 * params.R / (2.0 * t)
    return int(math.ceil(x ** (1.0 / 3.0) * params.R / math.pi)) + 1


def tail_sum(j, t, params):
    """sum_{n>=1} exp(-2 k_{n,0}^3 t / (alpha^2 R)) k_{n,0}^j, summed directly."""
    if t <= 0 or j <= -1:
        raise ValueError("tail_sum needs t > 0 and j > -1")
    n_end = _n_terms(t, params)
    k_end = n_end * math.pi / params.R
    n_end = _n_terms(t, params, extra=max(j, 0) * math.log(max(k_end, 1.0)))
    n = np.arange(1, n_end + 1)
    k0 = n * math.pi / params.R
    return math.fsum(np.exp(-_damping_exponent(n, t, params)) * k0**j)


def tail_sum_closed(j, t, params):
    """(R/pi) (R/2t)^{(j+1)/3} alpha^{2(j+1)/3} I_j."""
    if t <= 0 or j <= -1:
        raise ValueError("tail_sum_closed needs t > 0 and j > -1")
    R, a = params.R, params.alpha
    e = (j + 1) / 3.0
    return (R / math.pi) * (R / (2.0 * t)) ** e * a ** (2.0 * e) * cubic_moment(j)


def linear_profile_coefficients(n, params):
    """C_n = (-1)^{n+1} sqrt(6) / (R k_{n,0}) for the linear initial state at large alpha."""
    n = np.asarray(n)
    sign = np.where(n % 2 == 1, 1.0, -1.0)
    return sign * math.sqrt(6.0) / (params.R * n * math.pi / params.R)


def _csum(z):
    z = np.asarray(z, dtype=complex)
    return complex(math.fsum(z.real), math.fsum(z.imag))


def _boundary_terms(t, params, coefficients, moving):
    if t <= 0:
        raise ValueError("asymptotic evaluation needs t > 0")
    n = np.arange(1, _n_terms(t, params, extra=math.log(_n_terms(t, params) + 1.0)) + 1)
    k0 = n * math.pi / params.R
    if coefficients is None:
        C = linear_profile_coefficients(n, params)
    elif callable(coefficients):
        C = np.asarray(coefficients(n), dtype=complex)
    else:
        C = np.asarray(coefficients, dtype=complex)
        if len(C) < len(n):
            C = np.concatenate([C, np.zeros(len(n) - len(C))])
        C = C[: len(n)]
    sign = np.where(n % 2 == 0, 1.0, -1.0)
    shift = 1.0 if moving else 1.0 - 2.0 / (params.alpha * params.R)
    # exact phase reduction: k0^2 t = pi n^2 (pi t / R^2); reduce n^2 mod 2 for t = revival multiples
    tau = math.pi * t * shift / params.R**2
    phase = np.exp(-1j * math.pi * _reduced_square_phase(n, tau))
    damp = np.exp(-_damping_exponent(n, t, params))
    common = math.sqrt(2.0 / params.R) * sign * C * phase * damp
    return n, k0, common


def _reduced_square_phase(n, tau):
    """n^2 tau mod 2, with tau split into an exact rational part and a small float remainder."""
    frac = Fraction(tau).limit_denominator(1 << 20)
    rest = tau - float(frac)
    p, q = frac.numerator, frac.denominator
    m = (n % (2 * q)).astype(np.int64)
    exact = ((m * m) % (2 * q)) * (p % (2 * q)) % (2 * q) / q
    return np.mod(exact + (n.astype(float) ** 2) * rest, 2.0)


def asymptotic_boundary(t, params, coefficients=None, moving=False, derivative=False):
    """Large-alpha phi(R, t) (or phi'(R, t) with ``derivative``).

    Each term carries the hard-wall phase, the cubic damping
    exp(-2 k_{n,0}^3 t / alpha^2 R) and the bracket -k/alpha - i k^2/alpha^2
    (replaced by k for the derivative). With ``moving`` the phase drift
    (1 - 2/alpha R) is dropped, i.e. the result refers to t_alpha = t (1 + 2/alpha R).
    Default coefficients are those of the linear initial state. Sums are
    compensated, so the result does not depend on the summation order.
    """
    n, k0, common = _boundary_terms(t, params, coefficients, moving)
    a = params.alpha
    bracket = k0 if derivative else -k0 / a - 1j * k0**2 / a**2
    return _csum(common * bracket)


def asymptotic_derivative(t, params, coefficients=None, moving=True):
    """dP/dt = -2 Im(phi'(R) conj(phi(R))) from the asymptotic boundary values."""
    phi = asymptotic_boundary(t, params, coefficients, moving)
    dphi = asymptotic_boundary(t, params, coefficients, moving, derivative=True)
    return -2.0 * (dphi * phi.conjugate()).imag


@dataclass
class GaussSumResult:
    t: object
    L_values: np.ndarray
    magnitudes: np.ndarray
    growth_class: str
    exponent: float
    fit_range: tuple
    predicted_class: str = None

    def to_dict(self):
        return {
            "t": str(self.t),
            "class": self.growth_class,
            "exponent": self.exponent,
            "fit_range": list(self.fit_range),
            "parity_class": self.predicted_class,
        }


def _phases(t, L):
    """pi n^2 t mod 2 pi for n = 1..L, with exact integer reduction."""
    frac = t if isinstance(t, Fraction) else Fraction(float(t))
    p, q = frac.numerator, frac.denominator
    two_q = 2 * q
    if two_q < (1 << 31):
        m = np.arange(1, L + 1, dtype=np.int64) % two_q
        r = (m * m) % two_q * (p % two_q) % two_q
        return math.pi * r / q
    pm = p % two_q
    r = [(n * n * pm) % two_q / q for n in range(1, L + 1)]
    return math.pi * np.asarray(r)


def gauss_sum_partials(t, L):
    """S_1(t), ..., S_L(t) with S_L(t) = sum_{n=1}^{L} exp(i pi n^2 t)."""
    if L < 1:
        raise ValueError("L must be >= 1")
    return np.cumsum(np.exp(1j * _phases(t, int(L))))


def gauss_sum(t, L):
    """S_L(t) = sum_{n=1}^{L} exp(i pi n^2 t), summed with compensation."""
    if L < 1:
        raise ValueError("L must be >= 1")
    return _csum(np.exp(1j * _phases(t, int(L))))


def parity_class(t):
    """Growth class predicted for a rational t = p/q: bounded iff pq odd."""
    t = Fraction(t)
    if t.numerator == 0:
        return LINEAR_GROWTH
    return BOUNDED if (t.numerator * t.denominator) % 2 else LINEAR_GROWTH


def fit_exponent(L_values, magnitudes):
    x = np.log(np.asarray(L_values, dtype=float))
    y = np.log(np.maximum(np.asarray(magnitudes, dtype=float), 1e-300))
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def _class_of(exponent):
    lo, hi = LINEAR_EXPONENT_RANGE
    if exponent <= BOUNDED_MAX_EXPONENT:
        return BOUNDED
    if lo <= exponent <= hi:
        return LINEAR_GROWTH
    return SUBLINEAR


def classify_growth(t, L_max=100000, L_min=FIT_L_MIN, check_parity=True):
    """Fit the growth exponent of |S_L(t)| over log-spaced L in [L_min, L_max].

    The fitted quantity is the running maximum of |S_L|, which removes the
    oscillation of bounded and sublinear sums without changing the exponent.
    Fraction inputs are also classified by the parity rule; a disagreement
    raises GaussClassificationError when ``check_parity`` is set.
    """
    if L_max <= L_min:
        raise ValueError("L_max must exceed L_min")
    partial = np.abs(gauss_sum_partials(t, L_max))
    envelope = np.maximum.accumulate(partial)
    L_values = np.unique(np.geomspace(L_min, L_max, FIT_POINTS).round().astype(int))
    mags = envelope[L_values - 1]
    exponent = fit_exponent(L_values, mags)
    result = GaussSumResult(t, L_values, partial[L_values - 1], _class_of(exponent), exponent,
                            (int(L_min), int(L_max)))
    if isinstance(t, Fraction):
        result.predicted_class = parity_class(t)
        if check_parity and result.predicted_class != result.growth_class:
            raise GaussClassificationError(t, result.growth_class, result.predicted_class)
    return result


def parse_time(text):
    """'1/3' -> Fraction(1, 3); '0.5' -> 0.5 (float)."""
    text = text.strip()
    if "/" in text:
        return Fraction(text)
    return float(text)


@dataclass
class LimitRow:
    alpha: float
    Pdot_exact: float
    Pdot_asymptotic: float
    target: float

    @property
    def distance(self):
        return abs(self.Pdot_exact - self.target)


@dataclass
class LimitReport:
    rows: list = field(default_factory=list)

    @property
    def decreasing(self):
        """Whether |Pdot_exact - target| decreases with alpha; None for a single row."""
        if len(self.rows) < 2:
            return None
        d = [r.distance for r in self.rows]
        return all(b < a for a, b in zip(d, d[1:]))

    def to_dicts(self):
        return [{"alpha": r.alpha, "Pdot_exact": r.Pdot_exact,
                 "Pdot_asymptotic": r.Pdot_asymptotic, "target": r.target} for r in self.rows]


def derivative_limit_check(alphas, R=1.0, n_max=1000, initial=None):
    """Exact and asymptotic dP/dt at T_alpha = T (1 + 2/alpha R) for each alpha."""
    from .propagator import decay_derivative
    from .resonance import ModelParams
    from .states import InitialState, build_spectral

    alphas = [float(a) for a in alphas]
    if any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise ValueError("alphas must be ascending")
    initial = initial or InitialState.linear(R)
    report = LimitReport()
    for a in alphas:
        params = ModelParams(a, R, n_max)
        T = params.revival_period
        spectral = build_spectral(params, initial)
        exact = decay_derivative(params.moving_time(T), spectral)
        asym = asymptotic_derivative(T, params, moving=True)
        report.rows.append(LimitRow(a, exact, asym, derivative_limit(R)))
    return report
