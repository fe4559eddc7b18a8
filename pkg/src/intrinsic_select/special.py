"""Special functions and the sampling law of the RSS-ratio statistic.

The ratio of residual sums of squares of two nested normal linear fits is a
doubly noncentral beta variable: U/(U+V) for independent noncentral
chi-squares U, V.  This module provides the central and doubly noncentral
beta CDF (double Poisson mixture over regularized incomplete betas), a
matching sampler, the beta quantile, the Kummer confluent hypergeometric
function on the nonpositive axis, and the in-probability limit of the ratio
statistic.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import ConvergenceFailureError, UnsupportedRegimeError

_BETACF_MAXIT = 400
_BETACF_EPS = 1e-15
_BETACF_TINY = 1e-300
# crossover from the small-shape power series to the continued fraction
_SERIES_SHAPE = 0.1
# double Poisson mixture: neglected mass bound and total term cap
_MIX_EPS = 1e-12
_MIX_CAP = 10**6
# argument above which the 1F1 large-argument expansion replaces the series
_KUMMER_SWITCH = 3000.0


@dataclass(frozen=True)
class DncBetaParams:
    """Parameters of a doubly noncentral beta distribution.

    ``a`` and ``b`` are the shape parameters (half the chi-square degrees of
    freedom of numerator and denominator increment), ``lambda1`` and
    ``lambda2`` the corresponding noncentralities.
    """

    a: float
    b: float
    lambda1: float
    lambda2: float

    def __post_init__(self):
        if not (self.a > 0.0 and self.b > 0.0):
            raise ValueError(f"shapes must be positive: a={self.a}, b={self.b}")
        if self.lambda1 < 0.0 or self.lambda2 < 0.0:
            raise ValueError(
                f"noncentralities must be nonnegative: "
                f"lambda1={self.lambda1}, lambda2={self.lambda2}"
            )


def log_gamma(x):
    """Natural log of the gamma function for x > 0."""
    x = np.asarray(x, dtype=np.float64)
    if np.any(x <= 0.0):
        raise ValueError("log_gamma requires x > 0")
    out = gammaln(x)
    return float(out) if out.ndim == 0 else out


def _log_beta(a: float, b: float) -> float:
    return float(gammaln(a) + gammaln(b) - gammaln(a + b))


def _betacf(x: np.ndarray, a: float, b: float) -> np.ndarray:
    """Continued fraction for the incomplete beta (modified Lentz, vectorized).

    Valid for x < (a+1)/(a+b+2); callers arrange the symmetry switch.
    """
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < _BETACF_TINY, _BETACF_TINY, d)
    d = 1.0 / d
    h = d.copy()
    for m in range(1, _BETACF_MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _BETACF_TINY, _BETACF_TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _BETACF_TINY, _BETACF_TINY, c)
        d = 1.0 / d
        h = h * d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _BETACF_TINY, _BETACF_TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _BETACF_TINY, _BETACF_TINY, c)
        d = 1.0 / d
        delta = d * c
        h = h * delta
        if np.all(np.abs(delta - 1.0) < _BETACF_EPS):
            return h
    raise ConvergenceFailureError(
        f"incomplete beta continued fraction did not converge for a={a}, b={b}"
    )


def _beta_series(x: np.ndarray, a: float, b: float) -> np.ndarray:
    """Power series for I_x(a, b); robust for small a, requires x < 1."""
    total = np.ones_like(x)
    term = np.ones_like(x)
    for n in range(_BETACF_MAXIT * 10):
        term = term * x * (a + b + n) / (a + 1.0 + n)
        total = total + term
        if np.all(np.abs(term) < _BETACF_EPS * np.abs(total)):
            break
    else:
        raise ConvergenceFailureError(
            f"incomplete beta series did not converge for a={a}, b={b}"
        )
    front = np.exp(a * np.log(x) + b * np.log1p(-x) - np.log(a) - _log_beta(a, b))
    return front * total


def _reg_inc_beta_lower(x: np.ndarray, a: float, b: float) -> np.ndarray:
    """I_x(a, b) for x strictly inside (0, 1), below the symmetry switch."""
    if a < _SERIES_SHAPE:
        return _beta_series(x, a, b)
    front = np.exp(a * np.log(x) + b * np.log1p(-x) - _log_beta(a, b))
    return front * _betacf(x, a, b) / a


def reg_inc_beta(x, a: float, b: float):
    """Regularized incomplete beta function I_x(a, b).

    Parameters
    ----------
    x : float or ndarray in [0, 1]
    a, b : float
        Positive shape parameters.

    Returns
    -------
    float or ndarray
        CDF of the Beta(a, b) distribution at x; absolute error <= 1e-12.
    """
    if not (a > 0.0 and b > 0.0):
        raise ValueError(f"shapes must be positive: a={a}, b={b}")
    x_arr = np.asarray(x, dtype=np.float64)
    scalar = x_arr.ndim == 0
    x_arr = np.atleast_1d(x_arr)
    if np.any((x_arr < 0.0) | (x_arr > 1.0)):
        raise ValueError("x must lie in [0, 1]")
    out = np.empty_like(x_arr)
    switch = (a + 1.0) / (a + b + 2.0)
    lower = (x_arr > 0.0) & (x_arr < 1.0) & (x_arr < switch)
    upper = (x_arr > 0.0) & (x_arr < 1.0) & ~lower
    out[x_arr == 0.0] = 0.0
    out[x_arr == 1.0] = 1.0
    if np.any(lower):
        out[lower] = _reg_inc_beta_lower(x_arr[lower], a, b)
    if np.any(upper):
        out[upper] = 1.0 - _reg_inc_beta_lower(1.0 - x_arr[upper], b, a)
    np.clip(out, 0.0, 1.0, out=out)
    return float(out[0]) if scalar else out


def _poisson_window(mu: float, eps: float):
    """Contiguous index window around the Poisson(mu) mode capturing 1 - eps mass.

    Returns (indices, weights); grows outward from the mode, always extending
    toward the side with the larger next pmf value.
    """
    if mu == 0.0:
        return np.array([0]), np.array([1.0])

    def logpmf(r):
        return r * np.log(mu) - mu - gammaln(r + 1.0)

    lo = hi = int(mu)
    total = float(np.exp(logpmf(lo)))
    while total < 1.0 - eps:
        left = logpmf(lo - 1) if lo > 0 else -np.inf
        right = logpmf(hi + 1)
        if left > right:
            lo -= 1
            total += float(np.exp(left))
        else:
            hi += 1
            total += float(np.exp(right))
        if hi - lo + 1 > _MIX_CAP:
            raise ConvergenceFailureError(
                f"Poisson window for mu={mu} exceeded {_MIX_CAP} terms"
            )
    idx = np.arange(lo, hi + 1)
    return idx, np.exp(logpmf(idx))


def dnc_beta_cdf(x, params: DncBetaParams):
    """CDF of the doubly noncentral beta distribution.

    Evaluates the double Poisson mixture
    ``sum_{r,s} Pois(r; l1/2) Pois(s; l2/2) I_x(a+r, b+s)`` with the mixture
    truncated so that the neglected mass is below 1e-12.  Reduces exactly to
    ``reg_inc_beta`` when both noncentralities are zero.

    Parameters
    ----------
    x : float or ndarray in [0, 1]
    params : DncBetaParams

    Returns
    -------
    float or ndarray in [0, 1]
    """
    x_arr = np.asarray(x, dtype=np.float64)
    scalar = x_arr.ndim == 0
    x_arr = np.atleast_1d(x_arr)
    if np.any((x_arr < 0.0) | (x_arr > 1.0)):
        raise ValueError("x must lie in [0, 1]")
    r_idx, r_w = _poisson_window(params.lambda1 / 2.0, _MIX_EPS / 2.0)
    s_idx, s_w = _poisson_window(params.lambda2 / 2.0, _MIX_EPS / 2.0)
    if len(r_idx) * len(s_idx) > _MIX_CAP:
        raise ConvergenceFailureError(
            f"Poisson mixture needs {len(r_idx) * len(s_idx)} terms (cap {_MIX_CAP})"
        )
    out = np.zeros_like(x_arr)
    for r, wr in zip(r_idx, r_w):
        for s, ws in zip(s_idx, s_w):
            out += (wr * ws) * reg_inc_beta(x_arr, params.a + r, params.b + s)
    np.clip(out, 0.0, 1.0, out=out)
    out[x_arr == 1.0] = 1.0
    return float(out[0]) if scalar else out


def _noncentral_chi2(df: float, lam: float, rng: np.random.Generator, size):
    """Noncentral chi-square draws via a Poisson-mixed central chi-square.

    Shape additivity makes chi'2(df, lam) a Gamma(df/2 + K, scale=2) with
    K ~ Poisson(lam/2); this also covers non-integer df.
    """
    k = rng.poisson(lam / 2.0, size=size) if lam > 0.0 else 0.0
    return rng.gamma(shape=df / 2.0 + k, scale=2.0, size=size)


def dnc_beta_sample(params: DncBetaParams, rng: np.random.Generator, size=None):
    """Draw from the doubly noncentral beta via the chi-square ratio U/(U+V).

    Parameters
    ----------
    params : DncBetaParams
    rng : numpy.random.Generator
        Caller-owned stream; not shared between concurrent callers.
    size : int or tuple, optional
        None returns a single float.
    """
    u = _noncentral_chi2(2.0 * params.a, params.lambda1, rng, size)
    v = _noncentral_chi2(2.0 * params.b, params.lambda2, rng, size)
    out = u / (u + v)
    return float(out) if size is None else out


def beta_quantile(q: float, a: float, b: float) -> float:
    """Inverse of ``reg_inc_beta`` in its first argument.

    Bisection on the CDF; the result x satisfies |I_x(a,b) - q| <= 1e-10.
    """
    if not (a > 0.0 and b > 0.0):
        raise ValueError(f"shapes must be positive: a={a}, b={b}")
    if not (0.0 <= q <= 1.0):
        raise ValueError("q must lie in [0, 1]")
    if q == 0.0:
        return 0.0
    if q == 1.0:
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if reg_inc_beta(mid, a, b) < q:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-14:
            break
    return 0.5 * (lo + hi)


def _log_kummer_series(ap: float, b: float, w: float) -> float:
    """log M(ap, b, w) for w >= 0 via the all-positive Taylor series in logs."""
    kmax = int(w + 60.0 * np.sqrt(w + 1.0) + 60.0)
    k = np.arange(kmax, dtype=np.float64)
    log_ratios = np.log((ap + k) * w) - np.log((b + k) * (k + 1.0))
    log_terms = np.concatenate([[0.0], np.cumsum(log_ratios)])
    m = log_terms.max()
    return float(m + np.log(np.sum(np.exp(log_terms - m))))


def _log_kummer_asymptotic(ap: float, b: float, w: float) -> float:
    """log M(ap, b, w) for large w via the divergent expansion, truncated
    at its smallest term."""
    total = 1.0
    term = 1.0
    for n in range(1, 400):
        nxt = term * (b - ap + n - 1.0) * (1.0 - ap + n - 1.0) / (n * w)
        if abs(nxt) >= abs(term) and n > 1:
            break  # expansion started diverging
        term = nxt
        total += term
        if abs(term) < 1e-17 * abs(total):
            break
    return float(gammaln(b) - gammaln(ap) + w + (ap - b) * np.log(w) + np.log(total))


def log_kummer_1f1(aa: float, bb: float, z: float) -> float:
    """log 1F1(aa; bb; z) for z <= 0 and 0 <= aa <= bb.

    Uses the reflection 1F1(a;b;z) = exp(z) * M(b-a, b, -z), whose series on
    the nonnegative argument has no cancellation, switching to the
    large-argument expansion beyond |z| = 3000.
    """
    if bb <= 0.0:
        raise ValueError(f"bb must be positive, got {bb}")
    if z > 0.0:
        raise UnsupportedRegimeError(
            f"1F1 is implemented for z <= 0 only, got z={z}"
        )
    if not (0.0 <= aa <= bb):
        raise UnsupportedRegimeError(
            f"1F1 is implemented for 0 <= aa <= bb only, got aa={aa}, bb={bb}"
        )
    if z == 0.0 or aa == 0.0:
        return 0.0
    if aa == bb:
        return float(z)  # 1F1(a;a;z) = exp(z)
    w = -z
    ap = bb - aa
    if w <= _KUMMER_SWITCH:
        log_m = _log_kummer_series(ap, bb, w)
    else:
        log_m = _log_kummer_asymptotic(ap, bb, w)
    return float(z + log_m)


def kummer_1f1(aa: float, bb: float, z: float) -> float:
    """Kummer confluent hypergeometric function 1F1(aa; bb; z) for z <= 0.

    Relative error <= 1e-10 over the supported regime.  See
    ``log_kummer_1f1`` for the computation; use that form directly when the
    value may underflow.
    """
    return float(np.exp(log_kummer_1f1(aa, bb, z)))


def beta_ratio_limit(
    alpha0: float, beta0: float, delta1: float, delta2: float
) -> float:
    """In-probability limit of the RSS-ratio statistic.

    For Be((n - alpha0)/2, beta0/2; n*delta1, n*delta2) sequences the ratio
    degenerates to (1 + delta1) / (1 + delta1 + delta2); equal to 1 when both
    offsets vanish.
    """
    if alpha0 <= 0.0 or beta0 <= 0.0:
        raise ValueError("alpha0 and beta0 must be positive")
    if delta1 < 0.0 or delta2 < 0.0:
        raise ValueError("delta1 and delta2 must be nonnegative")
    return (1.0 + delta1) / (1.0 + delta1 + delta2)
