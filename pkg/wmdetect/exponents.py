"""False-negative error exponents of the Gaussian embedders

Closed forms for the sign and improved sign embedders, the one-dimensional
minimization behind the additive embedder, curve sampling for plots, and
exact finite-n reference probabilities used to check the asymptotics.

All exponents are in nats per symbol. lam is the false-positive exponent
the detector guarantees, de the squared-error budget per symbol and sigma2
the covertext variance.
"""

import logging
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.special import logsumexp
from scipy.stats import beta, chi2, norm

from .defaults import (CLAMP_TOLERANCE, CURVE_SAMPLES, CURVE_STRETCH, E1_GRID_POINTS,
                       E1_TOLERANCE, HALF_LN2, SIN_FLOOR, ZERO_BRANCH_TOLERANCE)
from .gaussian import Embedder
from .optimize import golden_section

logger = logging.getLogger(__name__)


class ExponentQuery(object):
    """Operating point of an exponent calculation

    Attributes:
        lam (float): false-positive exponent, >= 0
        de (float): embedding budget D_e, > 0
        sigma2 (float): covertext variance, > 0
    """

    def __init__(self, lam, de, sigma2):
        if not lam >= 0:
            raise ValueError('ExponentQuery: lambda must be nonnegative, got {}'.format(lam))
        if not (np.isfinite(de) and de > 0):
            raise ValueError('ExponentQuery: D_e must be positive, got {}'.format(de))
        if not (np.isfinite(sigma2) and sigma2 > 0):
            raise ValueError('ExponentQuery: sigma2 must be positive, got {}'.format(sigma2))
        self.lam = float(lam)
        self.de = float(de)
        self.sigma2 = float(sigma2)

    def __repr__(self):
        return 'ExponentQuery(lam={!r}, de={!r}, sigma2={!r})'.format(
            self.lam, self.de, self.sigma2)


def detection_ratio(q):
    """D_e e^{-2 lam} / (1 - e^{-2 lam}); the sign exponent vanishes when it is <= sigma2"""
    if q.lam == 0:
        return np.inf
    return q.de * np.exp(-2.0 * q.lam) / -np.expm1(-2.0 * q.lam)


def _rate(excess):
    # 1/2 (g - ln g - 1) written in g - 1, accurate for g close to 1
    return 0.5 * (excess - np.log1p(excess))


def exponent_sign(q):
    """False-negative exponent of the sign embedder with the mutual information detector"""
    if q.lam == 0:
        return np.inf
    ratio = detection_ratio(q)
    if ratio <= q.sigma2 * (1.0 + ZERO_BRANCH_TOLERANCE):
        return 0.0
    return float(_rate((ratio - q.sigma2) / q.sigma2))


def exponent_improved_sign(q):
    """False-negative exponent of the improved sign embedder

    Beyond lam = 1/2 ln 2 the improved embedder erases the covertext whenever
    D_e >= alpha^2, which caps the exponent at the plateau
    1/2 (D_e/sigma2 - ln(D_e/sigma2) - 1).
    """
    if q.lam > HALF_LN2:
        if q.de <= q.sigma2 * (1.0 + ZERO_BRANCH_TOLERANCE):
            return 0.0
        return float(_rate((q.de - q.sigma2) / q.sigma2))
    return exponent_sign(q)


def psi_angles(r, T, de):
    """Cap angles bounding the additive-embedder miss event at covertext power r

    Args:
        r (float): covertext power (1/n)||x||^2, r >= D_e (1 - T^2)
        T (float): correlation threshold, 0 < T < 1
        de (float): embedding budget
    Returns:
        (psi1, psi2) in radians
    """
    if not 0 < T < 1:
        raise ValueError('psi_angles: threshold T must lie in (0, 1), got {}'.format(T))
    if not r > 0:
        raise ValueError('psi_angles: r must be positive, got {}'.format(r))
    floor = de * (1.0 - T * T)
    if r - floor < -CLAMP_TOLERANCE * max(r, floor):
        raise ValueError('psi_angles: r = {!r} below the feasible limit {!r}'.format(r, floor))
    root = np.sqrt(max(r - floor, 0.0))
    scale = np.sqrt(r)
    c1 = (np.sqrt(de) * (T * T - 1.0) + T * root) / scale
    c2 = (np.sqrt(de) * (T * T - 1.0) - T * root) / scale
    return float(np.arccos(np.clip(c1, -1.0, 1.0))), float(np.arccos(np.clip(c2, -1.0, 1.0)))


def _e1_values(r, T, de, sigma2):
    r = np.asarray(r, dtype=float)
    root = np.sqrt(np.maximum(r - de * (1.0 - T * T), 0.0))
    c1 = np.clip((np.sqrt(de) * (T * T - 1.0) + T * root) / np.sqrt(r), -1.0, 1.0)
    sin1 = np.maximum(np.sqrt(1.0 - c1 * c1), SIN_FLOOR)
    g = r / sigma2
    return 0.5 * (g - np.log(g) - 2.0 * np.log(sin1) - 1.0)


def e1_objective(r, q):
    """Objective minimized over r for the additive-embedder exponent"""
    T = np.sqrt(-np.expm1(-2.0 * q.lam))
    return _e1_values(r, T, q.de, q.sigma2)


def _search_limit(f, r_lo, r_hi, sigma2, de):
    # beyond the returned limit 1/2 (g - ln g - 1) alone exceeds a known value
    r_ref = min(r_hi, r_lo + max(sigma2, de))
    f_ref = f(r_ref)
    limit = max(r_ref, sigma2)
    while limit < r_hi and 0.5 * (limit / sigma2 - np.log(limit / sigma2) - 1.0) <= f_ref:
        limit *= 2.0
    return min(limit, r_hi)


def additive_e1(q, points=E1_GRID_POINTS, tol=E1_TOLERANCE):
    """Minimum of the additive-embedder objective over its r interval

    Dense grid over (D_e e^{-2 lam}, D_e e^{-2 lam}/(1 - e^{-2 lam})], the
    left end excluded by one grid step, then golden-section search on the
    bracket around the best grid point. At lam = 0 the interval is unbounded
    and is truncated where the objective provably exceeds a known value.

    Returns:
        (e1, argmin_r)
    """
    T2 = -np.expm1(-2.0 * q.lam)
    T = np.sqrt(T2)
    r_lo = q.de * np.exp(-2.0 * q.lam)
    r_hi = r_lo / T2 if T2 > 0 else np.inf

    def f(r):
        return float(_e1_values(r, T, q.de, q.sigma2))

    r_max = _search_limit(f, r_lo, r_hi, q.sigma2, q.de)
    grid = np.linspace(r_lo, r_max, points + 1)[1:]
    values = _e1_values(grid, T, q.de, q.sigma2)
    k = int(np.argmin(values))
    lo = grid[k - 1] if k > 0 else r_lo
    hi = grid[k + 1] if k + 1 < len(grid) else grid[k]
    line = golden_section(f, lo, hi, tol=tol)
    if line.value < values[k]:
        return line.value, line.x
    return float(values[k]), float(grid[k])


def exponent_additive(q, points=E1_GRID_POINTS):
    """False-negative exponent of the additive embedder with the correlation detector

    min(E1, E2) where E2 is the sign-embedder exponent and E1 comes from
    additive_e1. Finite at lam = 0, unlike the sign embedder.
    """
    e2 = exponent_sign(q)
    e1, r_star = additive_e1(q, points=points)
    logger.debug("exponents: additive lam=%g E1=%.10g at r=%.6g, E2=%.10g", q.lam, e1, r_star, e2)
    return max(min(e1, e2), 0.0)


def cap_log_ratio(theta):
    """Exponential rate ln sin(theta) of the spherical cap fraction 2A_n(theta)/A_n(pi)"""
    if not 0 < theta <= np.pi / 2:
        raise ValueError('cap_log_ratio: theta must lie in (0, pi/2], got {}'.format(theta))
    return float(np.log(np.sin(theta)))


def zero_exponent_lambda(de, sigma2):
    """Smallest lam at which the sign-embedder exponent vanishes, 1/2 ln(1 + D_e/sigma2)"""
    if not (de > 0 and sigma2 > 0):
        raise ValueError('zero_exponent_lambda: D_e and sigma2 must be positive, got {} '
                         'and {}'.format(de, sigma2))
    return 0.5 * np.log1p(de / sigma2)


EXPONENTS = {
    Embedder.SIGN: exponent_sign,
    Embedder.IMPROVED_SIGN: exponent_improved_sign,
    Embedder.ADDITIVE: exponent_additive,
}


def exponent_for(kind):
    """Exponent calculator of an embedder; the optimal embedder has no closed form"""
    kind = Embedder.parse(kind)
    if kind not in EXPONENTS:
        raise ValueError('exponents: value {} not allowed for embedder. Possible values are: '
                         '{}'.format(kind.value, [k.value for k in EXPONENTS]))
    return EXPONENTS[kind]


class ExponentCurve(object):
    """Sampled map lam -> exponent for one embedder

    Attributes:
        kind (Embedder): embedder the curve belongs to
        de, sigma2 (float): operating point
        lambdas (ndarray): increasing lam samples
        values (ndarray): exponents at lambdas
    """

    def __init__(self, kind, de, sigma2, lambdas, values):
        self.kind = Embedder.parse(kind)
        self.de = de
        self.sigma2 = sigma2
        self.lambdas = np.asarray(lambdas, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if np.any(self.values < 0):
            raise ValueError('ExponentCurve: exponents must be nonnegative')

    def is_nonincreasing(self, tol=1e-12):
        return bool(np.all(np.diff(self.values) <= tol))

    def zero_crossing(self):
        """First sampled lam with a zero exponent, None if the curve stays positive"""
        zeros = np.flatnonzero(self.values <= 0.0)
        return float(self.lambdas[zeros[0]]) if len(zeros) else None

    def rows(self):
        return list(zip(self.lambdas.tolist(), self.values.tolist()))

    def __len__(self):
        return len(self.lambdas)


def exponent_curve(kind, de, sigma2, lam_max=None, samples=CURVE_SAMPLES, workers=1):
    """Samples an exponent curve on a uniform grid over (0, lam_max]

    Args:
        kind: embedder with a closed-form exponent
        de, sigma2 (float): operating point
        lam_max (float): right end, defaults to 1.2 * zero_exponent_lambda
        samples (int): number of grid points
        workers (int): threads evaluating grid points; results keep grid order
    Returns:
        ExponentCurve
    """
    function = exponent_for(kind)
    if lam_max is None:
        lam_max = CURVE_STRETCH * zero_exponent_lambda(de, sigma2)
    if not (np.isfinite(lam_max) and lam_max > 0):
        raise ValueError('exponent_curve: lambda range must be positive, got {}'.format(lam_max))
    if samples < 1:
        raise ValueError('exponent_curve: at least one sample is required, got {}'.format(samples))

    lambdas = lam_max * np.arange(1, samples + 1) / samples
    queries = [ExponentQuery(lam, de, sigma2) for lam in lambdas]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(function, queries))
    else:
        values = [function(query) for query in queries]

    curve = ExponentCurve(kind, de, sigma2, lambdas, values)
    if curve.kind is not Embedder.ADDITIVE and not curve.is_nonincreasing():
        logger.warning("exponents: %s curve is not nonincreasing", curve.kind.value)
    return curve


def exact_false_positive(n, lam, detector='mi'):
    """Exact false-positive probability of the Gaussian detectors

    Under H0 the squared normalized correlation of an isotropic covertext with
    a fixed watermark is Beta(1/2, (n-1)/2) distributed.

    Args:
        n (int): sequence length, >= 2
        lam (float): detector threshold exponent
        detector (string): 'mi' (two-sided) or 'corr' (one-sided)
    """
    if detector not in ('mi', 'corr'):
        raise ValueError("exact_false_positive: value {} not allowed for detector. Possible "
                         "values are: ['mi', 'corr']".format(detector))
    if n < 2:
        raise ValueError('exact_false_positive: n must be at least 2, got {}'.format(n))
    tail = beta.sf(-np.expm1(-2.0 * lam), 0.5, 0.5 * (n - 1))
    return float(tail if detector == 'mi' else 0.5 * tail)


def log_sign_false_negative(n, lam, de, sigma2, points=20001):
    """Exact ln P_fn of the sign embedder with the mutual information detector

    The miss event is V >= k (|rho| + sqrt(D_e))^2 with k = e^{-2 lam}/(1 - e^{-2 lam}),
    rho ~ N(0, sigma2/n) and n V/sigma2 ~ chi^2_{n-1} independent of rho. The
    integral over |rho| is evaluated by the trapezoid rule in log space.
    """
    if n < 2:
        raise ValueError('log_sign_false_negative: n must be at least 2, got {}'.format(n))
    if lam == 0:
        return -np.inf
    k = np.exp(-2.0 * lam) / -np.expm1(-2.0 * lam)
    scale = np.sqrt(sigma2 / n)
    r = np.linspace(0.0, 12.0 * scale, points)
    log_f = (np.log(2.0) + norm.logpdf(r, scale=scale)
             + chi2.logsf(n * k * (r + np.sqrt(de)) ** 2 / sigma2, n - 1))
    weights = np.full(points, r[1] - r[0])
    weights[[0, -1]] *= 0.5
    return float(logsumexp(log_f + np.log(weights)))
