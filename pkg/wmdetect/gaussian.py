"""Gaussian covertext: linear embedders and correlation detectors

For real-valued covertexts under squared-error distortion every good embedder
is linear in the covertext and watermark, y = a x + b u, and the detectors
only look at the normalized correlation between u and y. The embedders
differ in how they pick (a, b):

    optimal:        maximizes <u,y>^2 / ||y||^2 under ||y - x||^2 <= n D_e
    sign:           (1, sgn(rho) sqrt(D_e))
    improved_sign:  erases the covertext when D_e >= alpha^2, else sign
    additive:       (1, sqrt(D_e)), classical spread spectrum

Example:
    Example use: ::
        y = embed(EmbedderKind('optimal', 1.0), x, u)
        detect_mi(u, y, 0.1)
"""

import logging
from enum import Enum

import numpy as np

from .defaults import CLAMP_TOLERANCE, DISTORTION_SLACK, UNIT_CORRELATION
from .errors import NumericError
from .hypothesis import Decision

logger = logging.getLogger(__name__)


class Embedder(Enum):
    """Linear embedding strategies"""
    OPTIMAL = 'optimal'
    SIGN = 'sign'
    IMPROVED_SIGN = 'improved_sign'
    ADDITIVE = 'additive'

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).replace('-', '_'))
        except ValueError:
            raise ValueError('Embedder: value {} not allowed. Possible values are: {}'.format(
                value, [k.value for k in cls])) from None


class EmbedderKind(object):
    """Embedding strategy with its squared-error budget

    Attributes:
        kind (Embedder): strategy
        de (float): per-symbol squared-error budget D_e. Zero is accepted and
            makes every strategy return the covertext unchanged.
    """

    def __init__(self, kind, de):
        if not (np.isfinite(de) and de >= 0):
            raise ValueError('EmbedderKind: budget D_e must be finite and nonnegative, '
                             'got {}'.format(de))
        self.kind = Embedder.parse(kind)
        self.de = float(de)

    def __repr__(self):
        return 'EmbedderKind({}, {!r})'.format(self.kind.value, self.de)


class EmbedStats(object):
    """Sufficient statistics of a covertext/watermark pair

    Attributes:
        alpha2 (float): mean square of the covertext, (1/n) sum x_i^2
        rho (float): correlation with the watermark, (1/n) sum x_i u_i
        n (int): sequence length, None for synthetic statistics
    """

    def __init__(self, alpha2, rho, n=None):
        if not (np.isfinite(alpha2) and alpha2 >= 0):
            raise ValueError('EmbedStats: alpha^2 must be finite and nonnegative, '
                             'got {}'.format(alpha2))
        if not np.isfinite(rho) or rho * rho > alpha2 * (1.0 + CLAMP_TOLERANCE):
            raise ValueError('EmbedStats: rho^2 = {} exceeds alpha^2 = {}'.format(
                rho * rho, alpha2))
        self.alpha2 = float(alpha2)
        self.rho = float(rho)
        self.n = n

    @property
    def residual(self):
        """alpha^2 - rho^2, the covertext power orthogonal to the watermark"""
        return max(self.alpha2 - self.rho * self.rho, 0.0)

    def __repr__(self):
        return 'EmbedStats(alpha2={!r}, rho={!r}, n={})'.format(self.alpha2, self.rho, self.n)


def sgn(value):
    """Sign with sgn(0) = +1"""
    return np.where(np.asarray(value) >= 0, 1.0, -1.0)


def _watermark(u):
    u = np.asarray(u, dtype=float)
    if not np.all(np.abs(u) == 1.0):
        raise ValueError('gaussian: watermark entries must be -1 or +1')
    return u


def _pair(u, y):
    u = _watermark(u)
    y = np.asarray(y, dtype=float)
    if u.ndim != 1 or u.shape != y.shape:
        raise ValueError('gaussian: length mismatch, {} vs {}'.format(u.size, y.size))
    if len(u) == 0:
        raise ValueError('gaussian: sequences must not be empty')
    return u, y


def stats(x, u):
    """Computes (alpha^2, rho) of a covertext x and watermark u"""
    u, x = _pair(u, x)
    n = len(x)
    alpha2 = float(np.dot(x, x) / n)
    rho = float(np.dot(x, u) / n)
    # Cauchy-Schwarz holds exactly; rounding must not break it
    return EmbedStats(max(alpha2, rho * rho), rho, n)


def _moments(u, y):
    u, y = _pair(u, y)
    n = len(y)
    power = float(np.dot(y, y) / n)
    if power == 0.0:
        raise NumericError('gaussian: all-zero y has no normalized correlation')
    return float(np.dot(u, y) / n), power


def mutual_info_from_moments(corr, power):
    """Empirical mutual information from (1/n)<u,y> and (1/n)||y||^2

    Works elementwise on arrays; returns +inf where |rho_hat| = 1.
    """
    with np.errstate(divide='ignore', invalid='ignore'):
        r2 = np.minimum(np.square(corr) / power, 1.0)
        value = -0.5 * np.log1p(-r2)
    return np.where(1.0 - r2 <= UNIT_CORRELATION, np.inf, value)


def normalized_correlation(u, y):
    """rho_hat = <u,y> / (||u|| ||y||)"""
    corr, power = _moments(u, y)
    return corr / np.sqrt(power)


def emp_mutual_info_gauss(u, y):
    """Empirical mutual information -1/2 ln(1 - rho_hat^2) in nats"""
    corr, power = _moments(u, y)
    return float(mutual_info_from_moments(corr, power))


def differential_entropy(y):
    """Gaussian empirical differential entropy 1/2 ln(2 pi e (1/n) sum y_i^2)"""
    y = np.asarray(y, dtype=float)
    return 0.5 * np.log(2 * np.pi * np.e * np.dot(y, y) / len(y))


def conditional_differential_entropy(u, y):
    """Empirical differential entropy of y given u; -inf when y is a multiple of u"""
    corr, power = _moments(u, y)
    residual = max(power - corr * corr, 0.0)
    with np.errstate(divide='ignore'):
        return float(0.5 * np.log(2 * np.pi * np.e * residual))


def _threshold_r2(lam):
    if not lam >= 0:
        raise ValueError('gaussian: lambda must be nonnegative, got {}'.format(lam))
    return -np.expm1(-2.0 * lam)


def detect_mi(u, y, lam):
    """H1 iff the empirical mutual information exceeds lam (two-sided in rho_hat)"""
    _threshold_r2(lam)
    return Decision.from_flag(emp_mutual_info_gauss(u, y) > lam)


def detect_corr(u, y, lam):
    """H1 iff rho_hat > sqrt(1 - e^{-2 lam}) (one-sided)

    Evaluated as rho_hat > 0 and I > lam, which keeps rho_hat = 1 above every
    finite threshold.
    """
    _threshold_r2(lam)
    corr, power = _moments(u, y)
    return Decision.from_flag(corr > 0 and bool(mutual_info_from_moments(corr, power) > lam))


DETECTORS = ('mi', 'corr')


def detect_batch(detector, U, Y, lam):
    """Row-wise detection over a batch; True where the detector decides H1

    Args:
        detector (string): 'mi' or 'corr'
        U, Y: arrays of shape (trials, n)
        lam (float): false-positive exponent
    """
    if detector not in DETECTORS:
        raise ValueError('gaussian: value {} not allowed for detector. Possible values are: '
                         '{}'.format(detector, list(DETECTORS)))
    _threshold_r2(lam)
    n = Y.shape[1]
    corr = np.einsum('ij,ij->i', U, Y) / n
    power = np.einsum('ij,ij->i', Y, Y) / n
    if np.any(power == 0.0):
        raise NumericError('gaussian: all-zero y has no normalized correlation')
    detected = mutual_info_from_moments(corr, power) > lam
    return detected if detector == 'mi' else detected & (corr > 0)


def _erase_coefficients(st, de):
    root = np.sqrt(max(de - st.residual, 0.0))
    b = st.rho + root
    if b == 0.0:
        # the upper root vanishes for rho < 0; the other end of the feasible
        # interval gives the same objective
        b = max((st.rho - root, st.rho + root), key=abs)
    if b == 0.0:
        raise NumericError('gaussian: degenerate embedding, every feasible output is zero')
    return 0.0, float(b)


def optimal_coefficients(st, de):
    """Closed-form (a, b) maximizing the correlation objective

    When D_e >= alpha^2 - rho^2 the covertext can be erased (a = 0). Otherwise
    a is chosen among the stationary points and the interval ends
    R = [1 - sqrt(D_e/(alpha^2-rho^2)), 1 + sqrt(D_e/(alpha^2-rho^2))],
    maximizing sgn(rho) t(a) where
    t(a) = [(1-a) rho + sgn(rho) sqrt(D_e - (a-1)^2 (alpha^2-rho^2))] / a,
    and b = a t(a).

    Args:
        st (EmbedStats): covertext statistics
        de (float): per-symbol budget
    Returns:
        (a, b)
    """
    s = st.residual
    if de >= s:
        return _erase_coefficients(st, de)

    alpha2, rho = st.alpha2, st.rho
    sign = 1.0 if rho >= 0 else -1.0
    spread = np.sqrt(de / s)
    lo, hi = 1.0 - spread, 1.0 + spread
    base = s * (alpha2 - de)
    disc = np.sqrt(de * rho * rho) * np.sqrt(base)
    candidates = [(base + disc) / (alpha2 * s), (base - disc) / (alpha2 * s), lo, hi]

    best = best_score = None
    for a in sorted(candidates, key=lambda value: abs(value - 1.0)):
        tol = CLAMP_TOLERANCE * max(1.0, abs(a))
        if a < lo - tol or a > hi + tol:
            continue
        a = min(max(a, lo), hi)
        q = de - (a - 1.0) ** 2 * s
        if a == 0.0 or q < -CLAMP_TOLERANCE * max(de, s):
            continue
        t = ((1.0 - a) * rho + sign * np.sqrt(max(q, 0.0))) / a
        if best is None or sign * t > best_score + 1e-15 * max(1.0, abs(best_score)):
            best, best_score = (a, t), sign * t

    if best is None:
        raise NumericError('gaussian: no admissible gain for alpha^2={!r}, rho={!r}, '
                           'D_e={!r}'.format(alpha2, rho, de))
    a, t = best
    return float(a), float(a * t)


def embed_coefficients(kind, st):
    """Gains (a, b) of the linear embedder y = a x + b u"""
    de = kind.de
    if kind.kind is Embedder.OPTIMAL:
        return optimal_coefficients(st, de)
    if kind.kind is Embedder.IMPROVED_SIGN and de >= st.alpha2:
        return _erase_coefficients(st, de)
    if kind.kind is Embedder.ADDITIVE:
        return 1.0, float(np.sqrt(de))
    return 1.0, float(sgn(st.rho) * np.sqrt(de))


def predicted_correlation(a, b, st):
    """rho_hat^2 of y = a x + b u, from the covertext statistics alone"""
    w = a * st.rho + b
    power = a * a * st.alpha2 + 2 * a * b * st.rho + b * b
    return w * w / power


def _check_distortion(x, y, de, alpha2):
    n = len(x)
    used = float(np.dot(y - x, y - x))
    limit = n * (de + DISTORTION_SLACK * max(de, alpha2))
    if used > limit:
        raise NumericError('gaussian: embedding distortion {!r} exceeds the budget {!r}'.format(
            used, n * de))


def embed(kind, x, u):
    """Embeds the watermark u into the covertext x

    Args:
        kind (EmbedderKind): strategy and budget
        x: real covertext
        u: watermark over {-1, +1}
    Returns:
        stegotext y = a x + b u with ||y - x||^2 <= n D_e
    """
    st = stats(x, u)
    a, b = embed_coefficients(kind, st)
    x = np.asarray(x, dtype=float)
    y = a * x + b * np.asarray(u, dtype=float)
    if not np.any(y):
        raise NumericError('gaussian: embedding produced an all-zero stegotext')
    _check_distortion(x, y, kind.de, st.alpha2)
    return y


def embed_batch(kind, X, U):
    """Row-wise embedding of a batch of covertexts

    Args:
        kind (EmbedderKind): strategy and budget
        X, U: arrays of shape (trials, n)
    Returns:
        array of stegotexts, same shape as X
    """
    X = np.asarray(X, dtype=float)
    U = np.asarray(U, dtype=float)
    n = X.shape[1]
    alpha2 = np.einsum('ij,ij->i', X, X) / n
    rho = np.einsum('ij,ij->i', X, U) / n
    alpha2 = np.maximum(alpha2, rho * rho)

    if kind.kind is Embedder.ADDITIVE:
        a = np.ones(len(X))
        b = np.full(len(X), np.sqrt(kind.de))
    elif kind.kind is Embedder.SIGN:
        a = np.ones(len(X))
        b = sgn(rho) * np.sqrt(kind.de)
    else:
        gains = [embed_coefficients(kind, EmbedStats(p, r, n)) for p, r in zip(alpha2, rho)]
        a, b = np.array(gains).T
    return a[:, None] * X + b[:, None] * U


def objective_R(u, y):
    """<u,y>^2 / ||y||^2; equals n rho_hat^2 for a +-1 watermark"""
    u, y = _pair(u, y)
    power = float(np.dot(y, y))
    if power == 0.0:
        raise NumericError('gaussian: objective undefined for an all-zero y')
    return float(np.dot(u, y)) ** 2 / power


def project_to_span(y, x, u):
    """Orthogonal projection of y onto span{x, u}

    A parallel pair (x, u) reduces to the one-dimensional projection.
    """
    u, y = _pair(u, y)
    x = np.asarray(x, dtype=float)
    if x.shape != y.shape:
        raise ValueError('gaussian: length mismatch, {} vs {}'.format(x.size, y.size))
    basis = np.column_stack([x, u])
    coef = np.linalg.lstsq(basis, y, rcond=None)[0]
    return basis @ coef
