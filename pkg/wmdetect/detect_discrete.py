"""Attack-free discrete detectors and embedders

Decision regions built from empirical statistics of (u, y) for finite
alphabets, and the embedder that places the stegotext as deep as possible
inside the region under a distortion budget. Four detector variants are
supported: known covertext source, universal (maximum mutual information),
random watermark and individual covertext.

Because every statistic depends on (x, u, y) only through their joint type,
the embedder searches over conditional types T(y|x,u) instead of sequences:
polynomially many candidates instead of exponentially many.

Example:
    Example use: ::
        cfg = DetectorConfig(0.3, Variant.KNOWN_SOURCE)
        y = optimal_embed_discrete(src, x, u, EmbedConstraint('hamming', 0.25))
        lambda_star_accepts(src, u, y, cfg)
"""

import itertools
import logging
from enum import Enum
from typing import NamedTuple

import numpy as np
from scipy.special import rel_entr, xlogy

from .defaults import ENUMERATION_CAP, TIE_TOLERANCE
from .empirical import (Alphabet, conditional_entropy, conditional_types, compositions,
                        counts_conditional_entropy, counts_mutual_information,
                        empirical_joint, fill_conditional_type, joint_entropy,
                        log_multinomial, log_prob_memoryless, mutual_information)
from .errors import CapExceededError, InfeasibleError, NumericError
from .hypothesis import Decision

logger = logging.getLogger(__name__)

# Largest joint block enumerated by the pairwise moves of search mode
PAIR_BLOCK_LIMIT = 20000


class Variant(Enum):
    """Detector variants"""
    KNOWN_SOURCE = 'known_source'
    UNIVERSAL = 'universal'
    RANDOM_WATERMARK = 'random_watermark'
    INDIVIDUAL_COVERTEXT = 'individual_covertext'


class DetectorConfig(object):
    """Detector configuration

    Attributes:
        lam (float): false-positive exponent target in nats per symbol, > 0
        variant (Variant): detector variant
    """

    def __init__(self, lam, variant=Variant.KNOWN_SOURCE):
        try:
            variant = Variant(variant)
        except ValueError:
            raise ValueError('DetectorConfig: value {} not allowed for variant. Possible values '
                             'are: {}'.format(variant, [v.value for v in Variant])) from None
        if not lam > 0:
            raise ValueError('DetectorConfig: lambda must be positive, got {}'.format(lam))
        self.lam = float(lam)
        self.variant = variant

    def require(self, variant, operation):
        if self.variant is not variant:
            raise ValueError('{}: requires the {} variant, configured for {}'.format(
                operation, variant.value, self.variant.value))

    def __repr__(self):
        return 'DetectorConfig(lam={!r}, variant={})'.format(self.lam, self.variant.value)


def hamming(a, b):
    return 0.0 if a == b else 1.0


def squared_error(a, b):
    return float((a - b) ** 2)


DISTORTIONS = {'hamming': hamming, 'squared': squared_error}


class EmbedConstraint(object):
    """Single-letter distortion measure with a per-symbol budget

    A sequence pair (x, y) is feasible when sum_i d(x_i, y_i) <= n * budget.

    Attributes:
        distortion: callable d(a, b) >= 0, or one of the names in DISTORTIONS
        budget (float): per-symbol budget, >= 0 (may be infinite)
    """
    _name = 'EmbedConstraint'

    def __init__(self, distortion='hamming', budget=0.0):
        if isinstance(distortion, str):
            if distortion not in DISTORTIONS:
                raise ValueError('{}: value {} not allowed for distortion. Possible values '
                                 'are: {}'.format(self._name, distortion, [*DISTORTIONS.keys()]))
            self.name = distortion
            distortion = DISTORTIONS[distortion]
        else:
            self.name = getattr(distortion, '__name__', 'custom')
        if not budget >= 0:
            raise ValueError('{}: budget must be nonnegative, got {}'.format(self._name, budget))
        self.distortion = distortion
        self.budget = float(budget)

    def matrix(self, row_alphabet, col_alphabet=None):
        """Distortion table d[a, b] over two alphabets"""
        col_alphabet = row_alphabet if col_alphabet is None else col_alphabet
        table = np.array([[self.distortion(a, b) for b in col_alphabet]
                          for a in row_alphabet], dtype=float)
        if not np.all(np.isfinite(table)) or np.any(table < 0):
            raise ValueError('{}: distortion must be nonnegative and bounded on the '
                             'alphabet'.format(self._name))
        return table

    def allows(self, total, n):
        """True if a total distortion fits the budget of n symbols"""
        return total <= n * self.budget + 1e-9

    def total(self, x, y):
        return float(sum(self.distortion(a, b) for a, b in zip(x, y)))

    def feasible(self, x, y):
        return self.allows(self.total(x, y), len(x))

    def __repr__(self):
        return '{}({}, {!r})'.format(self._name, self.name, self.budget)


def type_slack(n, size):
    """Polynomial slack |A| ln(n+1) between a type class size and n H"""
    return size * np.log(n + 1)


def _joint(u, y, alphabet, row_alphabet=None):
    return empirical_joint(u, y, Alphabet.watermark() if row_alphabet is None else row_alphabet,
                           alphabet)


def lambda_star_statistic(src, u, y, lam):
    """Left-hand side of the known-source region test

    ln P_X(y) + n H(Y|U) + lam n - |A| ln(n+1); the region accepts H1 when
    this is <= 0.
    """
    j = _joint(u, y, src.alphabet)
    n = j.n
    log_p = log_prob_memoryless(src, y)
    if log_p == -np.inf:
        return -np.inf
    lhs = log_p + n * conditional_entropy(j, given='row') + lam * n
    return lhs - type_slack(n, src.alphabet.size)


def lambda_star_accepts(src, u, y, cfg):
    """Known-source decision region

    Args:
        src (MemorylessSource): covertext source P_X
        u: watermark sequence over {-1, +1}
        y: observed sequence over src.alphabet
        cfg (DetectorConfig): known_source variant
    Returns:
        Decision.H1 iff ln P_X(y) + n H(Y|U) + lam n - |A| ln(n+1) <= 0
    """
    cfg.require(Variant.KNOWN_SOURCE, 'lambda_star_accepts')
    return Decision.from_flag(lambda_star_statistic(src, u, y, cfg.lam) <= 0)


def universal_accepts(u, y, cfg, alphabet):
    """Maximum mutual information detector for an unknown covertext source

    Args:
        alphabet (Alphabet): covertext alphabet; its size enters the
            threshold, so it is never taken from the symbols seen in y
    Returns:
        Decision.H1 iff n I(U;Y) >= lam n - |A| ln(n+1)
    """
    cfg.require(Variant.UNIVERSAL, 'universal_accepts')
    j = _joint(u, y, alphabet)
    n = j.n
    threshold = cfg.lam * n - type_slack(n, alphabet.size)
    return Decision.from_flag(n * mutual_information(j) >= threshold)


def random_wm_accepts(P_X, P_U, u, y, cfg):
    """Decision region for a watermark drawn from a memoryless source P_U

    Returns:
        Decision.H1 iff ln P_X(y) + ln P_U(u) + n H(U,Y) + lam n - |A| ln(n+1) <= 0
    """
    cfg.require(Variant.RANDOM_WATERMARK, 'random_wm_accepts')
    j = _joint(u, y, P_X.alphabet, row_alphabet=P_U.alphabet)
    n = j.n
    log_p = log_prob_memoryless(P_X, y) + log_prob_memoryless(P_U, u)
    if log_p == -np.inf:
        return Decision.H1
    lhs = log_p + n * joint_entropy(j) + cfg.lam * n - type_slack(n, P_X.alphabet.size)
    return Decision.from_flag(lhs <= 0)


def individual_covertext_accepts(u, y, cfg, alphabet=None):
    """Detector for a single fixed covertext and a binary watermark

    The threshold is ln 2 - lam since all entropies are in nats.

    Returns:
        Decision.H1 iff H(U|Y) <= ln 2 - lam
    """
    cfg.require(Variant.INDIVIDUAL_COVERTEXT, 'individual_covertext_accepts')
    alphabet = Alphabet.of(y) if alphabet is None else alphabet
    j = _joint(u, y, alphabet)
    return Decision.from_flag(conditional_entropy(j, given='col') <= np.log(2.0) - cfg.lam)


class TypeMass(NamedTuple):
    """One conditional type T(y|u) with its probability under P_X"""
    counts: np.ndarray
    log_mass: float
    accepted: bool


def type_masses(src, u, cfg, cap=ENUMERATION_CAP):
    """Lists every conditional type T(y|u) with its P_X mass and region membership

    Args:
        src (MemorylessSource): covertext source P_X
        u: watermark sequence
        cfg (DetectorConfig): known_source variant
        cap (int): longest sequence length allowed
    Returns:
        list of TypeMass, in lexicographic order of the count matrices
    """
    cfg.require(Variant.KNOWN_SOURCE, 'type_masses')
    u_index = Alphabet.watermark().index_of(u)
    n = len(u_index)
    if n > cap:
        raise CapExceededError('type_masses: n', n, cap)

    size = src.alphabet.size
    out = []
    for counts in conditional_types(np.bincount(u_index, minlength=2), size):
        log_p = float(np.sum(xlogy(counts.sum(axis=0), src.pmf)))
        if log_p == -np.inf:
            accepted = True
        else:
            lhs = (log_p + n * counts_conditional_entropy(counts) + cfg.lam * n
                   - type_slack(n, size))
            accepted = lhs <= 0
        out.append(TypeMass(counts, log_multinomial(counts) + log_p, accepted))
    return out


def false_positive_exact(src, u, cfg, cap=ENUMERATION_CAP):
    """Exact false-positive probability P_X(y in region | u) by type enumeration"""
    return float(sum(np.exp(t.log_mass) for t in type_masses(src, u, cfg, cap) if t.accepted))


def _score_counts(variant, uy_counts, pmf):
    if variant is Variant.UNIVERSAL:
        return counts_mutual_information(uy_counts)
    if variant is Variant.INDIVIDUAL_COVERTEXT:
        return -counts_conditional_entropy(uy_counts.T)
    y_counts = uy_counts.sum(axis=0)
    return (counts_mutual_information(uy_counts)
            + float(np.sum(rel_entr(y_counts / y_counts.sum(), pmf))))


def embed_objective(src, u, y, variant=Variant.KNOWN_SOURCE):
    """Attack-free embedding score of a stegotext y (larger is better)

    known_source and random_watermark: I(U;Y) + D(P_y||P_X), which equals
    -(ln P_X(y) + n H(Y|U)) / n; universal: I(U;Y); individual_covertext:
    -H(U|Y).
    """
    j = _joint(u, y, src.alphabet)
    return _score_counts(Variant(variant), j.counts, src.pmf)


class TypeEmbedding(object):
    """Outcome of a search over conditional types T(y|x,u)

    Attributes:
        y (ndarray): stegotext, one representative of the chosen type
        counts (ndarray): conditional count matrix; row 2*i + j holds the
            cell (x = symbol i, u = watermark symbol j), columns index y
        objective (float): attack-free score of the chosen type
        value (float): inner exponent for attack-aware embedders, else None
        candidates (int): feasible conditional types examined
        mode (str): 'exact' or 'search'
    """

    def __init__(self, y, counts, objective, candidates, mode, value=None):
        self.y = y
        self.counts = counts
        self.objective = objective
        self.value = value
        self.candidates = candidates
        self.mode = mode

    def __repr__(self):
        return 'TypeEmbedding(objective={!r}, value={!r}, mode={}, candidates={})'.format(
            self.objective, self.value, self.mode, self.candidates)


class CellLayout(object):
    """Positions of the (x, u) cells of a covertext/watermark pair

    Shared by every embedder that searches conditional types T(y|x,u).

    Attributes:
        alphabet (Alphabet): covertext and stegotext alphabet
        cells (ndarray): cell index 2*x_i + u_i per position
        cell_counts (ndarray): number of positions per cell
        cell_distortion (ndarray): d(x, y) per cell row and stegotext column
        n (int): sequence length
    """

    def __init__(self, alphabet, x, u, constraint):
        x_index = alphabet.index_of(x)
        u_index = Alphabet.watermark().index_of(u)
        if len(x_index) != len(u_index):
            raise ValueError('CellLayout: length mismatch, {} vs {}'.format(
                len(x_index), len(u_index)))
        if len(x_index) == 0:
            raise ValueError('CellLayout: sequences must not be empty')

        self.alphabet = alphabet
        self.n = len(x_index)
        self.cells = 2 * x_index + u_index
        self.cell_counts = np.bincount(self.cells, minlength=2 * alphabet.size)
        self.cell_distortion = np.repeat(constraint.matrix(alphabet), 2, axis=0)
        self.constraint = constraint

    def uy_counts(self, counts):
        """Joint counts of (u, y) implied by a conditional count matrix"""
        return counts.reshape(self.alphabet.size, 2, self.alphabet.size).sum(axis=0)

    def distortion(self, counts):
        return float(np.sum(counts * self.cell_distortion))

    def feasible(self, counts):
        return self.constraint.allows(self.distortion(counts), self.n)

    def feasible_types(self):
        """Feasible conditional types in lexicographic order"""
        for counts in conditional_types(self.cell_counts, self.alphabet.size):
            if self.feasible(counts):
                yield counts

    def realize(self, counts, x):
        """Representative stegotext of a conditional type, checked against the budget"""
        y = self.alphabet.symbols_at(fill_conditional_type(self.cells, counts))
        if not self.constraint.feasible(x, y):
            raise NumericError('CellLayout: realized stegotext violates the distortion budget')
        return y


def _exhaustive(layout, score):
    best = best_score = None
    candidates = 0
    for counts in layout.feasible_types():
        candidates += 1
        value = score(counts)
        if best is None or value > best_score + TIE_TOLERANCE:
            best, best_score = counts, value
    return best, best_score, candidates


def _block_moves(layout, counts, block):
    size = layout.alphabet.size
    options = [list(compositions(int(layout.cell_counts[c]), size)) for c in block]
    for choice in itertools.product(*options):
        candidate = counts.copy()
        for c, row in zip(block, choice):
            candidate[c] = row
        yield candidate


def _block_size(layout, block):
    size = layout.alphabet.size
    total = 1
    for c in block:
        total *= int(layout.cell_counts[c]) + 1
    return total ** (size - 1)


def _search(layout, score):
    size = layout.alphabet.size
    start = np.zeros((2 * size, size), dtype=np.int64)
    for c, count in enumerate(layout.cell_counts):
        start[c, int(np.argmin(layout.cell_distortion[c]))] = count
    if not layout.feasible(start):
        return None, None, 0

    occupied = [c for c in range(2 * size) if layout.cell_counts[c] > 0]
    blocks = [(c,) for c in occupied]
    blocks += [pair for pair in itertools.combinations(occupied, 2)
               if _block_size(layout, pair) <= PAIR_BLOCK_LIMIT]

    best, best_score = start, score(start)
    candidates = 1
    improved = True
    while improved:
        improved = False
        for block in blocks:
            for candidate in _block_moves(layout, best, block):
                if not layout.feasible(candidate):
                    continue
                candidates += 1
                value = score(candidate)
                if value > best_score + TIE_TOLERANCE:
                    best, best_score = candidate, value
                    improved = True
    return best, best_score, candidates


def search_embedding(src, x, u, c, mode='exact', variant=Variant.KNOWN_SOURCE,
                     cap=ENUMERATION_CAP):
    """Best conditional type T(y|x,u) under a distortion budget

    exact mode enumerates every conditional type; ties within TIE_TOLERANCE
    keep the lexicographically smallest count matrix. search mode runs block
    coordinate ascent over single cells and pairs of cells, starting from the
    least distorting type; every grid point is a realizable conditional type,
    so no rounding is needed.

    Args:
        src (MemorylessSource): covertext source; its alphabet is also the
            stegotext alphabet
        x: covertext sequence
        u: watermark sequence
        c (EmbedConstraint): distortion budget
        mode (string): 'exact' or 'search'
        variant (Variant): detector the embedder targets
        cap (int): longest sequence for exact mode
    Returns:
        TypeEmbedding
    Raises:
        InfeasibleError: no stegotext meets the budget
        CapExceededError: exact mode above the cap
    """
    modes = ('exact', 'search')
    if mode not in modes:
        raise ValueError('search_embedding: value {} not allowed for mode. Possible values '
                         'are: {}'.format(mode, list(modes)))
    variant = Variant(variant)
    layout = CellLayout(src.alphabet, x, u, c)
    if mode == 'exact' and layout.n > cap:
        raise CapExceededError('search_embedding: n', layout.n, cap)

    def score(counts):
        return _score_counts(variant, layout.uy_counts(counts), src.pmf)

    if mode == 'exact':
        best, best_score, candidates = _exhaustive(layout, score)
    else:
        best, best_score, candidates = _search(layout, score)
    if best is None:
        raise InfeasibleError('search_embedding: no stegotext meets the distortion budget '
                              '{!r} per symbol'.format(c.budget))

    logger.debug("detect_discrete: %s search over %d feasible types, objective %.6g",
                 mode, candidates, best_score)
    return TypeEmbedding(layout.realize(best, x), best, best_score, candidates, mode)


def optimal_embed_discrete(src, x, u, c, mode='exact', variant=Variant.KNOWN_SOURCE,
                           cap=ENUMERATION_CAP):
    """Stegotext minimizing ln P_X(y) + n H(Y|U) subject to d(x, y) <= n D_e

    See search_embedding for the arguments; returns only the stegotext.
    """
    return search_embedding(src, x, u, c, mode=mode, variant=variant, cap=cap).y
