"""Attack channels, worst-case decision regions and attack-aware embedders

Two attack models sit between the stegotext y and the forgery z seen by the
detector:

* a known memoryless channel W(z|y), for which the known-source region is
  rewritten in terms of the output marginal Q = P_X W;
* the strongly exchangeable worst case W_n*, which spreads its mass evenly
  over the conditional types T(z|y) meeting an attack distortion budget. Its
  region replaces D(P_z||P_X) by a minimum over couplings of y and z.

Everything here is exact at desk scale: sequence lengths up to the
enumeration cap and alphabets of at most a few symbols.

Example:
    Example use: ::
        W = MemorylessAttack.binary_symmetric(0.1)
        Q = output_marginal(P_X, W)
        memoryless_attack_accepts(Q, u, z, 0.2)
"""

import itertools
import logging

import numpy as np
from scipy.special import gammaln, rel_entr

from .defaults import (ENUMERATION_CAP, FW_GAP_TOLERANCE, FW_MAX_ITER, GRID_FALLBACK_N,
                       MAX_EXACT_ALPHABET, MAX_TYPE_PAIRS, MAX_VERTICES, PMF_TOLERANCE,
                       TIE_TOLERANCE)
from .detect_discrete import (CellLayout, EmbedConstraint, TypeEmbedding, type_slack)
from .empirical import (Alphabet, MemorylessSource, compositions, conditional_mutual_information,
                        conditional_types, count_conditional_types, counts_mutual_information,
                        empirical_joint, kl_divergence, log_multinomial)
from .errors import CapExceededError, InfeasibleError
from .hypothesis import Decision
from .optimize import away_step_frank_wolfe

logger = logging.getLogger(__name__)


class MemorylessAttack(object):
    """Discrete memoryless attack channel W(z|y)

    Attributes:
        W (ndarray): read-only row-stochastic matrix, rows indexed by y
        alphabet (Alphabet): common input and output alphabet
    """

    def __init__(self, W, alphabet=None):
        W = np.array(W, dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise ValueError('MemorylessAttack: W must be a square matrix, got shape {}'.format(
                W.shape))
        alphabet = Alphabet.range(W.shape[0]) if alphabet is None else alphabet
        if alphabet.size != W.shape[0]:
            raise ValueError('MemorylessAttack: W of size {} does not match alphabet of size '
                             '{}'.format(W.shape[0], alphabet.size))
        if not np.all(np.isfinite(W)) or np.any(W < 0):
            raise ValueError('MemorylessAttack: transition probabilities must be finite and '
                             'nonnegative')
        sums = W.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > PMF_TOLERANCE):
            raise ValueError('MemorylessAttack: rows sum to {}, not 1'.format(sums.tolist()))
        W.setflags(write=False)

        self.W = W
        self.alphabet = alphabet

    @classmethod
    def identity(cls, alphabet):
        return cls(np.eye(alphabet.size), alphabet)

    @classmethod
    def uniform(cls, alphabet):
        return cls(np.full((alphabet.size, alphabet.size), 1.0 / alphabet.size), alphabet)

    @classmethod
    def binary_symmetric(cls, eps, alphabet=None):
        """Binary symmetric channel with crossover probability eps"""
        if not 0 <= eps <= 1:
            raise ValueError('MemorylessAttack: crossover probability {} not in [0, 1]'.format(
                eps))
        return cls([[1.0 - eps, eps], [eps, 1.0 - eps]],
                   Alphabet.range(2) if alphabet is None else alphabet)

    def apply(self, y, rng):
        """Passes a sequence through the channel

        Args:
            y: input sequence over the channel alphabet
            rng (numpy.random.Generator): source of randomness
        Returns:
            ndarray with the output symbols
        """
        y_index = self.alphabet.index_of(y)
        cdf = np.cumsum(self.W[y_index], axis=1)
        draws = rng.random(len(y_index))[:, None]
        z_index = np.minimum((draws >= cdf).sum(axis=1), self.alphabet.size - 1)
        return np.array(self.alphabet.symbols_at(z_index))

    def __repr__(self):
        return 'MemorylessAttack({})'.format(self.W.tolist())


class AttackBudget(EmbedConstraint):
    """Attacker distortion measure d_a(y, z) with per-symbol budget D_a"""
    _name = 'AttackBudget'


def output_marginal(P_X, W):
    """Single-letter channel output marginal Q(z) = sum_y P_X(y) W(z|y)"""
    if P_X.alphabet != W.alphabet:
        raise ValueError('output_marginal: source alphabet {} does not match channel alphabet '
                         '{}'.format(P_X.alphabet, W.alphabet))
    return MemorylessSource(P_X.alphabet, P_X.pmf @ W.W)


def memoryless_attack_accepts(Q, u, z, lam):
    """Known-source region for a forgery observed through a memoryless channel

    Args:
        Q (MemorylessSource): channel output marginal P_X W
        u: watermark sequence over {-1, +1}
        z: forgery over Q.alphabet
        lam (float): false-positive exponent
    Returns:
        Decision.H1 iff n [I(Z;U) + D(P_z||Q)] >= lam n - |A| ln(n+1)
    """
    j = empirical_joint(u, z, Alphabet.watermark(), Q.alphabet)
    n = j.n
    statistic = n * (counts_mutual_information(j.counts) + kl_divergence(j.col_marginal, Q.pmf))
    return Decision.from_flag(statistic >= lam * n - type_slack(n, Q.alphabet.size))


def sequences(alphabet, n):
    """Every sequence of length n over the alphabet as index rows, in lexicographic order"""
    return np.array(list(itertools.product(range(alphabet.size), repeat=n)),
                    dtype=np.intp).reshape(-1, n)


def _pair_counts(y_index, z_seqs, size):
    # joint counts of one y against many z, shape (len(z_seqs), size, size)
    one_hot_y = np.eye(size, dtype=np.int64)[y_index]
    one_hot_z = np.eye(size, dtype=np.int64)[z_seqs]
    return np.einsum('ia,kib->kab', one_hot_y, one_hot_z)


class ExchangeableWorstCase(object):
    """Worst-case strongly exchangeable attack W_n*

    W_n*(z|y) = c_n(y) / |T(z|y)| when d_a(y, z) <= n D_a and 0 otherwise,
    with c_n(y) one over the number of feasible conditional types T(z|y).
    The channel depends on the attack budget alone: neither lam, nor the
    covertext source nor the embedding budget enter it.

    Attributes:
        budget (AttackBudget): attacker distortion and budget
        n (int): sequence length
        alphabet (Alphabet): common alphabet of y and z
    """

    def __init__(self, budget, n, alphabet, cap=ENUMERATION_CAP):
        if n < 1:
            raise ValueError('ExchangeableWorstCase: n must be positive, got {}'.format(n))
        if n > cap:
            raise CapExceededError('ExchangeableWorstCase: n', n, cap)
        self.budget = budget
        self.n = n
        self.alphabet = alphabet
        self._d = budget.matrix(alphabet)
        self._feasible_types = {}

    def feasible_types(self, y_counts):
        """Feasible conditional count matrices T(z|y) for a y composition"""
        key = tuple(int(c) for c in y_counts)
        if key not in self._feasible_types:
            self._feasible_types[key] = [
                counts for counts in conditional_types(key, self.alphabet.size)
                if self.budget.allows(float(np.sum(counts * self._d)), self.n)]
        return self._feasible_types[key]

    def c_n(self, y):
        """Normalizer c_n(y), constant on the type class of y"""
        y_counts = np.bincount(self.alphabet.index_of(y), minlength=self.alphabet.size)
        count = len(self.feasible_types(y_counts))
        if count == 0:
            raise InfeasibleError('ExchangeableWorstCase: no forgery meets the attack budget '
                                  '{!r} per symbol'.format(self.budget.budget))
        return 1.0 / count

    def prob(self, y, z):
        """W_n*(z|y)"""
        if len(y) != self.n or len(z) != self.n:
            raise ValueError('ExchangeableWorstCase: sequences must have length {}'.format(
                self.n))
        j = empirical_joint(y, z, self.alphabet, self.alphabet)
        if not self.budget.allows(float(np.sum(j.counts * self._d)), self.n):
            return 0.0
        return self.c_n(y) * float(np.exp(-log_multinomial(j.counts)))

    def table(self):
        """Full transition table over all sequence pairs

        Rows and columns follow the lexicographic order of sequences(alphabet, n).
        """
        size = self.alphabet.size
        seqs = sequences(self.alphabet, self.n)
        out = np.zeros((len(seqs), len(seqs)))
        for row, y_index in enumerate(seqs):
            counts = _pair_counts(y_index, seqs, size)
            cost = np.einsum('kab,ab->k', counts, self._d)
            feasible = np.array([self.budget.allows(float(c), self.n) for c in cost])
            y_counts = np.bincount(y_index, minlength=size)
            log_size = np.sum(gammaln(y_counts + 1)) - np.sum(gammaln(counts + 1), axis=(1, 2))
            out[row, feasible] = np.exp(-log_size[feasible]) / len(self.feasible_types(y_counts))
        return out


def wstar_prob(y, z, budget, alphabet, cap=ENUMERATION_CAP):
    """Transition probability W_n*(z|y) of the worst-case exchangeable attack

    Args:
        y, z: equal-length sequences
        budget (AttackBudget): attacker distortion and budget
        alphabet (Alphabet): covertext alphabet; c_n(y) counts feasible types over
            all of it
        cap (int): longest sequence allowed
    Returns:
        c_n(y)/|T(z|y)| if d_a(y, z) <= n D_a else 0
    """
    if len(y) != len(z):
        raise ValueError('wstar_prob: length mismatch, {} vs {}'.format(len(y), len(z)))
    return ExchangeableWorstCase(budget, len(y), alphabet, cap=cap).prob(y, z)


def wstar_table(alphabet, n, budget, cap=ENUMERATION_CAP):
    """Materialized W_n* table, see ExchangeableWorstCase.table"""
    if alphabet.size > MAX_EXACT_ALPHABET:
        raise CapExceededError('wstar_table: alphabet size', alphabet.size, MAX_EXACT_ALPHABET)
    return ExchangeableWorstCase(budget, n, alphabet, cap=cap).table()


def _polytope_vertices(q, d, support, da):
    # vertices of {y-marginals of couplings with z-marginal q, sum J d <= da}
    columns = np.flatnonzero(q > 0)
    total = len(support) ** len(columns)
    if total > MAX_VERTICES:
        raise CapExceededError('inner_divergence: coupling vertices', total, MAX_VERTICES)

    limit = da + 1e-12
    vertices = []
    for assignment in itertools.product(support, repeat=len(columns)):
        point = np.zeros(len(q))
        np.add.at(point, list(assignment), q[columns])
        cost = float(np.sum(q[columns] * d[list(assignment), columns]))
        if cost > limit:
            continue
        vertices.append(point)
        # edges towards assignments that overspend cross the budget hyperplane
        for current, z in zip(assignment, columns):
            for y in support:
                moved = cost + q[z] * (d[y, z] - d[current, z])
                if y == current or moved <= limit:
                    continue
                t = (da - cost) / (moved - cost)
                vertex = point.copy()
                vertex[current] -= t * q[z]
                vertex[y] += t * q[z]
                vertices.append(vertex)
    return vertices


def _grid_minimum(P_X, z_counts, d, da):
    size = len(z_counts)
    n = int(z_counts.sum())
    support = np.flatnonzero(P_X.pmf > 0)
    options = []
    for count in z_counts:
        column = []
        for comp in compositions(int(count), len(support)):
            full = np.zeros(size, dtype=np.int64)
            full[support] = comp
            column.append(full)
        options.append(column)

    best = np.inf
    for choice in itertools.product(*options):
        N = np.stack(choice, axis=1)
        if float(np.sum(N * d)) <= n * da + 1e-9:
            best = min(best, kl_divergence(N.sum(axis=1) / n, P_X.pmf))
    return best


def _frank_wolfe_minimum(P_X, q, d, da):
    support = np.flatnonzero(P_X.pmf > 0)
    vertices = _polytope_vertices(q, d, support, da)
    if not vertices:
        return np.inf, True
    pmf = P_X.pmf[support]
    vertices = np.array([v[support] for v in vertices])

    def objective(p):
        return float(np.sum(rel_entr(p, pmf)))

    def gradient(p):
        return np.log(np.maximum(p, 1e-300) / pmf) + 1.0

    result = away_step_frank_wolfe(objective, gradient, vertices, tol=FW_GAP_TOLERANCE,
                                   max_iter=FW_MAX_ITER)
    logger.debug("attacks: Frank-Wolfe over %d vertices, value %.10g gap %.3g after %d "
                 "iterations", len(vertices), result.value, result.gap, result.iterations)
    return result.value, result.converged


def inner_divergence(P_X, z_counts, budget, method='auto'):
    """min D(p_y||P_X) over couplings of y and z meeting the attack budget

    The minimum runs over joint distributions J(y, z) whose z-marginal is the
    forgery's empirical distribution and whose expected distortion
    sum J d_a is at most D_a; p_y is the y-marginal. Symbols outside the
    support of P_X are excluded from y.

    Args:
        P_X (MemorylessSource): covertext source
        z_counts: symbol counts of the forgery over P_X.alphabet
        budget (AttackBudget): attacker distortion and budget
        method (string): 'grid' for the exact minimum over couplings that are
            joint types (multiples of 1/n), 'frank_wolfe' for the continuous
            convex program solved over the exact vertex list of the feasible
            set, or 'auto': Frank-Wolfe, with the grid as a fallback up to
            n = GRID_FALLBACK_N when the duality gap is not met
    Returns:
        float, +inf if no coupling meets the budget
    """
    methods = ('auto', 'grid', 'frank_wolfe')
    if method not in methods:
        raise ValueError('inner_divergence: value {} not allowed for method. Possible values '
                         'are: {}'.format(method, list(methods)))
    z_counts = np.asarray(z_counts, dtype=np.int64)
    if z_counts.shape != (P_X.alphabet.size,) or np.any(z_counts < 0) or z_counts.sum() < 1:
        raise ValueError('inner_divergence: need nonnegative counts over {} symbols, got '
                         '{}'.format(P_X.alphabet.size, z_counts.tolist()))
    n = int(z_counts.sum())
    d = budget.matrix(P_X.alphabet)
    q = z_counts / n

    if method == 'grid':
        return _grid_minimum(P_X, z_counts, d, budget.budget)
    # the product coupling P_X x q reaches zero whenever it is affordable
    if float(P_X.pmf @ d @ q) <= budget.budget:
        return 0.0
    value, converged = _frank_wolfe_minimum(P_X, q, d, budget.budget)
    if method == 'auto' and not converged and n <= GRID_FALLBACK_N:
        logger.warning("attacks: Frank-Wolfe did not converge, falling back to the 1/n grid")
        value = min(value, _grid_minimum(P_X, z_counts, d, budget.budget))
    return value


def _worstcase_statistic(P_X, j, budget, method):
    return counts_mutual_information(j.counts) + inner_divergence(P_X, j.col_counts, budget,
                                                                  method=method)


def _worstcase_threshold(lam, n, size):
    return lam + type_slack(n, size) / n


def worstcase_accepts(P_X, u, z, lam, budget, method='auto'):
    """Region for the worst-case strongly exchangeable attack

    Returns:
        Decision.H1 iff I(Z;U) + inner_divergence >= lam + |A| ln(n+1)/n
    """
    j = empirical_joint(u, z, Alphabet.watermark(), P_X.alphabet)
    lhs = _worstcase_statistic(P_X, j, budget, method)
    return Decision.from_flag(lhs >= _worstcase_threshold(lam, j.n, P_X.alphabet.size))


def random_wm_worstcase_accepts(P_X, P_U, u, z, lam, budget, method='auto'):
    """Worst-case region for a watermark drawn from the memoryless source P_U

    Returns:
        Decision.H1 iff I(Z;U) + D(P_u||P_U) + inner_divergence >= lam + |A| ln(n+1)/n
    """
    j = empirical_joint(u, z, P_U.alphabet, P_X.alphabet)
    lhs = (_worstcase_statistic(P_X, j, budget, method)
           + kl_divergence(j.row_marginal, P_U.pmf))
    return Decision.from_flag(lhs >= _worstcase_threshold(lam, j.n, P_X.alphabet.size))


def region_mask(u_alphabet, z_alphabet, n, accept):
    """Indicator of a union of joint types of (u, z) over all sequence pairs

    Args:
        accept: callable on a joint count matrix [u, z] returning True for
            types inside the region; evaluated once per joint type
    Returns:
        Boolean matrix indexed by the lexicographic order of sequences()
    """
    u_seqs = sequences(u_alphabet, n)
    z_seqs = sequences(z_alphabet, n)
    mask = np.zeros((len(u_seqs), len(z_seqs)), dtype=bool)
    verdicts = {}
    one_hot_z = np.eye(z_alphabet.size, dtype=np.int64)[z_seqs]
    for row, u_index in enumerate(u_seqs):
        one_hot_u = np.eye(u_alphabet.size, dtype=np.int64)[u_index]
        counts = np.einsum('ia,kib->kab', one_hot_u, one_hot_z)
        for col, c in enumerate(counts):
            key = c.tobytes()
            if key not in verdicts:
                verdicts[key] = bool(accept(c))
            mask[row, col] = verdicts[key]
    return mask


def false_positive_table(table, mask, px_weights, pu_weights):
    """Exact false-positive probability of a region under an explicit channel

    sum_u P_U(u) sum_y P_X(y) sum_z W_n(z|y) 1{(u, z) in region}. Integer
    inputs (probabilities scaled to a common denominator) are summed exactly.

    Args:
        table: channel matrix indexed [y, z]
        mask: region indicator indexed [u, z]
        px_weights: weight of every y sequence
        pu_weights: weight of every u sequence
    """
    marginal = np.asarray(px_weights) @ np.asarray(table)
    return np.asarray(pu_weights) @ (np.asarray(mask).astype(marginal.dtype) @ marginal)


def worstcase_false_positive(P_X, u, lam, budget, cap=ENUMERATION_CAP):
    """Exact P_fp of the worst-case region for a fixed watermark under W_n*

    Returns:
        (probability, bound) with bound = (n+1)^|A| e^{-n lam}
    """
    alphabet = P_X.alphabet
    n = len(u)
    u_index = Alphabet.watermark().index_of(u)
    table = wstar_table(alphabet, n, budget, cap=cap)
    seqs = sequences(alphabet, n)
    px_weights = np.prod(P_X.pmf[seqs], axis=1)
    size = alphabet.size
    threshold = _worstcase_threshold(lam, n, size)
    cache = {}

    def accept(z_index):
        counts = np.zeros((2, size), dtype=np.int64)
        np.add.at(counts, (u_index, z_index), 1)
        key = counts.tobytes()
        if key not in cache:
            lhs = counts_mutual_information(counts) + inner_divergence(
                P_X, counts.sum(axis=0), budget)
            cache[key] = lhs >= threshold
        return cache[key]

    row = np.array([accept(z_index) for z_index in seqs])
    probability = float((px_weights @ table) @ row)
    bound = float(np.exp(size * np.log(n + 1) - n * lam))
    logger.info("attacks: worst-case P_fp %.6g against bound %.6g at n=%d", probability, bound, n)
    return probability, bound


def _better(value, score, best_value, best_score):
    if best_value is None:
        return True
    if value == best_value or abs(value - best_value) <= TIE_TOLERANCE:
        return score > best_score + TIE_TOLERANCE
    return value > best_value


def _check_pairs(layout, operation, cap, max_pairs):
    size = layout.alphabet.size
    if layout.n > cap:
        raise CapExceededError('{}: n'.format(operation), layout.n, cap)
    if size > MAX_EXACT_ALPHABET:
        raise CapExceededError('{}: alphabet size'.format(operation), size, MAX_EXACT_ALPHABET)
    outer = count_conditional_types(layout.cell_counts, size)
    spread = np.full(2 * size, layout.n // (2 * size))
    spread[:layout.n % (2 * size)] += 1
    pairs = outer * count_conditional_types(spread, size)
    if pairs > max_pairs:
        raise CapExceededError('{}: type pairs'.format(operation), pairs, max_pairs)


def _attack_search(layout, x, inner, score, operation):
    size = layout.alphabet.size
    best = best_value = best_score = None
    candidates = 0
    for counts in layout.feasible_types():
        candidates += 1
        uy = layout.uy_counts(counts)
        value = np.inf
        for z_counts in conditional_types(uy.ravel(), size):
            value = min(value, inner(z_counts.reshape(2, size, size)))
        s = score(uy)
        if _better(value, s, best_value, best_score):
            best, best_value, best_score = counts, value, s
    if best is None:
        raise InfeasibleError('{}: no stegotext meets the distortion budget {!r} per '
                              'symbol'.format(operation, layout.constraint.budget))
    logger.debug("attacks: %s over %d feasible types, value %.6g objective %.6g",
                 operation, candidates, best_value, best_score)
    return TypeEmbedding(layout.realize(best, x), best, best_score, candidates, 'exact',
                         value=best_value)


def memoryless_attack_embedding(P_X, W, x, u, lam, c, cap=ENUMERATION_CAP,
                                max_pairs=MAX_TYPE_PAIRS):
    """Best conditional type T(y|x,u) against a known memoryless attack

    Maximizes over distortion-feasible types the smallest value of
    I(Z;U|Y) + sum_a P_y(a) D(P(Z|Y=a)||W(.|a)) among the forgery types that
    fall outside the detector region, i.e. the false-negative exponent of
    the type. A type with no forgery type outside the region gets +inf. Ties
    go to the higher attack-free score I(U;Y) + D(P_y||Q), then to the
    lexicographically smallest type.

    Returns:
        TypeEmbedding with value set to the exponent
    """
    layout = CellLayout(P_X.alphabet, x, u, c)
    _check_pairs(layout, 'embed_memoryless_attack', cap, max_pairs)
    Q = output_marginal(P_X, W)
    n = layout.n
    threshold = lam - type_slack(n, P_X.alphabet.size) / n

    def inner(t):
        uz = t.sum(axis=1)
        z_marginal = uz.sum(axis=0) / n
        if counts_mutual_information(uz) + kl_divergence(z_marginal, Q.pmf) >= threshold:
            return np.inf
        yz = t.sum(axis=0)
        expected = yz.sum(axis=1)[:, None] * W.W
        return conditional_mutual_information(t) + float(np.sum(rel_entr(yz, expected))) / n

    def score(uy):
        return counts_mutual_information(uy) + kl_divergence(uy.sum(axis=0) / n, Q.pmf)

    return _attack_search(layout, x, inner, score, 'embed_memoryless_attack')


def embed_memoryless_attack(P_X, W, x, u, lam, c, cap=ENUMERATION_CAP):
    """Stegotext maximizing the false-negative exponent under a memoryless attack

    See memoryless_attack_embedding; returns only the stegotext.
    """
    return memoryless_attack_embedding(P_X, W, x, u, lam, c, cap=cap).y


def worstcase_embedding(x, u, lam, c, budget, src=None, alphabet=None, cap=ENUMERATION_CAP,
                        max_pairs=MAX_TYPE_PAIRS):
    """Best conditional type T(y|x,u) against the worst-case exchangeable attack

    Maximizes over distortion-feasible types the smallest I(Z;U|Y) among the
    forgery types that meet the attack budget and fall outside the worst-case
    region. With src=None the region is the universal one, without the
    divergence term, and the stegotext alphabet must be given.

    Args:
        x, u: covertext and watermark
        lam (float): false-positive exponent
        c (EmbedConstraint): embedding budget
        budget (AttackBudget): attack budget
        src (MemorylessSource): covertext source, or None
        alphabet (Alphabet): alphabet when src is None
    Returns:
        TypeEmbedding with value set to the exponent
    """
    if src is None and alphabet is None:
        raise ValueError('embed_worstcase: an alphabet is required without a covertext source')
    alphabet = src.alphabet if src is not None else alphabet
    layout = CellLayout(alphabet, x, u, c)
    _check_pairs(layout, 'embed_worstcase', cap, max_pairs)
    n = layout.n
    threshold = _worstcase_threshold(lam, n, alphabet.size)
    d = budget.matrix(alphabet)
    divergences = {}

    def divergence(z_counts):
        if src is None:
            return 0.0
        key = z_counts.tobytes()
        if key not in divergences:
            divergences[key] = inner_divergence(src, z_counts, budget)
        return divergences[key]

    def inner(t):
        yz = t.sum(axis=0)
        if not budget.allows(float(np.sum(yz * d)), n):
            return np.inf
        uz = t.sum(axis=1)
        if counts_mutual_information(uz) + divergence(uz.sum(axis=0)) >= threshold:
            return np.inf
        return conditional_mutual_information(t)

    def score(uy):
        value = counts_mutual_information(uy)
        if src is not None:
            value += kl_divergence(uy.sum(axis=0) / n, src.pmf)
        return value

    return _attack_search(layout, x, inner, score, 'embed_worstcase')


def embed_worstcase(x, u, lam, c, budget, src=None, alphabet=None, cap=ENUMERATION_CAP):
    """Stegotext maximizing the false-negative exponent under W_n*

    See worstcase_embedding; returns only the stegotext.
    """
    return worstcase_embedding(x, u, lam, c, budget, src=src, alphabet=alphabet, cap=cap).y
