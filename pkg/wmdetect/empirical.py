"""Empirical distributions and the method of types

Counts, empirical entropies and divergences over finite alphabets, plus the
conditional type classes T(y|u) used by the discrete detectors, embedders and
attack channels. Every information quantity is in nats, with 0 ln 0 = 0.

Example:
    Example use: ::
        j = empirical_joint(u, y, Alphabet.watermark(), Alphabet.range(2))
        mutual_information(j)
"""

import itertools
import logging

import numpy as np
from scipy.special import comb, entr, gammaln, rel_entr, xlogy

from .defaults import ENUMERATION_CAP, PMF_TOLERANCE
from .errors import CapExceededError

logger = logging.getLogger(__name__)


class Alphabet(object):
    """Ordered finite set of symbols

    Symbols are compared by value, so numpy scalars and Python numbers that
    are equal map onto the same index.

    Attributes:
        symbols (tuple): the distinct symbols in index order
        size (int): number of symbols |A|
    """

    def __init__(self, symbols):
        symbols = tuple(symbols)
        if not symbols:
            raise ValueError('Alphabet: at least one symbol is required')

        self._index = {}
        for i, symbol in enumerate(symbols):
            if symbol in self._index:
                raise ValueError('Alphabet: symbol {} appears more than once'.format(symbol))
            self._index[symbol] = i

        self.symbols = symbols
        self.size = len(symbols)

    @classmethod
    def watermark(cls):
        """The watermark alphabet {-1, +1}"""
        return cls((-1, 1))

    @classmethod
    def range(cls, size):
        """The alphabet {0, 1, ..., size-1}"""
        if size < 1:
            raise ValueError('Alphabet: size {} not allowed, must be at least 1'.format(size))
        return cls(range(size))

    @classmethod
    def of(cls, sequence):
        """Sorted alphabet of the distinct symbols occurring in sequence"""
        return cls(sorted(set(np.asarray(sequence).tolist())))

    def index_of(self, sequence):
        """Maps a symbol sequence onto integer indices

        Args:
            sequence: one-dimensional sequence of symbols
        Returns:
            Numpy integer array of symbol indices
        Raises:
            ValueError: if a symbol is not part of the alphabet
        """
        values = np.asarray(sequence).tolist()
        if not isinstance(values, list):
            values = [values]
        try:
            return np.array([self._index[s] for s in values], dtype=np.intp)
        except (KeyError, TypeError) as err:
            raise ValueError('Alphabet: symbol {} not in alphabet {}'.format(
                err.args[0], list(self.symbols))) from None

    def symbols_at(self, indices):
        """Inverse of index_of: symbols for an index array, as a numpy array"""
        return np.asarray(self.symbols)[np.asarray(indices, dtype=np.intp)]

    def __len__(self):
        return self.size

    def __iter__(self):
        return iter(self.symbols)

    def __eq__(self, other):
        return isinstance(other, Alphabet) and self.symbols == other.symbols

    def __hash__(self):
        return hash(self.symbols)

    def __repr__(self):
        return 'Alphabet({})'.format(list(self.symbols))


class MemorylessSource(object):
    """Memoryless source over a finite alphabet

    Models P_X (covertext) or P_U (watermark). Probabilities must sum to one
    within PMF_TOLERANCE; nothing is renormalized silently.

    Attributes:
        alphabet (Alphabet): source alphabet
        pmf (ndarray): read-only probability per symbol
    """

    def __init__(self, alphabet, pmf):
        pmf = np.array(pmf, dtype=float)
        if pmf.shape != (alphabet.size,):
            raise ValueError('MemorylessSource: pmf of length {} does not match alphabet '
                             'of size {}'.format(pmf.size, alphabet.size))
        if not np.all(np.isfinite(pmf)) or np.any(pmf < 0):
            raise ValueError('MemorylessSource: probabilities must be finite and '
                             'nonnegative, got {}'.format(pmf.tolist()))
        if abs(pmf.sum() - 1.0) > PMF_TOLERANCE:
            raise ValueError('MemorylessSource: probabilities sum to {!r}, not 1'.format(
                pmf.sum()))
        pmf.setflags(write=False)

        self.alphabet = alphabet
        self.pmf = pmf

    @classmethod
    def uniform(cls, alphabet):
        return cls(alphabet, np.full(alphabet.size, 1.0 / alphabet.size))

    def log_prob(self, sequence):
        return log_prob_memoryless(self, sequence)

    def __repr__(self):
        return 'MemorylessSource({}, {})'.format(list(self.alphabet.symbols), self.pmf.tolist())


class EmpiricalJoint(object):
    """Joint type of a pair of sequences

    Holds exact integer counts; frequencies are derived on demand.

    Attributes:
        row_alphabet (Alphabet): alphabet of the first sequence (e.g. u)
        col_alphabet (Alphabet): alphabet of the second sequence (e.g. y)
        counts (ndarray): read-only |rows| x |cols| integer count matrix
    """

    def __init__(self, row_alphabet, col_alphabet, counts):
        counts = np.array(counts, dtype=np.int64)
        if counts.shape != (row_alphabet.size, col_alphabet.size):
            raise ValueError('EmpiricalJoint: counts of shape {} do not match alphabets of '
                             'size {}x{}'.format(counts.shape, row_alphabet.size,
                                                   col_alphabet.size))
        if np.any(counts < 0):
            raise ValueError('EmpiricalJoint: counts must be nonnegative')
        if counts.sum() < 1:
            raise ValueError('EmpiricalJoint: at least one observation is required')
        counts.setflags(write=False)

        self.row_alphabet = row_alphabet
        self.col_alphabet = col_alphabet
        self.counts = counts

    @property
    def n(self):
        return int(self.counts.sum())

    @property
    def row_counts(self):
        return self.counts.sum(axis=1)

    @property
    def col_counts(self):
        return self.counts.sum(axis=0)

    @property
    def joint(self):
        return self.counts / self.n

    @property
    def row_marginal(self):
        return self.row_counts / self.n

    @property
    def col_marginal(self):
        return self.col_counts / self.n

    def transpose(self):
        return EmpiricalJoint(self.col_alphabet, self.row_alphabet, self.counts.T)

    def __eq__(self, other):
        return (isinstance(other, EmpiricalJoint)
                and self.row_alphabet == other.row_alphabet
                and self.col_alphabet == other.col_alphabet
                and np.array_equal(self.counts, other.counts))

    def __repr__(self):
        return 'EmpiricalJoint(n={}, counts={})'.format(self.n, self.counts.tolist())


def empirical_joint(u, y, row_alphabet=None, col_alphabet=None):
    """Counts the joint occurrences of (u_i, y_i)

    Args:
        u, y: sequences of equal length n >= 1
        row_alphabet (Alphabet): alphabet of u, defaults to the sorted symbols of u
        col_alphabet (Alphabet): alphabet of y, defaults to the sorted symbols of y
    Returns:
        EmpiricalJoint with counts[a][b] = #{i : u_i = a, y_i = b}
    """
    u = np.asarray(u)
    y = np.asarray(y)
    if u.ndim != 1 or y.ndim != 1 or len(u) != len(y):
        raise ValueError('empirical_joint: length mismatch, {} vs {}'.format(u.size, y.size))
    if len(u) == 0:
        raise ValueError('empirical_joint: sequences must not be empty')

    rows = Alphabet.of(u) if row_alphabet is None else row_alphabet
    cols = Alphabet.of(y) if col_alphabet is None else col_alphabet
    flat = rows.index_of(u) * cols.size + cols.index_of(y)
    counts = np.bincount(flat, minlength=rows.size * cols.size)
    return EmpiricalJoint(rows, cols, counts.reshape(rows.size, cols.size))


def _xlogx(counts):
    return float(np.sum(xlogy(counts, counts)))


def entropy(pmf):
    """Shannon entropy of a pmf in nats"""
    return float(np.sum(entr(np.asarray(pmf, dtype=float))))


def joint_entropy(j):
    """Empirical joint entropy H(U,Y)"""
    n = j.n
    return np.log(n) - _xlogx(j.counts) / n


def conditional_entropy(j, given='row'):
    """Empirical conditional entropy

    Args:
        j (EmpiricalJoint): joint type
        given (string): 'row' for H(col|row), e.g. H(Y|U); 'col' for H(row|col)
    """
    if given not in ('row', 'col'):
        raise ValueError("conditional_entropy: value {} not allowed for given. Possible "
                         "values are: ['row', 'col']".format(given))
    return counts_conditional_entropy(j.counts if given == 'row' else j.counts.T)


def mutual_information(j):
    """Empirical mutual information between the row and column sequences"""
    return counts_mutual_information(j.counts)


def counts_conditional_entropy(counts):
    """H(col|row) straight from a count matrix"""
    counts = np.asarray(counts)
    value = (_xlogx(counts.sum(axis=1)) - _xlogx(counts)) / counts.sum()
    return max(value, 0.0)


def counts_mutual_information(counts):
    """I(row;col) straight from a count matrix"""
    counts = np.asarray(counts)
    n = counts.sum()
    value = (_xlogx(counts) + n * np.log(n)
             - _xlogx(counts.sum(axis=1)) - _xlogx(counts.sum(axis=0))) / n
    return max(value, 0.0)


def conditional_mutual_information(counts):
    """Empirical I(A;C|B) from a three-way count tensor indexed [a, b, c]

    Used for I(Z;U|Y) with the tensor laid out as [u, y, z].
    """
    counts = np.asarray(counts)
    if counts.ndim != 3:
        raise ValueError('conditional_mutual_information: expected a 3-way tensor, '
                         'got {} axes'.format(counts.ndim))
    n = counts.sum()
    if n < 1:
        raise ValueError('conditional_mutual_information: empty count tensor')
    value = (_xlogx(counts) + _xlogx(counts.sum(axis=(0, 2)))
             - _xlogx(counts.sum(axis=2)) - _xlogx(counts.sum(axis=0))) / n
    return max(value, 0.0)


def kl_divergence(p, q):
    """Kullback-Leibler divergence D(p||q) in nats, +inf on support violations"""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError('kl_divergence: pmfs over different alphabets, shapes {} and {}'.format(
            p.shape, q.shape))
    return float(np.sum(rel_entr(p, q)))


def symbol_counts(alphabet, sequence):
    return np.bincount(alphabet.index_of(sequence), minlength=alphabet.size)


def log_prob_memoryless(src, y):
    """ln P_X(y) for a memoryless source; -inf if y uses a zero-probability symbol"""
    return float(np.sum(xlogy(symbol_counts(src.alphabet, y), src.pmf)))


def log_multinomial(counts):
    """Log of the number of sequences with the given per-row composition

    Rows are the conditioning symbols; for a conditional count matrix this is
    ln|T(y|u)| = sum_u [ln c_u! - sum_y ln c_uy!].
    """
    counts = np.atleast_2d(np.asarray(counts, dtype=float))
    return float(np.sum(gammaln(counts.sum(axis=1) + 1)) - np.sum(gammaln(counts + 1)))


def conditional_type_log_size(j):
    """Exact ln|T(y|u)| of the conditional type class of j"""
    return log_multinomial(j.counts)


def conditional_type_size_bounds(j):
    """Bounds on ln|T(y|u)|

    Returns:
        (lower, upper) with upper = n H(Y|U) and lower = upper - |A| ln(n+1),
        |A| being the column alphabet size
    """
    n = j.n
    upper = n * conditional_entropy(j, given='row')
    return upper - j.col_alphabet.size * np.log(n + 1), upper


def compositions(total, parts):
    """All ways to write total as an ordered sum of parts nonnegative integers

    Generated in ascending lexicographic order.
    """
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def conditional_types(row_counts, size):
    """All conditional count matrices with the given row totals

    Args:
        row_counts: number of positions per conditioning symbol
        size (int): size of the alphabet being distributed
    Yields:
        Integer matrices of shape (len(row_counts), size), ascending in the
        lexicographic order of their flattened entries
    """
    per_row = [list(compositions(int(c), size)) for c in row_counts]
    for rows in itertools.product(*per_row):
        yield np.array(rows, dtype=np.int64)


def count_conditional_types(row_counts, size):
    """Number of conditional count matrices with the given row totals"""
    return int(np.prod([comb(int(c) + size - 1, size - 1, exact=True) for c in row_counts]))


def _arrangements(counts):
    total = sum(counts)
    if total == 0:
        yield ()
        return
    for b, c in enumerate(counts):
        if c:
            rest = list(counts)
            rest[b] -= 1
            for tail in _arrangements(rest):
                yield (b,) + tail


def fill_conditional_type(row_index, counts):
    """One representative of a conditional type class

    Positions of each conditioning symbol are filled in increasing order with
    the column symbols in index order, which makes the choice deterministic.

    Args:
        row_index: conditioning sequence as indices
        counts: conditional count matrix with rows matching row_index
    Returns:
        Column index array
    """
    row_index = np.asarray(row_index)
    out = np.empty(len(row_index), dtype=np.intp)
    for a, row in enumerate(np.asarray(counts)):
        positions = np.flatnonzero(row_index == a)
        out[positions] = np.repeat(np.arange(len(row)), row)
    return out


def enumerate_conditional_type(j_target, u, cap=ENUMERATION_CAP):
    """Iterates over the conditional type class T(y|u) given by j_target

    Args:
        j_target (EmpiricalJoint): target joint type of (u, y)
        u: conditioning sequence over j_target.row_alphabet
        cap (int): longest sequence length allowed
    Returns:
        Iterator of tuples y, in lexicographic order of symbol indices. Empty
        when the row marginal of j_target does not match u.
    Raises:
        CapExceededError: if len(u) exceeds cap
    """
    u_index = j_target.row_alphabet.index_of(u)
    n = len(u_index)
    if n > cap:
        raise CapExceededError('enumerate_conditional_type: n', n, cap)

    row_counts = np.bincount(u_index, minlength=j_target.row_alphabet.size)
    if n != j_target.n or not np.array_equal(row_counts, j_target.row_counts):
        logger.debug("empirical: target type inconsistent with u, nothing to enumerate")
        return iter(())
    return _enumerate(j_target, u_index)


def _enumerate(j_target, u_index):
    positions = [np.flatnonzero(u_index == a) for a in range(j_target.row_alphabet.size)]
    per_row = [list(_arrangements(list(row))) for row in j_target.counts]
    symbols = j_target.col_alphabet.symbols
    y = np.empty(len(u_index), dtype=np.intp)
    for choice in itertools.product(*per_row):
        for pos, arrangement in zip(positions, choice):
            y[pos] = arrangement
        yield tuple(symbols[i] for i in y)
