"""Monte Carlo harness for the Gaussian embedders and detectors

Draws covertexts and watermarks, embeds, optionally attacks, detects, and
turns the error counts into probability estimates with Wilson intervals and
a fitted error exponent to hold against the analytic curves.

Every trial block owns a counter-based random stream keyed by
(seed, n, hypothesis, block), so results are bitwise reproducible and do not
depend on how blocks are spread over worker threads.

Example:
    Example use: ::
        cfg = SimConfig([200, 400], 10000, 1.0, EmbedderKind('sign', 1.0), 'mi', 0.3, seed=7)
        result = run_trials(cfg)
        estimate_exponent(result)
"""

import contextlib
import csv
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import NamedTuple

import numpy as np
from scipy.stats import linregress

from .defaults import MIN_TRIALS, SCHEMA_VERSION, TRIAL_BLOCK, WILSON_Z
from .exponents import EXPONENTS, ExponentQuery, cap_log_ratio
from .gaussian import DETECTORS, Embedder, detect_batch, embed_batch
from .hypothesis import Decision

logger = logging.getLogger(__name__)

# stream key per hypothesis
HYPOTHESIS_CODES = {Decision.H0: 0, Decision.H1: 1}

# detector each closed-form exponent belongs to
EXPONENT_DETECTOR = {
    Embedder.SIGN: 'mi',
    Embedder.IMPROVED_SIGN: 'mi',
    Embedder.ADDITIVE: 'corr',
}

CSV_COLUMNS = ('n', 'hypothesis', 'trials', 'errors', 'p_hat', 'ci_lo', 'ci_hi')


class AwgnAttack(object):
    """Memoryless additive white Gaussian noise applied to whatever reaches the detector

    Attributes:
        variance (float): noise variance per symbol, >= 0
    """

    def __init__(self, variance):
        if not (np.isfinite(variance) and variance >= 0):
            raise ValueError('AwgnAttack: variance must be finite and nonnegative, got '
                             '{}'.format(variance))
        self.variance = float(variance)

    def apply(self, Y, rng):
        if self.variance == 0:
            return Y
        return Y + np.sqrt(self.variance) * rng.standard_normal(Y.shape)

    def __repr__(self):
        return 'AwgnAttack({!r})'.format(self.variance)


class SimConfig(object):
    """Monte Carlo configuration

    Attributes:
        n_list (tuple): strictly increasing sequence lengths, each >= 2
        trials (int): trials per length and hypothesis, >= MIN_TRIALS
        sigma2 (float): covertext variance
        embedder (EmbedderKind): embedding strategy and budget
        detector (string): 'mi' or 'corr'
        lam (float): detector threshold exponent
        seed (int): 64-bit seed
        attack (AwgnAttack): optional channel between embedder and detector. The
            covertext here is Gaussian, so the discrete MemorylessAttack tables
            do not apply; they are evaluated exactly in attacks instead.
    """

    def __init__(self, n_list, trials, sigma2, embedder, detector, lam, seed, attack=None):
        n_list = tuple(int(n) for n in n_list)
        if not n_list or any(n < 2 for n in n_list):
            raise ValueError('SimConfig: lengths must be at least 2, got {}'.format(list(n_list)))
        if any(b <= a for a, b in zip(n_list, n_list[1:])):
            raise ValueError('SimConfig: lengths must be strictly increasing, got {}'.format(
                list(n_list)))
        if trials < MIN_TRIALS:
            raise ValueError('SimConfig: at least {} trials are required, got {}'.format(
                MIN_TRIALS, trials))
        if not (np.isfinite(sigma2) and sigma2 > 0):
            raise ValueError('SimConfig: sigma2 must be positive, got {}'.format(sigma2))
        if detector not in DETECTORS:
            raise ValueError('SimConfig: value {} not allowed for detector. Possible values '
                             'are: {}'.format(detector, list(DETECTORS)))
        if not lam >= 0:
            raise ValueError('SimConfig: lambda must be nonnegative, got {}'.format(lam))
        if not 0 <= seed < 2 ** 64:
            raise ValueError('SimConfig: seed must be a 64-bit unsigned integer, got {}'.format(
                seed))

        self.n_list = n_list
        self.trials = int(trials)
        self.sigma2 = float(sigma2)
        self.embedder = embedder
        self.detector = detector
        self.lam = float(lam)
        self.seed = int(seed)
        self.attack = attack

    def to_dict(self):
        return {
            'n_list': list(self.n_list),
            'trials': self.trials,
            'sigma2': self.sigma2,
            'embedder': self.embedder.kind.value,
            'de': self.embedder.de,
            'detector': self.detector,
            'lambda': self.lam,
            'seed': self.seed,
            'noise': None if self.attack is None else self.attack.variance,
        }


class SimCell(NamedTuple):
    """Error count of one (n, hypothesis) cell"""
    n: int
    hypothesis: str
    trials: int
    errors: int
    p_hat: float
    ci_lo: float
    ci_hi: float


class ExponentFit(NamedTuple):
    """Least-squares fit of -ln p_hat against n; the slope is the empirical exponent"""
    slope: float
    stderr: float
    intercept: float
    advisory: str = ''

    @property
    def ok(self):
        return not self.advisory


class SimResult(object):
    """Outcome of run_trials

    Attributes:
        config (SimConfig): configuration echo
        cells (tuple): SimCell per length and hypothesis
        theory (float): analytic false-negative exponent, None without a closed form
    """

    def __init__(self, config, cells, theory=None):
        self.config = config
        self.cells = tuple(cells)
        self.theory = theory

    def select(self, hypothesis):
        hypothesis = Decision(hypothesis).value
        return [cell for cell in self.cells if cell.hypothesis == hypothesis]

    def p_hat(self, hypothesis):
        return np.array([cell.p_hat for cell in self.select(hypothesis)])


def wilson_interval(errors, trials, z=WILSON_Z):
    """Wilson score interval for a binomial proportion

    Zero errors give (0, z^2 / (trials + z^2)); all errors mirror it to
    (trials / (trials + z^2), 1).
    """
    if trials <= 0:
        raise ValueError('wilson_interval: trials must be positive, got {}'.format(trials))
    z2 = z * z
    if errors == 0:
        return 0.0, float(z2 / (trials + z2))
    if errors == trials:
        return float(trials / (trials + z2)), 1.0
    p_hat = errors / trials
    denom = 1.0 + z2 / trials
    center = (p_hat + z2 / (2.0 * trials)) / denom
    margin = z * np.sqrt(p_hat * (1.0 - p_hat) / trials + z2 / (4.0 * trials * trials)) / denom
    return float(max(center - margin, 0.0)), float(min(center + margin, 1.0))


def _stream(cfg, n, hypothesis, block):
    key = np.random.SeedSequence([cfg.seed, n, HYPOTHESIS_CODES[hypothesis], block])
    return np.random.Generator(np.random.Philox(key))


def _run_block(cfg, n, hypothesis, block, size):
    rng = _stream(cfg, n, hypothesis, block)
    X = np.sqrt(cfg.sigma2) * rng.standard_normal((size, n))
    U = np.where(rng.integers(0, 2, size=(size, n)) == 1, 1.0, -1.0)
    Y = embed_batch(cfg.embedder, X, U) if hypothesis is Decision.H1 else X
    if cfg.attack is not None:
        Y = cfg.attack.apply(Y, rng)
    detected = detect_batch(cfg.detector, U, Y, cfg.lam)
    # an error is a detection under H0 and a miss under H1
    wrong = detected if hypothesis is Decision.H0 else ~detected
    return int(np.count_nonzero(wrong))


def _jobs(cfg, hypotheses):
    for n in cfg.n_list:
        for hypothesis in hypotheses:
            for block, start in enumerate(range(0, cfg.trials, TRIAL_BLOCK)):
                yield n, hypothesis, block, min(TRIAL_BLOCK, cfg.trials - start)


def _count_errors(cfg, hypotheses, workers):
    jobs = list(_jobs(cfg, hypotheses))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            errors = list(pool.map(lambda job: _run_block(cfg, *job), jobs))
    else:
        errors = [_run_block(cfg, *job) for job in jobs]

    totals = {}
    for (n, hypothesis, _, _), count in zip(jobs, errors):
        totals[n, hypothesis] = totals.get((n, hypothesis), 0) + count

    cells = []
    for n in cfg.n_list:
        for hypothesis in hypotheses:
            count = totals[n, hypothesis]
            lo, hi = wilson_interval(count, cfg.trials)
            cells.append(SimCell(n, hypothesis.value, cfg.trials, count, count / cfg.trials,
                                 lo, hi))
            logger.info("simkit: n=%d hypothesis=%s errors=%d/%d", n, hypothesis.value, count,
                        cfg.trials)
    return cells


def theory_exponent(cfg):
    """Analytic false-negative exponent for the configuration, None if unknown

    Known for the sign and improved sign embedders with the mutual
    information detector and the additive embedder with the correlation
    detector, all without an attack.
    """
    kind = cfg.embedder.kind
    if cfg.attack is not None or EXPONENT_DETECTOR.get(kind) != cfg.detector:
        return None
    if cfg.embedder.de == 0:
        return 0.0
    return EXPONENTS[kind](ExponentQuery(cfg.lam, cfg.embedder.de, cfg.sigma2))


def run_trials(cfg, workers=1):
    """Estimates false-positive and false-negative probabilities for every length

    H0 trials run the detector on the raw covertext, H1 trials on the
    embedded (and attacked) stegotext.

    Args:
        cfg (SimConfig): configuration
        workers (int): threads running trial blocks; results do not depend on it
    Returns:
        SimResult
    """
    cells = _count_errors(cfg, (Decision.H0, Decision.H1), workers)
    return SimResult(cfg, cells, theory_exponent(cfg))


def estimate_exponent_from(ns, p_hats):
    """Fits -ln p_hat = slope n + intercept

    Returns:
        ExponentFit; with an advisory and NaN fields if any p_hat is zero or
        fewer than two points are given
    """
    ns = np.asarray(ns, dtype=float)
    p_hats = np.asarray(p_hats, dtype=float)
    if len(ns) < 2:
        return ExponentFit(np.nan, np.nan, np.nan, 'at least two lengths are needed for a fit')
    if np.any(p_hats <= 0):
        zeros = ns[p_hats <= 0].astype(int).tolist()
        advisory = 'zero error count at n={}; raise trials or lower n'.format(zeros)
        logger.warning("simkit: exponent fit refused, %s", advisory)
        return ExponentFit(np.nan, np.nan, np.nan, advisory)
    fit = linregress(ns, -np.log(p_hats))
    return ExponentFit(float(fit.slope), float(fit.stderr), float(fit.intercept))


def estimate_exponent(result, hypothesis='H1'):
    """Empirical exponent from the largest half of the lengths

    The polynomial prefactors bias -1/n ln p at small n, so only the upper
    ceil(len/2) lengths (at least two) enter the fit.
    """
    cells = result.select(hypothesis)
    keep = max(2, (len(cells) + 1) // 2)
    cells = cells[-keep:]
    return estimate_exponent_from([c.n for c in cells], [c.p_hat for c in cells])


class FalsePositiveRow(NamedTuple):
    n: int
    trials: int
    errors: int
    p_hat: float
    ci_lo: float
    ci_hi: float
    exponent: float
    target: float
    satisfied: bool


class FalsePositiveReport(NamedTuple):
    """Empirical false-positive exponents against lam - 2 ln(n+1)/n

    cap_exponent is -ln sin(theta) with cos(theta) the correlation
    threshold, the asymptote the empirical exponent approaches.
    """
    rows: tuple
    cap_log_ratio: float
    cap_exponent: float
    message: str

    @property
    def violations(self):
        return [row.n for row in self.rows if not row.satisfied]


def false_positive_check(cfg, workers=1):
    """Runs H0 trials only and compares -1/n ln p_hat_fp with its target

    Returns:
        FalsePositiveReport
    """
    cells = _count_errors(cfg, (Decision.H0,), workers)
    rows = []
    for cell in cells:
        exponent = -np.log(cell.p_hat) / cell.n if cell.errors else np.inf
        target = cfg.lam - 2.0 * np.log(cell.n + 1) / cell.n
        rows.append(FalsePositiveRow(cell.n, cell.trials, cell.errors, cell.p_hat, cell.ci_lo,
                                     cell.ci_hi, float(exponent), float(target),
                                     bool(exponent >= target)))

    theta = np.arccos(np.sqrt(-np.expm1(-2.0 * cfg.lam)))
    log_ratio = cap_log_ratio(theta)
    if all(row.errors == 0 for row in rows):
        message = 'no violations observed'
    else:
        missed = [row.n for row in rows if not row.satisfied]
        message = ('exponent target met at every n' if not missed
                   else 'exponent target missed at n={}'.format(missed))
    logger.info("simkit: false-positive check, %s", message)
    return FalsePositiveReport(tuple(rows), log_ratio, -log_ratio, message)


def _format(value):
    return format(value, '.17g')


def _sink(target):
    # path or an already open text stream
    if hasattr(target, 'write'):
        return contextlib.nullcontext(target)
    return open(target, 'w', newline='')


def write_csv(result, path):
    """Writes one row per cell with the columns of CSV_COLUMNS to a path or stream"""
    with _sink(path) as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(CSV_COLUMNS)
        for cell in result.cells:
            writer.writerow([cell.n, cell.hypothesis, cell.trials, cell.errors,
                             _format(cell.p_hat), _format(cell.ci_lo), _format(cell.ci_hi)])


def read_csv(path):
    """Reads cells written by write_csv"""
    with open(path, newline='') as f:
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError('read_csv: expected columns {}, got {}'.format(
                list(CSV_COLUMNS), reader.fieldnames))
        return [SimCell(int(row['n']), Decision(row['hypothesis']).value, int(row['trials']),
                        int(row['errors']), float(row['p_hat']), float(row['ci_lo']),
                        float(row['ci_hi'])) for row in reader]


def _json_float(value):
    if value is None:
        return None
    value = float(value)
    return value if np.isfinite(value) else repr(value)


def write_json(result, path, fit=None):
    """Writes the configuration echo, the cells, the theory value and the fit"""
    fit = estimate_exponent(result) if fit is None else fit
    document = {
        'schema_version': SCHEMA_VERSION,
        'config': result.config.to_dict(),
        'cells': [dict(cell._asdict(), p_hat=_json_float(cell.p_hat),
                       ci_lo=_json_float(cell.ci_lo), ci_hi=_json_float(cell.ci_hi))
                  for cell in result.cells],
        'theory': _json_float(result.theory),
        'fit': {'slope': _json_float(fit.slope), 'stderr': _json_float(fit.stderr),
                'intercept': _json_float(fit.intercept), 'advisory': fit.advisory},
    }
    with _sink(path) as f:
        json.dump(document, f, indent=2, sort_keys=True)
        f.write('\n')
