"""Command line frontend

Subcommands:

    exponents    exponent curves, one CSV per embedder
    sweep        curve family for sigma2/D_e in {0.1, 1, 10}
    simulate     Monte Carlo error estimates (CSV or JSON)
    embed        embed a watermark into a covertext file
    detect       run a detector on a stegotext file
    attack-demo  exact worst-case attack enumeration at desk scale

Vector files hold one float per line. Exit codes: 0 success, 2 usage or
malformed input, 3 numeric or domain failure, 4 enumeration cap exceeded.
"""

import argparse
import csv
import logging
import os
import sys

import numpy as np

from .attacks import (AttackBudget, ExchangeableWorstCase, inner_divergence, sequences,
                      worstcase_false_positive)
from .defaults import (ATTACK_DEMO_MAX_N, CURVE_SAMPLES, MAX_EXACT_ALPHABET, TRIAL_BLOCK)
from .detect_discrete import type_slack
from .empirical import Alphabet, MemorylessSource, conditional_types, counts_mutual_information
from .errors import CapExceededError
from .exponents import EXPONENTS, exponent_curve
from .gaussian import (Embedder, EmbedderKind, detect_corr, detect_mi, emp_mutual_info_gauss,
                       embed, normalized_correlation)
from .simkit import (AwgnAttack, SimConfig, false_positive_check, run_trials, write_csv,
                     write_json)
from .version import __version__

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_CAP = 4

SWEEP_RATIOS = (0.1, 1.0, 10.0)
CURVE_EMBEDDERS = [kind.value.replace('_', '-') for kind in EXPONENTS]
ALL_EMBEDDERS = [kind.value.replace('_', '-') for kind in Embedder]


class UsageError(Exception):
    """Malformed command line input detected after parsing"""


def _read_vector(path, watermark=False):
    try:
        with open(path) as f:
            lines = [line.strip() for line in f if line.strip()]
    except OSError as e:
        raise UsageError('cannot read {}: {}'.format(path, e.strerror)) from None
    try:
        values = np.array([float(line) for line in lines])
    except ValueError:
        raise UsageError('{}: expected one float per line'.format(path)) from None
    if len(values) == 0:
        raise UsageError('{}: file holds no values'.format(path))
    if not np.all(np.isfinite(values)):
        raise UsageError('{}: values must be finite'.format(path))
    if watermark and not np.all(np.abs(values) == 1.0):
        raise UsageError('{}: watermark entries must be -1 or +1'.format(path))
    return values


def _write_text(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, 'w') as f:
            f.write(text)


def _write_vector(values, out):
    _write_text(''.join('{}\n'.format(format(v, '.17g')) for v in values), out)


def _float_list(text):
    try:
        return [float(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError('expected comma separated numbers, got {!r}'.format(
            text)) from None


def _int_list(text):
    try:
        return [int(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError('expected comma separated integers, got {!r}'.format(
            text)) from None


def _write_curve(curve, path, units):
    scale = np.log(2.0) if units == 'bits' else 1.0
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(['lambda', 'exponent'])
        for lam, value in curve.rows():
            writer.writerow([format(lam / scale, '.17g'), format(value / scale, '.17g')])


def _curve_path(out, name):
    os.makedirs(out, exist_ok=True)
    return os.path.join(out, '{}.csv'.format(name))


def _check_operating_point(de, sigma2):
    if not (de > 0 and sigma2 > 0):
        raise UsageError('--de and --sigma2 must be positive, got {} and {}'.format(de, sigma2))


def cmd_exponents(args):
    _check_operating_point(args.de, args.sigma2)
    if args.lambda_max is not None and not args.lambda_max > 0:
        raise UsageError('--lambda-max must be positive')
    if 'optimal' in args.embedder:
        raise UsageError('the optimal embedder has no closed-form exponent; choose from '
                         '{}'.format(CURVE_EMBEDDERS))
    for name in args.embedder:
        curve = exponent_curve(name, args.de, args.sigma2, lam_max=args.lambda_max,
                               samples=args.samples, workers=args.workers)
        _write_curve(curve, _curve_path(args.out, name), args.units)
        logger.info("cli: %s curve written, zero crossing at %s", name, curve.zero_crossing())
    return EXIT_OK


def cmd_sweep(args):
    _check_operating_point(args.de, 1.0)
    for ratio in SWEEP_RATIOS:
        sigma2 = ratio * args.de
        for name in CURVE_EMBEDDERS:
            curve = exponent_curve(name, args.de, sigma2, samples=args.samples,
                                   workers=args.workers)
            path = _curve_path(args.out, 'ratio{}_{}'.format(format(ratio, 'g'), name))
            _write_curve(curve, path, args.units)
    return EXIT_OK


def _sim_config(args):
    attack = None if args.noise is None else AwgnAttack(args.noise)
    return SimConfig(args.n_list, args.trials, args.sigma2, EmbedderKind(args.embedder, args.de),
                     args.detector, args.lam, args.seed, attack=attack)


def cmd_simulate(args):
    cfg = _sim_config(args)
    if args.fp_only:
        report = false_positive_check(cfg, workers=args.workers)
        lines = ['n,trials,errors,p_hat,exponent,target,satisfied']
        lines += ['{},{},{},{},{},{},{}'.format(r.n, r.trials, r.errors, format(r.p_hat, '.17g'),
                                                format(r.exponent, '.17g'),
                                                format(r.target, '.17g'), r.satisfied)
                  for r in report.rows]
        lines.append('# cap ln sin(theta) = {}'.format(format(report.cap_log_ratio, '.17g')))
        lines.append('# {}'.format(report.message))
        _write_text('\n'.join(lines) + '\n', args.out)
        return EXIT_OK

    result = run_trials(cfg, workers=args.workers)
    out = sys.stdout if args.out is None else args.out
    if args.format == 'json':
        write_json(result, out)
    else:
        write_csv(result, out)
    return EXIT_OK


def cmd_embed(args):
    x = _read_vector(args.x)
    u = _read_vector(args.u, watermark=True)
    if len(x) != len(u):
        raise UsageError('covertext and watermark lengths differ: {} vs {}'.format(len(x), len(u)))
    _write_vector(embed(EmbedderKind(args.embedder, args.de), x, u), args.out)
    return EXIT_OK


def cmd_detect(args):
    u = _read_vector(args.u, watermark=True)
    y = _read_vector(args.y)
    if len(y) != len(u):
        raise UsageError('watermark and stegotext lengths differ: {} vs {}'.format(len(u), len(y)))
    if args.detector == 'mi':
        decision = detect_mi(u, y, args.lam)
        statistic = emp_mutual_info_gauss(u, y)
    else:
        decision = detect_corr(u, y, args.lam)
        statistic = normalized_correlation(u, y)
    _write_text('{} {}\n'.format(decision.value, format(statistic, '.17g')), args.out)
    return EXIT_OK


def _default_watermark(n):
    return [1 if i % 2 == 0 else -1 for i in range(n)]


def cmd_attack_demo(args):
    if args.n > ATTACK_DEMO_MAX_N:
        raise CapExceededError('attack-demo: n', args.n, ATTACK_DEMO_MAX_N)
    if args.alphabet_size > MAX_EXACT_ALPHABET:
        raise CapExceededError('attack-demo: alphabet size', args.alphabet_size,
                               MAX_EXACT_ALPHABET)
    alphabet = Alphabet.range(args.alphabet_size)
    src = (MemorylessSource.uniform(alphabet) if args.source is None
           else MemorylessSource(alphabet, args.source))
    u = _default_watermark(args.n) if args.watermark is None else args.watermark
    if len(u) != args.n or any(v not in (-1, 1) for v in u):
        raise UsageError('--watermark must list {} entries of -1 or +1'.format(args.n))
    budget = AttackBudget(args.distortion, args.da)
    channel = ExchangeableWorstCase(budget, args.n, alphabet)
    seqs = sequences(alphabet, args.n)

    lines = ['# worst-case exchangeable attack, n={} |A|={} D_a={} distortion={}'.format(
        args.n, alphabet.size, args.da, budget.name)]
    lines.append('# c_n per y composition')
    for counts in conditional_types([args.n], alphabet.size):
        composition = counts[0]
        y = np.repeat(np.arange(alphabet.size), composition)
        lines.append('{} c_n={} feasible_types={}'.format(
            composition.tolist(), format(channel.c_n(y), '.17g'),
            len(channel.feasible_types(composition))))

    if len(seqs) <= 64:
        lines.append('# W_n* table, nonzero entries')
        table = channel.table()
        for row, y in enumerate(seqs):
            entries = ['{}:{}'.format(''.join(map(str, seqs[col])), format(table[row, col], '.6g'))
                       for col in np.flatnonzero(table[row])]
            lines.append('{} -> {}'.format(''.join(map(str, y)), ' '.join(entries)))
    else:
        lines.append('# W_n* table omitted, {} sequences'.format(len(seqs)))

    lines.append('# region membership per conditional type T(z|u)')
    u_counts = np.bincount(Alphabet.watermark().index_of(u), minlength=2)
    threshold = args.lam + type_slack(args.n, alphabet.size) / args.n
    for counts in conditional_types(u_counts, alphabet.size):
        lhs = counts_mutual_information(counts) + inner_divergence(src, counts.sum(axis=0), budget)
        lines.append('{} lhs={} {}'.format(counts.tolist(), format(lhs, '.10g'),
                                           'H1' if lhs >= threshold else 'H0'))

    probability, bound = worstcase_false_positive(src, u, args.lam, budget)
    lines.append('# exact P_fp={} bound={} {}'.format(
        format(probability, '.10g'), format(bound, '.10g'),
        'holds' if probability <= bound else 'VIOLATED'))
    _write_text('\n'.join(lines) + '\n', args.out)
    return EXIT_OK


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError('expected a positive integer, got {}'.format(text))
    return value


def build_parser():
    parser = argparse.ArgumentParser(
        prog='wmdetect', description='Watermark detection error exponents and simulations')
    parser.add_argument('--version', action='version', version=__version__)
    parser.add_argument('-v', '--verbose', action='count', default=0,
                        help='-v for progress, -vv for debug output')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('exponents', help='false-negative exponent curves')
    p.add_argument('--de', type=float, required=True)
    p.add_argument('--sigma2', type=float, default=1.0)
    p.add_argument('--embedder', action='append', required=True, choices=ALL_EMBEDDERS)
    p.add_argument('--lambda-max', type=float)
    p.add_argument('--samples', type=_positive_int, default=CURVE_SAMPLES)
    p.add_argument('--units', choices=['nats', 'bits'], default='nats')
    p.add_argument('--workers', type=_positive_int, default=1)
    p.add_argument('--out', default='.', help='output directory')
    p.set_defaults(handler=cmd_exponents)

    p = sub.add_parser('sweep', help='curves for sigma2/D_e in {0.1, 1, 10}')
    p.add_argument('--de', type=float, default=1.0)
    p.add_argument('--samples', type=_positive_int, default=CURVE_SAMPLES)
    p.add_argument('--units', choices=['nats', 'bits'], default='nats')
    p.add_argument('--workers', type=_positive_int, default=1)
    p.add_argument('--out', required=True, help='output directory')
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser('simulate', help='Monte Carlo error probabilities')
    p.add_argument('--n-list', type=_int_list, required=True)
    p.add_argument('--trials', type=_positive_int, default=10 * TRIAL_BLOCK)
    p.add_argument('--sigma2', type=float, default=1.0)
    p.add_argument('--embedder', choices=ALL_EMBEDDERS, required=True)
    p.add_argument('--de', type=float, required=True)
    p.add_argument('--detector', choices=['mi', 'corr'], required=True)
    p.add_argument('--lambda', dest='lam', type=float, required=True)
    p.add_argument('--seed', type=int, required=True)
    p.add_argument('--noise', type=float, help='variance of an additive Gaussian attack')
    p.add_argument('--fp-only', action='store_true', help='false-positive check only')
    p.add_argument('--workers', type=_positive_int, default=1)
    p.add_argument('--format', choices=['csv', 'json'], default='csv')
    p.add_argument('--out')
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser('embed', help='embed a watermark into a covertext file')
    p.add_argument('--x', required=True)
    p.add_argument('--u', required=True)
    p.add_argument('--embedder', choices=ALL_EMBEDDERS, required=True)
    p.add_argument('--de', type=float, required=True)
    p.add_argument('--out')
    p.set_defaults(handler=cmd_embed)

    p = sub.add_parser('detect', help='decide H0/H1 for a stegotext file')
    p.add_argument('--u', required=True)
    p.add_argument('--y', required=True)
    p.add_argument('--lambda', dest='lam', type=float, required=True)
    p.add_argument('--detector', choices=['mi', 'corr'], default='mi')
    p.add_argument('--out')
    p.set_defaults(handler=cmd_detect)

    p = sub.add_parser('attack-demo', help='exact worst-case attack enumeration')
    p.add_argument('--n', type=_positive_int, required=True)
    p.add_argument('--alphabet-size', type=_positive_int, default=2)
    p.add_argument('--lambda', dest='lam', type=float, required=True)
    p.add_argument('--da', type=float, default=0.0)
    p.add_argument('--distortion', choices=['hamming', 'squared'], default='hamming')
    p.add_argument('--source', type=_float_list, help='covertext pmf, default uniform')
    p.add_argument('--watermark', type=_int_list, help='comma separated +-1 entries')
    p.add_argument('--out')
    p.set_defaults(handler=cmd_attack_demo)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code

    level = [logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)]
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s')

    try:
        return args.handler(args)
    except UsageError as e:
        print('wmdetect {}: {}'.format(args.command, e), file=sys.stderr)
        return EXIT_USAGE
    except CapExceededError as e:
        print('wmdetect {}: {}'.format(args.command, e), file=sys.stderr)
        return EXIT_CAP
    except ValueError as e:
        print('wmdetect {}: {}'.format(args.command, e), file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == '__main__':
    sys.exit(main())
