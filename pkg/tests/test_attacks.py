import itertools
import zlib

import numpy as np
import pytest
from scipy.optimize import minimize
from scipy.special import rel_entr

from wmdetect.attacks import (AttackBudget, ExchangeableWorstCase, MemorylessAttack,
                              embed_memoryless_attack, embed_worstcase, false_positive_table,
                              inner_divergence, memoryless_attack_accepts,
                              memoryless_attack_embedding, output_marginal,
                              random_wm_worstcase_accepts, region_mask, sequences,
                              worstcase_accepts, worstcase_embedding, worstcase_false_positive,
                              wstar_prob, wstar_table)
from wmdetect.detect_discrete import (DetectorConfig, EmbedConstraint, Variant,
                                      lambda_star_accepts, search_embedding)
from wmdetect.empirical import (Alphabet, MemorylessSource, conditional_mutual_information,
                                kl_divergence, mutual_information, empirical_joint)
from wmdetect.errors import CapExceededError, InfeasibleError
from wmdetect.hypothesis import Decision

WM = Alphabet.watermark()
BIN = Alphabet.range(2)
TERN = Alphabet.range(3)
UNIFORM = MemorylessSource.uniform(BIN)
SKEWED = MemorylessSource(BIN, [0.7, 0.3])


def test_memoryless_attack_validation():
    with pytest.raises(ValueError, match='square matrix'):
        MemorylessAttack([[1.0, 0.0]])
    with pytest.raises(ValueError, match='not 1'):
        MemorylessAttack([[0.5, 0.4], [0.0, 1.0]])
    with pytest.raises(ValueError, match='nonnegative'):
        MemorylessAttack([[1.5, -0.5], [0.0, 1.0]])
    with pytest.raises(ValueError, match='crossover probability'):
        MemorylessAttack.binary_symmetric(1.5)
    W = MemorylessAttack.identity(BIN)
    with pytest.raises(ValueError):
        W.W[0, 0] = 0.5


def test_memoryless_attack_apply():
    rng = np.random.default_rng(40)
    y = rng.integers(0, 2, size=50)
    assert np.array_equal(MemorylessAttack.binary_symmetric(0.0).apply(y, rng), y)
    assert np.array_equal(MemorylessAttack.binary_symmetric(1.0).apply(y, rng), 1 - y)
    z = MemorylessAttack.binary_symmetric(0.2).apply(np.zeros(20000, dtype=int), rng)
    assert z.mean() == pytest.approx(0.2, abs=0.02)


def test_output_marginal():
    P_X = MemorylessSource(BIN, [0.8, 0.2])
    Q = output_marginal(P_X, MemorylessAttack.binary_symmetric(0.1))
    assert Q.pmf.tolist() == pytest.approx([0.74, 0.26])
    assert output_marginal(P_X, MemorylessAttack.identity(BIN)).pmf.tolist() == pytest.approx(
        [0.8, 0.2])
    src = MemorylessSource(TERN, [0.6, 0.3, 0.1])
    assert output_marginal(src, MemorylessAttack.uniform(TERN)).pmf.tolist() == pytest.approx(
        [1 / 3] * 3)
    with pytest.raises(ValueError, match='does not match'):
        output_marginal(src, MemorylessAttack.identity(BIN))


def test_memoryless_region_with_identity_channel_is_known_source_region():
    rng = np.random.default_rng(41)
    Q = output_marginal(SKEWED, MemorylessAttack.identity(BIN))
    for lam in (0.1, 0.4, 0.8):
        for _ in range(30):
            u = rng.choice([-1, 1], size=15)
            z = np.where(rng.random(15) < 0.6, (u + 1) // 2, rng.integers(0, 2, size=15))
            assert (memoryless_attack_accepts(Q, u, z, lam)
                    is lambda_star_accepts(SKEWED, u, z, DetectorConfig(lam)))


def test_memoryless_region_examples():
    u = np.repeat([1, -1], 100)
    assert memoryless_attack_accepts(UNIFORM, u, np.tile([0, 1], 100), 0.1) is Decision.H0
    u = np.array([1, -1] * 100)
    assert memoryless_attack_accepts(UNIFORM, u, (u + 1) // 2, 0.6) is Decision.H1


def test_wstar_rows_are_distributions():
    for n in range(1, 6):
        for da in (0.0, 0.25, 1.0):
            budget = AttackBudget('hamming', da)
            table = wstar_table(BIN, n, budget)
            assert table.sum(axis=1) == pytest.approx(np.ones(2 ** n), abs=1e-12)
            channel = ExchangeableWorstCase(budget, n, BIN)
            for y in sequences(BIN, n):
                c = channel.c_n(y)
                assert (n + 1) ** -4 <= c <= 1.0


def test_wstar_with_zero_budget_is_identity():
    table = wstar_table(BIN, 4, AttackBudget('hamming', 0.0))
    assert np.array_equal(table, np.eye(16))
    assert wstar_prob([0, 1, 1], [0, 1, 1], AttackBudget('hamming', 0.0), BIN) == 1.0
    assert wstar_prob([0, 1, 1], [1, 1, 1], AttackBudget('hamming', 0.0), BIN) == 0.0


def test_wstar_unconstrained_is_uniform_over_types():
    budget = AttackBudget('hamming', 1.0)
    channel = ExchangeableWorstCase(budget, 2, BIN)
    assert channel.c_n([0, 1]) == pytest.approx(1 / 4)
    assert channel.c_n([0, 0]) == pytest.approx(1 / 3)
    assert channel.prob([0, 1], [1, 0]) == pytest.approx(1 / 4)
    assert channel.prob([0, 0], [0, 1]) == pytest.approx(1 / 6)
    assert channel.prob([0, 0], [1, 0]) == pytest.approx(1 / 6)


def test_wstar_prob_normalizes_over_the_whole_alphabet():
    budget = AttackBudget('hamming', 1.0)
    # y = 00 never shows symbol 1, yet c_n counts the types that use it
    assert wstar_prob([0, 0], [0, 0], budget, BIN) == pytest.approx(1 / 3)
    for y in sequences(BIN, 3):
        row = sum(wstar_prob(y, z, budget, BIN) for z in sequences(BIN, 3))
        assert row == pytest.approx(1.0, abs=1e-12)


def test_wstar_table_matches_pointwise_probabilities():
    budget = AttackBudget('hamming', 0.34)
    table = wstar_table(TERN, 3, budget)
    seqs = sequences(TERN, 3)
    for i, y in enumerate(seqs):
        for k, z in enumerate(seqs):
            assert table[i, k] == pytest.approx(wstar_prob(y, z, budget, alphabet=TERN))
    # exchangeable: constant on conditional types
    assert wstar_prob([0, 1, 2], [1, 1, 2], budget, TERN) == wstar_prob([2, 0, 1], [2, 1, 1],
                                                                        budget, TERN)


def test_wstar_errors():
    with pytest.raises(CapExceededError):
        ExchangeableWorstCase(AttackBudget('hamming', 0.1), 13, BIN)
    with pytest.raises(CapExceededError):
        wstar_table(Alphabet.range(4), 2, AttackBudget('hamming', 0.1))
    with pytest.raises(ValueError, match='length mismatch'):
        wstar_prob([0, 1], [0], AttackBudget('hamming', 0.1), BIN)
    with pytest.raises(TypeError):
        wstar_prob([0, 0], [0, 0], AttackBudget('hamming', 1.0))
    channel = ExchangeableWorstCase(AttackBudget(lambda a, b: 1.0, 0.5), 3, BIN)
    with pytest.raises(InfeasibleError):
        channel.c_n([0, 1, 0])


def _index(seqs, size):
    return seqs @ (size ** np.arange(seqs.shape[1] - 1, -1, -1))


@pytest.mark.parametrize('n', [3, 4, 5])
def test_false_positive_is_invariant_under_joint_permutation(n):
    rng = np.random.default_rng(42 + n)
    seqs = sequences(BIN, n)
    table = rng.integers(0, 10, size=(2 ** n, 2 ** n)).astype(np.int64)
    px_weights = np.prod(np.array([3, 1])[seqs], axis=1).astype(np.int64)
    pu_weights = np.ones(2 ** n, dtype=np.int64)
    mask = region_mask(WM, BIN, n, lambda c: zlib.crc32(c.tobytes()) % 3 == 0)
    reference = false_positive_table(table, mask, px_weights, pu_weights)
    for _ in range(5):
        perm = _index(seqs[:, rng.permutation(n)], 2)
        permuted = table[np.ix_(perm, perm)]
        assert false_positive_table(permuted, mask, px_weights, pu_weights) == reference


def test_region_mask_depends_on_joint_type_only():
    mask = region_mask(WM, BIN, 3, lambda c: c[1, 1] >= 2)
    seqs = sequences(BIN, 3)
    for i, u in enumerate(seqs):
        for k, z in enumerate(seqs):
            assert mask[i, k] == (np.sum((u == 1) & (z == 1)) >= 2)


@pytest.mark.parametrize('src', [UNIFORM, SKEWED])
@pytest.mark.parametrize('da', [0.0, 0.2])
def test_worstcase_false_positive_bound(src, da):
    rng = np.random.default_rng(45)
    for n in (3, 4, 5, 6):
        u = rng.choice([-1, 1], size=n)
        for lam in (0.1, 0.3, 0.6):
            probability, bound = worstcase_false_positive(src, u, lam, AttackBudget('hamming', da))
            assert 0.0 <= probability <= 1.0 + 1e-12
            assert probability <= bound
            assert bound == pytest.approx((n + 1) ** 2 * np.exp(-n * lam))


def test_inner_divergence_zero_budget_is_plain_divergence():
    budget = AttackBudget('hamming', 0.0)
    for counts in ([4, 2], [6, 0], [1, 5]):
        expected = kl_divergence(np.array(counts) / 6, SKEWED.pmf)
        for method in ('auto', 'grid', 'frank_wolfe'):
            assert inner_divergence(SKEWED, counts, budget, method=method) == pytest.approx(
                expected, abs=1e-9)


def test_inner_divergence_vanishes_for_a_large_budget():
    for method in ('auto', 'frank_wolfe'):
        assert inner_divergence(SKEWED, [0, 6], AttackBudget('hamming', 1.0), method) == 0.0
        assert inner_divergence(MemorylessSource(TERN, [0.5, 0.3, 0.2]), [4, 0, 0],
                                AttackBudget('squared', 4.0), method) == 0.0


def test_inner_divergence_infeasible():
    always = AttackBudget(lambda a, b: 1.0, 0.5)
    for method in ('auto', 'grid', 'frank_wolfe'):
        assert inner_divergence(SKEWED, [3, 3], always, method) == np.inf
    point = MemorylessSource(BIN, [1.0, 0.0])
    assert inner_divergence(point, [1, 1], AttackBudget('hamming', 0.0)) == np.inf
    assert inner_divergence(point, [1, 1], AttackBudget('hamming', 0.5)) == pytest.approx(0.0)


def test_inner_divergence_validation():
    with pytest.raises(ValueError, match='not allowed for method'):
        inner_divergence(SKEWED, [1, 1], AttackBudget(), method='simplex')
    with pytest.raises(ValueError, match='nonnegative counts'):
        inner_divergence(SKEWED, [1, 1, 1], AttackBudget())
    with pytest.raises(ValueError, match='nonnegative counts'):
        inner_divergence(SKEWED, [0, 0], AttackBudget())


def _continuous_minimum(P_X, q, d, da):
    size = len(q)

    def objective(flat):
        p = flat.reshape(size, size).sum(axis=1)
        return float(np.sum(rel_entr(p, P_X.pmf)))

    def gradient(flat):
        p = flat.reshape(size, size).sum(axis=1)
        g = np.log(np.maximum(p, 1e-300) / P_X.pmf) + 1.0
        return np.repeat(g, size)

    constraints = [
        {'type': 'eq', 'fun': lambda flat: flat.reshape(size, size).sum(axis=0) - q},
        {'type': 'ineq', 'fun': lambda flat: da - float(np.sum(flat * d.ravel()))},
    ]
    start = np.diag(q).ravel()
    res = minimize(objective, start, jac=gradient, method='SLSQP', bounds=[(0, 1)] * size ** 2,
                   constraints=constraints, options={'ftol': 1e-14, 'maxiter': 1000})
    return res.fun


@pytest.mark.parametrize('src,counts,da', [
    (SKEWED, [1, 5], 0.2),
    (SKEWED, [0, 6], 0.3),
    (UNIFORM, [6, 0], 0.25),
    (MemorylessSource(TERN, [0.5, 0.3, 0.2]), [1, 1, 4], 0.3),
    (MemorylessSource(TERN, [0.2, 0.2, 0.6]), [5, 1, 0], 0.15),
])
def test_inner_divergence_against_grid_and_continuous_oracles(src, counts, da):
    budget = AttackBudget('hamming', da)
    fw = inner_divergence(src, counts, budget, method='frank_wolfe')
    grid = inner_divergence(src, counts, budget, method='grid')
    assert fw <= grid + 1e-8
    assert inner_divergence(src, counts, budget) <= grid + 1e-8
    q = np.array(counts) / sum(counts)
    oracle = _continuous_minimum(src, q, budget.matrix(src.alphabet), da)
    assert fw == pytest.approx(oracle, abs=1e-6)


def test_worstcase_region_with_zero_budget():
    rng = np.random.default_rng(46)
    budget = AttackBudget('hamming', 0.0)
    threshold_slack = 2 * np.log(11) / 10
    for lam in (0.2, 0.5):
        for _ in range(30):
            u = rng.choice([-1, 1], size=10)
            z = np.where(rng.random(10) < 0.7, (u + 1) // 2, rng.integers(0, 2, size=10))
            j = empirical_joint(u, z, WM, BIN)
            lhs = mutual_information(j) + kl_divergence(j.col_marginal, SKEWED.pmf)
            decision = worstcase_accepts(SKEWED, u, z, lam, budget)
            assert bool(decision) == (lhs >= lam + threshold_slack)
            # the attacked threshold sits above the attack-free one
            if decision:
                assert lambda_star_accepts(SKEWED, u, z, DetectorConfig(lam)) is Decision.H1


def test_random_watermark_region():
    rng = np.random.default_rng(47)
    P_U = MemorylessSource.uniform(WM)
    budget = AttackBudget('hamming', 0.2)
    u = np.array([1, -1] * 5)
    for lam in (0.05, 0.2, 0.5):
        for _ in range(10):
            z = rng.integers(0, 2, size=10)
            assert (random_wm_worstcase_accepts(SKEWED, P_U, u, z, lam, budget)
                    is worstcase_accepts(SKEWED, u, z, lam, budget))

    u = np.ones(10, dtype=int)
    for lam in (0.7, 0.9, 1.2):
        for _ in range(10):
            z = rng.integers(0, 2, size=10)
            assert (random_wm_worstcase_accepts(SKEWED, P_U, u, z, lam, budget)
                    is worstcase_accepts(SKEWED, u, z, lam - np.log(2), budget))


def test_worstcase_decisions_depend_on_joint_type_only():
    rng = np.random.default_rng(48)
    P_U = MemorylessSource(WM, [0.4, 0.6])
    budget = AttackBudget('hamming', 0.15)
    for _ in range(20):
        u = rng.choice([-1, 1], size=9)
        z = rng.integers(0, 2, size=9)
        perm = rng.permutation(9)
        assert (worstcase_accepts(SKEWED, u, z, 0.3, budget)
                is worstcase_accepts(SKEWED, u[perm], z[perm], 0.3, budget))
        assert (random_wm_worstcase_accepts(SKEWED, P_U, u, z, 0.3, budget)
                is random_wm_worstcase_accepts(SKEWED, P_U, u[perm], z[perm], 0.3, budget))


def _fixture(seed, n=6):
    rng = np.random.default_rng(seed)
    return rng.integers(0, 2, size=n), rng.choice([-1, 1], size=n)


def test_attack_embedders_keep_covertext_without_budget():
    x, u = _fixture(50)
    c = EmbedConstraint('hamming', 0.0)
    W = MemorylessAttack.binary_symmetric(0.1)
    assert np.array_equal(embed_memoryless_attack(SKEWED, W, x, u, 0.5, c), x)
    assert np.array_equal(embed_worstcase(x, u, 0.5, c, AttackBudget('hamming', 0.2), src=SKEWED),
                          x)


def test_identity_attack_reduces_to_attack_free_embedder():
    for seed in (51, 52, 53):
        x, u = _fixture(seed)
        c = EmbedConstraint('hamming', 0.34)
        res = memoryless_attack_embedding(SKEWED, MemorylessAttack.identity(BIN), x, u, 5.0, c)
        plain = search_embedding(SKEWED, x, u, c)
        assert np.array_equal(res.counts, plain.counts)
        assert res.value == pytest.approx(0.0, abs=1e-12)


def test_zero_attack_budget_reduces_to_universal_embedder():
    for seed in (54, 55, 56):
        x, u = _fixture(seed)
        c = EmbedConstraint('hamming', 0.34)
        for lam in (0.3, 0.8):
            res = worstcase_embedding(x, u, lam, c, AttackBudget('hamming', 0.0), alphabet=BIN)
            plain = search_embedding(UNIFORM, x, u, c, variant=Variant.UNIVERSAL)
            assert np.array_equal(res.counts, plain.counts)


def _brute_force(u, y, accept_outside, value):
    best = np.inf
    for z in itertools.product(range(2), repeat=len(y)):
        z = np.array(z)
        if accept_outside(z):
            best = min(best, value(z))
    return best


def _tensor(u, y, z):
    t = np.zeros((2, 2, 2), dtype=np.int64)
    np.add.at(t, (WM.index_of(u), y, z), 1)
    return t


def test_memoryless_embedding_value_matches_brute_force():
    W = MemorylessAttack.binary_symmetric(0.1)
    Q = output_marginal(SKEWED, W)
    lam = 1.0
    for seed in (57, 58):
        x, u = _fixture(seed)
        res = memoryless_attack_embedding(SKEWED, W, x, u, lam, EmbedConstraint('hamming', 0.34))
        y = res.y
        n = len(y)

        def outside(z):
            return memoryless_attack_accepts(Q, u, z, lam) is Decision.H0

        def value(z):
            total = conditional_mutual_information(_tensor(u, y, z))
            for a in range(2):
                rows = y == a
                if rows.any():
                    p = np.bincount(z[rows], minlength=2) / rows.sum()
                    total += rows.sum() / n * kl_divergence(p, W.W[a])
            return total

        assert res.value == pytest.approx(_brute_force(u, y, outside, value), abs=1e-12)


def test_worstcase_embedding_value_matches_brute_force():
    budget = AttackBudget('hamming', 0.2)
    lam = 0.8
    for seed in (59, 60):
        x, u = _fixture(seed)
        res = worstcase_embedding(x, u, lam, EmbedConstraint('hamming', 0.34), budget,
                                  src=SKEWED)
        y = res.y

        def outside(z):
            return (budget.feasible(y, z)
                    and worstcase_accepts(SKEWED, u, z, lam, budget) is Decision.H0)

        def value(z):
            return conditional_mutual_information(_tensor(u, y, z))

        assert res.value == pytest.approx(_brute_force(u, y, outside, value), abs=1e-12)
        assert res.objective == pytest.approx(
            mutual_information(empirical_joint(u, y, WM, BIN))
            + kl_divergence(np.bincount(y, minlength=2) / len(y), SKEWED.pmf))


def test_attack_embedder_errors():
    x, u = _fixture(61)
    budget = AttackBudget('hamming', 0.2)
    with pytest.raises(ValueError, match='alphabet is required'):
        embed_worstcase(x, u, 0.5, EmbedConstraint(), budget)
    with pytest.raises(InfeasibleError):
        embed_worstcase(x, u, 0.5, EmbedConstraint(lambda a, b: 1.0, 0.5), budget, src=SKEWED)
    with pytest.raises(CapExceededError):
        embed_worstcase(np.zeros(13, dtype=int), np.ones(13, dtype=int), 0.5, EmbedConstraint(),
                        budget, src=SKEWED)
    with pytest.raises(CapExceededError, match='type pairs'):
        worstcase_embedding(x, u, 0.5, EmbedConstraint('hamming', 1.0), budget, src=SKEWED,
                            max_pairs=10)
