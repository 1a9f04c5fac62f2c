import numpy as np
import pytest
from scipy.optimize import minimize, minimize_scalar

from wmdetect.errors import NumericError
from wmdetect.gaussian import (Embedder, EmbedderKind, EmbedStats,
                               conditional_differential_entropy, detect_batch, detect_corr,
                               detect_mi, differential_entropy, embed, embed_batch,
                               embed_coefficients, emp_mutual_info_gauss, normalized_correlation,
                               objective_R, optimal_coefficients, predicted_correlation,
                               project_to_span, stats)
from wmdetect.hypothesis import Decision

KINDS = [Embedder.OPTIMAL, Embedder.IMPROVED_SIGN, Embedder.SIGN, Embedder.ADDITIVE]


def random_pair(rng, n, sigma=1.0):
    return rng.normal(scale=sigma, size=n), rng.choice([-1.0, 1.0], size=n)


def test_stats_examples():
    u = np.array([1, -1, 1, 1, -1, -1], dtype=float)
    st = stats(u, u)
    assert (st.alpha2, st.rho, st.n) == (1.0, 1.0, 6)
    st = stats(-u, u)
    assert (st.alpha2, st.rho) == (1.0, -1.0)
    x = np.sqrt(2) * np.array([1, 1, 1, -1, -1, -1], dtype=float)
    u = np.array([1, 1, -1, 1, 1, -1], dtype=float)
    st = stats(x, u)
    assert st.alpha2 == pytest.approx(2.0)
    assert st.rho == pytest.approx(0.0, abs=1e-15)


def test_stats_validation():
    with pytest.raises(ValueError, match='must be -1 or \\+1'):
        stats([1.0, 2.0], [1, 0])
    with pytest.raises(ValueError, match='length mismatch'):
        stats([1.0, 2.0], [1])
    with pytest.raises(ValueError, match='exceeds alpha'):
        EmbedStats(1.0, 2.0)
    with pytest.raises(ValueError, match='D_e must be finite'):
        EmbedderKind('sign', -1.0)
    with pytest.raises(ValueError, match='not allowed'):
        EmbedderKind('spread', 1.0)
    assert EmbedderKind('improved-sign', 1.0).kind is Embedder.IMPROVED_SIGN


def test_mutual_information_examples():
    u = np.array([1, -1, 1, -1], dtype=float)
    v = np.array([1, 1, -1, -1], dtype=float)
    assert emp_mutual_info_gauss(u, -3.0 * u) == np.inf
    assert emp_mutual_info_gauss(u, v) == 0.0
    for lam in (0.05, 0.3, 1.2):
        y = np.sqrt(-np.expm1(-2 * lam)) * u + np.exp(-lam) * v
        assert emp_mutual_info_gauss(u, y) == pytest.approx(lam, rel=1e-9)
    with pytest.raises(NumericError):
        emp_mutual_info_gauss(u, np.zeros(4))


def test_mutual_information_is_an_entropy_difference():
    rng = np.random.default_rng(19)
    for _ in range(20):
        x, u = random_pair(rng, 30)
        y = x + rng.uniform(0.1, 1.0) * u
        difference = differential_entropy(y) - conditional_differential_entropy(u, y)
        assert difference == pytest.approx(emp_mutual_info_gauss(u, y), rel=1e-9)
    u = np.array([1, -1, 1, -1], dtype=float)
    assert differential_entropy(u) == pytest.approx(0.5 * np.log(2 * np.pi * np.e))
    assert conditional_differential_entropy(u, 2.0 * u) == -np.inf


def test_detectors_at_zero_threshold():
    u = np.array([1, -1, 1, -1], dtype=float)
    v = np.array([1, 1, -1, -1], dtype=float)
    assert detect_corr(u, u + 0.1 * v, 0.0) is Decision.H1
    assert detect_corr(u, -u + 0.1 * v, 0.0) is Decision.H0
    assert detect_mi(u, -u + 0.1 * v, 0.0) is Decision.H1
    assert detect_mi(u, v, 0.0) is Decision.H0
    for lam in (0.5, 5.0, 50.0):
        assert detect_mi(u, u, lam) is Decision.H1
        assert detect_corr(u, u, lam) is Decision.H1
    with pytest.raises(ValueError, match='lambda must be nonnegative'):
        detect_mi(u, u, -0.1)


def test_detect_mi_boundary_follows_the_inverse_relation():
    u = np.array([1, -1, 1, -1], dtype=float)
    v = np.array([1, 1, -1, -1], dtype=float)
    lam = 0.4
    r2 = -np.expm1(-2 * lam)
    for shift, expected in [(1e-6, Decision.H1), (-1e-6, Decision.H0)]:
        y = np.sqrt(r2 + shift) * u + np.sqrt(1 - r2 - shift) * v
        assert detect_mi(u, y, lam) is expected
        assert detect_corr(u, y, lam) is expected


def test_detect_batch_matches_scalar_detectors():
    rng = np.random.default_rng(20)
    U = rng.choice([-1.0, 1.0], size=(200, 30))
    Y = rng.normal(size=(200, 30)) + 0.3 * U
    for lam in (0.0, 0.05, 0.2):
        mi = detect_batch('mi', U, Y, lam)
        corr = detect_batch('corr', U, Y, lam)
        assert mi.tolist() == [bool(detect_mi(u, y, lam)) for u, y in zip(U, Y)]
        assert corr.tolist() == [bool(detect_corr(u, y, lam)) for u, y in zip(U, Y)]
    with pytest.raises(ValueError, match='not allowed for detector'):
        detect_batch('energy', U, Y, 0.1)


def test_optimal_erases_covertext_when_budget_allows():
    a, b = optimal_coefficients(EmbedStats(1.0, 0.5), 1.0)
    assert a == 0.0
    assert b == pytest.approx(1.0)


def test_optimal_erasure_with_negative_correlation_stays_nonzero():
    # upper root rho + sqrt(D_e - residual) vanishes here
    a, b = optimal_coefficients(EmbedStats(1.0, -0.5), 1.0)
    assert a == 0.0
    assert b != 0.0
    assert predicted_correlation(a, b, EmbedStats(1.0, -0.5)) == pytest.approx(1.0)


def test_sign_embedder_with_negative_correlation():
    rng = np.random.default_rng(21)
    x, u = random_pair(rng, 50)
    x -= 2 * u * max(np.dot(x, u) / 50, 0.0) + 0.1 * u
    assert stats(x, u).rho < 0
    y = embed(EmbedderKind('sign', 0.5), x, u)
    assert np.allclose(y, x - np.sqrt(0.5) * u)
    assert np.dot(y - x, y - x) == pytest.approx(50 * 0.5)


def test_additive_and_sign_agree_for_positive_correlation():
    rng = np.random.default_rng(22)
    x, u = random_pair(rng, 40)
    x += 0.5 * u
    assert stats(x, u).rho >= 0
    assert np.array_equal(embed(EmbedderKind('sign', 0.3), x, u),
                          embed(EmbedderKind('additive', 0.3), x, u))


@pytest.mark.parametrize('kind', KINDS)
def test_zero_budget_returns_covertext(kind):
    rng = np.random.default_rng(23)
    x, u = random_pair(rng, 25)
    assert np.allclose(embed(EmbedderKind(kind, 0.0), x, u), x)


def test_embedders_meet_budget_and_dominate_in_order():
    rng = np.random.default_rng(24)
    for _ in range(300):
        n = int(rng.integers(4, 64))
        x, u = random_pair(rng, n, sigma=rng.uniform(0.3, 2.0))
        de = rng.uniform(0.01, 3.0)
        scores = []
        for kind in KINDS:
            y = embed(EmbedderKind(kind, de), x, u)
            assert np.dot(y - x, y - x) <= n * de * (1 + 1e-9) + 1e-12
            scores.append(objective_R(u, y))
        for better, worse in zip(scores, scores[1:]):
            assert better >= worse * (1 - 1e-9)


def test_sign_correlation_identity():
    rng = np.random.default_rng(25)
    for _ in range(50):
        x, u = random_pair(rng, 32)
        de = rng.uniform(0.05, 2.0)
        st = stats(x, u)
        y = embed(EmbedderKind('sign', de), x, u)
        t = abs(st.rho) + np.sqrt(de)
        expected = t * t / (t * t + st.alpha2 - st.rho ** 2)
        assert normalized_correlation(u, y) ** 2 == pytest.approx(expected, rel=1e-10)


def test_embed_batch_matches_embed():
    rng = np.random.default_rng(26)
    X = rng.normal(size=(40, 20))
    U = rng.choice([-1.0, 1.0], size=(40, 20))
    for kind in KINDS:
        ek = EmbedderKind(kind, 0.7)
        batch = embed_batch(ek, X, U)
        for x, u, y in zip(X, U, batch):
            assert np.allclose(y, embed(ek, x, u))


def test_objective_R():
    u = np.array([1, -1, 1, -1, 1, 1], dtype=float)
    assert objective_R(u, u) == pytest.approx(6.0)
    v = np.array([1, 1, 1, 1, 0, 0], dtype=float)
    assert objective_R(u, v) == 0.0
    with pytest.raises(NumericError):
        objective_R(u, np.zeros(6))


def test_projection_examples():
    rng = np.random.default_rng(27)
    x, u = random_pair(rng, 12)
    y = 0.3 * x - 2.0 * u
    assert np.allclose(project_to_span(y, x, u), y)
    basis, _ = np.linalg.qr(np.column_stack([x, u]))
    z = rng.normal(size=12)
    z -= basis @ (basis.T @ z)
    assert np.allclose(project_to_span(x + u + z, x, u), x + u)


def test_projection_improves_both_objective_and_distortion():
    rng = np.random.default_rng(28)
    for _ in range(10000):
        x, u = random_pair(rng, 8)
        y = rng.normal(size=8) * 2.0
        p = project_to_span(y, x, u)
        assert np.dot(p - x, p - x) <= np.dot(y - x, y - x) * (1 + 1e-9) + 1e-12
        assert objective_R(u, p) >= objective_R(u, y) * (1 - 1e-9) - 1e-12


def _budget_slice(st, de, a):
    # b range with (a-1)^2 alpha2 + 2(a-1) b rho + b^2 <= de
    d = a - 1
    half = np.sqrt(np.maximum(de - d * d * (st.alpha2 - st.rho ** 2), 0.0))
    return -d * st.rho - half, 2 * half


def _correlation_at(st, de, a, t):
    low, width = _budget_slice(st, de, a)
    b = low + width * t
    power = a * a * st.alpha2 + 2 * a * b * st.rho + b * b
    w = a * st.rho + b
    return np.where(power > 0, w * w / np.where(power > 0, power, 1.0), 0.0)


def _grid_maximum(st, de, points=400):
    reach = np.sqrt(de / (st.alpha2 - st.rho ** 2))
    a_lo, a_hi = 1 - reach, 1 + reach
    a = np.linspace(a_lo, a_hi, points)
    t = np.linspace(0.0, 1.0, points)
    values = _correlation_at(st, de, a[:, None], t[None, :])
    best = float(values.max())
    step = a[1] - a[0]

    for edge in (0, -1):
        k = int(np.argmax(values[:, edge]))
        lo, hi = max(a[k] - step, a_lo), min(a[k] + step, a_hi)
        res = minimize_scalar(lambda s: -float(_correlation_at(st, de, s, t[edge])),
                              bounds=(lo, hi), method='bounded', options={'xatol': 1e-13})
        best = max(best, -res.fun)

    def clipped(p):
        return -float(_correlation_at(st, de, np.clip(p[0], a_lo, a_hi), np.clip(p[1], 0, 1)))

    i, j = np.unravel_index(int(np.argmax(values)), values.shape)
    res = minimize(clipped, [a[i], t[j]], method='Nelder-Mead',
                   options={'xatol': 1e-12, 'fatol': 1e-15, 'maxiter': 4000})
    return max(best, -res.fun)


def test_optimal_coefficients_match_grid_search():
    rng = np.random.default_rng(29)
    for _ in range(1000):
        alpha2 = rng.uniform(0.2, 3.0)
        rho = np.sqrt(alpha2) * rng.uniform(-0.98, 0.98)
        de = rng.uniform(0.01, 1.5) * alpha2
        st = EmbedStats(alpha2, rho)
        a, b = optimal_coefficients(st, de)
        distortion = (a - 1) ** 2 * alpha2 + 2 * (a - 1) * b * rho + b * b
        assert distortion <= de * (1 + 1e-9)
        best = _grid_maximum(st, de)
        assert predicted_correlation(a, b, st) >= best * (1 - 1e-9)
        assert predicted_correlation(a, b, st) == pytest.approx(best, rel=1e-6)


def test_embed_coefficients_of_improved_sign():
    st = EmbedStats(1.0, -0.2)
    assert embed_coefficients(EmbedderKind('improved_sign', 0.5), st) == (1.0, -np.sqrt(0.5))
    a, b = embed_coefficients(EmbedderKind('improved_sign', 1.2), st)
    assert a == 0.0
    assert predicted_correlation(a, b, st) == pytest.approx(1.0)
