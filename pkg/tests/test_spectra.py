import numpy as np
import pytest
from scipy.integrate import quad

from conftest import make_returns
from corrnet import (
    DegenerateSeriesError,
    PairMatrix,
    SynthSpec,
    benchmark_correlation,
    build_envelope,
    eigen_decompose,
    generate,
    log_returns,
    mode_portfolio_returns,
    mp_bounds,
    mp_density,
    noise_band_report,
    second_mode_partition,
    spearman_matrix,
)
from corrnet.spectra import Spectrum
from corrnet.surrogate import DistancePoolSummary, SurrogateEnvelope
from oracles import pearson_direct

# Reference 16-index spectrum; the trace of a correlation matrix equals its
# dimension, so these published values must sum to 16 up to their rounding.
REFERENCE_16 = (
    0.1835, 0.3219, 0.4163, 0.6024, 0.6108, 0.6937, 0.7321, 0.9041,
    0.9752, 0.9960, 1.0880, 1.1602, 1.3879, 1.5226, 1.7134, 2.6918,
)


def _corr(values, symbols=None):
    n = len(values)
    symbols = symbols or tuple(f"S{i + 1:02d}" for i in range(n))
    return PairMatrix(symbols, np.asarray(values, dtype=float), kind="correlation")


def _fake_envelope(n_symbols, eig_min, eig_max):
    pool = DistancePoolSummary(
        count=1, min=0.5, max=1.5, percentiles={"p50": 1.0}, histogram=(0,) * 200
    )
    return SurrogateEnvelope(
        n_sims=1, n_symbols=n_symbols, base_seed=0, quantile=0.01, noise_threshold=0.8,
        eig_min=eig_min, eig_max=eig_max, distance_pool=pool, mode="rotate", method="spearman",
    )


class TestEigenDecompose:
    def test_identity_matrix(self):
        spec = eigen_decompose(_corr(np.eye(4)))
        assert np.allclose(spec.eigenvalues, 1.0)
        assert spec.eigenvalues.sum() == pytest.approx(4.0, abs=1e-12)

    def test_two_by_two_closed_form(self):
        spec = eigen_decompose(_corr([[1.0, 0.5], [0.5, 1.0]]))
        assert np.allclose(spec.eigenvalues, [1.5, 0.5], atol=1e-12)

    def test_reference_16_index_spectrum(self):
        assert len(REFERENCE_16) == 16
        assert max(REFERENCE_16) == 2.6918
        assert abs(sum(REFERENCE_16) - 16.0) < 1e-3

    def test_trace_reconstruction_orthonormality(self, rng):
        for _ in range(5):
            n = int(rng.integers(3, 20))
            m = spearman_matrix(make_returns(rng.standard_normal((4 * n, n))))
            spec = eigen_decompose(m)
            assert abs(spec.eigenvalues.sum() - n) < 1e-8
            v = spec.eigenvectors
            assert np.abs(v.T @ v - np.eye(n)).max() < 1e-10
            rebuilt = v @ np.diag(spec.eigenvalues) @ v.T
            assert np.abs(rebuilt - m.values).max() < 1e-8
            assert spec.eigenvalues[-1] >= -1e-10

    def test_sign_convention(self, rng):
        m = spearman_matrix(make_returns(rng.standard_normal((60, 8))))
        spec = eigen_decompose(m)
        for k in range(8):
            col = spec.eigenvectors[:, k]
            assert col[int(np.argmax(np.abs(col)))] > 0

    def test_rejects_distance_matrix(self, rng):
        from corrnet import distance_matrix

        d = distance_matrix(spearman_matrix(make_returns(rng.standard_normal((10, 3)))))
        with pytest.raises(ValueError):
            eigen_decompose(d)


class TestMpLaw:
    def test_bounds_q4_exact(self):
        law = mp_bounds(4.0, 1.0)
        assert law.lambda_minus == 0.25
        assert law.lambda_plus == 2.25

    def test_large_q_limits_to_one(self):
        law = mp_bounds(1e6, 1.0)
        assert abs(law.lambda_minus - 1.0) < 3e-3
        assert abs(law.lambda_plus - 1.0) < 3e-3

    def test_sigma_squared_scaling(self):
        law = mp_bounds(4.0, 2.0)
        assert law.lambda_minus == 1.0
        assert law.lambda_plus == 9.0

    def test_q_at_most_one_rejected(self):
        with pytest.raises(ValueError):
            mp_bounds(1.0)
        with pytest.raises(ValueError):
            mp_bounds(0.5)

    def test_density_zero_at_edges_and_outside(self):
        law = mp_bounds(5.0)
        assert mp_density(law.lambda_minus, law) == 0.0
        assert mp_density(law.lambda_plus, law) == 0.0
        assert mp_density(law.lambda_minus - 0.01, law) == 0.0
        assert mp_density(law.lambda_plus + 0.01, law) == 0.0
        mid = (law.lambda_minus + law.lambda_plus) / 2
        assert mp_density(mid, law) > 0.0

    @pytest.mark.parametrize("q", [2.0, 5.0, 10.0])
    def test_density_integrates_to_one(self, q):
        law = mp_bounds(q)
        total, _ = quad(lambda lam: mp_density(lam, law), law.lambda_minus, law.lambda_plus, limit=200)
        assert abs(total - 1.0) < 1e-6


class TestNoiseBand:
    def test_identity_spectrum_inside_band(self):
        spec = eigen_decompose(_corr(np.eye(20)))
        report = noise_band_report(spec, mp_bounds(25.0), _fake_envelope(20, 0.6, 1.5))
        assert all(e.inside_analytic and e.inside_empirical for e in report.entries)

    def test_single_factor_market_mode_escapes_band(self):
        spec_gen = SynthSpec(
            kind="single_factor", n_days=500, seed=4, n_symbols=20,
            factor_loading=float(np.sqrt(0.4)),
        )
        panel, _ = generate(spec_gen)
        returns = log_returns(panel)
        env = build_envelope(returns, n_sims=100, base_seed=1)
        spectrum = eigen_decompose(spearman_matrix(returns))
        report = noise_band_report(spectrum, mp_bounds(500 / 20), env)
        assert report.lambda1.inside_analytic is False
        assert report.lambda1.inside_empirical is False

    def test_highest_eigenvalue_stands_out_on_correlated_markets(self):
        cases = [
            SynthSpec(kind="blocks", n_days=400, seed=1, blocks=((6, 0.6), (6, 0.6)), inter_corr=0.1),
            SynthSpec(kind="single_factor", n_days=400, seed=2, n_symbols=15, factor_loading=0.6),
            SynthSpec(
                kind="timezone", n_days=400, seed=3, n_symbols=12,
                factor_loading=0.7, lag_coupling=0.5,
            ),
        ]
        for spec_gen in cases:
            panel, _ = generate(spec_gen)
            returns = log_returns(panel)
            spectrum = eigen_decompose(spearman_matrix(returns))
            env = build_envelope(returns, n_sims=50, base_seed=9)
            assert spectrum.eigenvalues[0] > env.eig_max
            law = mp_bounds(returns.values.shape[0] / returns.values.shape[1])
            assert spectrum.eigenvalues[0] > law.lambda_plus

    def test_inconsistent_sizes_rejected(self):
        spec = eigen_decompose(_corr(np.eye(4)))
        with pytest.raises(ValueError):
            noise_band_report(spec, mp_bounds(4.0), _fake_envelope(5, 0.5, 1.5))


class TestModePortfolio:
    def test_single_symbol_portfolio_is_the_series(self, rng):
        returns = make_returns(rng.standard_normal((20, 1)))
        spectrum = eigen_decompose(_corr([[1.0]], symbols=returns.symbols))
        out = mode_portfolio_returns(returns, spectrum, 1)
        assert np.array_equal(out, returns.values[:, 0])

    def test_market_mode_tracks_equal_weight_index(self):
        spec_gen = SynthSpec(
            kind="single_factor", n_days=500, seed=12, n_symbols=20,
            factor_loading=float(np.sqrt(0.4)),
        )
        panel, _ = generate(spec_gen)
        returns = log_returns(panel)
        spectrum = eigen_decompose(spearman_matrix(returns))
        portfolio = mode_portfolio_returns(returns, spectrum, 1)
        benchmark = returns.values.mean(axis=1)
        assert benchmark_correlation(portfolio, benchmark) > 0.99

    def test_weights_enter_linearly(self, rng):
        returns = make_returns(rng.standard_normal((30, 5)))
        spectrum = eigen_decompose(spearman_matrix(returns))
        for k in (1, 3, 5):
            manual = returns.values @ spectrum.eigenvectors[:, k - 1]
            assert np.array_equal(mode_portfolio_returns(returns, spectrum, k), manual)

    def test_k_bounds(self, rng):
        returns = make_returns(rng.standard_normal((30, 4)))
        spectrum = eigen_decompose(spearman_matrix(returns))
        with pytest.raises(ValueError):
            mode_portfolio_returns(returns, spectrum, 0)
        with pytest.raises(ValueError):
            mode_portfolio_returns(returns, spectrum, 5)


class TestBenchmarkCorrelation:
    def test_identity_and_negation(self, rng):
        x = rng.standard_normal(40)
        assert benchmark_correlation(x, x.copy()) == 1.0
        assert benchmark_correlation(x, -x) == -1.0

    def test_matches_direct_formula(self, rng):
        a = rng.standard_normal(50)
        b = 0.4 * a + rng.standard_normal(50)
        expected = pearson_direct(a.tolist(), b.tolist())
        assert abs(benchmark_correlation(a, b) - expected) < 1e-12

    def test_zero_variance_rejected(self):
        with pytest.raises(DegenerateSeriesError):
            benchmark_correlation(np.ones(10), np.arange(10.0))

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            benchmark_correlation(np.ones(5), np.ones(6))


class TestSecondMode:
    def test_two_by_two_opposite_signs(self):
        spectrum = eigen_decompose(_corr([[1.0, 0.5], [0.5, 1.0]]))
        part = second_mode_partition(spectrum)
        assert len(part.positive) == 1 and len(part.negative) == 1
        assert not part.near_zero

    def test_timezone_market_recovers_regions(self):
        spec_gen = SynthSpec(
            kind="timezone", n_days=750, seed=21, n_symbols=20,
            factor_loading=float(np.sqrt(0.7)), lag_coupling=0.6,
        )
        panel, labels = generate(spec_gen)
        spectrum = eigen_decompose(spearman_matrix(log_returns(panel)))
        part = second_mode_partition(spectrum)
        groups = {frozenset(s for s, g in labels.items() if g == k) for k in (0, 1)}
        assert {frozenset(part.positive), frozenset(part.negative)} == groups

    def test_partition_stable_under_global_sign_flip(self, rng):
        base = eigen_decompose(spearman_matrix(make_returns(rng.standard_normal((40, 6)))))
        flipped_vectors = base.eigenvectors.copy()
        flipped_vectors[:, 1] *= -1.0
        flipped = Spectrum(base.symbols, base.eigenvalues.copy(), flipped_vectors)
        a = second_mode_partition(base)
        b = second_mode_partition(flipped)
        assert {frozenset(a.positive), frozenset(a.negative)} == {
            frozenset(b.positive), frozenset(b.negative),
        }
        assert a.magnitudes == b.magnitudes
