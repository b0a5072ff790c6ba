import numpy as np
import pytest

from conftest import DATA_DIR, make_returns
from corrnet import (
    SynthSpec,
    build_envelope,
    distance_matrix,
    generate,
    log_returns,
    mix_seed,
    permute_surrogate,
    shift_surrogate,
    spearman_matrix,
)
from corrnet.spectra import mp_bounds
from corrnet.surrogate import HIST_BINS, envelope_to_json_dict


def _fixture_panel():
    t = np.arange(12, dtype=float)[:, None]
    j = np.arange(3, dtype=float)[None, :]
    values = np.sin(0.7 * t + 1.3 * j) * 0.01 + 0.001 * (j + 1)
    return make_returns(values, symbols=("AAA", "BBB", "CCC"))


class TestShiftSurrogate:
    def test_two_rows_forced_swap(self):
        r = make_returns([[1.0, 10.0], [2.0, 20.0]])
        out = shift_surrogate(r, seed=123)
        assert out.values.tolist() == [[2.0, 20.0], [1.0, 10.0]]

    def test_columns_are_exact_permutations(self, rng):
        r = make_returns(rng.standard_normal((37, 5)))
        out = shift_surrogate(r, seed=9)
        for j in range(5):
            assert sorted(out.values[:, j]) == sorted(r.values[:, j])

    def test_columns_are_cyclic_rotations(self, rng):
        r = make_returns(rng.standard_normal((20, 4)))
        out = shift_surrogate(r, seed=77)
        for j in range(4):
            col, ref = out.values[:, j], r.values[:, j]
            assert any(
                np.array_equal(col, np.roll(ref, off)) for off in range(1, 20)
            )
            assert not np.array_equal(col, ref)  # offset 0 is never drawn

    def test_golden_file_seed_42(self):
        out = shift_surrogate(_fixture_panel(), seed=42)
        got = "\n".join(",".join(f"{v:.17g}" for v in row) for row in out.values) + "\n"
        assert got == (DATA_DIR / "surrogate_seed42_golden.csv").read_text()

    def test_seed_derivation_known_answers(self):
        # canonical splitmix64 finalizer outputs; pinned so the documented
        # scheme cannot drift silently
        assert mix_seed(0, 0) == 16294208416658607535
        assert mix_seed(42, 7) == 14769051326987775908


class TestPermuteSurrogate:
    def test_multiset_preserved_but_order_broken(self, rng):
        r = make_returns(rng.standard_normal((50, 3)))
        out = permute_surrogate(r, seed=4)
        for j in range(3):
            assert sorted(out.values[:, j]) == sorted(r.values[:, j])
            assert not np.array_equal(out.values[:, j], r.values[:, j])


class TestEnvelope:
    def test_degenerate_pool_single_sim_two_symbols(self, rng):
        r = make_returns(rng.standard_normal((30, 2)))
        env = build_envelope(r, n_sims=1, base_seed=3)
        assert env.distance_pool.count == 1
        assert env.noise_threshold == env.distance_pool.min == env.distance_pool.max

    def test_thread_count_does_not_change_result(self, rng):
        r = make_returns(rng.standard_normal((60, 6)))
        a = build_envelope(r, n_sims=24, base_seed=11, threads=1)
        b = build_envelope(r, n_sims=24, base_seed=11, threads=8)
        assert a == b

    def test_matches_literal_surrogate_route(self, rng):
        # the pooled distances must equal shift -> spearman -> 1 - c exactly
        r = make_returns(rng.standard_normal((25, 4)))
        env = build_envelope(r, n_sims=3, base_seed=5)
        pooled = []
        for k in range(3):
            surr = shift_surrogate(r, mix_seed(5, k))
            d = distance_matrix(spearman_matrix(surr))
            iu, ju = np.triu_indices(4, k=1)
            pooled.append(d.values[iu, ju])
        pooled = np.concatenate(pooled)
        assert env.distance_pool.min == pooled.min()
        assert env.distance_pool.max == pooled.max()
        assert env.noise_threshold == float(np.quantile(pooled, 0.01))

    def test_iid_panel_band_matches_random_matrix_bound(self, rng):
        r = make_returns(rng.standard_normal((500, 20)) * 0.01)
        env = build_envelope(r, n_sims=100, base_seed=2)
        law = mp_bounds(500 / 20)
        assert abs(env.eig_max - law.lambda_plus) <= 0.15 * law.lambda_plus
        assert env.eig_min >= 0.0

    def test_envelope_invariants(self, rng):
        r = make_returns(rng.standard_normal((40, 5)))
        env = build_envelope(r, n_sims=20, base_seed=1)
        assert env.eig_min <= env.eig_max
        assert env.distance_pool.min <= env.noise_threshold <= env.distance_pool.max
        assert sum(env.distance_pool.histogram) == env.distance_pool.count
        assert len(env.distance_pool.histogram) == HIST_BINS

    def test_correlated_panel_beats_noise_floor(self):
        spec = SynthSpec(
            kind="blocks", n_days=400, seed=8, blocks=((5, 0.7), (5, 0.7)), inter_corr=0.05
        )
        panel, _ = generate(spec)
        returns = log_returns(panel)
        env = build_envelope(returns, n_sims=100, base_seed=6)
        dist = distance_matrix(spearman_matrix(returns))
        iu, ju = np.triu_indices(len(dist.symbols), k=1)
        real_min = dist.values[iu, ju].min()
        assert real_min < env.noise_threshold
        below = np.array(env.distance_pool.histogram)[: int(env.noise_threshold / 0.01)].sum()
        assert below <= 0.02 * env.distance_pool.count

    def test_permute_mode_runs_and_differs(self, rng):
        r = make_returns(rng.standard_normal((40, 4)))
        a = build_envelope(r, n_sims=10, base_seed=3, mode="rotate")
        b = build_envelope(r, n_sims=10, base_seed=3, mode="permute")
        assert a.noise_threshold != b.noise_threshold

    def test_json_payload_shape(self, rng):
        r = make_returns(rng.standard_normal((30, 3)))
        env = build_envelope(r, n_sims=5, base_seed=0)
        payload = envelope_to_json_dict(env)
        assert payload["histogram"]["bin_width"] == pytest.approx(0.01)
        assert len(payload["histogram"]["counts"]) == HIST_BINS
        assert set(payload["distance_pool"]["percentiles"]) == {
            "p01", "p05", "p25", "p50", "p75", "p95", "p99",
        }
