"""Experiment drivers: metrics, noise injection, and sanity modes."""

import numpy as np
import pytest

from graphdecon import model as gm
from graphdecon.generators import (
    grid_graph,
    random_graph,
    structure_pair_dataset,
    synthetic_ratings,
)
from graphdecon.graph import Graph
from graphdecon.io.datasets import RatingData
from graphdecon.tasks.classification import classify_eval
from graphdecon.tasks.reconstruction import (
    ReconstructSpec,
    band_energies,
    reconstruct_signal_once,
    _make_graph,
)
from graphdecon.tasks.recsys import (
    _cosine_matrix,
    inject_noise,
    intra_list_similarity,
    intra_list_similarity_bruteforce,
    mean_ils,
    recsys_run,
    top_items,
    RecsysSpec,
)


class TestIntraListSimilarity:
    def test_identical_columns_hand_value(self):
        # three identical items, k = 3: all nine cosines are 1 -> 4.5
        vectors = np.tile(np.array([[1.0], [2.0], [0.5]]), (1, 3))
        cosine = _cosine_matrix(vectors)
        assert intra_list_similarity(np.array([0, 1, 2]), cosine) == pytest.approx(4.5)

    def test_vectorized_equals_bruteforce(self, rng):
        vectors = rng.normal(size=(12, 9))
        vectors[:, 4] = 0.0  # zero column must count as similarity 0
        cosine = _cosine_matrix(vectors)
        for _ in range(10):
            items = rng.choice(9, size=5, replace=False)
            fast = intra_list_similarity(items, cosine)
            slow = intra_list_similarity_bruteforce(items, vectors)
            assert abs(fast - slow) < 1e-9

    def test_top_items_exclude_observed(self):
        predicted = np.array([[5.0, 4.0, 3.0, 2.0]])
        mask = np.array([[1.0, 0.0, 0.0, 0.0]])
        lists = top_items(predicted, mask, k=2)
        assert lists.tolist() == [[1, 2]]

    def test_mean_ils_matches_manual_average(self, rng):
        predicted = rng.normal(size=(4, 6))
        train = rng.random((4, 6)) * (rng.random((4, 6)) < 0.4)
        mask = (train > 0).astype(float)
        k = 3
        expected = np.mean([
            intra_list_similarity_bruteforce(lst, train)
            for lst in top_items(predicted, mask, k=k)
        ])
        assert mean_ils(predicted, train, mask, k=k) == pytest.approx(expected, abs=1e-9)


class TestNoiseInjection:
    def test_count_and_preservation(self, rng):
        data = synthetic_ratings(seed=1, n_users=12, n_items=10,
                                 train_density=0.3, test_density=0.1)
        noisy = inject_noise(data, 0.5, rng)
        assert len(noisy.train) == len(data.train) + int(0.5 * len(data.train))
        # original entries are untouched, in order
        assert np.array_equal(noisy.train[: len(data.train)], data.train)
        # spurious cells never collide with existing train or test cells
        existing = {(int(u), int(i)) for u, i, _ in data.train}
        existing |= {(int(u), int(i)) for u, i, _ in data.test}
        for u, i, r in noisy.train[len(data.train):]:
            assert (int(u), int(i)) not in existing
            assert data.rating_range[0] <= r <= data.rating_range[1]

    def test_zero_level_is_identity(self, rng):
        data = synthetic_ratings(seed=1, n_users=8, n_items=6)
        assert inject_noise(data, 0.0, rng) is data

    def test_saturated_matrix_rejected(self, rng):
        social = Graph.from_edges(2, [(0, 1)])
        train = np.array([[0, 0, 3.0], [0, 1, 3.0], [1, 0, 3.0]])
        test = np.array([[1, 1, 3.0]])
        data = RatingData(n_users=2, n_items=2, train=train, test=test, social=social)
        with pytest.raises(ValueError, match="unrated"):
            inject_noise(data, 1.0, rng)

    def test_level_out_of_range(self, rng):
        data = synthetic_ratings(seed=1, n_users=8, n_items=6)
        with pytest.raises(ValueError):
            inject_noise(data, 1.5, rng)


class TestRecsysRun:
    def test_constant_ratings_recoverable(self):
        # every rating is 3: the train objective drives to ~0 and held-out
        # error lands far below chance; ILS must match brute force exactly
        rng = np.random.default_rng(0)
        n_users, n_items = 16, 8
        cells = [(u, i) for u in range(n_users) for i in range(n_items)]
        picked = rng.permutation(len(cells))
        train = np.array([[*cells[k], 3.0] for k in picked[:60]])
        test = np.array([[*cells[k], 3.0] for k in picked[60:80]])
        social = random_graph(rng, n_users, 0.3)
        data = RatingData(n_users=n_users, n_items=n_items, train=train, test=test,
                          social=social)
        spec = RecsysSpec(encoder_hidden=(16, 8), gdn_hidden=(16, 16), epochs=300,
                          learning_rate=0.01)
        report = recsys_run(data, noise_level=0.0, spec=spec, seed=0)
        assert report.metrics["final_train_loss"] < 1e-2
        assert report.metrics["test_rmse"] < 0.4

        ratings, mask = data.matrix("train")
        lists = top_items(ratings * 0 + 1.0, mask, k=5)  # any ranking; oracle check
        cosine = _cosine_matrix(ratings)
        for lst in lists:
            assert intra_list_similarity(lst, cosine) == pytest.approx(
                intra_list_similarity_bruteforce(lst, ratings), abs=1e-9
            )

    def test_report_fields(self):
        data = synthetic_ratings(seed=2, n_users=14, n_items=10,
                                 train_density=0.3, test_density=0.1)
        spec = RecsysSpec(encoder_hidden=(12, 6), gdn_hidden=(12, 12), epochs=20)
        report = recsys_run(data, noise_level=0.25, spec=spec, seed=1)
        assert set(report.metrics) >= {"test_rmse", "mean_ils", "noise_level"}
        assert report.metrics["noise_level"] == 0.25


class TestClassifyEval:
    def test_separable_blobs_are_perfect(self, rng):
        x = np.vstack([rng.normal(size=(30, 4)) + 8.0, rng.normal(size=(30, 4)) - 8.0])
        y = np.array([0] * 30 + [1] * 30)
        report = classify_eval(x, y, folds=5, repeats=2, seed=0)
        assert report.metrics["mean_accuracy"] == 1.0

    def test_shuffled_labels_are_chance(self, rng):
        x = rng.normal(size=(80, 6))
        y = np.array([0, 1] * 40)
        report = classify_eval(x, y, folds=5, repeats=2, seed=0)
        assert abs(report.metrics["mean_accuracy"] - 0.5) <= 0.1

    def test_impossible_stratification_rejected(self, rng):
        x = rng.normal(size=(12, 3))
        y = np.array([0] * 9 + [1] * 3)
        with pytest.raises(ValueError, match="impossible"):
            classify_eval(x, y, folds=5, repeats=1)

    def test_single_class_rejected(self, rng):
        x = rng.normal(size=(10, 3))
        with pytest.raises(ValueError, match="2 classes"):
            classify_eval(x, np.zeros(10, dtype=int), folds=2)


class TestReconstruction:
    def test_band_energies_partition_residual_energy(self, rng):
        g = grid_graph(6, 6)
        residual = rng.normal(size=g.n)
        bands = band_energies(g, residual)
        total = bands["low"] + bands["mid"] + bands["high"]
        assert total == pytest.approx(float(residual @ residual), abs=1e-8)

    def test_identity_mode_reconstructs_exactly(self):
        spec = ReconstructSpec(rows=8, cols=8, spikes=5, noise_sigma=0.0,
                               identity_encoder=True, gdn_hidden=(8, 8),
                               epochs=600, learning_rate=0.02)
        signal, recon, _ = reconstruct_signal_once(spec, gm.DecoderVariant.GDN, seed=0)
        assert np.sqrt(np.mean((signal - recon) ** 2)) < 0.05

    def test_disconnected_generator_retries_then_fails(self):
        spec = ReconstructSpec(generator=lambda rng: random_graph(rng, 12, 0.0))
        with pytest.raises(ValueError, match="10 attempts"):
            _make_graph(spec, seed=0)

    def test_connected_generator_accepted(self):
        spec = ReconstructSpec(generator=lambda rng: grid_graph(3, 3))
        g = _make_graph(spec, seed=0)
        assert g.n == 9


class TestStructureDatasets:
    def test_balanced_and_labeled(self):
        bundle = structure_pair_dataset(seed=0, n_per_class=10)
        assert len(bundle) == 20
        assert np.bincount(bundle.labels).tolist() == [10, 10]

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError, match="unknown graph kind"):
            structure_pair_dataset(seed=0, n_per_class=1, kinds=("cycle", "dodecahedron"))
