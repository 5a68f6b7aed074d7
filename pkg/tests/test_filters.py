"""Spectral filters: truncated series vs closed-form oracles."""

import numpy as np
import pytest

from conftest import dense_polynomial_oracle, laplacian_eigens

from graphdecon.autodiff import Tape
from graphdecon.filters import (
    FilterKind,
    FilterSpec,
    apply_filter,
    apply_filter_exact,
    response,
    truncation_error,
)
from graphdecon.generators import random_connected_graph, star_graph
from graphdecon.graph import Graph, build_sym_laplacian

ALL_KINDS = list(FilterKind)
SERIES_KINDS = [FilterKind.INVERSE_GCN, FilterKind.HEAT_WAVELET,
                FilterKind.INVERSE_HEAT_WAVELET]


class TestResponse:
    def test_inverse_series_at_half(self):
        # truncated geometric series vs the closed form 1/(1 - 0.5) = 2
        spec = FilterSpec(FilterKind.INVERSE_GCN, order=3)
        assert response(spec, 0.5) == pytest.approx(1.875, abs=1e-12)

    def test_heat_series_at_one(self):
        spec = FilterSpec(FilterKind.HEAT_WAVELET, order=3, scale=1.0)
        assert response(spec, 1.0) == pytest.approx(1.0 / 3.0, abs=1e-12)

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_all_kinds_are_one_at_zero(self, kind):
        order = 3 if kind is not FilterKind.INVERSE_GCN else 2
        assert response(FilterSpec(kind, order=order), 0.0) == pytest.approx(1.0)

    def test_eigenvalue_outside_spectrum_rejected(self):
        spec = FilterSpec(FilterKind.LOW_PASS_GCN)
        with pytest.raises(ValueError):
            response(spec, -0.1)
        with pytest.raises(ValueError):
            response(spec, 2.1)

    def test_low_pass_ignores_order(self):
        assert response(FilterSpec(FilterKind.LOW_PASS_GCN, order=7), 0.5) == 0.5

    def test_monotone_character(self):
        grid = np.linspace(0.0, 2.0, 101)
        low = [response(FilterSpec(FilterKind.LOW_PASS_GCN), x) for x in grid]
        assert np.all(np.diff(low) < 0)
        inv = [response(FilterSpec(FilterKind.INVERSE_GCN, 3), x) for x in grid]
        assert np.all(np.diff(inv) > 0)
        iw = [response(FilterSpec(FilterKind.INVERSE_HEAT_WAVELET, 3, 1.0), x) for x in grid]
        assert np.all(np.diff(iw) > 0)

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            FilterSpec(FilterKind.INVERSE_GCN, order=0)
        with pytest.raises(ValueError):
            FilterSpec(FilterKind.HEAT_WAVELET, order=3, scale=0.0)
        with pytest.raises(ValueError):
            FilterSpec(FilterKind.HEAT_WAVELET, order=-1)


class TestApplyFilter:
    @pytest.mark.parametrize("kind", [FilterKind.HEAT_WAVELET,
                                      FilterKind.INVERSE_HEAT_WAVELET])
    def test_order_zero_is_identity(self, kind, rng):
        g = random_connected_graph(rng, 6, 0.5)
        lap = build_sym_laplacian(g)
        x = rng.normal(size=(6, 2))
        out = apply_filter(FilterSpec(kind, order=0, scale=1.0), lap, x)
        assert np.array_equal(out, x)

    def test_first_order_inverse_adds_one_laplacian_pass(self, rng):
        g = random_connected_graph(rng, 8, 0.4)
        lap = build_sym_laplacian(g)
        x = rng.normal(size=(8, 3))
        out = apply_filter(FilterSpec(FilterKind.INVERSE_GCN, order=1), lap, x)
        assert np.max(np.abs(out - (x + lap.matrix @ x))) < 1e-12

    def test_heat_on_top_eigenvector_of_path(self):
        lap = build_sym_laplacian(Graph.from_edges(2, [(0, 1)]))
        x = np.array([[1.0], [-1.0]])
        out = apply_filter(FilterSpec(FilterKind.HEAT_WAVELET, 3, 1.0), lap, x)
        assert np.allclose(out, -x / 3.0, atol=1e-12)

    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_matches_dense_polynomial_oracle(self, kind, rng):
        for _ in range(4):
            n = int(rng.integers(3, 31))
            g = random_connected_graph(rng, n, 0.4)
            lap = build_sym_laplacian(g)
            x = rng.normal(size=(n, 3))
            spec = FilterSpec(kind, order=4 if kind is not FilterKind.LOW_PASS_GCN else 1)
            assert np.max(np.abs(apply_filter(spec, lap, x)
                                 - dense_polynomial_oracle(spec, lap, x))) < 1e-10

    def test_eigenvector_scaling_matches_response(self, rng):
        g = random_connected_graph(rng, 12, 0.4)
        lap = build_sym_laplacian(g)
        lam, u = laplacian_eigens(lap)
        spec = FilterSpec(FilterKind.HEAT_WAVELET, 3, 1.0)
        for i in (0, 5, 11):
            vec = u[:, i][:, None]
            expected = response(spec, float(np.clip(lam[i], 0.0, 2.0))) * vec
            assert np.max(np.abs(apply_filter(spec, lap, vec) - expected)) < 1e-9

    def test_high_order_converges_to_exact_kernel(self, rng):
        g = random_connected_graph(rng, 10, 0.4)
        lap = build_sym_laplacian(g)
        x = rng.normal(size=(10, 2))
        for kind in (FilterKind.HEAT_WAVELET, FilterKind.INVERSE_HEAT_WAVELET):
            truncated = apply_filter(FilterSpec(kind, 20, 1.0), lap, x)
            exact = apply_filter_exact(FilterSpec(kind, 20, 1.0), lap, x)
            assert np.max(np.abs(truncated - exact)) < 1e-6

    def test_tensor_path_equals_array_path(self, rng):
        g = random_connected_graph(rng, 9, 0.4)
        lap = build_sym_laplacian(g)
        x = rng.normal(size=(9, 2))
        spec = FilterSpec(FilterKind.INVERSE_HEAT_WAVELET, 3, 1.0)
        tape = Tape()
        out = apply_filter(spec, lap, tape.tensor(x))
        assert np.array_equal(out.value, apply_filter(spec, lap, x))

    def test_requires_laplacian_kind(self, rng):
        from graphdecon.graph import build_renorm_adj

        g = random_connected_graph(rng, 5, 0.5)
        with pytest.raises(ValueError, match="Laplacian"):
            apply_filter(FilterSpec(FilterKind.HEAT_WAVELET), build_renorm_adj(g),
                         np.ones((5, 1)))


class TestExactOracle:
    def test_wavelet_pair_inverts(self, rng):
        g = random_connected_graph(rng, 14, 0.3)
        lap = build_sym_laplacian(g)
        x = rng.normal(size=(14, 3))
        fwd = apply_filter_exact(FilterSpec(FilterKind.HEAT_WAVELET, 3, 1.0), lap, x)
        back = apply_filter_exact(FilterSpec(FilterKind.INVERSE_HEAT_WAVELET, 3, 1.0), lap, fwd)
        assert np.max(np.abs(back - x)) < 1e-8

    def test_low_pass_preserves_smoothest_mode(self, rng):
        g = random_connected_graph(rng, 8, 0.5)
        lap = build_sym_laplacian(g)
        mode = np.sqrt(g.degrees())[:, None]  # eigenvector at 0
        out = apply_filter_exact(FilterSpec(FilterKind.LOW_PASS_GCN), lap, mode)
        assert np.max(np.abs(out - mode)) < 1e-9

    def test_inverse_pole_detected_on_star(self):
        # star graphs carry eigenvalue exactly 1, the pole of 1/(1 - x)
        lap = build_sym_laplacian(star_graph(4))
        with pytest.raises(ValueError, match="pole"):
            apply_filter_exact(FilterSpec(FilterKind.INVERSE_GCN, 3), lap, np.ones((4, 1)))

    def test_inverse_succeeds_on_two_node_path(self):
        lap = build_sym_laplacian(Graph.from_edges(2, [(0, 1)]))
        out = apply_filter_exact(FilterSpec(FilterKind.INVERSE_GCN, 3), lap, np.eye(2))
        # spectrum {0, 2} -> responses {1, -1} -> the antidiagonal matrix
        assert np.allclose(out, [[0.0, 1.0], [1.0, 0.0]], atol=1e-12)

    def test_dense_limit_enforced(self, rng):
        from graphdecon import filters

        g = random_connected_graph(rng, 12, 0.4)
        lap = build_sym_laplacian(g)
        old = filters.DENSE_LIMIT
        filters.DENSE_LIMIT = 10
        try:
            with pytest.raises(ValueError, match="too large"):
                apply_filter_exact(FilterSpec(FilterKind.HEAT_WAVELET), lap, np.ones((12, 1)))
        finally:
            filters.DENSE_LIMIT = old


class TestTruncationError:
    def test_order_three_worst_case(self):
        err = truncation_error(FilterSpec(FilterKind.HEAT_WAVELET, 3, 1.0))
        assert err == pytest.approx(0.469, abs=1e-3)

    def test_order_ten_is_tiny(self):
        assert truncation_error(FilterSpec(FilterKind.HEAT_WAVELET, 10, 1.0)) < 1e-4

    def test_vanishing_scale_limit(self):
        for order in (0, 1, 3):
            err = truncation_error(FilterSpec(FilterKind.HEAT_WAVELET, order, 1e-8))
            assert err < 1e-7

    def test_restricted_to_wavelet_kinds(self):
        with pytest.raises(ValueError):
            truncation_error(FilterSpec(FilterKind.INVERSE_GCN, 3))
