"""Encoder, pooling, unpooling, decoder, and the combined loss."""

import numpy as np
import pytest

from graphdecon import autodiff as ad
from graphdecon import model as gm
from graphdecon.autodiff import Tape, backward, finite_difference_gradient, max_relative_error
from graphdecon.generators import random_connected_graph
from graphdecon.graph import Graph, build_sym_laplacian


def wrap(tape, arrays):
    return {k: tape.tensor(v) for k, v in arrays.items()}


class TestEncode:
    def test_single_node_identity_layer(self):
        # renorm propagation of a lone node is its self-loop: H = X
        g = Graph.from_edges(1, []).with_features(np.array([[3.0, -1.0]]))
        tape = Tape()
        pt = wrap(tape, {"encoder.layer0": np.eye(2)})
        h = gm.encode(tape, g, gm.EncoderConfig((2, 2)), pt)
        assert np.allclose(h.value, g.features)

    def test_two_node_path_averages(self):
        g = Graph.from_edges(2, [(0, 1)]).with_features(np.array([[1.0], [0.0]]))
        tape = Tape()
        pt = wrap(tape, {"encoder.layer0": np.array([[1.0]])})
        h = gm.encode(tape, g, gm.EncoderConfig((1, 1)), pt)
        assert np.allclose(h.value, [[0.5], [0.5]])

    def test_zero_weights_give_zero(self, small_graph):
        tape = Tape()
        pt = wrap(tape, {"encoder.layer0": np.zeros((3, 4)),
                         "encoder.layer1": np.zeros((4, 2))})
        h = gm.encode(tape, small_graph, gm.EncoderConfig((3, 4, 2)), pt)
        assert np.all(h.value == 0.0)

    def test_missing_features_rejected(self):
        g = Graph.from_edges(2, [(0, 1)])
        tape = Tape()
        with pytest.raises(ValueError, match="features"):
            gm.encode(tape, g, gm.EncoderConfig((1, 1)),
                      wrap(tape, {"encoder.layer0": np.eye(1)}))

    def test_stacked_outputs_concatenate_layer_widths(self, small_graph):
        cfg = gm.EncoderConfig((3, 4, 2), stack_layer_outputs=True)
        assert cfg.output_dim == 6
        tape = Tape()
        rng = np.random.default_rng(0)
        pt = wrap(tape, {"encoder.layer0": rng.normal(size=(3, 4)),
                         "encoder.layer1": rng.normal(size=(4, 2))})
        h = gm.encode(tape, small_graph, cfg, pt)
        assert h.value.shape == (7, 6)


class TestPool:
    def test_zero_assignment_weight_gives_uniform_rows(self, small_graph, rng):
        cfg = gm.PoolConfig(clusters=4, attention_hidden=5)
        tape = Tape()
        pt = wrap(tape, {"pool.attn_hidden": rng.normal(size=(3, 5)),
                         "pool.attn_assign": np.zeros((5, 4))})
        h = tape.tensor(np.asarray(small_graph.features))
        s, _, _ = gm.pool(tape, h, small_graph.adj, cfg, pt)
        assert np.allclose(s.value, 0.25)

    def test_hard_assignment_coarse_structure(self):
        # forced one-hot S on the 3-path, clusters {0,1} and {2}
        g = Graph.from_edges(3, [(0, 1), (1, 2)])
        tape = Tape()
        s = tape.tensor(np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]))
        a_pool = ad.matmul(ad.transpose(s), ad.spmm(g.adj, s))
        assert np.allclose(a_pool.value, [[2.0, 1.0], [1.0, 0.0]])

    def test_pooled_pair_permutation_invariant(self, rng):
        g = random_connected_graph(rng, 9, 0.4).with_features(rng.normal(size=(9, 3)))
        cfg = gm.ModelConfig(
            encoder=gm.EncoderConfig((3, 4, 3)),
            pool=gm.PoolConfig(clusters=3, attention_hidden=4),
            gdn=gm.GdnConfig(hidden_dims=(4, 4)),
        )
        params = gm.init_params(rng, cfg)

        def pooled(graph):
            tape = Tape()
            pt = gm.wrap_params(tape, params)
            h = gm.encode(tape, graph, cfg.encoder, pt)
            _, z, a_pool = gm.pool(tape, h, graph.adj, cfg.pool, pt)
            return z.value, a_pool.value

        z0, a0 = pooled(g)
        for _ in range(5):
            zp, ap = pooled(g.permuted(rng.permutation(9)))
            assert np.max(np.abs(zp - z0)) < 1e-9
            assert np.max(np.abs(ap - a0)) < 1e-9


class TestUnpool:
    def test_identity_assignment_roundtrip(self, rng):
        tape = Tape()
        s = tape.tensor(np.eye(4))
        z = tape.tensor(rng.normal(size=(4, 3)))
        a_pool = tape.tensor(rng.normal(size=(4, 4)))
        h_prime, a_prime = gm.unpool(s, z, a_pool)
        assert np.array_equal(h_prime.value, z.value)
        assert np.array_equal(a_prime.value, a_pool.value)

    def test_uniform_assignment_is_rank_one(self, rng):
        tape = Tape()
        s = tape.tensor(np.full((5, 2), 0.5))
        z = tape.tensor(rng.normal(size=(2, 3)))
        a_pool = tape.tensor(rng.normal(size=(2, 2)))
        h_prime, _ = gm.unpool(s, z, a_pool)
        assert np.allclose(h_prime.value, h_prime.value[0])

    def test_unpooled_structure_is_symmetric(self, small_graph, rng):
        cfg = gm.ModelConfig(
            encoder=gm.EncoderConfig((3, 4, 3)),
            pool=gm.PoolConfig(clusters=3, attention_hidden=4),
            gdn=gm.GdnConfig(hidden_dims=(4, 4)),
        )
        params = gm.init_params(rng, cfg)
        tape = Tape()
        pt = gm.wrap_params(tape, params)
        out = gm.autoencoder_forward(tape, small_graph, cfg, pt)
        a = out.a_prime.value
        assert np.max(np.abs(a - a.T)) < 1e-12


class TestGdnDecode:
    def test_zero_input_gives_zero_output(self, rng):
        g = random_connected_graph(rng, 5, 0.5)
        lap = build_sym_laplacian(g)
        tape = Tape()
        pt = wrap(tape, {"gdn.sharpen": rng.normal(size=(3, 4)),
                         "gdn.denoise": rng.normal(size=(4, 4)),
                         "gdn.project": rng.normal(size=(4, 2))})
        h = tape.tensor(np.zeros((5, 3)))
        out = gm.gdn_decode(tape, lap, h, gm.GdnConfig(hidden_dims=(4, 4)), pt)
        assert np.all(out.value == 0.0)

    def test_single_node_scalar_pipeline(self):
        # isolated node: Laplacian [[1]]; unit weights trace the whole series
        lap = build_sym_laplacian(Graph.from_edges(1, []))
        tape = Tape()
        pt = wrap(tape, {"gdn.sharpen": np.eye(1), "gdn.denoise": np.eye(1),
                         "gdn.project": np.eye(1)})
        h = tape.tensor(np.array([[1.0]]))
        cfg = gm.GdnConfig(wavelet_order=3, wavelet_scale=1.0, inverse_order=1,
                           hidden_dims=(1, 1))
        out = gm.gdn_decode(tape, lap, h, cfg, pt)
        assert out.value[0, 0] == pytest.approx(16.0 / 9.0, abs=1e-12)

    def test_gradient_wrt_denoise_weight(self, rng):
        g = random_connected_graph(rng, 6, 0.5)
        lap = build_sym_laplacian(g)
        h_val = rng.normal(size=(6, 3))
        arrays = {"gdn.sharpen": rng.normal(size=(3, 4)),
                  "gdn.denoise": rng.normal(size=(4, 4)),
                  "gdn.project": rng.normal(size=(4, 2))}
        target = rng.normal(size=(6, 2))
        cfg = gm.GdnConfig(hidden_dims=(4, 4))

        def loss_of(ws):
            tape = Tape()
            pt = wrap(tape, ws)
            out = gm.gdn_decode(tape, lap, tape.tensor(h_val), cfg, pt)
            return ad.mse_loss(out, target), pt

        loss, pt = loss_of(arrays)
        backward(loss.tape, loss)

        def f(w):
            ws = dict(arrays)
            ws["gdn.denoise"] = w
            return float(loss_of(ws)[0].value)

        numeric = finite_difference_gradient(f, arrays["gdn.denoise"])
        assert max_relative_error(pt["gdn.denoise"].grad, numeric) < 1e-4

    def test_decoder_laplacian_unpooled_binarizes(self, rng):
        g = random_connected_graph(rng, 5, 0.5)
        soft = np.array([[0.0, 0.9, 0.2, 0.0, 0.0],
                         [0.9, 0.0, 0.6, 0.1, 0.0],
                         [0.2, 0.6, 0.0, 0.0, 0.0],
                         [0.0, 0.1, 0.0, 0.0, 0.7],
                         [0.0, 0.0, 0.0, 0.7, 0.9]])
        cfg = gm.GdnConfig(decoder_graph=gm.DecoderGraph.UNPOOLED)
        lap = gm.decoder_laplacian(g, cfg, a_prime=soft)
        # edges kept: (0,1), (1,2), (3,4); the 0.9 diagonal is dropped
        assert lap.matrix.shape == (5, 5)
        dense = lap.matrix.toarray()
        assert dense[0, 2] == 0.0 and dense[1, 2] != 0.0


class TestLoss:
    def test_perfect_reconstruction_is_zero(self, small_graph):
        tape = Tape()
        x = tape.tensor(np.asarray(small_graph.features))
        a = tape.tensor(small_graph.adj.toarray())
        w = gm.LossWeights(structure=1.0, feature=1.0)
        loss = gm.reconstruction_loss(tape, small_graph, a, x, w)
        assert loss.value == 0.0

    def test_structure_term_dropped_at_zero_weight(self, small_graph, rng):
        tape = Tape()
        x = tape.tensor(rng.normal(size=small_graph.features.shape))
        w = gm.LossWeights(structure=0.0, feature=1.0)
        loss = gm.reconstruction_loss(tape, small_graph, None, x, w)
        assert np.isfinite(loss.value)

    def test_uniform_offset_structure_loss(self):
        g = Graph.from_edges(2, [(0, 1)]).with_features(np.zeros((2, 1)))
        tape = Tape()
        a = tape.tensor(g.adj.toarray() + 1.0)
        x = tape.tensor(np.zeros((2, 1)))
        w = gm.LossWeights(structure=1.0, feature=0.0)
        loss = gm.reconstruction_loss(tape, g, a, x, w)
        assert loss.value == pytest.approx(1.0)

    def test_bce_requires_unit_interval_features(self, rng):
        g = Graph.from_edges(2, [(0, 1)]).with_features(np.array([[2.0], [0.0]]))
        tape = Tape()
        x = tape.tensor(rng.normal(size=(2, 1)))
        w = gm.LossWeights(structure=0.0, feature=1.0, feature_loss=gm.FeatureLoss.BCE)
        with pytest.raises(ValueError):
            gm.reconstruction_loss(tape, g, None, x, w)

    def test_weight_validation(self):
        with pytest.raises(ValueError):
            gm.LossWeights(structure=0.0, feature=0.0)
        with pytest.raises(ValueError):
            gm.LossWeights(structure=-1.0, feature=1.0)


class TestEquivariance:
    def test_decoded_features_permute_with_input(self, rng):
        g = random_connected_graph(rng, 8, 0.4).with_features(rng.normal(size=(8, 3)))
        cfg = gm.ModelConfig(
            encoder=gm.EncoderConfig((3, 4, 3)),
            pool=gm.PoolConfig(clusters=3, attention_hidden=4),
            gdn=gm.GdnConfig(hidden_dims=(4, 4),
                             decoder_graph=gm.DecoderGraph.ORIGINAL),
        )
        params = gm.init_params(rng, cfg)

        def decode(graph):
            tape = Tape()
            pt = gm.wrap_params(tape, params)
            return gm.autoencoder_forward(tape, graph, cfg, pt).x_prime.value

        base = decode(g)
        for _ in range(5):
            perm = rng.permutation(8)
            permuted = decode(g.permuted(perm))
            assert np.max(np.abs(permuted[perm] - base)) < 1e-9
