"""The graph autoencoder: smoothing encoder, attention pooling, and the
spectral-wavelet deconvolutional decoder.

Encoder: a stack of graph convolutions H = P ... relu(P X W) ... W with P a
normalized propagation operator (low-pass smoothing), optionally
column-stacking every layer's output.

Pooling: soft cluster assignment S = row_softmax(tanh(H W) W), coarse
features Z = S^T H and coarse structure S^T A S.  Unpooling maps back with
S Z and S A_pool S^T.

Decoder: an inverse (high-pass) filter pass followed by learned de-noising
between a wavelet synthesis/analysis pair,

    M  = inverse_filter(H') W_sharpen
    X' = wavelet( relu( inverse_wavelet( M W_denoise ) ) ) W_project

Two ablation variants keep the same depth and parameter count: one swaps
the leading inverse filter for the low-pass kernel, the other drops the
wavelet pair.  No layer uses a bias term.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
import scipy.sparse as sp

from . import autodiff as ad
from .autodiff import Tape, Tensor
from .filters import FilterKind, FilterSpec, apply_filter
from .graph import (
    Graph,
    NormalizedOperator,
    OperatorKind,
    build_left_norm_adj,
    build_renorm_adj,
    build_sym_laplacian,
)


class Propagation(Enum):
    RENORM_ADJ = "renorm_adj"
    LEFT_NORM_ADJ = "left_norm_adj"


class DecoderGraph(Enum):
    ORIGINAL = "original"
    UNPOOLED = "unpooled"


class DecoderVariant(Enum):
    """Decoder ablations; all share parameter shapes and depth."""

    GDN = "gdn"
    INVERSE_ONLY = "inverse"
    GCN = "gcn"


class FeatureLoss(Enum):
    MSE = "mse"
    BCE = "bce"


@dataclass(frozen=True)
class EncoderConfig:
    """layer_dims runs input -> hidden -> ... -> output, e.g. (d, 256, 16)."""

    layer_dims: tuple[int, ...]
    propagation: Propagation = Propagation.RENORM_ADJ
    stack_layer_outputs: bool = False

    def __post_init__(self):
        if len(self.layer_dims) < 2:
            raise ValueError("encoder needs at least one layer")
        if any(d <= 0 for d in self.layer_dims):
            raise ValueError("layer dimensions must be positive")

    @property
    def output_dim(self) -> int:
        if self.stack_layer_outputs:
            return sum(self.layer_dims[1:])
        return self.layer_dims[-1]


@dataclass(frozen=True)
class PoolConfig:
    clusters: int = 32
    attention_hidden: int = 128

    def __post_init__(self):
        if self.clusters < 1 or self.attention_hidden < 1:
            raise ValueError("pool dimensions must be positive")


@dataclass(frozen=True)
class GdnConfig:
    wavelet_order: int = 3
    wavelet_scale: float = 1.0
    inverse_order: int = 1
    decoder_graph: DecoderGraph = DecoderGraph.ORIGINAL
    variant: DecoderVariant = DecoderVariant.GDN
    hidden_dims: tuple[int, int] = (256, 256)

    def __post_init__(self):
        if self.wavelet_order < 0 or self.inverse_order < 0:
            raise ValueError("filter orders must be >= 0")

    def wavelet(self) -> FilterSpec:
        return FilterSpec(FilterKind.HEAT_WAVELET, self.wavelet_order, self.wavelet_scale)

    def inverse_wavelet(self) -> FilterSpec:
        return FilterSpec(
            FilterKind.INVERSE_HEAT_WAVELET, self.wavelet_order, self.wavelet_scale
        )

    def lead_filter(self) -> Optional[FilterSpec]:
        """Leading decoder filter; order 0 turns the inverse pass off."""
        if self.variant is DecoderVariant.GCN:
            return FilterSpec(FilterKind.LOW_PASS_GCN)
        if self.inverse_order == 0:
            return None
        return FilterSpec(FilterKind.INVERSE_GCN, self.inverse_order)


@dataclass(frozen=True)
class LossWeights:
    """Weights of the structure and feature reconstruction terms."""

    structure: float
    feature: float
    feature_loss: FeatureLoss = FeatureLoss.MSE

    def __post_init__(self):
        if self.structure < 0 or self.feature < 0:
            raise ValueError("loss weights must be nonnegative")
        if self.structure + self.feature == 0:
            raise ValueError("at least one loss weight must be positive")


@dataclass(frozen=True)
class ModelConfig:
    encoder: EncoderConfig
    gdn: GdnConfig
    pool: Optional[PoolConfig] = None
    output_dim: Optional[int] = None  # defaults to the encoder input dim

    @property
    def reconstruction_dim(self) -> int:
        return self.output_dim if self.output_dim is not None else self.encoder.layer_dims[0]


def init_params(rng: np.random.Generator, cfg: ModelConfig) -> dict[str, np.ndarray]:
    """Glorot-initialized weight dict for every layer the config names."""
    params: dict[str, np.ndarray] = {}
    dims = cfg.encoder.layer_dims
    for i, (din, dout) in enumerate(zip(dims[:-1], dims[1:])):
        params[f"encoder.layer{i}"] = ad.glorot(rng, din, dout)
    v = cfg.encoder.output_dim
    if cfg.pool is not None:
        params["pool.attn_hidden"] = ad.glorot(rng, v, cfg.pool.attention_hidden)
        params["pool.attn_assign"] = ad.glorot(rng, cfg.pool.attention_hidden, cfg.pool.clusters)
    h1, h2 = cfg.gdn.hidden_dims
    params["gdn.sharpen"] = ad.glorot(rng, v, h1)
    params["gdn.denoise"] = ad.glorot(rng, h1, h2)
    params["gdn.project"] = ad.glorot(rng, h2, cfg.reconstruction_dim)
    return params


def wrap_params(tape: Tape, params: dict[str, np.ndarray]) -> dict[str, Tensor]:
    return {name: tape.tensor(value) for name, value in params.items()}


def propagation_operator(g: Graph, propagation: Propagation) -> NormalizedOperator:
    if propagation is Propagation.RENORM_ADJ:
        return build_renorm_adj(g)
    return build_left_norm_adj(g)


def encode(
    tape: Tape,
    g: Graph,
    cfg: EncoderConfig,
    ptensors: dict[str, Tensor],
    operator: Optional[NormalizedOperator] = None,
) -> Tensor:
    """Smoothed node representations; relu between layers, linear last."""
    if g.features is None:
        raise ValueError("encoder needs node features")
    if operator is None:
        operator = propagation_operator(g, cfg.propagation)
    h = tape.tensor(g.features)
    layer_outputs = []
    n_layers = len(cfg.layer_dims) - 1
    for i in range(n_layers):
        h = ad.spmm(operator.matrix, ad.matmul(h, ptensors[f"encoder.layer{i}"]))
        if i < n_layers - 1:
            h = ad.relu(h)
        layer_outputs.append(h)
    if cfg.stack_layer_outputs and len(layer_outputs) > 1:
        return ad.hstack(*layer_outputs)
    return layer_outputs[-1]


def pool(
    tape: Tape,
    h: Tensor,
    adj: sp.spmatrix,
    cfg: PoolConfig,
    ptensors: dict[str, Tensor],
) -> tuple[Tensor, Tensor, Tensor]:
    """Soft assignment S plus the coarse pair (Z, A_pool)."""
    scores = ad.matmul(ad.tanh(ad.matmul(h, ptensors["pool.attn_hidden"])),
                       ptensors["pool.attn_assign"])
    s = ad.row_softmax(scores)
    st = ad.transpose(s)
    z = ad.matmul(st, h)
    a_pool = ad.matmul(st, ad.spmm(adj, s))
    return s, z, a_pool


def unpool(s: Tensor, z: Tensor, a_pool: Tensor) -> tuple[Tensor, Tensor]:
    """Upscale the coarse pair back to node resolution."""
    h_prime = ad.matmul(s, z)
    a_prime = ad.matmul(ad.matmul(s, a_pool), ad.transpose(s))
    return h_prime, a_prime


def decoder_laplacian(
    g: Graph, cfg: GdnConfig, a_prime: Optional[np.ndarray] = None
) -> NormalizedOperator:
    """Laplacian the decoder filters run on.

    ORIGINAL uses the input graph.  UNPOOLED binarizes the dense unpooled
    structure at 0.5 (the soft A' is kept separately for the structure
    loss; the filter pipeline needs an unweighted graph).
    """
    if cfg.decoder_graph is DecoderGraph.ORIGINAL:
        return build_sym_laplacian(g)
    if a_prime is None:
        raise ValueError("UNPOOLED decoding needs the unpooled structure")
    binary = (np.asarray(a_prime) > 0.5).astype(np.float64)
    binary = np.maximum(binary, binary.T)
    np.fill_diagonal(binary, 0.0)
    return build_sym_laplacian(Graph(n=g.n, adj=sp.csr_matrix(binary)))


def gdn_decode(
    tape: Tape,
    lap: NormalizedOperator,
    h_prime: Tensor,
    cfg: GdnConfig,
    ptensors: dict[str, Tensor],
) -> Tensor:
    """Recover node signals from smoothed representations.

    GDN: one inverse-filter pass M, then relu de-noising between the
    inverse/forward wavelet pair.  The ablation variants keep the same
    weights, depth, and relu but apply their single filter (inverse or
    low-pass) at both stages instead of the wavelet sandwich.
    """
    w3, w4, w5 = (ptensors["gdn.sharpen"], ptensors["gdn.denoise"], ptensors["gdn.project"])
    lead = cfg.lead_filter()

    def lead_pass(t):
        return t if lead is None else apply_filter(lead, lap, t)

    m = ad.matmul(lead_pass(h_prime), w3)
    if cfg.variant is DecoderVariant.GDN:
        u = apply_filter(cfg.inverse_wavelet(), lap, ad.matmul(m, w4))
        u = apply_filter(cfg.wavelet(), lap, ad.relu(u))
    else:
        u = lead_pass(ad.matmul(ad.relu(m), w4))
    return ad.matmul(u, w5)


def reconstruction_loss(
    tape: Tape,
    g: Graph,
    a_prime: Optional[Tensor],
    x_prime: Tensor,
    weights: LossWeights,
) -> Tensor:
    """Weighted sum of structure and feature reconstruction losses.

    A zero weight drops its term entirely, so structure-free training never
    needs an unpooled adjacency.
    """
    terms = []
    if weights.structure > 0:
        if a_prime is None:
            raise ValueError("structure loss requested but no reconstructed adjacency given")
        dense_adj = g.adj.toarray().astype(np.float64)
        terms.append(ad.scalar_mul(weights.structure, ad.mse_loss(a_prime, dense_adj)))
    if weights.feature > 0:
        if g.features is None:
            raise ValueError("feature loss requested but the graph has no features")
        if weights.feature_loss is FeatureLoss.BCE:
            feat = ad.bce_loss(x_prime, g.features)
        else:
            feat = ad.mse_loss(x_prime, g.features)
        terms.append(ad.scalar_mul(weights.feature, feat))
    total = terms[0]
    for extra in terms[1:]:
        total = ad.add(total, extra)
    return total


@dataclass
class ForwardResult:
    h: Tensor
    s: Tensor
    z: Tensor
    a_pool: Tensor
    h_prime: Tensor
    a_prime: Tensor
    x_prime: Tensor


def autoencoder_forward(
    tape: Tape,
    g: Graph,
    cfg: ModelConfig,
    ptensors: dict[str, Tensor],
    operator: Optional[NormalizedOperator] = None,
    dec_lap: Optional[NormalizedOperator] = None,
) -> ForwardResult:
    """Full encode -> pool -> unpool -> decode pass for one graph."""
    if cfg.pool is None:
        raise ValueError("autoencoder_forward needs a pooling config")
    h = encode(tape, g, cfg.encoder, ptensors, operator=operator)
    s, z, a_pool = pool(tape, h, g.adj, cfg.pool, ptensors)
    h_prime, a_prime = unpool(s, z, a_pool)
    if dec_lap is None:
        dec_lap = decoder_laplacian(g, cfg.gdn, a_prime=a_prime.value)
    x_prime = gdn_decode(tape, dec_lap, h_prime, cfg.gdn, ptensors)
    return ForwardResult(h, s, z, a_pool, h_prime, a_prime, x_prime)
