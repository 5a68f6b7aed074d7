"""Seeded training loops, checkpointing, and graph-level embeddings.

Three regimes share one entry point:

* EMBED        one gradient step per graph (minibatch size 1 by default),
               feature-reconstruction loss, Adam;
* RECONSTRUCT  full-batch training of the decoder against a single graph
               signal, optionally with frozen encoder weights;
* RECSYS       full-batch masked regression of a rating matrix on a social
               graph, pooling-free.

Everything is deterministic given (seed, config, dataset): initialization
and shuffling draw from one seeded generator, updates are applied in a
fixed parameter order, and batch reductions are serial.  Per-graph tapes
are independent, so forward/backward passes could run concurrently; the
ordered reduction keeps results worker-count independent.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import autodiff as ad
from . import model as gm
from .autodiff import AdamState, Tape, adam_step, backward
from .graph import Graph, NormalizedOperator, build_sym_laplacian

CHECKPOINT_VERSION = 1


class TaskKind(Enum):
    EMBED = "embed"
    RECSYS = "recsys"
    RECONSTRUCT = "reconstruct"


@dataclass(frozen=True)
class TrainConfig:
    task: TaskKind
    epochs: int = 20
    batch_size: int = 1
    learning_rate: float = 0.01
    seed: int = 0
    loss_weights: gm.LossWeights = field(
        default_factory=lambda: gm.LossWeights(structure=0.0, feature=1.0,
                                               feature_loss=gm.FeatureLoss.BCE)
    )
    checkpoint_every: int = 0  # epochs between checkpoints; 0 = final only

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.learning_rate < 0:
            raise ValueError("learning rate must be nonnegative")
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")


@dataclass
class RunLog:
    """Per-epoch losses and wall-clock, plus the final metric map."""

    losses: list[float] = field(default_factory=list)
    epoch_seconds: list[float] = field(default_factory=list)
    final_metrics: dict[str, float] = field(default_factory=dict)
    seed: int = 0
    config: dict = field(default_factory=dict)


class TrainingDiverged(RuntimeError):
    pass


def _check_finite_loss(value: float, epoch: int, batch: int) -> float:
    if not np.isfinite(value):
        raise TrainingDiverged(
            f"non-finite loss {value!r} at epoch {epoch}, batch {batch}"
        )
    return float(value)


def _config_snapshot(tc: TrainConfig, cfg: gm.ModelConfig) -> dict:
    return {
        "task": tc.task.value,
        "epochs": tc.epochs,
        "batch_size": tc.batch_size,
        "learning_rate": tc.learning_rate,
        "seed": tc.seed,
        "loss.structure": tc.loss_weights.structure,
        "loss.feature": tc.loss_weights.feature,
        "loss.feature_loss": tc.loss_weights.feature_loss.value,
        "encoder.layer_dims": ",".join(map(str, cfg.encoder.layer_dims)),
        "encoder.propagation": cfg.encoder.propagation.value,
        "encoder.stack_layer_outputs": cfg.encoder.stack_layer_outputs,
        "pool.clusters": cfg.pool.clusters if cfg.pool else None,
        "pool.attention_hidden": cfg.pool.attention_hidden if cfg.pool else None,
        "gdn.wavelet_order": cfg.gdn.wavelet_order,
        "gdn.wavelet_scale": cfg.gdn.wavelet_scale,
        "gdn.inverse_order": cfg.gdn.inverse_order,
        "gdn.decoder_graph": cfg.gdn.decoder_graph.value,
        "gdn.variant": cfg.gdn.variant.value,
        "gdn.hidden_dims": ",".join(map(str, cfg.gdn.hidden_dims)),
    }


def graph_loss(
    g: Graph,
    cfg: gm.ModelConfig,
    params: dict[str, np.ndarray],
    weights: gm.LossWeights,
    operator: Optional[NormalizedOperator] = None,
    dec_lap: Optional[NormalizedOperator] = None,
) -> tuple[float, dict[str, np.ndarray]]:
    """One forward/backward pass; returns (loss value, gradient dict)."""
    tape = Tape()
    ptensors = gm.wrap_params(tape, params)
    out = gm.autoencoder_forward(tape, g, cfg, ptensors, operator=operator, dec_lap=dec_lap)
    a_prime = out.a_prime if weights.structure > 0 else None
    loss = gm.reconstruction_loss(tape, g, a_prime, out.x_prime, weights)
    backward(tape, loss)
    grads = {name: t.grad for name, t in ptensors.items() if t.grad is not None}
    return float(loss.value), grads


def _accumulate(total: Optional[dict], grads: dict, scale: float) -> dict:
    if total is None:
        return {k: scale * v for k, v in grads.items()}
    for k, v in grads.items():
        if k in total:
            total[k] = total[k] + scale * v
        else:
            total[k] = scale * v
    return total


def train_embed(
    graphs: Sequence[Graph],
    cfg: gm.ModelConfig,
    tc: TrainConfig,
    out_dir: Optional[Path] = None,
    trainable: Optional[set[str]] = None,
) -> tuple[dict[str, np.ndarray], RunLog]:
    """Minibatch-over-graphs training of the full autoencoder."""
    if not graphs:
        raise ValueError("dataset is empty")
    rng = np.random.default_rng(tc.seed)
    params = gm.init_params(rng, cfg)
    state = AdamState(learning_rate=tc.learning_rate)
    log = RunLog(seed=tc.seed, config=_config_snapshot(tc, cfg))

    prop = [gm.propagation_operator(g, cfg.encoder.propagation) for g in graphs]
    dec = None
    if cfg.gdn.decoder_graph is gm.DecoderGraph.ORIGINAL:
        dec = [build_sym_laplacian(g) for g in graphs]

    order = np.arange(len(graphs))
    for epoch in range(tc.epochs):
        started = time.perf_counter()
        rng.shuffle(order)
        epoch_loss = 0.0
        for b0 in range(0, len(order), tc.batch_size):
            batch = order[b0: b0 + tc.batch_size]
            total_grads: Optional[dict] = None
            batch_loss = 0.0
            for idx in batch:
                value, grads = graph_loss(
                    graphs[idx], cfg, params, tc.loss_weights,
                    operator=prop[idx], dec_lap=None if dec is None else dec[idx],
                )
                batch_loss += value
                total_grads = _accumulate(total_grads, grads, 1.0 / len(batch))
            _check_finite_loss(batch_loss / len(batch), epoch, b0 // tc.batch_size)
            if trainable is not None:
                total_grads = {k: v for k, v in total_grads.items() if k in trainable}
            params = adam_step(state, params, total_grads)
            epoch_loss += batch_loss
        log.losses.append(epoch_loss / len(order))
        log.epoch_seconds.append(time.perf_counter() - started)
        _maybe_checkpoint(out_dir, tc, params, epoch)
    _finalize_checkpoint(out_dir, params)
    return params, log


def train_single_graph(
    g: Graph,
    target: np.ndarray,
    cfg: gm.ModelConfig,
    tc: TrainConfig,
    mask: Optional[np.ndarray] = None,
    out_dir: Optional[Path] = None,
    trainable: Optional[set[str]] = None,
    init: Optional[dict[str, np.ndarray]] = None,
    prop_op: Optional[NormalizedOperator] = None,
) -> tuple[dict[str, np.ndarray], RunLog]:
    """Full-batch training against one graph.

    Pooling-free when cfg.pool is None (encode feeds the decoder directly);
    a mask switches the objective to masked MSE over observed entries.
    """
    rng = np.random.default_rng(tc.seed)
    params = dict(init) if init is not None else gm.init_params(rng, cfg)
    state = AdamState(learning_rate=tc.learning_rate)
    log = RunLog(seed=tc.seed, config=_config_snapshot(tc, cfg))

    prop = prop_op if prop_op is not None else gm.propagation_operator(g, cfg.encoder.propagation)
    dec_lap = None
    if cfg.pool is None or cfg.gdn.decoder_graph is gm.DecoderGraph.ORIGINAL:
        dec_lap = build_sym_laplacian(g)

    for epoch in range(tc.epochs):
        started = time.perf_counter()
        tape = Tape()
        ptensors = gm.wrap_params(tape, params)
        if cfg.pool is None:
            h = gm.encode(tape, g, cfg.encoder, ptensors, operator=prop)
            x_prime = gm.gdn_decode(tape, dec_lap, h, cfg.gdn, ptensors)
        else:
            out = gm.autoencoder_forward(tape, g, cfg, ptensors, operator=prop, dec_lap=dec_lap)
            x_prime = out.x_prime
        if mask is None:
            loss = ad.mse_loss(x_prime, target)
        else:
            loss = ad.masked_mse_loss(x_prime, target, mask)
        value = _check_finite_loss(float(loss.value), epoch, 0)
        backward(tape, loss)
        grads = {name: t.grad for name, t in ptensors.items() if t.grad is not None}
        if trainable is not None:
            grads = {k: v for k, v in grads.items() if k in trainable}
        params = adam_step(state, params, grads)
        log.losses.append(value)
        log.epoch_seconds.append(time.perf_counter() - started)
        _maybe_checkpoint(out_dir, tc, params, epoch)
    _finalize_checkpoint(out_dir, params)
    return params, log


def train(dataset, cfg: gm.ModelConfig, tc: TrainConfig, out_dir=None, **kwargs):
    """Dispatch on the task: EMBED takes a graph sequence, the single-graph
    tasks take (graph, target[, mask]) via keyword arguments."""
    if tc.task is TaskKind.EMBED:
        return train_embed(dataset, cfg, tc, out_dir=out_dir, **kwargs)
    return train_single_graph(dataset, cfg=cfg, tc=tc, out_dir=out_dir, **kwargs)


def predict_features(
    g: Graph,
    cfg: gm.ModelConfig,
    params: dict[str, np.ndarray],
    prop_op: Optional[NormalizedOperator] = None,
) -> np.ndarray:
    """Deterministic forward pass returning the reconstructed features."""
    tape = Tape()
    ptensors = gm.wrap_params(tape, params)
    if cfg.pool is None:
        prop = prop_op if prop_op is not None else gm.propagation_operator(
            g, cfg.encoder.propagation
        )
        h = gm.encode(tape, g, cfg.encoder, ptensors, operator=prop)
        lap = build_sym_laplacian(g)
        return gm.gdn_decode(tape, lap, h, cfg.gdn, ptensors).value
    return gm.autoencoder_forward(tape, g, cfg, ptensors).x_prime.value


def embed_graphs(
    params: dict[str, np.ndarray],
    graphs: Sequence[Graph],
    cfg: gm.ModelConfig,
    expected_dim: Optional[int] = 512,
) -> np.ndarray:
    """Row-major flattening of each graph's coarse features Z.

    Rows follow dataset order.  A mismatch with the configured embedding
    dimension is reported as a warning, not an error.
    """
    if cfg.pool is None:
        raise ValueError("embeddings need a pooling config")
    rows = []
    for g in graphs:
        tape = Tape()
        ptensors = gm.wrap_params(tape, params)
        h = gm.encode(tape, g, cfg.encoder, ptensors)
        _, z, _ = gm.pool(tape, h, g.adj, cfg.pool, ptensors)
        rows.append(z.value.ravel(order="C"))
    out = np.vstack(rows)
    if expected_dim is not None and out.shape[1] != expected_dim:
        warnings.warn(
            f"embedding dimension {out.shape[1]} != configured {expected_dim}",
            stacklevel=2,
        )
    return out


def save_checkpoint(path, params: dict[str, np.ndarray]) -> None:
    """Versioned npz dump of the named weight matrices."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez(path, format_version=np.array([CHECKPOINT_VERSION]),
             **{f"param:{k}": v for k, v in params.items()})


def load_checkpoint(path) -> dict[str, np.ndarray]:
    with np.load(Path(path)) as data:
        version = int(data["format_version"][0])
        if version != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        return {
            key[len("param:"):]: np.array(data[key])
            for key in data.files
            if key.startswith("param:")
        }


def _maybe_checkpoint(out_dir, tc: TrainConfig, params, epoch: int) -> None:
    if out_dir is None or tc.checkpoint_every <= 0:
        return
    if (epoch + 1) % tc.checkpoint_every == 0:
        save_checkpoint(Path(out_dir) / f"checkpoint_epoch{epoch + 1:04d}.npz", params)


def _finalize_checkpoint(out_dir, params) -> None:
    if out_dir is not None:
        save_checkpoint(Path(out_dir) / "checkpoint_final.npz", params)
