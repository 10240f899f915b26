"""Seed-deterministic gradient-descent training of the toy encoder.

The optimizer is plain minibatch gradient descent: no momentum, no adaptive
moments, so the analytic-gradient check covers exactly what the trainer
applies. Minibatch order is reshuffled every epoch from the run seed, and
parameters start from seeded small-uniform noise, so two runs with the same
seed and data produce bit-identical encoders.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .encoder import ToyEncoder, build_vocab
from .objective import batch_loss, loss_gradient
from .triplets import NliTriplet

logger = logging.getLogger(__name__)


class TrainingDiverged(RuntimeError):
    """Raised when a step produces a non-finite loss."""


@dataclass
class TrainConfig:
    epochs: int = 30
    batch_size: int = 16
    learning_rate: float = 0.05
    tau: float = 0.05
    dim: int = 32
    seed: int = 0
    init_scale: float = 0.1

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")


@dataclass
class TrainResult:
    encoder: ToyEncoder
    initial_loss: float
    final_loss: float
    epoch_losses: list[float] = field(default_factory=list)


def init_encoder(
    texts: Sequence[str], dim: int, seed: int, init_scale: float = 0.1
) -> ToyEncoder:
    """Vocab from the texts; parameters from seeded small-uniform noise."""
    vocab = build_vocab(texts)
    rng = np.random.default_rng(seed)
    token_table = rng.uniform(-init_scale, init_scale, size=(len(vocab), dim))
    projection = rng.uniform(-init_scale, init_scale, size=(dim, dim))
    return ToyEncoder(vocab=vocab, token_table=token_table, projection=projection)


def train(triplets: Sequence[NliTriplet], config: TrainConfig) -> TrainResult:
    """Optimize the contrastive objective over the triplets."""
    if not triplets:
        raise ValueError("training requires at least one triplet")
    texts = [text for t in triplets for text in (t.anchor, t.positive, t.negative)]
    encoder = init_encoder(texts, config.dim, config.seed, config.init_scale)
    rng = np.random.default_rng(config.seed + 1)

    initial_loss = batch_loss(encoder, triplets, config.tau)
    epoch_losses: list[float] = []
    step = 0
    for epoch in range(config.epochs):
        order = rng.permutation(len(triplets))
        batch_losses = []
        for start in range(0, len(triplets), config.batch_size):
            batch = [triplets[i] for i in order[start : start + config.batch_size]]
            loss, grads = loss_gradient(encoder, batch, config.tau)
            if not np.isfinite(loss):
                raise TrainingDiverged(f"non-finite loss at step {step}")
            encoder.token_table -= config.learning_rate * grads.token_table
            encoder.projection -= config.learning_rate * grads.projection
            batch_losses.append(loss)
            step += 1
        epoch_mean = float(np.mean(batch_losses))
        epoch_losses.append(epoch_mean)
        logger.info("epoch %d/%d: mean loss %.6f", epoch + 1, config.epochs, epoch_mean)

    final_loss = batch_loss(encoder, triplets, config.tau)
    return TrainResult(
        encoder=encoder,
        initial_loss=initial_loss,
        final_loss=final_loss,
        epoch_losses=epoch_losses,
    )
