"""Batch contrastive objective over (anchor, positive, hard-negative) triplets.

For a batch of N aligned embedding rows the loss is

    L = -(1/N) * sum_i log( exp(cos(a_i, p_i)/tau)
            / sum_j [ exp(cos(a_i, p_j)/tau) + exp(cos(a_i, n_j)/tau) ] )

i.e. every positive and every hard negative in the batch appears in each
row's denominator, including j = i. Everything is computed in double
precision with log-sum-exp stabilization, so the value matches the naive
formula wherever the latter does not overflow.

``loss_gradient`` differentiates the same objective analytically through
the encoder's mean pooling and projection; it is checked against central
finite differences in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .encoder import ToyEncoder, pool
from .triplets import NliTriplet


@dataclass
class ParameterGrads:
    token_table: np.ndarray
    projection: np.ndarray


def _unit_rows(matrix: np.ndarray, what: str) -> tuple[np.ndarray, np.ndarray]:
    norms = np.linalg.norm(matrix, axis=1)
    if (norms == 0.0).any():
        row = int(np.nonzero(norms == 0.0)[0][0])
        raise ValueError(f"zero-norm {what} embedding at row {row}; cosine undefined")
    return matrix / norms[:, None], norms


def info_nce_loss(
    anchors: np.ndarray,
    positives: np.ndarray,
    negatives: np.ndarray,
    tau: float,
) -> float:
    """Stabilized batch loss; strictly positive for any finite inputs."""
    anchors = np.asarray(anchors, dtype=np.float64)
    positives = np.asarray(positives, dtype=np.float64)
    negatives = np.asarray(negatives, dtype=np.float64)
    if not (anchors.shape == positives.shape == negatives.shape) or anchors.ndim != 2:
        raise ValueError("anchors, positives, negatives must share an N x d shape")
    if tau <= 0:
        raise ValueError("tau must be positive")
    a_hat, _ = _unit_rows(anchors, "anchor")
    p_hat, _ = _unit_rows(positives, "positive")
    n_hat, _ = _unit_rows(negatives, "negative")
    sim_pos = a_hat @ p_hat.T / tau
    sim_neg = a_hat @ n_hat.T / tau
    terms = np.concatenate([sim_pos, sim_neg], axis=1)
    peak = terms.max(axis=1, keepdims=True)
    lse = peak[:, 0] + np.log(np.exp(terms - peak).sum(axis=1))
    return float(np.mean(lse - np.diagonal(sim_pos)))


def _encode_batch(
    encoder: ToyEncoder, texts: Sequence[str]
) -> tuple[np.ndarray, np.ndarray, list[list[int]]]:
    pooled_rows, index_lists = [], []
    for text in texts:
        pooled, indices = pool(encoder, text)
        pooled_rows.append(pooled)
        index_lists.append(indices)
    pooled_mat = np.stack(pooled_rows)
    embeddings = pooled_mat @ encoder.projection.T
    return embeddings, pooled_mat, index_lists


def _cosine_backprop(
    grad_sim: np.ndarray,
    u_hat: np.ndarray,
    u_norms: np.ndarray,
    v_hat: np.ndarray,
    v_norms: np.ndarray,
    sims: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of sum(grad_sim * cos(u_i, v_j)) w.r.t. the raw u and v rows."""
    grad_u = (grad_sim @ v_hat - (grad_sim * sims).sum(axis=1)[:, None] * u_hat)
    grad_u /= u_norms[:, None]
    grad_v = (grad_sim.T @ u_hat - (grad_sim * sims).sum(axis=0)[:, None] * v_hat)
    grad_v /= v_norms[:, None]
    return grad_u, grad_v


def loss_gradient(
    encoder: ToyEncoder, triplets: Sequence[NliTriplet], tau: float
) -> tuple[float, ParameterGrads]:
    """Loss and its analytic gradients w.r.t. token table and projection."""
    if not triplets:
        raise ValueError("gradient requires a non-empty batch")
    if tau <= 0:
        raise ValueError("tau must be positive")
    n = len(triplets)
    anchors, pooled_a, idx_a = _encode_batch(encoder, [t.anchor for t in triplets])
    positives, pooled_p, idx_p = _encode_batch(encoder, [t.positive for t in triplets])
    negatives, pooled_n, idx_n = _encode_batch(encoder, [t.negative for t in triplets])

    a_hat, a_norms = _unit_rows(anchors, "anchor")
    p_hat, p_norms = _unit_rows(positives, "positive")
    n_hat, n_norms = _unit_rows(negatives, "negative")
    sim_pos = a_hat @ p_hat.T
    sim_neg = a_hat @ n_hat.T

    scaled = np.concatenate([sim_pos, sim_neg], axis=1) / tau
    peak = scaled.max(axis=1, keepdims=True)
    exp_shifted = np.exp(scaled - peak)
    z = exp_shifted.sum(axis=1, keepdims=True)
    softmax = exp_shifted / z
    lse = peak[:, 0] + np.log(z[:, 0])
    loss = float(np.mean(lse - np.diagonal(sim_pos) / tau))

    # d loss / d cos, split back into the positive and negative blocks
    grad_sim_pos = softmax[:, :n] / (n * tau)
    grad_sim_pos[np.arange(n), np.arange(n)] -= 1.0 / (n * tau)
    grad_sim_neg = softmax[:, n:] / (n * tau)

    grad_a_pos, grad_p = _cosine_backprop(
        grad_sim_pos, a_hat, a_norms, p_hat, p_norms, sim_pos
    )
    grad_a_neg, grad_n = _cosine_backprop(
        grad_sim_neg, a_hat, a_norms, n_hat, n_norms, sim_neg
    )
    grad_a = grad_a_pos + grad_a_neg

    grad_table = np.zeros_like(encoder.token_table)
    grad_projection = np.zeros_like(encoder.projection)
    for grad_e, pooled, index_lists in (
        (grad_a, pooled_a, idx_a),
        (grad_p, pooled_p, idx_p),
        (grad_n, pooled_n, idx_n),
    ):
        grad_projection += grad_e.T @ pooled
        grad_pooled = grad_e @ encoder.projection
        for row, indices in enumerate(index_lists):
            contribution = grad_pooled[row] / len(indices)
            for token_index in indices:
                grad_table[token_index] += contribution
    return loss, ParameterGrads(token_table=grad_table, projection=grad_projection)


def batch_loss(encoder: ToyEncoder, triplets: Sequence[NliTriplet], tau: float) -> float:
    """Loss of a triplet batch under the current encoder parameters."""
    anchors, _, _ = _encode_batch(encoder, [t.anchor for t in triplets])
    positives, _, _ = _encode_batch(encoder, [t.positive for t in triplets])
    negatives, _, _ = _encode_batch(encoder, [t.negative for t in triplets])
    return info_nce_loss(anchors, positives, negatives, tau)
