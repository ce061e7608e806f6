"""Pairwise cross-entropy losses over distance matrices, and triplet weights.

A batch holds ``K = 2N`` embeddings: two samples from each of N classes,
linked by an involution ``pos``.  For each anchor ``i`` the softmax runs over
the ``2N - 1`` terms ``k != i`` (the positive ``pos(i)`` plus ``2N - 2``
negatives); the anchor's own self-term is excluded.  All softmax computations
use the max-shifted log-sum-exp form, since temperatures as low as 0.05 push
the raw exponentials outside float64 range.

The softmax coefficient of each negative is the triplet weight ``p``: the
fraction of the anchor's gradient budget that the negative receives.  The
loss over a batch is the *sum* over anchors; callers that want a scale-free
number divide by K.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import BallConfig, DomainError, ball_distance, cos_dist

__all__ = [
    "LOSS_MODES",
    "DistanceMatrix",
    "LossConfig",
    "PairedBatch",
    "TripletWeightMatrix",
    "convex_combo_loss",
    "distance_matrix",
    "infonce_loss",
    "mix_loss",
    "mixed_distance_array",
    "pairwise_ce_loss",
    "softmax_weights",
    "triplet_weights",
]

LOSS_MODES = ("euclidean", "hyperbolic", "mixed", "convex_combo")


@dataclass
class PairedBatch:
    """K x n embeddings with labels and an anchor -> positive involution."""

    Z: np.ndarray
    labels: np.ndarray
    pos: np.ndarray

    def __post_init__(self):
        self.Z = np.asarray(self.Z, dtype=np.float64)
        self.labels = np.asarray(self.labels)
        self.pos = np.asarray(self.pos, dtype=np.int64)
        self.validate()

    def validate(self) -> None:
        K = self.Z.shape[0]
        if self.Z.ndim != 2:
            raise ValueError("Z must be a K x n matrix")
        if K % 2 != 0 or K < 4:
            raise ValueError(f"batch size must be 2N with N >= 2, got K={K}")
        if self.labels.shape != (K,) or self.pos.shape != (K,):
            raise ValueError("labels and pos must have one entry per row")
        idx = np.arange(K)
        if np.any(self.pos == idx) or np.any(self.pos[self.pos] != idx):
            raise ValueError("pos must be an involution without fixed points")
        if np.any(self.labels != self.labels[self.pos]):
            raise ValueError("paired rows must share a label")
        pair_labels = self.labels[idx < self.pos]
        if len(set(pair_labels.tolist())) != K // 2:
            raise ValueError("the N pair labels must be distinct")

    @property
    def K(self) -> int:
        return self.Z.shape[0]

    @property
    def num_pairs(self) -> int:
        return self.K // 2

    @classmethod
    def from_interleaved(cls, Z: np.ndarray, labels: np.ndarray) -> "PairedBatch":
        """Build a batch whose rows alternate (sample, its positive)."""
        K = len(labels)
        pos = np.arange(K) ^ 1
        return cls(Z=Z, labels=labels, pos=pos)


@dataclass(frozen=True)
class LossConfig:
    """Temperature, mixing weight, and mode selection for the batch loss."""

    tau: float
    mode: str = "euclidean"
    lam: float = 0.0
    combo_weight: float = 0.5

    def __post_init__(self):
        if not self.tau > 0.0:
            raise ValueError(f"tau must be > 0, got {self.tau}")
        if not self.lam >= 0.0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")
        if self.mode not in LOSS_MODES:
            raise ValueError(f"mode must be one of {LOSS_MODES}, got {self.mode!r}")
        if not 0.0 <= self.combo_weight <= 1.0:
            raise ValueError(
                f"combo_weight must lie in [0, 1], got {self.combo_weight}"
            )


@dataclass
class DistanceMatrix:
    """K x K pairwise distances under a named metric."""

    D: np.ndarray
    metric: str
    curvature: float | None = None

    def __post_init__(self):
        self.D = np.asarray(self.D, dtype=np.float64)
        if self.D.ndim != 2 or self.D.shape[0] != self.D.shape[1]:
            raise ValueError("D must be square")
        if self.metric not in ("cosine", "hyperbolic"):
            raise ValueError(f"metric must be 'cosine' or 'hyperbolic', got {self.metric!r}")


@dataclass
class TripletWeightMatrix:
    """Per-anchor softmax weights: p_neg over negatives plus the positive's p_pos."""

    p_neg: np.ndarray
    p_pos: np.ndarray

    def check_normalized(self, atol: float = 1e-9) -> None:
        total = self.p_pos + self.p_neg.sum(axis=1)
        if np.any(np.abs(total - 1.0) > atol):
            raise RuntimeError("triplet weights do not sum to 1 per anchor")


def _canonical_metric(metric: str) -> str:
    aliases = {"cos": "cosine", "cosine": "cosine", "hyp": "hyperbolic", "hyperbolic": "hyperbolic"}
    if metric not in aliases:
        raise ValueError(f"unknown metric tag {metric!r}")
    return aliases[metric]


def pairwise_cos_array(Z: np.ndarray) -> np.ndarray:
    """All-pairs cosine distances via the broadcast kernel (bitwise symmetric)."""
    D = cos_dist(Z[:, None, :], Z[None, :, :])
    np.fill_diagonal(D, 0.0)
    return D


def pairwise_ball_array(Z: np.ndarray, cfg: BallConfig) -> np.ndarray:
    """All-pairs ball distances; rows must already be inside the ball."""
    D = ball_distance(Z[:, None, :], Z[None, :, :], cfg)
    np.fill_diagonal(D, 0.0)
    return D


def distance_matrix(batch: PairedBatch, metric: str, cfg: BallConfig | None = None) -> DistanceMatrix:
    """Assemble the symmetric K x K distance matrix for a batch.

    Geometry domain errors are re-raised with the offending row index.
    """
    metric = _canonical_metric(metric)
    Z = batch.Z
    if metric == "cosine":
        norms = np.linalg.norm(Z, axis=1)
        bad = np.flatnonzero(norms == 0.0)
        if bad.size:
            raise DomainError(f"row {bad[0]} has zero norm; cosine distance undefined")
        return DistanceMatrix(D=pairwise_cos_array(Z), metric="cosine")
    if cfg is None:
        raise ValueError("hyperbolic metric requires a BallConfig")
    if cfg.c > 0.0:
        sq = np.sum(Z * Z, axis=1)
        bad = np.flatnonzero(cfg.c * sq >= 1.0)
        if bad.size:
            raise DomainError(
                f"row {bad[0]} lies outside the ball for c={cfg.c}; "
                "map rows through exp_map_0 first"
            )
    return DistanceMatrix(D=pairwise_ball_array(Z, cfg), metric="hyperbolic", curvature=cfg.c)


def _logits(D: np.ndarray, tau: float) -> np.ndarray:
    logits = -D / tau
    np.fill_diagonal(logits, -np.inf)
    return logits


def _ce_from_logits(logits: np.ndarray, pos: np.ndarray) -> float:
    K = logits.shape[0]
    shift = np.max(logits, axis=1, keepdims=True)
    lse = shift[:, 0] + np.log(np.sum(np.exp(logits - shift), axis=1))
    lpos = logits[np.arange(K), pos]
    return float(np.sum(lse - lpos))


def _weights_from_logits(logits: np.ndarray, pos: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    K = logits.shape[0]
    shift = np.max(logits, axis=1, keepdims=True)
    expd = np.exp(logits - shift)
    p = expd / np.sum(expd, axis=1, keepdims=True)
    idx = np.arange(K)
    p_pos = p[idx, pos].copy()
    p_neg = p.copy()
    p_neg[idx, idx] = 0.0
    p_neg[idx, pos] = 0.0
    return p_neg, p_pos


def _require_batch_shape(D: np.ndarray, batch: PairedBatch) -> None:
    if D.shape != (batch.K, batch.K):
        raise ValueError(f"distance matrix shape {D.shape} does not match batch K={batch.K}")
    if batch.num_pairs < 2:
        raise ValueError("need N >= 2 pairs: with a single pair no negatives exist")


def pairwise_ce_loss(D: DistanceMatrix | np.ndarray, batch: PairedBatch, tau: float) -> float:
    """Softmax cross-entropy over distances, summed across the K anchors.

    For anchor ``i`` the positive term is ``exp(-D[i, pos(i)] / tau)`` and the
    denominator adds the 2N - 2 negatives, i.e. all ``k != i``.
    """
    if not tau > 0.0:
        raise ValueError(f"tau must be > 0, got {tau}")
    Dm = D.D if isinstance(D, DistanceMatrix) else np.asarray(D, dtype=np.float64)
    _require_batch_shape(Dm, batch)
    return _ce_from_logits(_logits(Dm, tau), batch.pos)


def infonce_loss(batch: PairedBatch, tau: float) -> float:
    """Similarity-form contrastive loss with logits ``z_i . z_j / tau``.

    Rows are unit-normalized internally.  Since the chord distance is
    ``2 - 2 s`` on normalized rows, this equals :func:`pairwise_ce_loss` on
    the cosine matrix evaluated at temperature ``2 * tau`` exactly.
    """
    if not tau > 0.0:
        raise ValueError(f"tau must be > 0, got {tau}")
    if batch.num_pairs < 2:
        raise ValueError("need N >= 2 pairs: with a single pair no negatives exist")
    Z = batch.Z
    norms = np.linalg.norm(Z, axis=1, keepdims=True)
    if np.any(norms == 0.0):
        raise DomainError("batch contains a zero-norm row")
    Zn = Z / norms
    S = np.sum(Zn[:, None, :] * Zn[None, :, :], axis=-1)
    logits = S / tau
    np.fill_diagonal(logits, -np.inf)
    return _ce_from_logits(logits, batch.pos)


def softmax_weights(D: np.ndarray, pos: np.ndarray, tau: float) -> tuple[np.ndarray, np.ndarray]:
    """Max-shifted softmax weights ``(p_neg, p_pos)`` for a raw distance array."""
    return _weights_from_logits(_logits(np.asarray(D, dtype=np.float64), tau), pos)


def triplet_weights(D: DistanceMatrix | np.ndarray, batch: PairedBatch, tau: float) -> TripletWeightMatrix:
    """Extract the per-anchor softmax weights from a distance matrix."""
    if not tau > 0.0:
        raise ValueError(f"tau must be > 0, got {tau}")
    Dm = D.D if isinstance(D, DistanceMatrix) else np.asarray(D, dtype=np.float64)
    _require_batch_shape(Dm, batch)
    p_neg, p_pos = softmax_weights(Dm, batch.pos, tau)
    return TripletWeightMatrix(p_neg=p_neg, p_pos=p_pos)


def mixed_distance_array(
    Zcos: np.ndarray, Zhyp: np.ndarray, lam: float, cfg: BallConfig
) -> np.ndarray:
    """Fused distances ``D_cos(zc_i, zc_k) + lam * D_ball(zh_i, zh_k)``."""
    Zcos = np.asarray(Zcos, dtype=np.float64)
    Zhyp = np.asarray(Zhyp, dtype=np.float64)
    if Zcos.shape[0] != Zhyp.shape[0]:
        raise ValueError(
            f"branch row counts differ: {Zcos.shape[0]} vs {Zhyp.shape[0]}"
        )
    return pairwise_cos_array(Zcos) + lam * pairwise_ball_array(Zhyp, cfg)


def mix_loss(
    Zcos: np.ndarray,
    Zhyp: np.ndarray,
    batch: PairedBatch,
    tau: float,
    lam: float,
    cfg: BallConfig,
) -> float:
    """Pairwise cross-entropy over the fused distance of the two branches.

    ``Zcos`` holds the Euclidean-branch outputs and ``Zhyp`` the ball points
    of the hyperbolic branch for the same anchors and pairing.  At
    ``lam = 0`` this equals the cosine-only loss exactly.
    """
    D = mixed_distance_array(Zcos, Zhyp, lam, cfg)
    return pairwise_ce_loss(D, batch, tau)


def convex_combo_loss(l_hyp: float, l_nce: float, w: float) -> float:
    """Scalar blend ``w * l_hyp + (1 - w) * l_nce`` of two batch losses."""
    if not 0.0 <= w <= 1.0:
        raise ValueError(f"combo weight must lie in [0, 1], got {w}")
    return w * l_hyp + (1.0 - w) * l_nce
