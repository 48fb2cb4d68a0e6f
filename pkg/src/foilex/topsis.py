"""TOPSIS ranking over benefit-type criteria.

Columns are vector-normalized, scaled by the criterion weights, and every
alternative is scored by its relative closeness to the column-wise ideal
(maxima) versus the anti-ideal (minima).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


class ContractError(ValueError):
    pass


@dataclass(frozen=True)
class RankingResult:
    normalized: np.ndarray
    weighted: np.ndarray
    ideal: np.ndarray
    anti_ideal: np.ndarray
    d_best: np.ndarray
    d_worst: np.ndarray
    closeness: np.ndarray
    winner: int
    labels: tuple[str, ...] | None = None

    @property
    def winner_label(self) -> str | None:
        return None if self.labels is None else self.labels[self.winner]

    def order(self) -> list[int]:
        """Indices sorted best-first, ties broken the same way as ``winner``."""
        keys = list(self.labels) if self.labels is not None else list(range(len(self.closeness)))
        return sorted(range(len(self.closeness)), key=lambda i: (-self.closeness[i], keys[i]))

    def to_json(self) -> dict:
        return {
            "labels": list(self.labels) if self.labels is not None else None,
            "normalized": self.normalized.tolist(),
            "weighted": self.weighted.tolist(),
            "ideal": self.ideal.tolist(),
            "anti_ideal": self.anti_ideal.tolist(),
            "d_best": self.d_best.tolist(),
            "d_worst": self.d_worst.tolist(),
            "closeness": self.closeness.tolist(),
            "winner": self.winner,
            "winner_label": self.winner_label,
        }


def uniform_weights(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


def check_weights(weights: Sequence[float], n: int | None = None) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ContractError("weights must be a non-empty vector")
    if n is not None and w.size != n:
        raise ContractError(f"got {w.size} weights for {n} criteria")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ContractError("weights must be finite and non-negative")
    if abs(w.sum() - 1.0) > 1e-9:
        raise ContractError(f"weights must sum to 1, got {w.sum()!r}")
    return w


def _as_matrix(matrix) -> np.ndarray:
    x = np.asarray(matrix, dtype=float)
    if x.ndim != 2:
        raise ContractError("decision matrix must be two-dimensional")
    if x.shape[0] == 0:
        raise ContractError("decision matrix has no alternatives")
    if x.shape[1] == 0:
        raise ContractError("decision matrix has no criteria")
    if not np.all(np.isfinite(x)) or np.any(x < 0):
        raise ContractError("decision matrix entries must be finite and non-negative")
    return x


def normalize(matrix) -> np.ndarray:
    """Divide every column by its Euclidean norm; all-zero columns stay zero."""
    x = _as_matrix(matrix)
    norms = np.sqrt((x * x).sum(axis=0))
    out = np.zeros_like(x)
    nz = norms > 0
    out[:, nz] = x[:, nz] / norms[nz]
    return out


def rank(matrix, weights: Sequence[float] | None = None, labels: Sequence[str] | None = None) -> RankingResult:
    x = _as_matrix(matrix)
    m, n = x.shape
    w = uniform_weights(n) if weights is None else check_weights(weights, n)
    if labels is not None:
        labels = tuple(labels)
        if len(labels) != m:
            raise ContractError(f"got {len(labels)} labels for {m} alternatives")

    r = normalize(x)
    t = r * w
    ideal = t.max(axis=0)
    anti = t.min(axis=0)
    d_best = np.sqrt(((t - ideal) ** 2).sum(axis=1))
    d_worst = np.sqrt(((t - anti) ** 2).sum(axis=1))

    total = d_best + d_worst
    closeness = np.ones(m)
    # both distances zero only when the row is simultaneously ideal and anti-ideal
    nz = total > 0
    closeness[nz] = d_worst[nz] / total[nz]
    if m == 1:
        closeness[:] = 1.0

    return RankingResult(r, t, ideal, anti, d_best, d_worst, closeness, _argmax(closeness, labels), labels)


def _argmax(closeness: np.ndarray, labels: tuple[str, ...] | None) -> int:
    best = closeness.max()
    tied = [i for i, c in enumerate(closeness) if c == best]
    if labels is None:
        return tied[0]
    return min(tied, key=lambda i: labels[i])
