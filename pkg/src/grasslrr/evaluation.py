"""Permutation-matched clustering accuracy and confusion counts.

Predicted labels are renamed by the assignment that maximizes the number of
matched points (a minimum-cost matching on the negated contingency table),
so accuracy never depends on the arbitrary numbering a clusterer emits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .clustering import ClusterLabels
from .errors import InvalidInputError


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    matching: list
    confusion: np.ndarray


def hungarian(cost) -> list[int]:
    """Minimum-cost assignment; returns the chosen column for each row.

    Rectangular inputs are padded to square with a cost exceeding every real
    entry, so unmatched rows land on dummy columns (index >= original cols).
    """
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.size == 0:
        raise InvalidInputError(f"cost must be a nonempty 2-D matrix, got shape {cost.shape}")
    if not np.isfinite(cost).all():
        raise InvalidInputError("cost contains non-finite entries")
    n, m = cost.shape
    side = max(n, m)
    pad_value = float(cost.max()) + 1.0
    padded = np.full((side, side), pad_value)
    padded[:n, :m] = cost
    rows, cols = linear_sum_assignment(padded)
    assignment = np.empty(side, dtype=np.int64)
    assignment[rows] = cols
    return assignment[:n].tolist()


def accuracy(pred: ClusterLabels, truth: ClusterLabels) -> EvalReport:
    """Fraction of points matched under the best predicted-to-true label map."""
    if pred.labels.shape[0] != truth.labels.shape[0]:
        raise InvalidInputError(
            f"label lengths differ: {pred.labels.shape[0]} vs {truth.labels.shape[0]}"
        )
    n = pred.labels.shape[0]
    side = max(pred.n_clusters, truth.n_clusters)
    contingency = np.zeros((side, side), dtype=np.int64)
    np.add.at(contingency, (pred.labels, truth.labels), 1)

    assignment = hungarian(-contingency.astype(np.float64))
    matched = int(sum(contingency[p, assignment[p]] for p in range(side)))
    matching = [(p, assignment[p]) for p in range(pred.n_clusters)]
    confusion = contingency.copy()
    confusion.setflags(write=False)
    return EvalReport(accuracy=matched / n, matching=matching, confusion=confusion)
