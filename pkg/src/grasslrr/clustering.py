"""From a coefficient matrix to cluster labels: affinity, spectral embedding, k-means.

The affinity is the symmetrized absolute coefficient matrix (|Z| + |Z^T|)/2.
Clustering follows the Ng-Jordan-Weiss recipe: eigenvectors of the symmetric
normalized Laplacian, row-normalized, then k-means.

Determinism and permutation equivariance are taken seriously: k-means
canonicalizes the row order (lexicographic) before any seeded sampling and
maps labels back afterwards, so permuting the input points permutes the
output labels identically under the same seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .admm import AdmmConfig, admm_solve
from .closed_form import LowRankCoefficients, build_delta, glrr_f_solve, kglrr_solve
from .errors import InvalidConfigError, InvalidInputError
from .kernels import KernelSpec
from .manifold import GrassmannPoint, as_matrix
from .rng import SplitMix64

METHODS = ("glrr-f", "glrr-21", "kglrr")


@dataclass(frozen=True)
class NcutConfig:
    n_clusters: int
    restarts: int = 20
    max_iters: int = 300
    seed: int = 0

    def __post_init__(self):
        if self.n_clusters < 2:
            raise InvalidConfigError(f"need at least 2 clusters, got {self.n_clusters}")
        if self.restarts < 1:
            raise InvalidConfigError("restarts must be >= 1")


@dataclass(frozen=True)
class ClusterLabels:
    labels: np.ndarray
    n_clusters: int

    def __post_init__(self):
        lab = np.asarray(self.labels, dtype=np.int64)
        if lab.ndim != 1:
            raise InvalidInputError("labels must be 1-D")
        if lab.size < self.n_clusters:
            raise InvalidInputError("fewer points than clusters")
        if lab.size and (lab.min() < 0 or lab.max() >= self.n_clusters):
            raise InvalidInputError("label out of range")
        lab.setflags(write=False)
        object.__setattr__(self, "labels", lab)


def affinity_from_Z(Z) -> np.ndarray:
    """Symmetric nonnegative affinity (|Z| + |Z^T|)/2, assembled from one triangle."""
    M = Z.Z if isinstance(Z, LowRankCoefficients) else as_matrix(Z, "Z")
    if M.shape[0] != M.shape[1]:
        raise InvalidInputError(f"Z must be square, got {M.shape}")
    # the upper triangle holds (|Z_ij| + |Z_ji|)/2; mirroring it keeps W exactly symmetric
    upper = (np.triu(np.abs(M), 0) + np.triu(np.abs(M.T), 0)) / 2.0
    return upper + np.triu(upper, 1).T


def _kmeanspp_init(rows: np.ndarray, k: int, rng: SplitMix64) -> np.ndarray:
    """Seeded k-means++ over rows already in canonical order."""
    n = rows.shape[0]
    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = min(int(rng.unit() * n), n - 1)
    d2 = np.sum((rows - rows[chosen[0]]) ** 2, axis=1)
    for t in range(1, k):
        total = float(d2.sum())
        if total <= 0.0:
            # all mass on already-chosen coordinates: take the lowest unused index
            used = set(chosen[:t].tolist())
            nxt = next(i for i in range(n) if i not in used)
            chosen[t] = nxt
        else:
            u = rng.unit() * total
            cum = np.cumsum(d2)
            chosen[t] = min(int(np.searchsorted(cum, u, side="right")), n - 1)
        d2 = np.minimum(d2, np.sum((rows - rows[chosen[t]]) ** 2, axis=1))
    return rows[chosen].copy()


def _lloyd(rows: np.ndarray, centers: np.ndarray, max_iters: int) -> tuple[np.ndarray, float]:
    n, k = rows.shape[0], centers.shape[0]
    labels = np.zeros(n, dtype=np.int64)
    for _ in range(max_iters):
        dist = np.sum((rows[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        labels = np.argmin(dist, axis=1)
        # empty-cluster repair: reseed on the farthest point from its center
        counts = np.bincount(labels, minlength=k)
        if np.any(counts == 0):
            point_d = dist[np.arange(n), labels].copy()
            for j in np.flatnonzero(counts == 0):
                far = int(np.argmax(point_d))
                centers[j] = rows[far]
                labels[far] = j
                point_d[far] = -1.0
        new_centers = centers.copy()
        for j in range(k):
            members = rows[labels == j]
            if members.shape[0]:
                new_centers[j] = members.mean(axis=0)
        if np.array_equal(new_centers, centers):
            break
        centers = new_centers
    inertia = float(np.sum((rows - centers[labels]) ** 2))
    return labels, inertia


def kmeans(
    rows,
    n_clusters: int,
    restarts: int = 20,
    max_iters: int = 300,
    seed: int = 0,
) -> ClusterLabels:
    """Best-of-restarts Lloyd's algorithm with order-independent k-means++ seeding.

    Rows are sorted lexicographically before sampling and labels are mapped
    back, so the result is equivariant under permutations of the input rows.
    Restart ties are broken by restart index.
    """
    rows = as_matrix(rows, "rows")
    n = rows.shape[0]
    if n_clusters > n:
        raise InvalidConfigError(f"cannot split {n} points into {n_clusters} clusters")
    order = np.lexsort(rows.T[::-1])
    canon = rows[order]

    best_labels, best_inertia = None, np.inf
    for r in range(restarts):
        rng = SplitMix64.substream(seed, r)
        centers = _kmeanspp_init(canon, n_clusters, rng)
        labels, inertia = _lloyd(canon, centers, max_iters)
        if inertia < best_inertia:
            best_labels, best_inertia = labels, inertia

    out = np.empty(n, dtype=np.int64)
    out[order] = best_labels
    return ClusterLabels(labels=out, n_clusters=n_clusters)


def _canonical_sign_columns(V: np.ndarray) -> np.ndarray:
    V = V.copy()
    for k in range(V.shape[1]):
        i = int(np.argmax(np.abs(V[:, k])))
        if V[i, k] < 0.0:
            V[:, k] = -V[:, k]
    return V


def ncut(W, cfg: NcutConfig) -> ClusterLabels:
    """Normalized-cuts labels from the symmetric normalized Laplacian.

    Eigenvectors of the ``cfg.n_clusters`` smallest eigenvalues of
    L = I - D^{-1/2} W D^{-1/2} (zero-degree rows get D^{-1/2} = 0), sign
    canonicalized and row normalized, then seeded k-means.
    """
    W = as_matrix(W, "W")
    n = W.shape[0]
    if W.shape[0] != W.shape[1]:
        raise InvalidInputError(f"affinity must be square, got {W.shape}")
    if cfg.n_clusters > n:
        raise InvalidConfigError(f"cannot split {n} points into {cfg.n_clusters} clusters")

    degree = W.sum(axis=1)
    inv_sqrt = np.where(degree > 0.0, 1.0 / np.sqrt(np.where(degree > 0.0, degree, 1.0)), 0.0)
    L = np.eye(n) - (inv_sqrt[:, None] * W) * inv_sqrt[None, :]
    eigvals, eigvecs = np.linalg.eigh((L + L.T) / 2.0)
    emb = _canonical_sign_columns(eigvecs[:, : cfg.n_clusters])

    norms = np.linalg.norm(emb, axis=1)
    safe = np.where(norms > 0.0, norms, 1.0)
    emb = emb / safe[:, None]

    return kmeans(emb, cfg.n_clusters, cfg.restarts, cfg.max_iters, cfg.seed)


def block_structure_score(W: np.ndarray, labels: np.ndarray) -> float:
    """Max cross-cluster affinity over max within-cluster affinity (0 when W=0)."""
    same = labels[:, None] == labels[None, :]
    within = float(W[same].max()) if same.any() else 0.0
    across = float(W[~same].max()) if (~same).any() else 0.0
    if within <= 0.0:
        return np.inf if across > 0.0 else 0.0
    return across / within


def cluster_pipeline(
    points: list[GrassmannPoint],
    method: str,
    ncut_cfg: NcutConfig,
    lam: float | None = None,
    kernel_spec: KernelSpec | None = None,
    admm_cfg: AdmmConfig | None = None,
) -> tuple[ClusterLabels, LowRankCoefficients, dict]:
    """Solver -> affinity -> normalized cuts, with per-run diagnostics.

    ``method`` selects the solver: ``glrr-f`` (closed form on the Gram
    matrix), ``glrr-21`` (ADMM with slice-wise l2/l1 error), or ``kglrr``
    (closed form on a kernel Gram matrix).
    """
    if method not in METHODS:
        raise InvalidConfigError(f"unknown method {method!r}; expected one of {METHODS}")

    diagnostics: dict = {"method": method}
    if method == "glrr-f":
        if lam is None:
            raise InvalidConfigError("glrr-f requires lambda")
        delta = build_delta(points)
        coeffs, report = glrr_f_solve(delta, lam)
        diagnostics.update(
            lam=float(lam),
            solver_report=report,
            iterations=0,
            converged=True,
            clamp_magnitude=0.0,
            rank_z=report.kept_count,
        )
    elif method == "kglrr":
        if lam is None or kernel_spec is None:
            raise InvalidConfigError("kglrr requires lambda and a kernel spec")
        coeffs, report = kglrr_solve(points, kernel_spec, lam)
        diagnostics.update(
            lam=float(lam),
            solver_report=report,
            iterations=0,
            converged=True,
            clamp_magnitude=report.clamp_magnitude,
            rank_z=report.kept_count,
        )
    else:
        if admm_cfg is None:
            if lam is None:
                raise InvalidConfigError("glrr-21 requires lambda or an ADMM config")
            admm_cfg = AdmmConfig(lam=lam)
        delta = build_delta(points)
        coeffs, _ecoef, report = admm_solve(delta, admm_cfg)
        s = np.linalg.svd(coeffs.Z, compute_uv=False)
        rank_z = int(np.sum(s > 1e-10 * (s[0] if s.size else 0.0)))
        diagnostics.update(
            lam=admm_cfg.lam,
            solver_report=report,
            iterations=report.iterations,
            converged=report.converged,
            clamp_magnitude=0.0,
            rank_z=rank_z,
        )

    W = affinity_from_Z(coeffs)
    labels = ncut(W, ncut_cfg)
    diagnostics["block_score"] = block_structure_score(W, labels.labels)
    return labels, coeffs, diagnostics
