"""Orthonormal-basis subspaces and the symmetric-matrix embedding between them.

A data object is a p-dimensional subspace of R^d held as a d x p orthonormal
basis.  Subspaces are compared through the projection embedding X -> X X^T,
so every quantity downstream depends only on the span, never on the
representative basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, RankDeficientError

ORTHONORMAL_TOL = 1e-10
SYMMETRY_TOL = 1e-8
RANK_RTOL = 1e-12


def as_matrix(values, name: str = "matrix") -> np.ndarray:
    """Validate and return a finite 2-D float64 array."""
    M = np.asarray(values, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise InvalidInputError(f"{name} must be 2-D with positive shape, got {M.shape}")
    if not np.isfinite(M).all():
        raise InvalidInputError(f"{name} contains non-finite entries")
    return M


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ThinSvd:
    """Thin SVD M = U diag(S) V^T with S descending and a fixed sign convention."""

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray


@dataclass(frozen=True)
class SymEig:
    """Eigendecomposition of a symmetric matrix, eigenvalues descending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True)
class GrassmannPoint:
    """A p-dimensional subspace of R^d as an immutable d x p orthonormal basis."""

    basis: np.ndarray

    def __post_init__(self):
        B = as_matrix(self.basis, "basis")
        d, p = B.shape
        if p > d:
            raise InvalidInputError(f"subspace dimension {p} exceeds ambient dimension {d}")
        gram = B.T @ B
        if np.max(np.abs(gram - np.eye(p))) > ORTHONORMAL_TOL:
            raise InvalidInputError("basis columns are not orthonormal within 1e-10")
        object.__setattr__(self, "basis", _frozen(B))

    @property
    def d(self) -> int:
        return self.basis.shape[0]

    @property
    def p(self) -> int:
        return self.basis.shape[1]


def _canonical_signs(U: np.ndarray, V: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Largest-magnitude entry of each left singular vector made positive
    # (argmax takes the lowest index on ties) so repeated runs agree bit-for-bit.
    U = U.copy()
    V = V.copy()
    for k in range(U.shape[1]):
        i = int(np.argmax(np.abs(U[:, k])))
        if U[i, k] < 0.0:
            U[:, k] = -U[:, k]
            V[:, k] = -V[:, k]
    return U, V


def thin_svd(M) -> ThinSvd:
    """Thin SVD with descending singular values and canonical signs."""
    M = as_matrix(M, "M")
    U, S, Vt = np.linalg.svd(M, full_matrices=False)
    U, V = _canonical_signs(U, Vt.T)
    return ThinSvd(U=_frozen(U), S=_frozen(S), V=_frozen(V))


def sym_eig(A) -> SymEig:
    """Eigendecomposition of a (nearly) symmetric matrix, descending order.

    Asymmetry up to 1e-8 in max norm is tolerated and symmetrized away;
    anything larger is rejected.
    """
    A = as_matrix(A, "A")
    if A.shape[0] != A.shape[1]:
        raise InvalidInputError(f"matrix must be square, got {A.shape}")
    if np.max(np.abs(A - A.T)) > SYMMETRY_TOL:
        raise InvalidInputError("matrix asymmetry exceeds 1e-8")
    sym = (A + A.T) / 2.0
    w, V = np.linalg.eigh(sym)
    return SymEig(eigenvalues=_frozen(w[::-1]), eigenvectors=_frozen(V[:, ::-1]))


def orthonormalize(M, p: int) -> GrassmannPoint:
    """First p left singular vectors of M as a Grassmann point.

    Raises RankDeficientError when fewer than p singular values exceed
    1e-12 times the largest.
    """
    M = as_matrix(M, "M")
    d, q = M.shape
    if p < 1 or p > min(d, q):
        raise InvalidInputError(f"p={p} must lie in [1, min{M.shape}]")
    svd = thin_svd(M)
    cutoff = RANK_RTOL * svd.S[0]
    rank = int(np.sum(svd.S > cutoff))
    if rank < p:
        raise RankDeficientError(
            f"numerical rank {rank} is below requested dimension {p}", achieved_rank=rank
        )
    return GrassmannPoint(basis=svd.U[:, :p])


def project_embed(X: GrassmannPoint) -> np.ndarray:
    """Symmetric idempotent d x d projector X X^T onto span(X)."""
    return X.basis @ X.basis.T


def check_same_shape(X1: GrassmannPoint, X2: GrassmannPoint) -> None:
    if X1.d != X2.d or X1.p != X2.p:
        raise InvalidInputError(
            f"points live on different manifolds: ({X1.p},{X1.d}) vs ({X2.p},{X2.d})"
        )


def grassmann_distance(X1: GrassmannPoint, X2: GrassmannPoint) -> float:
    """Frobenius distance between the projection embeddings.

    Computed as sqrt(2p - 2 ||X1^T X2||_F^2), which never forms a d x d matrix.
    """
    check_same_shape(X1, X2)
    cross = X1.basis.T @ X2.basis
    val = 2.0 * X1.p - 2.0 * float(np.sum(cross * cross))
    return float(np.sqrt(max(val, 0.0)))
