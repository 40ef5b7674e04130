"""Positive-semidefinite similarity functions between subspaces.

Four kernels are provided: the projection kernel ||X1^T X2||_F^2, the
canonical-correlation kernels (largest or summed principal-angle cosine),
and an affine blend of the summed-cosine and projection kernels.  Gram
matrices are symmetrized by construction and repaired to PSD by eigenvalue
truncation when needed, with the repair magnitude recorded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigError, InvalidInputError
from .manifold import GrassmannPoint, as_matrix, check_same_shape, sym_eig

KERNEL_KINDS = ("projection", "cc-max", "cc-sum", "ccp")

PSD_RTOL = 1e-8


@dataclass(frozen=True)
class KernelSpec:
    """Kernel selection; ``alpha`` is the blend weight and only legal for ccp."""

    kind: str
    alpha: float | None = None

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise InvalidConfigError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "ccp":
            a = 0.5 if self.alpha is None else float(self.alpha)
            if not (0.0 < a < 1.0):
                raise InvalidConfigError(f"ccp blend weight must be in (0,1), got {a}")
            object.__setattr__(self, "alpha", a)
        else:
            object.__setattr__(self, "alpha", None)


@dataclass(frozen=True)
class PrincipalAngles:
    """Cosines of the principal angles, descending, clamped to [0, 1]."""

    cosines: np.ndarray


@dataclass(frozen=True)
class KernelMatrix:
    """N x N Gram matrix plus a record of any PSD repair applied."""

    values: np.ndarray
    spec: KernelSpec
    clamped: bool = False
    clamp_magnitude: float = 0.0


def projection_inner(B1: np.ndarray, B2: np.ndarray) -> float:
    """tr[(X2^T X1)(X1^T X2)] = ||X1^T X2||_F^2 from the p x p cross product.

    Shared by the projection kernel and the solver's Gram assembly so the two
    paths agree entrywise exactly.
    """
    cross = B1.T @ B2
    return float(np.sum(cross * cross))


def principal_angle_cosines(X1: GrassmannPoint, X2: GrassmannPoint) -> PrincipalAngles:
    """Singular values of X1^T X2: cos of the principal angles, descending."""
    check_same_shape(X1, X2)
    s = np.linalg.svd(X1.basis.T @ X2.basis, compute_uv=False)
    out = np.clip(s, 0.0, 1.0)
    out.setflags(write=False)
    return PrincipalAngles(cosines=out)


def k_projection(X1: GrassmannPoint, X2: GrassmannPoint) -> float:
    check_same_shape(X1, X2)
    return projection_inner(X1.basis, X2.basis)


def k_cc(X1: GrassmannPoint, X2: GrassmannPoint, variant: str = "sum") -> float:
    """Canonical-correlation kernel: largest cosine or sum of cosines."""
    if variant not in ("max", "sum"):
        raise InvalidConfigError(f"cc variant must be 'max' or 'sum', got {variant!r}")
    cos = principal_angle_cosines(X1, X2).cosines
    return float(cos[0]) if variant == "max" else float(np.sum(cos))


def k_ccp(X1: GrassmannPoint, X2: GrassmannPoint, alpha: float) -> float:
    """alpha * summed-cosine kernel + (1 - alpha) * projection kernel."""
    alpha = float(alpha)
    if not (0.0 < alpha < 1.0):
        raise InvalidConfigError(f"ccp blend weight must be in (0,1), got {alpha}")
    return alpha * k_cc(X1, X2, "sum") + (1.0 - alpha) * k_projection(X1, X2)


def kernel_value(X1: GrassmannPoint, X2: GrassmannPoint, spec: KernelSpec) -> float:
    if spec.kind == "projection":
        return k_projection(X1, X2)
    if spec.kind == "cc-max":
        return k_cc(X1, X2, "max")
    if spec.kind == "cc-sum":
        return k_cc(X1, X2, "sum")
    return k_ccp(X1, X2, spec.alpha)


def psd_clamp(K) -> tuple[np.ndarray, float]:
    """Truncate negative eigenvalues to zero; the Frobenius-nearest PSD matrix.

    Returns the (possibly unchanged) matrix and the magnitude of the most
    negative pre-clamp eigenvalue (0.0 when no repair was needed).  Inputs
    whose smallest eigenvalue is within -1e-8 of the largest are returned
    untouched.
    """
    K = as_matrix(K, "K")
    eig = sym_eig(K)
    w = eig.eigenvalues
    if w[-1] >= -PSD_RTOL * max(w[0], 0.0):
        return K, 0.0
    magnitude = float(-w[-1])
    kept = np.maximum(w, 0.0)
    V = eig.eigenvectors
    repaired = (V * kept) @ V.T
    repaired = (repaired + repaired.T) / 2.0
    return repaired, magnitude


def gram(points: list[GrassmannPoint], spec: KernelSpec) -> KernelMatrix:
    """Kernel Gram matrix over a point set, symmetric by construction."""
    n = len(points)
    if n < 2:
        raise InvalidInputError(f"need at least 2 points, got {n}")
    for q in points[1:]:
        check_same_shape(points[0], q)
    K = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            K[i, j] = K[j, i] = kernel_value(points[i], points[j], spec)
    values, magnitude = psd_clamp(K)
    values = values.copy()
    values.setflags(write=False)
    return KernelMatrix(
        values=values, spec=spec, clamped=magnitude > 0.0, clamp_magnitude=magnitude
    )


def kernel_sqrt(K) -> np.ndarray:
    """Symmetric PSD square root U D^{1/2} U^T of a (post-clamp) kernel matrix."""
    values = K.values if isinstance(K, KernelMatrix) else as_matrix(K, "K")
    eig = sym_eig(values)
    roots = np.sqrt(np.maximum(eig.eigenvalues, 0.0))
    V = eig.eigenvectors
    S = (V * roots) @ V.T
    return (S + S.T) / 2.0
