"""Kernel functions, Gram-matrix assembly, and the median-heuristic bandwidth."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KERNEL_KINDS = ("linear", "gaussian")

# Above this many pairwise cells the exact broadcast path would allocate too
# much, so squared distances fall back to the expanded-square identity.
_BROADCAST_CELL_LIMIT = 2_000_000


@dataclass(frozen=True)
class KernelSpec:
    """Immutable kernel definition shared by all learners.

    kind: "linear" (plain dot product) or "gaussian" with
        k(x, y) = exp(-sigma^2 * ||x - y||^2).
    bandwidth_sigma: the inverse length scale sigma of the gaussian kernel;
        must be absent for the linear kernel.
    include_intercept: whether decision functions built on this kernel carry
        an explicit unpenalized intercept.
    """

    kind: str
    bandwidth_sigma: float | None = None
    include_intercept: bool = True

    def __post_init__(self) -> None:
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "gaussian":
            sigma = self.bandwidth_sigma
            if sigma is None or not np.isfinite(sigma) or sigma <= 0:
                raise ValueError("gaussian kernel requires bandwidth_sigma > 0")
        elif self.bandwidth_sigma is not None:
            raise ValueError("linear kernel takes no bandwidth")


def _as_matrix(X, name: str) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"{name} must be a 2-d array, got shape {X.shape}")
    if not np.isfinite(X).all():
        raise ValueError(f"{name} contains non-finite entries")
    return X


def _squared_distances(Xa: np.ndarray, Xb: np.ndarray) -> np.ndarray:
    cells = Xa.shape[0] * Xb.shape[0] * Xa.shape[1]
    if cells <= _BROADCAST_CELL_LIMIT:
        diff = Xa[:, None, :] - Xb[None, :, :]
        return np.einsum("ijk,ijk->ij", diff, diff)
    sq = (
        np.sum(Xa * Xa, axis=1)[:, None]
        + np.sum(Xb * Xb, axis=1)[None, :]
        - 2.0 * (Xa @ Xb.T)
    )
    return np.maximum(sq, 0.0)


def kernel_eval(spec: KernelSpec, x, y) -> float:
    """k(x, y) for a single pair of vectors."""
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if x.shape != y.shape or x.size < 1:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise ValueError("kernel inputs must be finite")
    if spec.kind == "linear":
        return float(x @ y)
    diff = x - y
    return float(np.exp(-spec.bandwidth_sigma**2 * (diff @ diff)))


def gram_matrix(spec: KernelSpec, Xa, Xb) -> np.ndarray:
    """Matrix of k(Xa[i], Xb[j]); symmetric PSD when Xa is Xb."""
    Xa = _as_matrix(Xa, "Xa")
    Xb = _as_matrix(Xb, "Xb")
    if Xa.shape[1] != Xb.shape[1]:
        raise ValueError(
            f"dimension mismatch: {Xa.shape[1]} vs {Xb.shape[1]} columns"
        )
    if spec.kind == "linear":
        return Xa @ Xb.T
    return np.exp(-spec.bandwidth_sigma**2 * _squared_distances(Xa, Xb))


def median_bandwidth(X) -> float:
    """Inverse length scale 1 / median(pairwise euclidean distances).

    Uses every i < j pair; with sigma = 1/median the gaussian exponent is
    exactly -1 at the median distance.
    """
    X = _as_matrix(X, "X")
    n = X.shape[0]
    if n < 2:
        raise ValueError("median_bandwidth needs at least two rows")
    sq = _squared_distances(X, X)
    iu = np.triu_indices(n, k=1)
    median = float(np.median(np.sqrt(sq[iu])))
    if median <= 0.0:
        raise ValueError("degenerate design: median pairwise distance is zero")
    return 1.0 / median
