"""Dense complex linear-algebra kernel shared by every other module.

All functions are pure and operate on plain ``numpy`` arrays of dtype
complex128 (vectors are 1-D, matrices 2-D).
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import DimensionMismatchError, NonHermitianError

# Relative Frobenius tolerance below which a matrix is treated as Hermitian
# and symmetrized before eigendecomposition.
HERMITICITY_TOL = 1e-10


def as_cvec(v) -> np.ndarray:
    """Coerce to a finite 1-D complex128 vector."""
    arr = np.asarray(v, dtype=np.complex128).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector contains NaN or Inf entries")
    return arr


def as_cmat(m) -> np.ndarray:
    """Coerce to a finite 2-D complex128 matrix."""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix contains NaN or Inf entries")
    return arr


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; the first factor carries the more significant index."""
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def tensor_all(ops: Sequence[np.ndarray]) -> np.ndarray:
    out = np.asarray(ops[0], dtype=np.complex128)
    for op in ops[1:]:
        out = np.kron(out, np.asarray(op, dtype=np.complex128))
    return out


def partial_trace(m: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    ``dims`` are the subsystem dimensions in tensor order (first factor most
    significant); the kept subsystems stay in their original relative order.
    """
    m = as_cmat(m)
    dims = list(dims)
    d = int(np.prod(dims))
    if m.shape != (d, d):
        raise DimensionMismatchError(
            f"matrix shape {m.shape} does not match subsystem dims {dims}",
            expected=(d, d),
            got=m.shape,
        )
    keep = sorted(set(keep))
    if any(i < 0 or i >= len(dims) for i in keep):
        raise DimensionMismatchError(f"keep indices {keep} out of range for {len(dims)} subsystems")
    k = len(dims)
    t = m.reshape(dims + dims)
    # Integer einsum subscripts; traced subsystems reuse the row label so the
    # diagonal over that subsystem is summed.
    row = list(range(k))
    col = [(i if i not in keep else k + i) for i in range(k)]
    out_labels = [i for i in keep] + [k + i for i in keep]
    res = np.einsum(t, row + col, out_labels)
    dk = int(np.prod([dims[i] for i in keep])) if keep else 1
    return res.reshape(dk, dk)


def is_hermitian(m: np.ndarray, tol: float = HERMITICITY_TOL) -> bool:
    m = as_cmat(m)
    if m.shape[0] != m.shape[1]:
        return False
    scale = np.linalg.norm(m)
    if scale == 0.0:
        return True
    return np.linalg.norm(m - dagger(m)) <= tol * scale


def hermitize(m: np.ndarray) -> np.ndarray:
    """Hermitian part (M + M†)/2."""
    return (m + dagger(m)) / 2


def herm_eig(m: np.ndarray, tol: float = HERMITICITY_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(w, v)`` with real eigenvalues ``w`` sorted descending and the
    matching orthonormal eigenvectors as columns of ``v``.  Inputs within the
    Hermiticity tolerance are symmetrized first; anything further off raises.
    """
    m = as_cmat(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"eigendecomposition needs a square matrix, got {m.shape}")
    if not is_hermitian(m, tol):
        raise NonHermitianError(
            f"matrix is not Hermitian to relative tolerance {tol:g}"
        )
    w, v = np.linalg.eigh(hermitize(m))
    order = np.argsort(w)[::-1]
    return w[order], v[:, order]


def trace_norm(m: np.ndarray) -> float:
    """Schatten 1-norm: the sum of singular values."""
    m = as_cmat(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"trace norm defined here for square matrices, got {m.shape}")
    if is_hermitian(m):
        return float(np.sum(np.abs(np.linalg.eigvalsh(hermitize(m)))))
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))
