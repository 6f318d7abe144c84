"""Dense symmetric linear algebra primitives.

Symmetric matrices are plain float64 ``numpy`` arrays.  The working contract
throughout the package is *exact* (bitwise) symmetry: build matrices with
:func:`symmetrize` or through the constructors here, never by hand-editing a
triangle.  ``symmetrize`` relies on the commutativity of floating-point
addition, so its output is bitwise symmetric.

``svec`` packs the lower triangle in column-major order with off-diagonal
entries scaled by sqrt(2); this makes the packing an isometry for the trace
inner product.  The ordering is fixed once here and every other module uses
these functions, so the two sides of any packed/unpacked computation agree
bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionError, NumericalError, ParameterError

SQRT2 = math.sqrt(2.0)

# Relative pivot threshold below which a linear system is declared singular.
SINGULAR_PIVOT_RTOL = 1e-12


def symmetrize(m: np.ndarray) -> np.ndarray:
    """Return 0.5*(M + M^T), which is exactly symmetric in IEEE arithmetic."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    return 0.5 * (m + m.T)


def is_symmetric(m: np.ndarray) -> bool:
    """Bitwise symmetry check."""
    return m.ndim == 2 and m.shape[0] == m.shape[1] and bool((m == m.T).all())


def require_symmetric(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if not is_symmetric(m):
        raise DimensionError("matrix is not exactly symmetric; use symmetrize()")
    return m


@lru_cache(maxsize=128)
def svec_indices(order: int):
    """Index arrays (rows, cols, scale) for the packed lower triangle.

    Coordinate k corresponds to entry (rows[k], cols[k]) with rows >= cols,
    visited column by column.  scale[k] is sqrt(2) off the diagonal, 1 on it.
    """
    if order < 1:
        raise DimensionError("matrix order must be >= 1")
    cols, rows = np.triu_indices(order)  # row-major upper == column-major lower, transposed
    scale = np.where(rows == cols, 1.0, SQRT2)
    rows.setflags(write=False)
    cols.setflags(write=False)
    scale.setflags(write=False)
    return rows, cols, scale


def svec_len(order: int) -> int:
    return order * (order + 1) // 2


@lru_cache(maxsize=128)
def order_from_svec_len(length: int) -> int:
    """Inverse of svec_len; raises if length is not a triangular number."""
    order = int((math.isqrt(8 * length + 1) - 1) // 2)
    if order < 1 or svec_len(order) != length:
        raise DimensionError(f"length {length} is not a triangular number d(d+1)/2")
    return order


def svec(m: np.ndarray) -> np.ndarray:
    """Pack a symmetric matrix into the sqrt(2)-scaled lower-triangle vector."""
    m = require_symmetric(m)
    rows, cols, scale = svec_indices(m.shape[0])
    return m[rows, cols] * scale


def smat(v: np.ndarray) -> np.ndarray:
    """Unpack an svec vector back into the symmetric matrix it came from."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise DimensionError("smat expects a one-dimensional vector")
    order = order_from_svec_len(v.shape[0])
    rows, cols, scale = svec_indices(order)
    m = np.empty((order, order))
    vals = v / scale
    m[rows, cols] = vals
    m[cols, rows] = vals
    return m


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition of a symmetric matrix.

    eigenvalues are nondecreasing; eigenvectors holds the matching
    orthonormal columns.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return symmetrize((v * self.eigenvalues) @ v.T)


def sym_eig(m: np.ndarray) -> Spectrum:
    """Full eigendecomposition of a symmetric matrix (LAPACK ``eigh``)."""
    m = require_symmetric(m)
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - eigh essentially never fails
        raise NumericalError(f"symmetric eigensolver did not converge: {exc}") from exc
    spec = Spectrum(eigenvalues=w, eigenvectors=v)
    resid = np.linalg.norm(spec.reconstruct() - m)
    if resid > 1e-10 * max(1.0, np.linalg.norm(m)):
        raise NumericalError(f"eigendecomposition residual {resid:.3e} above contract")
    return spec


def proj_psd(m: np.ndarray) -> np.ndarray:
    """Nearest positive semidefinite matrix in Frobenius norm."""
    spec = sym_eig(m)
    w = spec.eigenvalues
    if w[0] >= 0.0:
        return m
    pos = w > 0.0
    if not pos.any():
        return np.zeros_like(m)
    v = spec.eigenvectors[:, pos]
    return symmetrize((v * w[pos]) @ v.T)


def random_orthogonal(order: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthogonal matrix via QR of a Gaussian matrix."""
    g = rng.standard_normal((order, order))
    q, r = np.linalg.qr(g)
    # sign-fix makes the distribution Haar rather than QR-convention dependent
    return q * np.where(np.diag(r) >= 0.0, 1.0, -1.0)


def random_spd_with_spectrum(
    order: int, lo: float, hi: float, rng: np.random.Generator
) -> np.ndarray:
    """Random symmetric matrix with i.i.d. uniform(lo, hi) eigenvalues.

    Eigenvectors are Haar-random.  Deterministic given the generator state;
    the result is exactly symmetric.
    """
    if order < 1:
        raise ParameterError(f"order must be >= 1, got {order}")
    if not (0.0 <= lo < hi):
        raise ParameterError(f"need 0 <= lo < hi, got ({lo}, {hi})")
    eigenvalues = rng.uniform(lo, hi, size=order)
    q = random_orthogonal(order, rng)
    return symmetrize((q * eigenvalues) @ q.T)


def solve_symmetric_linear(m: np.ndarray, b: np.ndarray):
    """Solve M x = b for symmetric M; returns None when M is singular.

    Singularity means an LU pivot below SINGULAR_PIVOT_RTOL relative to the
    largest pivot.  One step of iterative refinement keeps the residual of
    returned solutions near machine precision.
    """
    import scipy.linalg

    m = require_symmetric(m)
    b = np.asarray(b, dtype=float)
    if b.shape[0] != m.shape[0]:
        raise DimensionError(f"rhs length {b.shape[0]} != order {m.shape[0]}")
    lu, piv = scipy.linalg.lu_factor(m, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= SINGULAR_PIVOT_RTOL * pivots.max():
        return None
    x = scipy.linalg.lu_solve((lu, piv), b, check_finite=False)
    x += scipy.linalg.lu_solve((lu, piv), b - m @ x, check_finite=False)
    return x
