"""
Dense complex linear algebra for the three-qubit problem sizes (2, 4 and 8).

All routines are pure functions on numpy arrays. Matrix comparisons are
always tolerance based.
"""

import logging
from functools import reduce

import numpy as np
import numpy.typing as npt
import scipy.linalg as la

from ghz_lab.errors import (
    DimensionOverflowError,
    InternalConsistencyError,
    NotPSDError,
    NumericalFailureError,
    PreconditionError,
)

log = logging.getLogger(__name__)

ComplexMatrix = npt.NDArray[np.complex128]

MAX_DIM = 8
HERMITIAN_TOL = 1e-10
PSD_CLAMP = 1e-12
RESIDUAL_TOL = 1e-9
RANK_TOL = 1e-9


def as_matrix(a: npt.ArrayLike) -> ComplexMatrix:
    """Return ``a`` as a square complex128 matrix."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise PreconditionError(f"expected a square matrix, got shape {m.shape}")
    return m


def max_abs_diff(a: npt.ArrayLike, b: npt.ArrayLike) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def kron(a: npt.ArrayLike, b: npt.ArrayLike) -> ComplexMatrix:
    """
    Tensor product with the block convention
    ``(A⊗B)[i*dB + k, j*dB + l] = A[i, j] * B[k, l]``.
    """
    a = as_matrix(a)
    b = as_matrix(b)
    dim = a.shape[0] * b.shape[0]
    if dim > MAX_DIM:
        raise DimensionOverflowError(
            f"kron of {a.shape[0]}x{a.shape[0]} and {b.shape[0]}x{b.shape[0]} "
            f"has dimension {dim} > {MAX_DIM}"
        )
    return np.kron(a, b)


def kron_all(*ops: npt.ArrayLike) -> ComplexMatrix:
    return reduce(kron, ops)


def is_hermitian(h: npt.ArrayLike, tol: float = HERMITIAN_TOL) -> bool:
    h = np.asarray(h)
    return max_abs_diff(h, h.conj().T) <= tol


def hermitian_eig(
    h: npt.ArrayLike,
) -> tuple[npt.NDArray[np.float64], ComplexMatrix]:
    """Eigendecomposition of a Hermitian matrix.

    Args:
        h: Hermitian matrix (checked to within 1e-10).

    Returns:
        Eigenvalues in descending order and the matching orthonormal
        eigenvectors as columns. Ties keep the solver's output order.
    """
    h = as_matrix(h)
    if not is_hermitian(h):
        raise PreconditionError(
            f"matrix is not Hermitian (max |H - H^dag| = "
            f"{max_abs_diff(h, h.conj().T):.3e})"
        )
    sym = (h + h.conj().T) / 2
    try:
        vals, vecs = la.eigh(sym)
    except la.LinAlgError as e:
        raise NumericalFailureError(f"eigh did not converge: {e}") from e

    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]

    residual = np.max(np.abs(sym @ vecs - vecs * vals), initial=0.0)
    if residual > RESIDUAL_TOL * max(1.0, float(np.max(np.abs(vals)))):
        raise NumericalFailureError(
            f"eigenpair residual {residual:.3e} exceeds {RESIDUAL_TOL:.0e}"
        )
    return vals, vecs


def psd_sqrt(h: npt.ArrayLike) -> ComplexMatrix:
    """Hermitian square root of a positive semidefinite matrix.

    Eigenvalues in [-1e-12, 0) are clamped to zero; anything more negative
    raises NotPSDError.
    """
    vals, vecs = hermitian_eig(h)
    if vals[-1] < -PSD_CLAMP:
        raise NotPSDError(f"matrix has eigenvalue {vals[-1]:.3e} < -{PSD_CLAMP:.0e}")
    roots = np.sqrt(np.clip(vals, 0.0, None))
    r = (vecs * roots) @ vecs.conj().T
    return (r + r.conj().T) / 2


def product_spectrum(
    rho: npt.ArrayLike,
    rho_tilde: npt.ArrayLike,
    rho_sqrt: npt.ArrayLike | None = None,
) -> npt.NDArray[np.float64]:
    """Square roots of the four largest eigenvalues of ``rho @ rho_tilde``.

    The spectrum is taken from the Hermitian matrix ``√ρ ρ̃ √ρ`` which is
    similar to ``ρ ρ̃``. ``rho_tilde`` comes from a rank-4 spin flip, so a
    fifth eigenvalue above 1e-9 means the flip operators are wrong.

    Args:
        rho: density matrix.
        rho_tilde: Hermitian PSD partner matrix.
        rho_sqrt: precomputed ``psd_sqrt(rho)``, if available.

    Returns:
        Four non-negative values in descending order.
    """
    s = psd_sqrt(rho) if rho_sqrt is None else as_matrix(rho_sqrt)
    m = s @ as_matrix(rho_tilde) @ s
    vals, _ = hermitian_eig((m + m.conj().T) / 2)
    if vals.size > 4 and vals[4] >= RANK_TOL:
        raise InternalConsistencyError(
            f"rho*rho_tilde has a fifth eigenvalue {vals[4]:.3e} >= {RANK_TOL:.0e}"
        )
    top = np.zeros(4)
    n = min(4, vals.size)
    top[:n] = np.clip(vals[:n], 0.0, None)
    return np.sqrt(top)
