"""
Three-qubit pure states and density matrices.

Basis convention: amplitude index ``4*b1 + 2*b2 + b3``, qubit 1 is the most
significant bit. States are plain numpy arrays; ``PureState`` has shape (8,)
and ``DensityMatrix`` has shape (8, 8) (or 2/4 for reduced states).
"""

import logging
from collections.abc import Iterable, Sequence

import numpy as np
import numpy.typing as npt
from scipy.stats import unitary_group

from ghz_lab.errors import PreconditionError
from ghz_lab.linalg import ComplexMatrix, as_matrix, hermitian_eig, kron_all

log = logging.getLogger(__name__)

PureState = npt.NDArray[np.complex128]
DensityMatrix = ComplexMatrix
Seed = int | np.random.Generator | np.random.SeedSequence | None

N_QUBITS = 3
DIM = 2**N_QUBITS
STATE_TOL = 1e-10


def rng_from(seed: Seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def as_state(psi: npt.ArrayLike) -> PureState:
    """Return ``psi`` as a normalized length-8 complex vector."""
    v = np.asarray(psi, dtype=np.complex128).reshape(-1)
    if v.shape != (DIM,):
        raise PreconditionError(f"expected {DIM} amplitudes, got {v.size}")
    norm = float(np.vdot(v, v).real)
    if abs(norm - 1.0) > STATE_TOL:
        raise PreconditionError(f"state is not normalized (<psi|psi> = {norm:.12g})")
    return v


def basis_state(bits: str | Sequence[int]) -> PureState:
    """Computational basis state, e.g. ``basis_state("011")`` is index 3."""
    digits = [int(b) for b in bits]
    if len(digits) != N_QUBITS or any(b not in (0, 1) for b in digits):
        raise PreconditionError(f"expected three bits, got {bits!r}")
    v = np.zeros(DIM, dtype=np.complex128)
    v[4 * digits[0] + 2 * digits[1] + digits[2]] = 1.0
    return v


def ghz() -> PureState:
    """(|000> + |111>)/sqrt(2)"""
    v = np.zeros(DIM, dtype=np.complex128)
    v[0] = v[DIM - 1] = 1 / np.sqrt(2)
    return v


def pure_density(psi: npt.ArrayLike) -> DensityMatrix:
    v = as_state(psi)
    return np.outer(v, v.conj())


def purity(rho: npt.ArrayLike) -> float:
    rho = as_matrix(rho)
    return float(np.real(np.trace(rho @ rho)))


def check_density(rho: npt.ArrayLike, tol: float = STATE_TOL) -> DensityMatrix:
    """Validate Hermiticity, unit trace and positivity; return ``rho`` as a matrix."""
    rho = as_matrix(rho)
    tr = np.trace(rho)
    if abs(tr - 1.0) > tol:
        raise PreconditionError(f"density matrix has trace {tr.real:.12g}")
    vals, _ = hermitian_eig(rho)
    if vals[-1] < -tol:
        raise PreconditionError(f"density matrix has eigenvalue {vals[-1]:.3e}")
    return rho


def _check_unitary(u: npt.ArrayLike, label: str) -> ComplexMatrix:
    u = as_matrix(u)
    if u.shape != (2, 2):
        raise PreconditionError(f"{label} must be 2x2, got {u.shape}")
    err = float(np.max(np.abs(u.conj().T @ u - np.eye(2))))
    if err > STATE_TOL:
        raise PreconditionError(f"{label} is not unitary (max |U^dag U - I| = {err:.3e})")
    return u


def local_unitary(
    u1: npt.ArrayLike, u2: npt.ArrayLike, u3: npt.ArrayLike
) -> ComplexMatrix:
    return kron_all(
        *(_check_unitary(u, f"U{i}") for i, u in enumerate((u1, u2, u3), start=1))
    )


def apply_local_unitary(
    psi: npt.ArrayLike, u1: npt.ArrayLike, u2: npt.ArrayLike, u3: npt.ArrayLike
) -> PureState:
    """(U1 ⊗ U2 ⊗ U3)|psi>"""
    return local_unitary(u1, u2, u3) @ as_state(psi)


def conjugate_local_unitary(
    rho: npt.ArrayLike, u1: npt.ArrayLike, u2: npt.ArrayLike, u3: npt.ArrayLike
) -> DensityMatrix:
    """(U1 ⊗ U2 ⊗ U3) rho (U1 ⊗ U2 ⊗ U3)^dag"""
    u = local_unitary(u1, u2, u3)
    return u @ as_matrix(rho) @ u.conj().T


def _check_three_qubit(rho: npt.ArrayLike) -> ComplexMatrix:
    rho = as_matrix(rho)
    if rho.shape != (DIM, DIM):
        raise PreconditionError(f"expected an 8x8 density matrix, got {rho.shape}")
    return rho


def partial_trace(rho: npt.ArrayLike, keep: Iterable[int]) -> DensityMatrix:
    """Reduced state on the qubits in ``keep`` (labels 1..3), in original order."""
    rho = _check_three_qubit(rho)
    kept = sorted(set(keep))
    if not kept or len(kept) == N_QUBITS or not set(kept) <= {1, 2, 3}:
        raise PreconditionError(f"keep must be a proper non-empty subset of {{1,2,3}}, got {kept}")

    rows = "abc"
    cols = [c if q in kept else r for q, r, c in zip((1, 2, 3), rows, "def")]
    out = "".join(rows[q - 1] for q in kept) + "".join(cols[q - 1] for q in kept)
    reduced = np.einsum(f"{rows}{''.join(cols)}->{out}", rho.reshape((2,) * 6))
    d = 2 ** len(kept)
    return reduced.reshape(d, d)


def permute_qubits(rho: npt.ArrayLike, perm: Sequence[int]) -> DensityMatrix:
    """Relabel qubits so that new position ``i`` holds old qubit ``perm[i]``."""
    rho = _check_three_qubit(rho)
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != [1, 2, 3]:
        raise PreconditionError(f"invalid qubit permutation {perm}")
    axes = [p - 1 for p in perm] + [N_QUBITS + p - 1 for p in perm]
    return rho.reshape((2,) * 6).transpose(axes).reshape(DIM, DIM)


def random_pure_state(seed: Seed = None) -> PureState:
    """Haar-random pure state from a normalized complex Gaussian vector."""
    rng = rng_from(seed)
    v = rng.standard_normal(DIM) + 1j * rng.standard_normal(DIM)
    return v / np.linalg.norm(v)


def random_unitary(dim: int, seed: Seed = None) -> ComplexMatrix:
    return np.asarray(unitary_group.rvs(dim, random_state=rng_from(seed)), dtype=np.complex128)


def random_local_unitaries(seed: Seed = None) -> tuple[ComplexMatrix, ComplexMatrix, ComplexMatrix]:
    rng = rng_from(seed)
    return random_unitary(2, rng), random_unitary(2, rng), random_unitary(2, rng)


def random_ghz_type(seed: Seed = None) -> PureState:
    """A Haar-random local-unitary image of the GHZ state."""
    return apply_local_unitary(ghz(), *random_local_unitaries(seed))


def random_density(rank: int, seed: Seed = None, max_attempts: int = 16) -> DensityMatrix:
    """Mixture of ``rank`` Haar-random pure states with flat Dirichlet weights.

    The result is checked to have exactly ``rank`` eigenvalues above 1e-10;
    a degenerate draw is replaced by the next one from the same generator.
    """
    if not 1 <= rank <= DIM:
        raise PreconditionError(f"rank must be in 1..{DIM}, got {rank}")
    rng = rng_from(seed)
    for attempt in range(max_attempts):
        weights = rng.dirichlet(np.ones(rank)) if rank > 1 else np.ones(1)
        rho = np.zeros((DIM, DIM), dtype=np.complex128)
        for w in weights:
            v = random_pure_state(rng)
            rho += w * np.outer(v, v.conj())
        vals, _ = hermitian_eig(rho)
        if int(np.sum(vals > STATE_TOL)) == rank:
            return (rho + rho.conj().T) / 2
        log.debug("random_density: rank-%d draw %d was degenerate, redrawing", rank, attempt)
    raise PreconditionError(f"could not draw a rank-{rank} density matrix in {max_attempts} attempts")
