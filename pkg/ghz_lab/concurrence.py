"""
Concurrence pipeline for three qubits.

For each bipartite cut ab|c the state is relabeled so the pair sits on the
two leading qubits, then six spin-flip operators S_k = L_k ⊗ σ_y are formed
from the SO(4) generators L_k on the pair. Each generator yields one
Wootters-style term C_k from the spectrum of ρ ρ̃_k with ρ̃_k = S_k ρ* S_k.
The cut concurrence is the root-sum-square of its six terms and the lower
bound τ₃ is the root-mean-square of the three cut concurrences.
"""

import logging
from dataclasses import dataclass, field
from functools import cache

import numpy as np
import numpy.typing as npt
import sympy

from ghz_lab.errors import PreconditionError
from ghz_lab.linalg import ComplexMatrix, as_matrix, hermitian_eig, kron, product_spectrum, psd_sqrt
from ghz_lab.states import DensityMatrix, check_density, partial_trace, permute_qubits, pure_density

log = logging.getLogger(__name__)

GENERATOR_PAIRS = ((1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4))
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PURE_TOL = 1e-10


@dataclass(frozen=True)
class Cut:
    """Bipartition ``ab|c`` of the three qubits."""

    pair: tuple[int, int]
    single: int

    def __post_init__(self) -> None:
        if len(self.pair) != 2 or {*self.pair, self.single} != {1, 2, 3}:
            raise PreconditionError(f"invalid cut {self.pair}|{self.single}")

    @property
    def permutation(self) -> tuple[int, int, int]:
        return (self.pair[0], self.pair[1], self.single)

    @property
    def label(self) -> str:
        return f"{self.pair[0]}{self.pair[1]}|{self.single}"

    def canonical(self) -> "Cut":
        return Cut(tuple(sorted(self.pair)), self.single)

    @classmethod
    def parse(cls, text: str) -> "Cut":
        """``"12|3"`` -> Cut((1, 2), 3)"""
        pair, sep, single = text.strip().partition("|")
        if not sep or len(pair) != 2 or len(single) != 1 or not (pair + single).isdigit():
            raise PreconditionError(f"malformed cut {text!r}, expected e.g. '12|3'")
        return cls((int(pair[0]), int(pair[1])), int(single))

    def __str__(self) -> str:
        return self.label


CANONICAL_CUTS = (Cut((1, 2), 3), Cut((1, 3), 2), Cut((2, 3), 1))


def f_func(*values: float) -> float:
    """max(0, 2*max(v) - sum(v)) for one to four non-negative values.

    With the values sorted descending this is max(0, v1 - v2 - v3 - v4);
    for two values it reduces to |w - x|.
    """
    if not 1 <= len(values) <= 4:
        raise PreconditionError(f"f takes 1 to 4 values, got {len(values)}")
    v = np.asarray(values, dtype=float)
    if np.any(v < 0):
        raise PreconditionError(f"f requires non-negative inputs, got {v.tolist()}")
    return float(max(0.0, 2 * v.max() - v.sum()))


@cache
def _generators() -> npt.NDArray[np.complex128]:
    gens = np.zeros((6, 4, 4), dtype=np.complex128)
    for g, (k, l) in enumerate(GENERATOR_PAIRS):
        for m in range(1, 5):
            for n in range(1, 5):
                gens[g, m - 1, n - 1] = -1j * int(sympy.LeviCivita(k, l, m, n))
    gens.flags.writeable = False
    return gens


def so4_generators() -> list[ComplexMatrix]:
    """The six SO(4) generators (L_kl)_mn = -i ε_klmn in fixed pair order."""
    return [g.copy() for g in _generators()]


@cache
def _flip_stack() -> npt.NDArray[np.complex128]:
    s = np.stack([kron(g, SIGMA_Y) for g in _generators()])
    s.flags.writeable = False
    return s


@dataclass(frozen=True)
class FlipOperatorSet:
    cut: Cut
    operators: npt.NDArray[np.complex128] = field(repr=False)


def flip_operators(cut: Cut) -> FlipOperatorSet:
    """S_k = L_k ⊗ σ_y, expressed in the basis where ``cut.pair`` leads.

    The matrices are the same for every cut; callers relabel the state with
    ``permute_qubits(rho, cut.permutation)`` before using them.
    """
    return FlipOperatorSet(cut, _flip_stack())


def _terms_from_relabeled(rho_p: ComplexMatrix) -> npt.NDArray[np.float64]:
    sqrt_rho = psd_sqrt(rho_p)
    rho_conj = rho_p.conj()
    terms = np.empty(6)
    for k, s in enumerate(_flip_stack()):
        lam = product_spectrum(rho_p, s @ rho_conj @ s, rho_sqrt=sqrt_rho)
        terms[k] = f_func(*lam)
    return terms


def cut_terms(rho: npt.ArrayLike, cut: Cut) -> npt.NDArray[np.float64]:
    """All six C_k for one cut."""
    rho = check_density(rho)
    return _terms_from_relabeled(permute_qubits(rho, cut.permutation))


def c_k_term(rho: npt.ArrayLike, cut: Cut, k: int) -> float:
    """C_k for generator ``k`` in 1..6."""
    if not 1 <= k <= 6:
        raise PreconditionError(f"generator index must be in 1..6, got {k}")
    rho_p = permute_qubits(check_density(rho), cut.permutation)
    s = _flip_stack()[k - 1]
    lam = product_spectrum(rho_p, s @ rho_p.conj() @ s)
    return f_func(*lam)


def bipartite_concurrence(rho: npt.ArrayLike, cut: Cut) -> float:
    return float(np.sqrt(np.sum(cut_terms(rho, cut) ** 2)))


def c3_pure(psi: npt.ArrayLike) -> float:
    """sqrt(1 - (1/3) sum_i Tr ρ_i²) over the single-qubit marginals."""
    rho = pure_density(psi)
    total = 0.0
    for q in (1, 2, 3):
        r = partial_trace(rho, {q})
        total += float(np.real(np.trace(r @ r)))
    return float(np.sqrt(max(0.0, 1 - total / 3)))


def c3_pure_batch(phis: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """Weighted pure-state concurrences ``‖φ_i‖² · C₃(φ_i / ‖φ_i‖)``.

    ``phis`` holds unnormalized three-qubit vectors as rows, shape (m, 8).
    Zero rows contribute zero.
    """
    t = np.asarray(phis, dtype=np.complex128).reshape(-1, 2, 2, 2)
    weight = np.einsum("iabc,iabc->i", t, t.conj()).real
    marginals = (
        np.einsum("iabc,idbc->iad", t, t.conj()),
        np.einsum("iabc,iadc->ibd", t, t.conj()),
        np.einsum("iabc,iabd->icd", t, t.conj()),
    )
    purities = sum(np.sum(np.abs(m) ** 2, axis=(1, 2)) for m in marginals)
    return np.sqrt(np.clip(weight**2 - purities / 3, 0.0, None))


@dataclass
class ConcurrenceReport:
    """Per-cut C_k terms and cut concurrences, τ₃, and C₃ for pure inputs."""

    terms: dict[str, npt.NDArray[np.float64]]
    bipartite: dict[str, float]
    tau3: float
    c3_pure: float | None = None

    @property
    def c12_3(self) -> float:
        return self.bipartite["12|3"]

    @property
    def c13_2(self) -> float:
        return self.bipartite["13|2"]

    @property
    def c23_1(self) -> float:
        return self.bipartite["23|1"]

    @property
    def cuts(self) -> tuple[float, float, float]:
        return self.c12_3, self.c13_2, self.c23_1

    def to_dict(self) -> dict:
        return {
            "terms": {label: [float(x) for x in t] for label, t in self.terms.items()},
            "bipartite": {label: float(v) for label, v in self.bipartite.items()},
            "tau3": float(self.tau3),
            "c3_pure": None if self.c3_pure is None else float(self.c3_pure),
        }


def tau3(rho: npt.ArrayLike) -> ConcurrenceReport:
    """Full report for ρ, with τ₃ = sqrt((1/3) Σ_cuts Σ_k C_k²)."""
    rho = check_density(rho)
    terms = {
        cut.label: _terms_from_relabeled(permute_qubits(rho, cut.permutation))
        for cut in CANONICAL_CUTS
    }
    bipartite = {label: float(np.sqrt(np.sum(t**2))) for label, t in terms.items()}
    value = float(np.sqrt(sum(np.sum(t**2) for t in terms.values()) / 3))

    c3 = None
    if float(np.real(np.trace(rho @ rho))) > 1 - PURE_TOL:
        _, vecs = hermitian_eig(rho)
        c3 = c3_pure(vecs[:, 0])
    log.debug("tau3 = %.12g (cuts %s)", value, bipartite)
    return ConcurrenceReport(terms, bipartite, value, c3)


def tau3_value(rho: npt.ArrayLike) -> float:
    return tau3(rho).tau3


def rho_tilde(rho: npt.ArrayLike, cut: Cut, k: int) -> ComplexMatrix:
    """S_k ρ* S_k in the relabeled basis of ``cut``."""
    rho_p = permute_qubits(as_matrix(rho), cut.permutation)
    s = _flip_stack()[k - 1]
    return s @ rho_p.conj() @ s
