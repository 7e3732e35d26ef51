"""
Numerical convex roof of the three-qubit pure-state concurrence.

Decompositions of a rank-r state ρ = Σ μ_j e_j e_j† into m members are
parameterized by m×r isometries V: member i is φ_i = Σ_j V[i, j] √μ_j e_j.
The roof is estimated by random restarts over V, each refined by cyclic
two-row unitary rotations with bounded 1-D line searches.
"""

import cmath
import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt
from scipy.optimize import minimize_scalar
from scipy.stats import unitary_group

from ghz_lab.concurrence import c3_pure_batch
from ghz_lab.errors import PreconditionError
from ghz_lab.linalg import ComplexMatrix, hermitian_eig
from ghz_lab.states import DIM, DensityMatrix, check_density

log = logging.getLogger(__name__)

EIG_TOL = 1e-10
ISOMETRY_TOL = 1e-10
WEIGHT_TOL = 1e-14
SWEEP_TOL = 1e-8
MAX_SWEEPS = 200
LINE_SEARCH_XATOL = 1e-7
ANGLE_BOUNDS = (-math.pi / 2, math.pi / 2)
PHASE_BOUNDS = (0.0, 2 * math.pi)
PHASE_SEARCH_MIN_ANGLE = 1e-3


@dataclass
class Decomposition:
    weights: npt.NDArray[np.float64]
    states: npt.NDArray[np.complex128]

    def __len__(self) -> int:
        return len(self.weights)

    def density(self) -> DensityMatrix:
        return np.einsum("i,ia,ib->ab", self.weights, self.states, self.states.conj())


@dataclass
class RoofRun:
    m: int
    restart: int
    start_value: float
    value: float
    sweeps: int
    converged: bool


@dataclass
class RoofEstimate:
    value: float
    best: Decomposition
    trace: list[RoofRun] = field(default_factory=list)


def eigen_support(rho: npt.ArrayLike) -> tuple[npt.NDArray[np.float64], ComplexMatrix]:
    """Eigenvalues above 1e-10 and their eigenvectors (as columns)."""
    vals, vecs = hermitian_eig(check_density(rho))
    keep = vals > EIG_TOL
    return vals[keep], vecs[:, keep]


def support_rank(rho: npt.ArrayLike) -> int:
    """Number of eigenvalues of ρ above 1e-10."""
    return int(eigen_support(rho)[0].size)


def _check_isometry(v: npt.ArrayLike, r: int) -> ComplexMatrix:
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim != 2 or v.shape[1] != r or v.shape[0] < r:
        raise PreconditionError(f"isometry must be m x {r} with m >= {r}, got {v.shape}")
    err = float(np.max(np.abs(v.conj().T @ v - np.eye(r))))
    if err > ISOMETRY_TOL:
        raise PreconditionError(f"V is not an isometry (max |V^dag V - I| = {err:.3e})")
    return v


def _members(rho: npt.ArrayLike, v: npt.ArrayLike) -> npt.NDArray[np.complex128]:
    mu, e = eigen_support(rho)
    v = _check_isometry(v, mu.size)
    return v @ (np.sqrt(mu)[:, None] * e.T)


def _decomposition(phis: npt.NDArray[np.complex128]) -> Decomposition:
    weights = np.einsum("ia,ia->i", phis, phis.conj()).real
    keep = weights > WEIGHT_TOL
    states = phis[keep] / np.sqrt(weights[keep])[:, None]
    return Decomposition(weights[keep], states)


def decomposition_from_isometry(rho: npt.ArrayLike, v: npt.ArrayLike) -> Decomposition:
    return _decomposition(_members(rho, v))


def roof_objective(rho: npt.ArrayLike, v: npt.ArrayLike) -> float:
    """Σ p_i C₃(ψ_i) over the decomposition induced by ``v``."""
    return float(np.sum(c3_pure_batch(_members(rho, v))))


def random_isometry(m: int, r: int, rng: np.random.Generator) -> ComplexMatrix:
    if m == 1:
        return np.exp(2j * np.pi * rng.uniform()) * np.ones((1, 1), dtype=np.complex128)
    u = unitary_group.rvs(m, random_state=rng)
    return np.asarray(u[:, :r], dtype=np.complex128)


class PairObjective:
    """Summed member concurrence of rows ``a``, ``b`` after a two-row rotation.

    The rotation is a' = cos θ·a - e^{iφ} sin θ·b, b' = e^{-iφ} sin θ·a + cos θ·b.
    Marginals of a' and b' are quadratic in (cos θ, sin θ), so each
    evaluation is scalar arithmetic on overlaps taken once per pair.
    """

    def __init__(self, a: npt.NDArray[np.complex128], b: npt.NDArray[np.complex128]) -> None:
        ta = a.reshape(2, 2, 2)
        tb = b.reshape(2, 2, 2)
        ma, mb, mz = (_single_marginals(x, y) for x, y in ((ta, ta), (tb, tb), (ta, tb)))
        self.wa = float(np.vdot(a, a).real)
        self.wb = float(np.vdot(b, b).real)
        self.gaa = float(np.sum(np.abs(ma) ** 2))
        self.gbb = float(np.sum(np.abs(mb) ** 2))
        self.gab = float(np.sum(ma.conj() * mb).real)
        self.v = float(np.sum(np.abs(mz) ** 2))
        self.z0 = complex(np.vdot(b, a))
        self.ta = complex(np.einsum("qij,qji->", ma, mz))
        self.tb = complex(np.einsum("qij,qji->", mb, mz))
        self.u = complex(np.einsum("qij,qji->", mz, mz))

    def phase_terms(self, phase: float) -> tuple[float, float, float, float]:
        """Overlaps of the phase-dependent cross term: trace, ⟨A,Y⟩, ⟨B,Y⟩, ‖Y‖²."""
        w = cmath.exp(-1j * phase)
        return (
            2 * (w * self.z0).real,
            2 * (w * self.ta).real,
            2 * (w * self.tb).real,
            2 * (w * w * self.u).real + 2 * self.v,
        )

    def value(self, theta: float, terms: tuple[float, float, float, float]) -> float:
        y, gay, gby, gyy = terms
        c, s = math.cos(theta), math.sin(theta)
        cc, ss, cs = c * c, s * s, c * s
        mixed = cc * ss * (gyy + 2 * self.gab)
        w1 = cc * self.wa + ss * self.wb - cs * y
        w2 = ss * self.wa + cc * self.wb + cs * y
        p1 = cc * cc * self.gaa + ss * ss * self.gbb + mixed - 2 * cs * (cc * gay + ss * gby)
        p2 = ss * ss * self.gaa + cc * cc * self.gbb + mixed + 2 * cs * (ss * gay + cc * gby)
        return math.sqrt(max(0.0, w1 * w1 - p1 / 3)) + math.sqrt(max(0.0, w2 * w2 - p2 / 3))

    def phase_value(self, phase: float, theta: float) -> float:
        return self.value(theta, self.phase_terms(phase))

    def __call__(self, theta: float, phase: float) -> float:
        return self.phase_value(phase, theta)


def _single_marginals(x: npt.NDArray, y: npt.NDArray) -> npt.NDArray[np.complex128]:
    """Single-qubit reductions of x y† for qubits 1, 2, 3, shape (3, 2, 2)."""
    return np.stack(
        [
            np.einsum("abc,dbc->ad", x, y.conj()),
            np.einsum("abc,adc->bd", x, y.conj()),
            np.einsum("abc,abd->cd", x, y.conj()),
        ]
    )


def _rotate(a: npt.NDArray, b: npt.NDArray, theta: float, phase: float) -> tuple[npt.NDArray, npt.NDArray]:
    c, s = math.cos(theta), math.sin(theta)
    w = complex(math.cos(phase), math.sin(phase))
    return c * a - w * s * b, w.conjugate() * s * a + c * b


def _angle_search(objective: PairObjective, phase: float) -> tuple[float, float]:
    res = minimize_scalar(
        objective.value,
        bounds=ANGLE_BOUNDS,
        args=(objective.phase_terms(phase),),
        method="bounded",
        options={"xatol": LINE_SEARCH_XATOL},
    )
    return float(res.fun), float(res.x)


def _phase_search(objective: PairObjective, theta: float) -> tuple[float, float]:
    res = minimize_scalar(
        objective.phase_value,
        bounds=PHASE_BOUNDS,
        args=(theta,),
        method="bounded",
        options={"xatol": LINE_SEARCH_XATOL},
    )
    return float(res.fun), float(res.x)


def _best_rotation(objective: PairObjective, current: float) -> tuple[float, float, float]:
    """Angle search at φ = 0, phase search at that angle, angle search at that phase."""
    best = (current, 0.0, 0.0)
    value, theta = _angle_search(objective, 0.0)
    if value < best[0]:
        best = (value, theta, 0.0)
    # the phase has no effect at θ = 0; search it at a half-mixing angle instead
    pivot = theta if abs(theta) > PHASE_SEARCH_MIN_ANGLE else math.pi / 4
    value, phase = _phase_search(objective, pivot)
    if value < best[0]:
        best = (value, pivot, phase)
    value, theta = _angle_search(objective, phase)
    if value < best[0]:
        best = (value, theta, phase)
    return best


def _refine(phis: npt.NDArray[np.complex128]) -> tuple[npt.NDArray[np.complex128], float, int, bool]:
    """Cyclic pairwise rotation descent; returns rows, value, sweeps, converged."""
    phis = phis.copy()
    contrib = c3_pure_batch(phis)
    total = float(contrib.sum())
    m = phis.shape[0]
    pairs = list(itertools.combinations(range(m), 2))
    for sweep in range(1, MAX_SWEEPS + 1):
        before = total
        for i, j in pairs:
            current = float(contrib[i] + contrib[j])
            if current <= 0.0:
                continue
            value, theta, phase = _best_rotation(PairObjective(phis[i], phis[j]), current)
            if value < current:
                phis[i], phis[j] = _rotate(phis[i], phis[j], theta, phase)
                contrib[[i, j]] = c3_pure_batch(phis[[i, j]])
        total = float(contrib.sum())
        if before - total < SWEEP_TOL:
            return phis, total, sweep, True
    return phis, total, MAX_SWEEPS, False


def _seed_sequence(seed: int | np.random.SeedSequence | None) -> np.random.SeedSequence:
    return seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)


def estimate_convex_roof(
    rho: npt.ArrayLike,
    restarts: int = 20,
    max_m: int | None = None,
    seed: int | np.random.SeedSequence | None = None,
) -> RoofEstimate:
    """Best decomposition found over random isometry starts.

    Args:
        rho: three-qubit density matrix.
        restarts: random starts per decomposition size, at least 1.
        max_m: largest decomposition size tried, default min(2r, 8).
        seed: start ``i`` at size ``m`` draws from its own stream keyed by
            ``(m, i)``, so raising ``restarts`` only adds starts.

    Returns:
        The estimate, its decomposition and one RoofRun per start. The
        eigendecomposition itself is included as start -1.
    """
    if restarts < 1:
        raise PreconditionError(f"restarts must be >= 1, got {restarts}")
    mu, e = eigen_support(rho)
    r = mu.size
    max_m = min(2 * r, DIM) if max_m is None else max_m
    if not r <= max_m <= DIM:
        raise PreconditionError(f"max_m must be in {r}..{DIM} for rank {r}, got {max_m}")
    ss = _seed_sequence(seed)
    base = np.sqrt(mu)[:, None] * e.T

    starts: list[tuple[int, int, ComplexMatrix]] = [(r, -1, np.eye(r, dtype=np.complex128))]
    for m in range(r, max_m + 1):
        for i in range(restarts):
            rng = np.random.default_rng(
                np.random.SeedSequence(ss.entropy, spawn_key=(*ss.spawn_key, m, i))
            )
            starts.append((m, i, random_isometry(m, r, rng)))

    trace: list[RoofRun] = []
    best_value = math.inf
    best_phis = base
    for m, i, v in starts:
        phis = v @ base
        start_value = float(np.sum(c3_pure_batch(phis)))
        phis, value, sweeps, converged = _refine(phis)
        trace.append(RoofRun(m, i, start_value, value, sweeps, converged))
        log.debug(
            "roof start m=%d restart=%d: %.10g -> %.10g in %d sweeps%s",
            m, i, start_value, value, sweeps, "" if converged else " (not converged)",
        )
        if value < best_value:
            best_value, best_phis = value, phis

    log.info("convex roof estimate %.10g over %d starts (rank %d)", best_value, len(starts), r)
    return RoofEstimate(best_value, _decomposition(best_phis), trace)
