"""
Monte-Carlo verification campaigns.

Every campaign derives one independent generator per sample from a
``SeedSequence`` spawned off the campaign seed, so results depend only on
(seed, sample index) and are reduced in index order. Each report records
the seed, the sample count, the tolerance and the reading of the two-sided
C^{23|1} formula in force.
"""

import logging
import math
from collections.abc import Callable
from concurrent.futures import ProcessPoolExecutor
from typing import Any

import numpy as np

from ghz_lab.analytic import (
    C23_VARIANTS,
    C23Variant,
    FactorInputs,
    evolve_bipartite,
    evolve_tau3,
    factor_three_sided,
    factor_two_sided,
    single_sided,
    tau3_from_cuts,
    two_sided,
    two_sided_tau3_flip,
)
from ghz_lab.channels import (
    PauliChannel,
    apply_channels,
    named_channel,
    random_flip_channel,
    random_pauli_channel,
)
from ghz_lab.concurrence import CANONICAL_CUTS, bipartite_concurrence, tau3
from ghz_lab.errors import PreconditionError
from ghz_lab.harness.report import VerificationReport
from ghz_lab.roof import estimate_convex_roof, support_rank
from ghz_lab.states import (
    DIM,
    DensityMatrix,
    conjugate_local_unitary,
    ghz,
    pure_density,
    random_density,
    random_ghz_type,
    random_local_unitaries,
)

log = logging.getLogger(__name__)

CHANNEL_SAMPLING = "amplitudes uniform on the unit 3-sphere"
FLIP_SAMPLING = "p uniform on [0, 1]"
LU_SAMPLING = "Haar U1 x U2 x U3"

DEFAULT_TOLERANCES = {
    "analytic-1sided": 1e-8,
    "two-sided": 1e-8,
    "factorization-2sided": 1e-8,
    "factorization-3sided": 1e-8,
    "evolution": 1e-6,
    "never-vanish": 1e-6,
    "lu-invariance": 1e-8,
    "rank4-roof": 5e-3,
}
POSITIVITY_FLOOR = DEFAULT_TOLERANCES["never-vanish"]
BRIDGE = math.sqrt(2)


def sample_rngs(seed: int | None, samples: int) -> list[np.random.Generator]:
    if samples < 1:
        raise PreconditionError(f"samples must be >= 1, got {samples}")
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(samples)]


def ghz_density() -> DensityMatrix:
    return pure_density(ghz())


def single_sided_factor_numeric(channel: PauliChannel) -> float:
    """𝔸 from the pipeline: C^{12|3} of the GHZ state with ``channel`` on qubit 3."""
    return bipartite_concurrence(apply_channels(ghz_density(), [(channel, 3)]), CANONICAL_CUTS[0])


def _max_abs(xs, ys) -> float:
    return float(max(abs(x - y) for x, y in zip(xs, ys, strict=True)))


def _check_variant(eq15_variant: str) -> None:
    if eq15_variant not in C23_VARIANTS:
        raise PreconditionError(f"eq15_variant must be one of {C23_VARIANTS}, got {eq15_variant!r}")


def single_sided_residual(channel: PauliChannel) -> float:
    report = tau3(apply_channels(ghz_density(), [(channel, 3)]))
    expected = single_sided(channel)
    return max(_max_abs(report.cuts, expected), abs(report.tau3 - tau3_from_cuts(expected)))


def two_sided_residuals(a: PauliChannel, b: PauliChannel) -> dict[str, float]:
    """Pipeline-vs-closed-form residual for each reading of the C^{23|1} formula."""
    report = tau3(apply_channels(ghz_density(), [(a, 2), (b, 3)]))
    return {variant: _max_abs(report.cuts, two_sided(a, b, variant)) for variant in C23_VARIANTS}


def _finish(report: VerificationReport, eq15_variant: str) -> VerificationReport:
    report.variant_flags.setdefault("eq15_variant", eq15_variant)
    level = logging.INFO if report.passed else logging.WARNING
    log.log(
        level,
        "campaign %s: %d samples, seed %s, max residual %.3e (tol %.1e) -> %s",
        report.campaign, report.samples, report.seed, report.max_residual,
        report.tolerance, "pass" if report.passed else "FAIL",
    )
    return report


def verify_single_sided(
    samples: int = 1000,
    seed: int | None = 42,
    tol: float = 1e-8,
    eq15_variant: C23Variant = "squared",
) -> VerificationReport:
    _check_variant(eq15_variant)
    log.info("campaign analytic-1sided: %d samples, seed %s", samples, seed)
    residuals = []
    for i, rng in enumerate(sample_rngs(seed, samples)):
        channel = random_pauli_channel(rng)
        residuals.append(single_sided_residual(channel))
        log.debug("sample %d: %s residual %.3e", i, channel, residuals[-1])
    worst = int(np.argmax(residuals))
    return _finish(
        VerificationReport(
            "analytic-1sided", seed, samples, tol, residuals,
            variant_flags={"channel_sampling": CHANNEL_SAMPLING},
            details={"worst_sample": worst},
        ),
        eq15_variant,
    )


def verify_two_sided(
    samples: int = 1000,
    seed: int | None = 42,
    tol: float = 1e-8,
    eq15_variant: C23Variant = "squared",
) -> VerificationReport:
    """Random channel pairs on qubits 2 and 3 against the two-sided closed forms.

    Both readings of the C^{23|1} formula are evaluated on every sample; the
    one in force decides pass/fail and the other is reported for comparison.
    """
    _check_variant(eq15_variant)
    log.info("campaign two-sided: %d samples, seed %s, variant %s", samples, seed, eq15_variant)
    per_variant: dict[str, list[float]] = {v: [] for v in C23_VARIANTS}
    for i, rng in enumerate(sample_rngs(seed, samples)):
        a = random_pauli_channel(rng)
        b = random_pauli_channel(rng)
        for variant, r in two_sided_residuals(a, b).items():
            per_variant[variant].append(r)
        log.debug("sample %d: residuals %s", i, {v: rs[-1] for v, rs in per_variant.items()})
    max_by_variant = {v: max(rs) for v, rs in per_variant.items()}
    better = min(max_by_variant, key=max_by_variant.get)
    return _finish(
        VerificationReport(
            "two-sided", seed, samples, tol, per_variant[eq15_variant],
            variant_flags={"channel_sampling": CHANNEL_SAMPLING},
            details={"max_residual_by_variant": max_by_variant, "better_variant": better},
        ),
        eq15_variant,
    )


def _random_flip_pair(rng: np.random.Generator) -> tuple[PauliChannel, PauliChannel]:
    fa, fb = rng.choice(["bitflip", "bitphaseflip"], size=2)
    return random_flip_channel(str(fa), rng), random_flip_channel(str(fb), rng)


def verify_two_sided_factorization(
    samples: int = 500,
    seed: int | None = 42,
    tol: float = 1e-8,
    eq15_variant: C23Variant = "squared",
) -> VerificationReport:
    """τ₃² of flip-channel pairs on qubits 2, 3 against (A² + B² + A²B²)/3.

    A and B come from the single-sided pipeline; the flip-channel closed form
    is checked on the same samples.
    """
    _check_variant(eq15_variant)
    log.info("campaign factorization-2sided: %d samples, seed %s", samples, seed)
    residuals = []
    closed_form = []
    for i, rng in enumerate(sample_rngs(seed, samples)):
        a, b = _random_flip_pair(rng)
        t2 = tau3(apply_channels(ghz_density(), [(a, 2), (b, 3)])).tau3 ** 2
        law = factor_two_sided(FactorInputs(single_sided_factor_numeric(a), single_sided_factor_numeric(b)))
        residuals.append(abs(t2 - law))
        closed_form.append(abs(t2 - two_sided_tau3_flip(a, b)))
        log.debug("sample %d: %s, %s law residual %.3e", i, a, b, residuals[-1])
    per_sample = [max(x, y) for x, y in zip(residuals, closed_form, strict=True)]
    return _finish(
        VerificationReport(
            "factorization-2sided", seed, samples, tol, per_sample,
            variant_flags={"channel_sampling": f"bitflip or bitphaseflip, {FLIP_SAMPLING}"},
            details={
                "max_factor_law_residual": max(residuals),
                "max_closed_form_residual": max(closed_form),
            },
        ),
        eq15_variant,
    )


THREE_SIDED_FAMILIES = ("all-bitflip", "two-bitphaseflip-one-bitflip")


def _three_sided_channels(family: str, rng: np.random.Generator) -> list[PauliChannel]:
    if family == "all-bitflip":
        return [random_flip_channel("bitflip", rng) for _ in range(3)]
    flip_slot = int(rng.integers(3))
    return [
        random_flip_channel("bitflip" if k == flip_slot else "bitphaseflip", rng)
        for k in range(3)
    ]


def verify_three_sided_factorization(
    samples: int = 500,
    seed: int | None = 42,
    tol: float = 1e-8,
    eq15_variant: C23Variant = "squared",
) -> VerificationReport:
    """τ₃² with channels on all three qubits against (A²B² + B²C² + A²C²)/3.

    ``samples`` draws are made for each channel family, so the report holds
    twice that many residuals.
    """
    _check_variant(eq15_variant)
    log.info("campaign factorization-3sided: %d samples per family, seed %s", samples, seed)
    rngs = sample_rngs(seed, 2 * samples)
    residuals: list[float] = []
    by_family: dict[str, dict[str, float]] = {}
    for f, family in enumerate(THREE_SIDED_FAMILIES):
        family_residuals = []
        for rng in rngs[f * samples:(f + 1) * samples]:
            channels = _three_sided_channels(family, rng)
            placements = list(zip(channels, (1, 2, 3), strict=True))
            t2 = tau3(apply_channels(ghz_density(), placements)).tau3 ** 2
            factors = FactorInputs(*(single_sided_factor_numeric(ch) for ch in channels))
            family_residuals.append(abs(t2 - factor_three_sided(factors)))
        by_family[family] = {"max": max(family_residuals), "mean": float(np.mean(family_residuals))}
        residuals.extend(family_residuals)
    return _finish(
        VerificationReport(
            "factorization-3sided", seed, 2 * samples, tol, residuals,
            variant_flags={"channel_sampling": FLIP_SAMPLING},
            details={"families": by_family, "samples_per_family": samples},
        ),
        eq15_variant,
    )


def verify_evolution_equations(
    samples: int = 1000,
    seed: int | None = 42,
    tol: float = 1e-6,
    eq15_variant: C23Variant = "squared",
) -> VerificationReport:
    """Multiplicative laws for a random GHZ-type state with a channel on qubit 3.

    Checks τ₃(Aψ) = τ₃(A·GHZ)·τ₃(ψ) and the same law for C^{12|3}. The
    report passes only if both hold; ``details`` says which one did.
    """
    _check_variant(eq15_variant)
    log.info("campaign evolution: %d samples, seed %s", samples, seed)
    cut = CANONICAL_CUTS[0]
    tau_residuals = []
    bipartite_residuals = []
    for i, rng in enumerate(sample_rngs(seed, samples)):
        psi = pure_density(random_ghz_type(rng))
        channel = random_pauli_channel(rng)
        noisy_psi = apply_channels(psi, [(channel, 3)])
        noisy_ghz = apply_channels(ghz_density(), [(channel, 3)])

        lhs = tau3(noisy_psi)
        rhs = evolve_tau3(tau3(noisy_ghz).tau3, tau3(psi).tau3)
        tau_residuals.append(abs(lhs.tau3 - rhs))

        rhs_c = evolve_bipartite(
            bipartite_concurrence(noisy_ghz, cut), bipartite_concurrence(psi, cut)
        )
        bipartite_residuals.append(abs(lhs.c12_3 - rhs_c))
        log.debug("sample %d: tau %.3e, C12|3 %.3e", i, tau_residuals[-1], bipartite_residuals[-1])
    per_sample = [max(x, y) for x, y in zip(tau_residuals, bipartite_residuals, strict=True)]
    max_tau, max_bipartite = max(tau_residuals), max(bipartite_residuals)
    return _finish(
        VerificationReport(
            "evolution", seed, samples, tol, per_sample,
            variant_flags={
                "channel_sampling": CHANNEL_SAMPLING,
                "state_sampling": f"{LU_SAMPLING} on the GHZ state",
            },
            details={
                "max_tau3_residual": max_tau,
                "max_bipartite_residual": max_bipartite,
                "tau3_law_holds": max_tau <= tol,
                "bipartite_law_holds": max_bipartite <= tol,
            },
        ),
        eq15_variant,
    )


def verify_never_vanish(
    grid_points: int = 101,
    floor: float = POSITIVITY_FLOOR,
    seed: int | None = 42,
    eq15_variant: C23Variant = "squared",
) -> VerificationReport:
    """τ₃ stays above ``floor`` for single-sided bit-flip and bit-phase-flip noise.

    Residual per grid point is max(0, floor - τ₃), tolerance 0. The grid is
    deterministic; ``seed`` is only recorded.
    """
    _check_variant(eq15_variant)
    if grid_points < 2:
        raise PreconditionError(f"grid_points must be >= 2, got {grid_points}")
    log.info("campaign never-vanish: %d grid points, floor %.1e", grid_points, floor)
    grid = np.linspace(0.0, 1.0, grid_points)
    residuals = []
    rows = []
    minima = {}
    for family in ("bitflip", "bitphaseflip"):
        values = []
        for p in grid:
            t = tau3(apply_channels(ghz_density(), [(named_channel(family, float(p)), 3)])).tau3
            values.append(t)
            residuals.append(max(0.0, floor - t))
            rows.append({"family": family, "p": float(p), "tau3": t})
        k = int(np.argmin(values))
        minima[family] = {"min_tau3": values[k], "at_p": float(grid[k])}
    return _finish(
        VerificationReport(
            "never-vanish", seed, len(residuals), 0.0, residuals,
            variant_flags={"grid": f"{grid_points} points on [0, 1]"},
            details={"floor": floor, "grid_points": grid_points, "minima": minima},
            rows=rows,
        ),
        eq15_variant,
    )


def verify_lu_invariance(
    samples: int = 200,
    seed: int | None = 42,
    tol: float = 1e-8,
    eq15_variant: C23Variant = "squared",
) -> VerificationReport:
    """|τ₃((U₁⊗U₂⊗U₃)ρ(·)†) - τ₃(ρ)| for random ρ and Haar local unitaries.

    Ranks cycle through 1..8. Pure states are LU invariant exactly; for
    mixed states the deviation is measured, and ``details`` separates the
    two.
    """
    _check_variant(eq15_variant)
    log.info("campaign lu-invariance: %d samples, seed %s", samples, seed)
    residuals = []
    by_rank: dict[str, float] = {}
    for i, rng in enumerate(sample_rngs(seed, samples)):
        rank = 1 + i % DIM
        rho = random_density(rank, rng)
        moved = conjugate_local_unitary(rho, *random_local_unitaries(rng))
        residuals.append(abs(tau3(moved).tau3 - tau3(rho).tau3))
        by_rank[str(rank)] = max(by_rank.get(str(rank), 0.0), residuals[-1])
        log.debug("sample %d (rank %d): residual %.3e", i, rank, residuals[-1])
    mixed = [v for k, v in by_rank.items() if k != "1"]
    return _finish(
        VerificationReport(
            "lu-invariance", seed, samples, tol, residuals,
            variant_flags={"state_sampling": "random_density, rank 1..8", "lu_sampling": LU_SAMPLING},
            details={
                "max_residual_by_rank": by_rank,
                "max_pure_residual": by_rank.get("1", 0.0),
                "max_mixed_residual": max(mixed, default=0.0),
            },
        ),
        eq15_variant,
    )


ROOF_SAMPLE_KINDS = ("rank-1", "rank-2", "rank-3", "rank-4", "flip-channels")


def _roof_sample(index: int, rng: np.random.Generator) -> tuple[str, DensityMatrix]:
    kind = ROOF_SAMPLE_KINDS[index % len(ROOF_SAMPLE_KINDS)]
    if kind == "flip-channels":
        a, b = _random_flip_pair(rng)
        return kind, apply_channels(ghz_density(), [(a, 2), (b, 3)])
    return kind, random_density(int(kind[-1]), rng)


def _roof_row(index: int, ss: np.random.SeedSequence, restarts: int) -> dict[str, Any]:
    state_ss, roof_ss = ss.spawn(2)
    kind, rho = _roof_sample(index, np.random.default_rng(state_ss))
    t = tau3(rho).tau3
    est = estimate_convex_roof(rho, restarts=restarts, seed=roof_ss)
    scaled = BRIDGE * est.value
    log.debug("sample %d (%s): tau3 %.6f, sqrt2*roof %.6f", index, kind, t, scaled)
    return {
        "index": index,
        "kind": kind,
        "rank": support_rank(rho),
        "tau3": t,
        "roof": est.value,
        "sqrt2_roof": scaled,
        "ratio": scaled / t if t > 1e-9 else None,
        "deviation": abs(scaled - t),
        "bridge_violation": max(0.0, t - scaled),
    }


def verify_rank4_roof(
    samples: int = 100,
    restarts: int = 20,
    seed: int | None = 42,
    tol: float = 5e-3,
    eq15_variant: C23Variant = "squared",
    workers: int = 1,
) -> VerificationReport:
    """Compare √2 times the numerical convex roof with τ₃ on rank ≤ 4 states.

    Samples cycle through random states of rank 1 to 4 and GHZ states with
    flip noise on qubits 2 and 3. The residual is |√2·roof - τ₃|; the
    report also carries the ratio distribution and the lower-bound check
    √2·roof ≥ τ₃. With ``workers > 1`` samples run in a process pool; rows
    are still reduced in sample order, so the report does not change.
    """
    _check_variant(eq15_variant)
    if workers < 1:
        raise PreconditionError(f"workers must be >= 1, got {workers}")
    log.info(
        "campaign rank4-roof: %d samples, %d restarts, seed %s, %d workers",
        samples, restarts, seed, workers,
    )
    children = np.random.SeedSequence(seed).spawn(samples)
    if workers == 1:
        rows = [_roof_row(i, ss, restarts) for i, ss in enumerate(children)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = [executor.submit(_roof_row, i, ss, restarts) for i, ss in enumerate(children)]
            rows = [f.result() for f in futures]
    residuals = [row["deviation"] for row in rows]

    ratios = [row["ratio"] for row in rows if row["ratio"] is not None]
    by_rank: dict[str, float] = {}
    for row in rows:
        key = str(row["rank"])
        by_rank[key] = max(by_rank.get(key, 0.0), row["deviation"])
    max_violation = max(row["bridge_violation"] for row in rows)
    details = {
        "bridge_factor": BRIDGE,
        "ratio": {
            "min": min(ratios, default=None),
            "max": max(ratios, default=None),
            "mean": float(np.mean(ratios)) if ratios else None,
        },
        "max_deviation_by_rank": by_rank,
        "max_bridge_violation": max_violation,
        "bridge_holds": max_violation <= tol,
    }
    return _finish(
        VerificationReport(
            "rank4-roof", seed, samples, tol, residuals,
            variant_flags={"restarts": restarts, "sample_kinds": list(ROOF_SAMPLE_KINDS)},
            details=details,
            rows=rows,
        ),
        eq15_variant,
    )


CAMPAIGNS: dict[str, Callable[..., VerificationReport]] = {
    "analytic-1sided": verify_single_sided,
    "two-sided": verify_two_sided,
    "factorization-2sided": verify_two_sided_factorization,
    "factorization-3sided": verify_three_sided_factorization,
    "evolution": verify_evolution_equations,
    "never-vanish": verify_never_vanish,
    "lu-invariance": verify_lu_invariance,
    "rank4-roof": verify_rank4_roof,
}
