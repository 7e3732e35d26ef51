import math
import time

import numpy as np
import pytest

from ghz_lab.channels import apply_channels, named_channel
from ghz_lab.concurrence import c3_pure, c3_pure_batch, tau3_value
from ghz_lab.errors import PreconditionError
from ghz_lab.roof import (
    PairObjective,
    decomposition_from_isometry,
    eigen_support,
    estimate_convex_roof,
    random_isometry,
    roof_objective,
    support_rank,
)
from ghz_lab.states import (
    basis_state,
    conjugate_local_unitary,
    ghz,
    pure_density,
    random_density,
    random_local_unitaries,
)


def test_random_isometry(rng):
    for m, r in ((1, 1), (3, 2), (8, 4)):
        v = random_isometry(m, r, rng)
        assert v.shape == (m, r)
        np.testing.assert_allclose(v.conj().T @ v, np.eye(r), atol=1e-12)


def test_decomposition_reconstructs_state(rng):
    rho = random_density(3, rng)
    v = random_isometry(5, 3, rng)
    dec = decomposition_from_isometry(rho, v)
    assert len(dec) == 5
    assert dec.weights.sum() == pytest.approx(1.0)
    np.testing.assert_allclose(np.linalg.norm(dec.states, axis=1), 1.0, atol=1e-12)
    np.testing.assert_allclose(dec.density(), rho, atol=1e-12)


def test_objective_of_eigenbasis(rng):
    rho = random_density(2, rng)
    mu, e = eigen_support(rho)
    expected = sum(w * c3_pure(e[:, j]) for j, w in enumerate(mu))
    assert roof_objective(rho, np.eye(2)) == pytest.approx(expected)


def test_objective_rejects_non_isometry(rng):
    rho = random_density(2, rng)
    with pytest.raises(PreconditionError):
        roof_objective(rho, 2 * np.eye(2))
    with pytest.raises(PreconditionError):
        roof_objective(rho, np.ones((3, 1)) / np.sqrt(3))


def test_pure_state_roof_is_c3():
    est = estimate_convex_roof(pure_density(ghz()), restarts=2, seed=1)
    assert est.value == pytest.approx(math.sqrt(0.5), abs=1e-10)
    assert len(est.trace) == 1 + 2 * 2


def test_separable_mixture_has_zero_roof():
    rho = 0.6 * pure_density(basis_state("000")) + 0.4 * pure_density(basis_state("111"))
    est = estimate_convex_roof(rho, restarts=2, seed=1)
    assert est.value == pytest.approx(0.0, abs=1e-6)


def test_best_decomposition_reconstructs_and_matches_value(rng):
    rho = random_density(2, rng)
    est = estimate_convex_roof(rho, restarts=2, seed=3)
    np.testing.assert_allclose(est.best.density(), rho, atol=1e-9)
    value = sum(w * c3_pure(s) for w, s in zip(est.best.weights, est.best.states, strict=True))
    assert value == pytest.approx(est.value, abs=1e-7)
    assert est.value == min(run.value for run in est.trace)
    assert all(run.value <= run.start_value + 1e-12 for run in est.trace)


def test_more_restarts_never_worse(rng):
    rho = random_density(2, rng)
    few = estimate_convex_roof(rho, restarts=1, seed=11)
    more = estimate_convex_roof(rho, restarts=3, seed=11)
    assert more.value <= few.value + 1e-12


def test_sqrt2_roof_bounds_tau3(rng):
    for rank in (1, 2, 3):
        rho = random_density(rank, rng)
        est = estimate_convex_roof(rho, restarts=2, seed=rank)
        assert math.sqrt(2) * est.value >= tau3_value(rho) - 1e-7


def test_bitflip_half_roof():
    rho = apply_channels(pure_density(ghz()), [(named_channel("bitflip", 0.5), 3)])
    est = estimate_convex_roof(rho, restarts=3, seed=5)
    # every state in the support has C3 >= sqrt(1/3)
    assert est.value >= math.sqrt(1 / 3) - 1e-9
    assert est.value == pytest.approx(math.sqrt(1 / 3), abs=1e-4)
    assert tau3_value(rho) == pytest.approx(math.sqrt(1 / 3))


def test_roof_argument_checks(rng):
    rho = random_density(3, rng)
    with pytest.raises(PreconditionError):
        estimate_convex_roof(rho, restarts=0)
    with pytest.raises(PreconditionError):
        estimate_convex_roof(rho, max_m=2)


def test_roof_is_local_unitary_invariant():
    rho = apply_channels(pure_density(ghz()), [(named_channel("bitflip", 0.5), 3)])
    us = random_local_unitaries(21)
    rotated = conjugate_local_unitary(rho, *us)
    a = estimate_convex_roof(rho, restarts=3, seed=5).value
    b = estimate_convex_roof(rotated, restarts=3, seed=5).value
    assert b == pytest.approx(a, abs=1e-4)


def test_pair_objective_matches_rotated_rows(rng):
    a, b = rng.standard_normal((2, 8)) + 1j * rng.standard_normal((2, 8))
    objective = PairObjective(a, b)
    for theta, phase in ((0.0, 0.0), (0.3, 1.1), (-1.2, 4.0), (math.pi / 2, 2.5)):
        c, s, w = math.cos(theta), math.sin(theta), np.exp(1j * phase)
        rotated = np.stack([c * a - w * s * b, np.conj(w) * s * a + c * b])
        assert objective(theta, phase) == pytest.approx(c3_pure_batch(rotated).sum(), rel=1e-9)


def test_rank4_roof_runs_quickly(rng):
    rho = random_density(4, rng)
    start = time.perf_counter()
    est = estimate_convex_roof(rho, restarts=2, seed=3)
    assert time.perf_counter() - start < 30.0
    # eigenbasis start plus two starts for each m in 4..8
    assert len(est.trace) == 1 + 5 * 2
    assert all(run.value <= run.start_value + 1e-12 for run in est.trace)


def test_support_rank(rng):
    assert support_rank(pure_density(ghz())) == 1
    for rank in (2, 4):
        assert support_rank(random_density(rank, rng)) == rank
