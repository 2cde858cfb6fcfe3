"""Measurement engine: drift/innovation terms, steppers, noise streams."""

import numpy as np
import pytest

from helpers import (
    MAXIMALLY_MIXED,
    PHI_PLUS,
    random_density_matrix,
    random_dfs_plus_state,
)

from zzsim.pauli import MATRICES, pauli_expand, pauli_reconstruct
from zzsim.sme import (
    MAX_K_DT,
    MeasurementModel,
    NoiseStream,
    TrajectoryAbort,
    TrajectoryState,
    drift_term,
    em_step,
    innovation_term,
    kraus_step,
    record_increment,
    sanitize,
)

MODEL = MeasurementModel()


def trace_distance(a, b):
    return 0.5 * np.abs(np.linalg.eigvalsh(a - b)).sum()


def xz_state(c):
    table = {s: 0.0 for s in MATRICES} | {"II": 1.0, "XZ": c}
    return pauli_reconstruct(table)


def test_model_validation():
    with pytest.raises(ValueError):
        MeasurementModel(observable="II")
    with pytest.raises(ValueError):
        MeasurementModel(k=0.0)
    assert MeasurementModel(observable="IZ").matrix is MATRICES["IZ"]


def test_drift_maximally_mixed_is_zero():
    assert np.allclose(drift_term(MAXIMALLY_MIXED, MODEL), 0.0, atol=1e-15)


def test_drift_vanishes_on_parity_subspace():
    rng = np.random.default_rng(0)
    rho = random_dfs_plus_state(rng)
    assert np.allclose(drift_term(rho, MODEL), 0.0, atol=1e-14)


def test_drift_decay_rate_on_anticommuting_coefficient():
    # d r(XZ)/dt = -4k c for a state with only the XZ correlation.
    c = 0.3
    d = drift_term(xz_state(c), MODEL)
    rate = np.real(np.trace(MATRICES["XZ"] @ d))
    assert rate == pytest.approx(-4.0 * MODEL.k * c, rel=1e-12)
    assert np.trace(d) == pytest.approx(0.0, abs=1e-14)
    assert np.allclose(d, d.conj().T, atol=1e-14)


def test_innovation_examples():
    rng = np.random.default_rng(1)
    assert np.allclose(innovation_term(random_dfs_plus_state(rng), MODEL), 0.0, atol=1e-13)
    expect = np.sqrt(2.0) * MATRICES["ZZ"] / 2.0
    assert np.allclose(innovation_term(MAXIMALLY_MIXED, MODEL), expect, atol=1e-14)
    assert np.allclose(innovation_term(PHI_PLUS, MODEL), 0.0, atol=1e-13)


def test_record_increment_examples():
    assert record_increment(1.0, MODEL, 1e-4, 0.0) == pytest.approx(1e-4)
    assert record_increment(0.0, MODEL, 1e-4, 0.01) == pytest.approx(0.01 / np.sqrt(8.0))
    assert record_increment(-1.0, MODEL, 1e-4, 0.0) == pytest.approx(-1e-4)


def test_em_step_examples():
    rng = np.random.default_rng(2)
    dfs = random_dfs_plus_state(rng)
    out = em_step(TrajectoryState(dfs), MODEL, 1e-4, 0.02)
    assert np.abs(out.rho - dfs).max() < 1e-14
    assert out.record == pytest.approx(record_increment(1.0, MODEL, 1e-4, 0.02), abs=1e-15)

    out = em_step(TrajectoryState(MAXIMALLY_MIXED.copy()), MODEL, 1e-4, 0.0)
    assert np.abs(out.rho - MAXIMALLY_MIXED).max() < 1e-15

    out = em_step(TrajectoryState(xz_state(0.5)), MODEL, 1e-4, 0.0)
    assert pauli_expand(out.rho)["XZ"] == pytest.approx(0.5 * (1 - 4e-4), rel=1e-12)
    assert out.tau == pytest.approx(1e-4)
    assert out.steps == 1


def test_step_rejects_large_kdt():
    state = TrajectoryState(MAXIMALLY_MIXED.copy())
    with pytest.raises(ValueError):
        em_step(state, MODEL, 2 * MAX_K_DT, 0.0)
    with pytest.raises(ValueError):
        kraus_step(state, MODEL, 2 * MAX_K_DT, 0.0)


def test_kraus_step_freezes_parity_subspace_and_eigenstates():
    rng = np.random.default_rng(3)
    dfs = random_dfs_plus_state(rng)
    out = kraus_step(TrajectoryState(dfs), MODEL, 1e-4, 0.015)
    assert np.abs(out.rho - dfs).max() < 1e-12
    out = kraus_step(TrajectoryState(PHI_PLUS.copy()), MODEL, 1e-4, -0.02)
    assert np.abs(out.rho - PHI_PLUS).max() < 1e-12


def test_steppers_agree_to_three_halves_order():
    # Shared increments with dW^2 = dt; halving dt must shrink the per-step
    # gap by at least 2.5x (the dt^(3/2) scaling gives about 2.8x).
    rng = np.random.default_rng(4)
    rhos = [random_density_matrix(rng) for _ in range(40)]
    gaps = []
    for dt in (1e-4, 5e-5):
        dW = np.sqrt(dt)
        gap = np.mean(
            [
                trace_distance(
                    em_step(TrajectoryState(r.copy()), MODEL, dt, dW).rho,
                    kraus_step(TrajectoryState(r.copy()), MODEL, dt, dW).rho,
                )
                for r in rhos
            ]
        )
        gaps.append(gap)
    assert gaps[0] < 50.0 * (1e-4) ** 1.5
    assert gaps[0] / gaps[1] > 2.5


def test_trace_preserved_along_trajectory():
    rng = np.random.default_rng(5)
    state = TrajectoryState(random_density_matrix(rng))
    noise = NoiseStream(seed=1, index=0).increments(500, 1e-4)
    for dW in noise:
        state = em_step(state, MODEL, 1e-4, dW)
        assert np.trace(state.rho).real == pytest.approx(1.0, abs=1e-12)


def test_sanitize_examples():
    rng = np.random.default_rng(6)
    rho = random_density_matrix(rng)
    out, clipped = sanitize(rho)
    assert not clipped
    assert np.abs(out - rho).max() < 1e-15

    perturbed = rho + 1e-13 * (rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    out, _ = sanitize(perturbed)
    assert np.allclose(out, out.conj().T, atol=1e-16)

    w = np.array([0.7, 0.2, 0.1 + 1e-8, -1e-8])
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    v = np.linalg.qr(g)[0]
    bad = (v * w) @ v.conj().T
    out, clipped = sanitize(bad)
    assert clipped
    assert np.linalg.eigvalsh(out).min() >= -1e-15
    assert np.trace(out).real == pytest.approx(1.0, abs=1e-12)

    with pytest.raises(TrajectoryAbort):
        sanitize(np.zeros((4, 4), dtype=complex))


def test_martingale_property_small_ensemble():
    # <r_ZZ> is drift-free; the ensemble mean at tau = 0.25 stays within
    # three standard errors of its initial value.
    from zzsim.config import ExperimentConfig
    from zzsim.ensemble import run_ensemble

    cfg = ExperimentConfig(policy="none", tau_total=0.25, n_traj=512, dt_k=1e-4, stride=250)
    stats = run_ensemble(cfg)
    se = max(stats.stderr["rzz"][-1], 1e-12)
    assert abs(stats.mean["rzz"][-1]) < 3.0 * se


def test_variance_growth_rate_from_mixed_state():
    # d<r_ZZ^2>/dtau = 8 at tau = 0 from the innovation coefficient
    # 2 sqrt(2k) (1 - r_ZZ^2).
    from zzsim.config import ExperimentConfig
    from zzsim.ensemble import run_ensemble_raw

    cfg = ExperimentConfig(policy="none", tau_total=3e-4, n_traj=64, dt_k=1e-4, stride=1)
    data = run_ensemble_raw(cfg)
    tau = cfg.tau_grid()
    slope = (data["rzz"][:, 1] ** 2).mean() / tau[1]
    assert slope == pytest.approx(8.0, abs=1e-9)

    gauss = ExperimentConfig(
        policy="none", tau_total=3e-4, n_traj=4096, dt_k=1e-4, stride=1, noise="gaussian"
    )
    data = run_ensemble_raw(gauss)
    slope = (data["rzz"][:, 1] ** 2).mean() / tau[1]
    assert slope == pytest.approx(8.0, abs=0.6)


def test_noise_stream_determinism_and_laws():
    a = NoiseStream(seed=42, index=7).increments(256, 1e-4)
    b = NoiseStream(seed=42, index=7).increments(256, 1e-4)
    assert np.array_equal(a, b)
    c = NoiseStream(seed=42, index=8).increments(256, 1e-4)
    assert not np.array_equal(a, c)

    assert set(np.round(a / np.sqrt(1e-4), 12)) <= {-1.0, 1.0}
    g = NoiseStream(seed=42, index=7, law="gaussian").increments(200_000, 1e-4)
    assert g.mean() == pytest.approx(0.0, abs=3 * np.sqrt(1e-4) / np.sqrt(200_000) * 3)
    assert g.var() == pytest.approx(1e-4, rel=0.02)
    with pytest.raises(ValueError):
        NoiseStream(seed=0, index=0, law="uniform")
