"""Stochastic master equation engine for a weak Pauli-string measurement.

Integrates d rho = -k [y,[y,rho]] dt + sqrt(2k) (y rho + rho y - 2<y> rho) dW
for a Hermitian Pauli-string observable y (ZZ by default), together with the
measurement record dr = <y> dt + dW / sqrt(8k).

Two steppers realize the same unraveling: a literal Euler-Maruyama update
(the default) and a measurement-operator update that conjugates by
A = exp(-2 k dt (rbar - y)^2), which is positivity preserving.  Driven by a
shared noise increment they agree per step to order dt^(3/2) when the
increments satisfy dW^2 = dt exactly.

Noise increments come from counter-based Philox streams keyed by
(seed, trajectory index), so an ensemble is bit-reproducible regardless of
scheduling.  The default increment law is binary (+-sqrt(dt)), which has the
exact first and second moments of a Wiener increment per step and keeps the
feedback-held purification curves step-size exact; Gaussian increments are
available via the "gaussian" law.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .pauli import LABELS, MATRICES

#: Stability guard on the dimensionless step k*dt.
MAX_K_DT = 1e-2

#: Eigenvalues above this floor are tolerated without clipping.
CLIP_FLOOR = -1e-9

NOISE_LAWS = ("binary", "gaussian")

STEPPER_KINDS = ("em", "kraus")


class TrajectoryAbort(RuntimeError):
    """Integrator blow-up: the conditional state lost a positive trace."""

    def __init__(self, message: str, indices: tuple[int, ...] = ()):
        super().__init__(message)
        self.indices = indices


@dataclass(frozen=True)
class MeasurementModel:
    """Continuously monitored observable and its measurement strength."""

    observable: str = "ZZ"
    k: float = 1.0

    def __post_init__(self):
        if self.observable not in LABELS or self.observable == "II":
            raise ValueError(f"observable must be a non-identity Pauli string, got {self.observable!r}")
        if not self.k > 0.0:
            raise ValueError("measurement strength k must be positive")

    @property
    def matrix(self) -> np.ndarray:
        return MATRICES[self.observable]


@dataclass(frozen=True)
class NoiseStream:
    """Per-trajectory Wiener increment source.

    The sequence is a pure function of (seed, index): a Philox counter
    generator keyed by SeedSequence(entropy=seed, spawn_key=(index,)).
    """

    seed: int
    index: int
    law: str = "binary"

    def __post_init__(self):
        if self.law not in NOISE_LAWS:
            raise ValueError(f"noise law must be one of {NOISE_LAWS}, got {self.law!r}")

    def increments(self, n: int, dt: float) -> np.ndarray:
        """n increments with mean 0 and variance dt under the stream's law."""
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.index,))
        rng = np.random.Generator(np.random.Philox(ss))
        root = np.sqrt(dt)
        if self.law == "binary":
            return (rng.integers(0, 2, size=n) * 2 - 1) * root
        return rng.standard_normal(n) * root


@dataclass
class TrajectoryState:
    """Conditional state plus bookkeeping carried along one trajectory."""

    rho: np.ndarray
    tau: float = 0.0
    record: float = 0.0
    steps: int = 0
    warnings: int = 0
    stage: str | None = None
    hold_until: float | None = None


def drift_term(rho: np.ndarray, model: MeasurementModel) -> np.ndarray:
    """Deterministic part -k [y,[y,rho]] per unit time; traceless and Hermitian."""
    y = model.matrix
    inner = y @ rho - rho @ y
    return -model.k * (y @ inner - inner @ y)


def innovation_term(rho: np.ndarray, model: MeasurementModel) -> np.ndarray:
    """Stochastic part sqrt(2k)(y rho + rho y - 2<y> rho) per unit dW."""
    y = model.matrix
    ey = float(np.real(np.trace(y @ rho)))
    return np.sqrt(2.0 * model.k) * (y @ rho + rho @ y - 2.0 * ey * rho)


def record_increment(expectation: float, model: MeasurementModel, dt: float, dW: float) -> float:
    """Detector output increment dr = <y> dt + dW / sqrt(8k)."""
    return expectation * dt + dW / np.sqrt(8.0 * model.k)


def _check_step(model: MeasurementModel, dt: float) -> None:
    if model.k * dt > MAX_K_DT:
        raise ValueError(f"k*dt = {model.k * dt} exceeds the stability guard {MAX_K_DT}")


def sanitize(rho_raw: np.ndarray) -> tuple[np.ndarray, bool]:
    """Project a raw update back onto valid density matrices.

    Hermitizes, renormalizes the trace, and clips negative eigenvalues only
    when one falls below the -1e-9 floor.  Returns (rho, clipped); callers
    count clips per trajectory because their frequency is a step-size
    quality metric.
    """
    rho = 0.5 * (rho_raw + rho_raw.conj().T)
    tr = float(np.real(np.trace(rho)))
    if tr <= 0.0:
        raise TrajectoryAbort(f"state trace collapsed to {tr}")
    rho = rho / tr
    w, v = np.linalg.eigh(rho)
    if w.min() >= CLIP_FLOOR:
        return rho, False
    w = np.clip(w, 0.0, None)
    rho = (v * w) @ v.conj().T
    rho = rho / float(np.real(np.trace(rho)))
    return rho, True


def em_step(state: TrajectoryState, model: MeasurementModel, dt: float, dW: float) -> TrajectoryState:
    """One Euler-Maruyama step of the measurement unraveling."""
    _check_step(model, dt)
    y = model.matrix
    ey = float(np.real(np.trace(y @ state.rho)))
    raw = state.rho + drift_term(state.rho, model) * dt + innovation_term(state.rho, model) * dW
    rho, clipped = sanitize(raw)
    return replace(
        state,
        rho=rho,
        tau=state.tau + model.k * dt,
        record=state.record + record_increment(ey, model, dt, dW),
        steps=state.steps + 1,
        warnings=state.warnings + int(clipped),
    )


def kraus_step(state: TrajectoryState, model: MeasurementModel, dt: float, dW: float) -> TrajectoryState:
    """One measurement-operator step, exactly positive in exact arithmetic.

    With rbar = <y> + dW/(sqrt(8k) dt), conjugates by
    A = exp(-2 k dt (rbar - y)^2) and renormalizes.  Since y^2 = I the
    scalar factor cancels and A acts as cosh(th) I + sinh(th) y with
    th = 4 k dt rbar.
    """
    _check_step(model, dt)
    y = model.matrix
    ey = float(np.real(np.trace(y @ state.rho)))
    rbar = ey + dW / (np.sqrt(8.0 * model.k) * dt)
    th = 4.0 * model.k * dt * rbar
    c, s = np.cosh(th), np.sinh(th)
    yr = y @ state.rho
    ry = state.rho @ y
    raw = c * c * state.rho + c * s * (yr + ry) + s * s * (yr @ y)
    rho, clipped = sanitize(raw)
    return replace(
        state,
        rho=rho,
        tau=state.tau + model.k * dt,
        record=state.record + record_increment(ey, model, dt, dW),
        steps=state.steps + 1,
        warnings=state.warnings + int(clipped),
    )


STEPPERS = {"em": em_step, "kraus": kraus_step}


# ---------------------------------------------------------------------------
# Batched kernels.  These evolve a (B, 4, 4) stack of independent states with
# the same per-state arithmetic as the single-state steppers (bit-identical
# results for any batch split); the ensemble runner is their only consumer.
# ---------------------------------------------------------------------------


def _expectation_batch(rho: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.real(np.einsum("bij,ji->b", rho, y))


def _em_step_batch(rho, y, k, dt, dW):
    """Raw EM update on a (B,4,4) stack; returns (rho_raw, <y> per state)."""
    yr = y @ rho
    ry = rho @ y
    ey = np.real(np.trace(yr, axis1=-2, axis2=-1))
    drift = 2.0 * k * (yr @ y - rho)
    innov = np.sqrt(2.0 * k) * (yr + ry - 2.0 * ey[:, None, None] * rho)
    return rho + drift * dt + innov * dW[:, None, None], ey


def _kraus_step_batch(rho, y, k, dt, dW):
    """Raw measurement-operator update on a (B,4,4) stack."""
    yr = y @ rho
    ey = np.real(np.trace(yr, axis1=-2, axis2=-1))
    rbar = ey + dW / (np.sqrt(8.0 * k) * dt)
    th = 4.0 * k * dt * rbar
    c = np.cosh(th)[:, None, None]
    s = np.sinh(th)[:, None, None]
    return c * c * rho + c * s * (yr + rho @ y) + s * s * (yr @ y), ey


def _sanitize_batch(rho: np.ndarray, warnings: np.ndarray) -> np.ndarray:
    """Hermitize, renormalize, and clip flagged states on a (B,4,4) stack.

    Positivity is screened with the characteristic-polynomial coefficients
    e2, e3, e4 (all nonnegative iff PSD), so the eigendecomposition runs
    only on flagged states.
    """
    rho = 0.5 * (rho + np.conj(np.swapaxes(rho, -1, -2)))
    tr = np.real(np.trace(rho, axis1=-2, axis2=-1))
    bad = tr <= 0.0
    if bad.any():
        raise TrajectoryAbort("state trace collapsed", tuple(np.nonzero(bad)[0]))
    rho = rho / tr[:, None, None]

    rho2 = rho @ rho
    p2 = np.real(np.trace(rho2, axis1=-2, axis2=-1))
    p3 = np.real(np.einsum("bij,bij->b", rho2, np.conj(rho)))
    p4 = np.real(np.einsum("bij,bij->b", rho2, np.conj(rho2)))
    e2 = (1.0 - p2) / 2.0
    e3 = (1.0 - 3.0 * p2 + 2.0 * p3) / 6.0
    e4 = (1.0 - 6.0 * p2 + 3.0 * p2 * p2 + 8.0 * p3 - 6.0 * p4) / 24.0
    flagged = (e2 < -1e-13) | (e3 < -1e-13) | (e4 < -1e-14)
    if not flagged.any():
        return rho

    idx = np.nonzero(flagged)[0]
    w, v = np.linalg.eigh(rho[idx])
    needs_clip = w.min(axis=1) < CLIP_FLOOR
    if needs_clip.any():
        sub = idx[needs_clip]
        wc = np.clip(w[needs_clip], 0.0, None)
        fixed = (v[needs_clip] * wc[:, None, :]) @ np.conj(np.swapaxes(v[needs_clip], -1, -2))
        fixed = fixed / np.real(np.trace(fixed, axis1=-2, axis2=-1))[:, None, None]
        rho[sub] = fixed
        warnings[sub] += 1
    return rho


def step_batch(rho, y, k, dt, dW, kind, warnings):
    """One sanitized step of the chosen stepper on a (B,4,4) stack."""
    if kind == "em":
        raw, ey = _em_step_batch(rho, y, k, dt, dW)
    elif kind == "kraus":
        raw, ey = _kraus_step_batch(rho, y, k, dt, dW)
    else:
        raise ValueError(f"unknown stepper kind {kind!r}")
    return _sanitize_batch(raw, warnings), ey
