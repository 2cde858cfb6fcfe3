"""Experiment configuration: JSON schema, validation and the preset catalog.

Configs are flat JSON objects with a versioned "schema" field.  All times
are dimensionless tau = k*t; the measurement strength and step size enter
only through the product dt_k, which is the per-step tau increment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .pauli import LABELS, MATRICES, check_density_matrix
from .policies import POLICY_KINDS, StageSchedule
from .sme import MAX_K_DT, NOISE_LAWS, STEPPER_KINDS

SCHEMA_VERSION = 1

#: Desk-scale guard on the total number of integration steps.
MAX_STEPS = int(1e7)


class ConfigError(ValueError):
    """Invalid configuration file or field values (CLI exit code 2)."""


def _ket(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def _initial_state_matrix(kind: str, rzz: float | None) -> np.ndarray:
    if kind == "maximally_mixed":
        return np.eye(4, dtype=complex) / 4.0
    if kind == "classically_correlated":
        return np.diag([0.5, 0.0, 0.0, 0.5]).astype(complex)
    if kind == "stage2_entry":
        # The classically correlated state as seen in the post-Hadamard frame.
        return (np.eye(4, dtype=complex) + MATRICES["XX"]) / 4.0
    if kind == "bell_phi_plus":
        return _ket([1.0, 0.0, 0.0, 1.0])
    if kind == "plus_plus":
        return _ket([1.0, 1.0, 1.0, 1.0])
    if kind == "zz_mixture":
        return (np.eye(4, dtype=complex) + float(rzz) * MATRICES["ZZ"]) / 4.0
    raise ConfigError(f"unknown initial_state kind {kind!r}")


INITIAL_STATE_KINDS = (
    "maximally_mixed",
    "classically_correlated",
    "stage2_entry",
    "bell_phi_plus",
    "plus_plus",
    "zz_mixture",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully validated description of one ensemble run."""

    name: str = "run"
    policy: str = "none"
    observable: str = "ZZ"
    dt_k: float = 1e-4
    tau_total: float = 1.0
    n_traj: int = 1000
    seed: int = 0
    stepper: str = "em"
    noise: str = "binary"
    initial_state: str = "maximally_mixed"
    initial_rzz: float | None = None
    schedule: StageSchedule = field(default_factory=StageSchedule)
    stride: int = 100
    workers: int = 1
    compare_feedback: bool = False
    emit_trajectories: bool = False

    def __post_init__(self):
        if self.policy not in POLICY_KINDS:
            raise ConfigError(f"policy must be one of {POLICY_KINDS}, got {self.policy!r}")
        if self.observable not in LABELS or self.observable == "II":
            raise ConfigError(f"observable must be a non-identity Pauli string, got {self.observable!r}")
        if not 0.0 < self.dt_k <= MAX_K_DT:
            raise ConfigError(f"dt_k must lie in (0, {MAX_K_DT}], got {self.dt_k}")
        if self.tau_total <= 0.0:
            raise ConfigError("tau_total must be positive")
        steps = self.tau_total / self.dt_k
        if abs(steps - round(steps)) > 1e-6:
            raise ConfigError("tau_total must be an integer number of dt_k steps")
        if round(steps) > MAX_STEPS:
            raise ConfigError(f"tau_total/dt_k = {steps:.3g} exceeds the desk-scale guard {MAX_STEPS}")
        if self.n_traj < 1:
            raise ConfigError("n_traj must be at least 1")
        if self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        if self.stepper not in STEPPER_KINDS:
            raise ConfigError(f"stepper must be one of {STEPPER_KINDS}, got {self.stepper!r}")
        if self.noise not in NOISE_LAWS:
            raise ConfigError(f"noise must be one of {NOISE_LAWS}, got {self.noise!r}")
        if self.initial_state not in INITIAL_STATE_KINDS:
            raise ConfigError(f"initial_state must be one of {INITIAL_STATE_KINDS}, got {self.initial_state!r}")
        if self.initial_state == "zz_mixture":
            if self.initial_rzz is None or not -1.0 <= self.initial_rzz <= 1.0:
                raise ConfigError("zz_mixture requires initial_rzz in [-1, 1]")
        elif self.initial_rzz is not None:
            raise ConfigError("initial_rzz is only valid with initial_state zz_mixture")
        if self.stride < 1:
            raise ConfigError("stride must be at least 1")
        if round(steps) % self.stride != 0:
            raise ConfigError(f"stride {self.stride} must divide the {round(steps)} total steps")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.policy == "dfs_hold" and self.schedule.tau_hold is None:
            raise ConfigError("dfs_hold requires schedule.tau_hold")

    @property
    def n_steps(self) -> int:
        return round(self.tau_total / self.dt_k)

    @property
    def n_bins(self) -> int:
        return self.n_steps // self.stride + 1

    def tau_grid(self) -> np.ndarray:
        return np.arange(self.n_bins) * (self.stride * self.dt_k)

    def initial_matrix(self) -> np.ndarray:
        rho = _initial_state_matrix(self.initial_state, self.initial_rzz)
        check_density_matrix(rho)
        return rho


#: Named experiment templates.  fig1 is the feedback/no-feedback comparison
#: pair behind the headline rapid-entanglement figure.
PRESETS: dict[str, dict[str, Any]] = {
    "stage1": {
        "policy": "stage1",
        "initial_state": "maximally_mixed",
        "tau_total": 0.6,
    },
    "stage2": {
        "policy": "stage2",
        "initial_state": "stage2_entry",
        "tau_total": 0.5,
    },
    "full": {
        "policy": "full_schedule",
        "initial_state": "maximally_mixed",
        "tau_total": 1.2,
    },
    "dfs-hold": {
        "policy": "dfs_hold",
        "initial_state": "classically_correlated",
        "tau_total": 0.4,
        "n_traj": 100,
        "schedule": {"tau_hold": 0.2},
    },
    "purify-demo": {
        "policy": "local_purify_demo",
        "observable": "IZ",
        "initial_state": "classically_correlated",
        "tau_total": 1.0,
        "n_traj": 500,
    },
    "fig1": {
        "policy": "stage2",
        "initial_state": "stage2_entry",
        "tau_total": 1.0,
        "n_traj": 1000,
        "compare_feedback": True,
    },
}

_SCHEDULE_KEYS = {"eps1", "tau_hold", "r2sq_exit"}
_CONFIG_KEYS = {
    "schema",
    "preset",
    "name",
    "policy",
    "observable",
    "dt_k",
    "tau_total",
    "n_traj",
    "seed",
    "stepper",
    "noise",
    "initial_state",
    "schedule",
    "stride",
    "workers",
    "compare_feedback",
    "emit_trajectories",
}


def _build(fields: dict[str, Any]) -> ExperimentConfig:
    sched_in = fields.pop("schedule", {})
    if not isinstance(sched_in, dict):
        raise ConfigError("schedule must be an object")
    unknown = set(sched_in) - _SCHEDULE_KEYS
    if unknown:
        raise ConfigError(f"unknown schedule field(s): {sorted(unknown)}")
    state = fields.pop("initial_state", "maximally_mixed")
    if isinstance(state, dict):
        unknown = set(state) - {"kind", "rzz"}
        if unknown:
            raise ConfigError(f"unknown initial_state field(s): {sorted(unknown)}")
        fields["initial_state"] = state.get("kind", "maximally_mixed")
        if "rzz" in state:
            fields["initial_rzz"] = state["rzz"]
    else:
        fields["initial_state"] = state
    try:
        schedule = StageSchedule(**sched_in)
        return ExperimentConfig(schedule=schedule, **fields)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def preset_config(preset: str, **overrides) -> ExperimentConfig:
    """Instantiate a preset, with explicit overrides winning over the template."""
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}; available: {sorted(PRESETS)}")
    fields: dict[str, Any] = {"name": preset, **PRESETS[preset]}
    sched = dict(fields.get("schedule", {}))
    if "schedule" in overrides:
        sched.update(overrides.pop("schedule"))
    fields.update(overrides)
    if sched:
        fields["schedule"] = sched
    return _build(fields)


def parse_config(text: str) -> ExperimentConfig:
    """Parse and fully validate a JSON config document.

    Unknown keys are rejected.  A "preset" field merges the named template
    underneath the explicit fields; explicit fields win.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config field(s): {sorted(unknown)}")
    schema = doc.pop("schema", SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema version {schema!r}; this build reads schema {SCHEMA_VERSION}")
    preset = doc.pop("preset", None)
    if preset is not None:
        return preset_config(preset, **doc)
    return _build(doc)


def serialize(config: ExperimentConfig) -> str:
    """JSON document that parse_config maps back to an equal config."""
    doc: dict[str, Any] = {
        "schema": SCHEMA_VERSION,
        "name": config.name,
        "policy": config.policy,
        "observable": config.observable,
        "dt_k": config.dt_k,
        "tau_total": config.tau_total,
        "n_traj": config.n_traj,
        "seed": config.seed,
        "stepper": config.stepper,
        "noise": config.noise,
        "initial_state": config.initial_state,
        "schedule": {
            "eps1": config.schedule.eps1,
            "tau_hold": config.schedule.tau_hold,
            "r2sq_exit": config.schedule.r2sq_exit,
        },
        "stride": config.stride,
        "workers": config.workers,
        "compare_feedback": config.compare_feedback,
        "emit_trajectories": config.emit_trajectories,
    }
    if config.initial_rzz is not None:
        doc["initial_state"] = {"kind": config.initial_state, "rzz": config.initial_rzz}
    return json.dumps(doc, indent=2, sort_keys=True)


def feedback_off(config: ExperimentConfig) -> ExperimentConfig:
    """The no-feedback arm of a config: same run with the policy disabled."""
    return replace(config, policy="none")
