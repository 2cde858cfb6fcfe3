"""Closed-loop feedback laws mapping the conditional state to local rotations.

Stage 1 steers the encoded subspace qubit onto its x axis with rotations of
physical qubit 1 about y, making the descent into the even-parity subspace
deterministic.  Stage 2 runs the same rapid-purification geometry inside
the protected subspace (post-Hadamard frame) with rotations of physical
qubit 2 about x, driving a classically correlated state to a Bell state.
A scheduler chains the stages; holds and the frame flip switch the
measurement's effect off and on without touching the detector.

All policies are deterministic functions of the conditional state; the only
per-trajectory memory is the stage marker carried in TrajectoryState.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .metrics import r2_squared
from .pauli import ControlAction, EncodedBloch, apply_local_rotation, encoded_bloch, pauli_expand
from .sme import TrajectoryState

POLICY_KINDS = ("none", "stage1", "stage2", "full_schedule", "dfs_hold", "local_purify_demo")

_Y_AXIS = (0.0, 1.0, 0.0)
_X_AXIS = (1.0, 0.0, 0.0)


class PolicyError(ValueError):
    pass


@dataclass(frozen=True)
class StageSchedule:
    """Thresholds steering the staged protocol.

    eps1 is the encoded-qubit-1 impurity below which stage 1 exits,
    tau_hold an optional dimensionless dwell inside the frozen subspace
    before the frame flip, and r2sq_exit the correlation level at which
    stage 2 stops rotating.
    """

    eps1: float = 0.005
    tau_hold: float | None = None
    r2sq_exit: float = 2.9

    def __post_init__(self):
        if not 0.0 < self.eps1 < 1.0:
            raise ValueError(f"eps1 must lie in (0, 1), got {self.eps1}")
        if not 1.0 < self.r2sq_exit < 3.0:
            raise ValueError(f"r2sq_exit must lie in (1, 3), got {self.r2sq_exit}")
        if self.tau_hold is not None and self.tau_hold < 0.0:
            raise ValueError("tau_hold must be nonnegative")


class PolicyStep(NamedTuple):
    """Decision for one step: a rotation, an optional frame flip, a stage marker."""

    action: ControlAction
    toggle: bool
    stage: str | None
    hold_until: float | None = None


def stage1_angle(bloch: EncodedBloch) -> float:
    """Rotation angle about y on qubit 1 putting the encoded-1 Bloch on +x.

    theta = atan2(z, x) under the package rotation convention, so the
    post-rotation components are (sqrt(x^2 + z^2), y, 0).  The degenerate
    zero-vector start returns 0; the first measurement kick breaks the tie.
    """
    if bloch.which != "one":
        raise PolicyError("stage 1 feedback reads the encoded-1 Bloch vector")
    return math.atan2(bloch.z, bloch.x)


def stage1_finalize(rho: np.ndarray) -> np.ndarray:
    """Rotate the purified encoded-1 Bloch from +x onto +z (into the subspace).

    Applies theta = -pi/2 about y on qubit 1, mapping (x, 0, 0) to
    (0, 0, x); the even-parity weight becomes (1 + r_ZZ)/2 = (1 + x)/2.
    Requires the stage-1 exit condition x >= 0.9; anything less signals a
    premature stage exit.
    """
    bloch = encoded_bloch(pauli_expand(rho), "one")
    if bloch.x < 0.9:
        raise PolicyError(f"stage-1 finalize requires encoded-1 x >= 0.9, got {bloch.x:.4f}")
    return apply_local_rotation(rho, ControlAction.rotate_qubit1(_Y_AXIS, -math.pi / 2))


def stage2_angle(table: dict[str, float]) -> float:
    """Rotation angle about x on qubit 2 zeroing the measured component.

    In the post-Hadamard frame the protected component is r(XX) and the
    rapid-purification pair is (kept: r(ZY), measured: r(ZZ)).  The angle
    phi = atan2(-r(ZZ), r(ZY)) sends (y, z) = (r(ZY), r(ZZ)) to
    (sqrt(y^2 + z^2), 0), keeping r(ZY) nonnegative.
    """
    return math.atan2(-table["ZZ"], table["ZY"])


def _stage1_action(table: dict[str, float]) -> ControlAction:
    theta = stage1_angle(encoded_bloch(table, "one"))
    if theta == 0.0:
        return ControlAction.identity()
    return ControlAction.rotate_qubit1(_Y_AXIS, theta)


def _stage2_action(table: dict[str, float]) -> ControlAction:
    phi = stage2_angle(table)
    if phi == 0.0:
        return ControlAction.identity()
    return ControlAction.rotate_qubit2(_X_AXIS, phi)


def policy_step(kind: str, schedule: StageSchedule, state: TrajectoryState) -> PolicyStep:
    """Map the conditional state to this step's control decision.

    The full schedule runs stage 1 until the encoded-1 impurity drops to
    eps1, folds the finalize rotation into that step, optionally dwells in
    the frozen subspace, flips the frame once, then runs stage 2 until
    R2^2 reaches its exit threshold.
    """
    identity = ControlAction.identity()
    if kind == "none":
        return PolicyStep(identity, False, state.stage, state.hold_until)

    if kind == "local_purify_demo":
        # Rapid purification of the protected qubit along its measured axis
        # would need rotations about XX or XY, which are not local; the
        # parity-preserving local feedback is therefore the identity and
        # purification proceeds by measurement collapse alone.
        return PolicyStep(identity, False, state.stage, state.hold_until)

    if kind == "dfs_hold":
        if schedule.tau_hold is None:
            raise PolicyError("dfs_hold requires schedule.tau_hold")
        if state.stage == "post":
            return PolicyStep(identity, False, "post", None)
        if state.tau >= schedule.tau_hold - 1e-12:
            return PolicyStep(identity, True, "post", None)
        return PolicyStep(identity, False, "holding", None)

    table = pauli_expand(state.rho)

    if kind == "stage1":
        return PolicyStep(_stage1_action(table), False, state.stage, state.hold_until)

    if kind == "stage2":
        return PolicyStep(_stage2_action(table), False, state.stage, state.hold_until)

    if kind == "full_schedule":
        stage = state.stage or "stage1"
        if stage == "stage1":
            bloch = encoded_bloch(table, "one")
            impurity = (1.0 - bloch.length_sq) / 2.0
            if impurity > schedule.eps1:
                return PolicyStep(_stage1_action(table), False, "stage1", None)
            # Exit: align onto +x and finalize onto +z in a single rotation.
            theta = math.atan2(bloch.z, bloch.x) - math.pi / 2.0
            action = ControlAction.rotate_qubit1(_Y_AXIS, theta)
            if schedule.tau_hold:
                return PolicyStep(action, False, "hold", state.tau + schedule.tau_hold)
            return PolicyStep(action, True, "stage2", None)
        if stage == "hold":
            if state.hold_until is not None and state.tau >= state.hold_until - 1e-12:
                return PolicyStep(identity, True, "stage2", None)
            return PolicyStep(identity, False, "hold", state.hold_until)
        if stage == "stage2":
            if r2_squared(table) >= schedule.r2sq_exit:
                return PolicyStep(identity, False, "done", None)
            return PolicyStep(_stage2_action(table), False, "stage2", None)
        if stage == "done":
            return PolicyStep(identity, False, "done", None)
        raise PolicyError(f"unknown stage marker {stage!r}")

    raise PolicyError(f"unknown policy kind {kind!r}")
