"""Monte-Carlo ensembles of measurement-feedback trajectories.

Trajectories are the unit of parallel work: each one is a pure function of
(config, index) through its own counter-based noise stream, so results are
bit-reproducible for any worker count and batch split.  For throughput the
runner advances many trajectories at once as a (B, 4, 4) stack of dense
states; every operation in the step loop acts per trajectory, which keeps
the batched arithmetic bit-identical to single-trajectory execution.
Aggregation is a fixed-order fold over trajectory index.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats as _scipy_stats

from .config import ExperimentConfig
from .metrics import METRIC_FIELDS, R2_INDICES, MetricsRow, _metrics_batch, _table_batch
from .pauli import INDEX, MATRICES, MATRIX_STACK, PAULI_1Q
from .sme import NoiseStream, TrajectoryAbort, step_batch

#: Trajectories advanced together per step loop; results do not depend on it.
BATCH_LIMIT = 256

_I2 = np.eye(2, dtype=complex)
_H2 = (PAULI_1Q["X"] + PAULI_1Q["Z"]) / np.sqrt(2.0)
_H4 = np.kron(_H2, _H2)

_IDX_XZ = INDEX["XZ"]
_IDX_ZZ = INDEX["ZZ"]
_IDX_ZY = INDEX["ZY"]

# Stage codes for the full schedule.
_S1, _HOLD, _S2, _DONE = 0, 1, 2, 3


class EnsembleError(RuntimeError):
    """One or more trajectories aborted; carries the failing indices."""

    def __init__(self, indices: tuple[int, ...]):
        super().__init__(f"trajectories aborted: {list(indices)}")
        self.indices = indices


@dataclass
class TimeSeries:
    """Sampled diagnostics along one trajectory at a fixed output stride."""

    taus: np.ndarray
    metrics: dict[str, np.ndarray]

    def rows(self) -> list[MetricsRow]:
        return [
            MetricsRow(
                tau=float(self.taus[i]),
                warnings=int(self.metrics["warnings"][i]),
                **{f: float(self.metrics[f][i]) for f in METRIC_FIELDS if f != "warnings"},
            )
            for i in range(len(self.taus))
        ]


@dataclass
class EnsembleStats:
    """Per-tau-bin moments of every metric across an ensemble."""

    taus: np.ndarray
    count: int
    mean: dict[str, np.ndarray]
    std: dict[str, np.ndarray]
    stderr: dict[str, np.ndarray]


def _coeff(rho: np.ndarray, label_idx: int) -> np.ndarray:
    return np.real(np.einsum("bij,ji->b", rho, MATRIX_STACK[label_idx]))


def _rotate_qubit1_y(rho: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Conjugate each state by exp(-i theta Y/2) (x) I, batched angles."""
    c = np.cos(theta / 2.0)
    s = np.sin(theta / 2.0)
    u2 = c[:, None, None] * _I2 - 1j * s[:, None, None] * PAULI_1Q["Y"]
    u4 = np.einsum("bij,kl->bikjl", u2, _I2).reshape(-1, 4, 4)
    return u4 @ rho @ np.conj(np.swapaxes(u4, -1, -2))


def _rotate_qubit2_x(rho: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Conjugate each state by I (x) exp(-i phi X/2), batched angles."""
    c = np.cos(phi / 2.0)
    s = np.sin(phi / 2.0)
    u2 = c[:, None, None] * _I2 - 1j * s[:, None, None] * PAULI_1Q["X"]
    u4 = np.einsum("ij,bkl->bikjl", _I2, u2).reshape(-1, 4, 4)
    return u4 @ rho @ np.conj(np.swapaxes(u4, -1, -2))


def _toggle(rho: np.ndarray) -> np.ndarray:
    return _H4 @ rho @ _H4


def _apply_policy_batch(config, rho, stage, hold_until, tau):
    """One feedback application on a (B,4,4) stack; returns updated arrays.

    Decision-for-decision equivalent to policies.policy_step: rotation
    first, then any frame toggle, then stage-marker updates.
    """
    kind = config.policy
    if kind in ("none", "local_purify_demo"):
        return rho, stage, hold_until

    if kind == "stage1":
        theta = np.arctan2(_coeff(rho, _IDX_ZZ), _coeff(rho, _IDX_XZ))
        return _rotate_qubit1_y(rho, theta), stage, hold_until

    if kind == "stage2":
        phi = np.arctan2(-_coeff(rho, _IDX_ZZ), _coeff(rho, _IDX_ZY))
        return _rotate_qubit2_x(rho, phi), stage, hold_until

    if kind == "dfs_hold":
        expire = (stage == _S1) & (tau >= config.schedule.tau_hold - 1e-12)
        if expire.any():
            rho[expire] = _toggle(rho[expire])
            stage[expire] = _DONE
        return rho, stage, hold_until

    if kind == "full_schedule":
        # Rotations act on per-stage subsets only, so the arithmetic each
        # trajectory sees is independent of how the batch is split.
        sched = config.schedule
        in_s1 = stage == _S1
        in_s2 = stage == _S2
        crossed = np.zeros(rho.shape[0], dtype=bool)
        if in_s1.any():
            sub = rho[in_s1]
            x = _coeff(sub, _IDX_XZ)
            z = _coeff(sub, _IDX_ZZ)
            impurity = (1.0 - (x * x + z * z)) / 2.0
            hit = impurity <= sched.eps1
            theta = np.arctan2(z, x) - np.where(hit, math.pi / 2.0, 0.0)
            rho[in_s1] = _rotate_qubit1_y(sub, theta)
            crossed[in_s1] = hit
        if in_s2.any():
            sub = rho[in_s2]
            table = _table_batch(sub)
            r2sq = (table[:, R2_INDICES] ** 2).sum(axis=1)
            hit = r2sq >= sched.r2sq_exit
            finished = np.zeros(rho.shape[0], dtype=bool)
            finished[in_s2] = hit
            stage[finished] = _DONE
            active = in_s2 & ~finished
            if active.any():
                sub = rho[active]
                table = _table_batch(sub)
                phi = np.arctan2(-table[:, _IDX_ZZ], table[:, _IDX_ZY])
                rho[active] = _rotate_qubit2_x(sub, phi)
        if crossed.any():
            if sched.tau_hold:
                stage[crossed] = _HOLD
                hold_until[crossed] = tau + sched.tau_hold
            else:
                rho[crossed] = _toggle(rho[crossed])
                stage[crossed] = _S2
        expire = (stage == _HOLD) & (tau >= hold_until - 1e-12)
        if expire.any():
            rho[expire] = _toggle(rho[expire])
            stage[expire] = _S2
        return rho, stage, hold_until

    raise ValueError(f"unknown policy kind {kind!r}")


def _run_batch(config: ExperimentConfig, indices: np.ndarray) -> dict[str, np.ndarray]:
    """Advance the given trajectory indices and sample metrics at the stride."""
    B = len(indices)
    n_steps = config.n_steps
    dt = config.dt_k
    k = 1.0
    y = MATRICES[config.observable]

    rho = np.broadcast_to(config.initial_matrix(), (B, 4, 4)).copy()
    stage = np.zeros(B, dtype=np.int8)
    hold_until = np.full(B, np.inf)
    warnings = np.zeros(B, dtype=np.int64)

    noise = np.stack(
        [NoiseStream(config.seed, int(i), config.noise).increments(n_steps, dt) for i in indices]
    )

    n_bins = config.n_bins
    out = {f: np.empty((B, n_bins)) for f in METRIC_FIELDS}

    def sample(bin_idx):
        vals = _metrics_batch(rho)
        for f, arr in vals.items():
            out[f][:, bin_idx] = arr
        out["warnings"][:, bin_idx] = warnings

    sample(0)
    try:
        for n in range(n_steps):
            dW = noise[:, n]
            rho, _ = step_batch(rho, y, k, dt, dW, config.stepper, warnings)
            tau = (n + 1) * dt
            rho, stage, hold_until = _apply_policy_batch(config, rho, stage, hold_until, tau)
            if (n + 1) % config.stride == 0:
                sample((n + 1) // config.stride)
    except TrajectoryAbort as exc:
        raise EnsembleError(tuple(int(indices[i]) for i in exc.indices)) from exc
    return out


def _run_chunk(config: ExperimentConfig, lo: int, hi: int) -> dict[str, np.ndarray]:
    """Contiguous index range, advanced in sub-batches of at most BATCH_LIMIT."""
    parts = []
    for start in range(lo, hi, BATCH_LIMIT):
        stop = min(start + BATCH_LIMIT, hi)
        parts.append(_run_batch(config, np.arange(start, stop)))
    return {f: np.concatenate([p[f] for p in parts], axis=0) for f in METRIC_FIELDS}


def run_trajectory(config: ExperimentConfig, index: int) -> TimeSeries:
    """One trajectory as a deterministic function of (config, index)."""
    if not 0 <= index < config.n_traj:
        raise ValueError(f"trajectory index {index} outside [0, {config.n_traj})")
    data = _run_batch(config, np.array([index]))
    return TimeSeries(config.tau_grid(), {f: data[f][0] for f in METRIC_FIELDS})


def run_ensemble_raw(config: ExperimentConfig, workers: int | None = None) -> dict[str, np.ndarray]:
    """Per-trajectory metric arrays of shape (n_traj, n_bins), in index order."""
    workers = workers or config.workers
    n = config.n_traj
    if workers <= 1 or n == 1:
        return _run_chunk(config, 0, n)
    bounds = np.linspace(0, n, min(workers, n) + 1).astype(int)
    failures: list[int] = []
    chunks: list[dict[str, np.ndarray] | None] = []
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_chunk, config, int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:])]
        for fut in futures:
            try:
                chunks.append(fut.result())
            except EnsembleError as exc:
                failures.extend(exc.indices)
                chunks.append(None)
    if failures:
        raise EnsembleError(tuple(sorted(failures)))
    return {f: np.concatenate([c[f] for c in chunks], axis=0) for f in METRIC_FIELDS}


def aggregate_arrays(taus: np.ndarray, data: dict[str, np.ndarray]) -> EnsembleStats:
    """Bin-wise moments over trajectories, folded in index order.

    Sample standard deviation (n-1 denominator); a single trajectory has
    std defined as 0.
    """
    n = next(iter(data.values())).shape[0]
    mean = {f: data[f].mean(axis=0) for f in data}
    if n > 1:
        std = {f: data[f].std(axis=0, ddof=1) for f in data}
    else:
        std = {f: np.zeros_like(mean[f]) for f in data}
    stderr = {f: std[f] / np.sqrt(n) for f in data}
    return EnsembleStats(taus=taus, count=n, mean=mean, std=std, stderr=stderr)


def run_ensemble(config: ExperimentConfig, workers: int | None = None) -> EnsembleStats:
    """Run the full ensemble and aggregate; independent of worker count."""
    data = run_ensemble_raw(config, workers)
    return aggregate_arrays(config.tau_grid(), data)


def aggregate(series: list[TimeSeries]) -> EnsembleStats:
    """Moments over a list of equally sampled trajectories, in list order."""
    if not series:
        raise ValueError("aggregate requires at least one TimeSeries")
    taus = series[0].taus
    for ts in series[1:]:
        if ts.taus.shape != taus.shape or not np.array_equal(ts.taus, taus):
            raise ValueError("all TimeSeries must share one tau grid")
    data = {f: np.stack([ts.metrics[f] for ts in series]) for f in METRIC_FIELDS}
    return aggregate_arrays(taus, data)


def welch_from_moments(mean1, var1, n1, mean2, var2, n2):
    """One-sided Welch test that population 1 exceeds population 2.

    Returns (t, p) elementwise; degenerate zero-variance pairs resolve to
    p = 0 or 1 by the sign of the mean difference.
    """
    mean1, var1 = np.asarray(mean1, dtype=float), np.asarray(var1, dtype=float)
    mean2, var2 = np.asarray(mean2, dtype=float), np.asarray(var2, dtype=float)
    se_sq = var1 / n1 + var2 / n2
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (mean1 - mean2) / np.sqrt(se_sq)
        df_num = se_sq**2
        df_den = (var1 / n1) ** 2 / (n1 - 1) + (var2 / n2) ** 2 / (n2 - 1)
        df = df_num / df_den
    p = np.where(
        se_sq > 0.0,
        _scipy_stats.t.sf(np.where(se_sq > 0.0, t, 0.0), np.where(se_sq > 0.0, df, 1.0)),
        np.where(mean1 > mean2, 0.0, 1.0),
    )
    return t, p


def welch_compare(stats1: EnsembleStats, stats2: EnsembleStats, metric: str = "r2sq"):
    """Per-bin one-sided Welch p-values that stats1's metric exceeds stats2's."""
    if stats1.taus.shape != stats2.taus.shape or not np.array_equal(stats1.taus, stats2.taus):
        raise ValueError("ensembles must share one tau grid")
    _, p = welch_from_moments(
        stats1.mean[metric],
        stats1.std[metric] ** 2,
        stats1.count,
        stats2.mean[metric],
        stats2.std[metric] ** 2,
        stats2.count,
    )
    return p
