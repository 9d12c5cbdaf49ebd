"""Monte Carlo engine for platform-trial replications.

Replications are generated in fixed-size blocks. Each block draws from its
own counter-derived random stream keyed by (scenario seed, block index), so
results are bitwise independent of how blocks are distributed over worker
processes and replications never share state.
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .adjust import AdjustmentPolicy, critical_value, decide_rejections
from .correlation import analytic_correlation
from .designs import ControlMode, PlatformDesign
from .distributions import Sidedness
from .metrics import OperatingCharacteristics, characteristics_from_counts

BLOCK_SIZE = 4096


class SimulationMode(Enum):
    """Patient-level outcome draws versus direct draws of arm-period means."""

    PATIENT_LEVEL = "patient"
    SUFFICIENT_STATISTIC = "sufficient"


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything one simulation run depends on."""

    design: PlatformDesign
    effects: tuple[float, ...]
    policy: AdjustmentPolicy
    reps: int = 50_000
    seed: int = 42
    mode: SimulationMode = SimulationMode.SUFFICIENT_STATISTIC
    kfwer_levels: tuple[int, ...] = (1, 2, 3)

    def __post_init__(self):
        object.__setattr__(self, "effects", tuple(float(e) for e in self.effects))
        if len(self.effects) != self.design.num_arms:
            raise ValueError(
                f"effects vector has length {len(self.effects)}, design has "
                f"{self.design.num_arms} arms"
            )
        if not all(np.isfinite(self.effects)):
            raise ValueError("effects must be finite")
        if self.reps < 1:
            raise ValueError("need at least one replication")
        levels = tuple(int(k) for k in self.kfwer_levels)
        object.__setattr__(self, "kfwer_levels", levels)
        if any(k < 1 or k > self.design.num_arms for k in levels):
            raise ValueError("k-FWER levels must lie in 1..m")


@dataclass(frozen=True)
class ReplicationResult:
    """One replication's comparison z-statistics and rejection decisions."""

    z: tuple[float, ...]
    rejections: tuple[bool, ...]

    def __post_init__(self):
        if len(self.z) != len(self.rejections):
            raise ValueError("z and rejection vectors must have equal length")


@dataclass(frozen=True)
class _SimPlan:
    """Precomputed cell layout turning arm-period means into z-statistics."""

    cells: tuple[tuple[int, int, int], ...]  # (row, period, count), row-major
    cell_means: np.ndarray  # expected mean outcome per cell
    cell_scales: np.ndarray  # standard error of each cell mean
    weights: np.ndarray  # (num_arms, num_cells), rows map cell means to z


def _build_plan(design: PlatformDesign, effects) -> _SimPlan:
    effects = tuple(float(e) for e in effects)
    m = design.num_arms
    if len(effects) != m:
        raise ValueError("effects vector must match the number of arms")
    common = design.control_mode is ControlMode.COMMON
    # map each matrix row to its expected outcome mean (controls stay at 0)
    means_by_row = [0.0] * len(design.recruitment)
    for arm in range(m):
        means_by_row[arm + 1 if common else 2 * arm] = effects[arm]
    cells = []
    for r, row in enumerate(design.recruitment):
        for t, count in enumerate(row):
            if count > 0:
                cells.append((r, t, count))
    index = {(r, t): i for i, (r, t, _) in enumerate(cells)}
    cell_means = np.array([means_by_row[r] for r, _, _ in cells])
    cell_scales = np.array([1.0 / np.sqrt(count) for _, _, count in cells])
    weights = np.zeros((m, len(cells)))
    for arm in range(m):
        n_treat = design.treatment_total(arm)
        n_control = design.concurrent_control_count(arm)
        if n_control == 0:
            raise ValueError(f"arm {arm} has no concurrent control patients")
        se = np.sqrt(1.0 / n_treat + 1.0 / n_control)
        t_row = arm + 1 if common else 2 * arm
        c_row = 0 if common else 2 * arm + 1
        for t in design.active_periods(arm):
            weights[arm, index[(t_row, t)]] = design.recruitment[t_row][t] / n_treat / se
            weights[arm, index[(c_row, t)]] -= design.recruitment[c_row][t] / n_control / se
    return _SimPlan(tuple(cells), cell_means, cell_scales, weights)


def _block_rng(seed: int, block_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, block_index))))


def _draw_cell_means(plan: _SimPlan, rng, count: int, mode: SimulationMode) -> np.ndarray:
    if mode is SimulationMode.SUFFICIENT_STATISTIC:
        noise = rng.standard_normal((count, len(plan.cells)))
        return plan.cell_means[None, :] + noise * plan.cell_scales[None, :]
    means = np.empty((count, len(plan.cells)))
    for i, (_, _, patients) in enumerate(plan.cells):
        draws = rng.standard_normal((count, patients))
        means[:, i] = draws.mean(axis=1) + plan.cell_means[i]
    return means


def _zstat_block(plan: _SimPlan, seed: int, block_index: int, count: int, mode: SimulationMode):
    rng = _block_rng(seed, block_index)
    means = _draw_cell_means(plan, rng, count, mode)
    z = means @ plan.weights.T
    if not np.all(np.isfinite(z)):
        raise RuntimeError(f"non-finite z-statistics in block {block_index}")
    return z


def _block_sizes(reps: int, block_size: int = BLOCK_SIZE):
    full, rest = divmod(reps, block_size)
    sizes = [block_size] * full
    if rest:
        sizes.append(rest)
    return sizes


def iter_zstat_blocks(
    design: PlatformDesign,
    effects,
    reps: int,
    seed: int,
    mode: SimulationMode = SimulationMode.SUFFICIENT_STATISTIC,
):
    """Yield blocks of simulated z-statistic vectors, shape (block, num_arms)."""
    plan = _build_plan(design, effects)
    for block_index, count in enumerate(_block_sizes(reps)):
        yield _zstat_block(plan, seed, block_index, count, mode)


def simulate_zstats(
    design: PlatformDesign,
    effects,
    stream: np.random.Generator,
    mode: SimulationMode = SimulationMode.SUFFICIENT_STATISTIC,
) -> np.ndarray:
    """One replication's z-statistics drawn from the given random stream.

    Patient-level mode draws every individual outcome; sufficient-statistic
    mode draws each arm-period mean from its exact normal law. The two modes
    are distributionally identical.
    """
    plan = _build_plan(design, effects)
    means = _draw_cell_means(plan, stream, 1, mode)
    return (means @ plan.weights.T)[0]


def _scenario_block_counts(args):
    (plan, threshold, sidedness, effective, levels, seed, block_index, count, mode) = args
    z = _zstat_block(plan, seed, block_index, count, mode)
    score = np.abs(z) if sidedness is Sidedness.TWO_SIDED else z
    rejected = score > threshold
    eff = np.asarray(effective)
    false_rej = rejected[:, ~eff].sum(axis=1)
    true_rej = rejected[:, eff].sum(axis=1)
    n_effective = int(eff.sum())
    return {
        "kfwer": {k: int(np.sum(false_rej >= k)) for k in levels},
        "false_sum": int(false_rej.sum()),
        "false_sq_sum": int(np.sum(false_rej * false_rej)),
        "per_arm": rejected.sum(axis=0).astype(int),
        "disjunctive": int(np.sum(true_rej >= 1)) if n_effective else 0,
        "conjunctive": int(np.sum(true_rej == n_effective)) if n_effective else 0,
    }


def run_scenario(config: ScenarioConfig, workers: int = 1) -> OperatingCharacteristics:
    """Run all replications of a scenario and aggregate the tallies.

    The report is bitwise deterministic given (config, seed) and does not
    depend on ``workers``: blocks own disjoint random streams and all
    aggregation happens on integer counts merged in block order.
    """
    correlation = analytic_correlation(config.design)
    threshold = critical_value(config.policy, correlation)
    effective = tuple(e != 0.0 for e in config.effects)
    levels = tuple(sorted(set(config.kfwer_levels) | {1}))
    plan = _build_plan(config.design, config.effects)
    jobs = [
        (plan, threshold, config.policy.sidedness, effective, levels, config.seed, b, count, config.mode)
        for b, count in enumerate(_block_sizes(config.reps))
    ]
    if workers > 1 and len(jobs) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(_scenario_block_counts, jobs, chunksize=1))
    else:
        partials = [_scenario_block_counts(job) for job in jobs]
    kfwer_counts = {k: sum(p["kfwer"][k] for p in partials) for k in levels}
    per_arm = np.sum([p["per_arm"] for p in partials], axis=0)
    return characteristics_from_counts(
        reps=config.reps,
        num_comparisons=config.design.num_arms,
        effective=effective,
        kfwer_counts=kfwer_counts,
        false_rejection_sum=sum(p["false_sum"] for p in partials),
        false_rejection_sq_sum=sum(p["false_sq_sum"] for p in partials),
        disjunctive_count=sum(p["disjunctive"] for p in partials),
        conjunctive_count=sum(p["conjunctive"] for p in partials),
        per_arm_rejections=per_arm,
    )


def sample_replications(config: ScenarioConfig, count: int) -> list[ReplicationResult]:
    """Materialize the first ``count`` replications for inspection."""
    correlation = analytic_correlation(config.design)
    out = []
    for block in iter_zstat_blocks(
        config.design, config.effects, min(count, config.reps), config.seed, config.mode
    ):
        for row in block:
            decisions = decide_rejections(row, config.policy, correlation)
            out.append(ReplicationResult(tuple(float(x) for x in row), tuple(bool(b) for b in decisions)))
            if len(out) == count:
                return out
    return out
