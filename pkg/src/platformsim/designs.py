"""Recruitment schedules for multi-arm platform trials.

A design is a matrix of patient counts with one row per arm and one column
per recruitment period. Every sample-size quantity used downstream
(per-comparison sizes, concurrent control counts, control overlap between
two comparisons) is derived from this matrix.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction


class ControlMode(Enum):
    """How control patients are provided for treatment comparisons."""

    COMMON = "common"
    INDIVIDUAL = "individual"


def _is_contiguous(row):
    active = [t for t, count in enumerate(row) if count > 0]
    return not active or active[-1] - active[0] + 1 == len(active)


def _support(row):
    return tuple(t for t, count in enumerate(row) if count > 0)


@dataclass(frozen=True)
class PlatformDesign:
    """Recruitment matrix of a platform trial.

    With a common control, row 0 is the shared control arm and rows 1..m are
    the treatment arms. With individual controls, rows alternate
    (treatment_1, control_1, treatment_2, control_2, ...). Columns are
    recruitment periods; entry (row, t) is the number of patients that row's
    arm recruits during period t. Instances are immutable and safe to share
    across worker processes.
    """

    control_mode: ControlMode
    recruitment: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = self.recruitment
        if not rows:
            raise ValueError("design needs at least one arm row")
        width = len(rows[0])
        if width < 1:
            raise ValueError("design needs at least one recruitment period")
        for i, row in enumerate(rows):
            if len(row) != width:
                raise ValueError(f"row {i} has {len(row)} periods, expected {width}")
            for t, count in enumerate(row):
                if not isinstance(count, int) or isinstance(count, bool):
                    raise ValueError(f"entry ({i}, {t}) is not an integer count")
                if count < 0:
                    raise ValueError(f"entry ({i}, {t}) is negative")
            if sum(row) == 0:
                raise ValueError(f"arm row {i} recruits no patients")
            if not _is_contiguous(row):
                raise ValueError(f"arm row {i} opens and closes recruitment more than once")
        if self.control_mode is ControlMode.COMMON:
            if len(rows) < 2:
                raise ValueError("common-control design needs a control row and at least one treatment row")
        else:
            if len(rows) < 2 or len(rows) % 2 != 0:
                raise ValueError("individual-control design needs one control row per treatment row")
            for arm in range(len(rows) // 2):
                if _support(rows[2 * arm]) != _support(rows[2 * arm + 1]):
                    raise ValueError(
                        f"control row for arm {arm} is not active in exactly its treatment's periods"
                    )

    @property
    def num_arms(self) -> int:
        if self.control_mode is ControlMode.COMMON:
            return len(self.recruitment) - 1
        return len(self.recruitment) // 2

    @property
    def num_periods(self) -> int:
        return len(self.recruitment[0])

    def _check_arm(self, arm: int) -> None:
        if not 0 <= arm < self.num_arms:
            raise IndexError(f"arm index {arm} out of range for {self.num_arms} arms")

    def _treatment_row(self, arm: int) -> tuple[int, ...]:
        self._check_arm(arm)
        if self.control_mode is ControlMode.COMMON:
            return self.recruitment[arm + 1]
        return self.recruitment[2 * arm]

    def _control_row(self, arm: int) -> tuple[int, ...]:
        self._check_arm(arm)
        if self.control_mode is ControlMode.COMMON:
            return self.recruitment[0]
        return self.recruitment[2 * arm + 1]

    def treatment_counts(self, arm: int) -> tuple[int, ...]:
        """Per-period recruitment of treatment arm ``arm`` (0-based)."""
        return self._treatment_row(arm)

    def treatment_total(self, arm: int) -> int:
        return sum(self._treatment_row(arm))

    def active_periods(self, arm: int) -> tuple[int, ...]:
        """Periods in which treatment arm ``arm`` recruits."""
        return _support(self._treatment_row(arm))

    def concurrent_control_count(self, arm: int) -> int:
        """Control patients randomized while arm ``arm`` was recruiting.

        Only these controls enter the arm's treatment-control comparison.
        """
        control = self._control_row(arm)
        return sum(control[t] for t in self.active_periods(arm))

    def shared_control_count(self, arm_a: int, arm_b: int) -> int:
        """Control patients concurrent to both arms' recruitment windows."""
        if arm_a == arm_b:
            raise ValueError("shared control count needs two distinct arms")
        self._check_arm(arm_a)
        self._check_arm(arm_b)
        if self.control_mode is ControlMode.INDIVIDUAL:
            return 0
        control = self.recruitment[0]
        both = set(self.active_periods(arm_a)) & set(self.active_periods(arm_b))
        return sum(control[t] for t in both)

    def total_sample_size(self) -> int:
        """Total patients recruited across all arms and periods."""
        return sum(sum(row) for row in self.recruitment)

    def arm_totals(self) -> tuple[int, ...]:
        return tuple(sum(row) for row in self.recruitment)

    @property
    def arm_labels(self) -> tuple[str, ...]:
        if self.control_mode is ControlMode.COMMON:
            return ("control",) + tuple(f"treatment_{j + 1}" for j in range(self.num_arms))
        labels = []
        for j in range(self.num_arms):
            labels.append(f"treatment_{j + 1}")
            labels.append(f"control_{j + 1}")
        return tuple(labels)

    def to_dict(self) -> dict:
        return {
            "control_mode": self.control_mode.value,
            "arms": list(self.arm_labels),
            "matrix": [list(row) for row in self.recruitment],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, payload: dict) -> "PlatformDesign":
        try:
            mode = ControlMode(payload["control_mode"])
            matrix = tuple(tuple(int(x) for x in row) for row in payload["matrix"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed design payload: {exc}") from exc
        design = cls(mode, matrix)
        arms = payload.get("arms")
        if arms is not None and tuple(arms) != design.arm_labels:
            raise ValueError("arm labels do not match the design layout")
        return design

    @classmethod
    def from_json(cls, text: str) -> "PlatformDesign":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class BudgetAllocation:
    """A late-joining arm's allocation under a fixed sponsor budget.

    ``comparison_n`` is the per-side sample size of the late arm's
    treatment-control comparison; ``sponsor_period2_controls`` is the share
    of period-2 control recruitment the joining sponsor pays for.
    """

    shift: int
    budget: int
    design: PlatformDesign
    comparison_n: int
    sponsor_period2_controls: int

    @property
    def sponsor_funded_total(self) -> int:
        late_arm = self.design.num_arms - 1
        treatment = self.design.treatment_total(late_arm)
        control_row = self.design.recruitment[0]
        last_period = self.design.num_periods - 1
        return treatment + self.sponsor_period2_controls + control_row[last_period]


def _trim_empty_periods(matrix):
    width = len(matrix[0])
    keep = [t for t in range(width) if any(row[t] > 0 for row in matrix)]
    if not keep:
        raise ValueError("design recruits no patients at all")
    return tuple(tuple(row[t] for t in keep) for row in matrix)


def build_fixed_design(num_arms: int, n_per_arm: int, control_mode: ControlMode) -> PlatformDesign:
    """Single-period design with equal recruitment in every arm."""
    if num_arms < 1:
        raise ValueError("need at least one treatment arm")
    if n_per_arm < 1:
        raise ValueError("need at least one patient per arm")
    if control_mode is ControlMode.COMMON:
        num_rows = num_arms + 1
    else:
        num_rows = 2 * num_arms
    return PlatformDesign(control_mode, tuple((n_per_arm,) for _ in range(num_rows)))


def build_staggered_design(n_per_arm: int, shift: int) -> PlatformDesign:
    """Three-arm common-control design in which the third arm starts late.

    Arms 1 and 2 recruit in periods 1-2, the late arm in periods 2-3, and the
    control arm throughout. ``shift`` is the number of patients per early arm
    already recruited when the late arm opens; every treatment-control
    comparison ends up with ``n_per_arm`` patients per side. Periods of zero
    width (shift 0 or shift equal to ``n_per_arm``) are dropped.
    """
    if n_per_arm < 1:
        raise ValueError("need at least one patient per arm")
    if not 0 <= shift <= n_per_arm:
        raise ValueError("shift must lie between 0 and the per-arm sample size")
    mid = n_per_arm - shift
    early = (shift, mid, 0)
    late = (0, mid, shift)
    control = (shift, mid, shift)
    return PlatformDesign(ControlMode.COMMON, _trim_empty_periods((control, early, early, late)))


def build_budget_design(
    shift: int,
    budget: int,
    *,
    early_n: int = 150,
    control_share: Fraction = Fraction(1, 3),
) -> BudgetAllocation:
    """Allocate a joining sponsor's budget in an ongoing three-arm platform.

    The two early arms have ``early_n`` patients per comparison and have
    already recruited ``shift`` patients per arm when the late arm joins.
    During the joint period the sponsor pays for ``control_share`` of
    control recruitment; the rest of the budget is split equally between the
    late arm and the concurrent control extension so that the late
    comparison has equal patients per side. Arithmetic is exact (rational)
    with a single half-up rounding of the per-side comparison size.
    """
    if early_n < 1:
        raise ValueError("early arms need at least one patient")
    if not 0 <= shift <= early_n:
        raise ValueError("shift must lie between 0 and the early arms' sample size")
    if budget <= 0:
        raise ValueError("budget must be positive")
    share = Fraction(control_share)
    if not 0 <= share <= 1:
        raise ValueError("control share must lie in [0, 1]")
    joint = early_n - shift
    obligation = joint * share
    leftover = Fraction(budget) - joint - obligation
    if leftover < 0:
        raise ValueError(
            "budget does not cover the joining arm's joint-period patients and control share"
        )
    comparison_exact = joint + leftover / 2
    comparison_n = math.floor(comparison_exact + Fraction(1, 2))
    tail = comparison_n - joint
    period2_controls = budget - joint - 2 * tail
    if period2_controls < 0 or period2_controls > joint:
        raise ValueError("budget split infeasible after rounding")
    design = PlatformDesign(
        ControlMode.COMMON,
        _trim_empty_periods(
            (
                (shift, joint, tail),
                (shift, joint, 0),
                (shift, joint, 0),
                (0, joint, tail),
            )
        ),
    )
    return BudgetAllocation(
        shift=shift,
        budget=budget,
        design=design,
        comparison_n=comparison_n,
        sponsor_period2_controls=period2_controls,
    )
