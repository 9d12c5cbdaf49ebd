import math
import statistics

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from platformsim.metrics import (
    Estimate,
    RejectionTally,
    aggregate_characteristics,
    characteristics_from_counts,
    tally_outcomes,
)


class TestTallyOutcomes:
    def test_all_null(self):
        tally = tally_outcomes([True, False, True], [False, False, False])
        assert tally.false_rejections == 2
        assert tally.true_rejections == 0
        assert tally.total_rejections == 2

    def test_mixed_truth(self):
        tally = tally_outcomes([True, True, False], [True, False, False])
        assert tally.false_rejections == 1
        assert tally.true_rejections == 1

    def test_nothing_rejected(self):
        tally = tally_outcomes([False, False, False], [True, False, True])
        assert tally.false_rejections == 0
        assert tally.true_rejections == 0
        assert tally.total_rejections == 0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            tally_outcomes([True, False], [False])

    def test_tally_validation(self):
        with pytest.raises(ValueError):
            RejectionTally(
                false_rejections=3, true_rejections=0, true_null_count=2, num_comparisons=3
            )

    @given(
        st.lists(st.booleans(), min_size=1, max_size=8),
        st.data(),
    )
    @settings(max_examples=80)
    def test_counts_are_consistent(self, rejections, data):
        effective = data.draw(
            st.lists(st.booleans(), min_size=len(rejections), max_size=len(rejections))
        )
        tally = tally_outcomes(rejections, effective)
        assert tally.total_rejections == sum(rejections)
        assert tally.false_rejections <= tally.true_null_count
        assert tally.true_rejections <= tally.num_comparisons - tally.true_null_count


def _tallies_from_matrix(rejected, effective):
    return [tally_outcomes(row, effective) for row in rejected]


class TestAggregation:
    def test_reference_aggregate(self):
        effective = [False, True, False]
        rejected = np.array(
            [
                [True, True, False],
                [False, False, False],
                [True, False, True],
                [False, True, False],
            ]
        )
        tallies = _tallies_from_matrix(rejected, effective)
        oc = aggregate_characteristics(
            tallies,
            kfwer_levels=(1, 2),
            effective=effective,
            per_arm_rejections=rejected.sum(axis=0),
        )
        assert oc.fwer.value == 0.5
        assert oc.kfwer[2].value == 0.25
        assert oc.pfer.value == 0.75
        assert oc.marginal_power[1].value == 0.5
        assert oc.marginal_power[0] is None
        assert oc.disjunctive_power.value == 0.5
        assert oc.conjunctive_power.value == 0.5

    def test_pfer_se_matches_stdlib(self):
        effective = [False, False]
        rejected = np.array(
            [[True, False], [True, True], [False, False], [False, True], [True, True]]
        )
        tallies = _tallies_from_matrix(rejected, effective)
        oc = aggregate_characteristics(tallies)
        false_counts = rejected.sum(axis=1)
        expected_se = statistics.stdev(false_counts.tolist()) / math.sqrt(len(false_counts))
        assert oc.pfer.se == pytest.approx(expected_se, abs=1e-12)

    def test_proportion_se(self):
        oc = aggregate_characteristics(
            _tallies_from_matrix(np.array([[True], [False], [False], [False]]), [False])
        )
        assert oc.fwer.se == pytest.approx(math.sqrt(0.25 * 0.75 / 4), abs=1e-12)

    def test_degenerate_all_zero(self):
        tallies = [
            tally_outcomes([False, False, False], [False, False, False]) for _ in range(100)
        ]
        oc = aggregate_characteristics(tallies)
        assert oc.fwer == Estimate(0.0, 0.0)
        assert oc.pfer == Estimate(0.0, 0.0)

    def test_global_null_reports_no_power(self):
        tallies = [tally_outcomes([True, False], [False, False]) for _ in range(10)]
        oc = aggregate_characteristics(tallies)
        assert oc.marginal_power is None
        assert oc.disjunctive_power is None
        assert oc.conjunctive_power is None

    def test_without_per_arm_counts_marginal_power_is_unavailable(self):
        tallies = [tally_outcomes([True, True], [False, True]) for _ in range(10)]
        oc = aggregate_characteristics(tallies)
        assert oc.marginal_power is None
        assert oc.disjunctive_power.value == 1.0

    def test_kfwer_always_includes_level_one(self):
        tallies = [tally_outcomes([True], [False]) for _ in range(4)]
        oc = aggregate_characteristics(tallies, kfwer_levels=())
        assert 1 in oc.kfwer

    def test_mixed_families_rejected(self):
        a = tally_outcomes([True, False], [False, False])
        b = tally_outcomes([True, False, False], [False, False, False])
        with pytest.raises(ValueError):
            aggregate_characteristics([a, b])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            aggregate_characteristics([])

    @given(st.data())
    @settings(max_examples=60)
    def test_invariants_on_random_batches(self, data):
        m = data.draw(st.integers(2, 5))
        reps = data.draw(st.integers(2, 40))
        effective = data.draw(st.lists(st.booleans(), min_size=m, max_size=m))
        rejected = np.array(
            data.draw(
                st.lists(
                    st.lists(st.booleans(), min_size=m, max_size=m),
                    min_size=reps,
                    max_size=reps,
                )
            )
        )
        tallies = _tallies_from_matrix(rejected, effective)
        levels = tuple(range(1, m + 1))
        oc = aggregate_characteristics(
            tallies,
            kfwer_levels=levels,
            effective=effective,
            per_arm_rejections=rejected.sum(axis=0),
        )
        # k-FWER non-increasing in k, FWER is its first entry
        values = [oc.kfwer[k].value for k in levels]
        assert all(a >= b for a, b in zip(values, values[1:]))
        assert oc.fwer.value == oc.kfwer[1].value
        # PFER equals the sum of tail probabilities over k = 1..m
        assert oc.pfer.value == pytest.approx(sum(values), abs=1e-12)
        # PFER additivity: sum of per-arm rejection rates over true nulls
        null_rates = [
            rejected[:, j].mean() for j in range(m) if not effective[j]
        ]
        assert oc.pfer.value == pytest.approx(sum(null_rates), abs=1e-12)
        if any(effective):
            marginals = [e.value for e in oc.marginal_power if e is not None]
            for value in marginals:
                assert oc.conjunctive_power.value <= value + 1e-12
                assert value <= oc.disjunctive_power.value + 1e-12


class TestPartialAggregation:
    def test_counts_merge_associatively(self):
        effective = [False, True]
        rejected = np.array(
            [[True, False], [True, True], [False, True], [False, False], [True, True]]
        )
        tallies = _tallies_from_matrix(rejected, effective)
        whole = aggregate_characteristics(
            tallies,
            kfwer_levels=(1,),
            effective=effective,
            per_arm_rejections=rejected.sum(axis=0),
        )
        # merge two worker partials by adding counts, then rebuild
        first, second = rejected[:3], rejected[3:]
        def counts(part):
            false_counts = part[:, 0].astype(int)
            true_counts = part[:, 1].astype(int)
            return {
                "k1": int((false_counts >= 1).sum()),
                "fsum": int(false_counts.sum()),
                "fsq": int((false_counts**2).sum()),
                "disj": int((true_counts >= 1).sum()),
                "conj": int((true_counts >= 1).sum()),
                "arm": part.sum(axis=0).astype(int),
            }
        a, b = counts(first), counts(second)
        merged = characteristics_from_counts(
            reps=len(rejected),
            num_comparisons=2,
            effective=effective,
            kfwer_counts={1: a["k1"] + b["k1"]},
            false_rejection_sum=a["fsum"] + b["fsum"],
            false_rejection_sq_sum=a["fsq"] + b["fsq"],
            disjunctive_count=a["disj"] + b["disj"],
            conjunctive_count=a["conj"] + b["conj"],
            per_arm_rejections=a["arm"] + b["arm"],
        )
        assert merged == whole
