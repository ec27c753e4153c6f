"""Metrics, stratified split plans, and bootstrap report round-trips."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from speechscreen.manifest import Diagnosis
from speechscreen.evaluation import (
    BootstrapReport,
    ClassTooSmall,
    EvaluationError,
    LengthMismatch,
    RepetitionFailed,
    bootstrap_evaluate,
    confusion_matrix,
    macro_f1,
    make_splits,
    parse_report,
    rmse,
    serialize_report,
)

HC, MCI, DEM = Diagnosis.HC, Diagnosis.MCI, Diagnosis.Dementia


class TestMacroF1:
    def test_perfect(self):
        assert macro_f1([HC, MCI, DEM], [HC, MCI, DEM]) == 1.0

    def test_all_predicted_hc_two_classes(self):
        # HC: tp=1 fp=1 fn=0 -> f1 2/3; MCI: tp=0 -> 0; macro 1/3
        assert macro_f1([HC, MCI], [HC, HC]) == pytest.approx(1 / 3)

    def test_single_class_truth(self):
        # only classes present in the truth enter the mean
        assert macro_f1([HC, HC], [HC, HC]) == 1.0

    def test_absent_class_prediction_still_counts_as_fp(self):
        # truth has no Dementia; predicting it costs HC recall only
        score = macro_f1([HC, HC, MCI], [HC, DEM, MCI])
        f1_hc = 2 * 1 / (2 * 1 + 0 + 1)
        assert score == pytest.approx((f1_hc + 1.0) / 2)

    def test_present_but_never_predicted_contributes_zero(self):
        score = macro_f1([HC, MCI], [MCI, HC])
        assert score == 0.0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            macro_f1([HC], [HC, MCI])
        with pytest.raises(LengthMismatch):
            macro_f1([], [])

    @given(
        st.lists(st.sampled_from(list(Diagnosis)), min_size=1, max_size=30),
        st.permutations(list(Diagnosis)),
    )
    def test_relabeling_invariance(self, labels, perm):
        rng = np.random.default_rng(len(labels))
        preds = list(rng.choice(list(Diagnosis), size=len(labels)))
        mapping = dict(zip(list(Diagnosis), perm))
        a = macro_f1(labels, preds)
        b = macro_f1([mapping[l] for l in labels], [mapping[p] for p in preds])
        assert a == pytest.approx(b)

    def test_bounded(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            n = int(rng.integers(1, 20))
            t = list(rng.choice(list(Diagnosis), n))
            p = list(rng.choice(list(Diagnosis), n))
            assert 0.0 <= macro_f1(t, p) <= 1.0


class TestRmse:
    def test_zero_on_identical(self):
        assert rmse([1.0, 2.0], [1.0, 2.0]) == 0.0

    def test_three_four_example(self):
        assert rmse([0.0, 0.0], [3.0, 4.0]) == pytest.approx(np.sqrt(12.5))

    def test_single_pair(self):
        assert rmse([28.0], [25.0]) == 3.0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            rmse([1.0], [])


class TestConfusion:
    def test_identity(self):
        m = confusion_matrix([HC, MCI, DEM], [HC, MCI, DEM])
        np.testing.assert_array_equal(m, np.eye(3, dtype=np.int64))

    def test_all_hc_column(self):
        m = confusion_matrix([HC, MCI, DEM], [HC, HC, HC])
        np.testing.assert_array_equal(m, [[1, 0, 0], [1, 0, 0], [1, 0, 0]])

    def test_rows_are_truth(self):
        m = confusion_matrix([DEM], [HC])
        assert m[2, 0] == 1
        assert m.sum() == 1

    def test_matches_brute_force_tally(self):
        rng = np.random.default_rng(3)
        t = list(rng.choice(list(Diagnosis), 40))
        p = list(rng.choice(list(Diagnosis), 40))
        m = confusion_matrix(t, p)
        for i in range(3):
            for j in range(3):
                assert m[i, j] == sum(
                    1 for a, b in zip(t, p) if int(a) == i and int(b) == j
                )
        assert m.sum() == 40


def ids(prefix, n):
    return [(f"{prefix}{i:02d}", {"h": HC, "m": MCI, "d": DEM}[prefix]) for i in range(n)]


class TestSplits:
    def test_eight_subjects_three_one(self):
        labeled = ids("h", 4) + ids("m", 4)
        plan = make_splits(labeled, seed=1, repetitions=10, train_fraction=0.75)
        for train, val in plan.splits:
            assert len(train) == 6 and len(val) == 2
            assert sum(s.startswith("h") for s in train) == 3
            assert sum(s.startswith("m") for s in train) == 3

    def test_floor_arithmetic_uneven(self):
        labeled = ids("h", 7) + ids("m", 5) + ids("d", 2)
        plan = make_splits(labeled, seed=0, repetitions=5, train_fraction=0.75)
        for train, val in plan.splits:
            # floor(5.25)=5, floor(3.75)=3, floor(1.5)=1
            assert sum(s.startswith("h") for s in train) == 5
            assert sum(s.startswith("m") for s in train) == 3
            assert sum(s.startswith("d") for s in train) == 1

    def test_deterministic(self):
        labeled = ids("h", 5) + ids("m", 5) + ids("d", 5)
        a = make_splits(labeled, seed=7, repetitions=8)
        b = make_splits(labeled, seed=7, repetitions=8)
        assert a == b

    def test_seed_changes_splits(self):
        labeled = ids("h", 6) + ids("m", 6) + ids("d", 6)
        a = make_splits(labeled, seed=1, repetitions=4)
        b = make_splits(labeled, seed=2, repetitions=4)
        assert a.splits != b.splits

    def test_input_order_irrelevant(self):
        labeled = ids("h", 5) + ids("m", 4) + ids("d", 3)
        a = make_splits(labeled, seed=3, repetitions=4)
        b = make_splits(list(reversed(labeled)), seed=3, repetitions=4)
        assert a == b

    def test_class_too_small(self):
        with pytest.raises(ClassTooSmall) as exc:
            make_splits(ids("h", 4) + ids("d", 1), seed=0)
        assert exc.value.diagnosis is DEM
        assert exc.value.count == 1

    def test_absent_class_allowed(self):
        plan = make_splits(ids("h", 4) + ids("m", 4), seed=0, repetitions=2)
        assert plan.repetitions == 2

    def test_bad_fraction(self):
        with pytest.raises(EvaluationError):
            make_splits(ids("h", 4) + ids("m", 4), seed=0, train_fraction=1.0)
        with pytest.raises(EvaluationError):
            make_splits(ids("h", 4) + ids("m", 4), seed=0, train_fraction=0.0)

    def test_no_subjects(self):
        with pytest.raises(EvaluationError):
            make_splits([], seed=0)

    @given(
        nh=st.integers(2, 12),
        nm=st.integers(2, 12),
        nd=st.integers(0, 12),
        seed=st.integers(0, 1000),
        frac=st.floats(0.1, 0.9),
    )
    def test_partition_properties(self, nh, nm, nd, seed, frac):
        if nd == 1:
            nd = 2
        labeled = ids("h", nh) + ids("m", nm) + ids("d", nd)
        plan = make_splits(labeled, seed=seed, repetitions=3, train_fraction=frac)
        all_ids = {s for s, _ in labeled}
        for train, val in plan.splits:
            assert set(train) | set(val) == all_ids
            assert set(train) & set(val) == set()
            assert list(train) == sorted(train)
            assert list(val) == sorted(val)
            # every present class appears on both sides
            for prefix, n in (("h", nh), ("m", nm), ("d", nd)):
                if n:
                    k = sum(s.startswith(prefix) for s in train)
                    assert k == max(1, int(np.floor(frac * n)))
                    assert 1 <= k < n


class TestReport:
    def test_mean_and_population_std(self):
        r = BootstrapReport(metric_kind="macro_f1", values=(0.5, 1.0))
        assert r.mean == 0.75
        assert r.std == 0.25

    def test_constant_values(self):
        r = BootstrapReport(metric_kind="rmse", values=(2.0,) * 5)
        assert r.mean == 2.0
        assert r.std == 0.0

    def test_rejects_empty_and_non_finite(self):
        with pytest.raises(EvaluationError):
            BootstrapReport(metric_kind="rmse", values=())
        with pytest.raises(EvaluationError):
            BootstrapReport(metric_kind="rmse", values=(1.0, float("nan")))

    def test_serialize_parse_round_trip(self):
        r = BootstrapReport(
            metric_kind="macro_f1",
            values=(0.1234567890123, 1 / 3, 1.0),
            config_digest="deadbeef",
        )
        again = parse_report(serialize_report(r))
        assert again == r

    def test_serialized_form(self):
        text = serialize_report(BootstrapReport(metric_kind="rmse", values=(1.5,)))
        lines = text.splitlines()
        assert lines[0] == "# bootstrap-report v1"
        assert "metric=rmse" in lines
        assert "repetitions=1" in lines
        assert "0,1.5" in lines
        assert lines[-1] == "std=0.0"

    def test_serialize_deterministic(self):
        r = BootstrapReport(metric_kind="rmse", values=(0.1, 0.2, 0.3))
        assert serialize_report(r) == serialize_report(r)

    def test_parse_needs_metric(self):
        with pytest.raises(EvaluationError):
            parse_report("rep,value\n0,1.0\n")


class TestBootstrapEvaluate:
    def plan(self):
        return make_splits(ids("h", 4) + ids("m", 4), seed=5, repetitions=6)

    def truth(self):
        return {s: d for s, d in ids("h", 4) + ids("m", 4)}

    def test_oracle_scores_one(self):
        truth = self.truth()
        report = bootstrap_evaluate(
            lambda i, tr, va: {s: truth[s] for s in va},
            self.plan(),
            truth,
            "macro_f1",
        )
        assert report.mean == 1.0
        assert report.std == 0.0
        assert len(report.values) == 6

    def test_constant_regressor(self):
        truth = {s: 20.0 for s, _ in ids("h", 4) + ids("m", 4)}
        report = bootstrap_evaluate(
            lambda i, tr, va: {s: 23.0 for s in va}, self.plan(), truth, "rmse"
        )
        assert report.values == (3.0,) * 6

    def test_runs_see_identical_splits(self):
        seen_a, seen_b = [], []
        truth = self.truth()

        def runner(log):
            def run(i, tr, va):
                log.append((i, tr, va))
                return {s: truth[s] for s in va}

            return run

        bootstrap_evaluate(runner(seen_a), self.plan(), truth, "macro_f1")
        bootstrap_evaluate(runner(seen_b), self.plan(), truth, "macro_f1")
        assert seen_a == seen_b

    def test_reports_byte_identical_across_runs(self):
        truth = self.truth()
        runs = [
            serialize_report(
                bootstrap_evaluate(
                    lambda i, tr, va: {s: truth[s] if s[1] == "0" else MCI for s in va},
                    self.plan(),
                    truth,
                    "macro_f1",
                    config_digest="d1",
                )
            )
            for _ in range(2)
        ]
        assert runs[0] == runs[1]

    def test_partial_coverage_scores_covered_only(self):
        truth = {s: 10.0 for s, _ in ids("h", 4) + ids("m", 4)}
        report = bootstrap_evaluate(
            lambda i, tr, va: {va[0]: 10.0}, self.plan(), truth, "rmse"
        )
        assert report.values == (0.0,) * 6

    def test_empty_coverage_fails_repetition(self):
        with pytest.raises(RepetitionFailed) as exc:
            bootstrap_evaluate(
                lambda i, tr, va: {}, self.plan(), self.truth(), "macro_f1"
            )
        assert exc.value.rep_index == 0

    def test_exception_wrapped_with_rep_index(self):
        def run(i, tr, va):
            if i == 3:
                raise RuntimeError("boom")
            return {s: self.truth()[s] for s in va}

        with pytest.raises(RepetitionFailed) as exc:
            bootstrap_evaluate(run, self.plan(), self.truth(), "macro_f1")
        assert exc.value.rep_index == 3
        assert "boom" in str(exc.value)

    def test_unknown_metric(self):
        with pytest.raises(EvaluationError):
            bootstrap_evaluate(lambda i, tr, va: {}, self.plan(), self.truth(), "mae")
