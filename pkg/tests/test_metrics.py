from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from rulevote.experiment import ExperimentConfig, repeat_experiment, run_single
from rulevote.metrics import evaluate, format_table, pct, summarize, to_csv
from rulevote.voting import EXPLAINABLE, NOT_EXPLAINABLE, PARTIALLY_EXPLAINABLE, VotingResult

from conftest import require_data

F = Fraction


def confusion(tp, fp, fn, tn):
    truth = ["p"] * (tp + fn) + ["n"] * (fp + tn)
    pred = ["p"] * tp + ["n"] * fn + ["p"] * fp + ["n"] * tn
    return pred, truth


class TestEvaluate:
    def test_confusion_example(self):
        pred, truth = confusion(3, 1, 2, 4)
        rep = evaluate(pred, truth, ["n", "p"])
        assert rep.per_class["p"][:2] == (F(3, 4), F(3, 5))
        assert rep.accuracy == F(7, 10)
        assert rep.per_class["n"][:2] == (F(4, 6), F(4, 5))
        assert rep.macro_precision == (F(3, 4) + F(2, 3)) / 2
        assert rep.macro_recall == (F(3, 5) + F(4, 5)) / 2

    def test_abstentions(self):
        rep = evaluate(["a", None, "b", None], ["a", "a", "b", "b"])
        assert rep.accuracy == F(1, 2) and rep.abstention_rate == F(1, 2)
        rep = evaluate(["a", None, "b", None], ["a", "a", "b", "b"], abstentions_as_errors=False)
        assert rep.accuracy == 1

    def test_never_predicted_class_flagged(self):
        rep = evaluate(["a", "a"], ["a", "b"], ["a", "b"])
        assert rep.no_prediction_classes == ("b",)
        assert rep.per_class["b"][0] == 0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            evaluate(["a"], ["a", "b"])

    def test_empty(self):
        rep = evaluate([], [], ["a"])
        assert rep.accuracy == 0 and rep.n == 0

    def test_step_distribution(self):
        results = [VotingResult("a", 1, EXPLAINABLE), VotingResult("a", 2, EXPLAINABLE),
                   VotingResult("b", 3, PARTIALLY_EXPLAINABLE), VotingResult(None, 4, NOT_EXPLAINABLE)]
        rep = evaluate(results, ["a", "b", "b", "a"])
        assert rep.accuracy == F(1, 2)
        assert rep.step_distribution == {1: F(1, 4), 2: F(1, 4), 3: F(1, 4), 4: F(1, 4)}
        assert rep.explainability_distribution == {EXPLAINABLE: F(1, 2),
                                                   PARTIALLY_EXPLAINABLE: F(1, 4),
                                                   NOT_EXPLAINABLE: F(1, 4)}
        assert sum(rep.explainability_distribution.values()) == 1

    def test_plain_labels_have_no_distribution(self):
        assert evaluate(["a"], ["a"]).explainability_distribution == {}


def naive(pred, truth, classes):
    """Counting oracle: confusion counts per class, then the textbook ratios."""
    acc = F(sum(p == t for p, t in zip(pred, truth)), len(truth))
    ps, rs = [], []
    for c in classes:
        tp = fp = fn = 0
        for p, t in zip(pred, truth):
            tp += p == c and t == c
            fp += p == c and t != c
            fn += p != c and t == c
        ps.append(F(tp, tp + fp) if tp + fp else F(0))
        rs.append(F(tp, tp + fn) if tp + fn else F(0))
    return acc, sum(ps) / len(classes), sum(rs) / len(classes)


labelled = st.integers(1, 60).flatmap(lambda n: st.tuples(
    st.lists(st.sampled_from("abc"), min_size=n, max_size=n),
    st.lists(st.sampled_from("abc"), min_size=n, max_size=n)))


class TestProperties:
    @settings(max_examples=300, deadline=None)
    @given(labelled)
    def test_matches_counting_oracle(self, pt):
        pred, truth = pt
        rep = evaluate(pred, truth, list("abc"))
        assert (rep.accuracy, rep.macro_precision, rep.macro_recall) == naive(pred, truth, "abc")

    @settings(max_examples=200, deadline=None)
    @given(labelled, st.permutations("xyz"))
    def test_renaming_invariance(self, pt, names):
        pred, truth = pt
        ren = dict(zip("abc", names))
        a = evaluate(pred, truth, list("abc"))
        b = evaluate([ren[p] for p in pred], [ren[t] for t in truth], [ren[c] for c in "abc"])
        assert (a.accuracy, a.macro_precision, a.macro_recall) == \
            (b.accuracy, b.macro_precision, b.macro_recall)


class TestAggregation:
    def test_summarize_uses_sample_stdev(self):
        s = summarize([F(1, 2), F(3, 4), 1])
        assert s.mean == pytest.approx(0.75)
        assert s.std == pytest.approx(0.25)
        assert summarize([0.3]).std == 0.0

    def test_pct(self):
        assert pct(F(8227, 10000)) == "82.27"
        assert pct(F(1, 3)) == "33.33"

    def test_table_and_csv(self):
        text = format_table("T", ["data", "acc"], [["heart", "73.28"]])
        lines = text.splitlines()
        assert lines[0] == "T" and lines[1].split() == ["data", "acc"]
        assert set(lines[2].replace(" ", "")) == {"-"}
        assert to_csv(["a", "b"], [[1, 2]]) == "a,b\n1,2\n"


class TestRepeat:
    def test_single_repetition_equals_single_run(self):
        cfg = ExperimentConfig.for_suite("heart", require_data("heart.csv"))
        rep = repeat_experiment(cfg, 1, base_seed=3)
        single = run_single(cfg, 3)
        assert len(rep.runs) == 1 and rep.runs[0].seed == 3
        assert rep.runs[0].reports == single.reports
        assert rep.metric("voting").std == 0.0
        assert rep.accuracy("voting") == float(single.reports["voting"].accuracy)
        assert repeat_experiment(cfg, 1, base_seed=3).tables() == rep.tables()
