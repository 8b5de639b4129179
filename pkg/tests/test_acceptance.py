"""One test per acceptance criterion; each prints a single PASS/FAIL line."""

import time
from contextlib import contextmanager
from fractions import Fraction

import pytest
from hypothesis import given, settings

from rulevote.experiment import ExperimentConfig, repeat_experiment
from rulevote.rules import match_fraction
from rulevote.voting import VotingConfig, vote

import test_foil
import test_ripper
from conftest import require_data
from test_ruleio import models, round_trips
from test_rules import ZERO_RULE, pixel_schema, zero_image
from test_voting import check_against_reference, output

F = Fraction
SMALL_SUITES = ("diabetes", "heart", "spambase")
TARGETS = {"diabetes": ("ripper", 82.27, 5.0), "heart": ("foil", 73.28, 6.0),
           "spambase": ("ripper", 90.56, 3.0)}


@contextmanager
def criterion(capsys, number, title):
    note = {"detail": ""}
    line = f"FAIL criterion {number} ({title})"
    try:
        yield note
        line = f"PASS criterion {number} ({title}): {note['detail']}"
    except BaseException as exc:
        line = f"FAIL criterion {number} ({title}): {note['detail'] or exc}"
        raise
    finally:
        with capsys.disabled():
            print(f"\n{line}")


class _Reports:
    def __init__(self):
        self.cache = {}
        self.seconds = {}

    def get(self, suite):
        if suite not in self.cache:
            path = require_data(f"{suite}.csv")
            reps = 1 if suite == "mnist" else 10
            cfg = ExperimentConfig.for_suite(suite, path, ambiguity=suite == "mnist")
            t0 = time.perf_counter()
            self.cache[suite] = repeat_experiment(cfg, reps)
            self.seconds[suite] = time.perf_counter() - t0
        return self.cache[suite]


@pytest.fixture(scope="session")
def reports():
    return _Reports()


def test_criterion_1_worked_fraction(capsys):
    with criterion(capsys, 1, "8-literal rule, 6 satisfied") as note:
        schema = pixel_schema()
        image = zero_image()
        got = match_fraction(ZERO_RULE, image, schema)
        t0 = time.perf_counter()
        for _ in range(100):
            match_fraction(ZERO_RULE, image, schema)
        per_call = (time.perf_counter() - t0) / 100
        note["detail"] = f"fraction {got}, {per_call * 1e3:.3f} ms per call"
        assert got == F(3, 4)
        assert per_call < 1e-3


def test_criterion_2_voting_reference(capsys):
    with criterion(capsys, 2, "vote vs brute-force reference") as note:
        binary = vote([output({"0": F(4, 5), "1": F(3, 4)})] * 2, "1", VotingConfig())
        digits = {str(d): F(0) for d in range(10)}
        digits.update({"5": F(4, 5), "6": F(3, 4)})
        multi = vote([output(digits)] * 2, "6", VotingConfig(F(7, 10), F(1, 10)))
        t0 = time.perf_counter()
        seen = check_against_reference(100_000)
        seconds = time.perf_counter() - t0
        note["detail"] = (f"100000 cases agree, steps {sorted(seen)}, {seconds:.1f} s; "
                          f"binary 0.80/0.75 -> step {binary.step}, "
                          f"multiclass 0.80/0.75 -> {multi.label} step {multi.step}")
        assert binary.step == 4 and binary.label is None
        assert (multi.label, multi.step, multi.justification.fraction) == ("6", 3, F(3, 4))
        assert seen == {1, 2, 3, 4}
        assert seconds < 10


def test_criterion_3_small_benchmarks(capsys, reports):
    with criterion(capsys, 3, "small-benchmark accuracy") as note:
        parts, ok = [], True
        for suite in SMALL_SUITES:
            method, target, tol = TARGETS[suite]
            mean = 100 * reports.get(suite).accuracy(method)
            ok &= abs(mean - target) <= tol
            parts.append(f"{suite} {method} {mean:.2f} (target {target} +-{tol})")
        seconds = sum(reports.seconds[s] for s in SMALL_SUITES)
        note["detail"] = "; ".join(parts) + f"; {seconds:.0f} s"
        assert ok
        assert seconds < 600


def test_criterion_4_ensemble_dominance(capsys, reports):
    with criterion(capsys, 4, "voting >= best rule learner - 1 pt") as note:
        parts, ok = [], True
        for suite in SMALL_SUITES:
            rep = reports.get(suite)
            voting = 100 * rep.accuracy("voting")
            best = 100 * max(rep.accuracy("foil"), rep.accuracy("ripper"))
            ok &= voting >= best - 1
            parts.append(f"{suite} {voting:.2f} vs {best:.2f}")
        note["detail"] = "; ".join(parts)
        assert ok


def test_criterion_5_oracle_ceiling(capsys, reports):
    with criterion(capsys, 5, "voting+truth >= voting per seed") as note:
        n_runs, bad = 0, []
        for suite in SMALL_SUITES + ("mnist",):
            for run in reports.get(suite).runs:
                n_runs += 1
                if run.reports["voting_truth"].accuracy < run.reports["voting"].accuracy:
                    bad.append(f"{suite} seed {run.seed} ceiling")
                if not run.oracle_step23_correct:
                    bad.append(f"{suite} seed {run.seed} step 2/3")
        note["detail"] = f"{n_runs} runs checked" + (f", violations: {bad}" if bad else "")
        assert not bad


def test_criterion_6_explainability(capsys, reports):
    with criterion(capsys, 6, "step shares sum to 1, not-explainable < 10%") as note:
        parts, ok = [], True
        for suite in SMALL_SUITES + ("mnist",):
            rep = reports.get(suite)
            for run in rep.runs:
                dist = run.reports["voting"].step_distribution
                ok &= sum(dist.values()) == 1 and set(dist) == {1, 2, 3, 4}
            share = 100 * rep.level_share("NotExplainable").mean
            ok &= share < 10
            parts.append(f"{suite} {share:.2f}%")
        note["detail"] = "not explainable: " + ", ".join(parts)
        assert ok


def test_criterion_7_tree_ambiguity(capsys, reports):
    with criterion(capsys, 7, "tree ambiguity above rule learners on MNIST") as note:
        amb = reports.get("mnist").runs[0].ambiguity
        note["detail"] = ", ".join(f"{k} {100 * float(v):.2f}%" for k, v in amb.items())
        assert amb["tree"] > amb["ripper"]
        assert amb["tree"] > amb["foil"]


def test_criterion_8_oracle_suites(capsys):
    with criterion(capsys, 8, "FOIL / prune / DL oracle suites") as note:
        timings = {}
        for name, check in (("foil 200", test_foil.TestOracle().test_greedy_choice_matches_brute_force),
                            ("prune 500", test_ripper.TestPrune().test_brute_force_prefix),
                            ("dl 50", test_ripper.TestDescriptionLength().test_fifty_cases_against_mpmath)):
            t0 = time.perf_counter()
            check()
            timings[name] = time.perf_counter() - t0
        note["detail"] = ", ".join(f"{k} in {v:.1f} s" for k, v in timings.items())
        assert all(v < 30 for v in timings.values())


@settings(max_examples=1000, deadline=None, database=None)
@given(models())
def _round_trip_property(m):
    assert round_trips(m)


def test_criterion_9_round_trip(capsys):
    with criterion(capsys, 9, "1000 random models round-trip") as note:
        t0 = time.perf_counter()
        _round_trip_property()
        note["detail"] = f"1000 models in {time.perf_counter() - t0:.1f} s"
