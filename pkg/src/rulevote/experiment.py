"""End-to-end benchmark runs: split, preprocess, train, vote, evaluate, repeat."""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

from .data import load_csv, split
from .decider import OracleDecider, make_decider
from .foil import FoilLearner
from .metrics import LEVELS, EvalReport, evaluate, format_table, pct, summarize, to_csv
from .preprocess import fit_recipe, load_recipe
from .ripper import RipperLearner
from .rules import ambiguity_rate, predict_dataset
from .tree import TreeLearner
from .voting import VotingConfig, run_ensemble

log = logging.getLogger(__name__)

DATA_ENV = "RULEVOTE_DATA"
METHODS = ("foil", "ripper", "tree", "decider", "voting", "voting_truth")


def data_dir() -> Path:
    return Path(os.environ.get(DATA_ENV, "data"))


@dataclass(frozen=True)
class Suite:
    file: str
    label: str
    recipe: str
    repetitions: int = 10


SUITES = {
    "spambase": Suite("spambase.csv", "spam", "spambase"),
    "heart": Suite("heart.csv", "target", "heart"),
    "diabetes": Suite("diabetes.csv", "Outcome", "diabetes"),
    "covid": Suite("covid.csv", "Covid", "covid"),
    "covid_restricted": Suite("covid.csv", "Covid", "covid_restricted"),
    "mnist": Suite("mnist.csv", "label", "mnist", repetitions=1),
    "fashion_mnist": Suite("fashion_mnist.csv", "label", "fashion_mnist", repetitions=1),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one benchmark run depends on besides the seed."""

    name: str
    data_path: str
    label: str
    recipe: str
    test_fraction: Fraction = Fraction(1, 5)
    ripper_k: int = 2
    decider: str = "gbt"
    decider_params: tuple = ()
    tree_max_depth: int | None = None
    tree_min_leaf: int = 1
    voting: VotingConfig = field(default_factory=VotingConfig)
    ambiguity: bool = False
    jobs: int = 1

    @classmethod
    def for_suite(cls, suite: str, data: str | os.PathLike | None = None, **overrides):
        try:
            entry = SUITES[suite]
        except KeyError:
            raise ValueError(f"unknown suite {suite!r}; choose from {sorted(SUITES)}") from None
        path = Path(data) if data is not None else data_dir() / entry.file
        if path.is_dir():
            path = path / entry.file
        cfg = cls(suite, str(path), entry.label, entry.recipe)
        return replace(cfg, **overrides)


@dataclass(frozen=True)
class RunResult:
    """Outcome of one seed."""

    seed: int
    reports: dict                 # method -> EvalReport
    n_rules: dict                 # learner -> rule count
    ambiguity: dict               # learner -> Fraction (multi-class runs)
    oracle_step23_correct: bool   # every oracle-driven step 2/3 label equals the truth
    decider_calls: int
    seconds: float


@lru_cache(maxsize=4)
def _load(path, label):
    return load_csv(path, label)


class _CountingDecider:
    def __init__(self, inner):
        self.inner = inner
        self.calls = 0

    def predict_many(self, dataset, rows=None):
        rows = list(range(len(dataset))) if rows is None else list(rows)
        self.calls += len(rows)
        return self.inner.predict_many(dataset, rows)


def run_single(cfg: ExperimentConfig, seed: int) -> RunResult:
    t0 = time.perf_counter()
    data = _load(cfg.data_path, cfg.label)
    train, test = split(data, cfg.test_fraction, seed)
    fitted = fit_recipe(load_recipe(cfg.recipe), train)
    train, test = fitted.transform(train), fitted.transform(test)
    truth = test.label_values()
    labels = train.labels

    models = {
        "foil": FoilLearner(jobs=cfg.jobs).fit(train),
        "ripper": RipperLearner(k=cfg.ripper_k, seed=seed, jobs=cfg.jobs).fit(train),
        "tree": TreeLearner(cfg.tree_max_depth, cfg.tree_min_leaf, seed).fit(train),
    }
    reports = {}
    for name, model in models.items():
        preds = [o.predicted_label for o in predict_dataset(model, test)]
        reports[name] = evaluate(preds, truth, labels)

    params = dict(cfg.decider_params)
    if cfg.decider == "gbt":
        params.setdefault("seed", seed)
    decider = make_decider(cfg.decider, **params).train(train)
    reports["decider"] = evaluate(decider.predict_many(test), truth, labels)

    rule_models = [models["foil"], models["ripper"]]
    counting = _CountingDecider(decider)
    voted = run_ensemble(rule_models, counting, test, cfg.voting)
    reports["voting"] = evaluate(voted, truth, labels)
    oracle_voted = run_ensemble(rule_models, OracleDecider.from_dataset(test), test, cfg.voting)
    reports["voting_truth"] = evaluate(oracle_voted, truth, labels)
    oracle_ok = all(r.label == t for r, t in zip(oracle_voted, truth) if r.step in (2, 3))

    amb = {}
    if cfg.ambiguity:
        amb = {name: ambiguity_rate(m, test, cfg.voting.threshold, cfg.voting.tolerance)
               for name, m in models.items()}
    seconds = time.perf_counter() - t0
    log.info("%s seed %d done in %.1fs", cfg.name, seed, seconds)
    return RunResult(seed, reports, {k: m.n_rules() for k, m in models.items()}, amb,
                     oracle_ok, counting.calls, seconds)


def _run(args):
    return run_single(*args)


@dataclass(frozen=True)
class ExperimentReport:
    config: ExperimentConfig
    runs: tuple

    def metric(self, method, attr="accuracy"):
        return summarize(getattr(r.reports[method], attr) for r in self.runs)

    def accuracy(self, method):
        return self.metric(method).mean

    def level_share(self, level):
        return summarize(r.reports["voting"].explainability_distribution[level] for r in self.runs)

    def tables(self) -> str:
        reps = len(self.runs)
        out = [f"suite {self.config.name}: {reps} repetition(s), seeds "
               f"{', '.join(str(r.seed) for r in self.runs)}\n"]
        for attr, title in (("accuracy", "Accuracy (%)"), ("macro_precision", "Macro precision (%)"),
                            ("macro_recall", "Macro recall (%)")):
            row = [self.config.name]
            for m in METHODS:
                s = self.metric(m, attr)
                row.append(f"{pct(s.mean)} ± {pct(s.std)}" if reps > 1 else pct(s.mean))
            out.append(format_table(title, ["data"] + list(METHODS), [row]))
        row = [self.config.name] + [pct(self.level_share(lv).mean) for lv in LEVELS]
        out.append(format_table("Explainability of voting (%)", ["data"] + list(LEVELS), [row]))
        if self.runs[0].ambiguity:
            names = list(self.runs[0].ambiguity)
            row = [self.config.name] + [pct(summarize(r.ambiguity[n] for r in self.runs).mean)
                                        for n in names]
            out.append(format_table("Ambiguity: share of instances with >3 justifiable labels (%)",
                                    ["data"] + names, [row]))
        return "\n".join(out)

    def csv(self) -> str:
        header = ["seed", "method", "accuracy", "macro_precision", "macro_recall"] + list(LEVELS)
        rows = []
        for r in self.runs:
            for m in METHODS:
                rep: EvalReport = r.reports[m]
                lv = [float(rep.explainability_distribution.get(x, 0))
                      for x in LEVELS] if rep.explainability_distribution else [""] * len(LEVELS)
                rows.append([r.seed, m, float(rep.accuracy), float(rep.macro_precision),
                             float(rep.macro_recall)] + lv)
        return to_csv(header, rows)


def repeat_experiment(cfg: ExperimentConfig, repetitions=10, base_seed=0, jobs=1):
    """Run ``repetitions`` seeds (``base_seed``, ``base_seed + 1``, ...) and collect the results."""
    seeds = [base_seed + i for i in range(repetitions)]
    if jobs > 1 and repetitions > 1:
        inner = replace(cfg, jobs=1)
        with ProcessPoolExecutor(max_workers=min(jobs, repetitions)) as ex:
            runs = list(ex.map(_run, [(inner, s) for s in seeds]))
    else:
        runs = [run_single(cfg, s) for s in seeds]
    return ExperimentReport(cfg, tuple(runs))
