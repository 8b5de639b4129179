"""Explainable voting over several rule learners and one black-box decider.

For each instance the steps are tried in order:

1. every learner has a fully satisfied rule and all of them predict the
   same label;
2. some learner's fully satisfied rule agrees with the decider;
3. some learner's best rule for the decider's label is satisfied to at least
   ``threshold`` and is (close to) that learner's best rule overall;
4. otherwise no prediction.

Steps 1 and 2 are explainable, step 3 partially explainable, step 4 not.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .data import Dataset
from .rules import LearnerOutput, MultiClassRuleModel, Rule, predict_dataset

EXPLAINABLE = "Explainable"
PARTIALLY_EXPLAINABLE = "PartiallyExplainable"
NOT_EXPLAINABLE = "NotExplainable"
LEVELS = (EXPLAINABLE, PARTIALLY_EXPLAINABLE, NOT_EXPLAINABLE)
LEVEL_OF_STEP = {1: EXPLAINABLE, 2: EXPLAINABLE, 3: PARTIALLY_EXPLAINABLE, 4: NOT_EXPLAINABLE}


class VotingConfigError(ValueError):
    pass


def _rational(x):
    return Fraction(str(x)) if isinstance(x, float) else Fraction(x)


@dataclass(frozen=True)
class VotingConfig:
    """``multiclass=None`` decides from the number of labels (more than two)."""

    threshold: Fraction = Fraction(7, 10)
    tolerance: Fraction = Fraction(1, 10)
    multiclass: bool | None = None

    def __post_init__(self):
        object.__setattr__(self, "threshold", _rational(self.threshold))
        object.__setattr__(self, "tolerance", _rational(self.tolerance))
        if not 0 < self.threshold <= 1:
            raise VotingConfigError(f"threshold must lie in (0, 1], got {self.threshold}")
        if not 0 <= self.tolerance < 1:
            raise VotingConfigError(f"tolerance must lie in [0, 1), got {self.tolerance}")

    def is_multiclass(self, labels):
        return len(labels) > 2 if self.multiclass is None else self.multiclass


@dataclass(frozen=True)
class Justification:
    learner: str
    rule: Rule
    fraction: Fraction


@dataclass(frozen=True)
class VotingResult:
    label: object
    step: int
    level: str
    justification: Justification | None = None
    instance_id: int | None = None


def _check_labels(outputs):
    if len(outputs) < 2:
        raise VotingConfigError("voting needs at least two learner outputs")
    labels = set(outputs[0].per_label_best)
    for o in outputs[1:]:
        if set(o.per_label_best) != labels:
            raise VotingConfigError("learner outputs cover different label sets")
    return labels


def _names(outputs, learner_names):
    if learner_names is None:
        return [f"learner{i + 1}" for i in range(len(outputs))]
    if len(learner_names) != len(outputs):
        raise VotingConfigError("one learner name per output expected")
    return list(learner_names)


def unanimous(outputs: Sequence[LearnerOutput], learner_names=None) -> VotingResult | None:
    """Step 1 alone: the shared fully justified label, or None."""
    names = _names(outputs, learner_names)
    fj = [o.fully_justified for o in outputs]
    if all(f is not None for f in fj) and len({f[0] for f in fj}) == 1:
        label, rule = fj[0]
        return VotingResult(label, 1, EXPLAINABLE, Justification(names[0], rule, Fraction(1)))
    return None


def vote(outputs: Sequence[LearnerOutput], decider_label, cfg: VotingConfig = VotingConfig(),
         learner_names=None) -> VotingResult:
    labels = _check_labels(outputs)
    names = _names(outputs, learner_names)
    res = unanimous(outputs, names)
    if res is not None:
        return res
    if decider_label not in labels:
        raise VotingConfigError(f"decider label {decider_label!r} is not a known label")

    for name, o in zip(names, outputs):
        if o.fully_justified is not None and o.fully_justified[0] == decider_label:
            return VotingResult(decider_label, 2, EXPLAINABLE,
                                Justification(name, o.fully_justified[1], Fraction(1)))

    multiclass = cfg.is_multiclass(labels)
    best = None
    for name, o in zip(names, outputs):
        f, rule = o.per_label_best[decider_label]
        top = max(fr for fr, _ in o.per_label_best.values())
        close = f >= top - cfg.tolerance if multiclass else f == top
        if rule is not None and f >= cfg.threshold and close:
            if best is None or f > best.fraction:
                best = Justification(name, rule, f)
    if best is not None:
        return VotingResult(decider_label, 3, PARTIALLY_EXPLAINABLE, best)
    return VotingResult(None, 4, NOT_EXPLAINABLE)


def run_ensemble(models: Sequence[MultiClassRuleModel], decider, test: Dataset,
                 cfg: VotingConfig = VotingConfig()) -> list:
    """Vote on every test instance; the decider only sees instances step 1 cannot settle."""
    if len(models) < 2:
        raise VotingConfigError("voting needs at least two rule models")
    label_sets = {tuple(m.labels) for m in models}
    if len(label_sets) != 1:
        raise VotingConfigError("rule models were trained on different label sets")
    names = [m.learner_name for m in models]
    if len(set(names)) != len(names):
        names = [f"{n}{i + 1}" for i, n in enumerate(names)]
    per_model = [predict_dataset(m, test) for m in models]
    results = [None] * len(test)
    pending = []
    for i in range(len(test)):
        outs = [pm[i] for pm in per_model]
        r = unanimous(outs, names)
        if r is None:
            pending.append(i)
        else:
            results[i] = r
    if pending:
        decided = decider.predict_many(test, pending)
        for i, d in zip(pending, decided):
            results[i] = vote([pm[i] for pm in per_model], d, cfg, names)
    return [VotingResult(r.label, r.step, r.level, r.justification, int(test.ids[i]))
            for i, r in enumerate(results)]


RESULT_COLUMNS = ("id", "true_label", "voted_label", "step", "level", "learner", "fraction",
                  "rule_text")


def write_results(path, results, test: Dataset):
    from .data import format_fraction
    from .ruleio import format_rule
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(RESULT_COLUMNS)
        for row, r in enumerate(results):
            j = r.justification
            truth = test.label_of(row)
            w.writerow([r.instance_id, "" if truth is None else truth,
                        "" if r.label is None else r.label, r.step, r.level,
                        j.learner if j else "", format_fraction(j.fraction) if j else "",
                        format_rule(j.rule, test.label_name) if j else ""])
