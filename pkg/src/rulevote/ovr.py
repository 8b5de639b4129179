"""One-vs-rest training: one independent binary rule set per label."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .rules import MultiClassRuleModel, RuleSet


@dataclass
class LearnStats:
    """Diagnostics collected while learning one rule set."""

    warnings: int = 0
    dropped_positives: int = 0
    log: list = field(default_factory=list)

    def merge(self, other):
        self.warnings += other.warnings
        self.dropped_positives += other.dropped_positives
        self.log.extend(other.log)


def _train_label(args):
    learn, dataset, label, kwargs = args
    k = dataset.labels.index(label)
    pos = np.flatnonzero(dataset.y == k)
    neg = np.flatnonzero((dataset.y != k) & (dataset.y >= 0))
    stats = LearnStats()
    rs = learn(dataset, pos, neg, label, stats=stats, **kwargs)
    return rs, stats


def train_one_vs_rest(learn, dataset: Dataset, learner_name: str, jobs: int = 1,
                      **kwargs) -> tuple[MultiClassRuleModel, LearnStats]:
    """Run ``learn(dataset, pos_rows, neg_rows, label, stats=..., **kwargs)`` for every label.

    Labels are processed independently, in parallel worker processes when
    ``jobs > 1``; the result does not depend on ``jobs``.
    """
    tasks = [(learn, dataset, lab, kwargs) for lab in dataset.labels]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as ex:
            results = list(ex.map(_train_label, tasks))
    else:
        results = [_train_label(t) for t in tasks]
    stats = LearnStats()
    per_label = {}
    for lab, (rs, st) in zip(dataset.labels, results):
        per_label[lab] = rs
        stats.merge(st)
    model = MultiClassRuleModel(dataset.labels, per_label, learner_name, dataset.label_name)
    return model, stats


def empty_model(dataset: Dataset, learner_name):
    return MultiClassRuleModel(dataset.labels, {lab: RuleSet(lab) for lab in dataset.labels},
                               learner_name, dataset.label_name)
