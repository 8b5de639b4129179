"""Propositional FOIL: separate-and-conquer with greedy gain-maximizing equality tests."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .literals import LiteralSpace, gain, literal_mask, used_ops
from .ovr import LearnStats, train_one_vs_rest
from .rules import Literal, Rule, RuleSet


@dataclass(frozen=True)
class CoverState:
    """Rows of P and N fully satisfying ``current_rule``."""

    covered_pos: np.ndarray
    covered_neg: np.ndarray
    current_rule: Rule


def foil_gain(literal: Literal, state: CoverState, dataset: Dataset) -> float:
    """Gain of appending ``literal`` to ``state.current_rule``."""
    p0, n0 = len(state.covered_pos), len(state.covered_neg)
    p1 = int(literal_mask(dataset, literal, state.covered_pos).sum())
    n1 = int(literal_mask(dataset, literal, state.covered_neg).sum())
    return gain(p0, n0, p1, n1)


def candidate_literals(dataset: Dataset, current_rule: Rule) -> list:
    """Equality tests on every observed value of every attribute not yet in the rule."""
    used = {lit.attribute for lit in current_rule.body}
    return [Literal.equals(a.name, v) for a in dataset.schema if a.name not in used
            for v in a.values]


def foil_learn(dataset: Dataset, pos_rows, neg_rows, target, stats: LearnStats | None = None,
               space: LiteralSpace | None = None) -> RuleSet:
    """Learn a rule set separating rows ``pos_rows`` from ``neg_rows``.

    Each rule is grown until it covers no negatives. When negatives remain
    but no candidate covers a positive (identical rows in both classes), the
    rule is discarded, the positives it covered are dropped, and
    ``stats.warnings`` is incremented.
    """
    stats = stats if stats is not None else LearnStats()
    space = space or LiteralSpace(dataset, thresholds=False)
    P = np.asarray(pos_rows, dtype=np.int64)
    N = np.asarray(neg_rows, dtype=np.int64)
    if len(np.intersect1d(P, N)):
        raise ValueError("positive and negative rows overlap")
    rules = []
    while len(P):
        body, cov_p, cov_n = [], P, N
        stuck = False
        while len(cov_n):
            best = space.best(cov_p, cov_n, used_ops(dataset, body))
            if best is None:
                stuck = True
                break
            body.append(best.literal)
            cov_p = cov_p[literal_mask(dataset, best.literal, cov_p)]
            cov_n = cov_n[literal_mask(dataset, best.literal, cov_n)]
        if stuck:
            stats.warnings += 1
            stats.dropped_positives += len(cov_p)
            stats.log.append(f"{target}: dropped {len(cov_p)} inseparable positives")
        else:
            rules.append(Rule(target, tuple(body)))
        P = np.setdiff1d(P, cov_p, assume_unique=True)
    return RuleSet(target, tuple(rules))


class FoilLearner:
    """One-vs-rest FOIL producing a :class:`~rulevote.rules.MultiClassRuleModel`."""

    name = "foil"

    def __init__(self, jobs: int = 1):
        self.jobs = jobs
        self.stats = None

    def fit(self, dataset: Dataset):
        model, self.stats = train_one_vs_rest(foil_learn, dataset, self.name, self.jobs)
        return model


def train_foil(dataset: Dataset, jobs: int = 1):
    return FoilLearner(jobs).fit(dataset)


__all__ = ["CoverState", "foil_gain", "candidate_literals", "foil_learn", "FoilLearner",
           "train_foil"]
