"""RIPPER: grow/prune rule induction with a description-length stopping rule.

Rules are grown with FOIL gain on two thirds of the data and pruned back to
their best prefix on the remaining third. Numeric attributes offer ``<=`` and
``>=`` tests at midpoints between observed values; a ``<=`` and a ``>=`` on
the same attribute are merged into one ``in`` range in the final rules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .data import Dataset
from .literals import LiteralSpace, literal_mask, used_ops
from .ovr import LearnStats, train_one_vs_rest
from .rules import Rule, RuleSet, simplify_body

DL_SLACK = 64


@dataclass(frozen=True)
class GrowPruneSplit:
    grow_pos: np.ndarray
    grow_neg: np.ndarray
    prune_pos: np.ndarray
    prune_neg: np.ndarray


@dataclass(frozen=True)
class DlState:
    total_bits: float
    per_rule_bits: tuple = ()
    exception_bits: float = 0.0


def split_grow_prune(pos, neg, rng) -> GrowPruneSplit:
    """Stratified split: per class, floor(n/3) rows go to pruning, the rest to growing."""
    parts = []
    for rows in (np.asarray(pos, np.int64), np.asarray(neg, np.int64)):
        perm = rng.permutation(len(rows))
        n_prune = len(rows) // 3
        parts.append((np.sort(rows[perm[n_prune:]]), np.sort(rows[perm[:n_prune]])))
    (gp, pp), (gn, pn) = parts
    return GrowPruneSplit(gp, gn, pp, pn)


def rule_mask(dataset: Dataset, rule: Rule, rows):
    mask = np.ones(len(rows), dtype=bool)
    for lit in rule.body:
        mask &= literal_mask(dataset, lit, rows)
    return mask


def grow_rule(dataset: Dataset, grow_pos, grow_neg, seed_rule: Rule | None = None,
              target=None, space: LiteralSpace | None = None,
              stats: LearnStats | None = None) -> Rule:
    """Add gain-maximizing literals to ``seed_rule`` (or an empty rule) until no negative is covered."""
    space = space or LiteralSpace(dataset, thresholds=True)
    if seed_rule is not None:
        target = seed_rule.target_label
        body = list(seed_rule.body)
    else:
        body = []
    cov_p = np.asarray(grow_pos, np.int64)
    cov_n = np.asarray(grow_neg, np.int64)
    for lit in body:
        cov_p = cov_p[literal_mask(dataset, lit, cov_p)]
        cov_n = cov_n[literal_mask(dataset, lit, cov_n)]
    while len(cov_n) and len(cov_p):
        best = space.best(cov_p, cov_n, used_ops(dataset, body))
        if best is None:
            if stats is not None:
                stats.warnings += 1
            break
        body.append(best.literal)
        cov_p = cov_p[literal_mask(dataset, best.literal, cov_p)]
        cov_n = cov_n[literal_mask(dataset, best.literal, cov_n)]
    return Rule(target, tuple(body))


def prune_value(p, n):
    """(p - n) / (p + n) as an exact rational; -1 for a prefix covering nothing."""
    return Fraction(-1) if p + n == 0 else Fraction(p - n, p + n)


def prune_rule(dataset: Dataset, rule: Rule, prune_pos, prune_neg) -> Rule:
    """Best non-empty prefix of ``rule`` on the pruning rows; ties go to the shorter prefix."""
    prune_pos = np.asarray(prune_pos, np.int64)
    prune_neg = np.asarray(prune_neg, np.int64)
    if rule.length == 0 or (len(prune_pos) == 0 and len(prune_neg) == 0):
        return rule
    mp = np.ones(len(prune_pos), dtype=bool)
    mn = np.ones(len(prune_neg), dtype=bool)
    best_len, best_v = None, None
    for i, lit in enumerate(rule.body, 1):
        mp &= literal_mask(dataset, lit, prune_pos)
        mn &= literal_mask(dataset, lit, prune_neg)
        v = prune_value(int(mp.sum()), int(mn.sum()))
        if best_v is None or v > best_v:
            best_len, best_v = i, v
    return Rule(rule.target_label, rule.body[:best_len])


def log2_binomial(n, k):
    if k < 0 or k > n:
        return 0.0
    return (math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)) / math.log(2)


def rule_bits(length, universe):
    """Model cost of one rule: half of (length code + literal choices)."""
    return 0.5 * (int(length).bit_length() + length * math.log2(max(universe, 1)))


def exception_bits(n_covered, fp, n_uncovered, fn):
    return (log2_binomial(n_covered, fp) + log2_binomial(n_uncovered, fn)
            + int(n_covered + n_uncovered).bit_length())


def description_length(dataset: Dataset, rules, pos, neg, universe: int) -> DlState:
    """Bits to encode ``rules`` plus the training instances they misclassify."""
    pos = np.asarray(pos, np.int64)
    neg = np.asarray(neg, np.int64)
    cp = np.zeros(len(pos), dtype=bool)
    cn = np.zeros(len(neg), dtype=bool)
    for r in rules:
        cp |= rule_mask(dataset, r, pos)
        cn |= rule_mask(dataset, r, neg)
    return _dl(rules, cp, cn, universe)


def _dl(rules, cp, cn, universe):
    per_rule = tuple(rule_bits(r.length, universe) for r in rules)
    n_cov = int(cp.sum() + cn.sum())
    n_unc = len(cp) + len(cn) - n_cov
    exc = exception_bits(n_cov, int(cn.sum()), n_unc, int((~cp).sum()))
    return DlState(sum(per_rule) + exc, per_rule, exc)


class _Coverage:
    """Caches rule coverage over a fixed (P, N) pair for repeated DL evaluation."""

    def __init__(self, dataset, pos, neg, universe):
        self.dataset = dataset
        self.pos = np.asarray(pos, np.int64)
        self.neg = np.asarray(neg, np.int64)
        self.universe = universe
        self._cache = {}

    def masks(self, rule):
        key = rule.body
        if key not in self._cache:
            self._cache[key] = (rule_mask(self.dataset, rule, self.pos),
                                rule_mask(self.dataset, rule, self.neg))
        return self._cache[key]

    def dl(self, rules) -> float:
        cp = np.zeros(len(self.pos), dtype=bool)
        cn = np.zeros(len(self.neg), dtype=bool)
        for r in rules:
            mp, mn = self.masks(r)
            cp |= mp
            cn |= mn
        return _dl(rules, cp, cn, self.universe).total_bits


def reverse_sweep(rules, cover: _Coverage):
    """Walk rules last to first, deleting each rule whose removal lowers the DL."""
    rules = list(rules)
    dl = cover.dl(rules)
    for i in range(len(rules) - 1, -1, -1):
        trial = rules[:i] + rules[i + 1:]
        trial_dl = cover.dl(trial)
        if trial_dl < dl:
            rules, dl = trial, trial_dl
    return rules


@dataclass
class _Context:
    dataset: Dataset
    space: LiteralSpace
    universe: int
    rng: np.random.Generator
    stats: LearnStats = field(default_factory=LearnStats)
    target: object = None


def _context(dataset, target, rng, stats):
    space = LiteralSpace(dataset, thresholds=True)
    return _Context(dataset, space, space.universe_size(), np.random.default_rng(rng),
                    stats if stats is not None else LearnStats(), target)


def _grow_and_prune(ctx, pos, neg, seed_rule=None):
    sp = split_grow_prune(pos, neg, ctx.rng)
    rule = grow_rule(ctx.dataset, sp.grow_pos, sp.grow_neg, seed_rule, ctx.target,
                     ctx.space, ctx.stats)
    return prune_rule(ctx.dataset, rule, sp.prune_pos, sp.prune_neg)


def _generate(ctx, pos, neg):
    pos = np.asarray(pos, np.int64)
    neg = np.asarray(neg, np.int64)
    cover = _Coverage(ctx.dataset, pos, neg, ctx.universe)
    rules = []
    dl = cover.dl(rules)
    P, N = pos, neg
    while len(P):
        rule = _grow_and_prune(ctx, P, N)
        rules.append(rule)
        new_dl = cover.dl(rules)
        ctx.stats.log.append(f"{ctx.target}: add rule {len(rules)} len={rule.length} "
                             f"DL={new_dl:.3f}")
        if new_dl > dl + DL_SLACK:
            before = len(rules)
            rules = reverse_sweep(rules, cover)
            ctx.stats.log.append(f"{ctx.target}: DL guard fired, swept "
                                 f"{before - len(rules)} rules, DL={cover.dl(rules):.3f}")
            return rules
        dl = new_dl
        P = P[~rule_mask(ctx.dataset, rule, P)]
        N = N[~rule_mask(ctx.dataset, rule, N)]
    return rules


def _optimize(ctx, rules, pos, neg):
    pos = np.asarray(pos, np.int64)
    neg = np.asarray(neg, np.int64)
    cover = _Coverage(ctx.dataset, pos, neg, ctx.universe)
    rules = list(rules)
    for i in range(len(rules)):
        others = rules[:i] + rules[i + 1:]
        cp = np.zeros(len(pos), dtype=bool)
        cn = np.zeros(len(neg), dtype=bool)
        for r in others:
            mp, mn = cover.masks(r)
            cp |= mp
            cn |= mn
        p_unc, n_unc = pos[~cp], neg[~cn]
        sp = split_grow_prune(p_unc, n_unc, ctx.rng)
        original = rules[i]
        repl = grow_rule(ctx.dataset, sp.grow_pos, sp.grow_neg, None, ctx.target,
                         ctx.space, ctx.stats)
        repl = prune_rule(ctx.dataset, repl, sp.prune_pos, sp.prune_neg)
        rev = grow_rule(ctx.dataset, sp.grow_pos, sp.grow_neg, original, ctx.target,
                        ctx.space, ctx.stats)
        rev = prune_rule(ctx.dataset, rev, sp.prune_pos, sp.prune_neg)
        best, best_dl = original, cover.dl(rules)
        for cand in (repl, rev):
            trial = rules[:i] + [cand] + rules[i + 1:]
            d = cover.dl(trial)
            if d < best_dl:
                best, best_dl = cand, d
        rules[i] = best
        ctx.stats.log.append(f"{ctx.target}: optimize rule {i + 1} -> "
                             f"{'original' if best is original else 'replacement' if best is repl else 'revision'}"
                             f" DL={best_dl:.3f}")
    return rules


def _finish(target, rules):
    out, seen = [], set()
    for r in rules:
        r = Rule(target, simplify_body(r.body))
        if r.body not in seen:
            seen.add(r.body)
            out.append(r)
    return RuleSet(target, tuple(out))


def generate_ruleset(dataset: Dataset, pos, neg, target, seed=0,
                     stats: LearnStats | None = None) -> RuleSet:
    ctx = _context(dataset, target, seed, stats)
    return _finish(target, _generate(ctx, pos, neg))


def optimize_ruleset(dataset: Dataset, rules: RuleSet, pos, neg, seed=0,
                     stats: LearnStats | None = None) -> RuleSet:
    ctx = _context(dataset, rules.target_label, seed, stats)
    return _finish(rules.target_label, _optimize(ctx, rules.rules, pos, neg))


def ripper(dataset: Dataset, pos, neg, target, k: int = 2, seed=0,
           stats: LearnStats | None = None, residual_cover: bool = True) -> RuleSet:
    """Generate a rule set, then run ``k`` optimization passes.

    With ``k > 0`` and ``residual_cover`` set, positives left uncovered after
    optimization are covered by further generated rules, followed by one
    reverse description-length sweep over the whole set.
    """
    pos = np.asarray(pos, np.int64)
    neg = np.asarray(neg, np.int64)
    if len(np.intersect1d(pos, neg)):
        raise ValueError("positive and negative rows overlap")
    ctx = _context(dataset, target, seed, stats)
    rules = _generate(ctx, pos, neg)
    for _ in range(k):
        rules = _optimize(ctx, rules, pos, neg)
    if k > 0 and residual_cover:
        cover = _Coverage(dataset, pos, neg, ctx.universe)
        cp = np.zeros(len(pos), dtype=bool)
        cn = np.zeros(len(neg), dtype=bool)
        for r in rules:
            mp, mn = cover.masks(r)
            cp |= mp
            cn |= mn
        if (~cp).any():
            rules = rules + _generate(ctx, pos[~cp], neg[~cn])
        rules = reverse_sweep(rules, cover)
    return _finish(target, rules)


def _ripper_label(dataset, pos, neg, target, stats=None, k=2, seed=0, residual_cover=True):
    label_seed = [int(seed), dataset.labels.index(target)]
    return ripper(dataset, pos, neg, target, k, label_seed, stats, residual_cover)


class RipperLearner:
    """One-vs-rest RIPPER producing a :class:`~rulevote.rules.MultiClassRuleModel`."""

    name = "ripper"

    def __init__(self, k: int = 2, seed: int = 0, jobs: int = 1, residual_cover: bool = True):
        self.k = k
        self.seed = seed
        self.jobs = jobs
        self.residual_cover = residual_cover
        self.stats = None

    def fit(self, dataset: Dataset):
        model, self.stats = train_one_vs_rest(_ripper_label, dataset, self.name, self.jobs,
                                              k=self.k, seed=self.seed,
                                              residual_cover=self.residual_cover)
        return model


def train_ripper(dataset: Dataset, k: int = 2, seed: int = 0, jobs: int = 1):
    return RipperLearner(k, seed, jobs).fit(dataset)
