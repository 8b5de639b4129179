"""Rules, rule sets, partial matching and one-vs-rest conflict resolution.

Every label owns an independent :class:`RuleSet` acting as a binary
classifier. :func:`multiclass_predict` combines them: a unique firing label
wins outright, several firing labels are separated by the length of their
longest satisfied rule, and when nothing fires the label whose best rule has
the highest fraction of satisfied literals is predicted.

Fractions are exact :class:`~fractions.Fraction` values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .data import AttributeSchema, Dataset, Instance, SchemaError

EQ, NE, LE, GE, IN = "==", "!=", "<=", ">=", "in"
_NUMERIC_OPS = (LE, GE, IN)
_NEVER = (1, 0)  # empty code interval


@dataclass(frozen=True)
class Literal:
    """A single attribute test.

    ``value`` is the comparison value; for ``in`` ranges ``value`` and
    ``upper`` are the inclusive bounds.
    """

    attribute: str
    op: str
    value: object
    upper: object = None

    def __post_init__(self):
        if self.op not in (EQ, NE, LE, GE, IN):
            raise ValueError(f"unknown literal operator {self.op!r}")
        if self.op == IN and not self.value <= self.upper:
            raise ValueError(f"empty range [{self.value}, {self.upper}] on {self.attribute}")

    @classmethod
    def equals(cls, attribute, value):
        return cls(attribute, EQ, value)

    @classmethod
    def not_equals(cls, attribute, value):
        return cls(attribute, NE, value)

    @classmethod
    def leq(cls, attribute, value):
        return cls(attribute, LE, value)

    @classmethod
    def geq(cls, attribute, value):
        return cls(attribute, GE, value)

    @classmethod
    def in_range(cls, attribute, lo, hi):
        return cls(attribute, IN, lo, hi)

    def holds(self, v) -> bool:
        if v is None:
            return False
        op = self.op
        if op == EQ:
            return v == self.value
        if op == NE:
            return v != self.value
        try:
            if op == LE:
                return v <= self.value
            if op == GE:
                return v >= self.value
            return self.value <= v <= self.upper
        except TypeError:
            raise SchemaError(f"{self} compares a nominal value numerically") from None

    def code_bounds(self, attr: AttributeSchema):
        """``(lo, hi, negate)`` such that the literal holds iff lo <= code <= hi (xor negate)."""
        vals = attr.values
        if self.op in (EQ, NE):
            c = attr.code_of(self.value) if _comparable(attr, self.value) else -1
            lo, hi = (c, c) if c >= 0 else _NEVER
            return lo, hi, self.op == NE
        if not attr.is_numeric:
            raise SchemaError(f"{self} needs a numeric attribute")
        if self.op == LE:
            return 0, _bisect_right(vals, self.value) - 1, False
        if self.op == GE:
            return _bisect_left(vals, self.value), len(vals), False
        return _bisect_left(vals, self.value), _bisect_right(vals, self.upper) - 1, False

    def __str__(self):
        from .ruleio import format_literal
        return format_literal(self)


def _comparable(attr, value):
    if attr.is_numeric:
        return isinstance(value, (Fraction, int))
    return isinstance(value, str)


def _bisect_left(vals, x):
    lo, hi = 0, len(vals)
    while lo < hi:
        mid = (lo + hi) // 2
        if vals[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo


def _bisect_right(vals, x):
    lo, hi = 0, len(vals)
    while lo < hi:
        mid = (lo + hi) // 2
        if x < vals[mid]:
            hi = mid
        else:
            lo = mid + 1
    return lo


@dataclass(frozen=True)
class Rule:
    target_label: str
    body: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "body", tuple(self.body))
        seen = set()
        for lit in self.body:
            if lit.op == EQ:
                if lit.attribute in seen:
                    raise ValueError(f"two equality tests on {lit.attribute!r}")
                seen.add(lit.attribute)

    @property
    def length(self):
        return len(self.body)

    def __len__(self):
        return len(self.body)

    def covers(self, dataset: Dataset, rows=None):
        """Boolean mask of instances fully satisfying the rule."""
        codes = dataset.codes if rows is None else dataset.codes[rows]
        mask = np.ones(len(codes), dtype=bool)
        for lit in self.body:
            j = dataset.attribute_index(lit.attribute)
            lo, hi, neg = lit.code_bounds(dataset.schema[j])
            col = codes[:, j]
            hit = (col >= lo) & (col <= hi)
            if neg:
                hit = ~hit
            mask &= hit & (col >= 0)
        return mask

    def __str__(self):
        from .ruleio import format_rule
        return format_rule(self, "class")


@dataclass(frozen=True)
class RuleSet:
    target_label: str
    rules: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        for r in self.rules:
            if r.target_label != self.target_label:
                raise ValueError("rule label differs from rule set label")

    def __len__(self):
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def covers(self, dataset: Dataset, rows=None):
        n = len(dataset) if rows is None else len(rows)
        mask = np.zeros(n, dtype=bool)
        for r in self.rules:
            mask |= r.covers(dataset, rows)
        return mask


@dataclass(frozen=True)
class MultiClassRuleModel:
    labels: tuple
    per_label: Mapping[str, RuleSet]
    learner_name: str = "rules"
    label_name: str = "class"

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        per = dict(self.per_label)
        for lab in self.labels:
            per.setdefault(lab, RuleSet(lab))
        if set(per) != set(self.labels):
            raise ValueError("rule sets for labels outside the label set")
        object.__setattr__(self, "per_label", {lab: per[lab] for lab in self.labels})

    def __hash__(self):
        return hash((self.labels, self.learner_name, self.label_name,
                     tuple(self.per_label[lab] for lab in self.labels)))

    @property
    def rules(self):
        return [r for lab in self.labels for r in self.per_label[lab].rules]

    def n_rules(self):
        return sum(len(rs) for rs in self.per_label.values())


@dataclass(frozen=True)
class LearnerOutput:
    fully_justified: tuple | None
    per_label_best: dict = field(default_factory=dict)
    predicted_label: str | None = None

    @property
    def labels(self):
        return tuple(self.per_label_best)

    def best_fraction(self):
        return max((f for f, _ in self.per_label_best.values()), default=Fraction(0))


# -- body simplification ---------------------------------------------------

def simplify_body(body: Sequence[Literal]) -> tuple:
    """Merge the tests on each attribute into at most one literal where possible.

    Lower/upper bounds collapse to the tightest ``>=``/``<=``/``in`` literal;
    an equality subsumes every other test on its attribute. The merged
    literal takes the position of the attribute's first test.
    """
    order, groups = [], {}
    for lit in body:
        if lit.attribute not in groups:
            order.append(lit.attribute)
            groups[lit.attribute] = []
        groups[lit.attribute].append(lit)
    out = []
    for attr in order:
        lits = groups[attr]
        if len(lits) == 1:
            out.append(lits[0])
            continue
        eqs = [l for l in lits if l.op == EQ]
        if eqs:
            out.append(eqs[0])
            continue
        lo = hi = None
        nes = []
        for l in lits:
            if l.op in (GE, IN):
                lo = l.value if lo is None else max(lo, l.value)
            if l.op == LE:
                hi = l.value if hi is None else min(hi, l.value)
            if l.op == IN:
                hi = l.upper if hi is None else min(hi, l.upper)
            if l.op == NE:
                nes.append(l)
        if lo is not None and hi is not None:
            if lo <= hi:
                out.append(Literal.in_range(attr, lo, hi))
            else:  # contradictory bounds stay visible as two tests
                out += [Literal.geq(attr, lo), Literal.leq(attr, hi)]
        elif lo is not None:
            out.append(Literal.geq(attr, lo))
        elif hi is not None:
            out.append(Literal.leq(attr, hi))
        for l in nes:
            try:
                inside = (lo is None or l.value >= lo) and (hi is None or l.value <= hi)
            except TypeError:
                inside = True
            if inside and l not in out:
                out.append(l)
    return tuple(out)


# -- exact single-instance semantics ---------------------------------------

def _schema_of(schema):
    if isinstance(schema, Dataset):
        return schema.schema
    return tuple(schema)


def match_fraction(rule: Rule, instance: Instance, schema) -> Fraction:
    """Fraction of the rule's body literals the instance satisfies (1 for an empty body)."""
    attrs = _schema_of(schema)
    if len(instance.values) != len(attrs):
        raise SchemaError("instance does not conform to schema")
    if not rule.body:
        return Fraction(1)
    index = {a.name: j for j, a in enumerate(attrs)}
    hits = 0
    for lit in rule.body:
        try:
            j = index[lit.attribute]
        except KeyError:
            raise SchemaError(f"instance has no attribute {lit.attribute!r}") from None
        hits += lit.holds(instance.values[j])
    return Fraction(hits, len(rule.body))


def binary_predict(rs: RuleSet, instance: Instance, schema) -> bool:
    return any(match_fraction(r, instance, schema) == 1 for r in rs.rules)


def _resolve(labels, best, full):
    """Shared decision logic.

    ``best[label] = (fraction, rule)``; ``full[label]`` = longest fully
    satisfied rule of that label or None.
    """
    firing = [lab for lab in labels if full[lab] is not None]
    fully = None
    if len(firing) == 1:
        lab = firing[0]
        fully = (lab, full[lab])
    elif len(firing) > 1:
        longest = max(full[lab].length for lab in firing)
        winners = [lab for lab in firing if full[lab].length == longest]
        if len(winners) == 1:
            fully = (winners[0], full[winners[0]])
    if fully is not None:
        return LearnerOutput(fully, best, fully[0])

    def rlen(lab):
        r = best[lab][1]
        return -1 if r is None else r.length

    top = max(best[lab][0] for lab in labels)
    cands = [lab for lab in labels if best[lab][0] == top]
    if len(cands) > 1:
        longest = max(rlen(lab) for lab in cands)
        cands = [lab for lab in cands if rlen(lab) == longest]
    predicted = cands[0] if len(cands) == 1 else None
    return LearnerOutput(None, best, predicted)


def multiclass_predict(model: MultiClassRuleModel, instance: Instance, schema) -> LearnerOutput:
    """Resolve the per-label binary rule sets into one prediction."""
    best, full = {}, {}
    for lab in model.labels:
        b_frac, b_rule, f_rule = Fraction(-1), None, None
        for r in model.per_label[lab].rules:
            f = match_fraction(r, instance, schema)
            if f > b_frac or (f == b_frac and r.length > b_rule.length):
                b_frac, b_rule = f, r
            if f == 1 and (f_rule is None or r.length > f_rule.length):
                f_rule = r
        best[lab] = (max(b_frac, Fraction(0)), b_rule)
        full[lab] = f_rule
    return _resolve(model.labels, best, full)


# -- vectorized batch path ---------------------------------------------------

class CompiledModel:
    """A rule model bound to one dataset schema for batch evaluation."""

    def __init__(self, model: MultiClassRuleModel, dataset: Dataset):
        self.model = model
        self.rules = model.rules
        self.rule_label = np.array([model.labels.index(r.target_label) for r in self.rules],
                                   dtype=np.int64)
        self.lengths = np.array([r.length for r in self.rules], dtype=np.int64)
        attr, lo, hi, neg, owner = [], [], [], [], []
        for k, r in enumerate(self.rules):
            for lit in r.body:
                j = dataset.attribute_index(lit.attribute)
                a, b, ng = lit.code_bounds(dataset.schema[j])
                attr.append(j)
                lo.append(a)
                hi.append(b)
                neg.append(ng)
                owner.append(k)
        self._lits = (np.array(attr, np.int64), np.array(lo, np.int64),
                      np.array(hi, np.int64), np.array(neg, np.uint8),
                      np.array(owner, np.int64))

    def satisfied(self, dataset: Dataset):
        return kernels.satisfied_counts(dataset.codes, *self._lits, len(self.rules))


def satisfied_matrix(model: MultiClassRuleModel, dataset: Dataset):
    """(n_instances, n_rules) satisfied-literal counts, rule order = ``model.rules``."""
    return CompiledModel(model, dataset).satisfied(dataset)


def predict_dataset(model: MultiClassRuleModel, dataset: Dataset) -> list:
    """:func:`multiclass_predict` for every instance, vectorized."""
    cm = CompiledModel(model, dataset)
    n = len(dataset)
    labels = model.labels
    if not cm.rules:
        empty = {lab: (Fraction(0), None) for lab in labels}
        return [_resolve(labels, dict(empty), {lab: None for lab in labels}) for _ in range(n)]
    sat = cm.satisfied(dataset)
    lengths = cm.lengths
    safe_len = np.where(lengths == 0, 1, lengths)
    frac = np.where(lengths == 0, 1.0, sat / safe_len)
    full = sat == lengths
    per_label = []
    for k, lab in enumerate(labels):
        cols = np.flatnonzero(cm.rule_label == k)
        if not len(cols):
            per_label.append(None)
            continue
        fr = frac[:, cols]
        # float division of small integers is correctly rounded, so equal
        # rationals map to equal doubles and the ordering is exact
        top = fr.max(axis=1)
        tie_len = np.where(fr == top[:, None], lengths[cols][None, :], -1)
        best_col = cols[np.argmax(tie_len, axis=1)]
        full_len = np.where(full[:, cols], lengths[cols][None, :], -1)
        full_col = np.where(full_len.max(axis=1) >= 0, cols[np.argmax(full_len, axis=1)], -1)
        per_label.append((best_col, full_col))
    out = []
    rules = cm.rules
    for i in range(n):
        best, fullr = {}, {}
        for k, lab in enumerate(labels):
            pl = per_label[k]
            if pl is None:
                best[lab] = (Fraction(0), None)
                fullr[lab] = None
                continue
            bc, fc = pl[0][i], pl[1][i]
            r = rules[bc]
            best[lab] = (Fraction(1) if r.length == 0 else Fraction(int(sat[i, bc]), r.length), r)
            fullr[lab] = rules[fc] if fc >= 0 else None
        out.append(_resolve(labels, best, fullr))
    return out


def ambiguity_rate(model: MultiClassRuleModel, dataset: Dataset, threshold=Fraction(7, 10),
                   tolerance=Fraction(1, 10), min_labels=4) -> Fraction:
    """Share of instances for which at least ``min_labels`` labels could be "justified".

    A label counts when its best rule's fraction is >= ``threshold`` and
    >= (max fraction - ``tolerance``).
    """
    threshold, tolerance = Fraction(threshold), Fraction(tolerance)
    if not len(dataset):
        return Fraction(0)
    hits = 0
    for out in predict_dataset(model, dataset):
        fracs = [f for f, _ in out.per_label_best.values()]
        top = max(fracs)
        n_ok = sum(1 for f in fracs if f >= threshold and f >= top - tolerance)
        hits += n_ok >= min_labels
    return Fraction(hits, len(dataset))
