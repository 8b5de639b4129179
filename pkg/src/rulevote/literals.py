"""Candidate literal enumeration and vectorized FOIL-gain scoring.

Candidates are generated per attribute in schema order. For each attribute
the equality tests come first (one per observed value, in value order); when
thresholds are enabled a numeric attribute then offers ``<=`` tests at every
midpoint between consecutive values, followed by the ``>=`` tests at the same
midpoints. Ties in gain go to the earliest candidate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .data import Dataset
from .rules import EQ, GE, IN, LE, NE, Literal

KIND_EQ, KIND_LE, KIND_GE = 0, 1, 2


def gain(p0, n0, p1, n1) -> float:
    """FOIL information gain of refining a rule covering (p0, n0) to (p1, n1)."""
    if p1 == 0:
        return -math.inf
    return p1 * (math.log2(p1 / (p1 + n1)) - math.log2(p0 / (p0 + n0)))


def gain_vector(p0, n0, p1, n1):
    p1 = np.asarray(p1, dtype=np.float64)
    n1 = np.asarray(n1, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = p1 * (np.log2(p1 / (p1 + n1)) - math.log2(p0 / (p0 + n0)))
    return np.where(p1 > 0, g, -np.inf)


def exact_argmax(p0, n0, pairs, index):
    """Entry of ``index`` whose (p1, n1) pair has the largest exact gain; first on ties.

    ``p1 * log2(r)`` is compared through ``r ** p1`` with rational ``r``.
    """
    best_key, best_i = None, None
    powers = {}
    for (a, b), i in zip(pairs, index):
        if (a, b) not in powers:
            powers[(a, b)] = Fraction(a * (p0 + n0), (a + b) * p0) ** a
        key = powers[(a, b)]
        if best_key is None or key > best_key:
            best_key, best_i = key, int(i)
    return best_i


@dataclass(frozen=True)
class Candidate:
    literal: Literal
    attr: int
    kind: int
    lo: int
    hi: int
    gain: float


class LiteralSpace:
    """All candidate literals over one dataset's coding."""

    def __init__(self, dataset: Dataset, thresholds: bool = False):
        self.dataset = dataset
        self.thresholds = thresholds
        schema = dataset.schema
        sizes = np.array([len(a.values) for a in schema], dtype=np.int64)
        self.offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
        self.total = int(self.offsets[-1])
        attr, kind, pos = [], [], []
        for j, a in enumerate(schema):
            k, off = len(a.values), int(self.offsets[j])
            attr += [j] * k
            kind += [KIND_EQ] * k
            pos += range(off, off + k)
            if thresholds and a.is_numeric and k > 1:
                for kd in (KIND_LE, KIND_GE):
                    attr += [j] * (k - 1)
                    kind += [kd] * (k - 1)
                    pos += range(off, off + k - 1)
        self.cand_attr = np.array(attr, dtype=np.int64)
        self.cand_kind = np.array(kind, dtype=np.int64)
        self.cand_pos = np.array(pos, dtype=np.int64)
        # position of each value slot inside its attribute
        self.slot_attr = np.repeat(np.arange(len(schema)), sizes)
        self.slot_code = np.arange(self.total) - self.offsets[self.slot_attr]

    def __len__(self):
        return len(self.cand_attr)

    def universe_size(self):
        """Number of distinct candidate literals (equality plus both threshold directions)."""
        return len(self.cand_attr)

    def _counts(self, rows):
        """Coverage counts of every candidate over ``rows`` in candidate order."""
        eq = kernels.value_counts(self.dataset.codes, rows, self.offsets, self.total)
        if not self.thresholds:
            return eq[self.cand_pos]
        cum = np.cumsum(eq)
        start = np.concatenate([[0], cum])[self.offsets[:-1]]
        seg_total = np.concatenate([[0], cum])[self.offsets[1:]] - start
        le = cum - start[self.slot_attr]
        ge = seg_total[self.slot_attr] - le
        return np.stack([eq, le, ge])[self.cand_kind, self.cand_pos]

    def allowed(self, used):
        """Mask of candidates compatible with the tests already in a rule.

        ``used`` maps attribute index to the set of operators present. An
        equality (or any FOIL-style test) blocks its attribute; a ``<=``
        leaves only ``>=`` open and vice versa.
        """
        mask = np.ones(len(self.cand_attr), dtype=bool)
        for j, ops in used.items():
            sel = self.cand_attr == j
            if not self.thresholds or EQ in ops or NE in ops or IN in ops or (LE in ops and GE in ops):
                mask[sel] = False
            elif LE in ops:
                mask[sel & (self.cand_kind != KIND_GE)] = False
            elif GE in ops:
                mask[sel & (self.cand_kind != KIND_LE)] = False
        return mask

    def _scored(self, pos_rows, neg_rows, used):
        p1 = self._counts(pos_rows)
        n1 = self._counts(neg_rows)
        g = gain_vector(len(pos_rows), len(neg_rows), p1, n1)
        if used:
            g = np.where(self.allowed(used), g, -np.inf)
        return g, p1, n1

    def gains(self, pos_rows, neg_rows, used=None):
        return self._scored(pos_rows, neg_rows, used)[0]

    def best(self, pos_rows, neg_rows, used=None):
        """Highest-gain candidate, or None when no candidate has finite gain.

        Gains within float noise of the maximum are compared exactly, so
        equal gains always go to the earliest candidate.
        """
        if not len(pos_rows):
            return None
        g, p1, n1 = self._scored(pos_rows, neg_rows, used)
        if not len(g):
            return None
        i = int(np.argmax(g))
        if not np.isfinite(g[i]):
            return None
        near = np.flatnonzero(g >= g[i] - 1e-9 * max(1.0, abs(g[i])))
        if len(near) > 1:
            i = exact_argmax(len(pos_rows), len(neg_rows),
                             [(int(p1[k]), int(n1[k])) for k in near], near)
        return self.candidate(i, float(g[i]))
    def candidate(self, i, g=math.nan) -> Candidate:
        j = int(self.cand_attr[i])
        kind = int(self.cand_kind[i])
        c = int(self.slot_code[self.cand_pos[i]])
        attr = self.dataset.schema[j]
        vals = attr.values
        if kind == KIND_EQ:
            return Candidate(Literal.equals(attr.name, vals[c]), j, kind, c, c, g)
        mid = (vals[c] + vals[c + 1]) / 2
        if kind == KIND_LE:
            return Candidate(Literal.leq(attr.name, mid), j, kind, 0, c, g)
        return Candidate(Literal.geq(attr.name, mid), j, kind, c + 1, len(vals) - 1, g)

    def literals(self):
        return [self.candidate(i).literal for i in range(len(self))]


def literal_mask(dataset: Dataset, literal: Literal, rows):
    """Boolean mask over ``rows`` of instances satisfying ``literal``."""
    j = dataset.attribute_index(literal.attribute)
    lo, hi, neg = literal.code_bounds(dataset.schema[j])
    col = dataset.codes[rows, j]
    hit = (col >= lo) & (col <= hi)
    if neg:
        hit = ~hit
    return hit & (col >= 0)


def used_ops(dataset: Dataset, body):
    used = {}
    for lit in body:
        used.setdefault(dataset.attribute_index(lit.attribute), set()).add(lit.op)
    return used


__all__ = ["gain", "gain_vector", "exact_argmax", "Candidate", "LiteralSpace", "literal_mask", "used_ops",
           "EQ", "LE", "GE"]
