"""CART-style binary decision trees and their conversion into rules.

Splits minimize the weighted Gini impurity of the two children. A nominal
attribute splits into ``a = v`` versus the rest, a numeric attribute into
``a <= t`` versus ``a >= t`` at a midpoint ``t`` between observed values.
Rows with a missing value follow the right branch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .data import Dataset, Instance
from .rules import EQ, NE, Literal, MultiClassRuleModel, Rule, RuleSet, simplify_body


@dataclass(frozen=True)
class TreeNode:
    """Either a split (``left``/``right`` set) or a leaf (``label`` set)."""

    class_counts: tuple
    label: str | None = None
    attribute: str | None = None
    left_test: Literal | None = None
    right_test: Literal | None = None
    left: TreeNode | None = None
    right: TreeNode | None = None

    @property
    def is_leaf(self):
        return self.left is None

    def depth(self):
        return 0 if self.is_leaf else 1 + max(self.left.depth(), self.right.depth())

    def n_leaves(self):
        return 1 if self.is_leaf else self.left.n_leaves() + self.right.n_leaves()


class _Splitter:
    def __init__(self, dataset: Dataset):
        self.ds = dataset
        schema = dataset.schema
        sizes = np.array([len(a.values) for a in schema], dtype=np.int64)
        self.offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
        self.total = int(self.offsets[-1])
        attr, pos, numeric = [], [], []
        for j, a in enumerate(schema):
            k, off = len(a.values), int(self.offsets[j])
            n = k - 1 if a.is_numeric else k
            attr += [j] * n
            pos += range(off, off + n)
            numeric += [a.is_numeric] * n
        self.cand_attr = np.array(attr, dtype=np.int64)
        self.cand_pos = np.array(pos, dtype=np.int64)
        self.cand_numeric = np.array(numeric, dtype=bool)
        self.slot_attr = np.repeat(np.arange(len(schema)), sizes)
        self.n_labels = len(dataset.labels)

    def left_counts(self, rows_by_class):
        """(n_labels, n_candidates) counts of rows sent left by each candidate."""
        out = np.empty((self.n_labels, len(self.cand_pos)), dtype=np.int64)
        for c, rows in enumerate(rows_by_class):
            eq = kernels.value_counts(self.ds.codes, rows, self.offsets, self.total)
            cum = np.cumsum(eq)
            start = np.concatenate([[0], cum])[self.offsets[:-1]]
            le = cum - start[self.slot_attr]
            out[c] = np.where(self.cand_numeric, le[self.cand_pos], eq[self.cand_pos])
        return out

    def best(self, rows_by_class, min_leaf):
        """Index of the lowest weighted-Gini candidate, or None when no split is valid."""
        if not len(self.cand_pos):
            return None, None
        totals = np.array([len(r) for r in rows_by_class], dtype=np.int64)
        left = self.left_counts(rows_by_class)
        right = totals[:, None] - left
        nl = left.sum(axis=0)
        nr = right.sum(axis=0)
        valid = (nl >= max(min_leaf, 1)) & (nr >= max(min_leaf, 1))
        if not valid.any():
            return None, None
        with np.errstate(divide="ignore", invalid="ignore"):
            imp = (nl - (left.astype(np.float64) ** 2).sum(axis=0) / nl
                   + nr - (right.astype(np.float64) ** 2).sum(axis=0) / nr)
        imp = np.where(valid, imp, np.inf)
        i = int(np.argmin(imp))
        return i, float(imp[i])

    def tests(self, i):
        j = int(self.cand_attr[i])
        a = self.ds.schema[j]
        c = int(self.cand_pos[i] - self.offsets[j])
        if a.is_numeric:
            t = (a.values[c] + a.values[c + 1]) / 2
            return j, Literal.leq(a.name, t), Literal.geq(a.name, t), (0, c)
        left = Literal.equals(a.name, a.values[c])
        if len(a.values) == 2:
            right = Literal.equals(a.name, a.values[1 - c])
        else:
            right = Literal.not_equals(a.name, a.values[c])
        return j, left, right, (c, c)


def weighted_gini(class_counts_left, class_counts_right) -> float:
    """Sum over both children of size * Gini impurity."""
    out = 0.0
    for counts in (class_counts_left, class_counts_right):
        n = sum(counts)
        if n:
            out += n - sum(c * c for c in counts) / n
    return out


def train_tree(train: Dataset, max_depth: int | None = None, min_leaf: int = 1,
               seed: int = 0) -> TreeNode:
    """Grow a Gini tree until nodes are pure, ``max_depth`` is hit, or no split keeps ``min_leaf`` rows per side.

    Ties between equally good splits go to the first candidate in schema and
    value order, so the tree is deterministic; ``seed`` exists for interface
    symmetry with the other learners.
    """
    labelled = np.flatnonzero(train.y >= 0)
    if not len(labelled):
        raise ValueError("cannot train a tree on an empty dataset")
    splitter = _Splitter(train)
    labels = train.labels

    def build(rows, depth):
        by_class = [rows[train.y[rows] == c] for c in range(len(labels))]
        counts = tuple(len(r) for r in by_class)
        label = labels[int(np.argmax(counts))]
        pure = sum(1 for c in counts if c) <= 1
        if pure or (max_depth is not None and depth >= max_depth):
            return TreeNode(counts, label)
        i, _ = splitter.best(by_class, min_leaf)
        if i is None:
            return TreeNode(counts, label)
        j, lt, rt, (lo, hi) = splitter.tests(i)
        col = train.codes[rows, j]
        go_left = (col >= lo) & (col <= hi)
        return TreeNode(counts, None, train.schema[j].name, lt, rt,
                        build(rows[go_left], depth + 1), build(rows[~go_left], depth + 1))

    return build(labelled, 0)


def _leaf_for(tree: TreeNode, instance: Instance, index):
    node = tree
    while not node.is_leaf:
        v = instance.values[index[node.attribute]]
        node = node.left if node.left_test.holds(v) else node.right
    return node


def tree_predict(tree: TreeNode, instance: Instance, schema) -> str:
    attrs = schema.schema if isinstance(schema, Dataset) else schema
    index = {a.name: j for j, a in enumerate(attrs)}
    return _leaf_for(tree, instance, index).label


def tree_paths(tree: TreeNode):
    """(body, leaf) for every root-to-leaf path, left to right."""
    out = []

    def walk(node, body):
        if node.is_leaf:
            out.append((tuple(body), node))
            return
        walk(node.left, body + [node.left_test])
        walk(node.right, body + [node.right_test])

    walk(tree, [])
    return out


def _collapse_exclusions(body, schema):
    """Replace ``a != v1 AND a != v2 ...`` by ``a = w`` when ``w`` is the only value left."""
    values = {a.name: a.values for a in schema if not a.is_numeric}
    excluded = {}
    for lit in body:
        if lit.op == NE and lit.attribute in values:
            excluded.setdefault(lit.attribute, set()).add(lit.value)
    out, done = [], set()
    for lit in body:
        attr = lit.attribute
        if attr in excluded and not any(l.attribute == attr and l.op == EQ for l in body):
            rest = [v for v in values[attr] if v not in excluded[attr]]
            if len(rest) == 1:
                if attr not in done:
                    out.append(Literal.equals(attr, rest[0]))
                    done.add(attr)
                continue
        out.append(lit)
    return tuple(out)


def tree_to_rules(tree: TreeNode, labels, label_name="class", schema=None) -> MultiClassRuleModel:
    """One rule per leaf: the simplified path conjunction concluding the leaf's majority label.

    With ``schema`` given, exclusions that leave a single nominal value are
    written as an equality test.
    """
    per = {lab: [] for lab in labels}
    for body, leaf in tree_paths(tree):
        body = simplify_body(body)
        if schema is not None:
            body = _collapse_exclusions(body, schema)
        per[leaf.label].append(Rule(leaf.label, body))
    return MultiClassRuleModel(tuple(labels), {lab: RuleSet(lab, tuple(rs)) for lab, rs in per.items()},
                               "tree", label_name)


class TreeLearner:
    name = "tree"

    def __init__(self, max_depth=None, min_leaf=1, seed=0):
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.seed = seed
        self.tree = None

    def fit(self, dataset: Dataset) -> MultiClassRuleModel:
        self.tree = train_tree(dataset, self.max_depth, self.min_leaf, self.seed)
        return tree_to_rules(self.tree, dataset.labels, dataset.label_name, dataset.schema)
