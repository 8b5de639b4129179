"""Black-box deciders consulted by the voting ensemble when rule learners disagree.

:class:`GbtDecider` is a one-vs-rest gradient-boosted tree ensemble with
logistic loss and histogram split finding, :class:`TreeDecider` wraps a
single Gini tree, and :class:`OracleDecider` answers with stored true labels.
"""

from __future__ import annotations

import json
import math
from abc import ABC, abstractmethod
from bisect import bisect_left
from dataclasses import dataclass

import numpy as np

from . import kernels
from .data import Dataset, Instance, format_fraction, parse_number
from .tree import train_tree, tree_predict

GBT_FORMAT = "rulevote-gbt"
GBT_VERSION = 1


class Decider(ABC):
    """Classifier interface: ``train`` on a dataset, then ``predict`` labels."""

    name = "decider"

    @abstractmethod
    def train(self, dataset: Dataset) -> Decider:
        ...

    @abstractmethod
    def predict(self, instance: Instance, schema=None):
        ...

    def predict_many(self, dataset: Dataset, rows=None) -> list:
        rows = range(len(dataset)) if rows is None else rows
        return [self.predict(dataset.instance(i), dataset) for i in rows]


class OracleDecider(Decider):
    """Returns the true label stored for each instance id."""

    name = "oracle"

    def __init__(self, labels_by_id=None):
        self.labels_by_id = dict(labels_by_id or {})

    @classmethod
    def from_dataset(cls, dataset: Dataset):
        return cls({int(i): dataset.label_of(r) for r, i in enumerate(dataset.ids)})

    def train(self, dataset: Dataset):
        self.labels_by_id.update(OracleDecider.from_dataset(dataset).labels_by_id)
        return self

    def predict(self, instance: Instance, schema=None):
        try:
            return self.labels_by_id[instance.id]
        except KeyError:
            raise KeyError(f"oracle holds no label for instance id {instance.id}") from None

    def predict_many(self, dataset, rows=None):
        rows = range(len(dataset)) if rows is None else rows
        out = []
        for r in rows:
            i = int(dataset.ids[r])
            if i not in self.labels_by_id:
                raise KeyError(f"oracle holds no label for instance id {i}")
            out.append(self.labels_by_id[i])
        return out


class TreeDecider(Decider):
    name = "tree"

    def __init__(self, max_depth=None, min_leaf=1, seed=0):
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.seed = seed
        self.tree = None
        self.schema = None

    def train(self, dataset):
        self.tree = train_tree(dataset, self.max_depth, self.min_leaf, self.seed)
        self.schema = dataset.schema
        return self

    def predict(self, instance, schema=None):
        return tree_predict(self.tree, instance, schema if schema is not None else self.schema)


# -- gradient boosting -------------------------------------------------------

@dataclass(frozen=True)
class _Feature:
    """A numeric attribute binned at midpoints, or an indicator for one nominal value."""

    attribute: str
    kind: str                 # "numeric" | "indicator"
    thresholds: tuple = ()    # numeric: sorted midpoints between training values
    value: object = None      # indicator: the nominal value

    @property
    def n_bins(self):
        return len(self.thresholds) + 1 if self.kind == "numeric" else 2

    def bin_of(self, v):
        if v is None:
            return 0
        if self.kind == "numeric":
            return bisect_left(self.thresholds, v)
        return int(v == self.value)

    def to_json(self):
        if self.kind == "numeric":
            return {"attribute": self.attribute, "kind": "numeric",
                    "thresholds": [format_fraction(t) for t in self.thresholds]}
        return {"attribute": self.attribute, "kind": "indicator", "value": self.value}

    @classmethod
    def from_json(cls, d):
        if d["kind"] == "numeric":
            return cls(d["attribute"], "numeric", tuple(parse_number(t) for t in d["thresholds"]))
        return cls(d["attribute"], "indicator", (), d["value"])


def _features_for(dataset: Dataset):
    feats = []
    for a in dataset.schema:
        if a.is_numeric:
            v = a.values
            feats.append(_Feature(a.name, "numeric", tuple((v[i] + v[i + 1]) / 2
                                                           for i in range(len(v) - 1))))
        else:
            feats.extend(_Feature(a.name, "indicator", (), val) for val in a.values)
    return feats


def _bin_matrix(features, dataset: Dataset):
    """(n, n_features) bin indices of ``dataset`` under ``features``."""
    out = np.zeros((len(dataset), len(features)), dtype=np.int32)
    for f, feat in enumerate(features):
        j = dataset.attribute_index(feat.attribute)
        vals = dataset.schema[j].values
        lut = np.array([feat.bin_of(v) for v in vals] + [feat.bin_of(None)], dtype=np.int32)
        out[:, f] = lut[dataset.codes[:, j]]
    return out


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def _logloss(y, f):
    # log(1 + exp(-f)) for y=1, log(1 + exp(f)) for y=0, numerically stable
    s = np.where(y > 0, -f, f)
    return float(np.sum(np.logaddexp(0.0, s)))


class GbtDecider(Decider):
    """One-vs-rest logistic gradient boosting over depth-limited regression trees.

    Each round fits, for every label, one tree to the Newton step of the
    logistic loss: leaf value ``-lr * G / (H + reg_lambda)``. Split candidates
    are the bins of each feature (numeric midpoints; one indicator per
    nominal value). Training is deterministic; ``seed`` is recorded for
    provenance only.
    """

    name = "gbt"

    def __init__(self, rounds=100, depth=3, learning_rate=0.1, reg_lambda=1.0,
                 min_child_weight=1.0, seed=0):
        self.rounds = int(rounds)
        self.depth = int(depth)
        self.learning_rate = float(learning_rate)
        self.reg_lambda = float(reg_lambda)
        self.min_child_weight = float(min_child_weight)
        self.seed = seed
        self.labels = ()
        self.label_name = None
        self.features = []
        self.base_scores = []
        self.trees = []          # trees[round][label] -> nested dict
        self.loss_trace = []
        self.degenerate = False

    # -- training ------------------------------------------------------

    def train(self, dataset: Dataset):
        rows = np.flatnonzero(dataset.y >= 0)
        if not len(rows):
            raise ValueError("cannot train a decider on unlabelled data")
        self.labels = dataset.labels
        self.label_name = dataset.label_name
        self.features = _features_for(dataset)
        bins = _bin_matrix(self.features, dataset)[rows]
        y_idx = dataset.y[rows]
        n, K = len(rows), len(self.labels)
        sizes = np.array([f.n_bins for f in self.features], dtype=np.int64)
        offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
        present = np.bincount(y_idx, minlength=K)
        self.degenerate = int((present > 0).sum()) < 2
        prior = np.clip(present / n, 1e-6, 1 - 1e-6)
        self.base_scores = [float(math.log(p / (1 - p))) for p in prior]
        Y = np.stack([(y_idx == k).astype(np.float64) for k in range(K)])
        F = np.array(self.base_scores)[:, None] * np.ones((K, n))
        self.trees = []
        self.loss_trace = [sum(_logloss(Y[k], F[k]) for k in range(K))]
        all_rows = np.arange(n, dtype=np.int64)
        for _ in range(self.rounds if not self.degenerate else 0):
            round_trees = []
            for k in range(K):
                p = _sigmoid(F[k])
                g = p - Y[k]
                h = np.maximum(p * (1 - p), 1e-16)
                tree = self._build(bins, all_rows, g, h, offsets, 0, None)
                F[k] += self._apply(tree, bins)
                round_trees.append(tree)
            self.trees.append(round_trees)
            self.loss_trace.append(sum(_logloss(Y[k], F[k]) for k in range(K)))
        return self

    def _leaf(self, G, H):
        return {"leaf": float(-self.learning_rate * G / (H + self.reg_lambda))}

    def _build(self, bins, rows, g, h, offsets, depth, hist):
        if hist is None:
            hist = kernels.gradient_histogram(bins, rows, g, h, offsets, int(offsets[-1]))
        hg, hh = hist
        G = float(g[rows].sum())
        H = float(h[rows].sum())
        if depth >= self.depth or len(rows) < 2:
            return self._leaf(G, H)
        best = self._best_split(hg, hh, offsets, G, H)
        if best is None:
            return self._leaf(G, H)
        f, t = best
        go_left = bins[rows, f] <= t
        left_rows, right_rows = rows[go_left], rows[~go_left]
        # histogram of the smaller child; the sibling's is the difference
        small_left = len(left_rows) <= len(right_rows)
        small = left_rows if small_left else right_rows
        sg, sh = kernels.gradient_histogram(bins, small, g, h, offsets, int(offsets[-1]))
        other = (hg - sg, hh - sh)
        lh, rh = ((sg, sh), other) if small_left else (other, (sg, sh))
        return {"feature": int(f), "bin": int(t),
                "left": self._build(bins, left_rows, g, h, offsets, depth + 1, lh),
                "right": self._build(bins, right_rows, g, h, offsets, depth + 1, rh)}

    def _best_split(self, hg, hh, offsets, G, H):
        """(feature, bin) maximizing the regularized gain, or None when nothing improves."""
        slot, feat, start = self._candidates(offsets)
        if not len(slot):
            return None
        lam = self.reg_lambda
        cg, ch = np.cumsum(hg), np.cumsum(hh)
        base_g = np.concatenate([[0.0], cg])[start]
        base_h = np.concatenate([[0.0], ch])[start]
        gl = cg[slot] - base_g
        hl = ch[slot] - base_h
        gr, hr = G - gl, H - hl
        ok = (hl >= self.min_child_weight) & (hr >= self.min_child_weight)
        with np.errstate(invalid="ignore"):
            gain = gl * gl / (hl + lam) + gr * gr / (hr + lam) - G * G / (H + lam)
        gain = np.where(ok, gain, -np.inf)
        i = int(np.argmax(gain))
        if not gain[i] > 1e-12:
            return None
        return int(feat[i]), int(slot[i] - offsets[feat[i]])

    def _candidates(self, offsets):
        key = offsets.tobytes()
        if getattr(self, "_cand_key", None) != key:
            sizes = np.diff(offsets)
            feat = np.repeat(np.arange(len(sizes)), np.maximum(sizes - 1, 0))
            slot = np.concatenate([np.arange(offsets[f], offsets[f + 1] - 1)
                                   for f in range(len(sizes))] or [np.zeros(0, np.int64)])
            self._cand = (slot.astype(np.int64), feat, offsets[feat])
            self._cand_key = key
        return self._cand

    @staticmethod
    def _apply(tree, bins):
        out = np.empty(len(bins))
        stack = [(tree, np.arange(len(bins)))]
        while stack:
            node, idx = stack.pop()
            if "leaf" in node:
                out[idx] = node["leaf"]
                continue
            left = bins[idx, node["feature"]] <= node["bin"]
            stack.append((node["left"], idx[left]))
            stack.append((node["right"], idx[~left]))
        return out

    # -- prediction ----------------------------------------------------

    def decision_scores(self, dataset: Dataset, rows=None):
        bins = _bin_matrix(self.features, dataset)
        if rows is not None:
            bins = bins[np.asarray(rows, dtype=np.int64)]
        K = len(self.labels)
        F = np.array(self.base_scores)[:, None] * np.ones((K, len(bins)))
        for round_trees in self.trees:
            for k, tree in enumerate(round_trees):
                F[k] += self._apply(tree, bins)
        return F

    def predict_many(self, dataset: Dataset, rows=None):
        F = self.decision_scores(dataset, rows)
        return [self.labels[int(k)] for k in np.argmax(F, axis=0)]

    def predict(self, instance: Instance, schema=None):
        if schema is None:
            raise ValueError("GbtDecider.predict needs the instance's schema")
        attrs = schema.schema if isinstance(schema, Dataset) else tuple(schema)
        index = {a.name: j for j, a in enumerate(attrs)}
        b = np.array([[feat.bin_of(instance.values[index[feat.attribute]])
                       for feat in self.features]], dtype=np.int32)
        scores = [self.base_scores[k] + sum(float(self._apply(rt[k], b)[0]) for rt in self.trees)
                  for k in range(len(self.labels))]
        return self.labels[int(np.argmax(scores))]

    # -- persistence ---------------------------------------------------

    def to_json(self) -> str:
        def node_json(node):
            if "leaf" in node:
                return node
            feat = self.features[node["feature"]]
            out = {"feature": node["feature"], "bin": node["bin"]}
            if feat.kind == "numeric":
                out["threshold"] = format_fraction(feat.thresholds[node["bin"]])
            out["left"] = node_json(node["left"])
            out["right"] = node_json(node["right"])
            return out

        doc = {
            "format": GBT_FORMAT, "version": GBT_VERSION,
            "params": {"rounds": self.rounds, "depth": self.depth,
                       "learning_rate": self.learning_rate, "reg_lambda": self.reg_lambda,
                       "min_child_weight": self.min_child_weight, "seed": self.seed},
            "labels": list(self.labels), "label_name": self.label_name,
            "degenerate": self.degenerate,
            "features": [f.to_json() for f in self.features],
            "base_scores": self.base_scores,
            "trees": [[node_json(t) for t in rt] for rt in self.trees],
        }
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str) -> GbtDecider:
        doc = json.loads(text)
        if doc.get("format") != GBT_FORMAT:
            raise ValueError("not a gradient-boosting model dump")
        if doc.get("version") != GBT_VERSION:
            raise ValueError(f"unsupported model version {doc.get('version')}")
        m = cls(**doc["params"])
        m.labels = tuple(doc["labels"])
        m.label_name = doc["label_name"]
        m.degenerate = doc["degenerate"]
        m.features = [_Feature.from_json(f) for f in doc["features"]]
        m.base_scores = list(doc["base_scores"])

        def strip(node):
            if "leaf" in node:
                return {"leaf": float(node["leaf"])}
            return {"feature": node["feature"], "bin": node["bin"],
                    "left": strip(node["left"]), "right": strip(node["right"])}

        m.trees = [[strip(t) for t in rt] for rt in doc["trees"]]
        return m

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def gbt_train(train: Dataset, rounds=100, depth=3, lr=0.1, seed=0) -> GbtDecider:
    return GbtDecider(rounds, depth, lr, seed=seed).train(train)


def make_decider(kind: str, **params) -> Decider:
    kinds = {"gbt": GbtDecider, "tree": TreeDecider, "oracle": OracleDecider}
    try:
        return kinds[kind](**params)
    except KeyError:
        raise ValueError(f"unknown decider {kind!r}") from None


__all__ = ["Decider", "OracleDecider", "TreeDecider", "GbtDecider", "gbt_train",
           "make_decider"]
