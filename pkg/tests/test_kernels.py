import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rulevote import _kernels_py, kernels
from rulevote.foil import FoilLearner
from rulevote.decider import GbtDecider
from rulevote.ruleio import serialize_rules
from rulevote.tree import TreeLearner

from conftest import random_nominal

try:
    from rulevote import _kernels as compiled
except ImportError:
    compiled = None

needs_compiled = pytest.mark.skipif(compiled is None, reason="extension not built")


def slots(rng, n_cols):
    sizes = rng.integers(1, 5, n_cols)
    offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.int64)
    return sizes, offsets, int(sizes.sum())


def coded(rng, n_rows, sizes):
    cols = [rng.integers(-1, s, n_rows) for s in sizes]
    return np.stack(cols, axis=1).astype(np.int32)


def naive_value_counts(codes, rows, offsets, total):
    out = np.zeros(total, dtype=np.int64)
    for r in rows:
        for j, c in enumerate(codes[r]):
            if c >= 0:
                out[offsets[j] + c] += 1
    return out


class TestFallback:
    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_value_counts_matches_loop(self, seed):
        rng = np.random.default_rng(seed)
        sizes, offsets, total = slots(rng, int(rng.integers(1, 6)))
        codes = coded(rng, int(rng.integers(1, 30)), sizes)
        rows = rng.choice(len(codes), int(rng.integers(0, len(codes) + 1)), replace=False)
        np.testing.assert_array_equal(_kernels_py.value_counts(codes, rows.astype(np.int64), offsets, total),
                                      naive_value_counts(codes, rows, offsets, total))

    def test_satisfied_counts_missing_and_negation(self):
        codes = np.array([[0, 1], [-1, 2], [1, -1]], dtype=np.int32)
        out = _kernels_py.satisfied_counts(
            codes, np.array([0, 1, 0]), np.array([0, 1, 1]), np.array([0, 2, 1]),
            np.array([0, 0, 1], dtype=np.uint8), np.array([0, 0, 1]), 2)
        np.testing.assert_array_equal(out, [[2, 1], [1, 0], [0, 0]])


@needs_compiled
class TestBackendsAgree:
    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_kernels(self, seed):
        rng = np.random.default_rng(seed)
        n_cols = int(rng.integers(1, 8))
        sizes, offsets, total = slots(rng, n_cols)
        codes = coded(rng, int(rng.integers(1, 40)), sizes)
        rows = np.sort(rng.choice(len(codes), int(rng.integers(0, len(codes) + 1)),
                                  replace=False)).astype(np.int64)
        np.testing.assert_array_equal(compiled.value_counts(codes, rows, offsets, total),
                                      _kernels_py.value_counts(codes, rows, offsets, total))

        n_lits, n_rules = int(rng.integers(0, 10)), int(rng.integers(1, 4))
        attr = rng.integers(0, n_cols, n_lits).astype(np.int64)
        lo = np.array([rng.integers(0, sizes[a]) for a in attr], dtype=np.int64)
        hi = np.array([rng.integers(l, sizes[a]) for l, a in zip(lo, attr)], dtype=np.int64)
        neg = rng.integers(0, 2, n_lits).astype(np.uint8)
        rule = rng.integers(0, n_rules, n_lits).astype(np.int64)
        np.testing.assert_array_equal(
            compiled.satisfied_counts(codes, attr, lo, hi, neg, rule, n_rules),
            _kernels_py.satisfied_counts(codes, attr, lo, hi, neg, rule, n_rules))

        bins = np.maximum(codes, 0)
        grad, hess = rng.standard_normal(len(codes)), rng.random(len(codes))
        for a, b in zip(compiled.gradient_histogram(bins, rows, grad, hess, offsets, total),
                        _kernels_py.gradient_histogram(bins, rows, grad, hess, offsets, total)):
            np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)

    def test_learners_identical_under_both_backends(self):
        ds = random_nominal(np.random.default_rng(5), 80, 5, n_values=4, n_labels=3)
        outputs = []
        previous = kernels.use_backend("python")
        try:
            for name in ("python", "cython"):
                kernels.use_backend(name)
                outputs.append((serialize_rules(FoilLearner().fit(ds)),
                                serialize_rules(TreeLearner().fit(ds)),
                                GbtDecider(rounds=5).train(ds).predict_many(ds)))
        finally:
            kernels.use_backend(previous)
        assert outputs[0] == outputs[1]


class TestSelection:
    def test_default_prefers_compiled(self):
        forced = bool(os.environ.get("RULEVOTE_PURE_PYTHON"))
        assert kernels.BACKEND == ("cython" if compiled is not None and not forced else "python")

    def test_environment_forces_fallback(self):
        code = "from rulevote import kernels; print(kernels.BACKEND)"
        out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                             env={"RULEVOTE_PURE_PYTHON": "1", "PATH": ""}, check=True)
        assert out.stdout.strip() == "python"

    def test_unknown_backend(self):
        with pytest.raises(ValueError):
            kernels.use_backend("fortran")
