"""Time the compiled kernels against the numpy fallback on MNIST-shaped inputs.

    python benchmarks/bench_kernels.py [--rows 4000] [--cols 784] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from rulevote import kernels

try:
    from rulevote import _kernels  # noqa: F401
    HAVE_COMPILED = True
except ImportError:
    HAVE_COMPILED = False


def inputs(rows, cols, seed=0):
    rng = np.random.default_rng(seed)
    codes = rng.integers(0, 2, size=(rows, cols), dtype=np.int32)
    sub = np.sort(rng.choice(rows, rows // 2, replace=False)).astype(np.int64)
    offsets = np.arange(0, 2 * cols, 2, dtype=np.int64)
    n_rules, n_lits = 200, 1000
    lit = dict(lit_attr=rng.integers(0, cols, n_lits).astype(np.int64),
               lit_lo=np.ones(n_lits, np.int64), lit_hi=np.ones(n_lits, np.int64),
               lit_neg=np.zeros(n_lits, np.uint8),
               lit_rule=rng.integers(0, n_rules, n_lits).astype(np.int64))
    grad = rng.standard_normal(rows)
    hess = rng.random(rows)
    return codes, sub, offsets, lit, n_rules, grad, hess


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=4000)
    ap.add_argument("--cols", type=int, default=784)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    codes, sub, offsets, lit, n_rules, grad, hess = inputs(args.rows, args.cols)
    total = 2 * args.cols
    cases = {
        "value_counts": lambda m: m.value_counts(codes, sub, offsets, total),
        "satisfied_counts": lambda m: m.satisfied_counts(codes, lit["lit_attr"], lit["lit_lo"],
                                                         lit["lit_hi"], lit["lit_neg"],
                                                         lit["lit_rule"], n_rules),
        "gradient_histogram": lambda m: m.gradient_histogram(codes, sub, grad, hess, offsets, total),
    }
    backends = ["python"] + (["cython"] if HAVE_COMPILED else [])
    start = kernels.BACKEND
    print(f"default backend: {start}; input {args.rows} x {args.cols}")
    print(f"{'kernel':<20}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for kname, fn in cases.items():
        times, outs = [], []
        for b in backends:
            kernels.use_backend(b)
            outs.append(fn(kernels))
            times.append(min(timeit.repeat(lambda: fn(kernels), number=1, repeat=args.repeat)))
        ref = outs[0] if isinstance(outs[0], tuple) else (outs[0],)
        for other in outs[1:]:
            other = other if isinstance(other, tuple) else (other,)
            assert all(np.allclose(a, b) for a, b in zip(ref, other)), f"{kname}: backends disagree"
        speed = f"{times[0] / times[-1]:.1f}x" if len(times) > 1 else "-"
        print(f"{kname:<20}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times) + f"{speed:>10}")
    kernels.use_backend(start)

if __name__ == "__main__":
    main()
