"""Pure numpy implementations of the counting kernels."""

import numpy as np


def value_counts(codes, rows, offsets, total):
    """Count occurrences of every (attribute, value code) pair over ``rows``.

    ``codes`` holds value indices per attribute (-1 marks a missing cell);
    slot ``offsets[j] + c`` receives the count of code ``c`` in column ``j``.
    Entries of ``offsets`` past the last column are ignored.
    """
    sub = codes[rows]
    flat = sub + offsets[np.newaxis, :sub.shape[1]]
    flat = flat[sub >= 0]
    return np.bincount(flat, minlength=total).astype(np.int64)


def satisfied_counts(codes, lit_attr, lit_lo, lit_hi, lit_neg, lit_rule, n_rules):
    """Number of satisfied literals per (instance, rule).

    A literal holds when its attribute code lies in ``[lo, hi]`` (inverted when
    ``neg`` is set); missing codes never satisfy a literal.
    """
    n = codes.shape[0]
    out = np.zeros((n, n_rules), dtype=np.int32)
    for k in range(lit_attr.shape[0]):
        col = codes[:, lit_attr[k]]
        hit = (col >= lit_lo[k]) & (col <= lit_hi[k])
        if lit_neg[k]:
            hit = ~hit
        hit &= col >= 0
        out[:, lit_rule[k]] += hit
    return out


def gradient_histogram(bins, rows, grad, hess, offsets, total):
    """Sum gradients and hessians per (feature, bin) over ``rows``."""
    sub = bins[rows]
    flat = (sub + offsets[np.newaxis, :sub.shape[1]]).ravel()
    g = np.repeat(grad[rows], sub.shape[1])
    h = np.repeat(hess[rows], sub.shape[1])
    return (np.bincount(flat, weights=g, minlength=total),
            np.bincount(flat, weights=h, minlength=total))
