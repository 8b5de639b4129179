"""Accuracy, macro precision/recall and explainability distributions with exact fractions."""

from __future__ import annotations

import csv
import io
import statistics
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .voting import LEVEL_OF_STEP, LEVELS, VotingResult


@dataclass(frozen=True)
class EvalReport:
    accuracy: Fraction
    macro_precision: Fraction
    macro_recall: Fraction
    per_class: dict
    explainability_distribution: dict = field(default_factory=dict)
    step_distribution: dict = field(default_factory=dict)
    abstention_rate: Fraction = Fraction(0)
    no_prediction_classes: tuple = ()
    n: int = 0


def _labels_of(predictions):
    out, steps = [], []
    for p in predictions:
        if isinstance(p, VotingResult):
            out.append(p.label)
            steps.append(p.step)
        else:
            out.append(p)
            steps.append(None)
    return out, steps


def evaluate(predictions: Sequence, truth: Sequence, labels=None,
             abstentions_as_errors: bool = True) -> EvalReport:
    """Score predicted labels (``None`` = abstention) or voting results against ``truth``.

    Macro averages run over ``labels`` (default: the sorted true labels). A
    class that is never predicted gets precision 0 and is listed in
    ``no_prediction_classes``.
    """
    if len(predictions) != len(truth):
        raise ValueError(f"{len(predictions)} predictions for {len(truth)} true labels")
    pred, steps = _labels_of(predictions)
    n = len(truth)
    classes = list(labels) if labels is not None else sorted(set(truth))
    abstained = sum(1 for p in pred if p is None)
    correct = sum(1 for p, t in zip(pred, truth) if p is not None and p == t)
    denom = n if abstentions_as_errors else n - abstained
    accuracy = Fraction(correct, denom) if denom else Fraction(0)

    per_class, flagged = {}, []
    for c in classes:
        tp = sum(1 for p, t in zip(pred, truth) if p == c and t == c)
        predicted = sum(1 for p in pred if p == c)
        support = sum(1 for t in truth if t == c)
        if not predicted:
            flagged.append(c)
        precision = Fraction(tp, predicted) if predicted else Fraction(0)
        recall = Fraction(tp, support) if support else Fraction(0)
        per_class[c] = (precision, recall, support)
    k = len(classes)
    macro_p = sum((v[0] for v in per_class.values()), Fraction(0)) / k if k else Fraction(0)
    macro_r = sum((v[1] for v in per_class.values()), Fraction(0)) / k if k else Fraction(0)

    step_dist, level_dist = {}, {}
    if n and all(s is not None for s in steps):
        step_dist = {s: Fraction(sum(1 for x in steps if x == s), n) for s in (1, 2, 3, 4)}
        level_dist = {lv: sum((f for s, f in step_dist.items() if LEVEL_OF_STEP[s] == lv),
                              Fraction(0)) for lv in LEVELS}
    return EvalReport(accuracy, macro_p, macro_r, per_class, level_dist, step_dist,
                      Fraction(abstained, n) if n else Fraction(0), tuple(flagged), n)


# -- aggregation and tables ------------------------------------------------

@dataclass(frozen=True)
class Summary:
    mean: float
    std: float
    values: tuple


def summarize(values) -> Summary:
    vals = tuple(float(v) for v in values)
    std = statistics.stdev(vals) if len(vals) > 1 else 0.0
    return Summary(statistics.fmean(vals), std, vals)


def pct(x) -> str:
    return f"{100 * float(x):.2f}"


def format_table(title, header, rows) -> str:
    """Plain-text table with right-aligned columns."""
    cells = [list(map(str, header))] + [list(map(str, r)) for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = [title] if title else []
    for k, r in enumerate(cells):
        lines.append("  ".join(c.ljust(w) if i == 0 else c.rjust(w)
                               for i, (c, w) in enumerate(zip(r, widths))))
        if k == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def repeat_experiment(config, repetitions=10, base_seed=0, jobs=1):
    """Run the full pipeline once per seed and aggregate; see :mod:`rulevote.experiment`."""
    from .experiment import repeat_experiment as run
    return run(config, repetitions, base_seed, jobs)
