"""Declarative per-dataset preprocessing: rounding, thresholding, imputation.

A :class:`Recipe` is an ordered list of :class:`TransformSpec` steps. Steps
that need statistics (imputation) are fitted on a training set with
:func:`fit_recipe`; the resulting :class:`FittedRecipe` transforms train and
test identically.

Recipe files hold one step per line::

    name = diabetes
    mark_missing = Glucose,BMI ; value=0
    impute = Glucose,BMI ; strategy=median ; by_label=true
    round_nearest = Glucose ; m=10
"""

from __future__ import annotations

import math
import re
import statistics
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from .data import NOMINAL, NUMERIC, AttributeSchema, Dataset, parse_number


class RecipeError(ValueError):
    pass


class RecipeTypeError(RecipeError, TypeError):
    pass


class ImputeError(RecipeError):
    pass


OPS = ("round_decimal", "round_nearest", "round_conditional", "cast_integer",
       "group_above", "binarize", "impute", "drop", "mark_missing", "drop_rows")


@dataclass(frozen=True)
class TransformSpec:
    selector: str
    op: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.op not in OPS:
            raise RecipeError(f"unknown transform {self.op!r}")


@dataclass(frozen=True)
class Recipe:
    name: str
    steps: tuple = ()


# -- exact rounding ----------------------------------------------------

def round_half_away(q: Fraction, step: Fraction) -> Fraction:
    """Nearest multiple of ``step``; halves go away from zero."""
    n = abs(q) / step
    k = math.floor(n + Fraction(1, 2))
    return (k if q >= 0 else -k) * step


def round_decimal(q, k):
    return round_half_away(q, Fraction(1, 10 ** int(k)))


def round_nearest(q, m):
    return round_half_away(q, Fraction(m))


def cast_integer(q):
    return Fraction(math.trunc(q))


def parse_ranges(text):
    """``"10..100:10, 100..:100"`` -> [(10, 100, 10), (100, None, 100)].

    Bounds are inclusive; the first matching range wins.
    """
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        span, gran = part.rsplit(":", 1)
        lo, hi = span.split("..")
        out.append((parse_number(lo) if lo.strip() else None,
                    parse_number(hi) if hi.strip() else None,
                    parse_number(gran)))
    if not out:
        raise RecipeError(f"empty range list {text!r}")
    return out


def round_conditional(q, ranges):
    for lo, hi, gran in ranges:
        if (lo is None or q >= lo) and (hi is None or q <= hi):
            return round_half_away(q, gran)
    return q


# -- selectors ---------------------------------------------------------

def resolve(selector: str, dataset: Dataset):
    """Attribute indices a selector picks out.

    ``*`` all, ``numeric`` / ``nominal`` by kind, ``re:<regex>`` by name,
    ``distinct>N`` by number of distinct values, otherwise a comma-separated
    list of names (every name must exist).
    """
    sel = selector.strip()
    schema = dataset.schema
    if sel == "*":
        idx = list(range(len(schema)))
    elif sel in (NUMERIC, NOMINAL):
        idx = [j for j, a in enumerate(schema) if a.kind == sel]
    elif sel.startswith("re:"):
        pat = re.compile(sel[3:])
        idx = [j for j, a in enumerate(schema) if pat.search(a.name)]
    elif sel.startswith("distinct>"):
        n = int(sel[len("distinct>"):])
        idx = [j for j, a in enumerate(schema) if len(a.values) > n]
    else:
        names = [s.strip() for s in sel.split(",") if s.strip()]
        idx = []
        for name in names:
            if name not in dataset.attribute_names:
                raise RecipeError(f"selector {selector!r}: no attribute {name!r}")
            idx.append(dataset.attribute_index(name))
    if not idx:
        raise RecipeError(f"selector {selector!r} matches no attribute")
    return idx


# -- column helpers ----------------------------------------------------

def _map_values(attr: AttributeSchema, codes, fn):
    mapped = [fn(v) for v in attr.values]
    new_values = tuple(sorted(set(mapped)))
    index = {v: i for i, v in enumerate(new_values)}
    lut = np.array([index[v] for v in mapped] + [-1], dtype=np.int32)
    # code -1 indexes the trailing -1 of the lookup table
    return AttributeSchema(attr.name, attr.kind, new_values), lut[codes]


def _fill(attr: AttributeSchema, codes, fill_per_row):
    """Replace missing cells with ``fill_per_row[i]`` values."""
    miss = codes < 0
    if not miss.any():
        return attr, codes
    filled = set(attr.values)
    filled.update(fill_per_row[i] for i in np.flatnonzero(miss))
    new_values = tuple(sorted(filled))
    index = {v: i for i, v in enumerate(new_values)}
    lut = np.array([index[v] for v in attr.values] + [-1], dtype=np.int32)
    out = lut[codes]
    for i in np.flatnonzero(miss):
        out[i] = index[fill_per_row[i]]
    return AttributeSchema(attr.name, attr.kind, new_values), out


def _require_numeric(attr, op):
    if attr.kind != NUMERIC:
        raise RecipeTypeError(f"{op} needs a numeric attribute, {attr.name!r} is nominal")


def _statistic(values, strategy, attr_name):
    if not values:
        raise ImputeError(f"cannot impute {attr_name!r}: every value is missing")
    if strategy == "mean":
        return sum(values, Fraction(0)) / len(values)
    if strategy == "median":
        return statistics.median(values)
    if strategy == "mode":
        counts = Counter(values)
        best = max(counts.values())
        return min(v for v, c in counts.items() if c == best)
    raise RecipeError(f"unknown impute strategy {strategy!r}")


def _parse_bool(v):
    if isinstance(v, bool):
        return v
    return str(v).strip().lower() in ("1", "true", "yes", "on")


# -- fitting / applying --------------------------------------------------

@dataclass
class _ImputeStats:
    overall: object
    per_label: dict


class FittedRecipe:
    """A recipe whose imputation statistics come from one training set."""

    def __init__(self, recipe: Recipe, stats: list):
        self.recipe = recipe
        self._stats = stats

    def transform(self, dataset: Dataset) -> Dataset:
        ds = dataset
        for step, stats in zip(self.recipe.steps, self._stats):
            ds = _apply_step(ds, step, stats)
        return ds


def fit_recipe(recipe: Recipe, train: Dataset) -> FittedRecipe:
    stats_list = []
    ds = train
    for step in recipe.steps:
        stats = _fit_step(ds, step) if step.op == "impute" else None
        stats_list.append(stats)
        ds = _apply_step(ds, step, stats)
    return FittedRecipe(recipe, stats_list)


def apply_recipe(dataset: Dataset, recipe: Recipe) -> Dataset:
    """Apply ``recipe`` with statistics fitted on ``dataset`` itself."""
    return fit_recipe(recipe, dataset).transform(dataset)


def _fit_step(ds: Dataset, step: TransformSpec):
    strategy = step.params.get("strategy", "mean")
    by_label = _parse_bool(step.params.get("by_label", False))
    out = {}
    for j in resolve(step.selector, ds):
        attr = ds.schema[j]
        if strategy in ("mean", "median"):
            _require_numeric(attr, f"impute({strategy})")
        col = ds.codes[:, j]
        present = col >= 0
        overall = _statistic([attr.values[c] for c in col[present]], strategy, attr.name)
        per_label = {}
        if by_label:
            for k, lab in enumerate(ds.labels):
                sel = present & (ds.y == k)
                if sel.any():
                    per_label[lab] = _statistic([attr.values[c] for c in col[sel]],
                                                strategy, attr.name)
        out[attr.name] = _ImputeStats(overall, per_label)
    return out


def _apply_step(ds: Dataset, step: TransformSpec, stats=None) -> Dataset:
    op, p = step.op, step.params
    if op == "drop_rows":
        limit = int(p.get("max_missing", 0))
        keep = np.flatnonzero((ds.codes < 0).sum(axis=1) <= limit)
        return ds.subset(keep)

    idx = resolve(step.selector, ds)
    if op == "drop":
        keep = [j for j in range(len(ds.schema)) if j not in set(idx)]
        return ds.with_codes([ds.schema[j] for j in keep], ds.codes[:, keep])

    schema = list(ds.schema)
    codes = np.array(ds.codes)
    labels = ds.label_values() if op == "impute" else None
    for j in idx:
        attr = schema[j]
        if op == "impute":
            st = stats[attr.name]
            fills = [st.per_label.get(lab, st.overall) for lab in labels]
            attr, col = _fill(attr, codes[:, j], fills)
        elif op == "mark_missing":
            raw = p.get("value", "0")
            target = parse_number(raw) if attr.kind == NUMERIC else raw
            col = codes[:, j]
            c = attr.code_of(target)
            if c >= 0:
                keep = tuple(v for v in attr.values if v != target)
                lut = np.array([i - (i > c) for i in range(len(attr.values))] + [-1],
                               dtype=np.int32)
                lut[c] = -1
                attr, col = AttributeSchema(attr.name, attr.kind, keep), lut[col]
        else:
            _require_numeric(attr, op)
            fn = _value_fn(op, p)
            attr, col = _map_values(attr, codes[:, j], fn)
        schema[j] = attr
        codes[:, j] = col
    return ds.with_codes(schema, codes)


def _value_fn(op, p):
    if op == "round_decimal":
        k = int(p.get("k", 1))
        return lambda v: round_decimal(v, k)
    if op == "round_nearest":
        m = parse_number(str(p.get("m", 10)))
        return lambda v: round_nearest(v, m)
    if op == "round_conditional":
        ranges = parse_ranges(p["ranges"]) if isinstance(p.get("ranges"), str) else p["ranges"]
        return lambda v: round_conditional(v, ranges)
    if op == "cast_integer":
        return cast_integer
    if op == "group_above":
        t = parse_number(str(p["threshold"]))
        to = parse_number(str(p["to"])) if "to" in p else t + 1
        return lambda v: to if v > t else v
    if op == "binarize":
        t = parse_number(str(p.get("threshold", "0.5")))
        return lambda v: Fraction(1) if v > t else Fraction(0)
    raise RecipeError(f"unhandled transform {op!r}")


def impute(dataset: Dataset, attribute: str, strategy: str) -> Dataset:
    """Fill missing cells of one attribute with a statistic of its present values."""
    return apply_recipe(dataset, Recipe("impute", (TransformSpec(attribute, "impute",
                                                                 {"strategy": strategy}),)))


# -- recipe files --------------------------------------------------------

def parse_recipe(text: str, name: str = "recipe") -> Recipe:
    steps = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise RecipeError(f"line {lineno}: expected 'op = selector ; key=value'")
        key, rest = (s.strip() for s in line.split("=", 1))
        if key == "name":
            name = rest
            continue
        parts = [s.strip() for s in rest.split(";")]
        params = {}
        for kv in parts[1:]:
            if not kv:
                continue
            if "=" not in kv:
                raise RecipeError(f"line {lineno}: bad parameter {kv!r}")
            k, v = kv.split("=", 1)
            params[k.strip()] = v.strip()
        try:
            steps.append(TransformSpec(parts[0], key, params))
        except RecipeError as exc:
            raise RecipeError(f"line {lineno}: {exc}") from None
    return Recipe(name, tuple(steps))


def format_recipe(recipe: Recipe) -> str:
    lines = [f"name = {recipe.name}"]
    for s in recipe.steps:
        params = "".join(f" ; {k}={v}" for k, v in s.params.items())
        lines.append(f"{s.op} = {s.selector}{params}")
    return "\n".join(lines) + "\n"


def builtin_recipes():
    pkg = resources.files("rulevote") / "recipes"
    return sorted(p.name[:-len(".recipe")] for p in pkg.iterdir()
                  if p.name.endswith(".recipe"))


def load_recipe(name_or_path) -> Recipe:
    """Load a recipe file, or a shipped recipe by name (e.g. ``"diabetes"``)."""
    path = Path(name_or_path)
    if path.exists():
        return parse_recipe(path.read_text(encoding="utf-8"), path.stem)
    res = resources.files("rulevote") / "recipes" / f"{name_or_path}.recipe"
    if not res.is_file():
        raise RecipeError(f"no recipe file or builtin named {name_or_path!r}")
    return parse_recipe(res.read_text(encoding="utf-8"), str(name_or_path))
