"""Tabular datasets with exact (rational) numeric values.

A :class:`Dataset` stores every attribute as an integer code matrix indexing
into the attribute's sorted value tuple; ``-1`` marks a missing cell. Numeric
values are :class:`fractions.Fraction` so literal equality is exact.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

NOMINAL = "nominal"
NUMERIC = "numeric"
MISSING_TOKENS = frozenset({"", "?"})


class SchemaError(ValueError):
    """Attribute or label column does not match the schema."""


class CSVParseError(ValueError):
    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


@dataclass(frozen=True)
class AttributeSchema:
    name: str
    kind: str
    values: tuple

    def __post_init__(self):
        if self.kind not in (NOMINAL, NUMERIC):
            raise SchemaError(f"unknown attribute kind {self.kind!r}")
        if len(set(self.values)) != len(self.values):
            raise SchemaError(f"duplicate values for attribute {self.name!r}")

    @property
    def is_numeric(self):
        return self.kind == NUMERIC

    def code_of(self, value):
        """Index of ``value`` in ``values`` or -1 when absent."""
        i = _bisect(self.values, value, self.kind)
        if i < len(self.values) and self.values[i] == value:
            return i
        return -1


@dataclass(frozen=True)
class Instance:
    values: tuple
    label: str | None
    id: int


def _bisect(values, value, kind):
    lo, hi = 0, len(values)
    while lo < hi:
        mid = (lo + hi) // 2
        if values[mid] < value:
            lo = mid + 1
        else:
            hi = mid
    return lo


def parse_number(text):
    """Exact rational for a numeric token; raises ValueError otherwise."""
    text = text.strip()
    if not text or text.lower() in ("nan", "inf", "-inf", "infinity", "+inf"):
        raise ValueError(text)
    return Fraction(text)


def encode_column(raw: Sequence, kind: str):
    """Encode a column of parsed values (``None`` = missing).

    Returns ``(values, codes)`` with ``values`` sorted and duplicate-free.
    """
    present = {v for v in raw if v is not None}
    values = tuple(sorted(present))
    index = {v: i for i, v in enumerate(values)}
    codes = np.fromiter((-1 if v is None else index[v] for v in raw), dtype=np.int32,
                        count=len(raw))
    return values, codes


class Dataset:
    """Immutable table of instances sharing one schema.

    Parameters
    ----------
    schema : list of AttributeSchema
    label_name : str
    labels : tuple of str
        Ordered class values.
    codes : (n, d) int array
        Value indices per attribute, -1 for missing cells.
    y : (n,) int array
        Label indices into ``labels``, -1 when the instance carries no label.
    ids : (n,) int array
    split_tag : {"train", "test", "unsplit"}
    """

    def __init__(self, schema, label_name, labels, codes, y, ids, split_tag="unsplit"):
        self.schema = tuple(schema)
        self.label_name = label_name
        self.labels = tuple(labels)
        codes = np.ascontiguousarray(codes, dtype=np.int32)
        if codes.ndim != 2:
            codes = codes.reshape(len(ids), len(self.schema))
        self.codes = codes
        self.y = np.ascontiguousarray(y, dtype=np.int32)
        self.ids = np.ascontiguousarray(ids, dtype=np.int64)
        self.split_tag = split_tag
        if self.codes.shape != (len(self.ids), len(self.schema)):
            raise SchemaError("code matrix does not match schema/instance count")
        if len(self.y) != len(self.ids):
            raise SchemaError("label vector length mismatch")
        if len(np.unique(self.ids)) != len(self.ids):
            raise SchemaError("instance ids must be unique")
        for a in (self.codes, self.y, self.ids):
            a.flags.writeable = False
        self._index = {a.name: j for j, a in enumerate(self.schema)}
        self._instances = None

    # -- construction -------------------------------------------------

    @classmethod
    def from_columns(cls, names, kinds, columns, label_name, label_column,
                     ids=None, split_tag="unsplit", labels=None):
        """Build a dataset from parsed python columns (``None`` = missing)."""
        schema, code_cols = [], []
        for name, kind, col in zip(names, kinds, columns):
            values, codes = encode_column(col, kind)
            schema.append(AttributeSchema(name, kind, values))
            code_cols.append(codes)
        n = len(label_column)
        if labels is None:
            labels = tuple(sorted({v for v in label_column if v is not None}))
        lab_index = {v: i for i, v in enumerate(labels)}
        y = np.fromiter((-1 if v is None else lab_index[v] for v in label_column),
                        dtype=np.int32, count=n)
        codes = np.column_stack(code_cols) if code_cols else np.zeros((n, 0), np.int32)
        if ids is None:
            ids = np.arange(n)
        return cls(schema, label_name, labels, codes, y, ids, split_tag)

    def with_codes(self, schema, codes, rows=None, split_tag=None):
        """New dataset with replaced schema/codes (labels and ids carried over)."""
        y, ids = self.y, self.ids
        if rows is not None:
            y, ids = y[rows], ids[rows]
        return Dataset(schema, self.label_name, self.labels, codes, y, ids,
                       split_tag or self.split_tag)

    def subset(self, rows, split_tag=None) -> Dataset:
        rows = np.asarray(rows, dtype=np.int64)
        return Dataset(self.schema, self.label_name, self.labels, self.codes[rows],
                       self.y[rows], self.ids[rows], split_tag or self.split_tag)

    # -- access -------------------------------------------------------

    def __len__(self):
        return len(self.ids)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (self.schema == other.schema and self.label_name == other.label_name
                and self.labels == other.labels
                and np.array_equal(self.codes, other.codes)
                and np.array_equal(self.y, other.y)
                and np.array_equal(self.ids, other.ids))

    __hash__ = None

    def __repr__(self):
        return (f"Dataset({len(self)} instances, {len(self.schema)} attributes, "
                f"labels={list(self.labels)}, split={self.split_tag})")

    def attribute_index(self, name):
        try:
            return self._index[name]
        except KeyError:
            raise SchemaError(f"unknown attribute {name!r}") from None

    def attribute(self, name) -> AttributeSchema:
        return self.schema[self.attribute_index(name)]

    @property
    def attribute_names(self):
        return [a.name for a in self.schema]

    def column(self, name):
        """Python values of one attribute (``None`` for missing)."""
        j = self.attribute_index(name)
        vals = self.schema[j].values
        return [None if c < 0 else vals[c] for c in self.codes[:, j]]

    def label_values(self):
        return [None if c < 0 else self.labels[c] for c in self.y]

    def label_of(self, row):
        c = self.y[row]
        return None if c < 0 else self.labels[c]

    def instance(self, row) -> Instance:
        vals = tuple(None if c < 0 else a.values[c]
                     for a, c in zip(self.schema, self.codes[row]))
        return Instance(vals, self.label_of(row), int(self.ids[row]))

    @property
    def instances(self):
        if self._instances is None:
            self._instances = [self.instance(i) for i in range(len(self))]
        return self._instances

    def __iter__(self):
        return iter(self.instances)

    def rows_with_label(self, label):
        return np.flatnonzero(self.y == self.labels.index(label))

    def row_of_id(self, instance_id):
        hits = np.flatnonzero(self.ids == instance_id)
        if not len(hits):
            raise KeyError(instance_id)
        return int(hits[0])

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow([a.name for a in self.schema] + [self.label_name])
            for inst in self:
                w.writerow([format_value(v) for v in inst.values]
                           + ["" if inst.label is None else inst.label])


def format_value(v):
    """Render a cell value; exact decimals where possible, ``p/q`` otherwise."""
    if v is None:
        return ""
    if isinstance(v, Fraction):
        return format_fraction(v)
    return str(v)


def format_fraction(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    d = q.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return f"{q.numerator}/{q.denominator}"
    places = max(twos, fives)
    scaled = abs(q.numerator) * (10 ** places // q.denominator)
    sign = "-" if q < 0 else ""
    digits = str(scaled).rjust(places + 1, "0")
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


def _parse_column(raw, missing_tokens):
    cells = [None if c.strip() in missing_tokens else c.strip() for c in raw]
    distinct = {c for c in cells if c is not None}
    parsed = {}
    try:
        for c in distinct:
            parsed[c] = parse_number(c)
    except (ValueError, ZeroDivisionError):
        return NOMINAL, cells
    return NUMERIC, [None if c is None else parsed[c] for c in cells]


def load_csv(path, label_name, missing_tokens: Iterable[str] = MISSING_TOKENS) -> Dataset:
    """Load a headed, comma-separated UTF-8 file.

    An attribute is numeric when every non-missing cell parses as a number.
    Empty cells and ``?`` are missing.
    """
    missing_tokens = frozenset(missing_tokens)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CSVParseError(path, 1, "missing header row") from None
        except csv.Error as exc:
            raise CSVParseError(path, reader.line_num, str(exc)) from None
        header = [h.strip() for h in header]
        if label_name not in header:
            raise SchemaError(f"label column {label_name!r} not in header of {path}")
        rows = []
        try:
            for row in reader:
                if not row or (len(row) == 1 and not row[0].strip()):
                    continue
                if len(row) != len(header):
                    raise CSVParseError(path, reader.line_num,
                                        f"expected {len(header)} fields, got {len(row)}")
                rows.append(row)
        except csv.Error as exc:
            raise CSVParseError(path, reader.line_num, str(exc)) from None

    li = header.index(label_name)
    names = [h for j, h in enumerate(header) if j != li]
    cols = list(zip(*rows)) if rows else [() for _ in header]
    kinds, columns = [], []
    for j, h in enumerate(header):
        if j == li:
            continue
        kind, col = _parse_column(cols[j], missing_tokens)
        kinds.append(kind)
        columns.append(col)
    labels = [None if c.strip() in missing_tokens else c.strip() for c in cols[li]]
    return Dataset.from_columns(names, kinds, columns, label_name, labels)


def split(dataset: Dataset, test_fraction, seed) -> tuple[Dataset, Dataset]:
    """Uniformly shuffled train/test partition; test size is floor(n * fraction)."""
    frac = Fraction(str(test_fraction)) if isinstance(test_fraction, float) else Fraction(test_fraction)
    if not 0 < frac < 1:
        raise ValueError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    n = len(dataset)
    n_test = (n * frac.numerator) // frac.denominator
    perm = np.random.default_rng(seed).permutation(n)
    test_rows = np.sort(perm[:n_test])
    train_rows = np.sort(perm[n_test:])
    return dataset.subset(train_rows, "train"), dataset.subset(test_rows, "test")
