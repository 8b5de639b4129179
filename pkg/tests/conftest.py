import os
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from rulevote.data import NOMINAL, NUMERIC, Dataset, load_csv

HERE = Path(__file__).parent
REPO = HERE.parent


@pytest.fixture
def weather():
    return load_csv(HERE / "data" / "weather.csv", "Play")


def bench_data_dir():
    env = os.environ.get("RULEVOTE_DATA")
    return Path(env) if env else REPO / "data"


def require_data(name):
    path = bench_data_dir() / name
    if not path.exists():
        pytest.skip(f"{path} not found; run scripts/fetch_data.py or set RULEVOTE_DATA")
    return path


def nominal_dataset(rows, labels, names=None):
    """Dataset from a list of value tuples (strings) and a parallel label list."""
    d = len(rows[0]) if rows else len(names)
    names = names or [f"a{j}" for j in range(d)]
    cols = [[r[j] for r in rows] for j in range(d)]
    return Dataset.from_columns(names, [NOMINAL] * d, cols, "class", list(labels))


def numeric_dataset(rows, labels, names=None):
    d = len(rows[0])
    names = names or [f"x{j}" for j in range(d)]
    cols = [[None if r[j] is None else Fraction(r[j]) for r in rows] for j in range(d)]
    return Dataset.from_columns(names, [NUMERIC] * d, cols, "class", list(labels))


def random_nominal(rng, n_rows, n_attrs, n_values=3, n_labels=2):
    rows = [tuple(f"v{rng.integers(n_values)}" for _ in range(n_attrs)) for _ in range(n_rows)]
    labels = [f"c{rng.integers(n_labels)}" for _ in range(n_rows)]
    return nominal_dataset(rows, labels)


def random_numeric(rng, n_rows, n_attrs, n_values=5, n_labels=2):
    rows = [tuple(int(rng.integers(n_values)) for _ in range(n_attrs)) for _ in range(n_rows)]
    labels = [f"c{rng.integers(n_labels)}" for _ in range(n_rows)]
    return numeric_dataset(rows, labels)


def pos_neg(dataset, label):
    k = dataset.labels.index(label)
    return np.flatnonzero(dataset.y == k), np.flatnonzero(dataset.y != k)
