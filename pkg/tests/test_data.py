from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rulevote.data import (CSVParseError, Dataset, SchemaError, format_fraction, load_csv,
                           parse_number, split)

from conftest import random_nominal


def write(tmp_path, text, name="t.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


class TestLoadCsv:
    def test_weather_shape(self, weather):
        assert len(weather) == 14
        assert len(weather.schema) == 4
        assert weather.labels == ("No", "Yes")
        assert all(not a.is_numeric for a in weather.schema)
        assert weather.attribute("Outlook").values == ("Overcast", "Rainy", "Sunny")

    def test_header_only(self, tmp_path):
        ds = load_csv(write(tmp_path, "a,b,label\n"), "label")
        assert len(ds) == 0
        assert len(ds.schema) == 2
        assert ds.labels == ()

    def test_numeric_values_sorted_and_deduplicated(self, tmp_path):
        ds = load_csv(write(tmp_path, "x,y\n2,a\n1,a\n2,b\n3,b\n"), "y")
        attr = ds.attribute("x")
        assert attr.is_numeric
        assert attr.values == (1, 2, 3)

    def test_exact_rationals(self, tmp_path):
        ds = load_csv(write(tmp_path, "x,y\n0.1,a\n0.25,b\n"), "y")
        assert ds.attribute("x").values == (Fraction(1, 10), Fraction(1, 4))

    def test_mixed_column_is_nominal(self, tmp_path):
        ds = load_csv(write(tmp_path, "x,y\n1,a\nfoo,b\n"), "y")
        assert not ds.attribute("x").is_numeric

    def test_missing_markers(self, tmp_path):
        ds = load_csv(write(tmp_path, "x,z,y\n1,?,a\n,b,a\n3,c,b\n"), "y")
        assert ds.codes[1, 0] == -1
        assert ds.codes[0, 1] == -1
        assert ds.instance(1).values[0] is None

    def test_bad_row_names_line(self, tmp_path):
        with pytest.raises(CSVParseError) as err:
            load_csv(write(tmp_path, "x,y\n1,a\n2,b,extra\n"), "y")
        assert err.value.line == 3

    def test_missing_label_column(self, tmp_path):
        with pytest.raises(SchemaError):
            load_csv(write(tmp_path, "x,y\n1,a\n"), "label")

    def test_ids_unique_and_ordered(self, weather):
        assert list(weather.ids) == list(range(14))

    def test_csv_round_trip(self, weather, tmp_path):
        out = tmp_path / "w.csv"
        weather.to_csv(out)
        assert load_csv(out, "Play") == weather


class TestNumbers:
    def test_parse_number(self):
        assert parse_number("0.1") == Fraction(1, 10)
        assert parse_number("-3") == -3
        for bad in ("nan", "inf", "", "abc"):
            with pytest.raises(ValueError):
                parse_number(bad)

    def test_format_fraction(self):
        assert format_fraction(Fraction(1, 10)) == "0.1"
        assert format_fraction(Fraction(-5, 4)) == "-1.25"
        assert format_fraction(Fraction(7)) == "7"
        assert format_fraction(Fraction(1, 3)) == "1/3"

    @given(st.fractions(max_denominator=10 ** 6))
    def test_format_parses_back(self, q):
        text = format_fraction(q)
        assert Fraction(text) == q


class TestSplit:
    def test_sizes(self):
        ds = random_nominal(np.random.default_rng(0), 100, 3)
        train, test = split(ds, Fraction(1, 5), 7)
        assert (len(train), len(test)) == (80, 20)
        assert not set(train.ids) & set(test.ids)
        assert train.split_tag == "train" and test.split_tag == "test"

    def test_floor_to_test(self):
        ds = random_nominal(np.random.default_rng(1), 303, 2)
        train, test = split(ds, Fraction(1, 5), 0)
        assert (len(train), len(test)) == (243, 60)

    def test_deterministic(self):
        ds = random_nominal(np.random.default_rng(2), 50, 2)
        a = split(ds, 0.2, 3)
        b = split(ds, 0.2, 3)
        assert list(a[0].ids) == list(b[0].ids)
        assert list(a[1].ids) == list(b[1].ids)

    def test_schema_shared(self):
        ds = random_nominal(np.random.default_rng(3), 30, 2)
        train, test = split(ds, 0.5, 0)
        assert train.schema is ds.schema and test.schema is ds.schema
        assert train.labels == test.labels == ds.labels

    @pytest.mark.parametrize("frac", [0, 1, Fraction(3, 2), -0.1])
    def test_fraction_out_of_range(self, frac):
        ds = random_nominal(np.random.default_rng(4), 10, 2)
        with pytest.raises(ValueError):
            split(ds, frac, 0)

    @settings(max_examples=50, deadline=None)
    @given(n=st.integers(1, 200), num=st.integers(1, 9), seed=st.integers(0, 2 ** 31))
    def test_partition(self, n, num, seed):
        ds = Dataset((), "y", ("a",), np.zeros((n, 0), np.int32), np.zeros(n, np.int32),
                     np.arange(n) * 3)
        train, test = split(ds, Fraction(num, 10), seed)
        ids = sorted(list(train.ids) + list(test.ids))
        assert ids == list(ds.ids)
        assert len(test) == n * num // 10


class TestDataset:
    def test_duplicate_ids_rejected(self):
        with pytest.raises(SchemaError):
            Dataset((), "y", ("a",), np.zeros((2, 0), np.int32), np.zeros(2), [1, 1])

    def test_immutable(self, weather):
        with pytest.raises(ValueError):
            weather.codes[0, 0] = 1

    def test_instances_align_with_schema(self, weather):
        for inst in weather:
            assert len(inst.values) == len(weather.schema)
            assert inst.label in weather.labels
