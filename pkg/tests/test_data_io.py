from __future__ import annotations

import numpy as np
import pytest

from mcci import datasets
from mcci.data_io import (
    parse_one_sample_csv,
    parse_one_sample_text,
    parse_two_sample_csv,
    parse_two_sample_text,
    read_two_sample_text,
)
from mcci.exceptions import InputError


class TestOneSample:
    def test_header_is_skipped(self):
        assert parse_one_sample_text("difference\n1\n-2.5\n").x.tolist() == [1.0, -2.5]

    def test_no_header(self):
        assert parse_one_sample_text("3\n4\n").x.tolist() == [3.0, 4.0]

    def test_unicode_minus(self):
        assert parse_one_sample_text("−6\n–3\n2\n").x.tolist() == [-6.0, -3.0, 2.0]

    def test_comments_and_blank_lines(self):
        assert parse_one_sample_text("# note\n\n5\n\n6\n").x.tolist() == [5.0, 6.0]

    def test_bad_line_reports_line_number(self):
        with pytest.raises(InputError, match=r"data.txt:3: not a number"):
            parse_one_sample_text("1\n2\nthree\n", "data.txt")

    def test_two_columns(self):
        with pytest.raises(InputError, match=":1: expected one value"):
            parse_one_sample_text("1,2\n")

    def test_empty(self, tmp_path):
        f = tmp_path / "empty.csv"
        f.write_text("")
        with pytest.raises(InputError, match="no data"):
            parse_one_sample_csv(f)

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError, match="no such file"):
            parse_one_sample_csv(tmp_path / "nope.csv")

    def test_bundled_darwin(self):
        x = parse_one_sample_csv(datasets.path("darwin")).x
        assert x.tolist() == [49, -67, 8, 6, 16, 23, 28, 41, 14, 29, 56, 24, 75, 60, -48]


class TestTwoSample:
    def test_first_label_is_treatment(self):
        d = parse_two_sample_text("value,group\n1,b\n2,a\n3,b\n")
        assert d.m == 2 and d.treated.tolist() == [1.0, 3.0] and d.control.tolist() == [2.0]

    def test_explicit_label(self):
        d = parse_two_sample_text("1,b\n2,a\n3,b\n", treatment_label="a")
        assert d.m == 1 and d.treated.tolist() == [2.0]

    def test_whitespace_separated(self):
        values, groups = read_two_sample_text("1.5 x\n−2 y\n")
        assert values.tolist() == [1.5, -2.0] and groups == ["x", "y"]

    def test_quoted_labels(self):
        d = parse_two_sample_text('1,"group, one"\n2,other\n')
        assert d.m == 1

    @pytest.mark.parametrize("text", ["1,a\n2,a\n", "1,a\n2,b\n3,c\n"])
    def test_needs_exactly_two_groups(self, text):
        with pytest.raises(InputError):
            parse_two_sample_text(text)

    def test_unknown_label(self):
        with pytest.raises(InputError):
            parse_two_sample_text("1,a\n2,b\n", treatment_label="c")

    def test_bad_rows(self):
        with pytest.raises(InputError, match=":2: not a number"):
            parse_two_sample_text("1,a\nx,b\n")
        with pytest.raises(InputError, match=":1: expected 'value,group'"):
            parse_two_sample_text("1,a,extra\n")

    def test_sleep_with_first_label(self):
        d = parse_two_sample_csv(datasets.path("sleep"))
        assert (d.n, d.m) == (26, 15)

    def test_bundled_loaders(self):
        assert (datasets.load_sleep().m, datasets.load_sleep().n) == (11, 26)
        liz = datasets.load_lizard()
        assert liz.n == 30 and liz.m == 15
        assert np.isclose(liz.treated.mean() - liz.control.mean(), liz.observed_difference)
