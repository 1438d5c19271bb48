import json
import re

import numpy as np
import pytest

from projbound.report import (
    MatrixParseError,
    Series,
    csv_text,
    fmt_num,
    format_matrix,
    json_text,
    line_chart_svg,
    parse_grid,
    parse_matrix,
)


class TestParseMatrix:
    def test_real_with_fractions(self):
        M = parse_matrix("2 2 real\n1/3 0\n0 1/20\n")
        assert M[0, 0] == 1 / 3 and M[1, 1] == 1 / 20

    def test_complex_forms(self):
        M = parse_matrix("1 6 complex\n1+2i 3-4i -2.5i i -i 1e-3-1e-3i\n")
        np.testing.assert_array_equal(M[0], [1 + 2j, 3 - 4j, -2.5j, 1j, -1j, 1e-3 - 1e-3j])

    def test_commas_comments_blank_lines(self):
        M = parse_matrix("# header below\n2 3 real\n\n1, 2, 3  # first row\n4,5,6\n")
        np.testing.assert_array_equal(M.real, [[1, 2, 3], [4, 5, 6]])

    def test_fraction_in_complex(self):
        assert parse_matrix("1 1 complex\n1/2+1/4i\n")[0, 0] == 0.5 + 0.25j

    @pytest.mark.parametrize("text,msg", [
        ("", "empty"),
        ("2 2\n1 0\n0 1\n", "header"),
        ("2 2 real\n1 0\n", "rows"),
        ("1 2 real\n1\n", "entries"),
        ("1 1 real\n1+2i\n", "complex entry"),
        ("1 1 real\nabc\n", "cannot parse"),
        ("1 1 real\n1/0\n", "zero denominator"),
        ("0 1 real\n", "positive"),
        ("a b real\n1\n", "dimensions"),
        ("1 1 real\n1e999\n", "non-finite"),
    ])
    def test_malformed(self, text, msg):
        with pytest.raises(MatrixParseError, match=msg):
            parse_matrix(text)

    def test_round_trip(self):
        rng = np.random.default_rng(0)
        for M in (rng.standard_normal((3, 4)), rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))):
            np.testing.assert_array_equal(parse_matrix(format_matrix(M)), M)


class TestFormatting:
    def test_fmt_num(self):
        assert fmt_num(0.1) == "0.10000000000000001"
        assert float(fmt_num(1 / 3)) == 1 / 3
        assert fmt_num(float("nan")) == "nan"
        assert fmt_num(True) == "true"
        assert fmt_num(3) == "3"
        assert fmt_num(None) == ""

    def test_csv_lf_and_header(self):
        text = csv_text(["a", "b"], [[1.5, "x,y"]])
        assert text == 'a,b\n1.5,"x,y"\n'

    def test_json_nan_to_null(self):
        data = json.loads(json_text({"v": float("nan"), "w": [np.float64(0.25)], "n": np.int64(3)}))
        assert data == {"v": None, "w": [0.25], "n": 3}

    def test_grid(self):
        assert parse_grid("0:1:5") == [0.0, 0.25, 0.5, 0.75, 1.0]
        assert parse_grid("0.2,0.5") == [0.2, 0.5]
        for bad in ("1:2", "a:b:c", "0:1:0", ""):
            with pytest.raises(ValueError):
                parse_grid(bad)


class TestSvg:
    def test_structure_and_data(self):
        s = [Series("CHEN_UP", [0.2, 0.5], [3.0, 5.0]), Series("NEW_UP1", [0.2, 0.5], [1.0, 1.0])]
        svg = line_chart_svg(s, "t", "x", "y")
        assert svg.startswith('<svg xmlns="http://www.w3.org/2000/svg" width="800" height="600"')
        assert svg.count("<polyline") == 2
        assert 'data-name="CHEN_UP"' in svg and ">NEW_UP1</text>" in svg
        ys = re.search(r'data-name="CHEN_UP" data-x="[^"]*" data-y="([^"]*)"', svg).group(1)
        assert [float(v) for v in ys.split()] == [3.0, 5.0]

    def test_log_scale(self):
        svg = line_chart_svg([Series("a", [0, 1, 2], [1, 10, 100])], log_y=True)
        assert svg.count("<polyline") == 1

    def test_errors(self):
        with pytest.raises(ValueError):
            line_chart_svg([])
        with pytest.raises(ValueError):
            Series("a", [1, 2], [1])
