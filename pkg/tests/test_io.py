import numpy as np
import pytest
from hypothesis import given, strategies as st

from eulervac.io import atomic_write, csv_text, digest, fmt_float, line_svg
from eulervac.rates import dyadic, fit_slope


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_fmt_float_round_trips(v):
    assert float(fmt_float(v)) == v


def test_csv_digits():
    text = csv_text(["a", "b"], [(1 / 3, 2 / 3)], digits={"b": 6})
    assert text.splitlines()[1] == "0.33333333333333331,0.666667"


def test_atomic_write_and_digest(tmp_path):
    p = atomic_write(tmp_path / "sub" / "f.txt", "hello\n")
    assert p.read_text() == "hello\n" and not list((tmp_path / "sub").glob("*.tmp"))
    assert digest("a") != digest("b") and len(digest("a")) == 64


def test_svg_has_no_date(tmp_path):
    p = line_svg(tmp_path / "f.svg", {"a": ([0, 1], [0, 1])}, "x", "y")
    assert "<dc:date>" not in p.read_text()


@given(st.floats(-3, 3), st.floats(0.1, 10))
def test_fit_slope_exact_power(s, c):
    eps = dyadic(2, 8)
    assert fit_slope(eps, c * eps**s) == pytest.approx(s, abs=1e-10)


def test_dyadic():
    np.testing.assert_array_equal(dyadic(1, 3), [0.5, 0.25, 0.125])
