import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from uwcolor.errors import ValidationError
from uwcolor.metrics import consistency_stats, normalized_color_distance

rgb = st.tuples(*[st.floats(0, 1)] * 3).filter(lambda v: sum(v) > 1e-3)


@pytest.mark.parametrize(
    ("observed", "reference", "expected"),
    [
        ((0.5, 0.5, 0.5), (1, 1, 1), 0.0),
        ((1, 0, 0), (0, 1, 0), math.sqrt(2)),
        ((1, 1, 0), (1, 0, 0), 0.765366864730179543),
    ],
)
def test_worked_examples(observed, reference, expected):
    assert normalized_color_distance(observed, reference) == pytest.approx(expected, abs=1e-12)


def test_zero_norm():
    with pytest.raises(ValidationError):
        normalized_color_distance((0, 0, 0), (1, 1, 1))


def test_chromaticity_option():
    assert normalized_color_distance((2, 0, 0), (0, 1, 0), "chromaticity") == pytest.approx(math.sqrt(2))
    assert normalized_color_distance((0.2, 0.3, 0.5), (2, 3, 5), "chromaticity") == pytest.approx(0, abs=1e-15)


@given(rgb, rgb, st.sampled_from([0.5, 2.0, 4.0, 0.25, 8.0]))
def test_scale_invariance_exact(o, r, s):
    # power-of-two scales are exact in binary floating point
    o = np.array(o)
    assert normalized_color_distance(s * o, r) == normalized_color_distance(o, r)


@given(rgb, rgb, st.floats(0.01, 100))
def test_scale_invariance(o, r, s):
    o = np.array(o)
    assert normalized_color_distance(s * o, r) == pytest.approx(normalized_color_distance(o, r), abs=1e-12)


@given(rgb, rgb, rgb)
def test_metric_properties(a, b, c):
    d = normalized_color_distance
    assert d(a, b) == pytest.approx(d(b, a), abs=1e-15)
    assert d(a, c) <= d(a, b) + d(b, c) + 1e-12
    assert 0 <= d(a, b) <= math.sqrt(2) + 1e-12


def test_consistency_constant_series():
    rep = consistency_stats([(0.2, 0.3, 0.4)] * 4, (0.2, 0.3, 0.4))
    assert rep.variance == 0 and rep.mean_error == pytest.approx(0, abs=1e-16)


def test_consistency_worked_example():
    rep = consistency_stats([(0, 0, 0), (0, 0, 1)], (0, 0, 0.5))
    assert rep.variance == pytest.approx(0.25)
    assert rep.mean_error == pytest.approx(0.0)


@given(st.lists(rgb, min_size=2, max_size=8), st.tuples(*[st.floats(-1, 1)] * 3))
def test_variance_translation_invariant(series, shift):
    s = np.array(series)
    a = consistency_stats(s, (0.5, 0.5, 0.5)).variance
    b = consistency_stats(s + np.array(shift), (0.5, 0.5, 0.5)).variance
    assert b == pytest.approx(a, abs=1e-12)


def test_series_too_short():
    with pytest.raises(ValidationError, match="at least two"):
        consistency_stats([(0.1, 0.2, 0.3)], (0.1, 0.2, 0.3))
