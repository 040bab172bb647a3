import csv

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from uwcolor.errors import ValidationError
from uwcolor.spectral import (
    CANONICAL_GRID,
    WATER_TYPES,
    SpectralCurve,
    _data_dir,
    load_camera_response,
    load_water_type,
    resample_curve,
    trapezoid,
)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def test_canonical_grid():
    assert len(CANONICAL_GRID) == 31
    assert CANONICAL_GRID[0] == 400 and CANONICAL_GRID[-1] == 700
    assert np.all(np.diff(CANONICAL_GRID) == 10)


class TestSpectralCurve:
    def test_rejects_non_increasing(self):
        with pytest.raises(ValidationError):
            SpectralCurve([400, 400], [1, 2])

    def test_rejects_negative(self):
        with pytest.raises(ValidationError):
            SpectralCurve([400, 500], [1, -0.1])

    def test_rejects_length_mismatch(self):
        with pytest.raises(ValidationError):
            SpectralCurve([400, 500, 600], [1, 2])

    def test_loader_rejects_single_row(self, tmp_path):
        write_csv(tmp_path / "IA.csv", ["wavelength_nm", "a", "b", "kd"], [[400, 1, 1, 1]])
        with pytest.raises(ValidationError, match="two"):
            load_water_type("IA", tmp_path)

    def test_immutable(self):
        c = SpectralCurve([400, 500], [0, 1])
        with pytest.raises(ValueError):
            c.values[0] = 3


class TestResample:
    def test_midpoint(self):
        c = SpectralCurve([400, 500], [0.0, 1.0])
        assert resample_curve(c, [450]).values[0] == pytest.approx(0.5)

    def test_identity_on_own_grid(self):
        c = SpectralCurve([400, 450, 520, 700], [0.3, 0.1, 2.0, 0.5])
        np.testing.assert_array_equal(resample_curve(c, c.wavelengths_nm).values, c.values)

    def test_hand_evaluated(self):
        c = SpectralCurve([400, 500, 600], [2.0, 4.0, 3.0])
        assert resample_curve(c, [550]).values[0] == pytest.approx(3.5)

    def test_no_extrapolation(self):
        c = SpectralCurve([400, 500], [0.0, 1.0])
        with pytest.raises(ValidationError):
            resample_curve(c, [399.0, 450.0])

    @given(st.lists(st.floats(0, 10), min_size=3, max_size=12),
           st.lists(st.floats(400, 700), min_size=1, max_size=20))
    def test_idempotent(self, values, grid):
        wl = np.linspace(400, 700, len(values))
        c = SpectralCurve(wl, values)
        g = np.unique(grid)
        once = resample_curve(c, g)
        twice = resample_curve(once, g)
        np.testing.assert_array_equal(once.values, twice.values)


class TestWaterTypes:
    def test_ia_covers_visible(self, water_ia):
        for curve in (water_ia.absorption_a, water_ia.scattering_b, water_ia.diffuse_kd):
            assert curve.span == (400.0, 700.0)
            assert len(curve.values) == 31

    def test_kd_matches_csv_cell(self):
        with open(_data_dir() / "jerlov" / "I.csv") as fh:
            rows = {float(r["wavelength_nm"]): float(r["kd"]) for r in csv.DictReader(fh)}
        tables = load_water_type("I")
        i = int(np.flatnonzero(CANONICAL_GRID == 550.0)[0])
        assert tables.diffuse_kd.values[i] == rows[550.0]

    def test_unknown_type(self):
        with pytest.raises(ValidationError, match="unknown water type"):
            load_water_type("XX")

    @pytest.mark.parametrize("name", WATER_TYPES)
    def test_beam_attenuation_dominates(self, name):
        t = load_water_type(name)
        beta = t.beam_attenuation.values
        assert np.all(beta >= t.absorption_a.values)
        assert np.all(beta >= t.scattering_b.values)

    def test_deterministic(self):
        a, b = load_water_type("IB"), load_water_type("IB")
        for x, y in ((a.absorption_a, b.absorption_a), (a.scattering_b, b.scattering_b),
                     (a.diffuse_kd, b.diffuse_kd)):
            assert x.values.tobytes() == y.values.tobytes()

    def test_red_attenuates_faster_in_oceanic_water(self, water_ia):
        kd = water_ia.diffuse_kd
        assert kd(600)[0] > kd(470)[0]

    def test_non_monotone_csv(self, tmp_path):
        write_csv(tmp_path / "IA.csv", ["wavelength_nm", "a", "b", "kd"],
                  [[400, 1, 1, 1], [390, 1, 1, 1], [700, 1, 1, 1]])
        with pytest.raises(ValidationError, match="increasing"):
            load_water_type("IA", tmp_path)

    def test_negative_values(self, tmp_path):
        write_csv(tmp_path / "IA.csv", ["wavelength_nm", "a", "b", "kd"],
                  [[400, 1, -1, 1], [700, 1, 1, 1]])
        with pytest.raises(ValidationError, match="nonnegative"):
            load_water_type("IA", tmp_path)

    def test_narrow_coverage(self, tmp_path):
        write_csv(tmp_path / "IA.csv", ["wavelength_nm", "a", "b", "kd"],
                  [[420, 1, 1, 1], [700, 1, 1, 1]])
        with pytest.raises(ValidationError, match="support"):
            load_water_type("IA", tmp_path)


class TestCamera:
    def test_peak_normalization(self, tmp_path):
        wl = np.arange(400, 701, 10)
        green = 0.8 * np.exp(-0.5 * ((wl - 530) / 40) ** 2)
        write_csv(tmp_path / "cam.csv", ["wavelength_nm", "r", "g", "b"],
                  [[w, 0.5, g, 0.2] for w, g in zip(wl, green)])
        cam = load_camera_response(tmp_path / "cam.csv")
        assert cam.green(530)[0] == 1.0
        assert cam.red.values.max() == 1.0

    def test_default_has_distinct_peaks(self, camera):
        peaks = [camera.wavelengths_nm[np.argmax(c.values)] for c in camera.channels]
        assert peaks == [600.0, 530.0, 470.0]
        for c in camera.channels:
            assert c.values.max() == 1.0

    def test_insufficient_coverage(self, tmp_path):
        write_csv(tmp_path / "cam.csv", ["wavelength_nm", "r", "g", "b"],
                  [[w, 1, 1, 1] for w in range(450, 651, 10)])
        with pytest.raises(ValidationError, match="support"):
            load_camera_response(tmp_path / "cam.csv")

    def test_missing_column(self, tmp_path):
        write_csv(tmp_path / "cam.csv", ["wavelength_nm", "r", "g"], [[400, 1, 1], [700, 1, 1]])
        with pytest.raises(ValidationError, match="missing column"):
            load_camera_response(tmp_path / "cam.csv")

    def test_all_zero_channel(self, tmp_path):
        write_csv(tmp_path / "cam.csv", ["wavelength_nm", "r", "g", "b"],
                  [[400, 1, 0, 1], [700, 1, 0, 1]])
        with pytest.raises(ValidationError, match="all zero"):
            load_camera_response(tmp_path / "cam.csv")


@pytest.mark.parametrize("c", [0.0, 1.0, 0.25, 3.5, 1024.0])
def test_trapezoid_constant_exact(c):
    assert trapezoid(np.full(31, c), CANONICAL_GRID) == 300.0 * c


@given(st.floats(0, 1e3))
def test_trapezoid_constant(c):
    assert trapezoid(np.full(31, c), CANONICAL_GRID) == pytest.approx(300.0 * c, rel=1e-14)
