"""Spectral tables: water-type optical properties and camera response.

All curves are resampled onto one canonical grid (400-700 nm, 10 nm steps)
by piecewise-linear interpolation. Extrapolation is never performed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ValidationError

CANONICAL_GRID = np.arange(400.0, 701.0, 10.0)
CANONICAL_GRID.flags.writeable = False

WATER_TYPES = ("I", "IA", "IB", "II", "III", "1C", "3C", "5C", "7C", "9C")


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class SpectralCurve:
    """Sampled function of wavelength (nm).

    Tables read from disk always carry at least two samples; a single sample
    only arises from resampling onto a one-point grid.
    """

    wavelengths_nm: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        wl = _frozen(self.wavelengths_nm)
        v = _frozen(self.values)
        if wl.ndim != 1 or wl.size < 1:
            raise ValidationError("a spectral curve needs at least one sample")
        if v.shape != wl.shape:
            raise ValidationError(
                f"values length {v.size} does not match wavelengths length {wl.size}"
            )
        if not np.all(np.isfinite(wl)) or not np.all(np.isfinite(v)):
            raise ValidationError("spectral curve contains non-finite entries")
        if np.any(np.diff(wl) <= 0):
            raise ValidationError("wavelengths must be strictly increasing")
        if np.any(v < 0):
            raise ValidationError("spectral values must be nonnegative")
        object.__setattr__(self, "wavelengths_nm", wl)
        object.__setattr__(self, "values", v)

    def __call__(self, wavelength_nm):
        return resample_curve(self, np.atleast_1d(wavelength_nm)).values

    @property
    def span(self) -> tuple[float, float]:
        return float(self.wavelengths_nm[0]), float(self.wavelengths_nm[-1])


def resample_curve(curve: SpectralCurve, grid) -> SpectralCurve:
    """Linearly interpolate ``curve`` onto ``grid``.

    Raises ValidationError if any grid point lies outside the curve's support.
    """
    grid = np.asarray(grid, dtype=float)
    lo, hi = curve.span
    if grid.size and (grid.min() < lo or grid.max() > hi):
        raise ValidationError(
            f"grid [{grid.min():g}, {grid.max():g}] nm exceeds curve support [{lo:g}, {hi:g}] nm"
        )
    return SpectralCurve(grid, np.interp(grid, curve.wavelengths_nm, curve.values))


@dataclass(frozen=True)
class WaterTypeTables:
    type_name: str
    absorption_a: SpectralCurve
    scattering_b: SpectralCurve
    diffuse_kd: SpectralCurve

    def __post_init__(self):
        grids = [c.wavelengths_nm for c in (self.absorption_a, self.scattering_b, self.diffuse_kd)]
        if not all(np.array_equal(grids[0], g) for g in grids[1:]):
            raise ValidationError("water-type curves must share one wavelength grid")

    @property
    def wavelengths_nm(self) -> np.ndarray:
        return self.absorption_a.wavelengths_nm

    @property
    def beam_attenuation(self) -> SpectralCurve:
        """Beam attenuation a + b."""
        return SpectralCurve(self.wavelengths_nm, self.absorption_a.values + self.scattering_b.values)


@dataclass(frozen=True)
class CameraResponse:
    red: SpectralCurve
    green: SpectralCurve
    blue: SpectralCurve

    def __post_init__(self):
        grids = [c.wavelengths_nm for c in self.channels]
        if not all(np.array_equal(grids[0], g) for g in grids[1:]):
            raise ValidationError("camera channels must share one wavelength grid")

    @property
    def channels(self) -> tuple[SpectralCurve, SpectralCurve, SpectralCurve]:
        return (self.red, self.green, self.blue)

    @property
    def wavelengths_nm(self) -> np.ndarray:
        return self.red.wavelengths_nm

    def as_array(self) -> np.ndarray:
        """(3, n_wavelengths) array of R, G, B sensitivities."""
        return np.stack([c.values for c in self.channels])


def _read_csv_columns(path: Path, columns: tuple[str, ...]) -> dict[str, np.ndarray]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            header = [h.strip() for h in (reader.fieldnames or [])]
            missing = [c for c in columns if c not in header]
            if missing:
                raise ValidationError(f"{path}: missing column(s) {', '.join(missing)}")
            reader.fieldnames = header
            rows = list(reader)
    except FileNotFoundError:
        raise ValidationError(f"{path}: file not found") from None
    if len(rows) < 2:
        raise ValidationError(f"{path}: need at least two wavelength rows")
    out = {}
    for col in columns:
        try:
            out[col] = np.array([float(r[col]) for r in rows])
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"{path}: malformed value in column {col!r}: {exc}") from None
    return out


def _data_dir() -> Path:
    return Path(str(resources.files("uwcolor") / "data"))


def load_water_type(name: str, data_dir=None, grid=CANONICAL_GRID) -> WaterTypeTables:
    """Load the a, b, K_d tables of a Jerlov water type, resampled onto ``grid``.

    ``data_dir`` must contain ``<name>.csv`` with header ``wavelength_nm,a,b,kd``;
    it defaults to the bundled tables.
    """
    if name not in WATER_TYPES:
        raise ValidationError(f"unknown water type {name!r}; expected one of {', '.join(WATER_TYPES)}")
    data_dir = Path(data_dir) if data_dir is not None else _data_dir() / "jerlov"
    cols = _read_csv_columns(data_dir / f"{name}.csv", ("wavelength_nm", "a", "b", "kd"))
    wl = cols["wavelength_nm"]
    curves = [resample_curve(SpectralCurve(wl, cols[k]), grid) for k in ("a", "b", "kd")]
    return WaterTypeTables(name, *curves)


def load_camera_response(file=None, grid=CANONICAL_GRID) -> CameraResponse:
    """Load a camera response CSV (``wavelength_nm,r,g,b``), peak-normalize each
    channel to 1 and resample onto ``grid``.

    Without a file the bundled three-Gaussian stand-in is used.
    """
    path = Path(file) if file is not None else _data_dir() / "camera_default.csv"
    cols = _read_csv_columns(path, ("wavelength_nm", "r", "g", "b"))
    wl = cols["wavelength_nm"]
    channels = []
    for key in ("r", "g", "b"):
        v = cols[key]
        peak = v.max()
        if peak <= 0:
            raise ValidationError(f"{path}: channel {key!r} is all zero")
        # normalize before resampling so the native peak maps to exactly 1
        channels.append(resample_curve(SpectralCurve(wl, v / peak), grid))
    return CameraResponse(*channels)


def trapezoid(values, wavelengths_nm) -> np.ndarray:
    """Trapezoidal integral over the last axis."""
    return np.trapezoid(values, wavelengths_nm, axis=-1)
