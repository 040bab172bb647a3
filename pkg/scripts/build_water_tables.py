"""Regenerate the bundled water-type CSVs and the default camera response.

The tables are produced from a compact bio-optical model rather than a
digitization: pure seawater absorption and scattering plus chlorophyll-scaled
phytoplankton absorption, CDOM absorption and particle scattering. Each water
type is assigned a chlorophyll concentration and a CDOM factor that order the
classes from clearest (I) to most turbid (9C). See data/README.md.

Usage:
    python scripts/build_water_tables.py [--out src/uwcolor/data]
"""

import argparse
import csv
from pathlib import Path

import numpy as np

GRID = np.arange(400.0, 701.0, 10.0)

# Pure water absorption (1/m), Pope & Fry 1997, 400-700 nm at 10 nm.
A_WATER = np.array([
    0.00663, 0.00473, 0.00454, 0.00495, 0.00635, 0.00922, 0.00979, 0.01060,
    0.01270, 0.01500, 0.02040, 0.03250, 0.04090, 0.04340, 0.04740, 0.05650,
    0.06190, 0.06950, 0.08960, 0.13510, 0.22240, 0.26440, 0.27550, 0.29160,
    0.32000, 0.34000, 0.41000, 0.43900, 0.46500, 0.51600, 0.62400,
])

# (chlorophyll mg/m^3, CDOM absorption at 440 nm as a multiple of a_ph(440),
#  non-algal particle scattering at 550 nm in 1/m)
WATER_TYPES = {
    "I": (0.01, 0.3, 0.0),
    "IA": (0.05, 0.3, 0.0),
    "IB": (0.12, 0.4, 0.0),
    "II": (0.4, 0.5, 0.02),
    "III": (1.2, 0.7, 0.05),
    "1C": (1.5, 1.0, 0.10),
    "3C": (3.0, 1.5, 0.20),
    "5C": (5.0, 2.0, 0.35),
    "7C": (8.0, 2.5, 0.55),
    "9C": (12.0, 3.0, 0.80),
}


def phyto_shape(wl):
    """Chlorophyll-specific absorption shape, 1.0 at 440 nm."""
    shape = (
        np.exp(-0.5 * ((wl - 440.0) / 32.0) ** 2)
        + 0.35 * np.exp(-0.5 * ((wl - 490.0) / 25.0) ** 2)
        + 0.55 * np.exp(-0.5 * ((wl - 675.0) / 12.0) ** 2)
        + 0.04
    )
    return shape / np.interp(440.0, wl, shape)


def water_type_table(chl, cdom_factor, nap_b550, wl=GRID):
    a_ph440 = 0.06 * chl ** 0.65
    a_ph = a_ph440 * phyto_shape(wl)
    a_g = cdom_factor * a_ph440 * np.exp(-0.014 * (wl - 440.0))
    a = A_WATER + a_ph + a_g

    b_w = 0.00288 * (wl / 500.0) ** -4.32
    b_p = (0.30 * chl ** 0.62 + nap_b550) * (550.0 / wl)
    b = b_w + b_p

    bb = 0.5 * b_w + 0.0183 * b_p
    kd = (a + bb) / 0.9
    return a, b, kd


def default_camera(wl=GRID, peaks=(600.0, 530.0, 470.0), sigma=50.0):
    return [np.exp(-0.5 * ((wl - p) / sigma) ** 2) for p in peaks]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "src/uwcolor/data"))
    args = parser.parse_args()
    out = Path(args.out)
    (out / "jerlov").mkdir(parents=True, exist_ok=True)

    for name, params in WATER_TYPES.items():
        a, b, kd = water_type_table(*params)
        with open(out / "jerlov" / f"{name}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["wavelength_nm", "a", "b", "kd"])
            for row in zip(GRID, a, b, kd):
                w.writerow([f"{row[0]:.0f}"] + [f"{v:.6f}" for v in row[1:]])

    r, g, bl = default_camera()
    with open(out / "camera_default.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["wavelength_nm", "r", "g", "b"])
        for row in zip(GRID, r, g, bl):
            w.writerow([f"{row[0]:.0f}"] + [f"{v:.6f}" for v in row[1:]])


if __name__ == "__main__":
    main()
