"""Reference colour chart and patch sampling."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .formation import as_linear_image

# Classic 24-patch chart, published sRGB 8-bit coordinates, row-major.
CLASSIC_SRGB8 = (
    ("dark_skin", (115, 82, 68)),
    ("light_skin", (194, 150, 130)),
    ("blue_sky", (98, 122, 157)),
    ("foliage", (87, 108, 67)),
    ("blue_flower", (133, 128, 177)),
    ("bluish_green", (103, 189, 170)),
    ("orange", (214, 126, 44)),
    ("purplish_blue", (80, 91, 166)),
    ("moderate_red", (193, 90, 99)),
    ("purple", (94, 60, 108)),
    ("yellow_green", (157, 188, 64)),
    ("orange_yellow", (224, 163, 46)),
    ("blue", (56, 61, 150)),
    ("green", (70, 148, 73)),
    ("red", (175, 54, 60)),
    ("yellow", (231, 199, 31)),
    ("magenta", (187, 86, 149)),
    ("cyan", (8, 133, 161)),
    ("white", (243, 243, 242)),
    ("neutral_8", (200, 200, 200)),
    ("neutral_6_5", (160, 160, 160)),
    ("neutral_5", (122, 122, 121)),
    ("neutral_3_5", (85, 85, 85)),
    ("black", (52, 52, 52)),
)


def srgb_to_linear(v):
    """Standard sRGB decode of nonlinear values in [0, 1]."""
    v = np.asarray(v, dtype=float)
    return np.where(v <= 0.04045, v / 12.92, ((v + 0.055) / 1.055) ** 2.4)


@dataclass(frozen=True)
class ChartReference:
    names: tuple[str, ...]
    colors: np.ndarray  # (n, 3) linear RGB

    def __post_init__(self):
        colors = np.array(self.colors, dtype=float)
        if colors.shape != (len(self.names), 3):
            raise ValidationError("chart colors must be (n_patches, 3)")
        if len(set(self.names)) != len(self.names):
            raise ValidationError("duplicate patch names in chart reference")
        if colors.min() < 0 or colors.max() > 1:
            raise ValidationError("chart colors must lie in [0, 1]")
        for required in ("white", "black"):
            if required not in self.names:
                raise ValidationError(f"chart reference lacks a {required!r} patch")
        colors.flags.writeable = False
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "colors", colors)

    def __len__(self):
        return len(self.names)

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.colors[self.names.index(name)]
        except ValueError:
            raise KeyError(name) from None

    def select(self, names) -> np.ndarray:
        return np.stack([self[n] for n in names])


def reference_chart() -> ChartReference:
    names = tuple(n for n, _ in CLASSIC_SRGB8)
    srgb = np.array([c for _, c in CLASSIC_SRGB8], dtype=float) / 255.0
    return ChartReference(names, srgb_to_linear(srgb))


@dataclass(frozen=True)
class ChartObservation:
    names: tuple[str, ...]
    colors: np.ndarray  # (n, 3) observed linear RGB
    pixel_counts: tuple[int, ...]

    def __post_init__(self):
        colors = np.array(self.colors, dtype=float)
        if colors.shape != (len(self.names), 3):
            raise ValidationError("observation colors must be (n_patches, 3)")
        if len(self.pixel_counts) != len(self.names) or min(self.pixel_counts, default=1) <= 0:
            raise ValidationError("every observed patch needs a positive pixel count")
        if colors.size and (colors.min() < 0 or colors.max() > 1):
            raise ValidationError("observed colors must lie in [0, 1]")
        colors.flags.writeable = False
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "colors", colors)
        object.__setattr__(self, "pixel_counts", tuple(int(c) for c in self.pixel_counts))

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.colors[self.names.index(name)]
        except ValueError:
            raise KeyError(name) from None

    @classmethod
    def from_colors(cls, names, colors, pixel_count: int = 1) -> "ChartObservation":
        return cls(tuple(names), colors, (pixel_count,) * len(names))


@dataclass(frozen=True)
class PatchROI:
    name: str
    x: int
    y: int
    w: int
    h: int


@dataclass(frozen=True)
class ChartLayout:
    patches: tuple[PatchROI, ...]

    def __post_init__(self):
        object.__setattr__(self, "patches", tuple(self.patches))
        for p in self.patches:
            if p.w <= 0 or p.h <= 0 or p.x < 0 or p.y < 0:
                raise ValidationError(f"patch {p.name!r} has an invalid ROI")
        for i, p in enumerate(self.patches):
            for q in self.patches[i + 1:]:
                if p.x < q.x + q.w and q.x < p.x + p.w and p.y < q.y + q.h and q.y < p.y + p.h:
                    raise ValidationError(f"patches {p.name!r} and {q.name!r} overlap")

    def check_bounds(self, height: int, width: int) -> None:
        for p in self.patches:
            if p.x + p.w > width or p.y + p.h > height:
                raise ValidationError(f"patch {p.name!r} lies outside the {width}x{height} image")

    def to_dict(self) -> dict:
        return {"patches": [{"name": p.name, "x": p.x, "y": p.y, "w": p.w, "h": p.h} for p in self.patches]}

    @classmethod
    def from_dict(cls, d: dict) -> "ChartLayout":
        try:
            return cls(tuple(PatchROI(str(p["name"]), int(p["x"]), int(p["y"]), int(p["w"]), int(p["h"]))
                             for p in d["patches"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed chart layout: {exc}") from None

    @classmethod
    def load(cls, path) -> "ChartLayout":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except FileNotFoundError:
            raise ValidationError(f"{path}: chart layout not found") from None
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON: {exc}") from None

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))


def grid_layout(names, rows: int, cols: int, origin=(0, 0), patch=(20, 20), gap=4) -> ChartLayout:
    """Regular rows x cols layout, row-major over ``names``."""
    x0, y0 = origin
    pw, ph = patch
    rois = []
    for k, name in enumerate(names):
        r, c = divmod(k, cols)
        if r >= rows:
            raise ValidationError("more patch names than grid cells")
        rois.append(PatchROI(name, x0 + c * (pw + gap), y0 + r * (ph + gap), pw, ph))
    return ChartLayout(tuple(rois))


def trimmed_mean(values: np.ndarray, trim: float) -> np.ndarray:
    """Per-column mean after dropping the lowest and highest ``trim`` fraction."""
    n = values.shape[0]
    cut = int(np.floor(trim * n + 1e-9))
    if n - 2 * cut <= 0:
        raise ValidationError("no pixels left after trimming")
    s = np.sort(values, axis=0)
    return s[cut:n - cut].mean(axis=0)


def sample_patches(image, layout: ChartLayout, trim: float = 0.1) -> ChartObservation:
    """Trimmed-mean colour of every patch ROI in ``layout``."""
    img = as_linear_image(image)
    if not 0 <= trim <= 0.4:
        raise ValidationError(f"trim must be in [0, 0.4], got {trim}")
    layout.check_bounds(*img.shape[:2])
    colors, counts = [], []
    for p in layout.patches:
        px = img[p.y:p.y + p.h, p.x:p.x + p.w].reshape(-1, 3)
        m = trimmed_mean(px, trim)
        # float summation may step a hair outside the sample range
        colors.append(np.clip(m, px.min(axis=0), px.max(axis=0)))
        counts.append(len(px))
    return ChartObservation(tuple(p.name for p in layout.patches), np.array(colors), tuple(counts))


def render_chart(reference: ChartReference, layout: ChartLayout, height: int, width: int,
                 background=(0.0, 0.0, 0.0)) -> np.ndarray:
    """Paint the reference colours into a linear image according to ``layout``."""
    layout.check_bounds(height, width)
    img = np.empty((height, width, 3))
    img[...] = np.asarray(background, dtype=float)
    for p in layout.patches:
        img[p.y:p.y + p.h, p.x:p.x + p.w] = reference[p.name]
    return img
