"""Image decode/encode. All processing happens on linear RGB floats.

PNG is read and written as 8-bit sRGB, JPEG is read-only, and ``.npy`` holds
float linear (H, W, 3) arrays losslessly.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .chart import srgb_to_linear
from .errors import ValidationError
from .formation import as_linear_image

READ_SUFFIXES = {".png", ".jpg", ".jpeg", ".npy"}
WRITE_SUFFIXES = {".png", ".npy"}


def srgb_decode(image8) -> np.ndarray:
    """8-bit sRGB codes -> linear floats in [0, 1]."""
    a = np.asarray(image8)
    if a.dtype != np.uint8:
        raise ValidationError(f"expected uint8 pixels, got {a.dtype}")
    return srgb_to_linear(a / 255.0)


def linear_to_srgb(v) -> np.ndarray:
    v = np.clip(np.asarray(v, dtype=float), 0.0, 1.0)
    return np.where(v <= 0.0031308, 12.92 * v, 1.055 * v ** (1 / 2.4) - 0.055)


def srgb_encode(linear) -> np.ndarray:
    """Linear floats -> 8-bit sRGB codes (round to nearest)."""
    return np.round(linear_to_srgb(linear) * 255.0).astype(np.uint8)


def read_image(path, assume_linear: bool = False) -> np.ndarray:
    """Load an image as a linear (H, W, 3) float array.

    ``assume_linear`` skips the sRGB decode for 8-bit files holding linear data.
    """
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix not in READ_SUFFIXES:
        raise ValidationError(f"{path}: unsupported image format {suffix!r}")
    if not path.exists():
        raise ValidationError(f"{path}: file not found")
    if suffix == ".npy":
        return as_linear_image(np.load(path, allow_pickle=False))
    with Image.open(path) as im:
        if im.mode == "RGBA":
            im = im.convert("RGB")
        if im.mode != "RGB":
            raise ValidationError(f"{path}: unsupported pixel format {im.mode!r}; need 8-bit RGB")
        a = np.asarray(im, dtype=np.uint8)
    return a / 255.0 if assume_linear else srgb_decode(a)


def write_image(path, linear, assume_linear: bool = False) -> None:
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix not in WRITE_SUFFIXES:
        raise ValidationError(f"{path}: cannot write {suffix!r}; use .png or .npy")
    img = as_linear_image(linear)
    if suffix == ".npy":
        np.save(path, img)
        return
    codes = np.round(img * 255.0).astype(np.uint8) if assume_linear else srgb_encode(img)
    Image.fromarray(codes, mode="RGB").save(path)


def quantize(linear, assume_linear: bool = False) -> np.ndarray:
    """What a linear image becomes after an 8-bit write and read back."""
    if assume_linear:
        return np.round(np.clip(linear, 0, 1) * 255.0) / 255.0
    return srgb_decode(srgb_encode(linear))
