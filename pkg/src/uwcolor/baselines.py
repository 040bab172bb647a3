"""Comparison correctors: gray-world white balance and single-coefficient inversion."""

import numpy as np

from .errors import ValidationError
from .formation import EPS_DIRECT, VeilingLight, as_linear_image, cuifm_invert


def gray_world_gains(image) -> np.ndarray:
    means = as_linear_image(image).reshape(-1, 3).mean(axis=0)
    if np.any(means == 0):
        raise ValidationError("gray world is undefined for an image with a zero channel mean")
    return means.mean() / means


def gray_world(image, clip: bool = True) -> np.ndarray:
    """Scale each channel so that all channel means equal their average."""
    img = as_linear_image(image)
    out = img * gray_world_gains(img)
    return np.clip(out, 0.0, 1.0) if clip else out


def cuifm_correct(image, beta, b_inf: VeilingLight, z, eps_direct: float = EPS_DIRECT) -> np.ndarray:
    """Correct with the conventional model that uses one coefficient for both terms."""
    return cuifm_invert(image, beta, b_inf, z, eps_direct)
