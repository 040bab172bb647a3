"""Two-coefficient underwater image formation model.

Forward:  I_c = J_c * rho * exp(-beta_D_c * z) + B_inf_c * (1 - exp(-beta_B_c * z))
Inverse:  J_c = (I_c - B_inf_c * (1 - exp(-beta_B_c * z))) / max(exp(-beta_D_c * z), eps)

Images are float arrays of shape (H, W, 3) in linear RGB on [0, 1]. The range
``z`` is either a positive scalar or an (H, W) map.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import NumericalError, ValidationError
from .spectral import CameraResponse, WaterTypeTables, trapezoid

AmbientModel = Literal["as_written", "exponential"]
Provenance = Literal["manual", "estimated", "optimized"]

EPS_DIRECT = 1e-3
AUTO_EXPOSURE_TARGET = 0.7


def _rgb(values, name, low=0.0, high=None) -> np.ndarray:
    arr = np.array(values, dtype=float).reshape(-1)
    if arr.shape != (3,):
        raise ValidationError(f"{name} must have three components, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite components")
    if np.any(arr < low) or (high is not None and np.any(arr > high)):
        bounds = f"[{low}, {high}]" if high is not None else f">= {low}"
        raise ValidationError(f"{name} components must be {bounds}, got {arr.tolist()}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class SceneContext:
    water: WaterTypeTables
    camera: CameraResponse
    depth_m: float
    exposure_k: float | None = None  # None: auto-exposure
    surface_light_e0: float = 1.0
    reflectance_rho: float = 1.0
    ambient_model: AmbientModel = "exponential"

    def __post_init__(self):
        if not self.depth_m > 0:
            raise ValidationError(f"depth_m must be > 0, got {self.depth_m}")
        if self.exposure_k is not None and not self.exposure_k > 0:
            raise ValidationError(f"exposure_k must be > 0, got {self.exposure_k}")
        if not self.surface_light_e0 > 0:
            raise ValidationError(f"surface_light_e0 must be > 0, got {self.surface_light_e0}")
        if not 0 < self.reflectance_rho <= 1:
            raise ValidationError(f"reflectance_rho must be in (0, 1], got {self.reflectance_rho}")
        if self.ambient_model not in ("as_written", "exponential"):
            raise ValidationError(f"unknown ambient model {self.ambient_model!r}")
        if not np.array_equal(self.water.wavelengths_nm, self.camera.wavelengths_nm):
            raise ValidationError("water tables and camera response are on different grids")

    @property
    def wavelengths_nm(self) -> np.ndarray:
        return self.water.wavelengths_nm


@dataclass(frozen=True)
class VeilingLight:
    b_inf: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "b_inf", _rgb(self.b_inf, "veiling light", 0.0, 1.0))


@dataclass(frozen=True)
class AttenuationCoeffs:
    beta_d: np.ndarray
    beta_b: np.ndarray
    provenance: Provenance = "manual"

    def __post_init__(self):
        object.__setattr__(self, "beta_d", _rgb(self.beta_d, "beta_d"))
        object.__setattr__(self, "beta_b", _rgb(self.beta_b, "beta_b"))
        if self.provenance not in ("manual", "estimated", "optimized"):
            raise ValidationError(f"unknown provenance {self.provenance!r}")

    def to_dict(self) -> dict:
        return {
            "beta_d": [float(v) for v in self.beta_d],
            "beta_b": [float(v) for v in self.beta_b],
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AttenuationCoeffs":
        try:
            return cls(d["beta_d"], d["beta_b"], d.get("provenance", "manual"))
        except KeyError as exc:
            raise ValidationError(f"coefficients missing key {exc}") from None

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "AttenuationCoeffs":
        return cls.from_dict(json.loads(text))


def as_linear_image(image) -> np.ndarray:
    """Validate an (H, W, 3) linear image with values in [0, 1]; returns float64."""
    arr = np.asarray(image, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValidationError(f"expected an (H, W, 3) image, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValidationError("image has zero size")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("image contains non-finite values")
    if arr.min() < 0 or arr.max() > 1:
        raise ValidationError("image values must lie in [0, 1]")
    return arr


def range_field(z, shape) -> np.ndarray:
    """Return ``z`` as an array broadcastable against an (H, W, 3) image."""
    z = np.asarray(z, dtype=float)
    if z.ndim == 0:
        if not z > 0:
            raise ValidationError(f"range must be > 0, got {float(z)}")
        return z.reshape(1, 1, 1)
    if z.shape != tuple(shape[:2]):
        raise ValidationError(f"range map shape {z.shape} does not match image {tuple(shape[:2])}")
    if not np.all(z > 0):
        raise ValidationError("range map must be strictly positive everywhere")
    return z[..., None]


# -- spectral side -----------------------------------------------------------

def ambient_light(ctx: SceneContext) -> np.ndarray:
    """Downwelling light E(d, lambda) on the context grid."""
    kd = ctx.water.diffuse_kd.values
    if ctx.ambient_model == "as_written":
        e = ctx.surface_light_e0 * kd / ctx.depth_m
    else:
        e = ctx.surface_light_e0 * np.exp(-kd * ctx.depth_m)
    return np.maximum(e, 0.0)


def _veiling_integrand(ctx: SceneContext) -> np.ndarray:
    beta = ctx.water.beam_attenuation.values
    if np.any(beta == 0):
        raise NumericalError("beam attenuation is zero on the grid; veiling-light integrand undefined")
    return ctx.water.scattering_b.values * ambient_light(ctx) / beta


def veiling_integral(ctx: SceneContext) -> np.ndarray:
    """Per-channel integral of S_c * b * E / beta, before the 1/k exposure scale."""
    return trapezoid(ctx.camera.as_array() * _veiling_integrand(ctx), ctx.wavelengths_nm)


def auto_exposure(ctx: SceneContext, target: float = AUTO_EXPOSURE_TARGET) -> float:
    """Exposure k that puts the brightest veiling-light channel at ``target``."""
    peak = float(veiling_integral(ctx).max())
    return peak / target if peak > 0 else 1.0


def veiling_light_unclamped(ctx: SceneContext) -> np.ndarray:
    k = ctx.exposure_k if ctx.exposure_k is not None else auto_exposure(ctx)
    return veiling_integral(ctx) / k


def veiling_light(ctx: SceneContext) -> VeilingLight:
    """Wideband veiling light from the water tables, clamped to [0, 1]."""
    return VeilingLight(np.clip(veiling_light_unclamped(ctx), 0.0, 1.0))


def background_veiling_estimate(image, percentile: float = 0.1, region=None) -> VeilingLight:
    """Veiling light as the mean colour of the bluest ``percentile`` of pixels.

    ``region`` is an optional (H, W) boolean mask restricting the candidate
    background pixels; the whole image is used by default.
    """
    img = as_linear_image(image)
    if not 0 < percentile <= 1:
        raise ValidationError(f"percentile must be in (0, 1], got {percentile}")
    pixels = img.reshape(-1, 3)
    if region is not None:
        region = np.asarray(region, dtype=bool)
        if region.shape != img.shape[:2]:
            raise ValidationError("background region mask does not match image shape")
        pixels = pixels[region.reshape(-1)]
    if len(pixels) == 0:
        raise ValidationError("background region is empty")
    n = max(1, int(np.ceil(percentile * len(pixels) - 1e-9)))
    order = np.argsort(-pixels[:, 2], kind="stable")
    return VeilingLight(np.clip(pixels[order[:n]].mean(axis=0), 0.0, 1.0))


def wideband_attenuation(ctx: SceneContext, z: float) -> AttenuationCoeffs:
    """Effective per-channel beta_D and beta_B implied by the water tables at range ``z``.

    beta_D is the attenuation of the camera-weighted direct signal over ``z``;
    beta_B comes from the camera-weighted backscatter growth towards its
    asymptote. They differ because the two signals weight the spectrum
    differently.
    """
    if not z > 0:
        raise ValidationError(f"range must be > 0, got {z}")
    wl = ctx.wavelengths_nm
    s = ctx.camera.as_array()
    beta = ctx.water.beam_attenuation.values
    e = ambient_light(ctx) * ctx.reflectance_rho
    trans = np.exp(-beta * z)

    direct0 = trapezoid(s * e, wl)
    direct_z = trapezoid(s * e * trans, wl)
    veil = s * _veiling_integrand(ctx)
    b_inf = trapezoid(veil, wl)
    b_z = trapezoid(veil * (1.0 - trans), wl)
    if np.any(direct_z <= 0) or np.any(b_inf <= 0):
        raise NumericalError("degenerate spectral integrals; cannot derive wideband attenuation")
    beta_d = np.log(direct0 / direct_z) / z
    beta_b = -np.log1p(-b_z / b_inf) / z
    return AttenuationCoeffs(np.maximum(beta_d, 0.0), np.maximum(beta_b, 0.0), "manual")


def cuifm_beta(ctx: SceneContext) -> np.ndarray:
    """Single wideband beam attenuation per channel, weighted by S_c * E."""
    w = ctx.camera.as_array() * ambient_light(ctx)
    wl = ctx.wavelengths_nm
    norm = trapezoid(w, wl)
    if np.any(norm <= 0):
        raise NumericalError("camera-weighted ambient light vanishes")
    return trapezoid(w * ctx.water.beam_attenuation.values, wl) / norm


# -- image side --------------------------------------------------------------

def formation_model(j, beta_d, beta_b, b_inf, z, rho=1.0):
    """Unclamped forward model; all arguments broadcast with numpy rules."""
    return j * rho * np.exp(-beta_d * z) + b_inf * -np.expm1(-beta_b * z)


def forward_degrade(j, coeffs: AttenuationCoeffs, b_inf: VeilingLight, z, rho: float = 1.0) -> np.ndarray:
    """Degrade an unattenuated image ``j`` as seen through ``z`` metres of water."""
    j = as_linear_image(j)
    zf = range_field(z, j.shape)
    out = formation_model(j, coeffs.beta_d, coeffs.beta_b, b_inf.b_inf, zf, rho)
    return np.clip(out, 0.0, 1.0)


def invert(i, coeffs: AttenuationCoeffs, b_inf: VeilingLight, z, eps_direct: float = EPS_DIRECT) -> np.ndarray:
    """Recover the unattenuated image from raw image ``i``.

    Backscatter is subtracted (floored at zero), and the direct transmission is
    floored at ``eps_direct`` so near-black channels cannot explode.
    """
    i = as_linear_image(i)
    zf = range_field(z, i.shape)
    return _invert(i, coeffs.beta_d, coeffs.beta_b, b_inf.b_inf, zf, eps_direct)


def _invert(i, beta_d, beta_b, b_inf, z, eps_direct):
    backscatter = b_inf * -np.expm1(-beta_b * z)
    direct = np.maximum(np.exp(-beta_d * z), eps_direct)
    return np.clip(np.maximum(i - backscatter, 0.0) / direct, 0.0, 1.0)


def cuifm_invert(i, beta, b_inf: VeilingLight, z, eps_direct: float = EPS_DIRECT) -> np.ndarray:
    """Inversion under the single-coefficient model (beta_D == beta_B == beta)."""
    beta = _rgb(beta, "beta")
    return invert(i, AttenuationCoeffs(beta, beta), b_inf, z, eps_direct)
