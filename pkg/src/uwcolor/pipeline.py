"""Frame-level correction, simulation, sparse keypoint correction and evaluation."""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .chart import ChartLayout, ChartReference, reference_chart, sample_patches
from .errors import ValidationError
from .estimation import estimate_closed_form, refine_least_squares
from .formation import (
    EPS_DIRECT,
    AttenuationCoeffs,
    SceneContext,
    VeilingLight,
    _invert,
    as_linear_image,
    background_veiling_estimate,
    forward_degrade,
    range_field,
    veiling_light,
    wideband_attenuation,
)
from .imaging import read_image, write_image
from .metrics import consistency_stats, normalized_color_distance
from .spectral import load_camera_response, load_water_type

log = logging.getLogger(__name__)

DEFAULT_PATCH_PX = 64


# -- sparse range maps -------------------------------------------------------

@dataclass(frozen=True)
class SparseRangeMap:
    """Keypoint ranges: ``points`` is (N, 3) of x, y, z; effective range is z * scale."""

    points: np.ndarray
    scale: float = 1.0

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).reshape(-1, 3)
        if len(pts) == 0:
            raise ValidationError("sparse range map is empty")
        if not self.scale > 0:
            raise ValidationError(f"scale must be > 0, got {self.scale}")
        if not np.all(pts[:, 2] > 0):
            raise ValidationError("keypoint ranges must be > 0")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def xy(self) -> np.ndarray:
        return self.points[:, :2].astype(int)

    @property
    def ranges(self) -> np.ndarray:
        return self.points[:, 2] * self.scale


def ingest_sparse_map(path, scale: float = 1.0) -> SparseRangeMap:
    """Read a keypoint CSV with header ``x,y,z``; subpixel x, y are rounded."""
    path = Path(path)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except FileNotFoundError:
        raise ValidationError(f"{path}: file not found") from None
    with fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader, [])]
        if header != ["x", "y", "z"]:
            raise ValidationError(f"{path}: expected header x,y,z, got {','.join(header)}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise ValidationError(f"{path}:{lineno}: expected 3 fields, got {len(row)}")
            try:
                x, y, z = (float(c) for c in row)
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: non-numeric field") from None
            if not np.isfinite([x, y, z]).all():
                raise ValidationError(f"{path}:{lineno}: non-finite field")
            if z <= 0:
                raise ValidationError(f"{path}:{lineno}: range must be > 0, got {z}")
            rows.append((round(x), round(y), z))
    return SparseRangeMap(np.array(rows, dtype=float).reshape(-1, 3), scale)


def patch_box(x: int, y: int, patch_px: int, height: int, width: int):
    """Clipped bounds (y0, y1, x0, x1) of the square patch centred on (x, y)."""
    x0, y0 = x - patch_px // 2, y - patch_px // 2
    return max(y0, 0), min(y0 + patch_px, height), max(x0, 0), min(x0 + patch_px, width)


def sparse_range_assignment(shape, rmap: SparseRangeMap, patch_px: int = DEFAULT_PATCH_PX):
    """Per-pixel owning keypoint inside the union of patches.

    Returns an (H, W) int array: -1 outside every patch, else the index of the
    nearest keypoint among those whose patch covers the pixel (ties go to the
    lower index).
    """
    if patch_px <= 0:
        raise ValidationError(f"patch_px must be positive, got {patch_px}")
    h, w = shape[:2]
    xy = rmap.xy
    if np.any(xy[:, 0] < 0) or np.any(xy[:, 0] >= w) or np.any(xy[:, 1] < 0) or np.any(xy[:, 1] >= h):
        raise ValidationError("keypoint outside image bounds")
    owner = np.full((h, w), -1, dtype=np.int64)
    best = np.full((h, w), np.inf)
    for k, (x, y) in enumerate(xy):
        y0, y1, x0, x1 = patch_box(x, y, patch_px, h, w)
        dy = (np.arange(y0, y1) - y)[:, None]
        dx = (np.arange(x0, x1) - x)[None, :]
        d2 = (dy * dy + dx * dx).astype(float)
        sub_best = best[y0:y1, x0:x1]
        closer = d2 < sub_best  # strict: earlier keypoints win ties
        sub_best[closer] = d2[closer]
        owner[y0:y1, x0:x1][closer] = k
    return owner


def correct_sparse(image, rmap: SparseRangeMap, coeffs: AttenuationCoeffs, b_inf: VeilingLight,
                   patch_px: int = DEFAULT_PATCH_PX, eps_direct: float = EPS_DIRECT) -> np.ndarray:
    """Correct a fixed-size patch around each keypoint using that keypoint's range.

    Pixels outside every patch are returned untouched.
    """
    img = as_linear_image(image)
    owner = sparse_range_assignment(img.shape, rmap, patch_px)
    mask = owner >= 0
    out = img.copy()
    z = rmap.ranges[owner[mask]][:, None]
    out[mask] = _invert(img[mask], coeffs.beta_d, coeffs.beta_b, b_inf.b_inf, z, eps_direct)
    return out


# -- jobs --------------------------------------------------------------------

COEFF_SOURCES = ("manual", "chart", "optimize")
VEILING_SOURCES = ("spectral", "background", "manual")


@dataclass
class SceneParams:
    water_type: str = "IA"
    depth_m: float | None = None
    exposure_k: float | None = None
    surface_light_e0: float = 1.0
    reflectance_rho: float = 1.0
    ambient_model: str = "exponential"
    camera_file: str | None = None
    data_dir: str | None = None

    def context(self) -> SceneContext:
        if self.depth_m is None:
            raise ValidationError("scene depth_m is required for the spectral veiling light")
        return SceneContext(
            water=load_water_type(self.water_type, self.data_dir),
            camera=load_camera_response(self.camera_file),
            depth_m=self.depth_m,
            exposure_k=self.exposure_k,
            surface_light_e0=self.surface_light_e0,
            reflectance_rho=self.reflectance_rho,
            ambient_model=self.ambient_model,
        )


@dataclass
class FrameJob:
    """One correction job, normally loaded from a JSON file.

    ``coefficients`` is ``{"source": "manual", "beta_d": [...], "beta_b": [...]}``,
    ``{"source": "manual", "file": "coeffs.json"}``, ``{"source": "chart"}`` or
    ``{"source": "optimize"}``. ``veiling`` is ``{"source": "spectral"}``,
    ``{"source": "background", "percentile": 0.1}`` or
    ``{"source": "manual", "b_inf": [...]}``.
    """

    image: str
    output: str | None = None
    z: float | None = None
    scene: SceneParams = field(default_factory=SceneParams)
    coefficients: dict = field(default_factory=lambda: {"source": "chart"})
    veiling: dict = field(default_factory=lambda: {"source": "spectral"})
    chart_layout: str | None = None
    chart_trim: float = 0.1
    sparse_map: str | None = None
    scale: float = 1.0
    patch_px: int = DEFAULT_PATCH_PX
    eps_direct: float = EPS_DIRECT
    assume_linear: bool = False

    def __post_init__(self):
        if isinstance(self.scene, dict):
            try:
                self.scene = SceneParams(**self.scene)
            except TypeError as exc:
                raise ValidationError(f"bad scene parameters: {exc}") from None
        src = self.coefficients.get("source")
        if src not in COEFF_SOURCES:
            raise ValidationError(f"coefficient source must be one of {COEFF_SOURCES}, got {src!r}")
        vsrc = self.veiling.get("source")
        if vsrc not in VEILING_SOURCES:
            raise ValidationError(f"veiling source must be one of {VEILING_SOURCES}, got {vsrc!r}")
        if src in ("chart", "optimize") and not self.chart_layout:
            raise ValidationError(f"coefficient source {src!r} requires chart_layout")

    @classmethod
    def from_dict(cls, d: dict, base_dir=None) -> "FrameJob":
        d = dict(d)
        if base_dir is not None:
            base = Path(base_dir)
            for key in ("image", "output", "chart_layout", "sparse_map"):
                if d.get(key):
                    d[key] = str(base / d[key])
            coeffs = d.get("coefficients")
            if isinstance(coeffs, dict) and coeffs.get("file"):
                d["coefficients"] = {**coeffs, "file": str(base / coeffs["file"])}
        try:
            return cls(**d)
        except TypeError as exc:
            raise ValidationError(f"bad job definition: {exc}") from None

    @classmethod
    def load(cls, path) -> "FrameJob":
        path = Path(path)
        try:
            d = json.loads(path.read_text())
        except FileNotFoundError:
            raise ValidationError(f"{path}: job file not found") from None
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON: {exc}") from None
        return cls.from_dict(d, base_dir=path.parent)


def load_coefficients(path) -> AttenuationCoeffs:
    try:
        return AttenuationCoeffs.from_json(Path(path).read_text())
    except FileNotFoundError:
        raise ValidationError(f"{path}: coefficient file not found") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc}") from None


def resolve_veiling(job: FrameJob, image) -> VeilingLight:
    src = job.veiling["source"]
    if src == "manual":
        if "b_inf" not in job.veiling:
            raise ValidationError("manual veiling source needs b_inf")
        return VeilingLight(job.veiling["b_inf"])
    if src == "background":
        return background_veiling_estimate(image, job.veiling.get("percentile", 0.1))
    return veiling_light(job.scene.context())


def resolve_coefficients(job: FrameJob, image, b_inf: VeilingLight, z: float) -> AttenuationCoeffs:
    cfg = job.coefficients
    if cfg["source"] == "manual":
        if cfg.get("file"):
            return load_coefficients(cfg["file"])
        return AttenuationCoeffs(cfg.get("beta_d", (0, 0, 0)), cfg.get("beta_b", (0, 0, 0)), "manual")
    layout = ChartLayout.load(job.chart_layout)
    ref = reference_chart()
    obs = sample_patches(image, layout, job.chart_trim)
    coeffs = estimate_closed_form(obs, ref, b_inf, z)
    if cfg["source"] == "optimize":
        coeffs = refine_least_squares(obs, ref, b_inf, z, coeffs)
    return coeffs


def sidecar_path(output) -> Path:
    return Path(output).with_suffix(".json")


def _resolve(job: FrameJob, image, z: float):
    b_inf = resolve_veiling(job, image)
    coeffs = resolve_coefficients(job, image, b_inf, z)
    return b_inf, coeffs


def _sidecar(job, b_inf, coeffs, **extra) -> dict:
    return {
        "image": job.image,
        "depth_m": job.scene.depth_m,
        "b_inf": [float(v) for v in b_inf.b_inf],
        **coeffs.to_dict(),
        "coefficient_source": job.coefficients["source"],
        "veiling_source": job.veiling["source"],
        "eps_direct": job.eps_direct,
        **extra,
    }


def _write_outputs(job, corrected, sidecar):
    if job.output:
        write_image(job.output, corrected, job.assume_linear)
        sidecar_path(job.output).write_text(json.dumps(sidecar, indent=2))


def correct_frame(job: FrameJob) -> tuple[np.ndarray, dict]:
    """Run a full-frame correction at scalar range ``job.z``.

    Returns the corrected linear image and the sidecar record; both are also
    written to disk when ``job.output`` is set.
    """
    if job.z is None:
        raise ValidationError("correct_frame needs a scalar range z")
    image = read_image(job.image, job.assume_linear)
    b_inf, coeffs = _resolve(job, image, job.z)
    corrected = _invert(image, coeffs.beta_d, coeffs.beta_b, b_inf.b_inf,
                        range_field(job.z, image.shape), job.eps_direct)
    sidecar = _sidecar(job, b_inf, coeffs, z=float(job.z))
    _write_outputs(job, corrected, sidecar)
    return corrected, sidecar


def correct_sparse_job(job: FrameJob) -> tuple[np.ndarray, dict]:
    """Patch-wise correction around the keypoints of ``job.sparse_map``.

    Chart-based coefficient sources use ``job.z`` as the chart range.
    """
    if not job.sparse_map:
        raise ValidationError("sparse correction needs sparse_map")
    rmap = ingest_sparse_map(job.sparse_map, job.scale)
    image = read_image(job.image, job.assume_linear)
    if job.coefficients["source"] != "manual" and job.z is None:
        raise ValidationError("chart-based coefficients need the chart range z")
    b_inf, coeffs = _resolve(job, image, job.z)
    corrected = correct_sparse(image, rmap, coeffs, b_inf, job.patch_px, job.eps_direct)
    sidecar = _sidecar(job, b_inf, coeffs, n_keypoints=len(rmap.points), scale=rmap.scale,
                       patch_px=job.patch_px)
    _write_outputs(job, corrected, sidecar)
    return corrected, sidecar


# -- simulation --------------------------------------------------------------

def simulate(original, z, ctx: SceneContext | None = None, coeffs: AttenuationCoeffs | None = None,
             b_inf: VeilingLight | None = None, rho: float = 1.0) -> tuple[np.ndarray, dict]:
    """Degrade ``original`` through water.

    Coefficients default to the wideband values the water tables imply at the
    (mean) range, and the veiling light to the spectral integral; both
    defaults need ``ctx``.
    """
    original = as_linear_image(original)
    zf = np.asarray(z, dtype=float)
    if (coeffs is None or b_inf is None) and ctx is None:
        raise ValidationError("simulate needs a scene context unless coefficients and veiling light are given")
    if coeffs is None:
        coeffs = wideband_attenuation(ctx, float(zf.mean()))
    if b_inf is None:
        b_inf = veiling_light(ctx)
    if ctx is not None:
        rho = ctx.reflectance_rho
    degraded = forward_degrade(original, coeffs, b_inf, z, rho)
    sidecar = {
        **coeffs.to_dict(),
        "b_inf": [float(v) for v in b_inf.b_inf],
        "z": float(zf) if zf.ndim == 0 else {"map_shape": list(zf.shape), "mean": float(zf.mean())},
        "reflectance_rho": rho,
    }
    if ctx is not None:
        sidecar.update(
            water_type=ctx.water.type_name,
            depth_m=ctx.depth_m,
            exposure_k=ctx.exposure_k,
            surface_light_e0=ctx.surface_light_e0,
            ambient_model=ctx.ambient_model,
        )
    return degraded, sidecar


# -- evaluation --------------------------------------------------------------

@dataclass
class EvaluationResult:
    accuracy: list[tuple[str, str, float]] = field(default_factory=list)
    consistency: list[tuple[str, str, float, float]] = field(default_factory=list)
    messages: list[str] = field(default_factory=list)

    def write_accuracy_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["patch", "method", "distance"])
            w.writerows((p, m, f"{d:.6f}") for p, m, d in self.accuracy)

    def write_consistency_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["patch", "method", "variance", "mean_error"])
            w.writerows((p, m, f"{v:.6f}", f"{e:.6f}") for p, m, v, e in self.consistency)


def evaluate(series: dict[str, list], layout: ChartLayout, ref: ChartReference | None = None,
             patches=None, trim: float = 0.1, accuracy_frame: int = -1,
             normalization: str = "l2") -> EvaluationResult:
    """Score corrected frame series against the chart reference.

    ``series`` maps a method label to its frames (linear images) ordered by
    depth. Accuracy is reported for ``accuracy_frame`` (default: the deepest);
    consistency uses every frame and is skipped for single-frame series.
    """
    if layout is None:
        raise ValidationError("evaluation needs a chart layout")
    ref = ref or reference_chart()
    patches = tuple(patches) if patches else tuple(p.name for p in layout.patches)
    result = EvaluationResult()
    for method, frames in series.items():
        if not frames:
            raise ValidationError(f"method {method!r} has no frames")
        observed = [sample_patches(f, layout, trim) for f in frames]
        acc = observed[accuracy_frame]
        for name in patches:
            result.accuracy.append((name, method, normalized_color_distance(acc[name], ref[name], normalization)))
        if len(frames) < 2:
            msg = f"{method}: consistency skipped, series has a single frame"
            log.warning(msg)
            result.messages.append(msg)
            continue
        for name in patches:
            rep = consistency_stats([o[name] for o in observed], ref[name])
            result.consistency.append((name, method, rep.variance, rep.mean_error))
    return result
