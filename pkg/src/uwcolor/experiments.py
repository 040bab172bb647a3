"""Synthetic reproductions of the chart-over-depth experiment."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .baselines import cuifm_correct, gray_world
from .chart import grid_layout, reference_chart, render_chart, sample_patches
from .estimation import estimate_closed_form, refine_least_squares
from .formation import (
    SceneContext,
    cuifm_beta,
    forward_degrade,
    invert,
    veiling_light,
    wideband_attenuation,
)
from .imaging import quantize
from .pipeline import EvaluationResult, evaluate
from .spectral import load_camera_response, load_water_type

FIELD_DEPTHS_M = (3.26, 6.06, 8.98, 12.25, 15.11)
CHART_RANGE_M = 0.33


def chart_frame_layout(width: int = 640, height: int = 480):
    """6 x 4 chart layout centred in a ``width`` x ``height`` frame."""
    ref = reference_chart()
    patch = max(4, min(width // 8, height // 6))
    gap = max(1, patch // 4)
    w = 6 * patch + 5 * gap
    h = 4 * patch + 3 * gap
    return grid_layout(ref.names, 4, 6, origin=((width - w) // 2, (height - h) // 2),
                       patch=(patch, patch), gap=gap)


@dataclass
class DepthSeriesResult:
    depths: tuple[float, ...]
    injected: list = field(default_factory=list)
    estimated: list = field(default_factory=list)
    evaluation: EvaluationResult | None = None

    def distances(self, method: str) -> dict[str, float]:
        return {p: d for p, m, d in self.evaluation.accuracy if m == method}

    def mean_errors(self, method: str) -> dict[str, float]:
        return {p: e for p, m, _, e in self.evaluation.consistency if m == method}

    def variances(self, method: str) -> dict[str, float]:
        return {p: v for p, m, v, _ in self.evaluation.consistency if m == method}


def depth_series_experiment(depths=FIELD_DEPTHS_M, water_type: str = "IA", z: float = CHART_RANGE_M,
                            width: int = 640, height: int = 480, ambient_model: str = "exponential",
                            eight_bit: bool = False, background=(0.18, 0.18, 0.18)) -> DepthSeriesResult:
    """Simulate a chart frame per depth and score several correctors.

    Each frame is degraded with the wideband coefficients the water tables
    imply at that depth and range (so beta_D != beta_B), and the spectral
    veiling light. Methods: ``raw``, ``gray_world``, ``cuifm`` (single beam
    attenuation from the tables), ``proposed_est`` (white/black closed form)
    and ``proposed_opt`` (least-squares refined).
    """
    water = load_water_type(water_type)
    camera = load_camera_response()
    ref = reference_chart()
    layout = chart_frame_layout(width, height)
    clean = render_chart(ref, layout, height, width, background)

    result = DepthSeriesResult(tuple(depths))
    series = {m: [] for m in ("raw", "gray_world", "cuifm", "proposed_est", "proposed_opt")}
    for d in depths:
        ctx = SceneContext(water, camera, d, ambient_model=ambient_model)
        coeffs = wideband_attenuation(ctx, z)
        b_inf = veiling_light(ctx)
        raw = forward_degrade(clean, coeffs, b_inf, z)
        if eight_bit:
            raw = quantize(raw)
        result.injected.append(coeffs)

        obs = sample_patches(raw, layout)
        est = estimate_closed_form(obs, ref, b_inf, z)
        opt = refine_least_squares(obs, ref, b_inf, z, est)
        result.estimated.append((est, opt))

        series["raw"].append(raw)
        series["gray_world"].append(gray_world(raw))
        series["cuifm"].append(cuifm_correct(raw, cuifm_beta(ctx), b_inf, z))
        series["proposed_est"].append(invert(raw, est, b_inf, z))
        series["proposed_opt"].append(invert(raw, opt, b_inf, z))

    result.evaluation = evaluate(series, layout, ref)
    return result


def summarize(result: DepthSeriesResult) -> str:
    methods = list(dict.fromkeys(m for _, m, _ in result.evaluation.accuracy))
    lines = [f"{'method':<14}{'max dist':>10}{'mean dist':>11}{'max mean_err':>14}{'mean var':>10}"]
    for m in methods:
        dist = np.array(list(result.distances(m).values()))
        err = np.array(list(result.mean_errors(m).values()))
        var = np.array(list(result.variances(m).values()))
        lines.append(f"{m:<14}{dist.max():>10.5f}{dist.mean():>11.5f}{err.max():>14.5f}{var.mean():>10.5f}")
    return "\n".join(lines)
