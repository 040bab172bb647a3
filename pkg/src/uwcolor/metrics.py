"""Colour accuracy and over-depth consistency metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


def _normalize(v, mode):
    v = np.asarray(v, dtype=float)
    if mode == "l2":
        n = np.linalg.norm(v)
    elif mode == "chromaticity":
        n = v.sum()
    else:
        raise ValidationError(f"unknown normalization {mode!r}")
    if n == 0:
        raise ValidationError("cannot normalize a zero colour")
    return v / n


def normalized_color_distance(observed, reference, normalization: str = "l2") -> float:
    """Euclidean distance between intensity-normalized colours.

    With the default unit-L2 normalization the result lies in [0, 2] and is a
    metric on the unit sphere; ``"chromaticity"`` divides by R + G + B instead.
    """
    return float(np.linalg.norm(_normalize(observed, normalization) - _normalize(reference, normalization)))


@dataclass(frozen=True)
class ConsistencyReport:
    variance: float
    mean_error: float

    def __post_init__(self):
        if self.variance < 0 or self.mean_error < 0:
            raise ValidationError("variance and mean error must be nonnegative")


def consistency_stats(series, reference) -> ConsistencyReport:
    """Spread of one patch's colour across a depth series, and bias of its mean.

    variance: summed population variance of R, G and B over the series.
    mean_error: Euclidean distance from the series mean to ``reference``.
    """
    s = np.asarray(series, dtype=float)
    if s.ndim != 2 or s.shape[1] != 3:
        raise ValidationError("series must be a sequence of RGB triples")
    if len(s) < 2:
        raise ValidationError("consistency needs a series of at least two frames")
    variance = float(np.var(s, axis=0).sum())
    mean_error = float(np.linalg.norm(s.mean(axis=0) - np.asarray(reference, dtype=float)))
    return ConsistencyReport(variance, mean_error)


def average_report(reports) -> ConsistencyReport:
    reports = list(reports)
    return ConsistencyReport(
        float(np.mean([r.variance for r in reports])),
        float(np.mean([r.mean_error for r in reports])),
    )
