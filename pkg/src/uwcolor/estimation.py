"""Attenuation-coefficient estimation from colour-chart observations.

Two estimators:

* ``estimate_closed_form`` solves the formation model exactly from the white
  and black patches. Their difference cancels backscatter and gives beta_D;
  the black patch then yields the backscatter and hence beta_B.
* ``refine_least_squares`` fits beta_D, beta_B per channel over all patches with
  a bounded Levenberg-Marquardt iteration using analytic derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chart import ChartObservation, ChartReference
from .errors import NumericalError, ValidationError
from .formation import AttenuationCoeffs, VeilingLight, formation_model

# Backscatter may not reach this fraction of the veiling light; keeps beta_B finite.
BACKSCATTER_CEILING = 1.0 - 1e-6

STEP_TOL = 1e-10
MAX_ITER = 200


def _paired(obs: ChartObservation, ref: ChartReference, names=None):
    names = obs.names if names is None else tuple(names)
    try:
        j = ref.select(names)
    except KeyError as exc:
        raise ValidationError(f"observed patch {exc} is not in the reference chart") from None
    i = np.stack([obs[n] for n in names])
    return j, i


def estimate_closed_form(obs: ChartObservation, ref: ChartReference, b_inf: VeilingLight,
                         z: float) -> AttenuationCoeffs:
    """Exact per-channel beta_D, beta_B from the white and black patches at range ``z``."""
    if not z > 0:
        raise ValidationError(f"range must be > 0, got {z}")
    try:
        i_w, i_b = obs["white"], obs["black"]
    except KeyError as exc:
        raise ValidationError(f"observation lacks the {exc} patch") from None
    j_w, j_b = ref["white"], ref["black"]
    if np.any(j_w <= j_b):
        raise ValidationError("reference white must exceed reference black in every channel")
    if np.any(i_w <= i_b):
        raise ValidationError("degenerate observation: white patch is not brighter than black")

    beta_d = np.maximum(-np.log((i_w - i_b) / (j_w - j_b)) / z, 0.0)
    backscatter = i_b - j_b * np.exp(-beta_d * z)
    binf = b_inf.b_inf
    if np.any((binf == 0) & (backscatter > 0)):
        raise ValidationError("backscatter observed but veiling light is zero")
    with np.errstate(divide="ignore", invalid="ignore"):
        frac = np.where(binf > 0, backscatter / binf, 0.0)
    frac = np.clip(frac, 0.0, BACKSCATTER_CEILING)
    beta_b = np.maximum(-np.log1p(-frac) / z, 0.0)
    return AttenuationCoeffs(beta_d, beta_b, "estimated")


@dataclass
class FitData:
    """Stacked observations for one fit: one row per (frame, patch).

    ``j``, ``i`` are (n, 3); ``b_inf`` is (n, 3); ``z`` is (n, 1).
    """

    j: np.ndarray
    i: np.ndarray
    b_inf: np.ndarray
    z: np.ndarray

    @classmethod
    def single(cls, obs, ref, b_inf: VeilingLight, z: float) -> "FitData":
        return cls.pooled([(obs, b_inf, z)], ref)

    @classmethod
    def pooled(cls, frames, ref: ChartReference) -> "FitData":
        """``frames`` is a sequence of (ChartObservation, VeilingLight, z)."""
        js, is_, bs, zs = [], [], [], []
        for obs, b_inf, z in frames:
            if not z > 0:
                raise ValidationError(f"range must be > 0, got {z}")
            j, i = _paired(obs, ref)
            js.append(j)
            is_.append(i)
            bs.append(np.broadcast_to(b_inf.b_inf, j.shape))
            zs.append(np.full((len(j), 1), float(z)))
        if not js:
            raise ValidationError("no observations to fit")
        return cls(np.vstack(js), np.vstack(is_), np.vstack(bs), np.vstack(zs))

    def residuals(self, beta_d, beta_b) -> np.ndarray:
        return formation_model(self.j, beta_d, beta_b, self.b_inf, self.z) - self.i

    def jacobian(self, beta_d, beta_b) -> tuple[np.ndarray, np.ndarray]:
        """Partial derivatives of the residuals w.r.t. beta_D and beta_B, each (n, 3)."""
        d_beta_d = -self.z * self.j * np.exp(-beta_d * self.z)
        d_beta_b = self.z * self.b_inf * np.exp(-beta_b * self.z)
        return d_beta_d, d_beta_b


def residual(coeffs: AttenuationCoeffs, obs: ChartObservation, ref: ChartReference,
             b_inf: VeilingLight, z: float) -> float:
    """Sum of squared model-minus-observation errors over patches and channels."""
    data = FitData.single(obs, ref, b_inf, z)
    return float(np.sum(data.residuals(coeffs.beta_d, coeffs.beta_b) ** 2))


def objective_gradient(data: FitData, beta_d, beta_b) -> np.ndarray:
    """Gradient of the summed squared residual, shape (2, 3): rows beta_D, beta_B."""
    r = data.residuals(beta_d, beta_b)
    g_d, g_b = data.jacobian(beta_d, beta_b)
    return np.stack([2 * np.sum(r * g_d, axis=0), 2 * np.sum(r * g_b, axis=0)])


def _fit_channel(j, i, b_inf, z, p0, step_tol=STEP_TOL, max_iter=MAX_ITER):
    """Bounded LM for one channel; all inputs are 1-D over observation rows."""
    p = np.maximum(np.asarray(p0, dtype=float), 0.0)

    def resid(q):
        return j * np.exp(-q[0] * z) + b_inf * -np.expm1(-q[1] * z) - i

    r = resid(p)
    cost = float(r @ r)
    if not np.isfinite(cost):
        raise NumericalError("non-finite residual at initialization")
    lam = 1e-3
    for _ in range(max_iter):
        jac = np.column_stack([-z * j * np.exp(-p[0] * z), z * b_inf * np.exp(-p[1] * z)])
        jtj = jac.T @ jac
        g = jac.T @ r
        scale = np.maximum(np.diag(jtj), 1e-12)
        step_norm = np.inf
        while True:
            try:
                delta = np.linalg.solve(jtj + lam * np.diag(scale), -g)
            except np.linalg.LinAlgError:
                delta = np.zeros(2)
            trial = np.maximum(p + delta, 0.0)
            step_norm = float(np.linalg.norm(trial - p))
            if step_norm < step_tol:
                break
            r_trial = resid(trial)
            cost_trial = float(r_trial @ r_trial)
            if not np.isfinite(cost_trial):
                raise NumericalError("non-finite residual during refinement")
            if cost_trial < cost:
                p, r, cost = trial, r_trial, cost_trial
                lam = max(lam / 10, 1e-12)
                break
            lam *= 10
            if lam > 1e16:
                step_norm = 0.0
                break
        if step_norm < step_tol:
            break
    return p, cost


def refine_least_squares(obs: ChartObservation, ref: ChartReference, b_inf: VeilingLight,
                         z: float, init: AttenuationCoeffs) -> AttenuationCoeffs:
    """Least-squares refinement of ``init`` over every observed patch.

    The returned coefficients never have a larger residual than ``init``.
    """
    if len(obs.names) < 3:
        raise ValidationError("least-squares refinement needs at least 3 patches")
    return refine_pooled(FitData.single(obs, ref, b_inf, z), init)


def refine_pooled(data: FitData, init: AttenuationCoeffs) -> AttenuationCoeffs:
    """Fit one coefficient set shared by all rows of ``data`` (e.g. several depths)."""
    if not (np.all(np.isfinite(data.i)) and np.all(np.isfinite(data.j))):
        raise NumericalError("non-finite observations")
    beta_d = np.empty(3)
    beta_b = np.empty(3)
    for c in range(3):
        p, _ = _fit_channel(data.j[:, c], data.i[:, c], data.b_inf[:, c], data.z[:, 0],
                            (init.beta_d[c], init.beta_b[c]))
        beta_d[c], beta_b[c] = p
    return AttenuationCoeffs(beta_d, beta_b, "optimized")


def synthesize_observation(ref: ChartReference, coeffs: AttenuationCoeffs, b_inf: VeilingLight,
                           z: float, names=None, noise=None) -> ChartObservation:
    """Chart observation predicted by the formation model, optionally plus ``noise``.

    ``noise`` is an (n, 3) array added before clipping to [0, 1].
    """
    names = ref.names if names is None else tuple(names)
    j = ref.select(names)
    i = formation_model(j, coeffs.beta_d, coeffs.beta_b, b_inf.b_inf, z)
    if noise is not None:
        i = i + noise
    return ChartObservation.from_colors(names, np.clip(i, 0.0, 1.0))
