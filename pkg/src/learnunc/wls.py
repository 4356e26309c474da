"""Heteroscedastic weighted least squares through the origin.

Everything is conditional on the covariates ``x``: the design is fixed data
and only the noise is random.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDesignError, UsageError
from .foundations import (
    RandomStream,
    corr2_estimate,
    corr_estimate,
    mean_estimate,
    second_moment_estimate,
    simulate,
    var_estimate,
)
from .report import CheckReport

NOISE_KINDS = ("gaussian", "two-point")


def _vec(a, name):
    v = np.atleast_1d(np.asarray(a, dtype=float))
    if v.ndim != 1 or not np.all(np.isfinite(v)):
        raise UsageError(f"{name} must be a finite 1-d array")
    return v


@dataclass(frozen=True, eq=False)
class HeteroDesign:
    x: np.ndarray
    sigma2: np.ndarray
    theta: float = 0.0

    def __post_init__(self):
        x, s2 = _vec(self.x, "x"), _vec(self.sigma2, "sigma2")
        if x.size < 2 or x.size != s2.size:
            raise UsageError("x and sigma2 need the same length n >= 2")
        if np.any(s2 <= 0):
            raise UsageError("noise variances must be positive")
        if not np.any(x != 0):
            raise DegenerateDesignError("all covariates are zero")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "sigma2", s2)

    @property
    def n(self) -> int:
        return self.x.size


@dataclass(frozen=True, eq=False)
class WeightVector:
    w: np.ndarray

    def __post_init__(self):
        w = _vec(self.w, "w")
        if np.any(w <= 0):
            raise UsageError("weights must be positive")
        object.__setattr__(self, "w", w)

    @classmethod
    def ols(cls, n: int) -> WeightVector:
        return cls(np.ones(n))

    @classmethod
    def blue(cls, design: HeteroDesign) -> WeightVector:
        return cls(1.0 / design.sigma2)


@dataclass(frozen=True)
class PredictionTarget:
    x_star: float
    var_ystar: float

    def __post_init__(self):
        if not self.var_ystar > 0:
            raise UsageError("var_ystar must be positive")


@dataclass(frozen=True, eq=False)
class WlsClosedForm:
    t_w: float
    t_wsigma: float
    var_w: float
    var_blue: float
    rr: float
    corr_resid: np.ndarray
    degenerate: np.ndarray = field(repr=False, default=None)

    def to_dict(self):
        return {"t_w": self.t_w, "t_wsigma": self.t_wsigma, "var_w": self.var_w,
                "var_blue": self.var_blue, "rr": self.rr, "corr_resid": self.corr_resid.tolist()}


def _check(design: HeteroDesign, weights: WeightVector):
    if weights.w.size != design.n:
        raise UsageError(f"{weights.w.size} weights for a design of size {design.n}")


def wls_estimate(y, design: HeteroDesign, weights: WeightVector):
    """Weighted LS slope; ``y`` may be (n,) or a batch (reps, n)."""
    _check(design, weights)
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != design.n:
        raise UsageError("y length does not match the design")
    wx = weights.w * design.x
    t_w = wx @ design.x
    if t_w == 0:
        raise DegenerateDesignError("sum(w * x**2) is zero")
    return y @ wx / t_w


def residuals(y, design: HeteroDesign, weights: WeightVector):
    y = np.asarray(y, dtype=float)
    theta = wls_estimate(y, design, weights)
    return y - np.multiply.outer(theta, design.x)


def closed_form(design: HeteroDesign, weights: WeightVector) -> WlsClosedForm:
    _check(design, weights)
    x, s2, w = design.x, design.sigma2, weights.w
    t_w = float(w @ x**2)
    t_ws = float((w * w * x * x) @ s2)
    var_w = t_ws / t_w**2
    var_blue = 1.0 / float(x**2 @ (1 / s2))
    rr = min(max(1.0 - var_blue / var_w, 0.0), 1.0)
    # Same algebra as x_j (w_j s2_j T_w - T_ws) over sqrt(T_ws [x_j^2 T_ws + s2_j (T_w^2 - 2 T_w w_j x_j^2)]),
    # regrouped into leave-one-out sums so nothing cancels.
    off = ~np.eye(x.size, dtype=bool)
    wx2, ws2 = w * x * x, w * s2
    num = x * ((wx2[None, :] * (ws2[:, None] - ws2[None, :])) * off).sum(axis=1)
    t_w_others = (wx2[None, :] * off).sum(axis=1)
    t_ws_others = ((wx2 * ws2)[None, :] * off).sum(axis=1)
    den2 = t_ws * (x * x * t_ws_others + s2 * t_w_others**2)
    # a residual with zero variance (possible when the other x's vanish) has no correlation
    degenerate = den2 <= 1e-300
    corr = np.where(degenerate, 0.0, num / np.sqrt(np.where(degenerate, 1.0, den2)))
    return WlsClosedForm(t_w, t_ws, var_w, var_blue, rr, np.clip(corr, -1.0, 1.0), degenerate)


def corr_n2(design: HeteroDesign, weights: WeightVector) -> float:
    """Squared estimator/residual correlation for two observations, in its compact form."""
    _check(design, weights)
    if design.n != 2:
        raise UsageError("corr_n2 is defined for n = 2")
    (x1, x2), (w1, w2) = design.x, weights.w
    if x1 == 0 or x2 == 0:
        raise UsageError("corr_n2 needs both covariates nonzero")
    s1, s2 = np.sqrt(design.sigma2)
    num = x1**2 * x2**2 * (w1 * s1 / s2 - w2 * s2 / s1) ** 2
    den = (w1**2 * x1**2 * s1**2 + w2**2 * x2**2 * s2**2) * (x1**2 / s1**2 + x2**2 / s2**2)
    return float(num / den)


def identity_rr_equals_rho2(design: HeteroDesign, weights: WeightVector, tol=1e-12) -> CheckReport:
    rho2 = corr_n2(design, weights)
    cf = closed_form(design, weights)
    return CheckReport.identity(
        "wls-rho2-equals-rr", rho2, cf.rr, tol, "rho2-rr-identity-n2",
        detail={"corr_resid_squared": (cf.corr_resid**2).tolist()})


def rr_bound_check(design: HeteroDesign, weights: WeightVector, tol=1e-12) -> CheckReport:
    """``max_j rho^2(theta_w, r_j) <= RR`` for any n; the gap is reported, not asserted."""
    cf = closed_form(design, weights)
    rho2 = float(np.max(cf.corr_resid**2))
    return CheckReport.inequality("wls-rho2-below-rr", rho2, cf.rr, tol, "learning-uncertainty-bound",
                                  detail={"gap": cf.rr - rho2, "n": design.n})


def _linear_rho2(u, v, sigma2) -> float:
    """Squared correlation of two linear forms u'e, v'e of independent noise."""
    cov = (u * v) @ sigma2
    vu, vv = (u * u) @ sigma2, (v * v) @ sigma2
    if vu == 0 or vv == 0:
        return 0.0
    return float(cov * cov / (vu * vv))


def corr_scaling_invariance(design: HeteroDesign, weights: WeightVector, c: float, c_tilde: float,
                            tol=1e-12) -> CheckReport:
    """rho^2 of the rescaled pair ``c (theta_w - theta)``, ``c_tilde r_1`` against RR."""
    _check(design, weights)
    if design.n != 2:
        raise UsageError("the scaling identity is stated for n = 2")
    if c == 0 or c_tilde == 0:
        raise UsageError("scaling constants must be nonzero")
    x, w = design.x, weights.w
    a = w * x / (w @ x**2)
    e1 = np.eye(design.n)[0]
    scaled = _linear_rho2(c * a, c_tilde * (e1 - x[0] * a), design.sigma2)
    rr = closed_form(design, weights).rr
    return CheckReport.identity(
        "wls-scaled-rho2-equals-rr", scaled, rr, tol, "rho2-rr-identity-n2",
        detail={"c": c, "c_tilde": c_tilde,
                "unscaled_rho2": _linear_rho2(a, e1 - x[0] * a, design.sigma2)})


def prediction_gamma(design: HeteroDesign, weights: WeightVector, target: PredictionTarget,
                     j: int = 0):
    """Adjustment factor for predicting a new outcome at ``x_star``.

    Returns ``(gamma, rho2_pred, rr_pred)`` where ``rho2_pred`` is the squared
    correlation between the prediction error and residual ``j``.
    """
    cf = closed_form(design, weights)
    sv = target.x_star**2 * cf.var_w
    gamma = sv / (target.var_ystar + sv)
    return gamma, gamma * float(cf.corr_resid[j] ** 2), gamma * cf.rr


def _noise(block, sd, kind):
    n = sd.size
    if kind == "gaussian":
        return block.normal(n) * sd
    # centered two-point noise +-sigma_i keeps the first two moments
    return np.where(block.uniform(n) < 0.5, -1.0, 1.0) * sd


def mc_verify(design: HeteroDesign, weights: WeightVector, target: PredictionTarget | None = None,
              reps: int = 200_000, stream: RandomStream | None = None, noise: str = "gaussian",
              c_tilde: float = 1.0, workers: int = 1) -> list[CheckReport]:
    """Simulate the regression and compare every closed-form moment with its MC estimate."""
    _check(design, weights)
    if noise not in NOISE_KINDS:
        raise UsageError(f"noise must be one of {NOISE_KINDS}")
    stream = stream if stream is not None else RandomStream(0)
    x, w, n = design.x, weights.w, design.n
    sd = np.sqrt(design.sigma2)
    blue = WeightVector.blue(design)
    cf = closed_form(design, weights)

    def sampler(block):
        y = design.theta * x + _noise(block, sd, noise)
        th = wls_estimate(y, design, weights)
        r = y - np.outer(th, x)
        out = {"theta": th, "theta_blue": wls_estimate(y, design, blue),
               "normal_eq": r @ (w * x), "normal_scale": np.abs(y) @ np.abs(w * x)}
        out.update({f"r{j}": r[:, j] for j in range(n)})
        if target is not None:
            y_star = design.theta * target.x_star + math.sqrt(target.var_ystar) * block.normal(1)[:, 0]
            out["pred_err"] = y_star - th * target.x_star
        return out

    cols = simulate(sampler, reps, stream, workers)
    th, r1 = cols["theta"], cols["r0"]
    prov = "wls-moments"
    reports = [
        CheckReport.mc("wls-unbiased", mean_estimate(th), design.theta, prov),
        CheckReport.mc("wls-variance", var_estimate(th), cf.var_w, prov),
        CheckReport.mc("blue-variance", var_estimate(cols["theta_blue"]), cf.var_blue, prov),
    ]
    for j in range(n):
        reports.append(CheckReport.mc(f"wls-corr-resid-{j + 1}", corr_estimate(th, cols[f"r{j}"]),
                                      float(cf.corr_resid[j]), prov))
    rho2 = corr2_estimate(th - design.theta, c_tilde * r1)
    if n == 2:
        reports.append(CheckReport.mc("wls-rho2-vs-rr", rho2, cf.rr, "rho2-rr-identity-n2"))
    else:
        reports.append(CheckReport.mc("wls-rho2-resid-1", rho2, float(cf.corr_resid[0] ** 2), prov,
                                      detail={"rr": cf.rr}))

    scale = float(np.max(cols["normal_scale"]))
    detail = {"max_abs_weighted_sum": float(np.max(np.abs(cols["normal_eq"])))}
    if n == 2:
        s = np.abs(cols["r0"] + cols["r1"])
        detail["max_abs_residual_sum"] = float(s.max())
        detail["w1x1_equals_w2x2"] = bool(np.isclose(w[0] * x[0], w[1] * x[1]))
    reports.append(CheckReport.identity("wls-normal-equation", detail["max_abs_weighted_sum"], 0.0,
                                        1e-10 * max(1.0, scale), "weighted-normal-equation",
                                        detail=detail))

    if target is not None:
        gamma, rho2_pred, _ = prediction_gamma(design, weights, target)
        pe = cols["pred_err"]
        reports.append(CheckReport.mc("prediction-risk", second_moment_estimate(pe),
                                      target.var_ystar + target.x_star**2 * cf.var_w, prov))
        reports.append(CheckReport.mc("prediction-rho2", corr2_estimate(pe, r1), rho2_pred,
                                      "prediction-adjustment", detail={"gamma": gamma}))
    for rep in reports:
        rep.detail.setdefault("noise", noise)
    return reports
