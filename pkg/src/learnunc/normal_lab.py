"""The i.i.d. normal example: mean error, its variance-based assessment, and
how their relationship changes when sigma^2 itself varies across studies."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.stats import ks_2samp

from .errors import UsageError
from .foundations import RandomStream, corr_estimate, simulate
from .report import CheckReport

# n above this switches from simulating every observation to (mean, chi-square)
DIRECT_MAX_N = 50
CEILING = 1 / math.sqrt(3)
KS_C_1PCT = 1.628


@dataclass(frozen=True)
class NormalModel:
    mu: float = 0.0
    sigma2: float = 1.0
    n: int = 5

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise UsageError("sigma2 must be positive")
        if int(self.n) != self.n or self.n < 2:
            raise UsageError("n must be an integer >= 2")


PRIOR_KINDS = ("point", "two-point", "log-normal", "inverse-gamma")


@dataclass(frozen=True)
class PriorSpec:
    """Prior on sigma^2 (and optionally mu) defining a joint replication.

    ``params``: point ``{"value"}``; two-point ``{"low", "high", "p_high"}``;
    log-normal ``{"mean_log", "var_log"}``; inverse-gamma ``{"shape", "scale"}``.
    ``mu_sd = 0`` puts a point mass at ``mu_mean``.
    """

    kind: str
    params: dict = field(default_factory=dict)
    mu_mean: float = 0.0
    mu_sd: float = 0.0

    def __post_init__(self):
        p = self.params
        if self.kind not in PRIOR_KINDS:
            raise UsageError(f"prior kind must be one of {PRIOR_KINDS}")
        if self.mu_sd < 0:
            raise UsageError("mu_sd must be nonnegative")
        if self.kind == "point" and not p.get("value", 0) > 0:
            raise UsageError("point prior needs value > 0")
        if self.kind == "two-point":
            if not (0 < p["low"] and 0 < p["high"] and 0 <= p["p_high"] <= 1):
                raise UsageError("two-point prior needs positive support and p_high in [0, 1]")
        if self.kind == "log-normal" and not p["var_log"] >= 0:
            raise UsageError("var_log must be nonnegative")
        if self.kind == "inverse-gamma":
            if not p["scale"] > 0:
                raise UsageError("inverse-gamma scale must be positive")
            if not p["shape"] > 4:
                raise UsageError(
                    f"inverse-gamma shape {p['shape']} <= 4: sigma^2 then lacks a finite fourth "
                    "moment, so the correlation and its MC standard error are undefined")

    @classmethod
    def point(cls, value: float = 1.0, **kw) -> PriorSpec:
        return cls("point", {"value": value}, **kw)

    @classmethod
    def two_point(cls, low: float, high: float, p_high: float, **kw) -> PriorSpec:
        return cls("two-point", {"low": low, "high": high, "p_high": p_high}, **kw)

    @classmethod
    def two_point_for_gamma2(cls, gamma2: float, low: float = 1.0, p_high: float | None = None,
                             **kw) -> PriorSpec:
        """Two-point prior ``{low, high}`` whose squared coefficient of variation is ``gamma2``."""
        if gamma2 < 0:
            raise UsageError("gamma2 must be nonnegative")
        if gamma2 == 0:
            return cls.point(low, **kw)
        q = min(0.1, 0.5 / (1 + gamma2)) if p_high is None else p_high
        if not 0 < q < 1 / (1 + gamma2):
            raise UsageError(f"p_high must lie in (0, {1 / (1 + gamma2)}) for gamma2 = {gamma2}")
        g, s = math.sqrt(gamma2), math.sqrt(q * (1 - q))
        high = low * (g * (1 - q) + s) / (s - g * q)
        return cls.two_point(low, high, q, **kw)

    @classmethod
    def log_normal(cls, mean_log: float, var_log: float, **kw) -> PriorSpec:
        return cls("log-normal", {"mean_log": mean_log, "var_log": var_log}, **kw)

    @classmethod
    def inverse_gamma(cls, shape: float, scale: float = 1.0, **kw) -> PriorSpec:
        return cls("inverse-gamma", {"shape": shape, "scale": scale}, **kw)

    @property
    def gamma2(self) -> float:
        """V(sigma^2) / E(sigma^2)^2 under the prior."""
        p = self.params
        if self.kind == "point":
            return 0.0
        if self.kind == "two-point":
            lo, hi, q = p["low"], p["high"], p["p_high"]
            m = (1 - q) * lo + q * hi
            return q * (1 - q) * (hi - lo) ** 2 / m**2
        if self.kind == "log-normal":
            return math.expm1(p["var_log"])
        return 1.0 / (p["shape"] - 2)

    def draw_sigma2(self, block) -> np.ndarray:
        p = self.params
        if self.kind == "point":
            return np.full(len(block), float(p["value"]))
        if self.kind == "two-point":
            return np.where(block.uniform(1)[:, 0] < p["p_high"], p["high"], p["low"])
        if self.kind == "log-normal":
            return np.exp(p["mean_log"] + math.sqrt(p["var_log"]) * block.normal(1)[:, 0])
        return p["scale"] / block.gamma(p["shape"], 1)[:, 0]

    def draw_mu(self, block) -> np.ndarray:
        if self.mu_sd == 0:
            return np.full(len(block), float(self.mu_mean))
        return self.mu_mean + self.mu_sd * block.normal(1)[:, 0]

    def to_dict(self):
        return {"kind": self.kind, "params": dict(self.params), "gamma2": self.gamma2,
                "mu_mean": self.mu_mean, "mu_sd": self.mu_sd}


def sample_summaries(block, mu, sigma2, n: int):
    """Sample mean and S^2 (divisor n-1) for each replication of the block."""
    mu = np.broadcast_to(mu, (len(block),))
    sd = np.sqrt(np.broadcast_to(sigma2, (len(block),)))
    if n <= DIRECT_MAX_N:
        x = mu[:, None] + sd[:, None] * block.normal(n)
        return x.mean(axis=1), x.var(axis=1, ddof=1)
    xbar = mu + sd * block.normal(1)[:, 0] / math.sqrt(n)
    chi2 = 2.0 * block.gamma((n - 1) / 2, 1)[:, 0]
    return xbar, sd**2 * chi2 / (n - 1)


def conditional_independence_check(model: NormalModel, reps: int = 200_000,
                                   stream: RandomStream | None = None, workers: int = 1) -> CheckReport:
    """corr(S^2/n, (Xbar - mu)^2) at fixed (mu, sigma^2) against 0."""
    stream = stream if stream is not None else RandomStream(0)
    n = model.n

    def sampler(block):
        xbar, s2 = sample_summaries(block, model.mu, model.sigma2, n)
        return s2 / n, (xbar - model.mu) ** 2

    est_sq, err_sq = simulate(sampler, reps, stream, workers).values()
    return CheckReport.mc("normal-conditional-independence", corr_estimate(est_sq, err_sq), 0.0,
                          "mean-variance-independence",
                          detail={"mu": model.mu, "sigma2": model.sigma2, "n": n})


def joint_corr_formula(n: int, gamma2: float) -> float:
    """Correlation of S^2/n with (Xbar - mu)^2 when sigma^2 varies with squared CV ``gamma2``."""
    if n < 2:
        raise UsageError("n must be >= 2")
    if gamma2 < 0:
        raise UsageError("gamma2 must be nonnegative")
    if math.isinf(gamma2):
        return 1 / math.sqrt(3 * (n + 1) / (n - 1))
    a = math.sqrt((n + 1) / (n - 1) * gamma2 + 2 / (n - 1))
    return gamma2 / (a * math.sqrt(3 * gamma2 + 2))


def joint_corr_mc(prior: PriorSpec, n: int, reps: int = 200_000, stream: RandomStream | None = None,
                  workers: int = 1):
    """Draw (mu, sigma^2) from the prior, then data; return the MC correlation estimate."""
    if n < 2:
        raise UsageError("n must be >= 2")
    stream = stream if stream is not None else RandomStream(0)

    def sampler(block):
        s2 = prior.draw_sigma2(block)
        mu = prior.draw_mu(block)
        xbar, s2_hat = sample_summaries(block, mu, s2, n)
        return s2_hat / n, (xbar - mu) ** 2

    return corr_estimate(*simulate(sampler, reps, stream, workers).values())


def joint_corr_check(prior: PriorSpec, n: int, reps: int = 200_000,
                     stream: RandomStream | None = None, workers: int = 1) -> CheckReport:
    est = joint_corr_mc(prior, n, reps, stream, workers)
    return CheckReport.mc("normal-joint-correlation", est, joint_corr_formula(n, prior.gamma2),
                          "joint-replication-correlation", detail={"n": n, "prior": prior.to_dict()})


def bound_scan(n_list, gamma2_list) -> list[CheckReport]:
    """Ceiling and monotonicity of the joint correlation over a grid of (n, gamma2).

    Returns three records: the maximum against 1/sqrt(3), the smallest step
    along increasing gamma2 (must be > 0) and along increasing n (must be >= 0).
    """
    ns = np.array(sorted(set(int(n) for n in n_list)))
    gs = np.array(sorted(set(float(g) for g in gamma2_list)))
    if ns.size == 0 or gs.size == 0:
        raise UsageError("bound_scan needs nonempty lists")
    table = np.array([[joint_corr_formula(n, g) for g in gs] for n in ns])
    step_g = float(np.diff(table, axis=1).min()) if gs.size > 1 else math.inf
    step_n = float(np.diff(table, axis=0).min()) if ns.size > 1 else math.inf
    i, j = np.unravel_index(np.argmax(table), table.shape)
    shape = {"n_values": int(ns.size), "gamma2_values": int(gs.size)}
    return [
        CheckReport.inequality("joint-correlation-ceiling", float(table[i, j]), CEILING, 0.0,
                               "joint-correlation-ceiling",
                               detail={"argmax_n": int(ns[i]), "argmax_gamma2": float(gs[j]), **shape}),
        CheckReport.inequality("joint-correlation-increasing-in-gamma2", step_g, 0.0, 0.0,
                               "joint-replication-correlation", relation=">=",
                               detail={"strict": step_g > 0, **shape}),
        CheckReport.inequality("joint-correlation-nondecreasing-in-n", step_n, 0.0, 0.0,
                               "joint-replication-correlation", relation=">=", detail=shape),
    ]


def observed_information(xbar, ss, n, mu, v):
    """Negative Hessian entries (mu-mu, mu-v, v-v) of the normal log-likelihood at (mu, v).

    The data enter through the mean ``xbar`` and centred sum of squares ``ss``.
    """
    d = np.asarray(xbar, dtype=float) - mu
    total = np.asarray(ss, dtype=float) + n * d**2
    return n / v, n * d / v**2, total / v**3 - n / (2 * v**2)


def inverse_information_at_mle(xbar, ss, n):
    """Variance entry of the inverted 2x2 observed information at the MLE."""
    v = np.asarray(ss, dtype=float) / n
    i_mm, i_mv, i_vv = observed_information(xbar, ss, n, xbar, v)
    return i_mm / (i_mm * i_vv - i_mv**2)


def mle_fisher_demo(model: NormalModel, reps: int = 100_000, stream: RandomStream | None = None,
                    sigma2_values=(0.25, 1.0, 4.0), workers: int = 1) -> list[CheckReport]:
    """Deterministic inverse-information identity, log-variance pivot, mean/variance decorrelation."""
    if model.n < 3:
        raise UsageError("mle_fisher_demo needs n >= 3")
    stream = stream if stream is not None else RandomStream(0)
    n = model.n

    def sampler_for(sigma2):
        def sampler(block):
            xbar, s2 = sample_summaries(block, model.mu, sigma2, n)
            return xbar, s2
        return sampler

    xbar, s2 = simulate(sampler_for(model.sigma2), reps, stream, workers).values()
    ss = (n - 1) * s2
    mle = ss / n
    inv_info = inverse_information_at_mle(xbar, ss, n)
    rel = float(np.max(np.abs(inv_info - 2 * mle**2 / n) / (2 * mle**2 / n)))
    reports = [CheckReport.identity("mle-inverse-information", rel, 0.0, 1e-12, "mle-fisher-information",
                                    detail={"max_relative_difference": rel})]

    pivots = {}
    for s in sigma2_values:
        _, s2_s = simulate(sampler_for(s), reps, stream.derive(f"pivot-sigma2={s!r}"), workers).values()
        pivots[s] = np.log((n - 1) * s2_s / n) - math.log(s)
    crit = KS_C_1PCT * math.sqrt(2 / reps)
    for a, b in combinations(sigma2_values, 2):
        ks = ks_2samp(pivots[a], pivots[b])
        reports.append(CheckReport.inequality(
            f"log-variance-pivot-{a!r}-vs-{b!r}", float(ks.statistic), crit, 0.0,
            "log-variance-location-family", detail={"ks_pvalue": float(ks.pvalue), "n": n}))

    reports.append(CheckReport.mc("mean-variance-uncorrelated", corr_estimate(xbar, s2), 0.0,
                                  "mean-variance-independence", detail={"n": n}))
    return reports
