"""Built-in scenarios: normal mean/variance, prediction, and weighted least squares."""
from __future__ import annotations

import math

import numpy as np

from ..errors import UsageError
from ..wls import HeteroDesign, WeightVector, closed_form, wls_estimate
from .scenario import AsymptoticScenario, Scenario

# ---------------------------------------------------------------- normal data


def _normal_states(pairs, n):
    return tuple({"label": f"mu={mu!r},sigma2={s2!r}", "mu": mu, "sigma2": s2, "n": n} for mu, s2 in pairs)


def _sample(state, block, extra=0):
    n = state["n"] + extra
    return state["mu"] + math.sqrt(state["sigma2"]) * block.normal(n)


def _mean_assessors(x):
    xbar = x.mean(axis=1)
    return {
        "x1-x2": x[:, 0] - x[:, 1],
        "x1+x2-2xbar": x[:, 0] + x[:, 1] - 2 * xbar,
        "pair-contrast-squares": (x[:, 0] - x[:, 1]) ** 2 - (x[:, 2] - x[:, 3]) ** 2,
    }


def normal_mean_umvue(n: int = 5, pairs=((0.0, 1.0), (3.0, 4.0))) -> Scenario:
    if n < 4:
        raise UsageError("the contrast assessors need n >= 4")

    def simulate(state, block):
        x = _sample(state, block)
        return {"learner": x.mean(axis=1), "target": np.full(len(block), state["mu"]), **_mean_assessors(x)}

    return Scenario("normal-mean-umvue", _normal_states(pairs, n), simulate,
                    ("x1-x2", "x1+x2-2xbar", "pair-contrast-squares"),
                    lambda s: s["sigma2"] / s["n"], optimal=True,
                    description="sample mean for mu; assessors are unbiased estimators of zero")


def normal_mean_single(n: int = 5, pairs=((0.0, 1.0), (-2.0, 0.5))) -> Scenario:
    def simulate(state, block):
        x = _sample(state, block)
        return {"learner": x[:, 0], "target": np.full(len(block), state["mu"]),
                "x1-xbar": x[:, 0] - x.mean(axis=1), "x1-x2": x[:, 0] - x[:, 1]}

    return Scenario("normal-mean-single", _normal_states(pairs, n), simulate, ("x1-xbar", "x1-x2"),
                    lambda s: s["sigma2"] / s["n"],
                    description="first observation as learner for mu")


def _pair_minus_s2(x):
    return (x[:, 0] - x[:, 1]) ** 2 / 2 - x.var(axis=1, ddof=1)


def normal_variance_umvue(n: int = 5, pairs=((0.0, 1.0), (1.0, 2.5))) -> Scenario:
    def simulate(state, block):
        x = _sample(state, block)
        return {"learner": x.var(axis=1, ddof=1), "target": np.full(len(block), state["sigma2"]),
                "pair-minus-s2": _pair_minus_s2(x)}

    return Scenario("normal-variance-umvue", _normal_states(pairs, n), simulate, ("pair-minus-s2",),
                    lambda s: 2 * s["sigma2"] ** 2 / (s["n"] - 1), optimal=True,
                    description="S^2 for sigma^2")


def normal_variance_pair(n: int = 5, pairs=((0.0, 1.0), (1.0, 2.5))) -> Scenario:
    def simulate(state, block):
        x = _sample(state, block)
        return {"learner": (x[:, 0] - x[:, 1]) ** 2 / 2, "target": np.full(len(block), state["sigma2"]),
                "pair-minus-s2": _pair_minus_s2(x)}

    return Scenario("normal-variance-pair", _normal_states(pairs, n), simulate, ("pair-minus-s2",),
                    lambda s: 2 * s["sigma2"] ** 2 / (s["n"] - 1),
                    description="(X1 - X2)^2 / 2 for sigma^2")


def prediction_mean(n: int = 5, pairs=((0.0, 1.0), (2.0, 3.0))) -> Scenario:
    def simulate(state, block):
        x = _sample(state, block, extra=1)
        past = x[:, :-1]
        return {"learner": past.mean(axis=1), "target": x[:, -1], "x1-x2": past[:, 0] - past[:, 1]}

    return Scenario("prediction-mean", _normal_states(pairs, n), simulate, ("x1-x2",),
                    lambda s: s["sigma2"] * (1 + 1 / s["n"]), optimal=True,
                    description="sample mean predicting the next observation")


def prediction_single(n: int = 5, pairs=((0.0, 1.0), (2.0, 3.0))) -> Scenario:
    def simulate(state, block):
        x = _sample(state, block, extra=1)
        past = x[:, :-1]
        return {"learner": past[:, 0], "target": x[:, -1],
                "x1-xbar": past[:, 0] - past.mean(axis=1), "x1-x2": past[:, 0] - past[:, 1]}

    return Scenario("prediction-single", _normal_states(pairs, n), simulate, ("x1-xbar", "x1-x2"),
                    lambda s: s["sigma2"] * (1 + 1 / s["n"]),
                    description="first observation predicting the next one")


# ---------------------------------------------------------------- regression


def _wls_state(label, x, sigma2, theta):
    return {"label": label, "x": tuple(x), "sigma2": tuple(sigma2), "theta": theta}


def _design(state):
    return HeteroDesign(state["x"], state["sigma2"], state["theta"])


def _regression(name, states, learner, assessors, optimal=False, noisy=False, description=""):
    def simulate(state, block):
        d = _design(state)
        y = d.theta * d.x + block.normal(d.n) * np.sqrt(d.sigma2)
        w = WeightVector.blue(d) if learner == "blue" else WeightVector.ols(d.n)
        th = wls_estimate(y, d, w)
        r = y - np.outer(th, d.x)
        out = {"learner": th, "target": np.full(len(block), d.theta)}
        out.update({f"r{j + 1}": r[:, j] for j in range(d.n)})
        if noisy:
            out["r1+z"] = r[:, 0] + block.normal(1)[:, 0]
        return out

    def optimal_risk(state):
        d = _design(state)
        return closed_form(d, WeightVector.blue(d)).var_blue

    return Scenario(name, states, simulate, assessors, optimal_risk, optimal=optimal,
                    description=description)


WLS2_STATES = (
    _wls_state("x=(1,1),sigma2=(1,4)", (1.0, 1.0), (1.0, 4.0), 0.0),
    _wls_state("x=(1,2),sigma2=(1,4)", (1.0, 2.0), (1.0, 4.0), 1.5),
)


def wls_ols() -> Scenario:
    return _regression("wls-ols", WLS2_STATES, "ols", ("r1", "r2"),
                       description="ordinary LS slope under heteroscedastic noise; residual as assessor")


def wls_noisy() -> Scenario:
    return _regression("wls-noisy", WLS2_STATES, "ols", ("r1+z",), noisy=True,
                       description="residual plus independent N(0, 1) noise as assessor")


def wls_blue() -> Scenario:
    return _regression("wls-blue", WLS2_STATES, "blue", ("r1", "r2"), optimal=True,
                       description="inverse-variance weighted slope")


def wls_n3() -> Scenario:
    states = (_wls_state("x=(1,2,3),sigma2=(1,1,4)", (1.0, 2.0, 3.0), (1.0, 1.0, 4.0), 0.0),
              _wls_state("x=(1,2,3),sigma2=(4,1,1)", (1.0, 2.0, 3.0), (4.0, 1.0, 1.0), -1.0))
    return _regression("wls-n3", states, "ols", ("r1", "r2", "r3"),
                       description="three observations; only the inequality is expected")


BATTERY = {
    "normal-mean-umvue": normal_mean_umvue,
    "normal-mean-single": normal_mean_single,
    "normal-variance-umvue": normal_variance_umvue,
    "normal-variance-pair": normal_variance_pair,
    "prediction-mean": prediction_mean,
    "prediction-single": prediction_single,
    "wls-ols": wls_ols,
    "wls-noisy": wls_noisy,
    "wls-blue": wls_blue,
    "wls-n3": wls_n3,
}


def battery(names=None) -> list[Scenario]:
    names = list(BATTERY) if names is None else list(names)
    unknown = [n for n in names if n not in BATTERY]
    if unknown:
        raise UsageError(f"unknown scenarios {unknown}; choose from {sorted(BATTERY)}")
    return [BATTERY[n]() for n in names]


# ---------------------------------------------------------------- asymptotic


def _summaries_grouped(state, block, n):
    """(X1, X2, centred sum of squares, mean) for every replication.

    X1 and X2 are drawn explicitly; the remaining n - 2 observations enter
    through their mean and a chi-square sum of squares, then the two groups
    are pooled.
    """
    mu, sd = state["mu"], math.sqrt(state["sigma2"])
    pair = mu + sd * block.normal(2)
    m = n - 2
    mean_b = mu + sd * block.normal(1)[:, 0] / math.sqrt(m)
    ss_b = state["sigma2"] * 2.0 * block.gamma((m - 1) / 2, 1)[:, 0]
    mean_a = pair.mean(axis=1)
    ss_a = (pair[:, 0] - pair[:, 1]) ** 2 / 2
    ss = ss_a + ss_b + (2 * m / n) * (mean_a - mean_b) ** 2
    return pair[:, 0], pair[:, 1], ss, (2 * mean_a + m * mean_b) / n


def mle_variance(iota_list=(10, 30, 100, 300), sigma2_values=(0.5, 1.0, 2.0)) -> AsymptoticScenario:
    """Variance MLE with a few candidate assessors, indexed by n with rate 1/n.

    ``inverse-information`` (2 sigma_hat^4 / n) and ``bias-estimate``
    (-S^2 / n) are included as assessors the certificate must reject.
    """

    def build(n):
        states = tuple({"label": f"sigma2={s!r}", "mu": 0.0, "sigma2": s, "n": n} for s in sigma2_values)

        def simulate(state, block):
            if n <= 50:
                x = _sample(state, block)
                x1, x2 = x[:, 0], x[:, 1]
                ss = ((x - x.mean(axis=1, keepdims=True)) ** 2).sum(axis=1)
            else:
                x1, x2, ss, _ = _summaries_grouped(state, block, n)
            mle, s2 = ss / n, ss / (n - 1)
            k = len(block)
            return {"learner": mle, "target": np.full(k, state["sigma2"]),
                    "zero": np.zeros(k),
                    "pair-minus-s2": (x1 - x2) ** 2 / 2 - s2,
                    "inverse-information": 2 * mle**2 / n,
                    "bias-estimate": -s2 / n}

        return Scenario(f"mle-variance-n{n}", states, simulate,
                        ("zero", "pair-minus-s2", "inverse-information", "bias-estimate"),
                        lambda s: 2 * s["sigma2"] ** 2 / (s["n"] + 1), optimum="family-minimum",
                        description="variance MLE; optimum is the best multiple of the sum of squares")

    return AsymptoticScenario("mle-variance", build, tuple(iota_list), lambda n: 1.0 / n,
                              description="normal variance MLE along increasing n")
