"""Wigner quasi-probability on the position grid and its comparison with the operator covariance.

W(x, p) = (pi hbar)^(-1) * integral conj(psi(x + y)) psi(x - y) exp(2 i p y / hbar) dy

With y restricted to grid multiples the y-sum for each row is one FFT,
and the resulting momentum grid is the reciprocal grid padded by 2, so
the p-marginal can be compared node by node with |phi(p)|^2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ResolutionError, UsageError
from ..report import CheckReport
from .checks import mech_cov, moments
from .wavefunction import WaveFunction, momentum_transform, require_tails

MAX_POINTS = 4096
MARGINAL_TOL = 1e-4
RESOLUTION_LIMIT = 1e-3
COV_TOL = 1e-3
ROW_CHUNK = 256


def _rows(psi: WaveFunction, start: int, stop: int) -> np.ndarray:
    """W at rows start..stop-1, columns ordered by p from -N/2 to N/2 - 1."""
    v, n = psi.values, psi.n_points
    m = np.arange(-(n // 2), n - n // 2)
    j = np.arange(start, stop)[:, None]
    plus, minus = j + m, j - m
    ok = (plus >= 0) & (plus < n) & (minus >= 0) & (minus < n)
    c = np.where(ok, np.conj(v[np.clip(plus, 0, n - 1)]) * v[np.clip(minus, 0, n - 1)], 0)
    # sum_m c_m exp(2 pi i k m / n): put m at index m mod n, inverse FFT, reorder k
    s = np.fft.ifft(np.fft.ifftshift(c, axes=1), axis=1) * n
    s = np.fft.fftshift(s, axes=1)
    return (s.real * psi.h / (math.pi * psi.hbar))


def wigner_p_grid(psi: WaveFunction) -> np.ndarray:
    n = psi.n_points
    return math.pi * psi.hbar / (n * psi.h) * np.arange(-(n // 2), n - n // 2)


@dataclass
class WignerGrid:
    x: np.ndarray
    p: np.ndarray
    w: np.ndarray  # shape (len(x), len(p))


def wigner(psi: WaveFunction) -> WignerGrid:
    """Full W on the (x, p) grid; memory n^2 doubles."""
    _validate(psi)
    n = psi.n_points
    w = np.empty((n, n))
    for a in range(0, n, ROW_CHUNK):
        w[a:a + ROW_CHUNK] = _rows(psi, a, min(n, a + ROW_CHUNK))
    return WignerGrid(psi.x, wigner_p_grid(psi), w)


def _validate(psi):
    if psi.n_points > MAX_POINTS:
        raise UsageError(f"Wigner grid limited to {MAX_POINTS} points, got {psi.n_points}")
    require_tails(psi)


@dataclass
class WignerSummary:
    marginal_x_error: float
    marginal_p_error: float
    mean_x: float
    mean_p: float
    cov: float
    raw_cross_moment: float
    min_w: float
    total: float


def wigner_summary(psi: WaveFunction) -> WignerSummary:
    """Marginal errors, moments and min W, streaming over row blocks."""
    _validate(psi)
    n, h = psi.n_points, psi.h
    x, p = psi.x, wigner_p_grid(psi)
    dp = p[1] - p[0]
    wp = np.full(n, dp)
    wp[[0, -1]] *= 0.5
    wx = np.full(n, h)
    wx[[0, -1]] *= 0.5
    marg_x = np.empty(n)
    marg_p = np.zeros(n)
    xp = x_m = p_m = 0.0
    min_w = math.inf
    for a in range(0, n, ROW_CHUNK):
        b = min(n, a + ROW_CHUNK)
        w = _rows(psi, a, b)
        marg_x[a:b] = w @ wp
        marg_p += wx[a:b] @ w
        rowsum_p = (w * p) @ wp
        xp += float(np.sum(wx[a:b] * x[a:b] * rowsum_p))
        x_m += float(np.sum(wx[a:b] * x[a:b] * marg_x[a:b]))
        p_m += float(np.sum(wx[a:b] * rowsum_p))
        min_w = min(min_w, float(w.min()))
    dens_x = np.abs(psi.values) ** 2
    phi = momentum_transform(psi, pad=2)
    dens_p = np.abs(phi.values[n // 2: n // 2 + n]) ** 2
    return WignerSummary(float(np.max(np.abs(marg_x - dens_x))), float(np.max(np.abs(marg_p - dens_p))),
                         x_m, p_m, xp - x_m * p_m, xp, min_w, float(wx @ marg_x))


def wigner_compare(psi: WaveFunction) -> list[CheckReport]:
    """Marginals against |psi|^2 and |phi|^2, and the Wigner covariance against Re(cov_xp) - mu_x mu_p.

    |cov_xp| and min W are carried in ``detail``; a marginal mismatch above
    1e-3 means the grid cannot resolve W and raises ResolutionError.
    """
    s = wigner_summary(psi)
    if max(s.marginal_x_error, s.marginal_p_error) > RESOLUTION_LIMIT:
        raise ResolutionError(f"Wigner marginals off by {max(s.marginal_x_error, s.marginal_p_error):.3g}; "
                              "refine the grid")
    cxp, _ = mech_cov(psi)
    m = moments(psi)
    centred_re = cxp.real - m.mean_x * m.mean_p
    detail = {"cov_xp": cxp, "abs_cov_xp": abs(cxp), "wigner_cov": s.cov, "min_w": s.min_w,
              "negative": s.min_w < 0, "raw_cross_moment": s.raw_cross_moment}
    return [
        CheckReport.inequality("wigner-marginal-position", s.marginal_x_error, 0.0, MARGINAL_TOL,
                               "wigner-marginals"),
        CheckReport.inequality("wigner-marginal-momentum", s.marginal_p_error, 0.0, MARGINAL_TOL,
                               "wigner-marginals"),
        CheckReport.identity("wigner-covariance", s.cov, centred_re, COV_TOL * max(1.0, psi.hbar),
                             "wigner-covariance", detail=detail),
    ]
