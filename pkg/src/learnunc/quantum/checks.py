"""Position/momentum moments, Fisher information and the uncertainty checks built on them.

Conventions: x_hat f = x f and p_hat f = -i hbar f' with f' a central
difference.  Raw second moments feed the covariance chain; centred ones
feed Delta x Delta p, Stam and the density-level information bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainTooNarrowError, UsageError
from ..foundations import GridFunction, finite_diff, quadrature
from ..report import CheckReport
from .wavefunction import DEFAULT_PAD, MomentumRepresentation, WaveFunction, momentum_transform, require_tails

FISHER_FLOOR = 1e-12
ENDPOINT_RATIO = 1e-8
COV_TOL = 1e-6  # relative to hbar


def _d(values, h, order=2):
    return finite_diff(GridFunction(0.0, h * (values.size - 1), values), order).values


def _integrate(values, h) -> complex:
    return quadrature(GridFunction(0.0, h * (values.size - 1), values))


def p_hat(f: WaveFunction, order: int = 2) -> np.ndarray:
    return -1j * f.hbar * _d(f.values, f.h, order)


def x_hat(f: WaveFunction) -> np.ndarray:
    return f.x * f.values


# ---------------------------------------------------------------- moments


@dataclass(frozen=True)
class QuantumMoments:
    mean_x: float
    mean_p: float
    vx_raw: float
    vx: float
    vp_psi_raw: float
    vp_psi: float
    vp_phi_raw: float
    vp_phi: float
    mean_p_phi: float


def moments(psi: WaveFunction, phi: MomentumRepresentation | None = None) -> QuantumMoments:
    """Means and second moments; V(p) both from hbar^2 |psi'|^2 and from p^2 |phi|^2."""
    require_tails(psi)
    phi = phi if phi is not None else momentum_transform(psi)
    x, h, hb, v = psi.x, psi.h, psi.hbar, psi.values
    dens = np.abs(v) ** 2
    dv = _d(v, h)
    mx = float(_integrate(x * dens, h).real)
    vx_raw = float(_integrate(x * x * dens, h).real)
    mp = float((hb * _integrate(np.conj(v) * dv, h)).imag)
    vp_psi_raw = float(hb * hb * _integrate(np.abs(dv) ** 2, h).real)
    pd = phi.density()
    p = phi.p
    mp_phi = float(quadrature(pd.with_values(p * pd.values)))
    vp_phi_raw = float(quadrature(pd.with_values(p * p * pd.values)))
    return QuantumMoments(mx, mp, vx_raw, vx_raw - mx * mx, vp_psi_raw, vp_psi_raw - mp * mp,
                          vp_phi_raw, vp_phi_raw - mp_phi * mp_phi, mp_phi)


def momentum_variance_check(psi: WaveFunction, phi: MomentumRepresentation | None = None) -> CheckReport:
    m = moments(psi, phi)
    tol = max(1e-4, 5 * psi.h**2) * psi.hbar**2
    return CheckReport.identity("momentum-variance-two-routes", m.vp_psi, m.vp_phi, tol,
                                "momentum-variance-two-routes",
                                detail={"raw_psi": m.vp_psi_raw, "raw_phi": m.vp_phi_raw})


# ---------------------------------------------------------------- Fisher information


@dataclass(frozen=True)
class FisherInformation:
    value: float
    floor: float
    warning: bool           # support above the floor splits into several pieces
    support_fraction: float

    def __float__(self):
        return self.value


def _spectral_derivative(f, h):
    k = 2 * np.pi * np.fft.rfftfreq(f.size, d=h)
    spec = 1j * k * np.fft.rfft(f)
    if f.size % 2 == 0:
        spec[-1] = 0
    return np.fft.irfft(spec, f.size)


def fisher_information(density: GridFunction, floor: float = FISHER_FLOOR,
                       method: str = "auto") -> FisherInformation:
    """J = integral of (f'/f)^2 f over {f > floor * max f}.

    Methods for f':

    - ``"spectral"``: FFT derivative of f.  Needs f to vanish at both ends;
      accurate to rounding for smooth densities, including next to interior
      zeros where f'^2 / f stays finite but any O(h^2) error in f' does not.
    - ``"density"``: central differences of f.
    - ``"log-density"``: central differences of log f; fine on strictly
      positive densities, overshoots beside interior zeros.
    - ``"auto"``: spectral when both end values are below 1e-10 of the
      maximum, central differences of f otherwise.

    Finite-difference methods drop points whose neighbours leave the
    region.  ``warning`` is set when the region is not a single interval.
    """
    f = np.asarray(density.values, dtype=float)
    if np.any(f < 0):
        raise UsageError("density must be nonnegative")
    total = quadrature(density)
    if abs(total - 1) > 1e-6:
        raise UsageError(f"density integrates to {total:.8g}, not 1")
    h, top = density.h, f.max()
    keep = f > floor * top
    runs = np.count_nonzero(np.diff(keep.astype(np.int8)) == 1) + int(keep[0])
    if method == "auto":
        method = "spectral" if max(f[0], f[-1]) < 1e-10 * top else "density"
    safe = np.where(keep, f, 1.0)
    if method == "spectral":
        df = _spectral_derivative(f, h)
        j = float(np.sum(df[keep] ** 2 / safe[keep]) * h)
        return FisherInformation(j, floor, runs > 1, float(keep.mean()))
    inner = keep.copy()
    inner[0] = inner[-1] = False
    inner[1:-1] &= keep[:-2] & keep[2:]
    score2 = np.zeros_like(f)
    if method == "density":
        score2[1:-1] = ((f[2:] - f[:-2]) / (2 * h) / safe[1:-1]) ** 2
    elif method == "log-density":
        logf = np.log(safe)
        score2[1:-1] = ((logf[2:] - logf[:-2]) / (2 * h)) ** 2
    else:
        raise UsageError("method must be 'auto', 'spectral', 'density' or 'log-density'")
    j = float(np.sum(score2[inner] * f[inner]) * h)
    return FisherInformation(j, floor, runs > 1, float(keep.mean()))


def fisher_info(density: GridFunction, floor: float = FISHER_FLOOR, method: str = "auto") -> float:
    return fisher_information(density, floor, method).value


# ---------------------------------------------------------------- Stam, information bound, HUP


def _grid_tol(psi: WaveFunction) -> float:
    return max(1e-3, 10 * psi.h**2)


@dataclass
class _Quantities:
    m: QuantumMoments
    jx: FisherInformation
    jp: FisherInformation


def _quantities(psi, phi=None) -> _Quantities:
    phi = phi if phi is not None else momentum_transform(psi)
    return _Quantities(moments(psi, phi), fisher_information(psi.density()), fisher_information(phi.density()))


def stam_and_cr_check(psi: WaveFunction, phi: MomentumRepresentation | None = None) -> list[CheckReport]:
    """C^2 V(x) >= J(p), C^2 V(p) >= J(x) with C = 2 / hbar; V(x) J(x) >= 1 and V(p) J(p) >= 1.

    Centred variances; V(p) from the momentum density.  Each check is
    stated relative to its right-hand side so one tolerance serves every hbar.
    """
    q = _quantities(psi, phi)
    c2 = 4.0 / psi.hbar**2
    tol = _grid_tol(psi)
    warn = {"fisher_floor": q.jx.floor, "fisher_warning_x": q.jx.warning, "fisher_warning_p": q.jp.warning}
    vx, vp = q.m.vx, q.m.vp_phi
    return [
        CheckReport.inequality("stam-position", c2 * vx / q.jp.value, 1.0, tol, "stam-uncertainty",
                               relation=">=", detail={"c2_vx": c2 * vx, "j_p": q.jp.value, **warn}),
        CheckReport.inequality("stam-momentum", c2 * vp / q.jx.value, 1.0, tol, "stam-uncertainty",
                               relation=">=", detail={"c2_vp": c2 * vp, "j_x": q.jx.value, **warn}),
        CheckReport.inequality("density-information-position", vx * q.jx.value, 1.0, tol,
                               "density-cramer-rao", relation=">=", detail=warn),
        CheckReport.inequality("density-information-momentum", vp * q.jp.value, 1.0, tol,
                               "density-cramer-rao", relation=">=", detail=warn),
    ]


def hup_check(psi: WaveFunction, phi: MomentumRepresentation | None = None) -> CheckReport:
    """Delta x Delta p >= hbar / 2 with centred standard deviations (V(p) from hbar^2 |psi'|^2)."""
    m = moments(psi, phi)
    prod = math.sqrt(m.vx * m.vp_psi)
    return CheckReport.inequality("heisenberg-product", prod, psi.hbar / 2, 1e-3 * psi.hbar / 2,
                                  "heisenberg-uncertainty", relation=">=",
                                  detail={"dx": math.sqrt(m.vx), "dp": math.sqrt(m.vp_psi),
                                          "dp_momentum_density": math.sqrt(m.vp_phi)})


# ---------------------------------------------------------------- mechanism-level covariance


def _require_endpoints(psi: WaveFunction):
    w = np.abs(psi.x) * np.abs(psi.values) ** 2
    top = w.max()
    if top == 0 or max(w[0], w[-1]) > ENDPOINT_RATIO * top:
        raise DomainTooNarrowError("x |psi|^2 does not vanish at the grid ends; the covariance integrals "
                                   "need the boundary terms to drop")


def mech_cov(psi: WaveFunction) -> tuple[complex, complex]:
    """(<x psi, p psi>, <p psi, x psi>), each integrated directly.

    A fourth-order derivative stencil is used here: the two integrals must
    differ by exactly i hbar, and a second-order stencil leaves an O(h^2)
    imbalance of about h^2 V(p) / 2.
    """
    _require_endpoints(psi)
    x, v, h, hb = psi.x, psi.values, psi.h, psi.hbar
    dv = _d(v, h, order=4)
    cov_xp = -1j * hb * _integrate(x * np.conj(v) * dv, h)
    cov_px = 1j * hb * _integrate(x * np.conj(dv) * v, h)
    return complex(cov_xp), complex(cov_px)


def _gaussian_test(psi):
    c = 0.5 * (psi.grid.x_min + psi.grid.x_max)
    return np.exp(-((psi.x - c) ** 2) / 2)


def default_test_functions(psi: WaveFunction) -> dict[str, np.ndarray]:
    g = _gaussian_test(psi)
    c = 0.5 * (psi.grid.x_min + psi.grid.x_max)
    return {"gaussian": g, "x-gaussian": (psi.x - c) * g}


def commutator_residual(psi: WaveFunction, f) -> float:
    """sup over interior nodes of |x p f - p x f - i hbar f|."""
    fw = psi.with_values(np.asarray(f, dtype=complex))
    xf = fw.with_values(x_hat(fw))
    pf = fw.with_values(p_hat(fw))
    res = x_hat(pf) - p_hat(xf) - 1j * psi.hbar * fw.values
    return float(np.max(np.abs(res[2:-2])))


def commutator_check(psi: WaveFunction, test_fns=None) -> list[CheckReport]:
    """Operator-level residual on each test function and the covariance-level difference cov_xp - cov_px."""
    fns = default_test_functions(psi) if test_fns is None else dict(test_fns)
    if not fns:
        raise UsageError("need at least one test function")
    res = {k: commutator_residual(psi, f) for k, f in fns.items()}
    worst = max(res, key=res.get)
    tol_op = max(1e-6, 10 * psi.h**2) * psi.hbar
    cxp, cpx = mech_cov(psi)
    diff = cxp - cpx
    return [
        CheckReport.inequality("commutator-residual", res[worst], 0.0, tol_op, "canonical-commutation",
                               detail={"residuals": res, "worst": worst}),
        CheckReport.identity("covariance-commutator", diff, 1j * psi.hbar, COV_TOL * psi.hbar,
                             "commutator-covariance", detail={"cov_xp": cxp, "cov_px": cpx}),
    ]


def hbound_check(psi: WaveFunction) -> list[CheckReport]:
    """|cov_xp|^2 >= hbar^2 / 4, [Im cov_xp]^2 = hbar^2 / 4, and |cov_xp|^2 <= V(x) V(p) (raw moments)."""
    cxp, _ = mech_cov(psi)
    m = moments(psi)
    hb2 = psi.hbar**2 / 4
    mag2 = abs(cxp) ** 2
    prod = m.vx_raw * m.vp_psi_raw
    tol_chain = max(1e-3, 10 * psi.h**2) * max(prod, hb2)
    return [
        CheckReport.inequality("covariance-hbar-bound", mag2, hb2, COV_TOL * psi.hbar**2, "covariance-hbar-bound",
                               relation=">=", detail={"cov_xp": cxp, "real_part_squared": cxp.real**2}),
        CheckReport.identity("covariance-imaginary-part", cxp.imag**2, hb2, COV_TOL * psi.hbar**2,
                             "covariance-hbar-bound", detail={"imag": cxp.imag}),
        CheckReport.inequality("heisenberg-chain", mag2, prod, tol_chain, "heisenberg-chain",
                               detail={"vx_raw": m.vx_raw, "vp_raw": m.vp_psi_raw}),
    ]


# ---------------------------------------------------------------- report


@dataclass
class QuantumReport:
    vx: float
    vp_psi: float
    vp_phi: float
    mean_x: float
    mean_p: float
    cov_xp: complex
    cov_px: complex
    commutator_residual: complex
    jx: float
    jp: float
    stam_margins: tuple
    cr_margins: tuple
    hup_margin: float
    hbound_margin: float
    raw: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in ("vx", "vp_psi", "vp_phi", "mean_x", "mean_p", "cov_xp", "cov_px",
                                           "commutator_residual", "jx", "jp", "stam_margins", "cr_margins",
                                           "hup_margin", "hbound_margin", "raw")}
        d["checks"] = [c.to_dict() for c in self.checks]
        return d


def analyse(psi: WaveFunction, pad: int = DEFAULT_PAD) -> QuantumReport:
    """Every quantity and check for one state."""
    phi = momentum_transform(psi, pad)
    q = _quantities(psi, phi)
    stam = stam_and_cr_check(psi, phi)
    hup = hup_check(psi, phi)
    comm = commutator_check(psi)
    hb = hbound_check(psi)
    mv = momentum_variance_check(psi, phi)
    cxp, cpx = comm[1].detail["cov_xp"], comm[1].detail["cov_px"]
    m = q.m
    return QuantumReport(
        vx=m.vx, vp_psi=m.vp_psi, vp_phi=m.vp_phi, mean_x=m.mean_x, mean_p=m.mean_p,
        cov_xp=cxp, cov_px=cpx, commutator_residual=(cxp - cpx) - 1j * psi.hbar,
        jx=q.jx.value, jp=q.jp.value,
        stam_margins=(stam[0].detail["c2_vx"] - q.jp.value, stam[1].detail["c2_vp"] - q.jx.value),
        cr_margins=(m.vx * q.jx.value - 1, m.vp_phi * q.jp.value - 1),
        hup_margin=hup.margin, hbound_margin=hb[0].margin,
        raw={"vx_raw": m.vx_raw, "vp_psi_raw": m.vp_psi_raw, "vp_phi_raw": m.vp_phi_raw,
             "operator_residual": comm[0].lhs, "fisher_warning": q.jx.warning or q.jp.warning},
        checks=[mv, *stam, hup, *comm, *hb],
    )
