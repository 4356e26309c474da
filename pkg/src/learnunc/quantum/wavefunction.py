"""Wave functions on a uniform grid and their hbar-scaled Fourier pair."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainTooNarrowError, UsageError
from ..foundations import GridFunction, quadrature

HBAR_SI = 1.054571817e-34
TAIL_RATIO = 1e-10
DEFAULT_POINTS = 2048
DEFAULT_PAD = 16
DIRECT_MAX_POINTS = 1024


@dataclass(frozen=True, eq=False)
class WaveFunction:
    """Complex psi(x) sampled on a uniform grid."""

    grid: GridFunction
    hbar: float = 1.0

    def __post_init__(self):
        if not self.hbar > 0:
            raise UsageError("hbar must be positive")
        object.__setattr__(self, "grid", self.grid.with_values(np.asarray(self.grid.values, dtype=complex)))

    @classmethod
    def from_function(cls, f, x_min: float, x_max: float, n_points: int = DEFAULT_POINTS,
                      hbar: float = 1.0) -> WaveFunction:
        return cls(GridFunction.sample(f, x_min, x_max, n_points), hbar)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    @property
    def h(self) -> float:
        return self.grid.h

    @property
    def values(self) -> np.ndarray:
        return self.grid.values

    @property
    def n_points(self) -> int:
        return self.grid.n_points

    def density(self) -> GridFunction:
        return self.grid.with_values(np.abs(self.values) ** 2)

    def norm2(self) -> float:
        return float(quadrature(self.density()))

    def with_values(self, values) -> WaveFunction:
        return WaveFunction(self.grid.with_values(values), self.hbar)

    def shifted(self, a: float) -> WaveFunction:
        """psi(x - a) on the grid translated by a (exact, no interpolation)."""
        return WaveFunction(GridFunction(self.grid.x_min + a, self.grid.x_max + a, self.values), self.hbar)

    def normalize(self) -> WaveFunction:
        return normalize(self)


def normalize(psi: WaveFunction) -> WaveFunction:
    n2 = psi.norm2()
    if not n2 > 0:
        raise UsageError("cannot normalize the zero function")
    return psi.with_values(psi.values / math.sqrt(n2))


def tail_ratio(values) -> float:
    d = np.abs(np.asarray(values)) ** 2
    top = d.max()
    return float(max(d[0], d[-1]) / top) if top > 0 else math.inf


def require_tails(psi: WaveFunction, ratio: float = TAIL_RATIO, what: str = "psi"):
    """Raise unless |psi|^2 at both ends is below ``ratio`` times its maximum."""
    r = tail_ratio(psi.values)
    if r >= ratio:
        d = np.abs(psi.values) ** 2
        k = max(1, d.size // 100)
        mass = float((d[:k].sum() + d[-k:].sum()) * psi.h / max(quadrature(psi.density()), 1e-300))
        raise DomainTooNarrowError(f"{what} does not decay inside the grid: end/max density ratio {r:.3g}, "
                                   f"mass in the outer 1% of the grid {mass:.3g}")


# ---------------------------------------------------------------- states


def _half_width(extent: float, s: float) -> float:
    return max(12.0, extent + 8.0 * s)


def gaussian(s: float = 1.0, x0: float = 0.0, p0: float = 0.0, beta: float = 0.0, hbar: float = 1.0,
             n_points: int = DEFAULT_POINTS, half_width: float | None = None) -> WaveFunction:
    """exp(-(x-x0)^2 / (4 s^2) + i p0 x / hbar + i beta (x-x0)^2 / hbar), normalized.

    ``s`` is the position standard deviation, ``p0`` a momentum boost and
    ``beta`` a quadratic phase (chirp).
    """
    if not s > 0:
        raise UsageError("s must be positive")
    L = half_width if half_width is not None else _half_width(abs(x0), s)

    def f(x):
        u = x - x0
        return np.exp(-u * u / (4 * s * s) + 1j * (p0 * x + beta * u * u) / hbar)

    return normalize(WaveFunction.from_function(f, -L, L, n_points, hbar))


def superposition(a: float = 3.0, s: float = 1.0, hbar: float = 1.0, n_points: int = DEFAULT_POINTS,
                  half_width: float | None = None) -> WaveFunction:
    """Equal-weight real superposition of Gaussians centred at +a and -a."""
    L = half_width if half_width is not None else _half_width(abs(a), s)

    def f(x):
        return np.exp(-(x - a) ** 2 / (4 * s * s)) + np.exp(-(x + a) ** 2 / (4 * s * s))

    return normalize(WaveFunction.from_function(f, -L, L, n_points, hbar))


def battery_states(hbar: float = 1.0, n_points: int = DEFAULT_POINTS,
                   half_width: float | None = None) -> dict[str, WaveFunction]:
    """Fixed set covering the equality and strict cases of every check.

    ``half_width`` overrides the per-state default domain [-L, L].
    """
    kw = {"hbar": hbar, "n_points": n_points, "half_width": half_width}
    states = {f"gaussian-s={s!r}": gaussian(s, **kw) for s in (0.5, 1.0, 2.0)}
    states.update({f"boosted-p0={p!r}": gaussian(1.0, p0=p, **kw) for p in (2.0, -2.0)})
    states.update({f"chirped-beta={b!r}": gaussian(1.0, beta=b, **kw) for b in (0.25, 0.5)})
    states["superposition-a=3.0"] = superposition(3.0, 1.0, **kw)
    return states


STATE_BUILDERS = {"gaussian": gaussian, "superposition": superposition}


def build_state(kind: str, **params) -> WaveFunction:
    if kind not in STATE_BUILDERS:
        raise UsageError(f"unknown wave function {kind!r}; choose from {sorted(STATE_BUILDERS)}")
    return STATE_BUILDERS[kind](**params)


# ---------------------------------------------------------------- Fourier pair


@dataclass(frozen=True, eq=False)
class MomentumRepresentation:
    """phi(p) on the reciprocal grid of a zero-padded position grid."""

    grid: GridFunction
    hbar: float
    pad: int
    x_min: float
    n_x: int

    @property
    def p(self) -> np.ndarray:
        return self.grid.x

    @property
    def values(self) -> np.ndarray:
        return self.grid.values

    def density(self) -> GridFunction:
        return self.grid.with_values(np.abs(self.values) ** 2)


def momentum_grid(h: float, n: int, hbar: float, pad: int) -> np.ndarray:
    m = n * pad
    dp = 2 * math.pi * hbar / (m * h)
    return dp * np.arange(-(m // 2), m - m // 2)


def momentum_transform(psi: WaveFunction, pad: int = DEFAULT_PAD, method: str = "auto",
                       check_tails: bool = True) -> MomentumRepresentation:
    """phi(p) = (2 pi hbar)^(-1/2) * integral psi(x) exp(-i p x / hbar) dx.

    The integral is a Riemann sum on the position grid (identical to the
    trapezoid rule up to the end terms, which the tail check bounds).  The
    momentum grid is the reciprocal of the position grid zero-padded by
    ``pad``: spacing 2 pi hbar / (pad n h), half-span about pi hbar / h.
    ``method="direct"`` evaluates the sum literally; ``"fft"`` uses the FFT;
    ``"auto"`` picks direct for n <= 1024.
    """
    if pad < 1 or int(pad) != pad:
        raise UsageError("pad must be a positive integer")
    if check_tails:
        require_tails(psi)
    n, h, hbar = psi.n_points, psi.h, psi.hbar
    p = momentum_grid(h, n, hbar, pad)
    x0 = psi.grid.x_min
    c = h / math.sqrt(2 * math.pi * hbar)
    if method == "auto":
        method = "direct" if n <= DIRECT_MAX_POINTS else "fft"
    if method == "direct":
        x = psi.x
        phi = np.empty(p.size, dtype=complex)
        step = max(1, 2_000_000 // n)
        for i in range(0, p.size, step):
            phi[i:i + step] = np.exp(-1j * np.outer(p[i:i + step], x) / hbar) @ psi.values
        phi *= c
    elif method == "fft":
        m = n * pad
        buf = np.zeros(m, dtype=complex)
        buf[:n] = psi.values
        # sum_j psi_j exp(-i p_k (x0 + j h) / hbar) with p_k h / hbar = 2 pi k / m
        phi = c * np.exp(-1j * p * x0 / hbar) * np.fft.fftshift(np.fft.fft(buf))
    else:
        raise UsageError("method must be 'auto', 'direct' or 'fft'")
    return MomentumRepresentation(GridFunction(float(p[0]), float(p[-1]), phi), hbar, int(pad), x0, n)


def inverse_transform(phi: MomentumRepresentation) -> WaveFunction:
    """psi(x) = (2 pi hbar)^(-1/2) * sum phi(p) exp(i p x / hbar) dp on the original position grid."""
    m, hbar = phi.values.size, phi.hbar
    dp = phi.grid.h
    h = 2 * math.pi * hbar / (m * dp)
    p = phi.p
    spec = phi.values * np.exp(1j * p * phi.x_min / hbar)
    buf = np.fft.ifft(np.fft.ifftshift(spec)) * m
    psi = buf[:phi.n_x] * dp / math.sqrt(2 * math.pi * hbar)
    return WaveFunction(GridFunction(phi.x_min, phi.x_min + (phi.n_x - 1) * h, psi), hbar)
