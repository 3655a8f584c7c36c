"""Smoothing a cochain's slope density with a plateau kernel.

The density omega of a cochain c is value/length on each tile.  Convolving
with the trapezoid kernel rho_r (height 1/(r+1) on [-r/2, r/2], unit-width
linear flanks) gives a C^1 density omega_bar whose primitive phi is a
monotone map when omega_bar stays near the average C.

Everything is computed relative to the linear trend: with W the primitive of
c and B(y) = W(y) - C*y, omega_bar - C is h times a second difference of the
primitive of B.  B stays small for cochains cohomologous to C*dx, which keeps
float64 accurate on long windows.  Exact spot checks at breakpoints back the
float values up.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from ..cochain import NumericEvidence, PECochain, _profile
from ..exactnum import ZERO, FieldScalar
from ..ruelle import InvertibilityCertificate, rs_invertible
from ..substitution import Tiling1D


class SmoothingRefused(ValueError):
    def __init__(self, message: str, certificate: InvertibilityCertificate | None = None):
        super().__init__(message)
        self.certificate = certificate


@dataclass(frozen=True)
class PlateauKernel:
    r: Fraction

    @property
    def half(self) -> Fraction:
        return self.r / 2

    @property
    def height(self) -> Fraction:
        return 1 / (self.r + 1)

    @property
    def support(self) -> Fraction:
        return self.half + 1

    def __call__(self, s) -> FieldScalar:
        s = abs(FieldScalar.coerce(s))
        a, h = FieldScalar(self.half), FieldScalar(self.height)
        if s <= a:
            return h
        if s >= a + 1:
            return ZERO
        return h * (a + 1 - s)

    def primitive(self, s) -> FieldScalar:
        """Integral of the kernel from -infinity to s."""
        s = FieldScalar.coerce(s)
        a, h = FieldScalar(self.half), FieldScalar(self.height)
        if s <= -a - 1:
            return ZERO
        if s <= -a:
            return h * (s + a + 1) ** 2 / 2
        if s <= a:
            return h / 2 + h * (s + a)
        if s <= a + 1:
            u = s - a
            return h / 2 + 2 * a * h + h * (u - u * u / 2)
        return FieldScalar(1)

    def describe(self) -> dict:
        return {"r": str(self.r), "plateau": [str(-self.half), str(self.half)], "flank_width": 1,
                "height": str(self.height)}


@dataclass(frozen=True)
class SmoothedMap:
    kernel: PlateauKernel
    C_mu: FieldScalar
    epsilon: float
    slope_min: float
    slope_max: float
    points: np.ndarray  # breakpoints (and interior extrema) of omega_bar
    density: np.ndarray  # omega_bar at points
    phi: np.ndarray  # smoothed map at points, phi(0) = 0
    discrepancy: NumericEvidence  # phi - F
    discrepancy_bound: float
    exact_checks: tuple  # (x, exact omega_bar, float omega_bar)

    @property
    def r(self) -> Fraction:
        return self.kernel.r

    @property
    def monotone(self) -> bool:
        c = float(self.C_mu)
        return bool(self.slope_min > 0) if c > 0 else bool(self.slope_max < 0)

    @property
    def max_exact_error(self) -> float:
        return max((abs(float(e) - f) for _, e, f in self.exact_checks), default=0.0)

    def summary(self) -> dict:
        return {
            "r": str(self.r),
            "kernel": self.kernel.describe(),
            "C_mu": float(self.C_mu),
            "epsilon": self.epsilon,
            "slope_range": [self.slope_min, self.slope_max],
            "monotone": self.monotone,
            "breakpoints": int(len(self.points)),
            "discrepancy": self.discrepancy.to_json(),
            "discrepancy_bound": self.discrepancy_bound,
            "exact_check_max_error": self.max_exact_error,
        }


class _TrendProfile:
    """B and its primitive B2 on a window, in float64."""

    def __init__(self, values: np.ndarray, lefts: np.ndarray, lengths: np.ndarray, C: float):
        self.P = np.append(lefts, lefts[-1] + lengths[-1])
        self.dev = values / lengths - C  # omega - C per tile
        self.Bv = np.concatenate([[0.0], np.cumsum(values - C * lengths)])
        step = self.Bv[:-1] * lengths + self.dev * lengths ** 2 / 2
        self.B2v = np.concatenate([[0.0], np.cumsum(step)])
        self.n = len(lengths)

    def _locate(self, y):
        j = np.clip(np.searchsorted(self.P, y, side="right") - 1, 0, self.n - 1)
        return j, y - self.P[j]

    def B(self, y):
        j, u = self._locate(y)
        return self.Bv[j] + self.dev[j] * u

    def B2(self, y):
        j, u = self._locate(y)
        return self.B2v[j] + self.Bv[j] * u + self.dev[j] * u * u / 2


def _exact_density(c_values, T: Tiling1D, kernel: PlateauKernel, x: FieldScalar, last: int) -> FieldScalar:
    lo = x - kernel.support
    hi = x + kernel.support
    i = T.locate(lo)
    total = ZERO
    while i <= last and T.lefts[i] < hi:
        a = max(T.lefts[i], lo) - x
        b = min(T.right(i), hi) - x
        total = total + c_values[i] / T.lengths[i] * (kernel.primitive(b) - kernel.primitive(a))
        i += 1
    return total


def smooth_cocycle(c: PECochain, T: Tiling1D, r, spot_checks: int = 12) -> SmoothedMap:
    """Smooth the slope density of ``c`` at kernel radius ``r``."""
    r = Fraction(str(r)) if isinstance(r, float) else Fraction(r)
    if r <= 0:
        raise ValueError("r must be positive")
    ok, cert = rs_invertible(c, T.rule)
    if not ok:
        raise SmoothingRefused(f"average of the cochain is not certified nonzero ({cert.value})", cert)
    C_exact = cert.value
    C = float(C_exact)
    kernel = PlateauKernel(r)
    a, h, reach = float(kernel.half), float(kernel.height), float(kernel.support)

    prof = _profile(c, T)
    values = prof.float_values()
    last = len(T) - 1 if np.isfinite(values[-1]) else len(T) - 2
    values = values[: last + 1]
    lefts = T._float_lefts[: last + 1]
    lengths = np.array([float(L) for L in T.lengths[: last + 1]])
    tp = _TrendProfile(values, lefts, lengths, C)
    lo, hi = tp.P[0] + reach, tp.P[-1] - reach
    if not (lo < 0 < hi):
        raise ValueError(f"window too small for radius {r}")

    def dens_dev(x):
        return h * (tp.B2(x - a - 1) - tp.B2(x - a) - tp.B2(x + a) + tp.B2(x + a + 1))

    def dens_slope(x):
        return h * (tp.B(x - a - 1) - tp.B(x - a) - tp.B(x + a) + tp.B(x + a + 1))

    offsets = np.array([a + 1, a, -a, -a - 1])
    brk = (tp.P[None, :] + offsets[:, None]).ravel()
    brk = brk[(brk > lo) & (brk < hi)]
    xs = np.unique(np.concatenate([brk, [lo, hi, 0.0]]))
    g = dens_dev(xs)
    d = dens_slope(xs)
    flip = np.nonzero(np.sign(d[:-1]) * np.sign(d[1:]) < 0)[0]
    crit = xs[flip] - d[flip] * (xs[flip + 1] - xs[flip]) / (d[flip + 1] - d[flip])
    if len(crit):
        xs = np.unique(np.concatenate([xs, crit]))
        g = dens_dev(xs)
    mids = (xs[:-1] + xs[1:]) / 2
    gm = dens_dev(mids)
    pieces = (xs[1:] - xs[:-1]) / 6 * (g[:-1] + 4 * gm + g[1:])
    phi_dev = np.concatenate([[0.0], np.cumsum(pieces)])
    zero = int(np.searchsorted(xs, 0.0))
    phi_dev -= phi_dev[zero]
    phi = C * xs + phi_dev

    D = phi_dev - (tp.B(xs) - tp.B(np.array([0.0]))[0])
    in_range = (tp.P[:-1] >= lo - reach) & (tp.P[1:] <= hi + reach)
    M = float(np.max(np.abs(tp.dev[in_range])))
    bound = 2 * (a + 1) * M
    maxD = float(np.max(np.abs(D)))
    discrepancy = NumericEvidence(bool(maxD <= bound * (1 + 1e-9) + 1e-9), maxD, _nested_growth(xs, D),
                                  (0, 0), "phi - F against 2(r/2+1) sup|omega - C|")

    omega_bar = C + g
    eps = float(np.max(np.abs(g)) / abs(C))
    checks = []
    if spot_checks:
        exact_vals = [prof.values[k] for k in prof.key[: last + 1]]
        lo_e, hi_e = T.lefts[0] + kernel.support, T.lefts[last] + T.lengths[last] - kernel.support
        verts = [j for j in range(last + 1) if lo_e <= T.lefts[j] + kernel.half <= hi_e]
        for k in np.linspace(0, len(verts) - 1, spot_checks).round().astype(int):
            xe = T.lefts[verts[k]] + kernel.half
            exact = _exact_density(exact_vals, T, kernel, xe, last)
            checks.append((xe, exact, float(C + dens_dev(np.array([float(xe)]))[0])))
    return SmoothedMap(kernel, C_exact, eps, float(omega_bar.min()), float(omega_bar.max()), xs, omega_bar, phi,
                       discrepancy, bound, tuple(checks))


def _nested_growth(xs: np.ndarray, D: np.ndarray) -> float:
    """Slope of log max|D| over |x| <= R against log2 R (near 0 when bounded)."""
    span = min(-xs[0], xs[-1])
    radii, sups = [], []
    R = span
    while R > 8 and len(radii) < 8:
        sel = np.abs(xs) <= R
        radii.append(np.log2(R))
        sups.append(float(np.max(np.abs(D[sel]))))
        R /= 2
    if len(radii) < 2 or min(sups) <= 0:
        return 0.0
    return float(np.polyfit(radii, np.log(sups), 1)[0])


def smoothing_sweep(c: PECochain, T: Tiling1D, radii: Sequence = (4, 8, 16, 32, 64), eps: float = 0.2,
                    spot_checks: int = 12) -> tuple[SmoothedMap | None, list[SmoothedMap]]:
    """Try radii in order until epsilon_r <= eps or the window runs out."""
    done = []
    for r in radii:
        try:
            sm = smooth_cocycle(c, T, r, spot_checks)
        except SmoothingRefused:
            raise
        except ValueError:
            break
        done.append(sm)
        if sm.epsilon <= eps:
            return sm, done
    return None, done
