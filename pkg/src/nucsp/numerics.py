"""Shared numerical kernel: physical constants, modified Bessel functions,
and the two quadrature rules used throughout the package.

Unit system
-----------
Energies are expressed in eV, lengths in nm, times in s, and angular
frequencies in rad/s (omega = E / hbar).  Every emission probability computed
downstream is a dimensionless combination of these, so no unit conversion
happens outside the presentation layer.

The modified Bessel functions K0, K1 are evaluated with a power series for
small arguments and a continued-fraction (Temme-style) scheme for large ones:

    x < 2 :  K0(x) = -(ln(x/2) + g) I0(x) + sum_k (x^2/4)^k H_k / (k!)^2
             K1(x) = 1/x + ln(x/2) I1(x)
                     - (x/4) sum_k [(H_k - g) + (H_{k+1} - g)] (x^2/4)^k / (k! (k+1)!)
    x >= 2:  continued fraction CF2 for the pair (K0, K1)

with g the Euler-Mascheroni constant and H_k the k-th harmonic number.
Both branches agree with a high-precision reference to better than 1e-12
relative over [1e-8, 700].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "PhysicalConstants",
    "CONSTANTS",
    "EULER_GAMMA",
    "ConvergenceError",
    "bessel_k0",
    "bessel_k1",
    "bessel_k01",
    "integrate_periodic",
    "integrate_adaptive",
]

EULER_GAMMA = 0.5772156649015328606


class ConvergenceError(RuntimeError):
    """A refinement loop hit its cap before reaching the requested tolerance.

    Carries the last two successive estimates so callers can judge how far
    the iteration got.
    """

    def __init__(self, message: str, estimates: tuple[float, float]):
        super().__init__(f"{message} (last two estimates: {estimates[0]!r}, {estimates[1]!r})")
        self.estimates = estimates


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA-2018 constants, the single source of truth for unit consistency."""

    hbar_eV_s: float = 6.582119569e-16
    c_m_s: float = 299792458.0
    alpha_fs: float = 7.2973525693e-3
    e2_eV_nm: float = 1.4399645478  # e^2 = alpha * hbar * c
    electron_mass_eV: float = 510998.95000
    proton_mass_eV: float = 938272088.16

    def __post_init__(self):
        if abs(self.alpha_fs - 1.0 / 137.035999) > 1e-6:
            raise ValueError("alpha_fs inconsistent with 1/137.035999")
        if abs(self.e2_eV_nm - self.alpha_fs * self.hbar_eV_s * self.c_nm_s) > 1e-9 * self.e2_eV_nm:
            raise ValueError("e2_eV_nm inconsistent with alpha * hbar * c")

    @property
    def c_nm_s(self) -> float:
        """Speed of light in the internal length unit (nm/s)."""
        return self.c_m_s * 1e9

    @property
    def hbar_c_eV_nm(self) -> float:
        return self.hbar_eV_s * self.c_nm_s


CONSTANTS = PhysicalConstants()

# Series / continued-fraction crossover.  Above _X_UNDERFLOW the result is
# below the double-precision floor and is returned as exactly 0 by contract.
_SERIES_CUT = 2.0
_X_UNDERFLOW = 700.0
_SERIES_TERMS = 40
_CF2_MAX_ITER = 256


def _k01_series(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Power-series branch, valid for 0 < x < ~3."""
    q = 0.25 * x * x
    lg = np.log(0.5 * x)

    i0 = np.ones_like(x)
    k0 = np.zeros_like(x)
    term0 = np.ones_like(x)
    # K1 accumulators: I1 = (x/2) sum term1, sum over k >= 0 of
    # [(H_k - g) + (H_{k+1} - g)] q^k / (k! (k+1)!)
    term1 = np.ones_like(x)
    i1s = np.ones_like(x)
    s1 = np.full_like(x, 1.0 - 2.0 * EULER_GAMMA)  # k = 0 term
    hk = 0.0
    for k in range(1, _SERIES_TERMS + 1):
        term0 = term0 * q / (k * k)
        term1 = term1 * q / (k * (k + 1))
        hk += 1.0 / k
        hk1 = hk + 1.0 / (k + 1)
        i0 = i0 + term0
        k0 = k0 + term0 * hk
        i1s = i1s + term1
        s1 = s1 + term1 * ((hk - EULER_GAMMA) + (hk1 - EULER_GAMMA))
    k0 = -(lg + EULER_GAMMA) * i0 + k0
    i1 = 0.5 * x * i1s
    k1 = 1.0 / x + lg * i1 - 0.25 * x * s1
    return k0, k1


def _k01_cf2(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Continued-fraction branch for x >= 2 (vectorized, global convergence test)."""
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(x)
    q2 = np.ones_like(x)
    a1 = 0.25
    q = np.full_like(x, a1)
    c = np.full_like(x, a1)
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, _CF2_MAX_ITER):
        a -= 2.0 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h = h + delh
        dels = q * delh
        s = s + dels
        if np.max(np.abs(dels / s)) < 1e-17:
            break
    h = a1 * h
    k0 = np.sqrt(np.pi / (2.0 * x)) * np.exp(-x) / s
    k1 = k0 * (x + 0.5 - h) / x
    return k0, k1


def bessel_k01(x) -> tuple[np.ndarray | float, np.ndarray | float]:
    """Return (K0(x), K1(x)) for scalar or array input.

    Raises ValueError on non-positive or NaN arguments.  Arguments above 700
    underflow in double precision and yield exactly 0 by contract; deep in the
    1/x pole the pole value is returned (clamping is the caller's job).
    """
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if np.any(np.isnan(arr)) or np.any(arr <= 0.0):
        raise ValueError("bessel_k0/k1 require positive, non-NaN arguments")

    k0 = np.zeros_like(arr)
    k1 = np.zeros_like(arr)

    lo = arr < _SERIES_CUT
    hi = (~lo) & (arr <= _X_UNDERFLOW)
    if np.any(lo):
        k0[lo], k1[lo] = _k01_series(arr[lo])
    if np.any(hi):
        k0[hi], k1[hi] = _k01_cf2(arr[hi])
    # x > 700: leave as 0

    if scalar:
        return float(k0[0]), float(k1[0])
    return k0, k1


def bessel_k0(x):
    """Modified Bessel function of the second kind, order 0."""
    return bessel_k01(x)[0]


def bessel_k1(x):
    """Modified Bessel function of the second kind, order 1."""
    return bessel_k01(x)[1]


def _eval_vec(f: Callable, t: np.ndarray) -> np.ndarray:
    """Evaluate f on an array of nodes, falling back to a scalar loop."""
    try:
        y = np.asarray(f(t), dtype=float)
        if y.shape == t.shape:
            return y
    except (TypeError, ValueError):
        pass
    return np.array([float(f(ti)) for ti in t])


def integrate_periodic(f: Callable, rel_tol: float = 1e-8,
                       n_start: int = 8, max_doublings: int = 16) -> float:
    """Integrate a smooth periodic function over [0, 2*pi).

    Uniform-grid trapezoidal rule, which is spectrally accurate for periodic
    integrands; the grid is doubled until two successive estimates agree to
    rel_tol.  f may accept a numpy array of angles or a scalar.
    """
    n = n_start
    t = 2.0 * np.pi * np.arange(n) / n
    total = float(np.sum(_eval_vec(f, t)))
    prev = 2.0 * np.pi * total / n
    for _ in range(max_doublings):
        # new nodes are the midpoints of the current grid
        tm = 2.0 * np.pi * (np.arange(n) + 0.5) / n
        total += float(np.sum(_eval_vec(f, tm)))
        n *= 2
        est = 2.0 * np.pi * total / n
        if abs(est - prev) <= rel_tol * max(abs(est), abs(prev), 1e-300):
            return est
        prev = est
    raise ConvergenceError("integrate_periodic did not converge", (prev, est))


def integrate_adaptive(f: Callable, a: float, b: float, tol: float = 1e-9,
                       max_depth: int = 48) -> float:
    """Adaptive-Simpson integral of f over [a, b].

    The error target is absolute plus relative: tol * max(1, |I|) with I the
    initial whole-interval estimate.  Raises ConvergenceError when a panel
    exhausts max_depth without meeting its share of the budget.
    """
    if not a < b:
        raise ValueError("integrate_adaptive requires a < b")
    fa, fm, fb = float(f(a)), float(f(0.5 * (a + b))), float(f(b))
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    eps = tol * max(1.0, abs(whole))
    return _adapt(f, a, b, fa, fm, fb, whole, eps, max_depth)


def _adapt(f, a, b, fa, fm, fb, s, eps, depth):
    m = 0.5 * (a + b)
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm, frm = float(f(lm)), float(f(rm))
    sl = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    sr = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    s2 = sl + sr
    if abs(s2 - s) <= 15.0 * eps:
        return s2 + (s2 - s) / 15.0
    if depth <= 0:
        raise ConvergenceError("integrate_adaptive hit max recursion depth", (s, s2))
    return (_adapt(f, a, m, fa, flm, fm, sl, 0.5 * eps, depth - 1)
            + _adapt(f, m, b, fm, frm, fb, sr, 0.5 * eps, depth - 1))
