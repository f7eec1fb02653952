"""Bremsstrahlung background from a single beam-nucleus passage.

For a charge Ze of mass M passing a fixed nucleus of charge Z_n e at impact
parameter R, the photon number density per solid angle and per unit angular
frequency is

    Gamma_BR(Omega, omega) = [alpha^3 Z^4 Z_n^2 hbar^2 omega
                              / (pi^2 M^2 c^4 beta^4 gamma^2)]
                             |(1 - beta cos(theta)) r_hat x F
                              + beta (r_hat x z_hat) (r_hat . F)|^2,

    F = K1(zeta) R_hat + (i / gamma^2) K0(zeta) z_hat,
    zeta = (1 - beta cos(theta)) omega R / v.

The nucleus direction R_hat is taken along +x, so the phi argument of the
observation direction is measured from the beam-nucleus plane.  The result
carries units of seconds (probability per sr per unit omega); multiplying by
a photon-energy window w in eV gives the in-window count after dividing by
hbar (omega window w / hbar).

This is a smooth continuum: near a nuclear resonance its spectral density is
flat on the scale of the natural linewidth, which is what makes the
resonant emission stand out despite the much larger integrated
bremsstrahlung power.
"""

from __future__ import annotations

import math

import numpy as np

from .numerics import CONSTANTS, ConvergenceError, bessel_k01
from .probe import Probe

__all__ = [
    "br_density",
    "br_spectral_density",
    "br_window_yield",
]


def _prefactor(probe: Probe, z_nucleus: int, omega: float) -> float:
    """alpha^3 Z^4 Z_n^2 hbar^2 omega / (pi^2 (M c^2)^2 beta^4 gamma^2), in s."""
    a = CONSTANTS.alpha_fs
    return (a ** 3 * probe.z_charge ** 4 * z_nucleus ** 2
            * CONSTANTS.hbar_eV_s ** 2 * omega
            / (math.pi ** 2 * probe.rest_energy_eV ** 2
               * probe.beta ** 4 * probe.gamma ** 2))


def _density_values(probe: Probe, z_nucleus: int, r_perp_nm: float,
                    cos_t: np.ndarray, phi: np.ndarray, omega: float) -> np.ndarray:
    """Vectorized density on an outer product of cos(theta) and phi nodes."""
    beta = probe.beta
    gamma = probe.gamma
    ct = cos_t[:, None]
    st = np.sqrt(np.clip(1.0 - ct * ct, 0.0, None))
    cp = np.cos(phi)[None, :]
    sp = np.sin(phi)[None, :]
    doppler = 1.0 - beta * ct

    # zeta depends on theta only; evaluate the Bessel pair once per node
    zeta = (doppler * omega * r_perp_nm / probe.velocity_nm_s).ravel()
    k0, k1 = bessel_k01(zeta)

    # F = K1 x_hat + (i / gamma^2) K0 z_hat; r_hat = (st cp, st sp, ct)
    fx = k1[:, None]
    fz = 1j * k0[:, None] / (gamma * gamma)
    # r_hat x F = (st sp Fz - ct * 0, ct Fx - st cp Fz, -st sp Fx)
    cx = st * sp * fz
    cy = ct * fx - st * cp * fz
    cz = -st * sp * fx
    # r_hat x z_hat = (st sp, -st cp, 0); r_hat . F = st cp Fx + ct Fz
    rdotf = st * cp * fx + ct * fz
    vx = doppler * cx + beta * st * sp * rdotf
    vy = doppler * cy - beta * st * cp * rdotf
    vz = doppler * cz
    mag2 = (np.abs(vx) ** 2 + np.abs(vy) ** 2 + np.abs(vz) ** 2)
    return _prefactor(probe, z_nucleus, omega) * mag2


def br_density(probe: Probe, z_nucleus: int, r_perp_nm: float,
               theta: float, phi: float, omega: float) -> float:
    """Photon density per sr per unit angular frequency, in seconds."""
    if not r_perp_nm > 0:
        raise ValueError("r_perp_nm must be positive")
    if not omega > 0:
        raise ValueError("omega must be positive")
    if z_nucleus == 0:
        raise ValueError("z_nucleus must be non-zero")
    val = _density_values(probe, z_nucleus, r_perp_nm,
                          np.array([math.cos(theta)]), np.array([float(phi)]),
                          omega)
    return float(val[0, 0])


def br_spectral_density(probe: Probe, z_nucleus: int, r_perp_nm: float,
                        omega: float, rel_tol: float = 1e-4) -> float:
    """Solid-angle integral of the density at fixed omega, in seconds.

    Gauss-Legendre in cos(theta) times a uniform phi grid, with the node
    count doubled until two successive estimates agree to rel_tol.
    """
    if not r_perp_nm > 0:
        raise ValueError("r_perp_nm must be positive")
    if not omega > 0:
        raise ValueError("omega must be positive")
    prev = None
    estimates = []
    n = 32
    while n <= 1024:
        nodes, wts = np.polynomial.legendre.leggauss(n)
        phis = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
        vals = _density_values(probe, z_nucleus, r_perp_nm, nodes, phis, omega)
        est = float(wts @ vals.sum(axis=1)) * (2.0 * math.pi / n)
        estimates.append(est)
        if prev is not None and abs(est - prev) <= rel_tol * max(abs(est), abs(prev)):
            return est
        prev = est
        n *= 2
    raise ConvergenceError("solid-angle integral did not settle",
                           tuple(estimates[-2:]))


def br_window_yield(probe: Probe, z_nucleus: int, r_perp_nm: float,
                    center_eV: float, window_eV: float) -> float:
    """Photon count in an energy window centered on a line, per passage.

    Integrates the spectral density over omega in [center - w/2, center + w/2]
    with three-point Simpson quadrature; the integrand is nearly linear in
    omega over any window narrow compared to the center energy.
    """
    if not center_eV > 0:
        raise ValueError("center_eV must be positive")
    if window_eV < 0:
        raise ValueError("window_eV must be non-negative")
    if window_eV == 0:
        return 0.0
    hbar = CONSTANTS.hbar_eV_s
    lo = (center_eV - 0.5 * window_eV) / hbar
    mid = center_eV / hbar
    hi = (center_eV + 0.5 * window_eV) / hbar
    if lo <= 0:
        raise ValueError("window extends to non-positive photon energies")
    f = [br_spectral_density(probe, z_nucleus, r_perp_nm, w)
         for w in (lo, mid, hi)]
    return (hi - lo) / 6.0 * (f[0] + 4.0 * f[1] + f[2])
