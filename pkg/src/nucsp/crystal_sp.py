"""Periodic-film emission: discrete cones, azimuthal weights, and per-layer
yields from the reciprocal-space sum.

A film is built from square-lattice (001)-type atomic planes with in-plane
period a, interlayer spacing b_z, and an in-plane offset b_par between
successive planes.  The z period is d = p b_z, where p is the smallest
number of planes after which the offset returns to a lattice vector.  A
charge moving along z with velocity v emits at the cone angles

    cos(theta_n) = c/v - n lambda0 / d,     n = 1, 2, ...

For order n and azimuth phi the per-layer emission probability is

    Gamma_n(phi) = N [9 pi^2 Z^2 alpha kappa_r^2 c^3 / (A^2 omega0^4 kappa b_z)]
                   sum_G' Q^2 (1 - (r_hat . phi_hat_Q)^2) / (Q^2 + Delta^2)^2,

with Q = k_par + G, Delta = omega0 / (v gamma), A = a^2 the cell area, and
the prime restricting G to vectors whose interplane phase matches the order:
n b_z / d + (G . b_par) / (2 pi) must be an integer.  The equivalent form
Q^2 cos^2(theta_n) + (Q . r_hat)^2 of the numerator is also provided.

The sum over G diverges logarithmically and is cut off at g_max = 1/R_min,
where R_min is the closest impact parameter the beam can reach.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .numerics import CONSTANTS, integrate_periodic
from .nuclide import DataFileError, NuclideRecord, parse_kv_blocks, radiative_rate
from .probe import Probe

__all__ = [
    "LatticeFilm",
    "CutoffPolicy",
    "EmissionCone",
    "builtin_presets",
    "make_film",
    "parse_lattice_file",
    "sp_angles",
    "reciprocal_vectors",
    "azimuthal_profile",
    "emission_cones",
    "layer_yield",
    "single_plane_averaged_intensity",
]

_PARITY_TOL = 1e-9
_MAX_STACK_PERIOD = 16
_SMOOTH_EXTENT = 12.0


@dataclass(frozen=True)
class LatticeFilm:
    """Square-lattice film geometry: in-plane period, stacking offset, spacing."""

    preset: str
    a_nm: float
    b_par_nm: tuple[float, float]
    b_z_nm: float
    n_layers: int = 1

    def __post_init__(self):
        if not self.a_nm > 0 or not self.b_z_nm > 0:
            raise ValueError("lattice periods must be positive")
        if len(self.b_par_nm) != 2:
            raise ValueError("b_par_nm must have two components")
        if self.n_layers < 1:
            raise ValueError("n_layers must be at least 1")
        object.__setattr__(self, "b_par_nm",
                           (float(self.b_par_nm[0]), float(self.b_par_nm[1])))
        self.z_period_nm  # validate stacking closes up

    @property
    def cell_area_nm2(self) -> float:
        return self.a_nm * self.a_nm

    @property
    def stack_period(self) -> int:
        """Number of planes per z period (offset returns to a lattice vector)."""
        for p in range(1, _MAX_STACK_PERIOD + 1):
            fx = p * self.b_par_nm[0] / self.a_nm
            fy = p * self.b_par_nm[1] / self.a_nm
            if (abs(fx - round(fx)) < _PARITY_TOL
                    and abs(fy - round(fy)) < _PARITY_TOL):
                return p
        raise ValueError("stacking offset does not close within %d planes"
                         % _MAX_STACK_PERIOD)

    @property
    def z_period_nm(self) -> float:
        return self.stack_period * self.b_z_nm


def builtin_presets() -> dict[str, "LatticeFilm"]:
    """Built-in (001) film geometries with their default lattice constants."""
    return {
        "bcc100": make_film("bcc100"),
        "fcc100": make_film("fcc100"),
        "sc100": make_film("sc100"),
    }


_PRESET_DEFAULT_A = {"bcc100": 0.2856, "fcc100": 0.36, "sc100": 0.2856}


def make_film(preset: str, a_nm: float | None = None, n_layers: int = 1) -> LatticeFilm:
    """Construct a film from a named stacking preset.

    bcc100: offset (a/2, a/2), spacing a/2.  fcc100: offset (a/2, a/2),
    spacing a/sqrt(2).  sc100: no offset, spacing a.
    """
    if preset not in _PRESET_DEFAULT_A:
        raise ValueError("unknown lattice preset %r (available: %s)"
                         % (preset, ", ".join(sorted(_PRESET_DEFAULT_A))))
    a = _PRESET_DEFAULT_A[preset] if a_nm is None else float(a_nm)
    if preset == "bcc100":
        return LatticeFilm(preset, a, (a / 2.0, a / 2.0), a / 2.0, n_layers)
    if preset == "fcc100":
        return LatticeFilm(preset, a, (a / 2.0, a / 2.0), a / math.sqrt(2.0), n_layers)
    return LatticeFilm(preset, a, (0.0, 0.0), a, n_layers)


_LATTICE_FIELDS = {
    "name": str,
    "a_nm": float,
    "b_par_x_nm": float,
    "b_par_y_nm": float,
    "b_z_nm": float,
}
_LATTICE_REQUIRED = ("name", "a_nm", "b_par_x_nm", "b_par_y_nm", "b_z_nm")


def parse_lattice_file(path) -> dict[str, LatticeFilm]:
    """Read film geometries from key = value blocks separated by blank lines."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    films: dict[str, LatticeFilm] = {}
    for lineno, block in parse_kv_blocks(text, str(path)):
        for key in block:
            if key not in _LATTICE_FIELDS:
                raise DataFileError(str(path), lineno, "unknown key %r" % key)
        for key in _LATTICE_REQUIRED:
            if key not in block:
                raise DataFileError(str(path), lineno, "missing key %r" % key)
        conv = {}
        for key, raw in block.items():
            try:
                conv[key] = _LATTICE_FIELDS[key](raw)
            except ValueError:
                raise DataFileError(str(path), lineno,
                                    "invalid value %r for key %r" % (raw, key))
        try:
            films[conv["name"]] = LatticeFilm(
                preset=conv["name"], a_nm=conv["a_nm"],
                b_par_nm=(conv["b_par_x_nm"], conv["b_par_y_nm"]),
                b_z_nm=conv["b_z_nm"])
        except ValueError as exc:
            raise DataFileError(str(path), lineno, str(exc))
    return films


@dataclass(frozen=True)
class CutoffPolicy:
    """Reciprocal-sum regularization from the closest approach distance.

    The hard policy keeps |G| <= 1/r_min with unit weight; the smooth policy
    weights each vector by exp(-|G| r_min) and extends the enumeration far
    enough that the discarded tail is below e^-12.
    """

    r_min_nm: float
    smooth: bool = False

    def __post_init__(self):
        if not self.r_min_nm > 0:
            raise ValueError("r_min_nm must be positive")

    @property
    def g_max_nm(self) -> float:
        return 1.0 / self.r_min_nm

    def enumeration_radius(self) -> float:
        return (_SMOOTH_EXTENT if self.smooth else 1.0) * self.g_max_nm

    def weights(self, g_norm: np.ndarray) -> np.ndarray:
        if self.smooth:
            return np.exp(-g_norm * self.r_min_nm)
        return np.ones_like(g_norm)


def sp_angles(beta: float, d_nm: float, lambda_nm: float,
              order_cap: int | None = None) -> list[tuple[int, float]]:
    """Orders n and cone cosines cos(theta_n) = 1/beta - n lambda / d."""
    if not 0 < beta < 1:
        raise ValueError("beta must be in (0, 1)")
    if not d_nm > 0 or not lambda_nm > 0:
        raise ValueError("d_nm and lambda_nm must be positive")
    out = []
    n = 1
    while order_cap is None or n <= order_cap:
        c = 1.0 / beta - n * lambda_nm / d_nm
        if c < -1.0:
            break
        if c <= 1.0:
            out.append((n, c))
        n += 1
    return out


def _enumerate_g(film: LatticeFilm, policy: CutoffPolicy,
                 order: int | None) -> np.ndarray:
    """Reciprocal vectors (M, 2) inside the cutoff, deterministically ordered.

    With an order given, keeps only vectors whose stacking phase closes:
    t = n b_z / d + (i b_par_x + j b_par_y) / a must be integral.
    """
    g_unit = 2.0 * math.pi / film.a_nm
    radius = policy.enumeration_radius()
    m = int(math.floor(radius / g_unit))
    idx = np.arange(-m, m + 1)
    ii, jj = np.meshgrid(idx, idx, indexing="ij")
    ii = ii.ravel()
    jj = jj.ravel()
    keep = (ii * ii + jj * jj) * g_unit * g_unit <= radius * radius
    ii, jj = ii[keep], jj[keep]
    if order is not None:
        t = (order * film.b_z_nm / film.z_period_nm
             + (ii * film.b_par_nm[0] + jj * film.b_par_nm[1]) / film.a_nm)
        ok = np.abs(t - np.round(t)) < _PARITY_TOL
        ii, jj = ii[ok], jj[ok]
    shell = ii * ii + jj * jj
    order_key = np.lexsort((jj, ii, shell))
    return g_unit * np.column_stack([ii[order_key], jj[order_key]]).astype(float)


def reciprocal_vectors(film: LatticeFilm, n: int,
                       policy: CutoffPolicy) -> np.ndarray:
    """Admissible reciprocal vectors for order n, sorted by (|G|, i, j)."""
    if n < 1:
        raise ValueError("order must be a positive integer")
    g = _enumerate_g(film, policy, n)
    if g.shape[0] == 0:
        warnings.warn("no reciprocal vectors pass the cutoff for order %d" % n,
                      RuntimeWarning, stacklevel=2)
    return g


def _cone_cos(probe: Probe, rec: NuclideRecord, film: LatticeFilm, n: int) -> float:
    c = 1.0 / probe.beta - n * rec.wavelength_nm / film.z_period_nm
    if n < 1 or abs(c) > 1.0:
        raise ValueError("order %d does not radiate at beta = %g" % (n, probe.beta))
    return c


def _gsum_terms(probe: Probe, rec: NuclideRecord, film: LatticeFilm, n: int,
                phi, policy: CutoffPolicy, kernel: str = "projection") -> np.ndarray:
    """Weighted per-G summands of the azimuthal profile, phi broadcast first."""
    if kernel not in ("projection", "transverse"):
        raise ValueError("kernel must be 'projection' or 'transverse'")
    cos_t = _cone_cos(probe, rec, film, n)
    sin_t = math.sqrt(max(0.0, (1.0 - cos_t) * (1.0 + cos_t)))
    g = _enumerate_g(film, policy, n)
    phi_arr = np.atleast_1d(np.asarray(phi, dtype=float))
    k0 = rec.omega0_rad_s / CONSTANTS.c_nm_s
    kx = k0 * sin_t * np.cos(phi_arr)
    ky = k0 * sin_t * np.sin(phi_arr)
    qx = kx[:, None] + g[None, :, 0]
    qy = ky[:, None] + g[None, :, 1]
    q2 = qx * qx + qy * qy
    delta = rec.omega0_rad_s / (probe.velocity_nm_s * probe.gamma)
    den = (q2 + delta * delta) ** 2
    if kernel == "projection":
        qdotr = qx * sin_t * np.cos(phi_arr)[:, None] + qy * sin_t * np.sin(phi_arr)[:, None]
        num = q2 * cos_t * cos_t + qdotr * qdotr
    else:
        # Q^2 (1 - (r_hat . phi_hat_Q)^2) with the 1/|Q| of phi_hat_Q cancelled
        rdotphat = (-qy * np.cos(phi_arr)[:, None]
                    + qx * np.sin(phi_arr)[:, None]) * sin_t
        num = q2 - rdotphat * rdotphat
    w = policy.weights(np.hypot(g[:, 0], g[:, 1]))[None, :]
    return w * num / den


def _layer_prefactor(probe: Probe, rec: NuclideRecord, film: LatticeFilm) -> float:
    """9 pi^2 Z^2 alpha kappa_r^2 c^3 / (A^2 omega0^4 kappa b_z), in 1/nm^2."""
    c = CONSTANTS.c_nm_s
    return (9.0 * math.pi ** 2 * probe.z_charge ** 2 * CONSTANTS.alpha_fs
            * radiative_rate(rec) ** 2 * c ** 3
            / (film.cell_area_nm2 ** 2 * rec.omega0_rad_s ** 4
               * rec.kappa_s * film.b_z_nm))


def azimuthal_profile(probe: Probe, rec: NuclideRecord, film: LatticeFilm,
                      n: int, phi, policy: CutoffPolicy,
                      kernel: str = "projection"):
    """Per-layer emission probability per azimuthal radian on cone n.

    Scalar phi gives a float; an array gives the profile sampled pointwise.
    kernel picks between two algebraically equal angular factors, kept for
    cross-checking: "projection" assembles Q^2 cos^2(theta) + (Q . r_hat)^2,
    "transverse" assembles Q^2 (1 - (r_hat . phi_hat_Q)^2).
    """
    terms = _gsum_terms(probe, rec, film, n, phi, policy, kernel)
    pref = film.n_layers * _layer_prefactor(probe, rec, film)
    out = pref * np.sum(terms, axis=1)
    phi_arr = np.asarray(phi)
    return float(out[0]) if phi_arr.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class EmissionCone:
    """One radiating order: direction, azimuthal profile, integrated weight."""

    n: int
    cos_theta: float
    phis: np.ndarray
    phi_profile: np.ndarray
    weight: float


def emission_cones(probe: Probe, rec: NuclideRecord, film: LatticeFilm,
                   policy: CutoffPolicy, order_cap: int | None = None,
                   rel_tol: float = 1e-8, n_phi: int = 64) -> list[EmissionCone]:
    """All radiating orders with phi profiles and integrated cone weights."""
    cones = []
    for n, cos_t in sp_angles(probe.beta, film.z_period_nm, rec.wavelength_nm,
                              order_cap):
        phis = np.linspace(0.0, 2.0 * math.pi, n_phi, endpoint=False)
        profile = azimuthal_profile(probe, rec, film, n, phis, policy)
        weight = integrate_periodic(
            lambda p: azimuthal_profile(probe, rec, film, n, p, policy),
            rel_tol=rel_tol)
        cones.append(EmissionCone(n=n, cos_theta=cos_t, phis=phis,
                                  phi_profile=profile, weight=weight))
    return cones


def layer_yield(probe: Probe, rec: NuclideRecord, film: LatticeFilm,
                policy: CutoffPolicy, order_cap: int | None = None,
                rel_tol: float = 1e-8) -> float:
    """Total emission probability per layer and per unit charge squared."""
    cones = emission_cones(probe, rec, film, policy, order_cap, rel_tol)
    return sum(c.weight for c in cones) / (probe.z_charge ** 2 * film.n_layers)


def single_plane_averaged_intensity(probe: Probe, rec: NuclideRecord,
                                    film: LatticeFilm, theta: float, phi: float,
                                    policy: CutoffPolicy) -> float:
    """Impact-parameter averaged |r_hat x g|^2 for one unrestricted plane.

    Reciprocal-space counterpart of the Monte-Carlo average: for a single
    z = 0 plane every G contributes (no stacking selection), and

        <|r_hat x g|^2> = (2 pi v gamma / (A omega0))^2
                          sum_G w(G) Q^2 (1 - (r_hat . phi_hat_Q)^2)
                                      / (Q^2 + Delta^2)^2.
    """
    g = _enumerate_g(film, policy, None)
    sin_t = math.sin(theta)
    k0 = rec.omega0_rad_s / CONSTANTS.c_nm_s
    qx = k0 * sin_t * math.cos(phi) + g[:, 0]
    qy = k0 * sin_t * math.sin(phi) + g[:, 1]
    q2 = qx * qx + qy * qy
    delta = rec.omega0_rad_s / (probe.velocity_nm_s * probe.gamma)
    rdotphat = (-qy * math.cos(phi) + qx * math.sin(phi)) * sin_t
    num = np.where(q2 > 0.0, q2 - rdotphat * rdotphat, 0.0)
    w = policy.weights(np.hypot(g[:, 0], g[:, 1]))
    vg = probe.velocity_nm_s * probe.gamma
    pref = (2.0 * math.pi * vg / (film.cell_area_nm2 * rec.omega0_rad_s)) ** 2
    return pref * float(np.sum(w * num / (q2 + delta * delta) ** 2))
