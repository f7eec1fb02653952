"""Nuclear level data and the angular-momentum algebra behind it.

A target nucleus is modeled as a two-level system with ground and excited
total angular momenta (j_g, j_e), |j_e - j_g| = 1, coupled by a pure magnetic
dipole (M1) transition.  Sublevel-resolved transition strengths follow from
squared matrix elements of the spherical harmonics Y_1m between states

    |l j mu> = sum_s C_{l j mu s} Y_{l, mu - s} |s>

built from half-integer Clebsch-Gordan coefficients in closed form.  From
the strength diagram we obtain the coherent fraction f (the m-independent
average of the downward strengths, i.e. the probability that excitation plus
radiative decay returns the nucleus to its original sublevel), the coherent
radiative rate

    kappa_r = kappa * f / (1 + alpha_IC) / branch_divisor,

and the isotropic magnetic polarizability

    alpha_M(omega) = (3 / 4 k^3) * kappa_r / (omega0 - omega - i kappa / 2),

with k = omega0 / c.  All spin arithmetic is exact: half-integers are stored
as doubled integers and strengths as rationals, so the sum rules hold as
identities rather than to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Iterable, Mapping

from .numerics import CONSTANTS

__all__ = [
    "NuclideRecord",
    "TransitionDiagram",
    "DataFileError",
    "clebsch_gordan_half",
    "y1m_matrix_element",
    "transition_diagram",
    "coherent_fraction",
    "radiative_rate",
    "polarizability",
    "builtin_records",
    "registry",
    "parse_nuclide_file",
    "parse_kv_blocks",
]

FOUR_PI = 4.0 * math.pi


# ---------------------------------------------------------------------------
# exact arithmetic helpers: values of the form sign * sqrt(rational) are kept
# as (sign, rational-square) pairs so products and commensurate sums stay exact

_SignedSq = tuple[int, Fraction]


def _doubled(x, name: str) -> int:
    """Convert a (half-)integer given as float/int/Fraction to its doubled int."""
    d = 2 * Fraction(x)
    if d.denominator != 1:
        raise ValueError(f"{name} must be an integer or half-integer, got {x}")
    return int(d)


def _ssq_mul(a: _SignedSq, b: _SignedSq) -> _SignedSq:
    return (a[0] * b[0], a[1] * b[1])


def _ssq_add(a: _SignedSq, b: _SignedSq) -> _SignedSq:
    """Add two signed square roots; their ratio must be a perfect rational square."""
    if a[0] == 0:
        return b
    if b[0] == 0:
        return a
    r = a[1] / b[1]
    sn, sd = isqrt(r.numerator), isqrt(r.denominator)
    if sn * sn != r.numerator or sd * sd != r.denominator:
        raise ValueError("cannot add incommensurate radicals exactly")
    c = a[0] * Fraction(sn, sd) + b[0]
    if c == 0:
        return (0, Fraction(0))
    return ((1 if c > 0 else -1), c * c * b[1])


def _ssq_float(a: _SignedSq) -> float:
    return a[0] * math.sqrt(a[1])


def _fact_half(nd: int) -> int:
    """Factorial of nd/2 where nd is an even, non-negative doubled integer."""
    if nd < 0 or nd % 2:
        raise ValueError("factorial argument must be a non-negative integer")
    return math.factorial(nd // 2)


def _cg_sq(j1d: int, m1d: int, j2d: int, m2d: int, jd: int, md: int) -> _SignedSq:
    """General Clebsch-Gordan coefficient <j1 m1; j2 m2 | j m> via the Racah
    sum, on doubled-integer arguments.  Returns (sign, value^2) exactly."""
    if md != m1d + m2d:
        return (0, Fraction(0))
    if not (abs(j1d - j2d) <= jd <= j1d + j2d) or (j1d + j2d + jd) % 2:
        return (0, Fraction(0))
    if abs(m1d) > j1d or abs(m2d) > j2d or abs(md) > jd:
        return (0, Fraction(0))

    pref = Fraction(
        (jd + 1)
        * _fact_half(j1d + j2d - jd) * _fact_half(j1d - j2d + jd) * _fact_half(-j1d + j2d + jd)
        * _fact_half(jd + md) * _fact_half(jd - md)
        * _fact_half(j1d - m1d) * _fact_half(j1d + m1d)
        * _fact_half(j2d - m2d) * _fact_half(j2d + m2d),
        _fact_half(j1d + j2d + jd + 2),
    )
    total = Fraction(0)
    kd = 0
    while True:
        args = (kd, j1d + j2d - jd - kd, j1d - m1d - kd, j2d + m2d - kd,
                jd - j2d + m1d + kd, jd - j1d - m2d + kd)
        if args[1] < 0 and args[2] < 0 and args[3] < 0:
            break
        if all(x >= 0 for x in args):
            den = 1
            for x in args:
                den *= _fact_half(x)
            total += Fraction((-1) ** (kd // 2), den)
        kd += 2
    if total == 0:
        return (0, Fraction(0))
    return ((1 if total > 0 else -1), pref * total * total)


def _cg_half_sq(l: int, jd: int, mud: int, sd: int) -> _SignedSq:
    """Closed-form C_{l j mu s} for spin-1/2 coupling, as (sign, value^2).

    l must be (jd +- 1)/2; sd is the doubled spin projection (+1 or -1).
    """
    j = Fraction(jd, 2)
    mu = Fraction(mud, 2)
    if 2 * l == jd + 1:
        if sd == -1:
            return (1, Fraction(j + mu + 1, 2 * (j + 1))) if j + mu + 1 else (0, Fraction(0))
        return (-1, Fraction(j - mu + 1, 2 * (j + 1))) if j - mu + 1 else (0, Fraction(0))
    if 2 * l == jd - 1:
        if sd == -1:
            return (1, Fraction(j - mu, 2 * j)) if j != mu else (0, Fraction(0))
        return (1, Fraction(j + mu, 2 * j)) if j != -mu else (0, Fraction(0))
    raise ValueError("l must equal j + 1/2 or j - 1/2")


def clebsch_gordan_half(l: int, j, mu, s) -> float:
    """Signed coefficient C_{l j mu s} coupling orbital l and spin 1/2 to (j, mu).

    l must be one of j +- 1/2; vanishing coefficients (|mu - s| > l or a zero
    closed form) return 0.0 rather than raising.
    """
    jd = _doubled(j, "j")
    mud = _doubled(mu, "mu")
    sd = _doubled(s, "s")
    if jd <= 0 or jd % 2 == 0:
        raise ValueError("j must be a positive half-integer")
    if sd not in (-1, 1):
        raise ValueError("s must be +1/2 or -1/2")
    if abs(mud) > jd:
        raise ValueError("|mu| must not exceed j")
    if not isinstance(l, int) or l < 0:
        raise ValueError("l must be a non-negative integer")
    if 2 * l not in (jd + 1, jd - 1):
        raise ValueError("l must equal j + 1/2 or j - 1/2")
    if abs(mud - sd) > 2 * l:
        return 0.0
    return _ssq_float(_cg_half_sq(l, jd, mud, sd))


def _gaunt_y1_sq(lp: int, mp: int, q: int, l: int, m: int) -> _SignedSq:
    """Integral of Y*_{lp mp} Y_{1 q} Y_{l m} over the sphere, as
    (sign, 4*pi*value^2).  Closed form via two Clebsch-Gordan factors."""
    if mp != m + q or abs(m) > l or abs(mp) > lp:
        return (0, Fraction(0))
    c0 = _cg_sq(2 * l, 0, 2, 0, 2 * lp, 0)
    c1 = _cg_sq(2 * l, 2 * m, 2, 2 * q, 2 * lp, 2 * mp)
    pref = Fraction(3 * (2 * l + 1), (2 * lp + 1))
    return (c0[0] * c1[0], pref * c0[1] * c1[1])


def _y1m_sq(je_d: int, mue_d: int, jg_d: int, mug_d: int, upper: bool) -> _SignedSq:
    """<e_mue| Y_1m |g_mug> with m = mue - mug, as (sign, 4*pi*value^2).

    upper selects the realization l = j + 1/2 for both levels; the lower
    realization uses l = j - 1/2.  The physical value is realization
    independent (asserted by tests rather than assumed).
    """
    md = mue_d - mug_d
    if abs(md) > 2:
        return (0, Fraction(0))
    le = (je_d + 1) // 2 if upper else (je_d - 1) // 2
    lg = (jg_d + 1) // 2 if upper else (jg_d - 1) // 2
    out: _SignedSq = (0, Fraction(0))
    for sd in (-1, 1):
        if abs(mue_d - sd) > 2 * le or abs(mug_d - sd) > 2 * lg:
            continue
        ce = _cg_half_sq(le, je_d, mue_d, sd)
        cg = _cg_half_sq(lg, jg_d, mug_d, sd)
        g = _gaunt_y1_sq(le, (mue_d - sd) // 2, md // 2, lg, (mug_d - sd) // 2)
        out = _ssq_add(out, _ssq_mul(_ssq_mul(ce, cg), g))
    return out


def y1m_matrix_element(j_e, mu_e, j_g, mu_g, realization: str = "upper") -> float:
    """Matrix element <e_{mu_e}| Y_{1m} |g_{mu_g}> with m = mu_e - mu_g.

    Zero when |m| > 1 (dipole selection rule).  realization picks the orbital
    quantum numbers l = j + 1/2 ("upper", default) or l = j - 1/2 ("lower")
    for both levels; the two give identical values.
    """
    je_d = _doubled(j_e, "j_e")
    jg_d = _doubled(j_g, "j_g")
    mue_d = _doubled(mu_e, "mu_e")
    mug_d = _doubled(mu_g, "mu_g")
    if abs(mue_d) > je_d or abs(mug_d) > jg_d:
        raise ValueError("sublevel index exceeds its total angular momentum")
    if realization not in ("upper", "lower"):
        raise ValueError("realization must be 'upper' or 'lower'")
    if realization == "lower" and min(je_d, jg_d) < 1:
        raise ValueError("lower realization needs j >= 1/2")
    sgn, q4pi = _y1m_sq(je_d, mue_d, jg_d, mug_d, realization == "upper")
    return sgn * math.sqrt(q4pi / FOUR_PI)


@dataclass(frozen=True)
class TransitionDiagram:
    """Sublevel-resolved M1 transition strengths between two nuclear levels.

    strengths maps (mu_e, mu_g) pairs (as Fractions) to exact rational
    weights, normalized so the downward strengths from each excited sublevel
    sum to 1.
    """

    jg2: int
    je2: int
    strengths: Mapping[tuple[Fraction, Fraction], Fraction]

    def downward_sum(self, mu_e) -> Fraction:
        mu = Fraction(mu_e)
        return sum((w for (me, _), w in self.strengths.items() if me == mu), Fraction(0))

    def upward_sum(self, mu_g) -> Fraction:
        mu = Fraction(mu_g)
        return sum((w for (_, mg), w in self.strengths.items() if mg == mu), Fraction(0))


def transition_diagram(j_g, j_e) -> TransitionDiagram:
    """Strength diagram for an M1 pair (j_g, j_e) with |j_e - j_g| = 1.

    Entries are squared Y_1m matrix elements, normalized per excited sublevel.
    """
    jg_d = _doubled(j_g, "j_g")
    je_d = _doubled(j_e, "j_e")
    if jg_d <= 0 or je_d <= 0 or jg_d % 2 == 0 or je_d % 2 == 0:
        raise ValueError("spins must be positive half-integers")
    if abs(je_d - jg_d) != 2:
        raise ValueError("only |j_e - j_g| = 1 dipole pairs are supported")

    raw: dict[tuple[Fraction, Fraction], Fraction] = {}
    for mue_d in range(-je_d, je_d + 1, 2):
        for mug_d in range(-jg_d, jg_d + 1, 2):
            _, q4pi = _y1m_sq(je_d, mue_d, jg_d, mug_d, upper=True)
            if q4pi:
                raw[(Fraction(mue_d, 2), Fraction(mug_d, 2))] = q4pi
    strengths: dict[tuple[Fraction, Fraction], Fraction] = {}
    for mue_d in range(-je_d, je_d + 1, 2):
        mue = Fraction(mue_d, 2)
        tot = sum((q for (me, _), q in raw.items() if me == mue), Fraction(0))
        for (me, mg), q in raw.items():
            if me == mue:
                strengths[(me, mg)] = q / tot
    return TransitionDiagram(jg2=jg_d, je2=je_d, strengths=strengths)


def coherent_fraction(j_g, j_e) -> Fraction:
    """Arithmetic mean of the nonzero downward strengths, as an exact rational."""
    diagram = transition_diagram(j_g, j_e)
    weights = list(diagram.strengths.values())
    return sum(weights, Fraction(0)) / len(weights)


# ---------------------------------------------------------------------------
# nuclide records


@dataclass(frozen=True)
class NuclideRecord:
    """Level data for one resonant nuclide.

    jg2 and je2 are the doubled total angular momenta (exact half-integer
    bookkeeping); branch_divisor is an extra radiative-rate reduction applied
    on top of the internal-conversion and coherent-fraction factors, stored as
    data because no closed formula fixes it.
    """

    name: str
    e0_keV: float
    lifetime_s: float
    alpha_ic: float
    jg2: int
    je2: int
    branch_divisor: float = 1.0

    def __post_init__(self):
        if not self.name:
            raise ValueError("name must be non-empty")
        if not self.e0_keV > 0:
            raise ValueError("e0_keV must be positive")
        if not self.lifetime_s > 0:
            raise ValueError("lifetime_s must be positive")
        if self.alpha_ic < 0:
            raise ValueError("alpha_ic must be non-negative")
        if self.branch_divisor < 1:
            raise ValueError("branch_divisor must be >= 1")
        for tag, jd in (("jg2", self.jg2), ("je2", self.je2)):
            if not isinstance(jd, int) or jd <= 0 or jd % 2 == 0:
                raise ValueError(f"{tag} must be a positive odd integer (doubled half-integer)")
        if abs(self.je2 - self.jg2) != 2:
            raise ValueError("|j_e - j_g| must equal 1 (M1 dipole selection)")

    @property
    def j_g(self) -> Fraction:
        return Fraction(self.jg2, 2)

    @property
    def j_e(self) -> Fraction:
        return Fraction(self.je2, 2)

    @property
    def e0_eV(self) -> float:
        return self.e0_keV * 1e3

    @property
    def omega0_rad_s(self) -> float:
        return self.e0_eV / CONSTANTS.hbar_eV_s

    @property
    def wavelength_nm(self) -> float:
        return 2.0 * math.pi * CONSTANTS.c_nm_s / self.omega0_rad_s

    @property
    def kappa_s(self) -> float:
        """Total decay rate (1/s)."""
        return 1.0 / self.lifetime_s

    @property
    def coherent_fraction(self) -> Fraction:
        return coherent_fraction(self.j_g, self.j_e)


def radiative_rate(rec: NuclideRecord) -> float:
    """Coherent radiative rate kappa_r in 1/s."""
    f = float(rec.coherent_fraction)
    return rec.kappa_s * f / (1.0 + rec.alpha_ic) / rec.branch_divisor


def polarizability(rec: NuclideRecord, omega: float) -> complex:
    """Magnetic dipole polarizability alpha_M(omega) in nm^3.

    Lorentzian response of half-width kappa/2 about omega0, with the resonant
    wavevector k = omega0/c in the prefactor (the kappa-neighborhood where
    alpha_M is ever evaluated makes the k(omega) distinction O(kappa/omega0)).
    """
    if not omega > 0:
        raise ValueError("omega must be positive")
    k = rec.omega0_rad_s / CONSTANTS.c_nm_s  # 1/nm
    return (3.0 / (4.0 * k ** 3)) * radiative_rate(rec) / complex(
        rec.omega0_rad_s - omega, -0.5 * rec.kappa_s)


def builtin_records() -> tuple[NuclideRecord, ...]:
    """The two nuclides shipped with the package."""
    return (
        NuclideRecord(name="Fe-57", e0_keV=14.4129, lifetime_s=1.42e-7,
                      alpha_ic=8.544, jg2=1, je2=3),
        NuclideRecord(name="Dy-161", e0_keV=43.8201, lifetime_s=1.20e-9,
                      alpha_ic=4.213, jg2=5, je2=7, branch_divisor=2.25),
    )


def registry(extra_files: Iterable[str] = ()) -> dict[str, NuclideRecord]:
    """Name -> record mapping: built-in nuclides plus optional data files.

    Later files override earlier entries of the same name.  A fresh dict is
    returned on every call, so the mapping is read-only by construction.
    """
    out = {rec.name: rec for rec in builtin_records()}
    for path in extra_files:
        for rec in parse_nuclide_file(path):
            out[rec.name] = rec
    return out


# ---------------------------------------------------------------------------
# key/value data files


class DataFileError(ValueError):
    """Malformed data file; message carries the path and 1-based line number."""

    def __init__(self, path: str, line: int, message: str):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


def parse_kv_blocks(text: str, path: str = "<data>") -> list[tuple[int, dict[str, str]]]:
    """Parse blank-line-separated blocks of "key = value" lines.

    Full-line and trailing '#' comments are stripped.  Returns a list of
    (first_line_number, mapping) pairs; duplicate keys within a block and
    malformed lines raise DataFileError with the offending line number.
    """
    blocks: list[tuple[int, dict[str, str]]] = []
    current: dict[str, str] = {}
    start = 0
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            if current:
                blocks.append((start, current))
                current = {}
            continue
        if "=" not in line:
            raise DataFileError(path, lineno, "expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise DataFileError(path, lineno, "expected 'key = value'")
        if key in current:
            raise DataFileError(path, lineno, f"duplicate key '{key}' in block")
        if not current:
            start = lineno
        current[key] = value
    if current:
        blocks.append((start, current))
    return blocks


_NUCLIDE_FIELDS = {
    "name": str,
    "e0_keV": float,
    "lifetime_s": float,
    "alpha_ic": float,
    "jg2": int,
    "je2": int,
    "branch_divisor": float,
}
_NUCLIDE_REQUIRED = ("name", "e0_keV", "lifetime_s", "alpha_ic", "jg2", "je2")


def parse_nuclide_file(path: str) -> list[NuclideRecord]:
    """Load nuclide records from a key/value data file."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    records = []
    for start, block in parse_kv_blocks(text, str(path)):
        for key in block:
            if key not in _NUCLIDE_FIELDS:
                raise DataFileError(str(path), start, f"unknown key '{key}'")
        for key in _NUCLIDE_REQUIRED:
            if key not in block:
                raise DataFileError(str(path), start, f"missing key '{key}'")
        kwargs = {}
        for key, value in block.items():
            conv = _NUCLIDE_FIELDS[key]
            try:
                kwargs[key] = conv(value)
            except ValueError:
                raise DataFileError(str(path), start,
                                    f"bad value for '{key}': {value!r}") from None
        try:
            records.append(NuclideRecord(**kwargs))
        except ValueError as exc:
            raise DataFileError(str(path), start, str(exc)) from None
    return records
