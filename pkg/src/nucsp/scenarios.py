"""Scenario orchestration: YAML configs in, deterministic CSV tables out.

Five scenarios cover the library surface:

  nuclide-info    resonance data, decay channels, coherent fraction
  single-sweep    single-nucleus yield and bremsstrahlung window vs beta or
                  impact parameter
  array-pattern   angular interference pattern of a short linear chain
  crystal-yield   per-layer cone weights and totals for a periodic film
  brems-compare   resonant line vs bremsstrahlung continuum, spectrally and
                  in time

Validation reports every problem it can find in one pass, each tagged with
the config path that caused it.  Runs are deterministic: rows are computed
independently (optionally on a thread pool) and assembled in input order, so
the emitted tables are byte-identical for any thread count.  The only
non-reproducible output line is the timestamp metadata entry.
"""

from __future__ import annotations

import dataclasses
import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping

import numpy as np
import yaml

from . import __version__
from .brems import br_spectral_density, br_window_yield
from .crystal_sp import CutoffPolicy, LatticeFilm, builtin_presets, emission_cones, make_film
from .finite_array import NucleusSet, angular_density
from .nuclide import NuclideRecord, radiative_rate, registry as nuclide_registry
from .numerics import CONSTANTS
from .probe import Probe, electron, proton
from .single_nucleus import coherent_yield, decay_profile, spectral_profile

__all__ = [
    "ScenarioConfig",
    "ResultTable",
    "validate_config",
    "run_scenario",
    "write_tables",
    "parse_result_table",
    "SCENARIOS",
]

SCENARIOS = ("nuclide-info", "single-sweep", "array-pattern",
             "crystal-yield", "brems-compare")

_TOP_KEYS = {"scenario", "nuclide", "probe", "params", "output"}
_PROBE_KEYS = {"species", "beta", "kinetic_energy_eV", "rest_energy_eV", "z_charge"}


@dataclass(frozen=True)
class ScenarioConfig:
    """A validated run request; params carry scenario defaults already applied."""

    scenario: str
    nuclide: str
    probe: Probe | None
    params: Mapping[str, Any]
    prefix: str
    raw_text: str


# ---------------------------------------------------------------------------
# validation


def _as_number(v) -> float | None:
    """Coerce a YAML scalar to float; tolerates '9.4e8'-style strings, which
    YAML 1.1 loads as text because the exponent lacks a sign."""
    if isinstance(v, bool):
        return None
    if isinstance(v, (int, float)):
        return float(v)
    if isinstance(v, str):
        try:
            return float(v)
        except ValueError:
            return None
    return None


def _get_float(block, key, default, errors, path, positive=False):
    v = block.get(key, default)
    if v is None:
        return None
    num = _as_number(v)
    if num is None:
        errors.append("%s.%s: must be a number" % (path, key))
        return default
    if positive and not num > 0:
        errors.append("%s.%s: must be positive" % (path, key))
        return default
    return num


def _get_int(block, key, default, errors, path, minimum=None):
    v = block.get(key, default)
    if not isinstance(v, int) or isinstance(v, bool):
        errors.append("%s.%s: must be an integer" % (path, key))
        return default
    if minimum is not None and v < minimum:
        errors.append("%s.%s: must be at least %d" % (path, key, minimum))
        return default
    return v


def _check_keys(block, allowed, errors, path):
    for key in block:
        if key not in allowed:
            errors.append("%s.%s: unknown key" % (path, key))


def _build_probe(block, errors) -> Probe | None:
    if block is None:
        errors.append("probe: required for this scenario")
        return None
    if not isinstance(block, dict):
        errors.append("probe: must be a mapping")
        return None
    _check_keys(block, _PROBE_KEYS, errors, "probe")
    species = block.get("species", "electron")
    if species not in ("electron", "proton", "custom"):
        errors.append("probe.species: must be electron, proton, or custom")
        return None
    if ("beta" in block) == ("kinetic_energy_eV" in block):
        errors.append("probe: give exactly one of beta or kinetic_energy_eV")
        return None
    beta = _as_number(block["beta"]) if "beta" in block else None
    ke = _as_number(block["kinetic_energy_eV"]) \
        if "kinetic_energy_eV" in block else None
    if "beta" in block and (beta is None or not 0 < beta < 1):
        errors.append("probe.beta: must be a number in (0, 1)")
        return None
    if "kinetic_energy_eV" in block and (ke is None or not ke > 0):
        errors.append("probe.kinetic_energy_eV: must be a positive number")
        return None
    try:
        if species == "electron":
            return electron(beta=beta, kinetic_energy_eV=ke)
        if species == "proton":
            return proton(beta=beta, kinetic_energy_eV=ke)
        rest = _as_number(block.get("rest_energy_eV"))
        charge = block.get("z_charge")
        if rest is None or not rest > 0:
            errors.append("probe.rest_energy_eV: custom species needs a positive number")
            return None
        if not isinstance(charge, int) or isinstance(charge, bool) or charge == 0:
            errors.append("probe.z_charge: custom species needs a non-zero integer")
            return None
        if beta is None:
            from .probe import beta_from_kinetic
            beta = beta_from_kinetic(ke, rest)
        return Probe(z_charge=charge, rest_energy_eV=float(rest), beta=float(beta))
    except ValueError as exc:
        errors.append("probe: %s" % exc)
        return None


def _monotone_values(block, key, errors, path, lo=None, hi=None):
    vals = block.get(key)
    if vals is None:
        return None
    if not isinstance(vals, list) or not vals:
        errors.append("%s.%s: must be a non-empty list" % (path, key))
        return None
    out = []
    for i, v in enumerate(vals):
        num = _as_number(v)
        if num is None:
            errors.append("%s.%s[%d]: must be a number" % (path, key, i))
            return None
        if (lo is not None and not num > lo) or (hi is not None and not num < hi):
            errors.append("%s.%s[%d]: out of range" % (path, key, i))
            return None
        out.append(num)
    if any(b <= a for a, b in zip(out, out[1:])):
        errors.append("%s.%s: values must be strictly increasing" % (path, key))
        return None
    return out


def _validate_params(scenario, block, errors, films):
    p: dict[str, Any] = {}
    path = "params"
    if block is None:
        block = {}
    if not isinstance(block, dict):
        errors.append("params: must be a mapping")
        return p
    if scenario == "nuclide-info":
        _check_keys(block, set(), errors, path)
    elif scenario == "single-sweep":
        _check_keys(block, {"sweep_variable", "sweep_values", "r_perp_nm",
                            "br_z_nucleus", "br_window_eV"}, errors, path)
        var = block.get("sweep_variable", "beta")
        if var not in ("beta", "r_perp_nm"):
            errors.append("params.sweep_variable: must be beta or r_perp_nm")
            var = "beta"
        p["sweep_variable"] = var
        bounds = (0.0, 1.0) if var == "beta" else (0.0, None)
        vals = _monotone_values(block, "sweep_values", errors, path,
                                lo=bounds[0], hi=bounds[1])
        if vals is None and "sweep_values" not in block:
            errors.append("params.sweep_values: required")
        p["sweep_values"] = vals or []
        p["r_perp_nm"] = _get_float(block, "r_perp_nm", 0.001, errors, path, positive=True)
        p["br_z_nucleus"] = _get_int(block, "br_z_nucleus", 26, errors, path)
        if p["br_z_nucleus"] == 0:
            errors.append("params.br_z_nucleus: must be non-zero")
            p["br_z_nucleus"] = 26
        p["br_window_eV"] = _get_float(block, "br_window_eV", 1.0, errors, path, positive=True)
    elif scenario == "array-pattern":
        _check_keys(block, {"n_nuclei", "spacing_nm", "standoff_nm", "n_points"},
                    errors, path)
        p["n_nuclei"] = _get_int(block, "n_nuclei", 10, errors, path, minimum=2)
        p["spacing_nm"] = _get_float(block, "spacing_nm", 0.286, errors, path, positive=True)
        p["standoff_nm"] = _get_float(block, "standoff_nm", 0.01, errors, path, positive=True)
        p["n_points"] = _get_int(block, "n_points", 801, errors, path, minimum=2)
    elif scenario == "crystal-yield":
        _check_keys(block, {"lattice", "a_nm", "r_min_nm", "smooth_cutoff",
                            "betas", "order_cap", "n_layers"}, errors, path)
        lattice = block.get("lattice", "bcc100")
        if not isinstance(lattice, str) or lattice not in films:
            errors.append("params.lattice: unknown lattice %r (available: %s)"
                          % (lattice, ", ".join(sorted(films))))
            lattice = "bcc100"
        p["lattice"] = lattice
        p["a_nm"] = _get_float(block, "a_nm", None, errors, path, positive=True)
        p["r_min_nm"] = _get_float(block, "r_min_nm", 0.001, errors, path, positive=True)
        smooth = block.get("smooth_cutoff", False)
        if not isinstance(smooth, bool):
            errors.append("params.smooth_cutoff: must be a boolean")
            smooth = False
        p["smooth_cutoff"] = smooth
        p["betas"] = _monotone_values(block, "betas", errors, path, lo=0.0, hi=1.0)
        p["order_cap"] = _get_int(block, "order_cap", 12, errors, path, minimum=1)
        p["n_layers"] = _get_int(block, "n_layers", 1, errors, path, minimum=1)
    elif scenario == "brems-compare":
        _check_keys(block, {"r_perp_nm", "br_z_nucleus", "half_span_line_widths",
                            "n_energy", "time_max_lifetimes", "n_time"}, errors, path)
        p["r_perp_nm"] = _get_float(block, "r_perp_nm", 0.001, errors, path, positive=True)
        p["br_z_nucleus"] = _get_int(block, "br_z_nucleus", 26, errors, path)
        if p["br_z_nucleus"] == 0:
            errors.append("params.br_z_nucleus: must be non-zero")
            p["br_z_nucleus"] = 26
        p["half_span_line_widths"] = _get_float(block, "half_span_line_widths",
                                                25.0, errors, path, positive=True)
        p["n_energy"] = _get_int(block, "n_energy", 41, errors, path, minimum=3)
        p["time_max_lifetimes"] = _get_float(block, "time_max_lifetimes", 5.0,
                                             errors, path, positive=True)
        p["n_time"] = _get_int(block, "n_time", 51, errors, path, minimum=2)
    return p


def validate_config(text: str, registry: Mapping[str, NuclideRecord] | None = None,
                    films: Mapping[str, LatticeFilm] | None = None):
    """Parse and check a YAML scenario config.

    Returns (config, errors); config is None whenever errors is non-empty.
    Every detected problem is reported, prefixed with its config path.
    """
    reg = nuclide_registry() if registry is None else registry
    film_map = builtin_presets() if films is None else films
    errors: list[str] = []
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        loc = " (line %d, column %d)" % (mark.line + 1, mark.column + 1) if mark else ""
        return None, ["config: invalid YAML%s: %s" % (loc, getattr(exc, "problem", exc))]
    if not isinstance(doc, dict):
        return None, ["config: top level must be a mapping"]

    _check_keys(doc, _TOP_KEYS, errors, "config")
    scenario = doc.get("scenario")
    if scenario is None:
        errors.append("scenario: required")
    elif scenario not in SCENARIOS:
        errors.append("scenario: unknown %r (choose from %s)"
                      % (scenario, ", ".join(SCENARIOS)))
        scenario = None

    nuclide = doc.get("nuclide", "Fe-57")
    if not isinstance(nuclide, str):
        errors.append("nuclide: must be a string")
        nuclide = "Fe-57"
    elif nuclide != "all" and nuclide not in reg:
        errors.append("nuclide: unknown %r (available: %s)"
                      % (nuclide, ", ".join(reg)))
    if nuclide == "all" and scenario is not None and scenario != "nuclide-info":
        errors.append("nuclide: 'all' is only valid for nuclide-info")

    probe = None
    if scenario is not None and scenario != "nuclide-info":
        probe = _build_probe(doc.get("probe"), errors)

    params = _validate_params(scenario, doc.get("params"), errors, film_map) \
        if scenario is not None else {}

    out_block = doc.get("output", {})
    prefix = "result"
    if not isinstance(out_block, dict):
        errors.append("output: must be a mapping")
    else:
        _check_keys(out_block, {"prefix"}, errors, "output")
        prefix = out_block.get("prefix", "result")
        if (not isinstance(prefix, str) or not prefix
                or not all(c.isalnum() or c in "_-." for c in prefix)):
            errors.append("output.prefix: must use only letters, digits, '_', '-', '.'")
            prefix = "result"

    if errors:
        return None, errors
    return ScenarioConfig(scenario=scenario, nuclide=nuclide, probe=probe,
                          params=params, prefix=prefix, raw_text=text), []


# ---------------------------------------------------------------------------
# result tables


@dataclass(frozen=True, eq=False)
class ResultTable:
    """One CSV deliverable: '#' metadata lines, a header, then data rows."""

    name: str
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]
    meta: Mapping[str, str]

    def to_csv(self) -> str:
        lines = ["# %s = %s" % (k, v) for k, v in self.meta.items()]
        lines.append(",".join(self.columns))
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError("row width does not match header")
            lines.append(",".join(_format_cell(c) for c in row))
        return "\n".join(lines) + "\n"


def _format_cell(v) -> str:
    if isinstance(v, str):
        if "," in v or "\n" in v:
            raise ValueError("cell strings must not contain commas or newlines")
        return v
    if isinstance(v, (bool, np.bool_)):
        raise ValueError("boolean cells are not supported")
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        f = float(v)
        if not math.isfinite(f):
            raise ValueError("non-finite value in result table")
        return repr(f)
    raise ValueError("unsupported cell type %r" % type(v).__name__)


def parse_result_table(text: str):
    """Inverse of ResultTable.to_csv: returns (meta, columns, rows of strings)."""
    meta: dict[str, str] = {}
    columns: list[str] = []
    rows: list[list[str]] = []
    for line in text.splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition("=")
            meta[key.strip()] = value.strip()
        elif not columns:
            columns = line.split(",")
        else:
            rows.append(line.split(","))
    return meta, columns, rows


def write_tables(tables: Iterable[ResultTable], out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for table in tables:
        path = out / (table.name + ".csv")
        path.write_text(table.to_csv(), encoding="utf-8")
        paths.append(path)
    return paths


# ---------------------------------------------------------------------------
# runners


def _map(threads: int, fn: Callable, items) -> list:
    # results are assembled in input order, so the emitted tables do not
    # depend on the worker count
    items = list(items)
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def _half_str(doubled: int) -> str:
    return "%d/2" % doubled if doubled % 2 else str(doubled // 2)


def _run_nuclide_info(config, reg, films, threads):
    names = list(reg) if config.nuclide == "all" else [config.nuclide]

    def row(name):
        rec = reg[name]
        f = rec.coherent_fraction
        return (rec.name, rec.e0_eV / 1e3, rec.lifetime_s,
                1.0 / radiative_rate(rec), rec.alpha_ic, float(f),
                "%d/%d" % (f.numerator, f.denominator),
                _half_str(rec.jg2), _half_str(rec.je2))

    columns = ("name", "e0_keV", "lifetime_s", "radiative_lifetime_s",
               "alpha_ic", "coherent_fraction", "coherent_fraction_exact",
               "j_ground", "j_excited")
    return [(columns, _map(threads, row, names))]


def _run_single_sweep(config, reg, films, threads):
    rec = reg[config.nuclide]
    p = config.params

    def row(val):
        if p["sweep_variable"] == "beta":
            probe = dataclasses.replace(config.probe, beta=val)
            r = p["r_perp_nm"]
        else:
            probe = config.probe
            r = val
        y = coherent_yield(probe, rec, r)
        br = br_window_yield(probe, p["br_z_nucleus"], r, rec.e0_eV,
                             p["br_window_eV"])
        ratio = br / y if y > 0.0 else ""
        return (probe.beta, probe.gamma, r, y, br, ratio)

    columns = ("beta", "gamma", "r_perp_nm", "resonant_yield",
               "brems_window_yield", "brems_over_resonant")
    return [(columns, _map(threads, row, p["sweep_values"]))]


def _run_array_pattern(config, reg, films, threads):
    rec = reg[config.nuclide]
    p = config.params
    z = p["spacing_nm"] * np.arange(p["n_nuclei"])
    nuclei = NucleusSet(np.column_stack([np.zeros_like(z), np.zeros_like(z), z]))
    r_p = np.array([p["standoff_nm"], 0.0])
    cos_grid = np.linspace(1.0, -1.0, p["n_points"])

    def row(c):
        theta = math.acos(c)
        return (float(c), theta,
                angular_density(config.probe, rec, nuclei, r_p, theta, 0.0))

    columns = ("cos_theta", "theta_rad", "density_per_sr")
    return [(columns, _map(threads, row, cos_grid))]


def _run_crystal_yield(config, reg, films, threads):
    rec = reg[config.nuclide]
    p = config.params
    if p["lattice"] in _PRESET_NAMES:
        film = make_film(p["lattice"], a_nm=p["a_nm"], n_layers=p["n_layers"])
    else:
        if p["a_nm"] is not None:
            raise ValueError("a_nm can only override built-in lattice presets")
        film = dataclasses.replace(films[p["lattice"]], n_layers=p["n_layers"])
    policy = CutoffPolicy(p["r_min_nm"], p["smooth_cutoff"])
    betas = p["betas"] if p["betas"] is not None else [config.probe.beta]

    def rows_for(beta):
        probe = dataclasses.replace(config.probe, beta=beta)
        cones = emission_cones(probe, rec, film, policy, order_cap=p["order_cap"])
        z2 = probe.z_charge ** 2 * film.n_layers
        out = [(beta, c.n, c.cos_theta, c.weight / z2) for c in cones]
        out.append((beta, 0, "", sum(c.weight for c in cones) / z2))
        return out

    rows = [r for chunk in _map(threads, rows_for, betas) for r in chunk]
    columns = ("beta", "order_n", "cos_theta", "yield_per_layer_per_z2")
    return [(columns, rows)]


def _run_brems_compare(config, reg, films, threads):
    rec = reg[config.nuclide]
    p = config.params
    probe = config.probe
    y = coherent_yield(probe, rec, p["r_perp_nm"])
    spectrum = spectral_profile(rec)
    half = p["half_span_line_widths"] * spectrum.fwhm_eV
    offsets = np.linspace(-half, half, p["n_energy"])
    hbar = CONSTANTS.hbar_eV_s

    def srow(de):
        e = rec.e0_eV + de
        res = y * spectrum.density(e)
        br = br_spectral_density(probe, p["br_z_nucleus"], p["r_perp_nm"],
                                 e / hbar) / hbar
        return (float(de), res, br)

    spectral = _map(threads, srow, offsets)
    s_cols = ("energy_offset_eV", "resonant_per_eV_per_passage",
              "brems_per_eV_per_passage")

    dp = decay_profile(rec)
    times = np.linspace(0.0, p["time_max_lifetimes"] * rec.lifetime_s, p["n_time"])

    def trow(t):
        return (float(t), dp.survival(t), y * dp.profile(t))

    temporal = _map(threads, trow, times)
    t_cols = ("time_s", "excited_fraction", "emission_rate_per_s")
    return [(s_cols, spectral), (t_cols, temporal, "_temporal")]


_PRESET_NAMES = ("bcc100", "fcc100", "sc100")

_RUNNERS = {
    "nuclide-info": _run_nuclide_info,
    "single-sweep": _run_single_sweep,
    "array-pattern": _run_array_pattern,
    "crystal-yield": _run_crystal_yield,
    "brems-compare": _run_brems_compare,
}


def run_scenario(config: ScenarioConfig, threads: int = 1, seed: int = 1,
                 registry: Mapping[str, NuclideRecord] | None = None,
                 films: Mapping[str, LatticeFilm] | None = None) -> list[ResultTable]:
    """Execute a validated config and return its result tables."""
    if threads < 1:
        raise ValueError("threads must be at least 1")
    reg = nuclide_registry() if registry is None else registry
    film_map = builtin_presets() if films is None else films
    produced = _RUNNERS[config.scenario](config, reg, film_map, threads)
    meta = {
        "scenario": config.scenario,
        "nuclide": config.nuclide,
        "config_sha256": hashlib.sha256(config.raw_text.encode("utf-8")).hexdigest(),
        "version": __version__,
        "seed": str(seed),
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    tables = []
    for item in produced:
        columns, rows = item[0], item[1]
        suffix = item[2] if len(item) > 2 else ""
        tables.append(ResultTable(name=config.prefix + suffix,
                                  columns=tuple(columns),
                                  rows=tuple(tuple(r) for r in rows),
                                  meta=meta))
    return tables
