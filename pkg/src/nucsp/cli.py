"""Command-line entry point.

Subcommands:

  run CONFIG        validate a YAML scenario config, execute it, write CSVs
  validate CONFIG   check a config and report every problem found
  list-nuclides     show the resonance registry
  list-lattices     show the film geometry presets

Exit codes: 0 on success, 1 for validation problems, 2 for runtime failures
(unreadable files, data file errors, non-converging integrals).

If the NUCSP_DATA_DIR environment variable points at a directory, any
nuclides.dat and lattices.dat files inside it are loaded on top of the
built-in registries; entries with matching names override the built-ins.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .crystal_sp import builtin_presets, parse_lattice_file
from .nuclide import DataFileError, radiative_rate, registry as nuclide_registry
from .numerics import ConvergenceError
from .scenarios import run_scenario, validate_config, write_tables

DATA_DIR_ENV = "NUCSP_DATA_DIR"


def _load_registries():
    """Built-in nuclides and lattices, plus any NUCSP_DATA_DIR overlays."""
    data_dir = os.environ.get(DATA_DIR_ENV)
    nuclide_files = []
    films = builtin_presets()
    if data_dir:
        ndat = Path(data_dir) / "nuclides.dat"
        if ndat.is_file():
            nuclide_files.append(ndat)
        ldat = Path(data_dir) / "lattices.dat"
        if ldat.is_file():
            films.update(parse_lattice_file(ldat))
    return nuclide_registry(extra_files=nuclide_files), films


def _cmd_run(args) -> int:
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    reg, films = _load_registries()
    config, errors = validate_config(text, reg, films)
    if errors:
        for e in errors:
            print(e, file=sys.stderr)
        return 1
    tables = run_scenario(config, threads=args.threads, seed=args.seed,
                          registry=reg, films=films)
    for path in write_tables(tables, args.out):
        print(path)
    return 0


def _cmd_validate(args) -> int:
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    reg, films = _load_registries()
    config, errors = validate_config(text, reg, films)
    if errors:
        for e in errors:
            print(e, file=sys.stderr)
        return 1
    print("ok: %s scenario for %s" % (config.scenario, config.nuclide))
    return 0


def _cmd_list_nuclides(args) -> int:
    reg, _ = _load_registries()
    print("%-10s %12s %12s %12s %10s %8s" % (
        "name", "E0_keV", "lifetime_s", "tau_rad_s", "alpha_IC", "f"))
    for rec in reg.values():
        f = rec.coherent_fraction
        print("%-10s %12.4f %12.4g %12.4g %10.4g %8s" % (
            rec.name, rec.e0_eV / 1e3, rec.lifetime_s,
            1.0 / radiative_rate(rec), rec.alpha_ic,
            "%d/%d" % (f.numerator, f.denominator)))
    return 0


def _cmd_list_lattices(args) -> int:
    _, films = _load_registries()
    print("%-10s %8s %18s %10s %10s %7s" % (
        "name", "a_nm", "offset_nm", "b_z_nm", "d_nm", "planes"))
    for name, film in films.items():
        print("%-10s %8.4f %18s %10.4f %10.4f %7d" % (
            name, film.a_nm,
            "(%.4f, %.4f)" % film.b_par_nm,
            film.b_z_nm, film.z_period_nm, film.stack_period))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nucsp",
        description="Resonant nuclear gamma-ray emission from relativistic "
                    "charges near nuclei, arrays, and crystal films.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario config")
    p_run.add_argument("config", help="YAML scenario file")
    p_run.add_argument("--out", default=".", help="output directory (default: .)")
    p_run.add_argument("--threads", type=int, default=1,
                       help="worker threads for row evaluation (default: 1)")
    p_run.add_argument("--seed", type=int, default=1,
                       help="random seed recorded in table metadata (default: 1)")
    p_run.set_defaults(func=_cmd_run)

    p_val = sub.add_parser("validate", help="check a config without running it")
    p_val.add_argument("config", help="YAML scenario file")
    p_val.set_defaults(func=_cmd_validate)

    p_ln = sub.add_parser("list-nuclides", help="show the resonance registry")
    p_ln.set_defaults(func=_cmd_list_nuclides)

    p_ll = sub.add_parser("list-lattices", help="show film geometry presets")
    p_ll.set_defaults(func=_cmd_list_lattices)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DataFileError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
