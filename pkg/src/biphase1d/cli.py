"""Run configuration, experiment presets, orchestration, and writers.

Configs are flat JSON documents; two presets encode the twin benchmark
cases (equal viscosities, and 0.1 vs 0.02).  All outputs are plain-text
tables with one ``# column`` header line, 17-significant-digit floats,
and LF line endings, so reruns of the same config are byte-identical.
"""

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import diagnostics
from .errors import ConfigError, SolverError
from .macro import MacroState, run_macro
from .materials import WEIGHTINGS, MaterialPair, PowerLaw
from .meso import MesoState, run_meso
from .stepping import StepPolicy

_DEFAULTS = {
    "scheme": "both",
    "cells": 1000,
    "t_end": 0.1,
    "mu_plus": 0.1,
    "mu_minus": 0.1,
    "gamma_plus": 1.0,
    "gamma_minus": 2.0,
    "K_plus": 1.0,
    "K_minus": 1.0,
    "weighting": "cross",
    "cfl_theta": 0.4,
    "dt_max": 1e-4,
    "relax_eta": 0.5,
    "coarse_K": None,  # derived: ~20 fine cells per window, capped at 50
    "output_dir": "biphase1d-out",
    "cadence": 100,
}

# the two benchmark cases: p_+(x) = x, p_-(x) = x^2, Riemann datum,
# t_end = 0.1 on 1000 cells; they differ only in the viscosities
PRESETS = {
    "test1": {"mu_plus": 0.1, "mu_minus": 0.1},
    "test2": {"mu_plus": 0.1, "mu_minus": 0.02},
}

_SCHEMES = ("meso", "macro", "both")


@dataclass
class RunConfig:
    scheme: str
    cells: int
    t_end: float
    mat: MaterialPair
    weighting: str
    policy: StepPolicy
    coarse_K: int
    output_dir: str
    cadence: int
    raw: dict = field(repr=False, default_factory=dict)


def _as_int(raw, key, minimum):
    val = raw[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)) or int(val) != val:
        raise ConfigError(f"key {key!r}: expected an integer, got {val!r}")
    if int(val) < minimum:
        raise ConfigError(f"key {key!r}: must be >= {minimum}, got {val}")
    return int(val)


def _as_float(raw, key, minimum=None, strict=False):
    val = raw[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"key {key!r}: expected a number, got {val!r}")
    val = float(val)
    if minimum is not None and (val < minimum or (strict and val == minimum)):
        op = ">" if strict else ">="
        raise ConfigError(f"key {key!r}: must be {op} {minimum}, got {val}")
    return val


def _build_config(raw):
    unknown = set(raw) - set(_DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown config key {sorted(unknown)[0]!r}")
    merged = {**_DEFAULTS, **raw}

    scheme = merged["scheme"]
    if scheme not in _SCHEMES:
        raise ConfigError(f"key 'scheme': must be one of {_SCHEMES}, got {scheme!r}")
    weighting = merged["weighting"]
    if weighting not in WEIGHTINGS:
        raise ConfigError(f"key 'weighting': must be one of {WEIGHTINGS}, got {weighting!r}")

    cells = _as_int(merged, "cells", 4)
    t_end = _as_float(merged, "t_end", 0.0)
    cadence = _as_int(merged, "cadence", 1)
    if merged["coarse_K"] is None:
        # ~20 fine cells per window, capped at 50 windows
        merged["coarse_K"] = min(50, max(2, cells // 20))
    coarse_K = _as_int(merged, "coarse_K", 2)
    if coarse_K >= cells:
        raise ConfigError(f"key 'coarse_K': must be < cells, got {coarse_K} >= {cells}")

    try:
        mat = MaterialPair(
            law_plus=PowerLaw(K=_as_float(merged, "K_plus", 0.0, strict=True),
                              gamma=_as_float(merged, "gamma_plus", 1.0)),
            law_minus=PowerLaw(K=_as_float(merged, "K_minus", 0.0, strict=True),
                               gamma=_as_float(merged, "gamma_minus", 1.0)),
            mu_plus=_as_float(merged, "mu_plus", 0.0, strict=True),
            mu_minus=_as_float(merged, "mu_minus", 0.0, strict=True),
        )
        policy = StepPolicy(cfl_theta=_as_float(merged, "cfl_theta"),
                            dt_max=_as_float(merged, "dt_max", 0.0, strict=True),
                            relax_eta=_as_float(merged, "relax_eta", 0.0, strict=True))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    output_dir = merged["output_dir"]
    if not isinstance(output_dir, str) or not output_dir:
        raise ConfigError(f"key 'output_dir': expected a nonempty string, got {output_dir!r}")

    return RunConfig(scheme=scheme, cells=cells, t_end=t_end, mat=mat,
                     weighting=weighting, policy=policy, coarse_K=coarse_K,
                     output_dir=output_dir, cadence=cadence, raw=dict(merged))


def parse_config(source, overrides=None):
    """Build a validated RunConfig.

    ``source`` may be a preset name, a path to a JSON file, inline JSON
    text, or an already-parsed dict.  Keys given in ``overrides`` win
    over the source; a "preset" key inside the source supplies base
    values that the remaining keys override.
    """
    if isinstance(source, dict):
        raw = dict(source)
    else:
        text = str(source)
        if text in PRESETS:
            raw = {"preset": text}
        elif Path(text).is_file():
            raw = _load_json(Path(text).read_text())
        elif text.lstrip().startswith("{"):
            raw = _load_json(text)
        else:
            raise ConfigError(f"{text!r} is neither a preset "
                              f"({', '.join(sorted(PRESETS))}), a config file, nor inline JSON")

    preset = raw.pop("preset", None)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"key 'preset': unknown preset {preset!r}")
        raw = {**PRESETS[preset], **raw}
    if overrides:
        raw.update({k: v for k, v in overrides.items() if v is not None})
    return _build_config(raw)


def _load_json(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed config: {exc.msg} at line {exc.lineno}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object of key/value pairs")
    return data


# ---------------------------------------------------------------------------
# writers

def _fmt_row(values):
    return " ".join(f"{v:.17g}" for v in values)


def _write_table(path, names, columns):
    rows = np.column_stack(columns)
    with open(path, "w", newline="\n") as fh:
        fh.write("# " + " ".join(names) + "\n")
        for row in rows:
            fh.write(_fmt_row(row) + "\n")


_CELL, _NODE = "cell", "node"

_STATE_COLUMNS = {
    MesoState: {
        "rho": (_CELL, lambda s: s.rho),
        "c": (_CELL, lambda s: s.c),
        "alpha": (_CELL, diagnostics.estimate_alpha_meso),
        "u": (_NODE, lambda s: s.u),
    },
    MacroState: {
        "rho": (_CELL, lambda s: s.rho),
        "alpha": (_CELL, lambda s: s.alpha),
        "rho_plus": (_CELL, lambda s: s.rho_plus),
        "rho_minus": (_CELL, lambda s: s.rho_minus),
        "u": (_NODE, lambda s: s.u),
    },
}

_DEFAULT_COLUMNS = {MesoState: ("rho", "c"), MacroState: ("rho", "rho_plus", "rho_minus")}

_COARSE_COLUMNS = ("alpha", "rho", "rho_plus", "rho_minus", "u")


def write_fields(obj, path, columns=None):
    """Write a state or coarse-field snapshot as a plain-text table.

    Cell quantities are listed at cell midpoints, node quantities at the
    interfaces (both mapped onto the torus); the requested columns must
    therefore all live at the same location.
    """
    if isinstance(obj, diagnostics.CoarseFields):
        columns = columns or _COARSE_COLUMNS
        getters = {"alpha": obj.alpha_hat, "rho": obj.rho_hat,
                   "rho_plus": obj.rho_plus_hat, "rho_minus": obj.rho_minus_hat,
                   "u": obj.u_hat}
        cols = [obj.centers] + [getters[name] for name in columns]
        _write_table(path, ("x",) + tuple(columns), cols)
        return
    column_map = _STATE_COLUMNS[type(obj)]
    columns = columns or _DEFAULT_COLUMNS[type(obj)]
    locations = {column_map[name][0] for name in columns}
    if len(locations) != 1:
        raise ValueError("cannot mix cell and node quantities in one file")
    grid = obj.grid
    x = (grid.midpoints if locations == {_CELL} else grid.node_x) % grid.length
    cols = [x] + [np.asarray(column_map[name][1](obj), dtype=float) for name in columns]
    _write_table(path, ("x",) + tuple(columns), cols)


_DIAG_HEADER = ("t", "mass", "E_kin", "E_int", "E_diss", "E_tot",
                "rho_min", "rho_max", "dx_min", "dt")


def write_diagnostics(records, path):
    """Time series of the conservation functionals, one row per record."""
    with open(path, "w", newline="\n") as fh:
        fh.write("# " + " ".join(_DIAG_HEADER) + "\n")
        for r in records:
            fh.write(_fmt_row((r.t, r.total_mass, r.kinetic_energy,
                               r.internal_energy, r.dissipated, r.energy_total,
                               r.rho_min, r.rho_max, r.dx_min, r.dt_used)) + "\n")


def _write_comparison(out, coarse_meso, coarse_macro, norms, config, clamp_events):
    pairs = (("alpha", "alpha_hat"), ("rho", "rho_hat"), ("rho_plus", "rho_plus_hat"),
             ("rho_minus", "rho_minus_hat"), ("u", "u_hat"))
    names = ["x"]
    cols = [coarse_meso.centers]
    for short, attr in pairs:
        names += [f"{short}_meso", f"{short}_macro"]
        cols += [getattr(coarse_meso, attr), getattr(coarse_macro, attr)]
    _write_table(out / "comparison_windows.dat", names, cols)

    with open(out / "comparison_report.txt", "w", newline="\n") as fh:
        fh.write(f"# meso vs macro on K={config.coarse_K} windows, "
                 f"weighting={config.weighting}, cells={config.cells}, "
                 f"t_end={config.t_end:g}\n")
        fh.write("# field l1 l2 linf rel_l1 rel_l2 rel_linf\n")
        for short, attr in pairs:
            n = norms[attr]
            fh.write(f"{short} " + _fmt_row((n["l1"], n["l2"], n["linf"],
                                             n["rel_l1"], n["rel_l2"], n["rel_linf"])) + "\n")
        fh.write(f"# macro clamp_events = {clamp_events}\n")


# ---------------------------------------------------------------------------
# orchestration

def _execute(config, out):
    """Run the configured scheme(s) and write everything; returns the
    comparison norms when both schemes ran."""
    with open(out / "config.json", "w", newline="\n") as fh:
        json.dump(config.raw, fh, indent=2, sort_keys=True)
        fh.write("\n")
    results = {}
    if config.scheme in ("meso", "both"):
        state, records = run_meso(config)
        write_fields(state, out / "meso_density.dat", columns=("rho",))
        write_fields(state, out / "meso_velocity.dat", columns=("u",))
        write_fields(state, out / "meso_alpha.dat", columns=("alpha",))
        write_diagnostics(records, out / "meso_diagnostics.dat")
        results["meso"] = (state, records)
    if config.scheme in ("macro", "both"):
        state, records = run_macro(config)
        write_fields(state, out / "macro_density.dat", columns=("rho",))
        write_fields(state, out / "macro_velocity.dat", columns=("u",))
        write_fields(state, out / "macro_alpha.dat", columns=("alpha",))
        write_fields(state, out / "macro_phase_densities.dat",
                     columns=("rho_plus", "rho_minus"))
        write_diagnostics(records, out / "macro_diagnostics.dat")
        results["macro"] = (state, records)
    if config.scheme == "both":
        coarse_meso = diagnostics.coarse_grain(results["meso"][0], config.coarse_K)
        coarse_macro = diagnostics.coarse_grain(results["macro"][0], config.coarse_K)
        norms = diagnostics.compare_fields(coarse_meso, coarse_macro)
        write_fields(coarse_meso, out / "meso_coarse.dat")
        write_fields(coarse_macro, out / "macro_coarse.dat")
        _write_comparison(out, coarse_meso, coarse_macro, norms, config,
                          results["macro"][0].clamp_events)
        results["norms"] = norms
    return results


def run_experiment(config):
    """Execute a config; returns the process exit status (0 ok, 1 solver
    failure).  Partial outputs are kept next to a FAILED marker."""
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        _execute(config, out)
    except SolverError as exc:
        records = exc.diagnostics.get("records") if hasattr(exc, "diagnostics") else None
        if records:
            write_diagnostics(records, out / "partial_diagnostics.dat")
        with open(out / "FAILED", "w", newline="\n") as fh:
            fh.write(f"{exc}\n")
        return 1
    return 0


def run_sweep(source, cells_list, out_dir, overrides=None):
    """Run scheme=both over a list of resolutions and tabulate the
    relative L1 meso/macro differences per resolution.

    All resolutions are compared on one window layout: the explicitly
    configured coarse_K if any, else the default derived at the smallest
    resolution.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    probe = parse_config(source, overrides={**(overrides or {}),
                                            "cells": min(cells_list)})
    rows = []
    for cells in cells_list:
        sub_overrides = dict(overrides or {})
        sub_overrides.update({"cells": cells, "scheme": "both",
                              "coarse_K": probe.coarse_K,
                              "output_dir": str(out / f"J{cells}")})
        config = parse_config(source, overrides=sub_overrides)
        sub_out = Path(config.output_dir)
        sub_out.mkdir(parents=True, exist_ok=True)
        results = _execute(config, sub_out)
        norms = results["norms"]
        rows.append((cells, norms["rho_hat"]["rel_l1"], norms["u_hat"]["rel_l1"],
                     norms["alpha_hat"]["rel_l1"]))
    with open(out / "sweep.dat", "w", newline="\n") as fh:
        fh.write("# cells rel_l1_rho rel_l1_u rel_l1_alpha\n")
        for row in rows:
            fh.write(f"{row[0]} " + _fmt_row(row[1:]) + "\n")
    return rows


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="biphase1d",
        description="1D compressible two-fluid simulator: sharp-interface "
                    "and homogenized two-phase schemes on a periodic domain.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one configuration or preset")
    p_run.add_argument("config", help="preset name (test1, test2), JSON file, or inline JSON")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--scheme", choices=_SCHEMES, default=None)
    p_run.add_argument("--cells", type=int, default=None)
    p_run.add_argument("--weighting", choices=WEIGHTINGS, default=None)

    p_sweep = sub.add_parser("sweep", help="resolution sweep of meso/macro agreement")
    p_sweep.add_argument("config", help="preset name, JSON file, or inline JSON")
    p_sweep.add_argument("--cells", required=True,
                         help="comma-separated resolutions, e.g. 250,500,1000")
    p_sweep.add_argument("--out", default=None, help="output directory")
    p_sweep.add_argument("--weighting", choices=WEIGHTINGS, default=None)

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            config = parse_config(args.config, overrides={
                "output_dir": args.out, "scheme": args.scheme,
                "cells": args.cells, "weighting": args.weighting})
            return run_experiment(config)
        cells_list = []
        for token in args.cells.split(","):
            try:
                cells_list.append(int(token))
            except ValueError:
                raise ConfigError(f"--cells: {token!r} is not an integer") from None
        out_dir = args.out or "biphase1d-sweep"
        run_sweep(args.config, cells_list, out_dir,
                  overrides={"weighting": args.weighting})
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
