"""Command-line front end: single evaluations, figure-preset sweeps, mode-table
dumps, and the embedded self-test.

CSV output is deterministic: metadata comment lines (version, config hash,
constants), one header row, and rows in table / sweep order with floats
printed as 17-significant-digit scientific notation.  Exit codes: 0 success,
2 config error, 3 every term tripped a numerical guard, 4 self-test failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .config import (DATA_COLUMNS, ConfigError, RunConfig, config_hash, load_config,
                     preset_config, serialize_config, PRESETS)
from .core import CavddError, Constants
from .ewald import pair_interaction_cavity
from .freespace import pair_interaction_free, v_retarded, v_static
from .modes import mode_table
from .selftest import run_selftest

WORKERS_ENV = "CAVDD_WORKERS"


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, complex):
        x = x.real
    return format(float(x), ".16e")


def _evaluate_table(cfg: RunConfig, d1, d2, constants):
    if cfg.geometry is None:
        return pair_interaction_free(d1, d2, constants)
    return pair_interaction_cavity(d1, d2, cfg.geometry.build(), constants,
                                   cfg.ewald.build())


def _table_rows(cfg: RunConfig, d1, d2, constants: Constants):
    """One list of column-value dicts for a single (d1, d2) evaluation."""
    table = _evaluate_table(cfg, d1, d2, constants)
    rows = []
    for e in table:
        m2 = d2.moments[e.u, e.v]
        m1 = d1.moments[e.a, e.b]
        nonzero = bool(np.any(m1 != 0) and np.any(m2 != 0))
        v0 = v_static(m1, m2, d1.position, d2.position, constants) if nonzero else 0.0
        vw = (v_retarded(m1, m2, d1.position, d2.position, e.omega_21, constants)
              if nonzero else 0.0)
        rows.append({
            "u": e.u, "v": e.v, "a": e.a, "b": e.b, "class": e.term_class,
            "omega_21": e.omega_21, "omega_12": e.omega_12,
            "V21": e.v_21, "V12": e.v_12, "Vsym": e.v_sym,
            "V21_image": e.v_21_image, "V21_mode": e.v_21_mode,
            "V12_image": e.v_12_image, "V12_mode": e.v_12_mode,
            "tail_21": e.tail_21, "tail_12": e.tail_12,
            "V0_free": v0, "Vw_free": vw, "status": e.status,
        })
    return rows, table.n_attempted, table.n_failed


def _build_dipoles(cfg: RunConfig, constants):
    return tuple(spec.build(constants) for spec in cfg.dipoles)


def _axis_index(axis):
    return {"x": 0, "y": 1, "z": 2}[axis]


def _sample_dipoles(cfg: RunConfig, constants, value):
    """Dipole pair for one sweep sample."""
    d1, d2 = _build_dipoles(cfg, constants)
    sw = cfg.sweep
    ax = _axis_index(sw.axis)
    if sw.variable == "separation":
        pos2 = d1.position.copy()
        pos2[ax] += value
        d2 = type(d2)(position=pos2, energies=d2.energies, moments=d2.moments)
    elif sw.variable == "offset":
        shift = value - d1.position[ax]
        delta = np.zeros(3)
        delta[ax] = shift
        d1 = type(d1)(position=d1.position + delta, energies=d1.energies,
                      moments=d1.moments)
        d2 = type(d2)(position=d2.position + delta, energies=d2.energies,
                      moments=d2.moments)
    else:  # frequency
        ref = (d1.energies[-1] - d1.energies[0]) / constants.hbar
        scale = value / ref
        d1 = type(d1)(position=d1.position, energies=d1.energies * scale,
                      moments=d1.moments)
        d2 = type(d2)(position=d2.position, energies=d2.energies * scale,
                      moments=d2.moments)
    return d1, d2


def _validate_sweep_geometry(cfg: RunConfig, constants):
    if cfg.geometry is None or cfg.sweep is None:
        return
    geom = cfg.geometry.build()
    for i, value in enumerate(cfg.sweep.values()):
        d1, d2 = _sample_dipoles(cfg, constants, value)
        for d, who in ((d1, "dipole-1"), (d2, "dipole-2")):
            if not geom.contains(d.position):
                raise ConfigError(
                    f"sweep sample {i} ({cfg.sweep.column} = {value:.9g}) places "
                    f"{who} at {d.position} outside the cavity box"
                )


def _sweep_sample(args):
    cfg, value = args
    constants = cfg.constants.build()
    d1, d2 = _sample_dipoles(cfg, constants, value)
    return _table_rows(cfg, d1, d2, constants)


def run_single(cfg: RunConfig):
    """Rows for a single evaluation; returns (rows, n_attempted, n_failed)."""
    constants = cfg.constants.build()
    d1, d2 = _build_dipoles(cfg, constants)
    return _table_rows(cfg, d1, d2, constants)


def run_sweep(cfg: RunConfig, workers=None):
    """Rows across the sweep, in sweep order; returns (rows, n_attempted, n_failed)."""
    if cfg.sweep is None:
        raise ConfigError("sweep: section required for the sweep command")
    constants = cfg.constants.build()
    _validate_sweep_geometry(cfg, constants)
    values = cfg.sweep.values()
    n_workers = workers if workers is not None else cfg.output.workers
    jobs = [(cfg, float(v)) for v in values]
    if n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(_sweep_sample, jobs))
    else:
        results = [_sweep_sample(j) for j in jobs]
    rows, n_attempted, n_failed = [], 0, 0
    for value, (sample_rows, att, failed) in zip(values, results):
        for r in sample_rows:
            r = dict(r)
            r[cfg.sweep.column] = float(value)
            rows.append(r)
        n_attempted += att
        n_failed += failed
    return rows, n_attempted, n_failed


def render_csv(cfg: RunConfig, rows) -> str:
    """Deterministic CSV text with metadata comment lines."""
    out = io.StringIO()
    out.write(f"# cavdd {__version__}\n")
    out.write(f"# config-hash {config_hash(cfg)}\n")
    c = cfg.constants
    out.write(f"# constants c={_fmt(c.c)} mu0={_fmt(c.mu0)} hbar={_fmt(c.hbar)}\n")
    if cfg.geometry is not None:
        g = cfg.geometry
        out.write(f"# geometry Lx={_fmt(g.Lx)} Ly={_fmt(g.Ly)} Lz={_fmt(g.Lz)}\n")
    else:
        out.write("# geometry free-space\n")
    data_cols = list(cfg.output.columns) if cfg.output.columns else list(DATA_COLUMNS)
    cols = ([cfg.sweep.column] if cfg.sweep is not None and rows and
            cfg.sweep.column in rows[0] else []) + data_cols
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(cols)
    classes = set(cfg.output.classes)
    for r in rows:
        if classes and r["class"] not in classes:
            continue
        writer.writerow([r[c] if c in ("class", "status") else _fmt(r.get(c))
                         for c in cols])
    return out.getvalue()


def _write_output(text, out_path):
    if out_path is None or out_path == "-":
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _exit_code_for(n_attempted, n_failed):
    if n_attempted > 0 and n_failed == n_attempted:
        return 3
    return 0


def _cmd_single(args):
    cfg = load_config(args.config)
    rows, n_attempted, n_failed = run_single(cfg)
    _write_output(render_csv(cfg, rows), args.out or cfg.output.csv)
    return _exit_code_for(n_attempted, n_failed)


def _cmd_sweep(args):
    cfg = load_config(args.config)
    workers = args.workers if args.workers else int(os.environ.get(WORKERS_ENV, 0)) or None
    rows, n_attempted, n_failed = run_sweep(cfg, workers=workers)
    _write_output(render_csv(cfg, rows), args.out or cfg.output.csv)
    return _exit_code_for(n_attempted, n_failed)


def _cmd_modes(args):
    cfg = load_config(args.config)
    if cfg.geometry is None:
        raise ConfigError("modes: the config must define a [geometry] section")
    g = cfg.geometry.build()
    kmax = args.kmax if args.kmax is not None else cfg.ewald.mode_cutoff
    if kmax is None:
        raise ConfigError("modes: give --kmax or set ewald.mode_cutoff in the config")
    table = mode_table(g, kmax)
    out = io.StringIO()
    out.write(f"# cavdd {__version__}\n")
    out.write(f"# geometry Lx={_fmt(g.Lx)} Ly={_fmt(g.Ly)} Lz={_fmt(g.Lz)} kmax={_fmt(kmax)}\n")
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["m", "n", "p", "kx", "ky", "kz", "k"])
    for i in range(len(table)):
        writer.writerow([int(table.m[i]), int(table.n[i]), int(table.p[i]),
                         _fmt(table.kvec[i, 0]), _fmt(table.kvec[i, 1]),
                         _fmt(table.kvec[i, 2]), _fmt(table.k[i])])
    _write_output(out.getvalue(), args.out)
    return 0


def _cmd_selftest(args):
    report = run_selftest(seed=args.seed, flip_spectral_sign=args.flip_spectral_sign,
                          kc_scale=args.kc_scale, freeze_truncation=args.freeze_truncation)
    print(report.format())
    return 0 if report.passed else 4


def _cmd_preset(args):
    if args.list:
        for name in sorted(PRESETS):
            print(name)
        return 0
    if args.name is None:
        raise ConfigError("preset: give a preset name or --list")
    cfg = preset_config(args.name)
    if args.show_config:
        text = PRESETS[args.name] if args.raw else serialize_config(cfg)
        sys.stdout.write(text)
        return 0
    workers = args.workers if args.workers else int(os.environ.get(WORKERS_ENV, 0)) or None
    rows, n_attempted, n_failed = run_sweep(cfg, workers=workers)
    _write_output(render_csv(cfg, rows), args.out or cfg.output.csv)
    return _exit_code_for(n_attempted, n_failed)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cavdd",
        description="Magnetic dipole-dipole coupling in free space and in a lossless "
                    "rectangular cavity.")
    parser.add_argument("--version", action="version", version=f"cavdd {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("single", help="evaluate one configuration and emit the term table")
    p.add_argument("--config", required=True, help="TOML run config")
    p.add_argument("--out", help="CSV output path (default: config output.csv or stdout)")
    p.set_defaults(func=_cmd_single)

    p = sub.add_parser("sweep", help="run the sweep defined in the config")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--workers", type=int, default=0,
                   help=f"worker processes (default: ${WORKERS_ENV} or 1)")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("modes", help="dump the cavity mode table for a geometry/cutoff")
    p.add_argument("--config", required=True)
    p.add_argument("--kmax", type=float, help="mode cutoff (default: ewald.mode_cutoff)")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_modes)

    p = sub.add_parser("selftest", help="run the embedded invariant suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--flip-spectral-sign", action="store_true",
                   help="debug: corrupt the spectral sign to demonstrate a failure")
    p.add_argument("--kc-scale", type=float, default=1.0,
                   help="debug: scale the splitting parameter")
    p.add_argument("--freeze-truncation", action="store_true",
                   help="debug: keep truncations selected for the unscaled splitting")
    p.set_defaults(func=_cmd_selftest)

    p = sub.add_parser("preset", help="run (or print) an embedded figure preset")
    p.add_argument("name", nargs="?", help="preset name, e.g. fig2a")
    p.add_argument("--list", action="store_true", help="list available presets")
    p.add_argument("--show-config", action="store_true",
                   help="print the preset config instead of running it")
    p.add_argument("--raw", action="store_true",
                   help="with --show-config: print the annotated original text")
    p.add_argument("--out")
    p.add_argument("--workers", type=int, default=0)
    p.set_defaults(func=_cmd_preset)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except FileNotFoundError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except CavddError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
