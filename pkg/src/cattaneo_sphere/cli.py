"""Command line entry point ``cattaneo-sphere``.

Exit codes: 0 ok, 1 configuration error, 2 run aborted on a physics check,
3 I/O failure, 4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from . import __version__
from .config import ConfigParseError, load_config
from .errors import CattaneoError, ConfigurationError

EXIT_OK, EXIT_CONFIG, EXIT_PHYSICS, EXIT_IO, EXIT_VERIFY = 0, 1, 2, 3, 4


def _outdir(cfg, override):
    path = override or cfg["output.dir"]
    os.makedirs(path, exist_ok=True)
    if not os.access(path, os.W_OK):
        raise PermissionError(f"output directory {path!r} is not writable")
    return path


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _write_member(res, directory, grid):
    from .state import write_snapshots

    os.makedirs(directory, exist_ok=True)
    _write(os.path.join(directory, "diagnostics.csv"), res.sink.to_csv())
    _write(os.path.join(directory, "report.txt"), res.report.summary() + "\n")
    if res.sink.keep_states:
        write_snapshots(os.path.join(directory, "snapshots.ndjson"), res.sink.states, grid)


def cmd_simulate(cfg, out):
    from .experiments import simulate

    res = simulate(cfg)
    _write_member(res, out, cfg.grid())
    print(res.report.summary())
    if not res.ok:
        print(f"error: {res.error}", file=sys.stderr)
        return EXIT_PHYSICS
    return EXIT_OK


def _sweep_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        if rows:
            w = csv.writer(fh, lineterminator="\n")
            keys = list(rows[0])
            w.writerow(keys)
            for row in rows:
                w.writerow([format(row[k], ".17g") for k in keys])


def _finish_sweep(res, out, grid, label):
    for m in res.members + [res.reference]:
        safe = m.label.replace("=", "_").replace(",", "_")
        _write_member(m, os.path.join(out, safe), grid)
    _sweep_csv(os.path.join(out, f"sweep_{label}.csv"), res.header, res.rows)
    summary = {
        "parameters": res.parameters,
        "dt": res.dt,
        "final": res.final,
        "rate_fit": {k: {"exponent": v[0], "r2": v[1]} for k, v in res.fits.items()},
        "failed": [m.label for m in res.members + [res.reference] if not m.ok],
    }
    _write(os.path.join(out, f"sweep_{label}_summary.json"), json.dumps(summary, indent=2) + "\n")
    for line in res.header:
        print(line)
    for k, vals in res.final.items():
        print(f"{k} at t_end: " + ", ".join(f"{v:.6g}" for v in vals))
    for k, (e, r2) in res.fits.items():
        print(f"rate_fit {k}: exponent {e:.4f} (r2 {r2:.4f})")
    return EXIT_OK if res.ok else EXIT_PHYSICS


def cmd_sweep_tau(cfg, out):
    from .experiments import sweep_tau

    if cfg.variant.name != "RELAXED":
        raise ConfigurationError("sweep-tau needs variant = RELAXED")
    return _finish_sweep(sweep_tau(cfg), out, cfg.grid(), "tau")


def cmd_sweep_viscosity(cfg, out):
    from .experiments import sweep_viscosity

    if cfg.variant.name != "RELAXED":
        raise ConfigurationError("sweep-viscosity needs variant = RELAXED")
    return _finish_sweep(sweep_viscosity(cfg), out, cfg.grid(), "viscosity")


def cmd_mms(cfg, out):
    from .experiments import mms_study

    res = mms_study(cfg)
    rows = ["n," + ",".join(f"err_{k}" for k in res.fields)]
    for i, n in enumerate(res.refinements):
        rows.append(f"{n}," + ",".join(format(res.errors[k][i], ".17g") for k in res.fields))
    _write(os.path.join(out, "mms.csv"), "\n".join(rows) + "\n")
    for i, n in enumerate(res.refinements):
        print(f"n={n}: " + ", ".join(f"{k} {res.errors[k][i]:.4e}" for k in res.fields))
    for k in res.fields:
        if res.orders[k]:
            print(f"order {k}: " + ", ".join(f"{o:.3f}" for o in res.orders[k]))
    if not res.passed:
        print(f"verification failed: observed order below {res.min_order}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_check_boundary(cfg, out):
    from .boundary import wall_report

    params = cfg.params()
    if cfg.variant.name == "NSF" or params.tau <= 0:
        raise ConfigurationError("check-boundary needs a heat-flux variant with tau > 0")
    state = cfg.initial_state(cfg.grid(), params)
    report = wall_report(state, params)
    text = json.dumps(report, indent=2)
    print(text)
    _write(os.path.join(out, "boundary.json"), text + "\n")
    ok = all(w["noncharacteristic"] and w["maximal"] for w in report.values())
    return EXIT_OK if ok else EXIT_VERIFY


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep-tau": cmd_sweep_tau,
    "sweep-viscosity": cmd_sweep_viscosity,
    "mms": cmd_mms,
    "check-boundary": cmd_check_boundary,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="cattaneo-sphere", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="flat key = value configuration file")
    ap.add_argument("--out", default=None, help="output directory (overrides output.dir)")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigParseError as exc:
        for err in exc.errors:
            print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        out = _outdir(cfg, args.out)
        return COMMANDS[args.command](cfg, out)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except CattaneoError as exc:
        print(f"run aborted: {exc}", file=sys.stderr)
        return EXIT_PHYSICS


if __name__ == "__main__":
    sys.exit(main())
