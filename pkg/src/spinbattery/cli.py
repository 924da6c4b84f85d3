"""Command-line front end.

Subcommands: trace, sweep, scaling, phase, snapshot, oracle-check.
Curves are written as CSV, reports as JSON (or everything as one JSON file
with ``--format json``).  All numeric output uses 17 significant digits in
scientific notation with '.' decimal separator and LF line endings, and a
given configuration always produces byte-identical files, whatever the
worker budget.  Exit codes: 0 success, 2 bad input, 3 analysis failure,
4 oracle mismatch.

Options may also come from a flat key-value config file (``--config``):
one ``name = value`` pair per line, ``#`` comments allowed, names matching
the long options.  Explicit flags override the file; the file overrides
built-in defaults.  Environment variables are never consulted.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .ed import (
    DimerizedXY,
    TransverseIsing,
    build_hamiltonian,
    oracle_energy_trace,
)
from .ising import (
    IsingParams,
    ising_asymptotic_energy,
    ising_energy_at_times,
    ising_energy_trace,
    ising_resolution_bound,
)
from .quench import (
    QuenchProtocol,
    asymptotic_energy,
    energy_at_times,
    energy_trace,
    resolution_bound,
)
from .regimes import (
    DT_SAFETY,
    RegimeDetectionError,
    analyze_trace,
    default_recurrence_window,
    ising_recurrence_window,
    linear_fit,
    occupation_snapshot,
    scaling_study,
    sweep_delta0,
    sweep_field,
)
from .xy import classify_phase

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_ANALYSIS = 3
EXIT_ORACLE = 4


# ----------------------------------------------------------------------
# deterministic formatting
# ----------------------------------------------------------------------

def format_float(x: float) -> str:
    """17 significant digits, scientific notation, locale independent."""
    return format(float(x), ".16e")


def deterministic_json(obj) -> str:
    """JSON with sorted keys and floats rendered via :func:`format_float`."""
    if isinstance(obj, dict):
        items = ",".join(
            f"{json.dumps(str(k))}: {deterministic_json(v)}" for k, v in sorted(obj.items())
        )
        return "{" + items + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(deterministic_json(v) for v in obj) + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def _write_text(path: str, text: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _csv_text(header: str, rows) -> str:
    lines = [header]
    lines.extend(",".join(cells) for cells in rows)
    return "\n".join(lines) + "\n"


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


# ----------------------------------------------------------------------
# option plumbing
# ----------------------------------------------------------------------

# option name -> (type, help); each command picks a subset with its own defaults.
_OPTIONS = {
    "model": (str, "xy or ising"),
    "out": (str, "output file"),
    "format": (str, "csv (curve + JSON report) or json (single file)"),
    "workers": (int, "parallel worker budget for sweep/scaling rows"),
    "evaluator": (str, "full quadruple sum or band-diagonal simplified form"),
    "gamma": (float, "anisotropy"),
    "delta0": (float, "battery dimerization"),
    "delta1": (float, "dimerization step applied while charging"),
    "n_dimers": (int, "number of two-site cells"),
    "h0": (float, "battery transverse field"),
    "h1": (float, "field step applied while charging"),
    "n_sites": (int, "number of spins"),
    "t_end": (float, "trace end time, 1/J units (default: recurrence window end)"),
    "dt": (float, "trace step (default: half the anti-aliasing bound)"),
    "window_min": (float, "recurrence search window start (default: model specific)"),
    "window_max": (float, "recurrence search window end (default: model specific)"),
    "t_short": (float, "span searched for the first maximum"),
    "time": (float, "snapshot time, 1/J units"),
    "param_min": (float, "swept parameter start"),
    "param_max": (float, "swept parameter end"),
    "param_step": (float, "swept parameter step"),
    "n_list": (str, "comma-separated system sizes"),
    "tol": (float, "acceptance tolerance on the max deviation"),
}

_OPTION_TYPES = {name: spec[0] for name, spec in _OPTIONS.items()}

_COMMON = ("model", "out", "format", "workers", "evaluator")


def _add_options(parser: argparse.ArgumentParser, names, defaults: dict) -> None:
    parser.add_argument("--config", type=str, default=None, help="flat key=value config file")
    for name in names:
        flag = "--" + name.replace("_", "-")
        kind, text = _OPTIONS[name]
        if name in defaults:
            text = f"{text} (default: {defaults[name]})"
        parser.add_argument(flag, type=kind, default=None, dest=name, help=text)


def _read_config(path: str) -> dict:
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'name = value'")
            key, _, val = line.partition("=")
            values[key.strip().replace("-", "_")] = val.strip()
    return values


def _resolve(ns: argparse.Namespace, names, defaults: dict) -> dict:
    """Merge precedence: explicit flag > config file > per-command default."""
    config = _read_config(ns.config) if ns.config else {}
    unknown = set(config) - set(names)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
    opts = {}
    for name in names:
        value = getattr(ns, name)
        if value is None and name in config:
            value = _OPTION_TYPES[name](config[name])
        if value is None:
            value = defaults.get(name)
        opts[name] = value
    return opts


def _check_choice(opts: dict, name: str, allowed) -> None:
    if opts[name] not in allowed:
        raise ValueError(f"{name} must be one of {sorted(allowed)}, got {opts[name]!r}")


def _sidecar_path(out: str) -> str:
    base, _ = os.path.splitext(out)
    return base + ".report.json"


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------

_TRACE_OPTS = _COMMON + (
    "gamma", "delta0", "delta1", "n_dimers",
    "h0", "h1", "n_sites",
    "t_end", "dt", "window_min", "window_max",
)

_TRACE_DEFAULTS = {
    "model": "xy", "format": "csv", "workers": 1, "evaluator": "full",
    "gamma": 1.25, "delta0": 0.3, "delta1": 0.6, "n_dimers": 300,
    "h0": 0.8, "h1": 0.7, "n_sites": 600,
}


def cmd_trace(opts: dict) -> int:
    """Write the stored-energy trace and its three-regime report."""
    _check_choice(opts, "model", {"xy", "ising"})
    _check_choice(opts, "format", {"csv", "json"})
    _check_choice(opts, "evaluator", {"full", "simplified"})
    out = opts["out"] or ("trace.csv" if opts["format"] == "csv" else "trace.json")

    if opts["model"] == "xy":
        protocol = QuenchProtocol(
            opts["gamma"], opts["delta0"], opts["delta1"], opts["n_dimers"]
        )
        window_default = default_recurrence_window(protocol.n_dimers)
        bound = resolution_bound(protocol)
        charged = protocol.delta1 > 0
        params_doc = {
            "model": "xy", "gamma": protocol.gamma, "delta0": protocol.delta0,
            "delta1": protocol.delta1, "n_dimers": protocol.n_dimers,
        }
    else:
        protocol = IsingParams(opts["h0"], opts["h1"], opts["n_sites"])
        window_default = ising_recurrence_window(protocol.n_sites)
        bound = ising_resolution_bound(protocol)
        charged = protocol.h1 != 0
        params_doc = {
            "model": "ising", "h0": protocol.h0, "h1": protocol.h1,
            "n_sites": protocol.n_sites,
        }

    window = (
        window_default[0] if opts["window_min"] is None else opts["window_min"],
        window_default[1] if opts["window_max"] is None else opts["window_max"],
    )
    if not window[0] < window[1]:
        raise ValueError(f"recurrence window {window} is empty")
    t_end = opts["t_end"] if opts["t_end"] is not None else window[1]
    dt = opts["dt"] if opts["dt"] is not None else DT_SAFETY * bound

    if opts["model"] == "xy":
        trace = energy_trace(protocol, t_end, dt, opts["evaluator"])
        e_inf = asymptotic_energy(protocol)
    else:
        trace = ising_energy_trace(protocol, t_end, dt)
        e_inf = ising_asymptotic_energy(protocol)

    params_doc.update({"t_end": t_end, "dt": dt, "evaluator": opts["evaluator"]})

    try:
        report = analyze_trace(trace, e_inf, window)
    except RegimeDetectionError as exc:
        _write_trace_output(out, opts["format"], trace, None, params_doc)
        message = "no charging occurred" if not charged else str(exc)
        return _fail(message, EXIT_ANALYSIS)

    _write_trace_output(out, opts["format"], trace, report, params_doc)
    return EXIT_OK


def _report_doc(report) -> dict:
    return {
        "tau_s": report.tau_s,
        "e_s": report.e_s,
        "e_inf": report.e_inf,
        "tau_r": report.tau_r,
        "e_r": report.e_r,
        "window_r": list(report.window_r),
        "power_s": report.e_s / report.tau_s,
        "power_r": report.e_r / report.tau_r,
    }


def _write_trace_output(out, fmt, trace, report, params_doc) -> None:
    report_doc = _report_doc(report) if report is not None else None
    if fmt == "csv":
        rows = (
            (format_float(t), format_float(v))
            for t, v in zip(trace.times, trace.values)
        )
        _write_text(out, _csv_text("t,delta_e", rows))
        if report_doc is not None:
            sidecar = {"params": params_doc, "report": report_doc}
            _write_text(_sidecar_path(out), deterministic_json(sidecar) + "\n")
    else:
        doc = {
            "params": params_doc,
            "trace": {
                "t": [float(t) for t in trace.times],
                "delta_e": [float(v) for v in trace.values],
            },
        }
        if report_doc is not None:
            doc["report"] = report_doc
        _write_text(out, deterministic_json(doc) + "\n")


_SWEEP_OPTS = _COMMON + (
    "gamma", "delta1", "n_dimers",
    "h1", "n_sites",
    "param_min", "param_max", "param_step",
    "t_short", "window_min", "window_max",
)

_SWEEP_DEFAULTS = {
    "model": "xy", "format": "csv", "workers": 1, "evaluator": "full",
    "gamma": 1.1, "delta1": 0.8, "n_dimers": 300,
    "h1": 0.25, "n_sites": 600,
    "param_step": 0.005, "t_short": 50.0,
}


def _make_grid(lo: float, hi: float, step: float) -> list[float]:
    if step <= 0:
        raise ValueError(f"param-step must be positive, got {step}")
    n = int(round((hi - lo) / step))
    grid = [lo + i * step for i in range(n + 1) if lo + i * step <= hi + 1e-12]
    if not grid:
        raise ValueError(f"empty parameter grid [{lo}, {hi}] with step {step}")
    return grid


def cmd_sweep(opts: dict) -> int:
    """Sweep the initial dimerization (or field) and tabulate the regimes."""
    _check_choice(opts, "model", {"xy", "ising"})
    _check_choice(opts, "format", {"csv", "json"})
    _check_choice(opts, "evaluator", {"full", "simplified"})
    if opts["param_min"] is None or opts["param_max"] is None:
        raise ValueError("param-min and param-max are required")
    grid = _make_grid(opts["param_min"], opts["param_max"], opts["param_step"])
    out = opts["out"] or ("sweep.csv" if opts["format"] == "csv" else "sweep.json")
    window = None
    if opts["window_min"] is not None and opts["window_max"] is not None:
        window = (opts["window_min"], opts["window_max"])

    if opts["model"] == "xy":
        rows = sweep_delta0(
            opts["gamma"], opts["delta1"], opts["n_dimers"], grid,
            workers=opts["workers"], t_short=opts["t_short"], window=window,
            evaluator=opts["evaluator"],
        )
        params_doc = {
            "model": "xy", "gamma": opts["gamma"], "delta1": opts["delta1"],
            "n_dimers": opts["n_dimers"],
        }
    else:
        rows = sweep_field(
            opts["h1"], opts["n_sites"], grid,
            workers=opts["workers"], t_short=opts["t_short"], window=window,
        )
        params_doc = {"model": "ising", "h1": opts["h1"], "n_sites": opts["n_sites"]}

    if opts["format"] == "csv":
        text = _csv_text(
            "param,e_s_per,e_r_per,e_inf_per,tau_s,tau_r",
            (
                tuple(
                    format_float(v)
                    for v in (r.param, r.e_s_per, r.e_r_per, r.e_inf_per, r.tau_s, r.tau_r)
                )
                for r in rows
            ),
        )
        _write_text(out, text)
    else:
        doc = {
            "params": params_doc,
            "rows": [
                {
                    "param": r.param, "e_s_per": r.e_s_per, "e_r_per": r.e_r_per,
                    "e_inf_per": r.e_inf_per, "tau_s": r.tau_s, "tau_r": r.tau_r,
                }
                for r in rows
            ],
        }
        _write_text(out, deterministic_json(doc) + "\n")
    return EXIT_OK


_SCALING_OPTS = _COMMON + ("gamma", "delta0", "delta1", "n_list", "t_short")

_SCALING_DEFAULTS = {
    "model": "xy", "format": "csv", "workers": 1, "evaluator": "full",
    "gamma": 1.25, "delta0": 0.3, "delta1": 0.6,
    "n_list": "50,100,200,300", "t_short": 50.0,
}


def cmd_scaling(opts: dict) -> int:
    """Per-dimer energies and recurrence time across system sizes."""
    _check_choice(opts, "model", {"xy"})
    _check_choice(opts, "format", {"csv", "json"})
    _check_choice(opts, "evaluator", {"full", "simplified"})
    sizes = [int(s) for s in opts["n_list"].split(",") if s.strip()]
    if not sizes:
        raise ValueError("n-list is empty")
    rows = scaling_study(
        opts["gamma"], opts["delta0"], opts["delta1"], sizes,
        workers=opts["workers"], t_short=opts["t_short"], evaluator=opts["evaluator"],
    )
    slope, intercept, r2 = linear_fit([r.n_dimers for r in rows], [r.tau_r for r in rows])
    out = opts["out"] or ("scaling.csv" if opts["format"] == "csv" else "scaling.json")
    fit_doc = {"slope": slope, "intercept": intercept, "r_squared": r2}
    if opts["format"] == "csv":
        text = _csv_text(
            "n_dimers,e_s_per,e_r_per,e_inf_per,tau_r",
            (
                (str(r.n_dimers),) + tuple(
                    format_float(v) for v in (r.e_s_per, r.e_r_per, r.e_inf_per, r.tau_r)
                )
                for r in rows
            ),
        )
        _write_text(out, text)
        _write_text(_sidecar_path(out), deterministic_json({"tau_r_fit": fit_doc}) + "\n")
    else:
        doc = {
            "rows": [
                {
                    "n_dimers": r.n_dimers, "e_s_per": r.e_s_per, "e_r_per": r.e_r_per,
                    "e_inf_per": r.e_inf_per, "tau_r": r.tau_r,
                }
                for r in rows
            ],
            "tau_r_fit": fit_doc,
        }
        _write_text(out, deterministic_json(doc) + "\n")
    print(
        f"tau_r linear fit: slope={format_float(slope)} r_squared={format_float(r2)}"
    )
    return EXIT_OK


def cmd_phase(opts: dict) -> int:
    """Classify a (gamma, delta) point of the phase diagram."""
    phase = classify_phase(opts["gamma"], opts["delta"])
    region = phase.region if phase.region is not None else "critical"
    print(f"region={region} {phase.label}")
    return EXIT_OK


_SNAPSHOT_OPTS = _COMMON + ("gamma", "delta0", "delta1", "n_dimers", "time")

_SNAPSHOT_DEFAULTS = {
    "model": "xy", "format": "csv", "workers": 1, "evaluator": "full",
    "gamma": 1.1, "delta0": 0.2, "delta1": 0.8, "n_dimers": 300,
}


def cmd_snapshot(opts: dict) -> int:
    """Lower-band occupation versus momentum at a fixed time."""
    _check_choice(opts, "model", {"xy"})
    _check_choice(opts, "format", {"csv", "json"})
    _check_choice(opts, "evaluator", {"full", "simplified"})
    if opts["time"] is None or opts["time"] < 0:
        raise ValueError("--time must be given and >= 0")
    protocol = QuenchProtocol(
        opts["gamma"], opts["delta0"], opts["delta1"], opts["n_dimers"]
    )
    pairs = occupation_snapshot(protocol, opts["time"], opts["evaluator"])
    out = opts["out"] or ("snapshot.csv" if opts["format"] == "csv" else "snapshot.json")
    if opts["format"] == "csv":
        _write_text(
            out,
            _csv_text("k,n2", ((format_float(k), format_float(n)) for k, n in pairs)),
        )
    else:
        doc = {
            "params": {
                "model": "xy", "gamma": protocol.gamma, "delta0": protocol.delta0,
                "delta1": protocol.delta1, "n_dimers": protocol.n_dimers,
                "time": opts["time"],
            },
            "rows": [{"k": k, "n2": n} for k, n in pairs],
        }
        _write_text(out, deterministic_json(doc) + "\n")
    return EXIT_OK


_ORACLE_OPTS = _COMMON + ("gamma", "delta0", "delta1", "h0", "h1", "n_sites", "t_end", "dt", "tol")

_ORACLE_DEFAULTS = {
    "model": "xy", "format": "csv", "workers": 1, "evaluator": "full",
    "gamma": 1.25, "delta0": 0.3, "delta1": 0.6,
    "h0": 0.8, "h1": 0.7,
    "n_sites": 4, "t_end": 50.0, "dt": 0.1, "tol": 1e-8,
}


def cmd_oracle_check(opts: dict) -> int:
    """Compare the momentum-space engine against dense spin-space ED."""
    _check_choice(opts, "model", {"xy", "ising"})
    _check_choice(opts, "evaluator", {"full", "simplified"})
    n_sites = opts["n_sites"]
    times = opts["dt"] * np.arange(int(np.floor(opts["t_end"] / opts["dt"])) + 1)
    if opts["model"] == "xy":
        if n_sites % 2 != 0:
            raise ValueError("the XY oracle needs an even number of sites")
        protocol = QuenchProtocol(
            opts["gamma"], opts["delta0"], opts["delta1"], n_sites // 2
        )
        engine = energy_at_times(protocol, times, opts["evaluator"])
        battery = build_hamiltonian(DimerizedXY(opts["gamma"], opts["delta0"]), n_sites)
        charger = build_hamiltonian(
            DimerizedXY(opts["gamma"], opts["delta0"] + opts["delta1"]), n_sites
        )
    else:
        params = IsingParams(opts["h0"], opts["h1"], n_sites)
        engine = ising_energy_at_times(params, times)
        battery = build_hamiltonian(TransverseIsing(opts["h0"]), n_sites)
        charger = build_hamiltonian(TransverseIsing(opts["h0"] + opts["h1"]), n_sites)
    oracle = oracle_energy_trace(battery, charger, times)
    deviation = float(np.max(np.abs(engine - oracle.values)))
    print(f"max deviation = {format_float(deviation)} (tolerance {format_float(opts['tol'])})")
    return EXIT_OK if deviation <= opts["tol"] else EXIT_ORACLE


# ----------------------------------------------------------------------
# entry point
# ----------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinbattery",
        description="Stored energy of double-quench spin-chain quantum batteries",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trace", help="energy trace plus regime report")
    _add_options(p, _TRACE_OPTS, _TRACE_DEFAULTS)

    p = sub.add_parser("sweep", help="regime energies across a parameter grid")
    _add_options(p, _SWEEP_OPTS, _SWEEP_DEFAULTS)

    p = sub.add_parser("scaling", help="regime energies across system sizes")
    _add_options(p, _SCALING_OPTS, _SCALING_DEFAULTS)

    p = sub.add_parser("phase", help="classify a point of the phase diagram")
    p.add_argument("gamma", type=float, help="anisotropy, > 0")
    p.add_argument("delta", type=float, help="dimerization, >= 0")

    p = sub.add_parser("snapshot", help="occupation-number profile at a time")
    _add_options(p, _SNAPSHOT_OPTS, _SNAPSHOT_DEFAULTS)

    p = sub.add_parser("oracle-check", help="engine vs exact diagonalization")
    _add_options(p, _ORACLE_OPTS, _ORACLE_DEFAULTS)

    return parser


_DISPATCH = {
    "trace": (cmd_trace, _TRACE_OPTS, _TRACE_DEFAULTS),
    "sweep": (cmd_sweep, _SWEEP_OPTS, _SWEEP_DEFAULTS),
    "scaling": (cmd_scaling, _SCALING_OPTS, _SCALING_DEFAULTS),
    "snapshot": (cmd_snapshot, _SNAPSHOT_OPTS, _SNAPSHOT_DEFAULTS),
    "oracle-check": (cmd_oracle_check, _ORACLE_OPTS, _ORACLE_DEFAULTS),
}


def main(argv=None) -> int:
    parser = _build_parser()
    ns = parser.parse_args(argv)
    try:
        if ns.command == "phase":
            return cmd_phase({"gamma": ns.gamma, "delta": ns.delta})
        func, names, defaults = _DISPATCH[ns.command]
        opts = _resolve(ns, names, defaults)
        if opts.get("workers") is not None and opts["workers"] < 1:
            raise ValueError("workers must be >= 1")
        return func(opts)
    except (ValueError, OSError) as exc:
        return _fail(str(exc), EXIT_BAD_INPUT)
    except RegimeDetectionError as exc:
        return _fail(str(exc), EXIT_ANALYSIS)


if __name__ == "__main__":
    sys.exit(main())
