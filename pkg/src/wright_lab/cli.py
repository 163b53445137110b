"""Command-line entry point: ``wright-lab <command> [flags]``.

Every flag can also come from ``--config run.json`` (keys mirror flag
names without the leading dashes); explicit flags win over file values.
"""

import argparse
import csv
import io
import json
import math
import os
import platform
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import __version__, bounds_rates, summability
from ._accel import backend_name
from .operator_core import (
    OperatorConfig,
    apply_operator,
    central_moment,
    raw_moment_closed_form,
    raw_moment_series,
)
from .special_fn import MAX_TOL, WrightParams, wright_phi

COMMANDS = ("eval-wright", "apply", "moments", "audit", "rate-table", "astat", "voronovskaya")
OPERATOR_COMMANDS = ("apply", "moments", "audit", "rate-table", "voronovskaya")
AUDIT_HEADER = ("claim_id", "n", "beta", "x", "B", "measured", "stated", "margin", "verdict")

SEQUENCES = {
    "squares": lambda k: 1.0 if math.isqrt(k) ** 2 == k else 0.0,
    "reciprocal": lambda k: 1.0 / k,
    "ones": lambda k: 1.0,
    "alternating": lambda k: float((-1) ** k),
}
MATRICES = {"cesaro1": summability.cesaro1, "identity": summability.identity}

_STD = bounds_rates.STANDARD_GRID

# flag -> (kind, built-in default); defaults are applied after file values
_FLAGS = {
    "rho": ("float", 1.0),
    "beta": ("floats", None),
    "z": ("floats", [1.0]),
    "n": ("ints", None),
    "x": ("floats", None),
    "B": ("float", _STD.B),
    "tol": ("float", 1e-12),
    "function": ("strs", None),
    "claims": ("strs", None),
    "order": ("ints", [0, 1, 2, 3, 4]),
    "points": ("int", 41),
    "matrix": ("str", "cesaro1"),
    "sequence": ("str", "squares"),
    "L": ("float", 0.0),
    "eps": ("float", 0.5),
    "j": ("ints", [100, 1000, 10000]),
    "output": ("str", None),
    "format": ("str", None),
}

_COMMAND_DEFAULTS = {
    "eval-wright": {"beta": [1.0]},
    "apply": {"beta": [2.0], "n": [10], "x": [1.0], "function": ["one"]},
    "moments": {"beta": [2.0], "n": [10], "x": [1.0]},
    "audit": {"beta": list(_STD.beta_values), "n": list(_STD.n_values),
              "x": list(_STD.x_points)},
    "rate-table": {"beta": [2.0], "n": [10, 100, 1000], "function": list(bounds_rates.CORPUS)},
    "astat": {},
    "voronovskaya": {"beta": [2.0], "n": list(summability.DEFAULT_N_SCHEDULE),
                     "x": [1.0], "function": ["square"]},
}


class UsageError(ValueError):
    """Bad command line or configuration file."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    output_path: str = ""
    format: str = "csv"


def _split(value):
    if isinstance(value, (list, tuple)):
        return [str(v) for v in value]
    text = str(value)
    if os.path.isfile(text):
        with open(text, encoding="utf-8") as fh:
            lines = [ln.strip() for ln in fh]
        return [ln for ln in lines if ln and not ln.startswith("#")]
    return [p.strip() for p in text.split(",") if p.strip()]


def _convert(name, kind, value):
    try:
        if kind == "float":
            return float(value)
        if kind == "int":
            return int(value)
        if kind == "str":
            return str(value)
        items = _split(value)
        if not items:
            raise ValueError("empty list")
        if kind == "floats":
            return [float(v) for v in items]
        if kind == "ints":
            out = [float(v) for v in items]
            if any(v != int(v) for v in out):
                raise ValueError("expected integers")
            return [int(v) for v in out]
        return items
    except (TypeError, ValueError) as exc:
        raise UsageError(f"--{name}: invalid value {value!r} ({exc})") from None


def _build_parser():
    parser = _Parser(prog="wright-lab", description="Wright operator laboratory",
                     allow_abbrev=False)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for cmd in COMMANDS:
        p = sub.add_parser(cmd, allow_abbrev=False)
        p.add_argument("--config", default=None)
        for name in _FLAGS:
            p.add_argument(f"--{name}", default=None)
    return parser


def _load_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"--config: cannot read {path!r}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("--config: top-level JSON value must be an object")
    unknown = sorted(set(data) - set(_FLAGS))
    if unknown:
        raise UsageError(f"--config: unknown key(s) {', '.join(unknown)}")
    return data


def parse_config(argv):
    """Validated :class:`RunConfig` from an argument list; raises :class:`UsageError`."""
    ns = _build_parser().parse_args(list(argv))
    cmd = ns.command
    file_values = _load_file(ns.config) if ns.config else {}
    params = {}
    for name, (kind, default) in _FLAGS.items():
        raw = getattr(ns, name)
        if raw is None:
            raw = file_values.get(name)
        if raw is None:
            raw = _COMMAND_DEFAULTS[cmd].get(name, default)
        params[name] = None if raw is None else _convert(name, kind, raw)

    tol = params["tol"]
    if not (0 < tol <= MAX_TOL):
        raise UsageError(f"--tol must lie in (0, {MAX_TOL}], got {tol!r}")
    if cmd in OPERATOR_COMMANDS and any(not b > 1 for b in params["beta"]):
        raise UsageError(f"--beta must be > 1 for {cmd}, got {params['beta']}")
    if params["n"] is not None and any(n < 1 for n in params["n"]):
        raise UsageError(f"--n must be positive integers, got {params['n']}")
    if params["x"] is not None and any(not (math.isfinite(x) and x >= 0) for x in params["x"]):
        raise UsageError(f"--x must be finite and >= 0, got {params['x']}")
    for label in params["function"] or ():
        if label not in bounds_rates.CORPUS:
            raise UsageError(f"--function: unknown label {label!r} "
                             f"(choose from {', '.join(bounds_rates.CORPUS)})")
    if params["matrix"] not in MATRICES:
        raise UsageError(f"--matrix must be one of {', '.join(MATRICES)}")
    if params["sequence"] not in SEQUENCES:
        raise UsageError(f"--sequence must be one of {', '.join(SEQUENCES)}")

    output = params.pop("output")
    fmt = params.pop("format")
    if fmt is None:
        fmt = "json" if output and output.endswith(".json") else "csv"
    if fmt not in ("csv", "json"):
        raise UsageError(f"--format must be csv or json, got {fmt!r}")
    if output is None:
        output = f"{cmd}.{fmt}"
    parent = os.path.dirname(os.path.abspath(output))
    if not (os.path.isdir(parent) and os.access(parent, os.W_OK)):
        raise UsageError(f"--output: directory {parent!r} is not writable")
    return RunConfig(cmd, params, output, fmt)


# --------------------------------------------------------------------------
# serialisation
# --------------------------------------------------------------------------

def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


def write_table(path, fmt, header, rows, meta):
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(row.get(h)) for h in header])
        text = buf.getvalue()
    else:
        doc = {"records": _jsonable(rows), "meta": _jsonable(meta)}
        text = json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def write_sidecar(path, config, argv):
    import numba

    meta = {
        "command": config.command,
        "argv": list(argv) if argv is not None else None,
        "run_time_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "versions": {
            "wright_lab": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "numba": numba.__version__,
        },
        "backend": backend_name(),
    }
    with open(path + ".meta.json", "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(meta, sort_keys=True, indent=2) + "\n")


def _audit_rows(records):
    rows = []
    for r in records:
        row = {"claim_id": r.claim_id, "measured": r.measured, "stated": r.stated,
               "margin": r.margin, "verdict": r.verdict}
        row.update({k: r.params.get(k) for k in ("n", "beta", "x", "B")})
        rows.append(row)
    return rows


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def _cmd_eval_wright(p):
    header = ("rho", "beta", "z", "value", "terms_used", "tail_bound", "converged")
    rows = []
    for beta in p["beta"]:
        params = WrightParams(p["rho"], beta)
        for z in p["z"]:
            r = wright_phi(params, z, p["tol"])
            rows.append({"rho": p["rho"], "beta": beta, "z": z, "value": r.value,
                         "terms_used": r.terms_used, "tail_bound": r.tail_bound,
                         "converged": r.converged})
    return header, rows, {}, None


def _cmd_apply(p):
    header = ("function", "n", "beta", "x", "value", "tail_error")
    rows = []
    for label in p["function"]:
        f = bounds_rates.CORPUS[label]
        for beta in p["beta"]:
            for n in p["n"]:
                cfg = OperatorConfig(n, beta, p["tol"])
                for x in p["x"]:
                    v, e = apply_operator(cfg, f, x, with_error=True)
                    rows.append({"function": label, "n": n, "beta": beta, "x": x,
                                 "value": v, "tail_error": e})
    return header, rows, {}, None


def _cmd_moments(p):
    header = ("n", "beta", "x", "order", "raw_closed_form", "raw_series", "central")
    rows = []
    for beta in p["beta"]:
        for n in p["n"]:
            cfg = OperatorConfig(n, beta, p["tol"])
            for x in p["x"]:
                for j in p["order"]:
                    rows.append({
                        "n": n, "beta": beta, "x": x, "order": j,
                        "raw_closed_form": raw_moment_closed_form(cfg, j, x),
                        "raw_series": raw_moment_series(cfg, j, x),
                        "central": central_moment(cfg, j, x) if j >= 1 else None,
                    })
    return header, rows, {}, None


def audit_grid(p):
    return bounds_rates.GridSpec(tuple(p["x"]), tuple(p["n"]), tuple(p["beta"]), p["B"])


def _cmd_audit(p):
    functions = bounds_rates.CORPUS
    if p["function"]:
        functions = {k: bounds_rates.CORPUS[k] for k in p["function"]}
    records = bounds_rates.run_claim_audit(audit_grid(p), p["claims"], p["tol"], functions)
    counts = bounds_rates.summarize(records)
    summary = " ".join(f"{k}={v}" for k, v in counts.items())
    meta = {"counts": counts, "records": len(records)}
    json_rows = [{"claim_id": r.claim_id, "params": r.params, "measured": r.measured,
                  "stated": r.stated, "margin": r.margin, "verdict": r.verdict,
                  "slack": r.slack} for r in records]
    return AUDIT_HEADER, _audit_rows(records), meta, (f"audit: {len(records)} records, {summary}",
                                                      json_rows)


def _cmd_rate_table(p):
    header = ("function", "n", "beta", "B", "delta_n", "sup_error", "bound", "argmax_x")
    rows = []
    B = p["B"]
    for label in p["function"]:
        f = bounds_rates.CORPUS[label]
        for beta in p["beta"]:
            for n in p["n"]:
                cfg = OperatorConfig(n, beta, p["tol"])
                err, where, _ = bounds_rates.sup_error(f, cfg, B, p["points"], with_location=True)
                rows.append({"function": label, "n": n, "beta": beta, "B": B,
                             "delta_n": bounds_rates.theorem1_delta(beta, n, B),
                             "sup_error": err, "bound": bounds_rates.theorem1_bound(f, cfg, B),
                             "argmax_x": where})
    return header, rows, {}, None


def _cmd_astat(p):
    A = MATRICES[p["matrix"]]()
    s = summability.SequenceSpec(p["sequence"], SEQUENCES[p["sequence"]])
    rep = summability.astat_limit_estimate(A, s, p["L"], p["eps"], p["j"])
    header = ("matrix", "sequence", "L", "eps", "j", "density")
    rows = [{"matrix": p["matrix"], "sequence": p["sequence"], "L": p["L"], "eps": p["eps"],
             "j": j, "density": d} for j, d in rep.densities]
    meta = {"verdict": rep.verdict, "threshold": rep.threshold, "window": rep.window}
    return header, rows, meta, (f"astat: {p['matrix']} / {p['sequence']}: {rep.verdict}", None)


def _cmd_voronovskaya(p):
    header = ("kind", "function", "n", "beta", "x", "measured", "claimed_rhs",
              "claimed_constant", "trend")
    rows, lines = [], []
    for label in p["function"]:
        f = bounds_rates.CORPUS[label]
        for beta in p["beta"]:
            t = summability.voronovskaya_experiment(f, beta, p["x"], p["n"], p["tol"])
            for r in t.rows:
                rows.append({"kind": "row", "function": label, "n": r.n, "beta": beta, "x": r.x,
                             "measured": r.measured, "claimed_rhs": r.claimed,
                             "claimed_constant": t.claimed_constant})
            for x, est in t.estimates.items():
                rhs = t.column(x)[-1].claimed
                rows.append({"kind": "estimate", "function": label, "beta": beta, "x": x,
                             "measured": est.value, "claimed_rhs": rhs,
                             "claimed_constant": t.claimed_constant, "trend": est.trend})
                lines.append(f"voronovskaya: {label} beta={beta!r} x={x!r} "
                             f"estimate={est.value!r} ({est.trend}) "
                             f"claimed_constant={t.claimed_constant!r} claimed_rhs={rhs!r}")
    return header, rows, {}, ("\n".join(lines), None)


_HANDLERS = {
    "eval-wright": _cmd_eval_wright,
    "apply": _cmd_apply,
    "moments": _cmd_moments,
    "audit": _cmd_audit,
    "rate-table": _cmd_rate_table,
    "astat": _cmd_astat,
    "voronovskaya": _cmd_voronovskaya,
}


def execute(config, argv=None, stdout=None):
    """Run ``config``; returns the process exit status."""
    stdout = sys.stdout if stdout is None else stdout
    try:
        header, rows, extra_meta, message = _HANDLERS[config.command](config.params)
    except (ArithmeticError, ValueError) as exc:
        print(f"wright-lab {config.command}: evaluation failed: {exc}", file=sys.stderr)
        return 1
    json_rows = rows
    if message is not None:
        text, alt_rows = message
        if alt_rows is not None:
            json_rows = alt_rows
        if text:
            print(text, file=stdout)
    meta = {"command": config.command, "params": config.params}
    meta.update(extra_meta)
    try:
        write_table(config.output_path, config.format, header,
                    json_rows if config.format == "json" else rows, meta)
        write_sidecar(config.output_path, config, argv)
    except OSError as exc:
        print(f"wright-lab {config.command}: cannot write output: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        config = parse_config(argv)
    except UsageError as exc:
        print(f"wright-lab: usage error: {exc}", file=sys.stderr)
        return 2
    return execute(config, argv)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
