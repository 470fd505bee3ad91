"""Command-line front end: ``sieve-spectra <subcommand> [options]``.

Every option may also come from a flat ``key=value`` file given by --config;
keys are the long option names with dashes or underscores. Flags win over
the file. CSV output uses LF line endings and repr-formatted floats.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Optional, Sequence

import numpy as np

from .arith import shared_cache
from .kernel import build_weight
from .localspec import lowerbound_scan, nystrom_spectrum
from .lsq import SieveParams
from .sequences import SequenceSpec, generate_sequence
from .transform import AccuracyError, TransformConfig, w_hat_star, w_star_series
from .verify import SUITES, BudgetExceeded, reports_to_json, run_suite

BUILTIN = {
    "m": 5,
    "Q": None,
    "N": None,
    "H": None,
    "C": None,
    "E": None,
    "U": None,
    "M": 400,
    "L": 40,
    "seed": 1,
    "output": "-",
    "format": "csv",
    "points": 512,
    "t_min": 1.0,
    "t_max": 2.0,
    "z_min": 1e-4,
    "z_max": 3.0,
    "z_points": 1024,
    "u_min": 0.0,
    "u_max": 3.0,
    "u_points": 601,
    "hat_output": None,
    "tol": 1e-6,
    "series_cap": 20_000_000,
    "tau_over_h": 1.0,
    "suite": "all",
    "budget": None,
    "set": (),
    "q_ratios": "0.5,1,2,5,10,20",
}


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def _table(header: Sequence[str], rows, fmt: str) -> str:
    rows = list(rows)
    if fmt == "json":
        clean = [{h: (float(x) if isinstance(x, np.floating) else x) for h, x in zip(header, r)} for r in rows]
        return json.dumps(clean, indent=1) + "\n"
    return _csv(header, rows)


def _emit(text: str, path: str) -> None:
    if path in ("-", None):
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def read_config_file(path: str) -> dict:
    """Flat key=value lines; '#' starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _seconds(text: str) -> float:
    return float(text.strip().rstrip("s"))


# Parsers for keys whose built-in default does not reveal the type.
PARSERS = {
    "Q": float,
    "N": int,
    "H": float,
    "C": int,
    "E": int,
    "U": float,
    "budget": _seconds,
    "hat_output": str,
    "set": lambda s: tuple(x.strip() for x in s.split(";") if x.strip()),
}


def _typed(key: str, value: str):
    parse = PARSERS.get(key)
    if parse is None:
        default = BUILTIN[key]
        parse = int if isinstance(default, int) else float if isinstance(default, float) else str
    return int(float(value)) if parse is int else parse(value)


def _resolve(args: argparse.Namespace, file_values: dict) -> dict:
    cfg = dict(BUILTIN)
    for key, value in file_values.items():
        if key not in BUILTIN:
            raise ValueError(f"unknown config key {key!r}")
        cfg[key] = _typed(key, value)
    for key, value in vars(args).items():
        if key in BUILTIN and value is not None:
            cfg[key] = value
    cfg["command"] = args.command
    return cfg


def _validate(cfg: dict) -> None:
    if int(cfg["m"]) < 5:
        raise ValueError(f"kernel order m must be >= 5, got {cfg['m']}")
    if cfg["Q"] is not None:
        params = SieveParams(
            Q=cfg["Q"],
            H=cfg["H"] if cfg["H"] is not None else 1.0,
            C=cfg["C"] if cfg["C"] is not None else 1,
            E=cfg["E"] if cfg["E"] is not None else 1,
            U=cfg["U"],
        )
        params.check_split()
    elif any(cfg[k] is not None for k in ("H", "C", "E", "U")):
        raise ValueError("-H, -C, -E and -U need -Q")


def cmd_kernel_table(cfg: dict) -> int:
    k = build_weight(int(cfg["m"]))
    t = np.linspace(cfg["t_min"], cfg["t_max"], int(cfg["points"]))
    _emit(_table(["t", "W"], zip(t, k(t)), cfg["format"]), cfg["output"])
    return 0


def cmd_transform_table(cfg: dict) -> int:
    k = build_weight(int(cfg["m"]))
    tc = TransformConfig(quad_tol=cfg["tol"], series_cap=int(cfg["series_cap"]))
    rows = []
    for z in np.linspace(cfg["z_min"], cfg["z_max"], int(cfg["z_points"])):
        value, bound = w_star_series(k, tc, float(z))
        rows.append((z, value, bound))
    _emit(_table(["z", "w_star", "err_bound"], rows, cfg["format"]), cfg["output"])
    u = np.linspace(cfg["u_min"], cfg["u_max"], int(cfg["u_points"]))
    cache = shared_cache(10**5)
    hat = w_hat_star(k, cache, u) if u.size else np.zeros(0)
    hat_path = cfg["hat_output"]
    if hat_path is None and cfg["output"] not in ("-", None):
        base = cfg["output"][:-4] if cfg["output"].endswith(".csv") else cfg["output"]
        hat_path = base + "_hat.csv"
    _emit(_table(["u", "w_hat_star"], zip(u, hat), cfg["format"]), hat_path or "-")
    at0, at1 = w_hat_star(k, cache, np.array([0.0, 1.0]))
    print(f"check w_hat_star(1) - w_hat_star(0) = {float(at1 - at0)!r}", file=sys.stderr)
    return 0


def cmd_spectrum(cfg: dict) -> int:
    k = build_weight(int(cfg["m"]))
    M, L = int(cfg["M"]), int(cfg["L"])
    ratio = float(cfg["tau_over_h"])
    spectrum = nystrom_spectrum(k, TransformConfig(quad_tol=1e-8), ratio, 1, M, L)
    order = spectrum.all_eigenvalues
    partial = np.cumsum(order)
    rows = [(i, lam, lam * math.sqrt(i), lam * i, partial[i - 1]) for i, lam in enumerate(spectrum.eigenvalues, 1)]
    rows.append(("total", "", "", "", float(partial[-1])))
    _emit(_table(["ell", "lambda", "lambda_sqrt_ell", "lambda_ell", "partial_sum"], rows, cfg["format"]), cfg["output"])
    return 0


def _verify_config(cfg: dict) -> dict:
    out = {"m": cfg["m"], "M": cfg["M"], "seed": cfg["seed"]}
    if cfg["budget"] is not None:
        out["budget"] = cfg["budget"]
    for item in cfg["set"] or ():
        key, _, value = item.partition("=")
        out[key.strip()] = value.strip()
    return out


def cmd_verify(cfg: dict) -> int:
    reports = run_suite(cfg["suite"], _verify_config(cfg))
    _emit(reports_to_json(reports), cfg["output"])
    failed = [r.check_id for r in reports if not r.pass_]
    if failed:
        print(f"{len(failed)} of {len(reports)} checks failed: {', '.join(sorted(set(failed)))}", file=sys.stderr)
        return 1
    return 0


def cmd_lowerbound_scan(cfg: dict) -> int:
    k = build_weight(int(cfg["m"]))
    N = int(cfg["N"] or 200)
    seed = int(cfg["seed"])
    ratios = [float(x) for x in str(cfg["q_ratios"]).split(",") if x.strip()]
    Qs = [cfg["Q"]] if cfg["Q"] is not None else [r * N for r in ratios]
    seqs = [
        ("random_signs", generate_sequence(SequenceSpec("random_signs", N, seed))),
        ("random_complex", generate_sequence(SequenceSpec("random_complex", N, seed))),
        ("progression", generate_sequence(SequenceSpec("progression", N, extra={"modulus": 6, "residue": 1}))),
        ("eigen_pullback", generate_sequence(SequenceSpec("eigen_pullback", N, extra={"tau_over_h": 1.0, "h": 2}))),
    ]
    rows, fits = lowerbound_scan(k, shared_cache(10**5), N, Qs, seqs)
    columns = ["sequence", "N", "Q", "N_over_Q", "ratio"]
    _emit(_table(columns, ([r[c] for c in columns] for r in rows), cfg["format"]), cfg["output"])
    for name, slope in fits.items():
        print(f"fit {name}: d log(ratio) / d(N/Q) = {float(slope)!r}", file=sys.stderr)
    return 0


COMMANDS = {
    "kernel-table": cmd_kernel_table,
    "transform-table": cmd_transform_table,
    "spectrum": cmd_spectrum,
    "verify": cmd_verify,
    "lowerbound-scan": cmd_lowerbound_scan,
}


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value file; flags override it")
    p.add_argument("-m", "--order", dest="m", type=int, help="kernel order (>= 5, default 5)")
    p.add_argument("-Q", "--moduli", dest="Q", type=float, help="modulus scale Q")
    p.add_argument("-N", "--length", dest="N", type=int, help="sequence length N")
    p.add_argument("-H", "--h-cut", dest="H", type=float, help="cut-off H for the h-sum")
    p.add_argument("-C", "--c-cut", dest="C", type=int, help="Moebius truncation C")
    p.add_argument("-E", "--e-cut", dest="E", type=int, help="split point E")
    p.add_argument("-U", "--u-cut", dest="U", type=float, help="frequency cut-off U")
    p.add_argument("-M", "--grid", dest="M", type=int, help="Nystrom grid size (default 400)")
    p.add_argument("-L", "--count", dest="L", type=int, help="number of eigenpairs (default 40)")
    p.add_argument("--seed", type=int)
    p.add_argument("-o", "--output", help="output path, '-' for stdout")
    p.add_argument("--format", choices=["csv", "json"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sieve-spectra", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kernel-table", help="(t, W(m; t)) on [t-min, t-max]")
    _common(p)
    p.add_argument("--points", type=int)
    p.add_argument("--t-min", type=float)
    p.add_argument("--t-max", type=float)

    p = sub.add_parser("transform-table", help="(z, W*, err_bound) and (u, W-hat-star) tables")
    _common(p)
    for name, kind in (("z-min", float), ("z-max", float), ("z-points", int)):
        p.add_argument(f"--{name}", type=kind)
    for name, kind in (("u-min", float), ("u-max", float), ("u-points", int)):
        p.add_argument(f"--{name}", type=kind)
    p.add_argument("--hat-output", help="path of the (u, W-hat-star) table")
    p.add_argument("--tol", type=float, help="series truncation tolerance")
    p.add_argument("--series-cap", type=int)

    p = sub.add_parser("spectrum", help="eigenvalues of the difference operator")
    _common(p)
    p.add_argument("--tau-over-h", type=float)

    p = sub.add_parser("verify", help="run verification suites, JSON report")
    _common(p)
    p.add_argument("--suite", choices=sorted(SUITES) + ["all"])
    p.add_argument("--budget", type=_seconds, help="per-check time budget, e.g. 600s")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a suite parameter")

    p = sub.add_parser("lowerbound-scan", help="raw form ratios against N/Q")
    _common(p)
    p.add_argument("--q-ratios", help="comma-separated Q/N values")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        file_values = read_config_file(args.config) if args.config else {}
        cfg = _resolve(args, file_values)
        if cfg["suite"] not in list(SUITES) + ["all"]:
            parser.error(f"unknown suite {cfg['suite']!r}")
        _validate(cfg)
        return COMMANDS[args.command](cfg)
    except (ValueError, AccuracyError, BudgetExceeded, OSError) as exc:
        print(f"sieve-spectra: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
