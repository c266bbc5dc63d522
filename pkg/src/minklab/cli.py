"""Command line front end.

Body arguments accept either a path to a JSON spec file or the JSON text
itself (anything starting with '{').  Every subcommand prints a table to
standard output and can mirror it to --csv / --json files.
"""

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import bodies as B
from .billiards import (
    FlowConfig,
    PhasePoint,
    flow,
    shortest_closed,
    trajectory_csv_rows,
    trajectory_summary,
)
from .capacities import LagrangianProduct, capacity_sandwich, ehz_lagrangian_product
from .errors import MinklabError
from .experiments import SUITES, run_experiment
from .specs import parse_body_spec
from .volume import mahler_volume, volume


def _load_body(arg: str) -> B.ConvexBody:
    text = arg.strip()
    if not text.startswith("{"):
        with open(arg, "r", encoding="utf-8") as fh:
            text = fh.read()
    return parse_body_spec(text)


def _parse_vec(text: str) -> np.ndarray:
    try:
        return np.array([float(x) for x in text.split(",") if x.strip() != ""])
    except ValueError:
        raise MinklabError(f"cannot parse vector {text!r}; use e.g. --q 0,0") from None


def _fmt_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.12g}"
    if v is None:
        return ""
    return str(v)


def _print_table(columns, rows, stream=None):
    stream = stream or sys.stdout
    text_rows = [[_fmt_cell(v) for v in row] for row in rows]
    widths = [len(c) for c in columns]
    for row in text_rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    header = "  ".join(c.ljust(widths[i]) for i, c in enumerate(columns))
    stream.write(header + "\n")
    stream.write("  ".join("-" * w for w in widths) + "\n")
    for row in text_rows:
        stream.write("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)) + "\n")


def _emit(args, columns, rows, doc):
    _print_table(columns, rows)
    if getattr(args, "csv", None):
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_fmt_cell(v) for v in row])
    if getattr(args, "json", None):
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, default=_json_default)
            fh.write("\n")


def _json_default(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    raise TypeError(f"not JSON serializable: {type(v)}")


def _cmd_body_show(args) -> int:
    body = _load_body(args.spec)
    rows = [
        ["dim", body.dim],
        ["representation", type(body.rep).__name__],
        ["polytope", body.is_polytope],
        ["smooth", body.is_smooth],
        ["centrally_symmetric", body.centrally_symmetric],
        ["euclidean_inradius", B.euclidean_inradius(body)],
    ]
    if body.is_polytope:
        rows.append(["vertices", len(body.vrep.vertices)])
        rows.append(["facets", len(body.hrep.normals)])
    lo, hi = body.bounding_box()
    rows.append(["bbox_lo", " ".join(f"{x:.6g}" for x in lo)])
    rows.append(["bbox_hi", " ".join(f"{x:.6g}" for x in hi)])
    _emit(args, ["property", "value"], rows,
          {key: val for key, val in rows})
    return 0


def _cmd_volume(args) -> int:
    body = _load_body(args.spec)
    if args.mc:
        res = volume(body, method="mc", mc_samples=args.mc, seed=args.seed)
    else:
        res = volume(body, seed=args.seed)
    columns = ["value", "method", "rel_error_bound", "n_samples"]
    rows = [[res.value, res.method, res.rel_error_bound, res.n_samples]]
    _emit(args, columns, rows, dict(zip(columns, rows[0])))
    return 0


def _cmd_mahler(args) -> int:
    body = _load_body(args.spec)
    res = mahler_volume(body)
    columns = ["n", "nu", "vol_body", "vol_polar", "conjectured_min",
               "santalo_max", "slack_min", "slack_max"]
    rows = [[res.dim, res.nu, res.vol_body, res.vol_polar, res.conjectured_min,
             res.santalo_max, res.nu - res.conjectured_min, res.santalo_max - res.nu]]
    _emit(args, columns, rows, dict(zip(columns, rows[0])))
    return 0


_CAP_COLUMNS = ["method", "n", "lower", "value", "upper", "gap_ratio", "witnesses"]


def _cap_rows(est):
    return [[est.method, est.n, est.lower,
             None if est.value is None else est.value, est.upper,
             est.gap_ratio, est.csv_row()[-1]]]


def _cmd_capacity(args) -> int:
    if args.capacity_cmd == "ehz":
        est = ehz_lagrangian_product(
            LagrangianProduct(_load_body(args.specK), _load_body(args.specT))
        )
    else:
        est = capacity_sandwich(_load_body(args.spec))
    rows = _cap_rows(est)
    _emit(args, _CAP_COLUMNS, rows, dict(zip(_CAP_COLUMNS, rows[0])))
    return 0


_TRAJ_SUMMARY_COLS = ["length", "kind", "closed", "bounce_count", "closure_residual"]


def _traj_emit(args, traj, t_body):
    summary = trajectory_summary(traj)
    _print_table(_TRAJ_SUMMARY_COLS, [[summary[c] for c in _TRAJ_SUMMARY_COLS]])
    n = t_body.dim
    columns = (["m", "j"] + [f"q{i}" for i in range(n)]
               + [f"p{i}" for i in range(n)] + ["segment_length"])
    rows = trajectory_csv_rows(traj, t_body)
    _print_table(columns, rows)
    if getattr(args, "csv", None):
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_fmt_cell(v) for v in row])
    if getattr(args, "json", None):
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump({"summary": summary, "rows": rows}, fh, indent=2,
                      default=_json_default)
            fh.write("\n")


def _cmd_billiard(args) -> int:
    k_body = _load_body(args.specK)
    t_body = _load_body(args.specT)
    if args.billiard_cmd == "flow":
        start = PhasePoint(_parse_vec(args.q), _parse_vec(args.p))
        traj = flow(k_body, t_body, start, FlowConfig(max_bounces=args.bounces))
    else:
        traj = shortest_closed(k_body, t_body, m_max=args.mmax,
                               starts=args.starts, seed=args.seed)
    _traj_emit(args, traj, t_body)
    return 0


def _cmd_verify(args) -> int:
    config = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            config = json.load(fh)
    config["suite"] = args.suite
    for key in ("seed", "cells", "points", "starts", "pairs"):
        value = getattr(args, key, None)
        if value is not None:
            config[key] = value
    report = run_experiment(config)
    _print_table(report.columns, report.rows)
    print(f"\nsuite={report.suite} rows={len(report.rows)} "
          f"failures={len(report.failures)} "
          f"config_hash={report.meta['config_hash']} "
          f"wall={report.meta['wall_time_s']:.2f}s")
    if args.csv:
        report.to_csv(args.csv)
    if args.json:
        report.to_json(args.json)
    if report.failures:
        for line in report.failures:
            print(f"FAIL {line}", file=sys.stderr)
        return 1
    return 0


def _add_output_flags(parser):
    parser.add_argument("--csv", help="write the table to a CSV file")
    parser.add_argument("--json", help="write the result to a JSON file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="minklab",
        description="Convex bodies, Minkowski billiards, and symplectic capacities.",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    p_body = sub.add_parser("body", help="inspect bodies")
    body_sub = p_body.add_subparsers(dest="body_cmd", required=True)
    p_show = body_sub.add_parser("show", help="print the basic facts of a body")
    p_show.add_argument("spec", help="spec file path or inline JSON")
    _add_output_flags(p_show)
    p_show.set_defaults(fn=_cmd_body_show)

    p_vol = sub.add_parser("volume", help="volume of a body")
    p_vol.add_argument("spec")
    p_vol.add_argument("--mc", type=int, default=0,
                       help="force Monte Carlo with this many samples")
    p_vol.add_argument("--seed", type=int, default=0)
    _add_output_flags(p_vol)
    p_vol.set_defaults(fn=_cmd_volume)

    p_mah = sub.add_parser("mahler", help="Mahler volume product of a body")
    p_mah.add_argument("spec")
    _add_output_flags(p_mah)
    p_mah.set_defaults(fn=_cmd_mahler)

    p_cap = sub.add_parser("capacity", help="capacity values and brackets")
    cap_sub = p_cap.add_subparsers(dest="capacity_cmd", required=True)
    p_ehz = cap_sub.add_parser("ehz", help="EHZ capacity of a Lagrangian product")
    p_ehz.add_argument("specK")
    p_ehz.add_argument("specT")
    _add_output_flags(p_ehz)
    p_ehz.set_defaults(fn=_cmd_capacity)
    p_sand = cap_sub.add_parser("sandwich", help="ball / cylinder capacity bracket")
    p_sand.add_argument("spec")
    _add_output_flags(p_sand)
    p_sand.set_defaults(fn=_cmd_capacity)

    p_bil = sub.add_parser("billiard", help="billiard trajectories")
    bil_sub = p_bil.add_subparsers(dest="billiard_cmd", required=True)
    p_flow = bil_sub.add_parser("flow", help="integrate the characteristic flow")
    p_flow.add_argument("specK")
    p_flow.add_argument("specT")
    p_flow.add_argument("--q", required=True, help="start position, e.g. 0,0")
    p_flow.add_argument("--p", required=True, help="start momentum on bd(T), e.g. 1,0")
    p_flow.add_argument("--bounces", type=int, default=200)
    _add_output_flags(p_flow)
    p_flow.set_defaults(fn=_cmd_billiard)
    p_short = bil_sub.add_parser("shortest", help="shortest closed trajectory")
    p_short.add_argument("specK")
    p_short.add_argument("specT")
    p_short.add_argument("--mmax", type=int, default=None)
    p_short.add_argument("--starts", type=int, default=32)
    p_short.add_argument("--seed", type=int, default=0)
    _add_output_flags(p_short)
    p_short.set_defaults(fn=_cmd_billiard)

    p_ver = sub.add_parser("verify", help="run an experiment suite")
    p_ver.add_argument("suite", choices=SUITES)
    p_ver.add_argument("--config", help="JSON config file")
    p_ver.add_argument("--seed", type=int, default=None)
    p_ver.add_argument("--cells", type=int, default=None)
    p_ver.add_argument("--points", type=int, default=None)
    p_ver.add_argument("--starts", type=int, default=None)
    p_ver.add_argument("--pairs", type=int, default=None)
    _add_output_flags(p_ver)
    p_ver.set_defaults(fn=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except MinklabError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
