"""Command-line entry point: ``opennet <command> NETWORK [options]``.

NETWORK is an edge-list path or ``fixture:NAME`` for a bundled network
(whose roles file is then used unless ``--roles`` is given).  JSON goes to
stdout or ``--out``; CSV to ``--csv``.  Exit codes: 0 success, 1 invalid
input, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from opennet import __version__
from opennet.dag import dag_dc_entry, dominant_paths
from opennet.errors import OpenNetError, ValidationError
from opennet.fixtures import fixture_path
from opennet.frequency import asymptotic_prediction, bode_sweep, dc_gain
from opennet.gramian import controllability_gramian, gramian_spectrum, h2_norm
from opennet.io import csv_text, dumps, parse_edge_list, parse_roles
from opennet.network import (
    UNREACHABLE,
    NetworkSpec,
    ShiftPolicy,
    build_system,
    detect_dag,
    structural_report,
)
from opennet.selection import input_contributions, output_contributions, top_k
from opennet.simulation import simulate
from opennet.stats import empirical_test


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _positive(kind):
    def conv(text):
        value = kind(text)
        if value <= 0:
            raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
        return value

    return conv


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("network", help="edge-list file or fixture:NAME")
    common.add_argument("--roles", help='JSON file {"inputs": [...], "outputs": [...]}')
    common.add_argument(
        "--margin", type=_positive(float), default=1.0,
        help="place the spectral abscissa at -MARGIN (default 1)",
    )
    common.add_argument("--out", help="write JSON here instead of stdout")

    parser = _Parser(prog="opennet", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"opennet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("h2", parents=[common], help="H2-norm and per-pair contributions")
    sub.add_parser("gramian", parents=[common], help="controllability Gramian summary")
    sub.add_parser("structure", parents=[common], help="Henrici index, DAG flag, hop counts")

    p = sub.add_parser("bode", parents=[common], help="Bode sweep of one pair")
    p.add_argument("--pair", nargs=2, metavar=("IN", "OUT"), required=True)
    p.add_argument("--omega-min", type=_positive(float))
    p.add_argument("--omega-max", type=_positive(float))
    p.add_argument("--points", type=int, default=400)
    p.add_argument("--csv", help="write omega,mag_db,phase_deg rows here")

    p = sub.add_parser("dcgain", parents=[common], help="DC gain of one pair")
    p.add_argument("--pair", nargs=2, metavar=("IN", "OUT"), required=True)
    p.add_argument("--paths", action="store_true", help="per-path terms (DAG only)")
    p.add_argument("--top", type=int, default=None, help="keep the K largest path terms")

    p = sub.add_parser("rank", parents=[common], help="optimal k input or output nodes")
    p.add_argument("--side", choices=("input", "output"), default="input")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--direction", choices=("max", "min"), default="max")

    p = sub.add_parser("sample", parents=[common], help="Monte-Carlo passing/blocking test")
    p.add_argument("--m", type=int, help="subset size (default: size of the real input set)")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--real-inputs", help="roles JSON whose inputs are the empirical choice")
    p.add_argument("--z-threshold", type=_positive(float), default=2.0)
    p.add_argument("--p-threshold", type=_positive(float), default=0.05)
    p.add_argument("--csv", help="write the sampled values here")

    p = sub.add_parser("simulate", parents=[common], help="time-domain trajectory as CSV")
    p.add_argument("--kind", choices=("impulse", "sin"), default="impulse")
    p.add_argument("--omega", type=_positive(float))
    p.add_argument("--horizon", type=_positive(float))
    p.add_argument("--step", type=_positive(float))
    p.add_argument("--column", type=int, default=0, help="input column driven")
    p.add_argument("--csv", help="write time,outputs... rows here (default stdout)")
    return parser


def load_network(args) -> NetworkSpec:
    if args.network.startswith("fixture:"):
        name = args.network.split(":", 1)[1]
        spec = parse_edge_list(fixture_path(name))
        roles = args.roles or fixture_path(name, ".roles.json")
    else:
        if not Path(args.network).is_file():
            raise ValidationError(f"network file {args.network!r} not found")
        spec = parse_edge_list(args.network)
        roles = args.roles
    if roles is not None:
        if not Path(roles).is_file():
            raise ValidationError(f"roles file {roles!r} not found")
        spec = spec.with_roles(*parse_roles(roles, spec))
    return spec


def _labels(spec, nodes):
    return [spec.node_ids[v] for v in nodes]


def _pair(spec, pair):
    return spec.index(pair[0]), spec.index(pair[1])


def _cmd_h2(args, spec, sys_):
    rep = h2_norm(sys_)
    return {
        "h2_squared": rep.h2_squared,
        "h2": rep.h2,
        "inputs": _labels(spec, spec.input_set),
        "outputs": _labels(spec, spec.output_set),
        "per_pair": rep.per_pair,
    }


def _cmd_gramian(args, spec, sys_):
    g = controllability_gramian(sys_)
    spectrum = gramian_spectrum(g)
    return {
        "trace": g.trace,
        "lambda_max": spectrum[0],
        "spectrum": spectrum,
        "residual_norm": g.residual_norm,
        "shift_c": sys_.shift_c,
        "spectral_abscissa": sys_.spectral_abscissa,
    }


def _cmd_structure(args, spec, sys_):
    rep = structural_report(spec)
    paths = np.where(rep.shortest_paths == UNREACHABLE, None, rep.shortest_paths).tolist()
    out = {
        "is_dag": rep.is_dag,
        "topological_order": _labels(spec, rep.topological_order) if rep.is_dag else None,
        "henrici_index": rep.henrici_index,
        "inputs": _labels(spec, spec.input_set),
        "outputs": _labels(spec, spec.output_set),
        "shortest_paths": paths,
    }
    if rep.shortest_paths.shape == (1, 1):
        out["shortest_path"] = paths[0][0]
    return out


def _cmd_bode(args, spec, sys_):
    pair = _pair(spec, args.pair)
    sweep = bode_sweep(sys_, pair, args.omega_min, args.omega_max, args.points)
    if args.csv:
        rows = zip(sweep.omegas, sweep.magnitude_db, sweep.phase_deg)
        Path(args.csv).write_text(csv_text(("omega", "mag_db", "phase_deg"), rows))
    out = {
        "pair": list(args.pair),
        "dc_gain_db": sweep.dc_gain_db,
        "cornering_omega": sweep.cornering_omega,
        "half_power_omega": sweep.half_power_omega,
        "final_phase_deg": sweep.phase_deg[-1],
        "warnings": list(sweep.warnings),
        "prediction": None,
    }
    try:
        pred = asymptotic_prediction(sys_, spec, pair, sweep)
    except ValidationError as exc:
        out["prediction_refused"] = str(exc)
    else:
        out["prediction"] = {
            "d": pred.d,
            "predicted_slope_db_per_decade": pred.predicted_slope_db_per_decade,
            "measured_slope_db_per_decade": pred.measured_slope,
            "predicted_final_phase_deg": pred.predicted_final_phase_deg,
            "measured_final_phase_deg": pred.measured_final_phase,
            "passed": pred.passed,
        }
    return out


def _cmd_dcgain(args, spec, sys_):
    pair = _pair(spec, args.pair)
    g = dc_gain(sys_, pair)
    out = {"pair": list(args.pair), "gain_db": g.gain_db, "phase_deg": g.phase_deg, "inverse_entry": g.value}
    if args.paths:
        if not detect_dag(spec)[0]:
            raise ValidationError("--paths requires an acyclic network (self-loops excluded)")
        value, terms = dag_dc_entry(sys_, pair)
        if args.top is not None:
            terms = dominant_paths(terms, args.top)
        out["path_sum"] = value
        out["paths"] = [{"path": _labels(spec, t.path), "term": t.term_value} for t in terms]
    return out


def _cmd_rank(args, spec, sys_):
    contrib = (input_contributions if args.side == "input" else output_contributions)(sys_)
    chosen = top_k(contrib, args.k, args.direction)
    total = float(contrib.values.sum())
    rows, running = [], 0.0
    for v in chosen:
        running += float(contrib.values[v])
        rows.append({
            "node": spec.node_ids[v],
            "contribution": contrib.values[v],
            "cumulative_share": running / total if total > 0 else None,
        })
    fixed = _labels(spec, contrib.fixed_set)
    return {"side": args.side, "direction": args.direction, "fixed_set": fixed, "ranking": rows}


def _cmd_sample(args, spec, sys_):
    if args.real_inputs:
        real, _ = parse_roles(args.real_inputs, spec)
    else:
        real = spec.input_set
    m = len(real) if args.m is None else args.m
    if m != len(real):
        raise ValidationError(f"--m {m} differs from the {len(real)} real input nodes")
    stats = empirical_test(
        sys_, real, args.samples, args.seed,
        z_threshold=args.z_threshold, p_threshold=args.p_threshold,
    )
    if args.csv:
        Path(args.csv).write_text(csv_text(("trace",), ((v,) for v in stats.sample_values)))
    return {
        "real_inputs": _labels(spec, real),
        "m": m,
        "x_real": stats.x_real,
        "mean": stats.mean,
        "std": stats.std,
        "z_score": stats.z_score,
        "p_value_mod": stats.p_value_mod,
        "p_value_two_sided": stats.p_value_two_sided,
        "classification": stats.classification,
        "seed": stats.seed,
        "n_samples": stats.n_samples,
    }


def _cmd_simulate(args, spec, sys_):
    kind = "sinusoid" if args.kind == "sin" else "impulse"
    traj = simulate(sys_, kind, args.horizon, args.step, omega=args.omega, column=args.column)
    header = ["time"] + [f"y_{label}" for label in _labels(spec, spec.output_set)]
    rows = (np.concatenate(([t], y)).tolist() for t, y in zip(traj.times, traj.outputs))
    text = csv_text(header, rows)
    if args.csv:
        Path(args.csv).write_text(text)
    else:
        sys.stdout.write(text)
    return {"kind": args.kind, "steps": len(traj.times) - 1, "horizon": float(traj.times[-1])}


COMMANDS = {
    "h2": _cmd_h2,
    "gramian": _cmd_gramian,
    "structure": _cmd_structure,
    "bode": _cmd_bode,
    "dcgain": _cmd_dcgain,
    "rank": _cmd_rank,
    "sample": _cmd_sample,
    "simulate": _cmd_simulate,
}


def _config_echo(args):
    skip = {"out", "csv"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = load_network(args)
        sys_ = build_system(spec, ShiftPolicy(args.margin))
        result = COMMANDS[args.command](args, spec, sys_)
    except OpenNetError as exc:
        print(f"opennet: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, UnicodeDecodeError) as exc:
        print(f"opennet: {exc}", file=sys.stderr)
        return 1
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"opennet: numerical failure: {exc}", file=sys.stderr)
        return 2
    payload = {"tool": {"name": "opennet", "version": __version__}, "config": _config_echo(args)}
    payload.update(result)
    text = dumps(payload)
    if args.out:
        Path(args.out).write_text(text)
    elif args.command != "simulate":
        sys.stdout.write(text)
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
