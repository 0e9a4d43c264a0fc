"""Command-line driver: ``edgeloc {generate,graphs,simulate,verify}``.

Exit codes: 0 success, 2 precondition failure, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import analysis
from .errors import AssumptionViolation, NumericalError, PreconditionError
from .estimator import (
    EstimatorConfig,
    EstimatorState,
    anchored_config,
    build_h_matrix,
    error_metrics,
    integrate,
    orientation_estimates,
    simulate,
)
from .geometry import Scenario, load_scenario, save_scenario
from .graphs import (
    BRUTE_FORCE_MAX_EDGES,
    brute_force_in_trees,
    count_in_trees,
    knuth_count,
    line_graph,
    spanning_tree_roots,
)
from .locgraph import Localization, check_assumption2, localize, residual_undesired_connections
from .geometry import synthesize_measurements
from .scenarios import PRESETS, preset, random_scenario

log = logging.getLogger("edgeloc")


def _num(x: float) -> float:
    """Round to 9 significant digits for output."""
    return float(f"{float(x):.9g}")


def _fmt(x: float) -> str:
    return f"{float(x):.9g}"


def _edge(e) -> str:
    return f"{e[0]},{e[1]}"


def _write_json(path: Path, doc: Any) -> None:
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def _load(args: argparse.Namespace) -> Scenario:
    if args.scenario and args.preset:
        raise PreconditionError("give either --scenario or --preset, not both")
    if args.scenario:
        return load_scenario(args.scenario)
    if args.preset:
        return preset(args.preset)
    raise PreconditionError("a scenario is required (--scenario PATH or --preset NAME)")


def _anchor(args: argparse.Namespace) -> tuple[str, str] | None:
    if not args.anchor:
        return None
    parts = [p.strip() for p in args.anchor.split(",")]
    if len(parts) != 2 or not all(parts):
        raise PreconditionError(f"--anchor expects U,V, got {args.anchor!r}")
    return parts[0], parts[1]


def _out_dir(args: argparse.Namespace) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _config(args: argparse.Namespace, loc: Localization, anchor: tuple[str, str] | None) -> EstimatorConfig:
    cfg = EstimatorConfig(dt=args.dt, t_final=args.t_final, seed=args.seed)
    if anchor is None:
        return cfg
    u, v = anchor
    if not loc.comm.graph.has_edge(u, v):
        raise PreconditionError(f"anchor edge ({u},{v}) is not in the communication graph")
    return anchored_config(cfg, loc.lig, u, v, loc.scenario.true_bearing(u, v))


# --------------------------------------------------------------------------
# generate
# --------------------------------------------------------------------------


def cmd_generate(args: argparse.Namespace) -> int:
    if args.preset:
        scenario = preset(args.preset)
    elif args.n_agents:
        scenario = random_scenario(args.n_agents, args.seed, args.extra_triples)
    else:
        raise PreconditionError("generate needs --preset NAME or --n-agents N")
    path = _out_dir(args) / "scenario.json"
    save_scenario(scenario, path)
    print(path)
    return 0


# --------------------------------------------------------------------------
# graphs
# --------------------------------------------------------------------------


def _pair_connectivity_doc(report) -> dict:
    return {
        u: {"satisfied": len(c) <= 1, "components": [sorted(x) for x in c]}
        for u, c in report.components.items()
    }


def graphs_report(loc: Localization) -> dict:
    elg = loc.elg.graph
    lg = line_graph(elg)
    lig_graph = loc.lig.graph
    prediction = analysis.predict_convergence(loc)
    return {
        "closure": loc.closure,
        "pair_connectivity": _pair_connectivity_doc(loc.pair_connectivity),
        "communication_graph": {
            "vertices": list(loc.comm.graph.vertices),
            "edges": [_edge(e) for e in loc.comm.graph.edges],
        },
        "undesired_connections": [[_edge(k), _edge(j)] for k, j in loc.undesired],
        "residual_undesired_connections": [
            [_edge(k), _edge(j)] for k, j in residual_undesired_connections(loc.elg, loc.effective)
        ],
        "removed_agents": list(loc.elg.removed_agents),
        "edge_localization_graph": {
            "vertices": list(elg.vertices),
            "virtual_vertices": loc.elg.virtual_vertices(),
            "edges": [_edge(e) for e in elg.edges],
            "spanning_tree": bool(loc.elg_roots),
            "roots": [v for v in elg.vertices if v in loc.elg_roots],
        },
        "line_graph_spanning_tree": bool(spanning_tree_roots(lg)),
        "interaction_graph": {
            "agents": [{"id": a.id, "edge_node": str(a.node), "origin": _edge(a.origin)} for a in loc.lig.agents],
            "edge_count": len(loc.lig.weights),
            "spanning_tree": bool(spanning_tree_roots(lig_graph)),
        },
        "prediction": {"verdict": prediction.verdict, "witness": prediction.witness},
    }


def cmd_graphs(args: argparse.Namespace) -> int:
    scenario = _load(args)
    out = _out_dir(args)
    try:
        loc = localize(scenario, closure=not args.no_closure)
    except AssumptionViolation as exc:
        a2 = check_assumption2(synthesize_measurements(scenario))
        _write_json(out / "graphs_report.json", {"pair_connectivity": _pair_connectivity_doc(a2), "error": str(exc)})
        raise
    (out / "G.dot").write_text(loc.comm.graph.to_dot(), encoding="utf-8")
    (out / "G_bar.dot").write_text(loc.elg.graph.to_dot(), encoding="utf-8")
    (out / "L_G_bar.dot").write_text(line_graph(loc.elg.graph).to_dot(), encoding="utf-8")
    (out / "G_prime.dot").write_text(loc.lig.to_dot(), encoding="utf-8")
    report = graphs_report(loc)
    _write_json(out / "graphs_report.json", report)
    st = report["edge_localization_graph"]
    print(f"spanning tree: {'yes, roots ' + ','.join(st['roots']) if st['spanning_tree'] else 'no'}")
    return 0


# --------------------------------------------------------------------------
# simulate
# --------------------------------------------------------------------------


def cmd_simulate(args: argparse.Namespace) -> int:
    scenario = _load(args)
    out = _out_dir(args)
    loc = localize(scenario, closure=not args.no_closure)
    anchor = _anchor(args)
    cfg = replace(_config(args, loc, anchor), early_stop=not args.full_horizon)
    theta = loc.true_orientations()
    traj = simulate(loc.lig, cfg, theta)

    labels = [_edge(a.origin) for a in loc.lig.agents]
    with open(out / "trajectory.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "agent_id", "re", "im", "theta_hat", "error"])
        last = len(traj) - 1
        for i in range(len(traj)):
            if i % args.decimate and i != last:
                continue
            z = traj.states[i]
            m = error_metrics(orientation_estimates(z), theta)
            th = orientation_estimates(z)
            for k in range(len(z)):
                writer.writerow([_fmt(traj.times[i]), k + 1, _fmt(z[k].real), _fmt(z[k].imag), _fmt(th[k]), _fmt(m.per_agent_error[k])])

    final = error_metrics(orientation_estimates(traj.final), theta)
    prediction = analysis.predict_convergence(loc, anchor)
    observed = analysis.observed_verdict(traj, theta)
    report = {
        "scenario_agents": len(scenario.agents),
        "edge_agents": len(loc.lig),
        "anchor": _edge(anchor) if anchor else None,
        "seed": cfg.seed,
        "dt": cfg.dt,
        "t_final": cfg.t_final,
        "t_end": _num(traj.times[-1]),
        "convergence_time": _num(traj.converged_at) if traj.converged_at is not None else None,
        "verdict": prediction.verdict,
        "witness": prediction.witness,
        "observed_verdict": observed,
        "bias": _num(final.bias),
        "spread": _num(final.spread),
        "max_abs_error": _num(np.abs(final.per_agent_error).max()),
        "per_agent_error": {f"{k + 1}:{labels[k]}": _num(e) for k, e in enumerate(final.per_agent_error)},
    }
    _write_json(out / "report.json", report)
    print(f"verdict {prediction.verdict} (observed {observed}); spread {_fmt(final.spread)}, bias {_fmt(final.bias)}")
    return 0


# --------------------------------------------------------------------------
# verify
# --------------------------------------------------------------------------


def verify_report(loc: Localization, cfg: EstimatorConfig, anchor: tuple[str, str] | None = None) -> dict:
    lig = loc.lig
    if cfg.anchor is not None:
        from .estimator import anchor as anchor_agent

        lig = anchor_agent(lig, cfg.anchor)
    h = build_h_matrix(lig)
    z_true = np.exp(1j * loc.true_orientations())
    null = analysis.nullity(h)
    prediction = analysis.predict_convergence(loc, anchor)

    elg = loc.elg.graph
    lg = line_graph(elg)
    knuth_rows = []
    for e in elg.edges:
        row = {"edge": str(e), "knuth": knuth_count(elg, e), "matrix_tree": count_in_trees(lg, e)}
        if len(lg.edges) <= BRUTE_FORCE_MAX_EDGES:
            row["brute_force"] = brute_force_in_trees(lg, e)
        if len(elg.edges) <= BRUTE_FORCE_MAX_EDGES:
            row["elg_tail_matrix_tree"] = count_in_trees(elg, e.tail)
            row["elg_tail_brute_force"] = brute_force_in_trees(elg, e.tail)
        knuth_rows.append(row)
    knuth_ok = all(
        r["knuth"] == r["matrix_tree"] == r.get("brute_force", r["matrix_tree"])
        and r.get("elg_tail_matrix_tree") == r.get("elg_tail_brute_force")
        for r in knuth_rows
    )

    doc: dict[str, Any] = {
        "edge_agents": len(lig),
        "nullity": null,
        "similarity_max_deviation": _num(analysis.similarity_check(h, z_true).max_deviation),
        "h_times_z_true": _num(np.linalg.norm(h @ z_true)),
        "prediction": prediction.verdict,
        "witness_root": prediction.witness if prediction.verdict != "no-global-consensus" else None,
        "knuth": knuth_rows,
        "knuth_all_equal": knuth_ok,
    }
    if null == 1:
        rng = np.random.default_rng(cfg.seed)
        z_rand = np.exp(1j * rng.uniform(-np.pi, np.pi, size=len(lig)))
        z_col = h @ (rng.normal(size=len(lig)) + 1j * rng.normal(size=len(lig)))
        traj = integrate(h, EstimatorState(z_col), replace(cfg, anchor=None, anchor_angle=None))
        doc["degenerate_initial"] = analysis.is_degenerate_initial(z_rand, h)
        doc["degenerate_demo"] = {
            "column_space_initial_is_degenerate": analysis.is_degenerate_initial(z_col, h),
            "initial_norm": _num(np.linalg.norm(z_col)),
            "final_norm": _num(np.linalg.norm(traj.final.estimates)),
        }
    else:
        doc["degenerate_initial"] = None
        doc["degenerate_demo"] = None
    return doc


def cmd_verify(args: argparse.Namespace) -> int:
    scenario = _load(args)
    out = _out_dir(args)
    loc = localize(scenario, closure=not args.no_closure)
    anchor = _anchor(args)
    cfg = _config(args, loc, anchor)
    doc = verify_report(loc, cfg, anchor)
    _write_json(out / "verify_report.json", doc)
    print(f"nullity {doc['nullity']}, similarity deviation {_fmt(doc['similarity_max_deviation'])}, "
          f"Knuth {'ok' if doc['knuth_all_equal'] else 'MISMATCH'}")
    return 0


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="edgeloc", description="Edge localization from subtended angles.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log pipeline details to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", help="scenario JSON file")
    common.add_argument("--preset", help=f"built-in scenario: {', '.join(sorted(PRESETS))}")
    common.add_argument("--out", default=".", help="output directory (default: current)")
    common.add_argument("--seed", type=int, default=0)

    pipeline = argparse.ArgumentParser(add_help=False)
    pipeline.add_argument("--no-closure", action="store_true", help="do not chain angles at an observer")
    pipeline.add_argument("--dt", type=float, default=0.01)
    pipeline.add_argument("--t-final", type=float, default=30.0)
    pipeline.add_argument("--anchor", help="edge U,V whose true bearing is known")

    gen = sub.add_parser("generate", parents=[common], help="write a scenario file")
    gen.add_argument("--n-agents", type=int, help="random scenario with N agents")
    gen.add_argument("--extra-triples", type=int, default=0, help="triples drawn after connectivity")
    gen.set_defaults(func=cmd_generate)

    gr = sub.add_parser("graphs", parents=[common, pipeline], help="DOT dumps and localizability report")
    gr.set_defaults(func=cmd_graphs)

    sim = sub.add_parser("simulate", parents=[common, pipeline], help="run the estimator")
    sim.add_argument("--decimate", type=_positive_int, default=10, help="write every N-th step")
    sim.add_argument("--full-horizon", action="store_true", help="never stop before --t-final")
    sim.set_defaults(func=cmd_simulate)

    ver = sub.add_parser("verify", parents=[common, pipeline], help="structural checks on H and G_bar")
    ver.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
