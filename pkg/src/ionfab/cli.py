"""Single-entry command line tool.

Exit codes: 0 success, 1 domain error (bad inputs, failed validation),
2 usage error. Diagnostics and the run manifest go to stderr; data goes to
stdout or to ``--out``. Reports are bit-stable: identical inputs produce
byte-identical files (sorted keys, shortest round-trip float formatting).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

from . import __version__
from .arch import load_architecture, validate_architecture
from .circuits import load_circuit
from .errors import InvalidArchitecture, IonfabError, SchemaError
from .graph import build_interaction_graph, graph_distance_profile, to_dot
from .ising import (AnnealSchedule, adiabatic_evolve, anneal_classical,
                    brute_force_ground_state, instance_to_doc, load_instance,
                    power_law_couplings, save_instance)
from .netsim import SwitchConfig, make_link, run_sim
from .qec import (embed_on_grid, embed_on_modular, hypergraph_product_graph,
                  load_check_matrix_csv, load_qec, qec_to_doc,
                  steane_concat_graph, surface_code_graph)
from .rates import rate_report
from .scheduler import assign_qubits, schedule

_STOCHASTIC_HINT = "stochastic command requires --seed (no hidden entropy)"


def _threads_cap() -> int:
    raw = os.environ.get("IONFAB_THREADS")
    if raw is None:
        return 1
    try:
        cap = int(raw)
    except ValueError:
        raise IonfabError(f"IONFAB_THREADS must be an integer, got {raw!r}") from None
    if cap < 1:
        raise IonfabError(f"IONFAB_THREADS must be >= 1, got {cap}")
    return cap


def render_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def render_csv_row(doc: dict) -> str:
    keys = sorted(doc)
    head = ",".join(keys)
    row = ",".join(repr(doc[k]) if isinstance(doc[k], float) else str(doc[k])
                   for k in keys)
    return f"{head}\n{row}\n"


def emit_report(text: str, out: str | None) -> list[str]:
    """Write a rendered report to --out or stdout; returns output paths."""
    if out is None:
        sys.stdout.write(text)
        return []
    Path(out).write_text(text)
    return [out]


@dataclass(frozen=True)
class RunManifest:
    """Provenance record emitted to stderr on every run."""

    tool_version: str
    subcommand: str
    inputs: dict[str, str | None]  # path -> sha256 of the bytes read
    seed: int | None
    wall_time_s: float
    outputs: list[str]

    def to_json_line(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def _manifest(subcommand: str, inputs: list[str], seed: int | None,
              outputs: list[str], started: float) -> None:
    hashes: dict[str, str | None] = {}
    for path in inputs:
        try:
            hashes[path] = hashlib.sha256(Path(path).read_bytes()).hexdigest()
        except OSError:
            hashes[path] = None
    manifest = RunManifest(
        tool_version=__version__,
        subcommand=subcommand,
        inputs=hashes,
        seed=seed,
        wall_time_s=round(time.monotonic() - started, 6),
        outputs=outputs,
    )
    print(manifest.to_json_line(), file=sys.stderr)


# ---------------------------------------------------------------------------
# Subcommand handlers; each returns (exit_code, output_paths)
# ---------------------------------------------------------------------------

def _cmd_validate(args) -> tuple[int, list[str]]:
    try:
        spec = load_architecture(args.arch)
    except InvalidArchitecture as exc:
        doc = {"ok": False,
               "violations": [{"path": v.path, "message": v.message}
                              for v in exc.report.violations]}
        outputs = emit_report(render_json(doc), args.out)
        return 1, outputs
    report = validate_architecture(spec)
    doc = {"ok": report.ok, "violations": []}
    outputs = emit_report(render_json(doc), args.out)
    return 0, outputs


def _cmd_rates(args) -> tuple[int, list[str]]:
    spec = load_architecture(args.arch)
    elu_id = args.elu or spec.elus[0].id
    report = rate_report(spec, elu_id)
    doc = {
        "recoil_frequency": report.recoil_frequency,
        "gate_rate": report.gate_rate,
        "state_dependent_force": report.state_dependent_force,
        "link_success_probability": report.link_success_probability,
        "mean_connection_rate": report.mean_connection_rate,
    }
    if args.summary:
        print(f"ELU {elu_id}: gate rate {report.gate_rate / 1e3:.1f} kHz, "
              f"connection rate {report.mean_connection_rate:.1f} Hz "
              f"(p = {report.link_success_probability:.2e})")
    text = render_csv_row(doc) if args.format == "csv" else render_json(doc)
    return 0, emit_report(text, args.out)


def _cmd_graph(args) -> tuple[int, list[str]]:
    spec = load_architecture(args.arch)
    g = build_interaction_graph(spec)
    if args.format == "dot":
        text = to_dot(g, tier=args.tier)
    else:
        edges = [
            {"a": g.nodes[e.a].label, "b": g.nodes[e.b].label,
             "tier": e.tier.value, "time_s": e.time_cost, "fidelity": e.fidelity}
            for e in g.edges if args.tier is None or e.tier.value == args.tier
        ]
        doc = {
            "nodes": [{"elu": n.elu_id, "position": n.position,
                       "role": n.role.value} for n in g.nodes],
            "edges": edges,
        }
        text = render_json(doc)
    if args.summary:
        profile = graph_distance_profile(g, args.tier or "collective")
        print(f"{len(g.nodes)} qubits; tier {args.tier or 'collective'}: "
              f"max hop distance {profile.max_distance}, "
              f"{profile.unreachable_pairs} unreachable pairs")
    return 0, emit_report(text, args.out)


def _cmd_ising(args) -> tuple[int, list[str]]:
    sub = getattr(args, "ising_cmd", None)
    if sub is None:
        if args.n is None or args.alpha is None:
            raise IonfabError("generation requires --n and --alpha "
                              "(or use: ionfab ising solve|adiabatic|anneal)")
        inst = power_law_couplings(args.n, args.alpha, args.j0)
        if args.out:
            save_instance(inst, args.out)
            return 0, [args.out]
        return 0, emit_report(render_json(instance_to_doc(inst)), None)

    inst = load_instance(args.instance)
    if sub == "solve":
        configs, best = brute_force_ground_state(inst)
        doc = {"minimum_energy": best,
               "ground_states": [list(c.spins) for c in configs],
               "n": inst.n_spins}
        if args.summary:
            print(f"minimum energy {best} with {len(configs)} optimal "
                  f"configuration(s) reported")
        return 0, emit_report(render_json(doc), args.out)
    if sub == "adiabatic":
        run = adiabatic_evolve(inst, args.time, args.steps)
        doc = {"ground_overlap": run.ground_overlap,
               "total_time": run.total_time, "steps": run.steps,
               "final_norm": run.final_norm,
               "final_ising_energy": run.final_ising_energy}
        outputs = emit_report(render_json(doc), args.out)
        if args.trace:
            rows = ["step,energy"] + [f"{i},{e!r}" for i, e in
                                      enumerate(run.energy_trace)]
            Path(args.trace).write_text("\n".join(rows) + "\n")
            outputs.append(args.trace)
        if args.summary:
            print(f"overlap with ground space: {run.ground_overlap:.4f}")
        return 0, outputs
    if sub == "anneal":
        schedule_ = AnnealSchedule(t_start=args.t_start, t_factor=args.t_factor,
                                   t_min=args.t_min,
                                   sweeps_per_temp=args.sweeps)
        config, best = anneal_classical(inst, schedule_, args.seed)
        doc = {"energy": best, "config": list(config.spins)}
        if args.summary:
            print(f"best energy {best}")
        return 0, emit_report(render_json(doc), args.out)
    raise IonfabError(f"unknown ising subcommand {sub!r}")


def _cmd_qec(args) -> tuple[int, list[str]]:
    sub = args.qec_cmd
    if sub == "surface":
        code = surface_code_graph(args.d)
    elif sub == "steane":
        code = steane_concat_graph(args.levels)
    elif sub == "hgp":
        code = hypergraph_product_graph(load_check_matrix_csv(args.h1),
                                        load_check_matrix_csv(args.h2))
    elif sub == "embed":
        code = load_qec(args.code)
        if args.host == "grid":
            if args.placement == "random" and args.seed is None:
                raise IonfabError(_STOCHASTIC_HINT)
            rep = embed_on_grid(code, args.placement, seed=args.seed)
            doc = {
                "host": rep.host, "grid_side": rep.grid_side,
                "swap_count": rep.swap_count,
                "max_check_span": rep.max_check_span,
                "mean_route_length": rep.mean_route_length,
                "per_check_route_length": list(rep.per_check_route_length),
            }
        else:
            spec = load_architecture(args.host)
            rep = embed_on_modular(code, spec, args.partition)
            doc = {
                "host": rep.host, "pairs_per_round": rep.pairs_per_round,
                "max_check_span": rep.max_check_span,
                "per_check_route_length": list(rep.per_check_route_length),
                "per_check_remote_elus": list(rep.per_check_remote_elus),
            }
        if args.summary:
            if rep.host == "grid2d":
                print(f"grid {rep.grid_side}x{rep.grid_side}: "
                      f"{rep.swap_count} swaps, max span {rep.max_check_span}")
            else:
                print(f"modular: {rep.pairs_per_round} pairs per round")
        return 0, emit_report(render_json(doc), args.out)
    else:
        raise IonfabError(f"unknown qec subcommand {sub!r}")
    if args.summary:
        print(f"{code.family}: {code.n_data} data, {code.n_checks} checks, "
              f"max weight {max(c.weight for c in code.checks)}")
    return 0, emit_report(render_json(qec_to_doc(code)), args.out)


def _load_switch_schedule(path: str) -> list[tuple[float, SwitchConfig]]:
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, list):
        raise SchemaError("expected a list of {time_s, links} entries")
    schedule_ = []
    for i, entry in enumerate(doc):
        if set(entry) != {"time_s", "links"}:
            raise SchemaError("expected keys time_s and links", f"$[{i}]")
        links = set()
        for j, row in enumerate(entry["links"]):
            if not (isinstance(row, list) and len(row) == 4):
                raise SchemaError("expected [elu_a, port_a, elu_b, port_b]",
                                  f"$[{i}].links[{j}]")
            links.add(make_link((row[0], row[1]), (row[2], row[3])))
        schedule_.append((float(entry["time_s"]), SwitchConfig(frozenset(links))))
    return schedule_


def _load_demand(path: str) -> list[tuple[float, tuple[str, str]]]:
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, list):
        raise SchemaError("expected a list of {time_s, elus} entries")
    demand = []
    for i, entry in enumerate(doc):
        if set(entry) != {"time_s", "elus"}:
            raise SchemaError("expected keys time_s and elus", f"$[{i}]")
        a, b = entry["elus"]
        demand.append((float(entry["time_s"]), (a, b)))
    return demand


def sim_result_doc(result) -> dict:
    return {
        "schema": "ionfab-sim/1",
        "horizon_s": result.horizon,
        "seed": result.seed,
        "links": {label: {"attempts": s.attempts, "successes": s.successes,
                          "measured_rate_hz": s.measured_rate}
                  for label, s in result.per_link.items()},
        "mean_connection_rate_hz": result.mean_connection_rate,
        "ledger": {
            "successes": result.ledger.successes,
            "delivered": result.ledger.delivered,
            "expired": result.ledger.expired,
            "invalidated": result.ledger.invalidated,
            "overflow_dropped": result.ledger.overflow_dropped,
            "residual": result.ledger.residual,
            "conserved": result.ledger.conserved,
        },
        "collisions": result.collisions,
        "requests": {"count": result.request_count,
                     "served": result.requests_served,
                     "latency_mean_s": result.latency_mean,
                     "latency_max_s": result.latency_max},
    }


def _cmd_simulate(args) -> tuple[int, list[str]]:
    spec = load_architecture(args.arch)
    switch_schedule = _load_switch_schedule(args.schedule)
    demand = _load_demand(args.demand) if args.demand else []
    result = run_sim(spec, switch_schedule, demand, args.horizon, args.seed,
                     p_override=args.p, store_log=args.log is not None)
    outputs = emit_report(render_json(sim_result_doc(result)), args.out)
    if args.log:
        Path(args.log).write_text(result.events_csv())
        outputs.append(args.log)
    if args.summary:
        print(f"{result.ledger.successes} pairs generated, "
              f"{result.ledger.delivered} delivered, "
              f"mean rate {result.mean_connection_rate:.2f} Hz")
    return 0, outputs


def _cmd_schedule(args) -> tuple[int, list[str]]:
    spec = load_architecture(args.arch)
    circuit = load_circuit(args.circuit)
    if args.map.startswith("file:"):
        raw = json.loads(Path(args.map[5:]).read_text())
        user_map = {int(q): (elu, int(pos)) for q, (elu, pos) in raw.items()}
        qmap = assign_qubits(circuit, spec, "user", user_map=user_map)
    elif args.map == "greedy":
        qmap = assign_qubits(circuit, spec, "greedy_interaction_cut")
    elif args.map == "roundrobin":
        qmap = assign_qubits(circuit, spec, "round_robin")
    else:
        raise IonfabError(f"unknown map strategy {args.map!r}")
    if args.pairs == "buffered" and args.seed is None:
        raise IonfabError(_STOCHASTIC_HINT)
    result = schedule(circuit, qmap, spec, pair_supply_mode=args.pairs,
                      seed=args.seed)
    doc = {
        "makespan_s": result.makespan,
        "pairs_consumed": result.pairs_consumed,
        "swaps_inserted": result.swaps_inserted,
        "fidelity_estimate": result.fidelity_estimate,
        "mode": result.mode,
        "operations": len(result.timeline),
    }
    outputs = emit_report(render_json(doc), args.out)
    if args.timeline:
        Path(args.timeline).write_text(result.timeline_csv())
        outputs.append(args.timeline)
    if args.summary:
        print(f"makespan {result.makespan * 1e3:.3f} ms, "
              f"{result.pairs_consumed} pairs, "
              f"fidelity {result.fidelity_estimate:.4f}")
    return 0, outputs


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ionfab",
        description="Resource estimation and simulation for modular "
                    "trapped-ion machines.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    # SUPPRESS keeps a nested subparser from clobbering a value the parent
    # parser already set (e.g. `ionfab ising --out f.json solve x`).
    def common(p):
        p.add_argument("--out", metavar="PATH", default=argparse.SUPPRESS,
                       help="write the report here instead of stdout")
        p.add_argument("--summary", action="store_true",
                       default=argparse.SUPPRESS,
                       help="also print a human-readable summary")
        p.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                       help="RNG seed (required for stochastic runs)")

    p = sub.add_parser("validate", help="check an architecture file")
    p.add_argument("arch", help="ionfab-arch/1 JSON file")
    common(p)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("rates", help="physical rate report for one ELU")
    p.add_argument("arch")
    p.add_argument("--elu", help="ELU id (default: first)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    common(p)
    p.set_defaults(func=_cmd_rates)

    p = sub.add_parser("graph", help="interaction graph export")
    p.add_argument("arch")
    p.add_argument("--tier", choices=("fast", "collective"), default=None)
    p.add_argument("--format", choices=("json", "dot"), default="json")
    common(p)
    p.set_defaults(func=_cmd_graph)

    p = sub.add_parser("ising", help="Ising instances and solvers")
    p.add_argument("--n", type=int, help="spin count (generation mode)")
    p.add_argument("--alpha", type=float, help="power-law exponent in [0,3]")
    p.add_argument("--j0", type=float, default=1.0, help="coupling scale")
    common(p)
    isub = p.add_subparsers(dest="ising_cmd", metavar="ACTION")
    ps = isub.add_parser("solve", help="brute-force ground states")
    ps.add_argument("instance")
    common(ps)
    pa = isub.add_parser("adiabatic", help="statevector sweep")
    pa.add_argument("instance")
    pa.add_argument("--time", type=float, required=True,
                    help="total schedule time in units of 1/|j0|")
    pa.add_argument("--steps", type=int, required=True)
    pa.add_argument("--trace", metavar="CSV", help="write the energy trace here")
    common(pa)
    pn = isub.add_parser("anneal", help="Metropolis annealing")
    pn.add_argument("instance")
    pn.add_argument("--t-start", type=float, default=5.0)
    pn.add_argument("--t-factor", type=float, default=0.95)
    pn.add_argument("--t-min", type=float, default=1e-2)
    pn.add_argument("--sweeps", type=int, default=2)
    common(pn)
    p.set_defaults(func=_cmd_ising)

    p = sub.add_parser("qec", help="QEC graph families and embeddings")
    qsub = p.add_subparsers(dest="qec_cmd", metavar="FAMILY", required=True)
    pq = qsub.add_parser("surface", help="rotated surface-code patch")
    pq.add_argument("--d", type=int, required=True, help="odd code distance")
    common(pq)
    pq = qsub.add_parser("steane", help="concatenated Steane code")
    pq.add_argument("--levels", type=int, required=True)
    common(pq)
    pq = qsub.add_parser("hgp", help="hypergraph product of two check matrices")
    pq.add_argument("--h1", required=True, help="dense 0/1 CSV")
    pq.add_argument("--h2", required=True, help="dense 0/1 CSV")
    common(pq)
    pq = qsub.add_parser("embed", help="cost a code on a host")
    pq.add_argument("--code", required=True, help="ionfab-qec/1 JSON")
    pq.add_argument("--host", required=True,
                    help="'grid' or an architecture JSON path")
    pq.add_argument("--placement", default="row_major",
                    choices=("row_major", "random", "native"))
    pq.add_argument("--partition", default="greedy_cut",
                    choices=("greedy_cut", "round_robin"))
    common(pq)
    p.set_defaults(func=_cmd_qec)

    p = sub.add_parser("simulate", help="photonic network simulation")
    p.add_argument("arch")
    p.add_argument("--schedule", required=True, help="switch schedule JSON")
    p.add_argument("--demand", help="pair request JSON")
    p.add_argument("--horizon", type=float, required=True, help="seconds")
    p.add_argument("--log", metavar="CSV", help="write the event log here")
    p.add_argument("--p", type=float, default=None,
                   help="override the per-attempt success probability")
    common(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("schedule", help="map and schedule a circuit")
    p.add_argument("arch")
    p.add_argument("circuit", help=".iqc circuit file")
    p.add_argument("--map", default="greedy",
                   help="greedy | roundrobin | file:PATH")
    p.add_argument("--pairs", choices=("ideal", "buffered"), default="ideal")
    p.add_argument("--timeline", metavar="CSV", help="write the timeline here")
    common(p)
    p.set_defaults(func=_cmd_schedule)

    return parser


def main(argv: list[str] | None = None) -> int:
    started = time.monotonic()
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in (("out", None), ("summary", False), ("seed", None)):
        if not hasattr(args, name):
            setattr(args, name, default)
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return 2

    inputs = [getattr(args, name) for name in
              ("arch", "circuit", "instance", "code", "h1", "h2", "schedule",
               "demand")
              if isinstance(getattr(args, name, None), str)]

    try:
        _threads_cap()
        if args.command == "simulate" and args.seed is None:
            raise IonfabError(_STOCHASTIC_HINT)
        if getattr(args, "ising_cmd", None) == "anneal" and args.seed is None:
            raise IonfabError(_STOCHASTIC_HINT)
        code, outputs = args.func(args)
    except IonfabError as exc:
        print(f"ionfab: error: {exc}", file=sys.stderr)
        _manifest(args.command, inputs, getattr(args, "seed", None), [], started)
        return 1
    except OSError as exc:
        print(f"ionfab: error: {exc}", file=sys.stderr)
        _manifest(args.command, inputs, getattr(args, "seed", None), [], started)
        return 1
    _manifest(args.command, inputs, getattr(args, "seed", None), outputs, started)
    return code


if __name__ == "__main__":
    sys.exit(main())
