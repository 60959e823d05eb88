"""Command-line front end: generate, grade, route, bench.

Exit codes: 0 on success (a "path not available" outcome is a result, not a
failure), 1 on usage or validation errors, 2 on I/O failures.  Every command
writes its fully resolved configuration next to its outputs so any artifact
can be reproduced from the directory alone.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import (
    STREAM_ABC,
    STREAM_GA,
    STREAM_GRADING,
    stream_np_rng,
    stream_py_rng,
    emit_plot_data,
    run_suite,
    save_summary_json,
    summary_to_dict,
    write_plot_csv,
    write_records_csv,
)
from .config import RunConfig
from .grading import build_knowledge_base, save_grade_dump, select_feasible
from .optimizers import RouteResult, Subgraph, abc_search, ga_search
from .topology import (
    generate_topology,
    load_topology,
    quadrant_candidates,
    quadrant_of,
    save_topology,
)
from .traffic import sample_link_states


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; this harness reserves 2 for I/O.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gradednet",
                     description="Graded-network routing simulator and benchmark")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_shared(p):
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--seed", type=int, help="base seed")
        p.add_argument("--out", help="output directory")

    p_gen = sub.add_parser("generate", help="generate a topology file")
    add_shared(p_gen)
    p_gen.add_argument("--n", type=int, help="node count")
    p_gen.add_argument("--density", type=float, help="link density in (0, 1]")

    p_grade = sub.add_parser("grade", help="grade a topology into a knowledge base dump")
    add_shared(p_grade)
    p_grade.add_argument("--topology", required=True, help="topology JSON file")
    p_grade.add_argument("--mode", choices=("best-classes", "literal"))

    p_route = sub.add_parser("route", help="grade, prune, and search for a route")
    add_shared(p_route)
    p_route.add_argument("--topology", required=True, help="topology JSON file")
    p_route.add_argument("--source", type=int, required=True)
    p_route.add_argument("--destination", type=int, required=True)
    p_route.add_argument("--algo", choices=("abc", "ga", "both"), default="both")
    p_route.add_argument("--mode", choices=("best-classes", "literal"))

    p_bench = sub.add_parser("bench", help="run the node-count sweep benchmark")
    add_shared(p_bench)
    p_bench.add_argument("--node-counts", help="comma-separated node counts")
    p_bench.add_argument("--seeds-per-n", type=int, help="replicates per node count")
    p_bench.add_argument("--density", type=float, help="link density in (0, 1]")

    return parser


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig.from_file(args.config) if args.config else RunConfig()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["out_dir"] = args.out
    if getattr(args, "n", None) is not None:
        overrides["n"] = args.n
    if getattr(args, "density", None) is not None:
        overrides["link_density"] = args.density
    if getattr(args, "mode", None) is not None:
        overrides["selection_mode"] = args.mode
    if getattr(args, "node_counts", None) is not None:
        overrides["node_counts"] = tuple(int(v) for v in args.node_counts.split(","))
    if getattr(args, "seeds_per_n", None) is not None:
        overrides["seeds_per_n"] = args.seeds_per_n
    return config.replace(**overrides)


def _prepare_out(config: RunConfig) -> Path:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    # Provenance: every knob except the output location itself.
    doc = config.to_dict()
    doc.pop("out_dir")
    (out / "run_config.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return out


def cmd_generate(config: RunConfig) -> int:
    if config.n < 2:
        raise _UsageError(f"need at least 2 nodes, got {config.n}")
    if not 0.0 < config.link_density <= 1.0:
        raise _UsageError(f"link density must be in (0, 1], got {config.link_density}")
    out = _prepare_out(config)
    topology = generate_topology(config.n, config.link_density, config.seed,
                                 capacity_mbps=config.max_bandwidth_mbps,
                                 lifetime_scale=config.lifetime_scale)
    save_topology(topology, out / "topology.json")
    print(f"wrote {out / 'topology.json'}: {topology.n} nodes, {len(topology.links)} links")
    return 0


def _grade_topology(topology, config: RunConfig):
    rng = stream_np_rng(config.seed, STREAM_GRADING)
    states = sample_link_states(len(topology.links), rng,
                                capacity_mbps=config.max_bandwidth_mbps,
                                flow_rate_mbps=config.flow_rate_mbps, mu=config.mu)
    return build_knowledge_base(topology, states, config.grading_config(), rng)


def cmd_grade(config: RunConfig, topology_path: str) -> int:
    topology = load_topology(topology_path)
    out = _prepare_out(config)
    kb = _grade_topology(topology, config)
    save_grade_dump(kb, config.selection_mode, out / "grade_dump.json")
    feasible = select_feasible(topology, kb, config.selection_mode)
    print(f"graded {topology.n} nodes ({config.selection_mode}): "
          f"{len(feasible)} selected for routing")
    print(f"wrote {out / 'grade_dump.json'}")
    return 0


def _print_route(algo: str, result: RouteResult) -> None:
    if not result.found:
        print(f"[{algo}] path not available")
        return
    path = " -> ".join(str(v) for v in result.best_path)
    print(f"[{algo}] path: {path}")
    print(f"[{algo}] hops: {result.hop_count}, "
          f"bottleneck: {result.best_fitness.bottleneck_bw:.3f} Mbps, "
          f"converged at cycle {result.convergence_cycle}")


def _route_result_dict(result: RouteResult) -> dict:
    return {
        "found": result.found,
        "path": list(result.best_path) if result.found else None,
        "hop_count": result.hop_count if result.found else None,
        "bottleneck_mbps": result.best_fitness.bottleneck_bw,
        "convergence_cycle": result.convergence_cycle,
        "stagnation_cycle": result.stagnation_cycle,
        "fitness_trace": list(result.fitness_trace),
    }


def cmd_route(config: RunConfig, topology_path: str, source: int,
              destination: int, algo: str) -> int:
    topology = load_topology(topology_path)
    if not topology.has_node(source) or not topology.has_node(destination):
        raise _UsageError(f"node ids must be in 0..{topology.n - 1}")
    if source == destination:
        raise _UsageError("source and destination must differ")

    out = _prepare_out(config)
    kb = _grade_topology(topology, config)
    save_grade_dump(kb, config.selection_mode, out / "grade_dump.json")

    feasible = select_feasible(topology, kb, config.selection_mode)
    quadrant = quadrant_candidates(topology, source, destination)
    candidates = quadrant & feasible
    subgraph = Subgraph.from_topology(topology, candidates, source)
    tag = quadrant_of(topology.nodes[source].position,
                      topology.nodes[destination].position)

    print(f"topology: {topology.n} nodes, {len(topology.links)} links")
    print(f"selection mode {config.selection_mode}: {len(feasible)}/{topology.n} nodes kept; "
          f"destination quadrant {tag.name}: {len(candidates)} candidates")
    if destination not in feasible:
        priority = kb.records[destination].priority
        print(f"note: destination {destination} excluded by grading "
              f"(priority {priority}); no route can qualify")

    results = {}
    if algo in ("abc", "both"):
        results["abc"] = abc_search(subgraph, source, destination, config.abc_config(),
                                    kb, stream_py_rng(config.seed, STREAM_ABC),
                                    bw_threshold=config.bw_threshold_mbps)
    if algo in ("ga", "both"):
        results["ga"] = ga_search(subgraph, source, destination, config.ga_config(),
                                  kb, stream_py_rng(config.seed, STREAM_GA),
                                  bw_threshold=config.bw_threshold_mbps)

    for name in sorted(results):
        _print_route(name, results[name])
        doc = _route_result_dict(results[name])
        doc["source"] = source
        doc["destination"] = destination
        doc["selection_mode"] = config.selection_mode
        (out / f"route_{name}.json").write_text(
            json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_bench(config: RunConfig) -> int:
    out = _prepare_out(config)
    summary, records = run_suite(config)
    rows = [record.to_row() for record in records]
    write_records_csv(rows, out / "results.csv")
    save_summary_json(summary, out / "summary.json")
    for kind, name in (("traffic-intensity", "plot_traffic_intensity.csv"),
                       ("throughput", "plot_throughput.csv")):
        plot_rows = emit_plot_data(records, kind,
                                   packet_size_bits=config.packet_size_bytes * 8,
                                   link_capacity_mbps=config.max_bandwidth_mbps,
                                   flow_rate_mbps=config.flow_rate_mbps)
        write_plot_csv(plot_rows, out / name)

    def _fmt(value, spec=".1f"):
        return "-" if value is None else format(value, spec)

    print(f"{'n':>6} {'trials':>7} {'found%':>7} {'abc hops':>9} {'ga hops':>8} "
          f"{'abc conv':>9} {'ga conv':>8} {'ratio':>7}")
    doc = summary_to_dict(summary)
    for n_key, s in doc["per_n"].items():
        found = (s["path_found_abc"] + s["path_found_ga"]) / 2
        print(f"{n_key:>6} {s['trials']:>7} {found * 100:>6.0f}% "
              f"{_fmt(s['abc_median_hops']):>9} {_fmt(s['ga_median_hops']):>8} "
              f"{_fmt(s['abc_median_conv']):>9} {_fmt(s['ga_median_conv']):>8} "
              f"{_fmt(s['convergence_ratio'], '.2f'):>7}")
    q = doc["quality"]
    print(f"quality over {q['compared_trials']} compared trials: "
          f"abc_better={q['abc_better']:.2f} equal={q['equal']:.2f} ga_better={q['ga_better']:.2f}")
    print(f"wrote {out / 'results.csv'}, {out / 'summary.json'}, plot data")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1

    try:
        config = _resolve_config(args)
        if args.command == "generate":
            return cmd_generate(config)
        if args.command == "grade":
            return cmd_grade(config, args.topology)
        if args.command == "route":
            return cmd_route(config, args.topology, args.source,
                             args.destination, args.algo)
        if args.command == "bench":
            return cmd_bench(config)
        raise _UsageError(f"unknown command {args.command}")
    except (_UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
