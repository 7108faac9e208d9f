"""Command-line front end: solve single instances, run seeded batches.

Exit codes: 0 solved, 1 input error, 2 timeout/unsolved.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .map_graph import (
    DEFAULT_RADIUS, Agent, Graph, GridMap, Instance, ParseError,
    build_graph, generate_scenario, load_roadmap, open_grid, parse_map, parse_scen,
)
from .sipp import Plan
from .solver import SolverConfig, Stats, solve
from .validator import validate

CSV_FIELDS = ["map", "k", "agents", "heuristic", "seed", "success", "soc",
              "makespan", "hl_expanded", "ll_calls", "runtime"]


def _fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return 1


def format_solution(plans: Sequence[Plan], stats: Stats) -> str:
    out = io.StringIO()
    out.write(f"soc {stats.soc:.4f} makespan {stats.makespan:.4f}\n")
    for plan in sorted(plans, key=lambda p: p.agent):
        out.write(f"agent {plan.agent}\n")
        for a in plan.actions:
            out.write(f"{a.kind} {a.u} {a.v} {a.t_start:.4f} {a.duration:.4f}\n")
    return out.getvalue()


def _load_grid_instance(args) -> Instance:
    if args.open_grid:
        try:
            w, h = (int(x) for x in args.open_grid.lower().split("x"))
        except ValueError:
            raise ValueError(f"--open-grid wants WxH, got {args.open_grid!r}")
        grid = open_grid(w, h)
    else:
        with open(args.map, "r") as fh:
            grid = parse_map(fh.read())
    graph = build_graph(grid, args.k, args.radius)
    if args.scen:
        with open(args.scen) as fh:
            entries = parse_scen(fh.read())
        if args.agents is not None:
            entries = entries[: args.agents]
        if not entries:
            raise ValueError("scenario has no entries")
        agents = []
        for idx, ((sx, sy), (gx, gy)) in enumerate(entries):
            try:
                s = graph.vertex_of_cell[(sx, sy)]
                g = graph.vertex_of_cell[(gx, gy)]
            except KeyError as e:
                raise ValueError(f"scen cell {e} is blocked or out of bounds")
            agents.append(Agent(idx, s, g, radius=args.radius))
        return Instance(graph, tuple(agents))
    if args.random_agents:
        return generate_scenario(graph, args.random_agents, args.seed, radius=args.radius)
    raise ValueError("grid input needs --scen or --random-agents")


def _load_instance(args) -> Instance:
    if args.roadmap:
        with open(args.roadmap) as fh:
            graph, pairs = load_roadmap(fh.read())
        if args.agent:
            pairs = [(int(s), int(g)) for s, g in args.agent]
        if args.random_agents:
            return generate_scenario(graph, args.random_agents, args.seed, radius=args.radius)
        if not pairs:
            raise ValueError("roadmap input needs `a` lines, --agent or --random-agents")
        agents = tuple(
            Agent(i, s, g, radius=args.radius) for i, (s, g) in enumerate(pairs)
        )
        return Instance(graph, agents)
    return _load_grid_instance(args)


def cmd_solve(args) -> int:
    try:
        instance = _load_instance(args)
    except (OSError, ParseError, ValueError, RuntimeError) as e:
        return _fail(str(e))
    config = SolverConfig(
        heuristic=args.heuristic, timeout=args.timeout, delta=args.delta,
        k=args.k, keep_trace=args.trace is not None,
    )
    plans, stats = solve(instance, config)
    record = {
        "success": stats.success, "soc": stats.soc, "makespan": stats.makespan,
        "hl_expanded": stats.hl_expanded, "ll_calls": stats.ll_calls,
        "runtime": round(stats.runtime, 6), "reason": stats.reason,
    }
    if args.stats:
        with open(args.stats, "w") as fh:
            json.dump(record, fh, indent=2)
            fh.write("\n")
    if args.trace and stats.trace is not None:
        with open(args.trace, "w") as fh:
            for t in stats.trace:
                fh.write(f"node {t.seq} parent {t.parent} cost {t.cost:.6f} "
                         f"conflicts {t.n_conflicts} constraint {t.constraint}\n")
    if not stats.success:
        print(f"unsolved: {stats.reason}", file=sys.stderr)
        return 2 if stats.reason == "timeout" else 1
    text = format_solution(plans, stats)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    print(f"soc {stats.soc:.4f} makespan {stats.makespan:.4f} "
          f"hl_expanded {stats.hl_expanded} ll_calls {stats.ll_calls}")
    if args.validate:
        report = validate(instance, plans)
        if not report.ok:
            print(report.to_text(), file=sys.stderr)
            return _fail("solution failed validation")
        print("validated: no violations")
    return 0


# ---------------------------------------------------------------------------
# batch
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Job:
    map_name: str
    map_text: Optional[str]  # None -> open grid WxH in map_name
    k: int
    n_agents: int
    heuristic: str
    seed: int
    timeout: float
    delta: float
    radius: float


def _run_job(job: _Job) -> Dict[str, object]:
    if job.map_text is None:
        w, h = (int(x) for x in job.map_name.split("x"))
        grid = open_grid(w, h)
    else:
        grid = parse_map(job.map_text)
    graph = build_graph(grid, job.k, job.radius)
    instance = generate_scenario(graph, job.n_agents, job.seed, radius=job.radius)
    config = SolverConfig(heuristic=job.heuristic, timeout=job.timeout,
                          delta=job.delta, k=job.k)
    _, stats = solve(instance, config)
    return {
        "map": job.map_name, "k": job.k, "agents": job.n_agents,
        "heuristic": job.heuristic, "seed": job.seed,
        "success": int(stats.success),
        "soc": f"{stats.soc:.6f}" if stats.success else "",
        "makespan": f"{stats.makespan:.6f}" if stats.success else "",
        "hl_expanded": stats.hl_expanded, "ll_calls": stats.ll_calls,
        "runtime": f"{stats.runtime:.6f}",
    }


def _parse_seeds(spec: str) -> List[int]:
    if ":" in spec:
        lo, hi = spec.split(":")
        return list(range(int(lo), int(hi)))
    if not spec:
        return []
    return [int(s) for s in spec.split(",") if s != ""]


def _summaries(rows: List[Dict[str, object]], threshold: float) -> List[str]:
    configs: Dict[Tuple, List[Dict[str, object]]] = {}
    for r in rows:
        configs.setdefault((r["map"], r["k"], r["agents"], r["heuristic"]), []).append(r)
    rates = {key: (sum(int(r["success"]) for r in rs) / len(rs), rs)
             for key, rs in configs.items()}
    eligible = {key for key, (rate, _) in rates.items() if rate > threshold}
    solved_by_all: Optional[set] = None
    for key in eligible:
        seeds = {r["seed"] for r in rates[key][1] if int(r["success"])}
        solved_by_all = seeds if solved_by_all is None else solved_by_all & seeds
    lines = []
    for key in sorted(configs, key=lambda k: tuple(str(x) for x in k)):
        rate, rs = rates[key]
        common = [r for r in rs if int(r["success"]) and solved_by_all
                  and r["seed"] in solved_by_all]
        mean_soc = (sum(float(r["soc"]) for r in common) / len(common)) if common else math.nan
        soc_txt = f"{mean_soc:.2f}" if common else "-"
        lines.append(
            f"map={key[0]} k={key[1]} agents={key[2]} heuristic={key[3]} "
            f"success={rate:.2f} mean_soc={soc_txt}"
        )
    return lines


def cmd_batch(args) -> int:
    try:
        if args.open_grid:
            map_name, map_text = args.open_grid, None
            int(args.open_grid.split("x")[0])
        elif args.map:
            with open(args.map) as fh:
                map_text = fh.read()
            map_name = args.map
            parse_map(map_text)
        else:
            return _fail("batch needs --map or --open-grid")
        ks = [int(x) for x in args.k.split(",")]
        agent_counts = [int(x) for x in args.agents.split(",")]
        heuristics = args.heuristic.split(",")
        seeds = _parse_seeds(args.seeds)
    except (OSError, ParseError, ValueError) as e:
        return _fail(str(e))

    jobs = [
        _Job(map_name, map_text, k, n, h, seed, args.timeout, args.delta, args.radius)
        for k in ks for n in agent_counts for h in heuristics for seed in seeds
    ]
    results: Dict[_Job, Dict[str, object]] = {}
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            for job, row in zip(jobs, pool.map(_run_job, jobs)):
                results[job] = row
    else:
        for job in jobs:
            results[job] = _run_job(job)
    rows = [results[job] for job in jobs]  # deterministic parameter-grid order

    if args.format == "json":
        payload = json.dumps(rows, indent=2) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        payload = buf.getvalue()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)
    for line in _summaries(rows, args.threshold):
        print(line)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ccbs",
        description="Continuous-time multi-agent pathfinding (CCBS) toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--radius", type=float, default=DEFAULT_RADIUS)
        p.add_argument("--timeout", type=float, default=60.0)
        p.add_argument("--delta", type=float, default=0.1,
                       help="unsafe-interval sweep step")
        p.add_argument("--seed", type=int, default=0)

    ps = sub.add_parser("solve", help="solve one instance")
    common(ps)
    ps.add_argument("--k", type=int, default=2, help="2^k neighborhood level")
    ps.add_argument("--map", help="movingai .map file")
    ps.add_argument("--open-grid", help="synthetic open grid, e.g. 10x10")
    ps.add_argument("--roadmap", help="roadmap file (v/e/a lines)")
    ps.add_argument("--scen", help="movingai .scen file")
    ps.add_argument("--agents", type=int, help="use first N scen entries")
    ps.add_argument("--random-agents", type=int, help="generate N random agents")
    ps.add_argument("--agent", nargs=2, action="append", metavar=("START", "GOAL"),
                    help="explicit agent (roadmap vertex ids); repeatable")
    ps.add_argument("--heuristic", default="hybrid",
                    choices=["vanilla", "past", "cardinals", "hybrid"])
    ps.add_argument("--out", help="solution file")
    ps.add_argument("--stats", help="stats JSON file")
    ps.add_argument("--trace", help="search trace file")
    ps.add_argument("--validate", action="store_true",
                    help="re-check the solution with the sampling validator")
    ps.set_defaults(func=cmd_solve)

    pb = sub.add_parser("batch", help="seeded parameter sweep")
    common(pb)
    pb.add_argument("--k", default="2", help="comma list of neighborhood levels")
    pb.add_argument("--map", help="movingai .map file")
    pb.add_argument("--open-grid", help="synthetic open grid, e.g. 10x10")
    pb.add_argument("--agents", required=True, help="comma list, e.g. 4,6,8")
    pb.add_argument("--heuristic", default="hybrid", help="comma list")
    pb.add_argument("--seeds", default="0:25", help="lo:hi range or comma list")
    pb.add_argument("--format", default="csv", choices=["csv", "json"])
    pb.add_argument("--out", help="write results here instead of stdout")
    pb.add_argument("--threshold", type=float, default=0.4,
                    help="success-rate threshold for the mean-SOC summary")
    pb.add_argument("--jobs", type=int, default=1, help="worker processes")
    pb.set_defaults(func=cmd_batch)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
