"""Continuous-time multi-agent pathfinding: optimal conflict-based search
with disk agents, a safe-interval low-level planner, a discrete CBS
baseline, an independent validator and a benchmark CLI."""

from .geometry import (
    Interval, MotionSegment, Point2, TimedAction,
    actions_conflict, first_collision_time, unsafe_interval,
)
from .map_graph import (
    DEFAULT_RADIUS, Agent, Graph, GridMap, Instance, ParseError,
    build_graph, edge_valid, generate_scenario, load_roadmap,
    neighborhood_offsets, open_grid, parse_map, parse_scen,
)
from .sipp import Constraint, Plan, SafeIntervalTable, precompute_heuristic
from .sipp import plan as sipp_plan
from .solver import Conflict, SolverConfig, Stats, detect_conflicts, solve
from .baseline_cbs import DiscretePlan, cbs_solve
from .validator import ValidationReport, Violation, validate

__all__ = [
    "Agent", "Conflict", "Constraint", "DEFAULT_RADIUS", "DiscretePlan",
    "Graph", "GridMap", "Instance", "Interval", "MotionSegment", "ParseError",
    "Plan", "Point2", "SafeIntervalTable", "SolverConfig", "Stats",
    "TimedAction", "ValidationReport", "Violation", "actions_conflict",
    "build_graph", "cbs_solve", "detect_conflicts", "edge_valid",
    "first_collision_time", "generate_scenario", "load_roadmap",
    "neighborhood_offsets", "open_grid", "parse_map", "parse_scen",
    "precompute_heuristic", "sipp_plan", "solve", "unsafe_interval",
    "validate",
]
