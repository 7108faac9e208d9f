"""Best-first constraint-tree search over continuous-time plans.

Each node owns one new constraint and a replanned agent; detection works on
action pairs gated by time overlap and an inflated bounding-box prefilter.
Branching uses the two unsafe intervals of the chosen conflict, which is a
sound pair: every optimal solution respects at least one side.
"""
from __future__ import annotations

import dataclasses
import heapq
import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from . import sipp
from .geometry import INF, Interval, TimedAction, action_segment, first_collision_time, unsafe_interval
from .map_graph import Agent, Graph, Instance
from .sipp import Constraint, Plan

HEURISTICS = ("vanilla", "past", "cardinals", "hybrid")

CARDINAL = "cardinal"
SEMI = "semi"
NON = "non"


@dataclass
class Conflict:
    i: int
    a_i: TimedAction
    t_i: float
    j: int
    a_j: TimedAction
    t_j: float
    onset: float
    cardinality: str = "unknown"

    def key(self) -> Tuple:
        return (self.i, self.j, self.a_i, self.t_i, self.a_j, self.t_j)


@dataclass
class SolverConfig:
    heuristic: str = "hybrid"
    timeout: float = 60.0
    delta: float = 0.1  # unsafe-interval sweep step
    bisect_tol: float = 1e-9
    cost_epsilon: float = 1e-6
    k: int = 2  # neighborhood level, carried for bookkeeping
    keep_trace: bool = False

    def __post_init__(self):
        if self.heuristic not in HEURISTICS:
            raise ValueError(f"heuristic must be one of {HEURISTICS}")
        if self.timeout <= 0 or self.delta <= 0:
            raise ValueError("timeout and delta must be positive")


@dataclass
class TraceNode:
    seq: int
    parent: Optional[int]
    cost: float
    constraint: Optional[Constraint]
    n_conflicts: int


@dataclass
class Stats:
    success: bool = False
    soc: float = math.nan
    makespan: float = math.nan
    hl_expanded: int = 0
    ll_calls: int = 0
    runtime: float = 0.0
    reason: str = ""
    trace: Optional[List[TraceNode]] = None
    pop_costs: Optional[List[float]] = None


@dataclass
class CTNode:
    seq: int
    parent: Optional["CTNode"]
    constraint: Optional[Constraint]
    plans: Tuple[Plan, ...]
    cost: float
    conflicts: List[Conflict]
    past_mode: bool = False
    cls_cache: Dict[Tuple, Tuple] = field(default_factory=dict)

    def constraints_for(self, agent: int) -> List[Constraint]:
        out = []
        node: Optional[CTNode] = self
        while node is not None:
            c = node.constraint
            if c is not None and c.agent == agent:
                out.append(c)
            node = node.parent
        return out


# ---------------------------------------------------------------------------
# conflict detection
# ---------------------------------------------------------------------------

class _PlanMotion:
    """Per-action motion segments and inflated boxes, terminal wait included."""

    __slots__ = ("actions", "segs", "boxes", "bbox")

    def __init__(self, plan: Plan, start_vertex: int, graph: Graph, radius: float):
        actions = list(plan.actions)
        rest = actions[-1].v if actions else start_vertex
        actions.append(TimedAction("wait", rest, rest, plan.cost, INF))
        self.actions = actions
        self.segs = []
        self.boxes = []
        gx = gy = INF
        hx = hy = -INF
        for a in actions:
            seg = action_segment(a, a.t_start, graph.xy)
            x0, y0 = seg.ox, seg.oy
            if a.kind == "move":
                x1, y1 = seg.position(seg.t_end)
            else:
                x1, y1 = x0, y0
            box = (
                min(x0, x1) - radius, min(y0, y1) - radius,
                max(x0, x1) + radius, max(y0, y1) + radius,
                a.t_start, a.t_end,
            )
            self.segs.append(seg)
            self.boxes.append(box)
            gx, gy = min(gx, box[0]), min(gy, box[1])
            hx, hy = max(hx, box[2]), max(hy, box[3])
        self.bbox = (gx, gy, hx, hy)


def _pair_conflicts(
    mi: _PlanMotion, mj: _PlanMotion, i: int, j: int, radius_sum: float,
    first_only: bool,
) -> List[Conflict]:
    out: List[Conflict] = []
    bi, bj = mi.bbox, mj.bbox
    if bi[0] > bj[2] or bj[0] > bi[2] or bi[1] > bj[3] or bj[1] > bi[3]:
        return out
    for ai, si, boxi in zip(mi.actions, mi.segs, mi.boxes):
        for aj, sj, boxj in zip(mj.actions, mj.segs, mj.boxes):
            if boxi[4] > boxj[5] or boxj[4] > boxi[5]:
                continue  # no time overlap
            if (boxi[0] > boxj[2] or boxj[0] > boxi[2]
                    or boxi[1] > boxj[3] or boxj[1] > boxi[3]):
                continue
            onset = first_collision_time(si, sj, radius_sum)
            if onset is None:
                continue
            t_i = onset if ai.kind == "wait" else ai.t_start
            t_j = onset if aj.kind == "wait" else aj.t_start
            out.append(Conflict(i, ai, t_i, j, aj, t_j, onset))
            if first_only:
                return out
    return out


def detect_conflicts(
    plans: Sequence[Plan],
    instance: Instance,
    mode: str = "all",
    pair_order: Optional[Sequence[Tuple[int, int]]] = None,
    _motion_cache: Optional[Dict[int, _PlanMotion]] = None,
    _pair_cache: Optional[Dict[Tuple[int, int, bool], List[Conflict]]] = None,
) -> List[Conflict]:
    """All conflicting action pairs, or the first one found under the given
    agent-pair priority order (mode="first_only")."""
    if mode not in ("all", "first_only"):
        raise ValueError(f"bad detection mode {mode!r}")
    first_only = mode == "first_only"
    n = len(plans)
    pairs = pair_order if pair_order is not None else [
        (i, j) for i in range(n) for j in range(i + 1, n)
    ]
    motions = _motion_cache if _motion_cache is not None else {}
    out: List[Conflict] = []
    for i, j in pairs:
        pi, pj = plans[i], plans[j]
        cache_key = (pi.serial, pj.serial, first_only)
        if _pair_cache is not None and cache_key in _pair_cache:
            found = _pair_cache[cache_key]
        else:
            for idx, p in ((i, pi), (j, pj)):
                if p.serial not in motions:
                    motions[p.serial] = _PlanMotion(
                        p, instance.agents[idx].start, instance.graph,
                        instance.agents[idx].radius,
                    )
            rsum = instance.agents[i].radius + instance.agents[j].radius
            found = _pair_conflicts(
                motions[pi.serial], motions[pj.serial], i, j, rsum, first_only
            )
            if _pair_cache is not None:
                _pair_cache[cache_key] = found
        if found:
            if first_only:
                return [found[0]]
            out.extend(found)
    return out


# ---------------------------------------------------------------------------
# solver
# ---------------------------------------------------------------------------

class _Search:
    def __init__(self, instance: Instance, config: SolverConfig):
        for pos, agent in enumerate(instance.agents):
            if agent.id != pos:
                raise ValueError("agent ids must match their position")
        self.instance = instance
        self.config = config
        self.graph = instance.graph
        self.heuristics: Dict[int, List[float]] = {}
        self.ll_calls = 0
        self.pair_counts: Dict[Tuple[int, int], int] = {}
        self.motion_cache: Dict[int, _PlanMotion] = {}
        self.pair_cache: Dict[Tuple[int, int, bool], List[Conflict]] = {}
        # identical replan subproblems recur across sibling nodes; plans are
        # immutable so sharing the objects is safe (and feeds the pair cache)
        self.plan_memo: Dict[Tuple[int, frozenset], Optional[Plan]] = {}
        self.interval_memo: Dict[Tuple, Interval] = {}
        self.seq = itertools.count()

    def heuristic(self, goal: int) -> List[float]:
        h = self.heuristics.get(goal)
        if h is None:
            h = sipp.precompute_heuristic(self.graph, goal)
            self.heuristics[goal] = h
        return h

    def low_level(self, agent: Agent, constraints: List[Constraint]) -> Optional[Plan]:
        key = (agent.id, frozenset(constraints))
        if key in self.plan_memo:
            return self.plan_memo[key]
        self.ll_calls += 1
        p = sipp.plan(self.graph, agent, constraints, self.heuristic(agent.goal))
        self.plan_memo[key] = p
        return p

    # -- detection ----------------------------------------------------------

    def detect(self, plans: Tuple[Plan, ...], past_mode: bool) -> List[Conflict]:
        heuristic = self.config.heuristic
        n = len(plans)
        all_pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        if heuristic == "vanilla":
            return detect_conflicts(
                plans, self.instance, "first_only", all_pairs,
                self.motion_cache, self.pair_cache,
            )
        if heuristic == "past" or (heuristic == "hybrid" and past_mode):
            order = sorted(
                all_pairs, key=lambda p: (-self.pair_counts.get(p, 0), p)
            )
            return detect_conflicts(
                plans, self.instance, "first_only", order,
                self.motion_cache, self.pair_cache,
            )
        return detect_conflicts(
            plans, self.instance, "all", all_pairs,
            self.motion_cache, self.pair_cache,
        )

    # -- branching ----------------------------------------------------------

    def constraint_for(self, conflict: Conflict, side: int) -> Constraint:
        if side == 0:
            agent, act, t = conflict.i, conflict.a_i, conflict.t_i
            other, ot = conflict.a_j, conflict.t_j
        else:
            agent, act, t = conflict.j, conflict.a_j, conflict.t_j
            other, ot = conflict.a_i, conflict.t_i
        rsum = self.instance.agents[conflict.i].radius + self.instance.agents[conflict.j].radius
        memo_key = (act, t, other, ot, rsum)
        interval = self.interval_memo.get(memo_key)
        if interval is None:
            interval = unsafe_interval(
                act, t, other, ot, self.graph.xy, rsum,
                delta=self.config.delta, tol=self.config.bisect_tol,
            )
            self.interval_memo[memo_key] = interval
        return Constraint(agent, act.kind, act.u, act.v, interval)

    def classify(self, node: CTNode, conflict: Conflict) -> str:
        key = conflict.key()
        hit = node.cls_cache.get(key)
        if hit is not None:
            return hit[4]
        eps = self.config.cost_epsilon
        sides = []
        rises = []
        for side, agent_idx in ((0, conflict.i), (1, conflict.j)):
            constraint = self.constraint_for(conflict, side)
            agent = self.instance.agents[agent_idx]
            constraints = node.constraints_for(agent_idx) + [constraint]
            new_plan = self.low_level(agent, constraints)
            new_cost = new_plan.cost if new_plan is not None else INF
            rises.append(new_cost > node.plans[agent_idx].cost + eps)
            sides.append((constraint, new_plan))
        cardinality = CARDINAL if all(rises) else (SEMI if any(rises) else NON)
        node.cls_cache[key] = (sides[0][0], sides[0][1], sides[1][0], sides[1][1], cardinality)
        return cardinality

    def select_conflict(self, node: CTNode) -> Tuple[Conflict, bool]:
        """Returns (conflict, children_past_mode)."""
        heuristic = self.config.heuristic
        conflicts = node.conflicts
        if heuristic in ("vanilla", "past") or (heuristic == "hybrid" and node.past_mode):
            return conflicts[0], node.past_mode
        chosen = None
        semi_seen = None
        for c in conflicts:
            card = self.classify(node, c)
            if card == CARDINAL:
                chosen = dataclasses.replace(c, cardinality=card)
                break
            if card == SEMI and semi_seen is None:
                semi_seen = c
        if chosen is not None:
            return chosen, node.past_mode
        if semi_seen is not None:
            return dataclasses.replace(semi_seen, cardinality=SEMI), node.past_mode
        # only non-cardinal conflicts here
        if heuristic == "hybrid":
            ordered = sorted(
                conflicts,
                key=lambda c: (-self.pair_counts.get((c.i, c.j), 0), c.i, c.j, c.t_i, c.t_j),
            )
            return dataclasses.replace(ordered[0], cardinality=NON), True
        return dataclasses.replace(conflicts[0], cardinality=NON), node.past_mode

    def expand(self, node: CTNode, conflict: Conflict, past_mode: bool) -> List[CTNode]:
        children = []
        cached = node.cls_cache.get(conflict.key())
        for side, agent_idx in ((0, conflict.i), (1, conflict.j)):
            if cached is not None:
                constraint, new_plan = cached[2 * side], cached[2 * side + 1]
            else:
                constraint = self.constraint_for(conflict, side)
                agent = self.instance.agents[agent_idx]
                constraints = node.constraints_for(agent_idx) + [constraint]
                new_plan = self.low_level(agent, constraints)
            if new_plan is None:
                continue
            plans = tuple(
                new_plan if idx == agent_idx else p for idx, p in enumerate(node.plans)
            )
            cost = sum(p.cost for p in plans)
            child = CTNode(
                seq=next(self.seq), parent=node, constraint=constraint,
                plans=plans, cost=cost,
                conflicts=self.detect(plans, past_mode), past_mode=past_mode,
            )
            children.append(child)
        return children


def solve(instance: Instance, config: Optional[SolverConfig] = None) -> Tuple[Optional[Tuple[Plan, ...]], Stats]:
    """Optimal conflict-free joint plan (sum-of-costs), or None with stats
    explaining why (timeout / infeasible)."""
    config = config or SolverConfig()
    t_start = time.perf_counter()
    search = _Search(instance, config)
    stats = Stats()
    if config.keep_trace:
        stats.trace = []
        stats.pop_costs = []

    root_plans: List[Plan] = []
    for agent in instance.agents:
        p = search.low_level(agent, [])
        if p is None:
            stats.reason = "infeasible"
            stats.ll_calls = search.ll_calls
            stats.runtime = time.perf_counter() - t_start
            return None, stats
        root_plans.append(p)
    root = CTNode(
        seq=next(search.seq), parent=None, constraint=None,
        plans=tuple(root_plans), cost=sum(p.cost for p in root_plans),
        conflicts=search.detect(tuple(root_plans), False),
    )
    if stats.trace is not None:
        stats.trace.append(TraceNode(root.seq, None, root.cost, None, len(root.conflicts)))

    open_heap: List[Tuple[float, int, int, CTNode]] = []
    heapq.heappush(open_heap, (root.cost, len(root.conflicts), -root.seq, root))

    while open_heap:
        if time.perf_counter() - t_start > config.timeout:
            stats.reason = "timeout"
            break
        _, _, _, node = heapq.heappop(open_heap)
        if stats.pop_costs is not None:
            stats.pop_costs.append(node.cost)
        if not node.conflicts:
            stats.success = True
            stats.soc = node.cost
            stats.makespan = max(p.cost for p in node.plans)
            stats.ll_calls = search.ll_calls
            stats.runtime = time.perf_counter() - t_start
            return node.plans, stats
        stats.hl_expanded += 1
        conflict, past_mode = search.select_conflict(node)
        pair = (conflict.i, conflict.j)
        search.pair_counts[pair] = search.pair_counts.get(pair, 0) + 1
        for child in search.expand(node, conflict, past_mode):
            if stats.trace is not None:
                stats.trace.append(TraceNode(
                    child.seq, node.seq, child.cost, child.constraint,
                    len(child.conflicts),
                ))
            heapq.heappush(
                open_heap, (child.cost, len(child.conflicts), -child.seq, child)
            )
    else:
        stats.reason = "exhausted"

    stats.ll_calls = search.ll_calls
    stats.runtime = time.perf_counter() - t_start
    return None, stats
