"""Safe-interval path planning over (vertex, safe interval) states.

Wait prohibitions carve the per-vertex safe intervals; move prohibitions
forbid departure times on a directed edge. Both interval kinds are
half-open [lo, hi): departing or arriving exactly at an endpoint is legal,
which is why splitting [0, inf) by [3, 4) leaves [0, 3] and [4, inf).
"""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .geometry import EPS, INF, Interval, TimedAction
from .map_graph import Agent, Graph

_plan_serial = itertools.count()


@dataclass(frozen=True)
class Constraint:
    """Prohibition on one agent: starting `kind` over (u, v) during interval.

    Move constraints block departure times on the directed edge u->v; wait
    constraints (u == v) block presence at u during the interval interior.
    """

    agent: int
    kind: str
    u: int
    v: int
    interval: Interval

    def __post_init__(self):
        if self.kind not in ("move", "wait"):
            raise ValueError(f"bad constraint kind {self.kind!r}")
        if self.kind == "wait" and self.u != self.v:
            raise ValueError("wait constraints need u == v")
        if not self.interval.lo < self.interval.hi:
            raise ValueError("constraint interval must be non-empty")


@dataclass
class Plan:
    agent: int
    actions: Tuple[TimedAction, ...]
    cost: float  # goal arrival time
    serial: int = field(default_factory=lambda: next(_plan_serial))

    @property
    def makespan(self) -> float:
        return self.cost

    def position_of_rest(self) -> int:
        """Vertex occupied forever once the plan is done."""
        return self.actions[-1].v if self.actions else -1


class SafeIntervalTable:
    """Per-vertex sorted disjoint closed intervals, initially [0, inf)."""

    def __init__(self):
        self._table: Dict[int, List[Tuple[float, float]]] = {}

    def intervals(self, v: int) -> List[Tuple[float, float]]:
        return self._table.get(v, [(0.0, INF)])

    def split(self, v: int, forbidden: Interval) -> None:
        """Remove the interior of [lo, hi) from v's safe time; the left piece
        stays closed at lo (a move may still start there), the right piece
        begins at hi."""
        out: List[Tuple[float, float]] = []
        for lo, hi in self.intervals(v):
            if forbidden.hi <= lo or forbidden.lo >= hi:
                out.append((lo, hi))
                continue
            if forbidden.lo >= lo:
                out.append((lo, forbidden.lo))
            if forbidden.hi <= hi:
                out.append((forbidden.hi, hi))
        self._table[v] = [iv for iv in out if iv[0] <= iv[1]]

    def interval_containing(self, v: int, t: float) -> Optional[int]:
        for idx, (lo, hi) in enumerate(self.intervals(v)):
            if lo <= t <= hi:
                return idx
        return None


def split_safe_intervals(table: SafeIntervalTable, constraint: Constraint) -> SafeIntervalTable:
    if constraint.kind != "wait":
        raise ValueError("only wait constraints split safe intervals")
    table.split(constraint.u, constraint.interval)
    return table


def merge_intervals(intervals: Iterable[Interval]) -> List[Tuple[float, float]]:
    """Sorted disjoint union of half-open intervals."""
    items = sorted((iv.lo, iv.hi) for iv in intervals)
    merged: List[Tuple[float, float]] = []
    for lo, hi in items:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def earliest_departure(
    ready: float,
    hold_until: float,
    travel_time: float,
    blocked: Sequence[Tuple[float, float]],
    target_intervals: Sequence[Tuple[float, float]],
) -> Optional[Tuple[float, float, int]]:
    """Smallest departure t >= ready with t <= hold_until, t outside every
    blocked [lo, hi), and t + travel_time landing inside a target interval.
    Returns (depart, arrive, target_index)."""
    best = None
    for idx, (tlo, thi) in enumerate(target_intervals):
        depart = max(ready, tlo - travel_time)
        depart = _bump(depart, blocked)
        if depart > hold_until + EPS:
            continue
        arrive = depart + travel_time
        if arrive > thi + EPS:
            continue
        if best is None or depart < best[0]:
            best = (depart, arrive, idx)
    return best


def _bump(t: float, blocked: Sequence[Tuple[float, float]]) -> float:
    for lo, hi in blocked:  # sorted, disjoint
        if t < lo:
            break
        if lo <= t < hi:
            t = hi
    return t


def precompute_heuristic(graph: Graph, goal: int) -> List[float]:
    """Exact shortest-path distance to goal (admissible and consistent for
    the timed search since waiting only adds cost)."""
    dist = [INF] * len(graph)
    dist[goal] = 0.0
    heap = [(0.0, goal)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, length in graph.adj[u]:
            nd = d + length
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def plan(
    graph: Graph,
    agent: Agent,
    constraints: Iterable[Constraint] = (),
    heuristic: Optional[Sequence[float]] = None,
) -> Optional[Plan]:
    """Minimum-cost plan from agent.start (at t=0) to agent.goal honoring the
    agent's constraints, or None. The plan ends inside a goal safe interval
    that extends to +inf, so parking there forever is legal with respect to
    every wait constraint."""
    table = SafeIntervalTable()
    move_blocks: Dict[Tuple[int, int], List[Interval]] = {}
    for c in constraints:
        if c.agent != agent.id:
            raise ValueError(f"constraint for agent {c.agent} given to {agent.id}")
        if c.kind == "wait":
            table.split(c.u, c.interval)
        else:
            move_blocks.setdefault((c.u, c.v), []).append(c.interval)
    blocks = {edge: merge_intervals(ivs) for edge, ivs in move_blocks.items()}

    h = heuristic if heuristic is not None else precompute_heuristic(graph, agent.goal)
    if not math.isfinite(h[agent.start]):
        return None
    inv_speed = 1.0 / agent.speed

    start_idx = table.interval_containing(agent.start, 0.0)
    if start_idx is None:
        return None

    goal = agent.goal
    adj = graph.adj
    ivs_of = table.intervals
    blocks_get = blocks.get
    # state: (vertex, safe-interval index) keeping earliest arrival only
    best: Dict[Tuple[int, int], float] = {(agent.start, start_idx): 0.0}
    best_get = best.get
    parent: Dict[Tuple[int, int], Tuple[Optional[Tuple[int, int]], float]] = {
        (agent.start, start_idx): (None, 0.0)
    }
    push = heapq.heappush
    tie = itertools.count()
    f0 = h[agent.start] * inv_speed
    heap = [(f0, 0.0, next(tie), agent.start, start_idx)]

    goal_state = None
    while heap:
        f, neg_g, _, v, idx = heapq.heappop(heap)
        g = -neg_g
        if g > best_get((v, idx), INF):
            continue
        iv_hi = ivs_of(v)[idx][1]
        if v == goal and iv_hi == INF:
            goal_state = (v, idx)
            break
        hold = iv_hi + EPS
        for w, length in adj[v]:
            dur = length * inv_speed
            edge_blocks = blocks_get((v, w))
            hw = h[w] * inv_speed
            for widx2, (wlo, whi) in enumerate(ivs_of(w)):
                d2 = wlo - dur
                if d2 > hold:
                    break  # later intervals start even higher
                if d2 < g:
                    d2 = g
                if edge_blocks is not None:
                    for blo, bhi in edge_blocks:
                        if d2 < blo:
                            break
                        if d2 < bhi:
                            d2 = bhi
                    if d2 > hold:
                        continue
                a2 = d2 + dur
                if a2 > whi + EPS:
                    continue
                key = (w, widx2)
                if a2 < best_get(key, INF) - EPS:
                    best[key] = a2
                    parent[key] = ((v, idx), d2)
                    push(heap, (a2 + hw, -a2, next(tie), w, widx2))
    if goal_state is None:
        return None

    actions: List[TimedAction] = []
    key = goal_state
    while True:
        prev, depart = parent[key]
        if prev is None:
            break
        pv, pidx = prev
        arrive = best[key]
        ready = best[prev] + 0.0  # normalize -0.0
        depart += 0.0
        # building backwards: move first, wait second, reversed at the end
        actions.append(TimedAction("move", pv, key[0], depart, arrive - depart))
        if depart > ready:
            actions.append(TimedAction("wait", pv, pv, ready, depart - ready))
        key = prev
    actions.reverse()
    return Plan(agent=agent.id, actions=tuple(actions), cost=best[goal_state])
