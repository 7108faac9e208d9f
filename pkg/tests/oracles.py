"""Brute-force reference computations the tests check the solvers against.

Nothing here reuses the solver's search or interval machinery: the
single-agent oracle is a time-expanded Dijkstra on a fine tick lattice and
the two-agent oracle exhaustively schedules walk pairs on a progress
diagram. Both are slow on purpose.
"""
from __future__ import annotations

import heapq
import itertools
import math
from collections import defaultdict
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ccbs.map_graph import Agent, Graph
from ccbs.sipp import Constraint

INF = math.inf


# ---------------------------------------------------------------------------
# dense sampling collision check (independent of the closed form)
# ---------------------------------------------------------------------------

def sampled_collision(seg_i, seg_j, radius_sum: float, dt: float = 1e-5) -> Optional[float]:
    """First sampled time with center distance < radius_sum, else None."""
    t0 = max(seg_i.t_start, seg_j.t_start)
    t1 = min(seg_i.t_end, seg_j.t_end)
    if t1 <= t0 or math.isinf(t0):
        return None
    if math.isinf(t1):
        t1 = t0 + 50.0  # long enough for any test geometry
    ts = np.arange(t0, t1 + dt, dt)
    xi = seg_i.ox + seg_i.vx * (ts - seg_i.t_start)
    yi = seg_i.oy + seg_i.vy * (ts - seg_i.t_start)
    xj = seg_j.ox + seg_j.vx * (ts - seg_j.t_start)
    yj = seg_j.oy + seg_j.vy * (ts - seg_j.t_start)
    d2 = (xi - xj) ** 2 + (yi - yj) ** 2
    hits = np.flatnonzero(d2 < radius_sum * radius_sum)
    if len(hits) == 0:
        return None
    return float(ts[hits[0]])


# ---------------------------------------------------------------------------
# single-agent time-expanded oracle
# ---------------------------------------------------------------------------

def _ticks(value: float, tick: float) -> int:
    t = round(value / tick)
    assert abs(t * tick - value) < 1e-9, f"{value} not aligned to tick {tick}"
    return t


def single_agent_optimal(
    graph: Graph,
    agent: Agent,
    constraints: Sequence[Constraint] = (),
    tick: float = 1e-3,
    slack_horizon: float = 4.0,
) -> Optional[float]:
    """Optimal constrained arrival time via Dijkstra over (vertex, tick).

    Edge durations and constraint endpoints must sit on the tick lattice.
    Wait constraints forbid presence strictly inside their window and any
    one-tick wait overlapping its interior; move constraints forbid
    departure ticks in [lo, hi).
    """
    durations: Dict[Tuple[int, int], int] = {}
    for u in range(len(graph)):
        for v, length in graph.adj[u]:
            durations[(u, v)] = _ticks(length / agent.speed, tick)

    wait_windows: Dict[int, List[Tuple[int, float]]] = defaultdict(list)
    move_windows: Dict[Tuple[int, int], List[Tuple[int, float]]] = defaultdict(list)
    max_hi = 0.0
    for c in constraints:
        assert c.agent == agent.id
        lo = _ticks(c.interval.lo, tick)
        hi = c.interval.hi / tick if math.isfinite(c.interval.hi) else INF
        if math.isfinite(hi):
            hi = round(hi)
            max_hi = max(max_hi, hi * tick)
        if c.kind == "wait":
            wait_windows[c.u].append((lo, hi))
        else:
            move_windows[(c.u, c.v)].append((lo, hi))

    # rough unconstrained distance for the horizon
    base = _dijkstra_len(graph, agent.start, agent.goal)
    if base is None:
        return None
    horizon = _ticks(round((base / agent.speed + max_hi + slack_horizon) / tick) * tick, tick)

    def presence_ok(v: int, t: int) -> bool:
        for lo, hi in wait_windows.get(v, ()):
            if lo < t < hi:
                return False
        return True

    def wait_ok(v: int, t: int) -> bool:
        for lo, hi in wait_windows.get(v, ()):
            if t + 1 > lo and t < hi:
                return False
        return True

    def depart_ok(u: int, v: int, t: int) -> bool:
        for lo, hi in move_windows.get((u, v), ()):
            if lo <= t < hi:
                return False
        return True

    def goal_ok(t: int) -> bool:
        return all(math.isfinite(hi) and t >= hi for lo, hi in wait_windows.get(agent.goal, ())) \
            if wait_windows.get(agent.goal) else True

    dist: Dict[Tuple[int, int], int] = {(agent.start, 0): 0}
    heap: List[Tuple[int, int, int]] = [(0, agent.start, 0)]
    while heap:
        t, v, _ = heapq.heappop(heap)
        if t > dist.get((v, t), INF):
            continue
        if v == agent.goal and goal_ok(t):
            return t * tick
        if t >= horizon:
            continue
        if wait_ok(v, t):
            key = (v, t + 1)
            if t + 1 < dist.get(key, INF):
                dist[key] = t + 1
                heapq.heappush(heap, (t + 1, v, 0))
        for w, _length in graph.adj[v]:
            d = durations[(v, w)]
            ta = t + d
            if ta > horizon or not depart_ok(v, w, t) or not presence_ok(w, ta):
                continue
            key = (w, ta)
            if ta < dist.get(key, INF):
                dist[key] = ta
                heapq.heappush(heap, (ta, w, 0))
    return None


def _dijkstra_len(graph: Graph, s: int, g: int) -> Optional[float]:
    dist = {s: 0.0}
    heap = [(0.0, s)]
    while heap:
        d, u = heapq.heappop(heap)
        if u == g:
            return d
        if d > dist.get(u, INF):
            continue
        for v, length in graph.adj[u]:
            nd = d + length
            if nd < dist.get(v, INF):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return None


# ---------------------------------------------------------------------------
# exhaustive two-agent oracle (unit-edge graphs)
# ---------------------------------------------------------------------------

def _hops(graph: Graph, source: int) -> List[float]:
    hops = [INF] * len(graph)
    hops[source] = 0
    queue = [source]
    while queue:
        nxt = []
        for u in queue:
            for v, _ in graph.adj[u]:
                if hops[v] == INF:
                    hops[v] = hops[u] + 1
                    nxt.append(v)
        queue = nxt
    return hops


def _walks(graph: Graph, s: int, g: int, max_len: int) -> Dict[int, List[Tuple[int, ...]]]:
    """All walks (vertex repeats allowed) from s to g with <= max_len edges."""
    hops = _hops(graph, g)
    out: Dict[int, List[Tuple[int, ...]]] = defaultdict(list)
    path = [s]

    def rec(v: int) -> None:
        d = len(path) - 1
        if v == g:
            out[d].append(tuple(path))
        for w, _ in graph.adj[v]:
            if hops[w] <= max_len - d - 1:
                path.append(w)
                rec(w)
                path.pop()

    if hops[s] <= max_len:
        rec(s)
    return out


class _WalkGeometry:
    """Sampled positions along a walk of unit edges, eta per tick."""

    def __init__(self, graph: Graph, walk: Tuple[int, ...], m: int):
        pts = [graph.point(v) for v in walk]
        if len(pts) == 1:
            self.pos = np.asarray(pts, dtype=float)
        else:
            chunks = []
            for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
                frac = np.arange(m, dtype=float)[:, None] / m
                chunks.append(np.asarray([x0, y0]) + frac * np.asarray([x1 - x0, y1 - y0]))
            chunks.append(np.asarray([pts[-1]], dtype=float))
            self.pos = np.concatenate(chunks)
        self.n = len(self.pos) - 1


def _pair_min_soc(P1: np.ndarray, P2: np.ndarray, rsum: float, eta: float, m: int,
                  upper: float) -> float:
    """Exact minimal SOC for two fixed walks with lattice waits at vertices."""
    n1 = len(P1) - 1
    n2 = len(P2) - 1
    rs2 = rsum * rsum - 1e-12

    # zero-wait shortcut: advance together, earlier finisher parks
    k = min(n1, n2)
    d2 = ((P1[:k + 1] - P2[:k + 1]) ** 2).sum(axis=1)
    clear = bool((d2 >= rs2).all())
    if clear and n1 != n2:
        if n1 < n2:
            tail = ((P1[n1] - P2[k:]) ** 2).sum(axis=1)
        else:
            tail = ((P2[n2] - P1[k:]) ** 2).sum(axis=1)
        clear = bool((tail >= rs2).all())
    if clear:
        return (n1 + n2) * eta

    diff = P1[:, None, :] - P2[None, :, :]
    B = (diff[:, :, 0] ** 2 + diff[:, :, 1] ** 2) < rs2
    if B[0, 0] or B[n1, n2]:
        return INF
    C = np.zeros((n1 + 1, n2 + 1), dtype=np.int32)
    C[0, :] = B[0, :]
    C[:, 0] = B[:, 0]
    for i in range(1, n1 + 1):
        C[i, 1:] = B[i, 1:] + C[i - 1, :-1]

    lines1 = set(range(0, n1 + 1, m)) | {n1}
    lines2 = set(range(0, n2 + 1, m)) | {n2}
    nodes = set()
    for i in lines1:
        for j in range(n2 + 1):
            nodes.add((i, j))
    for j in lines2:
        for i in range(n1 + 1):
            nodes.add((i, j))
    order = sorted(nodes, key=lambda ij: (ij[0] + ij[1], ij[0]))
    dist: Dict[Tuple[int, int], float] = {(0, 0): 0.0}
    Bv = B  # local alias
    for node in order:
        d = dist.get(node)
        if d is None or d >= upper:
            continue
        i, j = node
        u1 = i < n1
        u2 = j < n2
        if u2 and (i in lines1):
            if not Bv[i, j + 1]:
                nd = d + eta * (1 + (1 if u1 else 0))
                key = (i, j + 1)
                if nd < dist.get(key, INF):
                    dist[key] = nd
        if u1 and (j in lines2):
            if not Bv[i + 1, j]:
                nd = d + eta * (1 + (1 if u2 else 0))
                key = (i + 1, j)
                if nd < dist.get(key, INF):
                    dist[key] = nd
        if u1 and u2:
            nxt1 = min(((i // m) + 1) * m, n1)
            nxt2 = min(((j // m) + 1) * m, n2)
            L = min(nxt1 - i, nxt2 - j)
            if C[i + L, j + L] - C[i, j] == 0:
                nd = d + eta * 2 * L
                key = (i + L, j + L)
                if nd < dist.get(key, INF):
                    dist[key] = nd
    return dist.get((n1, n2), INF)


def joint_soc_2agents(
    graph: Graph,
    starts: Tuple[int, int],
    goals: Tuple[int, int],
    radius: float,
    eta: float = 0.01,
    max_extra: int = 2,
) -> Optional[float]:
    """Exhaustive optimal SOC for two unit-speed agents on a unit-edge graph,
    waits restricted to the eta lattice at vertices."""
    for u in range(len(graph)):
        for _v, length in graph.adj[u]:
            assert abs(length - 1.0) < 1e-12, "oracle needs unit edges"
    m = round(1.0 / eta)
    rsum = 2.0 * radius

    L1 = _hops(graph, goals[0])[starts[0]]
    L2 = _hops(graph, goals[1])[starts[1]]
    if math.isinf(L1) or math.isinf(L2):
        return None
    L1, L2 = int(L1), int(L2)

    extra = max_extra
    while True:
        walks1 = _walks(graph, starts[0], goals[0], L1 + extra)
        walks2 = _walks(graph, starts[1], goals[1], L2 + extra)
        geo1 = {}
        geo2 = {}
        best = INF
        for total in range(L1 + L2, L1 + L2 + extra + 1):
            if total >= best:
                break
            for len1 in range(L1, total - L2 + 1):
                len2 = total - len1
                for w1 in walks1.get(len1, ()):
                    g1 = geo1.get(w1)
                    if g1 is None:
                        g1 = geo1[w1] = _WalkGeometry(graph, w1, m)
                    for w2 in walks2.get(len2, ()):
                        g2 = geo2.get(w2)
                        if g2 is None:
                            g2 = geo2[w2] = _WalkGeometry(graph, w2, m)
                        soc = _pair_min_soc(g1.pos, g2.pos, rsum, eta, m, best)
                        if soc < best:
                            best = soc
        if math.isfinite(best) and best < L1 + L2 + extra - 1e-9:
            return best
        if extra >= 6:
            return best if math.isfinite(best) else None
        extra += 2
