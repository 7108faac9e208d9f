"""Classical discrete CBS on the 4-connected grid.

Unit-duration moves and waits, timestep vertex/edge conflicts, standard
sum-of-costs convention (waits at the goal after the final arrival are
free). Used as the discrete comparison point for the continuous solver.
"""
from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from .map_graph import GridMap
from .solver import Stats

Cell = Tuple[int, int]  # (col, row)

_MOVES = ((0, 0), (1, 0), (-1, 0), (0, 1), (0, -1))


@dataclass(frozen=True)
class DiscretePlan:
    agent: int
    cells: Tuple[Cell, ...]  # positions at t = 0..cost

    @property
    def cost(self) -> int:
        return len(self.cells) - 1

    def at(self, t: int) -> Cell:
        return self.cells[t] if t < len(self.cells) else self.cells[-1]


def _low_level(
    grid: GridMap,
    start: Cell,
    goal: Cell,
    vertex_blocks: FrozenSet[Tuple[Cell, int]],
    edge_blocks: FrozenSet[Tuple[Cell, Cell, int]],
) -> Optional[DiscretePlan]:
    """Time-expanded A*; returns the cheapest path whose goal arrival is not
    invalidated by a later vertex constraint at the goal."""
    last_goal_block = max(
        (t for (cell, t) in vertex_blocks if cell == goal), default=-1
    )
    horizon = grid.width * grid.height + max(
        [last_goal_block] + [t for (_, t) in vertex_blocks] +
        [t for (_, _, t) in edge_blocks] or [0]
    ) + 2

    def h(c: Cell) -> int:
        return abs(c[0] - goal[0]) + abs(c[1] - goal[1])

    counter = itertools.count()
    open_heap = [(h(start), 0, next(counter), start)]
    parent: Dict[Tuple[Cell, int], Tuple[Cell, int]] = {}
    seen: Set[Tuple[Cell, int]] = {(start, 0)}
    while open_heap:
        f, t, _, cell = heapq.heappop(open_heap)
        if cell == goal and t > last_goal_block:
            cells = [cell]
            key = (cell, t)
            while key in parent:
                pkey = parent[key]
                cells.append(pkey[0])
                key = pkey
            cells.reverse()
            return DiscretePlan(agent=-1, cells=tuple(cells))
        if t >= horizon:
            continue
        for dx, dy in _MOVES:
            nxt = (cell[0] + dx, cell[1] + dy)
            if grid.is_blocked(*nxt):
                continue
            if (nxt, t + 1) in vertex_blocks:
                continue
            if (cell, nxt, t) in edge_blocks:
                continue
            key = (nxt, t + 1)
            if key in seen:
                continue
            seen.add(key)
            parent[key] = (cell, t)
            heapq.heappush(open_heap, (t + 1 + h(nxt), t + 1, next(counter), nxt))
    return None


def _first_conflict(plans: Sequence[DiscretePlan]):
    """(kind, i, j, data, t) for the chronologically first conflict, or None."""
    horizon = max(p.cost for p in plans)
    n = len(plans)
    for t in range(horizon + 1):
        for i in range(n):
            for j in range(i + 1, n):
                if plans[i].at(t) == plans[j].at(t):
                    return ("vertex", i, j, plans[i].at(t), t)
        for i in range(n):
            for j in range(i + 1, n):
                if (t < horizon and plans[i].at(t) == plans[j].at(t + 1)
                        and plans[i].at(t + 1) == plans[j].at(t)):
                    return ("edge", i, j, (plans[i].at(t), plans[i].at(t + 1)), t)
    return None


def cbs_solve(
    grid: GridMap,
    agents: Sequence[Tuple[Cell, Cell]],
    timeout: float = 60.0,
) -> Tuple[Optional[Tuple[DiscretePlan, ...]], Stats]:
    """Optimal discrete joint plan via vertex constraints <i, v, t> and edge
    constraints <i, u->v, t>."""
    t_start = time.perf_counter()
    stats = Stats()
    n = len(agents)

    def replan(idx: int, vblocks, eblocks) -> Optional[DiscretePlan]:
        stats.ll_calls += 1
        p = _low_level(grid, agents[idx][0], agents[idx][1],
                       frozenset(vblocks), frozenset(eblocks))
        if p is None:
            return None
        return DiscretePlan(agent=idx, cells=p.cells)

    root_plans: List[DiscretePlan] = []
    for idx in range(n):
        p = replan(idx, (), ())
        if p is None:
            stats.reason = "infeasible"
            stats.runtime = time.perf_counter() - t_start
            return None, stats
        root_plans.append(p)

    counter = itertools.count()
    # node: (cost, seq, plans, per-agent vertex blocks, per-agent edge blocks)
    root = (
        sum(p.cost for p in root_plans), next(counter), tuple(root_plans),
        tuple(frozenset() for _ in range(n)), tuple(frozenset() for _ in range(n)),
    )
    open_heap = [root]
    while open_heap:
        if time.perf_counter() - t_start > timeout:
            stats.reason = "timeout"
            break
        cost, _, plans, vblocks, eblocks = heapq.heappop(open_heap)
        conflict = _first_conflict(plans)
        if conflict is None:
            stats.success = True
            stats.soc = float(cost)
            stats.makespan = float(max(p.cost for p in plans))
            stats.runtime = time.perf_counter() - t_start
            return plans, stats
        stats.hl_expanded += 1
        kind, i, j, data, t = conflict
        for idx in (i, j):
            new_v = set(vblocks[idx])
            new_e = set(eblocks[idx])
            if kind == "vertex":
                new_v.add((data, t))
            else:
                u, v = data
                if idx == i:
                    new_e.add((u, v, t))
                else:
                    new_e.add((v, u, t))
            p = replan(idx, new_v, new_e)
            if p is None:
                continue
            plans2 = tuple(p if x == idx else q for x, q in enumerate(plans))
            vb2 = tuple(frozenset(new_v) if x == idx else b for x, b in enumerate(vblocks))
            eb2 = tuple(frozenset(new_e) if x == idx else b for x, b in enumerate(eblocks))
            heapq.heappush(
                open_heap,
                (sum(q.cost for q in plans2), next(counter), plans2, vb2, eb2),
            )
    else:
        stats.reason = "exhausted"
    stats.runtime = time.perf_counter() - t_start
    return None, stats
