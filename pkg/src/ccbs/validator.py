"""Independent solution checker.

Verifies structural properties exactly (start/goal, contiguity, graph
membership) and pairwise clearance by dense time sampling. Deliberately
does not reuse the solver's closed-form collision code: positions are
evaluated directly from the plan text and compared sample by sample.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .map_graph import Instance
from .sipp import Plan

CONTINUITY_TOL = 1e-9


@dataclass(frozen=True)
class Violation:
    kind: str  # start | goal | discontinuity | edge | clearance
    agents: Tuple[int, ...]
    time: float
    detail: str

    def line(self) -> str:
        who = ",".join(str(a) for a in self.agents)
        return f"{self.kind} agents={who} t={self.time:.6f} {self.detail}"


@dataclass
class ValidationReport:
    violations: List[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_text(self) -> str:
        if self.ok:
            return "valid\n"
        return "\n".join(v.line() for v in self.violations) + "\n"


def _structural(instance: Instance, plan: Plan, out: List[Violation]) -> None:
    agent = instance.agents[plan.agent]
    graph = instance.graph
    if not plan.actions:
        if agent.start != agent.goal:
            out.append(Violation("goal", (plan.agent,), 0.0,
                                 "empty plan but start != goal"))
        return
    first = plan.actions[0]
    if first.u != agent.start or abs(first.t_start) > CONTINUITY_TOL:
        out.append(Violation("start", (plan.agent,), first.t_start,
                             f"plan starts at vertex {first.u} t={first.t_start}"))
    last = plan.actions[-1]
    if last.v != agent.goal:
        out.append(Violation("goal", (plan.agent,), last.t_end,
                             f"plan ends at vertex {last.v}, goal is {agent.goal}"))
    if abs(last.t_end - plan.cost) > CONTINUITY_TOL:
        out.append(Violation("goal", (plan.agent,), last.t_end,
                             f"cost {plan.cost} != final time {last.t_end}"))
    prev = None
    for act in plan.actions:
        if act.kind == "wait":
            if act.u != act.v:
                out.append(Violation("edge", (plan.agent,), act.t_start,
                                     f"wait with u != v: {act}"))
        else:
            if not graph.has_edge(act.u, act.v):
                out.append(Violation("edge", (plan.agent,), act.t_start,
                                     f"move on missing edge {act.u}->{act.v}"))
            else:
                want = graph.edge_length(act.u, act.v) / agent.speed
                if abs(act.duration - want) > 1e-6:
                    out.append(Violation("edge", (plan.agent,), act.t_start,
                                         f"duration {act.duration} != {want}"))
        if prev is not None:
            if abs(prev.t_end - act.t_start) > CONTINUITY_TOL:
                out.append(Violation("discontinuity", (plan.agent,), act.t_start,
                                     f"time gap {prev.t_end} -> {act.t_start}"))
            if prev.v != act.u:
                out.append(Violation("discontinuity", (plan.agent,), act.t_start,
                                     f"teleport {prev.v} -> {act.u}"))
        prev = act


def _sampled_positions(instance: Instance, plan: Plan, ts: np.ndarray) -> np.ndarray:
    """(len(ts), 2) positions; agents park at their final vertex forever."""
    graph = instance.graph
    agent = instance.agents[plan.agent]
    rows = []
    for act in plan.actions:
        x0, y0 = graph.point(act.u)
        x1, y1 = graph.point(act.v)
        dur = act.duration
        rows.append((act.t_start, x0, y0, (x1 - x0) / dur, (y1 - y0) / dur))
    rest = agent.goal if not plan.actions else plan.actions[-1].v
    rx, ry = graph.point(rest)
    rows.append((plan.cost, rx, ry, 0.0, 0.0))
    arr = np.asarray(rows)
    starts = arr[:, 0]
    idx = np.clip(np.searchsorted(starts, ts, side="right") - 1, 0, len(rows) - 1)
    # clamp each sample into its action's span so waits/parks stay put
    t0 = starts[idx]
    span = np.append(np.diff(starts), math.inf)[idx]
    local = np.clip(ts - t0, 0.0, span)
    x = arr[idx, 1] + arr[idx, 3] * local
    y = arr[idx, 2] + arr[idx, 4] * local
    return np.stack([x, y], axis=1)


def validate(
    instance: Instance,
    plans: Sequence[Plan],
    dt: float = 1e-3,
    slack: float = 1e-6,
) -> ValidationReport:
    """Zero violations means the joint plan is well-formed and no sampled
    instant puts two agents closer than the sum of radii minus slack."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    report = ValidationReport()
    by_agent = {p.agent: p for p in plans}
    if sorted(by_agent) != list(range(len(instance.agents))):
        raise ValueError("plans must cover exactly the instance agents")
    for agent in instance.agents:
        _structural(instance, by_agent[agent.id], report.violations)

    horizon = max((p.cost for p in plans), default=0.0)
    if horizon <= 0:
        horizon = dt
    ts = np.arange(0.0, horizon + dt, dt)
    pos = [_sampled_positions(instance, by_agent[a.id], ts) for a in instance.agents]

    n = len(instance.agents)
    for i in range(n):
        for j in range(i + 1, n):
            need = instance.agents[i].radius + instance.agents[j].radius - slack
            d = np.hypot(pos[i][:, 0] - pos[j][:, 0], pos[i][:, 1] - pos[j][:, 1])
            bad = d < need
            if not bad.any():
                continue
            # one violation per contiguous violating run
            edges = np.flatnonzero(np.diff(np.concatenate(([False], bad)).astype(int)) == 1)
            for s in edges:
                report.violations.append(Violation(
                    "clearance", (i, j), float(ts[s]),
                    f"distance {float(d[s]):.6f} < {need:.6f}",
                ))
    return report
