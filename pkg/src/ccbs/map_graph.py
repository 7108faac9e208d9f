"""Benchmark inputs: grid maps, scenario files, 2^k neighborhood graphs,
explicit roadmaps and random instance generation.

Grid cells are 1x1 with cell (col, row) centered at (col + 0.5, row + 0.5).
Blocked cells and the map border are solid; an edge between cell centers is
usable only if the swept disk clears every blocked square strictly.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .geometry import Point2

SQRT2 = math.sqrt(2.0)
DEFAULT_RADIUS = SQRT2 / 4.0

PASSABLE_CHARS = {".", "G"}
BLOCKED_CHARS = {"@", "O", "T"}


class ParseError(ValueError):
    """Malformed input text; carries a 1-based line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class GridMap:
    width: int
    height: int
    blocked: Tuple[bool, ...]  # row-major, length width * height

    def is_blocked(self, col: int, row: int) -> bool:
        if not (0 <= col < self.width and 0 <= row < self.height):
            return True  # border counts as solid
        return self.blocked[row * self.width + col]

    def cell_center(self, col: int, row: int) -> Tuple[float, float]:
        return (col + 0.5, row + 0.5)

    @property
    def n_blocked(self) -> int:
        return sum(self.blocked)


class Graph:
    """Immutable embedded graph: vertex coordinates plus symmetric weighted
    adjacency. Vertex ids are dense ints."""

    def __init__(self, points: Sequence[Tuple[float, float]]):
        self.xy: List[Tuple[float, float]] = [(float(x), float(y)) for x, y in points]
        self.adj: List[List[Tuple[int, float]]] = [[] for _ in self.xy]
        self._edges: Set[Tuple[int, int]] = set()

    def __len__(self) -> int:
        return len(self.xy)

    def point(self, v: int) -> Tuple[float, float]:
        return self.xy[v]

    def add_edge(self, u: int, v: int) -> None:
        if u == v:
            raise ValueError("self loops not allowed")
        key = (min(u, v), max(u, v))
        if key in self._edges:
            return
        length = math.dist(self.xy[u], self.xy[v])
        if length <= 0:
            raise ValueError(f"zero-length edge {u}-{v}")
        self._edges.add(key)
        self.adj[u].append((v, length))
        self.adj[v].append((u, length))

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self._edges

    def edge_length(self, u: int, v: int) -> float:
        for w, length in self.adj[u]:
            if w == v:
                return length
        raise ValueError(f"no edge {u}-{v}")

    @property
    def n_edges(self) -> int:
        return len(self._edges)

    def neighbors(self, v: int) -> List[Tuple[int, float]]:
        return self.adj[v]


@dataclass(frozen=True)
class Agent:
    id: int
    start: int
    goal: int
    radius: float = DEFAULT_RADIUS
    speed: float = 1.0

    def __post_init__(self):
        if self.radius <= 0 or self.speed <= 0:
            raise ValueError("agent radius and speed must be positive")


@dataclass(frozen=True)
class Instance:
    graph: Graph
    agents: Tuple[Agent, ...]

    def __post_init__(self):
        n = len(self.graph)
        for a in self.agents:
            if not (0 <= a.start < n and 0 <= a.goal < n):
                raise ValueError(f"agent {a.id}: start/goal out of range")
        goals = [a.goal for a in self.agents]
        if len(set(goals)) != len(goals):
            raise ValueError("agents must have distinct goals")
        for i, a in enumerate(self.agents):
            for b in self.agents[i + 1:]:
                d = math.dist(self.graph.point(a.start), self.graph.point(b.start))
                if d < a.radius + b.radius:
                    raise ValueError(
                        f"agents {a.id} and {b.id} already collide at t=0"
                    )


# ---------------------------------------------------------------------------
# movingai parsing
# ---------------------------------------------------------------------------

def parse_map(text: str) -> GridMap:
    """movingai .map: `type ...` / `height H` / `width W` / `map` then H rows."""
    lines = text.splitlines()
    height = width = None
    row_start = None
    for idx, raw in enumerate(lines[:4]):
        parts = raw.split()
        if not parts:
            raise ParseError(idx + 1, "empty header line")
        key = parts[0].lower()
        if key == "type":
            continue
        if key in ("height", "width"):
            if len(parts) != 2 or not parts[1].isdigit():
                raise ParseError(idx + 1, f"bad {key} line {raw!r}")
            if key == "height":
                height = int(parts[1])
            else:
                width = int(parts[1])
        elif key == "map":
            row_start = idx + 1
            break
        else:
            raise ParseError(idx + 1, f"unexpected header {raw!r}")
    if height is None or width is None or row_start is None:
        raise ParseError(min(len(lines), 4), "incomplete header (type/height/width/map)")
    if height < 1 or width < 1:
        raise ParseError(row_start, "dimensions must be >= 1")
    rows = lines[row_start:row_start + height]
    if len(rows) < height:
        raise ParseError(len(lines), f"expected {height} map rows, found {len(rows)}")
    blocked: List[bool] = []
    for r, row in enumerate(rows):
        line_no = row_start + r + 1
        if len(row) != width:
            raise ParseError(line_no, f"row has {len(row)} chars, width is {width}")
        for ch in row:
            if ch in PASSABLE_CHARS:
                blocked.append(False)
            elif ch in BLOCKED_CHARS:
                blocked.append(True)
            else:
                raise ParseError(line_no, f"unknown map char {ch!r}")
    return GridMap(width, height, tuple(blocked))


def parse_scen(text: str) -> List[Tuple[Tuple[int, int], Tuple[int, int]]]:
    """movingai .scen v1: tab-separated
    bucket map width height sx sy gx gy optimal; returns [(start, goal)] cells."""
    lines = text.splitlines()
    if not lines or not lines[0].strip().lower().startswith("version"):
        raise ParseError(1, "missing `version` line")
    version = lines[0].split()
    if len(version) != 2 or version[1] != "1":
        raise ParseError(1, f"unsupported scen version {lines[0]!r}")
    entries = []
    for idx, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        fields = raw.split("\t")
        if len(fields) == 1:  # tolerate space-separated files
            fields = raw.split()
        if len(fields) != 9:
            raise ParseError(idx, f"expected 9 fields, found {len(fields)}")
        try:
            sx, sy, gx, gy = (int(fields[i]) for i in (4, 5, 6, 7))
            float(fields[8])
        except ValueError:
            raise ParseError(idx, f"non-numeric coordinates in {raw!r}")
        entries.append(((sx, sy), (gx, gy)))
    return entries


# ---------------------------------------------------------------------------
# 2^k neighborhoods
# ---------------------------------------------------------------------------

def neighborhood_offsets(k: int) -> List[Tuple[int, int]]:
    """The 2^k move directions: k=2 gives the 4 cardinal offsets and every
    increment inserts the angular midpoint (vector mediant) between each
    adjacent pair."""
    if not 2 <= k <= 5:
        raise ValueError(f"k must be in [2, 5], got {k}")
    ring: List[Tuple[int, int]] = [(1, 0), (0, 1), (-1, 0), (0, -1)]
    for _ in range(k - 2):
        nxt: List[Tuple[int, int]] = []
        for i, (ax, ay) in enumerate(ring):
            bx, by = ring[(i + 1) % len(ring)]
            nxt.append((ax, ay))
            nxt.append((ax + bx, ay + by))
        ring = nxt
    return ring


def _seg_point_dist2(ax, ay, bx, by, px, py) -> float:
    vx, vy = bx - ax, by - ay
    L2 = vx * vx + vy * vy
    if L2 <= 0:
        dx, dy = px - ax, py - ay
        return dx * dx + dy * dy
    t = ((px - ax) * vx + (py - ay) * vy) / L2
    t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
    dx, dy = px - (ax + t * vx), py - (ay + t * vy)
    return dx * dx + dy * dy


def _segments_cross(ax, ay, bx, by, cx, cy, dx, dy) -> bool:
    def orient(ox, oy, px, py, qx, qy):
        return (px - ox) * (qy - oy) - (py - oy) * (qx - ox)

    d1 = orient(ax, ay, bx, by, cx, cy)
    d2 = orient(ax, ay, bx, by, dx, dy)
    d3 = orient(cx, cy, dx, dy, ax, ay)
    d4 = orient(cx, cy, dx, dy, bx, by)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
        return True
    return False


def segment_box_distance(
    ax: float, ay: float, bx: float, by: float,
    x0: float, y0: float, x1: float, y1: float,
) -> float:
    """Exact distance between segment ab and the closed box [x0,x1]x[y0,y1]."""
    inside_a = x0 <= ax <= x1 and y0 <= ay <= y1
    inside_b = x0 <= bx <= x1 and y0 <= by <= y1
    if inside_a or inside_b:
        return 0.0
    corners = ((x0, y0), (x1, y0), (x1, y1), (x0, y1))
    for i in range(4):
        cx, cy = corners[i]
        dx_, dy_ = corners[(i + 1) % 4]
        if _segments_cross(ax, ay, bx, by, cx, cy, dx_, dy_):
            return 0.0
    best = math.inf
    for i in range(4):
        cx, cy = corners[i]
        ex, ey = corners[(i + 1) % 4]
        best = min(best, _seg_seg_dist2(ax, ay, bx, by, cx, cy, ex, ey))
    return math.sqrt(best)


def _seg_seg_dist2(ax, ay, bx, by, cx, cy, dx, dy) -> float:
    # non-crossing segments: minimum is endpoint-to-segment
    return min(
        _seg_point_dist2(ax, ay, bx, by, cx, cy),
        _seg_point_dist2(ax, ay, bx, by, dx, dy),
        _seg_point_dist2(cx, cy, dx, dy, ax, ay),
        _seg_point_dist2(cx, cy, dx, dy, bx, by),
    )


def edge_valid(grid: GridMap, a: Tuple[float, float], b: Tuple[float, float],
               radius: float) -> bool:
    """Can a disk of `radius` slide from a to b without touching a blocked
    square or the map border? Strict clearance (open disk)."""
    ax, ay = a
    bx, by = b
    lo_x, hi_x = min(ax, bx), max(ax, bx)
    lo_y, hi_y = min(ay, by), max(ay, by)
    if lo_x - radius < 0 or lo_y - radius < 0:
        return False
    if hi_x + radius > grid.width or hi_y + radius > grid.height:
        return False
    c0 = max(0, int(math.floor(lo_x - radius)))
    c1 = min(grid.width - 1, int(math.floor(hi_x + radius)))
    r0 = max(0, int(math.floor(lo_y - radius)))
    r1 = min(grid.height - 1, int(math.floor(hi_y + radius)))
    for row in range(r0, r1 + 1):
        base = row * grid.width
        for col in range(c0, c1 + 1):
            if not grid.blocked[base + col]:
                continue
            d = segment_box_distance(ax, ay, bx, by, col, row, col + 1.0, row + 1.0)
            if d <= radius:
                return False
    return True


def build_graph(grid: GridMap, k: int, radius: float = DEFAULT_RADIUS) -> Graph:
    """Vertices are passable cell centers (ids are row-major cell indices
    compacted); candidate moves are the 2^k offsets, kept when edge_valid."""
    if radius >= 0.5:
        raise ValueError("radius must be < 0.5 for unit cells")
    offsets = neighborhood_offsets(k)
    vid: Dict[Tuple[int, int], int] = {}
    points: List[Tuple[float, float]] = []
    for row in range(grid.height):
        for col in range(grid.width):
            if not grid.is_blocked(col, row):
                vid[(col, row)] = len(points)
                points.append(grid.cell_center(col, row))
    graph = Graph(points)
    graph.cell_of = {v: cr for cr, v in vid.items()}  # type: ignore[attr-defined]
    graph.vertex_of_cell = vid  # type: ignore[attr-defined]
    for (col, row), u in vid.items():
        for ox, oy in offsets:
            target = (col + ox, row + oy)
            v = vid.get(target)
            if v is None or v <= u:
                continue
            if edge_valid(grid, points[u], points[v], radius):
                graph.add_edge(u, v)
    return graph


def open_grid(width: int, height: int) -> GridMap:
    return GridMap(width, height, tuple([False] * (width * height)))


# ---------------------------------------------------------------------------
# roadmaps
# ---------------------------------------------------------------------------

def load_roadmap(text: str) -> Tuple[Graph, List[Tuple[int, int]]]:
    """Roadmap text: `v id x y` vertex lines, `e id1 id2` undirected edges,
    and optional `a start goal` agent lines. Clearance is assumed to have
    been validated by whatever produced the file. Returns (graph, agents)."""
    points: Dict[int, Tuple[float, float]] = {}
    edges: List[Tuple[int, int, int]] = []
    agent_rows: List[Tuple[int, int, int]] = []
    for idx, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "v":
            if len(parts) != 4:
                raise ParseError(idx, f"vertex line needs `v id x y`: {raw!r}")
            try:
                vid_, x, y = int(parts[1]), float(parts[2]), float(parts[3])
            except ValueError:
                raise ParseError(idx, f"bad vertex numbers in {raw!r}")
            if vid_ in points:
                raise ParseError(idx, f"duplicate vertex id {vid_}")
            points[vid_] = (x, y)
        elif tag == "e":
            if len(parts) != 3:
                raise ParseError(idx, f"edge line needs `e id1 id2`: {raw!r}")
            try:
                edges.append((idx, int(parts[1]), int(parts[2])))
            except ValueError:
                raise ParseError(idx, f"bad edge ids in {raw!r}")
        elif tag == "a":
            if len(parts) != 3:
                raise ParseError(idx, f"agent line needs `a start goal`: {raw!r}")
            try:
                agent_rows.append((idx, int(parts[1]), int(parts[2])))
            except ValueError:
                raise ParseError(idx, f"bad agent ids in {raw!r}")
        else:
            raise ParseError(idx, f"unknown record {tag!r}")
    if not points:
        raise ParseError(1, "roadmap has no vertices")
    ids = sorted(points)
    remap = {old: new for new, old in enumerate(ids)}
    graph = Graph([points[i] for i in ids])
    for line_no, u, v in edges:
        if u not in remap or v not in remap:
            raise ParseError(line_no, f"edge references unknown vertex {u} or {v}")
        graph.add_edge(remap[u], remap[v])  # duplicates silently collapse
    agents = []
    for line_no, s, g in agent_rows:
        if s not in remap or g not in remap:
            raise ParseError(line_no, f"agent references unknown vertex {s} or {g}")
        agents.append((remap[s], remap[g]))
    return graph, agents


# ---------------------------------------------------------------------------
# scenario generation
# ---------------------------------------------------------------------------

def _distances_from(graph: Graph, source: int) -> List[float]:
    import heapq

    dist = [math.inf] * len(graph)
    dist[source] = 0.0
    heap = [(0.0, source)]
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


def generate_scenario(
    graph: Graph,
    n_agents: int,
    seed: int,
    radius: float = DEFAULT_RADIUS,
    speed: float = 1.0,
    max_tries: int = 200,
) -> Instance:
    """Random instance, deterministic under seed: distinct starts pairwise
    clear at 2*radius (likewise goals), each goal reachable from its start."""
    rng = random.Random(seed)
    n = len(graph)
    if n_agents < 1:
        raise ValueError("need at least one agent")

    def clear(vs: List[int], candidate: int) -> bool:
        cx, cy = graph.point(candidate)
        for v in vs:
            px, py = graph.point(v)
            if math.hypot(cx - px, cy - py) <= 2 * radius:
                return False
        return True

    for _ in range(max_tries):
        order = list(range(n))
        rng.shuffle(order)
        starts: List[int] = []
        for v in order:
            if clear(starts, v):
                starts.append(v)
                if len(starts) == n_agents:
                    break
        if len(starts) < n_agents:
            continue
        goals: List[int] = []
        ok = True
        for s in starts:
            reach = _distances_from(graph, s)
            candidates = [
                v for v in range(n)
                if v != s and v not in goals and math.isfinite(reach[v]) and clear(goals, v)
            ]
            if not candidates:
                ok = False
                break
            goals.append(candidates[rng.randrange(len(candidates))])
        if not ok:
            continue
        agents = tuple(
            Agent(i, starts[i], goals[i], radius=radius, speed=speed)
            for i in range(n_agents)
        )
        return Instance(graph, agents)
    raise RuntimeError(
        f"could not place {n_agents} agents after {max_tries} attempts"
    )
