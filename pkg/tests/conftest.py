"""Shared fixtures: the lettered 3-agent running example, ascii grids, and
small helper builders used across the suite."""
from __future__ import annotations

import math
from typing import Dict, List, Tuple

import pytest

from ccbs.map_graph import Agent, Graph, GridMap, Instance, build_graph, parse_map

# Reconstruction of the 3-agent example on a unit grid with r = 0.5 agents.
# Vertices sit on integer coordinates, letters row by row; the two length-2
# first moves put both second actions at t = 2 and the H->C diagonal is a
# 3-4-5 triangle crossing F->I, which yields the reference unsafe intervals.
FIG_POINTS: Dict[str, Tuple[float, float]] = {
    "A": (0, 4), "B": (2, 4), "C": (5, 4), "D": (7, 4),
    "E": (0, 2), "F": (2, 2),
    "G": (0, 0), "H": (2, 0), "I": (4, 0), "J": (6, 0),
}
FIG_EDGES = [
    ("A", "B"), ("B", "F"), ("E", "F"), ("F", "I"), ("I", "J"),
    ("G", "H"), ("H", "C"), ("C", "D"),
]
FIG_NAMES = "ABCDEFGHIJ"


def figure_instance() -> Tuple[Instance, Dict[str, int]]:
    ids = {name: i for i, name in enumerate(FIG_NAMES)}
    graph = Graph([FIG_POINTS[n] for n in FIG_NAMES])
    for u, v in FIG_EDGES:
        graph.add_edge(ids[u], ids[v])
    agents = (
        Agent(0, ids["A"], ids["I"], radius=0.5),
        Agent(1, ids["E"], ids["J"], radius=0.5),
        Agent(2, ids["G"], ids["D"], radius=0.5),
    )
    return Instance(graph, agents), ids


@pytest.fixture
def figure1():
    return figure_instance()


def ascii_map(art: str) -> GridMap:
    """Build a GridMap from ascii art ('.' free, '@' blocked), via the parser."""
    rows = [line.strip() for line in art.strip().splitlines()]
    width = len(rows[0])
    assert all(len(r) == width for r in rows)
    text = f"type octile\nheight {len(rows)}\nwidth {width}\nmap\n" + "\n".join(rows)
    return parse_map(text)


def grid_instance(art: str, agents_cells: List[Tuple[Tuple[int, int], Tuple[int, int]]],
                  k: int = 2, radius: float = math.sqrt(2) / 4) -> Instance:
    grid = ascii_map(art)
    graph = build_graph(grid, k, radius)
    agents = []
    for i, (start, goal) in enumerate(agents_cells):
        agents.append(Agent(i, graph.vertex_of_cell[start], graph.vertex_of_cell[goal],
                            radius=radius))
    return Instance(graph, tuple(agents))


# lane swap through a shared corner cell: both paths are forced and the
# discrete solver must burn a full unit wait while a fractional one suffices
CROSS_ART = """
@.@
...
@.@
"""
CROSS_AGENTS = [((0, 1), (1, 2)), ((1, 0), (2, 1))]


@pytest.fixture
def cross_instance() -> Instance:
    return grid_instance(CROSS_ART, CROSS_AGENTS)


# head-on corridor swap with a single passing pocket above mid-corridor
SWAP_ART = """
@.@@
....
"""
SWAP_AGENTS = [((0, 1), (3, 1)), ((3, 1), (0, 1))]


@pytest.fixture
def swap_instance() -> Instance:
    return grid_instance(SWAP_ART, SWAP_AGENTS)
