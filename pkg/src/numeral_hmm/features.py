"""Structural features of a skeleton and its encoding as an observation sequence.

Symbols 0-7 are Freeman directions (0 = east, counter-clockwise, rows grow
downward), 8 marks arrival at an end point and 9 marks passing a junction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import ndimage

from .errors import EmptySkeleton, NotAdjacent, NotForeground
from .imageproc import CLOCKWISE, TRANSITIONS, hole_count, neighbor_codes

Pixel = tuple[int, int]

N_DIRECTIONS = 8
ENDMARK = 8
JUNCTMARK = 9
N_SYMBOLS = 10

# chain code -> (drow, dcol)
DIRECTIONS: tuple[Pixel, ...] = ((0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1))
_CODE_OF = {d: i for i, d in enumerate(DIRECTIONS)}
# walking order: edge neighbours before diagonal ones, each by chain code
_WALK_ORDER = tuple(sorted(DIRECTIONS, key=lambda d: (d[0] != 0 and d[1] != 0, _CODE_OF[d])))

END, JUNCTION, ANCHOR = "end", "junction", "anchor"


@dataclass(frozen=True)
class CharacteristicPoints:
    endpoints: frozenset[Pixel]
    junctions: frozenset[Pixel]


@dataclass(frozen=True)
class Node:
    id: int
    kind: str
    pixel: Pixel
    members: frozenset[Pixel]


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    path: tuple[Pixel, ...]

    @property
    def interior(self) -> tuple[Pixel, ...]:
        return self.path[1:-1]


@dataclass(frozen=True)
class SkeletonGraph:
    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]


@dataclass(frozen=True)
class FeatureSummary:
    endpoint_count: int
    junction_count: int
    loop_count: int

    def __str__(self) -> str:
        return f"endpoints={self.endpoint_count} junctions={self.junction_count} loops={self.loop_count}"


def transition_count(skel: np.ndarray, p: Pixel) -> int:
    """Number of background-to-ink transitions around ``p``, traced clockwise from north."""
    skel = np.asarray(skel, dtype=bool)
    r, c = p
    h, w = skel.shape
    if not (0 <= r < h and 0 <= c < w) or not skel[r, c]:
        raise NotForeground(f"pixel {p} is not foreground")
    ring = [
        bool(skel[r + dr, c + dc]) if 0 <= r + dr < h and 0 <= c + dc < w else False
        for dr, dc in CLOCKWISE
    ]
    return sum(1 for i in range(8) if not ring[i] and ring[(i + 1) % 8])


def characteristic_points(skel: np.ndarray) -> CharacteristicPoints:
    """End points have one transition; junctions have three or more."""
    skel = np.asarray(skel, dtype=bool)
    t = TRANSITIONS[neighbor_codes(skel)]
    ends = np.argwhere(skel & (t == 1))
    juncs = np.argwhere(skel & (t >= 3))
    return CharacteristicPoints(
        endpoints=frozenset((int(r), int(c)) for r, c in ends),
        junctions=frozenset((int(r), int(c)) for r, c in juncs),
    )


def junction_clusters(junctions: Iterable[Pixel], shape: tuple[int, int]) -> list[frozenset[Pixel]]:
    """Group 8-adjacent junction pixels; clusters ordered by their smallest pixel."""
    mask = np.zeros(shape, dtype=bool)
    for p in junctions:
        mask[p] = True
    labels, n = ndimage.label(mask, structure=np.ones((3, 3), dtype=bool))
    clusters = [frozenset(map(tuple, np.argwhere(labels == k + 1).tolist())) for k in range(n)]
    return sorted(clusters, key=min)


def loop_count(skel: np.ndarray) -> int:
    return hole_count(skel)


def summarize(skel: np.ndarray, cp: CharacteristicPoints | None = None) -> FeatureSummary:
    """Counts of end points, junction clusters and enclosed loops."""
    skel = np.asarray(skel, dtype=bool)
    cp = cp or characteristic_points(skel)
    return FeatureSummary(
        endpoint_count=len(cp.endpoints),
        junction_count=len(junction_clusters(cp.junctions, skel.shape)),
        loop_count=loop_count(skel),
    )


class _Tracer:
    def __init__(self, skel: np.ndarray, cp: CharacteristicPoints):
        self.skel = skel
        self.h, self.w = skel.shape
        self.nodes: list[Node] = []
        self.node_of: dict[Pixel, int] = {}
        self.edges: list[Edge] = []
        self.visited: set[Pixel] = set()
        self.direct: set[frozenset[Pixel]] = set()
        for p in sorted(cp.endpoints):
            self._add_node(END, p, frozenset([p]))
        for members in junction_clusters(cp.junctions, skel.shape):
            self._add_node(JUNCTION, min(members), members)

    def _add_node(self, kind: str, pixel: Pixel, members: frozenset[Pixel]) -> int:
        nid = len(self.nodes)
        self.nodes.append(Node(nid, kind, pixel, members))
        for m in members:
            self.node_of[m] = nid
        return nid

    def neighbors(self, p: Pixel) -> list[Pixel]:
        r, c = p
        out = []
        for dr, dc in _WALK_ORDER:
            q = (r + dr, c + dc)
            if 0 <= q[0] < self.h and 0 <= q[1] < self.w and self.skel[q]:
                out.append(q)
        return out

    def expand(self, nid: int) -> None:
        for m in sorted(self.nodes[nid].members):
            for q in self.neighbors(m):
                owner = self.node_of.get(q)
                if owner is None:
                    if q not in self.visited:
                        self.trace(nid, m, q)
                elif owner != nid:
                    key = frozenset((m, q))
                    if key not in self.direct:
                        self.direct.add(key)
                        self.edges.append(Edge(nid, owner, (m, q)))

    def trace(self, start: int, origin: Pixel, first: Pixel) -> None:
        path = [origin, first]
        self.visited.add(first)
        cur = first
        while True:
            nbrs = self.neighbors(cur)
            for q in nbrs:
                owner = self.node_of.get(q)
                if owner is not None and owner != start:
                    path.append(q)
                    self.edges.append(Edge(start, owner, tuple(path)))
                    return
            fresh = [q for q in nbrs if q not in self.node_of and q not in self.visited]
            if fresh:
                cur = fresh[0]
                self.visited.add(cur)
                path.append(cur)
                continue
            home = [
                q for q in nbrs if self.node_of.get(q) == start and (len(path) > 2 or q != origin)
            ]
            if home:
                path.append(home[0])
                self.edges.append(Edge(start, start, tuple(path)))
                return
            # dead end on a plain pixel: it becomes an anchor of its own
            self.visited.discard(cur)
            end = self._add_node(ANCHOR, cur, frozenset([cur]))
            self.edges.append(Edge(start, end, tuple(path)))
            return


def build_graph(skel: np.ndarray, cp: CharacteristicPoints | None = None) -> SkeletonGraph:
    """Split the skeleton into node pixels and pixel paths between nodes.

    Edges are traced from end points first, then junction clusters (each
    8-connected cluster of junction pixels is one node). Pixels still
    uncovered afterwards, such as node-free loops, are traced from an anchor
    at their smallest (row, col) pixel.
    """
    skel = np.asarray(skel, dtype=bool)
    cp = cp or characteristic_points(skel)
    tracer = _Tracer(skel, cp)
    i = 0
    while i < len(tracer.nodes):
        tracer.expand(i)
        i += 1
    remaining = sorted(
        p for p in map(tuple, np.argwhere(skel).tolist())
        if p not in tracer.node_of and p not in tracer.visited
    )
    for p in remaining:
        if p in tracer.node_of or p in tracer.visited:
            continue
        nid = tracer._add_node(ANCHOR, p, frozenset([p]))
        while nid < len(tracer.nodes):
            tracer.expand(nid)
            nid += 1
    return SkeletonGraph(tuple(tracer.nodes), tuple(tracer.edges))


def chain_code(path: Sequence[Pixel]) -> list[int]:
    """Freeman code of each step along an 8-connected pixel path."""
    codes = []
    for (r0, c0), (r1, c1) in zip(path, path[1:]):
        code = _CODE_OF.get((r1 - r0, c1 - c0))
        if code is None:
            raise NotAdjacent(f"{(r0, c0)} -> {(r1, c1)} is not an 8-neighbour step")
        codes.append(code)
    return codes


def _start_key(graph: SkeletonGraph, nids: Iterable[int]) -> tuple:
    rank = {END: 0, JUNCTION: 1, ANCHOR: 2}
    best = min(nids, key=lambda n: (rank[graph.nodes[n].kind], graph.nodes[n].pixel))
    node = graph.nodes[best]
    return node.pixel, best


def _components(graph: SkeletonGraph) -> list[list[int]]:
    parent = list(range(len(graph.nodes)))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for e in graph.edges:
        parent[find(e.u)] = find(e.v)
    groups: dict[int, list[int]] = {}
    for n in range(len(graph.nodes)):
        groups.setdefault(find(n), []).append(n)
    return list(groups.values())


def traverse(graph: SkeletonGraph) -> list[int]:
    """Depth-first walk over every edge once, emitting codes and markers.

    Each component starts from its smallest end point, else its smallest
    junction, else its anchor; components run in order of that start pixel.
    At a node, untraversed edges are taken by ascending first-step code.
    """
    leaving: dict[int, list[tuple]] = {n.id: [] for n in graph.nodes}
    for idx, e in enumerate(graph.edges):
        forward = e.path
        backward = tuple(reversed(e.path))
        leaving[e.u].append((chain_code(forward[:2])[0], forward[0], idx, 0, forward, e.v))
        leaving[e.v].append((chain_code(backward[:2])[0], backward[0], idx, 1, backward, e.u))
    for options in leaving.values():
        options.sort(key=lambda o: o[:4])

    used = [False] * len(graph.edges)
    symbols: list[int] = []
    starts = sorted(_start_key(graph, comp) for comp in _components(graph))
    for _, start in starts:
        stack = [iter(leaving[start])]
        while stack:
            for _code, _px, idx, _dir, opath, dest in stack[-1]:
                if used[idx]:
                    continue
                used[idx] = True
                symbols.extend(chain_code(opath))
                kind = graph.nodes[dest].kind
                if kind == END:
                    symbols.append(ENDMARK)
                elif kind == JUNCTION:
                    symbols.append(JUNCTMARK)
                stack.append(iter(leaving[dest]))
                break
            else:
                stack.pop()
    return symbols


def collapse_runs(symbols: Sequence[int]) -> list[int]:
    """Merge consecutive repeats of the same direction code; markers are kept."""
    out: list[int] = []
    for s in symbols:
        if out and s == out[-1] and s < N_DIRECTIONS:
            continue
        out.append(s)
    return out


def observation_sequence(skel: np.ndarray, collapse: bool = False) -> list[int]:
    """Encode a skeleton as a list of symbols in ``[0, N_SYMBOLS)``.

    Raises :class:`EmptySkeleton` when the skeleton has fewer than two ink
    pixels or yields no symbol at all.
    """
    skel = np.asarray(skel, dtype=bool)
    if int(skel.sum()) < 2:
        raise EmptySkeleton("skeleton has fewer than two foreground pixels")
    symbols = traverse(build_graph(skel))
    if collapse:
        symbols = collapse_runs(symbols)
    if not symbols:
        raise EmptySkeleton("skeleton produced no observation symbols")
    return symbols


def render(img: np.ndarray, cp: CharacteristicPoints | None = None) -> str:
    """ASCII dump: '#' ink, '.' background, 'E' end point, 'J' junction."""
    img = np.asarray(img, dtype=bool)
    rows = []
    for r in range(img.shape[0]):
        line = []
        for c in range(img.shape[1]):
            ch = "#" if img[r, c] else "."
            if cp is not None:
                if (r, c) in cp.endpoints:
                    ch = "E"
                elif (r, c) in cp.junctions:
                    ch = "J"
            line.append(ch)
        rows.append("".join(line))
    return "\n".join(rows)
