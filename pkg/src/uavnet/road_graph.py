"""Road network graphs, their road-adjacency duals, and connectivity analysis.

Intersections are vertices and road segments are edges of an undirected graph.
Vehicle counts live on edges; coverage (fixed road-side units or deployed
relay UAVs) lives on vertices.  Connectivity for one time slot is summarized
by marking c-edges and c-vertices and grouping the c-edges into c-components:
maximal sets of c-edges linked through shared intersections.  The dual graph
(one vertex per road, one edge per unordered pair of roads meeting at an
intersection) makes the grouping explicit: c-components are the connected
subgraphs of the dual induced by the c-edge vertices.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "RoadmapError",
    "RoadGraph",
    "CoverageMap",
    "TrafficSnapshot",
    "DualGraph",
    "ConnectivityColoring",
    "Component",
    "CComponentReport",
    "build_dual",
    "color",
    "c_components",
    "flight_distance",
    "neighbors",
]

UNCOVERED = -1
RSU_COVERED = 0


class RoadmapError(ValueError):
    """Structurally invalid road graph, or an unknown vertex/edge id."""


def _as_readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RoadGraph:
    """Immutable road topology: vertex coordinates, edges, and infrastructure.

    ``coords[v]`` is the planar position of intersection ``v`` in meters.
    ``edge_endpoints[e]`` holds the two (distinct) vertex ids of road ``e``,
    ``edge_lengths[e]`` its length in meters.  ``rsu_vertices`` are
    permanently covered intersections; ``station_vertices`` are the UAV
    take-off points, in round-robin order.
    """

    coords: np.ndarray
    edge_endpoints: np.ndarray
    edge_lengths: np.ndarray
    rsu_vertices: frozenset[int] = frozenset()
    station_vertices: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "coords", _as_readonly(np.asarray(self.coords, dtype=np.float64).reshape(-1, 2)))
        endpoints = np.asarray(self.edge_endpoints, dtype=np.int64).reshape(-1, 2)
        object.__setattr__(self, "edge_endpoints", _as_readonly(endpoints))
        object.__setattr__(self, "edge_lengths", _as_readonly(np.asarray(self.edge_lengths, dtype=np.float64).reshape(-1)))
        object.__setattr__(self, "rsu_vertices", frozenset(int(v) for v in self.rsu_vertices))
        object.__setattr__(self, "station_vertices", tuple(int(v) for v in self.station_vertices))
        problems = self.validate()
        if problems:
            raise RoadmapError("invalid road graph: " + "; ".join(problems))
        if not self.is_connected():
            warnings.warn("road graph is not connected", stacklevel=2)

    def validate(self) -> list[str]:
        """Return every invariant violation (empty list when valid)."""
        problems: list[str] = []
        n, m = self.n, self.m
        if n == 0:
            problems.append("graph has no vertices")
        if not np.all(np.isfinite(self.coords)):
            problems.append("vertex coordinates must be finite")
        if self.edge_lengths.shape[0] != m:
            problems.append(f"expected {m} edge lengths, got {self.edge_lengths.shape[0]}")
        elif m and (np.any(self.edge_lengths < 0) or not np.all(np.isfinite(self.edge_lengths))):
            bad = [int(e) for e in np.flatnonzero(~(np.isfinite(self.edge_lengths) & (self.edge_lengths >= 0)))]
            problems.append(f"edge lengths must be finite and non-negative (edges {bad})")
        seen: dict[tuple[int, int], int] = {}
        for e in range(m):
            u, v = int(self.edge_endpoints[e, 0]), int(self.edge_endpoints[e, 1])
            if not (0 <= u < n and 0 <= v < n):
                problems.append(f"edge {e} references unknown vertex ({u}, {v})")
                continue
            if u == v:
                problems.append(f"edge {e} is a self-loop at vertex {u}")
                continue
            key = (min(u, v), max(u, v))
            if key in seen:
                problems.append(f"edge {e} duplicates edge {seen[key]} between vertices {key[0]} and {key[1]}")
            else:
                seen[key] = e
        for v in sorted(self.rsu_vertices):
            if not 0 <= v < n:
                problems.append(f"rsu vertex {v} is not a valid vertex id")
        if not self.station_vertices:
            problems.append("station list is empty")
        for v in self.station_vertices:
            if not 0 <= v < n:
                problems.append(f"station vertex {v} is not a valid vertex id")
        return problems

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def m(self) -> int:
        return self.edge_endpoints.shape[0]

    @cached_property
    def incident_edges(self) -> tuple[tuple[int, ...], ...]:
        """Edge ids incident to each vertex, sorted."""
        inc: list[list[int]] = [[] for _ in range(self.n)]
        for e in range(self.m):
            u, v = self.edge_endpoints[e]
            inc[u].append(e)
            inc[v].append(e)
        return tuple(tuple(sorted(es)) for es in inc)

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        """Neighbor vertex ids for each vertex, sorted."""
        adj: list[set[int]] = [set() for _ in range(self.n)]
        for e in range(self.m):
            u, v = self.edge_endpoints[e]
            adj[u].add(int(v))
            adj[v].add(int(u))
        return tuple(tuple(sorted(s)) for s in adj)

    @cached_property
    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.float64)
        for u, v in self.edge_endpoints:
            a[u, v] = 1.0
            a[v, u] = 1.0
        return _as_readonly(a)

    @cached_property
    def degrees(self) -> np.ndarray:
        return _as_readonly(np.array([len(es) for es in self.incident_edges], dtype=np.int64))

    @cached_property
    def distance_matrix(self) -> np.ndarray:
        """Pairwise straight-line flight distances between intersections (m)."""
        delta = self.coords[:, None, :] - self.coords[None, :, :]
        return _as_readonly(np.sqrt((delta**2).sum(axis=2)))

    @cached_property
    def diameter(self) -> float:
        """Largest straight-line distance between two intersections (m)."""
        return float(self.distance_matrix.max()) if self.n else 0.0

    def is_connected(self) -> bool:
        if self.n <= 1:
            return True
        seen = np.zeros(self.n, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            v = stack.pop()
            for w in self.adjacency[v]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        return bool(seen.all())

    def check_vertex(self, v: int) -> int:
        v = int(v)
        if not 0 <= v < self.n:
            raise RoadmapError(f"unknown vertex id {v} (graph has {self.n} vertices)")
        return v

    def check_edge(self, e: int) -> int:
        e = int(e)
        if not 0 <= e < self.m:
            raise RoadmapError(f"unknown edge id {e} (graph has {self.m} edges)")
        return e


@dataclass(frozen=True)
class CoverageMap:
    """Per-vertex coverage: -1 uncovered, 0 road-side unit, u >= 1 UAV u.

    RSU coverage is permanent and keeps value 0 even when a UAV hovers at the
    same intersection; when several UAVs share a vertex the highest id is
    recorded (display only, coverage itself is idempotent).
    """

    p_v: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "p_v", _as_readonly(np.asarray(self.p_v, dtype=np.int64).reshape(-1)))
        if self.p_v.size and self.p_v.min() < UNCOVERED:
            raise RoadmapError("coverage values below -1 are not meaningful")

    @classmethod
    def empty(cls, g: RoadGraph) -> "CoverageMap":
        return cls.from_deployment(g, ())

    @classmethod
    def from_deployment(cls, g: RoadGraph, uav_positions: "tuple[int, ...] | list[int]") -> "CoverageMap":
        """Coverage from the fixed RSUs plus UAVs 1..C at ``uav_positions``.

        A negative entry means that UAV is absent (out of energy) and covers
        nothing; its successors keep their ids.
        """
        p_v = np.full(g.n, UNCOVERED, dtype=np.int64)
        for uid, pos in enumerate(uav_positions, start=1):
            if pos < 0:
                continue
            p_v[g.check_vertex(pos)] = uid
        for v in g.rsu_vertices:
            p_v[v] = RSU_COVERED
        return cls(p_v)

    @property
    def covered(self) -> np.ndarray:
        return self.p_v >= 0


@dataclass(frozen=True)
class TrafficSnapshot:
    """Vehicle count per edge for one time slot."""

    counts: np.ndarray

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=np.int64).reshape(-1)
        if counts.size and counts.min() < 0:
            raise RoadmapError("vehicle counts must be non-negative")
        object.__setattr__(self, "counts", _as_readonly(counts))

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class DualGraph:
    """Road-adjacency dual: vertex i of the dual is edge i of the source graph.

    Dual edges are (a, b, via) triples with a < b, sorted; ``via`` is the
    shared intersection, and pairs of roads meeting at two distinct
    intersections yield parallel dual edges (one per shared vertex).
    """

    vertex_count: int
    edges: tuple[tuple[int, int, int], ...]

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        adj: list[set[int]] = [set() for _ in range(self.vertex_count)]
        for a, b, _via in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return tuple(tuple(sorted(s)) for s in adj)


@dataclass(frozen=True)
class ConnectivityColoring:
    """Boolean c-edge / c-vertex marks for one slot.

    An edge is a c-edge when it carries vehicles or touches a covered vertex;
    a vertex is a c-vertex when it is covered or touches a vehicle-laden edge.
    """

    c_edge: np.ndarray
    c_vertex: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "c_edge", _as_readonly(np.asarray(self.c_edge, dtype=bool).reshape(-1)))
        object.__setattr__(self, "c_vertex", _as_readonly(np.asarray(self.c_vertex, dtype=bool).reshape(-1)))


@dataclass(frozen=True)
class Component:
    """One c-component: its edge ids, vehicle sum, and size in edges."""

    edge_ids: tuple[int, ...]
    vehicle_sum: int
    size: int


@dataclass(frozen=True)
class CComponentReport:
    """All c-components of one slot, sorted by their smallest edge id."""

    k: int
    components: tuple[Component, ...]

    @property
    def vehicle_sums(self) -> tuple[int, ...]:
        return tuple(c.vehicle_sum for c in self.components)

    @property
    def total_vehicles(self) -> int:
        return sum(c.vehicle_sum for c in self.components)

    @property
    def total_size(self) -> int:
        return sum(c.size for c in self.components)


def build_dual(g: RoadGraph) -> DualGraph:
    """Construct the road-adjacency dual of ``g``.

    One dual vertex per road (same index), one dual edge per unordered pair
    of roads incident to a common intersection, tagged with that intersection.
    """
    dual_edges: list[tuple[int, int, int]] = []
    for v in range(g.n):
        inc = g.incident_edges[v]
        for i in range(len(inc)):
            for j in range(i + 1, len(inc)):
                dual_edges.append((inc[i], inc[j], v))
    dual_edges.sort()
    return DualGraph(vertex_count=g.m, edges=tuple(dual_edges))


def color(g: RoadGraph, cov: CoverageMap, traffic: TrafficSnapshot) -> ConnectivityColoring:
    """Mark c-edges and c-vertices for one slot from coverage and traffic."""
    if cov.p_v.shape[0] != g.n:
        raise RoadmapError(f"coverage is keyed by {cov.p_v.shape[0]} vertices, graph has {g.n}")
    if traffic.counts.shape[0] != g.m:
        raise RoadmapError(f"traffic is keyed by {traffic.counts.shape[0]} edges, graph has {g.m}")
    covered = cov.covered
    laden = traffic.counts > 0
    if g.m:
        ep = g.edge_endpoints
        c_edge = laden | covered[ep[:, 0]] | covered[ep[:, 1]]
        touches_vehicles = np.zeros(g.n, dtype=bool)
        touches_vehicles[ep[laden, 0]] = True
        touches_vehicles[ep[laden, 1]] = True
    else:
        c_edge = np.zeros(0, dtype=bool)
        touches_vehicles = np.zeros(g.n, dtype=bool)
    return ConnectivityColoring(c_edge=c_edge, c_vertex=covered | touches_vehicles)


class _DisjointSet:
    """Union-find with path halving and union by size."""

    def __init__(self, size: int) -> None:
        self.parent = list(range(size))
        self.size = [1] * size

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]


def c_components(dual: DualGraph, coloring: ConnectivityColoring, traffic: TrafficSnapshot) -> CComponentReport:
    """Group c-edges into c-components and total their vehicle counts.

    Components are the connected subgraphs of the dual induced by the c-edge
    vertices; two c-edges join a component whenever they share an
    intersection.  Output is sorted by smallest member edge id.
    """
    black = np.flatnonzero(coloring.c_edge)
    if black.size == 0:
        return CComponentReport(k=0, components=())
    ds = _DisjointSet(dual.vertex_count)
    is_black = coloring.c_edge
    for a, b, _via in dual.edges:
        if is_black[a] and is_black[b]:
            ds.union(a, b)
    groups: dict[int, list[int]] = {}
    for e in black:
        groups.setdefault(ds.find(int(e)), []).append(int(e))
    comps = []
    for edge_ids in sorted(groups.values(), key=lambda ids: ids[0]):
        comps.append(
            Component(
                edge_ids=tuple(edge_ids),
                vehicle_sum=int(traffic.counts[edge_ids].sum()),
                size=len(edge_ids),
            )
        )
    return CComponentReport(k=len(comps), components=tuple(comps))


def flight_distance(g: RoadGraph, vi: int, vj: int) -> float:
    """Straight-line distance in meters between two intersections."""
    vi, vj = g.check_vertex(vi), g.check_vertex(vj)
    dx = g.coords[vi, 0] - g.coords[vj, 0]
    dy = g.coords[vi, 1] - g.coords[vj, 1]
    return math.hypot(dx, dy)


def neighbors(g: RoadGraph, v: int) -> tuple[int, ...]:
    """Vertex ids adjacent to ``v``, sorted ascending."""
    return g.adjacency[g.check_vertex(v)]
