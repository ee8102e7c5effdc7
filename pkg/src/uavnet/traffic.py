"""Roadmap files, per-slot traffic traces, and synthetic vehicle motion.

Roadmaps are JSON: ``{"vertices": [{"id", "x", "y"}], "edges": [{"id", "u",
"v", "length"}], "rsu": [...], "stations": [...]}`` with lengths in meters.
Traces are CSV with header ``t,edge,count``; ``t`` is the 0-based slot and
absent (t, edge) pairs mean zero vehicles.  The synthetic generator drops a
fixed number of vehicles on random roads and random-walks each of them to an
adjacent road (one sharing an intersection) with a per-slot probability.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .road_graph import RoadGraph, RoadmapError, TrafficSnapshot

__all__ = [
    "TraceError",
    "TrafficTrace",
    "SynthParams",
    "load_roadmap",
    "save_roadmap",
    "load_trace",
    "save_trace",
    "synth_trace",
    "snapshot",
]


class TraceError(ValueError):
    """Malformed trace file or out-of-range slot."""


@dataclass(frozen=True)
class TrafficTrace:
    """A horizon of per-slot vehicle counts for one road graph."""

    snapshots: tuple[TrafficSnapshot, ...]

    def __post_init__(self) -> None:
        if not self.snapshots:
            raise TraceError("a trace needs at least one slot")
        m = self.snapshots[0].counts.shape[0]
        if any(s.counts.shape[0] != m for s in self.snapshots):
            raise TraceError("all snapshots must cover the same edge set")

    @property
    def horizon(self) -> int:
        return len(self.snapshots)

    @property
    def max_count(self) -> int:
        return max(int(s.counts.max()) if s.counts.size else 0 for s in self.snapshots)


@dataclass(frozen=True)
class SynthParams:
    """Synthetic traffic: vehicle population, per-slot move probability, seed."""

    vehicle_count: int = 20
    move_probability: float = 0.3
    seed: int = 0

    def __post_init__(self) -> None:
        if self.vehicle_count < 0:
            raise ValueError("vehicle_count must be >= 0")
        if not 0.0 <= self.move_probability <= 1.0:
            raise ValueError("move_probability must be in [0, 1]")


def load_roadmap(path: "str | Path") -> RoadGraph:
    """Parse and validate a roadmap JSON file."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise RoadmapError(f"{path}: not valid JSON at line {exc.lineno}: {exc.msg}") from exc
    for key in ("vertices", "edges"):
        if key not in raw:
            raise RoadmapError(f"{path}: missing required field '{key}'")

    vertices = raw["vertices"]
    n = len(vertices)
    coords = np.zeros((n, 2), dtype=np.float64)
    seen_ids = set()
    for i, v in enumerate(vertices):
        try:
            vid, x, y = int(v["id"]), float(v["x"]), float(v["y"])
        except (KeyError, TypeError, ValueError) as exc:
            raise RoadmapError(f"{path}: vertices[{i}] needs integer 'id' and numeric 'x', 'y'") from exc
        if not 0 <= vid < n or vid in seen_ids:
            raise RoadmapError(f"{path}: vertex ids must be 0..{n - 1} without repeats (got {vid})")
        seen_ids.add(vid)
        coords[vid] = (x, y)

    edges = raw["edges"]
    m = len(edges)
    endpoints = np.zeros((m, 2), dtype=np.int64)
    lengths = np.zeros(m, dtype=np.float64)
    seen_ids = set()
    for i, e in enumerate(edges):
        try:
            eid, u, v = int(e["id"]), int(e["u"]), int(e["v"])
            length = float(e.get("length", 0.0))
        except (KeyError, TypeError, ValueError) as exc:
            raise RoadmapError(f"{path}: edges[{i}] needs integer 'id', 'u', 'v' and numeric 'length'") from exc
        if not 0 <= eid < m or eid in seen_ids:
            raise RoadmapError(f"{path}: edge ids must be 0..{m - 1} without repeats (got {eid})")
        seen_ids.add(eid)
        endpoints[eid] = (u, v)
        lengths[eid] = length

    try:
        return RoadGraph(
            coords=coords,
            edge_endpoints=endpoints,
            edge_lengths=lengths,
            rsu_vertices=frozenset(int(v) for v in raw.get("rsu", [])),
            station_vertices=tuple(int(v) for v in raw.get("stations", [])),
        )
    except RoadmapError as exc:
        raise RoadmapError(f"{path}: {exc}") from exc


def save_roadmap(g: RoadGraph, path: "str | Path") -> Path:
    """Write a road graph back to the roadmap JSON schema."""
    path = Path(path)
    doc = {
        "vertices": [
            {"id": v, "x": float(g.coords[v, 0]), "y": float(g.coords[v, 1])} for v in range(g.n)
        ],
        "edges": [
            {
                "id": e,
                "u": int(g.edge_endpoints[e, 0]),
                "v": int(g.edge_endpoints[e, 1]),
                "length": float(g.edge_lengths[e]),
            }
            for e in range(g.m)
        ],
        "rsu": sorted(g.rsu_vertices),
        "stations": list(g.station_vertices),
    }
    path.write_text(json.dumps(doc, indent=2) + "\n")
    return path


def load_trace(path: "str | Path", g: RoadGraph, horizon: "int | None" = None) -> TrafficTrace:
    """Load a traffic CSV for ``g``.

    Without ``horizon`` the slot count is the largest slot index seen plus
    one, and every slot up to it must appear in the file (an absent slot is
    reported as an error rather than silently read as empty).  With
    ``horizon`` given, absent slots are all-zero and slots past the horizon
    are rejected.  A file with no data rows is a single all-zero slot.
    """
    path = Path(path)
    rows: list[tuple[int, int, int, int]] = []
    slots_seen: dict[int, int] = {}
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:3]] != ["t", "edge", "count"]:
            raise TraceError(f"{path}: expected header 't,edge,count'")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                t, edge, count = int(row[0]), int(row[1]), int(row[2])
            except (IndexError, ValueError) as exc:
                raise TraceError(f"{path}: row {lineno}: expected three integers, got {row!r}") from exc
            if t < 0:
                raise TraceError(f"{path}: row {lineno}: negative slot {t}")
            if horizon is not None and t >= horizon:
                raise TraceError(f"{path}: row {lineno}: slot {t} is past the horizon {horizon}")
            if not 0 <= edge < g.m:
                raise TraceError(f"{path}: row {lineno}: unknown edge id {edge}")
            if count < 0:
                raise TraceError(f"{path}: row {lineno}: negative count {count}")
            rows.append((t, edge, count, lineno))
            slots_seen.setdefault(t, lineno)

    if horizon is None:
        horizon = max(slots_seen) + 1 if slots_seen else 1
        missing = [t for t in range(horizon) if t not in slots_seen] if slots_seen else []
        if missing:
            ref = min(lineno for t, lineno in slots_seen.items() if t > missing[0])
            raise TraceError(
                f"{path}: slot {missing[0]} is missing (later slot first referenced at row {ref});"
                " pass an explicit horizon to treat absent slots as empty"
            )
    if horizon < 1:
        raise TraceError("horizon must be >= 1")

    counts = np.zeros((horizon, g.m), dtype=np.int64)
    for t, edge, count, _lineno in rows:
        counts[t, edge] += count
    return TrafficTrace(snapshots=tuple(TrafficSnapshot(c) for c in counts))


def save_trace(trace: TrafficTrace, path: "str | Path") -> Path:
    """Write a trace as sparse CSV; all-zero slots get a count-0 marker row."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "edge", "count"])
        for t, snap in enumerate(trace.snapshots):
            nonzero = np.flatnonzero(snap.counts)
            if nonzero.size == 0:
                writer.writerow([t, 0, 0])
                continue
            for e in nonzero:
                writer.writerow([t, int(e), int(snap.counts[e])])
    return path


def _edge_adjacency(g: RoadGraph) -> list[list[int]]:
    adj: list[set[int]] = [set() for _ in range(g.m)]
    for v in range(g.n):
        inc = g.incident_edges[v]
        for i in range(len(inc)):
            for j in range(i + 1, len(inc)):
                adj[inc[i]].add(inc[j])
                adj[inc[j]].add(inc[i])
    return [sorted(s) for s in adj]


def synth_trace(g: RoadGraph, p: SynthParams, horizon: int) -> TrafficTrace:
    """Generate ``horizon`` slots of random-walk traffic on ``g``.

    Vehicles start uniformly over edges; each subsequent slot every vehicle
    independently moves to a uniformly chosen adjacent edge with probability
    ``p.move_probability`` (vehicles on roads with no adjacent road stay put).
    Deterministic for a given seed.
    """
    if horizon < 1:
        raise TraceError("horizon must be >= 1")
    if g.m == 0:
        raise RoadmapError("cannot place vehicles on a graph with no edges")
    rng = np.random.default_rng(p.seed)
    adj = _edge_adjacency(g)
    positions = rng.integers(0, g.m, size=p.vehicle_count)
    snaps = [TrafficSnapshot(np.bincount(positions, minlength=g.m))]
    for _ in range(1, horizon):
        moves = rng.random(p.vehicle_count) < p.move_probability
        for i in np.flatnonzero(moves):
            options = adj[positions[i]]
            if options:
                positions[i] = options[rng.integers(0, len(options))]
        snaps.append(TrafficSnapshot(np.bincount(positions, minlength=g.m)))
    return TrafficTrace(snapshots=tuple(snaps))


def snapshot(trace: TrafficTrace, t: int) -> TrafficSnapshot:
    """The snapshot of slot ``t`` (1-based, 1 <= t <= horizon)."""
    if not 1 <= t <= trace.horizon:
        raise TraceError(f"slot {t} out of range 1..{trace.horizon}")
    return trace.snapshots[t - 1]
