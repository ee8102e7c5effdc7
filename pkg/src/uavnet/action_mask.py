"""Score-based dynamic action masking for UAV relocation.

Each candidate intersection gets a hand-crafted score: already-connected
vertices are discouraged outright (and among them, nearer is better), while
unconnected vertices trade off flight distance against how many connected
neighbors they would attach to.  A mask keeps only the top-scored candidates;
the number kept grows linearly over training so the guidance relaxes as the
learner matures.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .road_graph import RoadGraph

__all__ = [
    "ScoreParams",
    "VertexConnectivityView",
    "ActionMask",
    "score",
    "score_all",
    "rank_and_mask",
    "schedule_allowed",
    "mask_for",
]


@dataclass(frozen=True)
class ScoreParams:
    """Weights and normalizers of the candidate score.

    ``distance_norm`` should be on the order of the longest flight (meters)
    and ``neighbor_norm`` on the order of the maximum vertex degree, so both
    score terms live on comparable scales.
    """

    distance_weight: float = 1.0
    neighbor_weight: float = 1.0
    distance_norm: float = 1000.0
    neighbor_norm: float = 4.0

    def __post_init__(self) -> None:
        if self.distance_norm <= 0 or self.neighbor_norm <= 0:
            raise ValueError("distance_norm and neighbor_norm must be > 0")

    @classmethod
    def for_graph(cls, g: RoadGraph, distance_weight: float = 1.0, neighbor_weight: float = 1.0) -> "ScoreParams":
        """Normalize by the graph's span and maximum degree."""
        return cls(
            distance_weight=distance_weight,
            neighbor_weight=neighbor_weight,
            distance_norm=max(g.diameter, 1.0),
            neighbor_norm=float(max(int(g.degrees.max()) if g.n else 0, 1)),
        )


@dataclass(frozen=True)
class VertexConnectivityView:
    """Inputs the score needs: per-vertex connectivity and the UAV's vertex."""

    connected: np.ndarray  # (n,) bool
    prev_vertex: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "connected", np.asarray(self.connected, dtype=bool).reshape(-1))


@dataclass(frozen=True)
class ActionMask:
    """Binary action filter: exactly min(n_allowed, n) permitted vertices."""

    mu: np.ndarray  # (n,) bool
    n_allowed: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "mu", np.asarray(self.mu, dtype=bool).reshape(-1))

    @property
    def permitted(self) -> np.ndarray:
        return np.flatnonzero(self.mu)

    @classmethod
    def all_allowed(cls, n: int) -> "ActionMask":
        return cls(mu=np.ones(n, dtype=bool), n_allowed=n)

    @classmethod
    def single(cls, n: int, vertex: int) -> "ActionMask":
        mu = np.zeros(n, dtype=bool)
        mu[vertex] = True
        return cls(mu=mu, n_allowed=1)


def score(view: VertexConnectivityView, candidate: int, g: RoadGraph, sp: ScoreParams) -> float:
    """Score one candidate vertex for the UAV described by ``view``.

    Connected candidates score ``-1 - distance/distance_norm`` (never better
    than any unconnected candidate at equal weights); unconnected candidates
    score ``-distance_weight * distance / distance_norm + neighbor_weight *
    (connected neighbors) / neighbor_norm``.
    """
    candidate = g.check_vertex(candidate)
    l = g.distance_matrix[view.prev_vertex, candidate]
    if view.connected[candidate]:
        return float(-1.0 - l / sp.distance_norm)
    attached = sum(1 for w in g.adjacency[candidate] if view.connected[w])
    return float(-sp.distance_weight / sp.distance_norm * l + sp.neighbor_weight / sp.neighbor_norm * attached)


def score_all(view: VertexConnectivityView, g: RoadGraph, sp: ScoreParams) -> np.ndarray:
    """Vectorized :func:`score` over every vertex."""
    l = g.distance_matrix[g.check_vertex(view.prev_vertex)]
    con = view.connected.astype(np.float64)
    attached = g.adjacency_matrix @ con
    unconnected_score = -sp.distance_weight / sp.distance_norm * l + sp.neighbor_weight / sp.neighbor_norm * attached
    connected_score = -1.0 - l / sp.distance_norm
    return np.where(view.connected, connected_score, unconnected_score)


def rank_and_mask(scores: np.ndarray, n_allowed: int) -> ActionMask:
    """Permit the ``n_allowed`` best-scored vertices, breaking ties by lower id."""
    if n_allowed < 1:
        raise ValueError("n_allowed must be >= 1")
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    n = scores.shape[0]
    if n < 1:
        raise ValueError("need at least one candidate")
    order = np.argsort(-scores, kind="stable")  # descending score, ties by ascending id
    keep = order[: min(n_allowed, n)]
    mu = np.zeros(n, dtype=bool)
    mu[keep] = True
    return ActionMask(mu=mu, n_allowed=n_allowed)


def schedule_allowed(
    episode: int,
    total_episodes: int,
    n_actions: int,
    mode: str = "linear",
    fixed_value: "int | None" = None,
) -> int:
    """Number of permitted actions for a training episode (1-based).

    ``linear`` grows the budget with training progress, reaching the full
    action set on the final episode; ``fixed`` clamps a constant into
    [1, n_actions].  The budget never drops below 1 so some action is always
    legal.
    """
    if total_episodes <= 0:
        raise ValueError("total_episodes must be >= 1")
    if not 1 <= episode <= total_episodes:
        raise ValueError(f"episode {episode} out of range 1..{total_episodes}")
    if mode == "linear":
        return min(n_actions, max(1, (episode * n_actions) // total_episodes))
    if mode == "fixed":
        if fixed_value is None:
            raise ValueError("fixed mode needs fixed_value")
        return min(n_actions, max(1, int(fixed_value)))
    raise ValueError(f"unknown schedule mode {mode!r}")


def mask_for(view: VertexConnectivityView, g: RoadGraph, sp: ScoreParams, n_allowed: int) -> ActionMask:
    """Score every vertex and keep the best ``n_allowed``."""
    return rank_and_mask(score_all(view, g, sp), n_allowed)
