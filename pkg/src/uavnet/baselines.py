"""Reference policies: score-greedy, uniform random, and fixed-mask training.

The score-greedy baseline always flies to the best-scored vertex.  Its view
of connectivity deliberately excludes UAV coverage, so each UAV's decision
depends only on its own previous position and the traffic; adding or
removing other UAVs never changes what one UAV does.  The fixed-mask learner
is the full training stack with a constant action budget instead of the
growing schedule.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .action_mask import ScoreParams, VertexConnectivityView, score_all
from .env import Observation, UavEnv
from .qmix import EpisodeRecord, TrainConfig, TrainedPolicy, Trainer

__all__ = [
    "POLICY_KINDS",
    "mu_greedy",
    "random_action",
    "MuGreedyPolicy",
    "RandomPolicy",
    "q_sam_train",
    "default_fixed_budget",
]

POLICY_KINDS = ("q_sdam", "q_sam", "mu_greedy", "random")


def mu_greedy(view: VertexConnectivityView, g, sp: ScoreParams) -> int:
    """The single best-scored vertex, ties to the lowest id."""
    scores = score_all(view, g, sp)
    return int(np.argmax(scores))


def random_action(rng: np.random.Generator, n: int) -> int:
    """Uniform vertex choice."""
    return int(rng.integers(n))


@dataclass(frozen=True)
class MuGreedyPolicy:
    """Every UAV flies to its top-scored vertex each slot.

    ``use_uav_coverage`` keeps the default per-UAV independence (False); set
    it True to score against the full coloring including other UAVs, which
    matches what the masked learners see.
    """

    score_params: ScoreParams
    use_uav_coverage: bool = False
    kind: str = "mu_greedy"

    def actions(self, env: UavEnv, observations: list[Observation], rng: np.random.Generator) -> list[int]:
        joint = []
        con = env.connected_vertices(include_uav_coverage=self.use_uav_coverage)
        for u in range(1, env.num_uavs + 1):
            if not env.uav_alive(u):
                joint.append(env.uav_pos(u))
                continue
            view = VertexConnectivityView(con, env.uav_pos(u))
            joint.append(mu_greedy(view, env.graph, self.score_params))
        return joint


@dataclass(frozen=True)
class RandomPolicy:
    """Every live UAV picks a uniformly random vertex each slot."""

    kind: str = "random"

    def actions(self, env: UavEnv, observations: list[Observation], rng: np.random.Generator) -> list[int]:
        return [
            random_action(rng, env.graph.n) if env.uav_alive(u) else env.uav_pos(u)
            for u in range(1, env.num_uavs + 1)
        ]


def default_fixed_budget(n_actions: int) -> int:
    """Default constant action budget for fixed-mask training: a quarter of
    the action set, at least one."""
    return max(1, n_actions // 4)


def q_sam_train(
    env_factory, cfg: TrainConfig, score_params: "ScoreParams | None" = None
) -> tuple[TrainedPolicy, list[EpisodeRecord]]:
    """Train with a constant action budget (the growing schedule disabled).

    ``cfg.mask_fixed`` defaults to a quarter of the action set.
    """
    env = env_factory()
    fixed = cfg.mask_fixed if cfg.mask_fixed is not None else default_fixed_budget(env.graph.n)
    cfg = replace(cfg, mask_mode="fixed", mask_fixed=fixed)
    return Trainer(env, cfg, score_params).run()
