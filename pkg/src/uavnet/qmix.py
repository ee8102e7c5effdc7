"""Cooperative value-factorization learner with score-masked exploration.

Per-agent action-value networks score every intersection from the local
observation; a state-conditioned monotonic mixer combines the chosen values
into a team value for training (centralized training, decentralized
execution).  Exploration is epsilon-greedy restricted by the score-based
action mask, whose budget of permitted actions grows over training.  Targets
are double-Q style: the online networks pick the best next action among the
actions that were actually legal at the next step, the target networks price
it.
"""

from __future__ import annotations

import csv
import json
import math
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import nets
from .action_mask import ActionMask, ScoreParams, VertexConnectivityView, mask_for, schedule_allowed
from .env import MetricsReport, Observation, UavEnv, metrics
from .nets import AdamState, DenseNet, Gradients, adam_step, forward, backward, init_adam, init_net

__all__ = [
    "Transition",
    "ReplayBuffer",
    "TrainConfig",
    "MixerNet",
    "MixerGrads",
    "EpisodeRecord",
    "TrainedPolicy",
    "EvalSummary",
    "agent_q",
    "select_action",
    "init_mixer",
    "mix",
    "mix_forward",
    "mix_backward",
    "td_loss",
    "Trainer",
    "train",
    "evaluate",
    "write_curve_csv",
    "save_policy",
    "load_policy",
]


@dataclass(frozen=True)
class Transition:
    """One slot of joint experience, including the masks in force."""

    state: np.ndarray  # (state_dim,)
    obs: np.ndarray  # (C, obs_dim)
    actions: np.ndarray  # (C,) int
    reward: float
    next_state: np.ndarray
    next_obs: np.ndarray
    done: bool
    masks: np.ndarray  # (C, n) bool, masks used when acting
    next_masks: np.ndarray  # (C, n) bool, legal actions at the next slot
    alive: np.ndarray  # (C,) bool, liveness when acting (dead agents carry no gradient)


class ReplayBuffer:
    """Bounded FIFO of transitions with a seeded uniform sampler."""

    def __init__(self, capacity: int, seed: "int | np.random.SeedSequence" = 0) -> None:
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._items: deque[Transition] = deque(maxlen=capacity)
        self._rng = np.random.default_rng(seed)

    def push(self, item: Transition) -> None:
        self._items.append(item)

    def __len__(self) -> int:
        return len(self._items)

    def sample(self, batch_size: int) -> list[Transition]:
        if batch_size > len(self._items):
            raise ValueError(f"buffer holds {len(self._items)} transitions, cannot sample {batch_size}")
        idx = self._rng.choice(len(self._items), size=batch_size, replace=False)
        return [self._items[int(i)] for i in idx]


@dataclass(frozen=True)
class TrainConfig:
    """Everything that pins down one training run."""

    episodes: int
    gamma: float = 0.95
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_decay_frac: float = 0.6  # fraction of episodes over which epsilon anneals
    batch_size: int = 32
    buffer_capacity: "int | None" = None  # default: 5000 episodes' worth of slots
    target_update_interval: int = 200  # gradient updates between target syncs
    update_period: int = 1  # episodes between sampling rounds
    updates_per_round: int = 1
    learning_rate: float = 5e-4
    agent_hidden: tuple[int, ...] = (64, 64)
    mixer_embed: int = 32
    mask_mode: str = "linear"  # linear | fixed | off
    mask_fixed: "int | None" = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.episodes < 1:
            raise ValueError("episodes must be >= 1")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must be in [0, 1)")
        for name in ("eps_start", "eps_end"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if not 0.0 < self.eps_decay_frac <= 1.0:
            raise ValueError("eps_decay_frac must be in (0, 1]")
        for name in ("batch_size", "target_update_interval", "update_period", "updates_per_round", "mixer_embed"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.mask_mode not in ("linear", "fixed", "off"):
            raise ValueError(f"unknown mask_mode {self.mask_mode!r}")
        if self.mask_mode == "fixed" and self.mask_fixed is not None and self.mask_fixed < 1:
            raise ValueError("mask_fixed must be >= 1")

    def epsilon(self, episode: int) -> float:
        """Linear anneal from eps_start to eps_end over the decay fraction."""
        decay_episodes = max(1, round(self.eps_decay_frac * self.episodes))
        frac = min(1.0, (episode - 1) / decay_episodes)
        return self.eps_start + (self.eps_end - self.eps_start) * frac


@dataclass
class MixerNet:
    """State-conditioned monotonic mixer.

    Hypernetworks read the global state and emit the mixing weights; the
    weights pass through absolute value, so the team value is non-decreasing
    in every agent's value.
    """

    num_agents: int
    embed: int
    w1_net: DenseNet  # state -> C * embed, weights of the first mixing layer
    b1_net: DenseNet  # state -> embed
    w2_net: DenseNet  # state -> embed, weights of the second mixing layer
    b2_net: DenseNet  # state -> 1, via a small hidden layer

    def subnets(self) -> tuple[DenseNet, DenseNet, DenseNet, DenseNet]:
        return (self.w1_net, self.b1_net, self.w2_net, self.b2_net)

    def clone(self) -> "MixerNet":
        return MixerNet(
            num_agents=self.num_agents,
            embed=self.embed,
            w1_net=self.w1_net.clone(),
            b1_net=self.b1_net.clone(),
            w2_net=self.w2_net.clone(),
            b2_net=self.b2_net.clone(),
        )

    def copy_from(self, other: "MixerNet") -> None:
        for mine, theirs in zip(self.subnets(), other.subnets()):
            mine.copy_from(theirs)


@dataclass
class MixerGrads:
    w1: Gradients
    b1: Gradients
    w2: Gradients
    b2: Gradients

    def as_tuple(self) -> tuple[Gradients, Gradients, Gradients, Gradients]:
        return (self.w1, self.b1, self.w2, self.b2)


@dataclass
class MixCache:
    q: np.ndarray
    w1_raw: np.ndarray
    w2_raw: np.ndarray
    h_pre: np.ndarray
    h: np.ndarray
    c_w1: nets.ForwardCache
    c_b1: nets.ForwardCache
    c_w2: nets.ForwardCache
    c_b2: nets.ForwardCache
    squeeze: bool


def init_mixer(num_agents: int, state_dim: int, embed: int, seed: "int | np.random.SeedSequence" = 0) -> MixerNet:
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    s_w1, s_b1, s_w2, s_b2 = ss.spawn(4)
    return MixerNet(
        num_agents=num_agents,
        embed=embed,
        w1_net=init_net((state_dim, num_agents * embed), seed=s_w1),
        b1_net=init_net((state_dim, embed), seed=s_b1),
        w2_net=init_net((state_dim, embed), seed=s_w2),
        b2_net=init_net((state_dim, embed, 1), seed=s_b2),
    )


def _elu(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0, x, np.expm1(x))


def _elu_grad(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0, 1.0, np.exp(np.minimum(x, 0.0)))


def mix_forward(mixer: MixerNet, agent_values: np.ndarray, state: np.ndarray) -> tuple[np.ndarray, MixCache]:
    """Team value for agent values (C,) or (B, C) and matching state."""
    q = np.asarray(agent_values, dtype=np.float64)
    s = np.asarray(state, dtype=np.float64)
    squeeze = q.ndim == 1
    if squeeze:
        q = q.reshape(1, -1)
        s = s.reshape(1, -1)
    if q.shape[1] != mixer.num_agents:
        raise ValueError(f"expected {mixer.num_agents} agent values, got {q.shape[1]}")
    b, e = q.shape[0], mixer.embed
    w1_raw, c_w1 = forward(mixer.w1_net, s)
    b1, c_b1 = forward(mixer.b1_net, s)
    w2_raw, c_w2 = forward(mixer.w2_net, s)
    b2, c_b2 = forward(mixer.b2_net, s)
    w1 = np.abs(w1_raw).reshape(b, mixer.num_agents, e)
    h_pre = np.einsum("bc,bce->be", q, w1) + b1
    h = _elu(h_pre)
    q_tot = (h * np.abs(w2_raw)).sum(axis=1) + b2[:, 0]
    cache = MixCache(
        q=q, w1_raw=w1_raw, w2_raw=w2_raw, h_pre=h_pre, h=h,
        c_w1=c_w1, c_b1=c_b1, c_w2=c_w2, c_b2=c_b2, squeeze=squeeze,
    )
    return (q_tot[0] if squeeze else q_tot), cache


def mix_backward(mixer: MixerNet, cache: MixCache, upstream: np.ndarray) -> tuple[MixerGrads, np.ndarray]:
    """Gradients of ``sum(q_tot * upstream)`` w.r.t. mixer parameters and agent values."""
    g = np.asarray(upstream, dtype=np.float64).reshape(-1, 1)  # (B, 1)
    b, e = cache.h.shape
    c = mixer.num_agents
    w1 = np.abs(cache.w1_raw).reshape(b, c, e)
    w2 = np.abs(cache.w2_raw)
    d_b2 = g
    d_w2_raw = g * cache.h * np.sign(cache.w2_raw)
    d_h = g * w2
    d_h_pre = d_h * _elu_grad(cache.h_pre)
    d_b1 = d_h_pre
    d_w1 = np.einsum("bc,be->bce", cache.q, d_h_pre) * np.sign(cache.w1_raw).reshape(b, c, e)
    d_q = np.einsum("bce,be->bc", w1, d_h_pre)
    g_w1, _ = backward(mixer.w1_net, cache.c_w1, d_w1.reshape(b, c * e))
    g_b1, _ = backward(mixer.b1_net, cache.c_b1, d_b1)
    g_w2, _ = backward(mixer.w2_net, cache.c_w2, d_w2_raw)
    g_b2, _ = backward(mixer.b2_net, cache.c_b2, d_b2)
    grads = MixerGrads(w1=g_w1, b1=g_b1, w2=g_w2, b2=g_b2)
    return grads, (d_q[0] if cache.squeeze else d_q)


def mix(agent_values: np.ndarray, state: np.ndarray, mixer: MixerNet) -> float:
    """Scalar team value for one set of agent values and one state."""
    q_tot, _ = mix_forward(mixer, agent_values, state)
    return float(q_tot)


def agent_q(net: DenseNet, observation: np.ndarray) -> np.ndarray:
    """Per-vertex action values for one observation."""
    values, _ = forward(net, observation)
    return values


def select_action(q: np.ndarray, mask: ActionMask, epsilon: float, rng: np.random.Generator) -> int:
    """Masked epsilon-greedy: explore uniformly over permitted actions,
    otherwise take the best permitted value (ties to the lowest vertex id)."""
    permitted = mask.permitted
    if permitted.size == 0:
        raise ValueError("mask permits no action")
    if rng.random() < epsilon:
        return int(permitted[rng.integers(permitted.size)])
    masked = np.where(mask.mu, np.asarray(q, dtype=np.float64), -np.inf)
    return int(np.argmax(masked))


def td_loss(
    batch: list[Transition],
    agent_nets: list[DenseNet],
    mixer: MixerNet,
    target_agent_nets: list[DenseNet],
    target_mixer: MixerNet,
    gamma: float,
) -> tuple[float, list[Gradients], MixerGrads]:
    """Mean squared TD error over a batch, with exact gradients.

    Targets bootstrap only from actions that were legal at the next slot;
    agents that were out of energy when acting contribute value but no
    gradient.  The target itself is treated as a constant (semi-gradient).
    """
    if not batch:
        raise ValueError("empty batch")
    b = len(batch)
    c = len(agent_nets)
    states = np.stack([t.state for t in batch])
    next_states = np.stack([t.next_state for t in batch])
    actions = np.stack([t.actions for t in batch])
    rewards = np.array([t.reward for t in batch])
    dones = np.array([float(t.done) for t in batch])
    alive = np.stack([t.alive for t in batch]).astype(np.float64)
    rows = np.arange(b)

    chosen = np.empty((b, c))
    caches = []
    for u in range(c):
        obs_u = np.stack([t.obs[u] for t in batch])
        values, cache = forward(agent_nets[u], obs_u)
        chosen[:, u] = values[rows, actions[:, u]]
        caches.append(cache)
    q_tot, mix_cache = mix_forward(mixer, chosen, states)

    next_chosen = np.empty((b, c))
    for u in range(c):
        next_obs_u = np.stack([t.next_obs[u] for t in batch])
        next_masks_u = np.stack([t.next_masks[u] for t in batch])
        online_next, _ = forward(agent_nets[u], next_obs_u)
        best = np.argmax(np.where(next_masks_u, online_next, -np.inf), axis=1)
        target_next, _ = forward(target_agent_nets[u], next_obs_u)
        next_chosen[:, u] = target_next[rows, best]
    q_tot_next, _ = mix_forward(target_mixer, next_chosen, next_states)
    targets = rewards + gamma * (1.0 - dones) * q_tot_next

    err = q_tot - targets
    loss = float(np.mean(err**2))
    d_q_tot = 2.0 * err / b
    mixer_grads, d_chosen = mix_backward(mixer, mix_cache, d_q_tot)
    d_chosen = d_chosen * alive
    agent_grads: list[Gradients] = []
    for u in range(c):
        up = np.zeros((b, agent_nets[u].out_dim))
        up[rows, actions[:, u]] = d_chosen[:, u]
        grads, _ = backward(agent_nets[u], caches[u], up)
        agent_grads.append(grads)
    return loss, agent_grads, mixer_grads


@dataclass(frozen=True)
class EpisodeRecord:
    episode: int
    episode_return: float
    epsilon: float
    n_allowed: int
    loss_mean: float  # nan when no update ran this episode


@dataclass
class TrainedPolicy:
    """Greedy execution policy: per-agent nets plus the execution-time mask."""

    agent_nets: list[DenseNet]
    score_params: ScoreParams
    exec_n_allowed: "int | None"  # None executes unmasked
    kind: str = "q_sdam"

    def actions(self, env: UavEnv, observations: list[Observation], rng: np.random.Generator) -> list[int]:
        joint: list[int] = []
        n = env.graph.n
        for u in range(1, env.num_uavs + 1):
            if not env.uav_alive(u):
                joint.append(env.uav_pos(u))
                continue
            q = agent_q(self.agent_nets[u - 1], observations[u - 1].vector)
            if self.exec_n_allowed is None:
                mask = ActionMask.all_allowed(n)
            else:
                view = VertexConnectivityView(env.connected_vertices(), env.uav_pos(u))
                mask = mask_for(view, env.graph, self.score_params, self.exec_n_allowed)
            joint.append(select_action(q, mask, 0.0, rng))
        return joint


class Trainer:
    """Runs the training loop over one environment instance."""

    def __init__(self, env: UavEnv, cfg: TrainConfig, score_params: "ScoreParams | None" = None) -> None:
        self.env = env
        self.cfg = cfg
        g = env.graph
        self.score_params = score_params if score_params is not None else ScoreParams.for_graph(g)
        self.n = g.n
        self.c = env.num_uavs
        obs_dim = 2 * g.m + g.n
        state_dim = 2 * g.m + g.n + self.c
        if cfg.mask_mode == "fixed" and cfg.mask_fixed is None:
            raise ValueError("mask_mode 'fixed' needs mask_fixed")
        ss = np.random.SeedSequence(cfg.seed)
        seeds = ss.spawn(self.c + 3)
        self.agent_nets = [
            init_net((obs_dim, *cfg.agent_hidden, self.n), seed=seeds[i]) for i in range(self.c)
        ]
        self.mixer = init_mixer(self.c, state_dim, cfg.mixer_embed, seed=seeds[self.c])
        self.target_nets = [net.clone() for net in self.agent_nets]
        self.target_mixer = self.mixer.clone()
        capacity = cfg.buffer_capacity if cfg.buffer_capacity is not None else 5000 * env.horizon
        self.buffer = ReplayBuffer(capacity, seed=seeds[self.c + 1])
        self.rng = np.random.default_rng(seeds[self.c + 2])
        self.agent_opt = [init_adam(net, cfg.learning_rate) for net in self.agent_nets]
        self.mixer_opt = [init_adam(net, cfg.learning_rate) for net in self.mixer.subnets()]
        self.updates = 0
        self.curve: list[EpisodeRecord] = []

    def _n_allowed(self, episode: int) -> int:
        cfg = self.cfg
        if cfg.mask_mode == "off":
            return self.n
        if cfg.mask_mode == "fixed":
            return schedule_allowed(episode, cfg.episodes, self.n, mode="fixed", fixed_value=cfg.mask_fixed)
        return schedule_allowed(episode, cfg.episodes, self.n, mode="linear")

    def _masks(self, n_allowed: int) -> list[ActionMask]:
        env = self.env
        masks = []
        for u in range(1, self.c + 1):
            if not env.uav_alive(u):
                masks.append(ActionMask.single(self.n, env.uav_pos(u)))
            elif self.cfg.mask_mode == "off":
                masks.append(ActionMask.all_allowed(self.n))
            else:
                view = VertexConnectivityView(env.connected_vertices(), env.uav_pos(u))
                masks.append(mask_for(view, env.graph, self.score_params, n_allowed))
        return masks

    def run_episode(self, episode: int) -> float:
        """One episode of interaction; transitions land in the buffer."""
        env = self.env
        cfg = self.cfg
        n_allowed = self._n_allowed(episode)
        epsilon = cfg.epsilon(episode)
        state, obs = env.reset()
        masks = self._masks(n_allowed)
        ep_return = 0.0
        for _ in range(env.horizon):
            alive = np.array([env.uav_alive(u) for u in range(1, self.c + 1)])
            joint: list[int] = []
            for u in range(1, self.c + 1):
                if not alive[u - 1]:
                    joint.append(env.uav_pos(u))
                    continue
                q = agent_q(self.agent_nets[u - 1], obs[u - 1].vector)
                a = select_action(q, masks[u - 1], epsilon, self.rng)
                if not masks[u - 1].mu[a]:
                    raise AssertionError(f"selected masked-out action {a} for UAV {u}")
                joint.append(a)
            outcome = env.step(joint)
            next_masks = self._masks(n_allowed)
            self.buffer.push(
                Transition(
                    state=state.vector,
                    obs=np.stack([o.vector for o in obs]),
                    actions=np.array(joint, dtype=np.int64),
                    reward=outcome.reward,
                    next_state=outcome.state.vector,
                    next_obs=np.stack([o.vector for o in outcome.observations]),
                    done=outcome.done,
                    masks=np.stack([m.mu for m in masks]),
                    next_masks=np.stack([m.mu for m in next_masks]),
                    alive=alive,
                )
            )
            state, obs = outcome.state, list(outcome.observations)
            masks = next_masks
            ep_return += outcome.reward
        return ep_return

    def update(self) -> float:
        """One sampled gradient step; syncs targets on schedule."""
        cfg = self.cfg
        batch = self.buffer.sample(cfg.batch_size)
        loss, agent_grads, mixer_grads = td_loss(
            batch, self.agent_nets, self.mixer, self.target_nets, self.target_mixer, cfg.gamma
        )
        for net, grads, state in zip(self.agent_nets, agent_grads, self.agent_opt):
            adam_step(net, grads, state)
        for net, grads, state in zip(self.mixer.subnets(), mixer_grads.as_tuple(), self.mixer_opt):
            adam_step(net, grads, state)
        self.updates += 1
        if self.updates % cfg.target_update_interval == 0:
            self.sync_targets()
        return loss

    def sync_targets(self) -> None:
        for target, online in zip(self.target_nets, self.agent_nets):
            target.copy_from(online)
        self.target_mixer.copy_from(self.mixer)

    def run(self) -> tuple[TrainedPolicy, list[EpisodeRecord]]:
        cfg = self.cfg
        for episode in range(1, cfg.episodes + 1):
            ep_return = self.run_episode(episode)
            losses: list[float] = []
            if len(self.buffer) >= cfg.batch_size and episode % cfg.update_period == 0:
                for _ in range(cfg.updates_per_round):
                    losses.append(self.update())
            self.curve.append(
                EpisodeRecord(
                    episode=episode,
                    episode_return=ep_return,
                    epsilon=cfg.epsilon(episode),
                    n_allowed=self._n_allowed(episode),
                    loss_mean=float(np.mean(losses)) if losses else math.nan,
                )
            )
        return self.policy(), self.curve

    def policy(self) -> TrainedPolicy:
        exec_n = self.cfg.mask_fixed if self.cfg.mask_mode == "fixed" else None
        kind = "q_sam" if self.cfg.mask_mode == "fixed" else "q_sdam"
        return TrainedPolicy(
            agent_nets=[net.clone() for net in self.agent_nets],
            score_params=self.score_params,
            exec_n_allowed=exec_n,
            kind=kind,
        )


def train(
    env_factory, cfg: TrainConfig, score_params: "ScoreParams | None" = None
) -> tuple[TrainedPolicy, list[EpisodeRecord]]:
    """Train on a fresh environment from ``env_factory`` and return
    (greedy policy, per-episode learning curve)."""
    return Trainer(env_factory(), cfg, score_params).run()


@dataclass(frozen=True)
class EvalSummary:
    """Greedy-rollout metrics aggregated over evaluation episodes."""

    reports: tuple[MetricsReport, ...]
    mean: dict[str, float]
    std: dict[str, float]
    mean_return: float

    @property
    def episodes(self) -> int:
        return len(self.reports)


def evaluate(policy, env_factory, episodes: int, seed: int = 0) -> EvalSummary:
    """Roll out a policy greedily and aggregate the episode metrics."""
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    env: UavEnv = env_factory()
    rng = np.random.default_rng(seed)
    reports: list[MetricsReport] = []
    returns: list[float] = []
    for _ in range(episodes):
        _state, obs = env.reset()
        total = 0.0
        while not env.done:
            joint = policy.actions(env, obs, rng)
            outcome = env.step(joint)
            obs = list(outcome.observations)
            total += outcome.reward
        reports.append(metrics(env.episode_log()))
        returns.append(total)
    keys = reports[0].as_dict().keys()
    stacked = {k: np.array([r.as_dict()[k] for r in reports]) for k in keys}
    return EvalSummary(
        reports=tuple(reports),
        mean={k: float(v.mean()) for k, v in stacked.items()},
        std={k: float(v.std()) for k, v in stacked.items()},
        mean_return=float(np.mean(returns)),
    )


def write_curve_csv(curve: list[EpisodeRecord], path: "str | Path") -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["episode", "return", "epsilon", "N_A", "loss_mean"])
        for rec in curve:
            writer.writerow([rec.episode, rec.episode_return, rec.epsilon, rec.n_allowed, rec.loss_mean])
    return path


POLICY_FORMAT = "uavnet-policy"
POLICY_VERSION = 1


def save_policy(policy: TrainedPolicy, path: "str | Path") -> Path:
    """Checkpoint a trained policy as versioned JSON."""
    path = Path(path)
    doc = {
        "format": POLICY_FORMAT,
        "version": POLICY_VERSION,
        "kind": policy.kind,
        "exec_n_allowed": policy.exec_n_allowed,
        "score_params": {
            "distance_weight": policy.score_params.distance_weight,
            "neighbor_weight": policy.score_params.neighbor_weight,
            "distance_norm": policy.score_params.distance_norm,
            "neighbor_norm": policy.score_params.neighbor_norm,
        },
        "agent_nets": [nets.net_to_dict(net) for net in policy.agent_nets],
    }
    path.write_text(json.dumps(doc) + "\n")
    return path


def load_policy(path: "str | Path") -> TrainedPolicy:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != POLICY_FORMAT or doc.get("version") != POLICY_VERSION:
        raise ValueError(f"{path}: not a {POLICY_FORMAT} v{POLICY_VERSION} checkpoint")
    return TrainedPolicy(
        agent_nets=[nets.net_from_dict(d) for d in doc["agent_nets"]],
        score_params=ScoreParams(**doc["score_params"]),
        exec_n_allowed=doc["exec_n_allowed"],
        kind=doc["kind"],
    )
