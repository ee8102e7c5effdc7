"""Experiment orchestration: configs, runs, UAV-count sweeps, and reports.

A single JSON config describes an experiment end to end (roadmap, traffic,
fleet size, model parameters, training setup, seeds).  Every field has a
default, dotted ``--set`` overrides are supported, and the fully resolved
config is persisted next to the outputs so any run can be reproduced
byte-for-byte.
"""

from __future__ import annotations

import copy
import csv
import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import qmix, traffic
from .action_mask import ScoreParams
from .baselines import MuGreedyPolicy, POLICY_KINDS, RandomPolicy, q_sam_train
from .env import EnergyParams, RewardParams, UavEnv
from .qmix import TrainConfig, TrainedPolicy, evaluate, load_policy, save_policy, train, write_curve_csv
from .road_graph import RoadGraph, build_dual
from .traffic import SynthParams, load_roadmap, load_trace, save_trace, synth_trace

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "run",
    "eval_run",
    "sweep_uavs",
    "graph_info",
    "GraphInfo",
    "gen_traffic",
]

METRIC_KEYS = ("M_C", "M_E", "M_F", "O1", "O2")


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the field."""


_DEFAULTS: dict = {
    "scenario": "experiment",
    "roadmap": None,
    "trace": None,
    "synth": {"vehicles": 20, "move_probability": 0.3, "seed": 1},
    "uavs": 2,
    "horizon": 20,
    "energy": {
        "hover_power": 100.0,
        "comm_power": 20.0,
        "flight_energy": 50.0,
        "fly_speed": 10.0,
        "slot_seconds": 60.0,
        "initial_energy": 1.0e6,
    },
    "reward": {
        "connectivity_weight": 1.0,
        "energy_weight": 0.5,
        "connectivity_norm": None,
        "energy_norm": None,
    },
    "score": {
        "distance_weight": 1.0,
        "neighbor_weight": 1.0,
        "distance_norm": None,
        "neighbor_norm": None,
    },
    "train": {
        "episodes": 300,
        "gamma": 0.95,
        "eps_start": 1.0,
        "eps_end": 0.05,
        "eps_decay_frac": 0.6,
        "batch_size": 32,
        "buffer_capacity": None,
        "target_update_interval": 200,
        "update_period": 1,
        "updates_per_round": 1,
        "learning_rate": 5e-4,
        "agent_hidden": [64, 64],
        "mixer_embed": 32,
        "mask_mode": "linear",
        "mask_fixed": None,
    },
    "policy": "q_sdam",
    "policies": None,
    "seeds": [0],
    "eval_episodes": 5,
    "out": "runs",
    "checkpoint": None,
}


def _merge(base: dict, override: dict, context: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if key not in base:
            raise ConfigError(f"unknown config field '{context}{key}'")
        if isinstance(base[key], dict) and isinstance(value, dict):
            out[key] = _merge(base[key], value, context=f"{context}{key}.")
        else:
            out[key] = value
    return out


def _set_path(doc: dict, dotted: str, value) -> None:
    parts = dotted.split(".")
    here = doc
    for part in parts[:-1]:
        if part not in here or not isinstance(here[part], dict):
            raise ConfigError(f"unknown config field '{dotted}'")
        here = here[part]
    if parts[-1] not in here:
        raise ConfigError(f"unknown config field '{dotted}'")
    here[parts[-1]] = value


def parse_override(item: str) -> tuple[str, object]:
    """Parse a 'key.path=value' override; the value is JSON when it parses."""
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not of the form key=value")
    key, raw = item.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


@dataclass(frozen=True)
class ExperimentConfig:
    """A fully resolved experiment description."""

    scenario: str
    roadmap: Path
    trace: "Path | None"
    synth: SynthParams
    uavs: int
    horizon: int
    energy: EnergyParams
    reward: RewardParams
    score_overrides: dict
    train: dict
    policy: str
    policies: "tuple[str, ...] | None"
    seeds: tuple[int, ...]
    eval_episodes: int
    out: Path
    checkpoint: "Path | None"
    raw: dict

    @classmethod
    def from_dict(cls, doc: dict, base_dir: "Path | None" = None) -> "ExperimentConfig":
        merged = _merge(_DEFAULTS, doc)
        base = Path(base_dir) if base_dir is not None else Path.cwd()

        if not merged["roadmap"]:
            raise ConfigError("missing required field 'roadmap'")
        roadmap = Path(merged["roadmap"])
        if not roadmap.is_absolute():
            roadmap = base / roadmap
        if not roadmap.exists():
            raise ConfigError(f"field 'roadmap': file not found: {roadmap}")

        trace_path = None
        if merged["trace"]:
            trace_path = Path(merged["trace"])
            if not trace_path.is_absolute():
                trace_path = base / trace_path
            if not trace_path.exists():
                raise ConfigError(f"field 'trace': file not found: {trace_path}")

        checkpoint = None
        if merged["checkpoint"]:
            checkpoint = Path(merged["checkpoint"])
            if not checkpoint.is_absolute():
                checkpoint = base / checkpoint
            if not checkpoint.exists():
                raise ConfigError(f"field 'checkpoint': file not found: {checkpoint}")

        if merged["policy"] not in POLICY_KINDS:
            raise ConfigError(f"field 'policy': unknown policy {merged['policy']!r}, expected one of {POLICY_KINDS}")
        policies = merged["policies"]
        if policies is not None:
            policies = tuple(policies)
            for p in policies:
                if p not in POLICY_KINDS:
                    raise ConfigError(f"field 'policies': unknown policy {p!r}")
        seeds = tuple(int(s) for s in merged["seeds"])
        if not seeds:
            raise ConfigError("field 'seeds': must not be empty")
        if int(merged["uavs"]) < 1:
            raise ConfigError("field 'uavs': must be >= 1")
        if int(merged["eval_episodes"]) < 1:
            raise ConfigError("field 'eval_episodes': must be >= 1")
        if int(merged["horizon"]) < 1:
            raise ConfigError("field 'horizon': must be >= 1")

        synth_doc = merged["synth"]
        try:
            synth = SynthParams(
                vehicle_count=int(synth_doc["vehicles"]),
                move_probability=float(synth_doc["move_probability"]),
                seed=int(synth_doc["seed"]),
            )
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"field 'synth': {exc}") from exc
        try:
            energy = EnergyParams(**merged["energy"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"field 'energy': {exc}") from exc
        try:
            reward = RewardParams(**merged["reward"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"field 'reward': {exc}") from exc

        out_raw = Path(str(merged["out"]))
        return cls(
            scenario=str(merged["scenario"]),
            roadmap=roadmap,
            trace=trace_path,
            synth=synth,
            uavs=int(merged["uavs"]),
            horizon=int(merged["horizon"]),
            energy=energy,
            reward=reward,
            score_overrides=dict(merged["score"]),
            train=dict(merged["train"]),
            policy=str(merged["policy"]),
            policies=policies,
            seeds=seeds,
            eval_episodes=int(merged["eval_episodes"]),
            out=out_raw if out_raw.is_absolute() else base / out_raw,
            checkpoint=checkpoint,
            raw=merged,
        )

    def load_graph(self) -> RoadGraph:
        return load_roadmap(self.roadmap)

    def load_trace(self, g: RoadGraph) -> traffic.TrafficTrace:
        if self.trace is not None:
            return load_trace(self.trace, g)
        return synth_trace(g, self.synth, self.horizon)

    def score_params(self, g: RoadGraph) -> ScoreParams:
        doc = self.score_overrides
        base = ScoreParams.for_graph(
            g,
            distance_weight=float(doc.get("distance_weight", 1.0)),
            neighbor_weight=float(doc.get("neighbor_weight", 1.0)),
        )
        kwargs = {}
        if doc.get("distance_norm") is not None:
            kwargs["distance_norm"] = float(doc["distance_norm"])
        if doc.get("neighbor_norm") is not None:
            kwargs["neighbor_norm"] = float(doc["neighbor_norm"])
        return replace(base, **kwargs) if kwargs else base

    def train_config(self, seed: int) -> TrainConfig:
        doc = dict(self.train)
        doc["agent_hidden"] = tuple(doc.get("agent_hidden", (64, 64)))
        try:
            return TrainConfig(seed=seed, **doc)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"field 'train': {exc}") from exc

    def env_factory(self, g: RoadGraph, trace: traffic.TrafficTrace, uavs: "int | None" = None):
        count = self.uavs if uavs is None else uavs
        return lambda: UavEnv(g, trace, count, self.energy, self.reward)


def load_config(path: "str | Path", overrides: "list[str] | None" = None) -> ExperimentConfig:
    """Load a config file and apply dotted key=value overrides."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    merged = _merge(_DEFAULTS, doc)
    for item in overrides or ():
        key, value = parse_override(item)
        _set_path(merged, key, value)
    return ExperimentConfig.from_dict(merged, base_dir=path.parent)


# -- plotting ---------------------------------------------------------------


def _plot_curve(curve: list[qmix.EpisodeRecord], path: Path, title: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "uavnet"
    fig, ax = plt.subplots(figsize=(7, 4))
    episodes = [r.episode for r in curve]
    returns = [r.episode_return for r in curve]
    ax.plot(episodes, returns, lw=0.8, alpha=0.5, label="return")
    window = max(1, len(curve) // 50)
    if window > 1:
        smooth = np.convolve(returns, np.ones(window) / window, mode="valid")
        ax.plot(episodes[window - 1 :], smooth, lw=1.8, label=f"return ({window}-ep mean)")
    ax.set_xlabel("episode")
    ax.set_ylabel("return")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)


def _plot_sweep_metric(rows: list[dict], metric: str, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "uavnet"
    fig, ax = plt.subplots(figsize=(6, 4))
    policies = sorted({r["policy"] for r in rows})
    for policy in policies:
        mine = [r for r in rows if r["policy"] == policy]
        cs = sorted({r["C"] for r in mine})
        means = []
        for c in cs:
            vals = [r[metric] for r in mine if r["C"] == c]
            means.append(sum(vals) / len(vals))
        ax.plot(cs, means, marker="o", label=policy)
    ax.set_xlabel("UAV count")
    ax.set_ylabel(metric)
    ax.set_title(f"{metric} vs fleet size")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)


# -- runs --------------------------------------------------------------------


def _train_for(
    kind: str,
    cfg: ExperimentConfig,
    g: RoadGraph,
    trace: traffic.TrafficTrace,
    seed: int,
    uavs: "int | None" = None,
) -> tuple[TrainedPolicy, list[qmix.EpisodeRecord]]:
    sp = cfg.score_params(g)
    factory = cfg.env_factory(g, trace, uavs)
    tc = cfg.train_config(seed)
    if kind == "q_sam":
        return q_sam_train(factory, tc, sp)
    return train(factory, tc, sp)


def _static_policy(kind: str, cfg: ExperimentConfig, g: RoadGraph):
    if kind == "random":
        return RandomPolicy()
    if kind == "mu_greedy":
        return MuGreedyPolicy(cfg.score_params(g))
    raise ConfigError(f"policy {kind!r} needs training or a checkpoint")


def _write_metrics_csv(path: Path, rows: list[tuple[object, dict[str, float]]]) -> None:
    """Rows are (seed label, metric dict); appends mean/std aggregate rows."""
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["seed", *METRIC_KEYS])
        for label, m in rows:
            writer.writerow([label] + [m[k] for k in METRIC_KEYS])
        if len(rows) > 1:
            for agg_name, agg in (("mean", np.mean), ("std", np.std)):
                writer.writerow(
                    [agg_name] + [float(agg([m[k] for _label, m in rows])) for k in METRIC_KEYS]
                )


class _OutputTracker:
    """Records created files so a failed run can clean up after itself."""

    def __init__(self) -> None:
        self.paths: list[Path] = []

    def add(self, path: Path) -> Path:
        self.paths.append(path)
        return path

    def discard_all(self) -> None:
        for path in reversed(self.paths):
            try:
                path.unlink(missing_ok=True)
            except OSError:
                pass


def run(cfg: ExperimentConfig) -> Path:
    """Train (when the policy learns) and evaluate per seed; write artifacts.

    Produces, under ``<out>/<scenario>/``: the resolved config, a metrics CSV
    (one row per seed plus mean/std), and per seed a learning-curve CSV, a
    learning-curve SVG, and a policy checkpoint.  Returns the run directory.
    """
    run_dir = cfg.out / cfg.scenario
    run_dir.mkdir(parents=True, exist_ok=True)
    tracker = _OutputTracker()
    try:
        g = cfg.load_graph()
        trace = cfg.load_trace(g)
        resolved = run_dir / "config.json"
        resolved.write_text(json.dumps(cfg.raw, indent=2, sort_keys=True) + "\n")
        tracker.add(resolved)

        rows: list[tuple[object, dict[str, float]]] = []
        for seed in cfg.seeds:
            if cfg.policy in ("q_sdam", "q_sam"):
                policy, curve = _train_for(cfg.policy, cfg, g, trace, seed)
                write_curve_csv(curve, tracker.add(run_dir / f"curve_seed{seed}.csv"))
                _plot_curve(curve, tracker.add(run_dir / f"curve_seed{seed}.svg"), f"{cfg.policy} seed {seed}")
                save_policy(policy, tracker.add(run_dir / f"policy_seed{seed}.json"))
            else:
                policy = _static_policy(cfg.policy, cfg, g)
            summary = evaluate(policy, cfg.env_factory(g, trace), cfg.eval_episodes, seed=seed)
            rows.append((seed, summary.mean))
        _write_metrics_csv(tracker.add(run_dir / "metrics.csv"), rows)
        return run_dir
    except Exception:
        tracker.discard_all()
        raise


def eval_run(cfg: ExperimentConfig) -> Path:
    """Evaluate the configured policy per seed without training.

    Learned policies need ``checkpoint`` set in the config; heuristic
    policies evaluate directly.  Writes ``metrics.csv`` and the resolved
    config under ``<out>/<scenario>_eval/`` and returns that directory.
    """
    run_dir = cfg.out / f"{cfg.scenario}_eval"
    run_dir.mkdir(parents=True, exist_ok=True)
    tracker = _OutputTracker()
    try:
        g = cfg.load_graph()
        trace = cfg.load_trace(g)
        if cfg.policy in ("q_sdam", "q_sam"):
            if cfg.checkpoint is None:
                raise ConfigError(f"field 'checkpoint': required to evaluate policy {cfg.policy!r}")
            policy = load_policy(cfg.checkpoint)
        else:
            policy = _static_policy(cfg.policy, cfg, g)
        resolved = tracker.add(run_dir / "config.json")
        resolved.write_text(json.dumps(cfg.raw, indent=2, sort_keys=True) + "\n")
        rows = []
        for seed in cfg.seeds:
            summary = evaluate(policy, cfg.env_factory(g, trace), cfg.eval_episodes, seed=seed)
            rows.append((seed, summary.mean))
        _write_metrics_csv(tracker.add(run_dir / "metrics.csv"), rows)
        return run_dir
    except Exception:
        tracker.discard_all()
        raise


def sweep_uavs(cfg: ExperimentConfig, c_list: "list[int] | tuple[int, ...]") -> Path:
    """One run per policy per fleet size per seed; aggregate CSV plus plots.

    Failures of individual cells are recorded in ``sweep_failures.csv`` and
    the sweep continues.  Returns the sweep directory.
    """
    if not c_list:
        raise ConfigError("sweep needs at least one UAV count")
    if any(int(c) < 1 for c in c_list):
        raise ConfigError("UAV counts must be >= 1")
    policies = cfg.policies if cfg.policies is not None else (cfg.policy,)
    sweep_dir = cfg.out / f"{cfg.scenario}_sweep"
    sweep_dir.mkdir(parents=True, exist_ok=True)
    g = cfg.load_graph()
    trace = cfg.load_trace(g)
    (sweep_dir / "config.json").write_text(json.dumps(cfg.raw, indent=2, sort_keys=True) + "\n")

    rows: list[dict] = []
    failures: list[tuple[str, int, int, str]] = []
    for kind in policies:
        for c in c_list:
            for seed in cfg.seeds:
                try:
                    if kind in ("q_sdam", "q_sam"):
                        cell_dir = sweep_dir / "cells" / f"{kind}_C{c}_seed{seed}"
                        cell_dir.mkdir(parents=True, exist_ok=True)
                        policy, curve = _train_for(kind, cfg, g, trace, seed, uavs=int(c))
                        write_curve_csv(curve, cell_dir / "curve.csv")
                        save_policy(policy, cell_dir / "policy.json")
                    else:
                        policy = _static_policy(kind, cfg, g)
                    summary = evaluate(policy, cfg.env_factory(g, trace, int(c)), cfg.eval_episodes, seed=seed)
                    rows.append(
                        {
                            "policy": kind,
                            "C": int(c),
                            "seed": seed,
                            "M_C": summary.mean["M_C"],
                            "M_E": summary.mean["M_E"],
                            "M_F": summary.mean["M_F"],
                        }
                    )
                except Exception as exc:  # keep sweeping, flag the cell
                    failures.append((kind, int(c), seed, f"{type(exc).__name__}: {exc}"))

    csv_path = sweep_dir / "sweep.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["policy", "C", "seed", "M_C", "M_E", "M_F"])
        for r in rows:
            writer.writerow([r["policy"], r["C"], r["seed"], r["M_C"], r["M_E"], r["M_F"]])
        for kind in policies:
            for c in c_list:
                cell = [r for r in rows if r["policy"] == kind and r["C"] == int(c)]
                if not cell:
                    continue
                for agg_name, agg in (("mean", np.mean), ("std", np.std)):
                    writer.writerow(
                        [kind, int(c), agg_name]
                        + [float(agg([r[k] for r in cell])) for k in ("M_C", "M_E", "M_F")]
                    )
    if failures:
        with (sweep_dir / "sweep_failures.csv").open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["policy", "C", "seed", "error"])
            writer.writerows(failures)
    if rows:
        for metric in ("M_C", "M_E", "M_F"):
            _plot_sweep_metric(rows, metric, sweep_dir / f"sweep_{metric}.svg")
    return sweep_dir


# -- inspection and generation ------------------------------------------------


@dataclass(frozen=True)
class GraphInfo:
    """Structural summary of a roadmap."""

    n: int
    m: int
    degree_histogram: dict[int, int]
    diameter: float
    dual_vertices: int
    dual_edges: int
    stations: tuple[int, ...]
    rsu: tuple[int, ...]
    connected: bool

    def to_text(self) -> str:
        lines = [
            f"vertices:      {self.n}",
            f"edges:         {self.m}",
            f"connected:     {'yes' if self.connected else 'no'}",
            f"span (m):      {self.diameter}",
            f"dual vertices: {self.dual_vertices}",
            f"dual edges:    {self.dual_edges}",
            "degree histogram:",
        ]
        for degree in sorted(self.degree_histogram):
            lines.append(f"  degree {degree}: {self.degree_histogram[degree]}")
        lines.append(f"stations:      {list(self.stations)}")
        lines.append(f"rsu:           {list(self.rsu)}")
        return "\n".join(lines)


def graph_info(roadmap_path: "str | Path") -> GraphInfo:
    """Load a roadmap and summarize its structure."""
    g = load_roadmap(roadmap_path)
    dual = build_dual(g)
    histogram: dict[int, int] = {}
    for d in g.degrees:
        histogram[int(d)] = histogram.get(int(d), 0) + 1
    return GraphInfo(
        n=g.n,
        m=g.m,
        degree_histogram=histogram,
        diameter=g.diameter,
        dual_vertices=dual.vertex_count,
        dual_edges=len(dual.edges),
        stations=g.station_vertices,
        rsu=tuple(sorted(g.rsu_vertices)),
        connected=g.is_connected(),
    )


def gen_traffic(roadmap_path: "str | Path", synth: SynthParams, horizon: int, out_path: "str | Path") -> Path:
    """Generate a synthetic trace for a roadmap and write it as CSV."""
    g = load_roadmap(roadmap_path)
    trace = synth_trace(g, synth, horizon)
    return save_trace(trace, out_path)
