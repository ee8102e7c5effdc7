"""Discrete time-slot environment for cooperative UAV relay placement.

Each slot every live UAV may relocate to any intersection.  Relocation costs
flight energy proportional to distance; the remainder of the slot is spent
hovering and relaying, which costs power-for-time.  Coverage at the new
positions plus the slot's traffic determine the c-components, whose vehicle
sums drive the shared reward; the energy spent is the penalty term.  UAVs
whose battery empties become inert: they stop moving, spending, and covering,
and the episode simply continues without them.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import road_graph as rg
from . import traffic as tr

__all__ = [
    "EnergyParams",
    "UavState",
    "RewardParams",
    "GlobalState",
    "Observation",
    "StepOutcome",
    "SlotRecord",
    "EpisodeLog",
    "MetricsReport",
    "energy_cost",
    "reward",
    "metrics",
    "write_episode_csv",
    "UavEnv",
]


@dataclass(frozen=True)
class EnergyParams:
    """Per-UAV energy model coefficients.

    Hover and relay power apply for the part of the slot not spent flying;
    flight energy is proportional to the distance flown.  Any intersection is
    reachable within a slot: when the flight would exceed the slot, hover
    time clamps at zero and only the flight term remains.
    """

    hover_power: float = 100.0  # J/s while hovering
    comm_power: float = 20.0  # J/s relay service while hovering
    flight_energy: float = 50.0  # J/m flown
    fly_speed: float = 10.0  # m/s
    slot_seconds: float = 60.0
    initial_energy: float = 1.0e6  # J

    def __post_init__(self) -> None:
        for name in ("hover_power", "comm_power", "flight_energy", "fly_speed", "slot_seconds", "initial_energy"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")

    def max_slot_energy(self, g: rg.RoadGraph) -> float:
        """Upper bound on one slot's spend: full hover plus the longest flight."""
        return (self.hover_power + self.comm_power) * self.slot_seconds + self.flight_energy * g.diameter


@dataclass
class UavState:
    """One UAV: 1-based id, current intersection, remaining energy."""

    uid: int
    pos: int
    energy: float
    alive: bool = True


@dataclass(frozen=True)
class RewardParams:
    """Weights and normalizers of the per-slot team reward.

    The reward is ``connectivity_weight * (mean vehicles per c-component) /
    connectivity_norm - energy_weight * (mean energy per UAV) / energy_norm``
    with the connectivity term zero when there are no c-components.  Leave a
    normalizer ``None`` to have the environment resolve it: the vehicle total
    of the current slot (floored at 1) and the largest possible single-slot
    energy spend, respectively, which keeps each term within its weight.
    """

    connectivity_weight: float = 1.0
    energy_weight: float = 1.0
    connectivity_norm: "float | None" = None
    energy_norm: "float | None" = None

    def __post_init__(self) -> None:
        if self.connectivity_weight <= 0 or self.energy_weight < 0:
            raise ValueError("weights must be positive (energy_weight may be 0 for ablations)")
        for name in ("connectivity_norm", "energy_norm"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ValueError(f"{name} must be > 0 when given")


@dataclass(frozen=True)
class Observation:
    """What one UAV sees: normalized edge counts, edge connectivity, own position."""

    uid: int
    edge_counts: np.ndarray  # (m,) scaled to [0, 1]
    edge_connected: np.ndarray  # (m,) 0/1
    position_onehot: np.ndarray  # (n,)

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.edge_counts, self.edge_connected, self.position_onehot])


@dataclass(frozen=True)
class GlobalState:
    """Centralized-training state: edge features, all UAV positions, energies."""

    slot: int
    edge_counts: np.ndarray  # (m,) scaled to [0, 1]
    edge_connected: np.ndarray  # (m,) 0/1
    position_mass: np.ndarray  # (n,), one unit per live UAV at its vertex
    energies: np.ndarray  # (C,) scaled by the initial energy

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.edge_counts, self.edge_connected, self.position_mass, self.energies])


@dataclass(frozen=True)
class StepOutcome:
    """Everything produced by one environment step."""

    slot: int
    reward: float
    observations: tuple[Observation, ...]
    state: GlobalState
    done: bool
    energy_spent: tuple[float, ...]
    flight_distances: tuple[float, ...]
    report: rg.CComponentReport
    reward_params: RewardParams


@dataclass(frozen=True)
class SlotRecord:
    """Per-slot log entry used for episode metrics and CSV export."""

    slot: int
    k: int
    vehicle_sum: int
    component_vehicles: float  # mean vehicles per c-component, 0 when k = 0
    component_size: float  # mean edges per c-component, 0 when k = 0
    mean_flight: float  # mean flight distance over UAVs (m)
    reward: float
    energy_spent: tuple[float, ...]
    flight_distances: tuple[float, ...]


@dataclass(frozen=True)
class EpisodeLog:
    """Complete record of one episode."""

    num_uavs: int
    horizon: int
    records: tuple[SlotRecord, ...]
    initial_energies: tuple[float, ...]
    final_energies: tuple[float, ...]


@dataclass(frozen=True)
class MetricsReport:
    """Episode-level connectivity and energy metrics.

    ``mean_component_vehicles`` and ``mean_component_size`` average the
    per-slot component means over the horizon; slots without components
    contribute zero.  ``mean_flight_distance`` and ``mean_slot_energy`` are
    per UAV per slot.
    """

    mean_component_vehicles: float  # M_C, equals the connectivity objective O1
    mean_component_size: float  # M_E
    mean_flight_distance: float  # M_F (m)
    mean_slot_energy: float  # O2 (J)
    component_vehicles_series: tuple[float, ...]
    component_size_series: tuple[float, ...]
    flight_series: tuple[float, ...]
    energy_series: tuple[float, ...]
    reward_series: tuple[float, ...]

    def as_dict(self) -> dict[str, float]:
        return {
            "M_C": self.mean_component_vehicles,
            "M_E": self.mean_component_size,
            "M_F": self.mean_flight_distance,
            "O1": self.mean_component_vehicles,
            "O2": self.mean_slot_energy,
        }


def energy_cost(uav: UavState, target: int, g: rg.RoadGraph, ep: EnergyParams) -> float:
    """Energy for one slot: fly from the UAV's vertex to ``target``, hover the rest."""
    l = rg.flight_distance(g, uav.pos, target)
    hover = max(0.0, ep.slot_seconds - l / ep.fly_speed)
    return (ep.hover_power + ep.comm_power) * hover + ep.flight_energy * l


def reward(report: rg.CComponentReport, energy_spent: "tuple[float, ...] | list[float]", rp: RewardParams) -> float:
    """Team reward for one slot; both normalizers must be concrete here."""
    if rp.connectivity_norm is None or rp.energy_norm is None:
        raise ValueError("reward() needs resolved normalizers; the environment fills defaults")
    num_uavs = len(energy_spent)
    if report.k > 0:
        connectivity = rp.connectivity_weight * report.total_vehicles / (rp.connectivity_norm * report.k)
    else:
        connectivity = 0.0
    cost = rp.energy_weight * sum(energy_spent) / (rp.energy_norm * num_uavs)
    return connectivity - cost


def metrics(log: EpisodeLog) -> MetricsReport:
    """Aggregate a complete episode log into the standard metric set."""
    if len(log.records) != log.horizon:
        raise ValueError(f"incomplete episode log: {len(log.records)} of {log.horizon} slots")
    mc = tuple(r.component_vehicles for r in log.records)
    me = tuple(r.component_size for r in log.records)
    mf = tuple(r.mean_flight for r in log.records)
    en = tuple(sum(r.energy_spent) / log.num_uavs for r in log.records)
    rew = tuple(r.reward for r in log.records)
    t = log.horizon
    return MetricsReport(
        mean_component_vehicles=sum(mc) / t,
        mean_component_size=sum(me) / t,
        mean_flight_distance=sum(mf) / t,
        mean_slot_energy=sum(en) / t,
        component_vehicles_series=mc,
        component_size_series=me,
        flight_series=mf,
        energy_series=en,
        reward_series=rew,
    )


def write_episode_csv(log: EpisodeLog, path: "str | Path") -> Path:
    """Export per-slot episode data with one energy column per UAV."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["t", "k", "sum_n", "M_C_t", "M_E_t", "M_F_t", "r_t"]
            + [f"e_{u}" for u in range(1, log.num_uavs + 1)]
        )
        for r in log.records:
            writer.writerow(
                [r.slot, r.k, r.vehicle_sum, r.component_vehicles, r.component_size, r.mean_flight, r.reward]
                + [e for e in r.energy_spent]
            )
    return path


class UavEnv:
    """Multi-UAV placement environment over one road graph and traffic trace.

    Single-threaded and mutated only through :meth:`reset` / :meth:`step`;
    independent instances are safe to run in parallel.
    """

    def __init__(
        self,
        g: rg.RoadGraph,
        trace: tr.TrafficTrace,
        num_uavs: int,
        energy: EnergyParams = EnergyParams(),
        reward_params: RewardParams = RewardParams(),
    ) -> None:
        if num_uavs <= 0:
            raise ValueError("num_uavs must be >= 1")
        if not g.station_vertices:
            raise ValueError("graph has no UAV stations")
        self.graph = g
        self.trace = trace
        self.num_uavs = num_uavs
        self.energy = energy
        self.reward_params = reward_params
        self.dual = rg.build_dual(g)
        # Observation scale for vehicle counts, fixed over the whole trace.
        self.count_norm = max(1, trace.max_count)
        self._energy_norm = (
            reward_params.energy_norm if reward_params.energy_norm is not None else energy.max_slot_energy(g)
        )
        self._t: "int | None" = None
        self.uavs: list[UavState] = []
        self._coloring: "rg.ConnectivityColoring | None" = None
        self._static_coloring: "rg.ConnectivityColoring | None" = None
        self._records: list[SlotRecord] = []

    # -- lifecycle ---------------------------------------------------------

    @property
    def horizon(self) -> int:
        return self.trace.horizon

    @property
    def slot(self) -> int:
        """Current decision slot (1-based); capped at the horizon once done."""
        if self._t is None:
            raise RuntimeError("environment not reset")
        return min(self._t, self.horizon)

    @property
    def done(self) -> bool:
        return self._t is not None and self._t > self.horizon

    def reset(self) -> tuple[GlobalState, list[Observation]]:
        """Place UAVs on stations (round-robin), full batteries, slot 1."""
        stations = self.graph.station_vertices
        self.uavs = [
            UavState(uid=u, pos=stations[(u - 1) % len(stations)], energy=self.energy.initial_energy)
            for u in range(1, self.num_uavs + 1)
        ]
        self._t = 1
        self._records = []
        self._recolor()
        return self.state(), [self.observe(u) for u in range(1, self.num_uavs + 1)]

    def step(self, joint_action: "list[int] | tuple[int, ...]") -> StepOutcome:
        """Apply one joint relocation and advance a slot.

        Live UAVs move to their action vertex, paying flight plus residual
        hover energy; a UAV whose battery reaches zero is dead on arrival and
        contributes no coverage from this slot on.  Dead UAVs ignore their
        action slot entirely.  The reward is computed on the recolored
        connectivity of the current slot's traffic.
        """
        if self._t is None:
            raise RuntimeError("environment not reset")
        if self.done:
            raise RuntimeError("episode finished; call reset()")
        if len(joint_action) != self.num_uavs:
            raise ValueError(f"expected {self.num_uavs} actions, got {len(joint_action)}")
        t = self._t
        snap = tr.snapshot(self.trace, t)

        spent: list[float] = []
        flights: list[float] = []
        for uav, action in zip(self.uavs, joint_action):
            target = self.graph.check_vertex(action)
            if not uav.alive:
                spent.append(0.0)
                flights.append(0.0)
                continue
            cost = energy_cost(uav, target, self.graph, self.energy)
            l = rg.flight_distance(self.graph, uav.pos, target)
            uav.energy -= cost
            uav.pos = target
            if uav.energy <= 0:
                uav.alive = False
            spent.append(cost)
            flights.append(l)

        coloring = self._color_for(snap, include_uavs=True)
        report = rg.c_components(self.dual, coloring, snap)
        rp = self.resolved_reward_params(t)
        r = reward(report, spent, rp)

        self._records.append(
            SlotRecord(
                slot=t,
                k=report.k,
                vehicle_sum=report.total_vehicles,
                component_vehicles=report.total_vehicles / report.k if report.k else 0.0,
                component_size=report.total_size / report.k if report.k else 0.0,
                mean_flight=sum(flights) / self.num_uavs,
                reward=r,
                energy_spent=tuple(spent),
                flight_distances=tuple(flights),
            )
        )

        self._t = t + 1
        if not self.done:
            self._recolor()
        else:
            self._coloring = coloring
            self._static_coloring = self._color_for(snap, include_uavs=False)
        observations = tuple(self._observation(u) for u in range(1, self.num_uavs + 1))
        return StepOutcome(
            slot=t,
            reward=r,
            observations=observations,
            state=self.state(),
            done=self.done,
            energy_spent=tuple(spent),
            flight_distances=tuple(flights),
            report=report,
            reward_params=rp,
        )

    # -- views -------------------------------------------------------------

    def observe(self, u: int) -> Observation:
        """Observation of live UAV ``u`` (1-based) for the current slot."""
        uav = self._uav(u)
        if not uav.alive:
            raise ValueError(f"UAV {u} is out of energy")
        return self._observation(u)

    def state(self) -> GlobalState:
        counts, connected = self._edge_features()
        mass = np.zeros(self.graph.n, dtype=np.float64)
        for uav in self.uavs:
            if uav.alive:
                mass[uav.pos] += 1.0
        energies = np.array([max(uav.energy, 0.0) / self.energy.initial_energy for uav in self.uavs])
        return GlobalState(
            slot=self.slot,
            edge_counts=counts,
            edge_connected=connected,
            position_mass=mass,
            energies=energies,
        )

    def coloring(self) -> rg.ConnectivityColoring:
        """Connectivity coloring for the current slot, all coverage included."""
        if self._coloring is None:
            raise RuntimeError("environment not reset")
        return self._coloring

    def connected_vertices(self, include_uav_coverage: bool = True) -> np.ndarray:
        """Per-vertex connectivity flags for the current slot.

        With ``include_uav_coverage`` False the flags come from traffic and
        fixed road-side units only, so one UAV's view does not depend on how
        many others fly (used by the greedy baseline).
        """
        coloring = self._coloring if include_uav_coverage else self._static_coloring
        if coloring is None:
            raise RuntimeError("environment not reset")
        return coloring.c_vertex

    def uav_alive(self, u: int) -> bool:
        return self._uav(u).alive

    def uav_pos(self, u: int) -> int:
        return self._uav(u).pos

    def episode_log(self) -> EpisodeLog:
        """Log of the episode so far (complete once :attr:`done`)."""
        return EpisodeLog(
            num_uavs=self.num_uavs,
            horizon=self.horizon,
            records=tuple(self._records),
            initial_energies=tuple(self.energy.initial_energy for _ in self.uavs),
            final_energies=tuple(uav.energy for uav in self.uavs),
        )

    def resolved_reward_params(self, t: "int | None" = None) -> RewardParams:
        """Reward parameters with dynamic normalizers filled in for slot ``t``."""
        rp = self.reward_params
        if rp.connectivity_norm is None:
            total = tr.snapshot(self.trace, t if t is not None else self.slot).total
            rp = RewardParams(
                connectivity_weight=rp.connectivity_weight,
                energy_weight=rp.energy_weight,
                connectivity_norm=float(max(1, total)),
                energy_norm=self._energy_norm,
            )
        elif rp.energy_norm is None:
            rp = RewardParams(
                connectivity_weight=rp.connectivity_weight,
                energy_weight=rp.energy_weight,
                connectivity_norm=rp.connectivity_norm,
                energy_norm=self._energy_norm,
            )
        return rp

    # -- internals ---------------------------------------------------------

    def _uav(self, u: int) -> UavState:
        if not 1 <= u <= self.num_uavs:
            raise ValueError(f"UAV id {u} out of range 1..{self.num_uavs}")
        return self.uavs[u - 1]

    def _color_for(self, snap: rg.TrafficSnapshot, include_uavs: bool) -> rg.ConnectivityColoring:
        if include_uavs:
            positions = tuple(uav.pos if uav.alive else -1 for uav in self.uavs)
            cov = rg.CoverageMap.from_deployment(self.graph, positions)
        else:
            cov = rg.CoverageMap.empty(self.graph)
        return rg.color(self.graph, cov, snap)

    def _recolor(self) -> None:
        snap = tr.snapshot(self.trace, self.slot)
        self._coloring = self._color_for(snap, include_uavs=True)
        self._static_coloring = self._color_for(snap, include_uavs=False)

    def _edge_features(self) -> tuple[np.ndarray, np.ndarray]:
        snap = tr.snapshot(self.trace, self.slot)
        counts = snap.counts.astype(np.float64) / self.count_norm
        connected = self.coloring().c_edge.astype(np.float64)
        return counts, connected

    def _observation(self, u: int) -> Observation:
        counts, connected = self._edge_features()
        onehot = np.zeros(self.graph.n, dtype=np.float64)
        onehot[self._uav(u).pos] = 1.0
        return Observation(uid=u, edge_counts=counts, edge_connected=connected, position_onehot=onehot)
