"""Deterministic discrete-time microscopic simulation.

Vehicles follow a Krauss-family safe-speed law, obey per-movement signals at
the stop line, accumulate timeLoss / waiting-time, and are teleported away
after a long uninterrupted halt. One step = one second by default. All
randomness comes from the generator handed to the Simulation, so identical
(network, config, controller, seed) runs produce bit-identical streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .net import RoadNetwork, SignalColor
from .seeding import named_stream

HALT_SPEED = 0.1      # m/s; below this a vehicle counts as waiting
SPEED_SNAP = 1e-9     # speeds below this collapse to an exact standstill
YIELD_HORIZON = 3.0   # s; minor-green gap acceptance lookahead


@dataclass(frozen=True)
class VehicleParams:
    max_velocity: float = 13.89
    acceleration: float = 3.0
    deceleration: float = 3.0
    min_gap: float = 2.5
    length: float = 5.0

    def __post_init__(self):
        for name in ("max_velocity", "acceleration", "deceleration", "min_gap", "length"):
            if getattr(self, name) <= 0:
                raise ValueError(f"VehicleParams.{name} must be > 0")


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1.0
    spawn_probability: float = 0.2
    teleport_after: float = 300.0
    rng_seed: int = 0
    sigma: float = 0.0  # Krauss driver imperfection, 0 = fully deterministic

    def __post_init__(self):
        if not 0.0 <= self.spawn_probability <= 1.0:
            raise ValueError("spawn_probability must be in [0, 1]")
        if self.dt <= 0:
            raise ValueError("dt must be > 0")
        if self.teleport_after <= 0:
            raise ValueError("teleport_after must be > 0")
        if not 0.0 <= self.sigma <= 1.0:
            raise ValueError("sigma must be in [0, 1]")


class Vehicle:
    """Kinematic state plus accumulated per-vehicle metrics.

    ``segment`` is a lane id or, when ``on_connection``, a connection id;
    ``position`` is the front bumper in segment coordinates. ``route`` is the
    ordered tuple of connection ids the vehicle will traverse.
    """

    __slots__ = (
        "id", "segment", "on_connection", "position", "speed", "route",
        "route_pos", "spawn_step", "time_loss", "waiting_time", "consecutive_halt",
    )

    def __init__(self, vid, lane, position, route, spawn_step):
        self.id = vid
        self.segment = lane
        self.on_connection = False
        self.position = position
        self.speed = 0.0
        self.route = route
        self.route_pos = 0
        self.spawn_step = spawn_step
        self.time_loss = 0.0
        self.waiting_time = 0.0
        self.consecutive_halt = 0.0

    def __repr__(self):
        return (f"Vehicle(id={self.id}, segment={self.segment!r}, "
                f"position={self.position:.2f}, speed={self.speed:.2f})")


def safe_speed(gap: float, leader_speed: float, params: VehicleParams, dt: float) -> float:
    """Maximum speed from which a follower can always stop behind the leader.

    Closed form -b*dt + sqrt(b^2 dt^2 + leader_speed^2 + 2 b gap), clamped to
    >= 0, with b the maximum deceleration. The gap is measured front bumper
    to leader rear; callers wanting a standstill buffer subtract it first.
    """
    if gap < 0:
        raise ValueError(f"negative gap {gap}: collision already occurred")
    b = params.deceleration
    v = -b * dt + math.sqrt(b * b * dt * dt + leader_speed * leader_speed + 2.0 * b * gap)
    return v if v > 0.0 else 0.0


def accumulate_metrics(vehicle: Vehicle, dt: float, v_max: float) -> None:
    """Per-step metric update; expects the speed already set for this step."""
    v = vehicle.speed
    vehicle.time_loss += (1.0 - v / v_max) * dt
    if v < HALT_SPEED:
        vehicle.waiting_time += dt
        vehicle.consecutive_halt += dt
    else:
        vehicle.consecutive_halt = 0.0


@dataclass
class ArrivalRecord:
    vehicle_id: int
    spawn_step: int
    arrival_step: int
    time_loss: float
    waiting_time: float


@dataclass
class StepResult:
    teleported_this_step: int
    arrived_this_step: int
    motions: dict  # lane id -> [(front_start, front_end, vehicle_length)]


class Simulation:
    """Mutable simulation state plus its step function (single-threaded)."""

    def __init__(self, network: RoadNetwork, cfg: SimConfig = None,
                 params: VehicleParams = None, rng=None):
        self.net = network
        self.cfg = cfg or SimConfig()
        self.params = params or VehicleParams()
        self.rng = rng if rng is not None else named_stream(self.cfg.rng_seed, "spawn")
        self.step_index = 0
        self.vehicles = {}           # id -> Vehicle
        self.spawned_total = 0
        self.arrived_total = 0
        self.teleported_total = 0
        self.teleported_this_step = 0
        self.deferrals_total = 0     # blocked insertion attempts
        self.arrivals = []           # ArrivalRecord, in arrival order
        self.teleport_records = []   # (vehicle id, partial time_loss)
        self._next_id = 0
        self._pending = []           # queued spawns: (lane id, route tuple)
        self._entry_lanes = network.entry_lanes()
        self._detector_lanes = {d.lane for d in network.detectors}
        self._conflicting_gp = {
            cid: tuple(network.conflicts.partners(cid)) for cid in network.connections
        }

    # -- queries ------------------------------------------------------------

    def vehicles_on_lanes(self):
        """lane id -> vehicles currently on that lane (not on connections)."""
        out = {}
        for vid in sorted(self.vehicles):
            v = self.vehicles[vid]
            if not v.on_connection:
                out.setdefault(v.segment, []).append(v)
        return out

    def in_network(self) -> int:
        return len(self.vehicles)

    def conservation_holds(self) -> bool:
        return self.spawned_total == len(self.vehicles) + self.arrived_total + self.teleported_total

    def effective_vmax(self, vehicle: Vehicle) -> float:
        if vehicle.on_connection:
            limit = self.net.lanes[self.net.connections[vehicle.segment].from_lane].speed_limit
        else:
            limit = self.net.lanes[vehicle.segment].speed_limit
        return min(self.params.max_velocity, limit)

    # -- stepping -----------------------------------------------------------

    def step(self, signals: dict) -> StepResult:
        """Advance one step under the given connection -> SignalColor map."""
        net, par, cfg = self.net, self.params, self.cfg
        dt = cfg.dt
        min_gap = par.min_gap
        veh_len = par.length
        b = par.deceleration

        buckets = {}
        for vid in sorted(self.vehicles):
            v = self.vehicles[vid]
            buckets.setdefault(v.segment, []).append(v)
        for group in buckets.values():
            group.sort(key=lambda v: (-v.position, v.id))

        # Pass 1: new speeds, leader-first, from start-of-step positions.
        new_speed = {}
        for seg_id in sorted(buckets):
            group = buckets[seg_id]
            for idx, v in enumerate(group):
                on_conn = v.on_connection
                if on_conn:
                    conn = net.connections[seg_id]
                    limit = net.lanes[conn.from_lane].speed_limit
                else:
                    lane = net.lanes[seg_id]
                    limit = lane.speed_limit
                v_des = v.speed + par.acceleration * dt
                cap = par.max_velocity if par.max_velocity < limit else limit
                if v_des > cap:
                    v_des = cap

                # leader constraint
                if idx > 0:
                    lead = group[idx - 1]
                    gap = lead.position - veh_len - v.position
                    lead_speed = new_speed.get(lead.id, lead.speed)
                    g = gap - min_gap
                    vs = safe_speed(g if g > 0.0 else 0.0, lead_speed, par, dt)
                    if vs < v_des:
                        v_des = vs
                elif not on_conn:
                    # front vehicle on a lane: check vehicles just across the
                    # junction mouth whose rear may still constrain us
                    best_gap = None
                    best_speed = 0.0
                    for cid in net.connections_from.get(seg_id, ()):
                        for w in buckets.get(cid, ()):
                            rear = lane.length + w.position - veh_len
                            gap = rear - v.position
                            if best_gap is None or gap < best_gap:
                                best_gap = gap
                                best_speed = new_speed.get(w.id, w.speed)
                    if best_gap is not None:
                        g = best_gap - min_gap
                        vs = safe_speed(g if g > 0.0 else 0.0, best_speed, par, dt)
                        if vs < v_des:
                            v_des = vs

                # signal constraint at the stop line (lane end)
                if not on_conn:
                    color = signals[v.route[v.route_pos]]
                    if color is not SignalColor.GREEN_PRIORITY:
                        dist = lane.length - v.position
                        g = dist - min_gap
                        stop_v = safe_speed(g if g > 0.0 else 0.0, 0.0, par, dt)
                        if color is SignalColor.RED:
                            if stop_v < v_des:
                                v_des = stop_v
                        elif color is SignalColor.ORANGE:
                            # stop only if feasible at deceleration b
                            if stop_v >= v.speed - b * dt and stop_v < v_des:
                                v_des = stop_v
                        else:  # GREEN_MINOR: yield to conflicting priority streams
                            if not self._yield_clear(v, signals, buckets):
                                if stop_v < v_des:
                                    v_des = stop_v

                if cfg.sigma > 0.0 and v_des > 0.0:
                    v_des -= cfg.sigma * par.acceleration * dt * self.rng.random()

                if v_des < SPEED_SNAP:
                    v_des = 0.0
                new_speed[v.id] = v_des

        # Pass 2: metrics, movement, arrivals.
        motions = {lid: [] for lid in self._detector_lanes}
        arrived_ids = []
        for seg_id in sorted(buckets):
            for v in buckets[seg_id]:
                sp = new_speed[v.id]
                v.speed = sp
                accumulate_metrics(v, dt, self.effective_vmax(v))
                old_pos = v.position
                new_pos = old_pos + sp * dt
                if not v.on_connection:
                    lane = net.lanes[seg_id]
                    if seg_id in motions:
                        motions[seg_id].append((old_pos, new_pos, veh_len))
                    if new_pos > lane.length:
                        cid = v.route[v.route_pos]
                        v.on_connection = True
                        v.segment = cid
                        v.position = new_pos - lane.length
                    else:
                        v.position = new_pos
                else:
                    conn = net.connections[seg_id]
                    if new_pos >= conn.internal_length:
                        if v.route_pos == len(v.route) - 1:
                            arrived_ids.append(v.id)
                            self.arrivals.append(ArrivalRecord(
                                vehicle_id=v.id,
                                spawn_step=v.spawn_step,
                                arrival_step=self.step_index,
                                time_loss=v.time_loss,
                                waiting_time=v.waiting_time,
                            ))
                        else:
                            v.route_pos += 1
                            v.on_connection = False
                            v.segment = conn.to_lane
                            v.position = new_pos - conn.internal_length
                    else:
                        v.position = new_pos
        for vid in arrived_ids:
            del self.vehicles[vid]
        self.arrived_total += len(arrived_ids)

        teleported = self._teleport_check()
        self._spawn()
        self.step_index += 1
        return StepResult(
            teleported_this_step=teleported,
            arrived_this_step=len(arrived_ids),
            motions=motions,
        )

    def _yield_clear(self, vehicle, signals, buckets) -> bool:
        """Gap acceptance for minor green: the conflict zone must be free and
        no priority vehicle may reach it within the lookahead horizon."""
        net = self.net
        for other in self._conflicting_gp[vehicle.route[vehicle.route_pos]]:
            if signals[other] is not SignalColor.GREEN_PRIORITY:
                continue
            if buckets.get(other):
                return False
            from_lane = net.connections[other].from_lane
            lane_len = net.lanes[from_lane].length
            for w in buckets.get(from_lane, ()):
                if w.route[w.route_pos] != other:
                    continue
                if lane_len - w.position <= YIELD_HORIZON * w.speed:
                    return False
        return True

    def _teleport_check(self) -> int:
        threshold = self.cfg.teleport_after
        stuck = sorted(vid for vid, v in self.vehicles.items()
                       if v.consecutive_halt >= threshold)
        for vid in stuck:
            self.teleport_records.append((vid, self.vehicles[vid].time_loss))
            del self.vehicles[vid]
        self.teleported_this_step = len(stuck)
        self.teleported_total += len(stuck)
        return len(stuck)

    def _spawn(self) -> None:
        cfg, par, net = self.cfg, self.params, self.net
        if cfg.spawn_probability > 0.0 and self._entry_lanes:
            if self.rng.random() < cfg.spawn_probability:
                lane_id = self._entry_lanes[int(self.rng.integers(len(self._entry_lanes)))]
                routes = net.connections_from[lane_id]
                route = (routes[int(self.rng.integers(len(routes)))],)
                self._pending.append((lane_id, route))

        if not self._pending:
            return
        rear_clearance = par.length + par.min_gap
        last_on_lane = {}
        for v in self.vehicles.values():
            if v.on_connection:
                continue
            cur = last_on_lane.get(v.segment)
            if cur is None or v.position < cur:
                last_on_lane[v.segment] = v.position
        still_pending = []
        inserted_lanes = set()
        for lane_id, route in self._pending:
            tail = last_on_lane.get(lane_id)
            blocked = lane_id in inserted_lanes or (
                tail is not None and tail - par.length < rear_clearance
            )
            if blocked:
                self.deferrals_total += 1
                still_pending.append((lane_id, route))
                continue
            veh = Vehicle(self._next_id, lane_id, par.length, route, self.step_index)
            self._next_id += 1
            self.vehicles[veh.id] = veh
            self.spawned_total += 1
            inserted_lanes.add(lane_id)
        self._pending = still_pending
