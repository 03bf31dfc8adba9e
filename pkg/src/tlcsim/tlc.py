"""Signal program engine and the baseline controllers.

The engine owns the one safety-critical behavior every controller shares:
whenever a phase change would take a green connection to red, a clearing
interval is interposed during which exactly those connections show orange.
Controllers only ever emit phase commands; they cannot bypass clearing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .net import RoadNetwork, SignalColor

ORANGE_DURATION = 6.0
DEFAULT_CYCLE_TIME = 31.0
GAP_THRESHOLD = 3.0
MIN_GREEN = 6.0
MAX_GREEN = 45.0
TOLERATED_LOSS = 1.0
V_FLOOR = 0.5  # m/s; avoids division blow-up in timeToPass for standing vehicles


@dataclass(frozen=True)
class ControllerCommand:
    target_phase: int
    hold: bool = False


@dataclass(frozen=True)
class ApproachVehicle:
    """Ground-truth view of one vehicle on an approach lane (camera-grade)."""
    vehicle_id: int
    speed: float
    distance_to_stop: float
    next_connection: str
    internal_length: float
    v_max: float


@dataclass
class SensorView:
    """Everything a controller may legally see at one decision point."""
    readings: dict = field(default_factory=dict)        # detector id -> LoopReading
    lane_vehicles: dict = field(default_factory=dict)   # lane id -> [ApproachVehicle]


class SignalEngine:
    """Phase switching state machine with automatic orange interposition."""

    def __init__(self, network: RoadNetwork, dt: float = 1.0,
                 orange_duration: float = ORANGE_DURATION, initial_phase: int = 0):
        if not 0 <= initial_phase < network.n_phases:
            raise ValueError(f"initial phase {initial_phase} out of range for {network.n_phases} phases")
        self.net = network
        self.dt = dt
        self.orange_duration = orange_duration
        self.current_phase = initial_phase
        self.phase_elapsed = 0.0
        self.in_transition = False
        self.transition_remaining = 0.0
        self.pending_phase = initial_phase
        self.change_accepted = False  # did this step start a switch
        self._assignment = dict(network.phases[initial_phase].signals)

    @property
    def assignment(self) -> dict:
        return self._assignment

    def step(self, command: ControllerCommand) -> dict:
        """Apply one command, return the signal assignment in force this step.

        Commands arriving mid-transition are ignored. ``phase_elapsed`` counts
        emitted green seconds of the current phase; clearing time is excluded.
        """
        net, dt = self.net, self.dt
        self.change_accepted = False
        if self.in_transition:
            emitted = self._assignment
            self.transition_remaining -= dt
            if self.transition_remaining <= 0.0:
                self.current_phase = self.pending_phase
                self.in_transition = False
                self.phase_elapsed = 0.0
                self._assignment = dict(net.phases[self.current_phase].signals)
            return emitted

        target = self.current_phase if command.hold else command.target_phase
        if not 0 <= target < net.n_phases:
            raise ValueError(f"target phase {target} out of range for {net.n_phases} phases")
        if target == self.current_phase:
            self.phase_elapsed += dt
            return self._assignment

        self.change_accepted = True
        old = net.phases[self.current_phase].signals
        new = net.phases[target].signals
        losing = [c for c in old if old[c].is_green and not new[c].is_green]
        if not losing:
            self.current_phase = target
            self.pending_phase = target
            self.phase_elapsed = dt
            self._assignment = dict(new)
            return self._assignment

        self.in_transition = True
        self.pending_phase = target
        self.transition_remaining = self.orange_duration
        transition = {}
        for c, old_color in old.items():
            if old_color.is_green and not new[c].is_green:
                transition[c] = SignalColor.ORANGE
            elif old_color is SignalColor.GREEN_PRIORITY and new[c] is SignalColor.GREEN_MINOR:
                transition[c] = SignalColor.GREEN_MINOR
            elif old_color is SignalColor.GREEN_MINOR and new[c] is SignalColor.GREEN_PRIORITY:
                transition[c] = SignalColor.GREEN_MINOR
            elif old_color is SignalColor.RED or new[c] is SignalColor.RED:
                transition[c] = SignalColor.RED
            else:
                transition[c] = old_color
        self._assignment = transition
        emitted = self._assignment
        self.transition_remaining -= dt
        if self.transition_remaining <= 0.0:
            self.current_phase = self.pending_phase
            self.in_transition = False
            self.phase_elapsed = 0.0
            self._assignment = dict(new)
        return emitted

    def served_lanes(self):
        """Approach lanes green (priority or minor) under the current phase."""
        phase = self.net.phases[self.current_phase]
        lanes = {
            self.net.connections[c].from_lane
            for c, color in phase.signals.items()
            if color.is_green
        }
        return sorted(lanes)


class Controller:
    """A policy mapping sensor state to phase commands, owned by one episode."""

    name = "controller"

    def reset(self) -> None:
        pass

    def decide(self, engine: SignalEngine, sensors: SensorView) -> ControllerCommand:
        raise NotImplementedError


class FixedTimeController(Controller):
    """Fixed cycle: every phase held for cycle_time seconds of green."""

    name = "fixed"

    def __init__(self, cycle_time: float = DEFAULT_CYCLE_TIME):
        self.cycle_time = cycle_time

    def decide(self, engine, sensors):
        if engine.phase_elapsed >= self.cycle_time:
            return ControllerCommand((engine.current_phase + 1) % engine.net.n_phases)
        return ControllerCommand(engine.current_phase, hold=True)


class GapBasedController(Controller):
    """Green extension while a stream is detected; gap-out past the threshold.

    The gap is the minimum detection age over all loops on the lanes served
    green by the current phase (conservative: any streaming lane holds the
    phase). Completed green durations always land in [min_green, max_green].
    """

    name = "gap"

    def __init__(self, gap_threshold: float = GAP_THRESHOLD,
                 min_green: float = MIN_GREEN, max_green: float = MAX_GREEN):
        self.gap_threshold = gap_threshold
        self.min_green = min_green
        self.max_green = max_green

    def decide(self, engine, sensors):
        if engine.in_transition:
            return ControllerCommand(engine.current_phase, hold=True)
        net = engine.net
        ages = []
        for lane in engine.served_lanes():
            for det_id in net.detectors_on(lane):
                reading = sensors.readings.get(det_id)
                if reading is not None:
                    ages.append(reading.time_since_last_detection)
        gap = min(ages) if ages else float("inf")
        elapsed = engine.phase_elapsed
        if elapsed >= self.max_green or (gap > self.gap_threshold and elapsed >= self.min_green):
            return ControllerCommand((engine.current_phase + 1) % net.n_phases)
        return ControllerCommand(engine.current_phase, hold=True)


class TimeBasedController(Controller):
    """Fixed cycle extended for delayed vehicles on the served approaches.

    Vehicle delay accumulates per phase; once a vehicle's accumulated delay
    exceeds the tolerated loss, the green is stretched so it can pass
    (distance to the stop line at its current speed plus the crossing), up
    to the max_green cap. Needs full-lane ground truth, not loop data.
    """

    name = "time"

    def __init__(self, cycle_time: float = DEFAULT_CYCLE_TIME,
                 tolerated_loss: float = TOLERATED_LOSS,
                 max_green: float = MAX_GREEN, v_floor: float = V_FLOOR):
        self.cycle_time = cycle_time
        self.tolerated_loss = tolerated_loss
        self.max_green = max_green
        self.v_floor = v_floor
        self._delays = {}
        self._phase_marker = None

    def reset(self):
        self._delays = {}
        self._phase_marker = None

    def decide(self, engine, sensors):
        if engine.in_transition:
            self._phase_marker = None
            return ControllerCommand(engine.current_phase, hold=True)
        marker = (engine.current_phase, engine.phase_elapsed)
        if self._phase_marker is None or marker[0] != self._phase_marker[0] \
                or marker[1] < self._phase_marker[1]:
            self._delays = {}
        self._phase_marker = marker

        served = set(engine.served_lanes())
        extension = 0.0
        seen = set()
        for lane in sorted(served):
            for veh in sensors.lane_vehicles.get(lane, ()):
                seen.add(veh.vehicle_id)
                acc = self._delays.get(veh.vehicle_id, 0.0)
                acc += (1.0 - veh.speed / veh.v_max) * engine.dt
                self._delays[veh.vehicle_id] = acc
                if acc > self.tolerated_loss:
                    time_to_pass = (veh.distance_to_stop / max(veh.speed, self.v_floor)
                                    + veh.internal_length / veh.v_max)
                    if time_to_pass > extension:
                        extension = time_to_pass
        for vid in list(self._delays):
            if vid not in seen:
                del self._delays[vid]

        deadline = min(self.max_green, self.cycle_time + extension)
        if engine.phase_elapsed >= deadline:
            return ControllerCommand((engine.current_phase + 1) % engine.net.n_phases)
        return ControllerCommand(engine.current_phase, hold=True)


class RandomPhaseController(Controller):
    """Uniform random phase request every step (diagnostic lower bound)."""

    name = "random"

    def __init__(self, n_phases: int, rng):
        self.n_phases = n_phases
        self.rng = rng

    def decide(self, engine, sensors):
        return ControllerCommand(int(self.rng.integers(self.n_phases)))
