"""Glue that wires one episode together: engine + simulation + detectors.

Shared by the RL environment and the evaluation runner so both see the exact
same sequencing: decide -> emit signals -> advance vehicles -> sample loops.
"""

from __future__ import annotations

import dataclasses

from .detect import DetectorBank
from .net import RoadNetwork
from .seeding import named_stream
from .sim import SimConfig, Simulation, StepResult, VehicleParams
from .tlc import ApproachVehicle, ControllerCommand, SensorView, SignalEngine


class EpisodeDriver:
    def __init__(self, network: RoadNetwork, seed: int,
                 sim_cfg: SimConfig = None, params: VehicleParams = None):
        cfg = sim_cfg or SimConfig()
        cfg = dataclasses.replace(cfg, rng_seed=seed)
        self.net = network
        self.cfg = cfg
        self.params = params or VehicleParams()
        self.engine = SignalEngine(network, dt=cfg.dt)
        self.sim = Simulation(network, cfg, self.params,
                              rng=named_stream(seed, "spawn"))
        self.detectors = DetectorBank(network, cfg.dt)
        self.readings = dict(self.detectors.readings)

    def sensor_view(self) -> SensorView:
        """Loop readings from the last interval plus full-lane ground truth."""
        lane_vehicles = {}
        par = self.params
        for lane_id, vehicles in self.sim.vehicles_on_lanes().items():
            lane = self.net.lanes[lane_id]
            v_max = min(par.max_velocity, lane.speed_limit)
            lane_vehicles[lane_id] = [
                ApproachVehicle(
                    vehicle_id=v.id,
                    speed=v.speed,
                    distance_to_stop=lane.length - v.position,
                    next_connection=v.route[v.route_pos],
                    internal_length=self.net.connections[v.route[v.route_pos]].internal_length,
                    v_max=v_max,
                )
                for v in vehicles
            ]
        return SensorView(readings=self.readings, lane_vehicles=lane_vehicles)

    def advance(self, command: ControllerCommand):
        """One simulation step under the commanded (engine-mediated) signals."""
        assignment = self.engine.step(command)
        result: StepResult = self.sim.step(assignment)
        self.readings = self.detectors.update(result.motions, self.sim.step_index - 1)
        return assignment, result
