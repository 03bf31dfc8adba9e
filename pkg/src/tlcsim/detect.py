"""Simulated induction-loop detectors (point loops, sampled once per step).

Occupancy is the percentage of the step during which any vehicle body
covered the loop, reconstructed from start/end-of-step front positions by
linear interpolation; flow counts front bumpers crossing the loop.
"""

from __future__ import annotations

from dataclasses import dataclass

from .net import RoadNetwork

IDLE_SINCE = 1e6  # initial "ages ago" value for time_since_last_detection


@dataclass(frozen=True)
class LoopReading:
    detector_id: str
    interval_start: int
    occupancy: float               # percent of interval covered, [0, 100]
    flow: int                      # vehicle fronts crossing this interval
    time_since_last_detection: float  # seconds


def sample(position: float, motions, dt: float, since: float,
           detector_id: str = "", interval_start: int = 0) -> LoopReading:
    """One detector reading from per-vehicle motion records.

    ``motions`` holds (front_start, front_end, vehicle_length) tuples for
    every vehicle that began the interval on the lane. Disjoint vehicle
    bodies give disjoint cover intervals, so summing is exact; the result is
    clamped defensively anyway.
    """
    x = position
    cover = 0.0
    flow = 0
    for p0, p1, vlen in motions:
        if p1 == p0:
            if p0 - vlen <= x <= p0:
                cover += 1.0
        else:
            span = p1 - p0
            t_in = (x - p0) / span
            t_out = (x + vlen - p0) / span
            lo = t_in if t_in > 0.0 else 0.0
            hi = t_out if t_out < 1.0 else 1.0
            if hi > lo:
                cover += hi - lo
            if p0 < x <= p1:
                flow += 1
    if cover > 1.0:
        cover = 1.0
    since = 0.0 if cover > 0.0 else since + dt
    return LoopReading(
        detector_id=detector_id,
        interval_start=interval_start,
        occupancy=100.0 * cover,
        flow=flow,
        time_since_last_detection=since,
    )


class DetectorBank:
    """All loops of a network; owns the per-detector detection-age state."""

    def __init__(self, network: RoadNetwork, dt: float = 1.0):
        self.specs = network.detectors
        self.dt = dt
        self._since = {d.id: IDLE_SINCE for d in self.specs}
        self.readings = {
            d.id: LoopReading(d.id, 0, 0.0, 0, IDLE_SINCE) for d in self.specs
        }

    def update(self, motions: dict, step_index: int) -> dict:
        """Sample every loop from this step's motion records."""
        out = {}
        for spec in self.specs:
            reading = sample(
                spec.position,
                motions.get(spec.lane, ()),
                self.dt,
                self._since[spec.id],
                detector_id=spec.id,
                interval_start=step_index,
            )
            self._since[spec.id] = reading.time_since_last_detection
            out[spec.id] = reading
        self.readings = out
        return out
