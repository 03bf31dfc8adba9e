"""Intersection topology: lanes, movements, conflict relation, phase tables.

A network is immutable after loading and safe to share between episodes.
The on-disk form is a JSON document (see ``load_network``); signal colors
are serialized with the upper/lowercase letter convention G/g/o/r.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

DEFAULT_SPEED_LIMIT = 13.89  # m/s, 50 km/h

TURNS = ("left", "straight", "right")


class NetworkError(ValueError):
    """A network document failed parsing or validation."""


class SignalColor(Enum):
    GREEN_PRIORITY = "G"  # move with priority
    GREEN_MINOR = "g"     # move without priority (must yield)
    ORANGE = "o"          # clearing; stop if able, else proceed
    RED = "r"             # must stop

    @property
    def is_green(self) -> bool:
        return self in (SignalColor.GREEN_PRIORITY, SignalColor.GREEN_MINOR)


_LETTER_TO_COLOR = {c.value: c for c in SignalColor}


@dataclass(frozen=True)
class Lane:
    id: str
    length: float
    entry: bool = False
    speed_limit: float = DEFAULT_SPEED_LIMIT


@dataclass(frozen=True)
class Connection:
    """A permitted movement from an incoming lane to an outgoing lane."""

    id: str
    from_lane: str
    to_lane: str
    turn: str
    internal_length: float


class ConflictMatrix:
    """Symmetric, irreflexive conflict relation over connection ids."""

    def __init__(self, pairs):
        self._pairs = set()
        for a, b in pairs:
            if a == b:
                raise NetworkError(f"conflicts: connection {a!r} cannot conflict with itself")
            self._pairs.add(frozenset((a, b)))

    def conflicts(self, a: str, b: str) -> bool:
        return frozenset((a, b)) in self._pairs

    def pairs(self):
        """Sorted list of (a, b) tuples, a < b, each pair once."""
        return sorted(tuple(sorted(p)) for p in self._pairs)

    def partners(self, conn_id: str):
        out = set()
        for p in self._pairs:
            if conn_id in p:
                out.update(p - {conn_id})
        return sorted(out)

    def __len__(self):
        return len(self._pairs)


@dataclass(frozen=True)
class PhaseDefinition:
    index: int
    signals: dict  # connection id -> SignalColor


@dataclass(frozen=True)
class DetectorSpec:
    id: str
    lane: str
    position: float  # meters from lane start


@dataclass(frozen=True)
class RoadNetwork:
    name: str
    lanes: dict            # lane id -> Lane
    connections: dict      # connection id -> Connection
    conflicts: ConflictMatrix
    phases: tuple          # ordered PhaseDefinition, index k = position
    detectors: tuple       # DetectorSpec
    connections_from: dict = field(default_factory=dict)  # lane id -> (conn ids)

    @property
    def n_phases(self) -> int:
        return len(self.phases)

    def entry_lanes(self):
        return [lid for lid in sorted(self.lanes) if self.lanes[lid].entry]

    def detector_ids(self):
        return [d.id for d in self.detectors]

    def detectors_on(self, lane_id: str):
        return [d.id for d in self.detectors if d.lane == lane_id]


def check_phase_safety(phase: PhaseDefinition, matrix: ConflictMatrix):
    """Connection pairs that are simultaneously GreenPriority yet conflict.

    Empty result means the phase is safe. Orange/red substitutions can only
    shrink this set, so the same check applies to live signal assignments.
    """
    greens = sorted(c for c, col in phase.signals.items() if col is SignalColor.GREEN_PRIORITY)
    bad = []
    for i, a in enumerate(greens):
        for b in greens[i + 1:]:
            if matrix.conflicts(a, b):
                bad.append((a, b))
    return bad


def _require(doc, key, locus):
    if key not in doc:
        raise NetworkError(f"{locus}: missing required key {key!r}")
    return doc[key]


def _positive(value, locus):
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise NetworkError(f"{locus}: expected a number, got {value!r}") from None
    if not v > 0:
        raise NetworkError(f"{locus}: must be > 0, got {v}")
    return v


def network_from_dict(doc: dict, name: str = "") -> RoadNetwork:
    """Build and fully validate a RoadNetwork from a parsed document."""
    if not isinstance(doc, dict):
        raise NetworkError("top level: expected a JSON object")
    name = doc.get("name", name) or "network"

    lanes = {}
    for i, entry in enumerate(_require(doc, "lanes", "top level")):
        locus = f"lanes[{i}]"
        lid = str(_require(entry, "id", locus))
        if lid in lanes:
            raise NetworkError(f"{locus}: duplicate lane id {lid!r}")
        lanes[lid] = Lane(
            id=lid,
            length=_positive(_require(entry, "length", locus), f"{locus}.length"),
            entry=bool(entry.get("entry", False)),
            speed_limit=_positive(entry.get("speed_limit", DEFAULT_SPEED_LIMIT), f"{locus}.speed_limit"),
        )
    if not lanes:
        raise NetworkError("lanes: at least one lane required")

    connections = {}
    for i, entry in enumerate(_require(doc, "connections", "top level")):
        locus = f"connections[{i}]"
        cid = str(_require(entry, "id", locus))
        if cid in connections:
            raise NetworkError(f"{locus}: duplicate connection id {cid!r}")
        if cid in lanes:
            raise NetworkError(f"{locus}: id {cid!r} collides with a lane id")
        from_lane = str(_require(entry, "from", locus))
        to_lane = str(_require(entry, "to", locus))
        if from_lane == to_lane:
            raise NetworkError(f"{locus}: from and to must differ (got {from_lane!r})")
        for which, ref in (("from", from_lane), ("to", to_lane)):
            if ref not in lanes:
                raise NetworkError(f"{locus}.{which}: unknown lane {ref!r}")
        turn = str(_require(entry, "turn", locus))
        if turn not in TURNS:
            raise NetworkError(f"{locus}.turn: expected one of {TURNS}, got {turn!r}")
        connections[cid] = Connection(
            id=cid,
            from_lane=from_lane,
            to_lane=to_lane,
            turn=turn,
            internal_length=_positive(_require(entry, "internal_length", locus), f"{locus}.internal_length"),
        )

    pairs = []
    for i, pair in enumerate(doc.get("conflicts", [])):
        locus = f"conflicts[{i}]"
        if len(pair) != 2:
            raise NetworkError(f"{locus}: expected a pair, got {pair!r}")
        a, b = str(pair[0]), str(pair[1])
        for ref in (a, b):
            if ref not in connections:
                raise NetworkError(f"{locus}: unknown connection {ref!r}")
        if a == b:
            raise NetworkError(f"{locus}: a connection cannot conflict with itself ({a!r})")
        conn_a, conn_b = connections[a], connections[b]
        if conn_a.from_lane == conn_b.from_lane:
            raise NetworkError(
                f"{locus}: {a!r} and {b!r} leave the same lane; same-lane movements queue, they do not conflict"
            )
        pairs.append((a, b))
    matrix = ConflictMatrix(pairs)

    raw_phases = _require(doc, "phases", "top level")
    if not raw_phases:
        raise NetworkError("phases: at least one phase required")
    phases = []
    for k, entry in enumerate(raw_phases):
        locus = f"phases[{k}]"
        raw_signals = _require(entry, "signals", locus)
        signals = {}
        for cid, letter in raw_signals.items():
            if cid not in connections:
                raise NetworkError(f"{locus}.signals: unknown connection {cid!r}")
            if letter not in _LETTER_TO_COLOR:
                raise NetworkError(f"{locus}.signals[{cid!r}]: unknown signal letter {letter!r} (use G/g/o/r)")
            signals[cid] = _LETTER_TO_COLOR[letter]
        missing = sorted(set(connections) - set(signals))
        if missing:
            raise NetworkError(f"{locus}.signals: missing entry for connection {missing[0]!r}")
        phase = PhaseDefinition(index=k, signals=signals)
        violations = check_phase_safety(phase, matrix)
        if violations:
            a, b = violations[0]
            raise NetworkError(
                f"{locus}: conflicting connections {a!r} and {b!r} are both GreenPriority"
            )
        for cid, color in signals.items():
            if color is not SignalColor.GREEN_MINOR:
                continue
            if connections[cid].turn == "left":
                continue
            clash = [
                other
                for other, other_color in signals.items()
                if other_color is SignalColor.GREEN_PRIORITY and matrix.conflicts(cid, other)
            ]
            if clash:
                raise NetworkError(
                    f"{locus}: GreenMinor against conflicting GreenPriority {clash[0]!r} "
                    f"is only permitted for left turns, but {cid!r} is a {connections[cid].turn}"
                )
        phases.append(phase)

    detectors = []
    seen_det = set()
    for i, entry in enumerate(doc.get("detectors", [])):
        locus = f"detectors[{i}]"
        did = str(_require(entry, "id", locus))
        if did in seen_det:
            raise NetworkError(f"{locus}: duplicate detector id {did!r}")
        seen_det.add(did)
        lane = str(_require(entry, "lane", locus))
        if lane not in lanes:
            raise NetworkError(f"{locus}.lane: unknown lane {lane!r}")
        position = float(_require(entry, "position", locus))
        if not 0 <= position <= lanes[lane].length:
            raise NetworkError(
                f"{locus}.position: {position} outside lane {lane!r} (length {lanes[lane].length})"
            )
        detectors.append(DetectorSpec(id=did, lane=lane, position=position))

    connections_from = {}
    for cid in sorted(connections):
        connections_from.setdefault(connections[cid].from_lane, []).append(cid)
    for lid, lane in lanes.items():
        if lane.entry and lid not in connections_from:
            raise NetworkError(f"lanes: entry lane {lid!r} has no outgoing connection")

    return RoadNetwork(
        name=name,
        lanes=lanes,
        connections=connections,
        conflicts=matrix,
        phases=tuple(phases),
        detectors=tuple(detectors),
        connections_from={k: tuple(v) for k, v in connections_from.items()},
    )


def load_network(text: str, name: str = "") -> RoadNetwork:
    """Parse a JSON network description and validate every invariant."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkError(f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return network_from_dict(doc, name=name)


def load_network_file(path) -> RoadNetwork:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return load_network(text, name=str(path))


def network_to_dict(net: RoadNetwork) -> dict:
    return {
        "name": net.name,
        "lanes": [
            {
                "id": lane.id,
                "length": lane.length,
                "entry": lane.entry,
                "speed_limit": lane.speed_limit,
            }
            for lane in (net.lanes[lid] for lid in sorted(net.lanes))
        ],
        "connections": [
            {
                "id": c.id,
                "from": c.from_lane,
                "to": c.to_lane,
                "turn": c.turn,
                "internal_length": c.internal_length,
            }
            for c in (net.connections[cid] for cid in sorted(net.connections))
        ],
        "conflicts": [list(p) for p in net.conflicts.pairs()],
        "phases": [
            {"signals": {cid: phase.signals[cid].value for cid in sorted(phase.signals)}}
            for phase in net.phases
        ],
        "detectors": [
            {"id": d.id, "lane": d.lane, "position": d.position} for d in net.detectors
        ],
    }


def dumps_network(net: RoadNetwork) -> str:
    return json.dumps(network_to_dict(net), indent=2, sort_keys=True) + "\n"
