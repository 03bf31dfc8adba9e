"""Built-in junction archetypes.

Four parameterized single intersections: a three-arm junction with a
four-phase program, a three-arm junction with a six-phase program, and a
pair of four-arm eight-phase junctions that share one phase program but
differ in geometry (equal approach lengths and uniform crossing paths vs.
pairwise-distinct approach lengths and skewed crossing paths). Conflict
tables come from standard crossing/merging geometry for right-hand traffic;
permissive left turns are encoded as minor green against the oncoming
through movement. Phase orderings are chosen so that every cyclic phase
change retires at least one green, i.e. every transition gets a clearing
interval.

The phase tables are plausible stand-ins, not survey data from any real
junction; see the README for the exact movement naming convention.
"""

from __future__ import annotations

from .net import RoadNetwork, network_from_dict

_DETECTOR_SETBACK = 10.0  # m upstream of the stop line, one loop per approach


def _lane(lid, length, entry=False, speed_limit=13.89):
    return {"id": lid, "length": length, "entry": entry, "speed_limit": speed_limit}


def _conn(cid, from_lane, to_lane, turn, internal_length):
    return {"id": cid, "from": from_lane, "to": to_lane, "turn": turn,
            "internal_length": internal_length}


def _phases(connection_ids, tables):
    out = []
    for table in tables:
        signals = {cid: "r" for cid in connection_ids}
        signals.update(table)
        out.append({"signals": signals})
    return out


def _detectors(lanes):
    return [
        {"id": f"ild_{l['id']}", "lane": l["id"], "position": l["length"] - _DETECTOR_SETBACK}
        for l in lanes
        if l["entry"]
    ]


# Three-arm (T) junction, arms N / E / S. Movements:
#   nS in_n->out_s, nL in_n->out_e, sS in_s->out_n, sR in_s->out_e,
#   eL in_e->out_s, eR in_e->out_n
_T_CONFLICTS = [
    ["nS", "eL"],
    ["sS", "eL"],
    ["sS", "eR"],
    ["sS", "nL"],
    ["nL", "sR"],
    ["nL", "eL"],
]


def _three_arm(name, approach_len, exit_len, internal):
    lanes = [
        _lane("in_n", approach_len["n"], entry=True),
        _lane("in_e", approach_len["e"], entry=True),
        _lane("in_s", approach_len["s"], entry=True),
        _lane("out_n", exit_len["n"]),
        _lane("out_e", exit_len["e"]),
        _lane("out_s", exit_len["s"]),
    ]
    conns = [
        _conn("nS", "in_n", "out_s", "straight", internal["nS"]),
        _conn("nL", "in_n", "out_e", "left", internal["nL"]),
        _conn("sS", "in_s", "out_n", "straight", internal["sS"]),
        _conn("sR", "in_s", "out_e", "right", internal["sR"]),
        _conn("eL", "in_e", "out_s", "left", internal["eL"]),
        _conn("eR", "in_e", "out_n", "right", internal["eR"]),
    ]
    return lanes, conns


def _three_arm_4phase():
    lanes, conns = _three_arm(
        "three_arm_4phase",
        approach_len={"n": 400.0, "e": 400.0, "s": 400.0},
        exit_len={"n": 400.0, "e": 400.0, "s": 400.0},
        internal={"nS": 16.0, "nL": 20.0, "sS": 16.0, "sR": 12.0, "eL": 20.0, "eR": 12.0},
    )
    cids = [c["id"] for c in conns]
    tables = [
        {"nS": "G", "sS": "G", "sR": "G", "nL": "g"},  # N/S through, permissive N left
        {"nS": "G", "nL": "G"},                        # north arm protected
        {"nL": "G", "eR": "G"},                        # N left with E right
        {"eL": "G", "eR": "G", "sR": "G"},             # east arm with S right
    ]
    return {
        "name": "three_arm_4phase",
        "lanes": lanes,
        "connections": conns,
        "conflicts": _T_CONFLICTS,
        "phases": _phases(cids, tables),
        "detectors": _detectors(lanes),
    }


def _three_arm_6phase():
    lanes, conns = _three_arm(
        "three_arm_6phase",
        approach_len={"n": 350.0, "e": 420.0, "s": 390.0},
        exit_len={"n": 360.0, "e": 330.0, "s": 410.0},
        internal={"nS": 18.0, "nL": 24.0, "sS": 18.0, "sR": 11.0, "eL": 22.0, "eR": 13.0},
    )
    cids = [c["id"] for c in conns]
    tables = [
        {"nS": "G", "sS": "G", "sR": "G", "nL": "g"},
        {"nS": "G", "nL": "G"},
        {"nL": "G", "eR": "G"},
        {"eL": "G", "eR": "G", "sR": "G"},
        {"sS": "G", "sR": "G"},
        {"eL": "G", "sR": "G"},
    ]
    return {
        "name": "three_arm_6phase",
        "lanes": lanes,
        "connections": conns,
        "conflicts": _T_CONFLICTS,
        "phases": _phases(cids, tables),
        "detectors": _detectors(lanes),
    }


# Four-arm junction, arms N / E / S / W, one approach lane each.
_X_CONFLICTS = [
    # crossing through movements
    ["nS", "eS"], ["nS", "wS"], ["sS", "eS"], ["sS", "wS"],
    # through vs. oncoming left (the permissive pairs)
    ["nS", "sL"], ["sS", "nL"], ["eS", "wL"], ["wS", "eL"],
    # through vs. perpendicular left
    ["nS", "eL"], ["nS", "wL"], ["sS", "eL"], ["sS", "wL"],
    ["eS", "nL"], ["eS", "sL"], ["wS", "nL"], ["wS", "sL"],
    # adjacent lefts cross each other
    ["nL", "eL"], ["eL", "sL"], ["sL", "wL"], ["wL", "nL"],
    # merges into a shared exit lane
    ["nR", "eS"], ["eR", "sS"], ["sR", "wS"], ["wR", "nS"],
    ["nR", "sL"], ["eR", "wL"], ["sR", "nL"], ["wR", "eL"],
]

_X_PHASE_TABLES = [
    # 0: N/S through + rights, permissive lefts
    {"nS": "G", "sS": "G", "nR": "G", "sR": "G", "nL": "g", "sL": "g"},
    # 1: N/S protected lefts
    {"nL": "G", "sL": "G"},
    # 2: E/W through + rights, permissive lefts
    {"eS": "G", "wS": "G", "eR": "G", "wR": "G", "eL": "g", "wL": "g"},
    # 3: E/W protected lefts
    {"eL": "G", "wL": "G"},
    # 4-7: single-arm phases
    {"nL": "G", "nS": "G", "nR": "G"},
    {"eL": "G", "eS": "G", "eR": "G"},
    {"sL": "G", "sS": "G", "sR": "G"},
    {"wL": "G", "wS": "G", "wR": "G"},
]


def _four_arm(name, approach_len, exit_len, internal):
    lanes = [
        _lane("in_n", approach_len["n"], entry=True),
        _lane("in_e", approach_len["e"], entry=True),
        _lane("in_s", approach_len["s"], entry=True),
        _lane("in_w", approach_len["w"], entry=True),
        _lane("out_n", exit_len["n"]),
        _lane("out_e", exit_len["e"]),
        _lane("out_s", exit_len["s"]),
        _lane("out_w", exit_len["w"]),
    ]
    conns = [
        _conn("nL", "in_n", "out_e", "left", internal["nL"]),
        _conn("nS", "in_n", "out_s", "straight", internal["nS"]),
        _conn("nR", "in_n", "out_w", "right", internal["nR"]),
        _conn("eL", "in_e", "out_s", "left", internal["eL"]),
        _conn("eS", "in_e", "out_w", "straight", internal["eS"]),
        _conn("eR", "in_e", "out_n", "right", internal["eR"]),
        _conn("sL", "in_s", "out_w", "left", internal["sL"]),
        _conn("sS", "in_s", "out_n", "straight", internal["sS"]),
        _conn("sR", "in_s", "out_e", "right", internal["sR"]),
        _conn("wL", "in_w", "out_n", "left", internal["wL"]),
        _conn("wS", "in_w", "out_e", "straight", internal["wS"]),
        _conn("wR", "in_w", "out_s", "right", internal["wR"]),
    ]
    cids = [c["id"] for c in conns]
    return {
        "name": name,
        "lanes": lanes,
        "connections": conns,
        "conflicts": _X_CONFLICTS,
        "phases": _phases(cids, _X_PHASE_TABLES),
        "detectors": _detectors(lanes),
    }


def _four_arm_8phase_regular():
    uniform = {cid: 16.0 for cid in
               ("nL", "nS", "nR", "eL", "eS", "eR", "sL", "sS", "sR", "wL", "wS", "wR")}
    return _four_arm(
        "four_arm_8phase_regular",
        approach_len={"n": 400.0, "e": 400.0, "s": 400.0, "w": 400.0},
        exit_len={"n": 400.0, "e": 400.0, "s": 400.0, "w": 400.0},
        internal=uniform,
    )


def _four_arm_8phase_irregular():
    # Skewed, elongated junction: long diagonal crossing paths, short corner
    # rights, and pairwise-distinct approach lengths.
    internal = {
        "nS": 34.0, "sS": 38.0, "eS": 30.0, "wS": 42.0,
        "nL": 40.0, "sL": 36.0, "eL": 44.0, "wL": 28.0,
        "nR": 9.0, "sR": 12.0, "eR": 10.0, "wR": 14.0,
    }
    return _four_arm(
        "four_arm_8phase_irregular",
        approach_len={"n": 320.0, "e": 450.0, "s": 280.0, "w": 520.0},
        exit_len={"n": 380.0, "e": 340.0, "s": 460.0, "w": 300.0},
        internal=internal,
    )


_BUILDERS = {
    "three_arm_4phase": _three_arm_4phase,
    "three_arm_6phase": _three_arm_6phase,
    "four_arm_8phase_regular": _four_arm_8phase_regular,
    "four_arm_8phase_irregular": _four_arm_8phase_irregular,
}


def archetype_names():
    return sorted(_BUILDERS)


def archetype_document(name: str) -> dict:
    """The raw network document for a built-in archetype."""
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise KeyError(f"unknown archetype {name!r}; available: {', '.join(archetype_names())}") from None
    return builder()


def archetype(name: str) -> RoadNetwork:
    return network_from_dict(archetype_document(name))


def builtin_archetypes():
    """All built-in (name, RoadNetwork) pairs, validated."""
    return [(name, archetype(name)) for name in archetype_names()]
