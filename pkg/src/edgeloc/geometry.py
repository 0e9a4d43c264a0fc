"""Planar ground-truth geometry: positions, bearings and subtended angles.

Angles are plain floats in radians.  Functions documented as returning a
*principal* angle guarantee a value in ``[-pi, pi)``.

A subtended-angle measurement is keyed by the triple ``(observer, from, to)``:
``(u, v, w)`` is the counter-clockwise angle at ``u`` swept from the ray
towards ``v`` to the ray towards ``w``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .errors import DegenerateGeometryError, PreconditionError

TWO_PI = 2.0 * math.pi
SYMMETRY_TOL = 1e-12
VIRTUAL_SEPARATOR = "~"

Triple = tuple[str, str, str]


def principal_value(theta: float) -> float:
    """Fold ``theta`` into ``[-pi, pi)``."""
    if not math.isfinite(theta):
        raise PreconditionError(f"angle must be finite, got {theta!r}")
    result = (theta + math.pi) % TWO_PI - math.pi
    # float % can round up to exactly the modulus
    if result >= math.pi:
        result -= TWO_PI
    return result


@dataclass(frozen=True)
class Position:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise PreconditionError(f"position must be finite, got ({self.x}, {self.y})")


@dataclass(frozen=True)
class BearingVector:
    cx: float
    cy: float

    def __post_init__(self) -> None:
        if abs(self.cx * self.cx + self.cy * self.cy - 1.0) > SYMMETRY_TOL:
            raise PreconditionError("bearing vector must have unit norm")


def bearing_angle(p_u: Position, p_v: Position) -> float:
    """Principal angle of the bearing from ``p_u`` towards ``p_v``."""
    dx = p_v.x - p_u.x
    dy = p_v.y - p_u.y
    if dx == 0.0 and dy == 0.0:
        raise DegenerateGeometryError(f"coincident positions {p_u} and {p_v}")
    return principal_value(math.atan2(dy, dx))


def bearing_vector(angle: float) -> BearingVector:
    return BearingVector(math.cos(angle), math.sin(angle))


def subtended_angle(p_u: Position, p_v: Position, p_w: Position) -> float:
    """Counter-clockwise angle at ``p_u`` from the ray to ``p_v`` to the ray to ``p_w``."""
    return principal_value(bearing_angle(p_u, p_w) - bearing_angle(p_u, p_v))


class AngleMeasurementSet(Mapping[Triple, float]):
    """Immutable set of subtended angles, closed under sign symmetry.

    ``s[(u, v, w)]`` is the angle measured at ``u`` from ``v`` to ``w``.
    Construct with :meth:`closed` to add the mirrored entries automatically.
    """

    def __init__(self, entries: Mapping[Triple, float] | Iterable[tuple[Triple, float]] = ()):
        items = dict(entries)
        for (u, v, w), value in items.items():
            if u == v or u == w or v == w:
                raise PreconditionError(f"degenerate measurement key {(u, v, w)}")
            if not math.isfinite(value):
                raise PreconditionError(f"non-finite angle for {(u, v, w)}")
            mirror = items.get((u, w, v))
            if mirror is None:
                raise PreconditionError(f"missing sign-symmetric entry for {(u, v, w)}")
            if abs(principal_value(value + mirror)) > SYMMETRY_TOL:
                raise PreconditionError(f"entries {(u, v, w)} and {(u, w, v)} are not negatives")
        self._entries = {key: items[key] for key in sorted(items)}

    @classmethod
    def closed(cls, entries: Mapping[Triple, float]) -> AngleMeasurementSet:
        """Build from one-sided entries, adding ``(u, w, v) -> PV(-value)``."""
        full: dict[Triple, float] = {}
        for (u, v, w), value in entries.items():
            full[(u, v, w)] = principal_value(value)
            full.setdefault((u, w, v), principal_value(-value))
        return cls(full)

    def __getitem__(self, key: Triple) -> float:
        return self._entries[key]

    def __iter__(self) -> Iterator[Triple]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __repr__(self) -> str:
        return f"AngleMeasurementSet({len(self)} entries)"

    def observers(self) -> list[str]:
        return sorted({u for u, _, _ in self._entries})

    def pairs(self, observer: str) -> list[tuple[str, str]]:
        """Unordered measured pairs at ``observer``, each reported once as (from, to) with from < to."""
        return sorted({(v, w) for u, v, w in self._entries if u == observer and v < w})

    def seen_by(self, observer: str) -> set[str]:
        return {v for u, v, _ in self._entries if u == observer}

    def agents(self) -> set[str]:
        return {a for key in self._entries for a in key}


@dataclass(frozen=True)
class Scenario:
    """Ground-truth agent positions plus the measured subtended-angle triples.

    ``angles`` optionally pins explicit radian values for some triples; those
    override geometric synthesis.
    """

    agents: Mapping[str, Position]
    measured_triples: tuple[Triple, ...]
    angles: Mapping[Triple, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "agents", dict(self.agents))
        object.__setattr__(self, "measured_triples", tuple(tuple(t) for t in self.measured_triples))
        object.__setattr__(self, "angles", {tuple(k): float(v) for k, v in self.angles.items()})
        for name in self.agents:
            if not name or VIRTUAL_SEPARATOR in name:
                raise PreconditionError(f"invalid agent identifier {name!r}")
        for triple in list(self.measured_triples) + list(self.angles):
            u, v, w = triple
            missing = [a for a in triple if a not in self.agents]
            if missing:
                raise PreconditionError(f"unknown agents {missing} in measurement {triple}")
            if u in (v, w) or v == w:
                raise PreconditionError(f"measurement {triple} needs three distinct agents")
        ids = list(self.agents)
        for i, a in enumerate(ids):
            for b in ids[i + 1:]:
                pa, pb = self.agents[a], self.agents[b]
                if math.hypot(pa.x - pb.x, pa.y - pb.y) <= 0.0:
                    raise DegenerateGeometryError(f"agents {a} and {b} share a position")

    def true_bearing(self, u: str, v: str) -> float:
        return bearing_angle(self.agents[u], self.agents[v])


def synthesize_measurements(scenario: Scenario) -> AngleMeasurementSet:
    entries: dict[Triple, float] = {}
    for u, v, w in scenario.measured_triples:
        if (u, v, w) in scenario.angles:
            value = scenario.angles[(u, v, w)]
        elif (u, w, v) in scenario.angles:
            value = -scenario.angles[(u, w, v)]
        else:
            p = scenario.agents
            value = subtended_angle(p[u], p[v], p[w])
        entries[(u, v, w)] = value
    return AngleMeasurementSet.closed(entries)


def scenario_to_dict(scenario: Scenario) -> dict:
    doc: dict = {
        "agents": [{"id": a, "x": p.x, "y": p.y} for a, p in scenario.agents.items()],
        "measurements": [{"observer": u, "from": v, "to": w} for u, v, w in scenario.measured_triples],
    }
    if scenario.angles:
        doc["angles"] = [
            {"observer": u, "from": v, "to": w, "value": value}
            for (u, v, w), value in scenario.angles.items()
        ]
    return doc


def scenario_from_dict(doc: Mapping) -> Scenario:
    try:
        agents = {str(a["id"]): Position(float(a["x"]), float(a["y"])) for a in doc["agents"]}
        if len(agents) != len(doc["agents"]):
            raise PreconditionError("duplicate agent identifiers")
        triples = tuple((str(m["observer"]), str(m["from"]), str(m["to"])) for m in doc["measurements"])
        angles = {
            (str(m["observer"]), str(m["from"]), str(m["to"])): float(m["value"])
            for m in doc.get("angles", [])
        }
    except (KeyError, TypeError) as exc:
        raise PreconditionError(f"malformed scenario document: {exc}") from exc
    # explicit angles imply a measurement even if not listed separately
    listed = set(triples) | {(u, w, v) for u, v, w in triples}
    extra = []
    for u, v, w in angles:
        if (u, v, w) not in listed:
            extra.append((u, v, w))
            listed.update({(u, v, w), (u, w, v)})
    return Scenario(agents, triples + tuple(extra), angles)


def load_scenario(path: str | Path) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise PreconditionError(f"cannot read scenario {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise PreconditionError(f"{path}: invalid JSON ({exc})") from exc
    return scenario_from_dict(doc)


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scenario_to_dict(scenario), fh, indent=2)
        fh.write("\n")
