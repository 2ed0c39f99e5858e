"""Declarative building description: zones, building elements, VAV boxes.

A building is described by a JSON document (schema ``thermident-building/1``,
see docs/building-schema.md). Room-air elements are capacitive nodes; wall,
floor, ceiling and window-bearing-wall elements are layered thermal masses
connecting exactly two nodes (a room-air element id, ``AMBIENT``, or
``ADIABATIC``). Hull elements additionally carry a window area and a facade
orientation that selects one of the four solar irradiance channels.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import SchemaError
from .params import ORIENTATIONS

SCHEMA_VERSION = "thermident-building/1"

AMBIENT = "AMBIENT"
ADIABATIC = "ADIABATIC"

ROOM_AIR = "room-air"
MASS_KINDS = ("wall", "floor", "ceiling", "window-bearing-wall")
ELEMENT_KINDS = (ROOM_AIR,) + MASS_KINDS


@dataclass
class Layer:
    """One material layer of a mass element."""

    thickness: float  # m
    conductivity: float  # W/(m K)
    density: float  # kg/m^3
    specific_heat: float  # J/(kg K)

    def validate(self, where: str) -> None:
        for name in ("thickness", "conductivity", "density", "specific_heat"):
            if getattr(self, name) <= 0:
                raise SchemaError(f"{where}: layer {name} must be > 0")


@dataclass
class Zone:
    id: str
    floor_area: float  # m^2
    adjacent: list[str] = field(default_factory=list)


@dataclass
class BuildingElement:
    """A lumped thermal element of the building.

    Room-air elements hold ``zone`` and an optional explicit ``floor_area``
    (defaults to an equal split of the zone's floor area over its rooms).
    Mass elements hold ``neighbors``, ``area`` (total face area, m^2) and a
    layer stack; hull elements (one neighbor AMBIENT) may carry ``a_win``
    (window area within the face, m^2) and ``orientation``.
    """

    id: str
    kind: str
    zone: str | None = None
    floor_area: float | None = None
    neighbors: tuple[str, str] | None = None
    area: float | None = None
    a_win: float = 0.0
    orientation: str | None = None
    layers: list[Layer] = field(default_factory=list)

    @property
    def is_room(self) -> bool:
        return self.kind == ROOM_AIR

    @property
    def is_hull(self) -> bool:
        return self.neighbors is not None and AMBIENT in self.neighbors

    @property
    def a_ew(self) -> float:
        """Opaque (mass) face area: total face area minus window area."""
        return (self.area or 0.0) - self.a_win


@dataclass
class VavBox:
    id: str
    zone: str
    min_flow: float  # kg/s
    max_flow: float  # kg/s


@dataclass
class BuildingDescription:
    """Validated geometry/construction/zone/VAV input for model construction."""

    zones: list[Zone]
    elements: list[BuildingElement]
    vav_boxes: list[VavBox]
    room_volumes: dict[str, float]  # m^3, keyed by room-air element id

    def __post_init__(self):
        self.validate()

    # -- lookups ----------------------------------------------------------

    @property
    def zone_ids(self) -> list[str]:
        return [z.id for z in self.zones]

    @property
    def box_ids(self) -> list[str]:
        return [b.id for b in self.vav_boxes]

    def zone(self, zone_id: str) -> Zone:
        for z in self.zones:
            if z.id == zone_id:
                return z
        raise SchemaError(f"unknown zone id {zone_id!r}")

    def rooms_of(self, zone_id: str) -> list[BuildingElement]:
        return [e for e in self.elements if e.is_room and e.zone == zone_id]

    def room_floor_area(self, room: BuildingElement) -> float:
        """Floor area attributed to one room (explicit, or equal zone split)."""
        if room.floor_area is not None:
            return room.floor_area
        siblings = self.rooms_of(room.zone)
        return self.zone(room.zone).floor_area / len(siblings)

    def boxes_serving(self, zone_id: str) -> list[VavBox]:
        return [b for b in self.vav_boxes if b.zone == zone_id]

    # -- validation --------------------------------------------------------

    def validate(self) -> None:
        zone_ids = set()
        for z in self.zones:
            if z.id in zone_ids:
                raise SchemaError(f"duplicate zone id {z.id!r}")
            zone_ids.add(z.id)
            if z.floor_area <= 0:
                raise SchemaError(f"zone {z.id}: floor_area must be > 0")
        for z in self.zones:
            for adj in z.adjacent:
                if adj not in zone_ids:
                    raise SchemaError(f"zone {z.id}: unknown adjacent zone {adj!r}")
                if z.id not in self.zone(adj).adjacent:
                    raise SchemaError(
                        f"zone adjacency must be symmetric: {z.id} lists {adj} "
                        f"but not vice versa"
                    )

        elem_ids = set()
        room_ids = set()
        for e in self.elements:
            if e.id in elem_ids:
                raise SchemaError(f"duplicate element id {e.id!r}")
            elem_ids.add(e.id)
            if e.kind not in ELEMENT_KINDS:
                raise SchemaError(f"element {e.id}: unknown kind {e.kind!r}")
            if e.is_room:
                room_ids.add(e.id)
                if e.zone not in zone_ids:
                    raise SchemaError(f"room {e.id}: unknown zone {e.zone!r}")
                if e.floor_area is not None and e.floor_area <= 0:
                    raise SchemaError(f"room {e.id}: floor_area must be > 0")

        for e in self.elements:
            if e.is_room:
                continue
            if e.neighbors is None or len(e.neighbors) != 2:
                raise SchemaError(f"element {e.id}: must connect exactly two nodes")
            for nb in e.neighbors:
                if nb not in (AMBIENT, ADIABATIC) and nb not in room_ids:
                    raise SchemaError(
                        f"element {e.id}: neighbor {nb!r} is not a room-air element, "
                        f"AMBIENT or ADIABATIC"
                    )
            if all(nb in (AMBIENT, ADIABATIC) for nb in e.neighbors):
                raise SchemaError(
                    f"element {e.id}: no thermal path to any room air (disconnected)"
                )
            if e.area is None or e.area <= 0:
                raise SchemaError(f"element {e.id}: area must be > 0")
            if e.a_win < 0 or e.a_win > e.area:
                raise SchemaError(
                    f"element {e.id}: window area must satisfy 0 <= a_win <= area"
                )
            if not e.layers:
                raise SchemaError(f"element {e.id}: mass element needs >= 1 layer")
            for layer in e.layers:
                layer.validate(f"element {e.id}")
            if e.orientation is not None and e.orientation not in ORIENTATIONS:
                raise SchemaError(
                    f"element {e.id}: orientation must be one of {ORIENTATIONS}"
                )
            if not e.is_hull:
                if e.a_win > 0:
                    raise SchemaError(f"element {e.id}: a_win only valid on hull elements")
                if e.orientation is not None:
                    raise SchemaError(f"element {e.id}: orientation only valid on hull elements")
            elif e.a_win >= e.area:
                raise SchemaError(f"element {e.id}: a window needs opaque area around it")

        for zid in zone_ids:
            if not self.rooms_of(zid):
                raise SchemaError(f"zone {zid}: needs at least one room-air element")

        for room_id in room_ids:
            if room_id not in self.room_volumes:
                raise SchemaError(f"room {room_id}: missing entry in room_volumes")
        for room_id, vol in self.room_volumes.items():
            if room_id not in room_ids:
                raise SchemaError(f"room_volumes: {room_id!r} is not a room-air element")
            if vol <= 0:
                raise SchemaError(f"room {room_id}: volume must be > 0")

        box_ids = set()
        for b in self.vav_boxes:
            if b.id in box_ids:
                raise SchemaError(f"duplicate VAV box id {b.id!r}")
            box_ids.add(b.id)
            if b.zone not in zone_ids:
                raise SchemaError(f"VAV box {b.id}: unknown zone {b.zone!r}")
            if not 0 <= b.min_flow <= b.max_flow:
                raise SchemaError(f"VAV box {b.id}: need 0 <= min_flow <= max_flow")
            if b.max_flow <= 0:
                raise SchemaError(f"VAV box {b.id}: max_flow must be > 0")

    # -- JSON I/O ----------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "zones": [
                {"id": z.id, "floor_area": z.floor_area, "adjacent": list(z.adjacent)}
                for z in self.zones
            ],
            "building_elements": [_element_to_dict(e) for e in self.elements],
            "vav_boxes": [
                {"id": b.id, "zone": b.zone, "min_flow": b.min_flow, "max_flow": b.max_flow}
                for b in self.vav_boxes
            ],
            "room_volumes": dict(self.room_volumes),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BuildingDescription":
        if d.get("schema") != SCHEMA_VERSION:
            raise SchemaError(
                f"unsupported or missing schema version (expected {SCHEMA_VERSION!r}, "
                f"got {d.get('schema')!r})"
            )
        try:
            zones = [
                Zone(str(z["id"]), float(z["floor_area"]), [str(a) for a in z.get("adjacent", [])])
                for z in d["zones"]
            ]
            elements = [_element_from_dict(e) for e in d["building_elements"]]
            boxes = [
                VavBox(str(b["id"]), str(b["zone"]), float(b["min_flow"]), float(b["max_flow"]))
                for b in d["vav_boxes"]
            ]
            volumes = {str(k): float(v) for k, v in d["room_volumes"].items()}
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed building description: {exc!r}") from exc
        return cls(zones=zones, elements=elements, vav_boxes=boxes, room_volumes=volumes)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "BuildingDescription":
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
        except OSError as exc:
            raise SchemaError(f"{path}: {exc.strerror}") from exc
        return cls.from_dict(raw)


def _element_to_dict(e: BuildingElement) -> dict:
    d: dict = {"id": e.id, "kind": e.kind}
    if e.is_room:
        d["zone"] = e.zone
        if e.floor_area is not None:
            d["floor_area"] = e.floor_area
        return d
    d["neighbors"] = list(e.neighbors)
    d["area"] = e.area
    if e.a_win:
        d["a_win"] = e.a_win
    if e.orientation is not None:
        d["orientation"] = e.orientation
    d["layers"] = [
        {
            "thickness": l.thickness,
            "conductivity": l.conductivity,
            "density": l.density,
            "specific_heat": l.specific_heat,
        }
        for l in e.layers
    ]
    return d


def _element_from_dict(d: dict) -> BuildingElement:
    kind = str(d["kind"])
    if kind == ROOM_AIR:
        return BuildingElement(
            id=str(d["id"]),
            kind=kind,
            zone=str(d["zone"]),
            floor_area=float(d["floor_area"]) if "floor_area" in d else None,
        )
    layers = [
        Layer(
            thickness=float(l["thickness"]),
            conductivity=float(l["conductivity"]),
            density=float(l["density"]),
            specific_heat=float(l["specific_heat"]),
        )
        for l in d.get("layers", [])
    ]
    neighbors = d.get("neighbors")
    if neighbors is None or len(neighbors) != 2:
        raise SchemaError(f"element {d.get('id')!r}: must list exactly two neighbors")
    return BuildingElement(
        id=str(d["id"]),
        kind=kind,
        neighbors=(str(neighbors[0]), str(neighbors[1])),
        area=float(d["area"]) if "area" in d else None,
        a_win=float(d.get("a_win", 0.0)),
        orientation=d.get("orientation"),
        layers=layers,
    )
