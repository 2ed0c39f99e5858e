"""The synthetic 6-zone office floor used as ground truth ("the twin").

One open-plan floor of 1300 m^2 aggregated into six zones (NW, W, S, E, NE,
C): five perimeter zones with exterior walls (the NE zone has no windows)
around an interior core. Room volumes are effective thermal volumes -- six
times the geometric air volume -- so the fast node capacitance accounts for
furniture and contents, not just air.
"""

from __future__ import annotations

from .building import (
    ADIABATIC,
    AMBIENT,
    BuildingDescription,
    BuildingElement,
    Layer,
    VavBox,
    Zone,
)
from .params import ParameterVector

ZONE_ORDER = ["NW", "W", "S", "E", "NE", "C"]

_ZONE_AREAS = {"NW": 180.0, "W": 200.0, "S": 260.0, "E": 200.0, "NE": 160.0, "C": 300.0}

_ADJACENCY = {
    "NW": ["W", "NE", "C"],
    "W": ["NW", "S", "C"],
    "S": ["W", "E", "C"],
    "E": ["S", "NE", "C"],
    "NE": ["E", "NW", "C"],
    "C": ["NW", "W", "S", "E", "NE"],
}

# (gross facade area, window area, orientation); NE has no windows
_FACADES = {
    "NW": (54.0, 16.0, "N"),
    "W": (60.0, 18.0, "W"),
    "S": (78.0, 24.0, "S"),
    "E": (60.0, 18.0, "E"),
    "NE": (48.0, 0.0, "N"),
}

_PARTY_WALLS = [
    ("NW", "W", 30.0),
    ("W", "S", 30.0),
    ("S", "E", 30.0),
    ("E", "NE", 30.0),
    ("NE", "NW", 24.0),
    ("C", "NW", 36.0),
    ("C", "W", 36.0),
    ("C", "S", 42.0),
    ("C", "E", 36.0),
    ("C", "NE", 30.0),
]

# (boxes per zone, min flow, max flow) in kg/s per box
_VAV = {
    "NW": (1, 0.04, 0.40),
    "W": (2, 0.03, 0.24),
    "S": (2, 0.03, 0.30),
    "E": (2, 0.03, 0.24),
    "NE": (1, 0.04, 0.36),
    "C": (2, 0.03, 0.34),
}

_EXT_WALL_LAYERS = [
    Layer(thickness=0.15, conductivity=1.40, density=2200.0, specific_heat=880.0),
    Layer(thickness=0.02, conductivity=0.04, density=40.0, specific_heat=1200.0),
]
_INT_WALL_LAYERS = [
    Layer(thickness=0.10, conductivity=0.35, density=700.0, specific_heat=1000.0),
]
_FLOOR_LAYERS = [
    Layer(thickness=0.20, conductivity=1.80, density=2300.0, specific_heat=880.0),
]
_CEILING_LAYERS = [
    Layer(thickness=0.12, conductivity=1.80, density=2300.0, specific_heat=880.0),
]

EFFECTIVE_HEIGHT = 18.0  # m^3 of effective thermal volume per m^2 of floor


def twin_description(slab_boundary: str = ADIABATIC) -> BuildingDescription:
    """Build the 6-zone twin description.

    ``slab_boundary`` sets the outer neighbor of floor and ceiling slabs:
    ``ADIABATIC`` (default, no inter-floor exchange) or ``AMBIENT``.
    """
    if slab_boundary not in (ADIABATIC, AMBIENT):
        raise ValueError("slab_boundary must be ADIABATIC or AMBIENT")

    zones = [Zone(z, _ZONE_AREAS[z], list(_ADJACENCY[z])) for z in ZONE_ORDER]
    elements: list[BuildingElement] = []
    volumes: dict[str, float] = {}

    for z in ZONE_ORDER:
        room_id = f"room_{z}"
        elements.append(BuildingElement(id=room_id, kind="room-air", zone=z))
        volumes[room_id] = _ZONE_AREAS[z] * EFFECTIVE_HEIGHT

    for z, (gross, a_win, orient) in _FACADES.items():
        elements.append(
            BuildingElement(
                id=f"ew_{z}",
                kind="window-bearing-wall" if a_win > 0 else "wall",
                neighbors=(AMBIENT, f"room_{z}"),
                area=gross,
                a_win=a_win,
                orientation=orient,
                layers=list(_EXT_WALL_LAYERS),
            )
        )

    for za, zb, area in _PARTY_WALLS:
        elements.append(
            BuildingElement(
                id=f"iw_{za}_{zb}",
                kind="wall",
                neighbors=(f"room_{za}", f"room_{zb}"),
                area=area,
                layers=list(_INT_WALL_LAYERS),
            )
        )

    for z in ZONE_ORDER:
        elements.append(
            BuildingElement(
                id=f"floor_{z}",
                kind="floor",
                neighbors=(f"room_{z}", slab_boundary),
                area=_ZONE_AREAS[z],
                layers=list(_FLOOR_LAYERS),
            )
        )
        elements.append(
            BuildingElement(
                id=f"ceil_{z}",
                kind="ceiling",
                neighbors=(f"room_{z}", slab_boundary),
                area=_ZONE_AREAS[z],
                layers=list(_CEILING_LAYERS),
            )
        )

    boxes = []
    for z in ZONE_ORDER:
        count, lo, hi = _VAV[z]
        for i in range(1, count + 1):
            boxes.append(VavBox(id=f"vav_{z}{i}", zone=z, min_flow=lo, max_flow=hi))

    return BuildingDescription(
        zones=zones, elements=elements, vav_boxes=boxes, room_volumes=volumes
    )


def twin_true_parameters() -> ParameterVector:
    """The parameter set the twin's ground-truth data is generated with."""
    return ParameterVector(
        gamma_ew=10.5,
        gamma_iw=29.4,
        gamma_floor=51.5,
        gamma_ceil=44.3,
        gamma_absorp=0.75,
        gamma_win_sol_abs=0.03,
        u_win=0.63,
        c_ig={"NW": 0.3, "W": 8.0, "S": 18.8, "E": 8.0, "NE": 11.0, "C": 8.0},
    )


def toy_description() -> BuildingDescription:
    """A small 2-zone building for fast tests: 3 rooms, 2 walls, 2 slabs."""
    zones = [Zone("A", 60.0, ["B"]), Zone("B", 40.0, ["A"])]
    elements = [
        BuildingElement(id="room_A1", kind="room-air", zone="A", floor_area=35.0),
        BuildingElement(id="room_A2", kind="room-air", zone="A", floor_area=25.0),
        BuildingElement(id="room_B", kind="room-air", zone="B"),
        BuildingElement(
            id="ew_A",
            kind="window-bearing-wall",
            neighbors=(AMBIENT, "room_A1"),
            area=24.0,
            a_win=6.0,
            orientation="S",
            layers=list(_EXT_WALL_LAYERS),
        ),
        BuildingElement(
            id="iw_AB",
            kind="wall",
            neighbors=("room_A2", "room_B"),
            area=18.0,
            layers=list(_INT_WALL_LAYERS),
        ),
        BuildingElement(
            id="iw_A12",
            kind="wall",
            neighbors=("room_A1", "room_A2"),
            area=15.0,
            layers=list(_INT_WALL_LAYERS),
        ),
        BuildingElement(
            id="floor_A",
            kind="floor",
            neighbors=("room_A1", ADIABATIC),
            area=35.0,
            layers=list(_FLOOR_LAYERS),
        ),
        BuildingElement(
            id="ceil_B",
            kind="ceiling",
            neighbors=("room_B", ADIABATIC),
            area=40.0,
            layers=list(_CEILING_LAYERS),
        ),
    ]
    boxes = [
        VavBox(id="vav_A", zone="A", min_flow=0.03, max_flow=0.35),
        VavBox(id="vav_B", zone="B", min_flow=0.03, max_flow=0.25),
    ]
    volumes = {"room_A1": 35.0 * 12.0, "room_A2": 25.0 * 12.0, "room_B": 40.0 * 12.0}
    return BuildingDescription(zones=zones, elements=elements, vav_boxes=boxes, room_volumes=volumes)


def toy_parameters() -> ParameterVector:
    return ParameterVector(
        gamma_ew=10.5,
        gamma_iw=29.4,
        gamma_floor=51.5,
        gamma_ceil=44.3,
        gamma_absorp=0.75,
        gamma_win_sol_abs=0.03,
        u_win=0.63,
        c_ig={"A": 8.0, "B": 12.0},
    )
