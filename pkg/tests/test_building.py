import json

import pytest

import thermident as th
from thermident.building import AMBIENT, BuildingDescription, BuildingElement, Layer
from thermident.errors import SchemaError


def test_twin_description_valid(twin_desc):
    assert twin_desc.zone_ids == ["NW", "W", "S", "E", "NE", "C"]
    assert len(twin_desc.vav_boxes) == 10
    assert sum(z.floor_area for z in twin_desc.zones) == pytest.approx(1300.0)


def test_json_round_trip(twin_desc, tmp_path):
    path = tmp_path / "twin.json"
    twin_desc.save(path)
    again = BuildingDescription.load(path)
    assert again.to_dict() == twin_desc.to_dict()


def test_schema_version_required(twin_desc, tmp_path):
    d = twin_desc.to_dict()
    d["schema"] = "something-else/9"
    with pytest.raises(SchemaError):
        BuildingDescription.from_dict(d)


def test_invalid_json_reports_line(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"schema": "thermident-building/1",\n  "zones": [}')
    with pytest.raises(SchemaError, match="line"):
        BuildingDescription.load(path)


def test_zero_thickness_layer_rejected(twin_desc):
    d = twin_desc.to_dict()
    d["building_elements"][7]["layers"][0]["thickness"] = 0.0
    with pytest.raises(SchemaError, match="thickness"):
        BuildingDescription.from_dict(d)


def test_asymmetric_adjacency_rejected(twin_desc):
    d = twin_desc.to_dict()
    d["zones"][0]["adjacent"].append("S")  # S does not list NW back
    with pytest.raises(SchemaError, match="symmetric"):
        BuildingDescription.from_dict(d)


def test_window_larger_than_face_rejected(twin_desc):
    d = twin_desc.to_dict()
    for e in d["building_elements"]:
        if e.get("a_win"):
            e["a_win"] = e["area"] + 1.0
            break
    with pytest.raises(SchemaError, match="a_win"):
        BuildingDescription.from_dict(d)


def test_mass_element_needs_room_path(twin_desc):
    d = twin_desc.to_dict()
    for e in d["building_elements"]:
        if e["id"] == "floor_C":
            e["neighbors"] = ["ADIABATIC", "ADIABATIC"]
    with pytest.raises(SchemaError, match="disconnected|thermal path"):
        BuildingDescription.from_dict(d)


def test_vav_box_limits_checked(twin_desc):
    d = twin_desc.to_dict()
    d["vav_boxes"][0]["min_flow"] = 0.9
    with pytest.raises(SchemaError, match="min_flow"):
        BuildingDescription.from_dict(d)


def test_missing_room_volume_rejected(twin_desc):
    d = twin_desc.to_dict()
    del d["room_volumes"]["room_C"]
    with pytest.raises(SchemaError, match="room_volumes"):
        BuildingDescription.from_dict(d)


def test_window_on_interior_wall_rejected():
    with pytest.raises(SchemaError, match="hull"):
        BuildingDescription(
            zones=[th.Zone("A", 10.0, [])],
            elements=[
                BuildingElement(id="r", kind="room-air", zone="A"),
                BuildingElement(
                    id="w",
                    kind="wall",
                    neighbors=("r", "r"),
                    area=5.0,
                    a_win=1.0,
                    layers=[Layer(0.1, 0.4, 800.0, 1000.0)],
                ),
            ],
            vav_boxes=[th.VavBox("v", "A", 0.01, 0.1)],
            room_volumes={"r": 30.0},
        )
