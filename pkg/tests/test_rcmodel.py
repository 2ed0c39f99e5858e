import numpy as np
import pytest

import thermident as th
from thermident.building import (
    ADIABATIC,
    AMBIENT,
    BuildingDescription,
    BuildingElement,
    Layer,
    VavBox,
    Zone,
)
from thermident.errors import NetworkError
from thermident.params import CP_AIR, RHO_AIR, V_TA, V_TS, SOLAR_CHANNEL
from thermident.rcmodel import (
    assemble_continuous,
    build_rc_network,
    hull_flux,
    hvac_flux,
    ig_flux,
    total_flux_rate,
)


def micro_building():
    """One zone, one room, two hull walls sized for the flux spot checks."""
    zones = [Zone("S", 10.0, [])]
    elements = [
        BuildingElement(id="room", kind="room-air", zone="S"),
        BuildingElement(
            id="wallA", kind="wall", neighbors=(AMBIENT, "room"), area=2.0,
            orientation="S", layers=[Layer(0.1, 0.5, 900.0, 1000.0)],
        ),
        BuildingElement(
            id="wallB", kind="window-bearing-wall", neighbors=(AMBIENT, "room"),
            area=5.0, a_win=3.0, orientation="S",
            layers=[Layer(0.1, 0.5, 900.0, 1000.0)],
        ),
    ]
    boxes = [VavBox("box", "S", 0.0, 0.5)]
    desc = BuildingDescription(zones, elements, boxes, {"room": 30.0})
    gamma = th.ParameterVector(
        gamma_ew=10.5, gamma_iw=29.4, gamma_floor=51.5, gamma_ceil=44.3,
        gamma_absorp=0.75, gamma_win_sol_abs=0.03, u_win=0.63,
        c_ig={"S": 18.8},
    )
    return desc, gamma


class TestHullFlux:
    def setup_method(self):
        self.desc, self.gamma = micro_building()
        self.model = build_rc_network(self.desc, self.gamma)
        self.ext_a = self.model.state_ids.index("wallA#0")
        self.ext_b = self.model.state_ids.index("wallB#0")
        self.room = self.model.state_ids.index("room")

    def test_zero_difference_zero_sun(self):
        x = np.full(self.model.n, 15.0)
        v = np.zeros(6)
        v[V_TA] = 15.0
        q = hull_flux(self.model, x, v)
        assert q[self.ext_a] == pytest.approx(0.0)

    def test_wall_terms(self):
        # gamma_ew=10.5, a_ew=2, dT=1, absorp=0.75, sol=100 -> 171 W
        x = np.full(self.model.n, 20.0)
        v = np.zeros(6)
        v[V_TA] = 21.0
        v[SOLAR_CHANNEL["S"]] = 100.0
        q = hull_flux(self.model, x, v)
        assert q[self.ext_a] == pytest.approx(171.0)

    def test_window_terms(self):
        # u_win=0.63, a_win=3, dT=2, winSolAbs=0.03, sol=200 -> 21.78 W on the room
        x = np.full(self.model.n, 19.0)
        v = np.zeros(6)
        v[V_TA] = 21.0
        v[SOLAR_CHANNEL["S"]] = 200.0
        q = hull_flux(self.model, x, v)
        assert q[self.room] == pytest.approx(21.78)

    def test_non_hull_states_zero(self):
        x = np.full(self.model.n, 19.0)
        v = np.zeros(6)
        v[V_TA] = 25.0
        v[SOLAR_CHANNEL["S"]] = 500.0
        q = hull_flux(self.model, x, v)
        inner_a = self.model.state_ids.index("wallA#1")
        inner_b = self.model.state_ids.index("wallB#1")
        assert q[inner_a] == 0.0 and q[inner_b] == 0.0


class TestHvacFlux:
    def setup_method(self):
        self.desc, self.gamma = micro_building()
        self.model = build_rc_network(self.desc, self.gamma)
        self.room = self.model.state_ids.index("room")

    def test_zero_flow(self):
        x = np.full(self.model.n, 20.0)
        v = np.zeros(6)
        v[V_TS] = 13.0
        assert np.all(hvac_flux(self.model, x, v, np.zeros(1)) == 0.0)

    def test_zero_temperature_difference(self):
        x = np.full(self.model.n, 13.0)
        v = np.zeros(6)
        v[V_TS] = 13.0
        assert np.all(hvac_flux(self.model, x, v, np.array([0.3])) == 0.0)

    def test_paper_value(self):
        # c_p=1005, total flow 0.1, Ts - x = 5 -> 502.5 W
        x = np.full(self.model.n, 13.0)
        v = np.zeros(6)
        v[V_TS] = 18.0
        q = hvac_flux(self.model, x, v, np.array([0.1]))
        assert q[self.room] == pytest.approx(502.5)

    def test_negative_airflow_rejected(self):
        x = np.full(self.model.n, 20.0)
        with pytest.raises(th.SimulationError, match="negative"):
            hvac_flux(self.model, x, np.zeros(6), np.array([-0.1]))


class TestIgFlux:
    def test_background_only(self):
        # c_IG = 18.8 W/m^2 on 10 m^2 of zone-S floor -> 188 W
        desc, gamma = micro_building()
        model = build_rc_network(desc, gamma)
        q = ig_flux(model, gamma.c_ig_array(["S"]), np.zeros(1))
        assert q[model.state_ids.index("room")] == pytest.approx(188.0)
        assert np.count_nonzero(q) == 1

    def test_all_zero(self):
        desc, gamma = micro_building()
        model = build_rc_network(desc, gamma)
        assert np.all(ig_flux(model, np.zeros(1), np.zeros(1)) == 0.0)

    def test_combined_value(self):
        # (0.3 + 1.7) W/m^2 on 50 m^2 -> 100 W
        zones = [Zone("NW", 50.0, [])]
        elements = [
            BuildingElement(id="r", kind="room-air", zone="NW"),
            BuildingElement(id="f", kind="floor", neighbors=("r", ADIABATIC),
                            area=50.0, layers=[Layer(0.2, 1.8, 2300.0, 880.0)]),
        ]
        desc = BuildingDescription(zones, elements, [VavBox("b", "NW", 0.0, 0.4)], {"r": 150.0})
        gamma = th.ParameterVector(10.5, 29.4, 51.5, 44.3, 0.75, 0.03, 0.63, c_ig={"NW": 0.3})
        model = build_rc_network(desc, gamma)
        q = ig_flux(model, gamma.c_ig_array(["NW"]), np.array([1.7]))
        assert q[model.state_ids.index("r")] == pytest.approx(100.0)


class TestTwoNodeToy:
    def make(self):
        zones = [Zone("A", 10.0, [])]
        layer = Layer(0.1, 0.4, 1000.0, 1000.0)
        c_wall = 0.1 * 1000.0 * 1000.0 * 10.0  # 1e6 J/K at area 10
        volume = c_wall / (RHO_AIR * CP_AIR)
        elements = [
            BuildingElement(id="r", kind="room-air", zone="A"),
            BuildingElement(id="w", kind="wall", neighbors=("r", ADIABATIC),
                            area=10.0, layers=[layer]),
        ]
        desc = BuildingDescription(zones, elements, [], {"r": volume})
        gamma = th.ParameterVector(10.5, 29.4, 51.5, 44.3, 0.75, 0.03, 0.63, c_ig={"A": 1.0})
        return build_rc_network(desc, gamma, nodes_per_element=1)

    def test_symmetric_off_diagonals_and_conservation(self):
        model = self.make()
        assert model.n == 2
        a = model.a_t
        assert a[0, 1] == pytest.approx(a[1, 0])
        assert a[0, 1] > 0
        assert np.abs(a.sum(axis=1)).max() < 1e-18

    def test_closed_network_conserves_energy(self):
        model = assemble_continuous(self.make())
        dm = th.discretize(model, 900.0)
        x = np.array([25.0, 15.0])
        c = model.capacitances
        mean0 = float(c @ x) / c.sum()
        for _ in range(200):
            x = dm.a @ x
        assert float(c @ x) / c.sum() == pytest.approx(mean0, rel=1e-8)


class TestTwinStructure:
    def test_state_count_matches_element_count(self, twin_desc, twin_model):
        n_rooms = sum(1 for e in twin_desc.elements if e.is_room)
        n_mass = sum(1 for e in twin_desc.elements if not e.is_room)
        assert twin_model.n == n_rooms + 2 * n_mass

    def test_a_t_sign_structure(self, twin_model):
        a = twin_model.a_t
        off = a - np.diag(np.diag(a))
        assert np.all(np.diag(a) <= 0)
        assert np.all(off >= 0)

    def test_a_t_rows_sum_to_zero(self, twin_model):
        assert np.abs(twin_model.a_t.sum(axis=1)).max() < 1e-15

    def test_c_rows_stochastic_over_zone_rooms(self, twin_model):
        c = twin_model.c_out
        assert np.all(c >= 0)
        assert np.allclose(c.sum(axis=1), 1.0)
        for zi in range(c.shape[0]):
            nonzero = np.nonzero(c[zi])[0]
            assert set(nonzero) <= set(twin_model.room_states)
            zones = twin_model.room_zone_index[
                [list(twin_model.room_states).index(s) for s in nonzero]
            ]
            assert np.all(zones == zi)

    def test_b_ig_nonzero_only_on_own_zone_rooms(self, twin_model):
        b = twin_model.b_ig
        for col in range(b.shape[1]):
            rows = np.nonzero(b[:, col])[0]
            for r in rows:
                ri = list(twin_model.room_states).index(r)
                assert twin_model.room_zone_index[ri] == col

    def test_matrix_flux_equivalence_100_probes(self, twin_desc, twin_gamma, twin_model):
        rng = np.random.default_rng(7)
        c_ig = twin_gamma.c_ig_array(twin_desc.zone_ids)
        for _ in range(100):
            x = rng.normal(20.0, 4.0, twin_model.n)
            v = np.array([rng.normal(15, 6), rng.normal(13, 1),
                          *rng.uniform(0, 700, 4)])
            u = rng.uniform(0.0, 0.4, twin_model.n_boxes)
            f = rng.uniform(0.0, 15.0, twin_model.n_zones)
            lhs = (
                twin_model.a @ x
                + twin_model.b_v @ v
                + twin_model.b_ig @ (c_ig + f)
                + u @ (twin_model.b_xu @ x)
                + u @ (twin_model.b_vu @ v)
            )
            rhs = total_flux_rate(twin_model, x, v, u, c_ig, f)
            scale = max(np.abs(rhs).max(), 1e-12)
            assert np.abs(lhs - rhs).max() / scale < 1e-10

    def test_u_zero_reduces_to_linear(self, twin_model, twin_gamma, twin_desc):
        rng = np.random.default_rng(8)
        x = rng.normal(20, 3, twin_model.n)
        v = np.array([10.0, 13.0, 100.0, 200.0, 50.0, 20.0])
        c_ig = twin_gamma.c_ig_array(twin_desc.zone_ids)
        rate = total_flux_rate(twin_model, x, v, np.zeros(twin_model.n_boxes), c_ig, np.zeros(6))
        linear = twin_model.a @ x + twin_model.b_v @ v + twin_model.b_ig @ c_ig
        assert np.allclose(rate, linear, atol=1e-12)

    def test_equilibrium_at_ambient(self, twin_model):
        x = np.full(twin_model.n, 17.5)
        v = np.zeros(6)
        v[V_TA] = 17.5
        rate = twin_model.a @ x + twin_model.b_v @ v
        assert np.abs(rate).max() < 1e-12


class TestBuildErrors:
    def test_nodes_per_element_range(self, twin_desc, twin_gamma):
        with pytest.raises(NetworkError):
            build_rc_network(twin_desc, twin_gamma, nodes_per_element=4)

    def test_three_node_walls_supported(self, twin_desc, twin_gamma):
        model = build_rc_network(twin_desc, twin_gamma, nodes_per_element=3)
        n_mass = sum(1 for e in twin_desc.elements if not e.is_room)
        assert model.n == 6 + 3 * n_mass
