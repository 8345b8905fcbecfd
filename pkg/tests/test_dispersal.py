"""Pump gating, density cap, and exact bladder conservation."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reefseed.dispersal import (
    MAX_AREAL_DENSITY,
    Bladder,
    DispersalMode,
    PumpState,
    fuel_gauge,
    gate_decision,
    release_step,
)
from reefseed.errors import InvalidParameterError
from reefseed.perception import Prediction
from reefseed.world import SubstrateClass

SUIT = SubstrateClass.SUITABLE
UNSUIT = SubstrateClass.UNSUITABLE
GATED = DispersalMode.CLASSIFIER_GATED
CONSTANT = DispersalMode.CONSTANT_PUMP


def pred(cls):
    return Prediction(predicted=cls, frame_id=0, timestamp=0.0)


class TestGateDecision:
    def test_gated_opens_over_predicted_suitable(self):
        cmd = gate_decision(GATED, pred(SUIT), Bladder(100.0, 50.0))
        assert cmd.pump_on and not cmd.low_larvae_alert

    def test_gated_closes_over_predicted_unsuitable(self):
        cmd = gate_decision(GATED, pred(UNSUIT), Bladder(100.0, 50.0))
        assert not cmd.pump_on

    def test_constant_pump_ignores_prediction(self):
        cmd = gate_decision(CONSTANT, pred(UNSUIT), Bladder(100.0, 50.0))
        assert cmd.pump_on

    @pytest.mark.parametrize("mode", [GATED, CONSTANT])
    def test_empty_bladder_gates_off_with_alert(self, mode):
        cmd = gate_decision(mode, pred(SUIT), Bladder(100.0, 0.0))
        assert not cmd.pump_on
        assert cmd.low_larvae_alert


class TestReleaseStep:
    def test_pump_off_releases_nothing(self):
        bladder = Bladder(100.0, 80.0)
        after, frag = release_step(
            bladder, PumpState(running=False), dt=1.0, swath_width=1.0, speed=0.5
        )
        assert after == bladder
        assert frag.released_volume == 0.0
        assert frag.released_larvae == 0.0

    def test_release_below_density_cap_is_uncapped(self):
        bladder = Bladder(100.0, 100.0)
        pump = PumpState(running=True, flow_rate=0.1, larvae_density=10_000.0)
        after, frag = release_step(bladder, pump, dt=1.0, swath_width=1.0, speed=0.5)
        assert frag.released_volume == pytest.approx(0.1)
        assert frag.released_larvae == pytest.approx(1000.0)
        areal = frag.released_larvae / (1.0 * 0.5 * 1.0)
        assert areal == pytest.approx(2000.0)
        assert areal <= MAX_AREAL_DENSITY
        assert after.volume == pytest.approx(99.9)

    def test_density_cap_limits_flow(self):
        bladder = Bladder(100.0, 100.0)
        pump = PumpState(running=True, flow_rate=1.0, larvae_density=100_000.0)
        _, frag = release_step(bladder, pump, dt=1.0, swath_width=1.0, speed=0.5)
        covered = 1.0 * 0.5 * 1.0
        assert frag.released_larvae / covered == pytest.approx(MAX_AREAL_DENSITY)
        assert frag.released_volume == pytest.approx(0.05)

    def test_stationary_vehicle_releases_nothing(self):
        bladder = Bladder(100.0, 50.0)
        pump = PumpState(running=True, flow_rate=0.1, larvae_density=10_000.0)
        after, frag = release_step(bladder, pump, dt=1.0, swath_width=1.0, speed=0.0)
        assert frag.released_volume == 0.0
        assert after.volume == 50.0

    def test_zero_larvae_density_releases_volume_without_larvae(self):
        bladder = Bladder(100.0, 50.0)
        pump = PumpState(running=True, flow_rate=0.2, larvae_density=0.0)
        after, frag = release_step(bladder, pump, dt=1.0, swath_width=1.0, speed=0.5)
        assert frag.released_volume == pytest.approx(0.2)
        assert frag.released_larvae == 0.0

    def test_starvation_releases_remainder_with_alert(self):
        bladder = Bladder(100.0, 0.05)
        pump = PumpState(running=True, flow_rate=0.1, larvae_density=10_000.0)
        after, frag = release_step(bladder, pump, dt=1.0, swath_width=1.0, speed=0.75)
        assert frag.released_volume == 0.05
        assert after.volume == 0.0
        assert frag.low_larvae_alert

    def test_rejects_bad_step_arguments(self):
        bladder = Bladder(100.0, 50.0)
        pump = PumpState(running=True)
        with pytest.raises(InvalidParameterError):
            release_step(bladder, pump, dt=0.0, swath_width=1.0, speed=0.5)
        with pytest.raises(InvalidParameterError):
            release_step(bladder, pump, dt=1.0, swath_width=0.0, speed=0.5)

    def test_state_validation(self):
        with pytest.raises(InvalidParameterError):
            Bladder(100.0, 120.0)
        with pytest.raises(InvalidParameterError):
            Bladder(100.0, -1.0)
        with pytest.raises(InvalidParameterError):
            PumpState(running=True, flow_rate=-0.1)
        with pytest.raises(InvalidParameterError):
            PumpState(running=True, larvae_density=-5.0)


class TestConservation:
    def run_until_empty(self, initial, flow, dt, max_steps=100_000):
        bladder = Bladder.full(initial)
        pump = PumpState(running=True, flow_rate=flow, larvae_density=100.0)
        released = []
        for _ in range(max_steps):
            if bladder.volume == 0.0:
                break
            bladder, frag = release_step(
                bladder, pump, dt=dt, swath_width=1.0, speed=0.75
            )
            released.append(frag.released_volume)
        return bladder, released

    def test_long_mission_totals_reproduce_initial_volume(self):
        bladder, released = self.run_until_empty(100.0, flow=0.005, dt=0.5)
        assert bladder.volume == 0.0
        total = math.fsum(released) + bladder.volume
        assert abs(total - 100.0) <= math.ulp(100.0)

    @settings(max_examples=50, deadline=None)
    @given(
        initial=st.floats(0.01, 500.0),
        flow=st.floats(0.001, 2.0),
        dt=st.floats(0.1, 1.0),
    )
    def test_conservation_property(self, initial, flow, dt):
        bladder, released = self.run_until_empty(initial, flow, dt)
        total = math.fsum(released) + bladder.volume
        assert abs(total - initial) <= math.ulp(initial)

    def test_volume_never_increases(self):
        bladder = Bladder.full(10.0)
        pump = PumpState(running=True, flow_rate=0.3, larvae_density=100.0)
        prev = bladder.volume
        for _ in range(200):
            bladder, _ = release_step(bladder, pump, dt=0.5, swath_width=1.0, speed=0.75)
            assert bladder.volume <= prev
            prev = bladder.volume


class TestModeDominance:
    @settings(max_examples=40, deadline=None)
    @given(
        predictions=st.lists(st.booleans(), min_size=1, max_size=400),
        capacity=st.floats(0.05, 5.0),
    )
    def test_constant_pump_cumulative_release_dominates_gated(
        self, predictions, capacity
    ):
        pump_params = dict(flow_rate=0.1, larvae_density=1000.0)
        gated = Bladder.full(capacity)
        constant = Bladder.full(capacity)
        total_gated = total_constant = 0.0
        for is_suitable in predictions:
            p = pred(SUIT if is_suitable else UNSUIT)
            for mode, bladder in ((GATED, gated), (CONSTANT, constant)):
                cmd = gate_decision(mode, p, bladder)
                pump = PumpState(running=cmd.pump_on, **pump_params)
                updated, frag = release_step(
                    bladder, pump, dt=0.5, swath_width=1.0, speed=0.75
                )
                if mode is GATED:
                    gated = updated
                    total_gated += frag.released_volume
                else:
                    constant = updated
                    total_constant += frag.released_volume
            assert total_constant >= total_gated - 1e-12

    def test_gated_never_releases_over_predicted_unsuitable(self):
        bladder = Bladder.full(1.0)
        for i in range(100):
            p = Prediction(UNSUIT if i % 3 else SUIT, frame_id=i, timestamp=float(i))
            cmd = gate_decision(GATED, p, bladder)
            pump = PumpState(running=cmd.pump_on, flow_rate=0.05, larvae_density=10.0)
            bladder, frag = release_step(bladder, pump, dt=0.5, swath_width=1.0, speed=0.75)
            if p.predicted is UNSUIT:
                assert frag.released_volume == 0.0


class TestFuelGauge:
    def test_gauge_fractions(self):
        assert fuel_gauge(Bladder(100.0, 100.0)) == 1.0
        assert fuel_gauge(Bladder(100.0, 75.0)) == 0.75
        assert fuel_gauge(Bladder(100.0, 0.0)) == 0.0

    def test_zero_capacity_rejected(self):
        with pytest.raises(InvalidParameterError):
            fuel_gauge(Bladder(0.0, 0.0))
