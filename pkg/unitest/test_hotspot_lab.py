# BSD 3-Clause License
#
# Copyright (C) 2021 THL A29 Limited, a Tencent company.  All rights reserved.
#
# Redistribution and use in source and binary forms, with or without modification,
# are permitted provided that the following conditions are met:
#
#  * Redistributions of source code must retain the above copyright notice, this
#    list of conditions and the following disclaimer.
#
#  * Redistributions in binary form must reproduce the above copyright notice,
#    this list of conditions and the following disclaimer in the documentation
#    and/or other materials provided with the distribution.
#
#  * Neither the name of the psutil authors nor the names of its contributors
#    may be used to endorse or promote products derived from this software without
#    specific prior written permission.
#
# THIS SOFTWARE IS PROVIDED BY THE COPYRIGHT HOLDERS AND CONTRIBUTORS "AS IS" AND
# ANY EXPRESS OR IMPLIED WARRANTIES, INCLUDING, BUT NOT LIMITED TO, THE IMPLIED
# WARRANTIES OF MERCHANTABILITY AND FITNESS FOR A PARTICULAR PURPOSE ARE
# DISCLAIMED. IN NO EVENT SHALL THE COPYRIGHT OWNER OR CONTRIBUTORS BE LIABLE FOR
# ANY DIRECT, INDIRECT, INCIDENTAL, SPECIAL, EXEMPLARY, OR CONSEQUENTIAL DAMAGES
# (INCLUDING, BUT NOT LIMITED TO, PROCUREMENT OF SUBSTITUTE GOODS OR SERVICES;
# LOSS OF USE, DATA, OR PROFITS; OR BUSINESS INTERRUPTION) HOWEVER CAUSED AND ON
# ANY THEORY OF LIABILITY, WHETHER IN CONTRACT, STRICT LIABILITY, OR TORT
# (INCLUDING NEGLIGENCE OR OTHERWISE) ARISING IN ANY WAY OUT OF THE USE OF THIS
# SOFTWARE, EVEN IF ADVISED OF THE POSSIBILITY OF SUCH DAMAGE.

import math
import unittest

import numpy as np

from common import indicator_data, numerics, sphere_cone
from hotcone.core import (
    HotSpot,
    HotspotLocation,
    HotspotSet,
    HotspotTrajectory,
    Regime,
    TrackPolicy,
    VerdictTolerance,
    classify_regime,
    find_hotspots,
    fit_indices,
    hotspot_set_distance,
    predicted_limit,
    search_window_check,
    solve_heat,
    track,
)
from hotcone.core.hotspot_lab import _radial_floor

SMALL_POLICY = TrackPolicy(nodes_per_decade=32, window_decades=4, fiber_resolution=(8, 16))
RESOLUTION = (16, 32)


def synthetic_trajectory(times, radii, x, location=HotspotLocation.POINT):
    sets = []
    for t, r in zip(times, radii):
        spot = HotSpot(float(r), x, 1.0 / t, location)
        sets.append(HotspotSet(float(t), 1.0 / t, [spot]))
    return HotspotTrajectory(list(times), sets, SMALL_POLICY.resolve())


class TestFindHotspots(unittest.TestCase):
    def setUp(self):
        self.cone = sphere_cone()

    def test_radially_decreasing_data_peaks_at_cone_point(self):
        phi = indicator_data(self.cone, amplitudes=((1, 1.0),), lo=0.0, hi=1.0)
        policy = SMALL_POLICY.resolve()
        grid = self.cone.fiber.grid(policy.fiber_resolution)
        field_ = solve_heat(self.cone, phi, 1.0, policy.radii(1.0), grid.points)
        for rel_tol in (None, 0.0):
            found = find_hotspots(field_, rel_tol)
            self.assertEqual(found.primary.location, HotspotLocation.CONE_POINT)
            self.assertEqual(found.r_sup, 0.0)
            self.assertAlmostEqual(found.max_value, float(field_.u[0, 0]), places=14)

    def test_off_center_hot_spot(self):
        phi = indicator_data(self.cone)
        policy = SMALL_POLICY.resolve()
        grid = self.cone.fiber.grid(policy.fiber_resolution)
        t = 1.0e3
        field_ = solve_heat(self.cone, phi, t, policy.radii(t), grid.points)
        found = find_hotspots(field_)
        spot = found.primary
        self.assertEqual(spot.location, HotspotLocation.POINT)
        self.assertTrue(0.3 < spot.r < 0.6)
        # pole of the cos(theta) mode
        self.assertTrue(spot.x[0] < 1e-3)
        self.assertTrue(spot.value >= float(field_.u.max()))


class TestTrackPolicy(unittest.TestCase):
    def test_radii(self):
        policy = TrackPolicy(window_R=2.0, nodes_per_decade=4, window_decades=2).resolve()
        radii = policy.radii(100.0)
        self.assertEqual(radii.numel(), 10)
        self.assertEqual(float(radii[0]), 0.0)
        self.assertAlmostEqual(float(radii[-1]), 20.0, places=10)
        self.assertAlmostEqual(float(radii[1]), 0.2, places=12)

    def test_radii_reach_down_to_floor(self):
        policy = TrackPolicy(window_R=2.0, nodes_per_decade=4, window_decades=2).resolve()
        radii = policy.radii(100.0, floor=1.0e-3)
        self.assertEqual(float(radii[0]), 0.0)
        self.assertTrue(float(radii[1]) <= 1.0e-3 * (1 + 1e-12))
        self.assertAlmostEqual(float(radii[-1]), 20.0, places=10)
        logs = np.log10(radii[1:].numpy())
        self.assertTrue(np.all(np.diff(logs) <= 0.25 + 1e-12))
        # a floor above the window bottom changes nothing
        self.assertTrue(np.array_equal(policy.radii(100.0, floor=5.0).numpy(), policy.radii(100.0).numpy()))
        self.assertTrue(np.array_equal(policy.radii(100.0, floor=0.0).numpy(), policy.radii(100.0).numpy()))

    def test_radial_floor_follows_prediction(self):
        cone = sphere_cone(rho=0.8)
        pred = predicted_limit(cone, indicator_data(cone), resolution=RESOLUTION)
        self.assertTrue(pred.alpha < 0)
        for t in (1.0e2, 1.0e5):
            self.assertAlmostEqual(_radial_floor(pred, t), 0.05 * pred.R_infinity * t ** pred.alpha, places=14)
        self.assertIsNone(_radial_floor(None, 1.0e2))
        cone = sphere_cone(rho=0.5)
        self.assertIsNone(_radial_floor(predicted_limit(cone, indicator_data(cone), resolution=RESOLUTION), 1.0e2))

    def test_defaults_come_from_numerics(self):
        with numerics(nodes_per_decade=7, window_R=3.0):
            policy = TrackPolicy().resolve()
        self.assertEqual(policy.nodes_per_decade, 7)
        self.assertEqual(policy.window_R, 3.0)
        self.assertEqual(policy.fiber_resolution, (32, 64))


class TestTracking(unittest.TestCase):
    def test_critical_regime_converges_to_center_of_mass(self):
        cone = sphere_cone()
        phi = indicator_data(cone)
        schedule = list(np.logspace(2.0, 4.0, 9))
        traj = track(cone, phi, schedule, SMALL_POLICY, threads=2)
        self.assertEqual(len(traj.sets), 9)
        self.assertTrue(np.array_equal(traj.times, np.asarray(schedule)))
        pred = predicted_limit(cone, phi, resolution=RESOLUTION)
        verdict = classify_regime(traj, pred)
        self.assertEqual(verdict.measured_regime, Regime.CRITICAL)
        self.assertTrue(verdict.passed, verdict.checks)
        self.assertTrue(verdict.terminal_distance < 0.05)
        self.assertEqual(verdict.to_dict()["predicted_regime"], 3)
        self.assertTrue(hotspot_set_distance(pred, traj.sets[-1]) <= hotspot_set_distance(pred, traj.sets[0]) + 1e-12)

    def test_schedule_must_increase(self):
        cone = sphere_cone()
        with self.assertRaises(ValueError):
            track(cone, indicator_data(cone), [10.0, 5.0], SMALL_POLICY)
        with self.assertRaises(ValueError):
            track(cone, indicator_data(cone), [], SMALL_POLICY)

    def test_search_window(self):
        cone = sphere_cone()
        report = search_window_check(cone, indicator_data(cone), 1.0e3, SMALL_POLICY)
        self.assertTrue(report["unchanged"])


class TestClassifyRegime(unittest.TestCase):
    def setUp(self):
        self.times = np.logspace(2.0, 5.0, 13)

    def test_outward_rate_is_recovered(self):
        cone = sphere_cone(rho=2.0)
        pred = predicted_limit(cone, indicator_data(cone), resolution=RESOLUTION)
        x = pred.J_maximizers[0].tolist()
        traj = synthetic_trajectory(self.times, pred.R_infinity * self.times ** pred.alpha, x)
        verdict = classify_regime(traj, pred)
        self.assertEqual(verdict.measured_regime, Regime.OUTWARD)
        self.assertAlmostEqual(verdict.alpha_hat, pred.alpha, places=8)
        self.assertTrue(verdict.passed, verdict.checks)

        # a trajectory twice as far out fails the radius check without raising
        traj = synthetic_trajectory(self.times, 2.0 * pred.R_infinity * self.times ** pred.alpha, x)
        verdict = classify_regime(traj, pred)
        self.assertFalse(verdict.checks["R_infinity"])
        self.assertFalse(verdict.passed)
        self.assertTrue(classify_regime(traj, pred, tol=VerdictTolerance.infinite()).passed)

    def test_cone_point_regime(self):
        cone = sphere_cone(rho=0.5)
        pred = predicted_limit(cone, indicator_data(cone), resolution=RESOLUTION)
        traj = synthetic_trajectory(self.times, np.zeros_like(self.times), None, HotspotLocation.CONE_POINT)
        verdict = classify_regime(traj, pred)
        self.assertEqual(verdict.measured_regime, Regime.CONE_POINT)
        self.assertTrue(verdict.checks["pinned_at_cone_point"])
        self.assertTrue(verdict.passed)

    def _pinning_trajectory(self, radii):
        sets = []
        for t, r in zip(self.times, radii):
            location = HotspotLocation.CONE_POINT if r == 0 else HotspotLocation.POINT
            spot = HotSpot(float(r), None if r == 0 else [0.0, 0.0], 1.0 / t, location)
            sets.append(HotspotSet(float(t), 1.0 / t, [spot]))
        return HotspotTrajectory(list(self.times), sets, SMALL_POLICY.resolve())

    def test_pinned_since(self):
        cone = sphere_cone(rho=0.5)
        pred = predicted_limit(cone, indicator_data(cone), resolution=RESOLUTION)
        idx = fit_indices(self.times)
        radii = np.zeros_like(self.times)
        radii[: idx[0] + 2] = 0.1
        verdict = classify_regime(self._pinning_trajectory(radii), pred)
        self.assertAlmostEqual(verdict.pinned_since, float(self.times[idx[0] + 2]))
        self.assertTrue(verdict.checks["pinned_at_cone_point"])
        self.assertEqual(verdict.to_dict()["pinned_since"], verdict.pinned_since)

        # only the last time at the cone point is not a pinned trajectory
        radii = np.full_like(self.times, 0.1)
        radii[-1] = 0.0
        verdict = classify_regime(self._pinning_trajectory(radii), pred)
        self.assertEqual(verdict.pinned_since, float(self.times[-1]))
        self.assertFalse(verdict.checks["pinned_at_cone_point"])
        self.assertFalse(verdict.passed)

        radii[-1] = 0.1
        verdict = classify_regime(self._pinning_trajectory(radii), pred)
        self.assertIsNone(verdict.pinned_since)
        self.assertFalse(verdict.checks["pinned_at_cone_point"])

    def test_fit_window(self):
        cone = sphere_cone(rho=2.0)
        pred = predicted_limit(cone, indicator_data(cone), resolution=RESOLUTION)
        x = pred.J_maximizers[0].tolist()
        traj = synthetic_trajectory(self.times, pred.R_infinity * self.times ** pred.alpha, x)
        verdict = classify_regime(traj, pred, fit_window=(1.0e3, 1.0e5))
        self.assertTrue(1.0e3 * (1 - 1e-12) <= verdict.fit_window[0] < 2.0e3)
        self.assertEqual(verdict.fit_window[1], float(self.times[-1]))
        with self.assertRaises(ValueError):
            classify_regime(traj, pred, fit_window=(1.0e4, 2.0e4))
        short = synthetic_trajectory(self.times[:5], np.ones(5), x)
        with self.assertRaises(ValueError):
            classify_regime(short, pred)

    def test_infinite_tolerance(self):
        tol = VerdictTolerance.infinite()
        self.assertEqual(tol.alpha_rel, math.inf)
        self.assertFalse(tol.fiber_confinement)


class TestRegimesFromHeatSolutions(unittest.TestCase):
    """Tracked hot spots of k=1 plus k=3 data on S^2 cones of several radii."""

    policy = TrackPolicy(nodes_per_decade=16, window_decades=2, fiber_resolution=(8, 16))
    schedule = list(np.logspace(2.0, 4.0, 9))
    tol = VerdictTolerance(alpha_rel=0.3, radius_ratio=(0.33, 3.0), fiber_confinement=False)

    def _verdict(self, rho):
        cone = sphere_cone(rho=rho)
        phi = indicator_data(cone)
        pred = predicted_limit(cone, phi, resolution=RESOLUTION)
        traj = track(cone, phi, self.schedule, self.policy, threads=2, pred=pred)
        return pred, traj, classify_regime(traj, pred, tol=self.tol)

    def test_small_fiber_pins_to_cone_point(self):
        pred, traj, verdict = self._verdict(0.5)
        self.assertEqual(pred.regime, Regime.CONE_POINT)
        self.assertEqual(verdict.measured_regime, Regime.CONE_POINT)
        self.assertEqual(verdict.pinned_since, verdict.fit_window[0])
        self.assertTrue(verdict.passed, verdict.checks)

    def test_medium_fiber_moves_inward(self):
        pred, traj, verdict = self._verdict(0.8)
        self.assertEqual(pred.regime, Regime.INWARD)
        self.assertTrue(np.all(traj.r_primary > 0))
        # below where a fixed two-decade window would stop
        bottom = self.policy.resolve().window_R * math.sqrt(self.schedule[-1]) / 100.0
        self.assertTrue(traj.r_primary[-1] < bottom)
        self.assertEqual(verdict.measured_regime, Regime.INWARD)
        self.assertTrue(verdict.alpha_hat < 0)
        self.assertTrue(verdict.passed, verdict.checks)

    def test_large_fiber_moves_outward(self):
        pred, traj, verdict = self._verdict(2.0)
        self.assertEqual(pred.regime, Regime.OUTWARD)
        self.assertTrue(traj.r_primary[-1] > traj.r_primary[0] > 0)
        self.assertEqual(verdict.measured_regime, Regime.OUTWARD)
        self.assertTrue(0 < verdict.alpha_hat < 0.5)
        self.assertTrue(verdict.passed, verdict.checks)


if __name__ == "__main__":
    unittest.main()
