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
from dataclasses import replace

import torch

from common import indicator_data, numerics, points, sphere_cone
from hotcone.core import (
    DTYPE,
    ConeSetup,
    ConfigError,
    HypothesisError,
    InitialCondition,
    RadialProfile,
    TruncationError,
    calibrate_gaussian_envelope,
    circle_spectrum,
    cone_distance,
    dp_gamma_dr,
    euclidean_heat_kernel,
    heat_kernel,
    mass_defect,
    p_gamma,
    solve_heat,
    sphere_spectrum,
    truncation_order,
)


def ball_average_at_origin(t):
    """Heat flow at the origin of R^3 from the indicator of the unit ball."""
    return math.erf(1.0 / (2.0 * math.sqrt(t))) - math.exp(-1.0 / (4.0 * t)) / math.sqrt(math.pi * t)


class TestConeSetup(unittest.TestCase):
    def test_gammas(self):
        cone = sphere_cone()
        self.assertEqual(cone.gamma_1, 0.5)
        self.assertAlmostEqual(cone.gamma_of(2), 1.5, places=14)
        self.assertAlmostEqual(cone.level_gamma(3), 3.5, places=14)
        self.assertEqual(cone.describe()["n"], 3)

    def test_rejects_bad_cones(self):
        with self.assertRaises(ConfigError):
            ConeSetup(2, circle_spectrum(1.0, 4))
        with self.assertRaises(ConfigError):
            ConeSetup(4, sphere_spectrum(2, 1.0, 4))

    def test_from_dict(self):
        cone = ConeSetup.from_dict({"n": 3, "fiber": {"kind": "sphere", "rho": 0.5, "count": 4}})
        self.assertAlmostEqual(cone.gamma_of(2), math.sqrt(0.25 + 8.0), places=14)


class TestInitialCondition(unittest.TestCase):
    def setUp(self):
        self.cone = sphere_cone()

    def test_total_mass(self):
        phi = indicator_data(self.cone)
        expected = math.sqrt(4.0 * math.pi) * 7.0 / 3.0
        self.assertAlmostEqual(phi.total_mass(), expected, places=10)
        self.assertAlmostEqual(phi.validate(), expected, places=10)
        self.assertEqual(phi.support, 2.0)
        self.assertEqual([term.k for term in phi.terms], [1, 3])

    def test_profiles(self):
        bump = RadialProfile("bump", 1.0, 3.0, amplitude=2.0)
        values = bump(torch.as_tensor([1.0, 2.0, 3.0, 4.0], dtype=DTYPE))
        self.assertEqual(values.tolist(), [0.0, 2.0, 0.0, 0.0])
        power = RadialProfile("power", 0.0, 2.0, power=2.0)
        self.assertEqual(float(power(torch.as_tensor(1.5, dtype=DTYPE))), 2.25)
        with self.assertRaises(ConfigError):
            RadialProfile("indicator", 2.0, 1.0)
        with self.assertRaises(ConfigError):
            RadialProfile("ramp", 0.0, 1.0)

    def test_hypothesis_violations(self):
        with self.assertRaises(HypothesisError):
            indicator_data(self.cone, amplitudes=((1, -1.0),)).validate()
        # no constant mode, no mass
        with self.assertRaises(HypothesisError):
            indicator_data(self.cone, amplitudes=((2, 1.0),)).validate()

    def test_bad_terms(self):
        profile = RadialProfile("indicator", 0.0, 1.0)
        with self.assertRaises(ConfigError):
            InitialCondition(self.cone, [(1, profile), (1, profile)])
        with self.assertRaises(ConfigError):
            InitialCondition(self.cone, [(99, profile)])
        with self.assertRaises(ConfigError):
            InitialCondition(self.cone, [])

    def test_evaluation(self):
        phi = indicator_data(self.cone, amplitudes=((1, 2.0),))
        values = phi(torch.as_tensor([0.5, 1.5], dtype=DTYPE), points([0.3, 0.1], [2.0, 1.0]))
        v1 = 1.0 / math.sqrt(4.0 * math.pi)
        self.assertEqual(values.shape, (2, 2))
        self.assertEqual(float(values[0, 0]), 0.0)
        self.assertAlmostEqual(float(values[1, 1]), 2.0 * v1, places=14)


class TestHeatKernel(unittest.TestCase):
    def setUp(self):
        self.cone = sphere_cone()

    def test_cone_point_value(self):
        s = torch.as_tensor([0.0, 0.5, 2.0], dtype=DTYPE)
        for t in (0.1, 1.0, 10.0):
            p = p_gamma(0.5, 0.0, s, t, 3)
            expected = torch.exp(-s * s / (4.0 * t)) / (2.0 * math.sqrt(math.pi) * t ** 1.5)
            self.assertTrue(torch.allclose(p, expected, rtol=1e-12, atol=0.0), f"t={t}")
        # higher modes vanish at the cone point
        self.assertEqual(float(p_gamma(1.5, 0.0, 1.0, 1.0, 3)), 0.0)

    def test_matches_euclidean_kernel(self):
        plan = truncation_order(self.cone, None, 4.0 / math.sqrt(0.5), 0.5, tol=1e-14, support=4.0)
        self.assertTrue(plan.certified)
        self.assertEqual(plan.kind, "kernel")
        r = torch.as_tensor([1.0, 0.0, 2.5, 1.0], dtype=DTYPE)
        s = torch.as_tensor([1.5, 1.0, 2.0, 1.0], dtype=DTYPE)
        t = torch.as_tensor([0.5, 1.0, 2.0, 8.0], dtype=DTYPE)
        x = points([0.3, 0.2], [1.0, 1.0], [2.0, 5.0], [0.1, 0.0])
        y = points([1.0, 2.0], [2.0, 3.0], [0.5, 0.5], [3.0, 1.0])
        p = heat_kernel(self.cone, (r, x), (s, y), t, plan)
        expected = euclidean_heat_kernel(cone_distance(self.cone, (r, x), (s, y)), t)
        self.assertTrue(torch.allclose(p, expected, rtol=1e-8, atol=0.0))

    def test_kernel_needs_kernel_plan(self):
        phi = indicator_data(self.cone)
        plan = truncation_order(self.cone, phi, 2.0, 1.0)
        a = (torch.as_tensor([1.0], dtype=DTYPE), points([0.1, 0.1]))
        with self.assertRaises(TruncationError):
            heat_kernel(self.cone, a, a, 1.0, plan)

    def test_kernel_window_is_enforced(self):
        plan = truncation_order(self.cone, None, 2.0, 1.0, tol=1e-12, support=2.0)
        far = (torch.as_tensor([5.0], dtype=DTYPE), points([0.1, 0.1]))
        near = (torch.as_tensor([1.0], dtype=DTYPE), points([0.1, 0.1]))
        with self.assertRaises(TruncationError):
            heat_kernel(self.cone, far, near, 1.0, plan)
        with self.assertRaises(TruncationError):
            heat_kernel(self.cone, near, near, 0.5, plan)

    def test_cone_distance(self):
        r = torch.as_tensor([1.0], dtype=DTYPE)
        d = cone_distance(self.cone, (r, points([0.0, 0.0])), (r, points([math.pi, 0.0])))
        self.assertAlmostEqual(float(d[0]), 2.0, places=12)

    def test_radial_derivative(self):
        h = 1e-5
        for gamma in (0.5, 1.5, 2.7):
            fd = (p_gamma(gamma, 0.7 + h, 1.2, 0.8, 3) - p_gamma(gamma, 0.7 - h, 1.2, 0.8, 3)) / (2.0 * h)
            exact = dp_gamma_dr(gamma, 0.7, 1.2, 0.8, 3)
            self.assertTrue(abs(float(exact - fd)) <= 1e-6 * abs(float(fd)), f"gamma={gamma}")

    def test_radial_derivative_at_cone_point(self):
        self.assertEqual(float(dp_gamma_dr(0.5, 0.0, 1.0, 1.0, 3)), 0.0)
        self.assertEqual(float(dp_gamma_dr(2.5, 0.0, 1.0, 1.0, 3)), 0.0)
        self.assertTrue(math.isinf(float(dp_gamma_dr(1.3, 0.0, 1.0, 1.0, 3))))
        # exponent one: the limit is the slope of P at r = 0
        h = 1e-7
        slope = float(p_gamma(1.5, h, 1.0, 1.0, 3)) / h
        self.assertAlmostEqual(float(dp_gamma_dr(1.5, 0.0, 1.0, 1.0, 3)) / slope, 1.0, places=5)

    def test_invalid_arguments(self):
        with self.assertRaises(ValueError):
            p_gamma(0.5, 1.0, 1.0, 0.0, 3)
        with self.assertRaises(ValueError):
            p_gamma(0.5, -1.0, 1.0, 1.0, 3)

    def test_gaussian_envelope(self):
        plan = truncation_order(self.cone, None, 4.0, 1.0, tol=1e-12, support=3.0)
        gen = torch.Generator().manual_seed(0)
        n = 32
        samples = {
            "r": 3.0 * torch.rand(n, generator=gen, dtype=DTYPE),
            "s": 3.0 * torch.rand(n, generator=gen, dtype=DTYPE),
            "x": torch.stack([math.pi * torch.rand(n, generator=gen, dtype=DTYPE),
                              2 * math.pi * torch.rand(n, generator=gen, dtype=DTYPE)], dim=1),
            "y": torch.stack([math.pi * torch.rand(n, generator=gen, dtype=DTYPE),
                              2 * math.pi * torch.rand(n, generator=gen, dtype=DTYPE)], dim=1),
            "t": 1.0 + 3.0 * torch.rand(n, generator=gen, dtype=DTYPE),
        }
        constants = calibrate_gaussian_envelope(self.cone, samples, plan)
        self.assertEqual(sorted(constants), [4.0, 8.0, 16.0])
        self.assertTrue(constants[16.0] <= constants[8.0] <= constants[4.0])
        # the Euclidean kernel itself needs C1 <= (4 pi)^{-3/2} at C2 = 4
        self.assertTrue(constants[4.0] <= (4.0 * math.pi) ** -1.5 * (1.0 + 1e-8))


class TestTruncationPlan(unittest.TestCase):
    def setUp(self):
        self.cone = sphere_cone()
        self.phi = indicator_data(self.cone)

    def test_tighter_tolerance_keeps_more_levels(self):
        loose = truncation_order(self.cone, self.phi, 2.0, 1.0, tol=1e-6)
        tight = truncation_order(self.cone, self.phi, 2.0, 1.0, tol=1e-14)
        self.assertTrue(loose.certified and tight.certified)
        self.assertTrue(tight.K >= loose.K >= 1)
        self.assertTrue(tight.certified_bound <= 1e-14)
        self.assertEqual(tight.to_dict()["kind"], "solution")

    def test_bound_covers_dropped_levels(self):
        phi = indicator_data(self.cone, amplitudes=((1, 1.0), (3, 0.5), (6, 0.4), (12, 0.3)))
        plan = truncation_order(self.cone, phi, 2.0, 1.0, tol=1e-6)
        full = replace(plan, K=plan.K + 8)
        with numerics(fiber_grid=(8, 16)):
            for t in (1.0, 4.0):
                r = [0.0, 0.5, 1.0, 2.0 * math.sqrt(t)]
                kept = solve_heat(self.cone, phi, t, r, plan=plan).u
                exact = solve_heat(self.cone, phi, t, r, plan=full).u
                self.assertTrue(float(torch.max(torch.abs(exact - kept))) <= plan.certified_bound + 1e-13, f"t={t}")

    def test_window(self):
        plan = truncation_order(self.cone, self.phi, 2.0, 1.0)
        self.assertTrue(plan.covers(2.0, 1.0))
        self.assertTrue(plan.covers(4.0, 4.0))
        self.assertFalse(plan.covers(2.1, 1.0))
        self.assertFalse(plan.covers(0.1, 0.5))
        with self.assertRaises(TruncationError):
            plan.require(3.0, 1.0)

    def test_cap_exhausted(self):
        with numerics(truncation_cap=1):
            with self.assertRaises(TruncationError):
                truncation_order(self.cone, self.phi, 2.0, 1.0, tol=1e-14)

    def test_invalid_window(self):
        with self.assertRaises(ValueError):
            truncation_order(self.cone, self.phi, 0.0, 1.0)
        with self.assertRaises(ValueError):
            truncation_order(self.cone, None, 1.0, 1.0)


class TestHeatFlow(unittest.TestCase):
    def setUp(self):
        self.cone = sphere_cone()

    def test_ball_indicator_on_flat_cone(self):
        # the cone over the unit sphere is R^3
        phi = indicator_data(self.cone, amplitudes=((1, 1.0),), lo=0.0, hi=1.0)
        v1 = 1.0 / math.sqrt(4.0 * math.pi)
        for t in (0.5, 1.0, 4.0):
            field_ = solve_heat(self.cone, phi, t, [0.0, 0.5, 2.0], points=points([0.3, 0.2], [2.0, 4.0]))
            expected = v1 * ball_average_at_origin(t)
            self.assertTrue(abs(float(field_.u[0, 0]) - expected) / expected < 1e-8, f"t={t}")
            self.assertAlmostEqual(float(field_.u[1, 0]), float(field_.u[1, 1]), places=14)
            self.assertEqual(float(field_.du_dr[0, 0]), 0.0)
            # radial data decreases away from the origin
            self.assertTrue(float(field_.du_dr[2, 0]) < 0.0)

    def test_field_evaluate(self):
        phi = indicator_data(self.cone)
        pts = points([0.3, 0.2], [2.0, 4.0], [1.0, 1.0])
        field_ = solve_heat(self.cone, phi, 2.0, [0.0, 1.0, 2.0], points=pts)
        self.assertEqual(field_.ks, (1, 3))
        again = field_.evaluate(torch.as_tensor([0.0, 1.0, 2.0], dtype=DTYPE), pts)
        self.assertTrue(torch.allclose(again, field_.u, rtol=1e-12, atol=1e-15))

    def test_default_fiber_grid(self):
        phi = indicator_data(self.cone)
        with numerics(fiber_grid=(8, 16)):
            field_ = solve_heat(self.cone, phi, 1.0, [1.0])
        self.assertEqual(field_.u.shape, (1, 128))
        self.assertEqual(field_.fiber_shape, (8, 16))

    def test_plan_window_is_required(self):
        phi = indicator_data(self.cone)
        plan = truncation_order(self.cone, phi, 1.0, 1.0)
        with self.assertRaises(TruncationError):
            solve_heat(self.cone, phi, 1.0, [3.0], points=points([0.1, 0.1]), plan=plan)
        with self.assertRaises(ValueError):
            solve_heat(self.cone, phi, 0.0, [1.0], points=points([0.1, 0.1]))

    def test_mass_conservation(self):
        phi = indicator_data(self.cone, amplitudes=((1, 1.0), (2, 0.3)), lo=0.5, hi=1.5, kind="bump")
        for t in (1.0, 10.0, 100.0):
            self.assertTrue(mass_defect(self.cone, phi, t) < 1e-6, f"t={t}")


if __name__ == "__main__":
    unittest.main()
