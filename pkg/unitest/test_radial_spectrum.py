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

from common import numerics, warped_config
from hotcone.core import (
    BoundaryCondition,
    ConfigError,
    DegeneracyError,
    ExtremumLabel,
    ModeKind,
    ProductGrid,
    WarpedProductConfig,
    check_radial_monotonicity,
    circle_spectrum,
    degenerate_pair_mode,
    direct_surface_spectrum,
    fiber_combination_mode,
    locate_hotspots_compact,
    mixed_first_mode,
    nu_sweep,
    rayleigh_quotient,
    richardson_eigenvalues,
    second_neumann_mode,
    separated_spectrum,
    solve_radial,
    sphere_spectrum,
    tune_degenerate_radius,
)
from hotcone.core.radial_spectrum import convergence_ratio, evenness_defect, normalization


class TestRadialSolver(unittest.TestCase):
    def test_constant_warping_neumann(self):
        config = warped_config(L=math.pi, grid=1024)
        pairs = solve_radial(config, 0.0, "neumann", 5, richardson=True)
        for pair in pairs:
            self.assertAlmostEqual(pair.mu, (pair.j - 1) ** 2, delta=1e-6)
            self.assertEqual(pair.zero_count, pair.j - 1)

    def test_constant_warping_mixed(self):
        config = warped_config(L=math.pi, grid=1024)
        pairs = solve_radial(config, 0.0, BoundaryCondition.MIXED, 4, richardson=True)
        for pair in pairs:
            self.assertAlmostEqual(pair.mu, (pair.j - 0.5) ** 2, delta=1e-6)
            self.assertEqual(pair.w[0], 0.0)
            self.assertTrue(pair.w[-1] > 0)

    def test_trivial_product_shift(self):
        config = warped_config(L=1.0, grid=1024)
        refined, fine, coarse = richardson_eigenvalues(config, 2.0, "neumann", 4)
        for j in range(1, 5):
            exact = (j - 1) ** 2 * math.pi ** 2 + 2.0
            self.assertTrue(abs(refined[j - 1] - exact) / exact < 1e-6, f"j={j}")
        # the coarse grid is the less accurate one
        self.assertTrue(abs(coarse[3] - (9 * math.pi ** 2 + 2.0)) > abs(fine[3] - (9 * math.pi ** 2 + 2.0)))

    def test_second_order_convergence(self):
        config = warped_config(L=math.pi, grid=256)
        self.assertAlmostEqual(convergence_ratio(config, 0.0, "neumann", 2, 1.0), 4.0, delta=0.05)

    def test_rayleigh_quotient(self):
        config = warped_config("affine", L=1.0, grid=256, c=1.0)
        pair = solve_radial(config, 3.0, "neumann", 2)[1]
        self.assertTrue(abs(rayleigh_quotient(config, 3.0, pair.w) - pair.mu) / pair.mu < 1e-10)
        constant = warped_config(L=1.0, grid=256)
        self.assertAlmostEqual(rayleigh_quotient(constant, 2.0, lambda r: np.ones_like(r)), 2.0, places=12)
        with self.assertRaises(ValueError):
            rayleigh_quotient(config, 0.0, np.ones(config.grid + 1), bc="mixed")
        self.assertTrue(normalization(pair, config) > 0)

    def test_nu_sweep(self):
        config = warped_config("affine", L=1.0, grid=256, c=1.0)
        report = nu_sweep(config, [0.0, 0.5, 1.0, 2.0, 4.0, 8.0], "neumann", 1)
        self.assertTrue(report["monotone"])
        self.assertTrue(report["bound_holds"])
        self.assertEqual(len(report["constant_bound"]), 6)

    def test_symmetric_warping_gives_even_modes(self):
        config = warped_config("cosh", L=2.0, grid=512, offset=-1.0, c=1.0, center=0.0)
        pair = solve_radial(config, 2.0, "neumann", 1)[0]
        self.assertTrue(evenness_defect(pair) < 1e-8)

    def test_invalid_requests(self):
        config = warped_config(grid=64)
        with self.assertRaises(ValueError):
            solve_radial(config, 0.0, "neumann", 9)
        with self.assertRaises(ValueError):
            solve_radial(config, -1.0, "neumann", 1)
        with self.assertRaises(ConfigError):
            warped_config(grid=63)
        with self.assertRaises(ConfigError):
            warped_config(L=0.0)
        with self.assertRaises(ConfigError):
            warped_config("helix")

    def test_config_dict(self):
        config = WarpedProductConfig.from_dict(
            {"n": 3, "L": 2.0, "grid": 128, "warping": {"family": "exponential", "c": 0.5}}
        )
        self.assertEqual(config.h, 2.0 / 128)
        again = WarpedProductConfig.from_dict(config.to_dict())
        self.assertTrue(np.array_equal(again.f_nodes(), config.f_nodes()))

    def test_default_grid_follows_numerics(self):
        with numerics(radial_grid=256):
            self.assertEqual(warped_config(grid=None).grid, 256)


class TestCompactModes(unittest.TestCase):
    def test_second_neumann_mode(self):
        config = warped_config(L=1.0, grid=512)
        # nu_2 = 2 below mu_21 = pi^2
        mode = second_neumann_mode(config, sphere_spectrum(2, 1.0, 8))
        self.assertEqual(mode.kind, ModeKind.FIBER)
        self.assertAlmostEqual(mode.eigenvalue, 2.0, places=8)
        self.assertTrue(mode.flags["alternative_one"])
        self.assertEqual(mode.flags["fiber_multiplicity"], 3)
        # a small fiber pushes nu_2 = 50 above it
        mode = second_neumann_mode(config, sphere_spectrum(2, 0.2, 8))
        self.assertEqual(mode.kind, ModeKind.RADIAL)
        self.assertAlmostEqual(mode.eigenvalue, math.pi ** 2, delta=1e-3)
        self.assertFalse(mode.flags["near_degenerate"])

    def test_radial_mode_is_monotone(self):
        config = warped_config("affine", L=1.0, grid=512, c=1.0)
        pair = solve_radial(config, 0.0, "neumann", 2)[1]
        report = check_radial_monotonicity(pair, config)
        self.assertTrue(report.hypotheses_met)
        self.assertTrue(report.strictly_positive)
        self.assertFalse(report.interior_extremum)
        self.assertEqual(report.f_monotone, 1)

    def test_mixed_first_mode(self):
        config = warped_config("affine", L=1.0, grid=512, c=1.0)
        mode, report = mixed_first_mode(config)
        self.assertTrue(report.flux_strictly_decreasing)
        self.assertTrue(report.max_at_L)
        self.assertTrue(report.strictly_positive)
        self.assertEqual(mode.parts[0][0].bc, BoundaryCondition.MIXED)

    def test_degenerate_radius_of_trivial_product(self):
        config = warped_config(L=1.0, grid=512)
        rho = tune_degenerate_radius(config, "sphere")
        self.assertAlmostEqual(rho, math.sqrt(2.0) / math.pi, places=5)

    def test_degenerate_pair_mode(self):
        config = warped_config("affine", L=1.0, grid=512, c=0.3)
        rho = tune_degenerate_radius(config, "sphere")
        mode = degenerate_pair_mode(config, sphere_spectrum(2, rho, 8), 0.5)
        self.assertEqual(mode.kind, ModeKind.DEGENERATE_COMBINATION)
        self.assertTrue(mode.flags["gradient_norm"] < 1e-5)
        self.assertIn(mode.flags["classification"], ("max", "min", "saddle", "degenerate"))
        with self.assertRaises(DegeneracyError):
            degenerate_pair_mode(config, sphere_spectrum(2, 2.0 * rho, 8), 0.5)
        with self.assertRaises(ValueError):
            degenerate_pair_mode(config, sphere_spectrum(2, rho, 8), 1.5)

    def test_fiber_combination_mode(self):
        config = warped_config("affine", L=1.0, grid=512, c=1.0)
        fiber = sphere_spectrum(2, 1.0, 8)
        mode = fiber_combination_mode(config, fiber, [1.0, 0.0, 0.5])
        self.assertEqual([k for _, k, _ in mode.parts], [2, 3, 4])
        self.assertTrue(mode.flags["nodal_only"])
        with self.assertRaises(ValueError):
            fiber_combination_mode(config, fiber, [1.0, 0.0])

    def test_radial_mode_hot_spots_on_boundary(self):
        config = warped_config(L=1.0, grid=512)
        fiber = sphere_spectrum(2, 0.2, 8)
        mode = second_neumann_mode(config, fiber)
        extrema = locate_hotspots_compact(mode, fiber, ProductGrid(32, (8, 16)))
        self.assertTrue(extrema)
        self.assertTrue(all(e.label == ExtremumLabel.BOUNDARY for e in extrema))
        self.assertTrue(all(e.r == 1.0 for e in extrema if e.kind == "max"))

    def test_surface_cross_check(self):
        config = warped_config("affine", L=1.0, n=2, grid=128, c=0.5)
        fiber = circle_spectrum(1.0, 8)
        separated = separated_spectrum(config, fiber, 6)
        direct = direct_surface_spectrum(config, 1.0, 6, theta_nodes=512)
        self.assertTrue(np.allclose(separated, direct, rtol=1e-3, atol=1e-8))
        with self.assertRaises(ValueError):
            direct_surface_spectrum(warped_config(), 1.0, 6)


if __name__ == "__main__":
    unittest.main()
