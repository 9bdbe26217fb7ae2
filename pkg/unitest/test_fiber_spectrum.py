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
import torch

from common import points
from hotcone.core import (
    build_fiber,
    calibrate_sup_constant,
    calibrate_weyl_constant,
    circle_spectrum,
    eigen_levels,
    gamma_of,
    gammas,
    grid_maximizers,
    orthonormality_defect,
    sphere_spectrum,
    sup_norm_estimate,
    torus_spectrum,
)
from hotcone.core.fiber_spectrum import local_extrema_mask


class TestSphereSpectrum(unittest.TestCase):
    def setUp(self):
        self.spec = sphere_spectrum(2, 1.0, 16)

    def test_levels(self):
        expected = [0.0] + [2.0] * 3 + [6.0] * 5 + [12.0] * 7
        self.assertEqual(self.spec.eigenvalues.tolist(), expected)
        self.assertEqual([lv.multiplicity for lv in self.spec.levels], [1, 3, 5, 7])
        self.assertEqual(
            [(lv.start, lv.stop) for lv in eigen_levels(self.spec)], [(0, 1), (1, 4), (4, 9), (9, 16)]
        )
        self.assertEqual(self.spec.level_of(1), 0)
        self.assertEqual(self.spec.level_of(4), 1)
        self.assertEqual(self.spec.level_of(5), 2)
        # past `count`
        self.assertEqual(self.spec.level_multiplicity(6), 13)
        self.assertEqual(self.spec.level_value(6), 42.0)

    def test_radius_scaling(self):
        spec = sphere_spectrum(2, 2.0, 4)
        self.assertEqual(spec.eigenvalues.tolist(), [0.0, 0.5, 0.5, 0.5])
        self.assertAlmostEqual(spec.volume, 16.0 * math.pi, places=12)

    def test_higher_dimensional_sphere(self):
        spec = sphere_spectrum(3, 1.0, 5)
        self.assertEqual(spec.eigenvalues.tolist(), [0.0, 3.0, 3.0, 3.0, 3.0])
        self.assertAlmostEqual(spec.volume, 2.0 * math.pi ** 2, places=12)
        # zonal member of level 1 is evaluated, the rest are not
        value = spec.eigenfunction(2, points([0.0, 0.0, 0.0]))
        self.assertAlmostEqual(float(value[0]), math.sqrt(4.0 / spec.volume), places=12)
        with self.assertRaises(NotImplementedError):
            spec.eigenfunction(3, points([0.0, 0.0, 0.0]))

    def test_orthonormality(self):
        self.assertTrue(orthonormality_defect(self.spec) < 1e-12)

    def test_level_kernel_matches_eigenfunctions(self):
        x = points([0.3, 1.1], [2.0, 4.0], [1.2, 0.1])
        y = points([1.7, 5.9], [0.4, 2.5], [1.2, 0.1])
        kernels = self.spec.level_kernels(4, x, y)
        vx = self.spec.eigenfunctions(x)
        vy = self.spec.eigenfunctions(y)
        for i, level in enumerate(self.spec.levels):
            direct = torch.sum(vx[level.start : level.stop] * vy[level.start : level.stop], dim=0)
            self.assertTrue(torch.allclose(kernels[i], direct, atol=1e-12), f"level {i}")

    def test_sup_norm(self):
        for k in (2, 3, 7, 12):
            measured = sup_norm_estimate(self.spec, k, resolution=(32, 64))
            self.assertTrue(measured <= self.spec.sup_norm_bound(k) + 1e-9, f"k={k}")
        # zonal harmonics reach the bound at the pole
        bound = self.spec.sup_norm_bound(3)
        self.assertAlmostEqual(sup_norm_estimate(self.spec, 3, resolution=(32, 64)), bound, places=7)

    def test_gamma(self):
        self.assertEqual(gamma_of(self.spec, 3, 1), 0.5)
        self.assertAlmostEqual(gamma_of(self.spec, 3, 2), 1.5, places=14)
        self.assertAlmostEqual(gamma_of(self.spec, 3, 5), 2.5, places=14)
        all_gammas = gammas(self.spec, 3)
        self.assertEqual(all_gammas.shape, (16,))
        self.assertTrue(bool(torch.all(all_gammas[1:] >= all_gammas[:-1])))
        with self.assertRaises(ValueError):
            gamma_of(self.spec, 4, 1)

    def test_index_errors(self):
        with self.assertRaises(IndexError):
            self.spec.check_index(0)
        with self.assertRaises(IndexError):
            self.spec.eigenfunction(17, points([0.1, 0.2]))
        with self.assertRaises(ValueError):
            sphere_spectrum(2, 1.0, 1)
        with self.assertRaises(ValueError):
            sphere_spectrum(2, -1.0, 4)

    def test_grid_maximizers(self):
        best, maximizers = grid_maximizers(
            self.spec, lambda pts: self.spec.eigenfunctions(pts, [2])[0], resolution=(16, 32)
        )
        self.assertAlmostEqual(best, math.sqrt(3.0 / (4.0 * math.pi)), places=9)
        self.assertEqual(maximizers.shape[0], 1)
        north = points([0.0, 0.0])
        self.assertTrue(float(self.spec.distance(maximizers, north)[0]) < 1e-6)

    def test_weyl_constant(self):
        self.assertTrue(calibrate_weyl_constant(self.spec) >= 1.0)


class TestCircleAndTorus(unittest.TestCase):
    def test_circle(self):
        spec = circle_spectrum(2.0, 5)
        self.assertEqual(spec.eigenvalues.tolist(), [0.0, 0.25, 0.25, 1.0, 1.0])
        self.assertTrue(orthonormality_defect(spec) < 1e-12)
        d = spec.distance(points([0.1]), points([2.0 * math.pi - 0.1]))
        self.assertAlmostEqual(float(d[0]), 0.4, places=12)
        kernels = spec.level_kernels(3, points([0.3]), points([1.4]))
        self.assertAlmostEqual(float(kernels[0][0]), 1.0 / spec.volume, places=14)
        self.assertAlmostEqual(float(kernels[2][0]), math.cos(2.2) / (2.0 * math.pi), places=14)

    def test_circle_sup_constant(self):
        spec = circle_spectrum(1.0, 9)
        self.assertAlmostEqual(calibrate_sup_constant(spec), 1.0 / math.sqrt(math.pi), places=6)

    def test_torus(self):
        spec = torus_spectrum([1.0, 2.0], 5)
        pi2 = math.pi ** 2
        expected = [0.0, pi2, pi2, 4.0 * pi2, 4.0 * pi2]
        for got, want in zip(spec.eigenvalues.tolist(), expected):
            self.assertAlmostEqual(got, want, places=10)
        self.assertEqual([lv.multiplicity for lv in spec.levels], [1, 2, 2])
        # the level continues past `count`
        self.assertEqual(spec.level_multiplicity(2), 4)
        self.assertTrue(orthonormality_defect(spec) < 1e-12)
        d = spec.distance(points([0.05, 0.1]), points([0.95, 1.9]))
        self.assertAlmostEqual(float(d[0]), math.hypot(0.1, 0.2), places=12)

    def test_torus_level_kernels(self):
        spec = torus_spectrum([1.0, 2.0], 5)
        x, y = points([0.2, 0.7]), points([0.6, 1.3])
        kernels = spec.level_kernels(2, x, y)
        vx, vy = spec.eigenfunctions(x), spec.eigenfunctions(y)
        self.assertAlmostEqual(float(kernels[1][0]), float(torch.sum(vx[1:3] * vy[1:3])), places=12)

    def test_build_fiber(self):
        spec = build_fiber({"kind": "sphere", "rho": 2.0, "count": 4}, n=3)
        self.assertEqual(spec.dim, 2)
        self.assertEqual(spec.describe(), {"kind": "sphere", "dim": 2, "count": 4, "rho": 2.0})
        torus = build_fiber({"kind": "torus", "side_lengths": [1.0, 1.0], "count": 5})
        self.assertEqual(torus.dim, 2)
        self.assertEqual(build_fiber({"kind": "circle", "count": 3}).dim, 1)


class TestExtremaMask(unittest.TestCase):
    def test_periodic_axis(self):
        values = np.array([3.0, 1.0, 2.0, 1.0, 0.5])
        self.assertEqual(local_extrema_mask(values, (True,)).tolist(), [True, False, True, False, False])
        # without wrapping the last entry compares only to its left neighbor
        minima = local_extrema_mask(values, (False,), greater=False)
        self.assertEqual(minima.tolist(), [False, True, False, False, True])

    def test_plateau_is_kept(self):
        values = np.array([[1.0, 1.0, 1.0], [0.0, 0.0, 0.0]])
        mask = local_extrema_mask(values, (False, True))
        self.assertTrue(mask[0].all())
        self.assertFalse(mask[1].any())


if __name__ == "__main__":
    unittest.main()
