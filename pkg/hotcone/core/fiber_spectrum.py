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

"""Closed-form spectra of the model fibers (M, h).

Indices follow the usual convention: k = 1 is the constant mode and
eigenvalues are repeated according to multiplicity. Ties are broken by
the lexicographic order of the mode label, so k-indexing is deterministic.
Eigenspaces are grouped into levels (0-based, level 0 is nu = 0).
"""
import itertools
import math
from dataclasses import dataclass

import numpy as np
import torch
from scipy import optimize, special

from .const import DTYPE, FiberKind
from .gamma import log_gamma


@dataclass(frozen=True)
class EigenLevel:
    value: float
    # 0-based index range [start, stop) covered by the level
    start: int
    stop: int

    @property
    def multiplicity(self):
        return self.stop - self.start


@dataclass
class FiberGrid:
    points: torch.Tensor
    weights: torch.Tensor
    # grid layout, row-major, and which axes wrap around
    shape: tuple
    periodic: tuple


class FiberSpectrum(object):
    """Base class of the closed-form fibers.

    Subclasses fill `eigenvalues`, `modes`, `volume` and implement the
    level/eigenfunction evaluators.
    """

    kind = None

    def __init__(self, dim, count):
        if count < 2:
            raise ValueError(f"a fiber spectrum needs count >= 2, got {count}")
        self.dim = dim
        self.count = count
        self.eigenvalues = None
        self.modes = None
        self.volume = None

    def _finalize(self, values, modes):
        self.eigenvalues = torch.as_tensor(values[: self.count], dtype=DTYPE)
        self.modes = tuple(modes[: self.count])
        self.levels = tuple(self._group_levels(self.eigenvalues))

    @staticmethod
    def _group_levels(values):
        levels = []
        start = 0
        values = values.tolist()
        for i in range(1, len(values) + 1):
            if i == len(values) or not _same_level(values[i], values[start]):
                levels.append(EigenLevel(values[start], start, i))
                start = i
        return levels

    # ---- level access, valid past `count` -------------------------------
    def level_value(self, level):
        raise NotImplementedError

    def level_multiplicity(self, level):
        raise NotImplementedError

    def level_kernels(self, n_levels, x, y):
        """Rows sum_{k in level} v_k(x) v_k(y) for levels 0..n_levels-1.
        Args:
            x, y: chart points of equal shape [N, chart_dim]
        Returns:
            tensor [n_levels, N]
        """
        raise NotImplementedError

    def level_kernel(self, level, x, y):
        return self.level_kernels(level + 1, x, y)[level]

    def sup_norm_bound(self, k):
        """Analytic bound on sup|v_k| (1-based k)."""
        raise NotImplementedError

    # ---- eigenfunctions ------------------------------------------------
    def eigenfunctions(self, points, indices=None):
        """Values v_k(x) for 0-based `indices`, shape [len(indices), N]."""
        raise NotImplementedError

    def eigenfunction(self, k, points):
        self.check_index(k)
        return self.eigenfunctions(_as_points(points, self.chart_dim), [k - 1])[0]

    def check_index(self, k):
        if not 1 <= k <= self.count:
            raise IndexError(f"eigen index {k} outside 1..{self.count}")

    def level_of(self, k):
        for i, level in enumerate(self.levels):
            if level.start < k <= level.stop:
                return i
        raise IndexError(f"eigen index {k} outside 1..{self.count}")

    # ---- geometry ------------------------------------------------------
    @property
    def chart_dim(self):
        return self.dim

    def grid(self, resolution):
        raise NotImplementedError

    def distance(self, x, y):
        raise NotImplementedError

    def local_chart(self, x0):
        """Coordinates u around x0 with h-distance ~ scale * |u|.
        Returns:
            (callable mapping [N, dim] tensors to chart points, scale)
        """
        raise NotImplementedError

    def canonical(self, points):
        return points

    def refine_max(self, func, x0, xatol=1e-10):
        """Local maximizer of a scalar fiber function started at chart point x0."""
        chart, _ = self.local_chart(torch.as_tensor(x0, dtype=DTYPE))

        def objective(u):
            pts = chart(torch.as_tensor(u, dtype=DTYPE).reshape(1, -1))
            return -float(func(pts)[0])

        res = optimize.minimize(
            objective,
            np.zeros(self.dim),
            method="Nelder-Mead",
            options={"xatol": xatol, "fatol": 1e-15, "maxiter": 4000},
        )
        best = chart(torch.as_tensor(res.x, dtype=DTYPE).reshape(1, -1))[0]
        return self.canonical(best.reshape(1, -1))[0], -res.fun

    def describe(self):
        return {"kind": self.kind.value, "dim": self.dim, "count": self.count}


def _same_level(a, b):
    return abs(a - b) <= 1e-12 * max(1.0, abs(a), abs(b))


def _as_points(points, chart_dim):
    pts = torch.as_tensor(points, dtype=DTYPE)
    if pts.dim() == 1:
        pts = pts.reshape(-1, chart_dim) if chart_dim > 1 else pts.reshape(-1, 1)
    return pts


# ---------------------------------------------------------------------------
# spheres
# ---------------------------------------------------------------------------


def _sphere_multiplicity(dim, level):
    total = math.comb(level + dim, dim)
    if level >= 2:
        total -= math.comb(level + dim - 2, dim)
    return total


def _normalized_gegenbauer(n_levels, lam, t):
    """C_l^lam(t) / C_l^lam(1) for l < n_levels, shape [n_levels, N]."""
    rows = [torch.ones_like(t)]
    if n_levels > 1:
        rows.append(t.clone())
    for n in range(2, n_levels):
        rows.append(
            (2.0 * (n + lam - 1.0) * t * rows[n - 1] - (n - 1.0) * rows[n - 2])
            / (n + 2.0 * lam - 1.0)
        )
    return torch.stack(rows[:n_levels])


def _real_spherical_harmonics(lm_list, theta, phi):
    """Orthonormal real spherical harmonics on the unit sphere S^2.

    m < 0 carries sin(|m| phi), m > 0 carries cos(m phi).
    """
    x = torch.cos(theta)
    s = torch.sin(theta)
    out = torch.empty((len(lm_list), theta.numel()), dtype=DTYPE)
    wanted = {}
    for row, (l, m) in enumerate(lm_list):
        wanted.setdefault(abs(m), {}).setdefault(l, []).append((row, m))
    pmm = torch.full_like(x, 1.0 / math.sqrt(4.0 * math.pi))
    for m in range(max(wanted) + 1):
        if m > 0:
            pmm = math.sqrt((2.0 * m + 1.0) / (2.0 * m)) * s * pmm
        if m not in wanted:
            continue
        need = wanted[m]
        l_top = max(need)
        prev2, prev = None, pmm
        for l in range(m, l_top + 1):
            if l == m:
                cur = pmm
            elif l == m + 1:
                cur = math.sqrt(2.0 * m + 3.0) * x * pmm
            else:
                a = math.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
                b = math.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
                cur = a * (x * prev - b * prev2)
            if l > m:
                prev2, prev = prev, cur
            for row, signed_m in need.get(l, ()):
                if signed_m == 0:
                    out[row] = cur
                elif signed_m > 0:
                    out[row] = math.sqrt(2.0) * cur * torch.cos(m * phi)
                else:
                    out[row] = math.sqrt(2.0) * cur * torch.sin(m * phi)
    return out


class SphereSpectrum(FiberSpectrum):
    kind = FiberKind.SPHERE

    def __init__(self, dim, rho, count):
        super().__init__(dim, count)
        if dim < 2:
            raise ValueError("sphere fibers need dim >= 2, use circle_spectrum for dim 1")
        if not rho > 0:
            raise ValueError(f"sphere radius must be positive, got {rho}")
        self.rho = float(rho)
        self.lam = 0.5 * (dim - 1)
        self.volume = (
            2.0 * math.pi ** (0.5 * (dim + 1)) / math.exp(log_gamma(0.5 * (dim + 1)))
        ) * self.rho ** dim
        values, modes = [], []
        level = 0
        while len(values) < count:
            mult = _sphere_multiplicity(dim, level)
            value = level * (level + dim - 1) / self.rho ** 2
            if dim == 2:
                labels = [(level, m) for m in range(-level, level + 1)]
            else:
                labels = [(level, j) for j in range(mult)]
            values.extend([value] * mult)
            modes.extend(labels)
            level += 1
        self._finalize(values, modes)

    def level_value(self, level):
        return level * (level + self.dim - 1) / self.rho ** 2

    def level_multiplicity(self, level):
        return _sphere_multiplicity(self.dim, level)

    def embed(self, points):
        """Chart (theta_1, ..., theta_{d-1}, phi) to unit vectors in R^{d+1}."""
        pts = _as_points(points, self.dim)
        d = self.dim
        coords = []
        sin_prod = torch.ones(pts.shape[0], dtype=DTYPE)
        for i in range(d - 1):
            coords.append(sin_prod * torch.cos(pts[:, i]))
            sin_prod = sin_prod * torch.sin(pts[:, i])
        coords.append(sin_prod * torch.cos(pts[:, d - 1]))
        coords.append(sin_prod * torch.sin(pts[:, d - 1]))
        return torch.stack(coords, dim=1)

    def from_embedding(self, xyz):
        xyz = xyz / torch.linalg.norm(xyz, dim=1, keepdim=True)
        d = self.dim
        angles = []
        for i in range(d - 1):
            tail = torch.linalg.norm(xyz[:, i + 1 :], dim=1)
            angles.append(torch.atan2(tail, xyz[:, i]))
        angles.append(torch.remainder(torch.atan2(xyz[:, d], xyz[:, d - 1]), 2 * math.pi))
        return torch.stack(angles, dim=1)

    def cos_angle(self, x, y):
        dot = torch.sum(self.embed(x) * self.embed(y), dim=1)
        return torch.clamp(dot, -1.0, 1.0)

    def distance(self, x, y):
        return self.rho * torch.arccos(self.cos_angle(x, y))

    def level_kernels(self, n_levels, x, y):
        t = self.cos_angle(x, y)
        rows = _normalized_gegenbauer(n_levels, self.lam, t)
        scale = torch.as_tensor(
            [self.level_multiplicity(l) / self.volume for l in range(n_levels)],
            dtype=DTYPE,
        )
        return scale.unsqueeze(1) * rows

    def sup_norm_bound(self, k):
        level = self.level_of(k) if k <= self.count else _sphere_level_of_index(self.dim, k)
        return math.sqrt(self.level_multiplicity(level) / self.volume)

    def eigenfunctions(self, points, indices=None):
        pts = _as_points(points, self.dim)
        indices = range(self.count) if indices is None else indices
        labels = [self.modes[i] for i in indices]
        if self.dim == 2:
            return _real_spherical_harmonics(labels, pts[:, 0], pts[:, 1]) / self.rho
        # only the zonal member of each eigenspace is evaluated in dim > 2
        out = torch.empty((len(labels), pts.shape[0]), dtype=DTYPE)
        for row, (level, j) in enumerate(labels):
            if j != 0:
                raise NotImplementedError(
                    f"only zonal harmonics are evaluated on S^{self.dim}, "
                    f"mode {(level, j)} is not zonal"
                )
            rows = _normalized_gegenbauer(level + 1, self.lam, torch.cos(pts[:, 0]))
            out[row] = math.sqrt(self.level_multiplicity(level) / self.volume) * rows[level]
        return out

    def grid(self, resolution):
        n_theta, n_phi = resolution
        if self.dim == 2:
            x, w = np.polynomial.legendre.leggauss(n_theta)
            order = np.argsort(-x)
            theta = torch.as_tensor(np.arccos(x[order]), dtype=DTYPE)
            w = torch.as_tensor(w[order], dtype=DTYPE)
            phi = torch.arange(n_phi, dtype=DTYPE) * (2.0 * math.pi / n_phi)
            tt, pp = torch.meshgrid(theta, phi, indexing="ij")
            weights = (w.unsqueeze(1) * (2.0 * math.pi / n_phi)).expand(n_theta, n_phi)
            points = torch.stack([tt.reshape(-1), pp.reshape(-1)], dim=1)
            return FiberGrid(
                points,
                weights.reshape(-1) * self.rho ** 2,
                (n_theta, n_phi),
                (False, True),
            )
        # zonal integrands only: Gauss-Gegenbauer in cos(theta_1)
        x, w = special.roots_gegenbauer(n_theta, self.lam)
        order = np.argsort(-x)
        points = torch.zeros((n_theta, self.dim), dtype=DTYPE)
        points[:, 0] = torch.as_tensor(np.arccos(x[order]), dtype=DTYPE)
        lower = 2.0 * math.pi ** (0.5 * self.dim) / math.exp(log_gamma(0.5 * self.dim))
        weights = torch.as_tensor(w[order], dtype=DTYPE) * lower * self.rho ** self.dim
        return FiberGrid(points, weights, (n_theta,), (False,))

    def local_chart(self, x0):
        base = self.embed(x0.reshape(1, -1))[0]
        # orthonormal tangent frame at base
        frame = torch.linalg.svd(base.reshape(1, -1), full_matrices=True)[2][1:]

        def chart(u):
            norm = torch.linalg.norm(u, dim=1, keepdim=True)
            direction = u @ frame
            safe = torch.where(norm > 0, norm, torch.ones_like(norm))
            xyz = torch.cos(norm) * base + torch.sin(norm) * direction / safe
            return self.from_embedding(xyz)

        return chart, self.rho

    def canonical(self, points):
        return self.from_embedding(self.embed(points))

    def describe(self):
        info = super().describe()
        info["rho"] = self.rho
        return info


def _sphere_level_of_index(dim, k):
    level, total = 0, 0
    while True:
        total += _sphere_multiplicity(dim, level)
        if k <= total:
            return level
        level += 1


# ---------------------------------------------------------------------------
# circles and flat tori
# ---------------------------------------------------------------------------


class CircleSpectrum(FiberSpectrum):
    kind = FiberKind.CIRCLE

    def __init__(self, rho, count):
        super().__init__(1, count)
        if not rho > 0:
            raise ValueError(f"circle radius must be positive, got {rho}")
        self.rho = float(rho)
        self.volume = 2.0 * math.pi * self.rho
        values, modes = [0.0], [(0, 0)]
        m = 1
        while len(values) < count:
            values.extend([m * m / self.rho ** 2] * 2)
            modes.extend([(m, 0), (m, 1)])
            m += 1
        self._finalize(values, modes)

    def level_value(self, level):
        return level * level / self.rho ** 2

    def level_multiplicity(self, level):
        return 1 if level == 0 else 2

    def level_kernels(self, n_levels, x, y):
        delta = _as_points(x, 1)[:, 0] - _as_points(y, 1)[:, 0]
        m = torch.arange(n_levels, dtype=DTYPE).unsqueeze(1)
        rows = torch.cos(m * delta.unsqueeze(0)) / (math.pi * self.rho)
        rows[0] = 1.0 / self.volume
        return rows

    def sup_norm_bound(self, k):
        return math.sqrt((1.0 if k == 1 else 2.0) / self.volume)

    def eigenfunctions(self, points, indices=None):
        theta = _as_points(points, 1)[:, 0]
        indices = range(self.count) if indices is None else indices
        out = torch.empty((len(indices), theta.numel()), dtype=DTYPE)
        for row, i in enumerate(indices):
            m, part = self.modes[i]
            if m == 0:
                out[row] = 1.0 / math.sqrt(self.volume)
            elif part == 0:
                out[row] = torch.cos(m * theta) / math.sqrt(math.pi * self.rho)
            else:
                out[row] = torch.sin(m * theta) / math.sqrt(math.pi * self.rho)
        return out

    def grid(self, resolution):
        n = resolution[-1]
        theta = torch.arange(n, dtype=DTYPE) * (2.0 * math.pi / n)
        weights = torch.full((n,), 2.0 * math.pi * self.rho / n, dtype=DTYPE)
        return FiberGrid(theta.reshape(-1, 1), weights, (n,), (True,))

    def distance(self, x, y):
        delta = torch.remainder(_as_points(x, 1)[:, 0] - _as_points(y, 1)[:, 0], 2 * math.pi)
        return self.rho * torch.minimum(delta, 2 * math.pi - delta)

    def local_chart(self, x0):
        def chart(u):
            return torch.remainder(x0.reshape(1, 1) + u, 2 * math.pi)

        return chart, self.rho

    def describe(self):
        info = super().describe()
        info["rho"] = self.rho
        return info


class TorusSpectrum(FiberSpectrum):
    kind = FiberKind.TORUS

    def __init__(self, side_lengths, count):
        side_lengths = [float(a) for a in side_lengths]
        if len(side_lengths) == 0:
            raise ValueError("a torus needs at least one side length")
        if any(not a > 0 for a in side_lengths):
            raise ValueError(f"torus side lengths must be positive, got {side_lengths}")
        super().__init__(len(side_lengths), count)
        self.sides = tuple(side_lengths)
        self.volume = float(np.prod(side_lengths))
        self._level_table = []
        self._mode_table = []
        self._radius = 1.0
        while len(self._mode_table) < count:
            self._enumerate()
        values = [4.0 * math.pi ** 2 * q for q, _, _ in self._mode_table]
        modes = [(m, part) for _, m, part in self._mode_table]
        self._finalize(values, modes)

    def _enumerate(self):
        """All realified modes with sum (m_i / a_i)^2 <= radius^2, sorted."""
        self._radius *= 2.0
        bounds = [int(math.ceil(self._radius * a)) for a in self.sides]
        entries = []
        for m in itertools.product(*[range(-b, b + 1) for b in bounds]):
            q = sum((mi / a) ** 2 for mi, a in zip(m, self.sides))
            if q > self._radius ** 2:
                continue
            nonzero = [mi for mi in m if mi != 0]
            if not nonzero:
                entries.append((q, m, 0))
            elif nonzero[0] > 0:
                entries.append((q, m, 0))
                entries.append((q, m, 1))
        entries.sort(key=lambda e: (round(e[0], 12), e[1], e[2]))
        self._mode_table = entries
        levels = []
        for q, _, _ in entries:
            if levels and _same_level(q, levels[-1][0]):
                levels[-1][1] += 1
            else:
                levels.append([q, 1])
        self._level_table = levels

    def _ensure_levels(self, n_levels):
        while len(self._level_table) < n_levels:
            self._enumerate()

    def level_value(self, level):
        self._ensure_levels(level + 1)
        return 4.0 * math.pi ** 2 * self._level_table[level][0]

    def level_multiplicity(self, level):
        self._ensure_levels(level + 1)
        return self._level_table[level][1]

    def _phase(self, m, points):
        coeff = torch.as_tensor([mi / a for mi, a in zip(m, self.sides)], dtype=DTYPE)
        return 2.0 * math.pi * (points @ coeff)

    def level_kernels(self, n_levels, x, y):
        self._ensure_levels(n_levels)
        delta = _as_points(x, self.dim) - _as_points(y, self.dim)
        rows = torch.zeros((n_levels, delta.shape[0]), dtype=DTYPE)
        level, seen = 0, 0
        for q, m, part in self._mode_table:
            if level >= n_levels:
                break
            if part == 0:
                if all(mi == 0 for mi in m):
                    rows[level] += 1.0 / self.volume
                else:
                    rows[level] += 2.0 * torch.cos(self._phase(m, delta)) / self.volume
            seen += 1
            if seen == self._level_table[level][1]:
                level, seen = level + 1, 0
        return rows

    def sup_norm_bound(self, k):
        return math.sqrt((1.0 if k == 1 else 2.0) / self.volume)

    def eigenfunctions(self, points, indices=None):
        pts = _as_points(points, self.dim)
        indices = range(self.count) if indices is None else indices
        out = torch.empty((len(indices), pts.shape[0]), dtype=DTYPE)
        for row, i in enumerate(indices):
            m, part = self.modes[i]
            if all(mi == 0 for mi in m):
                out[row] = 1.0 / math.sqrt(self.volume)
            elif part == 0:
                out[row] = math.sqrt(2.0 / self.volume) * torch.cos(self._phase(m, pts))
            else:
                out[row] = math.sqrt(2.0 / self.volume) * torch.sin(self._phase(m, pts))
        return out

    def grid(self, resolution):
        n = resolution[-1] if self.dim == 1 else resolution[0]
        axes = [torch.arange(n, dtype=DTYPE) * (a / n) for a in self.sides]
        mesh = torch.meshgrid(*axes, indexing="ij")
        points = torch.stack([g.reshape(-1) for g in mesh], dim=1)
        weights = torch.full((points.shape[0],), self.volume / n ** self.dim, dtype=DTYPE)
        return FiberGrid(points, weights, (n,) * self.dim, (True,) * self.dim)

    def _wrap(self, delta):
        sides = torch.as_tensor(self.sides, dtype=DTYPE)
        delta = torch.remainder(delta, sides)
        return torch.minimum(delta, sides - delta)

    def distance(self, x, y):
        delta = _as_points(x, self.dim) - _as_points(y, self.dim)
        return torch.linalg.norm(self._wrap(delta), dim=1)

    def local_chart(self, x0):
        sides = torch.as_tensor(self.sides, dtype=DTYPE)

        def chart(u):
            return torch.remainder(x0.reshape(1, -1) + u, sides)

        return chart, 1.0

    def describe(self):
        info = super().describe()
        info["side_lengths"] = list(self.sides)
        return info


# ---------------------------------------------------------------------------
# module operations
# ---------------------------------------------------------------------------


def sphere_spectrum(dim, rho, count):
    return SphereSpectrum(dim, rho, count)


def circle_spectrum(rho, count):
    return CircleSpectrum(rho, count)


def torus_spectrum(side_lengths, count):
    return TorusSpectrum(side_lengths, count)


def build_fiber(desc, n=None):
    """Fiber from its config description {kind, dim, rho | side_lengths, count}."""
    kind = FiberKind(desc["kind"])
    count = int(desc.get("count", 16))
    if kind == FiberKind.SPHERE:
        dim = int(desc.get("dim", (n - 1) if n is not None else 2))
        return sphere_spectrum(dim, float(desc.get("rho", 1.0)), count)
    if kind == FiberKind.CIRCLE:
        return circle_spectrum(float(desc.get("rho", 1.0)), count)
    return torus_spectrum(desc["side_lengths"], count)


def eigen_levels(spec):
    return spec.levels


def gamma_of(spec, n, k):
    """gamma_k = sqrt((n-2)^2/4 + nu_k), k is 1-based."""
    if n != spec.dim + 1:
        raise ValueError(f"cone dimension n={n} does not match fiber dim {spec.dim}")
    spec.check_index(k)
    return math.sqrt(0.25 * (n - 2) ** 2 + float(spec.eigenvalues[k - 1]))


def gammas(spec, n):
    return torch.sqrt(0.25 * (n - 2) ** 2 + spec.eigenvalues)


def sup_norm_estimate(spec, k, resolution=(128, 256)):
    """Measured sup|v_k| on a dense grid, polished by local refinement."""
    spec.check_index(k)
    if spec.kind == FiberKind.SPHERE and spec.dim > 2:
        # zonal harmonics peak at the pole
        level = spec.level_of(k)
        return math.sqrt(spec.level_multiplicity(level) / spec.volume)
    grid = spec.grid(resolution)
    values = spec.eigenfunctions(grid.points, [k - 1])[0]
    idx = int(torch.argmax(torch.abs(values)))
    sign = 1.0 if float(values[idx]) >= 0 else -1.0
    _, best = spec.refine_max(
        lambda pts: sign * spec.eigenfunctions(pts, [k - 1])[0], grid.points[idx]
    )
    return max(abs(float(values[idx])), best)


def calibrate_weyl_constant(spec):
    """Smallest C with k^{2/d} / C <= nu_k <= C k^{2/d} for k >= 2."""
    k = torch.arange(2, spec.count + 1, dtype=DTYPE)
    nu = spec.eigenvalues[1:]
    weyl = k ** (2.0 / spec.dim)
    return float(torch.max(torch.maximum(nu / weyl, weyl / nu)))


def calibrate_sup_constant(spec, max_index=64):
    """Smallest C with sup|v_k| <= C k^{(d-1)/(2d)} over measured indices."""
    top = min(spec.count, max_index)
    exponent = (spec.dim - 1) / (2.0 * spec.dim)
    return max(
        sup_norm_estimate(spec, k, resolution=(64, 128)) / k ** exponent
        for k in range(1, top + 1)
    )


def orthonormality_defect(spec, indices=None, resolution=(64, 128)):
    """max |<v_i, v_j> - delta_ij| on the fiber quadrature grid."""
    grid = spec.grid(resolution)
    indices = list(range(spec.count)) if indices is None else indices
    values = spec.eigenfunctions(grid.points, indices)
    gram = (values * grid.weights) @ values.T
    return float(torch.max(torch.abs(gram - torch.eye(len(indices), dtype=DTYPE))))


def local_extrema_mask(values, periodic, greater=True):
    """Non-strict discrete local maxima (or minima) of an N-d grid array.
    Args:
        values: array shaped like the grid
        periodic: per-axis flags, wrapped axes compare across the seam
    """
    values = np.asarray(values)
    mask = np.ones(values.shape, dtype=bool)
    for axis, wrap in enumerate(periodic):
        if values.shape[axis] == 1:
            continue
        for shift in (1, -1):
            neighbor = np.roll(values, shift, axis=axis)
            cmp = values >= neighbor if greater else values <= neighbor
            if not wrap:
                edge = [slice(None)] * values.ndim
                edge[axis] = 0 if shift == 1 else -1
                cmp[tuple(edge)] = True
            mask &= cmp
    return mask


def grid_maximizers(spec, func, resolution=None, rel_band=1e-6, merge_distance=1e-6):
    """Maximizers of a fiber function: grid local maxima refined in local charts.
    Args:
        func: callable mapping chart points [N, d] to values [N]
        rel_band: keep refined maxima within this relative distance of the best
    Returns:
        (max value, tensor of maximizers [M, d])
    """
    grid = spec.grid(resolution or (64, 128))
    values = func(grid.points)
    mask = local_extrema_mask(values.numpy().reshape(grid.shape), grid.periodic)
    candidates = np.flatnonzero(mask.reshape(-1))
    refined = [spec.refine_max(func, grid.points[int(i)]) for i in candidates]
    best = max(value for _, value in refined)
    band = rel_band * max(abs(best), 1e-300)
    points = []
    for point, value in sorted(refined, key=lambda item: -item[1]):
        if value < best - band:
            continue
        if points:
            gap = spec.distance(torch.stack(points), point.reshape(1, -1).expand(len(points), -1))
            if float(torch.min(gap)) <= merge_distance:
                continue
        points.append(point)
    return best, torch.stack(points)
