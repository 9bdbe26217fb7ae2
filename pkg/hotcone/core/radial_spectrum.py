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

"""Separated radial eigenproblem of a warped product [0, L] x_f M.

For a fiber eigenvalue nu the radial factor solves

    (f^{n-1} w')' - nu f^{n-3} w = -mu f^{n-1} w

with Neumann (w'(0) = w'(L) = 0) or mixed (w(0) = 0, w'(L) = 0) ends.
The operator is discretized in flux form on a uniform vertex grid. Half
cells at the ends give the ghost-point Neumann closure, and the lumped
trapezoid mass keeps the discrete problem symmetric. The generalized
problem is reduced to a symmetric tridiagonal one and solved with
`scipy.linalg.eigh_tridiagonal` (bisection and inverse iteration).
"""
import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
import torch
from scipy import optimize
from scipy.interpolate import CubicSpline
from scipy.linalg import eigh_tridiagonal
from scipy.sparse.linalg import eigsh

from hotcone.manager import _runtime_config
from hotcone.utils import logger

from .const import DTYPE, BoundaryCondition, ExtremumLabel, FiberKind, ModeKind
from .errors import ConfigError, DegeneracyError
from .fiber_spectrum import circle_spectrum, local_extrema_mask, sphere_spectrum
from .warping import Warping


@dataclass
class WarpedProductConfig:
    n: int
    L: float
    warping: Warping
    # number of grid intervals, None means the numerics default
    grid: int = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ConfigError(f"n must be an integer >= 2, got {self.n}", "n")
        if not self.L > 0:
            raise ConfigError(f"L must be positive, got {self.L}", "L")
        if self.grid is None:
            self.grid = _runtime_config.radial_grid
        if self.grid < 8 or self.grid % 2:
            raise ConfigError(f"grid must be an even integer >= 8, got {self.grid}", "grid")

    @property
    def h(self):
        return self.L / self.grid

    def nodes(self):
        return np.linspace(0.0, self.L, self.grid + 1)

    def f_nodes(self):
        f = self.warping(self.nodes())
        if np.any(f <= 0):
            raise ValueError("warping function is not positive on the solver grid")
        return f

    def with_grid(self, grid):
        return replace(self, grid=grid)

    def to_dict(self):
        return {"n": self.n, "L": self.L, "grid": self.grid, "warping": self.warping.to_dict()}

    @classmethod
    def from_dict(cls, desc):
        L = float(desc["L"])
        return cls(
            n=int(desc["n"]),
            L=L,
            warping=Warping.from_dict(desc.get("warping", {"family": "constant"}), L),
            grid=desc.get("grid"),
        )


@dataclass
class RadialEigenpair:
    mu: float
    nu: float
    j: int
    bc: BoundaryCondition
    r: np.ndarray
    w: np.ndarray
    w_prime: np.ndarray
    zero_count: int

    @property
    def h(self):
        return self.r[1] - self.r[0]

    def half_derivative(self):
        """Second-order derivative samples at the cell midpoints."""
        return np.diff(self.w) / self.h

    def spline(self):
        return CubicSpline(self.r, self.w)


@dataclass
class CompactMode:
    kind: ModeKind
    # (radial pair, 1-based fiber index, coefficient)
    parts: tuple
    eigenvalue: float
    flags: dict = field(default_factory=dict)

    def evaluate(self, fiber, r_index, points):
        """u(r_i, x) on the product of solver nodes r_index and fiber points."""
        out = None
        for pair, k, coeff in self.parts:
            v = fiber.eigenfunctions(points, [k - 1])[0].numpy()
            term = coeff * np.outer(pair.w[r_index], v)
            out = term if out is None else out + term
        return out

    def summary(self):
        return {
            "kind": self.kind.value,
            "eigenvalue": self.eigenvalue,
            "parts": [
                {"j": pair.j, "nu": pair.nu, "mu": pair.mu, "bc": pair.bc.value, "k": k, "coefficient": c}
                for pair, k, c in self.parts
            ],
            "flags": self.flags,
        }


@dataclass
class MonotonicityReport:
    min_interior_derivative: float
    max_interior_derivative: float
    a_sign_pattern: str
    a_sign_interval: tuple
    interior_extremum: bool
    extremum_locations: list
    strictly_positive: bool
    f_monotone: int
    hypotheses_met: bool
    note: str = ""
    flux_strictly_decreasing: bool = None
    max_at_L: bool = None

    def to_dict(self):
        out = dict(self.__dict__)
        out["a_sign_interval"] = list(self.a_sign_interval)
        return out


@dataclass
class Extremum:
    kind: str
    r: float
    x: list
    value: float
    label: ExtremumLabel


@dataclass
class ProductGrid:
    r_stride: int = None
    fiber_resolution: tuple = None

    def resolve(self):
        return (
            self.r_stride or _runtime_config["product_r_stride"],
            tuple(self.fiber_resolution or _runtime_config.fiber_grid),
        )


# ---------------------------------------------------------------------------
# discretization
# ---------------------------------------------------------------------------


def _trapezoid_weights(grid, h):
    c = np.full(grid + 1, h)
    c[0] = c[-1] = 0.5 * h
    return c


def _assemble(config, nu):
    """Tridiagonal stiffness (diag, off) and lumped mass on all nodes."""
    n, h = config.n, config.h
    r = config.nodes()
    f = config.f_nodes()
    f_half = config.warping(0.5 * (r[1:] + r[:-1]))
    if np.any(f_half <= 0):
        raise ValueError("warping function is not positive on the solver grid")
    p = f_half ** (n - 1) / h
    c = _trapezoid_weights(config.grid, h)
    diag = np.zeros(config.grid + 1)
    diag[:-1] += p
    diag[1:] += p
    diag += nu * c * f ** (n - 3)
    off = -p
    mass = c * f ** (n - 1)
    return diag, off, mass


def _count_sign_changes(values, floor):
    signs = np.sign(np.where(np.abs(values) <= floor, 0.0, values))
    signs = signs[signs != 0]
    return int(np.sum(signs[1:] != signs[:-1]))


def _solve_discrete(config, nu, bc, j_max):
    diag, off, mass = _assemble(config, nu)
    if bc == BoundaryCondition.MIXED:
        # Dirichlet node at r = 0 is eliminated
        diag, off, mass = diag[1:], off[1:], mass[1:]
    scale = 1.0 / np.sqrt(mass)
    d = diag * scale * scale
    e = off * scale[:-1] * scale[1:]
    mu, vecs = eigh_tridiagonal(d, e, select="i", select_range=(0, j_max - 1))
    w = vecs * scale[:, None]
    if bc == BoundaryCondition.MIXED:
        w = np.vstack([np.zeros((1, j_max)), w])
    return mu, w


def solve_radial(config, nu, bc, j_max, richardson=False):
    """First j_max radial eigenpairs for fiber eigenvalue nu.
    Args:
        config: WarpedProductConfig
        nu: fiber eigenvalue (>= 0)
        bc: BoundaryCondition or its string value
        j_max: number of eigenpairs
        richardson: replace eigenvalues by their Richardson extrapolation
            from grids h and 2h.
    Returns:
        list of RadialEigenpair sorted by mu
    """
    bc = BoundaryCondition(bc)
    if nu < 0:
        raise ValueError(f"fiber eigenvalue must be >= 0, got {nu}")
    if j_max < 1:
        raise ValueError("j_max must be >= 1")
    if j_max > config.grid // 8:
        raise ValueError(f"j_max={j_max} exceeds grid capacity {config.grid // 8}")
    mu, w = _solve_discrete(config, nu, bc, j_max)
    if richardson:
        coarse, _ = _solve_discrete(config.with_grid(config.grid // 2), nu, bc, j_max)
        mu = (4.0 * mu - coarse) / 3.0
    r = config.nodes()
    h = config.h
    pairs = []
    for j in range(j_max):
        wj = w[:, j]
        if wj[-1] < 0:
            wj = -wj
        floor = 1e-10 * np.max(np.abs(wj))
        pairs.append(
            RadialEigenpair(
                mu=0.0 if abs(mu[j]) < 1e-13 else float(mu[j]),
                nu=float(nu),
                j=j + 1,
                bc=bc,
                r=r,
                w=wj,
                w_prime=np.gradient(wj, h, edge_order=2),
                zero_count=_count_sign_changes(wj[1:-1], floor),
            )
        )
    logger.debug(
        f"radial solve nu={nu} bc={bc.value} grid={config.grid}: "
        f"mu={[p.mu for p in pairs]}"
    )
    return pairs


def richardson_eigenvalues(config, nu, bc, j_max):
    """(refined, fine, coarse) eigenvalues from grids h and 2h."""
    bc = BoundaryCondition(bc)
    fine, _ = _solve_discrete(config, nu, bc, j_max)
    coarse, _ = _solve_discrete(config.with_grid(config.grid // 2), nu, bc, j_max)
    return (4.0 * fine - coarse) / 3.0, fine, coarse


def convergence_ratio(config, nu, bc, j, exact):
    """Ratio of successive eigenvalue errors under grid doubling."""
    bc = BoundaryCondition(bc)
    errors = []
    for grid in (config.grid // 4, config.grid // 2, config.grid):
        mu, _ = _solve_discrete(config.with_grid(grid), nu, bc, j)
        errors.append(abs(mu[j - 1] - exact))
    return errors[1] / errors[2]


def rayleigh_quotient(config, nu, u, bc=BoundaryCondition.NEUMANN):
    """Discrete q_nu(u) / ||u||^2 on the solver grid.
    Args:
        u: samples on config.nodes() or a callable of r
    """
    bc = BoundaryCondition(bc)
    r = config.nodes()
    u = np.asarray(u(r) if callable(u) else u, dtype=np.float64)
    if u.shape != r.shape:
        raise ValueError(f"expected {r.size} samples, got {u.size}")
    scale = np.max(np.abs(u))
    if scale == 0.0:
        raise ValueError("Rayleigh quotient of the zero function")
    if bc == BoundaryCondition.MIXED and abs(u[0]) > 1e-12 * scale:
        raise ValueError("mixed problem test functions must vanish at r = 0")
    diag, off, mass = _assemble(config, nu)
    energy = np.dot(diag * u, u) + 2.0 * np.dot(off * u[:-1], u[1:])
    return float(energy / np.dot(mass * u, u))


def normalization(pair, config):
    c = _trapezoid_weights(config.grid, config.h)
    return float(np.sum(c * config.f_nodes() ** (config.n - 1) * pair.w ** 2))


def nu_sweep(config, nus, bc, j):
    """mu_j(nu) on a nu-grid with the monotonicity and constant-function checks."""
    bc = BoundaryCondition(bc)
    mus = [solve_radial(config, nu, bc, j)[j - 1].mu for nu in nus]
    diffs = np.diff(mus)
    monotone = bool(np.all(diffs >= -1e-10 * max(1.0, max(abs(m) for m in mus))))
    report = {"nu": list(map(float, nus)), "mu": mus, "monotone": monotone}
    if bc == BoundaryCondition.NEUMANN and j == 1:
        c = _trapezoid_weights(config.grid, config.h)
        f = config.f_nodes()
        ratio = np.sum(c * f ** (config.n - 3)) / np.sum(c * f ** (config.n - 1))
        bounds = [nu * ratio for nu in nus]
        report["constant_bound"] = bounds
        report["bound_holds"] = all(m <= b * (1 + 1e-10) + 1e-14 for m, b in zip(mus, bounds))
    return report


def evenness_defect(pair):
    """max |w(x) - w(-x)| for an interval presented symmetrically about 0."""
    return float(np.max(np.abs(pair.w - pair.w[::-1])))


# ---------------------------------------------------------------------------
# compact warped products
# ---------------------------------------------------------------------------


def _check_fiber(config, fiber):
    if fiber.dim != config.n - 1:
        raise ValueError(f"fiber dim {fiber.dim} does not match n - 1 = {config.n - 1}")


def second_neumann_mode(config, fiber):
    """Second Neumann eigenfunction: either w_{2,1} v_1 or w_{1,2} v_2."""
    _check_fiber(config, fiber)
    radial = solve_radial(config, 0.0, BoundaryCondition.NEUMANN, 2)[1]
    nu2 = float(fiber.eigenvalues[1])
    transverse = solve_radial(config, nu2, BoundaryCondition.NEUMANN, 1)[0]
    mu21, mu12 = radial.mu, transverse.mu
    gap = abs(mu21 - mu12) / max(abs(mu21), abs(mu12))
    multiplicity = fiber.levels[1].multiplicity
    flags = {
        "mu_21": mu21,
        "mu_12": mu12,
        "near_degenerate": bool(gap < _runtime_config["degeneracy_rtol"]),
        "fiber_multiplicity": multiplicity,
        "alternative_one": bool(multiplicity > 1),
    }
    if mu21 < mu12:
        mode = CompactMode(ModeKind.RADIAL, ((radial, 1, 1.0),), mu21, flags)
    else:
        mode = CompactMode(ModeKind.FIBER, ((transverse, 2, 1.0),), mu12, flags)
    if flags["near_degenerate"]:
        logger.warning(f"mu_21={mu21} and mu_12={mu12} are nearly degenerate")
    return mode


def _sign_pattern(values, floor):
    signs = np.where(np.abs(values) <= floor, 0, np.sign(values)).astype(int)
    symbols = {1: "+", 0: "0", -1: "-"}
    pattern = []
    for s in signs:
        if not pattern or pattern[-1] != symbols[s]:
            pattern.append(symbols[s])
    return "".join(pattern), signs


def check_radial_monotonicity(pair, config):
    """Sign structure of a = f^{n-1}(nu/f^2 - mu) w and of w' in (0, L)."""
    n = config.n
    r = pair.r
    f = config.f_nodes()
    monotone_tol = _runtime_config["monotone_tol"]
    notes = []
    hypotheses = pair.bc == BoundaryCondition.NEUMANN and pair.w[-1] > 0
    if pair.nu == 0.0:
        hypotheses = hypotheses and pair.zero_count == 1
        if pair.zero_count != 1:
            notes.append(f"nu = 0 needs exactly one sign change, found {pair.zero_count}")
    else:
        positive = bool(np.all(pair.w > 0))
        hypotheses = hypotheses and positive
        if not positive:
            notes.append("nu > 0 needs w > 0")
    if not hypotheses:
        logger.warning("monotonicity hypotheses not met: " + "; ".join(notes or ["boundary data"]))

    a = f ** (n - 1) * (pair.nu / f ** 2 - pair.mu) * pair.w
    pattern, signs = _sign_pattern(a, 1e-10 * np.max(np.abs(a)))
    positive_idx = np.nonzero(signs > 0)[0]
    negative_idx = np.nonzero(signs < 0)[0]
    r1 = float(r[positive_idx[-1]]) if positive_idx.size else float(r[0])
    r2 = float(r[negative_idx[0]]) if negative_idx.size else float(r[-1])

    dw = pair.half_derivative()
    mid = 0.5 * (r[1:] + r[:-1])
    floor = 1e-12 * np.max(np.abs(dw))
    nonzero = np.nonzero(np.abs(dw) > floor)[0]
    locations = []
    for i0, i1 in zip(nonzero[:-1], nonzero[1:]):
        if dw[i0] * dw[i1] < 0:
            # linear interpolation of the derivative zero
            t = dw[i0] / (dw[i0] - dw[i1])
            locations.append(float(mid[i0] + t * (mid[i1] - mid[i0])))
    return MonotonicityReport(
        min_interior_derivative=float(np.min(dw)),
        max_interior_derivative=float(np.max(dw)),
        a_sign_pattern=pattern,
        a_sign_interval=(r1, r2),
        interior_extremum=bool(locations),
        extremum_locations=locations,
        strictly_positive=bool(np.min(dw) > monotone_tol),
        f_monotone=config.warping.is_monotone(r) if not config.warping.is_constant(r) else 0,
        hypotheses_met=bool(hypotheses),
        note="; ".join(notes),
    )


def mixed_first_mode(config):
    """First mode of the Dirichlet-at-0 / Neumann-at-L problem and its checks."""
    pair = solve_radial(config, 0.0, BoundaryCondition.MIXED, 1)[0]
    f_half = config.warping(0.5 * (pair.r[1:] + pair.r[:-1]))
    dw = pair.half_derivative()
    flux = f_half ** (config.n - 1) * dw
    a = -pair.mu * config.f_nodes() ** (config.n - 1) * pair.w
    pattern, _ = _sign_pattern(a, 1e-10 * np.max(np.abs(a)))
    report = MonotonicityReport(
        min_interior_derivative=float(np.min(dw)),
        max_interior_derivative=float(np.max(dw)),
        a_sign_pattern=pattern,
        a_sign_interval=(0.0, 0.0),
        interior_extremum=bool(np.any(dw <= 0)),
        extremum_locations=[],
        strictly_positive=bool(np.min(dw) > _runtime_config["monotone_tol"]),
        f_monotone=config.warping.is_monotone(pair.r),
        hypotheses_met=True,
        flux_strictly_decreasing=bool(np.all(np.diff(flux) < 0)),
        max_at_L=bool(int(np.argmax(pair.w)) == pair.w.size - 1),
    )
    mode = CompactMode(ModeKind.RADIAL, ((pair, 1, 1.0),), pair.mu, {"bc": "mixed"})
    return mode, report


def _fiber_for_radius(kind, dim, rho, count=8):
    if kind == FiberKind.CIRCLE:
        return circle_spectrum(rho, count)
    return sphere_spectrum(dim, rho, count)


def tune_degenerate_radius(config, kind=FiberKind.SPHERE, xtol=1e-13):
    """Fiber radius rho at which mu_{2,1} = mu_{1,2} (bisection in log rho)."""
    kind = FiberKind(kind)
    dim = config.n - 1
    mu21 = solve_radial(config, 0.0, BoundaryCondition.NEUMANN, 2)[1].mu

    def gap(log_rho):
        nu2 = float(_fiber_for_radius(kind, dim, math.exp(log_rho)).eigenvalues[1])
        return solve_radial(config, nu2, BoundaryCondition.NEUMANN, 1)[0].mu - mu21

    # nu_2 = dim / rho^2 on spheres and 1 / rho^2 on circles
    guess = math.log(math.sqrt(max(dim if kind == FiberKind.SPHERE else 1, 1) / mu21))
    lo, hi = guess - 0.5, guess + 0.5
    for _ in range(60):
        if gap(lo) > 0 > gap(hi):
            break
        lo, hi = lo - 0.5, hi + 0.5
    else:
        raise DegeneracyError("could not bracket a degenerate fiber radius")
    return math.exp(optimize.brentq(gap, lo, hi, xtol=xtol))


def _fiber_argmax(fiber, k):
    grid = fiber.grid(_runtime_config.fiber_grid)
    values = fiber.eigenfunctions(grid.points, [k - 1])[0]
    idx = int(torch.argmax(values))
    point, _ = fiber.refine_max(lambda pts: fiber.eigenfunctions(pts, [k - 1])[0], grid.points[idx])
    return point


def degenerate_pair_mode(config, fiber, r0, x0=None, step=1e-4):
    """u = w_{2,1} v_1 + b w_{1,2} v_2 with a critical point at (r0, x0)."""
    _check_fiber(config, fiber)
    if not 0.0 < r0 < config.L:
        raise ValueError(f"r0 must lie in (0, L), got {r0}")
    radial = solve_radial(config, 0.0, BoundaryCondition.NEUMANN, 2)[1]
    transverse = solve_radial(config, float(fiber.eigenvalues[1]), BoundaryCondition.NEUMANN, 1)[0]
    gap = abs(radial.mu - transverse.mu) / max(radial.mu, transverse.mu)
    if gap > _runtime_config["degeneracy_rtol"]:
        raise DegeneracyError(
            f"mu_21={radial.mu} and mu_12={transverse.mu} are not degenerate (gap {gap:.3e})"
        )
    if x0 is None:
        x0 = _fiber_argmax(fiber, 2)
    x0 = fiber.canonical(torch.as_tensor(x0, dtype=DTYPE).reshape(1, -1))[0]
    s21, s12 = radial.spline(), transverse.spline()
    d21, d12 = float(s21(r0, 1)), float(s12(r0, 1))
    if abs(d12) <= 1e-12 * np.max(np.abs(transverse.w_prime)):
        raise DegeneracyError("w_{1,2}'(r0) vanishes, the coefficient b is undefined")
    v1 = 1.0 / math.sqrt(fiber.volume)
    v2 = float(fiber.eigenfunction(2, x0)[0])
    if abs(v2) < 1e-12:
        raise DegeneracyError("v_2(x0) vanishes")
    b = -(d21 * v1) / (d12 * v2)

    chart, scale = fiber.local_chart(x0)
    dim = fiber.dim

    def u(coords):
        # coords [N, 1 + dim] = (r, tangent coordinates at x0)
        coords = np.atleast_2d(coords)
        pts = chart(torch.as_tensor(np.ascontiguousarray(coords[:, 1:]), dtype=DTYPE))
        vals = fiber.eigenfunctions(pts, [1])[0].numpy()
        return s21(coords[:, 0]) * v1 + b * s12(coords[:, 0]) * vals

    origin = np.zeros(1 + dim)
    origin[0] = r0
    f0 = float(config.warping(r0))
    grad = np.zeros(1 + dim)
    for i in range(1 + dim):
        e = np.zeros(1 + dim)
        e[i] = step
        grad[i] = (u(origin + e)[0] - u(origin - e)[0]) / (2.0 * step)
    # metric dr^2 + f^2 h with h-length scale * |du|
    grad_norm = math.sqrt(grad[0] ** 2 + np.sum((grad[1:] / (scale * f0)) ** 2))

    hstep = 1e-3
    hess = np.zeros((1 + dim, 1 + dim))
    center = u(origin)[0]
    for i in range(1 + dim):
        for j in range(i, 1 + dim):
            ei = np.zeros(1 + dim)
            ej = np.zeros(1 + dim)
            ei[i] = hstep
            ej[j] = hstep
            if i == j:
                val = (u(origin + ei)[0] - 2 * center + u(origin - ei)[0]) / hstep ** 2
            else:
                val = (
                    u(origin + ei + ej)[0]
                    - u(origin + ei - ej)[0]
                    - u(origin - ei + ej)[0]
                    + u(origin - ei - ej)[0]
                ) / (4 * hstep ** 2)
            hess[i, j] = hess[j, i] = val
    eig = np.linalg.eigvalsh(hess)
    if np.min(np.abs(eig)) <= 1e-8 * np.max(np.abs(eig)):
        classification = "degenerate"
    elif np.all(eig < 0):
        classification = "max"
    elif np.all(eig > 0):
        classification = "min"
    else:
        classification = "saddle"
    flags = {
        "b": b,
        "r0": float(r0),
        "x0": x0.tolist(),
        "gradient_norm": grad_norm,
        "classification": classification,
        "mu_21": radial.mu,
        "mu_12": transverse.mu,
    }
    logger.info(f"degenerate pair at r0={r0}: b={b:.6g}, |grad u|={grad_norm:.3e}, {classification}")
    return CompactMode(
        ModeKind.DEGENERATE_COMBINATION,
        ((radial, 1, 1.0), (transverse, 2, b)),
        radial.mu,
        flags,
    )


def fiber_combination_mode(config, fiber, coefficients):
    """u = w_{1,2} sum_k a_k v_k over the nu_2 eigenspace.

    Interior critical points of such a combination can only sit where the
    fiber factor vanishes, so they are nodal whenever w_{1,2}' > 0.
    """
    _check_fiber(config, fiber)
    level = fiber.levels[1]
    if len(coefficients) != level.multiplicity:
        raise ValueError(
            f"expected {level.multiplicity} coefficients for the nu_2 eigenspace, "
            f"got {len(coefficients)}"
        )
    pair = solve_radial(config, float(fiber.eigenvalues[1]), BoundaryCondition.NEUMANN, 1)[0]
    parts = tuple(
        (pair, level.start + 1 + i, float(a)) for i, a in enumerate(coefficients)
    )
    dw = pair.half_derivative()
    flags = {
        "min_interior_w_prime": float(np.min(dw)),
        "nodal_only": bool(np.min(dw) > _runtime_config["monotone_tol"]),
    }
    return CompactMode(ModeKind.FIBER_COMBINATION, parts, pair.mu, flags)


def locate_hotspots_compact(mode, fiber, grid=None):
    """All grid-local extrema of u(r, x), labelled boundary or interior."""
    stride, resolution = (grid or ProductGrid()).resolve()
    pair = mode.parts[0][0]
    n_nodes = pair.r.size
    r_index = np.arange(0, n_nodes, stride)
    if r_index[-1] != n_nodes - 1:
        r_index = np.append(r_index, n_nodes - 1)
    fgrid = fiber.grid(resolution)
    values = mode.evaluate(fiber, r_index, fgrid.points)
    u = values.reshape((r_index.size,) + tuple(fgrid.shape))
    periodic = (False,) + tuple(fgrid.periodic)
    is_max = local_extrema_mask(u, periodic, True)
    is_min = local_extrema_mask(u, periodic, False)
    both = is_max & is_min
    extrema = []
    points = fgrid.points.numpy()
    for kind, mask in (("max", is_max & ~both), ("min", is_min & ~both)):
        for flat in np.flatnonzero(mask.reshape(r_index.size, -1)):
            ri, xi = divmod(int(flat), points.shape[0])
            label = (
                ExtremumLabel.BOUNDARY
                if ri in (0, r_index.size - 1)
                else ExtremumLabel.INTERIOR
            )
            extrema.append(
                Extremum(kind, float(pair.r[r_index[ri]]), points[xi].tolist(), float(values[ri, xi]), label)
            )
    return extrema


# ---------------------------------------------------------------------------
# n = 2 cross-check against a direct 2-D discretization
# ---------------------------------------------------------------------------


def separated_spectrum(config, fiber, count):
    """First `count` values of the union {mu_{j,k}} with multiplicity."""
    _check_fiber(config, fiber)
    collected = []
    level = 0
    while True:
        nu = fiber.level_value(level)
        mult = fiber.level_multiplicity(level)
        mus = [p.mu for p in solve_radial(config, nu, BoundaryCondition.NEUMANN, count)]
        if len(collected) >= count and mus[0] > collected[count - 1]:
            break
        for mu in mus:
            collected.extend([mu] * mult)
        collected.sort()
        level += 1
    return np.asarray(collected[:count])


def direct_surface_spectrum(config, rho, count, theta_nodes=256):
    """Neumann spectrum of the surface of revolution dr^2 + f^2 rho^2 dtheta^2."""
    if config.n != 2:
        raise ValueError("the direct surface discretization needs n = 2")
    h = config.h
    r = config.nodes()
    f = config.f_nodes()
    f_half = config.warping(0.5 * (r[1:] + r[:-1]))
    c = _trapezoid_weights(config.grid, h)
    p = f_half / h
    main = np.zeros(config.grid + 1)
    main[:-1] += p
    main[1:] += p
    k_r = sp.diags([main, -p, -p], [0, 1, -1], format="csr")
    dtheta = 2.0 * math.pi / theta_nodes
    ones = np.ones(theta_nodes)
    k_theta = sp.diags([2.0 * ones, -ones[:-1], -ones[:-1]], [0, 1, -1], format="lil")
    k_theta[0, theta_nodes - 1] = -1.0
    k_theta[theta_nodes - 1, 0] = -1.0
    eye = sp.identity(theta_nodes, format="csr")
    stiffness = sp.kron(k_r, rho * dtheta * eye) + sp.kron(
        sp.diags(c / (f * rho)), k_theta.tocsr() / dtheta
    )
    mass = sp.kron(sp.diags(c * f), rho * dtheta * eye)
    values = eigsh(stiffness.tocsc(), k=count, M=mass.tocsc(), sigma=-1.0, which="LM", return_eigenvectors=False)
    return np.sort(values)
