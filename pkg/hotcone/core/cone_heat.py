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

"""Heat kernel and heat flow on the infinite cone C(M).

With l(r, s, t) = (rs)^{-(n-2)/2} / (2t) exp(-(r^2 + s^2) / 4t) the kernel is

    p_t((r, x), (s, y)) = sum_k P_{gamma_k}(r, s, t) v_k(x) v_k(y),
    P_gamma = l(r, s, t) I_gamma(rs / 2t).

P_gamma is assembled in the log domain from the normalized Bessel ratio,
so the r = 0 and s = 0 limits come out exactly. Eigenspaces are summed
through the fiber level kernels; a TruncationPlan fixes how many levels
are kept and bounds the dropped tail on an evaluation window.

The bound is analytic per examined level for solution plans, and a maximum
over a z grid of the exact per-level envelope for kernel plans. Levels past
the examined ones are covered by a geometric extrapolation from the last
two level bounds, so `certified_bound` is an estimate rather than a proof
once the scan stops short of the cap.
"""
import math
from dataclasses import dataclass, field

import torch

from hotcone.manager import _runtime_config
from hotcone.utils import logger

from .bessel import log_small_z_ratio
from .const import DTYPE
from .cone import adaptive_quadrature
from .errors import TruncationError
from .gamma import log_gamma

_LOG2 = math.log(2.0)


def _broadcast(*values):
    return torch.broadcast_tensors(*[torch.as_tensor(v, dtype=DTYPE) for v in values])


def _check_arguments(r, s, t):
    if torch.any(t <= 0):
        raise ValueError("heat kernel needs t > 0")
    if torch.any(r < 0) or torch.any(s < 0):
        raise ValueError("cone radii must be >= 0")


def log_p_gamma(gamma, r, s, t, n):
    """log P_gamma(r, s, t); -inf where P_gamma vanishes."""
    gamma, r, s, t = _broadcast(gamma, r, s, t)
    _check_arguments(r, s, t)
    z = r * s / (2.0 * t)
    exponent = gamma + 1.0 - 0.5 * n
    log_rs = torch.log(r) + torch.log(s)
    power = torch.where(exponent == 0, torch.zeros_like(z), exponent * log_rs)
    return (
        log_small_z_ratio(gamma, z)
        - log_gamma(gamma + 1.0)
        - gamma * _LOG2
        - (gamma + 1.0) * torch.log(2.0 * t)
        + power
        - (r * r + s * s) / (4.0 * t)
    )


def p_gamma(gamma, r, s, t, n):
    return torch.exp(log_p_gamma(gamma, r, s, t, n))


def dp_gamma_dr(gamma, r, s, t, n):
    """d/dr P_gamma = [(gamma - (n-2)/2)/r - r/2t] P_gamma + (s/2t) P_{gamma+1}.

    At r = 0 the limit depends on e = gamma + 1 - n/2: it is 0 for e = 0 or
    e > 1, +inf for 0 < e < 1 and lim P_gamma / r for e = 1.
    """
    gamma, r, s, t = _broadcast(gamma, r, s, t)
    c = gamma - 0.5 * (n - 2)
    p = p_gamma(gamma, r, s, t, n)
    p_up = p_gamma(gamma + 1.0, r, s, t, n)
    safe_r = torch.where(r > 0, r, torch.ones_like(r))
    interior = (c / safe_r - r / (2.0 * t)) * p + s / (2.0 * t) * p_up

    one = torch.abs(c - 1.0) < 1e-14
    # lim_{r -> 0} P_gamma / r when the exponent is exactly one
    log_slope = (
        -log_gamma(gamma + 1.0)
        - gamma * _LOG2
        - (gamma + 1.0) * torch.log(2.0 * t)
        + c * torch.log(s)
        - s * s / (4.0 * t)
    )
    at_zero = torch.zeros_like(r)
    at_zero = torch.where(one, torch.exp(log_slope), at_zero)
    blow_up = (c > 0) & (c < 1) & ~one & (s > 0)
    at_zero = torch.where(blow_up, torch.full_like(r, math.inf), at_zero)
    return torch.where(r > 0, interior, at_zero)


def euclidean_heat_kernel(distance, t, n=3):
    distance, t = _broadcast(distance, t)
    return (4.0 * math.pi * t) ** (-0.5 * n) * torch.exp(-distance * distance / (4.0 * t))


def cone_distance(cone, a, b):
    """d((r, x), (s, y))^2 = r^2 + s^2 - 2 r s cos(min(d_M(x, y), pi))."""
    r, x = a
    s, y = b
    r, s = _broadcast(r, s)
    angle = torch.clamp(cone.fiber.distance(x, y), max=math.pi)
    d2 = r * r + s * s - 2.0 * r * s * torch.cos(angle)
    return torch.sqrt(torch.clamp(d2, min=0.0))


# ---------------------------------------------------------------------------
# truncation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TruncationPlan:
    """Number K of eigenvalue levels kept and the bound on everything dropped.

    The window is {r <= R t^{1/2}, t >= t_min}; kernel plans also need the
    second radius below `support`, solution plans take it from the data.
    """

    K: int
    tol: float
    certified_bound: float
    R: float
    t_min: float
    support: float
    kind: str = "solution"
    levels_examined: int = 0
    level_bounds: tuple = field(default=(), repr=False)

    @property
    def certified(self):
        return self.certified_bound <= self.tol

    def covers(self, r_max, t, s_max=None):
        slack = 1.0 + 1e-12
        if t < self.t_min / slack:
            return False
        if r_max > self.R * math.sqrt(t) * slack:
            return False
        return s_max is None or s_max <= self.support * slack

    def require(self, r_max, t, s_max=None):
        if not self.certified:
            raise TruncationError(
                f"plan bound {self.certified_bound:.3e} exceeds its tolerance {self.tol:.3e}"
            )
        if not self.covers(r_max, t, s_max):
            raise TruncationError(
                f"evaluation at r <= {r_max:.6g}, t = {t:.6g} lies outside the certified "
                f"window R = {self.R:.6g}, t_min = {self.t_min:.6g}"
            )

    def to_dict(self):
        return {
            "K": self.K,
            "tol": self.tol,
            "certified_bound": self.certified_bound,
            "R": self.R,
            "t_min": self.t_min,
            "support": self.support,
            "kind": self.kind,
            "levels_examined": self.levels_examined,
        }


def _log_level_weights(cone, start, stop):
    """log(N_l / Vol), the sup over the fiber of the level kernel."""
    fiber = cone.fiber
    mult = torch.as_tensor(
        [fiber.level_multiplicity(l) for l in range(start, stop)], dtype=DTYPE
    )
    return torch.log(mult) - math.log(fiber.volume)


def _solution_level_bounds(cone, R, t_min, support, l2_norm):
    n = cone.n
    log_mass = 0.5 * n * math.log(support) + math.log(l2_norm) - 0.5 * math.log(n)
    log_rs = math.log(R * math.sqrt(t_min)) + math.log(support)

    def bounds(start, stop):
        gamma = cone.level_gammas(start, stop)
        exponent = gamma + 1.0 - 0.5 * n
        # I_gamma(z) <= (z/2)^gamma e^z / Gamma(gamma + 1) gives (rs)^e (2t)^{-gamma-1}
        # at the window corner; Cauchy-Schwarz over the level adds sqrt(N_l / Vol)
        # times the data norm
        return (
            -log_gamma(gamma + 1.0)
            - gamma * _LOG2
            + exponent * log_rs
            - (gamma + 1.0) * math.log(2.0 * t_min)
            + log_mass
            + 0.5 * _log_level_weights(cone, start, stop)
        )

    return bounds


def _kernel_level_bounds(cone, R, t_min, support, z_nodes=513):
    """Per-level kernel envelope, maximized over z_nodes samples of [0, z_max].

    The sampled maximum estimates the sup; it is not an upper bound between nodes.
    """
    n = cone.n
    z_max = R * support / (2.0 * math.sqrt(t_min))
    z = torch.linspace(0.0, z_max, z_nodes if z_max > 0 else 1, dtype=DTYPE).unsqueeze(0)

    def bounds(start, stop):
        gamma = cone.level_gammas(start, stop).unsqueeze(1)
        exponent = gamma + 1.0 - 0.5 * n
        power = torch.where(
            exponent == 0, torch.zeros_like(gamma * z), exponent * torch.log(z)
        )
        # log of z^{1-n/2} e^{-z} I_gamma(z)
        log_g = (
            log_small_z_ratio(gamma, z)
            + power
            - gamma * _LOG2
            - log_gamma(gamma + 1.0)
            - z
        )
        return (
            torch.max(log_g, dim=1).values
            - 0.5 * n * math.log(2.0 * t_min)
            + _log_level_weights(cone, start, stop)
        )

    return bounds


def _select_levels(bounds, tol, cap):
    blocks = []
    start, block = 0, 64
    while start < cap:
        stop = min(start + block, cap)
        blocks.append(bounds(start, stop))
        start = stop
        logs = torch.cat(blocks)
        if logs.numel() >= 2 and logs[-1] < logs[-2] and logs[-1] < math.log(tol) - 14.0:
            break
        block *= 2
    logs = torch.cat(blocks)
    terms = torch.exp(logs)
    if logs.numel() >= 2 and terms[-1] < terms[-2]:
        q = float(terms[-1] / terms[-2])
        unseen = float(terms[-1]) * q / (1.0 - q)
    else:
        unseen = math.inf
    # tails[K] bounds everything from level K on; the unseen part past the
    # examined levels is a geometric estimate from the last ratio
    tails = torch.flip(torch.cumsum(torch.flip(terms, [0]), 0), [0]) + unseen
    tails = torch.cat([tails, torch.tensor([unseen], dtype=DTYPE)])
    ok = torch.nonzero(tails[1:] <= tol)
    if ok.numel() == 0:
        raise TruncationError(
            f"series tail stays above {tol:.3e} within the cap of {cap} levels"
        )
    K = int(ok[0]) + 1
    return K, float(tails[K]), logs.numel(), tuple(terms.tolist())


def truncation_order(cone, phi, R, t_min, tol=None, support=None):
    """Smallest number of levels whose dropped tail is <= tol on the window.
    Args:
        cone: ConeSetup
        phi: InitialCondition, or None for a kernel plan
        R: window r <= R t^{1/2}
        t_min: earliest time of the window
        tol: tail tolerance, defaults to the numerics truncation_tol
        support: second-radius bound for kernel plans
    Returns:
        TruncationPlan
    """
    tol = tol or _runtime_config.truncation_tol
    cap = _runtime_config.truncation_cap
    if not R > 0 or not t_min > 0 or not tol > 0:
        raise ValueError("truncation needs R > 0, t_min > 0 and tol > 0")
    if phi is None:
        if support is None or not support > 0:
            raise ValueError("kernel plans need a positive support radius")
        bounds = _kernel_level_bounds(cone, R, t_min, support)
        kind = "kernel"
    else:
        support = phi.support
        bounds = _solution_level_bounds(cone, R, t_min, support, phi.l2_norm())
        kind = "solution"
    K, bound, examined, level_bounds = _select_levels(bounds, tol, cap)
    logger.info(
        f"{kind} truncation: K={K} levels, tail bound {bound:.3e} "
        f"(R={R:.4g}, t_min={t_min:.4g}, S={support:.4g})"
    )
    return TruncationPlan(
        K=K,
        tol=tol,
        certified_bound=bound,
        R=float(R),
        t_min=float(t_min),
        support=float(support),
        kind=kind,
        levels_examined=examined,
        level_bounds=level_bounds,
    )


# ---------------------------------------------------------------------------
# kernel
# ---------------------------------------------------------------------------


def heat_kernel(cone, a, b, t, plan):
    """p_t(a, b) for a = (r, x), b = (s, y) with radii [N] and chart points [N, d]."""
    r, x = a
    s, y = b
    r, s, t = _broadcast(r, s, t)
    r, s, t = r.reshape(-1), s.reshape(-1), t.reshape(-1)
    if plan.kind != "kernel":
        raise TruncationError("heat_kernel needs a kernel truncation plan")
    for ri, si, ti in zip(r.tolist(), s.tolist(), t.tolist()):
        if not (plan.covers(ri, ti, si) or plan.covers(si, ti, ri)):
            plan.require(ri, ti, si)
    if not plan.certified:
        plan.require(0.0, plan.t_min)
    gamma = cone.level_gammas(0, plan.K).unsqueeze(1)
    p = p_gamma(gamma, r.unsqueeze(0), s.unsqueeze(0), t.unsqueeze(0), cone.n)
    kernels = cone.fiber.level_kernels(plan.K, x, y)
    return torch.sum(p * kernels, dim=0)


def calibrate_gaussian_envelope(cone, samples, plan, c2_candidates=(4.0, 8.0, 16.0)):
    """Smallest C1 per C2 with p_t <= C1 t^{-n/2} exp(-(r - s)^2 / (C2 t)) on the samples.
    Args:
        samples: dict with radii `r`, `s`, chart points `x`, `y` and times `t`
    """
    p = heat_kernel(cone, (samples["r"], samples["x"]), (samples["s"], samples["y"]), samples["t"], plan)
    r, s, t = _broadcast(samples["r"], samples["s"], samples["t"])
    r, s, t = r.reshape(-1), s.reshape(-1), t.reshape(-1)
    out = {}
    for c2 in c2_candidates:
        log_ratio = torch.log(p) + 0.5 * cone.n * torch.log(t) + (r - s) ** 2 / (c2 * t)
        out[float(c2)] = float(torch.exp(torch.max(log_ratio)))
    return out


# ---------------------------------------------------------------------------
# solutions
# ---------------------------------------------------------------------------


def w_gamma_transform(cone, phi, k, r, t, derivative=False):
    """w_{gamma_k}(r, t) = int P_{gamma_k}(r, s, t) psi_k(s) s^{n-1} ds.

    With derivative=True the r-derivative is returned instead.
    """
    if not t > 0:
        raise ValueError("heat flow needs t > 0")
    r = torch.as_tensor(r, dtype=DTYPE).reshape(-1)
    term = phi.term(k)
    if term is None:
        return torch.zeros_like(r)
    gamma = cone.gamma_of(k)
    profile = term.profile
    kernel = dp_gamma_dr if derivative else p_gamma

    def integrand(s):
        values = kernel(gamma, r.unsqueeze(1), s.unsqueeze(0), t, cone.n)
        return values * (profile(s) * s ** (cone.n - 1)).unsqueeze(0)

    value, nodes = adaptive_quadrature(integrand, profile.lo, profile.hi)
    logger.debug(f"w_gamma k={k} t={t:.4g}: {nodes} quadrature nodes")
    return value


@dataclass
class HeatField:
    """u and du/dr sampled on radii x fiber points at a single time."""

    t: float
    r: torch.Tensor
    points: torch.Tensor
    u: torch.Tensor
    du_dr: torch.Tensor
    plan: TruncationPlan
    cone: object = field(repr=False)
    phi: object = field(repr=False)
    ks: tuple = ()
    fiber_shape: tuple = None
    periodic: tuple = None

    def radial_modes(self, r, derivative=False):
        return torch.stack(
            [
                w_gamma_transform(self.cone, self.phi, k, r, self.t, derivative)
                for k in self.ks
            ]
        )

    def fiber_modes(self, points):
        return self.cone.fiber.eigenfunctions(points, [k - 1 for k in self.ks])

    def evaluate(self, r, points, derivative=False):
        """u (or du/dr) on the product of radii r and fiber points."""
        return self.radial_modes(r, derivative).T @ self.fiber_modes(points)


def solve_heat(cone, phi, t, r, points=None, plan=None):
    """u(r, x, t) = sum_k w_{gamma_k}(r, t) v_k(x) and its r-derivative.
    Args:
        r: radii, evaluation window is r <= max(r)
        points: fiber chart points, defaults to the numerics fiber grid
        plan: TruncationPlan, computed for the grid when omitted
    """
    if not t > 0:
        raise ValueError("heat flow needs t > 0")
    fiber = cone.fiber
    r = torch.as_tensor(r, dtype=DTYPE).reshape(-1)
    fiber_shape = periodic = None
    if points is None:
        grid = fiber.grid(_runtime_config.fiber_grid)
        points, fiber_shape, periodic = grid.points, grid.shape, grid.periodic
    r_max = float(torch.max(r))
    if plan is None:
        plan = truncation_order(cone, phi, max(r_max / math.sqrt(t), 1e-3), t)
    plan.require(r_max, t)
    ks = tuple(term.k for term in phi.terms if fiber.level_of(term.k) < plan.K)
    field_ = HeatField(
        t=float(t),
        r=r,
        points=points,
        u=None,
        du_dr=None,
        plan=plan,
        cone=cone,
        phi=phi,
        ks=ks,
        fiber_shape=fiber_shape,
        periodic=periodic,
    )
    modes = field_.fiber_modes(points)
    field_.u = field_.radial_modes(r).T @ modes
    field_.du_dr = field_.radial_modes(r, derivative=True).T @ modes
    return field_


def total_mass(cone, phi, t, width=20.0):
    """int u(., t) dV; only the constant fiber mode carries mass."""
    if phi.term(1) is None:
        return 0.0
    upper = phi.support + width * math.sqrt(t)

    def integrand(r):
        return w_gamma_transform(cone, phi, 1, r, t) * r ** (cone.n - 1)

    value, _ = adaptive_quadrature(integrand, 0.0, upper)
    return math.sqrt(cone.fiber.volume) * float(value)


def mass_defect(cone, phi, t):
    reference = phi.total_mass()
    return abs(total_mass(cone, phi, t) - reference) / abs(reference)
