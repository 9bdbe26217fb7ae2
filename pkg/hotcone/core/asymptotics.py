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

"""Long-time predictions for the hot spots of heat flow on a cone."""
import logging
import math
from dataclasses import dataclass, field

import torch

from hotcone.manager import _runtime_config
from hotcone.utils import log_scenario, logger

from .cone_heat import cone_distance, p_gamma, solve_heat, w_gamma_transform
from .const import DTYPE, HotspotLocation, Regime
from .errors import NoTransverseDataError
from .fiber_spectrum import grid_maximizers
from .gamma import log_gamma


def psi_functional(cone, phi, k):
    """Psi_{gamma_k}(phi) = int psi_k(s) s^{gamma_k + n/2} ds."""
    return phi.moment(k, cone.gamma_of(k) + 0.5 * cone.n)


def leading_coefficient(gamma):
    """(2^{2 gamma + 1} Gamma(gamma + 1))^{-1}."""
    return math.exp(-(2.0 * gamma + 1.0) * math.log(2.0) - log_gamma(gamma + 1.0))


def normalized_p_gamma(gamma, r, s, t, n):
    """t^{gamma+1} e^{r^2/4t} P_gamma / (rs)^{gamma-n/2+1}, tends to leading_coefficient."""
    e = gamma + 1.0 - 0.5 * n
    return (
        p_gamma(gamma, r, s, t, n)
        * t ** (gamma + 1.0)
        * math.exp(r * r / (4.0 * t))
        / (r * s) ** e
    )


def w_gamma_leading(cone, phi, k, r, t):
    """Leading long-time term of w_{gamma_k}(r, t) on r <= R t^{1/2}."""
    gamma = cone.gamma_of(k)
    r = torch.as_tensor(r, dtype=DTYPE)
    return (
        psi_functional(cone, phi, k)
        * leading_coefficient(gamma)
        * r ** (gamma - 0.5 * cone.n + 1.0)
        * t ** (-(gamma + 1.0))
        * torch.exp(-r * r / (4.0 * t))
    )


def classify_nu(nu, n, rtol=1e-12):
    """Regime selected by the active fiber eigenvalue against n - 1 and 2n."""
    if abs(nu - (n - 1)) <= rtol * (n - 1):
        return Regime.CRITICAL
    if nu >= 2 * n * (1.0 - rtol):
        return Regime.CONE_POINT
    if nu > n - 1:
        return Regime.INWARD
    return Regime.OUTWARD


@dataclass
class Prediction:
    regime: Regime
    level: int
    nu: float
    gamma: float
    alpha: float
    R_infinity: float
    r_infinity: float
    G1: float
    m: float
    epsilon: float
    psi: dict
    # fiber indices of the active level and their F / J coefficients
    ks: tuple
    f_coefficients: tuple
    j_coefficients: tuple
    A_infinity: torch.Tensor
    J_maximizers: torch.Tensor
    fallback_index: int = None
    cone: object = field(default=None, repr=False)

    def _combine(self, coefficients, points):
        values = self.cone.fiber.eigenfunctions(points, [k - 1 for k in self.ks])
        coeff = torch.as_tensor(coefficients, dtype=DTYPE).unsqueeze(1)
        return torch.sum(coeff * values, dim=0)

    def F(self, points):
        return self._combine(self.f_coefficients, points)

    def J(self, points):
        return self._combine(self.j_coefficients, points)

    def in_U_epsilon(self, points, epsilon=None):
        epsilon = self.epsilon if epsilon is None else epsilon
        return self.J(points) >= self.m - epsilon

    @property
    def h_infinity(self):
        if self.regime == Regime.CRITICAL and self.r_infinity > 0:
            return HotspotLocation.POINT
        if self.regime == Regime.OUTWARD:
            # escapes to infinity, no finite limit set
            return None
        return HotspotLocation.CONE_POINT

    def predicted_radius(self, t):
        return self.R_infinity * t ** self.alpha

    def distance_to_h_infinity(self, r, points):
        """Cone distance from (r_i, x_i) to H_infinity."""
        r = torch.as_tensor(r, dtype=DTYPE).reshape(-1)
        if self.h_infinity == HotspotLocation.CONE_POINT:
            return r.clone()
        if self.h_infinity is None:
            raise ValueError("H_infinity is only defined for the critical regime")
        best = None
        for target in self.A_infinity:
            ref = target.reshape(1, -1).expand(points.shape[0], -1)
            d = cone_distance(self.cone, (r, points), (torch.full_like(r, self.r_infinity), ref))
            best = d if best is None else torch.minimum(best, d)
        return best

    def describe_h_infinity(self):
        kind = self.h_infinity
        if kind is None:
            return {"kind": "infinity"}
        if kind == HotspotLocation.CONE_POINT:
            return {"kind": kind.value}
        return {"kind": kind.value, "r": self.r_infinity, "points": self.A_infinity.tolist()}

    def to_dict(self):
        return {
            "regime": self.regime.value,
            "level": self.level,
            "nu": self.nu,
            "gamma": self.gamma,
            "alpha": self.alpha,
            "R_infinity": self.R_infinity,
            "r_infinity": self.r_infinity,
            "G1": self.G1,
            "m": self.m,
            "epsilon": self.epsilon,
            "psi": {str(k): v for k, v in self.psi.items()},
            "ks": list(self.ks),
            "J_maximizers": self.J_maximizers.tolist(),
            "H_infinity": self.describe_h_infinity(),
            "fallback_index": self.fallback_index,
        }


def predicted_limit(cone, phi, epsilon=None, resolution=None, max_level=None):
    """Regime, rates and limit sets predicted for the heat flow started at phi.

    When the nu_2 eigenspace carries no data the prediction falls back to the
    next level with Psi != 0. The fallback never looks past `max_level`
    levels, normally the K of the truncation plan the flow is computed with;
    by default every computed fiber level is searched.
    Raises:
        HypothesisError: phi has nonpositive total mass
        NoTransverseDataError: Psi = 0 on every searched non-constant level
    """
    fiber = cone.fiber
    n = cone.n
    mass = phi.validate()
    psi = {term.k: psi_functional(cone, phi, term.k) for term in phi.terms}
    resolution = resolution or _runtime_config.fiber_grid
    zero_tol = _runtime_config["f_zero_tol"]

    n_levels = len(fiber.levels)
    if max_level is not None:
        # the nu_2 level itself is always examined
        n_levels = min(n_levels, max(int(max_level), 2))
    for level_index in range(1, n_levels):
        level = fiber.levels[level_index]
        ks = tuple(range(level.start + 1, level.stop + 1))
        f_coeff = tuple(psi.get(k, 0.0) for k in ks)
        if max(abs(c) for c in f_coeff) <= zero_tol:
            continue
        # modes with Psi = 0 do not contribute to F
        ks = tuple(k for k in ks if abs(psi.get(k, 0.0)) > zero_tol)
        f_coeff = tuple(psi[k] for k in ks)
        break
    else:
        raise NoTransverseDataError(
            f"initial data has no transverse component (Psi = 0 on levels 2..{n_levels})"
        )

    fallback_index = None if level_index == 1 else ks[0]
    if fallback_index is not None:
        log_scenario(
            f"F vanishes on the nu_2 eigenspace, falling back to level {level_index} (k={fallback_index})",
            level=logging.WARNING,
        )
    nu = float(level.value)
    gamma = math.sqrt(0.25 * (n - 2) ** 2 + nu)
    regime = classify_nu(nu, n)
    coefficient = leading_coefficient(gamma)
    j_coeff = tuple(c * coefficient for c in f_coeff)
    G1 = psi.get(1, 0.0) / math.sqrt(fiber.volume) * leading_coefficient(cone.gamma_1)

    def combine(coefficients):
        coeff = torch.as_tensor(coefficients, dtype=DTYPE).unsqueeze(1)
        return lambda pts: torch.sum(
            coeff * fiber.eigenfunctions(pts, [k - 1 for k in ks]), dim=0
        )

    max_f, a_infinity = grid_maximizers(fiber, combine(f_coeff), resolution)
    m, j_maximizers = grid_maximizers(fiber, combine(j_coeff), resolution)
    alpha = (0.5 * n - gamma) / (0.5 * n - gamma + 1.0)
    if regime == Regime.CONE_POINT:
        R_infinity = 0.0
    else:
        R_infinity = (2.0 * (gamma - 0.5 * (n - 2)) * m / G1) ** (1.0 / (0.5 * n - gamma + 1.0))
    r_infinity = max(fiber.volume * max_f / (n * mass), 0.0)
    epsilon = _runtime_config["epsilon_fraction"] * m if epsilon is None else epsilon
    prediction = Prediction(
        regime=regime,
        level=level_index,
        nu=nu,
        gamma=gamma,
        alpha=alpha,
        R_infinity=R_infinity,
        r_infinity=r_infinity,
        G1=G1,
        m=m,
        epsilon=epsilon,
        psi=psi,
        ks=ks,
        f_coefficients=f_coeff,
        j_coefficients=j_coeff,
        A_infinity=a_infinity,
        J_maximizers=j_maximizers,
        fallback_index=fallback_index,
        cone=cone,
    )
    logger.info(
        f"prediction: regime {regime.value}, nu={nu:.6g}, alpha={alpha:.6g}, "
        f"R_inf={R_infinity:.6g}, r_inf={r_infinity:.6g}"
    )
    return prediction


def cone_point_law(cone, phi, t):
    """u(p, t) / (G_1 t^{-n/2}); tends to 1 as t grows."""
    u0 = float(w_gamma_transform(cone, phi, 1, [0.0], t)[0]) / math.sqrt(cone.fiber.volume)
    G1 = psi_functional(cone, phi, 1) / math.sqrt(cone.fiber.volume) * leading_coefficient(cone.gamma_1)
    return u0 / (G1 * t ** (-0.5 * cone.n))


def derivative_band_check(cone, phi, R1, R2, schedule, n_radii=64, resolution=None):
    """First scheduled time with du/dr < 0 on [R1 t^{1/2}, R2 t^{1/2}] x M.
    Returns:
        dict with per-time flags and `first_time` (None if never)
    """
    if not 0 < R1 < R2:
        raise ValueError("band check needs 0 < R1 < R2")
    fiber = cone.fiber
    points = fiber.grid(resolution or _runtime_config.track_fiber_grid).points
    flags = []
    for t in schedule:
        r = torch.linspace(R1 * math.sqrt(t), R2 * math.sqrt(t), n_radii, dtype=DTYPE)
        field_ = solve_heat(cone, phi, t, r, points)
        flags.append(bool(torch.all(field_.du_dr < 0)))
    first = None
    for i, t in enumerate(schedule):
        if all(flags[i:]):
            first = float(t)
            break
    return {"times": [float(t) for t in schedule], "negative": flags, "first_time": first}
