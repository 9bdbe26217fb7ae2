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

"""Cones C(M) over a closed fiber and initial data given as fiber-mode sums."""
import math
from dataclasses import dataclass

import numpy as np
import torch

from hotcone.manager import _runtime_config
from hotcone.utils import logger

from .const import DTYPE
from .errors import ConfigError, HypothesisError
from .fiber_spectrum import build_fiber

PROFILE_KINDS = ("indicator", "bump", "power")


class ConeSetup(object):
    """The cone dr^2 + r^2 h over the fiber (M, h), dim M = n - 1."""

    def __init__(self, n, fiber):
        if int(n) != n or n < 3:
            raise ConfigError(f"cones need an integer n >= 3, got {n}", "n")
        if fiber.dim != n - 1:
            raise ConfigError(
                f"fiber dimension {fiber.dim} does not match n - 1 = {n - 1}", "fiber"
            )
        self.n = int(n)
        self.fiber = fiber
        self.gamma = torch.sqrt(0.25 * (self.n - 2) ** 2 + fiber.eigenvalues)

    @property
    def gamma_1(self):
        return 0.5 * (self.n - 2)

    def gamma_of(self, k):
        """gamma_k for the 1-based fiber index k."""
        self.fiber.check_index(k)
        return float(self.gamma[k - 1])

    def level_gamma(self, level):
        return math.sqrt(0.25 * (self.n - 2) ** 2 + self.fiber.level_value(level))

    def level_gammas(self, start, stop):
        return torch.as_tensor(
            [self.level_gamma(l) for l in range(start, stop)], dtype=DTYPE
        )

    def describe(self):
        return {"n": self.n, "fiber": self.fiber.describe()}

    @classmethod
    def from_dict(cls, desc):
        n = int(desc["n"])
        return cls(n, build_fiber(desc["fiber"], n))


class RadialProfile(object):
    """A compactly supported radial profile psi(s) on [lo, hi].

    indicator: amplitude on [lo, hi]
    bump:      amplitude * exp(1 - 1 / (1 - x^2)), x the affine image of s in [-1, 1]
    power:     amplitude * s^p on [lo, hi]
    """

    def __init__(self, kind, lo, hi, amplitude=1.0, power=0.0):
        if kind not in PROFILE_KINDS:
            raise ConfigError(f"unknown profile kind '{kind}'", "profile.kind")
        if not 0.0 <= lo < hi or not math.isfinite(hi):
            raise ConfigError(f"profile support must satisfy 0 <= lo < hi, got [{lo}, {hi}]", "profile")
        self.kind = kind
        self.lo = float(lo)
        self.hi = float(hi)
        self.amplitude = float(amplitude)
        self.power = float(power)

    def __call__(self, s):
        s = torch.as_tensor(s, dtype=DTYPE)
        inside = (s >= self.lo) & (s <= self.hi)
        if self.kind == "indicator":
            values = torch.full_like(s, self.amplitude)
        elif self.kind == "bump":
            x = (2.0 * s - self.lo - self.hi) / (self.hi - self.lo)
            open_ = torch.abs(x) < 1.0
            safe = torch.where(open_, x, torch.zeros_like(x))
            values = torch.where(
                open_,
                self.amplitude * torch.exp(1.0 - 1.0 / (1.0 - safe * safe)),
                torch.zeros_like(s),
            )
        else:
            values = self.amplitude * s ** self.power
        return torch.where(inside, values, torch.zeros_like(s))

    def to_dict(self):
        out = {"kind": self.kind, "lo": self.lo, "hi": self.hi, "amplitude": self.amplitude}
        if self.kind == "power":
            out["power"] = self.power
        return out

    @classmethod
    def from_dict(cls, desc):
        desc = dict(desc)
        return cls(
            desc.pop("kind", "indicator"),
            desc.pop("lo"),
            desc.pop("hi"),
            amplitude=desc.pop("amplitude", 1.0),
            power=desc.pop("power", 0.0),
        )


def gauss_legendre(lo, hi, n_nodes):
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    half = 0.5 * (hi - lo)
    nodes = torch.as_tensor(lo + half * (x + 1.0), dtype=DTYPE)
    weights = torch.as_tensor(half * w, dtype=DTYPE)
    return nodes, weights


def adaptive_quadrature(integrand, lo, hi, n_nodes=None, rtol=None, max_nodes=None):
    """Gauss-Legendre on [lo, hi] with node doubling until stable.

    `integrand(nodes)` returns a tensor [..., n_nodes]; the result has the
    leading shape. Returns (value, nodes used).
    """
    n_nodes = n_nodes or _runtime_config.quadrature_nodes
    rtol = rtol or _runtime_config["quadrature_rtol"]
    max_nodes = max_nodes or _runtime_config["max_quadrature_nodes"]
    nodes, weights = gauss_legendre(lo, hi, n_nodes)
    value = torch.sum(integrand(nodes) * weights, dim=-1)
    while True:
        n_nodes *= 2
        if n_nodes > max_nodes:
            logger.warning(
                f"quadrature on [{lo}, {hi}] not stable to {rtol} with {n_nodes // 2} nodes"
            )
            return value, n_nodes // 2
        nodes, weights = gauss_legendre(lo, hi, n_nodes)
        refined = torch.sum(integrand(nodes) * weights, dim=-1)
        # infinite entries (derivative limits at r = 0) do not take part
        finite = torch.isfinite(refined)
        if not torch.any(finite):
            return refined, n_nodes
        scale = torch.max(torch.abs(refined[finite]))
        change = torch.max(torch.abs(refined[finite] - value[finite]))
        value = refined
        if change <= rtol * scale or scale == 0:
            return value, n_nodes


@dataclass(frozen=True)
class ModeTerm:
    k: int
    profile: RadialProfile


class InitialCondition(object):
    """phi(s, y) = sum_k psi_k(s) v_k(y) over finitely many fiber indices."""

    def __init__(self, cone, terms):
        if len(terms) == 0:
            raise ConfigError("an initial condition needs at least one term", "initial")
        seen = set()
        clean = []
        for i, term in enumerate(terms):
            k, profile = (term.k, term.profile) if isinstance(term, ModeTerm) else term
            if k in seen:
                raise ConfigError(f"fiber index {k} appears twice", f"initial[{i}].k")
            try:
                cone.fiber.check_index(k)
            except IndexError as exc:
                raise ConfigError(str(exc), f"initial[{i}].k") from exc
            seen.add(k)
            clean.append(ModeTerm(int(k), profile))
        # ascending k fixes the summation order
        self.terms = tuple(sorted(clean, key=lambda term: term.k))
        self.cone = cone

    @property
    def support(self):
        return max(term.profile.hi for term in self.terms)

    def term(self, k):
        for term in self.terms:
            if term.k == k:
                return term
        return None

    def moment(self, k, power):
        """int psi_k(s) s^power ds, 0 for absent terms."""
        term = self.term(k)
        if term is None:
            return 0.0
        p = term.profile
        value, _ = adaptive_quadrature(lambda s: p(s) * s ** power, p.lo, p.hi)
        return float(value)

    def l2_norm(self):
        n = self.cone.n
        total = 0.0
        for term in self.terms:
            p = term.profile
            value, _ = adaptive_quadrature(lambda s: p(s) ** 2 * s ** (n - 1), p.lo, p.hi)
            total += float(value)
        return math.sqrt(total)

    def total_mass(self):
        """int phi dV = Vol^{1/2} int psi_1 s^{n-1} ds."""
        return math.sqrt(self.cone.fiber.volume) * self.moment(1, self.cone.n - 1)

    def validate(self):
        mass = self.total_mass()
        if not mass > 0:
            raise HypothesisError(f"initial data must have positive total mass, got {mass:.6g}")
        return mass

    def __call__(self, s, points):
        """phi on the product of radii s [Ns] and fiber points [Nx, d]."""
        s = torch.as_tensor(s, dtype=DTYPE)
        fiber = self.cone.fiber
        out = torch.zeros((s.numel(), points.shape[0]), dtype=DTYPE)
        for term in self.terms:
            v = fiber.eigenfunctions(points, [term.k - 1])[0]
            out += term.profile(s).reshape(-1, 1) * v.reshape(1, -1)
        return out

    def to_list(self):
        return [{"k": term.k, "profile": term.profile.to_dict()} for term in self.terms]

    @classmethod
    def from_list(cls, cone, items):
        terms = []
        for i, item in enumerate(items):
            if "k" not in item or "profile" not in item:
                raise ConfigError("initial terms need 'k' and 'profile'", f"initial[{i}]")
            terms.append((int(item["k"]), RadialProfile.from_dict(item["profile"])))
        return cls(cone, terms)
