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

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ConfigError

FAMILIES = ("constant", "affine", "polynomial", "exponential", "cosh", "sech", "tabulated")


class Warping(object):
    """Warping function f of a warped product dr^2 + f(r)^2 h.

    Families are evaluated at the physical coordinate x = r + offset, where
    r in [0, L] is the solver coordinate. `scale` multiplies f, which is the
    metric scaling h -> c^2 h of the fiber.
    """

    def __init__(self, family, length, offset=0.0, scale=1.0, **params):
        if family not in FAMILIES:
            raise ConfigError(f"unknown warping family '{family}'", "warping.family")
        if not scale > 0:
            raise ConfigError(f"scale must be positive, got {scale}", "warping.scale")
        self.family = family
        self.length = float(length)
        self.offset = float(offset)
        self.scale = float(scale)
        self.params = dict(params)
        self._spline = None
        if family == "tabulated":
            xs = np.asarray(params.get("r"), dtype=np.float64)
            fs = np.asarray(params.get("f"), dtype=np.float64)
            if xs.ndim != 1 or xs.shape != fs.shape or xs.size < 4:
                raise ConfigError(
                    "tabulated warping needs matching 'r' and 'f' samples (>= 4)",
                    "warping",
                )
            self._spline = CubicSpline(xs, fs)
        self._c = float(params.get("c", 1.0))
        self._center = float(params.get("center", self.offset + 0.5 * self.length))

    def _x(self, r):
        return np.asarray(r, dtype=np.float64) + self.offset

    def __call__(self, r):
        x = self._x(r)
        c = self._c
        if self.family == "constant":
            f = np.full_like(x, float(self.params.get("value", 1.0)))
        elif self.family == "affine":
            f = 1.0 + c * x
        elif self.family == "polynomial":
            f = np.polynomial.polynomial.polyval(x, self.params.get("coefficients", [1.0]))
        elif self.family == "exponential":
            f = np.exp(c * x)
        elif self.family == "cosh":
            f = np.cosh(c * (x - self._center))
        elif self.family == "sech":
            f = 1.0 / np.cosh(c * (x - self._center))
        else:
            f = self._spline(x)
        return self.scale * f

    def derivative(self, r):
        x = self._x(r)
        c = self._c
        if self.family == "constant":
            df = np.zeros_like(x)
        elif self.family == "affine":
            df = np.full_like(x, c)
        elif self.family == "polynomial":
            coeffs = np.polynomial.polynomial.polyder(self.params.get("coefficients", [1.0]))
            df = np.polynomial.polynomial.polyval(x, coeffs)
        elif self.family == "exponential":
            df = c * np.exp(c * x)
        elif self.family == "cosh":
            df = c * np.sinh(c * (x - self._center))
        elif self.family == "sech":
            u = c * (x - self._center)
            df = -c * np.tanh(u) / np.cosh(u)
        else:
            df = self._spline(x, 1)
        return self.scale * df

    def is_monotone(self, r):
        """+1 nondecreasing, -1 nonincreasing, 0 otherwise (on samples r)."""
        df = self.derivative(r)
        if np.all(df >= 0):
            return 1
        if np.all(df <= 0):
            return -1
        return 0

    def is_constant(self, r):
        f = self(r)
        return bool(np.ptp(f) <= 1e-14 * np.max(np.abs(f)))

    def to_dict(self):
        out = {"family": self.family, "offset": self.offset, "scale": self.scale}
        out.update(self.params)
        return out

    @classmethod
    def from_dict(cls, desc, length):
        desc = dict(desc)
        family = desc.pop("family", "constant")
        offset = desc.pop("offset", 0.0)
        scale = desc.pop("scale", 1.0)
        return cls(family, length, offset=offset, scale=scale, **desc)
