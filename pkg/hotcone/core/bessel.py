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

"""Modified Bessel function of the first kind, real order, real argument.

Everything is evaluated in the log domain. The core routine returns the
log of the normalized ratio

    I_gamma(z) / ((z/2)^gamma / Gamma(gamma + 1)),

which is 1 at z = 0, so the heat kernel can assemble the removable
singularity at the cone point without dividing by powers of r.
"""
import math
from dataclasses import dataclass

import numpy as np
import torch

from .const import (
    ASYMPTOTIC_MIN_Z,
    ASYMPTOTIC_ORDER_FACTOR,
    DTYPE,
    SERIES_MAX_RATIO,
    BesselMethod,
)
from .gamma import log_gamma

_METHOD_CODES = {
    0: BesselMethod.SERIES,
    1: BesselMethod.INTEGRAL,
    2: BesselMethod.UNIFORM_ASYMPTOTIC,
}
_MAX_ASYMPTOTIC_TERMS = 200
# upper bound on rows * terms of one series evaluation block
_SERIES_CHUNK = 1 << 22
_LOG_PI = math.log(math.pi)


@dataclass(frozen=True)
class BesselEval:
    order: float
    argument: float
    value: float
    log_value: float
    method_tag: BesselMethod


def _check_inputs(gamma, z):
    if torch.any(torch.isnan(gamma)) or torch.any(torch.isnan(z)):
        raise ValueError("Bessel evaluation got NaN input")
    if torch.any(torch.isinf(gamma)) or torch.any(torch.isinf(z)):
        raise ValueError("Bessel evaluation needs finite inputs")
    if torch.any(gamma < 0):
        raise ValueError("negative Bessel order")
    if torch.any(z < 0):
        raise ValueError("negative Bessel argument")


def select_method(gamma, z):
    """Method code per element: 0 series, 1 integral, 2 asymptotic."""
    series = z <= torch.clamp(SERIES_MAX_RATIO * (1.0 + gamma), min=ASYMPTOTIC_MIN_Z)
    asymptotic = (~series) & (z >= ASYMPTOTIC_ORDER_FACTOR * gamma * gamma)
    code = torch.ones_like(z, dtype=torch.int64)
    code = torch.where(series, torch.zeros_like(code), code)
    code = torch.where(asymptotic, torch.full_like(code, 2), code)
    return code


def _log_series_ratio(gamma, z):
    """log of sum_j (z^2/4)^j Gamma(gamma+1) / (j! Gamma(gamma+j+1))."""
    if z.numel() == 0:
        return z.clone()
    z_max = float(torch.max(z))
    n_terms = int(0.5 * z_max + 14.0 * math.sqrt(z_max) + 40)
    rows = max(1, _SERIES_CHUNK // n_terms)
    if z.numel() > rows:
        return torch.cat(
            [
                _log_series_ratio(gamma[i : i + rows], z[i : i + rows])
                for i in range(0, z.numel(), rows)
            ]
        )
    j = torch.arange(n_terms, dtype=DTYPE)
    log_quarter_z2 = 2.0 * torch.log(z / 2.0)
    jl = j.unsqueeze(0)
    power = torch.where(
        jl == 0,
        torch.zeros(1, dtype=DTYPE),
        jl * log_quarter_z2.unsqueeze(1),
    )
    g = gamma.unsqueeze(1)
    terms = power - log_gamma(jl + 1.0) - log_gamma(g + jl + 1.0) + log_gamma(g + 1.0)
    return torch.logsumexp(terms, dim=1)


def _log_integral(gamma, z):
    """log I_gamma(z) from the Poisson integral over [0, pi]."""
    if z.numel() == 0:
        return z.clone()
    z_max = float(torch.max(z))
    n_nodes = min(64 + 16 * int(math.ceil(math.sqrt(z_max))), 640)
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    theta = torch.as_tensor(0.5 * math.pi * (x + 1.0), dtype=DTYPE)
    log_w = torch.as_tensor(np.log(0.5 * math.pi * w), dtype=DTYPE)
    g = gamma.unsqueeze(1)
    zz = z.unsqueeze(1)
    integrand = (
        log_w
        + 2.0 * g * torch.log(torch.sin(theta))
        + zz * (torch.cos(theta) - 1.0)
    )
    log_int = torch.logsumexp(integrand, dim=1)
    return (
        gamma * torch.log(z / 2.0)
        - 0.5 * _LOG_PI
        - log_gamma(gamma + 0.5)
        + z
        + log_int
    )


def _log_asymptotic(gamma, z):
    """log I_gamma(z) from the large-argument expansion (z >= 2 gamma^2)."""
    if z.numel() == 0:
        return z.clone()
    mu = 4.0 * gamma * gamma
    total = torch.ones_like(z)
    term = torch.ones_like(z)
    active = torch.ones_like(z, dtype=torch.bool)
    for k in range(1, _MAX_ASYMPTOTIC_TERMS + 1):
        new_term = -term * (mu - (2 * k - 1) ** 2) / (8.0 * k * z)
        # stop each element at its smallest term
        active = active & (torch.abs(new_term) < torch.abs(term))
        term = torch.where(active, new_term, term)
        total = torch.where(active, total + new_term, total)
        active = active & (torch.abs(new_term) > 1e-17 * torch.abs(total))
        if not torch.any(active):
            break
    return z - 0.5 * torch.log(2.0 * math.pi * z) + torch.log(total)


def _prefactor(gamma, z):
    """log((z/2)^gamma / Gamma(gamma + 1)), with 0^0 = 1."""
    power = torch.where(
        gamma == 0, torch.zeros_like(z), gamma * torch.log(z / 2.0)
    )
    return power - log_gamma(gamma + 1.0)


def _log_ratio_and_method(gamma, z):
    gamma, z = torch.broadcast_tensors(
        torch.as_tensor(gamma, dtype=DTYPE), torch.as_tensor(z, dtype=DTYPE)
    )
    _check_inputs(gamma, z)
    shape = z.shape
    gamma = gamma.reshape(-1)
    z = z.reshape(-1)
    code = select_method(gamma, z)
    log_ratio = torch.zeros_like(z)

    mask = code == 0
    if torch.any(mask):
        log_ratio[mask] = _log_series_ratio(gamma[mask], z[mask])
    mask = code == 1
    if torch.any(mask):
        g, zz = gamma[mask], z[mask]
        log_ratio[mask] = _log_integral(g, zz) - _prefactor(g, zz)
    mask = code == 2
    if torch.any(mask):
        g, zz = gamma[mask], z[mask]
        log_ratio[mask] = _log_asymptotic(g, zz) - _prefactor(g, zz)
    return log_ratio.reshape(shape), code.reshape(shape), gamma.reshape(shape), z.reshape(shape)


def log_small_z_ratio(gamma, z):
    """Tensor version of `small_z_ratio` in the log domain; 0 at z = 0."""
    log_ratio, _, _, _ = _log_ratio_and_method(gamma, z)
    return log_ratio


def log_bessel_i(gamma, z):
    """Elementwise log I_gamma(z); -inf where the value is 0."""
    log_ratio, _, gamma, z = _log_ratio_and_method(gamma, z)
    return log_ratio + _prefactor(gamma, z)


def bessel_i(gamma, z):
    """Evaluate I_gamma(z) for scalar gamma >= 0, z >= 0.
    Returns:
        BesselEval with the value, its natural log and the method used.
    """
    log_ratio, code, g, zz = _log_ratio_and_method(float(gamma), float(z))
    log_value = float(log_ratio + _prefactor(g, zz))
    return BesselEval(
        order=float(gamma),
        argument=float(z),
        value=math.exp(log_value) if log_value < 709.7 else math.inf,
        log_value=log_value,
        method_tag=_METHOD_CODES[int(code)],
    )


def bessel_i_derivative(gamma, z):
    """d/dz I_gamma(z) = I_{gamma+1}(z) + (gamma / z) I_gamma(z)."""
    gamma = float(gamma)
    z = float(z)
    if z == 0.0:
        if 0.0 < gamma < 1.0:
            raise ValueError(f"derivative of I_{gamma} is unbounded at z = 0")
        return 0.5 if gamma == 1.0 else 0.0
    if z < 0.0:
        raise ValueError("negative Bessel argument")
    upper = bessel_i(gamma + 1.0, z)
    same = bessel_i(gamma, z)
    return upper.value + (gamma / z) * same.value


def small_z_ratio(gamma, z):
    """I_gamma(z) / (z^gamma / (2^gamma Gamma(gamma + 1))); tends to 1 as z -> 0."""
    return math.exp(float(log_small_z_ratio(float(gamma), float(z))))


def bessel_envelope_ratio(gamma, z):
    """I_gamma(z) Gamma(gamma) / (z^gamma e^z); never exceeds 1 for gamma > 0."""
    gamma = float(gamma)
    z = float(z)
    if gamma == 0.0:
        return 0.0
    if z == 0.0:
        # limit of the ratio as z -> 0+
        return math.exp(-math.log(gamma) - gamma * math.log(2.0))
    log_i = float(log_bessel_i(gamma, z))
    return math.exp(log_i + log_gamma(gamma) - gamma * math.log(z) - z)
