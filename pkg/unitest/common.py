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

import contextlib

import torch

from hotcone.core import (
    DTYPE,
    ConeSetup,
    InitialCondition,
    WarpedProductConfig,
    sphere_spectrum,
)
from hotcone.core.warping import Warping
from hotcone.manager import _runtime_config


@contextlib.contextmanager
def numerics(**overrides):
    """Scoped override of the process-wide numerics knobs."""
    _runtime_config.push()
    try:
        _runtime_config.update(overrides)
        yield _runtime_config
    finally:
        _runtime_config.pop()


def warped_config(family="constant", L=1.0, n=3, grid=512, **params):
    return WarpedProductConfig(n, L, Warping(family, L, **params), grid)


def sphere_cone(rho=1.0, count=16, n=3):
    return ConeSetup(n, sphere_spectrum(n - 1, rho, count))


def indicator_data(cone, amplitudes=((1, 1.0), (3, 0.5)), lo=1.0, hi=2.0, kind="indicator"):
    """Initial data sum_k a_k 1_[lo, hi](s) v_k(y)."""
    return InitialCondition.from_list(
        cone,
        [
            {"k": k, "profile": {"kind": kind, "lo": lo, "hi": hi, "amplitude": a}}
            for k, a in amplitudes
        ],
    )


def points(*rows):
    return torch.as_tensor(rows, dtype=DTYPE)
