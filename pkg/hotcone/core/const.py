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

from enum import Enum

import torch

DTYPE = torch.float64


class BoundaryCondition(Enum):
    NEUMANN = "neumann"
    # Dirichlet at r = 0, Neumann at r = L
    MIXED = "mixed"


class ModeKind(Enum):
    RADIAL = "radial"
    FIBER = "fiber"
    DEGENERATE_COMBINATION = "degenerate-combination"
    FIBER_COMBINATION = "fiber-combination"


class BesselMethod(Enum):
    SERIES = "series"
    INTEGRAL = "integral"
    UNIFORM_ASYMPTOTIC = "uniform-asymptotic"


class FiberKind(Enum):
    SPHERE = "sphere"
    CIRCLE = "circle"
    TORUS = "torus"


class Regime(Enum):
    # nu_2 >= 2n: the hot spot sits at the cone point
    CONE_POINT = 1
    # n - 1 < nu_2 < 2n: drifts into the cone point
    INWARD = 2
    # nu_2 = n - 1: converges to H_infinity
    CRITICAL = 3
    # nu_2 < n - 1: escapes to infinity
    OUTWARD = 4


class HotspotLocation(Enum):
    CONE_POINT = "cone-point"
    POINT = "point"
    FIBER = "fiber"


class ExtremumLabel(Enum):
    BOUNDARY = "boundary"
    INTERIOR = "interior"


class ScenarioKind(Enum):
    COMPACT_MODES = "compact-modes"
    CONE_FIELD = "cone-field"
    CONE_TRACK = "cone-track"
    BESSEL_TABLE = "bessel-table"
    VERIFY_ALL = "verify-all"


# Bessel method switchover, see unitest/test_bessel.py for the sweep.
SERIES_MAX_RATIO = 12.0
ASYMPTOTIC_MIN_Z = 40.0
ASYMPTOTIC_ORDER_FACTOR = 2.0
# I_gamma(z) <= z^gamma e^z / Gamma(gamma) needs gamma 2^gamma >= 1 (gamma >= 0.6412);
# below that the z -> 0 limit 1 / (gamma 2^gamma) of the ratio exceeds 1
ENVELOPE_MIN_ORDER = 0.65

# exit codes of the command line runner
EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_HYPOTHESIS_VIOLATION = 3
EXIT_VERDICT_FAILURE = 4
