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

from copy import deepcopy

from hotcone.utils import SingletonMeta


DEFAULT_NUMERICS = {
    # radial eigensolver: number of grid intervals on [0, L]
    "radial_grid": 2048,
    # (colatitude, longitude) resolution of fiber quadrature grids
    "fiber_grid": (64, 128),
    # coarser fiber grid used when tracking hot spots over time
    "track_fiber_grid": (32, 64),
    "quadrature_nodes": 64,
    "max_quadrature_nodes": 4096,
    "quadrature_rtol": 1e-10,
    "rel_tol": 1e-9,
    "degeneracy_rtol": 1e-6,
    "monotone_tol": 1e-8,
    "nodes_per_decade": 512,
    "window_decades": 6,
    "window_R": 4.0,
    "truncation_tol": 1e-10,
    "truncation_cap": 4096,
    "f_zero_tol": 1e-12,
    "epsilon_fraction": 0.05,
    "fit_fraction": 0.6,
    "product_r_stride": 16,
}


class NumericsConfig(metaclass=SingletonMeta):
    def __init__(self):
        self.config = deepcopy(DEFAULT_NUMERICS)
        self.old_configs = []

    def __getitem__(self, key):
        return self.config[key]

    @property
    def radial_grid(self):
        return self.config["radial_grid"]

    @property
    def fiber_grid(self):
        return tuple(self.config["fiber_grid"])

    @property
    def track_fiber_grid(self):
        return tuple(self.config["track_fiber_grid"])

    @property
    def quadrature_nodes(self):
        return self.config["quadrature_nodes"]

    @property
    def rel_tol(self):
        return self.config["rel_tol"]

    @property
    def truncation_tol(self):
        return self.config["truncation_tol"]

    @property
    def truncation_cap(self):
        return self.config["truncation_cap"]

    def update(self, overrides):
        unknown = set(overrides) - set(DEFAULT_NUMERICS)
        if unknown:
            raise KeyError(f"unknown numerics knobs: {sorted(unknown)}")
        self.config.update(overrides)

    def push(self):
        self.old_configs.append(self.config)
        self.config = deepcopy(self.config)

    def pop(self):
        self.config = self.old_configs.pop()

    def reset(self):
        self.config = deepcopy(DEFAULT_NUMERICS)
        self.old_configs = []


_runtime_config = NumericsConfig()
