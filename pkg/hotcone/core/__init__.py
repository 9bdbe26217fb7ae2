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

from .asymptotics import (
    Prediction,
    classify_nu,
    cone_point_law,
    derivative_band_check,
    leading_coefficient,
    normalized_p_gamma,
    predicted_limit,
    psi_functional,
    w_gamma_leading,
)
from .bessel import (
    BesselEval,
    bessel_envelope_ratio,
    bessel_i,
    bessel_i_derivative,
    log_bessel_i,
    log_small_z_ratio,
    small_z_ratio,
)
from .cone import ConeSetup, InitialCondition, ModeTerm, RadialProfile, adaptive_quadrature
from .cone_heat import (
    HeatField,
    TruncationPlan,
    calibrate_gaussian_envelope,
    cone_distance,
    dp_gamma_dr,
    euclidean_heat_kernel,
    heat_kernel,
    log_p_gamma,
    mass_defect,
    p_gamma,
    solve_heat,
    total_mass,
    truncation_order,
    w_gamma_transform,
)
from .const import (
    DTYPE,
    BesselMethod,
    BoundaryCondition,
    ExtremumLabel,
    FiberKind,
    HotspotLocation,
    ModeKind,
    Regime,
    ScenarioKind,
)
from .errors import (
    ConfigError,
    DegeneracyError,
    HypothesisError,
    NoTransverseDataError,
    TruncationError,
)
from .fiber_spectrum import (
    EigenLevel,
    FiberSpectrum,
    build_fiber,
    calibrate_sup_constant,
    calibrate_weyl_constant,
    circle_spectrum,
    eigen_levels,
    gamma_of,
    gammas,
    grid_maximizers,
    orthonormality_defect,
    sphere_spectrum,
    sup_norm_estimate,
    torus_spectrum,
)
from .gamma import gamma, log_gamma
from .hotspot_lab import (
    HotSpot,
    HotspotSet,
    HotspotTrajectory,
    RegimeVerdict,
    TrackPolicy,
    VerdictTolerance,
    classify_regime,
    find_hotspots,
    fit_indices,
    hotspot_set_distance,
    search_window_check,
    track,
)
from .radial_spectrum import (
    CompactMode,
    MonotonicityReport,
    ProductGrid,
    RadialEigenpair,
    WarpedProductConfig,
    check_radial_monotonicity,
    degenerate_pair_mode,
    direct_surface_spectrum,
    fiber_combination_mode,
    locate_hotspots_compact,
    mixed_first_mode,
    nu_sweep,
    rayleigh_quotient,
    richardson_eigenvalues,
    second_neumann_mode,
    separated_spectrum,
    solve_radial,
    tune_degenerate_radius,
)
from .warping import Warping
