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

"""Scenario handlers. Each writes its artifacts under its own directory and
returns the exit status it contributes to the run."""
import math
import os
from dataclasses import replace

import numpy as np
import torch

from hotcone.core import (
    DTYPE,
    BoundaryCondition,
    ConeSetup,
    ConfigError,
    InitialCondition,
    NoTransverseDataError,
    TrackPolicy,
    VerdictTolerance,
    WarpedProductConfig,
    bessel_envelope_ratio,
    bessel_i,
    build_fiber,
    calibrate_gaussian_envelope,
    calibrate_sup_constant,
    calibrate_weyl_constant,
    check_radial_monotonicity,
    classify_regime,
    cone_distance,
    degenerate_pair_mode,
    direct_surface_spectrum,
    euclidean_heat_kernel,
    fiber_combination_mode,
    heat_kernel,
    locate_hotspots_compact,
    log_bessel_i,
    mass_defect,
    mixed_first_mode,
    predicted_limit,
    richardson_eigenvalues,
    second_neumann_mode,
    separated_spectrum,
    solve_heat,
    sphere_spectrum,
    track,
    truncation_order,
    tune_degenerate_radius,
)
from hotcone.core.const import (
    ENVELOPE_MIN_ORDER,
    EXIT_HYPOTHESIS_VIOLATION,
    EXIT_OK,
    EXIT_VERDICT_FAILURE,
)
from hotcone.core.warping import Warping
from hotcone.profiler import recorder
from hotcone.utils import log_scenario

from .config import schedule_times
from .writers import (
    BESSEL_COLUMNS,
    FIELD_COLUMNS,
    RADIAL_COLUMNS,
    TRACK_COLUMNS,
    bessel_rows,
    field_rows,
    radial_rows,
    track_rows,
    write_csv,
    write_json,
)

# separated and direct n = 2 spectra agree to this relative gap
CROSS_CHECK_RTOL = 1e-3


class ScenarioContext(object):
    """Per-scenario output directory, seeded generator and thread budget."""

    def __init__(self, scenario, out_dir, seed, threads):
        self.scenario = scenario
        self.name = scenario["name"]
        self.directory = os.path.join(out_dir, self.name)
        self.rng = np.random.default_rng(seed)
        self.threads = threads

    def path(self, filename):
        return os.path.join(self.directory, filename)

    def csv(self, filename, columns, rows):
        recorder.record_artifact(self.name, write_csv(self.path(filename), columns, rows))

    def json(self, filename, obj):
        recorder.record_artifact(self.name, write_json(self.path(filename), obj))

    def verdict(self, name, verdict):
        recorder.record_verdict(self.name, name, verdict)

    def constant(self, name, value):
        recorder.record_constant(self.name, name, value)


def _cone_and_data(sc):
    n = int(sc["n"])
    cone = ConeSetup(n, build_fiber(sc["fiber"], n))
    return cone, InitialCondition.from_list(cone, sc["initial"])


def _extremum_dict(extremum):
    return {
        "kind": extremum.kind,
        "r": extremum.r,
        "x": extremum.x,
        "value": extremum.value,
        "label": extremum.label.value,
    }


# ---------------------------------------------------------------------------
# compact-modes
# ---------------------------------------------------------------------------


def run_compact_modes(ctx):
    sc = ctx.scenario
    config = WarpedProductConfig.from_dict(sc)
    fiber_desc = dict(sc["fiber"])
    if sc["tune_radius"]:
        rho = tune_degenerate_radius(config, fiber_desc.get("kind", "sphere"))
        fiber_desc["rho"] = rho
        ctx.constant("tuned_rho", rho)
        log_scenario(f"tuned fiber radius rho={rho:.15g}")
    fiber = build_fiber(fiber_desc, config.n)
    report = {"config": config.to_dict(), "fiber": fiber.describe()}
    status = EXIT_OK

    for check in sc["checks"]:
        monotonicity = None
        if check == "second-neumann":
            mode = second_neumann_mode(config, fiber)
            monotonicity = check_radial_monotonicity(mode.parts[0][0], config)
        elif check == "mixed":
            mode, monotonicity = mixed_first_mode(config)
        elif check == "degenerate":
            mode = degenerate_pair_mode(config, fiber, float(sc["r0"]))
        elif check == "fiber-combination":
            multiplicity = fiber.levels[1].multiplicity
            coefficients = sc["coefficients"] or [1.0] * multiplicity
            mode = fiber_combination_mode(config, fiber, coefficients)
        else:
            count = int(sc["cross_check_count"])
            separated = separated_spectrum(config, fiber, count)
            direct = direct_surface_spectrum(config, float(fiber_desc.get("rho", 1.0)), count)
            gaps = np.abs(separated - direct) / np.maximum(np.abs(direct), 1.0)
            passed = bool(np.max(gaps) <= CROSS_CHECK_RTOL)
            entry = {
                "separated": separated.tolist(),
                "direct": direct.tolist(),
                "max_relative_gap": float(np.max(gaps)),
                "tolerance": CROSS_CHECK_RTOL,
                "passed": passed,
            }
            ctx.verdict("cross-check", entry)
            report[check] = entry
            if not passed:
                status = EXIT_VERDICT_FAILURE
            continue

        entry = {
            "mode": mode.summary(),
            "extrema": [_extremum_dict(e) for e in locate_hotspots_compact(mode, fiber)],
        }
        if monotonicity is not None:
            entry["monotonicity"] = monotonicity.to_dict()
        report[check] = entry
        ctx.csv(f"{check}-radial.csv", RADIAL_COLUMNS, radial_rows(mode.parts[0][0]))
        log_scenario(f"{check}: eigenvalue {mode.eigenvalue:.12g} ({mode.kind.value})")

    ctx.json("report.json", report)
    return status


# ---------------------------------------------------------------------------
# cone-field
# ---------------------------------------------------------------------------


def _sample_points(rng, grid, count):
    return grid.points[torch.as_tensor(rng.integers(0, grid.points.shape[0], count))]


def _envelope_samples(ctx, fiber, r_max, times, count=64):
    grid = fiber.grid((8, 16))
    rng = ctx.rng
    return {
        "r": torch.as_tensor(rng.uniform(0.0, r_max, count), dtype=DTYPE),
        "s": torch.as_tensor(rng.uniform(0.0, r_max, count), dtype=DTYPE),
        "x": _sample_points(rng, grid, count),
        "y": _sample_points(rng, grid, count),
        "t": torch.as_tensor(rng.choice(times, count), dtype=DTYPE),
    }


def run_cone_field(ctx):
    sc = ctx.scenario
    cone, phi = _cone_and_data(sc)
    mass = phi.validate()
    ctx.constant("total_mass", mass)
    fiber = cone.fiber
    times = [float(t) for t in sc["times"]]
    r_max = float(sc["radii"]["R"])
    radii = torch.linspace(0.0, r_max, int(sc["radii"]["count"]), dtype=DTYPE)
    grid = fiber.grid(tuple(sc["fiber_resolution"]))
    t_min = times[0]
    plan = truncation_order(cone, phi, max(r_max / math.sqrt(t_min), 1e-3), t_min)
    recorder.record_plan(ctx.name, plan)

    rows = []
    for t in times:
        rows.extend(field_rows(solve_heat(cone, phi, t, radii, grid.points, plan)))
        if phi.term(1) is not None:
            ctx.constant(f"mass_defect[t={t:g}]", mass_defect(cone, phi, t))
    ctx.csv("field.csv", FIELD_COLUMNS, rows)

    if sc["calibrate"]:
        kernel_plan = truncation_order(
            cone, None, max(r_max / math.sqrt(t_min), 1e-3), t_min, support=r_max
        )
        samples = _envelope_samples(ctx, fiber, r_max, times)
        for c2, c1 in calibrate_gaussian_envelope(cone, samples, kernel_plan).items():
            ctx.constant(f"gaussian_C1[C2={c2:g}]", c1)
        ctx.constant("weyl_constant", calibrate_weyl_constant(fiber))
        ctx.constant("sup_constant", calibrate_sup_constant(fiber))

    try:
        prediction = predicted_limit(cone, phi, max_level=plan.K)
    except NoTransverseDataError as exc:
        log_scenario(f"no prediction: {exc}")
        ctx.json("prediction.json", {"error": str(exc)})
        return EXIT_HYPOTHESIS_VIOLATION
    ctx.json("prediction.json", prediction.to_dict())
    return EXIT_OK


# ---------------------------------------------------------------------------
# cone-track
# ---------------------------------------------------------------------------


def _verdict_tolerance(desc):
    desc = dict(desc)
    if desc.get("infinite"):
        return VerdictTolerance.infinite()
    if "radius_ratio" in desc:
        desc["radius_ratio"] = tuple(desc["radius_ratio"])
    try:
        return VerdictTolerance(**desc)
    except TypeError as exc:
        raise ConfigError(str(exc), "tolerance") from exc


def run_cone_track(ctx):
    sc = ctx.scenario
    cone, phi = _cone_and_data(sc)
    ctx.constant("total_mass", phi.validate())
    schedule = schedule_times(sc["schedule"])
    policy_desc = dict(sc["policy"])
    if "fiber_resolution" in policy_desc:
        policy_desc["fiber_resolution"] = tuple(policy_desc["fiber_resolution"])
    try:
        policy = TrackPolicy(**policy_desc)
    except TypeError as exc:
        raise ConfigError(str(exc), "policy") from exc
    tol = _verdict_tolerance(sc["tolerance"])

    plan = truncation_order(cone, phi, policy.resolve().window_R, schedule[0])
    recorder.record_plan(ctx.name, plan)
    try:
        prediction = predicted_limit(cone, phi, max_level=plan.K)
    except NoTransverseDataError as exc:
        # the trajectory is still reported, only classification is skipped
        log_scenario(f"classification skipped: {exc}")
        traj = track(cone, phi, schedule, policy, threads=ctx.threads, plan=plan)
        ctx.csv("trajectory.csv", TRACK_COLUMNS, track_rows(traj))
        ctx.json("verdict.json", {"error": str(exc), "classified": False})
        return EXIT_HYPOTHESIS_VIOLATION

    traj = track(cone, phi, schedule, policy, threads=ctx.threads, plan=plan, pred=prediction)
    ctx.csv("trajectory.csv", TRACK_COLUMNS, track_rows(traj, prediction))
    fit_window = sc["fit_window"]
    verdict = classify_regime(
        traj, prediction, tuple(fit_window) if fit_window is not None else None, tol
    )
    ctx.constant("alpha_hat", verdict.alpha_hat)
    ctx.constant("R_hat", verdict.R_hat)
    ctx.verdict("regime", verdict)
    ctx.json("verdict.json", verdict.to_dict())
    return EXIT_OK if verdict.passed else EXIT_VERDICT_FAILURE


# ---------------------------------------------------------------------------
# bessel-table
# ---------------------------------------------------------------------------


def run_bessel_table(ctx):
    sc = ctx.scenario
    evaluations, envelope = [], []
    for gamma in sc["orders"]:
        for z in sc["arguments"]:
            evaluations.append(bessel_i(gamma, z))
            envelope.append(bessel_envelope_ratio(gamma, z) if gamma > 0 else None)
    ctx.csv("bessel.csv", BESSEL_COLUMNS, bessel_rows(evaluations, envelope))
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify-all
# ---------------------------------------------------------------------------


def _check(name, measured, tolerance):
    return {"check": name, "measured": float(measured), "tolerance": tolerance, "passed": bool(measured <= tolerance)}


def _bessel_checks(ctx, count):
    gamma = torch.as_tensor(ctx.rng.uniform(ENVELOPE_MIN_ORDER, 60.0, count), dtype=DTYPE)
    z = torch.as_tensor(ctx.rng.uniform(0.0, 700.0, count), dtype=DTYPE)
    z = torch.clamp(z, min=1e-6)
    log_i = log_bessel_i(gamma, z)
    # log of I_gamma(z) Gamma(gamma) / (z^gamma e^z), must stay <= 0
    log_envelope = log_i + torch.lgamma(gamma) - gamma * torch.log(z) - z
    monotone = log_bessel_i(gamma + 0.5, z) - log_i
    return [
        _check("bessel_envelope", max(float(torch.max(log_envelope)), 0.0), 0.0),
        _check("bessel_order_monotone", max(float(torch.max(monotone)), 0.0), 0.0),
    ]


def _radial_checks():
    checks = []
    flat = WarpedProductConfig(3, math.pi, Warping("constant", math.pi))
    j = np.arange(1, 5)
    for bc, exact in (
        (BoundaryCondition.NEUMANN, (j - 1.0) ** 2),
        (BoundaryCondition.MIXED, (j - 0.5) ** 2),
    ):
        refined, _, _ = richardson_eigenvalues(flat, 0.0, bc, j.size)
        checks.append(_check(f"radial_oracle_{bc.value}", np.max(np.abs(refined - exact)), 1e-6))
    product = WarpedProductConfig(3, 1.0, Warping("constant", 1.0))
    nu = float(sphere_spectrum(2, 1.0, 4).eigenvalues[1])
    refined, _, _ = richardson_eigenvalues(product, nu, BoundaryCondition.NEUMANN, 3)
    exact = (j[:3] - 1.0) ** 2 * math.pi ** 2 + nu
    checks.append(_check("trivial_product_law", np.max(np.abs(refined - exact) / exact), 1e-6))
    return checks


def _euclidean_checks(ctx, count):
    cone = ConeSetup(3, sphere_spectrum(2, 1.0, 16))
    t_min, r_max = 0.1, 5.0
    plan = truncation_order(cone, None, r_max / math.sqrt(t_min), t_min, tol=1e-14, support=r_max)
    grid = cone.fiber.grid((16, 32))
    rng = ctx.rng
    r = torch.as_tensor(rng.uniform(0.0, r_max, count), dtype=DTYPE)
    s = torch.as_tensor(rng.uniform(0.0, r_max, count), dtype=DTYPE)
    t = torch.as_tensor(10.0 ** rng.uniform(-1.0, 2.0, count), dtype=DTYPE)
    x, y = _sample_points(rng, grid, count), _sample_points(rng, grid, count)
    p = heat_kernel(cone, (r, x), (s, y), t, plan)
    d = cone_distance(cone, (r, x), (s, y))
    exact = euclidean_heat_kernel(d, t, 3)
    error = torch.abs(p - exact)
    # relative error only where exp(-d^2/4t) >= 1e-4, elsewhere against the peak (4 pi t)^{-3/2}
    visible = torch.exp(-(d ** 2) / (4.0 * t)) >= 1e-4
    rel = error[visible] / exact[visible]
    scaled = error * (4.0 * math.pi * t) ** 1.5
    doubled = heat_kernel(cone, (r, x), (s, y), t, replace(plan, K=2 * plan.K))
    checks = [
        _check("euclidean_kernel", float(torch.max(rel)) if rel.numel() else 0.0, 1e-6),
        _check("euclidean_kernel_peak_scaled", float(torch.max(scaled)), 1e-6),
        _check(
            "truncation_soundness",
            float(torch.max(torch.abs(doubled - p))),
            # roundoff of the longer sum on top of the certified tail
            plan.certified_bound + 1e-13 * float(torch.max(torch.abs(p))),
        ),
    ]
    phi = InitialCondition.from_list(
        cone, [{"k": 1, "profile": {"kind": "bump", "lo": 0.5, "hi": 1.5}}]
    )
    for t_mass in (1.0, 10.0, 100.0):
        checks.append(_check(f"mass_conservation[t={t_mass:g}]", mass_defect(cone, phi, t_mass), 1e-6))
    return checks


def run_verify_all(ctx):
    count = int(ctx.scenario["samples"])
    checks = _bessel_checks(ctx, count) + _radial_checks() + _euclidean_checks(ctx, count)
    for entry in checks:
        ctx.verdict(entry["check"], entry)
        log_scenario(
            f"{entry['check']}: {entry['measured']:.3e} (tol {entry['tolerance']:.1e}) "
            f"{'pass' if entry['passed'] else 'FAIL'}"
        )
    ctx.csv(
        "checks.csv",
        ("check", "measured", "tolerance", "passed"),
        ((c["check"], c["measured"], c["tolerance"], c["passed"]) for c in checks),
    )
    return EXIT_OK if all(c["passed"] for c in checks) else EXIT_VERDICT_FAILURE


HANDLERS = {
    "compact-modes": run_compact_modes,
    "cone-field": run_cone_field,
    "cone-track": run_cone_track,
    "bessel-table": run_bessel_table,
    "verify-all": run_verify_all,
}
