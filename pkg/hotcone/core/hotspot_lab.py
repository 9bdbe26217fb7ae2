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

"""Hot-spot sets H(t) of computed heat flows and their long-time regimes."""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import torch
from scipy import optimize

from hotcone.manager import _runtime_config
from hotcone.utils import log_scenario, logger

from .asymptotics import predicted_limit
from .cone_heat import solve_heat, truncation_order
from .const import DTYPE, HotspotLocation, Regime
from .errors import HypothesisError

# fiber rows flatter than this (relative to max u) are reported as whole fibers
_FLAT_FIBER_RTOL = 1e-12
# fitted exponents closer to 0 than this count as a constant radius
_SLOPE_ZERO = 0.05
# lowest radial node relative to the predicted hot-spot radius R_inf t^alpha
_FLOOR_MARGIN = 0.05

MIN_FIT_TIMES = 4
MIN_FIT_DECADES = 2.0


@dataclass
class HotSpot:
    r: float
    # fiber chart point, None for the cone point and for whole fibers
    x: list
    value: float
    location: HotspotLocation


@dataclass
class HotspotSet:
    t: float
    max_value: float
    spots: list

    @property
    def primary(self):
        return self.spots[0]

    @property
    def r_sup(self):
        return max(spot.r for spot in self.spots)

    @property
    def r_inf(self):
        return min(spot.r for spot in self.spots)


def _dedupe(spots, fiber):
    kept = []
    for spot in sorted(spots, key=lambda s: -s.value):
        duplicate = False
        for other in kept:
            if abs(spot.r - other.r) > 1e-9 * (1.0 + other.r) or spot.location != other.location:
                continue
            if spot.x is None or other.x is None:
                duplicate = True
                break
            gap = fiber.distance(
                torch.as_tensor([spot.x], dtype=DTYPE), torch.as_tensor([other.x], dtype=DTYPE)
            )
            if float(gap[0]) <= 1e-7:
                duplicate = True
                break
        if not duplicate:
            kept.append(spot)
    return kept


def find_hotspots(field_, rel_tol=None):
    """Maximizers of u within the band u >= max u - rel_tol |max u|.

    Candidate radii are the + to - sign changes of du/dr along the fiber
    argmax, the cone point when du/dr <= 0 next to it, and the grid
    maximum. Each candidate is refined in the fiber, then in r (root of
    du/dr or golden section), then in the fiber again. With rel_tol = 0
    only the exact grid maximizers are returned, unrefined.
    """
    rel_tol = _runtime_config.rel_tol if rel_tol is None else rel_tol
    u, du = field_.u, field_.du_dr
    if u is None or u.numel() == 0:
        raise ValueError("cannot locate hot spots of an empty field")
    fiber = field_.cone.fiber
    r = field_.r
    points = field_.points
    n_r, n_x = u.shape
    umax = float(torch.max(u))

    def spot_at(i, j):
        if float(r[i]) == 0.0:
            return HotSpot(0.0, None, float(u[i, j]), HotspotLocation.CONE_POINT)
        return HotSpot(float(r[i]), points[j].tolist(), float(u[i, j]), HotspotLocation.POINT)

    if rel_tol == 0:
        hits = torch.nonzero(u == umax).tolist()
        return HotspotSet(field_.t, umax, _dedupe([spot_at(i, j) for i, j in hits], fiber))

    band = umax - rel_tol * abs(umax)
    row_max, row_arg = torch.max(u, dim=1)
    d = du[torch.arange(n_r), row_arg]

    def u_at(rho, pts):
        return field_.evaluate([rho], pts)[0]

    def du_at(rho, pts):
        return float(field_.evaluate([rho], pts, derivative=True)[0, 0])

    def refine_fiber(rho, start):
        row = u_at(rho, points)
        if float(torch.max(row) - torch.min(row)) <= _FLAT_FIBER_RTOL * abs(umax):
            return None, float(torch.max(row))
        if start is None:
            start = points[int(torch.argmax(row))]
        point, value = fiber.refine_max(lambda pts: u_at(rho, pts), start)
        return point, value

    def finish(rho, start):
        point, value = refine_fiber(rho, start)
        if point is None:
            return HotSpot(rho, None, value, HotspotLocation.FIBER)
        return HotSpot(rho, point.tolist(), value, HotspotLocation.POINT)

    spots = []
    brackets = set()
    # sign changes of du/dr along the fiber argmax
    for i in range(n_r - 1):
        if not (d[i] > 0 and d[i + 1] <= 0):
            continue
        if max(float(row_max[i]), float(row_max[i + 1])) < band:
            continue
        brackets.update((i, i + 1))
        lo, hi = float(r[i]), float(r[i + 1])
        x1, _ = refine_fiber(hi, points[int(row_arg[i + 1])])
        pts = points[:1] if x1 is None else x1.reshape(1, -1)
        g_lo, g_hi = du_at(lo, pts), du_at(hi, pts)
        if lo > 0 and g_lo > 0 >= g_hi:
            rho = optimize.brentq(lambda q: du_at(q, pts), lo, hi, xtol=1e-14 * hi, rtol=1e-13)
        else:
            rho = hi if float(u_at(hi, pts)[0]) >= float(u_at(lo, pts)[0]) else lo
        spots.append(finish(rho, x1))

    if float(r[0]) == 0.0 and n_r > 1 and d[1] <= 0 and float(row_max[0]) >= band:
        spots.append(HotSpot(0.0, None, float(row_max[0]), HotspotLocation.CONE_POINT))

    flat = int(torch.argmax(u))
    i, j = divmod(flat, n_x)
    if float(r[i]) == 0.0:
        spots.append(HotSpot(0.0, None, umax, HotspotLocation.CONE_POINT))
    elif i in brackets:
        pass
    elif 0 < i < n_r - 1:
        x1, _ = refine_fiber(float(r[i]), points[j])
        pts = points[:1] if x1 is None else x1.reshape(1, -1)
        try:
            res = optimize.minimize_scalar(
                lambda q: -float(u_at(q, pts)[0]),
                bracket=(float(r[i - 1]), float(r[i]), float(r[i + 1])),
                method="golden",
                options={"xtol": 1e-12},
            )
            rho = float(res.x)
        except ValueError:
            rho = float(r[i])
        spots.append(finish(rho, x1))
    else:
        # the grid maximum sits on the outer edge of the search window
        logger.warning(f"t={field_.t:.4g}: grid maximum on the window edge r={float(r[i]):.6g}")
        spots.append(spot_at(i, j))

    best = max(spot.value for spot in spots)
    keep = [spot for spot in spots if spot.value >= best - rel_tol * abs(best)]
    return HotspotSet(field_.t, best, _dedupe(keep, fiber))


@dataclass
class TrackPolicy:
    window_R: float = None
    nodes_per_decade: int = None
    window_decades: int = None
    fiber_resolution: tuple = None
    rel_tol: float = None

    def resolve(self):
        return TrackPolicy(
            window_R=self.window_R or _runtime_config["window_R"],
            nodes_per_decade=self.nodes_per_decade or _runtime_config["nodes_per_decade"],
            window_decades=self.window_decades or _runtime_config["window_decades"],
            fiber_resolution=tuple(self.fiber_resolution or _runtime_config.track_fiber_grid),
            rel_tol=_runtime_config.rel_tol if self.rel_tol is None else self.rel_tol,
        )

    def radii(self, t, floor=None):
        """0 followed by log-spaced nodes up to window_R t^{1/2}.

        The lowest positive node is window_decades below the top, or `floor`
        when that is smaller. The node density stays nodes_per_decade.
        """
        top = math.log10(self.window_R * math.sqrt(t))
        low = top - self.window_decades
        if floor is not None and floor > 0:
            low = min(low, math.log10(floor))
        count = int(math.ceil((top - low) * self.nodes_per_decade - 1e-9)) + 1
        logs = np.linspace(low, top, count)
        return torch.cat([torch.zeros(1, dtype=DTYPE), torch.as_tensor(10.0 ** logs, dtype=DTYPE)])

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class HotspotTrajectory:
    schedule: list
    sets: list
    policy: TrackPolicy
    plan: object = None

    @property
    def times(self):
        return np.asarray(self.schedule, dtype=np.float64)

    @property
    def r_primary(self):
        return np.asarray([s.primary.r for s in self.sets])

    @property
    def r_sup(self):
        return np.asarray([s.r_sup for s in self.sets])

    @property
    def r_inf(self):
        return np.asarray([s.r_inf for s in self.sets])

    @property
    def max_values(self):
        return np.asarray([s.max_value for s in self.sets])


def _radial_floor(pred, t):
    if pred is None or not pred.R_infinity > 0:
        return None
    return _FLOOR_MARGIN * pred.predicted_radius(t)


def _track_step(cone, phi, t, policy, plan, pred=None):
    fiber = cone.fiber
    grid = fiber.grid(policy.fiber_resolution)
    radii = policy.radii(t, _radial_floor(pred, t))
    field_ = solve_heat(cone, phi, t, radii, grid.points, plan)
    field_.fiber_shape, field_.periodic = grid.shape, grid.periodic
    found = find_hotspots(field_, policy.rel_tol)
    log_scenario(
        f"t={t:.6g}: max u={found.max_value:.12g} at r={found.primary.r:.6g} "
        f"({found.primary.location.value})"
    )
    return found


def track(cone, phi, schedule, policy=None, threads=1, plan=None, pred=None):
    """Hot-spot sets along an increasing time schedule.

    One truncation plan is certified for the whole window up front. Times
    are evaluated on a thread pool and collected in schedule order.

    The radial grid reaches down to a fraction of the predicted hot-spot
    radius R_inf t^alpha, so spots drifting into the cone point (alpha < 0)
    stay resolved. `pred` defaults to predicted_limit capped at the plan's
    K; data without a prediction keeps the fixed window.
    """
    schedule = [float(t) for t in schedule]
    if not schedule or any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be a nonempty increasing sequence of times")
    policy = (policy or TrackPolicy()).resolve()
    if plan is None:
        plan = truncation_order(cone, phi, policy.window_R, schedule[0])
    if pred is None:
        try:
            pred = predicted_limit(cone, phi, max_level=plan.K)
        except HypothesisError as exc:
            logger.info(f"tracking without a radial floor: {exc}")
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        sets = list(pool.map(lambda t: _track_step(cone, phi, t, policy, plan, pred), schedule))
    return HotspotTrajectory(schedule, sets, policy, plan)


@dataclass
class VerdictTolerance:
    alpha_rel: float = 0.1
    radius_ratio: tuple = (0.8, 1.25)
    terminal_distance: float = 0.05
    fiber_confinement: bool = True
    require_regime_match: bool = True

    @classmethod
    def infinite(cls):
        return cls(
            alpha_rel=math.inf,
            radius_ratio=(0.0, math.inf),
            terminal_distance=math.inf,
            fiber_confinement=False,
            require_regime_match=False,
        )


@dataclass
class RegimeVerdict:
    predicted_regime: Regime
    measured_regime: Regime
    alpha_hat: float
    alpha_band: tuple
    R_hat: float
    terminal_distance: float
    fit_window: tuple
    checks: dict
    passed: bool
    prediction: dict = field(default_factory=dict)
    # first fit time after which the hot spot stays at the cone point
    pinned_since: float = None

    def to_dict(self):
        return {
            "predicted_regime": self.predicted_regime.value,
            "measured_regime": self.measured_regime.value,
            "alpha_hat": self.alpha_hat,
            "alpha_band": list(self.alpha_band),
            "R_hat": self.R_hat,
            "terminal_distance": self.terminal_distance,
            "pinned_since": self.pinned_since,
            "fit_window": list(self.fit_window),
            "checks": self.checks,
            "passed": self.passed,
            "prediction": self.prediction,
        }


def fit_indices(times, fit_window=None, fit_fraction=None):
    """Indices of the schedule the rate fit uses.

    The default window is the trailing fit_fraction of the schedule in log t.
    Raises:
        ValueError: the schedule spans fewer than MIN_FIT_DECADES decades or
            the window holds fewer than MIN_FIT_TIMES times
    """
    times = np.asarray(times, dtype=np.float64)
    if times.size < 2 or math.log10(times[-1] / times[0]) < MIN_FIT_DECADES - 1e-9:
        raise ValueError(f"trajectory must span at least {MIN_FIT_DECADES:g} decades of t")
    if fit_window is not None:
        lo, hi = fit_window
        idx = np.nonzero((times >= lo) & (times <= hi))[0]
    else:
        fit_fraction = _runtime_config["fit_fraction"] if fit_fraction is None else fit_fraction
        logs = np.log(times)
        cut = logs[-1] - fit_fraction * (logs[-1] - logs[0])
        idx = np.nonzero(logs >= cut - 1e-12)[0]
    if idx.size < MIN_FIT_TIMES:
        raise ValueError(f"fit window holds {idx.size} times, at least {MIN_FIT_TIMES} are needed")
    return idx


def classify_regime(traj, pred, fit_window=None, tol=None):
    """Compare a measured trajectory with the prediction it was generated from.

    The argmax radius is fitted as R t^alpha by log-log least squares over
    the fit window. Failures are reported in the verdict, never raised.
    """
    tol = tol or VerdictTolerance()
    times = traj.times
    idx = fit_indices(times, fit_window)
    t_fit = times[idx]
    r_fit = traj.r_primary[idx]
    checks = {}

    positive = r_fit > 0
    alpha_hat, R_hat, band = 0.0, 0.0, (0.0, 0.0)
    if np.all(~positive):
        measured = Regime.CONE_POINT
    else:
        if positive.sum() >= 4:
            coeffs, cov = np.polyfit(np.log(t_fit[positive]), np.log(r_fit[positive]), 1, cov=True)
            alpha_hat, R_hat = float(coeffs[0]), float(math.exp(coeffs[1]))
            sigma = math.sqrt(max(float(cov[0, 0]), 0.0))
            band = (alpha_hat - 1.96 * sigma, alpha_hat + 1.96 * sigma)
        if alpha_hat > _SLOPE_ZERO:
            measured = Regime.OUTWARD
        elif alpha_hat < -_SLOPE_ZERO:
            measured = Regime.INWARD
        else:
            measured = Regime.CRITICAL

    regime = pred.regime
    terminal = math.nan
    pinned_since = None
    if regime == Regime.CONE_POINT:
        r_sup = traj.r_sup[idx]
        # earliest fit time from which every hot spot sits at the cone point
        for i in range(r_sup.size - 1, -1, -1):
            if r_sup[i] != 0.0:
                break
            pinned_since = float(t_fit[i])
        checks["pinned_at_cone_point"] = pinned_since is not None and pinned_since < t_fit[-1]
        terminal = float(r_sup[-1])
    elif regime == Regime.CRITICAL:
        last = traj.sets[idx[-1]]
        first = traj.sets[idx[0]]
        terminal = hotspot_set_distance(pred, last)
        checks["terminal_distance"] = terminal <= tol.terminal_distance
        checks["distance_decreasing"] = terminal <= hotspot_set_distance(pred, first) + 1e-12
    else:
        checks["alpha"] = abs(alpha_hat - pred.alpha) <= tol.alpha_rel * max(1.0, abs(pred.alpha))
        ratio = R_hat / pred.R_infinity if pred.R_infinity > 0 else math.inf
        checks["R_infinity"] = tol.radius_ratio[0] <= ratio <= tol.radius_ratio[1]

    if tol.fiber_confinement and regime != Regime.CONE_POINT:
        inside = []
        for i in idx:
            spot = traj.sets[i].primary
            if spot.x is None:
                continue
            inside.append(bool(pred.in_U_epsilon(torch.as_tensor([spot.x], dtype=DTYPE))[0]))
        checks["fiber_in_U_epsilon"] = all(inside[len(inside) // 2 :]) if inside else True
    if tol.require_regime_match:
        checks["regime"] = measured == regime

    passed = all(checks.values())
    verdict = RegimeVerdict(
        predicted_regime=regime,
        measured_regime=measured,
        alpha_hat=alpha_hat,
        alpha_band=band,
        R_hat=R_hat,
        terminal_distance=terminal,
        pinned_since=pinned_since,
        fit_window=(float(t_fit[0]), float(t_fit[-1])),
        checks=checks,
        passed=passed,
        prediction=pred.to_dict(),
    )
    log_scenario(
        f"regime verdict: predicted {regime.value}, measured {measured.value}, "
        f"alpha_hat={alpha_hat:.4f}, {'pass' if passed else 'FAIL'}"
    )
    return verdict


def hotspot_set_distance(pred, hotspots):
    """sup over the hot-spot set of the cone distance to H_infinity."""
    fiber = pred.cone.fiber
    worst = 0.0
    for spot in hotspots.spots:
        if spot.location == HotspotLocation.CONE_POINT:
            points = fiber.grid((8, 16)).points[:1]
        elif spot.location == HotspotLocation.FIBER:
            points = fiber.grid(_runtime_config.track_fiber_grid).points
        else:
            points = torch.as_tensor([spot.x], dtype=DTYPE)
        radii = torch.full((points.shape[0],), spot.r, dtype=DTYPE)
        worst = max(worst, float(torch.max(pred.distance_to_h_infinity(radii, points))))
    return worst


def search_window_check(cone, phi, t, policy=None, growth=1.5):
    """Locate the hot spot with window R and growth * R and compare."""
    policy = (policy or TrackPolicy()).resolve()
    wider = TrackPolicy(
        window_R=policy.window_R * growth,
        nodes_per_decade=policy.nodes_per_decade,
        window_decades=policy.window_decades,
        fiber_resolution=policy.fiber_resolution,
        rel_tol=policy.rel_tol,
    )
    results = []
    for pol in (policy, wider):
        plan = truncation_order(cone, phi, pol.window_R, t)
        results.append(_track_step(cone, phi, t, pol, plan).primary)
    base, grown = results
    cell = max(base.r, grown.r) * (10.0 ** (1.0 / policy.nodes_per_decade) - 1.0)
    same_r = abs(base.r - grown.r) <= max(cell, 1e-12)
    same_x = True
    if base.x is not None and grown.x is not None:
        gap = cone.fiber.distance(
            torch.as_tensor([base.x], dtype=DTYPE), torch.as_tensor([grown.x], dtype=DTYPE)
        )
        same_x = float(gap[0]) <= 1e-6
    else:
        same_x = base.x is None and grown.x is None
    return {
        "t": float(t),
        "r": base.r,
        "r_grown": grown.r,
        "unchanged": bool(same_r and same_x),
    }
