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

import copy
import hashlib
import json
import math

import numpy as np

from hotcone.core.const import ScenarioKind
from hotcone.core.errors import ConfigError
from hotcone.core.hotspot_lab import fit_indices
from hotcone.core.warping import FAMILIES
from hotcone.manager import DEFAULT_NUMERICS

DEFAULT_OUTPUT_DIR = "out"
DEFAULT_SEED = 0

DEFAULT_FIBER = {"kind": "sphere", "rho": 1.0, "count": 16}

DEFAULT_SCENARIOS = {
    ScenarioKind.COMPACT_MODES: {
        "n": 3,
        "L": 1.0,
        "warping": {"family": "affine", "c": 1.0},
        "fiber": DEFAULT_FIBER,
        "grid": None,
        # second-neumann, mixed, degenerate, fiber-combination, cross-check
        "checks": ["second-neumann", "mixed"],
        "r0": None,
        "tune_radius": False,
        "coefficients": None,
        "cross_check_count": 10,
    },
    ScenarioKind.CONE_FIELD: {
        "n": 3,
        "fiber": DEFAULT_FIBER,
        "initial": [
            {"k": 1, "profile": {"kind": "indicator", "lo": 1.0, "hi": 2.0}},
            {"k": 3, "profile": {"kind": "indicator", "lo": 1.0, "hi": 2.0, "amplitude": 0.5}},
        ],
        "times": [1.0, 10.0, 100.0],
        "radii": {"R": 4.0, "count": 65},
        "fiber_resolution": [8, 16],
        "calibrate": True,
    },
    ScenarioKind.CONE_TRACK: {
        "n": 3,
        "fiber": DEFAULT_FIBER,
        "initial": [
            {"k": 1, "profile": {"kind": "indicator", "lo": 1.0, "hi": 2.0}},
            {"k": 3, "profile": {"kind": "indicator", "lo": 1.0, "hi": 2.0, "amplitude": 0.5}},
        ],
        "schedule": {"start": 100.0, "stop": 1.0e4, "per_decade": 3},
        "policy": {},
        "fit_window": None,
        "tolerance": {},
    },
    ScenarioKind.BESSEL_TABLE: {
        "orders": [0.5, 1.5, 2.5, 10.0],
        "arguments": [0.0, 0.5, 1.0, 10.0, 100.0, 700.0],
    },
    ScenarioKind.VERIFY_ALL: {
        "samples": 64,
    },
}


def schedule_times(desc):
    """Times of a schedule given as a list or {start, stop, per_decade}."""
    if isinstance(desc, dict):
        start, stop = float(desc["start"]), float(desc["stop"])
        per_decade = int(desc.get("per_decade", 4))
        count = int(round(math.log10(stop / start) * per_decade)) + 1
        return [float(t) for t in np.logspace(math.log10(start), math.log10(stop), count)]
    return [float(t) for t in desc]


class ExperimentConfig(object):
    """Experiment description: numerics overrides plus a list of scenarios."""

    def __init__(self, scenarios=(), numerics=None, output_dir=DEFAULT_OUTPUT_DIR, seed=DEFAULT_SEED, threads=None):
        self.numerics = dict(numerics or {})
        self.output_dir = output_dir
        self.seed = seed
        self.threads = threads
        self.scenarios = []
        for i, scenario in enumerate(scenarios):
            self.scenarios.append(self._merge_scenario(i, scenario))
        self.validate()

    @staticmethod
    def _merge_scenario(index, scenario):
        if not isinstance(scenario, dict):
            raise ConfigError("a scenario must be an object", f"scenarios[{index}]")
        try:
            kind = ScenarioKind(scenario.get("kind"))
        except ValueError:
            raise ConfigError(
                f"unknown scenario kind {scenario.get('kind')!r}, expected one of "
                f"{[k.value for k in ScenarioKind]}",
                f"scenarios[{index}].kind",
            )
        merged = copy.deepcopy(DEFAULT_SCENARIOS[kind])
        unknown = set(scenario) - set(merged) - {"kind", "name"}
        if unknown:
            raise ConfigError(f"unknown keys {sorted(unknown)}", f"scenarios[{index}]")
        for key, value in scenario.items():
            merged[key] = copy.deepcopy(value)
        merged["kind"] = kind.value
        merged["name"] = str(scenario.get("name", f"{kind.value}-{index}"))
        return merged

    # ---- validation ---------------------------------------------------
    def validate(self):
        unknown = set(self.numerics) - set(DEFAULT_NUMERICS)
        if unknown:
            raise ConfigError(f"unknown numerics knobs {sorted(unknown)}", "numerics")
        if not isinstance(self.output_dir, str) or not self.output_dir:
            raise ConfigError("output_dir must be a nonempty string", "output_dir")
        if not isinstance(self.seed, int):
            raise ConfigError("seed must be an integer", "seed")
        if self.threads is not None and (not isinstance(self.threads, int) or self.threads < 1):
            raise ConfigError("threads must be a positive integer", "threads")
        names = set()
        for i, sc in enumerate(self.scenarios):
            path = f"scenarios[{i}]"
            if sc["name"] in names:
                raise ConfigError(f"duplicate scenario name {sc['name']!r}", f"{path}.name")
            names.add(sc["name"])
            kind = ScenarioKind(sc["kind"])
            if kind in (ScenarioKind.COMPACT_MODES, ScenarioKind.CONE_FIELD, ScenarioKind.CONE_TRACK):
                self._validate_fiber(sc, path)
            if kind == ScenarioKind.COMPACT_MODES:
                self._validate_compact(sc, path)
            elif kind in (ScenarioKind.CONE_FIELD, ScenarioKind.CONE_TRACK):
                self._validate_cone(sc, path, kind, self._fit_fraction())
            elif kind == ScenarioKind.BESSEL_TABLE:
                if any(g < 0 for g in sc["orders"]):
                    raise ConfigError("Bessel orders must be >= 0", f"{path}.orders")
                if any(z < 0 for z in sc["arguments"]):
                    raise ConfigError("Bessel arguments must be >= 0", f"{path}.arguments")

    @staticmethod
    def _validate_fiber(sc, path):
        fiber = sc["fiber"]
        kind = fiber.get("kind", "sphere")
        if kind not in ("sphere", "circle", "torus"):
            raise ConfigError(f"unknown fiber kind {kind!r}", f"{path}.fiber.kind")
        if kind == "torus":
            sides = fiber.get("side_lengths")
            if not sides or any(not a > 0 for a in sides):
                raise ConfigError("torus side lengths must be positive", f"{path}.fiber.side_lengths")
        elif not float(fiber.get("rho", 1.0)) > 0:
            raise ConfigError("fiber radius must be positive", f"{path}.fiber.rho")
        if int(fiber.get("count", 16)) < 2:
            raise ConfigError("fiber count must be >= 2", f"{path}.fiber.count")
        n = sc["n"]
        if not isinstance(n, int) or n < 2:
            raise ConfigError("n must be an integer >= 2", f"{path}.n")
        dim = {"sphere": fiber.get("dim", n - 1), "circle": 1}.get(kind, len(fiber.get("side_lengths", [])))
        if dim != n - 1:
            raise ConfigError(f"fiber dimension {dim} does not match n - 1 = {n - 1}", f"{path}.fiber")

    @staticmethod
    def _validate_compact(sc, path):
        if not float(sc["L"]) > 0:
            raise ConfigError("L must be positive", f"{path}.L")
        family = sc["warping"].get("family", "constant")
        if family not in FAMILIES:
            raise ConfigError(f"unknown warping family {family!r}", f"{path}.warping.family")
        allowed = {"second-neumann", "mixed", "degenerate", "fiber-combination", "cross-check"}
        for j, check in enumerate(sc["checks"]):
            if check not in allowed:
                raise ConfigError(f"unknown check {check!r}", f"{path}.checks[{j}]")
        if "degenerate" in sc["checks"] and sc["r0"] is None:
            raise ConfigError("the degenerate check needs r0", f"{path}.r0")
        if "cross-check" in sc["checks"] and sc["n"] != 2:
            raise ConfigError("the cross-check needs n = 2", f"{path}.n")

    def _fit_fraction(self):
        return float(self.numerics.get("fit_fraction", DEFAULT_NUMERICS["fit_fraction"]))

    @staticmethod
    def _validate_cone(sc, path, kind, fit_fraction):
        if sc["n"] < 3:
            raise ConfigError("cones need n >= 3", f"{path}.n")
        if not sc["initial"]:
            raise ConfigError("initial data needs at least one term", f"{path}.initial")
        for j, term in enumerate(sc["initial"]):
            if "k" not in term or "profile" not in term:
                raise ConfigError("terms need 'k' and 'profile'", f"{path}.initial[{j}]")
            profile = term["profile"]
            lo, hi = profile.get("lo"), profile.get("hi")
            if lo is None or hi is None or not 0 <= float(lo) < float(hi):
                raise ConfigError("profile support needs 0 <= lo < hi", f"{path}.initial[{j}].profile")
        if kind == ScenarioKind.CONE_FIELD:
            times = sc["times"]
            field_name = "times"
        else:
            try:
                times = schedule_times(sc["schedule"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigError(f"malformed schedule ({exc})", f"{path}.schedule")
            field_name = "schedule"
        if not times or any(t <= 0 for t in times):
            raise ConfigError("times must be positive", f"{path}.{field_name}")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ConfigError("times must be increasing", f"{path}.{field_name}")
        if kind == ScenarioKind.CONE_TRACK:
            fit_window = sc["fit_window"]
            try:
                fit_indices(times, tuple(fit_window) if fit_window is not None else None, fit_fraction)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"schedule cannot be classified: {exc}", f"{path}.schedule")

    # ---- (de)serialization ----------------------------------------------
    def to_dict(self):
        return {
            "numerics": copy.deepcopy(self.numerics),
            "output_dir": self.output_dir,
            "seed": self.seed,
            "threads": self.threads,
            "scenarios": copy.deepcopy(self.scenarios),
        }

    @classmethod
    def from_dict(cls, desc):
        if not isinstance(desc, dict):
            raise ConfigError("the configuration must be a JSON object", "config")
        unknown = set(desc) - {"numerics", "output_dir", "seed", "threads", "scenarios"}
        if unknown:
            raise ConfigError(f"unknown keys {sorted(unknown)}", "config")
        return cls(
            scenarios=desc.get("scenarios", []),
            numerics=desc.get("numerics", {}),
            output_dir=desc.get("output_dir", DEFAULT_OUTPUT_DIR),
            seed=desc.get("seed", DEFAULT_SEED),
            threads=desc.get("threads", None),
        )

    @classmethod
    def from_file(cls, path):
        try:
            with open(path, "r") as f:
                desc = json.load(f)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}", "config") from exc
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}", "config") from exc
        return cls.from_dict(desc)

    @classmethod
    def single(cls, kind, **overrides):
        """A config holding one default scenario of the given kind."""
        scenario = {"kind": ScenarioKind(kind).value}
        scenario.update(overrides)
        return cls(scenarios=[scenario])

    def digest(self):
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
