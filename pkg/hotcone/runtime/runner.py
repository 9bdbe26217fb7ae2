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

import logging
import os
from concurrent.futures import ThreadPoolExecutor

import psutil
import torch

from hotcone.core import ConfigError, DegeneracyError, HypothesisError, TruncationError
from hotcone.core.const import (
    EXIT_CONFIG_ERROR,
    EXIT_HYPOTHESIS_VIOLATION,
    EXIT_OK,
    EXIT_VERDICT_FAILURE,
)
from hotcone.manager import _runtime_config
from hotcone.profiler import recorder
from hotcone.utils import log_scenario, logger, my_timer, set_scenario

from .config import ExperimentConfig
from .scenarios import HANDLERS, ScenarioContext

MANIFEST_NAME = "manifest.json"


def default_threads():
    return max(1, psutil.cpu_count(logical=False) or 1)


class ExperimentRunner(object):
    """Runs every scenario of an ExperimentConfig and writes the manifest.

    Scenarios run on a thread pool, each into `<out>/<name>/`. The run
    status is the largest status any scenario reports.
    """

    def __init__(self, config, out_dir=None, threads=None, tol=None):
        self.config = config
        self.out_dir = out_dir or config.output_dir
        self.threads = threads or config.threads or default_threads()
        self.tol = tol

    def _run_scenario(self, index, scenario):
        name = scenario["name"]
        set_scenario(name)
        ctx = ScenarioContext(scenario, self.out_dir, self.config.seed + index, self.threads)
        handler = HANDLERS[scenario["kind"]]
        my_timer.start_profile(name)
        try:
            status = handler(ctx)
        except ConfigError as exc:
            log_scenario(f"invalid configuration: {exc}", level=logging.ERROR)
            recorder.record_verdict(name, "error", {"type": "ConfigError", "message": str(exc)})
            status = EXIT_CONFIG_ERROR
        except (HypothesisError, DegeneracyError) as exc:
            log_scenario(f"hypothesis violated: {exc}", level=logging.ERROR)
            recorder.record_verdict(name, "error", {"type": type(exc).__name__, "message": str(exc)})
            status = EXIT_HYPOTHESIS_VIOLATION
        except TruncationError as exc:
            log_scenario(f"truncation not certified: {exc}", level=logging.ERROR)
            recorder.record_verdict(name, "error", {"type": "TruncationError", "message": str(exc)})
            status = EXIT_VERDICT_FAILURE
        except Exception as exc:
            logger.exception(f"scenario {name} failed: {exc}")
            recorder.record_verdict(name, "error", {"type": type(exc).__name__, "message": str(exc)})
            status = EXIT_VERDICT_FAILURE
        finally:
            my_timer.finish_profile(name)
            set_scenario(None)
        recorder.record_status(name, status)
        log_scenario(f"finished with status {status}", scenario=name)
        return status

    def run(self):
        """Returns the process exit status."""
        recorder.reset()
        my_timer.reset()
        recorder.start(self.config.digest(), self.config.seed)
        my_timer.start()
        _runtime_config.push()
        previous_threads = torch.get_num_threads()
        try:
            _runtime_config.update(self.config.numerics)
            if self.tol is not None:
                _runtime_config.update({"truncation_tol": float(self.tol)})
            torch.set_num_threads(self.threads)
            torch.manual_seed(self.config.seed)
            logger.info(
                f"running {len(self.config.scenarios)} scenarios on {self.threads} threads "
                f"into {self.out_dir}"
            )
            scenarios = self.config.scenarios
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                statuses = list(pool.map(self._run_scenario, range(len(scenarios)), scenarios))
        finally:
            torch.set_num_threads(previous_threads)
            _runtime_config.pop()
            my_timer.print()
            my_timer.stop()
            recorder.end()
            recorder.save(os.path.join(self.out_dir, MANIFEST_NAME))
        return max(statuses, default=EXIT_OK)


def run_experiment(config, out_dir=None, threads=None, tol=None):
    """Run a config (ExperimentConfig, dict or JSON path); returns the exit status."""
    try:
        if isinstance(config, str):
            config = ExperimentConfig.from_file(config)
        elif isinstance(config, dict):
            config = ExperimentConfig.from_dict(config)
    except ConfigError as exc:
        logger.error(f"invalid configuration: {exc}")
        return EXIT_CONFIG_ERROR
    return ExperimentRunner(config, out_dir, threads, tol).run()
