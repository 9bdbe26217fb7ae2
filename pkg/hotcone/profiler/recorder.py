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

import threading
import time

from hotcone.utils import SingletonMeta, atomic_write_json, my_timer


class RunRecorder(metaclass=SingletonMeta):
    """Collects everything a run manifest reports.

    Scenarios run on worker threads, so every mutation goes through a lock.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self.reset()

    def reset(self):
        with self._lock:
            self.start_time = None
            self.end_time = None
            self.config_digest = None
            self.seed = None
            # {scenario: {name: value}}
            self.constants = {}
            self.plans = {}
            self.verdicts = {}
            self.artifacts = {}
            self.status = {}

    def start(self, config_digest=None, seed=None):
        with self._lock:
            self.start_time = time.time()
            self.config_digest = config_digest
            self.seed = seed

    def end(self):
        with self._lock:
            self.end_time = time.time()

    def record_constant(self, scenario, name, value):
        with self._lock:
            self.constants.setdefault(scenario, {})[name] = value

    def record_plan(self, scenario, plan):
        with self._lock:
            self.plans[scenario] = plan.to_dict() if hasattr(plan, "to_dict") else plan

    def record_verdict(self, scenario, name, verdict):
        with self._lock:
            self.verdicts.setdefault(scenario, {})[name] = (
                verdict.to_dict() if hasattr(verdict, "to_dict") else verdict
            )

    def record_artifact(self, scenario, path):
        with self._lock:
            self.artifacts.setdefault(scenario, []).append(path)

    def record_status(self, scenario, status):
        with self._lock:
            self.status[scenario] = status

    def state_dict(self):
        with self._lock:
            return {
                "config_digest": self.config_digest,
                "seed": self.seed,
                "start_time": self.start_time,
                "end_time": self.end_time if self.end_time is not None else time.time(),
                "constants": self.constants,
                "truncation": self.plans,
                "verdicts": self.verdicts,
                "artifacts": self.artifacts,
                "status": self.status,
                "timings": my_timer.state_dict(),
            }

    def save(self, filename):
        atomic_write_json(filename, self.state_dict())


recorder = RunRecorder()
