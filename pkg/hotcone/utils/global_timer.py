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
from contextlib import contextmanager

from .logging import logger
from .singleton_meta import SingletonMeta


class GlobalTimer(metaclass=SingletonMeta):
    def __init__(self):
        """
        Timer for the stages of an experiment run.
        The naming convention should be {SCENARIO}_{stage},
        e.g. regime_rho2_TRACK
        """
        self.elapse_stat = {}
        self.start_time = {}
        self.start_flag = False
        self._lock = threading.Lock()

    def start(self):
        self.start_flag = True

    def stop(self):
        self.start_flag = False

    def start_profile(self, key):
        if not self.start_flag:
            return
        with self._lock:
            if key in self.start_time:
                assert (
                    self.start_time[key] == 0
                ), f"Please Check {key} profiling function"
            self.start_time[key] = time.perf_counter()

    def finish_profile(self, key):
        if not self.start_flag:
            return
        with self._lock:
            elapse = time.perf_counter() - self.start_time[key]
            self.elapse_stat[key] = self.elapse_stat.get(key, 0.0) + elapse
            self.start_time[key] = 0

    @contextmanager
    def profile(self, key):
        self.start_profile(key)
        try:
            yield
        finally:
            self.finish_profile(key)

    def reset(self):
        with self._lock:
            self.elapse_stat = {}
            self.start_time = {}

    def state_dict(self):
        with self._lock:
            return dict(sorted(self.elapse_stat.items()))

    def print(self):
        if not self.start_flag:
            return
        logger.info("------------- PROFILE RESULTS ----------------")
        dot_length = 20
        for k in self.elapse_stat:
            dot_length = max(dot_length, len(k) + 2)
        overall_elapse = sum(self.elapse_stat.values()) or 1.0
        for k, v in self.elapse_stat.items():
            logger.info(
                f'{k} {"." * (dot_length - len(k))} {v:.3f} s, {v / overall_elapse * 100:.1f} %'
            )


my_timer = GlobalTimer()
