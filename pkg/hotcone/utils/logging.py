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
import threading

from rich.logging import RichHandler


class LoggerFactory:
    @staticmethod
    def create_logger(name=None, level=logging.WARNING):
        """create a logger
        Args:
            name (str): name of the logger
            level: level of logger
        Raises:
            ValueError is name is None
        """

        if name is None:
            raise ValueError("name for logger cannot be None")

        logger_ = logging.getLogger(name)
        logger_.setLevel(level)
        logger_.propagate = False
        # Re-importing the module must not stack handlers.
        if not any(isinstance(h, RichHandler) for h in logger_.handlers):
            handler = RichHandler(show_path=False)
            handler.setFormatter(logging.Formatter("%(message)s"))
            logger_.addHandler(handler)
        return logger_


logger = LoggerFactory.create_logger(name="HotCone", level=logging.WARNING)

_scenario_local = threading.local()


def set_scenario(name):
    """Tag log records emitted by the current thread with a scenario name."""
    _scenario_local.name = name


def current_scenario():
    return getattr(_scenario_local, "name", None)


def log_scenario(message, scenario=None, level=logging.INFO):
    """Log message prefixed with the scenario it belongs to.
    Args:
        message (str)
        scenario (str): explicit scenario name, defaults to the one bound
            to the calling thread by `set_scenario`.
        level (int)
    """
    scenario = scenario or current_scenario()
    if scenario is None:
        logger.log(level, message)
    else:
        logger.log(level, f"[{scenario}] {message}")


def set_verbosity(verbose=False, debug=False):
    if debug:
        logger.setLevel(logging.DEBUG)
    elif verbose:
        logger.setLevel(logging.INFO)
    else:
        logger.setLevel(logging.WARNING)
