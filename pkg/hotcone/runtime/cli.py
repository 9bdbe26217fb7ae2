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

import sys

import fire

from hotcone.core import ConfigError
from hotcone.core.const import EXIT_CONFIG_ERROR
from hotcone.utils import logger, set_verbosity

from .config import ExperimentConfig
from .runner import ExperimentRunner


def _load(kind, config):
    """Config for one subcommand; a file is filtered down to scenarios of `kind`."""
    if config is None:
        if kind is None:
            raise ConfigError("a configuration file is required", "config")
        return ExperimentConfig.single(kind)
    loaded = ExperimentConfig.from_file(config)
    if kind is None:
        return loaded
    desc = loaded.to_dict()
    desc["scenarios"] = [sc for sc in desc["scenarios"] if sc["kind"] == kind]
    if not desc["scenarios"]:
        raise ConfigError(f"{config} holds no '{kind}' scenario", "scenarios")
    return ExperimentConfig.from_dict(desc)


def _execute(kind, config, out, threads, tol, verbose, debug):
    set_verbosity(verbose, debug)
    try:
        experiment = _load(kind, config)
    except ConfigError as exc:
        logger.error(f"invalid configuration: {exc}")
        sys.exit(EXIT_CONFIG_ERROR)
    sys.exit(ExperimentRunner(experiment, out, threads, tol).run())


class HotConeCLI(object):
    """Hot-spot experiments on warped products and cones.

    Every subcommand accepts --config PATH, --out DIR, --threads N, --tol X
    (truncation tolerance), --verbose and --debug. Exit status: 0 ok,
    2 configuration error, 3 hypothesis violation, 4 failed verdict.
    """

    def compact_modes(self, config=None, out=None, threads=None, tol=None, verbose=False, debug=False):
        """Second Neumann, mixed and counterexample modes of compact warped products."""
        _execute("compact-modes", config, out, threads, tol, verbose, debug)

    def cone_field(self, config=None, out=None, threads=None, tol=None, verbose=False, debug=False):
        """Heat flow u(r, x, t) on a cone sampled at fixed times."""
        _execute("cone-field", config, out, threads, tol, verbose, debug)

    def cone_track(self, config=None, out=None, threads=None, tol=None, verbose=False, debug=False):
        """Hot-spot trajectory over a time schedule and its regime verdict."""
        _execute("cone-track", config, out, threads, tol, verbose, debug)

    def bessel_table(self, config=None, out=None, threads=None, tol=None, verbose=False, debug=False):
        """Audit table of I_gamma(z) with the method used and the envelope ratio."""
        _execute("bessel-table", config, out, threads, tol, verbose, debug)

    def verify_all(self, config=None, out=None, threads=None, tol=None, verbose=False, debug=False):
        """Built-in oracle checks, or every scenario of --config."""
        if config is None:
            _execute("verify-all", None, out, threads, tol, verbose, debug)
        else:
            _execute(None, config, out, threads, tol, verbose, debug)

    def run(self, config, out=None, threads=None, tol=None, verbose=False, debug=False):
        """Every scenario of a configuration file."""
        _execute(None, config, out, threads, tol, verbose, debug)


def main():
    fire.Fire(HotConeCLI, name="hotcone")


if __name__ == "__main__":
    main()
