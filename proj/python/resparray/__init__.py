# SPDX-License-Identifier: Apache-2.0
#
# resparray: multi-person respiration measurement with MIMO array radar
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ------------------------------------------------------------------------

"""Python bindings for the resparray C++ core."""

import json

from ._core import (  # noqa: F401
    IoError,
    ValidationError,
    angle_grid,
    beamform,
    bic,
    breathing_displacement,
    count_accuracy,
    default_config_json,
    default_radar_json,
    interval_rmse,
    polar_to_cartesian,
    preset_names,
    preset_scene_json,
    read_rcube,
    resp_cost_curve,
    run,
    simulate,
    taylor_taper,
    truth_intervals,
    version,
    write_rcube,
    xmeans,
)


def default_config():
    return json.loads(default_config_json())


def run_config(cube, method="resp4d", seed=1, monte_carlo=1, **overrides):
    """run() with config overrides given as keyword arguments."""
    cfg = default_config()
    cfg.update(overrides)
    return run(cube, json.dumps(cfg), method, seed, monte_carlo)
