// SPDX-License-Identifier: Apache-2.0
//
// resparray: multi-person respiration measurement with MIMO array radar
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "resparray/scene_sim.hpp"

#include <optional>
#include <string>
#include <vector>

namespace resparray
{
    // Seven seated people in a U at 1 m spacing.
    SceneSpec u_shape_scene(double snr_db_at_1m = 20.0);

    // Five people: corners of a 1 m square plus its centre, far pair near 3.5 m.
    SceneSpec square_scene(double snr_db_at_1m = 20.0);

    // One person at (0, range_m) breathing with a constant interval.
    // No noise when snr is empty.
    SceneSpec single_target_scene(double interval_s, std::optional<double> snr_db_at_1m = std::nullopt,
                                  double range_m = 1.5);

    // Name lookup for the CLI: "u_shape", "square", "single".
    std::vector<std::string> preset_names();
    SceneSpec preset_scene(const std::string &name, double snr_db_at_1m);
}
