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

#include "resparray/scenarios.hpp"

namespace resparray
{
    namespace
    {
        struct Seat
        {
            double x, y, interval, amplitude, phase;
        };

        constexpr double body_depth_m = 0.0;
        constexpr double body_width_m = 0.0;
        constexpr std::size_t body_scatterers = 1;

        SceneSpec seated(const std::vector<Seat> &seats, double snr_db)
        {
            SceneSpec s;
            s.duration_s = 120.0;
            s.noise_power = noise_power_for_snr(snr_db);
            int id = 1;
            for (const auto &p : seats)
            {
                Target t;
                t.id = id++;
                t.x_m = p.x;
                t.y_m = p.y;
                t.breathing.base_interval_s = p.interval;
                t.breathing.amplitude_m = p.amplitude;
                t.breathing.phase_offset_rad = p.phase;
                t.body_depth_m = body_depth_m;
                t.body_width_m = body_width_m;
                t.num_scatterers = body_scatterers;
                s.targets.push_back(t);
            }
            return s;
        }
    }

    SceneSpec u_shape_scene(double snr_db_at_1m)
    {
        return seated({{-1.0, 1.0, 3.0, 2.0e-3, 0.0},
                       {-1.0, 2.0, 4.4, 2.5e-3, 1.1},
                       {-1.0, 3.0, 2.6, 1.8e-3, 2.3},
                       {0.0, 3.0, 4.8, 2.2e-3, 0.7},
                       {1.0, 3.0, 3.5, 2.0e-3, 4.0},
                       {1.0, 2.0, 5.8, 2.8e-3, 5.1},
                       {1.0, 1.0, 4.0, 2.4e-3, 3.2}},
                      snr_db_at_1m);
    }

    SceneSpec square_scene(double snr_db_at_1m)
    {
        const double y0 = 2.45;
        return seated({{-0.5, y0, 3.0, 2.2e-3, 0.4},
                       {0.5, y0, 4.2, 2.0e-3, 1.9},
                       {0.0, y0 + 0.5, 2.7, 2.4e-3, 3.3},
                       {-0.5, y0 + 1.0, 5.4, 2.6e-3, 5.0},
                       {0.5, y0 + 1.0, 3.4, 2.0e-3, 2.6}},
                      snr_db_at_1m);
    }

    SceneSpec single_target_scene(double interval_s, std::optional<double> snr_db_at_1m, double range_m)
    {
        SceneSpec s = seated({{0.0, range_m, interval_s, 2.0e-3, 0.0}}, 0.0);
        s.noise_power = snr_db_at_1m ? noise_power_for_snr(*snr_db_at_1m) : 0.0;
        return s;
    }

    std::vector<std::string> preset_names()
    {
        return {"u_shape", "square", "single"};
    }

    SceneSpec preset_scene(const std::string &name, double snr_db_at_1m)
    {
        if (name == "u_shape")
            return u_shape_scene(snr_db_at_1m);
        if (name == "square")
            return square_scene(snr_db_at_1m);
        if (name == "single")
            return single_target_scene(4.0, snr_db_at_1m);
        throw ValidationError("unknown scene preset '" + name + "'");
    }
}
