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

#include <cstdint>
#include <optional>
#include <tuple>
#include <filesystem>
#include <string>
#include <vector>

// Scene documents (schema "resparray.scene/1") and the RCUBE channel file.
//
// Scene JSON:
//   {
//     "schema": "resparray.scene/1",
//     "duration_s": 120,
//     "noise_power": 0.01,            // or "snr_db_at_1m": 20
//     "targets": [{
//        "id": 1, "position": [x, y], "rcs_scale": 1.0,
//        "body_depth_m": 0.0, "body_width_m": 0.0, "num_scatterers": 1,
//        "breathing": {"base_interval_s": 4.0, "amplitude_m": 0.002,
//                      "phase_offset_rad": 0.0,
//                      "interval_knots": [[t, interval], ...]}
//     }],
//     "clutter": [{"position": [x, y], "rcs_scale": 5.0}]
//   }
//
// RCUBE layout (all little-endian):
//   "RCUB" | u32 version | u32 header length | UTF-8 JSON header |
//   float32 I/Q pairs ordered [slow_time][range][element]

namespace resparray
{
    inline constexpr const char *scene_schema = "resparray.scene/1";
    inline constexpr std::uint32_t rcube_version = 1;

    SceneSpec scene_from_json_text(const std::string &text);
    std::string scene_to_json_text(const SceneSpec &scene);
    SceneSpec load_scene(const std::filesystem::path &path);

    RadarConfig radar_from_json_text(const std::string &text);
    std::string radar_to_json_text(const RadarConfig &radar);

    std::vector<std::uint8_t> encode_rcube(const ChannelCube &cube);
    ChannelCube decode_rcube(const std::vector<std::uint8_t> &bytes);
    void write_rcube(const std::filesystem::path &path, const ChannelCube &cube);
    ChannelCube read_rcube(const std::filesystem::path &path);

    // Whole-file helpers raising IoError.
    std::string read_text_file(const std::filesystem::path &path);
    std::vector<std::uint8_t> read_binary_file(const std::filesystem::path &path);
    void write_text_file(const std::filesystem::path &path, const std::string &text);
}
