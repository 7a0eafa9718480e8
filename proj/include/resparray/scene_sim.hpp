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

#include "resparray/common.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace resparray
{
    // Geometry and sampling of the 79 GHz MIMO radar. The 3x4 MIMO array is
    // modelled as its 12-element half-wavelength virtual array.
    struct RadarConfig
    {
        double center_wavelength_m = 3.8e-3;
        std::size_t num_virtual_elements = 12;
        double element_spacing_m = 1.9e-3;
        double range_resolution_m = 43e-3;
        double slow_time_step_s = 0.1;
        std::size_t num_range_bins = 128;
        std::size_t num_angle_bins = 32;

        // Throws ValidationError on violated invariants.
        void validate() const;

        double range_of_bin(std::size_t l) const { return static_cast<double>(l) * range_resolution_m; }
        double element_x(std::size_t k) const { return static_cast<double>(k) * element_spacing_m; }
    };

    // Chest motion of one person. The interval may drift piecewise-linearly
    // through (time, interval) knots; outside the knots it is held constant.
    struct BreathingProfile
    {
        double base_interval_s = 4.0;
        double amplitude_m = 2e-3;
        double phase_offset_rad = 0.0;
        std::vector<std::pair<double, double>> interval_knots;

        void validate(double max_interval_s = 8.0) const;

        // Instantaneous respiratory interval at time t.
        double interval_at(double t) const;

        // Accumulated breathing phase 2*pi * integral_0^t dt'/interval(t') plus the offset.
        double phase_at(double t) const;
    };

    // Chest displacement along the line of sight: amplitude * sin(phase(t)).
    double breathing_displacement(const BreathingProfile &profile, double t);

    struct Target
    {
        int id = 0;
        double x_m = 0.0; // cross-range
        double y_m = 1.0; // boresight
        double rcs_scale = 1.0;
        BreathingProfile breathing;
        // Body extent. The echo is spread over num_scatterers co-moving point
        // scatterers: along the line of sight over body_depth_m, or across a
        // curved torso front of width body_width_m that recedes by
        // body_depth_m at its edges. Total echo power is independent of the count.
        double body_depth_m = 0.0;
        double body_width_m = 0.0;
        std::size_t num_scatterers = 1;
        // Breathing amplitude falls linearly by this fraction from the first
        // scatterer to the last (chest to abdomen or shoulders).
        double motion_spread = 0.0;
    };

    struct ClutterScatterer
    {
        double x_m = 0.0;
        double y_m = 1.0;
        double rcs_scale = 1.0;
    };

    struct SceneSpec
    {
        std::vector<Target> targets;
        std::vector<ClutterScatterer> clutter;
        double noise_power = 0.0; // complex Gaussian variance per sample
        double duration_s = 120.0;

        // Checks all scatterers lie inside the radar's range window.
        void validate(const RadarConfig &radar) const;
    };

    // Noise variance giving the requested per-element SNR for a unit-RCS
    // point scatterer at 1 m.
    double noise_power_for_snr(double snr_db_at_1m);

    // Range-domain signals s_k(t, r), indexed [slow_time][range_bin][element].
    struct ChannelCube
    {
        Array3<cdouble> data;
        RadarConfig radar;
        double t0_s = 0.0;

        std::size_t num_frames() const { return data.n0(); }
        double time_of_frame(std::size_t i) const { return t0_s + static_cast<double>(i) * radar.slow_time_step_s; }
    };

    ChannelCube synthesize_scene(const SceneSpec &scene, const RadarConfig &radar, std::uint64_t seed);

    struct TruthInterval
    {
        int target_id;
        double interval_s;
    };

    std::vector<TruthInterval> truth_intervals(const SceneSpec &scene, double t);

    // Polar position of a scatterer as seen from the array centre of the
    // coordinate system: range and azimuth from boresight.
    double scatterer_range(double x_m, double y_m);
    double scatterer_azimuth(double x_m, double y_m);
}
