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
#include "resparray/scene_sim.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace resparray
{
    // Beam directions, strictly increasing in sin(theta). Beam n is computed
    // as bin `fft_bins[n]` of a length-`fft_size` transform over the element axis.
    struct AngleGrid
    {
        std::size_t fft_size = 32;
        std::vector<double> sin_theta;
        std::vector<double> theta;
        std::vector<std::size_t> fft_bins;

        std::size_t size() const { return theta.size(); }

        // sin(theta_n) = 2n / fft_size for n in [-fft_size/2, fft_size/2).
        static AngleGrid symmetric(std::size_t fft_size);
        // One-sided grid sin(theta_n) = n / N, n = 0..N-1, via a length-2N transform.
        static AngleGrid one_sided(std::size_t n);
    };

    enum class ImageKind
    {
        raw,
        clutter_suppressed
    };

    // Complex radar image, indexed [slow_time][range_bin][angle_bin].
    struct ComplexImage
    {
        Array3<cdouble> values;
        AngleGrid grid;
        RadarConfig radar;
        ImageKind kind = ImageKind::raw;
        double t0_s = 0.0;

        double time_of_frame(std::size_t i) const { return t0_s + static_cast<double>(i) * radar.slow_time_step_s; }
    };

    // Time-averaged power image, indexed [slow_time][range_bin][angle_bin].
    // noise_floor is 1 until normalize_power has divided it out.
    struct PowerImage
    {
        Array3<double> values;
        AngleGrid grid;
        RadarConfig radar;
        double noise_floor = 1.0;
        bool normalized = false;
        double t0_s = 0.0;
    };

    // Rectangular block of cells used to estimate the noise level.
    struct NoiseRegion
    {
        std::size_t range_begin = 0, range_end = 0;
        std::size_t angle_begin = 0, angle_end = 0;

        bool empty() const { return range_end <= range_begin || angle_end <= angle_begin; }
    };

    // Taylor taper, max-normalised. sidelobe_db == 0 requests a uniform taper.
    std::vector<double> taylor_taper(std::size_t num_elements, double sidelobe_db, std::size_t nbar);

    // I_0(t, r, theta_n) = w^H(theta_n) s(t, r), where s carries the calibration
    // and taper and w_k(theta) = exp(-j pi k sin theta).
    ComplexImage beamform(const ChannelCube &cube, std::span<const cdouble> calibration,
                          std::span<const double> taper, const AngleGrid &grid);

    // Subtract the causal mean over the last T_c seconds (truncated at the start).
    ComplexImage suppress_clutter(const ComplexImage &img, double window_s);

    // Causal sliding mean of |I_c|^2 over the last T_P seconds.
    PowerImage power_image(const ComplexImage &img, double window_s);

    // Divide by the mean power over the noise region (all frames).
    PowerImage normalize_power(const PowerImage &img, const NoiseRegion &noise_cells);
    // Divide by a known floor instead.
    PowerImage normalize_power(const PowerImage &img, double floor);

    // Beamformed noise power for per-sample noise variance `noise_power`.
    double expected_noise_floor(double noise_power, std::span<const double> taper, std::span<const cdouble> calibration = {});

    // Calibration file: JSON array of K [re, im] pairs.
    std::vector<cdouble> calibration_from_json_text(const std::string &text, std::size_t num_elements);

    // One slow-time frame of a power image as CSV: range_m,theta_rad,x_m,y_m,value.
    std::string power_frame_csv(const PowerImage &img, std::size_t frame);
}
