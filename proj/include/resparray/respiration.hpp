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
#include "resparray/imaging.hpp"

#include <cstdint>
#include <vector>

namespace resparray
{
    enum class DisplacementKind
    {
        raw,
        band_passed
    };

    // Per-cell displacement waveforms in metres, indexed [slow_time][range_bin][angle_bin].
    struct DisplacementField
    {
        Array3<double> d;
        RadarConfig radar;
        DisplacementKind kind = DisplacementKind::raw;
        double t0_s = 0.0;
    };

    // Respiratory intervals at a set of evaluation times, indexed
    // [time][range_bin][angle_bin]. Invalid cells hold 0.
    struct RespImage
    {
        std::vector<double> times_s;
        Array3<double> tau;
        Array3<std::uint8_t> valid;
        AngleGrid grid;
        RadarConfig radar;
        double max_interval_s = 8.0;
    };

    struct IntervalSearch
    {
        double max_interval_s = 8.0; // T_0
        double gate_db = 10.0;       // over the normalised noise floor
        // Near-tie tolerance relative to the window energy. Among local minima
        // of the cost within this tolerance of the global minimum, the
        // smallest interval wins. Zero gives the plain argmin.
        double tie_tolerance = 0.0;
        bool parabolic_refinement = false;
    };

    // d_0 = (lambda / 4 pi) * unwrapped phase of I_c along slow time.
    DisplacementField displacement(const ComplexImage &img);

    // d = (d_0 - d_0 * h_HPF) * h_LPF with a rectangular high-pass kernel and a
    // Hann low-pass kernel, both zero-phase with edge renormalisation.
    DisplacementField bandpass(const DisplacementField &d0, double hpf_window_s, double lpf_window_s);

    // Kernel lengths in samples (odd) for a window duration.
    std::size_t kernel_length(double window_s, double step_s);
    std::vector<double> hann_kernel(std::size_t length);

    // Cost of candidate lag `lag` samples at sample index `index` for one cell's
    // waveform: forward plus backward mean squared differences over the
    // 2*max_lag samples ending at `index`.
    double resp_cost(std::span<const double> d, std::size_t index, std::size_t lag, std::size_t max_lag);

    // Cost for every lag 1..max_lag at once; element j is lag j + 1.
    std::vector<double> resp_cost_curve(std::span<const double> d, std::size_t index, std::size_t max_lag);

    // Chosen lag (possibly fractional with refinement) for a cost curve.
    double select_interval_lag(std::span<const double> curve, double energy, const IntervalSearch &search);

    // Earliest and latest sample indices at which resp_cost has full support.
    std::size_t first_costable_index(std::size_t max_lag);
    std::size_t last_costable_index(std::size_t num_samples, std::size_t max_lag);

    // Respiratory image at the given times. Cells whose normalised power is
    // below the gate are invalid. Evaluation indices are clamped into the
    // range where the cost has full support.
    RespImage resp_interval_image(const DisplacementField &d, const PowerImage &power,
                                  const std::vector<double> &times_s, const IntervalSearch &search);
}
