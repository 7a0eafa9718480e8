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

#include "resparray/respiration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace resparray
{
    DisplacementField displacement(const ComplexImage &img)
    {
        const auto &v = img.values;
        DisplacementField out;
        out.radar = img.radar;
        out.t0_s = img.t0_s;
        out.kind = DisplacementKind::raw;
        out.d = Array3<double>(v.n0(), v.n1(), v.n2());
        const double scale = img.radar.center_wavelength_m / (4.0 * pi);
        const std::size_t cells = v.n1() * v.n2();

        std::vector<double> prev(cells, 0.0), offset(cells, 0.0);
        for (std::size_t i = 0; i < v.n0(); ++i)
        {
            const cdouble *src = v.data().data() + i * cells;
            double *dst = out.d.data().data() + i * cells;
            for (std::size_t c = 0; c < cells; ++c)
            {
                double ph = std::arg(src[c]);
                if (i > 0)
                {
                    double jump = ph - prev[c];
                    if (jump > pi)
                        offset[c] -= 2.0 * pi * std::floor((jump + pi) / (2.0 * pi));
                    else if (jump < -pi)
                        offset[c] += 2.0 * pi * std::floor((-jump + pi) / (2.0 * pi));
                }
                prev[c] = ph;
                dst[c] = scale * (ph + offset[c]);
            }
        }
        return out;
    }

    std::size_t kernel_length(double window_s, double step_s)
    {
        std::size_t n = samples_for(window_s, step_s);
        return n % 2 == 0 ? n + 1 : n;
    }

    std::vector<double> hann_kernel(std::size_t length)
    {
        // Nonzero endpoints: sin^2(pi (n + 1) / (M + 1)).
        std::vector<double> w(length);
        for (std::size_t n = 0; n < length; ++n)
        {
            double s = std::sin(pi * static_cast<double>(n + 1) / static_cast<double>(length + 1));
            w[n] = s * s;
        }
        return w;
    }

    namespace
    {
        // Zero-phase FIR with weights renormalised over the in-range taps.
        void centred_filter(std::span<const double> x, std::span<const double> kernel, std::span<double> y)
        {
            const long n = static_cast<long>(x.size());
            const long h = static_cast<long>(kernel.size() / 2);
            for (long i = 0; i < n; ++i)
            {
                long lo = std::max(0L, i - h), hi = std::min(n - 1, i + h);
                double acc = 0.0, wsum = 0.0;
                for (long j = lo; j <= hi; ++j)
                {
                    double w = kernel[static_cast<std::size_t>(j - i + h)];
                    acc += w * x[static_cast<std::size_t>(j)];
                    wsum += w;
                }
                y[static_cast<std::size_t>(i)] = acc / wsum;
            }
        }

        // Centred boxcar mean via prefix sums, truncated at the edges.
        void centred_boxcar(std::span<const double> x, std::size_t length, std::span<double> y)
        {
            const long n = static_cast<long>(x.size());
            const long h = static_cast<long>(length / 2);
            std::vector<double> prefix(x.size() + 1, 0.0);
            for (std::size_t i = 0; i < x.size(); ++i)
                prefix[i + 1] = prefix[i] + x[i];
            for (long i = 0; i < n; ++i)
            {
                long lo = std::max(0L, i - h), hi = std::min(n - 1, i + h);
                y[static_cast<std::size_t>(i)] = (prefix[static_cast<std::size_t>(hi + 1)] - prefix[static_cast<std::size_t>(lo)]) / static_cast<double>(hi - lo + 1);
            }
        }
    }

    DisplacementField bandpass(const DisplacementField &d0, double hpf_window_s, double lpf_window_s)
    {
        const double dt = d0.radar.slow_time_step_s;
        if (!(hpf_window_s > lpf_window_s) || !(lpf_window_s > dt))
            throw ValidationError("bandpass: require T_HPF > T_LPF > slow_time_step");
        const std::size_t nh = kernel_length(hpf_window_s, dt);
        const std::size_t nl = kernel_length(lpf_window_s, dt);
        const std::size_t T = d0.d.n0();
        if (T < nh)
            throw ValidationError("bandpass: record of " + std::to_string(T) + " samples is shorter than the " + std::to_string(nh) + "-sample high-pass kernel");

        const auto lpf = hann_kernel(nl);
        DisplacementField out = d0;
        out.kind = DisplacementKind::band_passed;
        const std::size_t cells = d0.d.n1() * d0.d.n2();
        std::vector<double> x(T), trend(T), hp(T), y(T);
        for (std::size_t c = 0; c < cells; ++c)
        {
            for (std::size_t i = 0; i < T; ++i)
                x[i] = d0.d.data()[i * cells + c];
            centred_boxcar(x, nh, trend);
            for (std::size_t i = 0; i < T; ++i)
                hp[i] = x[i] - trend[i];
            centred_filter(hp, lpf, y);
            for (std::size_t i = 0; i < T; ++i)
                out.d.data()[i * cells + c] = y[i];
        }
        return out;
    }

    std::size_t first_costable_index(std::size_t max_lag)
    {
        return 3 * max_lag - 1;
    }

    std::size_t last_costable_index(std::size_t num_samples, std::size_t max_lag)
    {
        if (num_samples < 4 * max_lag)
            throw ValidationError("resp_cost: record of " + std::to_string(num_samples) + " samples is too short for T_0 = " + std::to_string(max_lag) + " samples");
        return num_samples - 1 - max_lag;
    }

    namespace
    {
        void check_support(std::size_t n, std::size_t index, std::size_t max_lag)
        {
            if (max_lag == 0)
                throw ValidationError("resp_cost: T_0 must span at least one sample");
            if (index + 1 < 3 * max_lag || index + max_lag >= n)
                throw ValidationError("resp_cost: insufficient samples around index " + std::to_string(index));
        }
    }

    double resp_cost(std::span<const double> d, std::size_t index, std::size_t lag, std::size_t max_lag)
    {
        check_support(d.size(), index, max_lag);
        if (lag < 1 || lag > max_lag)
            throw ValidationError("resp_cost: lag must lie in [1, T_0]");
        const std::size_t begin = index + 1 - 2 * max_lag;
        double fwd = 0.0, bwd = 0.0;
        for (std::size_t t = begin; t <= index; ++t)
        {
            double a = d[t] - d[t + lag];
            double b = d[t] - d[t - lag];
            fwd += a * a;
            bwd += b * b;
        }
        double n = static_cast<double>(2 * max_lag);
        return fwd / n + bwd / n;
    }

    std::vector<double> resp_cost_curve(std::span<const double> d, std::size_t index, std::size_t max_lag)
    {
        check_support(d.size(), index, max_lag);
        const std::size_t W = 2 * max_lag;
        const std::size_t begin = index + 1 - W;
        const std::size_t lo = begin - max_lag, hi = index + max_lag;

        // |a - b|^2 = a^2 + b^2 - 2ab; squared terms from prefix sums.
        std::vector<double> sq(hi - lo + 2, 0.0);
        for (std::size_t t = lo; t <= hi; ++t)
            sq[t - lo + 1] = sq[t - lo] + d[t] * d[t];
        auto sum_sq = [&](std::size_t a, std::size_t b) { return sq[b - lo + 1] - sq[a - lo]; };

        const double base = sum_sq(begin, index);
        const double *x = d.data() + begin;
        std::vector<double> curve(max_lag);
        for (std::size_t lag = 1; lag <= max_lag; ++lag)
        {
            const double *fw = x + lag;
            const double *bw = x - lag;
            double cf = 0.0, cb = 0.0;
            for (std::size_t j = 0; j < W; ++j)
            {
                cf += x[j] * fw[j];
                cb += x[j] * bw[j];
            }
            double fwd = base + sum_sq(begin + lag, index + lag) - 2.0 * cf;
            double bwd = base + sum_sq(begin - lag, index - lag) - 2.0 * cb;
            curve[lag - 1] = std::max(0.0, fwd) / static_cast<double>(W) + std::max(0.0, bwd) / static_cast<double>(W);
        }
        return curve;
    }

    double select_interval_lag(std::span<const double> curve, double energy, const IntervalSearch &search)
    {
        const std::size_t n = curve.size();
        std::size_t best = 0;
        for (std::size_t j = 1; j < n; ++j)
            if (curve[j] < curve[best])
                best = j;

        std::size_t pick = best;
        if (search.tie_tolerance > 0.0)
        {
            double limit = curve[best] + search.tie_tolerance * energy;
            // Interior minima only; the short-lag edge is always small.
            for (std::size_t j = 1; j < best; ++j)
            {
                bool local_min = curve[j] < curve[j - 1] && curve[j] <= curve[j + 1];
                if (local_min && curve[j] <= limit)
                {
                    pick = j;
                    break;
                }
            }
        }

        double lag = static_cast<double>(pick + 1);
        if (search.parabolic_refinement && pick > 0 && pick + 1 < n)
        {
            double a = curve[pick - 1], b = curve[pick], c = curve[pick + 1];
            double denom = a - 2.0 * b + c;
            if (denom > 0.0)
                lag += std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
        }
        return lag;
    }

    RespImage resp_interval_image(const DisplacementField &d, const PowerImage &power,
                                  const std::vector<double> &times_s, const IntervalSearch &search)
    {
        if (!power.normalized)
            throw ValidationError("resp_interval_image: gate requires a noise-normalised power image");
        const auto &f = d.d;
        if (f.n0() != power.values.n0() || f.n1() != power.values.n1() || f.n2() != power.values.n2())
            throw ValidationError("resp_interval_image: displacement and power dimensions differ");

        const double dt = d.radar.slow_time_step_s;
        const std::size_t max_lag = samples_for(search.max_interval_s, dt);
        const std::size_t T = f.n0();
        const std::size_t first = first_costable_index(max_lag);
        const std::size_t last = last_costable_index(T, max_lag);
        const double gate = std::pow(10.0, search.gate_db / 10.0);
        const std::size_t L = f.n1(), N = f.n2(), cells = L * N;

        RespImage out;
        out.times_s = times_s;
        out.grid = power.grid;
        out.radar = d.radar;
        out.max_interval_s = search.max_interval_s;
        out.tau = Array3<double>(times_s.size(), L, N, 0.0);
        out.valid = Array3<std::uint8_t>(times_s.size(), L, N, 0);

        std::vector<double> series(T);
        for (std::size_t ti = 0; ti < times_s.size(); ++ti)
        {
            double rel = (times_s[ti] - d.t0_s) / dt;
            long frame = std::lround(rel);
            if (frame < 0 || frame >= static_cast<long>(T))
                throw ValidationError("resp_interval_image: evaluation time outside the record");
            std::size_t gate_frame = static_cast<std::size_t>(frame);
            std::size_t idx = std::clamp(gate_frame, first, last);

            for (std::size_t c = 0; c < cells; ++c)
            {
                if (power.values.data()[gate_frame * cells + c] < gate)
                    continue;
                for (std::size_t i = 0; i < T; ++i)
                    series[i] = f.data()[i * cells + c];
                auto curve = resp_cost_curve(series, idx, max_lag);
                double energy = 0.0;
                for (std::size_t t = idx + 1 - 2 * max_lag; t <= idx; ++t)
                    energy += series[t] * series[t];
                energy = 4.0 * energy / static_cast<double>(2 * max_lag);
                double lag = select_interval_lag(curve, energy, search);
                out.tau.data()[ti * cells + c] = lag * dt;
                out.valid.data()[ti * cells + c] = 1;
            }
        }
        return out;
    }
}
