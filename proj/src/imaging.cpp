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

#include "resparray/imaging.hpp"

#include <fftw3.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <sstream>

namespace resparray
{
    AngleGrid AngleGrid::symmetric(std::size_t fft_size)
    {
        if (fft_size < 2 || fft_size % 2 != 0)
            throw ValidationError("angle grid: fft_size must be even and >= 2");
        AngleGrid g;
        g.fft_size = fft_size;
        long half = static_cast<long>(fft_size / 2);
        for (long n = -half; n < half; ++n)
        {
            double s = 2.0 * static_cast<double>(n) / static_cast<double>(fft_size);
            g.sin_theta.push_back(s);
            g.theta.push_back(std::asin(s));
            g.fft_bins.push_back(static_cast<std::size_t>((n + static_cast<long>(fft_size)) % static_cast<long>(fft_size)));
        }
        return g;
    }

    AngleGrid AngleGrid::one_sided(std::size_t n)
    {
        if (n < 1)
            throw ValidationError("angle grid: N must be >= 1");
        AngleGrid g;
        g.fft_size = 2 * n;
        for (std::size_t i = 0; i < n; ++i)
        {
            double s = static_cast<double>(i) / static_cast<double>(n);
            g.sin_theta.push_back(s);
            g.theta.push_back(std::asin(s));
            g.fft_bins.push_back(i);
        }
        return g;
    }

    std::vector<double> taylor_taper(std::size_t num_elements, double sidelobe_db, std::size_t nbar)
    {
        if (num_elements < 2)
            throw ValidationError("taylor: need at least 2 elements");
        if (sidelobe_db > 0.0)
            throw ValidationError("taylor: sidelobe_db must be negative (or 0 for uniform)");
        if (sidelobe_db == 0.0)
            return std::vector<double>(num_elements, 1.0);
        if (nbar < 1 || 2 * nbar > num_elements)
            throw ValidationError("taylor: nbar must lie in [1, K/2], got " + std::to_string(nbar) + " for K = " + std::to_string(num_elements));

        const double B = std::pow(10.0, -sidelobe_db / 20.0);
        const double A = std::acosh(B) / pi;
        const double nb = static_cast<double>(nbar);
        const double s2 = nb * nb / (A * A + (nb - 0.5) * (nb - 0.5));

        std::vector<double> Fm(nbar, 0.0);
        for (std::size_t m = 1; m < nbar; ++m)
        {
            double md = static_cast<double>(m);
            double numer = 1.0, denom = 1.0;
            for (std::size_t n = 1; n < nbar; ++n)
            {
                double nd = static_cast<double>(n);
                numer *= 1.0 - md * md / s2 / (A * A + (nd - 0.5) * (nd - 0.5));
                if (n != m)
                    denom *= 1.0 - md * md / (nd * nd);
            }
            double sign = (m % 2 == 1) ? 1.0 : -1.0;
            Fm[m] = sign * numer / (2.0 * denom);
        }

        const double K = static_cast<double>(num_elements);
        std::vector<double> w(num_elements);
        for (std::size_t k = 0; k < num_elements; ++k)
        {
            double xk = (static_cast<double>(k) - K / 2.0 + 0.5) / K;
            double v = 1.0;
            for (std::size_t m = 1; m < nbar; ++m)
                v += 2.0 * Fm[m] * std::cos(2.0 * pi * static_cast<double>(m) * xk);
            w[k] = v;
        }
        double peak = *std::max_element(w.begin(), w.end());
        for (auto &v : w)
        {
            v /= peak;
            if (!(v > 0.0))
                throw ValidationError("taylor: nbar too small for the requested sidelobe level");
        }
        return w;
    }

    namespace
    {
        struct FftwFree
        {
            void operator()(void *p) const { fftw_free(p); }
        };
        struct PlanDestroy
        {
            void operator()(fftw_plan_s *p) const { fftw_destroy_plan(p); }
        };
        using FftwBuffer = std::unique_ptr<fftw_complex[], FftwFree>;
        using FftwPlan = std::unique_ptr<fftw_plan_s, PlanDestroy>;

        // Causal sliding mean along axis 0 with a window of W samples,
        // truncated to the available history at the start.
        template <typename T, typename F>
        void sliding_mean(const Array3<T> &in, std::size_t W, F &&emit)
        {
            const std::size_t cells = in.n1() * in.n2();
            std::vector<T> sum(cells, T{});
            const T *src = in.data().data();
            for (std::size_t i = 0; i < in.n0(); ++i)
            {
                const T *now = src + i * cells;
                for (std::size_t c = 0; c < cells; ++c)
                    sum[c] += now[c];
                if (i >= W)
                {
                    const T *old = src + (i - W) * cells;
                    for (std::size_t c = 0; c < cells; ++c)
                        sum[c] -= old[c];
                }
                double count = static_cast<double>(std::min(i + 1, W));
                emit(i, sum, count);
            }
        }
    }

    ComplexImage beamform(const ChannelCube &cube, std::span<const cdouble> calibration,
                          std::span<const double> taper, const AngleGrid &grid)
    {
        const std::size_t K = cube.data.n2();
        const std::size_t L = cube.data.n1();
        const std::size_t T = cube.data.n0();
        if (K != cube.radar.num_virtual_elements)
            throw ValidationError("beamform: cube element axis does not match radar configuration");
        if (calibration.size() != K || taper.size() != K)
            throw ValidationError("beamform: calibration and taper must have K = " + std::to_string(K) + " entries");
        if (grid.fft_size < K)
            throw ValidationError("beamform: fft_size must be >= K");
        if (grid.size() == 0)
            throw ValidationError("beamform: empty angle grid");

        const std::size_t N = grid.fft_size;
        ComplexImage img;
        img.grid = grid;
        img.radar = cube.radar;
        img.kind = ImageKind::raw;
        img.t0_s = cube.t0_s;
        img.values = Array3<cdouble>(T, L, grid.size());

        std::vector<cdouble> weights(K);
        for (std::size_t k = 0; k < K; ++k)
            weights[k] = taper[k] * calibration[k];

        FftwBuffer buf(fftw_alloc_complex(L * N));
        int n = static_cast<int>(N);
        FftwPlan plan(fftw_plan_many_dft(1, &n, static_cast<int>(L), buf.get(), nullptr, 1, n,
                                         buf.get(), nullptr, 1, n, FFTW_BACKWARD, FFTW_ESTIMATE));
        if (!plan)
            throw std::runtime_error("beamform: FFTW planning failed");

        auto *data = reinterpret_cast<cdouble *>(buf.get());
        for (std::size_t i = 0; i < T; ++i)
        {
            std::fill(data, data + L * N, cdouble{});
            for (std::size_t l = 0; l < L; ++l)
            {
                auto s = cube.data.row(i, l);
                for (std::size_t k = 0; k < K; ++k)
                    data[l * N + k] = weights[k] * s[k];
            }
            fftw_execute(plan.get());
            for (std::size_t l = 0; l < L; ++l)
            {
                auto out = img.values.row(i, l);
                for (std::size_t a = 0; a < grid.size(); ++a)
                    out[a] = data[l * N + grid.fft_bins[a]];
            }
        }
        return img;
    }

    ComplexImage suppress_clutter(const ComplexImage &img, double window_s)
    {
        if (!(window_s > 0.0))
            throw ValidationError("suppress_clutter: window must be > 0");
        if (img.values.n0() == 0)
            throw ValidationError("suppress_clutter: empty window (no frames)");
        const std::size_t W = samples_for(window_s, img.radar.slow_time_step_s);

        ComplexImage out = img;
        out.kind = ImageKind::clutter_suppressed;
        const std::size_t cells = img.values.n1() * img.values.n2();
        sliding_mean(img.values, W, [&](std::size_t i, const std::vector<cdouble> &sum, double count)
                     {
                         cdouble *dst = out.values.data().data() + i * cells;
                         const cdouble *src = img.values.data().data() + i * cells;
                         for (std::size_t c = 0; c < cells; ++c)
                             dst[c] = src[c] - sum[c] / count; });
        return out;
    }

    PowerImage power_image(const ComplexImage &img, double window_s)
    {
        if (!(window_s > 0.0))
            throw ValidationError("power_image: window must be > 0");
        const std::size_t W = samples_for(window_s, img.radar.slow_time_step_s);

        Array3<double> sq(img.values.n0(), img.values.n1(), img.values.n2());
        for (std::size_t i = 0; i < sq.size(); ++i)
            sq.data()[i] = std::norm(img.values.data()[i]);

        PowerImage out;
        out.grid = img.grid;
        out.radar = img.radar;
        out.t0_s = img.t0_s;
        out.values = Array3<double>(sq.n0(), sq.n1(), sq.n2());
        const std::size_t cells = sq.n1() * sq.n2();
        sliding_mean(sq, W, [&](std::size_t i, const std::vector<double> &sum, double count)
                     {
                         double *dst = out.values.data().data() + i * cells;
                         for (std::size_t c = 0; c < cells; ++c)
                             dst[c] = std::max(0.0, sum[c] / count); });
        return out;
    }

    PowerImage normalize_power(const PowerImage &img, const NoiseRegion &noise_cells)
    {
        if (noise_cells.empty())
            throw ValidationError("normalize_power: noise region is empty");
        if (noise_cells.range_end > img.values.n1() || noise_cells.angle_end > img.values.n2())
            throw ValidationError("normalize_power: noise region exceeds image bounds");

        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < img.values.n0(); ++i)
            for (std::size_t l = noise_cells.range_begin; l < noise_cells.range_end; ++l)
                for (std::size_t a = noise_cells.angle_begin; a < noise_cells.angle_end; ++a)
                {
                    sum += img.values(i, l, a);
                    ++count;
                }
        double floor = count ? sum / static_cast<double>(count) : 0.0;
        if (!(floor > 0.0) || !std::isfinite(floor))
            throw ValidationError("normalize_power: noise level estimate is zero");
        return normalize_power(img, floor);
    }

    PowerImage normalize_power(const PowerImage &img, double floor)
    {
        if (!(floor > 0.0) || !std::isfinite(floor))
            throw ValidationError("normalize_power: noise floor must be finite and > 0");
        PowerImage out = img;
        for (auto &v : out.values.data())
            v /= floor;
        out.noise_floor = img.noise_floor * floor;
        out.normalized = true;
        return out;
    }

    double expected_noise_floor(double noise_power, std::span<const double> taper, std::span<const cdouble> calibration)
    {
        double g = 0.0;
        for (std::size_t k = 0; k < taper.size(); ++k)
        {
            double c = calibration.empty() ? 1.0 : std::abs(calibration[k]);
            g += taper[k] * taper[k] * c * c;
        }
        return noise_power * g;
    }

    std::vector<cdouble> calibration_from_json_text(const std::string &text, std::size_t num_elements)
    {
        nlohmann::json j;
        try
        {
            j = nlohmann::json::parse(text);
        }
        catch (const nlohmann::json::parse_error &e)
        {
            throw ValidationError(std::string("calibration: ") + e.what());
        }
        if (!j.is_array() || j.size() != num_elements)
            throw ValidationError("calibration: expected an array of " + std::to_string(num_elements) + " [re, im] pairs");
        std::vector<cdouble> c;
        for (std::size_t k = 0; k < j.size(); ++k)
        {
            const auto &p = j[k];
            if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
                throw ValidationError("calibration[" + std::to_string(k) + "]: expected [re, im]");
            c.emplace_back(p[0].get<double>(), p[1].get<double>());
        }
        return c;
    }

    std::string power_frame_csv(const PowerImage &img, std::size_t frame)
    {
        if (frame >= img.values.n0())
            throw ValidationError("power_frame_csv: frame out of range");
        std::ostringstream os;
        os << "range_m,theta_rad,x_m,y_m,value\n";
        char line[160];
        for (std::size_t l = 0; l < img.values.n1(); ++l)
            for (std::size_t a = 0; a < img.values.n2(); ++a)
            {
                double r = img.radar.range_of_bin(l);
                double th = img.grid.theta[a];
                std::snprintf(line, sizeof line, "%.4f,%.6f,%.4f,%.4f,%.6g\n", r, th, r * std::sin(th), r * std::cos(th), img.values(frame, l, a));
                os << line;
            }
        return os.str();
    }
}
