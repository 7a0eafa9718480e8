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

#include "resparray/scene_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace resparray
{
    namespace
    {
        // Envelope support in bins on each side of the nearest bin.
        constexpr int envelope_half_width = 2;
        // Closest range used for the 1/r amplitude law.
        constexpr double min_range_m = 0.1;

        double sinc(double x)
        {
            if (std::abs(x) < 1e-12)
                return 1.0;
            return std::sin(pi * x) / (pi * x);
        }

        struct PointScatterer
        {
            double range_m;
            double azimuth_rad;
            double amplitude;
            const BreathingProfile *breathing; // nullptr for static clutter
            double motion_scale = 1.0;
            double extra_phase = 0.0;
        };

        // Integral of 1 / (a + s (t - t0)) over [t0, t1].
        double inverse_linear_integral(double a, double s, double t0, double t1)
        {
            if (std::abs(s) < 1e-15)
                return (t1 - t0) / a;
            double b = a + s * (t1 - t0);
            return std::log(b / a) / s;
        }
    }

    void RadarConfig::validate() const
    {
        if (num_virtual_elements < 2)
            throw ValidationError("radar: num_virtual_elements must be >= 2");
        if (!(center_wavelength_m > 0.0))
            throw ValidationError("radar: center_wavelength_m must be > 0");
        if (std::abs(element_spacing_m - center_wavelength_m / 2.0) > 1e-9 * center_wavelength_m)
            throw ValidationError("radar: element_spacing_m must equal center_wavelength_m / 2");
        if (!(slow_time_step_s > 0.0))
            throw ValidationError("radar: slow_time_step_s must be > 0");
        if (!(range_resolution_m > 0.0))
            throw ValidationError("radar: range_resolution_m must be > 0");
        if (num_range_bins < 1 || num_angle_bins < 1)
            throw ValidationError("radar: num_range_bins and num_angle_bins must be >= 1");
    }

    void BreathingProfile::validate(double max_interval_s) const
    {
        if (!(base_interval_s > 0.0) || base_interval_s > max_interval_s)
            throw ValidationError("breathing: base_interval_s must lie in (0, " + std::to_string(max_interval_s) + "]");
        if (!(amplitude_m > 0.0))
            throw ValidationError("breathing: amplitude_m must be > 0");
        for (std::size_t i = 0; i < interval_knots.size(); ++i)
        {
            auto [t, iv] = interval_knots[i];
            if (!(iv > 0.0) || iv > max_interval_s)
                throw ValidationError("breathing: interval_knots[" + std::to_string(i) + "] interval out of range");
            if (i > 0 && !(t > interval_knots[i - 1].first))
                throw ValidationError("breathing: interval_knots times must be strictly increasing");
        }
    }

    double BreathingProfile::interval_at(double t) const
    {
        if (interval_knots.empty())
            return base_interval_s;
        if (t <= interval_knots.front().first)
            return interval_knots.front().second;
        if (t >= interval_knots.back().first)
            return interval_knots.back().second;
        auto it = std::upper_bound(interval_knots.begin(), interval_knots.end(), t,
                                   [](double v, const auto &k) { return v < k.first; });
        const auto &[t1, v1] = *it;
        const auto &[t0, v0] = *(it - 1);
        return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
    }

    double BreathingProfile::phase_at(double t) const
    {
        if (interval_knots.empty())
            return phase_offset_rad + 2.0 * pi * t / base_interval_s;

        // Piecewise integration of the instantaneous frequency.
        double cycles = 0.0;
        double cursor = 0.0;
        auto add_span = [&](double a_t, double b_t)
        {
            if (b_t <= a_t)
                return;
            double ia = interval_at(a_t);
            double ib = interval_at(b_t);
            cycles += inverse_linear_integral(ia, (ib - ia) / (b_t - a_t), a_t, b_t);
        };
        for (const auto &[kt, kv] : interval_knots)
        {
            if (kt >= t)
                break;
            if (kt > cursor)
            {
                add_span(cursor, kt);
                cursor = kt;
            }
        }
        add_span(cursor, t);
        return phase_offset_rad + 2.0 * pi * cycles;
    }

    double breathing_displacement(const BreathingProfile &profile, double t)
    {
        return profile.amplitude_m * std::sin(profile.phase_at(t));
    }

    double scatterer_range(double x_m, double y_m) { return std::hypot(x_m, y_m); }
    double scatterer_azimuth(double x_m, double y_m) { return std::atan2(x_m, y_m); }

    void SceneSpec::validate(const RadarConfig &radar) const
    {
        if (!(duration_s > 0.0))
            throw ValidationError("scene: duration_s must be > 0");
        if (noise_power < 0.0)
            throw ValidationError("scene: noise_power must be >= 0");
        double max_range = static_cast<double>(radar.num_range_bins) * radar.range_resolution_m;
        auto check_range = [&](double r, const std::string &what)
        {
            if (r < 0.0 || r >= max_range)
            {
                std::ostringstream os;
                os << "scene: " << what << " at range " << r << " m lies outside the range window [0, " << max_range << ") m";
                throw ValidationError(os.str());
            }
        };
        for (std::size_t i = 0; i < targets.size(); ++i)
        {
            const auto &tg = targets[i];
            std::string what = "target " + std::to_string(tg.id);
            tg.breathing.validate();
            if (tg.num_scatterers < 1)
                throw ValidationError("scene: " + what + " needs num_scatterers >= 1");
            if (tg.body_depth_m < 0.0 || tg.body_width_m < 0.0)
                throw ValidationError("scene: " + what + " has negative body extent");
            if (tg.motion_spread < 0.0 || tg.motion_spread > 1.0)
                throw ValidationError("scene: " + what + " needs motion_spread in [0, 1]");
            double r = scatterer_range(tg.x_m, tg.y_m);
            check_range(r, what);
            check_range(r + tg.body_depth_m, what + " (body depth)");
        }
        for (std::size_t i = 0; i < clutter.size(); ++i)
            check_range(scatterer_range(clutter[i].x_m, clutter[i].y_m), "clutter " + std::to_string(i));
    }

    double noise_power_for_snr(double snr_db_at_1m)
    {
        return std::pow(10.0, -snr_db_at_1m / 10.0);
    }

    ChannelCube synthesize_scene(const SceneSpec &scene, const RadarConfig &radar, std::uint64_t seed)
    {
        radar.validate();
        scene.validate(radar);

        const std::size_t frames = samples_for(scene.duration_s, radar.slow_time_step_s);
        const std::size_t L = radar.num_range_bins;
        const std::size_t K = radar.num_virtual_elements;
        const double lambda = radar.center_wavelength_m;

        ChannelCube cube;
        cube.radar = radar;
        cube.data = Array3<cdouble>(frames, L, K);

        std::vector<PointScatterer> scatterers;
        for (const auto &tg : scene.targets)
        {
            double r0 = scatterer_range(tg.x_m, tg.y_m);
            double az0 = scatterer_azimuth(tg.x_m, tg.y_m);
            double ux = std::sin(az0), uy = std::cos(az0);
            std::size_t n = tg.num_scatterers;
            double amp = tg.rcs_scale / std::sqrt(static_cast<double>(n));
            // Surface roughness: a fixed per-body phase pattern, independent of the noise seed.
            std::mt19937_64 surface(0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(tg.id));
            std::uniform_real_distribution<double> roughness(0.0, 2.0 * pi);
            for (std::size_t s = 0; s < n; ++s)
            {
                double frac = n > 1 ? static_cast<double>(s) / static_cast<double>(n - 1) : 0.0;
                double radial = frac * tg.body_depth_m, lateral = 0.0;
                if (tg.body_width_m > 0.0)
                {
                    // curved torso front: edges sit deeper than the centre
                    lateral = tg.body_width_m * (frac - 0.5);
                    double e = 2.0 * lateral / tg.body_width_m;
                    radial = tg.body_depth_m * e * e;
                }
                double x = tg.x_m + radial * ux + lateral * uy;
                double y = tg.y_m + radial * uy - lateral * ux;
                double r = scatterer_range(x, y);
                double motion = 1.0 - tg.motion_spread * frac;
                double rough = n > 1 ? roughness(surface) : 0.0;
                scatterers.push_back({r, scatterer_azimuth(x, y), amp / std::max(r, min_range_m), &tg.breathing, motion, rough});
            }
        }
        for (const auto &cl : scene.clutter)
        {
            double r = scatterer_range(cl.x_m, cl.y_m);
            scatterers.push_back({r, scatterer_azimuth(cl.x_m, cl.y_m), cl.rcs_scale / std::max(r, min_range_m), nullptr});
        }

        std::vector<cdouble> steering(K);
        for (const auto &sc : scatterers)
        {
            for (std::size_t k = 0; k < K; ++k)
                steering[k] = std::polar(1.0, -2.0 * pi * radar.element_x(k) * std::sin(sc.azimuth_rad) / lambda);

            double centre = sc.range_m / radar.range_resolution_m;
            long nearest = std::lround(centre);
            std::vector<std::pair<std::size_t, double>> bins;
            for (long l = nearest - envelope_half_width; l <= nearest + envelope_half_width; ++l)
            {
                if (l < 0 || l >= static_cast<long>(L))
                    continue;
                double s = sinc(static_cast<double>(l) - centre);
                double env = s * s;
                if (env > 0.0)
                    bins.emplace_back(static_cast<std::size_t>(l), env);
            }

            cdouble static_phase = std::polar(sc.amplitude, -4.0 * pi * sc.range_m / lambda + sc.extra_phase);
            for (std::size_t i = 0; i < frames; ++i)
            {
                cdouble a = static_phase;
                if (sc.breathing)
                {
                    double t = static_cast<double>(i) * radar.slow_time_step_s;
                    a *= std::polar(1.0, 4.0 * pi * sc.motion_scale * breathing_displacement(*sc.breathing, t) / lambda);
                }
                for (const auto &[l, env] : bins)
                {
                    auto row = cube.data.row(i, l);
                    for (std::size_t k = 0; k < K; ++k)
                        row[k] += a * env * steering[k];
                }
            }
        }

        if (scene.noise_power > 0.0)
        {
            std::mt19937_64 rng(seed);
            std::normal_distribution<double> gauss(0.0, std::sqrt(scene.noise_power / 2.0));
            for (auto &v : cube.data.data())
            {
                double re = gauss(rng);
                double im = gauss(rng);
                v += cdouble(re, im);
            }
        }
        return cube;
    }

    std::vector<TruthInterval> truth_intervals(const SceneSpec &scene, double t)
    {
        std::vector<TruthInterval> out;
        out.reserve(scene.targets.size());
        for (const auto &tg : scene.targets)
            out.push_back({tg.id, tg.breathing.interval_at(t)});
        return out;
    }
}
