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

#include "resparray/pipeline.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <set>
#include <sstream>

using nlohmann::json;

namespace resparray
{
    std::string method_name(ClusteringMethod m)
    {
        return m == ClusteringMethod::planar_2d ? "2d" : "resp4d";
    }

    ClusteringMethod method_from_name(const std::string &name)
    {
        if (name == "2d")
            return ClusteringMethod::planar_2d;
        if (name == "resp4d")
            return ClusteringMethod::resp_4d;
        throw ValidationError("unknown clustering method '" + name + "' (expected 2d or resp4d)");
    }

    void PipelineConfig::validate(double slow_time_step_s) const
    {
        auto positive = [](double v, const char *name)
        {
            if (!(v > 0.0))
                throw ValidationError(std::string("config.") + name + " must be > 0");
        };
        positive(clutter_window_s, "clutter_window_s");
        positive(power_window_s, "power_window_s");
        positive(hpf_window_s, "hpf_window_s");
        positive(lpf_window_s, "lpf_window_s");
        positive(max_interval_s, "max_interval_s");
        positive(resp_step_s, "resp_step_s");
        positive(cycle_s, "cycle_s");
        positive(velocity_mps, "velocity_mps");
        positive(alpha, "alpha");
        positive(theta_scale, "theta_scale");
        positive(merge_distance_m, "merge_distance_m");
        positive(min_variance, "min_variance");
        positive(cadence_s, "cadence_s");
        if (cadence_s < slow_time_step_s)
            throw ValidationError("config.cadence_s must be >= slow_time_step_s");
        if (!(hpf_window_s > lpf_window_s) || !(lpf_window_s > slow_time_step_s))
            throw ValidationError("config: require hpf_window_s > lpf_window_s > slow_time_step_s");
        if (tie_tolerance < 0.0)
            throw ValidationError("config.tie_tolerance must be >= 0");
        if (noise_floor < 0.0)
            throw ValidationError("config.noise_floor must be >= 0");
        if (noise_range_bins < 1)
            throw ValidationError("config.noise_range_bins must be >= 1");
        double ratio = cycle_s / resp_step_s;
        if (std::abs(ratio - std::round(ratio)) > 1e-9)
            throw ValidationError("config.cycle_s must be a multiple of resp_step_s");
    }

    namespace
    {
        template <typename T>
        void read_field(const json &j, const char *key, T &dst)
        {
            if (!j.contains(key))
                return;
            try
            {
                dst = j.at(key).get<T>();
            }
            catch (const json::exception &)
            {
                throw ValidationError(std::string("config.") + key + ": wrong type");
            }
        }
    }

    PipelineConfig config_from_json_text(const std::string &text, PipelineConfig c)
    {
        json j;
        try
        {
            j = json::parse(text);
        }
        catch (const json::parse_error &e)
        {
            throw ValidationError(std::string("config: ") + e.what());
        }
        if (!j.is_object())
            throw ValidationError("config: top level must be an object");
        static const std::set<std::string> known = {
            "clutter_window_s", "power_window_s", "fft_size", "one_sided_grid", "taylor_sidelobe_db", "taylor_nbar",
            "noise_range_bins", "noise_floor", "hpf_window_s", "lpf_window_s", "max_interval_s", "gate_db", "resp_step_s",
            "tie_tolerance", "parabolic_refinement", "cycle_s", "median_range", "median_angle", "velocity_mps",
            "alpha", "theta_scale", "merge_distance_m", "min_variance", "cadence_s", "seed"};
        for (const auto &[k, _] : j.items())
            if (!known.count(k))
                throw ValidationError("config." + k + ": unknown parameter");

        read_field(j, "clutter_window_s", c.clutter_window_s);
        read_field(j, "power_window_s", c.power_window_s);
        read_field(j, "fft_size", c.fft_size);
        read_field(j, "one_sided_grid", c.one_sided_grid);
        read_field(j, "taylor_sidelobe_db", c.taylor_sidelobe_db);
        read_field(j, "taylor_nbar", c.taylor_nbar);
        read_field(j, "noise_range_bins", c.noise_range_bins);
        read_field(j, "noise_floor", c.noise_floor);
        read_field(j, "hpf_window_s", c.hpf_window_s);
        read_field(j, "lpf_window_s", c.lpf_window_s);
        read_field(j, "max_interval_s", c.max_interval_s);
        read_field(j, "gate_db", c.gate_db);
        read_field(j, "resp_step_s", c.resp_step_s);
        read_field(j, "tie_tolerance", c.tie_tolerance);
        read_field(j, "parabolic_refinement", c.parabolic_refinement);
        read_field(j, "cycle_s", c.cycle_s);
        read_field(j, "median_range", c.median_range);
        read_field(j, "median_angle", c.median_angle);
        read_field(j, "velocity_mps", c.velocity_mps);
        read_field(j, "alpha", c.alpha);
        read_field(j, "theta_scale", c.theta_scale);
        read_field(j, "merge_distance_m", c.merge_distance_m);
        read_field(j, "min_variance", c.min_variance);
        read_field(j, "cadence_s", c.cadence_s);
        read_field(j, "seed", c.seed);
        return c;
    }

    std::string config_to_json_text(const PipelineConfig &c)
    {
        json j{{"clutter_window_s", c.clutter_window_s},
               {"power_window_s", c.power_window_s},
               {"fft_size", c.fft_size},
               {"one_sided_grid", c.one_sided_grid},
               {"taylor_sidelobe_db", c.taylor_sidelobe_db},
               {"taylor_nbar", c.taylor_nbar},
               {"noise_range_bins", c.noise_range_bins},
               {"noise_floor", c.noise_floor},
               {"hpf_window_s", c.hpf_window_s},
               {"lpf_window_s", c.lpf_window_s},
               {"max_interval_s", c.max_interval_s},
               {"gate_db", c.gate_db},
               {"resp_step_s", c.resp_step_s},
               {"tie_tolerance", c.tie_tolerance},
               {"parabolic_refinement", c.parabolic_refinement},
               {"cycle_s", c.cycle_s},
               {"median_range", c.median_range},
               {"median_angle", c.median_angle},
               {"velocity_mps", c.velocity_mps},
               {"alpha", c.alpha},
               {"theta_scale", c.theta_scale},
               {"merge_distance_m", c.merge_distance_m},
               {"min_variance", c.min_variance},
               {"cadence_s", c.cadence_s},
               {"seed", c.seed}};
        return j.dump(2);
    }

    std::vector<double> evaluation_ticks(double duration_s, double cadence_s)
    {
        std::vector<double> ticks;
        for (int k = 1;; ++k)
        {
            double t = k * cadence_s;
            if (t > duration_s - cadence_s + 1e-9)
                break;
            ticks.push_back(t);
        }
        return ticks;
    }

    double scoring_warmup_s(const PipelineConfig &cfg)
    {
        return std::max(cfg.clutter_window_s, cfg.hpf_window_s) + cfg.max_interval_s;
    }

    std::size_t PreparedRun::resp_index(double t) const
    {
        for (std::size_t i = 0; i < smoothed.times_s.size(); ++i)
            if (std::abs(smoothed.times_s[i] - t) < 1e-6)
                return i;
        throw ValidationError("no respiratory image at t = " + std::to_string(t));
    }

    std::size_t PreparedRun::power_frame(double t) const
    {
        long f = std::lround((t - power.t0_s) / power.radar.slow_time_step_s);
        if (f < 0 || f >= static_cast<long>(power.values.n0()))
            throw ValidationError("no power frame at t = " + std::to_string(t));
        return static_cast<std::size_t>(f);
    }

    namespace
    {
        using Clock = std::chrono::steady_clock;

        double seconds_since(Clock::time_point t0)
        {
            return std::chrono::duration<double>(Clock::now() - t0).count();
        }

        RespImage slice(const RespImage &r, std::size_t ti)
        {
            RespImage s;
            s.times_s = {r.times_s[ti]};
            s.grid = r.grid;
            s.radar = r.radar;
            s.max_interval_s = r.max_interval_s;
            const std::size_t L = r.tau.n1(), N = r.tau.n2();
            s.tau = Array3<double>(1, L, N);
            s.valid = Array3<std::uint8_t>(1, L, N);
            for (std::size_t l = 0; l < L; ++l)
                for (std::size_t n = 0; n < N; ++n)
                {
                    s.tau(0, l, n) = r.tau(ti, l, n);
                    s.valid(0, l, n) = r.valid(ti, l, n);
                }
            return s;
        }
    }

    PreparedRun prepare_run(const ChannelCube &cube, const PipelineConfig &cfg, std::span<const cdouble> calibration)
    {
        const auto &radar = cube.radar;
        radar.validate();
        cfg.validate(radar.slow_time_step_s);
        const std::size_t K = radar.num_virtual_elements;

        PreparedRun run;
        run.config = cfg;
        double duration = static_cast<double>(cube.num_frames()) * radar.slow_time_step_s;
        run.ticks = evaluation_ticks(duration, cfg.cadence_s);

        std::vector<cdouble> calib(calibration.begin(), calibration.end());
        if (calib.empty())
            calib.assign(K, cdouble(1.0, 0.0));
        auto taper = taylor_taper(K, cfg.taylor_sidelobe_db, cfg.taylor_nbar);
        AngleGrid grid = cfg.one_sided_grid ? AngleGrid::one_sided(cfg.fft_size / 2) : AngleGrid::symmetric(cfg.fft_size);

        auto t0 = Clock::now();
        ComplexImage clutter_free;
        {
            ComplexImage raw = beamform(cube, calib, taper, grid);
            clutter_free = suppress_clutter(raw, cfg.clutter_window_s);
        }
        run.stage_seconds["imaging"] = seconds_since(t0);

        t0 = Clock::now();
        const std::size_t L = radar.num_range_bins;
        if (cfg.noise_range_bins > L)
            throw ValidationError("config.noise_range_bins exceeds the number of range bins");
        NoiseRegion noise{L - cfg.noise_range_bins, L, 0, grid.size()};
        if (cfg.noise_floor > 0.0)
            run.power = normalize_power(power_image(clutter_free, cfg.power_window_s), cfg.noise_floor);
        else
            run.power = normalize_power(power_image(clutter_free, cfg.power_window_s), noise);
        run.stage_seconds["power"] = seconds_since(t0);

        t0 = Clock::now();
        DisplacementField d = bandpass(displacement(clutter_free), cfg.hpf_window_s, cfg.lpf_window_s);
        clutter_free = ComplexImage{};
        run.stage_seconds["displacement"] = seconds_since(t0);

        // Respiratory grid: every resp_step within [tick - 2 T_cy, tick].
        t0 = Clock::now();
        std::set<long> grid_steps;
        long span = std::lround(2.0 * cfg.cycle_s / cfg.resp_step_s);
        for (double tick : run.ticks)
        {
            long k = std::lround(tick / cfg.resp_step_s);
            for (long j = std::max(0L, k - span); j <= k; ++j)
                grid_steps.insert(j);
        }
        std::vector<double> times;
        for (long j : grid_steps)
            times.push_back(static_cast<double>(j) * cfg.resp_step_s);

        IntervalSearch search;
        search.max_interval_s = cfg.max_interval_s;
        search.gate_db = cfg.gate_db;
        search.tie_tolerance = cfg.tie_tolerance;
        search.parabolic_refinement = cfg.parabolic_refinement;
        RespImage resp = resp_interval_image(d, run.power, times, search);
        run.stage_seconds["respiratory_image"] = seconds_since(t0);

        t0 = Clock::now();
        run.smoothed = smooth_resp_image(resp, {cfg.cycle_s, cfg.median_range, cfg.median_angle});
        run.stage_seconds["smoothing"] = seconds_since(t0);

        const auto &pv = run.power.values.data();
        run.stage_digests["power_image"] = sha256_hex(pv.data(), pv.size() * sizeof(double));
        const auto &tv = run.smoothed.tau.data();
        const auto &vv = run.smoothed.valid.data();
        run.stage_digests["respiratory_image"] = sha256_hex(tv.data(), tv.size() * sizeof(double)) + sha256_hex(vv.data(), vv.size()).substr(0, 16);
        return run;
    }

    std::uint64_t tick_seed(std::uint64_t seed, std::size_t tick_index)
    {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(tick_index)};
        std::array<std::uint32_t, 2> out{};
        seq.generate(out.begin(), out.end());
        return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
    }

    TickResult cluster_tick(const PreparedRun &run, std::size_t tick_index, ClusteringMethod method, std::uint64_t seed)
    {
        if (tick_index >= run.ticks.size())
            throw ValidationError("cluster_tick: tick index out of range");
        const auto &cfg = run.config;
        TickResult res;
        res.time_s = run.ticks[tick_index];
        std::size_t frame = run.power_frame(res.time_s);
        RespImage now = slice(run.smoothed, run.resp_index(res.time_s));

        CloudOptions opts;
        opts.alpha = cfg.alpha;
        opts.velocity_mps = cfg.velocity_mps;
        opts.theta_scale = cfg.theta_scale;
        opts.min_power = std::pow(10.0, cfg.gate_db / 10.0);
        if (method == ClusteringMethod::resp_4d)
        {
            RespImage prev = slice(run.smoothed, run.resp_index(res.time_s - cfg.cycle_s));
            opts.space = CloudSpace::respiratory;
            res.cloud = build_point_cloud(run.power, frame, &now, &prev, opts);
        }
        else
        {
            opts.space = CloudSpace::planar;
            res.cloud = build_point_cloud(run.power, frame, &now, nullptr, opts);
        }

        BicOptions bic_opts{cfg.min_variance};
        auto clusters = xmeans(res.cloud, tick_seed(seed, tick_index), bic_opts);
        clusters = merge_clusters(res.cloud, std::move(clusters), cfg.merge_distance_m);
        std::sort(clusters.begin(), clusters.end(), [](const Cluster &a, const Cluster &b)
                  { return a.x_m != b.x_m ? a.x_m < b.x_m : a.y_m < b.y_m; });
        res.clusters = std::move(clusters);
        auto rule = method == ClusteringMethod::resp_4d ? Representative::max_power : Representative::centroid;
        res.people = representative_positions(res.cloud, res.clusters, res.time_s, rule);
        return res;
    }

    MethodRun run_method(const PreparedRun &run, ClusteringMethod method, std::uint64_t first_seed, std::size_t num_seeds)
    {
        MethodRun mr;
        mr.method = method;
        mr.counts.assign(num_seeds, std::vector<std::size_t>(run.ticks.size(), 0));
        for (std::size_t s = 0; s < num_seeds; ++s)
            for (std::size_t i = 0; i < run.ticks.size(); ++i)
            {
                auto res = cluster_tick(run, i, method, first_seed + s);
                mr.counts[s][i] = res.people.size();
                if (s == 0)
                    mr.people.push_back(std::move(res.people));
            }
        return mr;
    }

    std::string results_csv(const std::vector<std::vector<PersonEstimate>> &people)
    {
        std::ostringstream os;
        os << "timestamp_s,person_id,x_m,y_m,interval_s,cluster_size\n";
        char line[160];
        for (const auto &tick : people)
            for (const auto &p : tick)
            {
                std::snprintf(line, sizeof line, "%.3f,%d,%.4f,%.4f,%.3f,%zu\n", p.timestamp_s, p.person_id, p.x_m, p.y_m, p.interval_s, p.cluster_size);
                os << line;
            }
        return os.str();
    }

    std::vector<std::vector<PersonEstimate>> parse_results_csv(const std::string &text)
    {
        std::vector<std::vector<PersonEstimate>> out;
        std::istringstream in(text);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line))
        {
            ++lineno;
            if (lineno == 1 || line.empty())
                continue;
            PersonEstimate p;
            char interval[32] = {0};
            if (std::sscanf(line.c_str(), "%lf,%d,%lf,%lf,%31[^,],%zu", &p.timestamp_s, &p.person_id, &p.x_m, &p.y_m, interval, &p.cluster_size) != 6)
                throw ValidationError("results csv: line " + std::to_string(lineno) + ": malformed row");
            p.interval_s = std::strtod(interval, nullptr);
            if (out.empty() || std::abs(out.back().front().timestamp_s - p.timestamp_s) > 1e-9)
                out.emplace_back();
            out.back().push_back(p);
        }
        return out;
    }

    std::string counts_csv(const MethodRun &mr, const std::vector<double> &ticks, std::uint64_t first_seed)
    {
        std::ostringstream os;
        os << "seed,timestamp_s,count\n";
        char line[96];
        for (std::size_t s = 0; s < mr.counts.size(); ++s)
            for (std::size_t i = 0; i < ticks.size(); ++i)
            {
                std::snprintf(line, sizeof line, "%llu,%.3f,%zu\n", static_cast<unsigned long long>(first_seed + s), ticks[i], mr.counts[s][i]);
                os << line;
            }
        return os.str();
    }

    std::string respiratory_frame_csv(const RespImage &img, std::size_t index)
    {
        if (index >= img.times_s.size())
            throw ValidationError("respiratory_frame_csv: index out of range");
        std::ostringstream os;
        os << "range_m,theta_rad,x_m,y_m,tau_s,valid\n";
        char line[160];
        for (std::size_t l = 0; l < img.tau.n1(); ++l)
            for (std::size_t n = 0; n < img.tau.n2(); ++n)
            {
                double r = img.radar.range_of_bin(l), th = img.grid.theta[n];
                auto [x, y] = polar_to_cartesian(r, th);
                std::snprintf(line, sizeof line, "%.4f,%.6f,%.4f,%.4f,%.3f,%d\n", r, th, x, y, img.tau(index, l, n), int(img.valid(index, l, n)));
                os << line;
            }
        return os.str();
    }

    std::string cloud_csv(const TickResult &tick)
    {
        std::vector<long> label(tick.cloud.points.size(), -1);
        for (std::size_t c = 0; c < tick.clusters.size(); ++c)
            for (auto i : tick.clusters[c].members)
                label[i] = static_cast<long>(c);
        std::ostringstream os;
        os << "r_m,theta_rad,u1_m,u2_m,weight,cluster\n";
        char line[160];
        for (std::size_t i = 0; i < tick.cloud.points.size(); ++i)
        {
            const auto &p = tick.cloud.points[i];
            std::snprintf(line, sizeof line, "%.4f,%.6f,%.4f,%.4f,%u,%ld\n", p.r_m, p.theta_rad, p.u1_m, p.u2_m, p.weight, label[i]);
            os << line;
        }
        return os.str();
    }

    std::map<int, IntervalSeries> scene_truth_series(const SceneSpec &scene, double step_s)
    {
        std::map<int, IntervalSeries> out;
        std::size_t n = samples_for(scene.duration_s, step_s);
        for (std::size_t i = 0; i < n; ++i)
        {
            double t = static_cast<double>(i) * step_s;
            for (const auto &ti : truth_intervals(scene, t))
            {
                auto &s = out[ti.target_id];
                s.subject_id = ti.target_id;
                s.samples.emplace_back(t, ti.interval_s);
            }
        }
        return out;
    }

    std::vector<TruthSubject> scene_subjects(const SceneSpec &scene)
    {
        std::vector<TruthSubject> out;
        for (const auto &t : scene.targets)
            out.push_back({t.id, t.x_m, t.y_m});
        return out;
    }

    std::string sha256_hex(const void *data, std::size_t size)
    {
        unsigned char md[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
        if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
            EVP_DigestUpdate(ctx.get(), data, size) != 1 || EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
            throw std::runtime_error("sha256: digest failed");
        static const char *hex = "0123456789abcdef";
        std::string out;
        for (unsigned int i = 0; i < len; ++i)
        {
            out.push_back(hex[md[i] >> 4]);
            out.push_back(hex[md[i] & 0xf]);
        }
        return out;
    }

    std::string sha256_hex(const std::string &text)
    {
        return sha256_hex(text.data(), text.size());
    }
}
