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

#include "resparray/clustering.hpp"
#include "resparray/evaluation.hpp"
#include "resparray/imaging.hpp"
#include "resparray/respiration.hpp"
#include "resparray/scene_sim.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace resparray
{
    enum class ClusteringMethod
    {
        planar_2d,
        resp_4d
    };

    std::string method_name(ClusteringMethod m);
    ClusteringMethod method_from_name(const std::string &name);

    // Every tunable of the processing chain.
    struct PipelineConfig
    {
        // imaging
        double clutter_window_s = 30.0; // T_c
        double power_window_s = 20.0;   // T_P
        std::size_t fft_size = 32;
        bool one_sided_grid = false;
        double taylor_sidelobe_db = -35.0;
        std::size_t taylor_nbar = 5;
        std::size_t noise_range_bins = 8; // farthest range bins, all angles
        double noise_floor = 0.0;         // > 0 skips the estimate
        // respiration
        double hpf_window_s = 5.1; // T_HPF, 51 samples
        double lpf_window_s = 1.1; // T_LPF, 11 samples
        double max_interval_s = 8.0;
        double gate_db = 10.0;
        double resp_step_s = 1.0;
        double tie_tolerance = 0.05;
        bool parabolic_refinement = false;
        // clustering
        double cycle_s = 6.0; // T_cy
        std::size_t median_range = 3;
        std::size_t median_angle = 4;
        double velocity_mps = 7.5e-2;
        double alpha = 0.15;
        double theta_scale = 1.0;
        double merge_distance_m = 0.6;
        double min_variance = 1e-12;
        // scheduling
        double cadence_s = 10.0;
        std::uint64_t seed = 0;

        void validate(double slow_time_step_s) const;
    };

    PipelineConfig config_from_json_text(const std::string &text, PipelineConfig base = {});
    std::string config_to_json_text(const PipelineConfig &cfg);

    // Clustering times k * cadence for k >= 1 up to duration - cadence.
    std::vector<double> evaluation_ticks(double duration_s, double cadence_s);

    // Warm-up before interval scoring: max(T_c, T_HPF) + T_0.
    double scoring_warmup_s(const PipelineConfig &cfg);

    // Everything before the clustering stage, shared by both methods.
    struct PreparedRun
    {
        PipelineConfig config;
        PowerImage power;     // noise-normalised
        RespImage smoothed;   // at the respiratory grid times
        std::vector<double> ticks;
        std::map<std::string, std::string> stage_digests;
        std::map<std::string, double> stage_seconds;

        std::size_t resp_index(double t) const;
        std::size_t power_frame(double t) const;
    };

    PreparedRun prepare_run(const ChannelCube &cube, const PipelineConfig &cfg,
                            std::span<const cdouble> calibration = {});

    struct TickResult
    {
        double time_s = 0.0;
        PointCloud cloud;
        std::vector<Cluster> clusters;
        std::vector<PersonEstimate> people;
    };

    TickResult cluster_tick(const PreparedRun &run, std::size_t tick_index, ClusteringMethod method, std::uint64_t seed);

    // Per-tick clustering seed derived from the run seed.
    std::uint64_t tick_seed(std::uint64_t seed, std::size_t tick_index);

    struct MethodRun
    {
        ClusteringMethod method;
        std::vector<std::vector<PersonEstimate>> people; // per tick, primary seed
        std::vector<std::vector<std::size_t>> counts;    // [seed offset][tick]
    };

    MethodRun run_method(const PreparedRun &run, ClusteringMethod method, std::uint64_t first_seed, std::size_t num_seeds);

    // results CSV: timestamp_s,person_id,x_m,y_m,interval_s,cluster_size
    std::string results_csv(const std::vector<std::vector<PersonEstimate>> &people);
    std::vector<std::vector<PersonEstimate>> parse_results_csv(const std::string &text);

    // counts CSV: seed,timestamp_s,count
    std::string counts_csv(const MethodRun &mr, const std::vector<double> &ticks, std::uint64_t first_seed);

    // Plot tables. Respiratory image: range_m,theta_rad,x_m,y_m,tau_s,valid.
    std::string respiratory_frame_csv(const RespImage &img, std::size_t index);
    // Cloud scatter: r_m,theta_rad,u1_m,u2_m,weight,cluster (merged cluster index).
    std::string cloud_csv(const TickResult &tick);

    // Truth series for a scene sampled every `step_s`.
    std::map<int, IntervalSeries> scene_truth_series(const SceneSpec &scene, double step_s);
    std::vector<TruthSubject> scene_subjects(const SceneSpec &scene);

    std::string sha256_hex(const void *data, std::size_t size);
    std::string sha256_hex(const std::string &text);

    inline constexpr const char *tool_version = "resparray 1.0.0";
}
