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

#include <cstdint>
#include <map>
#include <optional>
#include <tuple>
#include <string>
#include <vector>

namespace resparray
{
    struct CountTrial
    {
        double eval_time_s = 0.0;
        std::uint64_t seed = 0;
        std::size_t estimated_count = 0;
        std::size_t true_count = 0;
        std::string method; // "2d" or "resp4d"
    };

    struct CountAccuracy
    {
        std::string method;
        std::size_t correct = 0;
        std::size_t trials = 0;
        double rate() const { return trials ? static_cast<double>(correct) / static_cast<double>(trials) : 0.0; }
    };

    // One entry per method, sorted by method name.
    std::vector<CountAccuracy> count_accuracy(const std::vector<CountTrial> &trials);

    struct TruthSubject
    {
        int subject_id = 0;
        double x_m = 0.0, y_m = 0.0;
    };

    struct Assignment
    {
        // (estimate index, subject id) pairs.
        std::vector<std::pair<std::size_t, int>> matches;
        std::vector<std::size_t> unmatched_estimates;
    };

    // Greedy nearest-first assignment at one evaluation time; each subject is
    // used at most once and pairs farther than max_distance_m are rejected.
    Assignment match_people(const std::vector<PersonEstimate> &estimates, const std::vector<TruthSubject> &truth,
                            double max_distance_m = 1.0);

    struct IntervalSeries
    {
        int subject_id = 0;
        std::vector<std::pair<double, double>> samples; // (t_s, interval_s), strictly increasing t
    };

    // RMS of radar - truth in milliseconds at the radar timestamps that fall
    // inside the truth support and at or after warmup_s. Truth is linearly
    // interpolated.
    double interval_rmse(const IntervalSeries &radar, const IntervalSeries &truth, double warmup_s = 0.0);

    // Truth CSV with header t_s,subject_id,interval_s.
    std::map<int, IntervalSeries> parse_truth_csv(const std::string &text);
    std::string truth_csv(const std::map<int, IntervalSeries> &series);

    // Subjects CSV with header subject_id,x_m,y_m.
    std::vector<TruthSubject> parse_subjects_csv(const std::string &text);
    std::string subjects_csv(const std::vector<TruthSubject> &subjects);

    // Radar interval series per subject from matched estimates over time.
    std::map<int, IntervalSeries> radar_series(const std::vector<std::vector<PersonEstimate>> &per_tick,
                                               const std::vector<TruthSubject> &truth, double max_distance_m = 1.0);
}
