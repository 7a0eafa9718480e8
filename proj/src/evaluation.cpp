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

#include "resparray/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace resparray
{
    std::vector<CountAccuracy> count_accuracy(const std::vector<CountTrial> &trials)
    {
        std::map<std::string, CountAccuracy> by_method;
        for (const auto &t : trials)
        {
            auto &acc = by_method[t.method];
            acc.method = t.method;
            ++acc.trials;
            if (t.estimated_count == t.true_count)
                ++acc.correct;
        }
        std::vector<CountAccuracy> out;
        for (auto &[_, acc] : by_method)
            out.push_back(acc);
        return out;
    }

    Assignment match_people(const std::vector<PersonEstimate> &estimates, const std::vector<TruthSubject> &truth,
                            double max_distance_m)
    {
        struct Candidate
        {
            double dist;
            std::size_t est, sub;
        };
        std::vector<Candidate> cands;
        for (std::size_t e = 0; e < estimates.size(); ++e)
            for (std::size_t s = 0; s < truth.size(); ++s)
            {
                double d = std::hypot(estimates[e].x_m - truth[s].x_m, estimates[e].y_m - truth[s].y_m);
                if (d <= max_distance_m)
                    cands.push_back({d, e, s});
            }
        std::stable_sort(cands.begin(), cands.end(), [](const auto &a, const auto &b) { return a.dist < b.dist; });

        Assignment out;
        std::vector<bool> est_used(estimates.size(), false), sub_used(truth.size(), false);
        for (const auto &c : cands)
        {
            if (est_used[c.est] || sub_used[c.sub])
                continue;
            est_used[c.est] = sub_used[c.sub] = true;
            out.matches.emplace_back(c.est, truth[c.sub].subject_id);
        }
        std::sort(out.matches.begin(), out.matches.end());
        for (std::size_t e = 0; e < estimates.size(); ++e)
            if (!est_used[e])
                out.unmatched_estimates.push_back(e);
        return out;
    }

    namespace
    {
        double interpolate(const std::vector<std::pair<double, double>> &s, double t)
        {
            auto it = std::lower_bound(s.begin(), s.end(), t, [](const auto &p, double v) { return p.first < v; });
            if (it == s.begin())
                return it->second;
            if (it == s.end())
                return s.back().second;
            const auto &[t1, v1] = *it;
            const auto &[t0, v0] = *(it - 1);
            return t1 == t0 ? v1 : v0 + (v1 - v0) * (t - t0) / (t1 - t0);
        }
    }

    double interval_rmse(const IntervalSeries &radar, const IntervalSeries &truth, double warmup_s)
    {
        if (truth.samples.empty() || radar.samples.empty())
            throw ValidationError("interval_rmse: no overlap between radar and truth series");
        const double lo = truth.samples.front().first, hi = truth.samples.back().first;
        double acc = 0.0;
        std::size_t n = 0;
        for (const auto &[t, v] : radar.samples)
        {
            if (t < lo || t > hi || t < warmup_s)
                continue;
            double diff = v - interpolate(truth.samples, t);
            acc += diff * diff;
            ++n;
        }
        if (n == 0)
            throw ValidationError("interval_rmse: no overlap between radar and truth series");
        return 1000.0 * std::sqrt(acc / static_cast<double>(n));
    }

    namespace
    {
        std::vector<std::vector<std::string>> csv_rows(const std::string &text, std::size_t columns, const char *what)
        {
            std::vector<std::vector<std::string>> rows;
            std::istringstream in(text);
            std::string line;
            std::size_t lineno = 0;
            while (std::getline(in, line))
            {
                ++lineno;
                if (!line.empty() && line.back() == '\r')
                    line.pop_back();
                if (line.empty() || lineno == 1)
                    continue;
                std::vector<std::string> cells;
                std::stringstream ls(line);
                std::string cell;
                while (std::getline(ls, cell, ','))
                    cells.push_back(cell);
                if (cells.size() != columns)
                    throw ValidationError(std::string(what) + ": line " + std::to_string(lineno) + ": expected " + std::to_string(columns) + " columns");
                rows.push_back(std::move(cells));
            }
            return rows;
        }

        double to_double(const std::string &s, const char *what)
        {
            try
            {
                std::size_t pos = 0;
                double v = std::stod(s, &pos);
                if (pos != s.size())
                    throw std::invalid_argument(s);
                return v;
            }
            catch (const std::exception &)
            {
                throw ValidationError(std::string(what) + ": not a number: '" + s + "'");
            }
        }
    }

    std::map<int, IntervalSeries> parse_truth_csv(const std::string &text)
    {
        std::map<int, IntervalSeries> out;
        for (const auto &row : csv_rows(text, 3, "truth csv"))
        {
            double t = to_double(row[0], "truth csv");
            int id = static_cast<int>(to_double(row[1], "truth csv"));
            double iv = to_double(row[2], "truth csv");
            auto &s = out[id];
            s.subject_id = id;
            if (!s.samples.empty() && !(t > s.samples.back().first))
                throw ValidationError("truth csv: timestamps must be strictly increasing per subject");
            s.samples.emplace_back(t, iv);
        }
        return out;
    }

    std::string truth_csv(const std::map<int, IntervalSeries> &series)
    {
        // Row order: by time, then subject.
        std::vector<std::tuple<double, int, double>> rows;
        for (const auto &[id, s] : series)
            for (const auto &[t, v] : s.samples)
                rows.emplace_back(t, id, v);
        std::sort(rows.begin(), rows.end());
        std::ostringstream os;
        os << "t_s,subject_id,interval_s\n";
        char line[96];
        for (const auto &[t, id, v] : rows)
        {
            std::snprintf(line, sizeof line, "%.3f,%d,%.6f\n", t, id, v);
            os << line;
        }
        return os.str();
    }

    std::vector<TruthSubject> parse_subjects_csv(const std::string &text)
    {
        std::vector<TruthSubject> out;
        for (const auto &row : csv_rows(text, 3, "subjects csv"))
            out.push_back({static_cast<int>(to_double(row[0], "subjects csv")), to_double(row[1], "subjects csv"), to_double(row[2], "subjects csv")});
        return out;
    }

    std::string subjects_csv(const std::vector<TruthSubject> &subjects)
    {
        std::ostringstream os;
        os << "subject_id,x_m,y_m\n";
        char line[96];
        for (const auto &s : subjects)
        {
            std::snprintf(line, sizeof line, "%d,%.6f,%.6f\n", s.subject_id, s.x_m, s.y_m);
            os << line;
        }
        return os.str();
    }

    std::map<int, IntervalSeries> radar_series(const std::vector<std::vector<PersonEstimate>> &per_tick,
                                               const std::vector<TruthSubject> &truth, double max_distance_m)
    {
        std::map<int, IntervalSeries> out;
        for (const auto &ests : per_tick)
        {
            auto a = match_people(ests, truth, max_distance_m);
            for (auto [e, id] : a.matches)
            {
                const auto &pe = ests[e];
                if (std::isnan(pe.interval_s))
                    continue;
                auto &s = out[id];
                s.subject_id = id;
                if (s.samples.empty() || pe.timestamp_s > s.samples.back().first)
                    s.samples.emplace_back(pe.timestamp_s, pe.interval_s);
            }
        }
        return out;
    }
}
