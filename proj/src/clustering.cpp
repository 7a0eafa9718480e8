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

#include "resparray/clustering.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace resparray
{
    std::pair<double, double> polar_to_cartesian(double r_m, double theta_rad)
    {
        return {r_m * std::sin(theta_rad), r_m * std::cos(theta_rad)};
    }

    std::size_t PointCloud::total_weight() const
    {
        std::size_t w = 0;
        for (const auto &p : points)
            w += p.weight;
        return w;
    }

    std::array<double, 4> PointCloud::coords(std::size_t i) const
    {
        const auto &p = points[i];
        return {p.r_m, theta_scale * p.theta_rad, p.u1_m, p.u2_m};
    }

    namespace
    {
        double median_of(std::vector<double> &v)
        {
            std::sort(v.begin(), v.end());
            std::size_t n = v.size();
            return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
        }

        double sq_dist(const std::array<double, 4> &a, const std::array<double, 4> &b, std::size_t dim)
        {
            double s = 0.0;
            for (std::size_t d = 0; d < dim; ++d)
                s += (a[d] - b[d]) * (a[d] - b[d]);
            return s;
        }
    }

    RespImage smooth_resp_image(const RespImage &resp, const SmoothingOptions &opts)
    {
        if (!(opts.window_s > 0.0))
            throw ValidationError("smooth_resp_image: T_cy must be > 0");
        if (opts.median_range < 1 || opts.median_angle < 1)
            throw ValidationError("smooth_resp_image: median filter size must be >= 1");

        const std::size_t T = resp.tau.n0(), L = resp.tau.n1(), N = resp.tau.n2();
        RespImage averaged = resp;
        const double eps = 1e-9;
        for (std::size_t ti = 0; ti < T; ++ti)
        {
            double t = resp.times_s[ti];
            for (std::size_t l = 0; l < L; ++l)
                for (std::size_t n = 0; n < N; ++n)
                {
                    double sum = 0.0;
                    std::size_t count = 0;
                    for (std::size_t tj = 0; tj < T; ++tj)
                    {
                        double s = resp.times_s[tj];
                        if (s < t - opts.window_s - eps || s > t + eps || !resp.valid(tj, l, n))
                            continue;
                        sum += resp.tau(tj, l, n);
                        ++count;
                    }
                    averaged.valid(ti, l, n) = count > 0;
                    averaged.tau(ti, l, n) = count ? sum / static_cast<double>(count) : 0.0;
                }
        }

        RespImage out = averaged;
        const long r_lo = -static_cast<long>((opts.median_range - 1) / 2), r_hi = static_cast<long>(opts.median_range / 2);
        const long a_lo = -static_cast<long>((opts.median_angle - 1) / 2), a_hi = static_cast<long>(opts.median_angle / 2);
        std::vector<double> window;
        for (std::size_t ti = 0; ti < T; ++ti)
            for (std::size_t l = 0; l < L; ++l)
                for (std::size_t n = 0; n < N; ++n)
                {
                    if (!averaged.valid(ti, l, n))
                        continue;
                    window.clear();
                    for (long dl = r_lo; dl <= r_hi; ++dl)
                        for (long dn = a_lo; dn <= a_hi; ++dn)
                        {
                            long ll = static_cast<long>(l) + dl, nn = static_cast<long>(n) + dn;
                            if (ll < 0 || nn < 0 || ll >= static_cast<long>(L) || nn >= static_cast<long>(N))
                                continue;
                            if (averaged.valid(ti, ll, nn))
                                window.push_back(averaged.tau(ti, ll, nn));
                        }
                    out.tau(ti, l, n) = median_of(window);
                }
        return out;
    }

    PointCloud build_point_cloud(const PowerImage &power, std::size_t frame,
                                 const RespImage *resp_now, const RespImage *resp_prev,
                                 const CloudOptions &opts)
    {
        if (!(opts.alpha > 0.0))
            throw ValidationError("build_point_cloud: alpha must be > 0");
        if (frame >= power.values.n0())
            throw ValidationError("build_point_cloud: frame out of range");
        const std::size_t L = power.values.n1(), N = power.values.n2();
        auto check = [&](const RespImage *r, const char *name)
        {
            if (!r)
                return;
            if (r->tau.n0() != 1 || r->tau.n1() != L || r->tau.n2() != N)
                throw ValidationError(std::string("build_point_cloud: ") + name + " must be a single-time slice matching the power image");
        };
        check(resp_now, "resp_now");
        check(resp_prev, "resp_prev");
        if (opts.space == CloudSpace::respiratory && (!resp_now || !resp_prev))
            throw ValidationError("build_point_cloud: respiratory space needs both respiratory images");

        PointCloud cloud;
        cloud.space = opts.space;
        cloud.theta_scale = opts.theta_scale;
        cloud.alpha = opts.alpha;
        for (std::size_t l = 0; l < L; ++l)
        {
            double r = power.radar.range_of_bin(l);
            for (std::size_t n = 0; n < N; ++n)
            {
                double p = power.values(frame, l, n);
                if (p < opts.min_power)
                    continue;
                long rho = std::lround(opts.alpha * r * p);
                if (rho <= 0)
                    continue;
                bool now_ok = resp_now && resp_now->valid(0, l, n);
                bool prev_ok = resp_prev && resp_prev->valid(0, l, n);
                if (opts.space == CloudSpace::respiratory && !(now_ok && prev_ok))
                    continue;

                RespPoint pt;
                pt.r_m = r;
                pt.theta_rad = power.grid.theta[n];
                pt.range_bin = l;
                pt.angle_bin = n;
                pt.power = p;
                pt.weight = static_cast<std::uint32_t>(rho);
                pt.tau_now_s = now_ok ? resp_now->tau(0, l, n) : std::numeric_limits<double>::quiet_NaN();
                if (opts.space == CloudSpace::respiratory)
                {
                    pt.u1_m = opts.velocity_mps * resp_now->tau(0, l, n);
                    pt.u2_m = opts.velocity_mps * resp_prev->tau(0, l, n);
                }
                cloud.points.push_back(pt);
            }
        }
        return cloud;
    }

    Split kmeans2_from(const PointCloud &cloud, std::span<const std::size_t> members,
                       std::array<double, 4> c0, std::array<double, 4> c1, std::size_t max_iterations)
    {
        const std::size_t dim = cloud.dim();
        const std::size_t n = members.size();
        std::vector<std::array<double, 4>> x(n);
        for (std::size_t i = 0; i < n; ++i)
            x[i] = cloud.coords(members[i]);

        std::vector<std::uint8_t> label(n, 2);
        std::array<std::array<double, 4>, 2> centre{c0, c1};
        for (std::size_t iter = 0; iter < max_iterations; ++iter)
        {
            bool changed = false;
            for (std::size_t i = 0; i < n; ++i)
            {
                std::uint8_t lab = sq_dist(x[i], centre[1], dim) < sq_dist(x[i], centre[0], dim) ? 1 : 0;
                if (lab != label[i])
                {
                    label[i] = lab;
                    changed = true;
                }
            }
            if (!changed)
                break;

            std::array<std::array<double, 4>, 2> sum{};
            std::array<double, 2> wsum{0.0, 0.0};
            for (std::size_t i = 0; i < n; ++i)
            {
                double w = cloud.points[members[i]].weight;
                for (std::size_t d = 0; d < dim; ++d)
                    sum[label[i]][d] += w * x[i][d];
                wsum[label[i]] += w;
            }
            for (int c = 0; c < 2; ++c)
            {
                if (wsum[c] > 0.0)
                {
                    for (std::size_t d = 0; d < dim; ++d)
                        centre[c][d] = sum[c][d] / wsum[c];
                    continue;
                }
                // Empty cluster: reseed at the member farthest from the other centre.
                int other = 1 - c;
                std::size_t far = 0;
                double best = -1.0;
                for (std::size_t i = 0; i < n; ++i)
                {
                    double dd = sq_dist(x[i], centre[other], dim);
                    if (dd > best)
                    {
                        best = dd;
                        far = i;
                    }
                }
                centre[c] = x[far];
            }
        }

        Split out;
        for (std::size_t i = 0; i < n; ++i)
            (label[i] == 1 ? out.second : out.first).push_back(members[i]);
        return out;
    }

    Split kmeans2(const PointCloud &cloud, std::span<const std::size_t> members, std::mt19937_64 &rng)
    {
        const std::size_t dim = cloud.dim();
        if (members.size() < 2)
            throw ValidationError("kmeans2: need at least two distinct points");
        auto first = cloud.coords(members[0]);
        bool distinct = false;
        for (auto m : members)
            if (sq_dist(cloud.coords(m), first, dim) > 0.0)
            {
                distinct = true;
                break;
            }
        if (!distinct)
            throw ValidationError("kmeans2: all points identical, split refused");

        // Draws over the multiset: point i is chosen with probability weight_i / W.
        std::vector<std::size_t> cumulative(members.size());
        std::size_t W = 0;
        for (std::size_t i = 0; i < members.size(); ++i)
        {
            W += cloud.points[members[i]].weight;
            cumulative[i] = W;
        }
        std::uniform_int_distribution<std::size_t> pick(0, W - 1);
        auto draw = [&]
        {
            std::size_t u = pick(rng);
            auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
            return members[static_cast<std::size_t>(it - cumulative.begin())];
        };
        auto c0 = cloud.coords(draw());
        std::array<double, 4> c1 = c0;
        while (sq_dist(c1, c0, dim) == 0.0)
            c1 = cloud.coords(draw());
        return kmeans2_from(cloud, members, c0, c1);
    }

    Split kmeans2(const PointCloud &cloud, std::span<const std::size_t> members, std::uint64_t seed)
    {
        std::mt19937_64 rng(seed);
        return kmeans2(cloud, members, rng);
    }

    double bic(const PointCloud &cloud, const std::vector<std::vector<std::size_t>> &clusters, const BicOptions &opts)
    {
        if (clusters.empty())
            throw ValidationError("bic: need at least one cluster");
        const std::size_t dim = cloud.dim();
        const double M = static_cast<double>(dim);

        double R = 0.0, ss = 0.0, mix = 0.0;
        std::vector<double> Rj;
        for (const auto &c : clusters)
        {
            if (c.empty())
                throw ValidationError("bic: empty cluster");
            std::array<double, 4> mean{};
            double w = 0.0;
            for (auto i : c)
            {
                auto x = cloud.coords(i);
                double wi = cloud.points[i].weight;
                for (std::size_t d = 0; d < dim; ++d)
                    mean[d] += wi * x[d];
                w += wi;
            }
            for (std::size_t d = 0; d < dim; ++d)
                mean[d] /= w;
            for (auto i : c)
                ss += cloud.points[i].weight * sq_dist(cloud.coords(i), mean, dim);
            Rj.push_back(w);
            R += w;
        }
        for (double r : Rj)
            mix += r * std::log(r / R);

        double var = std::max(ss / (R * M), opts.min_variance);
        double loglik = mix - 0.5 * R * M * std::log(2.0 * pi * var) - ss / (2.0 * var);
        double params = static_cast<double>(clusters.size()) * (M + 1.0) + 1.0;
        return loglik - 0.5 * params * std::log(R);
    }

    Cluster make_cluster(const PointCloud &cloud, std::vector<std::size_t> members)
    {
        Cluster c;
        c.members = std::move(members);
        double w = 0.0;
        for (auto i : c.members)
        {
            const auto &p = cloud.points[i];
            auto x = cloud.coords(i);
            for (std::size_t d = 0; d < 4; ++d)
                c.centroid[d] += p.weight * x[d];
            auto [px, py] = polar_to_cartesian(p.r_m, p.theta_rad);
            c.x_m += p.weight * px;
            c.y_m += p.weight * py;
            w += p.weight;
        }
        if (w > 0.0)
        {
            for (auto &v : c.centroid)
                v /= w;
            c.x_m /= w;
            c.y_m /= w;
        }
        c.weight = static_cast<std::size_t>(w);
        return c;
    }

    std::vector<Cluster> xmeans(const PointCloud &cloud, std::uint64_t seed, const BicOptions &opts)
    {
        std::vector<Cluster> out;
        if (cloud.points.empty())
            return out;
        std::mt19937_64 rng(seed);
        const std::size_t dim = cloud.dim();

        auto all_identical = [&](const std::vector<std::size_t> &m)
        {
            auto first = cloud.coords(m[0]);
            return std::all_of(m.begin(), m.end(), [&](std::size_t i) { return sq_dist(cloud.coords(i), first, dim) == 0.0; });
        };

        // Depth-first: the first child is fully resolved before the second.
        std::vector<std::vector<std::size_t>> stack;
        std::vector<std::size_t> root(cloud.points.size());
        std::iota(root.begin(), root.end(), 0);
        stack.push_back(std::move(root));
        while (!stack.empty())
        {
            auto members = std::move(stack.back());
            stack.pop_back();
            if (members.size() < 2 || all_identical(members))
            {
                out.push_back(make_cluster(cloud, std::move(members)));
                continue;
            }
            auto [a, b] = kmeans2(cloud, members, rng);
            double parent = bic(cloud, {members}, opts);
            double children = bic(cloud, {a, b}, opts);
            if (children > parent)
            {
                stack.push_back(std::move(b));
                stack.push_back(std::move(a));
            }
            else
            {
                out.push_back(make_cluster(cloud, std::move(members)));
            }
        }
        return out;
    }

    std::vector<Cluster> merge_clusters(const PointCloud &cloud, std::vector<Cluster> clusters, double min_separation_m)
    {
        if (!(min_separation_m > 0.0))
            throw ValidationError("merge_clusters: D must be > 0");
        while (clusters.size() > 1)
        {
            double best = std::numeric_limits<double>::infinity();
            std::size_t bi = 0, bj = 0;
            for (std::size_t i = 0; i < clusters.size(); ++i)
                for (std::size_t j = i + 1; j < clusters.size(); ++j)
                {
                    double g = std::hypot(clusters[i].x_m - clusters[j].x_m, clusters[i].y_m - clusters[j].y_m);
                    if (g < best)
                    {
                        best = g;
                        bi = i;
                        bj = j;
                    }
                }
            if (!(best < min_separation_m))
                break;
            auto members = std::move(clusters[bi].members);
            members.insert(members.end(), clusters[bj].members.begin(), clusters[bj].members.end());
            std::sort(members.begin(), members.end());
            clusters[bi] = make_cluster(cloud, std::move(members));
            clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
        }
        return clusters;
    }

    std::vector<PersonEstimate> representative_positions(const PointCloud &cloud, const std::vector<Cluster> &clusters,
                                                         double timestamp_s, Representative rule)
    {
        std::vector<PersonEstimate> out;
        int id = 1;
        for (const auto &c : clusters)
        {
            if (c.members.empty())
                continue;
            PersonEstimate pe;
            pe.person_id = id++;
            pe.timestamp_s = timestamp_s;
            pe.cluster_size = c.weight;
            if (rule == Representative::max_power)
            {
                std::size_t best = c.members.front();
                for (auto i : c.members)
                    if (cloud.points[i].power > cloud.points[best].power)
                        best = i;
                std::tie(pe.x_m, pe.y_m) = polar_to_cartesian(cloud.points[best].r_m, cloud.points[best].theta_rad);
            }
            else
            {
                pe.x_m = c.x_m;
                pe.y_m = c.y_m;
            }

            std::vector<std::pair<double, std::size_t>> taus;
            std::size_t total = 0;
            for (auto i : c.members)
            {
                const auto &p = cloud.points[i];
                if (std::isnan(p.tau_now_s))
                    continue;
                taus.emplace_back(p.tau_now_s, p.weight);
                total += p.weight;
            }
            if (taus.empty())
            {
                pe.interval_s = std::numeric_limits<double>::quiet_NaN();
            }
            else
            {
                std::sort(taus.begin(), taus.end());
                std::size_t acc = 0;
                for (const auto &[tau, w] : taus)
                {
                    acc += w;
                    if (2 * acc >= total)
                    {
                        pe.interval_s = tau;
                        break;
                    }
                }
            }
            out.push_back(pe);
        }
        return out;
    }
}
