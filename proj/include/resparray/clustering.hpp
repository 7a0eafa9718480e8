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
#include "resparray/respiration.hpp"

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace resparray
{
    // Cloud geometry: the planar (r, theta) space of conventional clustering
    // or the 4D respiratory space (r, theta, v tau(t), v tau(t - T_cy)).
    enum class CloudSpace
    {
        planar,
        respiratory
    };

    // One radar cell in the cloud. `weight` co-located copies of the point
    // are implied; the cloud is a multiset.
    struct RespPoint
    {
        double r_m = 0.0;
        double theta_rad = 0.0;
        double u1_m = 0.0; // v * tau(t)
        double u2_m = 0.0; // v * tau(t - T_cy)
        double tau_now_s = 0.0;
        double power = 0.0;
        std::size_t range_bin = 0, angle_bin = 0;
        std::uint32_t weight = 1;
    };

    struct PointCloud
    {
        CloudSpace space = CloudSpace::respiratory;
        std::vector<RespPoint> points;
        double theta_scale = 1.0;
        double alpha = 0.0;

        std::size_t dim() const { return space == CloudSpace::planar ? 2 : 4; }
        std::size_t total_weight() const;
        // Clustering coordinates of point i; only the first dim() entries are used.
        std::array<double, 4> coords(std::size_t i) const;
    };

    struct Cluster
    {
        std::vector<std::size_t> members; // indices into PointCloud::points
        std::array<double, 4> centroid{};
        double x_m = 0.0, y_m = 0.0; // Cartesian centroid
        std::size_t weight = 0;
    };

    struct PersonEstimate
    {
        int person_id = 0;
        double x_m = 0.0, y_m = 0.0;
        double interval_s = 0.0;
        double timestamp_s = 0.0;
        std::size_t cluster_size = 0;
    };

    // x = r sin(theta) (cross-range), y = r cos(theta) (boresight).
    std::pair<double, double> polar_to_cartesian(double r_m, double theta_rad);

    struct SmoothingOptions
    {
        double window_s = 6.0; // T_cy
        std::size_t median_range = 3;
        std::size_t median_angle = 4;
    };

    // Windowed mean of valid intervals over [t - T_cy, t] followed by a
    // range x angle median over valid neighbours.
    RespImage smooth_resp_image(const RespImage &resp, const SmoothingOptions &opts);

    struct CloudOptions
    {
        CloudSpace space = CloudSpace::respiratory;
        double alpha = 0.15;       // applied to noise-normalised power
        double velocity_mps = 7.5e-2;
        double theta_scale = 1.0;
        // Cells below this normalised power are skipped in either space.
        double min_power = 0.0;
    };

    // rho_{l,n} = nearest integer of alpha r_l I_P(t, r_l, theta_n). In the
    // respiratory space only cells with valid intervals at both times count.
    // resp_now / resp_prev are single-time respiratory images; for the planar
    // space they only supply the reported intervals and may be omitted.
    PointCloud build_point_cloud(const PowerImage &power, std::size_t frame,
                                 const RespImage *resp_now, const RespImage *resp_prev,
                                 const CloudOptions &opts);

    // Member indices of the two k-means children.
    using Split = std::pair<std::vector<std::size_t>, std::vector<std::size_t>>;

    // Weighted Lloyd iterations with k = 2 from the given initial centres.
    Split kmeans2_from(const PointCloud &cloud, std::span<const std::size_t> members,
                       std::array<double, 4> c0, std::array<double, 4> c1, std::size_t max_iterations = 100);

    // k = 2 with two distinct seeded initial points drawn from the multiset.
    // Throws ValidationError when all points coincide.
    Split kmeans2(const PointCloud &cloud, std::span<const std::size_t> members, std::mt19937_64 &rng);
    Split kmeans2(const PointCloud &cloud, std::span<const std::size_t> members, std::uint64_t seed);

    struct BicOptions
    {
        // Pooled variance floor; keeps the likelihood finite for zero-spread clusters.
        double min_variance = 1e-12;
    };

    // BIC of an identical-spherical-variance Gaussian mixture over the union of
    // the given clusters. Larger is better.
    double bic(const PointCloud &cloud, const std::vector<std::vector<std::size_t>> &clusters, const BicOptions &opts = {});

    Cluster make_cluster(const PointCloud &cloud, std::vector<std::size_t> members);

    std::vector<Cluster> xmeans(const PointCloud &cloud, std::uint64_t seed, const BicOptions &opts = {});

    // Repeatedly fuse the closest pair of Cartesian centroids while closer than D.
    std::vector<Cluster> merge_clusters(const PointCloud &cloud, std::vector<Cluster> clusters, double min_separation_m);

    enum class Representative
    {
        max_power, // strongest member cell
        centroid
    };

    // One estimate per cluster; interval = weight-weighted median of member
    // intervals. Person ids are assigned in cluster order starting at 1.
    std::vector<PersonEstimate> representative_positions(const PointCloud &cloud, const std::vector<Cluster> &clusters,
                                                         double timestamp_s, Representative rule = Representative::max_power);
}
