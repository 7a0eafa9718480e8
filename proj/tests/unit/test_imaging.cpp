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

#include "doctest.h"

#include "../support/oracles.hpp"
#include "resparray/imaging.hpp"
#include "resparray/scenarios.hpp"

#include <algorithm>
#include <random>

using namespace resparray;

namespace
{
    ChannelCube random_cube(std::size_t frames, std::size_t bins, std::uint64_t seed)
    {
        ChannelCube c;
        c.radar.num_range_bins = bins;
        c.data = Array3<cdouble>(frames, bins, c.radar.num_virtual_elements);
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> g;
        for (auto &v : c.data.data())
            v = {g(rng), g(rng)};
        return c;
    }

    std::vector<cdouble> ones(std::size_t k) { return std::vector<cdouble>(k, 1.0); }

    double max_rel_diff(const Array3<cdouble> &a, const Array3<cdouble> &ref)
    {
        double worst = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < ref.size(); ++i)
        {
            worst = std::max(worst, std::abs(a.data()[i] - ref.data()[i]));
            scale = std::max(scale, std::abs(ref.data()[i]));
        }
        return worst / scale;
    }

    ComplexImage single_cell_image(std::size_t frames, double dt = 0.1)
    {
        ComplexImage img;
        img.radar.slow_time_step_s = dt;
        img.grid = AngleGrid::symmetric(32);
        img.values = Array3<cdouble>(frames, 1, 1);
        return img;
    }
}

TEST_CASE("angle grids")
{
    auto g = AngleGrid::symmetric(32);
    REQUIRE(g.size() == 32);
    CHECK(g.sin_theta.front() == doctest::Approx(-1.0));
    CHECK(g.sin_theta.back() == doctest::Approx(30.0 / 32.0));
    CHECK(std::is_sorted(g.sin_theta.begin(), g.sin_theta.end()));
    CHECK(g.sin_theta[16] == 0.0);

    auto o = AngleGrid::one_sided(12);
    REQUIRE(o.size() == 12);
    CHECK(o.sin_theta[0] == 0.0);
    CHECK(o.sin_theta[11] == doctest::Approx(11.0 / 12.0));
    CHECK_THROWS_AS(AngleGrid::symmetric(7), ValidationError);
}

TEST_CASE("taylor taper")
{
    auto w = taylor_taper(12, -35.0, 5);
    REQUIRE(w.size() == 12);
    for (std::size_t k = 0; k < 6; ++k)
        CHECK(w[k] == doctest::Approx(w[11 - k]).epsilon(1e-12));
    CHECK(*std::max_element(w.begin(), w.end()) == doctest::Approx(1.0));
    CHECK(*std::min_element(w.begin(), w.end()) > 0.0);
    CHECK(oracle::peak_sidelobe_db(w) <= -34.0);

    auto u = taylor_taper(12, 0.0, 5);
    for (double v : u)
        CHECK(v == 1.0);
    // uniform aperture sits near -13 dB, a sanity check on the oracle itself
    CHECK(oracle::peak_sidelobe_db(u) == doctest::Approx(-13.0).epsilon(0.05));

    CHECK_THROWS_AS(taylor_taper(12, -35.0, 7), ValidationError);
    CHECK_THROWS_AS(taylor_taper(1, -35.0, 1), ValidationError);
    CHECK_THROWS_AS(taylor_taper(12, 5.0, 5), ValidationError);
}

TEST_CASE("fast beamformer matches direct weighted sum")
{
    auto taper = taylor_taper(12, -35.0, 5);
    std::vector<cdouble> calib(12);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ph(0.0, 2.0 * pi);
    for (auto &c : calib)
        c = std::polar(0.8 + 0.4 * ph(rng) / (2.0 * pi), ph(rng));

    for (std::uint64_t seed : {1u, 2u, 3u})
    {
        auto cube = random_cube(6, 9, seed);
        for (auto grid : {AngleGrid::symmetric(32), AngleGrid::symmetric(16), AngleGrid::one_sided(12)})
        {
            auto img = beamform(cube, calib, taper, grid);
            auto ref = oracle::direct_beamform(cube, calib, taper, grid.sin_theta);
            CHECK(max_rel_diff(img.values, ref) <= 1e-9);
        }
    }
}

TEST_CASE("beamformer is linear")
{
    auto c1 = random_cube(4, 5, 21), c2 = random_cube(4, 5, 22), mix = c1;
    cdouble a(1.5, -0.3), b(-0.7, 2.0);
    for (std::size_t i = 0; i < mix.data.size(); ++i)
        mix.data.data()[i] = a * c1.data.data()[i] + b * c2.data.data()[i];
    auto taper = taylor_taper(12, -35.0, 5);
    auto grid = AngleGrid::symmetric(32);
    auto i1 = beamform(c1, ones(12), taper, grid), i2 = beamform(c2, ones(12), taper, grid);
    auto im = beamform(mix, ones(12), taper, grid);
    auto expect = i1.values;
    for (std::size_t i = 0; i < expect.size(); ++i)
        expect.data()[i] = a * i1.values.data()[i] + b * i2.values.data()[i];
    CHECK(max_rel_diff(im.values, expect) <= 1e-9);
}

TEST_CASE("beamformer steering")
{
    RadarConfig radar;
    radar.num_range_bins = 64;
    auto grid = AngleGrid::symmetric(32);
    auto taper = taylor_taper(12, -35.0, 5);

    SUBCASE("broadside")
    {
        auto s = single_target_scene(4.0, std::nullopt, 2.0);
        s.duration_s = 1.0;
        auto img = beamform(synthesize_scene(s, radar, 1), ones(12), taper, grid);
        std::size_t best = 0;
        for (std::size_t n = 0; n < grid.size(); ++n)
            if (std::abs(img.values(0, 47, n)) > std::abs(img.values(0, 47, best)))
                best = n;
        CHECK(grid.sin_theta[best] == 0.0);
    }
    SUBCASE("sin theta = 0.25 on grid")
    {
        SceneSpec s;
        s.duration_s = 1.0;
        Target t;
        double th = std::asin(0.25);
        t.x_m = 2.0 * std::sin(th);
        t.y_m = 2.0 * std::cos(th);
        s.targets.push_back(t);
        auto img = beamform(synthesize_scene(s, radar, 1), ones(12), taper, grid);
        std::size_t best = 0;
        for (std::size_t n = 0; n < grid.size(); ++n)
            if (std::abs(img.values(0, 47, n)) > std::abs(img.values(0, 47, best)))
                best = n;
        CHECK(grid.sin_theta[best] == doctest::Approx(0.25));
    }
    CHECK_THROWS_AS(beamform(random_cube(2, 3, 1), ones(11), taper, grid), ValidationError);
}

TEST_CASE("clutter suppression")
{
    SUBCASE("constant input")
    {
        auto img = single_cell_image(100);
        for (std::size_t i = 0; i < 100; ++i)
            img.values(i, 0, 0) = {3.0, -2.0};
        auto out = suppress_clutter(img, 3.0);
        for (std::size_t i = 0; i < 100; ++i)
            CHECK(std::abs(out.values(i, 0, 0)) < 1e-12);
        CHECK(out.kind == ImageKind::clutter_suppressed);
    }
    SUBCASE("impulse")
    {
        auto img = single_cell_image(200);
        img.values(100, 0, 0) = 1.0;
        auto out = suppress_clutter(img, 3.0); // W = 30 samples
        for (std::size_t i = 0; i < 200; ++i)
        {
            double expect = 0.0;
            if (i >= 100 && i < 130)
                expect = (i == 100 ? 1.0 : 0.0) - 1.0 / 30.0;
            REQUIRE(out.values(i, 0, 0).real() == doctest::Approx(expect).epsilon(1e-12));
        }
    }
    SUBCASE("truncated warm-up window")
    {
        auto img = single_cell_image(10);
        for (std::size_t i = 0; i < 10; ++i)
            img.values(i, 0, 0) = static_cast<double>(i);
        auto out = suppress_clutter(img, 3.0);
        // mean of 0..i is i / 2
        for (std::size_t i = 0; i < 10; ++i)
            CHECK(out.values(i, 0, 0).real() == doctest::Approx(static_cast<double>(i) / 2.0));
    }
    SUBCASE("breathing-band sinusoid passes")
    {
        auto img = single_cell_image(1200);
        for (std::size_t i = 0; i < 1200; ++i)
            img.values(i, 0, 0) = std::sin(2.0 * pi * 0.1 * static_cast<double>(i) / 4.0);
        auto out = suppress_clutter(img, 30.0);
        double in2 = 0.0, out2 = 0.0;
        for (std::size_t i = 300; i < 1200; ++i)
        {
            in2 += std::norm(img.values(i, 0, 0));
            out2 += std::norm(out.values(i, 0, 0));
        }
        CHECK(std::sqrt(out2 / in2) == doctest::Approx(1.0).epsilon(0.05));
    }
    CHECK_THROWS_AS(suppress_clutter(single_cell_image(5), 0.0), ValidationError);
}

TEST_CASE("power image")
{
    auto img = single_cell_image(400);
    CHECK(power_image(img, 2.0).values(399, 0, 0) == 0.0);

    for (std::size_t i = 0; i < 400; ++i)
        img.values(i, 0, 0) = std::polar(1.0, 0.37 * static_cast<double>(i));
    auto p = power_image(img, 2.0);
    for (std::size_t i = 0; i < 400; ++i)
        REQUIRE(p.values(i, 0, 0) == doctest::Approx(1.0));

    for (std::size_t i = 0; i < 400; ++i)
        img.values(i, 0, 0) = 3.0 * std::sin(2.0 * pi * 0.1 * static_cast<double>(i) / 4.0);
    p = power_image(img, 20.0);
    CHECK(p.values(399, 0, 0) == doctest::Approx(4.5).epsilon(0.05));
    CHECK(!p.normalized);
}

TEST_CASE("noise normalisation")
{
    RadarConfig radar;
    radar.num_range_bins = 24;
    SceneSpec s;
    s.duration_s = 30.0;
    s.noise_power = 0.05;
    auto cube = synthesize_scene(s, radar, 4);
    auto taper = taylor_taper(12, -35.0, 5);
    auto grid = AngleGrid::symmetric(32);
    auto p = power_image(suppress_clutter(beamform(cube, ones(12), taper, grid), 30.0), 20.0);
    NoiseRegion region{16, 24, 0, 32};
    auto n = normalize_power(p, region);
    CHECK(n.normalized);
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t t = 0; t < n.values.n0(); ++t)
        for (std::size_t l = 16; l < 24; ++l)
            for (std::size_t a = 0; a < 32; ++a, ++count)
                acc += n.values(t, l, a);
    CHECK(acc / static_cast<double>(count) == doctest::Approx(1.0).epsilon(0.1));
    // the estimate agrees with the analytic beamformed noise floor
    CHECK(n.noise_floor == doctest::Approx(expected_noise_floor(0.05, taper)).epsilon(0.1));

    auto scaled = cube;
    for (auto &v : scaled.data.data())
        v *= 10.0;
    auto ps = power_image(suppress_clutter(beamform(scaled, ones(12), taper, grid), 30.0), 20.0);
    auto ns = normalize_power(ps, region);
    double worst = 0.0;
    for (std::size_t i = 0; i < n.values.size(); ++i)
        worst = std::max(worst, std::abs(ns.values.data()[i] - n.values.data()[i]));
    CHECK(worst <= 1e-9);

    auto zero = p;
    std::fill(zero.values.data().begin(), zero.values.data().end(), 0.0);
    CHECK_THROWS_AS(normalize_power(zero, region), ValidationError);
    CHECK_THROWS_AS(normalize_power(p, NoiseRegion{}), ValidationError);
    CHECK_THROWS_AS(normalize_power(p, 0.0), ValidationError);
}

TEST_CASE("static scene leaves normalised power near the noise level")
{
    RadarConfig radar;
    SceneSpec s;
    s.duration_s = 60.0;
    s.noise_power = noise_power_for_snr(20.0);
    s.clutter = {{0.0, 1.0, 10.0}, {-1.2, 2.2, 20.0}, {1.5, 3.0, 30.0}, {0.4, 4.0, 5.0}};
    auto cube = synthesize_scene(s, radar, 9);
    auto p = power_image(suppress_clutter(beamform(cube, ones(12), taylor_taper(12, -35.0, 5), AngleGrid::symmetric(32)), 30.0), 20.0);
    auto n = normalize_power(p, NoiseRegion{radar.num_range_bins - 8, radar.num_range_bins, 0, 32});
    std::size_t total = 0, low = 0;
    for (std::size_t t = 301; t < n.values.n0(); ++t)
        for (std::size_t l = 0; l < n.values.n1(); ++l)
            for (std::size_t a = 0; a < n.values.n2(); ++a, ++total)
                low += n.values(t, l, a) <= 1.5;
    CHECK(static_cast<double>(low) / static_cast<double>(total) >= 0.99);
}

TEST_CASE("power argmax tracks an on-grid target")
{
    RadarConfig radar;
    radar.num_range_bins = 64;
    SceneSpec s;
    s.duration_s = 40.0;
    Target t;
    double th = std::asin(-0.375);
    t.x_m = 1.8 * std::sin(th);
    t.y_m = 1.8 * std::cos(th);
    s.targets.push_back(t);
    auto grid = AngleGrid::symmetric(32);
    auto p = power_image(suppress_clutter(beamform(synthesize_scene(s, radar, 1), ones(12), taylor_taper(12, -35.0, 5), grid), 30.0), 20.0);
    std::size_t want_r = static_cast<std::size_t>(std::lround(1.8 / 0.043));
    std::size_t want_a = 16 - 6;
    for (std::size_t f = 201; f < p.values.n0(); ++f)
    {
        std::size_t br = 0, ba = 0;
        for (std::size_t l = 0; l < 64; ++l)
            for (std::size_t a = 0; a < 32; ++a)
                if (p.values(f, l, a) > p.values(f, br, ba))
                {
                    br = l;
                    ba = a;
                }
        REQUIRE(br == want_r);
        REQUIRE(ba == want_a);
    }
}

TEST_CASE("calibration file")
{
    auto c = calibration_from_json_text("[[1,0],[0,1],[1,1]]", 3);
    CHECK(c[1] == cdouble(0.0, 1.0));
    CHECK_THROWS_AS(calibration_from_json_text("[[1,0]]", 3), ValidationError);
    CHECK_THROWS_AS(calibration_from_json_text("[[1,0],[1],[1,1]]", 3), ValidationError);
}
