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
#include "resparray/scenarios.hpp"
#include "resparray/scene_io.hpp"

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

namespace py = pybind11;
using namespace resparray;

namespace
{
    using CArray = py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>;
    using DArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

    py::array_t<std::complex<double>> to_numpy(const Array3<cdouble> &a)
    {
        py::array_t<std::complex<double>> out({a.n0(), a.n1(), a.n2()});
        std::memcpy(out.mutable_data(), a.data().data(), a.size() * sizeof(cdouble));
        return out;
    }

    py::array_t<double> to_numpy(const Array3<double> &a)
    {
        py::array_t<double> out({a.n0(), a.n1(), a.n2()});
        std::memcpy(out.mutable_data(), a.data().data(), a.size() * sizeof(double));
        return out;
    }

    ChannelCube cube_from(CArray data, const std::string &radar_json)
    {
        if (data.ndim() != 3)
            throw ValidationError("cube must be a 3D array [slow_time, range, element]");
        ChannelCube c;
        c.radar = radar_json.empty() ? RadarConfig{} : radar_from_json_text(radar_json);
        c.radar.num_range_bins = static_cast<std::size_t>(data.shape(1));
        if (static_cast<std::size_t>(data.shape(2)) != c.radar.num_virtual_elements)
            throw ValidationError("cube element axis does not match the radar");
        c.data = Array3<cdouble>(data.shape(0), data.shape(1), data.shape(2));
        std::memcpy(c.data.data().data(), data.data(), c.data.size() * sizeof(cdouble));
        return c;
    }

    SceneSpec scene_arg(const std::string &scene, double snr)
    {
        const std::string prefix = "preset:";
        if (scene.rfind(prefix, 0) == 0)
            return preset_scene(scene.substr(prefix.size()), snr);
        return scene_from_json_text(scene);
    }

    py::dict person_dict(const PersonEstimate &p)
    {
        py::dict d;
        d["person_id"] = p.person_id;
        d["x_m"] = p.x_m;
        d["y_m"] = p.y_m;
        d["interval_s"] = p.interval_s;
        d["timestamp_s"] = p.timestamp_s;
        d["cluster_size"] = p.cluster_size;
        return d;
    }

    PointCloud cloud_from(DArray points, py::object weights)
    {
        if (points.ndim() != 2 || (points.shape(1) != 4 && points.shape(1) != 2))
            throw ValidationError("points must have shape (n, 4) or (n, 2)");
        PointCloud c;
        c.space = points.shape(1) == 4 ? CloudSpace::respiratory : CloudSpace::planar;
        auto p = points.unchecked<2>();
        std::vector<std::uint32_t> w(static_cast<std::size_t>(points.shape(0)), 1);
        if (!weights.is_none())
            w = weights.cast<std::vector<std::uint32_t>>();
        if (w.size() != static_cast<std::size_t>(points.shape(0)))
            throw ValidationError("weights length must match points");
        for (py::ssize_t i = 0; i < points.shape(0); ++i)
        {
            RespPoint rp;
            rp.r_m = p(i, 0);
            rp.theta_rad = p(i, 1);
            if (c.space == CloudSpace::respiratory)
            {
                rp.u1_m = p(i, 2);
                rp.u2_m = p(i, 3);
            }
            rp.weight = w[static_cast<std::size_t>(i)];
            c.points.push_back(rp);
        }
        return c;
    }
}

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Multi-person respiration measurement with a MIMO array radar";
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    m.attr("version") = tool_version;
    m.def("preset_names", &preset_names);
    m.def("preset_scene_json", [](const std::string &name, double snr) { return scene_to_json_text(preset_scene(name, snr)); },
          py::arg("name"), py::arg("snr_db") = 20.0);
    m.def("default_config_json", [] { return config_to_json_text(PipelineConfig{}); });
    m.def("default_radar_json", [] { return radar_to_json_text(RadarConfig{}); });

    m.def("simulate", [](const std::string &scene, std::uint64_t seed, double snr_db)
          {
              auto s = scene_arg(scene, snr_db);
              return to_numpy(synthesize_scene(s, RadarConfig{}, seed).data);
          },
          py::arg("scene"), py::arg("seed") = 1, py::arg("snr_db") = 20.0,
          "Channel cube [slow_time, range, element] for a scene JSON or 'preset:<name>'.");

    m.def("truth_intervals", [](const std::string &scene, double t, double snr_db)
          {
              std::vector<std::pair<int, double>> out;
              for (auto tv : truth_intervals(scene_arg(scene, snr_db), t))
                  out.emplace_back(tv.target_id, tv.interval_s);
              return out;
          },
          py::arg("scene"), py::arg("t"), py::arg("snr_db") = 20.0);

    m.def("breathing_displacement", [](double interval_s, double amplitude_m, double t, double phase)
          {
              BreathingProfile p;
              p.base_interval_s = interval_s;
              p.amplitude_m = amplitude_m;
              p.phase_offset_rad = phase;
              return breathing_displacement(p, t);
          },
          py::arg("interval_s"), py::arg("amplitude_m"), py::arg("t"), py::arg("phase_offset_rad") = 0.0);

    m.def("read_rcube", [](const std::filesystem::path &p)
          {
              auto c = read_rcube(p);
              return py::make_tuple(to_numpy(c.data), radar_to_json_text(c.radar));
          });
    m.def("write_rcube", [](const std::filesystem::path &p, CArray data, const std::string &radar_json)
          { write_rcube(p, cube_from(data, radar_json)); },
          py::arg("path"), py::arg("cube"), py::arg("radar_json") = "");

    m.def("taylor_taper", [](std::size_t k, double sll, std::size_t nbar) { return taylor_taper(k, sll, nbar); },
          py::arg("num_elements") = 12, py::arg("sidelobe_db") = -35.0, py::arg("nbar") = 5);

    m.def("angle_grid", [](std::size_t fft_size) { return AngleGrid::symmetric(fft_size).sin_theta; }, py::arg("fft_size") = 32,
          "sin(theta) of every beam.");

    m.def("beamform", [](CArray cube, py::object taper, py::object calibration, std::size_t fft_size)
          {
              auto c = cube_from(cube, "");
              std::size_t K = c.radar.num_virtual_elements;
              auto w = taper.is_none() ? taylor_taper(K, -35.0, 5) : taper.cast<std::vector<double>>();
              auto cal = calibration.is_none() ? std::vector<cdouble>(K, 1.0) : calibration.cast<std::vector<cdouble>>();
              return to_numpy(beamform(c, cal, w, AngleGrid::symmetric(fft_size)).values);
          },
          py::arg("cube"), py::arg("taper") = py::none(), py::arg("calibration") = py::none(), py::arg("fft_size") = 32);

    m.def("resp_cost_curve", [](DArray d, std::size_t index, std::size_t max_lag)
          {
              std::span<const double> s(d.data(), static_cast<std::size_t>(d.size()));
              return resp_cost_curve(s, index, max_lag);
          },
          py::arg("d"), py::arg("index"), py::arg("max_lag") = 80, "Cost for lags 1..max_lag samples.");

    m.def("polar_to_cartesian", &polar_to_cartesian, py::arg("r_m"), py::arg("theta_rad"));

    m.def("bic", [](DArray points, std::vector<int> labels, py::object weights)
          {
              auto c = cloud_from(points, weights);
              if (labels.size() != c.points.size())
                  throw ValidationError("labels length must match points");
              std::map<int, std::vector<std::size_t>> groups;
              for (std::size_t i = 0; i < labels.size(); ++i)
                  groups[labels[i]].push_back(i);
              std::vector<std::vector<std::size_t>> cl;
              for (auto &[_, g] : groups)
                  cl.push_back(g);
              return bic(c, cl);
          },
          py::arg("points"), py::arg("labels"), py::arg("weights") = py::none());

    m.def("xmeans", [](DArray points, std::uint64_t seed, py::object weights, double merge_distance_m)
          {
              auto c = cloud_from(points, weights);
              auto clusters = xmeans(c, seed);
              if (merge_distance_m > 0.0)
                  clusters = merge_clusters(c, std::move(clusters), merge_distance_m);
              std::vector<int> labels(c.points.size(), -1);
              for (std::size_t k = 0; k < clusters.size(); ++k)
                  for (auto i : clusters[k].members)
                      labels[i] = static_cast<int>(k);
              return labels;
          },
          py::arg("points"), py::arg("seed") = 1, py::arg("weights") = py::none(), py::arg("merge_distance_m") = 0.0,
          "Cluster label per point; rows are (r, theta, u1, u2) or (r, theta).");

    m.def("run", [](CArray cube, const std::string &config_json, const std::string &method, std::uint64_t seed, std::size_t monte_carlo)
          {
              auto c = cube_from(cube, "");
              auto cfg = config_json.empty() ? PipelineConfig{} : config_from_json_text(config_json);
              PreparedRun prepared;
              {
                  py::gil_scoped_release nogil;
                  prepared = prepare_run(c, cfg);
              }
              auto mr = run_method(prepared, method_from_name(method), seed, monte_carlo);
              py::list people;
              for (const auto &tick : mr.people)
              {
                  py::list row;
                  for (const auto &p : tick)
                      row.append(person_dict(p));
                  people.append(row);
              }
              py::dict out;
              out["ticks"] = prepared.ticks;
              out["people"] = people;
              out["counts"] = mr.counts;
              out["stage_digests"] = prepared.stage_digests;
              out["power"] = to_numpy(prepared.power.values);
              out["results_csv"] = results_csv(mr.people);
              return out;
          },
          py::arg("cube"), py::arg("config_json") = "", py::arg("method") = "resp4d", py::arg("seed") = 1, py::arg("monte_carlo") = 1,
          "Full pipeline on a channel cube. Returns ticks, people per tick, and counts per seed.");

    m.def("count_accuracy", [](const std::vector<std::size_t> &estimated, std::size_t truth)
          {
              std::vector<CountTrial> trials;
              for (auto e : estimated)
                  trials.push_back({0.0, 0, e, truth, "x"});
              return count_accuracy(trials).at(0).rate();
          },
          py::arg("estimated"), py::arg("true_count"));

    m.def("interval_rmse", [](std::vector<std::pair<double, double>> radar, std::vector<std::pair<double, double>> truth, double warmup_s)
          { return interval_rmse({0, std::move(radar)}, {0, std::move(truth)}, warmup_s); },
          py::arg("radar"), py::arg("truth"), py::arg("warmup_s") = 0.0, "RMS error in ms over (t, interval) pairs.");
}
