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

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace resparray;

namespace
{
    constexpr int exit_validation = 2;
    constexpr int exit_io = 3;

    // "preset:<name>" or a scene JSON path.
    SceneSpec resolve_scene(const std::string &arg, double snr_db)
    {
        const std::string prefix = "preset:";
        if (arg.rfind(prefix, 0) == 0)
            return preset_scene(arg.substr(prefix.size()), snr_db);
        return load_scene(arg);
    }

    PipelineConfig resolve_config(const std::string &path, std::optional<std::uint64_t> seed)
    {
        PipelineConfig cfg;
        if (!path.empty())
            cfg = config_from_json_text(read_text_file(path));
        if (seed)
            cfg.seed = *seed;
        return cfg;
    }

    std::vector<ClusteringMethod> resolve_methods(const std::string &m)
    {
        if (m == "both")
            return {ClusteringMethod::planar_2d, ClusteringMethod::resp_4d};
        return {method_from_name(m)};
    }

    void ensure_dir(const fs::path &p)
    {
        std::error_code ec;
        fs::create_directories(p, ec);
        if (ec)
            throw IoError("cannot create directory " + p.string() + ": " + ec.message());
    }

    std::string file_digest(const fs::path &p)
    {
        auto bytes = read_binary_file(p);
        return sha256_hex(bytes.data(), bytes.size());
    }

    std::string tick_tag(double t)
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "t%03ld", std::lround(t));
        return buf;
    }

    struct SimulateArgs
    {
        std::string scene;
        std::string radar;
        std::uint64_t seed = 1;
        double snr_db = 20.0;
        std::string out;
    };

    void cmd_simulate(const SimulateArgs &a)
    {
        SceneSpec scene = resolve_scene(a.scene, a.snr_db);
        RadarConfig radar = a.radar.empty() ? RadarConfig{} : radar_from_json_text(read_text_file(a.radar));
        ChannelCube cube = synthesize_scene(scene, radar, a.seed);

        fs::path out(a.out);
        ensure_dir(out);
        write_rcube(out / "data.rcube", cube);
        write_text_file(out / "truth.csv", truth_csv(scene_truth_series(scene, radar.slow_time_step_s)));
        write_text_file(out / "truth_subjects.csv", subjects_csv(scene_subjects(scene)));
        write_text_file(out / "scene.json", scene_to_json_text(scene));

        json manifest{{"tool_version", tool_version},
                      {"command", "simulate"},
                      {"scene", a.scene},
                      {"seed", a.seed},
                      {"radar", json::parse(radar_to_json_text(radar))},
                      {"num_frames", cube.num_frames()},
                      {"digests",
                       {{"data.rcube", file_digest(out / "data.rcube")},
                        {"truth.csv", file_digest(out / "truth.csv")},
                        {"truth_subjects.csv", file_digest(out / "truth_subjects.csv")}}}};
        write_text_file(out / "simulate_manifest.json", manifest.dump(2) + "\n");
        std::cout << "simulated " << scene.targets.size() << " targets, " << cube.num_frames() << " frames -> "
                  << (out / "data.rcube").string() << "\n"
                  << "data.rcube sha256 " << manifest["digests"]["data.rcube"].get<std::string>() << "\n";
    }

    struct RunArgs
    {
        std::string input;
        std::string config;
        std::string calibration;
        std::optional<std::uint64_t> seed;
        std::string method = "both";
        std::size_t monte_carlo = 1;
        std::string out;
        bool plots = true;
    };

    void cmd_run(const RunArgs &a)
    {
        if (a.monte_carlo < 1)
            throw ValidationError("--monte-carlo must be >= 1");
        PipelineConfig cfg = resolve_config(a.config, a.seed);
        ChannelCube cube = read_rcube(a.input);
        std::vector<cdouble> calib;
        if (!a.calibration.empty())
            calib = calibration_from_json_text(read_text_file(a.calibration), cube.radar.num_virtual_elements);
        auto methods = resolve_methods(a.method);

        PreparedRun run = prepare_run(cube, cfg, calib);
        fs::path out(a.out);
        ensure_dir(out);

        json manifest{{"tool_version", tool_version},
                      {"command", "run"},
                      {"input", fs::absolute(a.input).string()},
                      {"input_digest", file_digest(a.input)},
                      {"config", json::parse(config_to_json_text(cfg))},
                      {"monte_carlo", a.monte_carlo},
                      {"first_seed", cfg.seed},
                      {"ticks", run.ticks},
                      {"scoring_warmup_s", scoring_warmup_s(cfg)},
                      {"stage_digests", run.stage_digests},
                      {"stage_seconds", run.stage_seconds}};
        if (!a.calibration.empty())
            manifest["calibration_digest"] = file_digest(a.calibration);

        fs::path plots = out / "plots";
        if (a.plots)
        {
            ensure_dir(plots);
            for (std::size_t i = 0; i < run.ticks.size(); ++i)
            {
                double t = run.ticks[i];
                write_text_file(plots / ("power_" + tick_tag(t) + ".csv"), power_frame_csv(run.power, run.power_frame(t)));
                write_text_file(plots / ("resp_" + tick_tag(t) + ".csv"), respiratory_frame_csv(run.smoothed, run.resp_index(t)));
            }
        }

        json results = json::object();
        for (auto m : methods)
        {
            const std::string name = method_name(m);
            auto t0 = std::chrono::steady_clock::now();
            MethodRun mr = run_method(run, m, cfg.seed, a.monte_carlo);
            double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

            std::string res = results_csv(mr.people);
            std::string counts = counts_csv(mr, run.ticks, cfg.seed);
            write_text_file(out / ("results_" + name + ".csv"), res);
            write_text_file(out / ("counts_" + name + ".csv"), counts);
            if (a.plots)
                for (std::size_t i = 0; i < run.ticks.size(); ++i)
                    write_text_file(plots / ("cloud_" + name + "_" + tick_tag(run.ticks[i]) + ".csv"),
                                    cloud_csv(cluster_tick(run, i, m, cfg.seed)));

            std::vector<std::size_t> primary = mr.counts.front();
            results[name] = {{"results_digest", sha256_hex(res)},
                             {"counts_digest", sha256_hex(counts)},
                             {"counts_primary_seed", primary},
                             {"clustering_seconds", secs}};
            std::cout << name << ": counts";
            for (auto c : primary)
                std::cout << " " << c;
            std::cout << "\n";
        }
        manifest["methods"] = results;
        write_text_file(out / "manifest.json", manifest.dump(2) + "\n");
    }

    struct EvaluateArgs
    {
        std::string results;
        std::string truth;
        std::string subjects;
        std::string out;
        double match_radius_m = 1.0;
    };

    json evaluate_dir(const fs::path &dir, const std::map<int, IntervalSeries> &truth,
                      const std::vector<TruthSubject> &subjects, double radius, const fs::path &out)
    {
        json manifest = json::parse(read_text_file(dir / "manifest.json"));
        if (!manifest.contains("methods") || !manifest.contains("config"))
            throw ValidationError("manifest.json: missing methods or config");
        PipelineConfig cfg = config_from_json_text(manifest["config"].dump());
        const double warmup = scoring_warmup_s(cfg);

        json report{{"tool_version", tool_version},
                    {"results_dir", fs::absolute(dir).string()},
                    {"true_count", subjects.size()},
                    {"scoring_warmup_s", warmup},
                    {"methods", json::object()},
                    {"warnings", json::array()}};

        std::vector<CountTrial> trials;
        for (auto &[name, _] : manifest["methods"].items())
        {
            std::string counts_text = read_text_file(dir / ("counts_" + name + ".csv"));
            std::istringstream in(counts_text);
            std::string line;
            std::getline(in, line);
            while (std::getline(in, line))
            {
                if (line.empty())
                    continue;
                CountTrial t;
                unsigned long long seed = 0;
                if (std::sscanf(line.c_str(), "%llu,%lf,%zu", &seed, &t.eval_time_s, &t.estimated_count) != 3)
                    throw ValidationError("counts_" + name + ".csv: malformed row '" + line + "'");
                t.seed = seed;
                t.true_count = subjects.size();
                t.method = name;
                trials.push_back(t);
            }

            auto people = parse_results_csv(read_text_file(dir / ("results_" + name + ".csv")));
            auto series = radar_series(people, subjects, radius);
            json per_subject = json::array();
            std::string rmse_csv = "subject_id,rmse_ms,samples\n";
            double sum = 0.0;
            std::size_t n = 0;
            for (const auto &s : subjects)
            {
                json row{{"subject_id", s.subject_id}};
                auto it = series.find(s.subject_id);
                auto tt = truth.find(s.subject_id);
                if (it == series.end() || tt == truth.end())
                {
                    row["rmse_ms"] = nullptr;
                    report["warnings"].push_back(name + ": subject " + std::to_string(s.subject_id) + " never matched");
                }
                else
                {
                    try
                    {
                        double r = interval_rmse(it->second, tt->second, warmup);
                        row["rmse_ms"] = r;
                        row["samples"] = it->second.samples.size();
                        sum += r;
                        ++n;
                        char buf[96];
                        std::snprintf(buf, sizeof buf, "%d,%.3f,%zu\n", s.subject_id, r, it->second.samples.size());
                        rmse_csv += buf;
                    }
                    catch (const ValidationError &e)
                    {
                        row["rmse_ms"] = nullptr;
                        report["warnings"].push_back(name + ": subject " + std::to_string(s.subject_id) + ": " + e.what());
                    }
                }
                per_subject.push_back(row);
            }
            report["methods"][name]["interval_rmse"] = per_subject;
            report["methods"][name]["mean_rmse_ms"] = n ? json(sum / static_cast<double>(n)) : json(nullptr);
            write_text_file(out / ("rmse_" + name + ".csv"), rmse_csv);

            // time-averaged position map from the primary seed
            std::string pos = "subject_id,truth_x_m,truth_y_m,mean_x_m,mean_y_m,ticks\n";
            for (const auto &s : subjects)
            {
                double sx = 0, sy = 0;
                std::size_t k = 0;
                for (const auto &tick : people)
                    for (auto [e, id] : match_people(tick, subjects, radius).matches)
                        if (id == s.subject_id)
                        {
                            sx += tick[e].x_m;
                            sy += tick[e].y_m;
                            ++k;
                        }
                char buf[160];
                std::snprintf(buf, sizeof buf, "%d,%.4f,%.4f,%.4f,%.4f,%zu\n", s.subject_id, s.x_m, s.y_m,
                              k ? sx / k : std::nan(""), k ? sy / k : std::nan(""), k);
                pos += buf;
            }
            write_text_file(out / ("positions_" + name + ".csv"), pos);
        }

        std::string acc_csv = "method,correct,trials,rate\n";
        for (const auto &acc : count_accuracy(trials))
        {
            report["methods"][acc.method]["count_accuracy"] = {{"correct", acc.correct}, {"trials", acc.trials}, {"rate", acc.rate()}};
            char buf[96];
            std::snprintf(buf, sizeof buf, "%s,%zu,%zu,%.4f\n", acc.method.c_str(), acc.correct, acc.trials, acc.rate());
            acc_csv += buf;
        }
        write_text_file(out / "count_accuracy.csv", acc_csv);
        return report;
    }

    void cmd_evaluate(const EvaluateArgs &a)
    {
        fs::path dir(a.results);
        json manifest = json::parse(read_text_file(dir / "manifest.json"));
        fs::path input_dir = fs::path(manifest.value("input", std::string())).parent_path();
        fs::path truth_path = a.truth.empty() ? input_dir / "truth.csv" : fs::path(a.truth);
        fs::path subjects_path = a.subjects.empty() ? truth_path.parent_path() / "truth_subjects.csv" : fs::path(a.subjects);

        auto truth = parse_truth_csv(read_text_file(truth_path));
        auto subjects = parse_subjects_csv(read_text_file(subjects_path));
        fs::path out = a.out.empty() ? dir : fs::path(a.out);
        ensure_dir(out);
        json report = evaluate_dir(dir, truth, subjects, a.match_radius_m, out);
        if (truth.size() != subjects.size())
            report["warnings"].push_back("truth has " + std::to_string(truth.size()) + " subjects, subject table has " + std::to_string(subjects.size()));
        write_text_file(out / "report.json", report.dump(2) + "\n");

        for (auto &[name, m] : report["methods"].items())
        {
            const auto &acc = m["count_accuracy"];
            std::printf("%-7s count accuracy %zu/%zu = %.3f", name.c_str(), acc["correct"].get<std::size_t>(),
                        acc["trials"].get<std::size_t>(), acc["rate"].get<double>());
            if (!m["mean_rmse_ms"].is_null())
                std::printf(", mean interval RMSE %.1f ms", m["mean_rmse_ms"].get<double>());
            std::printf("\n");
        }
        for (const auto &w : report["warnings"])
            std::cerr << "warning: " << w.get<std::string>() << "\n";
    }

    struct SweepArgs
    {
        std::string scene = "preset:u_shape";
        std::string config;
        std::optional<std::uint64_t> seed;
        std::uint64_t scene_seed = 1;
        std::vector<double> snr_db{10.0, 15.0, 20.0, 25.0};
        std::string method = "both";
        std::size_t monte_carlo = 100;
        std::string out;
    };

    void cmd_sweep(const SweepArgs &a)
    {
        if (a.monte_carlo < 1)
            throw ValidationError("--monte-carlo must be >= 1");
        PipelineConfig cfg = resolve_config(a.config, a.seed);
        auto methods = resolve_methods(a.method);
        fs::path out(a.out);
        ensure_dir(out);

        std::string table = "snr_db,method,correct,trials,rate,mean_rmse_ms\n";
        json summary = json::array();
        for (double snr : a.snr_db)
        {
            SceneSpec scene = resolve_scene(a.scene, snr);
            scene.noise_power = noise_power_for_snr(snr);
            ChannelCube cube = synthesize_scene(scene, RadarConfig{}, a.scene_seed);
            PreparedRun run = prepare_run(cube, cfg);
            auto subjects = scene_subjects(scene);
            auto truth = scene_truth_series(scene, cube.radar.slow_time_step_s);
            for (auto m : methods)
            {
                MethodRun mr = run_method(run, m, cfg.seed, a.monte_carlo);
                std::vector<CountTrial> trials;
                for (std::size_t s = 0; s < mr.counts.size(); ++s)
                    for (std::size_t i = 0; i < run.ticks.size(); ++i)
                        trials.push_back({run.ticks[i], cfg.seed + s, mr.counts[s][i], subjects.size(), method_name(m)});
                auto acc = count_accuracy(trials).front();
                double sum = 0.0;
                std::size_t n = 0;
                for (auto &[id, series] : radar_series(mr.people, subjects))
                {
                    try
                    {
                        sum += interval_rmse(series, truth.at(id), scoring_warmup_s(cfg));
                        ++n;
                    }
                    catch (const ValidationError &)
                    {
                    }
                }
                double mean = n ? sum / static_cast<double>(n) : std::nan("");
                char buf[160];
                std::snprintf(buf, sizeof buf, "%.1f,%s,%zu,%zu,%.4f,%.1f\n", snr, acc.method.c_str(), acc.correct, acc.trials, acc.rate(), mean);
                table += buf;
                std::cout << buf;
                summary.push_back({{"snr_db", snr}, {"method", acc.method}, {"correct", acc.correct}, {"trials", acc.trials}, {"rate", acc.rate()}});
            }
        }
        write_text_file(out / "sweep.csv", table);
        json manifest{{"tool_version", tool_version},
                      {"command", "sweep"},
                      {"scene", a.scene},
                      {"scene_seed", a.scene_seed},
                      {"config", json::parse(config_to_json_text(cfg))},
                      {"monte_carlo", a.monte_carlo},
                      {"results", summary}};
        write_text_file(out / "manifest.json", manifest.dump(2) + "\n");
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"Multi-person respiration measurement with a MIMO array radar"};
    app.set_version_flag("--version", tool_version);
    app.require_subcommand(1);

    SimulateArgs sim;
    auto *simulate = app.add_subcommand("simulate", "Synthesize a channel cube and truth tables from a scene");
    simulate->add_option("--scene", sim.scene, "Scene JSON or preset:<u_shape|square|single>")->required();
    simulate->add_option("--radar", sim.radar, "Radar JSON (defaults built in)");
    simulate->add_option("--seed", sim.seed, "Noise seed");
    simulate->add_option("--snr", sim.snr_db, "SNR at 1 m for presets (dB)");
    simulate->add_option("--out", sim.out, "Output directory")->required();

    RunArgs run;
    auto *runc = app.add_subcommand("run", "Process a channel cube into person estimates");
    runc->add_option("input", run.input, "RCUBE file")->required();
    runc->add_option("--config", run.config, "Pipeline config JSON");
    runc->add_option("--calibration", run.calibration, "Array calibration JSON");
    runc->add_option("--seed", run.seed, "First clustering seed (overrides the config)");
    runc->add_option("--method", run.method, "Clustering space")->check(CLI::IsMember({"2d", "resp4d", "both"}));
    runc->add_option("--monte-carlo", run.monte_carlo, "Number of clustering seeds");
    runc->add_option("--out", run.out, "Output directory")->required();
    runc->add_flag("!--no-plots", run.plots, "Skip plot CSVs");

    EvaluateArgs ev;
    auto *evaluate = app.add_subcommand("evaluate", "Score a run directory against truth");
    evaluate->add_option("results", ev.results, "Directory written by run")->required();
    evaluate->add_option("--truth", ev.truth, "Truth CSV (default: next to the input cube)");
    evaluate->add_option("--subjects", ev.subjects, "Subject positions CSV");
    evaluate->add_option("--match-radius", ev.match_radius_m, "Estimate-to-subject matching radius (m)");
    evaluate->add_option("--out", ev.out, "Report directory (default: the results directory)");

    SweepArgs sw;
    auto *sweep = app.add_subcommand("sweep", "Monte Carlo accuracy over an SNR grid");
    sweep->add_option("--scene", sw.scene, "Scene JSON or preset:<name>");
    sweep->add_option("--config", sw.config, "Pipeline config JSON");
    sweep->add_option("--seed", sw.seed, "First clustering seed");
    sweep->add_option("--scene-seed", sw.scene_seed, "Noise seed for the simulated scenes");
    sweep->add_option("--snr", sw.snr_db, "SNR grid (dB)")->delimiter(',');
    sweep->add_option("--method", sw.method, "Clustering space")->check(CLI::IsMember({"2d", "resp4d", "both"}));
    sweep->add_option("--monte-carlo", sw.monte_carlo, "Number of clustering seeds");
    sweep->add_option("--out", sw.out, "Output directory")->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        int code = app.exit(e);
        return code == 0 ? 0 : exit_validation;
    }

    try
    {
        if (*simulate)
            cmd_simulate(sim);
        else if (*runc)
            cmd_run(run);
        else if (*evaluate)
            cmd_evaluate(ev);
        else if (*sweep)
            cmd_sweep(sw);
        return 0;
    }
    catch (const ValidationError &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return exit_validation;
    }
    catch (const IoError &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return exit_io;
    }
    catch (const nlohmann::json::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return exit_validation;
    }
    catch (const std::filesystem::filesystem_error &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return exit_io;
    }
    catch (const std::exception &e)
    {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
