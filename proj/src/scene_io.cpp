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

#include "resparray/scene_io.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

using nlohmann::json;

namespace resparray
{
    static_assert(std::endian::native == std::endian::little, "RCUBE I/O assumes a little-endian host");

    namespace
    {
        json parse_json(const std::string &text, const std::string &what)
        {
            try
            {
                return json::parse(text);
            }
            catch (const json::parse_error &e)
            {
                throw ValidationError(what + ": " + e.what());
            }
        }

        double number_field(const json &j, const char *key, const std::string &path, std::optional<double> fallback = {})
        {
            if (!j.contains(key))
            {
                if (fallback)
                    return *fallback;
                throw ValidationError(path + "." + key + ": required field missing");
            }
            const auto &v = j.at(key);
            if (!v.is_number())
                throw ValidationError(path + "." + key + ": expected a number");
            return v.get<double>();
        }

        std::pair<double, double> position_field(const json &j, const std::string &path)
        {
            if (!j.contains("position"))
                throw ValidationError(path + ".position: required field missing");
            const auto &p = j.at("position");
            if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
                throw ValidationError(path + ".position: expected [x, y] in metres");
            return {p[0].get<double>(), p[1].get<double>()};
        }

        BreathingProfile breathing_from_json(const json &j, const std::string &path)
        {
            if (!j.is_object())
                throw ValidationError(path + ": expected an object");
            BreathingProfile b;
            b.base_interval_s = number_field(j, "base_interval_s", path);
            b.amplitude_m = number_field(j, "amplitude_m", path, 2e-3);
            b.phase_offset_rad = number_field(j, "phase_offset_rad", path, 0.0);
            if (j.contains("interval_knots"))
            {
                const auto &ks = j.at("interval_knots");
                if (!ks.is_array())
                    throw ValidationError(path + ".interval_knots: expected an array of [t, interval]");
                for (std::size_t i = 0; i < ks.size(); ++i)
                {
                    const auto &k = ks[i];
                    if (!k.is_array() || k.size() != 2 || !k[0].is_number() || !k[1].is_number())
                        throw ValidationError(path + ".interval_knots[" + std::to_string(i) + "]: expected [t, interval]");
                    b.interval_knots.emplace_back(k[0].get<double>(), k[1].get<double>());
                }
            }
            try
            {
                b.validate();
            }
            catch (const ValidationError &e)
            {
                throw ValidationError(path + ": " + e.what());
            }
            return b;
        }

        json radar_to_json(const RadarConfig &r)
        {
            return json{{"center_wavelength_m", r.center_wavelength_m},
                        {"num_virtual_elements", r.num_virtual_elements},
                        {"element_spacing_m", r.element_spacing_m},
                        {"range_resolution_m", r.range_resolution_m},
                        {"slow_time_step_s", r.slow_time_step_s},
                        {"num_range_bins", r.num_range_bins},
                        {"num_angle_bins", r.num_angle_bins}};
        }

        RadarConfig radar_from_json(const json &j)
        {
            if (!j.is_object())
                throw ValidationError("radar: expected an object");
            RadarConfig r;
            r.center_wavelength_m = number_field(j, "center_wavelength_m", "radar", r.center_wavelength_m);
            r.element_spacing_m = number_field(j, "element_spacing_m", "radar", r.center_wavelength_m / 2.0);
            r.range_resolution_m = number_field(j, "range_resolution_m", "radar", r.range_resolution_m);
            r.slow_time_step_s = number_field(j, "slow_time_step_s", "radar", r.slow_time_step_s);
            r.num_virtual_elements = static_cast<std::size_t>(number_field(j, "num_virtual_elements", "radar", 12));
            r.num_range_bins = static_cast<std::size_t>(number_field(j, "num_range_bins", "radar", 128));
            r.num_angle_bins = static_cast<std::size_t>(number_field(j, "num_angle_bins", "radar", 32));
            r.validate();
            return r;
        }

        template <typename T>
        void put_le(std::vector<std::uint8_t> &out, T v)
        {
            std::uint8_t buf[sizeof(T)];
            std::memcpy(buf, &v, sizeof(T));
            out.insert(out.end(), buf, buf + sizeof(T));
        }

        template <typename T>
        T get_le(const std::vector<std::uint8_t> &in, std::size_t offset)
        {
            T v;
            std::memcpy(&v, in.data() + offset, sizeof(T));
            return v;
        }
    }

    SceneSpec scene_from_json_text(const std::string &text)
    {
        json j = parse_json(text, "scene");
        if (!j.is_object())
            throw ValidationError("scene: top level must be an object");
        if (j.contains("schema") && j.at("schema") != scene_schema)
            throw ValidationError(std::string("scene.schema: unsupported schema, expected ") + scene_schema);

        SceneSpec s;
        s.duration_s = number_field(j, "duration_s", "scene", 120.0);
        if (j.contains("snr_db_at_1m"))
            s.noise_power = noise_power_for_snr(number_field(j, "snr_db_at_1m", "scene"));
        else
            s.noise_power = number_field(j, "noise_power", "scene", 0.0);

        if (j.contains("targets"))
        {
            const auto &ts = j.at("targets");
            if (!ts.is_array())
                throw ValidationError("scene.targets: expected an array");
            for (std::size_t i = 0; i < ts.size(); ++i)
            {
                std::string path = "scene.targets[" + std::to_string(i) + "]";
                const auto &t = ts[i];
                if (!t.is_object())
                    throw ValidationError(path + ": expected an object");
                Target tg;
                tg.id = static_cast<int>(number_field(t, "id", path, static_cast<double>(i + 1)));
                std::tie(tg.x_m, tg.y_m) = position_field(t, path);
                tg.rcs_scale = number_field(t, "rcs_scale", path, 1.0);
                tg.body_depth_m = number_field(t, "body_depth_m", path, 0.0);
                tg.body_width_m = number_field(t, "body_width_m", path, 0.0);
                tg.motion_spread = number_field(t, "motion_spread", path, 0.0);
                tg.num_scatterers = static_cast<std::size_t>(number_field(t, "num_scatterers", path, 1.0));
                if (!t.contains("breathing"))
                    throw ValidationError(path + ".breathing: required field missing");
                tg.breathing = breathing_from_json(t.at("breathing"), path + ".breathing");
                s.targets.push_back(std::move(tg));
            }
        }
        if (j.contains("clutter"))
        {
            const auto &cs = j.at("clutter");
            if (!cs.is_array())
                throw ValidationError("scene.clutter: expected an array");
            for (std::size_t i = 0; i < cs.size(); ++i)
            {
                std::string path = "scene.clutter[" + std::to_string(i) + "]";
                ClutterScatterer c;
                std::tie(c.x_m, c.y_m) = position_field(cs[i], path);
                c.rcs_scale = number_field(cs[i], "rcs_scale", path, 1.0);
                s.clutter.push_back(c);
            }
        }
        return s;
    }

    std::string scene_to_json_text(const SceneSpec &scene)
    {
        json j;
        j["schema"] = scene_schema;
        j["duration_s"] = scene.duration_s;
        j["noise_power"] = scene.noise_power;
        j["targets"] = json::array();
        for (const auto &t : scene.targets)
        {
            json b{{"base_interval_s", t.breathing.base_interval_s},
                   {"amplitude_m", t.breathing.amplitude_m},
                   {"phase_offset_rad", t.breathing.phase_offset_rad}};
            if (!t.breathing.interval_knots.empty())
            {
                b["interval_knots"] = json::array();
                for (auto [kt, kv] : t.breathing.interval_knots)
                    b["interval_knots"].push_back({kt, kv});
            }
            j["targets"].push_back({{"id", t.id},
                                    {"position", {t.x_m, t.y_m}},
                                    {"rcs_scale", t.rcs_scale},
                                    {"body_depth_m", t.body_depth_m},
                                    {"body_width_m", t.body_width_m},
                                    {"motion_spread", t.motion_spread},
                                    {"num_scatterers", t.num_scatterers},
                                    {"breathing", b}});
        }
        j["clutter"] = json::array();
        for (const auto &c : scene.clutter)
            j["clutter"].push_back({{"position", {c.x_m, c.y_m}}, {"rcs_scale", c.rcs_scale}});
        return j.dump(2);
    }

    SceneSpec load_scene(const std::filesystem::path &path)
    {
        return scene_from_json_text(read_text_file(path));
    }

    RadarConfig radar_from_json_text(const std::string &text)
    {
        return radar_from_json(parse_json(text, "radar"));
    }

    std::string radar_to_json_text(const RadarConfig &radar)
    {
        return radar_to_json(radar).dump(2);
    }

    std::vector<std::uint8_t> encode_rcube(const ChannelCube &cube)
    {
        const auto &d = cube.data;
        json header{{"radar", radar_to_json(cube.radar)},
                    {"num_frames", d.n0()},
                    {"dims", {d.n0(), d.n1(), d.n2()}},
                    {"t0_s", cube.t0_s},
                    {"order", "slow_time,range,element"},
                    {"sample", "complex64_le"}};
        std::string htext = header.dump();

        std::vector<std::uint8_t> out;
        out.reserve(12 + htext.size() + d.size() * 8);
        out.insert(out.end(), {'R', 'C', 'U', 'B'});
        put_le<std::uint32_t>(out, rcube_version);
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(htext.size()));
        out.insert(out.end(), htext.begin(), htext.end());
        for (const auto &v : d.data())
        {
            put_le<float>(out, static_cast<float>(v.real()));
            put_le<float>(out, static_cast<float>(v.imag()));
        }
        return out;
    }

    ChannelCube decode_rcube(const std::vector<std::uint8_t> &bytes)
    {
        if (bytes.size() < 12)
            throw IoError("rcube: file too short for header: expected at least 12 bytes, got " + std::to_string(bytes.size()));
        if (std::memcmp(bytes.data(), "RCUB", 4) != 0)
            throw IoError("rcube: bad magic, expected 'RCUB'");
        auto version = get_le<std::uint32_t>(bytes, 4);
        if (version != rcube_version)
            throw IoError("rcube: unsupported format version " + std::to_string(version));
        auto hlen = get_le<std::uint32_t>(bytes, 8);
        if (bytes.size() < 12 + static_cast<std::size_t>(hlen))
            throw IoError("rcube: truncated header: expected " + std::to_string(12 + hlen) + " bytes, got " + std::to_string(bytes.size()));

        json header;
        try
        {
            header = json::parse(bytes.begin() + 12, bytes.begin() + 12 + hlen);
        }
        catch (const json::parse_error &e)
        {
            throw IoError(std::string("rcube: corrupt header: ") + e.what());
        }

        ChannelCube cube;
        try
        {
            cube.radar = radar_from_json(header.at("radar"));
            const auto &dims = header.at("dims");
            std::size_t n0 = dims.at(0).get<std::size_t>(), n1 = dims.at(1).get<std::size_t>(), n2 = dims.at(2).get<std::size_t>();
            if (n1 != cube.radar.num_range_bins || n2 != cube.radar.num_virtual_elements)
                throw IoError("rcube: dims inconsistent with radar configuration");
            cube.t0_s = header.value("t0_s", 0.0);
            cube.data = Array3<cdouble>(n0, n1, n2);
        }
        catch (const json::exception &e)
        {
            throw IoError(std::string("rcube: malformed header: ") + e.what());
        }
        catch (const ValidationError &e)
        {
            throw IoError(std::string("rcube: invalid radar configuration: ") + e.what());
        }

        std::size_t expected = 12 + static_cast<std::size_t>(hlen) + cube.data.size() * 8;
        if (bytes.size() != expected)
            throw IoError("rcube: payload length mismatch: expected " + std::to_string(expected) + " bytes, got " + std::to_string(bytes.size()));

        std::size_t off = 12 + hlen;
        for (auto &v : cube.data.data())
        {
            float re = get_le<float>(bytes, off);
            float im = get_le<float>(bytes, off + 4);
            if (!std::isfinite(re) || !std::isfinite(im))
                throw IoError("rcube: non-finite sample at byte offset " + std::to_string(off));
            v = cdouble(re, im);
            off += 8;
        }
        return cube;
    }

    void write_rcube(const std::filesystem::path &path, const ChannelCube &cube)
    {
        auto bytes = encode_rcube(cube);
        std::ofstream f(path, std::ios::binary);
        if (!f)
            throw IoError("cannot open for writing: " + path.string());
        f.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!f)
            throw IoError("write failed: " + path.string());
    }

    ChannelCube read_rcube(const std::filesystem::path &path)
    {
        return decode_rcube(read_binary_file(path));
    }

    std::string read_text_file(const std::filesystem::path &path)
    {
        std::ifstream f(path);
        if (!f)
            throw IoError("cannot open: " + path.string());
        std::ostringstream os;
        os << f.rdbuf();
        return os.str();
    }

    std::vector<std::uint8_t> read_binary_file(const std::filesystem::path &path)
    {
        std::ifstream f(path, std::ios::binary);
        if (!f)
            throw IoError("cannot open: " + path.string());
        return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
    }

    void write_text_file(const std::filesystem::path &path, const std::string &text)
    {
        std::ofstream f(path);
        if (!f)
            throw IoError("cannot open for writing: " + path.string());
        f << text;
        if (!f)
            throw IoError("write failed: " + path.string());
    }
}
