#include "respgate/stack_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace respgate {

namespace {

using nlohmann::json;

Vec3 parse_vec3(const json& j, const std::string& what, int slice) {
    if (!j.is_array() || j.size() != 3)
        throw IoError(what + " must be a 3-vector, slice " + std::to_string(slice));
    return Vec3{j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace

CineStack load_stack(const std::filesystem::path& dir) {
    const auto manifest_path = dir / kManifestName;
    std::ifstream in(manifest_path);
    if (!in) throw IoError("cannot open " + manifest_path.string());
    json manifest;
    try {
        in >> manifest;
    } catch (const json::exception& e) {
        throw IoError("malformed manifest: " + std::string(e.what()));
    }

    for (const char* key : {"version", "J", "R", "L", "N", "frame_period_s", "slices"})
        if (!manifest.contains(key))
            throw IoError(std::string("manifest missing field '") + key + "'");

    const int j_count = manifest["J"].get<int>();
    const int rows = manifest["R"].get<int>();
    const int cols = manifest["L"].get<int>();
    const int frames = manifest["N"].get<int>();
    const double dt = manifest["frame_period_s"].get<double>();
    const auto& entries = manifest["slices"];
    if (!entries.is_array() || static_cast<int>(entries.size()) != j_count)
        throw IoError("manifest slice list does not match J");

    std::vector<SliceSeries> slices;
    slices.reserve(j_count);
    for (int k = 0; k < j_count; ++k) {
        const auto& e = entries[k];
        SliceSeries s;
        s.rows = rows;
        s.cols = cols;
        s.frames = frames;
        s.frame_period_s = dt;
        s.slice_index = k;
        s.row_dir = parse_vec3(e.at("row_dir"), "row_dir", k);
        s.col_dir = parse_vec3(e.at("col_dir"), "col_dir", k);
        if (e.contains("rwave_times_s"))
            s.rwave_times_s = e["rwave_times_s"].get<std::vector<double>>();

        const auto pixel_path = dir / e.at("pixel_file").get<std::string>();
        std::ifstream px(pixel_path, std::ios::binary);
        if (!px)
            throw IoError("missing pixel file, slice " + std::to_string(k));
        const std::size_t count =
            static_cast<std::size_t>(rows) * cols * frames;
        s.pixels.resize(count);
        px.read(reinterpret_cast<char*>(s.pixels.data()),
                static_cast<std::streamsize>(count * sizeof(float)));
        if (static_cast<std::size_t>(px.gcount()) != count * sizeof(float))
            throw IoError("truncated pixel file, slice " + std::to_string(k));
        slices.push_back(std::move(s));
    }
    try {
        return CineStack::create(std::move(slices));
    } catch (const StackError& e) {
        throw IoError(e.what());
    }
}

void save_stack(const CineStack& stack, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    json manifest;
    manifest["version"] = kManifestVersion;
    manifest["J"] = stack.slice_count();
    manifest["R"] = stack.rows();
    manifest["L"] = stack.cols();
    manifest["N"] = stack.frames();
    manifest["frame_period_s"] = stack.frame_period_s();
    manifest["slices"] = json::array();
    for (int k = 0; k < stack.slice_count(); ++k) {
        const auto& s = stack.slices[k];
        const std::string name = "slice_" + std::to_string(k) + ".raw";
        json e;
        e["pixel_file"] = name;
        e["row_dir"] = {s.row_dir[0], s.row_dir[1], s.row_dir[2]};
        e["col_dir"] = {s.col_dir[0], s.col_dir[1], s.col_dir[2]};
        e["rwave_times_s"] = s.rwave_times_s;
        manifest["slices"].push_back(e);

        std::ofstream px(dir / name, std::ios::binary);
        if (!px) throw IoError("cannot write " + (dir / name).string());
        px.write(reinterpret_cast<const char*>(s.pixels.data()),
                 static_cast<std::streamsize>(s.pixels.size() * sizeof(float)));
    }
    std::ofstream out(dir / kManifestName);
    if (!out) throw IoError("cannot write manifest in " + dir.string());
    out << manifest.dump(2) << "\n";
}

SliceSeries reorient_to_si(const SliceSeries& slice) {
    SliceSeries s = slice;
    // ties keep the row axis vertical
    if (std::abs(s.col_dir[2]) > std::abs(s.row_dir[2])) {
        SliceSeries t = s;
        t.rows = s.cols;
        t.cols = s.rows;
        std::swap(t.row_dir, t.col_dir);
        for (int n = 0; n < s.frames; ++n)
            for (int r = 0; r < s.rows; ++r)
                for (int c = 0; c < s.cols; ++c)
                    t.at(c, r, n) = s.at(r, c, n);
        s = std::move(t);
    }
    // row index must increase toward inferior (z decreasing)
    if (s.row_dir[2] > 0.0) {
        SliceSeries t = s;
        for (int n = 0; n < s.frames; ++n)
            for (int r = 0; r < s.rows; ++r)
                for (int c = 0; c < s.cols; ++c)
                    t.at(s.rows - 1 - r, c, n) = s.at(r, c, n);
        t.row_dir = Vec3{-s.row_dir[0], -s.row_dir[1], -s.row_dir[2]};
        s = std::move(t);
    }
    return s;
}

void save_signals(const std::filesystem::path& dir,
                  const std::vector<RespSignal>& signals,
                  const std::vector<ZmcCurve>& zmc,
                  const std::string& summary_json) {
    for (const auto& s : signals)
        if (s.sign_state != SignState::GloballyCorrected)
            throw IoError("slice " + std::to_string(s.slice_index) +
                          ": signal is not globally corrected");
    std::filesystem::create_directories(dir);

    auto write_columns = [&](const std::filesystem::path& path, auto get_values,
                             std::size_t count) {
        std::ofstream out(path);
        if (!out) throw IoError("cannot write " + path.string());
        for (std::size_t j = 0; j < count; ++j)
            out << (j ? "," : "") << "slice_" << j;
        out << "\n";
        const std::size_t frames = count ? get_values(0).size() : 0;
        for (std::size_t i = 0; i < frames; ++i) {
            for (std::size_t j = 0; j < count; ++j)
                out << (j ? "," : "") << fmt(get_values(j)[i]);
            out << "\n";
        }
    };
    write_columns(dir / "signals.csv",
                  [&](std::size_t j) -> const std::vector<double>& {
                      return signals[j].values;
                  },
                  signals.size());
    write_columns(dir / "zmc.csv",
                  [&](std::size_t j) -> const std::vector<double>& {
                      return zmc[j].values;
                  },
                  zmc.size());
    std::ofstream out(dir / "summary.json");
    if (!out) throw IoError("cannot write summary.json");
    out << summary_json << "\n";
}

std::vector<std::vector<double>> load_signal_columns(
    const std::filesystem::path& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw IoError("cannot open " + csv_path.string());
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty csv " + csv_path.string());
    std::size_t cols = 1;
    for (char ch : line)
        if (ch == ',') ++cols;
    std::vector<std::vector<double>> out(cols);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        for (std::size_t j = 0; j < cols; ++j) {
            if (!std::getline(ss, cell, ','))
                throw IoError("ragged row in " + csv_path.string());
            out[j].push_back(std::stod(cell));
        }
    }
    return out;
}

}  // namespace respgate
