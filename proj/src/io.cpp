#include "deepsum/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace deepsum {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

bool parse_double(std::string_view field, double& out) {
    field = trim(field);
    if (field.empty()) return false;
    if (field.front() == '+') field.remove_prefix(1);
    const auto* end = field.data() + field.size();
    const auto res = std::from_chars(field.data(), end, out);
    return res.ec == std::errc() && res.ptr == end && std::isfinite(out);
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvTable read_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingFileError("cannot open '" + path.string() + "'");
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path.string() + ": missing header row");
    for (auto f : split_fields(trim(line))) t.header.emplace_back(trim(f));
    const std::size_t cols = t.header.size();

    std::vector<double> vals;
    std::size_t rows = 0, lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(trim(line));
        if (fields.size() != cols)
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                             std::to_string(cols) + " fields, found " + std::to_string(fields.size()));
        for (std::size_t c = 0; c < cols; ++c) {
            double v;
            if (!parse_double(fields[c], v))
                throw ParseError(path.string() + ":" + std::to_string(lineno) + ": column " +
                                 std::to_string(c + 1) + ": non-numeric value '" + std::string(trim(fields[c])) +
                                 "'");
            vals.push_back(v);
        }
        ++rows;
    }
    t.values = Matrix(rows, cols, std::move(vals));
    return t;
}

void write_csv(const fs::path& path, const Matrix& m, const std::vector<std::string>& header) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    for (std::size_t c = 0; c < m.cols(); ++c) {
        if (c) out << ',';
        out << (c < header.size() ? header[c] : "c" + std::to_string(c + 1));
    }
    out << '\n';
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (c) out << ',';
            out << format_double(m(r, c));
        }
        out << '\n';
    }
    if (!out) throw DataError("write failed for '" + path.string() + "'");
}

MultimodalDataset load_multimodal_csv(const fs::path& manifest) {
    std::ifstream in(manifest);
    if (!in) throw MissingFileError("cannot open manifest '" + manifest.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError("manifest '" + manifest.string() + "': " + e.what());
    }
    const fs::path base = manifest.parent_path();
    auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };

    MultimodalDataset d;
    fs::path response_path;
    std::vector<fs::path> paths;
    try {
        for (const auto& m : j.at("modalities")) {
            d.names.push_back(m.at("name").get<std::string>());
            paths.push_back(resolve(m.at("path").get<std::string>()));
        }
        response_path = resolve(j.at("response").at("path").get<std::string>());
    } catch (const json::exception& e) {
        throw ParseError("manifest '" + manifest.string() + "': " + e.what());
    }
    if (paths.empty()) throw DataError("manifest lists no modalities");

    d.response = read_csv(response_path).values;
    for (const auto& p : paths) {
        Matrix m = read_csv(p).values;
        if (m.rows() != d.response.rows())
            throw RowCountError("row-count mismatch: '" + p.string() + "' has " + std::to_string(m.rows()) +
                                " rows, '" + response_path.string() + "' has " +
                                std::to_string(d.response.rows()));
        d.modalities.push_back(std::move(m));
    }
    d.validate();
    return d;
}

fs::path export_multimodal_csv(const MultimodalDataset& data, const fs::path& dir, const std::string& notes_json) {
    fs::create_directories(dir);
    json j;
    j["modalities"] = json::array();
    for (std::size_t k = 0; k < data.num_modalities(); ++k) {
        const std::string file = data.names[k] + ".csv";
        std::vector<std::string> header;
        for (std::size_t c = 0; c < data.modalities[k].cols(); ++c)
            header.push_back(data.names[k] + "_" + std::to_string(c + 1));
        write_csv(dir / file, data.modalities[k], header);
        j["modalities"].push_back({{"name", data.names[k]}, {"path", file}});
    }
    write_csv(dir / "Y.csv", data.response, {"Y"});
    j["response"] = {{"path", "Y.csv"}};
    j["notes"] = json::parse(notes_json);
    const fs::path mpath = dir / "manifest.json";
    std::ofstream out(mpath);
    if (!out) throw DataError("cannot write '" + mpath.string() + "'");
    out << j.dump(2) << '\n';
    return mpath;
}

fs::path export_synthetic(const SynthDataset& ds, const SynthConfig& cfg, const fs::path& dir) {
    json notes;
    notes["generator"] = {{"scenario", cfg.scenario}, {"case", cfg.case_id}, {"n", cfg.n},
                          {"p", cfg.p},           {"q", cfg.q},          {"sigma", cfg.sigma},
                          {"var_x", cfg.var_x},   {"var_u", cfg.noise_u()}, {"var_v", cfg.noise_v()},
                          {"var_w", cfg.noise_w()}, {"seed", cfg.seed}};
    if (cfg.scenario == 1)
        notes["scenario1_form"] = "(Z1 + Z2)^2 + (1 + exp(Z2))^2 + e; the exponential term uses the latent Z2";
    notes["files"] = {{"signal", "signal.csv"}, {"latent", "Z.csv"}};
    fs::create_directories(dir);
    write_csv(dir / "signal.csv", ds.signal, {"signal"});
    write_csv(dir / "Z.csv", ds.latent, {"Z1", "Z2", "Z3"});
    return export_multimodal_csv(ds.data, dir, notes.dump());
}

}  // namespace deepsum
