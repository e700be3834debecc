#include "tdn/dataset_io.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tdn/errors.hpp"

namespace tdn {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError("cannot open " + tmp + " for writing");
        out << content;
        if (!out) throw IoError("short write to " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp + " to " + path + ": " + ec.message());
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_dataset_csv(const Dataset& ds, const std::string& path, std::uint64_t config_hash) {
    const std::size_t m = ds.z.cols();
    std::string out;
    out.reserve(ds.z.rows() * m * 20);
    char line[64];
    std::snprintf(line, sizeof(line), "# config_hash=%016" PRIx64 "\n", config_hash);
    out += line;
    out += "k";
    for (std::size_t j = 1; j <= m; ++j) out += ",z_" + std::to_string(j);
    out += ",label";
    for (std::size_t j = 1; j <= m; ++j) out += ",f_" + std::to_string(j);
    out += ",fault_id\n";
    for (std::size_t k = 0; k < ds.z.rows(); ++k) {
        out += std::to_string(k);
        for (std::size_t j = 0; j < m; ++j) {
            out += ',';
            out += format_double(ds.z(k, j));
        }
        out += ',';
        out += std::to_string(ds.labels[k]);
        for (std::size_t j = 0; j < m; ++j) {
            out += ',';
            out += format_double(ds.fault_truth(k, j));
        }
        out += ',';
        out += ds.labels[k] ? ds.fault_id : "normal";
        out += '\n';
    }
    write_text_file(path, out);

    nlohmann::ordered_json meta;
    meta["scenario"] = ds.scenario;
    meta["fault_id"] = ds.fault_id;
    meta["seed"] = ds.seed;
    meta["onset"] = ds.onset;
    meta["additive_truth"] = ds.additive_truth;
    meta["samples"] = ds.z.rows();
    meta["dim"] = m;
    char hash_hex[24];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016" PRIx64, config_hash);
    meta["config_hash"] = hash_hex;
    write_text_file(path + ".meta.json", meta.dump(2) + "\n");
}

Dataset read_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset " + path);

    Dataset ds;
    try {
        const auto meta = nlohmann::json::parse(read_text_file(path + ".meta.json"));
        ds.scenario = meta.at("scenario").get<std::string>();
        ds.fault_id = meta.at("fault_id").get<std::string>();
        ds.seed = meta.at("seed").get<std::uint64_t>();
        ds.onset = meta.at("onset").get<std::size_t>();
        ds.additive_truth = meta.at("additive_truth").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError("bad dataset metadata for " + path + ": " + e.what());
    }

    std::string line;
    std::size_t m = 0;
    std::vector<double> zvals, fvals;
    std::vector<int> labels;
    bool header_seen = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            // header: k,z_1..z_m,label,f_1..f_m,fault_id
            std::size_t cols = 1 + static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
            if (cols < 5 || (cols - 3) % 2 != 0)
                throw DataError(path + ": malformed dataset header");
            m = (cols - 3) / 2;
            header_seen = true;
            continue;
        }
        const char* p = line.c_str();
        char* end = nullptr;
        auto next_field = [&]() {
            const char* comma = std::strchr(p, ',');
            p = comma ? comma + 1 : p + std::strlen(p);
        };
        next_field();  // k
        for (std::size_t j = 0; j < m; ++j) {
            zvals.push_back(std::strtod(p, &end));
            if (end == p) throw DataError(path + ": parse error at line " + std::to_string(line_no));
            p = end;
            next_field();
        }
        labels.push_back(static_cast<int>(std::strtol(p, &end, 10)));
        next_field();
        for (std::size_t j = 0; j < m; ++j) {
            fvals.push_back(std::strtod(p, &end));
            if (end == p) throw DataError(path + ": parse error at line " + std::to_string(line_no));
            p = end;
            next_field();
        }
    }
    if (!header_seen || labels.empty()) throw DataError(path + ": empty dataset");

    const std::size_t n = labels.size();
    ds.z = Matrix(n, m);
    ds.fault_truth = Matrix(n, m);
    std::copy(zvals.begin(), zvals.end(), ds.z.data().begin());
    std::copy(fvals.begin(), fvals.end(), ds.fault_truth.data().begin());
    ds.labels = std::move(labels);
    return ds;
}

} // namespace tdn
