#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "msgd/glm.hpp"
#include "msgd/model.hpp"
#include "msgd/solver.hpp"

namespace msgd {

/// Shortest round-trip decimal form of a double (std::to_chars), so repeated
/// runs emit byte-identical files.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\r' || s[pos] == '\t')) ++pos;
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("not a number: '" + s + "'");
    }
}

/// Write-then-rename so readers never observe a partially written file.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw std::runtime_error("rename failed for " + path.string() + ": " + ec.message());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---- vectors: one value per line ----

inline Vec read_vector_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open file: " + path.string());
    std::vector<double> vals;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        vals.push_back(parse_double(line));
    }
    if (vals.empty()) throw std::invalid_argument("empty vector file: " + path.string());
    return Eigen::Map<const Vec>(vals.data(), static_cast<Index>(vals.size()));
}

inline std::string vector_to_csv(const Eigen::Ref<const Vec>& v) {
    std::string s;
    for (Index i = 0; i < v.size(); ++i) {
        s += format_double(v[i]);
        s += '\n';
    }
    return s;
}

// ---- datasets: header "y,x0,...,x{p-1}" ----

inline Dataset read_dataset_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty dataset file");
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(parse_double(cell));
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::invalid_argument("dataset: ragged rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty() || rows.front().size() < 2)
        throw std::invalid_argument("dataset: need at least one row and one predictor");
    const Index n = static_cast<Index>(rows.size());
    const Index p = static_cast<Index>(rows.front().size()) - 1;
    Dataset data;
    data.x.resize(n, p);
    data.y.resize(n);
    for (Index i = 0; i < n; ++i) {
        data.y[i] = rows[static_cast<std::size_t>(i)][0];
        for (Index j = 0; j < p; ++j)
            data.x(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j) + 1];
    }
    return data;
}

inline std::string dataset_to_csv(const Dataset& data) {
    std::string s = "y";
    for (Index j = 0; j < data.p(); ++j) s += ",x" + std::to_string(j);
    s += '\n';
    for (Index i = 0; i < data.n(); ++i) {
        s += format_double(data.y[i]);
        for (Index j = 0; j < data.p(); ++j) {
            s += ',';
            s += format_double(data.x(i, j));
        }
        s += '\n';
    }
    return s;
}

// ---- traces ----

inline std::string trace_to_csv(const SolverTrace& trace) {
    std::string s = "iter,objective,eta,support_size,step_norm,dist_to_ref\n";
    const int total = static_cast<int>(trace.objective.size());
    for (int i = 0; i < total; ++i) {
        s += std::to_string(i);
        s += ',';
        s += format_double(trace.objective[static_cast<std::size_t>(i)]);
        s += ',';
        if (i < trace.steps()) s += format_double(trace.eta[static_cast<std::size_t>(i)]);
        s += ',';
        s += std::to_string(trace.support[static_cast<std::size_t>(i)].size());
        s += ',';
        if (i < trace.steps()) s += format_double(trace.step_norm[static_cast<std::size_t>(i)]);
        s += ',';
        if (trace.has_reference())
            s += format_double(trace.dist_to_ref[static_cast<std::size_t>(i)]);
        s += '\n';
    }
    return s;
}

// ---- model JSON ----
// {"p": int, "kind": "plain_k", "k": int}
// {"p": int, "kind": "disjoint_groups", "groups": [[int,...],...], "g_active": int}
// {"p": int, "kind": "explicit", "supports": [[int,...],...]}
// Indices are 0-based.

inline nlohmann::json model_to_json(const SparsityModel& model) {
    nlohmann::json j;
    j["p"] = model.ambient_dim();
    j["kind"] = model.kind_name();
    if (const auto* pk = std::get_if<PlainK>(&model.kind())) {
        j["k"] = pk->k;
    } else if (const auto* dg = std::get_if<DisjointGroups>(&model.kind())) {
        nlohmann::json cells = nlohmann::json::array();
        for (const Support& c : dg->cells) cells.push_back(c.indices());
        j["groups"] = std::move(cells);
        j["g_active"] = dg->g_active;
    } else {
        const auto& ef = std::get<ExplicitFamily>(model.kind());
        nlohmann::json gens = nlohmann::json::array();
        for (const Support& g : ef.generators) gens.push_back(g.indices());
        j["supports"] = std::move(gens);
    }
    return j;
}

inline SparsityModel model_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("p") || !j.contains("kind"))
        throw std::invalid_argument("model JSON: need object with 'p' and 'kind'");
    const int p = j.at("p").get<int>();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "plain_k") return SparsityModel::plain(p, j.at("k").get<int>());
    auto parse_sets = [](const nlohmann::json& arr) {
        std::vector<Support> sets;
        for (const auto& s : arr) sets.emplace_back(s.get<std::vector<int>>());
        return sets;
    };
    if (kind == "disjoint_groups")
        return SparsityModel::disjoint_groups(p, parse_sets(j.at("groups")),
                                              j.at("g_active").get<int>());
    if (kind == "explicit") return SparsityModel::explicit_family(p, parse_sets(j.at("supports")));
    throw std::invalid_argument("model JSON: unknown kind '" + kind + "'");
}

inline SparsityModel read_model_json(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("model JSON parse error in " + path.string() + ": " + e.what());
    }
    return model_from_json(j);
}

}  // namespace msgd
