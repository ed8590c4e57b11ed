#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pnoise/detail/format.hpp"
#include "pnoise/version.hpp"

namespace pnoise::cli {

enum class Format { csv, json };

/// Run metadata written ahead of every data section: '#' lines for CSV, a
/// "meta" object for JSON.
struct Meta {
    std::string command;
    std::optional<std::uint64_t> seed;  // none for deterministic commands
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    std::vector<std::pair<std::string, std::string>> notes;  // summary lines
};

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

inline nlohmann::ordered_json meta_json(const Meta& m) {
    nlohmann::ordered_json j;
    j["tool"] = "pnoise";
    j["version"] = pnoise::version;
    j["command"] = m.command;
    j["seed"] = m.seed ? nlohmann::ordered_json(*m.seed) : nlohmann::ordered_json(nullptr);
    j["config"] = m.config;
    for (const auto& [k, v] : m.notes) j["notes"][k] = v;
    return j;
}

inline void write_csv_header(std::ostream& out, const Meta& m) {
    out << "# pnoise " << pnoise::version << ' ' << m.command << '\n';
    out << "# seed: " << (m.seed ? std::to_string(*m.seed) : std::string("none")) << '\n';
    out << "# config: " << m.config.dump() << '\n';
    for (const auto& [k, v] : m.notes) out << "# " << k << ": " << v << '\n';
}

inline void write_table(std::ostream& out, const Meta& m, const Table& t, Format f) {
    if (f == Format::csv) {
        write_csv_header(out, m);
        for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
        out << '\n';
        for (const auto& r : t.rows) {
            for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << pnoise::detail::fmt(r[i]);
            out << '\n';
        }
        return;
    }
    nlohmann::ordered_json j;
    j["meta"] = meta_json(m);
    j["columns"] = t.columns;
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : t.rows) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        // non-finite values have no JSON literal
        for (double v : r) row.push_back(std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr));
        j["rows"].push_back(row);
    }
    out << j.dump(2) << '\n';
}

}  // namespace pnoise::cli
