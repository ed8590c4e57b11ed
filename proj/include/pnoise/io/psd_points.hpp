#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pnoise/detail/format.hpp"
#include "pnoise/fitting.hpp"

namespace pnoise::io {

/// CSV with header `freq_hz,level_db`; '#' lines and blank lines are
/// skipped. Frequencies must be positive and strictly increasing.
inline std::vector<PsdPoint> read_psd_points(std::istream& in, const std::string& name = "<stream>") {
    std::vector<PsdPoint> pts;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        if (!header) {
            if (line.substr(first) != "freq_hz,level_db") {
                throw std::runtime_error(name + ":" + std::to_string(lineno) +
                                         ": expected header 'freq_hz,level_db'");
            }
            header = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw std::runtime_error(name + ":" + std::to_string(lineno) + ": expected two columns");
        }
        PsdPoint p{};
        try {
            std::size_t used = 0;
            p.freq_hz = std::stod(line.substr(0, comma), &used);
            p.level_db = std::stod(line.substr(comma + 1), &used);
        } catch (const std::exception&) {
            throw std::runtime_error(name + ":" + std::to_string(lineno) + ": malformed number");
        }
        if (!(p.freq_hz > 0.0)) {
            throw std::runtime_error(name + ":" + std::to_string(lineno) + ": frequency must be > 0");
        }
        if (!pts.empty() && !(p.freq_hz > pts.back().freq_hz)) {
            throw std::runtime_error(name + ":" + std::to_string(lineno) +
                                     ": frequencies must be strictly increasing");
        }
        pts.push_back(p);
    }
    if (!header) throw std::runtime_error(name + ": missing header 'freq_hz,level_db'");
    return pts;
}

inline std::vector<PsdPoint> read_psd_points(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    return read_psd_points(f, path);
}

inline void write_psd_points(std::ostream& out, const std::vector<PsdPoint>& pts) {
    out << "freq_hz,level_db\n";
    for (const auto& p : pts) out << detail::fmt(p.freq_hz) << ',' << detail::fmt(p.level_db) << '\n';
}

}  // namespace pnoise::io
