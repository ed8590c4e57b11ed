#pragma once

#include <cmath>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pnoise/db.hpp"
#include "pnoise/linksim.hpp"

// Link configuration file, schema 1:
//
// {
//   "schema": 1,
//   "link": {
//     "constellation": "qpsk", "rolloff": 0.05, "span_symbols": 32, "osf": 5,
//     "n_symbols": 100000, "ts": 1e-7, "pn_model": "ct_composite",
//     "processes": [{"f3db": 10, "l100_db": -88, "linf_db": null, "f_ref": 1e5}],
//     "esn0_db": 10, "pilot_len": 36, "pilot_period": 1476, "tracking": true,
//     "seed": 1
//   }
// }
//
// Every key under "link" is optional; unknown keys are an error. The header
// of every `ber`/`sir` output carries the resolved config in this form.

namespace pnoise::cli {

using ojson = nlohmann::ordered_json;

inline constexpr int config_schema = 1;

inline ojson process_json(const OscillatorParams& p) {
    ojson j;
    j["f3db"] = p.f3db();
    j["l100_db"] = db(p.l100_sq());
    j["linf_db"] = p.linf_sq() > 0.0 ? ojson(db(p.linf_sq())) : ojson(nullptr);
    j["f_ref"] = p.f_ref();
    return j;
}

inline OscillatorParams process_from_json(const ojson& j) {
    static const std::set<std::string> keys{"f3db", "l100_db", "linf_db", "f_ref"};
    for (const auto& [k, v] : j.items()) {
        if (!keys.count(k)) throw std::invalid_argument("config: unknown process key '" + k + "'");
    }
    if (!j.contains("f3db") || !j.contains("l100_db")) {
        throw std::invalid_argument("config: a process needs f3db and l100_db");
    }
    const double linf = j.contains("linf_db") && !j["linf_db"].is_null() ? j["linf_db"].get<double>()
                                                                       : -std::numeric_limits<double>::infinity();
    const double fref = j.value("f_ref", 1e5);
    return OscillatorParams::from_db(j["f3db"].get<double>(), j["l100_db"].get<double>(), linf, fref);
}

inline ojson link_json(const linksim::LinkConfig& c) {
    ojson l;
    l["constellation"] = linksim::constellation_name(c.constellation);
    l["rolloff"] = c.rolloff;
    l["span_symbols"] = c.span_symbols;
    l["osf"] = c.osf;
    l["n_symbols"] = c.n_symbols;
    l["ts"] = c.ts;
    l["pn_model"] = linksim::pn_model_name(c.pn_model);
    l["processes"] = ojson::array();
    for (const auto& p : c.processes) l["processes"].push_back(process_json(p));
    l["esn0_db"] = c.esn0_db ? ojson(*c.esn0_db) : ojson(nullptr);
    l["pilot_len"] = c.pilots.pilot_len;
    l["pilot_period"] = c.pilots.pilot_period;
    l["tracking"] = c.tracking;
    l["seed"] = c.seed;
    ojson j;
    j["schema"] = config_schema;
    j["link"] = l;
    return j;
}

inline linksim::LinkConfig link_from_json(const ojson& j) {
    if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
    for (const auto& [k, v] : j.items()) {
        if (k != "schema" && k != "link") throw std::invalid_argument("config: unknown key '" + k + "'");
    }
    if (j.value("schema", 0) != config_schema) {
        throw std::invalid_argument("config: unsupported schema (expected " + std::to_string(config_schema) + ")");
    }
    linksim::LinkConfig c;
    if (!j.contains("link")) return c;
    const ojson& l = j["link"];
    static const std::set<std::string> keys{"constellation", "rolloff",   "span_symbols", "osf",
                                            "n_symbols",     "ts",        "pn_model",     "processes",
                                            "esn0_db",       "pilot_len", "pilot_period", "tracking",
                                            "seed"};
    for (const auto& [k, v] : l.items()) {
        if (!keys.count(k)) throw std::invalid_argument("config: unknown link key '" + k + "'");
    }
    if (l.contains("constellation")) c.constellation = linksim::parse_constellation(l["constellation"].get<std::string>());
    c.rolloff = l.value("rolloff", c.rolloff);
    c.span_symbols = l.value("span_symbols", c.span_symbols);
    c.osf = l.value("osf", c.osf);
    c.n_symbols = l.value("n_symbols", c.n_symbols);
    c.ts = l.value("ts", c.ts);
    if (l.contains("pn_model")) c.pn_model = linksim::parse_pn_model(l["pn_model"].get<std::string>());
    if (l.contains("processes")) {
        for (const auto& p : l["processes"]) c.processes.push_back(process_from_json(p));
    }
    if (l.contains("esn0_db") && !l["esn0_db"].is_null()) c.esn0_db = l["esn0_db"].get<double>();
    c.pilots.pilot_len = l.value("pilot_len", c.pilots.pilot_len);
    c.pilots.pilot_period = l.value("pilot_period", c.pilots.pilot_period);
    c.tracking = l.value("tracking", c.tracking);
    c.seed = l.value("seed", c.seed);
    return c;
}

}  // namespace pnoise::cli
