#pragma once
// Report assembly: machine-readable JSON (key order fixed, so identical runs
// serialize byte for byte) and plot-ready CSV ladders. Wall-clock facts never
// enter a report body; tools print runtime on stderr instead.

#include <complex>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "folnerlab/covering.hpp"
#include "folnerlab/group.hpp"
#include "folnerlab/weights.hpp"

namespace folnerlab::report {

using json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "folnerlab 0.1.0";
inline constexpr int kSchema = 1;

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// regions serialize as sorted coordinate lists; 1-d stays flat
inline json region_json(const FiniteRegion& r) {
    json out = json::array();
    for (const auto& g : r.elements()) {
        if (r.model().dim() == 1) {
            out.push_back(g.c[0]);
        } else {
            json tuple = json::array();
            for (int i = 0; i < r.model().dim(); ++i) tuple.push_back(g.c[i]);
            out.push_back(tuple);
        }
    }
    return out;
}

inline json element_json(const GroupModel& m, const GroupElement& g) {
    if (m.dim() == 1) return json(g.c[0]);
    json tuple = json::array();
    for (int i = 0; i < m.dim(); ++i) tuple.push_back(g.c[i]);
    return tuple;
}

inline json perp_json(const GroupModel& m, const PerpVerdict& v) {
    json windows = json::array();
    for (const auto& w : v.windows) {
        windows.push_back(json{{"scale", w.scale},
                               {"probes", w.probes},
                               {"stride", w.stride},
                               {"good_density", w.good_density}});
    }
    return json{{"passed", v.passed},
                {"delta", v.delta},
                {"horizon", v.horizon},
                {"n_delta", v.n_delta},
                {"ladder_cap", v.ladder_cap},
                {"windows", windows},
                {"worst_density", v.worst_density},
                {"witness", element_json(m, v.witness)},
                {"witness_bad_density", v.witness_bad_density},
                {"witness_last_violation", v.witness_last_violation},
                {"witness_correlation", v.witness_correlation}};
}

inline json moments_json(const MomentReport& r) {
    return json{{"trials", r.trials},
                {"C", r.c_const},
                {"union_measure", r.union_measure},
                {"tempered_ok", r.tempered_ok},
                {"tempered_constant", r.tempered_c},
                {"no_mass", r.no_mass},
                {"bounds",
                 {{"mean_given_hit", r.bound_mean},
                  {"second_given_hit", r.bound_second},
                  {"mass", r.bound_mass}}},
                {"estimates",
                 {{"mean_given_hit", r.mean_given_hit},
                  {"second_given_hit", r.second_given_hit},
                  {"mass", r.mass_mean}}},
                {"standard_errors",
                 {{"mean_given_hit", r.se_mean},
                  {"second_given_hit", r.se_second},
                  {"mass", r.se_mass}}},
                {"pass",
                 {{"mean_given_hit", r.pass_mean},
                  {"second_given_hit", r.pass_second},
                  {"mass", r.pass_mass},
                  {"all", r.passed}}}};
}

// tiny CSV table; every number goes through one fixed format
class Csv {
public:
    explicit Csv(std::vector<std::string> header) : header_(std::move(header)) {}

    void row(const std::vector<std::string>& cells) {
        if (cells.size() != header_.size())
            throw UsageError("csv row width does not match the header");
        rows_.push_back(cells);
    }

    std::string str() const {
        std::string out;
        for (std::size_t i = 0; i < header_.size(); ++i)
            out += (i ? "," : "") + header_[i];
        out += '\n';
        for (const auto& r : rows_) {
            for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
            out += '\n';
        }
        return out;
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// "-" or "csv"/"json" mean stdout
inline void write_text(const std::string& dest, const std::string& text) {
    if (dest.empty() || dest == "-" || dest == "csv" || dest == "json") {
        std::cout << text;
        return;
    }
    std::ofstream out(dest, std::ios::binary);
    if (!out) throw ConfigError("cannot write to " + dest);
    out << text;
}

inline void write_json(const std::string& dest, const json& doc) {
    write_text(dest, doc.dump(2) + "\n");
}

}  // namespace folnerlab::report
