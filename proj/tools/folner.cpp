// Folner family diagnostics: per-scale defects against a translate set and
// the running tempered ratio.

#include "tool_common.hpp"

using namespace folnerlab;

int main(int argc, char** argv) {
    CLI::App app{"Folner family diagnostics"};
    app.require_subcommand(1);
    auto* defect = app.add_subcommand(
        "defect", "weak/strong defects of F_N against K plus tempered ratios over a scale window");
    std::string model = "Z", seqspec = "interval", kspec = "0,1", nrange = "1..100", out = "csv";
    defect->add_option("--model", model, "group model: Z, Z^2, heis, latticeR:0.01");
    defect->add_option("--seq", seqspec,
                       "family: interval, pow2, cuberoot, shifted, cubes, heis, lattice, swiss");
    defect->add_option("--K", kspec, "translate set, e.g. \"0,1\" or \"-1..1\"");
    defect->add_option("--N", nrange, "scale window, e.g. 1..100");
    defect->add_option("--out", out, "csv, json, - for stdout, or a file path");

    return tool::guarded(app, argc, argv, [&] {
        GroupModel m = GroupModel::parse(model);
        std::string spec = seqspec;
        if (spec.find(':') == std::string::npos)
            spec += ":" + nrange;
        else if (defect->count("--N"))
            throw ConfigError("give the scale window in --seq or --N, not both");
        SeqSpec sq = parse_seq(m, spec);
        FiniteRegion K = parse_region(m, kspec);

        auto ratios = tempered_ratios(sq.seq, sq.hi);
        double c_estimate = 0.0;
        report::Csv csv({"N", "weak_defect", "strong_defect", "tempered_ratio"});
        report::json rows = report::json::array();
        for (std::int64_t n = sq.lo; n <= sq.hi; ++n) {
            FiniteRegion F = sq.seq.set(n);
            double wd = weak_defect(K, F);
            double sd = strong_defect(K, F);
            double tr = ratios[std::size_t(n - 1)];
            c_estimate = std::max(c_estimate, tr);
            csv.row({std::to_string(n), report::fmt_double(wd), report::fmt_double(sd),
                     report::fmt_double(tr)});
            rows.push_back(report::json{{"N", n},
                                        {"weak_defect", wd},
                                        {"strong_defect", sd},
                                        {"tempered_ratio", tr}});
        }

        if (tool::wants_json(out)) {
            report::json doc{{"version", report::kVersion},
                             {"schema", report::kSchema},
                             {"model", m.to_string()},
                             {"seq", spec},
                             {"K", report::region_json(K)},
                             {"C_estimate", c_estimate},
                             {"defects", std::move(rows)}};
            report::write_json(out, doc);
        } else {
            report::write_text(out, csv.str());
        }
        return 0;
    });
}
