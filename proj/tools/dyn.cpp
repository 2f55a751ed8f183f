// Weighted ergodic averages E_{n<N} c(n) f(T^n y) over a decade ladder.

#include "tool_common.hpp"

using namespace folnerlab;

int main(int argc, char** argv) {
    CLI::App app{"weighted average ladders"};
    app.require_subcommand(1);
    auto* avg = app.add_subcommand("average", "decade ladder of weighted averages on a system");
    std::string wspec_str, sysspec, obsspec = "cos", out = "csv";
    std::int64_t horizon = 1000000;
    double y0 = 0.0, y1 = 0.0;
    avg->add_option("--weight", wspec_str, "weight spec, e.g. orbit:rotation:theta=..,obs=cos,x=0")
        ->required();
    avg->add_option("--system", sysspec, "target system, e.g. rotation:theta=0.318")->required();
    avg->add_option("--obs", obsspec, "observable on the target system");
    avg->add_option("--N", horizon, "top of the ladder");
    auto* ox = avg->add_option("--x", y0, "first torus coordinate of the target start point");
    auto* oy = avg->add_option("--y", y1, "second torus coordinate of the target start point");
    avg->add_option("--out", out, "csv, json, - for stdout, or a file path");

    return tool::guarded(app, argc, argv, [&] {
        if (horizon < 1) throw ConfigError("N must be positive");
        GroupModel m = GroupModel::int_line();
        WeightSpec wspec = parse_weight(wspec_str);
        SystemModel sys = parse_system(sysspec);
        Observable obs = parse_obs(obsspec);
        if (!(sys.acting_group() == m)) throw ConfigError("averages run over Z actions");
        SysPoint y = sys.seed_point();
        if (ox->count()) y.x[0] = y0;
        if (oy->count()) y.x[1] = y1;

        WeightFn c = wspec.build(m, horizon - 1);
        auto Ns = detail::decade_ladder(horizon, std::min<std::int64_t>(100, horizon));
        auto vals = average_ladder(c, sys, obs, y, Ns);

        report::Csv csv({"N", "average"});
        report::json rows = report::json::array();
        for (std::size_t i = 0; i < Ns.size(); ++i) {
            csv.row({std::to_string(Ns[i]), report::fmt_double(vals[i])});
            rows.push_back(report::json{{"N", Ns[i]}, {"average", vals[i]}});
        }
        if (tool::wants_json(out)) {
            report::json doc{{"version", report::kVersion},
                             {"schema", report::kSchema},
                             {"weight", wspec_str},
                             {"system", sysspec},
                             {"obs", obsspec},
                             {"start", detail::point_json(y)},
                             {"ladder", std::move(rows)}};
            report::write_json(out, doc);
        } else {
            report::write_text(out, csv.str());
        }
        return 0;
    });
}
