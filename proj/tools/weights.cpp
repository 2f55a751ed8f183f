// Self-correlation decay gate for weights: runs the density check over a
// grid of thresholds and reports the per-delta verdicts.

#include "tool_common.hpp"

using namespace folnerlab;

int main(int argc, char** argv) {
    CLI::App app{"weight diagnostics"};
    app.require_subcommand(1);
    auto* perp = app.add_subcommand(
        "perp", "does the weight have uniformly decaying self-correlations along [0,N)?");
    std::string wspec_str, delta_grid = "0.1", out = "json";
    std::int64_t horizon = 100000;
    perp->add_option("--weight", wspec_str, "weight spec, e.g. orbit:bernoulli:seed=7")
        ->required();
    perp->add_option("--horizon", horizon, "largest scale tested");
    perp->add_option("--delta", delta_grid, "threshold grid, comma separated");
    perp->add_option("--out", out, "json, - for stdout, or a file path");

    return tool::guarded(app, argc, argv, [&] {
        if (horizon < 2) throw ConfigError("horizon must be at least 2");
        GroupModel m = GroupModel::int_line();
        WeightSpec wspec = parse_weight(wspec_str);
        // correlations look at c(g a) with g and a both below the horizon
        WeightFn c = wspec.build(m, 2 * horizon);
        FolnerSeq seq = FolnerSeq::intervals(horizon);

        bool all = true;
        report::json results = report::json::array();
        for (const auto& tok : parse_detail::split(delta_grid, ',')) {
            double d = parse_detail::to_double(tok, "delta");
            if (!(d > 0.0)) throw ConfigError("delta thresholds must be positive");
            PerpVerdict v = check_perp(c, seq, d, horizon);
            all = all && v.passed;
            results.push_back(report::perp_json(m, v));
        }
        report::json doc{{"version", report::kVersion},
                         {"schema", report::kSchema},
                         {"weight", wspec_str},
                         {"horizon", horizon},
                         {"results", std::move(results)},
                         {"verdict", report::json{{"passed", all}}}};
        report::write_json(out, doc);
        return all ? 0 : 1;
    });
}
