// Experiment driver: runs one configured experiment and writes its report.
// Reports are a pure function of config + seed; runtime goes to stderr only.
// FOLNERLAB_THREADS caps replicate/trial parallelism.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "tool_common.hpp"

using namespace folnerlab;

int main(int argc, char** argv) {
    CLI::App app{"experiment runner: orthogonality, return-times, wiener-wintner, "
                 "covering-verify, orth-lemma-bound"};
    std::string experiment, config_path, out_dir;
    std::uint64_t seed = 0;
    app.add_option("experiment", experiment, "experiment id")->required();
    app.add_option("--config", config_path, "JSON config file")->required();
    auto* oseed = app.add_option("--seed", seed, "override the config seed");
    auto* oout = app.add_option("--out", out_dir, "directory for <experiment>.json/.csv");

    return tool::guarded(app, argc, argv, [&] {
        std::ifstream in(config_path);
        if (!in) throw ConfigError("cannot open config: " + config_path);
        report::json j;
        try {
            j = report::json::parse(in);
        } catch (const std::exception& e) {
            throw ConfigError("bad JSON in " + config_path + ": " + e.what());
        }
        if (!j.is_object()) throw ConfigError("config must be a JSON object");
        if (oseed->count()) j["seed"] = seed;
        if (!j.contains("experiment"))
            j["experiment"] = experiment;
        else if (j.at("experiment") != experiment)
            throw ConfigError("config is for experiment '" +
                              j.at("experiment").get<std::string>() + "', not '" + experiment +
                              "'");
        ExperimentConfig cfg = ExperimentConfig::from_json(std::move(j));

        auto t0 = std::chrono::steady_clock::now();
        ExperimentReport rep = run_experiment(cfg);
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::fprintf(stderr, "%s finished in %.3f s (exit %d)\n", experiment.c_str(), secs,
                     rep.exit_code());
        if (!rep.hypothesis_met)
            std::cerr << "warning: hypothesis not met; the verdict is not a counterexample\n";

        if (oout->count()) {
            std::filesystem::create_directories(out_dir);
            std::string base = out_dir + "/" + experiment;
            report::write_json(base + ".json", rep.doc);
            if (!rep.csv.empty()) report::write_text(base + ".csv", rep.csv);
            std::cerr << "wrote " << base << ".json\n";
        } else {
            report::write_json("-", rep.doc);
        }
        return rep.exit_code();
    });
}
