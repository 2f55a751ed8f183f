#pragma once
// Shared CLI plumbing. Exit codes follow the experiment contract: 0 all
// verdicts pass, 1 a verdict failed, 2 config or usage error, 3 hypothesis
// not met. Parse failures and thrown config errors both land on 2.

#include <exception>
#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "folnerlab/experiments.hpp"

namespace folnerlab::tool {

inline int guarded(CLI::App& app, int argc, char** argv, const std::function<int()>& body) {
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        return body();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

inline bool wants_json(const std::string& out) {
    if (out == "json") return true;
    return out.size() >= 5 && out.compare(out.size() - 5, 5, ".json") == 0;
}

}  // namespace folnerlab::tool
