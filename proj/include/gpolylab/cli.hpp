#pragma once

// Command-line front end: subcommand dispatch, output formats, manifests.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace gpolylab::cli {

enum ExitCode : int { ok = 0, not_found = 1, failure = 2, usage = 64, budget = 75 };

/// Everything needed to rerun one invocation.
struct Manifest {
    std::string command;            // "weight", "sim vdw", ...
    nlohmann::json parameters;      // option name -> list of values (flags: true)
    std::vector<std::string> scalars{"integer", "rational", "sqrt", "pi", "e"};
    nlohmann::json budgets = nlohmann::json::object();
    std::uint64_t seed = 0;
    std::string format = "json";

    nlohmann::json to_json() const;
    static Manifest from_json(const nlohmann::json& j);
    /// argv (without the program name) that replays the invocation.
    std::vector<std::string> to_args() const;
};

/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace gpolylab::cli
