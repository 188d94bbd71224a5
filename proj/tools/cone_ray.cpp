#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "coneray/cli/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"cone-ray: resolvent rays for closed extensions of cone operators"};
    app.footer(coneray::cli::kSchemaHelp);
    app.require_subcommand(1);

    const std::map<std::string, std::string> about = {
        {"spec-b", "indicial roots in the strip"},
        {"sing-basis", "singular basis of E_max and index bookkeeping"},
        {"theta", "theta corrections and recursion residuals"},
        {"flow", "kappa orbits, limit sets, boundary pairing"},
        {"ray-check", "ray verdicts for every configured domain"},
        {"resolvent-scan", "Nystrom resolvent norms along each ray, localized decay"},
        {"report", "all of the above"},
    };
    std::string config;
    std::string out;
    for (const auto& name : coneray::cli::subcommands()) {
        CLI::App* sub = app.add_subcommand(name, about.at(name));
        sub->add_option("--config", config, "TOML configuration")->required();
        sub->add_option("--out", out, "output directory (overrides [output] dir)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : coneray::cli::kExitInvalidConfig;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    return coneray::cli::run(name, config, out.empty() ? std::nullopt : std::optional<std::string>(out), std::cout);
}
