#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "coneray/cli/config.hpp"

namespace coneray::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInvalidConfig = 2;
inline constexpr int kExitOutsideBackground = 3;

const std::vector<std::string>& subcommands();

// Runs one subcommand and writes report.txt plus CSVs into the output directory.
int run(const std::string& subcommand, const std::string& config_path, const std::optional<std::string>& out_dir,
        std::ostream& log);
int run_config(const std::string& subcommand, const RunConfig& config, const std::string& out_dir, std::ostream& log);

}  // namespace coneray::cli
