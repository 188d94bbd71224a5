#pragma once

#include <optional>
#include <string>
#include <vector>

#include "coneray/domain_flow.hpp"
#include "coneray/wedge_kernel.hpp"

namespace coneray::cli {

struct OperatorBlock {
    std::string family = "custom";  // custom, laplacian, q_example
    int order = 2;
    int modes = 0;
    // levels[l][k + modes] = ascending sigma coefficients
    std::vector<std::vector<std::vector<Complex>>> levels;
    double alpha = 0.75;
    double beta = 1.0;
    std::optional<int> ind_min;
    std::string label;

    bool operator==(const OperatorBlock&) const = default;
};

struct DomainBlock {
    std::string name;
    std::vector<std::vector<Complex>> vectors;

    bool operator==(const DomainBlock&) const = default;
};

struct RayBlock {
    std::vector<double> angles_deg;
    double log10_min_modulus = 3.0;
    double decades = 6.0;
    int points_per_decade = 8;

    bool operator==(const RayBlock&) const = default;
};

struct SectorBlock {
    bool enabled = false;
    double resolution_deg = 1.0;
    int probe_points = 360;

    bool operator==(const SectorBlock&) const = default;
};

struct FlowBlock {
    double rho_min = 1.0;
    double rho_max = 1e8;
    int points = 200;

    bool operator==(const FlowBlock&) const = default;
};

struct MethodBlock {
    bool fixed_norm = true;
    bool lambda_norm = true;
    bool geometric = true;
    bool resolvent = true;
    bool localized = true;

    bool operator==(const MethodBlock&) const = default;
};

struct RunConfig {
    OperatorBlock op;
    std::vector<DomainBlock> domains;  // sorted by name
    RayBlock rays;
    SectorBlock sectors;
    FlowBlock flow;
    MethodBlock methods;
    std::string output_dir = "cone-ray-out";

    bool operator==(const RunConfig&) const = default;
};

// Throw Error(InvalidConfig) on malformed or inconsistent input.
RunConfig parse_config_string(const std::string& text);
RunConfig parse_config_file(const std::string& path);
std::string emit_config(const RunConfig& config);

ConeOperatorSpec build_spec(const OperatorBlock& op);
WedgeModel build_model(const RunConfig& config);
DomainSubspace build_domain(const WedgeModel& model, const DomainBlock& block);

extern const char* const kSchemaHelp;

}  // namespace coneray::cli
