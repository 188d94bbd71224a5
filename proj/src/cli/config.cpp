#include "coneray/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <fmt/format.h>
#include <toml.hpp>

#include "coneray/errors.hpp"

namespace coneray::cli {

const char* const kSchemaHelp = R"(Configuration (TOML):

  [operator]
  family = "custom" | "laplacian" | "q_example"
  order = 2                  # m
  modes = 10                 # K, Fourier modes -K..K
  levels = [ [[c0, c1, c2], ...], ... ]
                             # levels[l][k + K] = coefficients of p_l(sigma, k),
                             # ascending powers of sigma; a coefficient is a
                             # number or [re, im]; custom family only
  alpha = 0.75, beta = 1.0   # q_example: sigma^2 + alpha^2 k^2, beta k^2, k^2
  ind_min = -1               # optional; required for non-symmetric specs
  label = "..."

  [domains.<name>]
  vectors = [[1, 0], ...]    # d'' coordinate vectors in the singular basis
  projective = [z0, z1]      # alternative when dim E = 2

  [rays]
  angles_deg = [180.0]       # 0 <= angle < 360
  decades = 6                # resolvent scan: |lambda| in 10^min .. 10^(min+decades)
  log10_min_modulus = 3
  points_per_decade = 8

  [sectors]
  enabled = false
  resolution_deg = 1.0
  probe_points = 360

  [flow]
  rho_min = 1.0, rho_max = 1e8, points = 200

  [methods]
  fixed_norm, lambda_norm, geometric, resolvent, localized = true | false

  [output]
  dir = "cone-ray-out"
)";

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::InvalidConfig, what); }

double as_number(const toml::node& n, const std::string& where) {
    if (auto v = n.value<double>()) return *v;
    invalid(fmt::format("{}: expected a number", where));
}

Complex as_complex(const toml::node& n, const std::string& where) {
    if (const auto* arr = n.as_array()) {
        if (arr->size() != 2) invalid(fmt::format("{}: complex entries are [re, im]", where));
        return {as_number(*arr->get(0), where), as_number(*arr->get(1), where)};
    }
    return {as_number(n, where), 0.0};
}

const toml::array& as_array(const toml::node& n, const std::string& where) {
    const auto* arr = n.as_array();
    if (!arr) invalid(fmt::format("{}: expected an array", where));
    return *arr;
}

template <class T>
T get_or(const toml::table* t, const char* key, T fallback, const std::string& where) {
    if (!t) return fallback;
    const toml::node* n = t->get(key);
    if (!n) return fallback;
    if constexpr (std::is_same_v<T, bool>) {
        if (auto v = n->value<bool>()) return *v;
        invalid(fmt::format("{}.{}: expected a boolean", where, key));
    } else if constexpr (std::is_same_v<T, std::string>) {
        if (auto v = n->value<std::string>()) return *v;
        invalid(fmt::format("{}.{}: expected a string", where, key));
    } else if constexpr (std::is_same_v<T, int>) {
        if (n->is_integer()) return static_cast<int>(*n->value<int64_t>());
        invalid(fmt::format("{}.{}: expected an integer", where, key));
    } else {
        return as_number(*n, fmt::format("{}.{}", where, key));
    }
}

const toml::table* sub_table(const toml::table& root, const char* key) {
    const toml::node* n = root.get(key);
    if (!n) return nullptr;
    const auto* t = n->as_table();
    if (!t) invalid(fmt::format("[{}] must be a table", key));
    return t;
}

std::vector<Complex> complex_list(const toml::node& n, const std::string& where) {
    std::vector<Complex> out;
    const auto& arr = as_array(n, where);
    for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(as_complex(*arr.get(i), fmt::format("{}[{}]", where, i)));
    return out;
}

void check_known(const toml::table* t, const std::vector<std::string>& keys, const std::string& where) {
    if (!t) return;
    for (const auto& [k, v] : *t) {
        if (std::find(keys.begin(), keys.end(), std::string(k.str())) == keys.end()) {
            invalid(fmt::format("{}: unknown key '{}'", where, k.str()));
        }
    }
}

RunConfig from_table(const toml::table& root) {
    RunConfig c;
    check_known(&root, {"operator", "domains", "rays", "sectors", "flow", "methods", "output"}, "config");

    const toml::table* op = sub_table(root, "operator");
    if (!op) invalid("missing [operator] block");
    check_known(op, {"family", "order", "modes", "levels", "alpha", "beta", "ind_min", "label"}, "operator");
    c.op.family = get_or<std::string>(op, "family", "custom", "operator");
    c.op.order = get_or<int>(op, "order", 2, "operator");
    c.op.modes = get_or<int>(op, "modes", 0, "operator");
    c.op.alpha = get_or<double>(op, "alpha", 0.75, "operator");
    c.op.beta = get_or<double>(op, "beta", 1.0, "operator");
    c.op.label = get_or<std::string>(op, "label", "", "operator");
    if (op->get("ind_min")) c.op.ind_min = get_or<int>(op, "ind_min", 0, "operator");
    if (c.op.family != "custom" && c.op.family != "laplacian" && c.op.family != "q_example") {
        invalid(fmt::format("operator.family '{}' is not one of custom, laplacian, q_example", c.op.family));
    }
    if (const toml::node* lv = op->get("levels")) {
        if (c.op.family != "custom") invalid("operator.levels is only read for the custom family");
        const auto& levels = as_array(*lv, "operator.levels");
        for (std::size_t l = 0; l < levels.size(); ++l) {
            const auto& per_mode = as_array(*levels.get(l), fmt::format("operator.levels[{}]", l));
            std::vector<std::vector<Complex>> lvl;
            for (std::size_t k = 0; k < per_mode.size(); ++k) {
                lvl.push_back(complex_list(*per_mode.get(k), fmt::format("operator.levels[{}][{}]", l, k)));
            }
            c.op.levels.push_back(std::move(lvl));
        }
    } else if (c.op.family == "custom") {
        invalid("custom operator needs operator.levels");
    }
    if (c.op.order < 1) invalid("operator.order must be positive");
    if (c.op.modes < 0) invalid("operator.modes must be non-negative");

    if (const toml::table* doms = sub_table(root, "domains")) {
        for (const auto& [name, node] : *doms) {
            const std::string where = fmt::format("domains.{}", name.str());
            const auto* t = node.as_table();
            if (!t) invalid(where + " must be a table");
            check_known(t, {"vectors", "projective"}, where);
            DomainBlock d;
            d.name = std::string(name.str());
            const toml::node* vec = t->get("vectors");
            const toml::node* proj = t->get("projective");
            if ((vec != nullptr) == (proj != nullptr)) invalid(where + " needs exactly one of vectors, projective");
            if (vec) {
                const auto& arr = as_array(*vec, where + ".vectors");
                for (std::size_t i = 0; i < arr.size(); ++i) {
                    d.vectors.push_back(complex_list(*arr.get(i), fmt::format("{}.vectors[{}]", where, i)));
                }
            } else {
                auto z = complex_list(*proj, where + ".projective");
                if (z.size() != 2) invalid(where + ".projective needs [z0, z1]");
                d.vectors.push_back(z);
            }
            c.domains.push_back(std::move(d));
        }
        std::sort(c.domains.begin(), c.domains.end(),
                  [](const DomainBlock& a, const DomainBlock& b) { return a.name < b.name; });
    }

    const toml::table* rays = sub_table(root, "rays");
    check_known(rays, {"angles_deg", "decades", "log10_min_modulus", "points_per_decade"}, "rays");
    if (rays && rays->get("angles_deg")) {
        const auto& arr = as_array(*rays->get("angles_deg"), "rays.angles_deg");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const double a = as_number(*arr.get(i), "rays.angles_deg");
            if (!(a >= 0.0 && a < 360.0)) invalid(fmt::format("ray angle {} outside [0, 360)", a));
            c.rays.angles_deg.push_back(a);
        }
    }
    c.rays.decades = get_or<double>(rays, "decades", 6.0, "rays");
    c.rays.log10_min_modulus = get_or<double>(rays, "log10_min_modulus", 3.0, "rays");
    c.rays.points_per_decade = get_or<int>(rays, "points_per_decade", 8, "rays");
    if (!(c.rays.decades > 0.0) || c.rays.points_per_decade < 1) invalid("rays: empty scan range");

    const toml::table* sec = sub_table(root, "sectors");
    check_known(sec, {"enabled", "resolution_deg", "probe_points"}, "sectors");
    c.sectors.enabled = get_or<bool>(sec, "enabled", false, "sectors");
    c.sectors.resolution_deg = get_or<double>(sec, "resolution_deg", 1.0, "sectors");
    c.sectors.probe_points = get_or<int>(sec, "probe_points", 360, "sectors");
    if (!(c.sectors.resolution_deg > 0.0) || c.sectors.probe_points < 1) invalid("sectors: invalid resolution");

    const toml::table* flow = sub_table(root, "flow");
    check_known(flow, {"rho_min", "rho_max", "points"}, "flow");
    c.flow.rho_min = get_or<double>(flow, "rho_min", 1.0, "flow");
    c.flow.rho_max = get_or<double>(flow, "rho_max", 1e8, "flow");
    c.flow.points = get_or<int>(flow, "points", 200, "flow");
    if (!(c.flow.rho_min > 0.0) || !(c.flow.rho_max > c.flow.rho_min) || c.flow.points < 2) {
        invalid("flow: need 0 < rho_min < rho_max and points >= 2");
    }

    const toml::table* m = sub_table(root, "methods");
    check_known(m, {"fixed_norm", "lambda_norm", "geometric", "resolvent", "localized"}, "methods");
    c.methods.fixed_norm = get_or<bool>(m, "fixed_norm", true, "methods");
    c.methods.lambda_norm = get_or<bool>(m, "lambda_norm", true, "methods");
    c.methods.geometric = get_or<bool>(m, "geometric", true, "methods");
    c.methods.resolvent = get_or<bool>(m, "resolvent", true, "methods");
    c.methods.localized = get_or<bool>(m, "localized", true, "methods");

    const toml::table* out = sub_table(root, "output");
    check_known(out, {"dir"}, "output");
    c.output_dir = get_or<std::string>(out, "dir", "cone-ray-out", "output");
    return c;
}

toml::array complex_array(const std::vector<Complex>& v) {
    toml::array a;
    for (const auto& z : v) {
        if (z.imag() == 0.0) {
            a.push_back(z.real());
        } else {
            a.push_back(toml::array{z.real(), z.imag()});
        }
    }
    return a;
}

}  // namespace

RunConfig parse_config_string(const std::string& text) {
    try {
        return from_table(toml::parse(text));
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << e.description() << " at " << e.source().begin;
        invalid(os.str());
    }
}

RunConfig parse_config_file(const std::string& path) {
    try {
        return from_table(toml::parse_file(path));
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << e.description() << " at " << e.source().begin;
        invalid(os.str());
    }
}

std::string emit_config(const RunConfig& c) {
    toml::table op{{"family", c.op.family}, {"order", c.op.order}, {"modes", c.op.modes}};
    op.insert("alpha", c.op.alpha);
    op.insert("beta", c.op.beta);
    if (!c.op.levels.empty()) {
        toml::array levels;
        for (const auto& lvl : c.op.levels) {
            toml::array per_mode;
            for (const auto& coeffs : lvl) per_mode.push_back(complex_array(coeffs));
            levels.push_back(std::move(per_mode));
        }
        op.insert("levels", std::move(levels));
    }
    if (c.op.ind_min) op.insert("ind_min", *c.op.ind_min);
    if (!c.op.label.empty()) op.insert("label", c.op.label);

    toml::table doms;
    for (const auto& d : c.domains) {
        toml::array vecs;
        for (const auto& v : d.vectors) vecs.push_back(complex_array(v));
        doms.insert(d.name, toml::table{{"vectors", std::move(vecs)}});
    }
    toml::array angles;
    for (double a : c.rays.angles_deg) angles.push_back(a);

    toml::table root{
        {"operator", std::move(op)},
        {"rays", toml::table{{"angles_deg", std::move(angles)},
                             {"decades", c.rays.decades},
                             {"log10_min_modulus", c.rays.log10_min_modulus},
                             {"points_per_decade", c.rays.points_per_decade}}},
        {"sectors", toml::table{{"enabled", c.sectors.enabled},
                                {"resolution_deg", c.sectors.resolution_deg},
                                {"probe_points", c.sectors.probe_points}}},
        {"flow", toml::table{{"rho_min", c.flow.rho_min}, {"rho_max", c.flow.rho_max}, {"points", c.flow.points}}},
        {"methods", toml::table{{"fixed_norm", c.methods.fixed_norm},
                                {"lambda_norm", c.methods.lambda_norm},
                                {"geometric", c.methods.geometric},
                                {"resolvent", c.methods.resolvent},
                                {"localized", c.methods.localized}}},
        {"output", toml::table{{"dir", c.output_dir}}},
    };
    if (!doms.empty()) root.insert("domains", std::move(doms));
    std::ostringstream os;
    os << root << "\n";
    return os.str();
}

ConeOperatorSpec build_spec(const OperatorBlock& op) {
    if (op.family == "laplacian") {
        if (op.order != 2) invalid("laplacian family has order 2");
        return make_laplacian_spec(op.modes);
    }
    if (op.family == "q_example") {
        if (op.order != 2) invalid("q_example family has order 2");
        return make_q_example_spec(op.alpha, op.beta, op.modes);
    }
    std::vector<ConormalPolynomial> levels;
    for (std::size_t l = 0; l < op.levels.size(); ++l) {
        const auto& lvl = op.levels[l];
        if (lvl.size() != static_cast<std::size_t>(2 * op.modes + 1)) {
            invalid(fmt::format("operator.levels[{}] has {} modes, expected {}", l, lvl.size(), 2 * op.modes + 1));
        }
        std::vector<Polynomial> polys;
        for (const auto& coeffs : lvl) polys.emplace_back(coeffs);
        levels.emplace_back(op.modes, std::move(polys));
    }
    ConeOperatorSpec spec{op.order, op.modes, std::move(levels), op.label};
    try {
        validate(spec);
    } catch (const Error& e) {
        invalid(e.what());
    }
    return spec;
}

WedgeModel build_model(const RunConfig& config) {
    ConeOperatorSpec spec = build_spec(config.op);
    try {
        return WedgeModel(std::move(spec), config.op.ind_min);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::InvalidSpec || e.kind() == ErrorKind::BoundaryRoot) invalid(e.what());
        throw;
    }
}

DomainSubspace build_domain(const WedgeModel& model, const DomainBlock& block) {
    const std::size_t n = model.dim();
    if (block.vectors.empty()) invalid(fmt::format("domain {} has no vectors", block.name));
    CMatrix V(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(block.vectors.size()));
    for (std::size_t j = 0; j < block.vectors.size(); ++j) {
        if (block.vectors[j].size() != n) {
            invalid(fmt::format("domain {} vector {} has length {}, dim E = {}", block.name, j, block.vectors[j].size(), n));
        }
        for (std::size_t i = 0; i < n; ++i) V(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = block.vectors[j][i];
    }
    try {
        const int ind_min = model.ind_min();
        if (static_cast<int>(block.vectors.size()) != -ind_min) {
            invalid(fmt::format("domain {} has {} vectors, d'' = {}", block.name, block.vectors.size(), -ind_min));
        }
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::IndexInconsistency) throw;
    }
    try {
        return DomainSubspace(model.basis_ptr(), V);
    } catch (const Error& e) {
        invalid(fmt::format("domain {}: {}", block.name, e.what()));
    }
}

}  // namespace coneray::cli
