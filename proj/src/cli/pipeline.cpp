#include "coneray/cli/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "coneray/errors.hpp"
#include "coneray/ray_criterion.hpp"
#include "coneray/resolvent_lab.hpp"
#include "coneray/symbol_algebra.hpp"

namespace fs = std::filesystem;

namespace coneray::cli {

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names = {"spec-b",    "sing-basis",     "theta", "flow",
                                                   "ray-check", "resolvent-scan", "report"};
    return names;
}

namespace {

std::string num(double v) { return fmt::format("{:.6g}", v); }
std::string cnum(Complex z) { return fmt::format("({:.10g}, {:.10g})", z.real() + 0.0, z.imag() + 0.0); }
std::string yes(bool b) { return b ? "true" : "false"; }

std::string angle_tag(double deg) { return fmt::format("{:.3f}", deg); }

struct Context {
    const RunConfig& config;
    fs::path out;
    WedgeModel model;
    std::vector<std::pair<std::string, DomainSubspace>> domains;
    std::ostringstream report;
    std::vector<std::string> files;
    bool produced = false;
};

void write_file(Context& ctx, const std::string& name, const std::string& content) {
    std::ofstream f(ctx.out / name, std::ios::binary);
    if (!f) throw Error(ErrorKind::IOFailure, fmt::format("cannot write {}", (ctx.out / name).string()));
    f << content;
    if (!f) throw Error(ErrorKind::IOFailure, fmt::format("write to {} failed", (ctx.out / name).string()));
    ctx.files.push_back(name);
}

template <class F>
void write_csv(Context& ctx, const std::string& name, F&& fill) {
    std::ostringstream os;
    fill(os);
    write_file(ctx, name, os.str());
}

void section_spec_b(Context& ctx) {
    const auto& spec = ctx.model.spec();
    const auto roots = boundary_spectrum(spec, 0.5 * spec.order);
    ctx.report << fmt::format("[boundary spectrum] strip |Im sigma| < {}\n", num(0.5 * spec.order));
    for (const auto& r : roots) {
        ctx.report << fmt::format("  mode {:>3}  sigma = {}  multiplicity {}\n", r.mode, cnum(r.sigma), r.multiplicity);
    }
    if (roots.empty()) ctx.report << "  (no roots in the strip)\n";
    write_csv(ctx, "roots.csv", [&](std::ostream& os) { write_roots_csv(os, roots); });
    ctx.report << "\n";
    ctx.produced = true;
}

void section_sing_basis(Context& ctx) {
    write_csv(ctx, "basis.csv", [&](std::ostream& os) { write_basis_csv(os, ctx.model.basis()); });
    ctx.report << fmt::format("[singular basis] dim_E={}\n", ctx.model.dim());
    for (std::size_t i = 0; i < ctx.model.basis().size(); ++i) {
        const auto& e = ctx.model.basis()[i];
        ctx.report << fmt::format("  {:>2}: mode {:>3}  sigma = {}  log^{}\n", i, e.mode, cnum(e.sigma), e.log_power);
    }
    ctx.report << "[index]\n";
    try {
        const IndexBook book = index_book(ctx.model, std::size_t{0});
        ctx.report << fmt::format("  ind_min={} ind_max={} dim_E={}\n", book.ind_min, book.ind_max, book.dim_E);
        ctx.report << fmt::format("  d'={} d''={}\n", book.d_prime, book.d_double_prime);
        for (const auto& [name, D] : ctx.domains) {
            const IndexBook b = index_book(ctx.model, D);
            ctx.report << fmt::format("  domain {}: dim={} ind_D={} in_grassmannian={}\n", name, D.dim(), b.ind_D,
                                      yes(b.in_grassmannian));
        }
    } catch (const Error& e) {
        ctx.report << "  unavailable: " << e.what() << "\n";
    }
    ctx.report << "\n";
    ctx.produced = true;
}

void section_theta(Context& ctx) {
    const auto& basis = ctx.model.basis();
    std::vector<ThetaTail> tails;
    ctx.report << "[theta corrections]\n";
    for (std::size_t i = 0; i < basis.size(); ++i) {
        try {
            tails.push_back(theta_corrections(ctx.model.spec(), basis[i]));
            const auto& t = tails.back();
            if (t.corrections.empty()) {
                ctx.report << fmt::format("  {:>2}: empty tail\n", i);
            }
            for (const auto& c : t.corrections) {
                ctx.report << fmt::format("  {:>2}: level {} exponent {} coefficient {}\n", i, c.level,
                                          cnum(c.exponent), cnum(c.coefficient()));
            }
        } catch (const Error& e) {
            ctx.report << fmt::format("  {:>2}: {}\n", i, e.what());
        }
    }
    write_csv(ctx, "theta.csv", [&](std::ostream& os) { write_theta_csv(os, basis, tails); });
    ctx.report << "\n";
    ctx.produced = true;
}

std::vector<double> flow_grid(const RunConfig& c) {
    return log_grid(c.flow.rho_min, c.flow.rho_max, static_cast<std::size_t>(c.flow.points));
}

void section_flow(Context& ctx) {
    ctx.report << "[flow]\n";
    const FlowGenerator gen = flow_generator(ctx.model.basis());
    std::optional<PairingForm> pairing;
    try {
        pairing = boundary_pairing(ctx.model.spec(), ctx.model.basis());
        write_csv(ctx, "pairing.csv", [&](std::ostream& os) { write_pairing_csv(os, *pairing); });
    } catch (const Error& e) {
        ctx.report << "  pairing unavailable: " << e.what() << "\n";
    }
    for (const auto& [name, D] : ctx.domains) {
        const OmegaLimit om = omega_limit_set(D, flow_grid(ctx.config));
        write_csv(ctx, fmt::format("orbit_{}.csv", name), [&](std::ostream& os) { write_orbit_csv(os, om); });
        ctx.report << fmt::format("  domain {}: stationary={} omega_converged={} from_generator={} limit_points={} "
                                  "last_gap={:.3e}\n",
                                  name, yes(is_invariant(gen, D)), yes(om.converged), yes(om.from_generator),
                                  om.points.size(), om.last_sample_gap);
        for (std::size_t p = 0; p < om.points.size(); ++p) {
            const CMatrix V = om.points[p].canonical().vectors();
            std::string coords;
            for (Eigen::Index i = 0; i < V.rows(); ++i) {
                coords += (i ? " " : "") + cnum(V(i, 0));
            }
            ctx.report << fmt::format("    limit {}: first vector {}\n", p, coords);
        }
        if (pairing && pairing->meaningful && 2 * D.dim() == D.ambient_dim()) {
            ctx.report << fmt::format("    selfadjoint={}\n", yes(selfadjoint_test(D, *pairing)));
        }
    }
    if (ctx.domains.empty()) ctx.report << "  (no domains configured)\n";
    ctx.report << "\n";
    ctx.produced = true;
}

void report_verdict(Context& ctx, const RayVerdict& v) {
    ctx.report << fmt::format("    {}: bounded: {}  C={} R={} tail_slope={} reason={}", to_string(v.method),
                              yes(v.bounded), num(v.C_estimate), num(v.R_estimate), num(v.tail_slope),
                              to_string(v.reason));
    if (!v.spectrum_hits.empty()) ctx.report << fmt::format(" spectrum_hits={}", v.spectrum_hits.size());
    ctx.report << "\n";
}

// Returns true when at least one ray is in the background resolvent set.
bool section_rays(Context& ctx) {
    const auto& rays = ctx.config.rays.angles_deg;
    ctx.report << "[ray check]\n";
    if (rays.empty()) {
        ctx.report << "  (no rays configured)\n\n";
        return true;
    }
    std::map<std::string, std::vector<RayVerdict>> per_domain;
    std::vector<KernelTrace> traces;
    std::map<std::string, OmegaLimit> omegas;
    bool any_background = false;
    for (double deg : rays) {
        const Complex dir = std::polar(1.0, deg * kPi / 180.0);
        ctx.report << fmt::format("  ray {} deg\n", angle_tag(deg));
        if (!ctx.model.in_background(dir)) {
            ctx.report << "    status: OutsideBackgroundResolvent\n";
            continue;
        }
        any_background = true;
        KernelTrace K;
        try {
            K = ctx.model.kernel_trace(dir);
        } catch (const Error& e) {
            ctx.report << "    status: " << e.what() << "\n";
            continue;
        }
        traces.push_back(K);
        for (const auto& [name, D] : ctx.domains) {
            ctx.report << fmt::format("   domain {}\n", name);
            auto attempt = [&](auto&& compute) {
                try {
                    RayVerdict v = compute();
                    report_verdict(ctx, v);
                    per_domain[name].push_back(std::move(v));
                } catch (const Error& e) {
                    ctx.report << "    error: " << e.what() << "\n";
                }
            };
            if (ctx.config.methods.fixed_norm) {
                attempt([&] { return ray_verdict_fixed_norm(ctx.model, D, dir, flow_grid(ctx.config)); });
            }
            if (ctx.config.methods.lambda_norm) {
                const auto grid = modulus_grid_for(flow_grid(ctx.config), ctx.model.order());
                attempt([&] { return ray_verdict_lambda_norm(ctx.model, D, dir, grid); });
            }
            if (ctx.config.methods.geometric) {
                attempt([&] {
                    auto it = omegas.find(name);
                    if (it == omegas.end()) it = omegas.emplace(name, omega_limit_set(D, flow_grid(ctx.config))).first;
                    return geometric_verdict(D, dir, it->second, K);
                });
            }
            if (auto s = shortcut_verdict(ctx.model, D, dir)) {
                report_verdict(ctx, *s);
                per_domain[name].push_back(std::move(*s));
            }
        }
        if (ctx.domains.empty()) ctx.report << "    (no domains configured)\n";
    }
    if (!traces.empty()) {
        write_csv(ctx, "traces.csv", [&](std::ostream& os) { write_kernel_traces_csv(os, ctx.model.basis(), traces); });
    }
    for (const auto& [name, verdicts] : per_domain) {
        write_csv(ctx, fmt::format("verdicts_{}.csv", name), [&](std::ostream& os) { write_verdicts_csv(os, verdicts); });
    }
    if (ctx.config.sectors.enabled) {
        ctx.report << "  [sectors]\n";
        try {
            const auto sectors = background_sectors(ctx.model, ctx.config.sectors.probe_points);
            for (const auto& s : sectors) {
                ctx.report << fmt::format("   sector theta0={} half_aperture={} certified={}\n",
                                          angle_tag(s.theta0 * 180.0 / kPi), angle_tag(s.half_aperture * 180.0 / kPi),
                                          yes(s.certified));
                for (const auto& [name, D] : ctx.domains) {
                    try {
                        // Closed sectors stay inside the open background set.
                        SectorDescription closed = s;
                        closed.half_aperture = std::max(0.0, s.half_aperture - 1e-6);
                        const SectorVerdict sv =
                            sector_verdict(ctx.model, D, closed, ctx.config.sectors.resolution_deg, flow_grid(ctx.config));
                        ctx.report << fmt::format("    domain {}: bounded: {} ({} rays)\n", name, yes(sv.bounded),
                                                  sv.rays.size());
                    } catch (const Error& e) {
                        ctx.report << fmt::format("    domain {}: error: {}\n", name, e.what());
                    }
                }
            }
        } catch (const Error& e) {
            ctx.report << "   error: " << e.what() << "\n";
        }
    }
    ctx.report << "\n";
    ctx.produced = true;
    return any_background;
}

bool section_resolvent(Context& ctx) {
    const auto& rays = ctx.config.rays.angles_deg;
    ctx.report << "[resolvent scan]\n";
    if (!ctx.model.laplacian_family() || ctx.model.order() != 2) {
        ctx.report << "  skipped: resolvent lab covers second-order Laplacian-family operators only\n\n";
        return true;
    }
    if (rays.empty()) {
        ctx.report << "  (no rays configured)\n\n";
        return true;
    }
    bool any_background = false;
    const auto& r = ctx.config.rays;
    for (double deg : rays) {
        const Complex dir = std::polar(1.0, deg * kPi / 180.0);
        ctx.report << fmt::format("  ray {} deg\n", angle_tag(deg));
        if (!ctx.model.in_background(dir)) {
            ctx.report << "    status: OutsideBackgroundResolvent\n";
            continue;
        }
        any_background = true;
        for (const auto& [name, D] : ctx.domains) {
            if (ctx.config.methods.resolvent) {
                try {
                    const ScanResult s = ray_scan(ctx.model, D, dir, r.log10_min_modulus, r.decades, r.points_per_decade);
                    const std::string file = fmt::format("scan_{}_{}.csv", name, angle_tag(deg));
                    write_csv(ctx, file, [&](std::ostream& os) { write_scan_csv(os, s); });
                    ctx.report << fmt::format(
                        "   domain {}: minimal_growth: {} slope={} total_variation={} spectrum_hits={} "
                        "criterion_bounded={} agreement={} ({})\n",
                        name, yes(s.minimal_growth), num(s.slope), num(s.total_variation), s.spectrum_hits,
                        yes(s.criterion_bounded), yes(s.agreement), file);
                } catch (const Error& e) {
                    ctx.report << fmt::format("   domain {}: error: {}\n", name, e.what());
                }
            }
            if (ctx.config.methods.localized) {
                try {
                    const LocalizedDecay ld = localized_decay_check(ctx.model, D, dir);
                    std::string passes;
                    for (std::size_t n = 0; n < ld.passes.size(); ++n) {
                        passes += fmt::format("{}N={}:{}", n ? " " : "", n + 1, yes(ld.passes[n]));
                    }
                    ctx.report << fmt::format("   domain {}: localized decay slope={} {}\n", name, num(ld.slope),
                                              passes);
                } catch (const Error& e) {
                    ctx.report << fmt::format("   domain {}: localized decay error: {}\n", name, e.what());
                }
            }
        }
        if (ctx.domains.empty()) ctx.report << "   (no domains configured)\n";
    }
    ctx.report << "\n";
    ctx.produced = true;
    return any_background;
}

}  // namespace

int run_config(const std::string& subcommand, const RunConfig& config, const std::string& out_dir, std::ostream& log) {
    const auto& names = subcommands();
    if (std::find(names.begin(), names.end(), subcommand) == names.end()) {
        log << "unknown subcommand '" << subcommand << "'\n";
        return kExitInvalidConfig;
    }
    std::optional<Context> ctx;
    try {
        WedgeModel model = build_model(config);
        std::vector<std::pair<std::string, DomainSubspace>> domains;
        for (const auto& d : config.domains) domains.emplace_back(d.name, build_domain(model, d));
        ctx.emplace(Context{config, fs::path(out_dir), std::move(model), std::move(domains), {}, {}, false});
    } catch (const Error& e) {
        log << e.what() << "\n";
        return e.kind() == ErrorKind::InvalidConfig || e.kind() == ErrorKind::InvalidSpec ? kExitInvalidConfig
                                                                                           : kExitFailure;
    }

    try {
        std::error_code ec;
        fs::create_directories(ctx->out, ec);
        if (ec || !fs::is_directory(ctx->out)) {
            throw Error(ErrorKind::IOFailure, fmt::format("cannot create output directory {}", out_dir));
        }
        const auto& op = config.op;
        ctx->report << "cone-ray report\n";
        ctx->report << fmt::format("subcommand: {}\n", subcommand);
        ctx->report << fmt::format("operator: family={} order={} modes={}{}\n", op.family, op.order, op.modes,
                                   op.label.empty() ? "" : " label=" + op.label);
        ctx->report << "\n";

        const bool all = subcommand == "report";
        bool ray_status = true;
        bool rays_requested = false;
        if (all || subcommand == "spec-b") section_spec_b(*ctx);
        if (all || subcommand == "sing-basis") section_sing_basis(*ctx);
        if (all || subcommand == "theta") section_theta(*ctx);
        if (all || subcommand == "flow") section_flow(*ctx);
        if (all || subcommand == "ray-check") {
            rays_requested = !config.rays.angles_deg.empty();
            ray_status = section_rays(*ctx);
        }
        if (all || subcommand == "resolvent-scan") {
            rays_requested = !config.rays.angles_deg.empty();
            ray_status = section_resolvent(*ctx) && ray_status;
        }
        if (!ctx->produced) {
            log << "warning: no results\n";
            return kExitOk;
        }
        ctx->report << "[files]\n";
        for (const auto& f : ctx->files) ctx->report << "  " << f << "\n";
        const std::string text = ctx->report.str();
        write_file(*ctx, "report.txt", text);
        log << text;
        if (rays_requested && !ray_status) {
            log << "all requested rays lie outside the background resolvent set\n";
            return kExitOutsideBackground;
        }
        return kExitOk;
    } catch (const Error& e) {
        log << e.what() << "\n";
        return kExitFailure;
    }
}

int run(const std::string& subcommand, const std::string& config_path, const std::optional<std::string>& out_dir,
        std::ostream& log) {
    RunConfig config;
    try {
        config = parse_config_file(config_path);
    } catch (const Error& e) {
        log << e.what() << "\n";
        return kExitInvalidConfig;
    }
    return run_config(subcommand, config, out_dir.value_or(config.output_dir), log);
}

}  // namespace coneray::cli
