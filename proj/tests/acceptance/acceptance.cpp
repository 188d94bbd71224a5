// One line per acceptance criterion; exit status counts the failures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "coneray/cli/pipeline.hpp"
#include "coneray/errors.hpp"
#include "coneray/ray_criterion.hpp"
#include "coneray/resolvent_lab.hpp"
#include "generators.hpp"

using namespace coneray;
using coneray::testing::Gen;

namespace {

constexpr double kRootTol = 1e-10;
constexpr double kThetaTol = 1e-12;
constexpr double kFlowTol = 1e-12;
constexpr double kOmegaTol = 1e-3;
constexpr double kTraceTol = 1e-8;
constexpr double kProjectionTol = 1e-10;
constexpr double kSlopeBand = 0.05;
constexpr double kVariationTol = 0.10;
constexpr double kSelfadjointNormTol = 1e-3;
constexpr double kScanBudgetSeconds = 300.0;
constexpr double kPairingTol = 1e-8;
constexpr double kDecaySlack = 0.2;

struct Outcome {
    bool pass = false;
    std::string detail;
};

DomainSubspace proj(const WedgeModel& m, Complex z0, Complex z1) { return DomainSubspace::projective(m.basis_ptr(), z0, z1); }

Outcome criterion1() {
    const WedgeModel lap(make_laplacian_spec(10));
    double worst = 0.0;
    bool double_zero = false;
    std::size_t count = 0;
    for (const auto& r : boundary_spectrum(lap.spec(), kUnboundedStrip)) {
        const double k = std::abs(r.mode);
        const double err = std::min(std::abs(r.sigma - Complex(0.0, k)), std::abs(r.sigma - Complex(0.0, -k)));
        worst = std::max(worst, err);
        if (r.mode == 0) double_zero = r.multiplicity == 2 && std::abs(r.sigma) < kRootTol;
        count += static_cast<std::size_t>(r.multiplicity);
    }
    const double alpha = 0.75;
    const ConeOperatorSpec q = make_q_example_spec(alpha, 1.0, 3);
    double worst_q = 0.0;
    for (const auto& r : boundary_spectrum(q, kUnboundedStrip)) {
        const double k = alpha * std::abs(r.mode);
        worst_q = std::max(worst_q, std::min(std::abs(r.sigma - Complex(0.0, k)), std::abs(r.sigma - Complex(0.0, -k))));
    }
    // 21 modes, two roots each counted with multiplicity.
    const bool pass = worst < kRootTol && worst_q < kRootTol && double_zero && count == 42;
    return {pass, fmt::format("max root error {:.2e} (laplacian), {:.2e} (q, alpha=0.75); sigma=0 double: {}; roots {}",
                              worst, worst_q, double_zero, count)};
}

Outcome criterion2() {
    const WedgeModel lap(make_laplacian_spec(10));
    const WedgeModel q(make_q_example_spec(0.75, 1.0, 3));
    return {lap.dim() == 2 && q.dim() == 6, fmt::format("dim E_max: laplacian {}, q-example {}", lap.dim(), q.dim())};
}

Outcome criterion3() {
    const WedgeModel lap(make_laplacian_spec(10));
    const IndexBook b = index_book(lap, std::size_t{1});
    bool equivalence = true;
    for (std::size_t d = 0; d <= 2; ++d) equivalence = equivalence && (index_book(lap, d).ind_D == 0) == (d == 1);
    const bool pass = b.ind_min == -1 && b.ind_max == 1 && b.d_double_prime == 1 && equivalence;
    return {pass, fmt::format("ind_min={} ind_max={} d''={} (ind_D = 0 iff dim D/D_min = 1: {})", b.ind_min, b.ind_max,
                              b.d_double_prime, equivalence)};
}

Outcome criterion4() {
    const double alpha = 0.75, beta = 1.0;
    const ConeOperatorSpec spec = make_q_example_spec(alpha, beta, 2);
    const SingBasis basis = wedge_sing_basis(spec);
    const Complex expected = -beta / (2.0 * alpha - 1.0);
    double worst = 0.0;
    bool corrected = true;
    for (int k : {-1, 1}) {
        const auto idx = basis.index_of(k, Complex(0.0, alpha), 0);
        if (!idx) return {false, "missing entry (k, i alpha, 0)"};
        const ThetaTail t = theta_corrections(spec, basis[*idx]);
        const auto it = std::find_if(t.corrections.begin(), t.corrections.end(), [](const auto& c) { return c.level == 1; });
        if (it == t.corrections.end()) {
            corrected = false;
            continue;
        }
        worst = std::max(worst, std::abs(it->coefficient() - expected));
    }
    bool empty = true;
    std::vector<std::tuple<int, Complex, int>> identity = {{0, 0.0, 0}, {0, 0.0, 1}, {-1, Complex(0.0, -alpha), 0},
                                                           {1, Complex(0.0, -alpha), 0}};
    for (const auto& [k, s, j] : identity) {
        const auto idx = basis.index_of(k, s, j);
        empty = empty && idx && theta_corrections(spec, basis[*idx]).corrections.empty();
    }
    const bool pass = corrected && worst < kThetaTol && empty;
    return {pass, fmt::format("level-1 coefficient error {:.2e} against -beta/(2 alpha - 1) = {}; empty tails on "
                              "(0,0,0),(0,0,1),(+-1,x^alpha): {}",
                              worst, expected.real(), empty)};
}

Outcome criterion5() {
    const WedgeModel lap(make_laplacian_spec(2));
    Gen g(5);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const Complex z0 = g.complex(3.0), z1 = g.complex(3.0) + Complex(0.5, 0.0);
        const double rho = g.log_uniform(1e-3, 1e8);
        const DomainSubspace T = translate(proj(lap, z0, z1), rho);
        const DomainSubspace E = proj(lap, z0 - z1 * std::log(rho), z1);
        worst = std::max(worst, gap_distance(T, E));
    }
    double group = 0.0;
    for (int i = 0; i < 50; ++i) {
        const double a = g.log_uniform(1e-3, 1e4), b = g.log_uniform(1e-3, 1e4);
        const CMatrix lhs = kappa_matrix(lap.basis(), a) * kappa_matrix(lap.basis(), b);
        const CMatrix rhs = kappa_matrix(lap.basis(), a * b);
        group = std::max(group, (lhs - rhs).norm() / rhs.norm());
    }
    return {worst < kFlowTol && group < kFlowTol,
            fmt::format("projective action error {:.2e}, group law error {:.2e}", worst, group)};
}

Outcome criterion6() {
    const WedgeModel lap(make_laplacian_spec(2));
    const DomainSubspace F = proj(lap, 1.0, 0.0);
    Gen g(6);
    double worst = 0.0, sampled = 0.0;
    bool ok = true;
    for (int i = 0; i < 20; ++i) {
        const DomainSubspace D = proj(lap, g.complex(5.0), g.complex(1.0) + Complex(1.0, 0.0));
        const OmegaLimit om = omega_limit_set(D, default_rho_grid());
        ok = ok && om.converged && om.points.size() == 1;
        if (!om.points.empty()) worst = std::max(worst, gap_distance(om.points.front(), F));
        sampled = std::max(sampled, om.last_sample_gap);
    }
    return {ok && worst < kOmegaTol,
            fmt::format("limit point gap to Friedrichs {:.2e}; orbit sample at rho=1e8 still {:.2e} away (1/log rho)",
                        worst, sampled)};
}

Outcome criterion7() {
    const WedgeModel lap(make_laplacian_spec(3));
    double worst = 0.0;
    for (int j = 0; j < 16; ++j) {
        const Complex lam = std::polar(1.0, 2.0 * kPi * (j + 0.5) / 16.0);
        for (int k = 0; k <= 3; ++k) {
            const double nu = k;
            const ModeTrace mt = kernel_trace_numeric(lap.spec(), lam, k);
            const KernelTrace cf = kernel_trace_closed_form(nu, lam);
            if (mt.contributes != (cf.dim == 1)) return {false, fmt::format("mode {} contribution mismatch", k)};
            if (!mt.contributes) continue;
            const auto basis = std::make_shared<const SingBasis>(wedge_sing_basis(make_laplacian_spec(0)));
            const DomainSubspace a = DomainSubspace::from_vector(basis, mt.coords);
            const DomainSubspace b(basis, cf.vectors);
            worst = std::max(worst, gap_distance(a, b));
        }
    }
    Gen g(7);
    double homog = 0.0;
    for (int i = 0; i < 20; ++i) {
        const Complex dir = g.direction(0.1);
        const double rho = g.log_uniform(1e-2, 1e3);
        const ModeTrace unit = kernel_trace_numeric(lap.spec(), dir, 0);
        const KernelTrace big = kernel_trace_closed_form(0.0, rho * rho * dir);
        const auto basis = lap.basis_ptr();
        const DomainSubspace moved = DomainSubspace::from_vector(basis, kappa_matrix(*basis, rho) * unit.coords);
        homog = std::max(homog, gap_distance(moved, DomainSubspace(basis, big.vectors)));
    }
    return {worst < kTraceTol && homog < kTraceTol,
            fmt::format("numeric vs closed-form gap {:.2e} on 16 rays; kappa-homogeneity gap {:.2e}", worst, homog)};
}

Outcome criterion8() {
    const WedgeModel lap(make_laplacian_spec(2));
    Gen g(8);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
        const Complex dir = g.direction(0.1);
        const double rho = g.log_uniform(1.0, 1e6);
        const Complex z0 = g.complex(2.0), z1 = g.complex(1.0) + Complex(1.0, 0.0);
        const CVector u = g.vector(2, 2.0);
        const DomainSubspace D = proj(lap, z0, z1);
        const Complex lam = std::pow(rho, 2.0) * dir;
        const CVector got = projection_at(lap, D, lam) * u;

        // Kernel trace of K_0: c0 + k1 log x with derived constants.
        const Complex c0 = 0.5 * std::log(-dir) + kEulerGamma - std::log(2.0);
        const Complex k1 = 1.0;
        const Complex w = z0 / z1 - std::log(rho);
        const Complex a = (-u(0) + u(1) * w) / (-c0 + k1 * w);
        CVector want(2);
        want << a * c0, a * k1;
        worst = std::max(worst, (got - want).norm() / std::max(1.0, want.norm()));
    }
    return {worst < kProjectionTol, fmt::format("max relative deviation from the closed projection {:.2e}", worst)};
}

Outcome criterion9() {
    const WedgeModel lap(make_laplacian_spec(4));
    Gen g(9);
    std::vector<DomainSubspace> domains = {proj(lap, 1.0, 0.0), proj(lap, 1.0, 1.0), proj(lap, Complex(0.0, 1.0), 1.0)};
    while (domains.size() < 10) domains.push_back(proj(lap, g.complex(4.0), g.complex(1.0) + Complex(1.0, 0.0)));
    int disagreements = 0, unbounded = 0, cases = 0;
    std::vector<OmegaLimit> omegas;
    for (const auto& D : domains) omegas.push_back(omega_limit_set(D, default_rho_grid()));
    for (int j = 0; j < 12; ++j) {
        const Complex dir = std::polar(1.0, (15.0 + 30.0 * j) * kPi / 180.0);
        const KernelTrace K = lap.kernel_trace(dir);
        for (std::size_t d = 0; d < domains.size(); ++d) {
            const bool a = ray_verdict_fixed_norm(lap, domains[d], dir).bounded;
            const bool b = ray_verdict_lambda_norm(lap, domains[d], dir).bounded;
            const bool c = geometric_verdict(domains[d], dir, omegas[d], K).bounded;
            disagreements += (a == b && b == c) ? 0 : 1;
            unbounded += (a && b && c) ? 0 : 1;
            ++cases;
        }
    }
    cli::RunConfig cfg;
    cfg.op.family = "laplacian";
    cfg.op.modes = 4;
    cfg.rays.angles_deg = {0.0};
    cfg.domains = {{"one_one", {{1.0, 1.0}}}};
    const auto dir = std::filesystem::temp_directory_path() / "cone-ray-acceptance-9";
    std::ostringstream log;
    const int code = cli::run_config("ray-check", cfg, dir.string(), log);
    std::filesystem::remove_all(dir);
    return {disagreements == 0 && unbounded == 0 && code == cli::kExitOutsideBackground,
            fmt::format("{} cases: {} disagreements, {} unbounded; theta=0 exit code {}", cases, disagreements,
                        unbounded, code)};
}

Outcome criterion10() {
    const WedgeModel lap(make_laplacian_spec(10));
    const auto start = std::chrono::steady_clock::now();
    struct Case {
        const char* name;
        DomainSubspace D;
    };
    std::vector<Case> cases = {{"friedrichs", proj(lap, 1.0, 0.0)},
                               {"[1:1]", proj(lap, 1.0, 1.0)},
                               {"[i:1]", proj(lap, Complex(0.0, 1.0), 1.0)}};
    bool pass = true;
    std::string detail;
    for (const auto& c : cases) {
        const ScanResult s = ray_scan(lap, c.D, -1.0, 3.0, 6.0, 8);
        bool ok = s.spectrum_hits == 0 && std::abs(s.slope) < kSlopeBand && s.total_variation < kVariationTol;
        double top = 0.0;
        for (const auto& r : s.rows) top = std::max(top, r.lambda_times_norm);
        if (std::string(c.name) == "friedrichs") ok = ok && top <= 1.0 + kSelfadjointNormTol;
        pass = pass && ok;
        detail += fmt::format("{} slope {:.2e} TV {:.2e} max {:.4f}; ", c.name, s.slope, s.total_variation, top);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    pass = pass && secs <= kScanBudgetSeconds;
    return {pass, detail + fmt::format("{:.1f} s", secs)};
}

Outcome criterion11() {
    const WedgeModel lap(make_laplacian_spec(2));
    const PairingForm form = boundary_pairing(lap.spec(), lap.basis());
    CVector one(2), lg(2);
    one << 1.0, 0.0;
    lg << 0.0, 1.0;
    const double value = std::abs(pairing_value(form, one, lg));
    const double err = std::abs(value - 2.0 * kPi);
    bool classify = true;
    for (Complex c : {Complex(2, 0), Complex(-2, 0), Complex(1, 0), Complex(-1, 0), Complex(0, 0), Complex(0, 1),
                      Complex(1, 1)}) {
        const bool sa = selfadjoint_test(proj(lap, c, 1.0), form);
        classify = classify && (sa == (c.imag() == 0.0));
    }
    classify = classify && selfadjoint_test(proj(lap, 1.0, 0.0), form);
    return {err < kPairingTol && classify,
            fmt::format("|[1, log x]| = {:.12f} (2 pi error {:.2e}); selfadjoint circle classification: {}", value, err,
                        classify)};
}

Outcome criterion12() {
    const WedgeModel lap(make_laplacian_spec(2));
    bool pass = true;
    std::string detail;
    for (double lam : {-1.0, -4.0, -std::exp(2.0)}) {
        const DomainSubspace D = eigen_domain(lap, lam);
        const bool member = bad_set_member(D, lap.kernel_trace(lam));
        bool hit = false;
        try {
            (void)projection_at(lap, D, lam);
        } catch (const Error& e) {
            hit = e.kind() == ErrorKind::SpectrumHit;
        }
        std::vector<double> grid = default_rho_grid();
        grid.push_back(std::sqrt(-lam));
        std::sort(grid.begin(), grid.end());
        const RayVerdict v = ray_verdict_fixed_norm(lap, D, -1.0, grid);
        const bool recorded = std::any_of(v.spectrum_hits.begin(), v.spectrum_hits.end(),
                                          [&](double r) { return std::abs(r - std::sqrt(-lam)) < 1e-12; });
        pass = pass && member && hit && recorded;
        detail += fmt::format("lambda={:.4f}: bad-set {} SpectrumHit {} recorded {}; ", lam, member, hit, recorded);
    }
    return {pass, detail};
}

Outcome criterion13() {
    const WedgeModel lap(make_laplacian_spec(10));
    bool pass = true;
    std::string detail;
    for (const auto& [name, D] : {std::pair{"friedrichs", proj(lap, 1.0, 0.0)}, std::pair{"[1:1]", proj(lap, 1.0, 1.0)}}) {
        const LocalizedDecay ld = localized_decay_check(lap, D, -1.0, CutoffProfile::between(0.2, 0.4),
                                                        CutoffProfile::between(0.6, 1.2), 2.0, 2.0, 3);
        bool ok = ld.passes.size() == 3;
        for (int n = 1; n <= 3; ++n) ok = ok && ld.slope <= -n + kDecaySlack && ld.passes[static_cast<std::size_t>(n - 1)];
        pass = pass && ok;
        detail += fmt::format("{} slope {:.3f}; ", name, ld.slope);
    }
    return {pass, detail};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"boundary spectrum", criterion1},   {"singular basis dimensions", criterion2},
        {"index bookkeeping", criterion3},   {"theta recursion", criterion4},
        {"kappa flow", criterion5},          {"omega-limit convergence", criterion6},
        {"kernel traces", criterion7},       {"projection formula", criterion8},
        {"criterion equivalence", criterion9}, {"resolvent law", criterion10},
        {"selfadjoint circle", criterion11}, {"eigen-domain", criterion12},
        {"localized decay", criterion13},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("criterion %2zu %s  %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
        std::fflush(stdout);
    }
    return failures;
}
