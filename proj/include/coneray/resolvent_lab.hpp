#pragma once

#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include "coneray/cutoff.hpp"
#include "coneray/domain_flow.hpp"
#include "coneray/ray_criterion.hpp"
#include "coneray/wedge_kernel.hpp"

namespace coneray {

struct UnitReduction {
    DomainSubspace domain;
    Complex lambda_hat;
    double rho = 1.0;
};

UnitReduction reduce_unit_modulus(const DomainSubspace& D, Complex lambda, int order);

struct NystromMesh {
    double x_max = 40.0;
    int nodes = 2000;
    double smallest_cell = 1e-6;
    bool refinement_check = true;
    double refinement_tol = 0.01;
    double power_tol = 1e-8;
    int restarts = 3;
    int max_iterations = 50000;
};

// Midpoints and widths of a geometric mesh on (0, x_max].
std::pair<std::vector<double>, std::vector<double>> geometric_mesh(const NystromMesh& mesh);

// Green kernel data of one Fourier mode at unit modulus: G(x, y) = u1(min) u2(max) for the measure y dy.
struct ModeGreen {
    int mode = 0;
    double nu = 0.0;
    Complex z;
    Complex beta;  // u1 = I_nu(z x) + beta K_nu(z x)
    bool carries_datum = false;
};

std::vector<ModeGreen> mode_greens(const WedgeModel& model, const DomainSubspace& D, Complex lambda_hat, int k_max);

// Largest singular value of the Nystrom discretization of one mode's resolvent.
double nystrom_mode_norm(const ModeGreen& g, const NystromMesh& mesh);

struct ResolventNorm {
    double value = 0.0;       // at lambda
    double unit_value = 0.0;  // at lambda_hat on the reduced domain
    double uncertainty = 0.0;  // at lambda: how far a mode band can rise above value
    double tail_bound = 0.0;   // modes above k_max, at unit modulus
    double refinement_change = 0.0;
    std::vector<std::pair<int, double>> mode_norms;  // unit modulus, |k| ascending
};

// k_max < 0 uses ConeOperatorSpec::mode_bound.
ResolventNorm resolvent_norm(const WedgeModel& model, const DomainSubspace& D, Complex lambda, int k_max = -1,
                             const NystromMesh& mesh = {});

// u = (A_D - lambda)^{-1} f in one mode, f supported in [0, f_support], evaluated at xs.
std::vector<Complex> apply_resolvent(const WedgeModel& model, const DomainSubspace& D, Complex lambda, int mode,
                                     const std::function<Complex(double)>& f, double f_support,
                                     const std::vector<double>& xs);

struct ScanRow {
    double abs_lambda = 0.0;
    double theta_deg = 0.0;
    double norm = 0.0;
    double lambda_times_norm = 0.0;
    double slope_running = 0.0;
    double uncertainty = 0.0;
    bool spectrum_hit = false;
};

struct ScanResult {
    std::vector<ScanRow> rows;
    double slope = 0.0;             // log(|lambda| norm) against log |lambda|
    double slope_without_factor = 0.0;
    double total_variation = 0.0;   // relative to the largest |lambda| norm
    bool minimal_growth = false;
    std::size_t spectrum_hits = 0;
    bool criterion_bounded = false;
    bool agreement = false;
};

ScanResult ray_scan(const WedgeModel& model, const DomainSubspace& D, Complex lambda_hat, double log10_min = 3.0,
                    double decades = 6.0, int points_per_decade = 8, const NystromMesh& mesh = {});

void write_scan_csv(std::ostream& os, const ScanResult& scan);

struct LocalizedDecay {
    std::vector<double> abs_lambda;
    std::vector<double> norms;
    double slope = 0.0;
    std::vector<bool> passes;  // N = 1..n_max
    bool all_pass = false;
};

// Throws PreconditionViolation unless supp(omega1) and supp(1 - omega0) are a positive distance apart.
LocalizedDecay localized_decay_check(const WedgeModel& model, const DomainSubspace& D, Complex lambda_hat,
                                     const CutoffProfile& omega1 = CutoffProfile::between(0.2, 0.4),
                                     const CutoffProfile& omega0 = CutoffProfile::between(0.6, 1.2),
                                     double log10_min = 2.0, double decades = 2.0, int n_max = 3,
                                     int points_per_decade = 8);

}  // namespace coneray
