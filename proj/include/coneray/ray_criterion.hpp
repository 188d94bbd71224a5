#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "coneray/cutoff.hpp"
#include "coneray/domain_flow.hpp"
#include "coneray/wedge_kernel.hpp"

namespace coneray {

enum class VerdictMethod { FixedNorm, LambdaNorm, Geometric, Shortcut };
enum class VerdictReason { None, TailGrowth, SpectralObstruction, TailSpectrumHit, OmegaMeetsBadSet, NotInvariant };

std::string to_string(VerdictMethod m);
std::string to_string(VerdictReason r);

inline constexpr double kSpectrumTol = 1e-8;
inline constexpr double kTailSlopeThreshold = 0.05;

struct RayVerdict {
    Complex direction;
    VerdictMethod method = VerdictMethod::FixedNorm;
    std::vector<double> grid;          // rho (fixed-norm, geometric) or |lambda| (lambda-norm)
    std::vector<double> norm_samples;  // infinity where the parameter is in the spectrum
    std::vector<bool> near_spectral;
    std::vector<double> spectrum_hits; // grid values with SpectrumHit
    bool bounded = false;
    double C_estimate = 0.0;
    double R_estimate = 0.0;
    double tail_slope = 0.0;
    VerdictReason reason = VerdictReason::None;
};

// Projection with range K and kernel span D; throws SpectrumHit when not transversal.
CMatrix projection_onto_kernel(const KernelTrace& K, const DomainSubspace& D);

// Norm of the representative omega*phi_u in ||.||_lambda.
double lambda_norm(const CVector& u, Complex lambda, const WedgeModel& model,
                   const CutoffProfile& cutoff = CutoffProfile::standard());
// Gram matrix of ||.||_lambda on E_max for a given cutoff.
CMatrix lambda_gram(Complex lambda, const WedgeModel& model, const CutoffProfile& cutoff);
// Same Gram for omega(|lambda|^{1/m} x), obtained from the unit one as K^* G_1 K with K = kappa_{|lambda|^{-1/m}}.
CMatrix lambda_gram_dilated(Complex lambda, const WedgeModel& model, const CMatrix& unit_gram);
CMatrix unit_gram(const WedgeModel& model);
// Operator norm of A in the Hermitian form u^* G u.
double gram_operator_norm(const CMatrix& A, const CMatrix& gram);

// |lambda| = rho^m over a rho grid.
std::vector<double> modulus_grid_for(const std::vector<double>& rho_grid, int order);
std::vector<double> default_modulus_grid(int order);

RayVerdict ray_verdict_fixed_norm(const WedgeModel& model, const DomainSubspace& D, Complex lambda_hat,
                                  const std::vector<double>& rho_grid = default_rho_grid());
// Uses omega(|lambda|^{1/m} x) as cutoff for each |lambda|; an empty grid means default_modulus_grid(m).
RayVerdict ray_verdict_lambda_norm(const WedgeModel& model, const DomainSubspace& D, Complex lambda_hat,
                                   const std::vector<double>& modulus_grid = {});
// Throws IndeterminateVerdict when the limit set is not converged.
RayVerdict geometric_verdict(const DomainSubspace& D, Complex lambda0, const OmegaLimit& omega, const KernelTrace& K);
// Kappa-invariant domains: empty when D is not invariant.
std::optional<RayVerdict> shortcut_verdict(const WedgeModel& model, const DomainSubspace& D, Complex lambda_hat);

struct SectorVerdict {
    SectorDescription sector;
    std::vector<RayVerdict> rays;
    bool bounded = false;
};

SectorVerdict sector_verdict(const WedgeModel& model, const DomainSubspace& D, const SectorDescription& sector,
                             double resolution_deg = 1.0, const std::vector<double>& rho_grid = default_rho_grid());

struct IndexBook {
    int ind_min = 0;
    int ind_max = 0;
    int ind_D = 0;
    int d_prime = 0;
    int d_double_prime = 0;
    int dim_E = 0;
    bool in_grassmannian = false;
};

IndexBook index_book(const WedgeModel& model, std::size_t dim_D);
IndexBook index_book(const WedgeModel& model, const DomainSubspace& D);

// Projection for A_D - lambda after kappa reduction to |lambda| = 1; throws SpectrumHit.
CMatrix projection_at(const WedgeModel& model, const DomainSubspace& D, Complex lambda);

void write_verdicts_csv(std::ostream& os, const std::vector<RayVerdict>& verdicts);

}  // namespace coneray
