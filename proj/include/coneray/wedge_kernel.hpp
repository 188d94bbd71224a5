#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "coneray/symbol_algebra.hpp"
#include "coneray/types.hpp"

namespace coneray {

struct ModeSolution {
    int mode = 0;
    double nu = -1.0;                // per-mode indicial parameter on the closed-form route, -1 otherwise
    std::string route;               // "closed-form" or "numeric"
    Complex normalization{1.0, 0.0}; // factor applied to the raw decaying-solution trace
    double fit_residual = 0.0;
    double condition = 1.0;
};

struct KernelTrace {
    Complex lambda;
    std::size_t dim = 0;
    CMatrix vectors;  // ambient_dim x dim, unit columns
    std::vector<ModeSolution> per_mode;
};

struct SectorDescription {
    double theta0 = kPi;
    double half_aperture = 0.0;
    double min_radius = 0.0;
    bool certified = false;
};

struct NumericKernelOptions {
    double rel_tol = 1e-13;
    double x_infinity = 40.0;
    double match_lo = 1e-4;
    double match_hi = 1e-2;
    int match_points = 32;
    double max_condition = 1e10;
    bool compute_residual = false;
};

struct ModeTrace {
    int mode = 0;
    bool contributes = false;
    std::vector<std::size_t> basis_indices;  // positions of this mode in the model's SingBasis
    CVector coords;                          // coordinates on those entries
    Complex normalization{1.0, 0.0};
    double fit_residual = 0.0;
    double condition = 1.0;
    double operator_residual = 0.0;
};

// Trace of K_nu(sqrt(-lambda) x) on the one-mode strip basis: (1, log x) for nu = 0,
// (x^{-nu}, x^{nu}) for 0 < nu < 1, empty for nu >= 1.
KernelTrace kernel_trace_closed_form(double nu, Complex lambda);

ModeTrace kernel_trace_numeric(const ConeOperatorSpec& spec, Complex lambda, int mode,
                               const NumericKernelOptions& options = {});

// Spec, its singular basis and the kernel-trace route.
class WedgeModel {
public:
    explicit WedgeModel(ConeOperatorSpec spec, std::optional<int> ind_min = std::nullopt);

    const ConeOperatorSpec& spec() const { return spec_; }
    const SingBasis& basis() const { return *basis_; }
    std::shared_ptr<const SingBasis> basis_ptr() const { return basis_; }
    int order() const { return spec_.order; }
    std::size_t dim() const { return basis_->size(); }
    const std::optional<std::vector<double>>& nus() const { return nus_; }
    bool laplacian_family() const { return nus_.has_value(); }
    double nu(int mode) const;
    std::optional<int> configured_ind_min() const { return ind_min_; }
    // Configured value, else -dim/2 for symmetric specs; throws IndexInconsistency.
    int ind_min() const;

    // Throws OutsideBackgroundResolvent.
    void require_background(Complex lambda) const;
    bool in_background(Complex lambda) const;
    KernelTrace kernel_trace(Complex lambda, const NumericKernelOptions& options = {}) const;

private:
    ConeOperatorSpec spec_;
    std::shared_ptr<const SingBasis> basis_;
    std::optional<std::vector<double>> nus_;
    std::optional<int> ind_min_;
};

std::vector<SectorDescription> background_sectors(const WedgeModel& model, int probe_points);

// Unit length, first coordinate above 1e-12 relative made real positive.
CVector projective_normalize(const CVector& v);

void write_kernel_traces_csv(std::ostream& os, const SingBasis& basis, const std::vector<KernelTrace>& traces);

}  // namespace coneray
