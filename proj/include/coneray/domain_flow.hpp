#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include "coneray/cutoff.hpp"
#include "coneray/symbol_algebra.hpp"
#include "coneray/types.hpp"
#include "coneray/wedge_kernel.hpp"

namespace coneray {

// A subspace of E_max given by spanning coordinate columns.
class DomainSubspace {
public:
    DomainSubspace(std::shared_ptr<const SingBasis> basis, CMatrix vectors);

    static DomainSubspace from_vector(std::shared_ptr<const SingBasis> basis, const CVector& v);
    // Projective coordinates [zeta0 : zeta1] on a two-dimensional E_max.
    static DomainSubspace projective(std::shared_ptr<const SingBasis> basis, Complex zeta0, Complex zeta1);

    const SingBasis& basis() const { return *basis_; }
    std::shared_ptr<const SingBasis> basis_ptr() const { return basis_; }
    const CMatrix& vectors() const { return vectors_; }
    std::size_t dim() const { return static_cast<std::size_t>(vectors_.cols()); }
    std::size_t ambient_dim() const { return static_cast<std::size_t>(vectors_.rows()); }
    CMatrix orthonormal() const;
    // Orthonormal spanning set, each column in projective normal form when dim = 1.
    DomainSubspace canonical() const;
    DomainSubspace mapped(const CMatrix& linear_map) const;

private:
    std::shared_ptr<const SingBasis> basis_;
    CMatrix vectors_;
};

struct FlowGenerator {
    CMatrix g;
};

CMatrix kappa_matrix(const SingBasis& basis, double rho);
FlowGenerator flow_generator(const SingBasis& basis);
bool is_invariant(const FlowGenerator& gen, const DomainSubspace& D, double tol = 1e-10);

// kappa_rho^{-1} D.
DomainSubspace translate(const DomainSubspace& D, double rho);

double gap_distance(const DomainSubspace& U, const DomainSubspace& V);

std::vector<double> default_rho_grid();

struct OmegaLimit {
    std::vector<DomainSubspace> points;
    bool converged = false;
    // Limit read off the generator's Jordan structure rather than from tail clustering.
    bool from_generator = false;
    double tail_diameter = 0.0;
    double last_sample_gap = 0.0;  // gap of the last orbit sample to the first limit point
    bool monotone_approach = false;
    std::vector<double> rho;
    std::vector<DomainSubspace> orbit;
    std::vector<int> cluster_id;
};

OmegaLimit omega_limit_set(const DomainSubspace& D, const std::vector<double>& rho_grid, double cluster_tol = 1e-6);

double transversality_margin(const DomainSubspace& D, const KernelTrace& K);
bool bad_set_member(const DomainSubspace& D, const KernelTrace& K, double tol = 1e-8);

struct PairingForm {
    CMatrix omega;
    bool meaningful = true;
    std::string note;
};

PairingForm boundary_pairing(const ConeOperatorSpec& spec, const SingBasis& basis,
                             const CutoffProfile& cutoff = CutoffProfile::standard());
// [u, v] = sum u_a conj(v_b) Omega_ab.
Complex pairing_value(const PairingForm& form, const CVector& u, const CVector& v);
bool selfadjoint_test(const DomainSubspace& D, const PairingForm& form, double tol = 1e-8);

DomainSubspace eigen_domain(const WedgeModel& model, Complex lambda);

void write_orbit_csv(std::ostream& os, const OmegaLimit& omega);
void write_pairing_csv(std::ostream& os, const PairingForm& form);

}  // namespace coneray
