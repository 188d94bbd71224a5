#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "coneray/polynomial.hpp"
#include "coneray/types.hpp"

namespace coneray {

// Per-mode family k -> p(sigma, k) for k in [-K, K].
class ConormalPolynomial {
public:
    ConormalPolynomial() = default;
    ConormalPolynomial(int mode_bound, std::vector<Polynomial> per_mode);

    template <class F>
    static ConormalPolynomial from_function(int mode_bound, F&& f) {
        std::vector<Polynomial> polys;
        for (int k = -mode_bound; k <= mode_bound; ++k) polys.push_back(f(k));
        return ConormalPolynomial(mode_bound, std::move(polys));
    }

    int mode_bound() const { return mode_bound_; }
    const Polynomial& at(int mode) const;
    bool operator==(const ConormalPolynomial& other) const;

private:
    int mode_bound_ = 0;
    std::vector<Polynomial> polys_;
};

struct ConeOperatorSpec {
    int order = 2;
    int mode_bound = 0;
    std::vector<ConormalPolynomial> levels;
    std::string label;
};

// Throws Error(InvalidSpec) on violation.
void validate(const ConeOperatorSpec& spec);

ConeOperatorSpec make_laplacian_spec(int mode_bound);
// (xD_x)^2 + q(x) Delta_Y with q = alpha^2 + beta x + x^2 gamma(x), gamma(0) = 1.
ConeOperatorSpec make_q_example_spec(double alpha, double beta, int mode_bound);

// Per-mode nu when every level-0 polynomial is sigma^2 + nu^2 with nu >= 0 real.
std::optional<std::vector<double>> laplacian_nus(const ConeOperatorSpec& spec);
// All level-0 coefficients real.
bool is_symmetric(const ConeOperatorSpec& spec);

ConormalPolynomial conormal_symbol(const ConeOperatorSpec& spec, int level);

struct IndicialRoot {
    Complex sigma;
    int mode = 0;
    int multiplicity = 1;
};

enum class BoundaryPolicy { Exclude, Reject };

inline constexpr double kUnboundedStrip = std::numeric_limits<double>::infinity();
inline constexpr double kBoundaryTolerance = 1e-10;

std::vector<IndicialRoot> boundary_spectrum(const ConeOperatorSpec& spec, double strip_halfwidth,
                                            BoundaryPolicy policy = BoundaryPolicy::Exclude);

struct SingEntry {
    int mode = 0;
    Complex sigma;
    int log_power = 0;
    int multiplicity = 1;
};

class SingBasis {
public:
    SingBasis() = default;
    SingBasis(int order, std::vector<SingEntry> entries);

    int order() const { return order_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const SingEntry& operator[](std::size_t i) const { return entries_[i]; }
    const std::vector<SingEntry>& entries() const { return entries_; }
    std::optional<std::size_t> index_of(int mode, Complex sigma, int log_power, double tol = 1e-8) const;
    std::vector<int> modes() const;
    std::vector<std::size_t> mode_indices(int mode) const;
    bool operator==(const SingBasis& other) const;

private:
    int order_ = 2;
    std::vector<SingEntry> entries_;
};

SingBasis wedge_sing_basis(const ConeOperatorSpec& spec, BoundaryPolicy policy = BoundaryPolicy::Exclude);

struct ThetaCorrection {
    int level = 1;
    int mode = 0;
    Complex exponent;
    // Coefficients of the log-polynomial multiplying x^{i exponent}, ascending powers of log x.
    std::vector<Complex> log_coefficients;

    Complex coefficient() const { return log_coefficients.empty() ? Complex(0.0, 0.0) : log_coefficients.front(); }
};

struct ThetaTail {
    SingEntry base;
    std::vector<ThetaCorrection> corrections;
};

ThetaTail theta_corrections(const ConeOperatorSpec& spec, const SingEntry& entry);
// Max-norm residual of the level recursion at each correction level.
std::vector<double> theta_residuals(const ConeOperatorSpec& spec, const ThetaTail& tail);

void write_roots_csv(std::ostream& os, const std::vector<IndicialRoot>& roots);
void write_basis_csv(std::ostream& os, const SingBasis& basis);
void write_theta_csv(std::ostream& os, const SingBasis& basis, const std::vector<ThetaTail>& tails);

}  // namespace coneray
