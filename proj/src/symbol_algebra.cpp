#include "coneray/symbol_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "coneray/errors.hpp"

namespace coneray {

ConormalPolynomial::ConormalPolynomial(int mode_bound, std::vector<Polynomial> per_mode)
    : mode_bound_(mode_bound), polys_(std::move(per_mode)) {
    if (mode_bound < 0 || polys_.size() != static_cast<std::size_t>(2 * mode_bound + 1)) {
        throw Error(ErrorKind::InvalidSpec, "conormal polynomial must be defined for every mode in [-K, K]");
    }
}

const Polynomial& ConormalPolynomial::at(int mode) const {
    if (mode < -mode_bound_ || mode > mode_bound_) {
        throw Error(ErrorKind::InvalidSpec, fmt::format("mode {} outside [-{}, {}]", mode, mode_bound_, mode_bound_));
    }
    return polys_[static_cast<std::size_t>(mode + mode_bound_)];
}

bool ConormalPolynomial::operator==(const ConormalPolynomial& other) const {
    return mode_bound_ == other.mode_bound_ && polys_ == other.polys_;
}

void validate(const ConeOperatorSpec& spec) {
    if (spec.order < 1) throw Error(ErrorKind::InvalidSpec, "order must be >= 1");
    if (spec.mode_bound < 0) throw Error(ErrorKind::InvalidSpec, "mode bound must be >= 0");
    if (spec.levels.empty()) throw Error(ErrorKind::InvalidSpec, "level 0 is required");
    for (std::size_t l = 0; l < spec.levels.size(); ++l) {
        const auto& level = spec.levels[l];
        if (level.mode_bound() != spec.mode_bound) {
            throw Error(ErrorKind::InvalidSpec, fmt::format("level {} is not defined on the full mode range", l));
        }
        for (int k = -spec.mode_bound; k <= spec.mode_bound; ++k) {
            for (const Complex& c : level.at(k).coefficients()) {
                if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
                    throw Error(ErrorKind::InvalidSpec, fmt::format("non-finite coefficient at level {}, mode {}", l, k));
                }
            }
        }
    }
    for (int k = -spec.mode_bound; k <= spec.mode_bound; ++k) {
        if (spec.levels[0].at(k).degree() != spec.order) {
            throw Error(ErrorKind::InvalidSpec,
                        fmt::format("level-0 polynomial of mode {} must have degree exactly {}", k, spec.order));
        }
    }
}

ConeOperatorSpec make_laplacian_spec(int mode_bound) {
    ConeOperatorSpec spec;
    spec.order = 2;
    spec.mode_bound = mode_bound;
    spec.label = "laplacian";
    spec.levels.push_back(ConormalPolynomial::from_function(mode_bound, [](int k) {
        return Polynomial({Complex(double(k) * k, 0.0), 0.0, 1.0});
    }));
    return spec;
}

ConeOperatorSpec make_q_example_spec(double alpha, double beta, int mode_bound) {
    ConeOperatorSpec spec;
    spec.order = 2;
    spec.mode_bound = mode_bound;
    spec.label = "q-example";
    spec.levels.push_back(ConormalPolynomial::from_function(mode_bound, [alpha](int k) {
        return Polynomial({Complex(alpha * alpha * k * k, 0.0), 0.0, 1.0});
    }));
    spec.levels.push_back(ConormalPolynomial::from_function(mode_bound, [beta](int k) {
        return Polynomial({Complex(beta * k * k, 0.0)});
    }));
    spec.levels.push_back(ConormalPolynomial::from_function(mode_bound, [](int k) {
        return Polynomial({Complex(double(k) * k, 0.0)});
    }));
    return spec;
}

std::optional<std::vector<double>> laplacian_nus(const ConeOperatorSpec& spec) {
    if (spec.order != 2 || spec.levels.empty()) return std::nullopt;
    std::vector<double> nus;
    for (int k = -spec.mode_bound; k <= spec.mode_bound; ++k) {
        const auto& c = spec.levels[0].at(k).coefficients();
        if (spec.levels[0].at(k).degree() != 2) return std::nullopt;
        if (c[2] != Complex(1.0, 0.0) || c[1] != Complex(0.0, 0.0)) return std::nullopt;
        if (c[0].imag() != 0.0 || c[0].real() < 0.0) return std::nullopt;
        nus.push_back(std::sqrt(c[0].real()));
    }
    return nus;
}

bool is_symmetric(const ConeOperatorSpec& spec) {
    for (int k = -spec.mode_bound; k <= spec.mode_bound; ++k) {
        for (const Complex& c : spec.levels.at(0).at(k).coefficients()) {
            if (std::abs(c.imag()) > 1e-14 * std::max(1.0, std::abs(c))) return false;
        }
    }
    return true;
}

ConormalPolynomial conormal_symbol(const ConeOperatorSpec& spec, int level) {
    if (level < 0 || static_cast<std::size_t>(level) >= spec.levels.size()) {
        throw Error(ErrorKind::MissingLevel,
                    fmt::format("level {} requested, {} stored", level, spec.levels.size()));
    }
    return spec.levels[static_cast<std::size_t>(level)];
}

std::vector<IndicialRoot> boundary_spectrum(const ConeOperatorSpec& spec, double strip_halfwidth,
                                            BoundaryPolicy policy) {
    validate(spec);
    std::vector<IndicialRoot> out;
    for (int k = -spec.mode_bound; k <= spec.mode_bound; ++k) {
        const Polynomial& p = spec.levels[0].at(k);
        std::vector<RootCluster> roots;
        try {
            roots = polynomial_roots(p);
        } catch (const std::exception& e) {
            throw RootFindingError(k, fmt::format("mode {}: {}", k, e.what()));
        }
        for (const auto& r : roots) {
            const double im = std::abs(r.value.imag());
            if (std::isfinite(strip_halfwidth)) {
                if (std::abs(im - strip_halfwidth) <= kBoundaryTolerance * std::max(1.0, strip_halfwidth)) {
                    if (policy == BoundaryPolicy::Reject) {
                        throw Error(ErrorKind::BoundaryRoot,
                                    fmt::format("mode {}: root ({}, {}) on |Im sigma| = {}", k, r.value.real(),
                                                r.value.imag(), strip_halfwidth));
                    }
                    continue;
                }
                if (im >= strip_halfwidth) continue;
            }
            out.push_back({r.value, k, r.multiplicity});
        }
    }
    return out;
}

SingBasis::SingBasis(int order, std::vector<SingEntry> entries) : order_(order), entries_(std::move(entries)) {}

std::optional<std::size_t> SingBasis::index_of(int mode, Complex sigma, int log_power, double tol) const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        if (e.mode == mode && e.log_power == log_power && std::abs(e.sigma - sigma) <= tol) return i;
    }
    return std::nullopt;
}

std::vector<int> SingBasis::modes() const {
    std::vector<int> out;
    for (const auto& e : entries_) {
        if (out.empty() || out.back() != e.mode) out.push_back(e.mode);
    }
    return out;
}

std::vector<std::size_t> SingBasis::mode_indices(int mode) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].mode == mode) out.push_back(i);
    }
    return out;
}

bool SingBasis::operator==(const SingBasis& other) const {
    if (order_ != other.order_ || entries_.size() != other.entries_.size()) return false;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& a = entries_[i];
        const auto& b = other.entries_[i];
        if (a.mode != b.mode || a.log_power != b.log_power || a.sigma != b.sigma) return false;
    }
    return true;
}

SingBasis wedge_sing_basis(const ConeOperatorSpec& spec, BoundaryPolicy policy) {
    const auto roots = boundary_spectrum(spec, 0.5 * spec.order, policy);
    std::vector<SingEntry> entries;
    for (const auto& r : roots) {
        for (int j = 0; j < r.multiplicity; ++j) entries.push_back({r.mode, r.sigma, j, r.multiplicity});
    }
    return SingBasis(spec.order, std::move(entries));
}

namespace {

// Coefficients (ascending in t = log x) of p(tau - i d/dt) Q.
std::vector<Complex> apply_shifted(const Polynomial& p, Complex tau, const std::vector<Complex>& q) {
    std::vector<Complex> out(q.size(), Complex(0.0, 0.0));
    if (p.is_zero()) return out;
    const auto a = p.taylor(tau);
    const Complex minus_i(0.0, -1.0);
    for (std::size_t d = 0; d < q.size(); ++d) {
        Complex acc(0.0, 0.0);
        Complex ipow(1.0, 0.0);
        double fall = 1.0;
        for (std::size_t n = 0; n < a.size() && d + n < q.size(); ++n) {
            if (n > 0) {
                ipow *= minus_i;
                fall *= static_cast<double>(d + n);
            }
            acc += a[n] * ipow * fall * q[d + n];
        }
        out[d] = acc;
    }
    return out;
}

// Solve p(tau - i d/dt) Q = R for polynomial Q, p(tau) != 0.
std::vector<Complex> solve_shifted(const Polynomial& p, Complex tau, const std::vector<Complex>& r) {
    const auto a = p.taylor(tau);
    const Complex minus_i(0.0, -1.0);
    std::vector<Complex> q(r.size(), Complex(0.0, 0.0));
    for (std::size_t dd = r.size(); dd-- > 0;) {
        Complex acc = r[dd];
        Complex ipow(1.0, 0.0);
        double fall = 1.0;
        for (std::size_t n = 1; n < a.size() && dd + n < q.size(); ++n) {
            ipow *= minus_i;
            fall *= static_cast<double>(dd + n);
            acc -= a[n] * ipow * fall * q[dd + n];
        }
        q[dd] = acc / a[0];
    }
    return q;
}

const Polynomial* level_poly(const ConeOperatorSpec& spec, std::size_t level, int mode) {
    if (level >= spec.levels.size()) return nullptr;
    return &spec.levels[level].at(mode);
}

}  // namespace

ThetaTail theta_corrections(const ConeOperatorSpec& spec, const SingEntry& entry) {
    validate(spec);
    ThetaTail tail;
    tail.base = entry;
    const double half = 0.5 * spec.order;
    const int mode = entry.mode;
    const Polynomial& p0 = spec.levels[0].at(mode);

    std::vector<std::vector<Complex>> q;
    std::vector<Complex> q0(static_cast<std::size_t>(entry.log_power) + 1, Complex(0.0, 0.0));
    q0.back() = 1.0;
    q.push_back(q0);

    for (int l = 1;; ++l) {
        const Complex tau = entry.sigma - Complex(0.0, double(l));
        if (tau.imag() <= -half) break;
        std::vector<Complex> rhs(q0.size(), Complex(0.0, 0.0));
        bool any = false;
        for (int j = 1; j <= l; ++j) {
            const Polynomial* pj = level_poly(spec, static_cast<std::size_t>(j), mode);
            if (pj == nullptr || pj->is_zero()) continue;
            const auto term = apply_shifted(*pj, tau, q[static_cast<std::size_t>(l - j)]);
            for (std::size_t d = 0; d < rhs.size(); ++d) rhs[d] -= term[d];
            any = true;
        }
        bool rhs_nonzero = false;
        for (const Complex& c : rhs) rhs_nonzero = rhs_nonzero || c != Complex(0.0, 0.0);
        any = rhs_nonzero;
        const double scale = std::max(1.0, std::abs(tau));
        if (any && std::abs(p0(tau)) < 1e-8 * std::pow(scale, spec.order)) {
            throw ResonanceError(l, fmt::format("sigma - {}i = ({}, {}) lies in the boundary spectrum of mode {}", l,
                                                tau.real(), tau.imag(), mode));
        }
        auto ql = any ? solve_shifted(p0, tau, rhs) : std::vector<Complex>(q0.size(), Complex(0.0, 0.0));
        bool nonzero = false;
        for (const Complex& c : ql) nonzero = nonzero || c != Complex(0.0, 0.0);
        q.push_back(ql);
        if (nonzero) tail.corrections.push_back({l, mode, tau, ql});
    }
    return tail;
}

std::vector<double> theta_residuals(const ConeOperatorSpec& spec, const ThetaTail& tail) {
    const int mode = tail.base.mode;
    const std::size_t width = static_cast<std::size_t>(tail.base.log_power) + 1;
    int last = 0;
    for (const auto& c : tail.corrections) last = std::max(last, c.level);
    std::vector<std::vector<Complex>> q(static_cast<std::size_t>(last) + 1,
                                        std::vector<Complex>(width, Complex(0.0, 0.0)));
    q[0].back() = 1.0;
    for (const auto& c : tail.corrections) {
        auto v = c.log_coefficients;
        v.resize(width, Complex(0.0, 0.0));
        q[static_cast<std::size_t>(c.level)] = v;
    }
    std::vector<double> out;
    for (int l = 1; l <= last; ++l) {
        const Complex tau = tail.base.sigma - Complex(0.0, double(l));
        std::vector<Complex> total(width, Complex(0.0, 0.0));
        for (int j = 0; j <= l; ++j) {
            const Polynomial* pj = level_poly(spec, static_cast<std::size_t>(j), mode);
            if (pj == nullptr) continue;
            const auto term = apply_shifted(*pj, tau, q[static_cast<std::size_t>(l - j)]);
            for (std::size_t d = 0; d < width; ++d) total[d] += term[d];
        }
        double r = 0.0;
        for (const Complex& c : total) r = std::max(r, std::abs(c));
        out.push_back(r);
    }
    return out;
}

void write_roots_csv(std::ostream& os, const std::vector<IndicialRoot>& roots) {
    os << "mode,re_sigma,im_sigma,multiplicity\n";
    for (const auto& r : roots) {
        os << fmt::format("{},{:.15g},{:.15g},{}\n", r.mode, r.sigma.real(), r.sigma.imag(), r.multiplicity);
    }
}

void write_basis_csv(std::ostream& os, const SingBasis& basis) {
    os << "index,mode,re_sigma,im_sigma,log_power\n";
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const auto& e = basis[i];
        os << fmt::format("{},{},{:.15g},{:.15g},{}\n", i, e.mode, e.sigma.real(), e.sigma.imag(), e.log_power);
    }
}

void write_theta_csv(std::ostream& os, const SingBasis& basis, const std::vector<ThetaTail>& tails) {
    os << "basis_index,mode,re_sigma,im_sigma,log_power,level,re_exponent,im_exponent,coef_log_power,re_coef,im_coef\n";
    for (const auto& t : tails) {
        const auto idx = basis.index_of(t.base.mode, t.base.sigma, t.base.log_power);
        for (const auto& c : t.corrections) {
            for (std::size_t d = 0; d < c.log_coefficients.size(); ++d) {
                os << fmt::format("{},{},{:.15g},{:.15g},{},{},{:.15g},{:.15g},{},{:.15g},{:.15g}\n",
                                  idx ? static_cast<long>(*idx) : -1L, t.base.mode, t.base.sigma.real(),
                                  t.base.sigma.imag(), t.base.log_power, c.level, c.exponent.real(),
                                  c.exponent.imag(), d, c.log_coefficients[d].real(), c.log_coefficients[d].imag());
            }
        }
    }
}

}  // namespace coneray
