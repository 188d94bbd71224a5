#include "coneray/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace coneray {

Polynomial::Polynomial(std::vector<Complex> coefficients) : c_(std::move(coefficients)) {}

int Polynomial::degree() const {
    for (int i = static_cast<int>(c_.size()) - 1; i >= 0; --i) {
        if (c_[static_cast<std::size_t>(i)] != Complex(0.0, 0.0)) return i;
    }
    return -1;
}

Complex Polynomial::operator()(Complex s) const {
    Complex acc(0.0, 0.0);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * s + *it;
    return acc;
}

Polynomial Polynomial::derivative() const {
    if (c_.size() <= 1) return Polynomial({Complex(0.0, 0.0)});
    std::vector<Complex> d(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * static_cast<double>(i);
    return Polynomial(std::move(d));
}

std::vector<Complex> Polynomial::taylor(Complex s) const {
    // Repeated synthetic division.
    std::vector<Complex> work = c_;
    const int n = degree();
    std::vector<Complex> out;
    if (n < 0) return {Complex(0.0, 0.0)};
    work.resize(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k) {
        for (int i = n - 1; i >= k; --i) {
            work[static_cast<std::size_t>(i)] += s * work[static_cast<std::size_t>(i) + 1];
        }
        out.push_back(work[static_cast<std::size_t>(k)]);
    }
    return out;
}

bool Polynomial::operator==(const Polynomial& other) const {
    const std::size_t n = std::max(c_.size(), other.c_.size());
    for (std::size_t i = 0; i < n; ++i) {
        const Complex a = i < c_.size() ? c_[i] : Complex(0.0, 0.0);
        const Complex b = i < other.c_.size() ? other.c_[i] : Complex(0.0, 0.0);
        if (a != b) return false;
    }
    return true;
}

namespace {

Complex newton_polish(const Polynomial& p, const Polynomial& dp, Complex z) {
    double best = std::abs(p(z));
    for (int it = 0; it < 8 && best > 0.0; ++it) {
        const Complex d = dp(z);
        if (d == Complex(0.0, 0.0)) break;
        const Complex next = z - p(z) / d;
        const double r = std::abs(p(next));
        if (!(r < best)) break;
        z = next;
        best = r;
    }
    return z;
}

double coefficient_scale(const Polynomial& p, Complex z) {
    double acc = 0.0;
    double zp = 1.0;
    for (const Complex& c : p.coefficients()) {
        acc += std::abs(c) * zp;
        zp *= std::abs(z);
    }
    return acc;
}

bool before(const RootCluster& a, const RootCluster& b) {
    if (std::abs(a.value.imag() - b.value.imag()) > 1e-12) return a.value.imag() > b.value.imag();
    return a.value.real() < b.value.real();
}

}  // namespace

std::vector<RootCluster> polynomial_roots(const Polynomial& p) {
    const int n = p.degree();
    if (n < 0) throw std::runtime_error("zero polynomial has no isolated roots");
    if (n == 0) return {};
    const auto& c = p.coefficients();
    const Complex lead = c[static_cast<std::size_t>(n)];

    CMatrix comp = CMatrix::Zero(n, n);
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) comp(i, n - 1) = -c[static_cast<std::size_t>(i)] / lead;

    Eigen::ComplexEigenSolver<CMatrix> es(comp, false);
    if (es.info() != Eigen::Success) throw std::runtime_error("companion eigenvalue solve did not converge");

    const Polynomial dp = p.derivative();
    std::vector<Complex> raw;
    for (int i = 0; i < n; ++i) raw.push_back(newton_polish(p, dp, es.eigenvalues()(i)));

    // Candidate clusters are formed loosely, then confirmed by the derivative test.
    std::vector<bool> used(raw.size(), false);
    std::vector<RootCluster> out;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (used[i]) continue;
        std::vector<std::size_t> members{i};
        used[i] = true;
        for (std::size_t at = 0; at < members.size(); ++at) {
            const Complex base = raw[members[at]];
            const double scale = std::max(1.0, std::abs(base));
            for (std::size_t j = i + 1; j < raw.size(); ++j) {
                if (used[j] || std::abs(raw[j] - base) >= 1e-3 * scale) continue;
                members.push_back(j);
                used[j] = true;
            }
        }
        if (members.size() == 1) {
            out.push_back({raw[i], 1});
            continue;
        }
        Complex centre(0.0, 0.0);
        for (std::size_t m : members) centre += raw[m];
        centre /= static_cast<double>(members.size());
        const int mu = static_cast<int>(members.size());

        // A mu-fold root is a simple root of p^(mu-1).
        Polynomial d = p;
        for (int k = 0; k < mu - 1; ++k) d = d.derivative();
        const Complex refined = newton_polish(d, d.derivative(), centre);
        const auto tay = p.taylor(refined);
        bool genuine = true;
        for (int k = 0; k < mu; ++k) {
            const double tolk = 1e-8 * coefficient_scale(p, refined);
            if (std::abs(tay[static_cast<std::size_t>(k)]) > tolk) genuine = false;
        }
        double spread = 0.0;
        for (std::size_t m : members) spread = std::max(spread, std::abs(raw[m] - refined));
        if (genuine || spread < 1e-8 * std::max(1.0, std::abs(refined))) {
            out.push_back({refined, mu});
        } else {
            for (std::size_t m : members) out.push_back({raw[m], 1});
        }
    }
    for (auto& r : out) {
        const double scale = std::max(1.0, std::abs(r.value));
        if (std::abs(r.value.real()) < 1e-14 * scale) r.value.real(0.0);
        if (std::abs(r.value.imag()) < 1e-14 * scale) r.value.imag(0.0);
        const double resid = std::abs(p(r.value));
        if (!std::isfinite(resid)) throw std::runtime_error("non-finite root");
    }
    std::sort(out.begin(), out.end(), before);
    return out;
}

}  // namespace coneray
