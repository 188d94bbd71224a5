#include "coneray/representatives.hpp"

#include <cmath>
#include <functional>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

#include "coneray/errors.hpp"

namespace coneray {

namespace {

double falling(int n, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= static_cast<double>(n - i);
    return r;
}

double binom(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    return falling(n, k) / falling(k, k);
}

// d^r/dt^r of omega(e^t), via Stirling numbers of the second kind.
double cutoff_t_derivative(const CutoffProfile& c, double x, int r) {
    static const double stirling[4][4] = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 1, 1, 0}, {0, 1, 3, 1}};
    if (r == 0) return c.value(x);
    double acc = 0.0;
    double xq = 1.0;
    for (int q = 1; q <= r; ++q) {
        xq *= x;
        acc += stirling[r][q] * xq * c.derivative(x, q);
    }
    return acc;
}

Complex integrate(const std::function<Complex(double)>& f, double a, double b, double tol) {
    double err = 0.0;
    double l1 = 0.0;
    const Complex v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, tol, &err, &l1);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()) || err > std::max(1e3 * tol, 1e-6) * std::max(1e-300, l1)) {
        throw Error(ErrorKind::QuadratureFailure, fmt::format("quadrature on [{}, {}] error {} (L1 {})", a, b, err, l1));
    }
    return v;
}

}  // namespace

Complex log_power_moment(Complex s, int n, double c) {
    const double lc = std::log(c);
    Complex acc(0.0, 0.0);
    Complex spow = s;
    for (int k = 0; k <= n; ++k) {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        acc += sign * falling(n, k) * std::pow(lc, n - k) / spow;
        spow *= s;
    }
    return std::exp(s * lc) * acc;
}

Complex representative_value(const SingEntry& e, const CutoffProfile& cutoff, double x) {
    const double t = std::log(x);
    return cutoff.value(x) * std::exp(Complex(0.0, 1.0) * e.sigma * t) * std::pow(t, e.log_power);
}

Complex representative_image(const ConeOperatorSpec& spec, const SingEntry& e, const CutoffProfile& cutoff,
                             double x) {
    if (x <= cutoff.flat_end || x >= cutoff.support_end) return 0.0;
    const int m = spec.order;
    const double t = std::log(x);
    const auto a = spec.levels[0].at(e.mode).taylor(e.sigma);
    const int j = e.log_power;
    // p(sigma - i d_t)(W t^j), dropping the W-undifferentiated part which vanishes on strip traces.
    Complex acc(0.0, 0.0);
    Complex ipow(1.0, 0.0);
    for (int n = 1; n < static_cast<int>(a.size()); ++n) {
        ipow *= Complex(0.0, -1.0);
        Complex dn(0.0, 0.0);
        for (int r = 1; r <= n; ++r) {
            const int q = n - r;
            if (q > j) continue;
            dn += binom(n, r) * cutoff_t_derivative(cutoff, x, r) * falling(j, q) * std::pow(t, j - q);
        }
        acc += a[static_cast<std::size_t>(n)] * ipow * dn;
    }
    return std::pow(x, -double(m)) * std::exp(Complex(0.0, 1.0) * e.sigma * t) * acc;
}

RepresentativeGram representative_gram(const ConeOperatorSpec& spec, const SingBasis& basis,
                                        const CutoffProfile& cutoff) {
    if (spec.order > 3) {
        throw Error(ErrorKind::PreconditionViolation, "cutoff representatives are in the graph domain only for m <= 3");
    }
    const Eigen::Index n = static_cast<Eigen::Index>(basis.size());
    RepresentativeGram g{CMatrix::Zero(n, n), CMatrix::Zero(n, n), CMatrix::Zero(n, n)};
    const double m = spec.order;
    const double a = cutoff.flat_end;
    const double b = cutoff.support_end;
    const double tol = cutoff.quadrature_tol;
    const double twopi = 2.0 * kPi;

    for (Eigen::Index p = 0; p < n; ++p) {
        for (Eigen::Index q = 0; q < n; ++q) {
            const SingEntry& ep = basis[static_cast<std::size_t>(p)];
            const SingEntry& eq = basis[static_cast<std::size_t>(q)];
            if (ep.mode != eq.mode) continue;
            const auto fp = [&](double x) { return representative_value(ep, cutoff, x); };
            const auto fq = [&](double x) { return representative_value(eq, cutoff, x); };
            const auto ap = [&](double x) { return representative_image(spec, ep, cutoff, x); };
            const auto aq = [&](double x) { return representative_image(spec, eq, cutoff, x); };

            if (q >= p) {
                // <omega phi_q, omega phi_p>: exact on [0, a], quadrature on [a, b].
                const Complex s = m + Complex(0.0, 1.0) * (eq.sigma - std::conj(ep.sigma));
                Complex v = log_power_moment(s, ep.log_power + eq.log_power, a);
                v += integrate([&](double x) { return fq(x) * std::conj(fp(x)) * std::pow(x, m - 1.0); }, a, b, tol);
                g.l2(p, q) = twopi * v;
                g.l2(q, p) = std::conj(g.l2(p, q));

                const Complex w =
                    integrate([&](double x) { return aq(x) * std::conj(ap(x)) * std::pow(x, m - 1.0); }, a, b, tol);
                g.op(p, q) = twopi * w;
                g.op(q, p) = std::conj(g.op(p, q));
            }
            g.cross(p, q) =
                twopi * integrate([&](double x) { return ap(x) * std::conj(fq(x)) * std::pow(x, m - 1.0); }, a, b, tol);
        }
    }
    return g;
}

}  // namespace coneray
