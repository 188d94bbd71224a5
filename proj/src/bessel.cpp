#include "coneray/bessel.hpp"

#include <cmath>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>

#include "coneray/errors.hpp"

namespace coneray {

namespace {

constexpr int kMaxIt = 200000;
constexpr double kEps = 1e-16;
constexpr double kFpMin = 1e-300;

// gam1 = (1/G(1-mu) - 1/G(1+mu)) / (2 mu), gam2 = (1/G(1-mu) + 1/G(1+mu)) / 2.
void temme_gammas(double mu, double& gam1, double& gam2, double& gampl, double& gammi) {
    const double gp = boost::math::tgamma1pm1(mu);
    const double gm = boost::math::tgamma1pm1(-mu);
    const double rp = -gp / (1.0 + gp);  // 1/G(1+mu) - 1
    const double rm = -gm / (1.0 + gm);  // 1/G(1-mu) - 1
    gampl = 1.0 + rp;
    gammi = 1.0 + rm;
    gam1 = std::abs(mu) < 1e-12 ? -kEulerGamma : (rm - rp) / (2.0 * mu);
    gam2 = 0.5 * (gammi + gampl);
}

}  // namespace

BesselIK bessel_ik(double nu, Complex x) {
    if (!(nu >= 0.0) || !(x.real() > 0.0)) {
        throw Error(ErrorKind::PreconditionViolation, "bessel_ik needs nu >= 0 and Re w > 0");
    }
    const int nl = static_cast<int>(nu + 0.5);
    const double xmu = nu - nl;
    const double xmu2 = xmu * xmu;
    const Complex xi = 1.0 / x;
    const Complex xi2 = 2.0 * xi;

    // CF1 for I'_nu / I_nu.
    Complex h = nu * xi;
    if (std::abs(h) < kFpMin) h = kFpMin;
    Complex b = xi2 * nu;
    Complex d = 0.0;
    Complex c = h;
    int it = 1;
    for (; it <= kMaxIt; ++it) {
        b += xi2;
        d = b + d;
        if (std::abs(d) < kFpMin) d = kFpMin;
        d = 1.0 / d;
        c = b + 1.0 / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        const Complex del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    if (it > kMaxIt) throw Error(ErrorKind::PreconditionViolation, "Bessel CF1 did not converge");

    Complex ril = kFpMin;
    Complex ripl = h * ril;
    const Complex ril1 = ril;
    const Complex rip1 = ripl;
    Complex fact = nu * xi;
    for (int l = nl; l >= 1; --l) {
        const Complex ritemp = fact * ril + ripl;
        fact -= xi;
        ripl = fact * ritemp + ril;
        ril = ritemp;
    }
    const Complex f = ripl / ril;

    Complex rkmu, rk1;
    if (std::abs(x) < 2.0) {
        // Temme series.
        const Complex x2 = 0.5 * x;
        const double pimu = kPi * xmu;
        const double fct = std::abs(pimu) < kEps ? 1.0 : pimu / std::sin(pimu);
        const Complex dd = -std::log(x2);
        const Complex e = xmu * dd;
        const Complex fact2 = std::abs(e) < kEps ? Complex(1.0) : std::sinh(e) / e;
        double gam1, gam2, gampl, gammi;
        temme_gammas(xmu, gam1, gam2, gampl, gammi);
        Complex ff = fct * (gam1 * std::cosh(e) + gam2 * fact2 * dd);
        Complex sum = ff;
        const Complex ee = std::exp(e);
        Complex p = 0.5 * ee / gampl;
        Complex q = 0.5 / (ee * gammi);
        Complex cc = 1.0;
        const Complex dx = x2 * x2;
        Complex sum1 = p;
        int i = 1;
        for (; i <= kMaxIt; ++i) {
            ff = (double(i) * ff + p + q) / (double(i) * i - xmu2);
            cc *= dx / double(i);
            p /= (double(i) - xmu);
            q /= (double(i) + xmu);
            const Complex del = cc * ff;
            sum += del;
            const Complex del1 = cc * (p - double(i) * ff);
            sum1 += del1;
            if (std::abs(del) < std::abs(sum) * kEps) break;
        }
        if (i > kMaxIt) throw Error(ErrorKind::PreconditionViolation, "Bessel Temme series did not converge");
        rkmu = sum;
        rk1 = sum1 * xi2;
    } else {
        // Steed's CF2.
        Complex bb = 2.0 * (1.0 + x);
        Complex dd = 1.0 / bb;
        Complex hh = dd;
        Complex delh = dd;
        Complex q1 = 0.0;
        Complex q2 = 1.0;
        const double a1 = 0.25 - xmu2;
        Complex q = a1;
        Complex cc = a1;
        double a = -a1;
        Complex s = 1.0 + q * delh;
        int i = 2;
        for (; i <= kMaxIt; ++i) {
            a -= 2.0 * (i - 1);
            cc = -a * cc / double(i);
            const Complex qnew = (q1 - bb * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += cc * qnew;
            bb += 2.0;
            dd = 1.0 / (bb + a * dd);
            delh = (bb * dd - 1.0) * delh;
            hh += delh;
            const Complex dels = q * delh;
            s += dels;
            if (std::abs(dels / s) < kEps) break;
        }
        if (i > kMaxIt) throw Error(ErrorKind::PreconditionViolation, "Bessel CF2 did not converge");
        hh = a1 * hh;
        rkmu = std::sqrt(kPi / (2.0 * x)) * std::exp(-x) / s;
        rk1 = rkmu * (xmu + x + 0.5 - hh) * xi;
    }
    const Complex rkmup = xmu * xi * rkmu - rk1;
    const Complex rimu = xi / (f * rkmu - rkmup);
    BesselIK out;
    out.i = (rimu * ril1) / ril;
    out.ip = (rimu * rip1) / ril;
    if (std::abs(x) < 2.0) {
        // The Wronskian route cancels for small x when xmu < 0.
        const Complex q = 0.25 * x * x;
        Complex term = std::pow(0.5 * x, nu) / boost::math::tgamma(nu + 1.0);
        Complex si = term;
        Complex sp = nu * term;
        for (int k = 1; k <= kMaxIt; ++k) {
            term *= q / (double(k) * (nu + k));
            si += term;
            sp += (2.0 * k + nu) * term;
            if (std::abs(term) < kEps * std::abs(si)) break;
        }
        out.i = si;
        out.ip = sp * xi;
    }
    for (int i = 1; i <= nl; ++i) {
        const Complex rktemp = (xmu + i) * xi2 * rk1 + rkmu;
        rkmu = rk1;
        rk1 = rktemp;
    }
    out.k = rkmu;
    out.kp = nu * xi * rkmu - rk1;
    return out;
}

Complex bessel_k(double nu, Complex w) { return bessel_ik(nu, w).k; }
Complex bessel_i(double nu, Complex w) { return bessel_ik(nu, w).i; }

BesselTrace bessel_k_trace(double nu, Complex z) {
    if (nu == 0.0) {
        return {-std::log(0.5 * z) - kEulerGamma, Complex(-1.0, 0.0)};
    }
    const Complex half = 0.5 * z;
    return {0.5 * std::tgamma(nu) * std::pow(half, -nu), 0.5 * std::tgamma(-nu) * std::pow(half, nu)};
}

Complex bessel_i_leading(double nu, Complex z) {
    if (nu == 0.0) return 1.0;
    return std::pow(0.5 * z, nu) / std::tgamma(1.0 + nu);
}

}  // namespace coneray
