#include "coneray/wedge_kernel.hpp"

#include <array>
#include <cmath>
#include <ostream>

#include <boost/numeric/odeint.hpp>
#include <fmt/format.h>

#include "coneray/bessel.hpp"
#include "coneray/domain_flow.hpp"
#include "coneray/errors.hpp"

namespace coneray {

namespace odeint = boost::numeric::odeint;

CVector projective_normalize(const CVector& v) {
    const double n = v.norm();
    if (n == 0.0) return v;
    CVector out = v / n;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        if (std::abs(out(i)) > 1e-12) {
            const Complex phase = std::conj(out(i)) / std::abs(out(i));
            out *= phase;
            out(i) = Complex(out(i).real(), 0.0);
            break;
        }
    }
    return out;
}

namespace {

bool on_closed_positive_axis(Complex lambda) { return lambda.imag() == 0.0 && lambda.real() >= 0.0; }

}  // namespace

KernelTrace kernel_trace_closed_form(double nu, Complex lambda) {
    if (!(nu >= 0.0)) throw Error(ErrorKind::PreconditionViolation, "nu must be nonnegative");
    if (on_closed_positive_axis(lambda)) {
        throw Error(ErrorKind::OutsideBackgroundResolvent,
                    fmt::format("lambda = ({}, {}) lies on the closed positive axis", lambda.real(), lambda.imag()));
    }
    KernelTrace kt;
    kt.lambda = lambda;
    ModeSolution ms;
    ms.nu = nu;
    ms.route = "closed-form";
    if (nu >= 1.0) {
        kt.vectors = CMatrix::Zero(0, 0);
        kt.per_mode.push_back(ms);
        return kt;
    }
    const Complex z = std::sqrt(-lambda);
    const BesselTrace bt = bessel_k_trace(nu, z);
    CVector v(2);
    v << bt.first, bt.second;
    const CVector nv = projective_normalize(v);
    ms.normalization = nv(0) != Complex(0.0, 0.0) ? nv(0) / v(0) : nv(1) / v(1);
    kt.dim = 1;
    kt.vectors = nv;
    kt.per_mode.push_back(ms);
    return kt;
}

namespace {

using State = std::array<Complex, 2>;

struct FrobTerm {
    Complex exponent;
    int log_power = 0;
    Complex coef;
};

using FrobSolution = std::vector<FrobTerm>;

Complex eval_frob(const FrobSolution& f, double x) {
    const double t = std::log(x);
    Complex acc(0.0, 0.0);
    for (const auto& term : f) acc += term.coef * std::exp(term.exponent * t) * std::pow(t, term.log_power);
    return acc;
}

// P(s) = p(-i s).
Polynomial indicial_in_s(const Polynomial& p) {
    std::vector<Complex> c = p.coefficients();
    Complex f(1.0, 0.0);
    for (auto& ci : c) {
        ci *= f;
        f *= Complex(0.0, -1.0);
    }
    return Polynomial(c);
}

constexpr int kMaxSeries = 60;

bool small_enough(Complex term, Complex total, double x_hi, double re_exp) {
    return std::abs(term) * std::pow(x_hi, re_exp) < 1e-18 * std::max(1e-300, std::abs(total));
}

FrobSolution plain_series(const Polynomial& P, Complex s, Complex lambda, double x_hi) {
    FrobSolution f{{s, 0, Complex(1.0, 0.0)}};
    Complex d(1.0, 0.0);
    for (int n = 1; n <= kMaxSeries; ++n) {
        d *= lambda / P(s + 2.0 * n);
        f.push_back({s + 2.0 * n, 0, d});
        if (small_enough(d, 1.0, x_hi, 2.0 * n)) break;
    }
    return f;
}

FrobSolution double_root_log_series(const Polynomial& P, Complex s, Complex lambda, double x_hi) {
    const Polynomial dP = P.derivative();
    FrobSolution f{{s, 1, Complex(1.0, 0.0)}};
    Complex d(1.0, 0.0);
    Complex logder(0.0, 0.0);
    for (int n = 1; n <= kMaxSeries; ++n) {
        const Complex Pn = P(s + 2.0 * n);
        d *= lambda / Pn;
        logder -= dP(s + 2.0 * n) / Pn;
        f.push_back({s + 2.0 * n, 1, d});
        f.push_back({s + 2.0 * n, 0, d * logder});
        if (small_enough(d, 1.0, x_hi, 2.0 * n)) break;
    }
    return f;
}

// Second solution at the lower root s2 of a pair with s1 = s2 + 2N.
FrobSolution resonant_series(const Polynomial& P, Complex s2, int N, Complex lambda, double x_hi) {
    const Polynomial dP = P.derivative();
    const Polynomial ddP = dP.derivative();
    const Complex s1 = s2 + 2.0 * N;
    FrobSolution f;
    Complex d(1.0, 0.0);
    f.push_back({s2, 0, d});
    for (int n = 1; n < N; ++n) {
        d *= lambda / P(s2 + 2.0 * n);
        f.push_back({s2 + 2.0 * n, 0, d});
    }
    const Complex Q = dP(s1);
    const Complex Qp = 0.5 * ddP(s1);
    Complex e = d * lambda / Q;
    Complex logder = -Qp / Q;
    for (int k = 1; k < N; ++k) logder -= dP(s2 + 2.0 * k) / P(s2 + 2.0 * k);
    f.push_back({s1, 1, e});
    f.push_back({s1, 0, e * logder});
    for (int n = N + 1; n <= N + kMaxSeries; ++n) {
        const Complex Pn = P(s2 + 2.0 * n);
        e *= lambda / Pn;
        logder -= dP(s2 + 2.0 * n) / Pn;
        f.push_back({s2 + 2.0 * n, 1, e});
        f.push_back({s2 + 2.0 * n, 0, e * logder});
        if (small_enough(e, 1.0, x_hi, 2.0 * (n - N))) break;
    }
    return f;
}

struct KernelOde {
    Complex a0, a1, a2, lambda;
    void operator()(const State& y, State& dy, double t) const {
        dy[0] = y[1];
        dy[1] = (Complex(0.0, -1.0) * a1 * y[1] + a0 * y[0] - lambda * std::exp(2.0 * t) * y[0]) / a2;
    }
};

// Decaying asymptotic solution e^{-z x} x^mu sum c_k x^{-k}, returned without the exponential factor.
State decaying_start(Complex a0, Complex a1, Complex a2, Complex z, double X) {
    const Complex b = 1.0 + Complex(0.0, 1.0) * a1 / a2;
    const Complex c = -a0 / a2;
    const Complex mu = -0.5 * b;
    Complex ck(1.0, 0.0);
    Complex v = std::pow(X, mu);
    Complex vp = mu * std::pow(X, mu - 1.0);
    double last = std::abs(v);
    for (int k = 1; k < 60; ++k) {
        const Complex e = mu - double(k) + 1.0;
        ck = -ck * (e * (e - 1.0) + b * e + c) / (2.0 * z * double(k));
        const Complex term = ck * std::pow(X, mu - double(k));
        if (std::abs(term) > last) break;
        v += term;
        vp += ck * (mu - double(k)) * std::pow(X, mu - double(k) - 1.0);
        last = std::abs(term);
        if (last < 1e-18 * std::abs(v)) break;
    }
    const Complex u = v;
    const Complex ux = vp - z * v;
    return {u, X * ux};
}

ModeTrace numeric_unit(const ConeOperatorSpec& spec, const SingBasis& basis, Complex lambda, int mode,
                       const NumericKernelOptions& opt) {
    ModeTrace mt;
    mt.mode = mode;
    mt.basis_indices = basis.mode_indices(mode);
    const Polynomial& p = spec.levels[0].at(mode);
    const auto& pc = p.coefficients();
    const Complex a0 = pc[0], a1 = pc[1], a2 = pc[2];
    const Complex z = std::sqrt(-lambda / a2);
    if (!(z.real() > 0.0)) {
        throw Error(ErrorKind::OutsideBackgroundResolvent,
                    fmt::format("mode {}: no decaying solution for lambda = ({}, {})", mode, lambda.real(), lambda.imag()));
    }
    if (mt.basis_indices.empty()) return mt;

    const double X = std::max(opt.x_infinity, 14.0 / z.real());
    State y = decaying_start(a0, a1, a2, z, X);

    std::vector<double> xs = log_grid(opt.match_lo, opt.match_hi, static_cast<std::size_t>(opt.match_points));
    std::vector<double> times{std::log(X)};
    for (auto it = xs.rbegin(); it != xs.rend(); ++it) times.push_back(std::log(*it));
    std::vector<Complex> uvals(xs.size());
    const KernelOde ode{a0, a1, a2, lambda};
    auto stepper = odeint::make_controlled(1e-30, opt.rel_tol, odeint::runge_kutta_fehlberg78<State>());
    std::size_t obs = 0;
    odeint::integrate_times(stepper, ode, y, times.begin(), times.end(), -1e-3, [&](const State& s, double) {
        if (obs > 0) uvals[xs.size() - obs] = s[0];
        ++obs;
    });

    // Frobenius system at the origin.
    const Polynomial P = indicial_in_s(p);
    const auto roots = polynomial_roots(p);
    std::vector<FrobSolution> fs;
    const double x_hi = opt.match_hi;
    if (roots.size() == 1 && roots[0].multiplicity == 2) {
        const Complex s0 = Complex(0.0, 1.0) * roots[0].value;
        fs.push_back(plain_series(P, s0, lambda, x_hi));
        fs.push_back(double_root_log_series(P, s0, lambda, x_hi));
    } else if (roots.size() == 2) {
        Complex sa = Complex(0.0, 1.0) * roots[0].value;
        Complex sb = Complex(0.0, 1.0) * roots[1].value;
        if (sa.real() < sb.real()) std::swap(sa, sb);
        const Complex diff = sa - sb;
        const double half = 0.5 * diff.real();
        const int N = static_cast<int>(std::lround(half));
        fs.push_back(plain_series(P, sa, lambda, x_hi));
        if (N >= 1 && std::abs(diff - Complex(2.0 * N, 0.0)) < 1e-9) {
            fs.push_back(resonant_series(P, sb, N, lambda, x_hi));
        } else {
            fs.push_back(plain_series(P, sb, lambda, x_hi));
        }
    } else {
        throw Error(ErrorKind::ConnectionFailure, fmt::format("mode {}: unexpected indicial structure", mode));
    }

    const Eigen::Index npts = static_cast<Eigen::Index>(xs.size());
    CMatrix F(npts, 2);
    CVector rhs(npts);
    for (Eigen::Index i = 0; i < npts; ++i) {
        F(i, 0) = eval_frob(fs[0], xs[static_cast<std::size_t>(i)]);
        F(i, 1) = eval_frob(fs[1], xs[static_cast<std::size_t>(i)]);
        rhs(i) = uvals[static_cast<std::size_t>(i)];
    }
    Eigen::Vector2d scale(F.col(0).norm(), F.col(1).norm());
    CMatrix Fs = F;
    Fs.col(0) /= scale(0);
    Fs.col(1) /= scale(1);
    Eigen::JacobiSVD<CMatrix> svd(Fs, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto sv = svd.singularValues();
    mt.condition = sv(1) > 0.0 ? sv(0) / sv(1) : std::numeric_limits<double>::infinity();
    if (!(mt.condition <= opt.max_condition)) {
        throw Error(ErrorKind::ConnectionFailure,
                    fmt::format("mode {}: matching condition number {:.3e}", mode, mt.condition));
    }
    CVector cs = svd.solve(rhs);
    cs(0) /= scale(0);
    cs(1) /= scale(1);
    mt.fit_residual = (F * cs - rhs).norm() / rhs.norm();

    // Leading strip coefficients.
    CVector coords = CVector::Zero(static_cast<Eigen::Index>(mt.basis_indices.size()));
    for (std::size_t b = 0; b < mt.basis_indices.size(); ++b) {
        const SingEntry& e = basis[mt.basis_indices[b]];
        const Complex sb = Complex(0.0, 1.0) * e.sigma;
        for (int col = 0; col < 2; ++col) {
            for (const auto& term : fs[static_cast<std::size_t>(col)]) {
                if (term.log_power == e.log_power && std::abs(term.exponent - sb) < 1e-8) {
                    coords(static_cast<Eigen::Index>(b)) += cs(col) * term.coef;
                }
            }
        }
    }
    mt.contributes = coords.norm() > 1e-12 * cs.norm();
    if (mt.contributes) {
        // Unit leading Frobenius coefficient: most singular strip entry first in canonical order.
        Eigen::Index lead = 0;
        for (Eigen::Index i = 0; i < coords.size(); ++i) {
            if (basis[mt.basis_indices[static_cast<std::size_t>(i)]].sigma ==
                    basis[mt.basis_indices[0]].sigma) {
                lead = i;
            }
        }
        Complex c = coords(lead);
        if (std::abs(c) < 1e-12 * coords.norm()) c = coords.norm();
        mt.normalization = 1.0 / c;
        mt.coords = coords / c;
    } else {
        mt.coords = CVector::Zero(coords.size());
    }

    if (opt.compute_residual) {
        // (A - lambda) u by fourth-order differences on a uniform t-mesh.
        const double h = 1e-3;
        const double t0 = std::log(1e-3);
        const double t1 = std::log(std::min(X, 20.0));
        const int n = static_cast<int>((t1 - t0) / h);
        std::vector<double> tt;
        for (int i = n; i >= 0; --i) tt.push_back(t0 + h * i);
        State y2 = decaying_start(a0, a1, a2, z, X);
        std::vector<double> tfull{std::log(X)};
        tfull.insert(tfull.end(), tt.begin(), tt.end());
        std::vector<Complex> us;
        std::size_t k = 0;
        odeint::integrate_times(stepper, ode, y2, tfull.begin(), tfull.end(), -1e-3, [&](const State& s, double) {
            if (k > 0) us.push_back(s[0]);
            ++k;
        });
        std::reverse(us.begin(), us.end());
        double num = 0.0, den = 0.0;
        for (std::size_t i = 2; i + 2 < us.size(); ++i) {
            const double t = t0 + h * static_cast<double>(i);
            const Complex d1 = (-us[i + 2] + 8.0 * us[i + 1] - 8.0 * us[i - 1] + us[i - 2]) / (12.0 * h);
            const Complex d2 =
                (-us[i + 2] + 16.0 * us[i + 1] - 30.0 * us[i] + 16.0 * us[i - 1] - us[i - 2]) / (12.0 * h * h);
            const Complex au = std::exp(-2.0 * t) * (-a2 * d2 - Complex(0.0, 1.0) * a1 * d1 + a0 * us[i]);
            const double w = std::exp(2.0 * t);
            num += std::norm(au - lambda * us[i]) * w;
            den += std::norm(us[i]) * w;
        }
        mt.operator_residual = std::sqrt(num / den);
    }
    return mt;
}

}  // namespace

ModeTrace kernel_trace_numeric(const ConeOperatorSpec& spec, Complex lambda, int mode,
                               const NumericKernelOptions& options) {
    validate(spec);
    if (spec.order != 2) throw Error(ErrorKind::PreconditionViolation, "numeric kernel traces need order 2");
    if (mode < -spec.mode_bound || mode > spec.mode_bound) {
        throw Error(ErrorKind::PreconditionViolation, fmt::format("mode {} out of range", mode));
    }
    if (lambda == Complex(0.0, 0.0)) throw Error(ErrorKind::OutsideBackgroundResolvent, "lambda = 0");
    const SingBasis basis = wedge_sing_basis(spec);
    const double r = std::abs(lambda);
    if (std::abs(r - 1.0) < 1e-14) return numeric_unit(spec, basis, lambda, mode, options);

    // Reduce to unit modulus: K(lambda) = kappa(rho) K(lambda / rho^m).
    const double rho = std::pow(r, 1.0 / spec.order);
    ModeTrace mt = numeric_unit(spec, basis, lambda / r, mode, options);
    if (!mt.contributes) return mt;
    const CMatrix kap = kappa_matrix(basis, rho);
    CVector full = CVector::Zero(static_cast<Eigen::Index>(basis.size()));
    for (std::size_t b = 0; b < mt.basis_indices.size(); ++b) {
        full(static_cast<Eigen::Index>(mt.basis_indices[b])) = mt.coords(static_cast<Eigen::Index>(b));
    }
    const CVector img = kap * full;
    Complex lead = img(static_cast<Eigen::Index>(mt.basis_indices[0]));
    for (std::size_t b = 0; b < mt.basis_indices.size(); ++b) {
        mt.coords(static_cast<Eigen::Index>(b)) = img(static_cast<Eigen::Index>(mt.basis_indices[b]));
    }
    if (std::abs(lead) < 1e-300) lead = mt.coords.norm();
    mt.coords /= lead;
    return mt;
}

WedgeModel::WedgeModel(ConeOperatorSpec spec, std::optional<int> ind_min)
    : spec_(std::move(spec)), ind_min_(ind_min) {
    validate(spec_);
    basis_ = std::make_shared<const SingBasis>(wedge_sing_basis(spec_));
    nus_ = laplacian_nus(spec_);
}

double WedgeModel::nu(int mode) const {
    if (!nus_) throw Error(ErrorKind::PreconditionViolation, "spec is not in the Laplacian family");
    return (*nus_)[static_cast<std::size_t>(mode + spec_.mode_bound)];
}

int WedgeModel::ind_min() const {
    const int dimE = static_cast<int>(basis_->size());
    if (ind_min_) {
        if (*ind_min_ > 0 || *ind_min_ < -dimE) {
            throw Error(ErrorKind::IndexInconsistency,
                        fmt::format("ind_min = {} is outside [-{}, 0]", *ind_min_, dimE));
        }
        return *ind_min_;
    }
    if (!is_symmetric(spec_)) {
        throw Error(ErrorKind::IndexInconsistency, "non-symmetric spec needs a configured ind_min");
    }
    if (dimE % 2 != 0) {
        throw Error(ErrorKind::IndexInconsistency, fmt::format("symmetric spec with odd dim E = {}", dimE));
    }
    return -dimE / 2;
}

bool WedgeModel::in_background(Complex lambda) const {
    if (lambda == Complex(0.0, 0.0)) return false;
    if (nus_) return !on_closed_positive_axis(lambda);
    if (spec_.order != 2) return false;
    for (int k = -spec_.mode_bound; k <= spec_.mode_bound; ++k) {
        const Complex a2 = spec_.levels[0].at(k).coefficients()[2];
        if (!(std::sqrt(-lambda / a2).real() > 0.0)) return false;
    }
    return true;
}

void WedgeModel::require_background(Complex lambda) const {
    if (!in_background(lambda)) {
        throw Error(ErrorKind::OutsideBackgroundResolvent,
                    fmt::format("lambda = ({}, {}) is outside the background resolvent set", lambda.real(),
                                lambda.imag()));
    }
}

KernelTrace WedgeModel::kernel_trace(Complex lambda, const NumericKernelOptions& options) const {
    require_background(lambda);
    const SingBasis& basis = *basis_;
    const Eigen::Index n = static_cast<Eigen::Index>(basis.size());
    KernelTrace kt;
    kt.lambda = lambda;
    std::vector<CVector> cols;
    for (int mode : basis.modes()) {
        const auto idx = basis.mode_indices(mode);
        CVector full = CVector::Zero(n);
        ModeSolution ms;
        ms.mode = mode;
        if (nus_) {
            const double nu = this->nu(mode);
            if (nu >= 0.5 * spec_.order) continue;
            const Complex z = std::sqrt(-lambda);
            const BesselTrace bt = bessel_k_trace(nu, z);
            full(static_cast<Eigen::Index>(idx[0])) = bt.first;
            full(static_cast<Eigen::Index>(idx[1])) = bt.second;
            ms.nu = nu;
            ms.route = "closed-form";
        } else {
            const ModeTrace mt = kernel_trace_numeric(spec_, lambda, mode, options);
            if (!mt.contributes) continue;
            for (std::size_t b = 0; b < idx.size(); ++b) {
                full(static_cast<Eigen::Index>(idx[b])) = mt.coords(static_cast<Eigen::Index>(b));
            }
            ms.route = "numeric";
            ms.fit_residual = mt.fit_residual;
            ms.condition = mt.condition;
        }
        const CVector nv = projective_normalize(full);
        const Eigen::Index lead = static_cast<Eigen::Index>(idx[0]);
        ms.normalization = full(lead) != Complex(0.0, 0.0) ? nv(lead) / full(lead) : Complex(1.0, 0.0);
        cols.push_back(nv);
        kt.per_mode.push_back(ms);
    }
    kt.dim = cols.size();
    kt.vectors = CMatrix::Zero(n, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) kt.vectors.col(static_cast<Eigen::Index>(c)) = cols[c];
    if (kt.dim > 0) {
        Eigen::JacobiSVD<CMatrix> svd(kt.vectors);
        if (svd.singularValues().minCoeff() <= 1e-10) {
            throw Error(ErrorKind::ConnectionFailure, "kernel trace vectors are linearly dependent");
        }
    }
    return kt;
}

std::vector<SectorDescription> background_sectors(const WedgeModel& model, int probe_points) {
    if (probe_points <= 0) throw Error(ErrorKind::InvalidProbe, "probe grid is empty");
    if (model.laplacian_family()) {
        SectorDescription s;
        s.theta0 = kPi;
        s.half_aperture = std::nextafter(kPi, 0.0);
        s.certified = true;
        return {s};
    }
    const int n = probe_points;
    std::vector<bool> pass(static_cast<std::size_t>(n), false);
    const std::size_t dimE = model.dim();
    for (int j = 0; j < n; ++j) {
        const double th = 2.0 * kPi * j / n;
        const Complex lam = std::polar(1.0, th);
        if (!model.in_background(lam)) continue;
        try {
            const KernelTrace kt = model.kernel_trace(lam);
            bool ok = true;
            if (model.configured_ind_min()) {
                ok = static_cast<long>(kt.dim) == static_cast<long>(dimE) + *model.configured_ind_min();
            } else if (is_symmetric(model.spec())) {
                ok = 2 * kt.dim == dimE;
            }
            pass[static_cast<std::size_t>(j)] = ok;
        } catch (const Error&) {
            pass[static_cast<std::size_t>(j)] = false;
        }
    }
    std::vector<SectorDescription> out;
    const double step = 2.0 * kPi / n;
    bool all = true;
    for (bool b : pass) all = all && b;
    if (all) {
        SectorDescription s;
        s.theta0 = kPi;
        s.half_aperture = std::nextafter(kPi, 0.0);
        return {s};
    }
    int start = 0;
    while (pass[static_cast<std::size_t>(start)]) ++start;  // a failing probe exists
    for (int off = 1; off < n; ++off) {
        const int j = (start + off) % n;
        const int prev = (j + n - 1) % n;
        if (!pass[static_cast<std::size_t>(j)] || pass[static_cast<std::size_t>(prev)]) continue;
        int len = 0;
        while (pass[static_cast<std::size_t>((j + len) % n)]) ++len;
        SectorDescription s;
        const double lo = step * j;
        const double hi = step * (j + len - 1);
        s.theta0 = std::fmod(0.5 * (lo + hi), 2.0 * kPi);
        s.half_aperture = 0.5 * (hi - lo);
        out.push_back(s);
    }
    return out;
}

void write_kernel_traces_csv(std::ostream& os, const SingBasis& basis, const std::vector<KernelTrace>& traces) {
    os << "re_lambda,im_lambda,mode,basis_index,re_coord,im_coord\n";
    for (const auto& kt : traces) {
        for (Eigen::Index c = 0; c < kt.vectors.cols(); ++c) {
            for (Eigen::Index i = 0; i < kt.vectors.rows(); ++i) {
                const Complex v = kt.vectors(i, c);
                if (v == Complex(0.0, 0.0)) continue;
                os << fmt::format("{:.15g},{:.15g},{},{},{:.15g},{:.15g}\n", kt.lambda.real(), kt.lambda.imag(),
                                  basis[static_cast<std::size_t>(i)].mode, i, v.real(), v.imag());
            }
        }
    }
}

}  // namespace coneray
