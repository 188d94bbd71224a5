#include "coneray/resolvent_lab.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <random>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <fmt/format.h>

#include "coneray/bessel.hpp"
#include "coneray/errors.hpp"

namespace coneray {

namespace {

Complex det2(Complex a0, Complex a1, Complex b0, Complex b1) { return a0 * b1 - a1 * b0; }

void require_family(const WedgeModel& model) {
    bool higher = false;
    for (int l = 1; l < static_cast<int>(model.spec().levels.size()); ++l) {
        for (int k = -model.spec().mode_bound; k <= model.spec().mode_bound; ++k)
            higher = higher || !model.spec().levels[static_cast<std::size_t>(l)].at(k).is_zero();
    }
    if (!model.laplacian_family() || model.order() != 2 || higher) {
        throw Error(ErrorKind::PreconditionViolation, "resolvent lab needs a second-order Laplacian-family spec");
    }
}

double tail_mode_bound(Complex lambda_hat) {
    const double dist = lambda_hat.real() <= 0.0 ? std::abs(lambda_hat) : std::abs(lambda_hat.imag());
    return 1.0 / dist;
}

// D cap E_k for every mode block; throws unless D splits into one line per two-dimensional block.
std::map<int, CVector> mode_data(const DomainSubspace& D) {
    const SingBasis& basis = D.basis();
    const CMatrix Q = D.orthonormal();
    const Eigen::Index d = Q.cols();
    std::map<int, CVector> out;
    Eigen::Index total = 0;
    for (int k : basis.modes()) {
        const auto idx = basis.mode_indices(k);
        std::vector<Eigen::Index> rest;
        for (std::size_t r = 0; r < basis.size(); ++r) {
            if (std::find(idx.begin(), idx.end(), r) == idx.end()) rest.push_back(static_cast<Eigen::Index>(r));
        }
        CMatrix null;
        if (d == 0) {
            null = CMatrix::Zero(0, 0);
        } else if (rest.empty()) {
            null = CMatrix::Identity(d, d);
        } else {
            CMatrix R(static_cast<Eigen::Index>(rest.size()), d);
            for (std::size_t r = 0; r < rest.size(); ++r) R.row(static_cast<Eigen::Index>(r)) = Q.row(rest[r]);
            Eigen::JacobiSVD<CMatrix> svd(R, Eigen::ComputeFullV);
            const auto& sv = svd.singularValues();
            Eigen::Index rank = 0;
            for (Eigen::Index i = 0; i < sv.size(); ++i) rank += sv(i) > 1e-10 ? 1 : 0;
            null = svd.matrixV().rightCols(d - rank);
        }
        total += null.cols();
        if (idx.size() != 2 || null.cols() != 1) {
            throw Error(ErrorKind::PreconditionViolation,
                        fmt::format("domain does not split into one line in mode {}", k));
        }
        const CVector full = Q * null.col(0);
        CVector local(2);
        local << full(static_cast<Eigen::Index>(idx[0])), full(static_cast<Eigen::Index>(idx[1]));
        out[k] = local;
    }
    if (total != d) throw Error(ErrorKind::PreconditionViolation, "domain couples different modes");
    return out;
}

Complex regular_solution(const ModeGreen& g, const BesselIK& b) {
    return g.beta == Complex(0.0, 0.0) ? b.i : b.i + g.beta * b.k;
}

using GreenKey = std::array<double, 5>;

GreenKey key_of(const ModeGreen& g) { return {g.nu, g.z.real(), g.z.imag(), g.beta.real(), g.beta.imag()}; }

struct ModeArrays {
    std::vector<Complex> u1, u2;
    std::vector<double> s;
};

ModeArrays mode_arrays(const ModeGreen& g, const NystromMesh& mesh) {
    const auto [x, w] = geometric_mesh(mesh);
    ModeArrays a;
    a.u1.resize(x.size());
    a.u2.resize(x.size());
    a.s.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const BesselIK b = bessel_ik(g.nu, g.z * x[i]);
        a.u1[i] = regular_solution(g, b);
        a.u2[i] = b.k;
        a.s[i] = std::sqrt(w[i] * x[i]);
    }
    return a;
}

void apply_kernel(const ModeArrays& a, const std::vector<Complex>& v, std::vector<Complex>& out) {
    const std::size_t n = v.size();
    std::vector<Complex> back(n + 1, Complex(0.0, 0.0));
    for (std::size_t i = n; i-- > 0;) back[i] = back[i + 1] + a.u2[i] * a.s[i] * v[i];
    Complex fwd(0.0, 0.0);
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        fwd += a.u1[i] * a.s[i] * v[i];
        out[i] = a.s[i] * (a.u2[i] * fwd + a.u1[i] * back[i + 1]);
    }
}

double power_norm(const ModeArrays& a, const NystromMesh& mesh, int restarts) {
    const std::size_t n = a.s.size();
    double best = 0.0;
    for (int r = 0; r < std::max(1, restarts); ++r) {
        std::mt19937 rng(1234u + static_cast<unsigned>(r));
        std::normal_distribution<double> nd;
        std::vector<Complex> v(n), mv, tmp;
        for (auto& c : v) c = Complex(nd(rng), nd(rng));
        double sigma = 0.0;
        for (int it = 0; it < mesh.max_iterations; ++it) {
            double nv = 0.0;
            for (const auto& c : v) nv += std::norm(c);
            nv = std::sqrt(nv);
            for (auto& c : v) c /= nv;
            apply_kernel(a, v, mv);
            double nm = 0.0;
            for (const auto& c : mv) nm += std::norm(c);
            const double next = std::sqrt(nm);
            // M is complex symmetric, so M^* w = conj(M conj(w)).
            for (auto& c : mv) c = std::conj(c);
            apply_kernel(a, mv, tmp);
            for (std::size_t i = 0; i < n; ++i) v[i] = std::conj(tmp[i]);
            const bool done = it > 0 && std::abs(next - sigma) <= mesh.power_tol * next;
            sigma = next;
            if (done) break;
        }
        best = std::max(best, sigma);
    }
    return best;
}

struct ModeNorm {
    double norm = 0.0;
    double uncertainty = 0.0;
    double refinement_change = 0.0;
};

ModeNorm mode_norm_checked(const ModeGreen& g, const NystromMesh& mesh) {
    ModeNorm out;
    out.norm = power_norm(mode_arrays(g, mesh), mesh, mesh.restarts);
    if (mesh.refinement_check) {
        NystromMesh fine = mesh;
        fine.nodes = 2 * mesh.nodes;
        fine.smallest_cell = 0.5 * mesh.smallest_cell;
        const double nf = power_norm(mode_arrays(g, fine), fine, 1);
        out.refinement_change = std::abs(nf - out.norm) / out.norm;
        if (out.refinement_change > mesh.refinement_tol) {
            throw Error(ErrorKind::MeshRefinementNeeded,
                        fmt::format("mode {} norm changes by {:.3g} under refinement", g.mode, out.refinement_change));
        }
        NystromMesh half = mesh;
        half.x_max = 0.5 * mesh.x_max;
        const double nh = power_norm(mode_arrays(g, half), half, 1);
        out.uncertainty = std::abs(out.norm - nh) + std::abs(nf - out.norm);
    }
    return out;
}

using NormCache = std::map<GreenKey, ModeNorm>;

ResolventNorm resolvent_norm_impl(const WedgeModel& model, const DomainSubspace& D, Complex lambda, int k_max,
                                  const NystromMesh& mesh, NormCache& cache) {
    require_family(model);
    if (lambda == Complex(0.0, 0.0)) throw Error(ErrorKind::PreconditionViolation, "lambda must be nonzero");
    if (k_max < 0) k_max = model.spec().mode_bound;
    k_max = std::min(k_max, model.spec().mode_bound);
    const UnitReduction red = reduce_unit_modulus(D, lambda, model.order());
    const auto greens = mode_greens(model, red.domain, red.lambda_hat, k_max);
    ResolventNorm out;
    out.tail_bound = tail_mode_bound(red.lambda_hat);
    double unit = out.tail_bound;
    std::vector<std::pair<double, double>> bands;
    auto lookup = [&](const ModeGreen& g) -> const ModeNorm& {
        auto it = cache.find(key_of(g));
        if (it == cache.end()) it = cache.emplace(key_of(g), mode_norm_checked(g, mesh)).first;
        return it->second;
    };
    for (const auto& g : greens) {
        if (g.mode < 0) continue;
        double nm = 0.0;
        // +k and -k share a Green kernel unless only one of them carries a datum.
        for (const auto& h : greens) {
            if (h.mode != g.mode && !(h.mode == -g.mode)) continue;
            const ModeNorm& mn = lookup(h);
            nm = std::max(nm, mn.norm);
            bands.emplace_back(mn.norm, mn.uncertainty);
            out.refinement_change = std::max(out.refinement_change, mn.refinement_change);
        }
        out.mode_norms.emplace_back(g.mode, nm);
        unit = std::max(unit, nm);
    }
    double unc = 0.0;
    for (const auto& [n, u] : bands) unc = std::max(unc, n + u - unit);
    const double r = std::abs(lambda);
    out.unit_value = unit;
    out.value = unit / r;
    out.uncertainty = unc / r;
    return out;
}

template <class F>
double gk(F f, double a, double b) {
    if (!(b > a)) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-13);
}

Complex complex_gk(const std::function<Complex(double)>& f, double a, double b) {
    return {gk([&](double t) { return f(t).real(); }, a, b), gk([&](double t) { return f(t).imag(); }, a, b)};
}

}  // namespace

UnitReduction reduce_unit_modulus(const DomainSubspace& D, Complex lambda, int order) {
    if (lambda == Complex(0.0, 0.0)) throw Error(ErrorKind::PreconditionViolation, "lambda must be nonzero");
    const double r = std::abs(lambda);
    const double rho = std::pow(r, 1.0 / order);
    return {translate(D, rho), lambda / r, rho};
}

std::pair<std::vector<double>, std::vector<double>> geometric_mesh(const NystromMesh& mesh) {
    if (mesh.nodes < 2 || !(mesh.smallest_cell > 0.0) || !(mesh.x_max > mesh.smallest_cell * mesh.nodes)) {
        throw Error(ErrorKind::PreconditionViolation, "invalid Nystrom mesh");
    }
    const int n = mesh.nodes;
    const double target = mesh.x_max / mesh.smallest_cell;
    auto total = [n](double q) { return std::expm1(n * std::log(q)) / (q - 1.0); };
    double lo = 1.0 + 1e-15, hi = 2.0;
    while (total(hi) < target) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (total(mid) < target ? lo : hi) = mid;
    }
    const double q = 0.5 * (lo + hi);
    std::vector<double> x(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n));
    double left = 0.0, cell = mesh.smallest_cell;
    for (int i = 0; i < n; ++i) {
        w[static_cast<std::size_t>(i)] = cell;
        x[static_cast<std::size_t>(i)] = left + 0.5 * cell;
        left += cell;
        cell *= q;
    }
    return {x, w};
}

std::vector<ModeGreen> mode_greens(const WedgeModel& model, const DomainSubspace& D, Complex lambda, int k_max) {
    require_family(model);
    model.require_background(lambda);
    if (D.ambient_dim() != model.dim()) throw Error(ErrorKind::DimensionMismatch, "domain lives in another space");
    const KernelTrace K = model.kernel_trace(lambda);
    if (static_cast<std::size_t>(K.vectors.cols()) + D.dim() != model.dim() ||
        (model.dim() > 0 && transversality_margin(D, K) < kSpectrumTol)) {
        throw Error(ErrorKind::SpectrumHit,
                    fmt::format("lambda = ({}, {}) is in the spectrum of the extension", lambda.real(), lambda.imag()));
    }
    const auto data = mode_data(D);
    const Complex z = std::sqrt(-lambda);
    std::vector<ModeGreen> out;
    for (int k = -k_max; k <= k_max; ++k) {
        ModeGreen g;
        g.mode = k;
        g.nu = model.nu(k);
        g.z = z;
        g.beta = 0.0;
        const auto it = data.find(k);
        if (it != data.end()) {
            const CVector& d = it->second;
            const BesselTrace tk = bessel_k_trace(g.nu, z);
            const Complex i0 = g.nu == 0.0 ? Complex(1.0, 0.0) : Complex(0.0, 0.0);
            const Complex i1 = g.nu == 0.0 ? Complex(0.0, 0.0) : bessel_i_leading(g.nu, z);
            const Complex dk = det2(tk.first, tk.second, d(0), d(1));
            if (std::abs(dk) < kSpectrumTol * std::hypot(std::abs(tk.first), std::abs(tk.second)) * d.norm()) {
                throw Error(ErrorKind::SpectrumHit, fmt::format("mode {} decaying solution satisfies the domain", k));
            }
            g.beta = -det2(i0, i1, d(0), d(1)) / dk;
            g.carries_datum = true;
        }
        out.push_back(g);
    }
    return out;
}

double nystrom_mode_norm(const ModeGreen& g, const NystromMesh& mesh) {
    return power_norm(mode_arrays(g, mesh), mesh, mesh.restarts);
}

ResolventNorm resolvent_norm(const WedgeModel& model, const DomainSubspace& D, Complex lambda, int k_max,
                             const NystromMesh& mesh) {
    NormCache cache;
    return resolvent_norm_impl(model, D, lambda, k_max, mesh, cache);
}

std::vector<Complex> apply_resolvent(const WedgeModel& model, const DomainSubspace& D, Complex lambda, int mode,
                                     const std::function<Complex(double)>& f, double f_support,
                                     const std::vector<double>& xs) {
    const int kb = model.spec().mode_bound;
    if (mode < -kb || mode > kb) throw Error(ErrorKind::PreconditionViolation, "mode out of range");
    const auto greens = mode_greens(model, D, lambda, kb);
    const ModeGreen& g = greens[static_cast<std::size_t>(mode + kb)];
    auto u1 = [&](double y) {
        return regular_solution(g, bessel_ik(g.nu, g.z * y));
    };
    auto u2 = [&](double y) { return bessel_k(g.nu, g.z * y); };
    std::vector<Complex> out;
    for (double x : xs) {
        const double a = std::min(x, f_support);
        const Complex left = complex_gk([&](double y) { return u1(y) * f(y) * y; }, 0.0, a);
        const Complex right = x < f_support ? complex_gk([&](double y) { return u2(y) * f(y) * y; }, x, f_support)
                                            : Complex(0.0, 0.0);
        out.push_back(u2(x) * left + u1(x) * right);
    }
    return out;
}

ScanResult ray_scan(const WedgeModel& model, const DomainSubspace& D, Complex lambda_hat, double log10_min,
                    double decades, int points_per_decade, const NystromMesh& mesh) {
    if (!(decades > 0.0) || points_per_decade < 1) throw Error(ErrorKind::InvalidProbe, "empty scan range");
    const Complex dir = lambda_hat / std::abs(lambda_hat);
    model.require_background(dir);
    const auto count = static_cast<std::size_t>(std::lround(decades * points_per_decade)) + 1;
    const auto grid = log_grid(std::pow(10.0, log10_min), std::pow(10.0, log10_min + decades), count);
    double theta = std::arg(dir) * 180.0 / kPi;
    if (theta < 0.0) theta += 360.0;

    ScanResult out;
    NormCache cache;
    std::vector<double> lx, ly, ly0;
    for (double r : grid) {
        ScanRow row;
        row.abs_lambda = r;
        row.theta_deg = theta;
        try {
            const ResolventNorm rn = resolvent_norm_impl(model, D, r * dir, -1, mesh, cache);
            row.norm = rn.value;
            row.lambda_times_norm = r * rn.value;
            row.uncertainty = rn.uncertainty;
            lx.push_back(std::log(r));
            ly.push_back(std::log(row.lambda_times_norm));
            ly0.push_back(std::log(row.norm));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::SpectrumHit) throw;
            row.spectrum_hit = true;
            row.norm = std::numeric_limits<double>::infinity();
            row.lambda_times_norm = row.norm;
            ++out.spectrum_hits;
        }
        std::vector<double> wx, wy;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            if (lx[i] >= std::log(r) - std::log(10.0) - 1e-12) {
                wx.push_back(lx[i]);
                wy.push_back(ly[i]);
            }
        }
        row.slope_running = wx.size() >= 2 ? fit_slope(wx, wy) : 0.0;
        out.rows.push_back(row);
    }
    if (lx.size() >= 2) {
        out.slope = fit_slope(lx, ly);
        out.slope_without_factor = fit_slope(lx, ly0);
        double tv = 0.0, top = 0.0;
        for (std::size_t i = 0; i < ly.size(); ++i) {
            top = std::max(top, std::exp(ly[i]));
            if (i > 0) tv += std::abs(std::exp(ly[i]) - std::exp(ly[i - 1]));
        }
        out.total_variation = tv / top;
    }
    out.minimal_growth = out.spectrum_hits == 0 && lx.size() >= 2 && std::abs(out.slope) < kTailSlopeThreshold;
    try {
        out.criterion_bounded = ray_verdict_fixed_norm(model, D, dir).bounded;
    } catch (const Error&) {
        out.criterion_bounded = false;
    }
    out.agreement = out.criterion_bounded == out.minimal_growth;
    return out;
}

void write_scan_csv(std::ostream& os, const ScanResult& scan) {
    os << "abs_lambda,theta_deg,norm,lambda_times_norm,slope_running,uncertainty\n";
    for (const auto& r : scan.rows) {
        os << fmt::format("{:.12g},{:.6f},{:.12g},{:.12g},{:.6g},{:.6g}\n", r.abs_lambda, r.theta_deg, r.norm,
                          r.lambda_times_norm, r.slope_running, r.uncertainty);
    }
}

LocalizedDecay localized_decay_check(const WedgeModel& model, const DomainSubspace& D, Complex lambda_hat,
                                     const CutoffProfile& omega1, const CutoffProfile& omega0, double log10_min,
                                     double decades, int n_max, int points_per_decade) {
    require_family(model);
    if (!(omega1.support_end < omega0.flat_end)) {
        throw Error(ErrorKind::PreconditionViolation, "cutoffs omega1 and 1 - omega0 must have separated supports");
    }
    if (!(decades > 0.0) || points_per_decade < 1 || n_max < 1) {
        throw Error(ErrorKind::InvalidProbe, "empty decay range");
    }
    const Complex dir = lambda_hat / std::abs(lambda_hat);
    const auto count = static_cast<std::size_t>(std::lround(decades * points_per_decade)) + 1;
    LocalizedDecay out;
    out.abs_lambda = log_grid(std::pow(10.0, log10_min), std::pow(10.0, log10_min + decades), count);
    boost::math::quadrature::tanh_sinh<double> ts;
    boost::math::quadrature::exp_sinh<double> es;
    std::vector<double> lx, ly;
    for (double r : out.abs_lambda) {
        const UnitReduction red = reduce_unit_modulus(D, r * dir, model.order());
        const double rho = red.rho;
        const auto greens = mode_greens(model, red.domain, red.lambda_hat, model.spec().mode_bound);
        double best = 0.0;
        for (const auto& g : greens) {
            auto near = [&](double x) {
                if (x < 1e-200) return 0.0;
                const BesselIK b = bessel_ik(g.nu, g.z * x);
                const double c = omega1.value(x / rho);
                const double v = c * c * std::norm(regular_solution(g, b)) * x;
                return std::isfinite(v) ? v : 0.0;
            };
            auto far = [&](double x) {
                if (std::abs(g.z * x) > 700.0) return 0.0;
                const double c = 1.0 - omega0.value(x / rho);
                return c * c * std::norm(bessel_k(g.nu, g.z * x)) * x;
            };
            const double a = ts.integrate(near, 0.0, rho * omega1.flat_end) +
                             gk(near, rho * omega1.flat_end, rho * omega1.support_end);
            const double s0 = rho * omega0.support_end;
            const double b = gk(far, rho * omega0.flat_end, s0) + es.integrate([&](double t) { return far(s0 + t); });
            best = std::max(best, std::sqrt(a * b));
        }
        const double norm = best / r;
        out.norms.push_back(norm);
        if (norm > 0.0) {
            lx.push_back(std::log(r));
            ly.push_back(std::log(norm));
        }
    }
    out.slope = lx.size() >= 2 ? fit_slope(lx, ly) : 0.0;
    out.all_pass = lx.size() >= 2;
    for (int n = 1; n <= n_max; ++n) {
        const bool ok = lx.size() >= 2 && out.slope <= -n + 0.2;
        out.passes.push_back(ok);
        out.all_pass = out.all_pass && ok;
    }
    return out;
}

}  // namespace coneray
