#include "coneray/ray_criterion.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "coneray/errors.hpp"
#include "coneray/representatives.hpp"

namespace coneray {

std::string to_string(VerdictMethod m) {
    switch (m) {
        case VerdictMethod::FixedNorm: return "fixed-norm";
        case VerdictMethod::LambdaNorm: return "lambda-norm";
        case VerdictMethod::Geometric: return "geometric";
        case VerdictMethod::Shortcut: return "shortcut";
    }
    return "unknown";
}

std::string to_string(VerdictReason r) {
    switch (r) {
        case VerdictReason::None: return "none";
        case VerdictReason::TailGrowth: return "TailGrowth";
        case VerdictReason::SpectralObstruction: return "SpectralObstruction";
        case VerdictReason::TailSpectrumHit: return "TailSpectrumHit";
        case VerdictReason::OmegaMeetsBadSet: return "OmegaMeetsBadSet";
        case VerdictReason::NotInvariant: return "NotInvariant";
    }
    return "unknown";
}

namespace {

CMatrix orthonormal_columns(const CMatrix& V) {
    Eigen::HouseholderQR<CMatrix> qr(V);
    return qr.householderQ() * CMatrix::Identity(V.rows(), V.cols());
}

struct ProjectionResult {
    bool hit = false;
    bool near = false;
    CMatrix P;
};

ProjectionResult try_projection(const KernelTrace& K, const DomainSubspace& D) {
    ProjectionResult r;
    const Eigen::Index n = static_cast<Eigen::Index>(D.ambient_dim());
    const Eigen::Index k = K.vectors.cols();
    const Eigen::Index d = static_cast<Eigen::Index>(D.dim());
    if (K.vectors.rows() != n) throw Error(ErrorKind::DimensionMismatch, "kernel trace and domain ambient differ");
    if (k + d != n) {
        r.hit = true;
        return r;
    }
    if (n == 0) {
        r.P = CMatrix::Zero(0, 0);
        return r;
    }
    const double margin = transversality_margin(D, K);
    if (margin < kSpectrumTol) {
        r.hit = true;
        return r;
    }
    r.near = margin < 10.0 * kSpectrumTol;
    CMatrix B(n, n);
    if (k > 0) B.leftCols(k) = orthonormal_columns(K.vectors);
    if (d > 0) B.rightCols(d) = D.orthonormal();
    CMatrix E = CMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < k; ++i) E(i, i) = 1.0;
    r.P = B * E * B.inverse();
    return r;
}

void apply_tail_rule(RayVerdict& v, double m) {
    const std::size_t N = v.grid.size();
    const std::size_t tail_start = N - std::max<std::size_t>(1, N / 4);
    std::size_t tail_hits = 0;
    for (std::size_t i = tail_start; i < N; ++i) tail_hits += std::isfinite(v.norm_samples[i]) ? 0 : 1;

    std::size_t last_hit = N;
    double cmax = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        if (!std::isfinite(v.norm_samples[i])) {
            last_hit = i;
            v.spectrum_hits.push_back(v.grid[i]);
        } else {
            cmax = std::max(cmax, v.norm_samples[i]);
        }
    }
    v.C_estimate = cmax;
    const std::size_t first_good = (last_hit == N) ? 0 : last_hit + 1;
    v.R_estimate = first_good < N ? std::pow(v.grid[first_good], m) : std::numeric_limits<double>::infinity();

    const double top = std::log10(v.grid.back());
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < N; ++i) {
        if (std::log10(v.grid[i]) >= top - 1.0 - 1e-12 && std::isfinite(v.norm_samples[i])) {
            xs.push_back(std::log10(v.grid[i]));
            ys.push_back(std::log(v.norm_samples[i]));
        }
    }
    v.tail_slope = fit_slope(xs, ys);
    if (tail_hits > 0) {
        v.bounded = false;
        v.reason = (10 * tail_hits > (N - tail_start)) ? VerdictReason::SpectralObstruction
                                                       : VerdictReason::TailSpectrumHit;
    } else if (!(v.tail_slope < kTailSlopeThreshold)) {
        v.bounded = false;
        v.reason = VerdictReason::TailGrowth;
    } else {
        v.bounded = true;
        v.reason = VerdictReason::None;
    }
}

}  // namespace

CMatrix projection_onto_kernel(const KernelTrace& K, const DomainSubspace& D) {
    ProjectionResult r = try_projection(K, D);
    if (r.hit) {
        throw Error(ErrorKind::SpectrumHit,
                    fmt::format("lambda = ({}, {}) is an eigenvalue of the extension", K.lambda.real(),
                                K.lambda.imag()));
    }
    return r.P;
}

CMatrix lambda_gram(Complex lambda, const WedgeModel& model, const CutoffProfile& cutoff) {
    if (lambda == Complex(0.0, 0.0)) throw Error(ErrorKind::PreconditionViolation, "lambda must be nonzero");
    const RepresentativeGram g = representative_gram(model.spec(), model.basis(), cutoff);
    return g.l2 + g.op / std::norm(lambda);
}

CMatrix unit_gram(const WedgeModel& model) {
    return lambda_gram(Complex(1.0, 0.0), model, CutoffProfile::standard());
}

CMatrix lambda_gram_dilated(Complex lambda, const WedgeModel& model, const CMatrix& unit) {
    if (lambda == Complex(0.0, 0.0)) throw Error(ErrorKind::PreconditionViolation, "lambda must be nonzero");
    const double s = std::pow(std::abs(lambda), 1.0 / model.order());
    const CMatrix K = kappa_matrix(model.basis(), 1.0 / s);
    return K.adjoint() * unit * K;
}

double lambda_norm(const CVector& u, Complex lambda, const WedgeModel& model, const CutoffProfile& cutoff) {
    const CMatrix G = lambda_gram(lambda, model, cutoff);
    const double v = (u.adjoint() * G * u)(0, 0).real();
    return std::sqrt(std::max(0.0, v));
}

double gram_operator_norm(const CMatrix& A, const CMatrix& gram) {
    if (A.rows() == 0) return 0.0;
    const CMatrix H = 0.5 * (gram + gram.adjoint());
    Eigen::LLT<CMatrix> llt(H);
    if (llt.info() != Eigen::Success) throw Error(ErrorKind::QuadratureFailure, "Gram matrix is not positive definite");
    const CMatrix Lh = llt.matrixL().adjoint();
    // || L^* A L^{-*} ||_2
    const CMatrix M = Lh * A * Lh.inverse();
    Eigen::JacobiSVD<CMatrix> svd(M);
    return svd.singularValues()(0);
}

std::vector<double> modulus_grid_for(const std::vector<double>& rho_grid, int order) {
    std::vector<double> out;
    out.reserve(rho_grid.size());
    for (double r : rho_grid) out.push_back(std::pow(r, order));
    return out;
}

std::vector<double> default_modulus_grid(int order) { return modulus_grid_for(default_rho_grid(), order); }

RayVerdict ray_verdict_fixed_norm(const WedgeModel& model, const DomainSubspace& D, Complex lambda_hat,
                                  const std::vector<double>& rho_grid) {
    if (rho_grid.empty()) throw Error(ErrorKind::InvalidProbe, "rho grid is empty");
    const Complex dir = lambda_hat / std::abs(lambda_hat);
    model.require_background(dir);
    const KernelTrace K = model.kernel_trace(dir);
    RayVerdict v;
    v.direction = dir;
    v.method = VerdictMethod::FixedNorm;
    v.grid = rho_grid;
    for (double rho : rho_grid) {
        const ProjectionResult r = try_projection(K, translate(D, rho));
        if (r.hit) {
            v.norm_samples.push_back(std::numeric_limits<double>::infinity());
            v.near_spectral.push_back(true);
        } else {
            Eigen::JacobiSVD<CMatrix> svd(r.P);
            v.norm_samples.push_back(r.P.size() ? svd.singularValues()(0) : 0.0);
            v.near_spectral.push_back(r.near);
        }
    }
    apply_tail_rule(v, model.order());
    return v;
}

RayVerdict ray_verdict_lambda_norm(const WedgeModel& model, const DomainSubspace& D, Complex lambda_hat,
                                   const std::vector<double>& grid) {
    const std::vector<double> modulus_grid = grid.empty() ? default_modulus_grid(model.order()) : grid;
    const Complex dir = lambda_hat / std::abs(lambda_hat);
    model.require_background(dir);
    RayVerdict v;
    v.direction = dir;
    v.method = VerdictMethod::LambdaNorm;
    v.grid = modulus_grid;
    const CMatrix G1 = unit_gram(model);
    const KernelTrace K = model.kernel_trace(dir);
    // With G_lambda = k^* G_1 k and k = kappa_{1/s}, the norm of P in G_lambda is the norm of k P k^{-1} in G_1.
    for (double r : modulus_grid) {
        const double s = std::pow(r, 1.0 / model.order());
        const ProjectionResult pr = try_projection(K, translate(D, s));
        if (pr.hit) {
            v.norm_samples.push_back(std::numeric_limits<double>::infinity());
            v.near_spectral.push_back(true);
            continue;
        }
        v.norm_samples.push_back(gram_operator_norm(pr.P, G1));
        v.near_spectral.push_back(pr.near);
    }
    apply_tail_rule(v, 1.0);
    return v;
}

RayVerdict geometric_verdict(const DomainSubspace& D, Complex lambda0, const OmegaLimit& omega, const KernelTrace& K) {
    if (!omega.converged) {
        throw Error(ErrorKind::IndeterminateVerdict, "limit set of the kappa-orbit did not converge");
    }
    if (D.ambient_dim() != static_cast<std::size_t>(K.vectors.rows())) {
        throw Error(ErrorKind::DimensionMismatch, "kernel trace and domain ambient differ");
    }
    RayVerdict v;
    v.direction = lambda0 / std::abs(lambda0);
    v.method = VerdictMethod::Geometric;
    v.grid = omega.rho;
    v.bounded = true;
    double min_margin = std::numeric_limits<double>::infinity();
    for (const auto& pt : omega.points) {
        const double margin = transversality_margin(pt, K);
        v.norm_samples.push_back(margin);
        v.near_spectral.push_back(margin < 10.0 * kSpectrumTol);
        min_margin = std::min(min_margin, margin);
        if (!(margin > 10.0 * kSpectrumTol)) v.bounded = false;
    }
    v.C_estimate = min_margin > 0.0 ? 1.0 / min_margin : std::numeric_limits<double>::infinity();
    v.R_estimate = 0.0;
    v.reason = v.bounded ? VerdictReason::None : VerdictReason::OmegaMeetsBadSet;
    return v;
}

std::optional<RayVerdict> shortcut_verdict(const WedgeModel& model, const DomainSubspace& D, Complex lambda_hat) {
    if (!is_invariant(flow_generator(D.basis()), D)) return std::nullopt;
    const Complex dir = lambda_hat / std::abs(lambda_hat);
    model.require_background(dir);
    const KernelTrace K = model.kernel_trace(dir);
    RayVerdict v;
    v.direction = dir;
    v.method = VerdictMethod::Shortcut;
    v.grid = {1.0};
    const ProjectionResult r = try_projection(K, D);
    if (r.hit) {
        v.norm_samples = {std::numeric_limits<double>::infinity()};
        v.near_spectral = {true};
        v.spectrum_hits = {1.0};
        v.bounded = false;
        v.reason = VerdictReason::SpectralObstruction;
        v.C_estimate = std::numeric_limits<double>::infinity();
        v.R_estimate = std::numeric_limits<double>::infinity();
        return v;
    }
    Eigen::JacobiSVD<CMatrix> svd(r.P);
    const double n = r.P.size() ? svd.singularValues()(0) : 0.0;
    v.norm_samples = {n};
    v.near_spectral = {r.near};
    v.bounded = true;
    v.C_estimate = n;
    v.R_estimate = 0.0;
    return v;
}

SectorVerdict sector_verdict(const WedgeModel& model, const DomainSubspace& D, const SectorDescription& sector,
                             double resolution_deg, const std::vector<double>& rho_grid) {
    if (!(resolution_deg > 0.0)) throw Error(ErrorKind::InvalidProbe, "angular resolution must be positive");
    SectorVerdict sv;
    sv.sector = sector;
    const double step = resolution_deg * kPi / 180.0;
    const int count = std::max(1, static_cast<int>(std::ceil(2.0 * sector.half_aperture / step)));
    sv.bounded = true;
    for (int j = 0; j <= count; ++j) {
        const double th = sector.theta0 - sector.half_aperture + 2.0 * sector.half_aperture * j / count;
        RayVerdict rv = ray_verdict_fixed_norm(model, D, std::polar(1.0, th), rho_grid);
        sv.bounded = sv.bounded && rv.bounded;
        sv.rays.push_back(std::move(rv));
    }
    return sv;
}

IndexBook index_book(const WedgeModel& model, std::size_t dim_D) {
    IndexBook b;
    b.dim_E = static_cast<int>(model.dim());
    b.ind_min = model.ind_min();
    b.ind_max = b.ind_min + b.dim_E;
    b.d_double_prime = -b.ind_min;
    b.d_prime = b.ind_max;
    if (dim_D > model.dim()) {
        throw Error(ErrorKind::IndexInconsistency, fmt::format("dim D/D_min = {} exceeds dim E = {}", dim_D, b.dim_E));
    }
    b.ind_D = b.ind_min + static_cast<int>(dim_D);
    b.in_grassmannian = b.ind_D == 0;
    return b;
}

IndexBook index_book(const WedgeModel& model, const DomainSubspace& D) {
    if (D.ambient_dim() != model.dim()) throw Error(ErrorKind::DimensionMismatch, "domain lives in another space");
    return index_book(model, D.dim());
}

CMatrix projection_at(const WedgeModel& model, const DomainSubspace& D, Complex lambda) {
    if (lambda == Complex(0.0, 0.0)) throw Error(ErrorKind::PreconditionViolation, "lambda must be nonzero");
    const double r = std::abs(lambda);
    const Complex dir = lambda / r;
    model.require_background(dir);
    return projection_onto_kernel(model.kernel_trace(dir), translate(D, std::pow(r, 1.0 / model.order())));
}

void write_verdicts_csv(std::ostream& os, const std::vector<RayVerdict>& verdicts) {
    os << "method,theta0_deg,bounded,C_estimate,R_estimate\n";
    for (const auto& v : verdicts) {
        double deg = std::arg(v.direction) * 180.0 / kPi;
        if (deg < 0.0) deg += 360.0;
        os << fmt::format("{},{:.6f},{},{:.12g},{:.12g}\n", to_string(v.method), deg, v.bounded ? "true" : "false",
                          v.C_estimate, v.R_estimate);
    }
}

}  // namespace coneray
