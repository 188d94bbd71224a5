#include "coneray/domain_flow.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include <fmt/format.h>

#include "coneray/errors.hpp"
#include "coneray/representatives.hpp"

namespace coneray {

namespace {

CMatrix orthonormal_columns(const CMatrix& V) {
    if (V.cols() == 0) return V;
    CMatrix W = V;
    for (Eigen::Index c = 0; c < W.cols(); ++c) {
        const double n = W.col(c).norm();
        if (n > 0.0) W.col(c) /= n;
    }
    Eigen::HouseholderQR<CMatrix> qr(W);
    return qr.householderQ() * CMatrix::Identity(W.rows(), W.cols());
}

double min_singular(const CMatrix& A) {
    if (A.cols() == 0) return 1.0;
    Eigen::JacobiSVD<CMatrix> svd(A);
    return svd.singularValues()(svd.singularValues().size() - 1);
}

double binom(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

DomainSubspace::DomainSubspace(std::shared_ptr<const SingBasis> basis, CMatrix vectors)
    : basis_(std::move(basis)), vectors_(std::move(vectors)) {
    if (!basis_) throw Error(ErrorKind::PreconditionViolation, "domain needs a basis");
    if (static_cast<std::size_t>(vectors_.rows()) != basis_->size()) {
        throw Error(ErrorKind::DimensionMismatch,
                    fmt::format("coordinate length {} != dim E = {}", vectors_.rows(), basis_->size()));
    }
    if (vectors_.cols() > vectors_.rows()) {
        throw Error(ErrorKind::DimensionMismatch, "more spanning vectors than the ambient dimension");
    }
    CMatrix W = vectors_;
    for (Eigen::Index c = 0; c < W.cols(); ++c) {
        const double n = W.col(c).norm();
        if (!(n > 0.0) || !std::isfinite(n)) throw Error(ErrorKind::PreconditionViolation, "zero or non-finite vector");
        W.col(c) /= n;
    }
    if (W.cols() > 0 && min_singular(W) <= 1e-10) {
        throw Error(ErrorKind::PreconditionViolation, "domain vectors are linearly dependent");
    }
}

DomainSubspace DomainSubspace::from_vector(std::shared_ptr<const SingBasis> basis, const CVector& v) {
    CMatrix m(v.size(), 1);
    m.col(0) = v;
    return DomainSubspace(std::move(basis), m);
}

DomainSubspace DomainSubspace::projective(std::shared_ptr<const SingBasis> basis, Complex zeta0, Complex zeta1) {
    CVector v(2);
    v << zeta0, zeta1;
    return from_vector(std::move(basis), v);
}

CMatrix DomainSubspace::orthonormal() const { return orthonormal_columns(vectors_); }

DomainSubspace DomainSubspace::canonical() const {
    CMatrix q = orthonormal();
    if (q.cols() == 1) q.col(0) = projective_normalize(q.col(0));
    return DomainSubspace(basis_, q);
}

DomainSubspace DomainSubspace::mapped(const CMatrix& linear_map) const {
    return DomainSubspace(basis_, linear_map * vectors_);
}

CMatrix kappa_matrix(const SingBasis& basis, double rho) {
    if (!(rho > 0.0) || !std::isfinite(rho)) {
        throw Error(ErrorKind::InvalidDilation, fmt::format("rho = {} must be positive", rho));
    }
    const Eigen::Index n = static_cast<Eigen::Index>(basis.size());
    CMatrix K = CMatrix::Zero(n, n);
    const double lr = std::log(rho);
    const double half = 0.5 * basis.order();
    for (Eigen::Index b = 0; b < n; ++b) {
        const SingEntry& eb = basis[static_cast<std::size_t>(b)];
        const Complex scale = std::exp((half + Complex(0.0, 1.0) * eb.sigma) * lr);
        for (Eigen::Index r = 0; r < n; ++r) {
            const SingEntry& er = basis[static_cast<std::size_t>(r)];
            if (er.mode != eb.mode || er.sigma != eb.sigma || er.log_power > eb.log_power) continue;
            const int d = eb.log_power - er.log_power;
            K(r, b) = scale * binom(eb.log_power, er.log_power) * std::pow(lr, d);
        }
    }
    return K;
}

FlowGenerator flow_generator(const SingBasis& basis) {
    const Eigen::Index n = static_cast<Eigen::Index>(basis.size());
    CMatrix g = CMatrix::Zero(n, n);
    const double half = 0.5 * basis.order();
    for (Eigen::Index b = 0; b < n; ++b) {
        const SingEntry& eb = basis[static_cast<std::size_t>(b)];
        g(b, b) = half + Complex(0.0, 1.0) * eb.sigma;
        if (eb.log_power > 0) {
            for (Eigen::Index r = 0; r < n; ++r) {
                const SingEntry& er = basis[static_cast<std::size_t>(r)];
                if (er.mode == eb.mode && er.sigma == eb.sigma && er.log_power == eb.log_power - 1) {
                    g(r, b) = static_cast<double>(eb.log_power);
                }
            }
        }
    }
    return {g};
}

bool is_invariant(const FlowGenerator& gen, const DomainSubspace& D, double tol) {
    if (D.dim() == 0) return true;
    const CMatrix Q = D.orthonormal();
    const CMatrix GQ = gen.g * Q;
    const CMatrix resid = GQ - Q * (Q.adjoint() * GQ);
    const double gn = std::max(1.0, gen.g.norm());
    return resid.norm() < tol * gn;
}

DomainSubspace translate(const DomainSubspace& D, double rho) {
    return D.mapped(kappa_matrix(D.basis(), 1.0 / rho));
}

double gap_distance(const DomainSubspace& U, const DomainSubspace& V) {
    if (U.ambient_dim() != V.ambient_dim() || U.dim() != V.dim()) {
        throw Error(ErrorKind::DimensionMismatch,
                    fmt::format("gap between dims {} and {} in ambient {} / {}", U.dim(), V.dim(), U.ambient_dim(),
                                V.ambient_dim()));
    }
    if (U.dim() == 0) return 0.0;
    const CMatrix Qu = U.orthonormal();
    const CMatrix Qv = V.orthonormal();
    // For equal dimensions ||P_U - P_V|| = ||(I - P_U) Q_V||.
    const CMatrix R = Qv - Qu * (Qu.adjoint() * Qv);
    Eigen::JacobiSVD<CMatrix> svd(R);
    return std::min(1.0, svd.singularValues()(0));
}

std::vector<double> default_rho_grid() { return log_grid(1.0, 1e8, 200); }

namespace {

using Subset = std::vector<int>;

void enumerate_subsets(int n, int d, int start, Subset& cur, std::vector<Subset>& out) {
    if (static_cast<int>(cur.size()) == d) {
        out.push_back(cur);
        return;
    }
    for (int i = start; i < n; ++i) {
        cur.push_back(i);
        enumerate_subsets(n, d, i + 1, cur, out);
        cur.pop_back();
    }
}

struct LeadingTerm {
    bool found = false;
    CMatrix vectors;
};

// Leading term of exp(-t g) acting on the Pluecker vector of D as t -> infinity.
LeadingTerm generator_limit(const DomainSubspace& D) {
    const SingBasis& basis = D.basis();
    const int n = static_cast<int>(D.ambient_dim());
    const int d = static_cast<int>(D.dim());
    LeadingTerm out;
    if (binom(n, d) > 20000.0) return out;

    std::vector<Subset> subsets;
    Subset cur;
    enumerate_subsets(n, d, 0, cur, subsets);
    std::map<Subset, std::size_t> index;
    for (std::size_t i = 0; i < subsets.size(); ++i) index[subsets[i]] = i;

    const CMatrix Q = D.orthonormal();
    const std::size_t S = subsets.size();
    CVector p(static_cast<Eigen::Index>(S));
    std::vector<Complex> M(S);
    const double half = 0.5 * basis.order();
    for (std::size_t i = 0; i < S; ++i) {
        CMatrix sub(d, d);
        Complex m(0.0, 0.0);
        for (int r = 0; r < d; ++r) {
            sub.row(r) = Q.row(subsets[i][static_cast<std::size_t>(r)]);
            m += half + Complex(0.0, 1.0) * basis[static_cast<std::size_t>(subsets[i][static_cast<std::size_t>(r)])].sigma;
        }
        p(static_cast<Eigen::Index>(i)) = sub.determinant();
        M[i] = m;
    }

    // Induced nilpotent part on the exterior power.
    auto apply_n = [&](const CVector& v) {
        CVector w = CVector::Zero(v.size());
        for (std::size_t i = 0; i < S; ++i) {
            const Complex c = v(static_cast<Eigen::Index>(i));
            if (c == Complex(0.0, 0.0)) continue;
            for (std::size_t pos = 0; pos < static_cast<std::size_t>(d); ++pos) {
                const int b = subsets[i][pos];
                const SingEntry& e = basis[static_cast<std::size_t>(b)];
                if (e.log_power == 0) continue;
                const int bp = b - 1;
                if (std::find(subsets[i].begin(), subsets[i].end(), bp) != subsets[i].end()) continue;
                Subset t = subsets[i];
                t[pos] = bp;
                w(static_cast<Eigen::Index>(index.at(t))) += static_cast<double>(e.log_power) * c;
            }
        }
        return w;
    };

    const double tol = 1e-12 * p.norm();
    struct Group {
        Complex m;
        std::vector<std::size_t> members;
    };
    std::vector<Group> groups;
    for (std::size_t i = 0; i < S; ++i) {
        bool placed = false;
        for (auto& g : groups) {
            if (std::abs(g.m - M[i]) < 1e-10) {
                g.members.push_back(i);
                placed = true;
                break;
            }
        }
        if (!placed) groups.push_back({M[i], {i}});
    }
    double min_re = std::numeric_limits<double>::infinity();
    for (const auto& g : groups) {
        double gn = 0.0;
        for (std::size_t i : g.members) gn += std::norm(p(static_cast<Eigen::Index>(i)));
        if (std::sqrt(gn) > tol) min_re = std::min(min_re, g.m.real());
    }
    int best_q = -1;
    int winners = 0;
    CVector lead;
    for (const auto& g : groups) {
        if (std::abs(g.m.real() - min_re) > 1e-10) continue;
        CVector v = CVector::Zero(static_cast<Eigen::Index>(S));
        for (std::size_t i : g.members) v(static_cast<Eigen::Index>(i)) = p(static_cast<Eigen::Index>(i));
        if (v.norm() <= tol) continue;
        int q = 0;
        while (true) {
            CVector nv = apply_n(v);
            if (nv.norm() <= tol) break;
            v = nv;
            ++q;
        }
        if (q > best_q) {
            best_q = q;
            winners = 1;
            lead = v;
        } else if (q == best_q) {
            ++winners;
        }
    }
    if (winners != 1) return out;

    Eigen::Index istar = 0;
    lead.cwiseAbs().maxCoeff(&istar);
    const Subset& I = subsets[static_cast<std::size_t>(istar)];
    CMatrix V = CMatrix::Zero(n, d);
    for (int c = 0; c < d; ++c) {
        Subset J;
        for (int r = 0; r < d; ++r) {
            if (r != c) J.push_back(I[static_cast<std::size_t>(r)]);
        }
        for (int i = 0; i < n; ++i) {
            if (std::find(J.begin(), J.end(), i) != J.end()) continue;
            Subset full = J;
            full.push_back(i);
            std::sort(full.begin(), full.end());
            int above = 0;
            for (int j : J) above += (j > i) ? 1 : 0;
            const double eps = (above % 2 == 0) ? 1.0 : -1.0;
            V(i, c) = eps * lead(static_cast<Eigen::Index>(index.at(full)));
        }
    }
    out.found = true;
    out.vectors = V;
    return out;
}

}  // namespace

OmegaLimit omega_limit_set(const DomainSubspace& D, const std::vector<double>& rho_grid, double cluster_tol) {
    if (rho_grid.empty()) throw Error(ErrorKind::InvalidProbe, "rho grid is empty");
    for (double r : rho_grid) {
        if (!(r > 0.0)) throw Error(ErrorKind::InvalidDilation, "rho grid must be positive");
    }
    OmegaLimit out;
    out.rho = rho_grid;
    for (double r : rho_grid) out.orbit.push_back(translate(D, r).canonical());
    const std::size_t total = rho_grid.size();
    const std::size_t tail_start = total - std::max<std::size_t>(1, total / 4);
    out.cluster_id.assign(total, -1);

    double diam = 0.0;
    for (std::size_t i = tail_start; i < total; ++i) {
        for (std::size_t j = i + 1; j < total; ++j) diam = std::max(diam, gap_distance(out.orbit[i], out.orbit[j]));
    }
    out.tail_diameter = diam;

    LeadingTerm lt;
    if (D.dim() == 0 || D.dim() == D.ambient_dim()) {
        lt.found = true;
        lt.vectors = D.vectors();
    } else {
        lt = generator_limit(D);
    }
    if (lt.found) {
        const DomainSubspace limit = DomainSubspace(D.basis_ptr(), lt.vectors).canonical();
        out.points.push_back(limit);
        out.converged = true;
        out.from_generator = true;
        bool mono = true;
        double prev = std::numeric_limits<double>::infinity();
        for (std::size_t i = tail_start; i < total; ++i) {
            const double g = gap_distance(out.orbit[i], limit);
            if (g > prev + 1e-12) mono = false;
            prev = g;
            out.cluster_id[i] = 0;
        }
        out.monotone_approach = mono;
        out.last_sample_gap = gap_distance(out.orbit.back(), limit);
        return out;
    }

    // Oscillatory leading behaviour: cluster the tail.
    for (std::size_t i = tail_start; i < total; ++i) {
        int id = -1;
        for (std::size_t c = 0; c < out.points.size(); ++c) {
            if (gap_distance(out.orbit[i], out.points[c]) < cluster_tol) {
                id = static_cast<int>(c);
                break;
            }
        }
        if (id < 0) {
            out.points.push_back(out.orbit[i]);
            id = static_cast<int>(out.points.size()) - 1;
        }
        out.cluster_id[i] = id;
    }
    out.converged = out.points.size() == 1 && diam < cluster_tol;
    out.last_sample_gap = gap_distance(out.orbit.back(), out.points.front());
    return out;
}

double transversality_margin(const DomainSubspace& D, const KernelTrace& K) {
    if (static_cast<std::size_t>(K.vectors.rows()) != D.ambient_dim()) {
        throw Error(ErrorKind::DimensionMismatch, "kernel trace and domain live in different spaces");
    }
    const Eigen::Index d = static_cast<Eigen::Index>(D.dim());
    const Eigen::Index k = K.vectors.cols();
    if (d + k > static_cast<Eigen::Index>(D.ambient_dim())) return 0.0;
    if (d == 0 || k == 0) return 1.0;
    CMatrix stacked(D.ambient_dim(), d + k);
    stacked.leftCols(d) = D.orthonormal();
    stacked.rightCols(k) = orthonormal_columns(K.vectors);
    return min_singular(stacked);
}

bool bad_set_member(const DomainSubspace& D, const KernelTrace& K, double tol) {
    return transversality_margin(D, K) < tol;
}

PairingForm boundary_pairing(const ConeOperatorSpec& spec, const SingBasis& basis, const CutoffProfile& cutoff) {
    const RepresentativeGram g = representative_gram(spec, basis, cutoff);
    PairingForm form;
    form.omega = g.cross - g.cross.adjoint();
    form.meaningful = is_symmetric(spec);
    if (!form.meaningful) form.note = "pairing computed, selfadjointness not meaningful";
    return form;
}

Complex pairing_value(const PairingForm& form, const CVector& u, const CVector& v) {
    return (u.transpose() * form.omega * v.conjugate())(0, 0);
}

bool selfadjoint_test(const DomainSubspace& D, const PairingForm& form, double tol) {
    if (2 * D.dim() != D.ambient_dim()) return false;
    const CMatrix Q = D.orthonormal();
    for (Eigen::Index a = 0; a < Q.cols(); ++a) {
        for (Eigen::Index b = 0; b < Q.cols(); ++b) {
            if (std::abs(pairing_value(form, Q.col(a), Q.col(b))) >= tol) return false;
        }
    }
    return true;
}

DomainSubspace eigen_domain(const WedgeModel& model, Complex lambda) {
    const KernelTrace K = model.kernel_trace(lambda);
    const int dpp = -model.ind_min();
    if (static_cast<int>(K.dim) > dpp) {
        throw Error(ErrorKind::IndexInconsistency,
                    fmt::format("kernel trace dimension {} exceeds d'' = {}", K.dim, dpp));
    }
    const Eigen::Index n = static_cast<Eigen::Index>(model.dim());
    CMatrix V = K.vectors;
    for (Eigen::Index i = 0; i < n && V.cols() < dpp; ++i) {
        CMatrix trial(n, V.cols() + 1);
        trial.leftCols(V.cols()) = V;
        trial.col(V.cols()) = CVector::Unit(n, i);
        if (min_singular(orthonormal_columns(trial)) > 1e-6) V = trial;
    }
    DomainSubspace D(model.basis_ptr(), V);
    if (!bad_set_member(D, K)) {
        throw Error(ErrorKind::PreconditionViolation, "constructed eigen-domain misses the kernel trace");
    }
    return D;
}

void write_orbit_csv(std::ostream& os, const OmegaLimit& omega) {
    if (omega.orbit.empty()) return;
    const Eigen::Index n = static_cast<Eigen::Index>(omega.orbit.front().ambient_dim());
    const Eigen::Index d = static_cast<Eigen::Index>(omega.orbit.front().dim());
    os << "rho";
    for (Eigen::Index c = 0; c < d; ++c) {
        for (Eigen::Index i = 0; i < n; ++i) {
            if (d == 1) {
                os << fmt::format(",re_{},im_{}", i, i);
            } else {
                os << fmt::format(",re_v{}_{},im_v{}_{}", c, i, c, i);
            }
        }
    }
    os << ",cluster_id\n";
    for (std::size_t s = 0; s < omega.orbit.size(); ++s) {
        const CMatrix& V = omega.orbit[s].vectors();
        os << fmt::format("{:.15g}", omega.rho[s]);
        for (Eigen::Index c = 0; c < d; ++c) {
            for (Eigen::Index i = 0; i < n; ++i) os << fmt::format(",{:.15g},{:.15g}", V(i, c).real(), V(i, c).imag());
        }
        os << "," << omega.cluster_id[s] << "\n";
    }
}

void write_pairing_csv(std::ostream& os, const PairingForm& form) {
    os << "row,col,re_omega,im_omega\n";
    for (Eigen::Index r = 0; r < form.omega.rows(); ++r) {
        for (Eigen::Index c = 0; c < form.omega.cols(); ++c) {
            os << fmt::format("{},{},{:.15g},{:.15g}\n", r, c, form.omega(r, c).real(), form.omega(r, c).imag());
        }
    }
}

}  // namespace coneray
