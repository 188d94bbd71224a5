#include <doctest.h>

#include <sstream>

#include "coneray/errors.hpp"
#include "coneray/ray_criterion.hpp"
#include "generators.hpp"

using namespace coneray;
using coneray::testing::Gen;

namespace {

DomainSubspace proj(const WedgeModel& m, Complex z0, Complex z1) {
    return DomainSubspace::projective(m.basis_ptr(), z0, z1);
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::InvalidSpec;
}

}  // namespace

TEST_CASE("property: projection is idempotent with range K and kernel D") {
    const WedgeModel q(make_q_example_spec(0.75, 1.0, 2));
    Gen g(41);
    for (int trial = 0; trial < 60; ++trial) {
        const Complex dir = g.direction(0.1);
        const KernelTrace K = q.kernel_trace(dir);
        const DomainSubspace D(q.basis_ptr(), g.matrix(6, 3));
        const CMatrix P = projection_onto_kernel(K, D);
        const double scale = std::max(1.0, P.norm());
        CHECK((P * P - P).norm() < 1e-12 * scale * scale);
        CHECK((P * D.vectors()).norm() < 1e-12 * scale * D.vectors().norm());
        CHECK((P * K.vectors - K.vectors).norm() < 1e-12 * scale);
        const CMatrix I = CMatrix::Identity(6, 6);
        CHECK(((I - P) * (I - P) - (I - P)).norm() < 1e-12 * scale * scale);
    }
}

TEST_CASE("property: kappa conjugation of the projection") {
    const WedgeModel lap(make_laplacian_spec(3));
    Gen g(42);
    for (int trial = 0; trial < 60; ++trial) {
        const Complex dir = g.direction(0.1);
        const double rho = g.log_uniform(1.0, 1e3);
        const DomainSubspace D = proj(lap, g.complex(2.0), g.complex(1.0) + Complex(1.0, 0.0));
        const Complex lam = rho * rho * dir;
        const CMatrix direct = projection_onto_kernel(lap.kernel_trace(lam), D);
        const CMatrix k = kappa_matrix(lap.basis(), rho);
        const CMatrix conj = k.inverse() * direct * k;
        const CMatrix reduced = projection_at(lap, D, lam);
        CHECK((conj - reduced).norm() < 1e-10 * std::max(1.0, reduced.norm()));
    }
}

TEST_CASE("property: SpectrumHit exactly on the bad set") {
    const WedgeModel lap(make_laplacian_spec(2));
    Gen g(43);
    for (int trial = 0; trial < 40; ++trial) {
        const Complex lam = g.direction(0.1);
        const KernelTrace K = lap.kernel_trace(lam);
        const DomainSubspace bad = eigen_domain(lap, lam);
        CHECK(bad_set_member(bad, K));
        CHECK(kind_of([&] { (void)projection_onto_kernel(K, bad); }) == ErrorKind::SpectrumHit);
        const DomainSubspace good = proj(lap, g.complex(3.0), g.complex(1.0) + Complex(1.0, 0.0));
        if (!bad_set_member(good, K)) CHECK_NOTHROW((void)projection_onto_kernel(K, good));
    }
}

TEST_CASE("verdict methods agree on the laplacian") {
    const WedgeModel lap(make_laplacian_spec(3));
    Gen g(44);
    for (int trial = 0; trial < 8; ++trial) {
        const Complex dir = g.direction(0.2);
        const DomainSubspace D = proj(lap, g.complex(3.0), g.complex(1.0) + Complex(1.0, 0.0));
        const RayVerdict a = ray_verdict_fixed_norm(lap, D, dir);
        const RayVerdict b = ray_verdict_lambda_norm(lap, D, dir);
        const RayVerdict c = geometric_verdict(D, dir, omega_limit_set(D, default_rho_grid()), lap.kernel_trace(dir));
        CHECK(a.bounded);
        CHECK(b.bounded);
        CHECK(c.bounded);
        CHECK(a.reason == VerdictReason::None);
        CHECK(a.C_estimate >= 1.0 - 1e-12);
        CHECK(std::abs(a.tail_slope) < kTailSlopeThreshold);
        CHECK(a.norm_samples.size() == a.grid.size());
    }
}

TEST_CASE("verdicts do not depend on the spanning vector") {
    const WedgeModel lap(make_laplacian_spec(3));
    const Complex dir = std::polar(1.0, 2.0);
    const DomainSubspace D = proj(lap, 1.0, 1.0);
    const DomainSubspace D2(lap.basis_ptr(), D.vectors() * Complex(-3.0, 2.0));
    const RayVerdict a = ray_verdict_fixed_norm(lap, D, dir);
    const RayVerdict b = ray_verdict_fixed_norm(lap, D2, dir);
    REQUIRE(a.norm_samples.size() == b.norm_samples.size());
    for (std::size_t i = 0; i < a.norm_samples.size(); ++i)
        CHECK(std::abs(a.norm_samples[i] - b.norm_samples[i]) < 1e-10 * a.norm_samples[i]);
}

TEST_CASE("shortcut only for invariant domains") {
    const WedgeModel lap(make_laplacian_spec(3));
    CHECK_FALSE(shortcut_verdict(lap, proj(lap, 1.0, 1.0), -1.0).has_value());
    const auto v = shortcut_verdict(lap, proj(lap, 1.0, 0.0), Complex(0.0, 1.0));
    REQUIRE(v.has_value());
    CHECK(v->bounded);
    CHECK(v->method == VerdictMethod::Shortcut);
}

TEST_CASE("eigenvalue on the ray shows up as a spectrum hit") {
    const WedgeModel lap(make_laplacian_spec(2));
    const DomainSubspace D = eigen_domain(lap, -4.0);
    std::vector<double> grid = {0.5, 1.0, 2.0, 4.0};
    const RayVerdict v = ray_verdict_fixed_norm(lap, D, -1.0, grid);
    REQUIRE(v.spectrum_hits.size() == 1);
    CHECK(std::abs(v.spectrum_hits[0] - 2.0) < 1e-12);
    CHECK(std::isinf(v.norm_samples[2]));
}

TEST_CASE("transported Gram matches direct quadrature") {
    for (const WedgeModel& m : {WedgeModel(make_laplacian_spec(2)), WedgeModel(make_q_example_spec(0.75, 1.0, 2))}) {
        const CMatrix unit = unit_gram(m);
        CHECK((unit - unit.adjoint()).norm() < 1e-12 * unit.norm());
        for (double r : {0.3, 4.0, 90.0}) {
            const Complex lam = std::polar(r, 2.2);
            const CMatrix direct = lambda_gram(lam, m, CutoffProfile::standard().dilated(std::sqrt(r)));
            const CMatrix moved = lambda_gram_dilated(lam, m, unit);
            CHECK((direct - moved).norm() < 1e-9 * direct.norm());
        }
    }
}

TEST_CASE("Gram operator norm reduces to spectral norm for identity Gram") {
    Gen g(45);
    const CMatrix A = g.matrix(4, 4);
    Eigen::JacobiSVD<CMatrix> svd(A);
    CHECK(std::abs(gram_operator_norm(A, CMatrix::Identity(4, 4)) - svd.singularValues()(0)) < 1e-12);
}

TEST_CASE("index bookkeeping") {
    const WedgeModel lap(make_laplacian_spec(3));
    const IndexBook b = index_book(lap, proj(lap, 1.0, 1.0));
    CHECK(b.ind_min == -1);
    CHECK(b.ind_max == 1);
    CHECK(b.ind_D == 0);
    CHECK(b.in_grassmannian);
    CHECK(index_book(lap, std::size_t{0}).ind_D == -1);
    CHECK(index_book(lap, std::size_t{2}).ind_D == 1);
    CHECK(kind_of([&] { (void)index_book(lap, std::size_t{3}); }) == ErrorKind::IndexInconsistency);

    ConeOperatorSpec gapped;
    gapped.order = 2;
    gapped.mode_bound = 1;
    gapped.levels.push_back(ConormalPolynomial::from_function(1, [](int k) {
        return Polynomial({Complex(4.0 + k * k, 0.0), 0.0, 1.0});
    }));
    const WedgeModel empty(gapped);
    const IndexBook e = index_book(empty, std::size_t{0});
    CHECK(e.dim_E == 0);
    CHECK(e.ind_min == 0);
    CHECK(e.ind_max == 0);
    CHECK(e.ind_D == 0);
}

TEST_CASE("geometric verdict needs a converged limit set") {
    const WedgeModel lap(make_laplacian_spec(2));
    const DomainSubspace D = proj(lap, 1.0, 1.0);
    OmegaLimit om = omega_limit_set(D, default_rho_grid());
    om.converged = false;
    CHECK(kind_of([&] { (void)geometric_verdict(D, -1.0, om, lap.kernel_trace(-1.0)); }) ==
          ErrorKind::IndeterminateVerdict);
}

TEST_CASE("verdict CSV") {
    const WedgeModel lap(make_laplacian_spec(2));
    std::ostringstream os;
    write_verdicts_csv(os, {ray_verdict_fixed_norm(lap, proj(lap, 1.0, 0.0), -1.0)});
    CHECK(os.str().rfind("method,theta0_deg,bounded,C_estimate,R_estimate\n", 0) == 0);
    CHECK(os.str().find(",180.000000,true,") != std::string::npos);
}

TEST_CASE("lambda-norm samples match the norm in the dilated Gram") {
    const WedgeModel q(make_q_example_spec(0.75, 1.0, 2));
    const DomainSubspace D(q.basis_ptr(), Gen(46).matrix(6, 3));
    const Complex dir = std::polar(1.0, 2.0);
    const std::vector<double> grid = {0.5, 3.0, 40.0};
    const RayVerdict v = ray_verdict_lambda_norm(q, D, dir, grid);
    const CMatrix unit = unit_gram(q);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const Complex lam = grid[i] * dir;
        const double direct =
            gram_operator_norm(projection_onto_kernel(q.kernel_trace(lam), D), lambda_gram_dilated(lam, q, unit));
        CHECK(std::abs(v.norm_samples[i] - direct) < 1e-8 * direct);
    }
}

TEST_CASE("q example Friedrichs domain is bounded by every method") {
    const WedgeModel q(make_q_example_spec(0.75, 1.0, 2));
    CMatrix e(6, 3);
    e.setZero();
    e(1, 0) = e(2, 1) = e(5, 2) = 1.0;
    const DomainSubspace F(q.basis_ptr(), e);
    for (double deg : {90.0, 180.0, 250.0}) {
        const Complex dir = std::polar(1.0, deg * kPi / 180.0);
        const RayVerdict b = ray_verdict_lambda_norm(q, F, dir);
        CHECK(b.bounded);
        CHECK(b.spectrum_hits.empty());
        CHECK(ray_verdict_fixed_norm(q, F, dir).bounded);
    }
}
