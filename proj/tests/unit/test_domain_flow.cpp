#include <doctest.h>

#include "coneray/domain_flow.hpp"
#include "coneray/errors.hpp"
#include "coneray/wedge_kernel.hpp"
#include "generators.hpp"

using namespace coneray;
using coneray::testing::Gen;

namespace {

DomainSubspace proj(const WedgeModel& m, Complex z0, Complex z1) {
    return DomainSubspace::projective(m.basis_ptr(), z0, z1);
}

}  // namespace

TEST_CASE("kappa on [1, log x] and on power pairs") {
    const WedgeModel lap(make_laplacian_spec(2));
    const double rho = 3.7;
    const CMatrix k = kappa_matrix(lap.basis(), rho);
    // kappa_rho u(x) = rho u(rho x): 1 -> rho, log x -> rho (log x + log rho).
    CHECK(std::abs(k(0, 0) - rho) < 1e-14);
    CHECK(std::abs(k(0, 1) - rho * std::log(rho)) < 1e-13);
    CHECK(std::abs(k(1, 0)) < 1e-14);
    CHECK(std::abs(k(1, 1) - rho) < 1e-14);

    const WedgeModel q(make_q_example_spec(0.75, 1.0, 2));
    const CMatrix kq = kappa_matrix(q.basis(), rho);
    CHECK(std::abs(kq(0, 0) - std::pow(rho, 0.25)) < 1e-13);
    CHECK(std::abs(kq(1, 1) - std::pow(rho, 1.75)) < 1e-13);
    CHECK(std::abs(kq(4, 4) - std::pow(rho, 0.25)) < 1e-13);
    CHECK(std::abs(kq(3, 2)) < 1e-14);
}

TEST_CASE("property: translate acts on projective coordinates and composes") {
    const WedgeModel lap(make_laplacian_spec(2));
    Gen g(31);
    for (int trial = 0; trial < 100; ++trial) {
        const Complex z0 = g.complex(3.0), z1 = g.complex(1.0) + Complex(1.2, 0.0);
        const double a = g.log_uniform(1e-3, 1e3), b = g.log_uniform(1e-3, 1e3);
        const DomainSubspace D = proj(lap, z0, z1);
        CHECK(gap_distance(translate(D, a), proj(lap, z0 - z1 * std::log(a), z1)) < 1e-12);
        CHECK(gap_distance(translate(translate(D, a), b), translate(D, a * b)) < 1e-11);
        CHECK(gap_distance(translate(D, 1.0), D) < 1e-14);
    }
    const DomainSubspace F = proj(lap, 1.0, 0.0);
    CHECK(gap_distance(translate(F, 1e6), F) < 1e-14);
    CHECK(gap_distance(translate(proj(lap, 1.0, 1.0), std::exp(1.0)), proj(lap, 0.0, 1.0)) < 1e-12);
}

TEST_CASE("property: gap distance is a symmetric, unitarily invariant metric") {
    const WedgeModel q(make_q_example_spec(0.75, 1.0, 2));
    Gen g(32);
    for (int trial = 0; trial < 100; ++trial) {
        const auto n = static_cast<Eigen::Index>(q.dim());
        const DomainSubspace U(q.basis_ptr(), g.matrix(n, 3));
        const DomainSubspace V(q.basis_ptr(), g.matrix(n, 3));
        const DomainSubspace W(q.basis_ptr(), g.matrix(n, 3));
        const double uv = gap_distance(U, V);
        CHECK(std::abs(uv - gap_distance(V, U)) < 1e-12);
        CHECK(uv <= 1.0 + 1e-12);
        CHECK(gap_distance(U, U) < 1e-12);
        CHECK(gap_distance(U, W) <= uv + gap_distance(V, W) + 1e-12);
        const CMatrix Q = g.unitary(n);
        CHECK(std::abs(gap_distance(U.mapped(Q), V.mapped(Q)) - uv) < 1e-12);
        // Spanning set choice does not matter.
        const DomainSubspace U2(q.basis_ptr(), U.vectors() * g.matrix(3, 3));
        CHECK(gap_distance(U, U2) < 1e-10);
    }
}

TEST_CASE("omega limit of projective domains is Friedrichs") {
    const WedgeModel lap(make_laplacian_spec(2));
    const DomainSubspace F = proj(lap, 1.0, 0.0);
    Gen g(33);
    for (int trial = 0; trial < 10; ++trial) {
        const OmegaLimit om = omega_limit_set(proj(lap, g.complex(5.0), g.complex(1.0) + Complex(1.0, 0.0)),
                                              default_rho_grid());
        CHECK(om.converged);
        REQUIRE(om.points.size() == 1);
        CHECK(gap_distance(om.points[0], F) < 1e-6);
        CHECK(om.orbit.size() == om.rho.size());
    }
    const OmegaLimit fixed = omega_limit_set(F, default_rho_grid());
    CHECK(fixed.converged);
    CHECK(fixed.tail_diameter < 1e-12);
}

TEST_CASE("flow generator invariance") {
    const WedgeModel lap(make_laplacian_spec(2));
    const FlowGenerator gen = flow_generator(lap.basis());
    CHECK(is_invariant(gen, proj(lap, 1.0, 0.0)));
    CHECK_FALSE(is_invariant(gen, proj(lap, 1.0, 1.0)));
    CHECK(is_invariant(gen, DomainSubspace(lap.basis_ptr(), CMatrix::Identity(2, 2))));
}

TEST_CASE("boundary pairing and selfadjoint circle") {
    const WedgeModel lap(make_laplacian_spec(2));
    const PairingForm form = boundary_pairing(lap.spec(), lap.basis());
    REQUIRE(form.meaningful);
    CVector one(2), lg(2);
    one << 1.0, 0.0;
    lg << 0.0, 1.0;
    CHECK(std::abs(std::abs(pairing_value(form, one, lg)) - 2.0 * kPi) < 1e-8);
    CHECK(std::abs(pairing_value(form, one, one)) < 1e-8);
    CHECK(std::abs(pairing_value(form, lg, one) + std::conj(pairing_value(form, one, lg))) < 1e-8);
    Gen g(34);
    for (int trial = 0; trial < 40; ++trial) {
        const double c = g.uniform(-5.0, 5.0);
        CHECK(selfadjoint_test(proj(lap, c, 1.0), form));
        CHECK_FALSE(selfadjoint_test(proj(lap, Complex(c, g.uniform(0.1, 3.0)), 1.0), form));
    }
}

TEST_CASE("eigen domain puts lambda in the bad set") {
    const WedgeModel lap(make_laplacian_spec(2));
    Gen g(35);
    for (int trial = 0; trial < 20; ++trial) {
        const Complex lam = g.direction(0.1) * g.log_uniform(0.1, 100.0);
        const DomainSubspace D = eigen_domain(lap, lam);
        CHECK(bad_set_member(D, lap.kernel_trace(lam)));
        CHECK(transversality_margin(D, lap.kernel_trace(lam)) < 1e-10);
        const Complex other = lam * std::polar(1.0, 0.3);
        if (lap.in_background(other)) CHECK(transversality_margin(D, lap.kernel_trace(other)) > 1e-6);
    }
}

TEST_CASE("dimension mismatch") {
    const WedgeModel lap(make_laplacian_spec(2));
    const WedgeModel q(make_q_example_spec(0.75, 1.0, 2));
    auto kind = [](const std::function<void()>& f) {
        try {
            f();
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::InvalidSpec;
    };
    CHECK(kind([&] { DomainSubspace(lap.basis_ptr(), CMatrix::Ones(3, 1)); }) == ErrorKind::DimensionMismatch);
    CHECK(kind([&] { (void)gap_distance(proj(lap, 1.0, 0.0), DomainSubspace(q.basis_ptr(), CMatrix::Ones(6, 1))); }) ==
          ErrorKind::DimensionMismatch);
    CHECK(kind([&] { (void)transversality_margin(proj(lap, 1.0, 0.0), q.kernel_trace(-1.0)); }) ==
          ErrorKind::DimensionMismatch);
}
