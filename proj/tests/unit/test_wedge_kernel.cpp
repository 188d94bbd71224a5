#include <doctest.h>

#include "coneray/domain_flow.hpp"
#include "coneray/errors.hpp"
#include "coneray/wedge_kernel.hpp"
#include "generators.hpp"

using namespace coneray;
using coneray::testing::Gen;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no coneray::Error thrown");
    return ErrorKind::InvalidSpec;
}

}  // namespace

TEST_CASE("closed-form trace for nu = 0 is K_0 small-x expansion") {
    Gen g(21);
    for (int trial = 0; trial < 50; ++trial) {
        const Complex lam = g.direction(0.05) * g.log_uniform(0.1, 100.0);
        const KernelTrace t = kernel_trace_closed_form(0.0, lam);
        REQUIRE(t.dim == 1);
        const Complex z = std::sqrt(-lam);
        const CVector want = projective_normalize(CVector{{-std::log(z / 2.0) - kEulerGamma, -1.0}});
        const CVector got = projective_normalize(t.vectors.col(0));
        CHECK((want - got).norm() < 1e-12);
    }
    CHECK(kernel_trace_closed_form(1.0, Complex(-1.0, 0.0)).dim == 0);
    CHECK(kernel_trace_closed_form(2.5, Complex(-1.0, 0.0)).dim == 0);
}

TEST_CASE("numeric kernel trace agrees with closed form on the laplacian") {
    const ConeOperatorSpec spec = make_laplacian_spec(2);
    const auto basis = std::make_shared<const SingBasis>(wedge_sing_basis(make_laplacian_spec(0)));
    Gen g(22);
    for (int trial = 0; trial < 12; ++trial) {
        const Complex lam = g.direction(0.1) * g.log_uniform(0.3, 30.0);
        const ModeTrace m0 = kernel_trace_numeric(spec, lam, 0);
        REQUIRE(m0.contributes);
        const DomainSubspace a = DomainSubspace::from_vector(basis, m0.coords);
        const DomainSubspace b(basis, kernel_trace_closed_form(0.0, lam).vectors);
        CHECK(gap_distance(a, b) < 1e-8);
        CHECK_FALSE(kernel_trace_numeric(spec, lam, 1).contributes);
    }
}

TEST_CASE("model kernel trace has dimension one on every background ray") {
    const WedgeModel lap(make_laplacian_spec(10));
    const WedgeModel q(make_q_example_spec(0.75, 1.0, 2));
    for (double deg : {30.0, 90.0, 180.0, 270.0, 330.0}) {
        const Complex lam = std::polar(1.0, deg * kPi / 180.0);
        const KernelTrace k = lap.kernel_trace(lam);
        CHECK(k.dim == 1);
        CHECK(std::abs(k.vectors.col(0).norm() - 1.0) < 1e-12);
        // One decaying solution per mode in the strip: modes -1, 0, 1.
        CHECK(q.kernel_trace(lam).dim == 3);
    }
}

TEST_CASE("background resolvent set excludes the closed positive axis") {
    const WedgeModel lap(make_laplacian_spec(3));
    CHECK(lap.in_background(Complex(-1.0, 0.0)));
    CHECK(lap.in_background(Complex(0.0, 1.0)));
    CHECK_FALSE(lap.in_background(Complex(2.0, 0.0)));
    CHECK(kind_of([&] { lap.require_background(Complex(3.0, 0.0)); }) == ErrorKind::OutsideBackgroundResolvent);
    CHECK(kind_of([&] { (void)lap.kernel_trace(Complex(1.0, 0.0)); }) == ErrorKind::OutsideBackgroundResolvent);
}

TEST_CASE("background sectors") {
    const WedgeModel lap(make_laplacian_spec(3));
    const auto sectors = background_sectors(lap, 360);
    REQUIRE(sectors.size() == 1);
    CHECK(std::abs(sectors[0].theta0 - kPi) < 1e-9);
    CHECK(sectors[0].half_aperture > 0.95 * kPi);
    CHECK(sectors[0].half_aperture < kPi);
    CHECK(kind_of([&] { (void)background_sectors(lap, 0); }) == ErrorKind::InvalidProbe);
}

TEST_CASE("index of the model") {
    CHECK(WedgeModel(make_laplacian_spec(3)).ind_min() == -1);
    CHECK(WedgeModel(make_q_example_spec(0.75, 1.0, 2)).ind_min() == -3);
    CHECK(WedgeModel(make_laplacian_spec(3), -2).ind_min() == -2);
}

TEST_CASE("projective normalization") {
    Gen g(23);
    for (int trial = 0; trial < 100; ++trial) {
        const CVector v = g.vector(3);
        const Complex phase = std::polar(g.log_uniform(0.1, 10.0), g.uniform(0.0, 2.0 * kPi));
        const CVector a = projective_normalize(v);
        CHECK((a - projective_normalize(phase * v)).norm() < 1e-12);
        CHECK(std::abs(a.norm() - 1.0) < 1e-12);
        CHECK(std::abs(a(0).imag()) < 1e-14);
        CHECK(a(0).real() > 0.0);
    }
}
