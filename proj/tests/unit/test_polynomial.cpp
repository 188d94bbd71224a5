#include <doctest.h>

#include <algorithm>

#include "coneray/polynomial.hpp"
#include "generators.hpp"

using namespace coneray;
using coneray::testing::Gen;

namespace {

Polynomial from_roots(const std::vector<std::pair<Complex, int>>& roots, Complex lead) {
    std::vector<Complex> c = {lead};
    for (const auto& [r, m] : roots) {
        for (int i = 0; i < m; ++i) {
            std::vector<Complex> next(c.size() + 1, 0.0);
            for (std::size_t j = 0; j < c.size(); ++j) {
                next[j + 1] += c[j];
                next[j] -= r * c[j];
            }
            c = next;
        }
    }
    return Polynomial(c);
}

}  // namespace

TEST_CASE("evaluation, derivative and Taylor coefficients") {
    const Polynomial p({Complex(1, 0), Complex(-2, 1), Complex(0, 0), Complex(3, 0)});
    const Complex s(0.4, -1.3);
    CHECK(std::abs(p(s) - (1.0 + Complex(-2, 1) * s + 3.0 * s * s * s)) < 1e-14);
    CHECK(std::abs(p.derivative()(s) - (Complex(-2, 1) + 9.0 * s * s)) < 1e-14);
    const auto t = p.taylor(s);
    REQUIRE(t.size() == 4);
    CHECK(std::abs(t[0] - p(s)) < 1e-13);
    CHECK(std::abs(t[1] - p.derivative()(s)) < 1e-13);
    CHECK(std::abs(t[2] - 9.0 * s) < 1e-13);
    CHECK(std::abs(t[3] - 3.0) < 1e-13);
    CHECK(p.degree() == 3);
    CHECK(Polynomial({Complex(0, 0)}).is_zero());
    CHECK(Polynomial({Complex(1, 0), Complex(0, 0)}).degree() == 0);
}

TEST_CASE("roots of sigma^2 + k^2 and of a double root") {
    const auto r = polynomial_roots(Polynomial({Complex(9, 0), 0.0, 1.0}));
    REQUIRE(r.size() == 2);
    CHECK(std::abs(r[0].value - Complex(0, 3)) < 1e-12);
    CHECK(std::abs(r[1].value - Complex(0, -3)) < 1e-12);
    const auto d = polynomial_roots(Polynomial({0.0, 0.0, 1.0}));
    REQUIRE(d.size() == 1);
    CHECK(d[0].multiplicity == 2);
    CHECK(std::abs(d[0].value) < 1e-12);
    CHECK_THROWS(polynomial_roots(Polynomial({0.0})));
    CHECK(polynomial_roots(Polynomial({2.0})).empty());
}

TEST_CASE("property: random root sets are recovered with multiplicities") {
    Gen g(101);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::pair<Complex, int>> roots;
        const int distinct = g.integer(1, 4);
        while (static_cast<int>(roots.size()) < distinct) {
            const Complex r = g.complex(2.0);
            bool far = true;
            for (const auto& [q, m] : roots) far = far && std::abs(q - r) > 0.4;
            if (far) roots.emplace_back(r, g.integer(1, 3));
        }
        const Polynomial p = from_roots(roots, g.complex(1.0) + Complex(1.5, 0.0));
        const auto found = polynomial_roots(p);
        REQUIRE(found.size() == roots.size());
        for (const auto& [r, m] : roots) {
            const auto it = std::min_element(found.begin(), found.end(), [&](const auto& a, const auto& b) {
                return std::abs(a.value - r) < std::abs(b.value - r);
            });
            CHECK(it->multiplicity == m);
            CHECK(std::abs(it->value - r) < 1e-8);
        }
        for (std::size_t i = 1; i < found.size(); ++i) {
            const bool ordered = found[i - 1].value.imag() > found[i].value.imag() ||
                                 (found[i - 1].value.imag() == found[i].value.imag() &&
                                  found[i - 1].value.real() <= found[i].value.real());
            CHECK(ordered);
        }
    }
}
