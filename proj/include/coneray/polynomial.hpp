#pragma once

#include <vector>

#include "coneray/types.hpp"

namespace coneray {

// Complex polynomial, coefficients in ascending degree.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<Complex> coefficients);

    const std::vector<Complex>& coefficients() const { return c_; }
    // Degree after dropping exact trailing zeros; -1 for the zero polynomial.
    int degree() const;
    bool is_zero() const { return degree() < 0; }

    Complex operator()(Complex s) const;
    Polynomial derivative() const;
    // Taylor coefficients p^(n)(s)/n!, n = 0..degree.
    std::vector<Complex> taylor(Complex s) const;

    bool operator==(const Polynomial& other) const;

private:
    std::vector<Complex> c_;
};

struct RootCluster {
    Complex value;
    int multiplicity = 1;
};

// Roots of p with multiplicities, sorted by Im descending then Re ascending.
// Throws std::runtime_error when the eigenvalue solve fails.
std::vector<RootCluster> polynomial_roots(const Polynomial& p);

}  // namespace coneray
