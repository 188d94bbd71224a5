#pragma once

namespace coneray {

// omega = 1 on [0, flat_end], s((support_end - x)/(support_end - flat_end)) between, 0 beyond;
// s(t) = 6t^5 - 15t^4 + 10t^3.
struct CutoffProfile {
    double flat_end = 0.5;
    double support_end = 1.0;
    double quadrature_tol = 1e-12;

    static CutoffProfile standard() { return {}; }
    static CutoffProfile between(double flat_end, double support_end);

    // Profile of x -> omega(scale * x).
    CutoffProfile dilated(double scale) const;

    double value(double x) const;
    // d^order omega / dx^order, order <= 3.
    double derivative(double x, int order) const;
};

double smoothstep(double t);
double smoothstep_derivative(double t, int order);

}  // namespace coneray
