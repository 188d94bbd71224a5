#pragma once

#include "coneray/types.hpp"

namespace coneray {

struct BesselIK {
    Complex i;
    Complex k;
    Complex ip;
    Complex kp;
};

// Modified Bessel functions I_nu, K_nu and derivatives for real nu >= 0, Re w > 0.
BesselIK bessel_ik(double nu, Complex w);

Complex bessel_k(double nu, Complex w);
Complex bessel_i(double nu, Complex w);

// Small-argument leading coefficients of K_nu(z x) against the strip functions of one mode.
// nu = 0: (c_1, c_log) on (1, log x). 0 < nu < 1: (c_minus, c_plus) on (x^{-nu}, x^{nu}).
struct BesselTrace {
    Complex first;
    Complex second;
};
BesselTrace bessel_k_trace(double nu, Complex z);
// Leading coefficient of I_nu(z x): on 1 for nu = 0, on x^{nu} otherwise.
Complex bessel_i_leading(double nu, Complex z);

}  // namespace coneray
