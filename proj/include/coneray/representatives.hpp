#pragma once

#include "coneray/cutoff.hpp"
#include "coneray/symbol_algebra.hpp"
#include "coneray/types.hpp"

namespace coneray {

// Inner products of cutoff representatives omega*phi_a on the wedge,
// <f, g> = 2 pi int f conj(g) x^{m-1} dx per mode.
// Matrices are indexed so that ||sum u_a phi_a||^2 = u^* G u.
struct RepresentativeGram {
    CMatrix l2;        // G_ab = <omega phi_b, omega phi_a>
    CMatrix op;        // <A(omega phi_b), A(omega phi_a)>
    CMatrix cross;     // X_ab = <A(omega phi_a), omega phi_b>
};

RepresentativeGram representative_gram(const ConeOperatorSpec& spec, const SingBasis& basis,
                                        const CutoffProfile& cutoff);

// Value of omega*phi_a and A(omega*phi_a) at x.
Complex representative_value(const SingEntry& e, const CutoffProfile& cutoff, double x);
Complex representative_image(const ConeOperatorSpec& spec, const SingEntry& e, const CutoffProfile& cutoff,
                             double x);

// int_0^c x^{s-1} (log x)^n dx, Re s > 0.
Complex log_power_moment(Complex s, int n, double c);

}  // namespace coneray
