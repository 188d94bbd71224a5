#include "coneray/cutoff.hpp"

#include <cmath>

#include "coneray/errors.hpp"

namespace coneray {

double smoothstep(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double smoothstep_derivative(double t, int order) {
    if (order == 0) return smoothstep(t);
    if (t <= 0.0 || t >= 1.0) return 0.0;
    switch (order) {
        case 1: return 30.0 * t * t * (t - 1.0) * (t - 1.0);
        case 2: return 60.0 * t * (2.0 * t * t - 3.0 * t + 1.0);
        case 3: return 60.0 * (6.0 * t * t - 6.0 * t + 1.0);
        case 4: return 120.0 * (12.0 * t - 6.0) / 2.0;
        case 5: return 720.0;
        default: return 0.0;
    }
}

CutoffProfile CutoffProfile::between(double flat_end, double support_end) {
    if (!(flat_end > 0.0) || !(support_end > flat_end)) {
        throw Error(ErrorKind::PreconditionViolation, "cutoff needs 0 < flat_end < support_end");
    }
    CutoffProfile c;
    c.flat_end = flat_end;
    c.support_end = support_end;
    return c;
}

CutoffProfile CutoffProfile::dilated(double scale) const {
    if (!(scale > 0.0)) throw Error(ErrorKind::InvalidDilation, "cutoff dilation must be positive");
    CutoffProfile c = *this;
    c.flat_end = flat_end / scale;
    c.support_end = support_end / scale;
    return c;
}

double CutoffProfile::value(double x) const {
    if (x <= flat_end) return 1.0;
    if (x >= support_end) return 0.0;
    return smoothstep((support_end - x) / (support_end - flat_end));
}

double CutoffProfile::derivative(double x, int order) const {
    if (order == 0) return value(x);
    if (x <= flat_end || x >= support_end) return 0.0;
    const double w = support_end - flat_end;
    const double t = (support_end - x) / w;
    return std::pow(-1.0 / w, order) * smoothstep_derivative(t, order);
}

}  // namespace coneray
