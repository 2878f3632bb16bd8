#include "fig8/kepler2b.hpp"

#include <cmath>
#include <numbers>

#include "fig8/errors.hpp"

namespace fig8 {

double approx_velocity(double x4, double e) {
    if (!(x4 > 0.0)) throw DomainError("x4 must be positive");
    if (!(e >= -1.0 && e <= 1.0)) throw DomainError("eccentricity outside [-1, 1]");
    return std::sqrt(3.0 * (1.0 - e) / x4);
}

namespace {

// Semi-major axis of the mu = 3 ellipse with period P (Kepler's third law).
double semi_major_of_period(double period) {
    return std::cbrt(3.0 * period * period / (4.0 * std::numbers::pi * std::numbers::pi));
}

}  // namespace

double eccentricity_from_period(double x4, int m, double tbar) {
    if (!(x4 > 0.0)) throw DomainError("x4 must be positive");
    if (m < 1) throw DomainError("m must be a positive integer");
    if (!(tbar > 0.0)) throw DomainError("tbar must be positive");
    const double e = x4 / semi_major_of_period(2.0 * m * tbar) - 1.0;
    if (!(e >= 0.0 && e < 1.0))
        throw NoPhysicalSolution("no apocenter ellipse with this period through x4 = " +
                                 std::to_string(x4) + " (e = " + std::to_string(e) + ")");
    return e;
}

KeplerSeed kepler_seed(int m, double e, double tbar, KeplerApprox::Apsis apsis) {
    if (m < 1) throw DomainError("m must be a positive integer");
    if (!(tbar > 0.0)) throw DomainError("tbar must be positive");
    if (!(e >= 0.0 && e < 1.0)) throw NoPhysicalSolution("eccentricity must lie in [0, 1)");
    const double T0 = 2.0 * m * tbar;
    KeplerApprox approx{semi_major_of_period(2.0 * T0), e, apsis};
    const double x4 = approx.apsis_radius();
    return {x4, approx_velocity(x4, approx.signed_e()), T0, e, approx.a};
}

}  // namespace fig8
