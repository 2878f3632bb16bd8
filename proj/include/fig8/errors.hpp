#ifndef FIG8_ERRORS_HPP
#define FIG8_ERRORS_HPP

#include <cstdio>
#include <stdexcept>
#include <string>

namespace fig8 {

namespace detail {
inline std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return buf;
}
}  // namespace detail

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Two bodies closer than the hard proximity guard; the vector field is
/// rejected rather than evaluated near the singularity.
struct CollisionProximity : Error {
    CollisionProximity(double distance_, int body_a_, int body_b_, double t_)
        : Error("collision proximity: bodies " + std::to_string(body_a_ + 1) + "," +
                std::to_string(body_b_ + 1) + " at distance " + detail::sci(distance_) +
                " (t=" + detail::sci(t_) + ")"),
          distance(distance_), body_a(body_a_), body_b(body_b_), t(t_) {}
    double distance;
    int body_a, body_b;  // 0-based internally
    double t;
};

struct StepSizeUnderflow : Error {
    explicit StepSizeUnderflow(double t_)
        : Error("step size underflow at t=" + detail::sci(t_)), t(t_) {}
    double t;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct NoConvergence : Error {
    NoConvergence(int iterations_, double residual_)
        : Error("no convergence after " + std::to_string(iterations_) +
                " iterations (residual " + detail::sci(residual_) + ")"),
          iterations(iterations_), residual(residual_) {}
    int iterations;
    double residual;
};

struct NoSignChange : Error {
    using Error::Error;
};

struct InvalidIndex : Error {
    using Error::Error;
};

/// Two reversible-configuration residuals too close to call.
struct AmbiguousLabel : Error {
    AmbiguousLabel(double best_, double second_)
        : Error("ambiguous configuration label: residuals " + detail::sci(best_) + " vs " +
                detail::sci(second_)),
          best(best_), second(second_) {}
    double best, second;
};

struct NoPhysicalSolution : Error {
    using Error::Error;
};

struct DomainError : Error {
    using Error::Error;
};

}  // namespace fig8

#endif
