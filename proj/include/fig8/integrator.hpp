#ifndef FIG8_INTEGRATOR_HPP
#define FIG8_INTEGRATOR_HPP

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "fig8/dynamics.hpp"
#include "fig8/errors.hpp"

namespace fig8 {

struct IntegratorSettings {
    double rel_tol = 1e-12;
    double abs_tol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    double initial_step = 0.0;  // 0 = automatic starting-step heuristic
    long max_steps = 10'000'000;
    int method_order = 8;
};

enum class IntegrationStatus { ok, collision, step_underflow, step_limit };

/// Accepted steps of one integration plus the order-7 dense-output
/// interpolant of each step; states can be evaluated anywhere in the span.
/// Immutable after construction.
class Trajectory {
  public:
    IntegrationStatus status() const { return status_; }
    bool ok() const { return status_ == IntegrationStatus::ok; }

    double t_begin() const { return t_begin_; }
    /// Last accepted time; equals the requested endpoint when ok().
    double t_end() const { return t_end_; }

    /// Dense evaluation; t must lie within the covered span.
    State at(double t) const;
    const State& initial_state() const { return first_; }
    const State& final_state() const { return last_; }

    /// Accepted time grid, initial time first.
    const std::vector<double>& times() const { return times_; }
    long steps() const { return static_cast<long>(times_.size()) - 1; }

    /// Smallest guarded pair distance seen at accepted states.
    double min_pair_distance() const { return min_pair_distance_; }

    /// Collision details when status() == collision.
    const std::optional<CollisionProximity>& collision() const { return collision_; }

  private:
    friend Trajectory integrate(const SystemConfig&, const State&, double,
                                const IntegratorSettings&);
    struct Segment {
        double t0, h;
        std::vector<double> cont;  // 8 * dim interpolation coefficients
    };
    State eval_segment(size_t idx, double t) const;

    std::vector<Segment> segments_;
    std::vector<double> times_;
    State first_, last_;
    double t_begin_ = 0.0, t_end_ = 0.0;
    int dim_ = 0;
    IntegrationStatus status_ = IntegrationStatus::ok;
    double min_pair_distance_ = std::numeric_limits<double>::infinity();
    std::optional<CollisionProximity> collision_;
};

/// Integrate from s0 to absolute time t_end (backward allowed). On
/// CollisionProximity or step-size underflow the partial trajectory is
/// returned with the matching status.
Trajectory integrate(const SystemConfig& config, const State& s0, double t_end,
                     const IntegratorSettings& settings = {});

/// Endpoint of the flow over a time span measured from s0.t; span 0 returns
/// s0. Throws on any failure (no partial state to return).
State flow(const SystemConfig& config, const State& s0, double span,
           const IntegratorSettings& settings = {});

/// Lean endpoint evaluation with shooting diagnostics (no dense storage).
struct FlowSummary {
    State state;
    double min_pair_distance;
    long steps;
};
FlowSummary flow_summary(const SystemConfig& config, const State& s0, double span,
                         const IntegratorSettings& settings = {});

/// Endpoint of the flow with the stepper run in extended (long double)
/// precision. Used where double roundoff would be amplified above the
/// quantity being measured, e.g. long-horizon closure checks of sensitive
/// orbits; tolerances down to ~1e-15 are meaningful here.
State flow_extended(const SystemConfig& config, const State& s0, double span,
                    const IntegratorSettings& settings = {});

/// Zero of a scalar event function along the trajectory: locates a sign
/// change on the accepted grid nearest t_guess, then runs a safeguarded
/// Newton on the dense output until |event| < 1e-11.
double find_event(const Trajectory& traj, const std::function<double(const State&)>& event,
                  double t_guess);

}  // namespace fig8

#endif
