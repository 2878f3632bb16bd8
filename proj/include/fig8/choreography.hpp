#ifndef FIG8_CHOREOGRAPHY_HPP
#define FIG8_CHOREOGRAPHY_HPP

#include <array>

#include "fig8/integrator.hpp"
#include "fig8/symmetry.hpp"

namespace fig8 {

/// Initial configuration and period of the three-body figure-eight
/// choreography in the unit system G = 1, m_i = 1. The initial time is an
/// isosceles configuration: bodies 1,2 mirror images across the x-axis,
/// body 3 on the axis. Isosceles configurations recur every 2*t_bar().
struct EightConstants {
    std::array<Vec2, 3> positions;
    std::array<Vec2, 3> velocities;
    double period = 0.0;

    double t_bar() const { return period / 12.0; }
};

/// The embedded reference constants (period printed to 9 digits).
const EightConstants& printed_eight();

SystemConfig three_body_config();
SystemConfig restricted_config();  // three unit masses plus a massless particle

/// Choreography state at t = 0 (three bodies).
State eight_initial_state(const EightConstants& constants = printed_eight());

/// Four-body state with the primaries at the choreography start and the
/// massless particle at (x40, 0) with velocity (0, vy40); lies in
/// Fix(Phi_{0,1}) by construction. Throws CollisionProximity if the particle
/// starts on top of a primary.
State restricted_initial_state(double x40, double vy40,
                               const EightConstants& constants = printed_eight());

/// Period of the periodic orbit shadowed by the given state, measured by
/// event-solving the Fix(Phi_{0,1}) return (body 3 crossing the axis) near
/// T/2 and doubling. Diagnostic: limited by how far the state sits off the
/// true orbit.
double measured_period(const EightConstants& constants = printed_eight(),
                       const IntegratorSettings& settings = {});

struct RefineInfo {
    int iterations = 0;
    double final_residual = 0.0;
    double state_shift = 0.0;  // |refined - given|_inf
};

/// Make the choreography data internally consistent: Newton on the
/// half-period boundary problem (start in Fix(Phi_{0,1}), return to it at
/// exactly period/2) over the six reversible-configuration parameters, with
/// the period pinned as given. The result closes under the flow to ~1e-11;
/// the state moves by under 1e-8 for the embedded constants. Throws if the
/// given data is too inconsistent to refine (shift above 1e-4).
EightConstants refine_choreography(const EightConstants& constants = printed_eight(),
                                   const IntegratorSettings& settings = {},
                                   RefineInfo* info = nullptr);

/// Which reversible configuration Fix(Phi_{0,j}) the primaries occupy at
/// t = 2m*t_bar, as a function of m mod 3 (verified numerically, not assumed).
struct LabelCycle {
    std::array<int, 3> label;  // indexed by m mod 3; label[0] == 1
};

/// Everything downstream work needs about the choreography, computed once:
/// the data as given, the internally refined data and the verified label
/// cycle. All boundary-value work runs on the refined data.
struct EightContext {
    EightConstants given;
    EightConstants refined;
    RefineInfo refine_info;
    LabelCycle labels{};
    IntegratorSettings settings;

    double t_bar() const { return refined.t_bar(); }

    static EightContext prepare(const EightConstants& constants = printed_eight(),
                                const IntegratorSettings& settings = {});
};

/// Shared context for the embedded constants at default settings.
const EightContext& standard_context();

/// j such that the primaries at t = 2m*t_bar sit in Fix(Phi_{0,j}).
int primary_configuration_label(const EightContext& ctx, int m);

struct IsoscelesCheck {
    int m;
    int best_j;
    double residual;
    double second_residual;
};

struct ChoreographyReport {
    double period_given;
    double period_measured;    // of the orbit through the given state
    double closure_given;      // |phi_T(u) - u|_inf, given state and period
    double closure_measured;   // given state over the measured period
    double closure_internal;   // refined data over its period
    double refined_shift;      // |u_refined - u_given|_inf
    int shift_target_body;     // body matched by r_1(t + T/3), 1-based
    double shift_residual;     // max over a 200-point grid
    std::array<IsoscelesCheck, 6> isosceles;  // m = 1..6
    bool pass;
};

/// Self-consistency check of the choreography data: closure over one period,
/// the constant-shift choreography property, the reversible configurations
/// at every 2m*t_bar, and the internal refinement quality.
ChoreographyReport verify_choreography(const EightConstants& constants = printed_eight(),
                                       const IntegratorSettings& settings = {});

}  // namespace fig8

#endif
