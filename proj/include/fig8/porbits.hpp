#ifndef FIG8_PORBITS_HPP
#define FIG8_PORBITS_HPP

#include <span>
#include <string>
#include <vector>

#include "fig8/catalog.hpp"
#include "fig8/choreography.hpp"

namespace fig8 {

/// Shared context for all boundary-value work on the restricted problem:
/// the refined choreography, the four-body config and integrator settings.
/// Immutable once built; safe to share across worker threads.
struct RestrictedProblem {
    EightContext eight;
    SystemConfig config;
    IntegratorSettings ode;

    double t_bar() const { return eight.t_bar(); }

    /// Primaries from the refined choreography, particle at (x40,0) with
    /// velocity (0,vy40); the state lies in Fix(Phi_{0,1}).
    State initial_state(double x40, double vy40) const {
        return restricted_initial_state(x40, vy40, eight.refined);
    }

    static RestrictedProblem make(const EightContext& ctx) {
        return {ctx, restricted_config(), ctx.settings};
    }
    static const RestrictedProblem& standard();
};

/// The two shooting residuals of the boundary problems: particle ordinate
/// and horizontal velocity at the end of the leg.
struct BoundaryValues {
    double y4;
    double vx4;
    double min_pair_distance;  // along the shooting trajectory
};
BoundaryValues boundary_values(const RestrictedProblem& pr, double x40, double vy40, double T0);

/// A point of the boundary problems' solution sets. T0 is absolute time.
struct SeedPoint {
    double x40;
    double vy40;
    double T0;
};

enum class SeedResidual { y, vx };
enum class FrozenCoord { x40, vy40 };

/// One-dimensional Newton (centered-difference derivative) on the selected
/// residual at T0 = 2p*t_bar, with one coordinate frozen. Converges to
/// |residual| < 1e-10 or throws NoConvergence after 25 iterations.
SeedPoint find_seed(const RestrictedProblem& pr, int p, SeedResidual which, SeedPoint guess,
                    FrozenCoord frozen);

enum class CurveFamily { c_y, c_vx, c_r };
enum class CurveEnd { max_points, collision_guard, corrector_failure };

struct CurvePoint {
    double x40;
    double vy40;
    double T0;
    double res1;      // defining residual (y4 for c_y/c_r, vx4 for c_vx)
    double res2;      // companion residual (vx4, or y4 for c_vx)
    double min_dist;  // smallest pair distance along the shooting trajectory
};

struct ContinuationCurve {
    CurveFamily family;
    int p = 0;  // leg multiplier for fixed-time families, 0 for c_r
    std::vector<CurvePoint> points;
    CurveEnd end_reason = CurveEnd::max_points;
};

struct TraceOptions {
    double step = 1e-2;      // arclength step in (x40, vy40, T0/10) scaling
    int max_points = 200;
    double direction = 1.0;  // orientation of the initial tangent
};

/// Pseudo-arclength continuation with a secant predictor and a Newton
/// corrector orthogonal to it. Fixed-time families continue (x40, vy40) on
/// one residual; c_r continues (x40, vy40, T0) on both. Runs through folds;
/// ends at max_points, at the soft near-collision guard (shooting
/// trajectory dipping under 1e-3), or after six step halvings fail to
/// correct.
ContinuationCurve trace_curve(const RestrictedProblem& pr, const SeedPoint& seed,
                              CurveFamily family, const TraceOptions& options = {});

/// Transversal crossings of a C_(y,2p) with a C_(vx,2p) polyline, sharpened
/// by a two-dimensional Newton on both residuals. Family-identical input is
/// rejected with an empty result. Points satisfy both residuals < 1e-10.
std::vector<SeedPoint> find_intersection(const RestrictedProblem& pr,
                                         const ContinuationCurve& a, const ContinuationCurve& b);

/// One verified symmetric periodic orbit (a catalog row worth of data).
struct OrbitRecord {
    int index = 0;  // catalog row when applicable
    int T0_over_Tbar = 0;
    int T_over_Tbar = 0;
    double x4 = 0.0;
    double vy4 = 0.0;
    int j_end = 0;
    int M = 0;
    double res_y = 0.0;
    double res_vx = 0.0;
    double res_closure = 0.0;
    // diagnostics, not serialized
    double res_closure_particle = 0.0;
    int iterations = 0;
};

/// Two-dimensional Newton on (y4, vx4) at T0 = 2m*t_bar from the given
/// guess, then endpoint classification (which Fix(Phi_{0,j}) it satisfies),
/// period via classify_period and a full-period closure integration.
OrbitRecord refine_periodic(const RestrictedProblem& pr, double x40, double vy40, int m);

/// Scan a C_R curve for crossings of T0 = 2m*t_bar and refine each into an
/// orbit record; failures are skipped. Sorted by x40.
std::vector<OrbitRecord> detect_periodic_on_curve(const RestrictedProblem& pr,
                                                  const ContinuationCurve& curve);

struct RowOutcome {
    enum class Status { ok, no_convergence, collision, ambiguous, error };
    int index = 0;
    Status status = Status::error;
    OrbitRecord record{};
    double dx = 0.0;   // |x4 - printed|
    double dvy = 0.0;  // |vy4 - printed|
    bool period_matches = false;
    std::string message;
};

struct CatalogReport {
    std::vector<RowOutcome> rows;
    int refined_ok = 0;
    int failed_collision = 0;
    int failed_other = 0;
    bool all_periods_match = true;
};

/// Re-derive the reference catalog: refine every requested row from its
/// printed values, compare corrections and the period column. Rows fan out
/// across `jobs` workers (0 = hardware concurrency); failures are recorded
/// per row, never fatal.
CatalogReport reproduce_table1(const RestrictedProblem& pr, std::span<const int> rows = {},
                               int jobs = 0);

}  // namespace fig8

#endif
