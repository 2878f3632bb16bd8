#ifndef FIG8_SYMMETRY_HPP
#define FIG8_SYMMETRY_HPP

#include <span>
#include <vector>

#include "fig8/dynamics.hpp"

namespace fig8 {

/// One member of the reversing-symmetry family Phi_theta = P~ o G~_theta o K~
/// for a system of n equal-mass pairs plus k unrestricted bodies.
///
/// perm_index selects a cyclic relabeling of the three equal-mass bodies in
/// the restricted four-body setting (n = 1, the first free body sharing the
/// pair mass): the cycle sigma maps body 1 -> 3 -> 2 -> 1 and is applied
/// perm_index - 1 times, conjugating the base map. perm_index = 1 is the
/// base map and the only valid choice for general (n, k).
struct SymmetryDescriptor {
    int pairs = 1;
    int free_bodies = 2;
    double theta = 0.0;
    int perm_index = 1;

    int size() const { return 2 * pairs + free_bodies; }

    /// Descriptor for the restricted four-body problem (n=1, k=2).
    static SymmetryDescriptor restricted(double theta = 0.0, int perm_index = 1) {
        return {1, 2, theta, perm_index};
    }
};

/// Apply the involution Phi_{theta,j}. Per body, K~ maps (x,y,vx,vy) to
/// (x,-y,-vx,vy); G~_theta rotates positions and velocities by theta; P~
/// swaps the two bodies of every pair. The time coordinate is untouched
/// (reversal of time is the caller's bookkeeping).
State apply_phi(const SymmetryDescriptor& desc, const State& s);

/// The pair-swap P~ alone (base labeling, no cyclic relabeling).
State apply_pair_swap(int pairs, const State& s);

/// The reflection K~ alone.
State apply_reflection(const State& s);

/// G~_alpha: rotate every position and velocity by alpha.
State rotate_state(double alpha, const State& s);

/// Independent parameters of a Fix(Phi_0) point: position/velocity of the
/// first body of each pair, and x / v_y of each free body (4n + 2k reals).
struct FixedPointParams {
    std::vector<Vec2> pair_pos;
    std::vector<Vec2> pair_vel;
    std::vector<double> free_x;
    std::vector<double> free_vy;
};

/// Build the full state from the independent parameters: the second body of
/// each pair mirrors the first across the x-axis (position reflected,
/// velocity reflected with opposite x-component); free bodies sit on the
/// x-axis with purely vertical velocity. Requires theta == 0; the result
/// satisfies apply_phi(desc, result) == result exactly.
State fixed_point_embed(const SymmetryDescriptor& desc, const FixedPointParams& params);

/// Componentwise apply_phi(desc, s) - s in flat (r_1..r_N, v_1..v_N) layout;
/// zero exactly on Fix(Phi_{theta,j}).
std::vector<double> fixed_point_residual(const SymmetryDescriptor& desc, const State& s);

double inf_norm(std::span<const double> v);

/// Period of a symmetric orbit with basic domain [0, T0] between
/// Fix(Phi_{0,j_start}) and Fix(Phi_{0,j_end}): T = 2 M T0 where M = 1 for
/// j_end = j_start = 1 and M = 3 otherwise (the composition of two distinct
/// members of the family has order 3).
struct PeriodClassification {
    int M;
    double T;
};
PeriodClassification classify_period(int j_start, int j_end, double T0);

}  // namespace fig8

#endif
