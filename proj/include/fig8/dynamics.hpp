#ifndef FIG8_DYNAMICS_HPP
#define FIG8_DYNAMICS_HPP

#include <span>
#include <vector>

#include "fig8/vec2.hpp"

namespace fig8 {

/// Hard proximity guard: the field is undefined at collisions, so evaluation
/// fails loudly once any relevant pair gets closer than this.
inline constexpr double kCollisionDistance = 1e-8;

/// Masses and pairing structure of a planar N-body system, N = 2n + k.
/// The first 2n bodies form n pairs (equal masses within a pair whenever a
/// reversing symmetry is applied); the trailing k bodies are unrestricted.
/// Trailing bodies may carry mass exactly 0: they are massless test
/// particles, exert no force, and are excluded from the energy sums.
struct SystemConfig {
    int pairs = 0;
    int free_bodies = 0;
    std::vector<double> masses;
    double G = 1.0;

    int size() const { return 2 * pairs + free_bodies; }
    bool massless(int body) const { return masses[static_cast<size_t>(body)] == 0.0; }

    /// Throws DomainError unless sizes agree, masses are nonnegative and
    /// massless bodies are trailing.
    void validate() const;

    static SystemConfig paired(int n_pairs, int n_free, std::vector<double> masses,
                               double G = 1.0);
};

/// Full phase-space point: time plus position and velocity of every body.
/// Flat layout is (r_1..r_N, v_1..v_N).
struct State {
    double t = 0.0;
    std::vector<Vec2> pos;
    std::vector<Vec2> vel;

    int size() const { return static_cast<int>(pos.size()); }

    void to_flat(std::span<double> out) const;
    static State from_flat(double t, std::span<const double> flat);
};

/// Gravitational acceleration of every body: a_i = sum_j G m_j (r_j-r_i)/|r_j-r_i|^3.
/// Massless bodies contribute nothing to any sum. Throws CollisionProximity
/// if a relevant pair (at least one body massive) violates the distance guard.
std::vector<Vec2> accelerations(const SystemConfig& config, const State& s);

/// Flat-layout evaluation used by the integrator: u = (r_1..r_N, v_1..v_N)
/// of length 4N, du receives (v, a). Same kernel and guard as accelerations().
void nbody_field_flat(const SystemConfig& config, double t, std::span<const double> u,
                      std::span<double> du);

/// Extended-precision variant backing flow_extended().
void nbody_field_flat_ld(const SystemConfig& config, double t, std::span<const long double> u,
                         std::span<long double> du);

/// First-order field: returned State holds d(pos)/dt in .pos, d(vel)/dt in
/// .vel and dt/dt = 1 in .t.
State vector_field(const SystemConfig& config, const State& s);

/// Kinetic plus potential energy, massive bodies only.
double total_energy(const SystemConfig& config, const State& s);

/// Minimum distance over all body pairs.
double min_pairwise_distance(const State& s);

/// Minimum distance over pairs with at least one massive body.
double min_pairwise_distance(const SystemConfig& config, const State& s);

/// Max-norm distance between two states over all position and velocity
/// components (time is not compared).
double state_inf_distance(const State& a, const State& b);

}  // namespace fig8

#endif
