#include "fig8/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fig8/errors.hpp"

namespace fig8 {

void SystemConfig::validate() const {
    if (pairs < 0 || free_bodies < 0 || size() < 1)
        throw DomainError("system needs at least one body");
    if (static_cast<int>(masses.size()) != size())
        throw DomainError("mass list does not match 2n+k body count");
    bool massless_seen = false;
    for (double m : masses) {
        if (m < 0.0 || !std::isfinite(m)) throw DomainError("masses must be finite and >= 0");
        if (m == 0.0)
            massless_seen = true;
        else if (massless_seen)
            throw DomainError("massless bodies must be trailing");
    }
}

SystemConfig SystemConfig::paired(int n_pairs, int n_free, std::vector<double> masses, double G) {
    SystemConfig cfg;
    cfg.pairs = n_pairs;
    cfg.free_bodies = n_free;
    cfg.masses = std::move(masses);
    cfg.G = G;
    cfg.validate();
    return cfg;
}

void State::to_flat(std::span<double> out) const {
    const size_t n = pos.size();
    for (size_t i = 0; i < n; ++i) {
        out[2 * i] = pos[i].x;
        out[2 * i + 1] = pos[i].y;
        out[2 * n + 2 * i] = vel[i].x;
        out[2 * n + 2 * i + 1] = vel[i].y;
    }
}

State State::from_flat(double t, std::span<const double> flat) {
    State s;
    s.t = t;
    const size_t n = flat.size() / 4;
    s.pos.resize(n);
    s.vel.resize(n);
    for (size_t i = 0; i < n; ++i) {
        s.pos[i] = {flat[2 * i], flat[2 * i + 1]};
        s.vel[i] = {flat[2 * n + 2 * i], flat[2 * n + 2 * i + 1]};
    }
    return s;
}

namespace {

// Single acceleration kernel shared by the State API and the integrator's
// flat paths. positions: x0,y0,x1,y1,...; acc likewise.
template <class T>
void accel_kernel(const SystemConfig& cfg, double t, const T* pos, T* acc) {
    const int n = cfg.size();
    for (int i = 0; i < n; ++i) {
        T ax = 0.0, ay = 0.0;
        const T xi = pos[2 * i], yi = pos[2 * i + 1];
        for (int j = 0; j < n; ++j) {
            if (j == i || cfg.massless(j)) continue;
            const T dx = pos[2 * j] - xi;
            const T dy = pos[2 * j + 1] - yi;
            const T r2 = dx * dx + dy * dy;
            if (r2 <= T(kCollisionDistance) * T(kCollisionDistance))
                throw CollisionProximity(static_cast<double>(std::sqrt(r2)), i, j, t);
            const T f = T(cfg.G) * T(cfg.masses[static_cast<size_t>(j)]) / (r2 * std::sqrt(r2));
            ax += f * dx;
            ay += f * dy;
        }
        acc[2 * i] = ax;
        acc[2 * i + 1] = ay;
    }
}

}  // namespace

void nbody_field_flat(const SystemConfig& cfg, double t, std::span<const double> u,
                      std::span<double> du) {
    const size_t n2 = u.size() / 2;
    std::copy(u.begin() + static_cast<long>(n2), u.end(), du.begin());
    accel_kernel(cfg, t, u.data(), du.data() + n2);
}

void nbody_field_flat_ld(const SystemConfig& cfg, double t, std::span<const long double> u,
                         std::span<long double> du) {
    const size_t n2 = u.size() / 2;
    std::copy(u.begin() + static_cast<long>(n2), u.end(), du.begin());
    accel_kernel(cfg, t, u.data(), du.data() + n2);
}

std::vector<Vec2> accelerations(const SystemConfig& config, const State& s) {
    if (s.size() != config.size()) throw DimensionMismatch("state/config body counts differ");
    const size_t n = static_cast<size_t>(config.size());
    std::vector<double> pos(2 * n), acc(2 * n);
    for (size_t i = 0; i < n; ++i) {
        pos[2 * i] = s.pos[i].x;
        pos[2 * i + 1] = s.pos[i].y;
    }
    accel_kernel(config, s.t, pos.data(), acc.data());
    std::vector<Vec2> out(n);
    for (size_t i = 0; i < n; ++i) out[i] = {acc[2 * i], acc[2 * i + 1]};
    return out;
}

State vector_field(const SystemConfig& config, const State& s) {
    State deriv;
    deriv.t = 1.0;
    deriv.pos = s.vel;
    deriv.vel = accelerations(config, s);
    return deriv;
}

double total_energy(const SystemConfig& config, const State& s) {
    const int n = config.size();
    double kinetic = 0.0, potential = 0.0;
    for (int i = 0; i < n; ++i) {
        if (config.massless(i)) continue;
        kinetic += 0.5 * config.masses[static_cast<size_t>(i)] * s.vel[static_cast<size_t>(i)].norm2();
        for (int j = i + 1; j < n; ++j) {
            if (config.massless(j)) continue;
            const double r = (s.pos[static_cast<size_t>(j)] - s.pos[static_cast<size_t>(i)]).norm();
            if (r <= kCollisionDistance) throw CollisionProximity(r, i, j, s.t);
            potential -= config.G * config.masses[static_cast<size_t>(i)] *
                         config.masses[static_cast<size_t>(j)] / r;
        }
    }
    return kinetic + potential;
}

double min_pairwise_distance(const State& s) {
    const int n = s.size();
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            best = std::min(best, (s.pos[static_cast<size_t>(j)] - s.pos[static_cast<size_t>(i)]).norm());
    return best;
}

double min_pairwise_distance(const SystemConfig& config, const State& s) {
    const int n = config.size();
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            if (config.massless(i) && config.massless(j)) continue;
            best = std::min(best, (s.pos[static_cast<size_t>(j)] - s.pos[static_cast<size_t>(i)]).norm());
        }
    return best;
}

double state_inf_distance(const State& a, const State& b) {
    if (a.size() != b.size()) throw DimensionMismatch("state sizes differ");
    double best = 0.0;
    for (size_t i = 0; i < a.pos.size(); ++i) {
        best = std::max(best, std::abs(a.pos[i].x - b.pos[i].x));
        best = std::max(best, std::abs(a.pos[i].y - b.pos[i].y));
        best = std::max(best, std::abs(a.vel[i].x - b.vel[i].x));
        best = std::max(best, std::abs(a.vel[i].y - b.vel[i].y));
    }
    return best;
}

}  // namespace fig8
