#include "fig8/symmetry.hpp"

#include <array>
#include <cmath>

#include "fig8/errors.hpp"

namespace fig8 {

namespace {

void check_dims(const SymmetryDescriptor& desc, const State& s) {
    if (s.size() != desc.size())
        throw DimensionMismatch("state has " + std::to_string(s.size()) + " bodies, descriptor expects " +
                                std::to_string(desc.size()));
    if (desc.perm_index < 1 || desc.perm_index > 3)
        throw InvalidIndex("perm_index must be 1, 2 or 3");
    if (desc.perm_index != 1 && !(desc.pairs == 1 && desc.free_bodies >= 1))
        throw InvalidIndex("cyclic relabeling needs n=1 with a free body of equal mass");
}

// Destination maps of sigma: 1 -> 3 -> 2 -> 1 (0-based) and its powers.
constexpr std::array<int, 3> kSigma = {2, 0, 1};
constexpr std::array<int, 3> kSigma2 = {1, 2, 0};

// out[perm[i]] = in[i] for the first three bodies, identity beyond.
State relabel3(const State& s, const std::array<int, 3>& perm) {
    State out = s;
    for (int i = 0; i < 3; ++i) {
        out.pos[static_cast<size_t>(perm[static_cast<size_t>(i)])] = s.pos[static_cast<size_t>(i)];
        out.vel[static_cast<size_t>(perm[static_cast<size_t>(i)])] = s.vel[static_cast<size_t>(i)];
    }
    return out;
}

State apply_phi_base(const SymmetryDescriptor& desc, const State& s) {
    State out;
    out.t = s.t;
    const size_t n = s.pos.size();
    out.pos.resize(n);
    out.vel.resize(n);
    for (size_t i = 0; i < n; ++i) {
        out.pos[i] = rotate(reflect_x(s.pos[i]), desc.theta);
        out.vel[i] = rotate(-reflect_x(s.vel[i]), desc.theta);
    }
    for (int p = 0; p < desc.pairs; ++p) {
        std::swap(out.pos[static_cast<size_t>(2 * p)], out.pos[static_cast<size_t>(2 * p + 1)]);
        std::swap(out.vel[static_cast<size_t>(2 * p)], out.vel[static_cast<size_t>(2 * p + 1)]);
    }
    return out;
}

}  // namespace

State apply_phi(const SymmetryDescriptor& desc, const State& s) {
    check_dims(desc, s);
    if (desc.perm_index == 1) return apply_phi_base(desc, s);
    // Phi_{theta,j} = Sigma^(j-1) o Phi_{theta,1} o Sigma^-(j-1)
    const auto& fwd = desc.perm_index == 2 ? kSigma : kSigma2;
    const auto& inv = desc.perm_index == 2 ? kSigma2 : kSigma;
    return relabel3(apply_phi_base(desc, relabel3(s, inv)), fwd);
}

State apply_pair_swap(int pairs, const State& s) {
    State out = s;
    for (int p = 0; p < pairs; ++p) {
        std::swap(out.pos[static_cast<size_t>(2 * p)], out.pos[static_cast<size_t>(2 * p + 1)]);
        std::swap(out.vel[static_cast<size_t>(2 * p)], out.vel[static_cast<size_t>(2 * p + 1)]);
    }
    return out;
}

State apply_reflection(const State& s) {
    State out = s;
    for (size_t i = 0; i < out.pos.size(); ++i) {
        out.pos[i] = reflect_x(s.pos[i]);
        out.vel[i] = -reflect_x(s.vel[i]);
    }
    return out;
}

State rotate_state(double alpha, const State& s) {
    State out = s;
    for (size_t i = 0; i < out.pos.size(); ++i) {
        out.pos[i] = rotate(s.pos[i], alpha);
        out.vel[i] = rotate(s.vel[i], alpha);
    }
    return out;
}

State fixed_point_embed(const SymmetryDescriptor& desc, const FixedPointParams& params) {
    if (desc.theta != 0.0)
        throw DomainError("fixed points are parameterized at theta = 0; rotate afterwards");
    if (static_cast<int>(params.pair_pos.size()) != desc.pairs ||
        static_cast<int>(params.pair_vel.size()) != desc.pairs ||
        static_cast<int>(params.free_x.size()) != desc.free_bodies ||
        static_cast<int>(params.free_vy.size()) != desc.free_bodies)
        throw DimensionMismatch("parameter block sizes do not match descriptor");

    State s;
    s.t = 0.0;
    s.pos.resize(static_cast<size_t>(desc.size()));
    s.vel.resize(static_cast<size_t>(desc.size()));
    for (int p = 0; p < desc.pairs; ++p) {
        const Vec2 r = params.pair_pos[static_cast<size_t>(p)];
        const Vec2 v = params.pair_vel[static_cast<size_t>(p)];
        s.pos[static_cast<size_t>(2 * p)] = r;
        s.vel[static_cast<size_t>(2 * p)] = v;
        s.pos[static_cast<size_t>(2 * p + 1)] = {r.x, -r.y};
        s.vel[static_cast<size_t>(2 * p + 1)] = {-v.x, v.y};
    }
    for (int l = 0; l < desc.free_bodies; ++l) {
        s.pos[static_cast<size_t>(2 * desc.pairs + l)] = {params.free_x[static_cast<size_t>(l)], 0.0};
        s.vel[static_cast<size_t>(2 * desc.pairs + l)] = {0.0, params.free_vy[static_cast<size_t>(l)]};
    }
    if (desc.perm_index == 1) return s;
    check_dims(desc, s);
    return relabel3(s, desc.perm_index == 2 ? kSigma : kSigma2);
}

std::vector<double> fixed_point_residual(const SymmetryDescriptor& desc, const State& s) {
    const State image = apply_phi(desc, s);
    const size_t n = s.pos.size();
    std::vector<double> res(4 * n);
    for (size_t i = 0; i < n; ++i) {
        res[2 * i] = image.pos[i].x - s.pos[i].x;
        res[2 * i + 1] = image.pos[i].y - s.pos[i].y;
        res[2 * n + 2 * i] = image.vel[i].x - s.vel[i].x;
        res[2 * n + 2 * i + 1] = image.vel[i].y - s.vel[i].y;
    }
    return res;
}

double inf_norm(std::span<const double> v) {
    double best = 0.0;
    for (double x : v) best = std::max(best, std::abs(x));
    return best;
}

PeriodClassification classify_period(int j_start, int j_end, double T0) {
    if (j_start != 1) throw InvalidIndex("orbits are launched from Fix(Phi_{0,1})");
    if (j_end < 1 || j_end > 3) throw InvalidIndex("j_end must be 1, 2 or 3");
    const int M = (j_end == 1) ? 1 : 3;
    return {M, 2.0 * M * T0};
}

}  // namespace fig8
