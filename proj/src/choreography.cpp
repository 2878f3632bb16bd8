#include "fig8/choreography.hpp"

#include <cmath>
#include <limits>

#include "linsolve.hpp"

namespace fig8 {

const EightConstants& printed_eight() {
    static const EightConstants c{
        {Vec2{-0.54050854325, 0.3452633140}, Vec2{-0.54050854325, -0.3452633140},
         Vec2{1.081017086500, 0.0}},
        {Vec2{1.0971223818, -0.23360476285}, Vec2{-1.0971223818, -0.23360476285},
         Vec2{0.0, 0.46720952570}},
        6.32591398};
    return c;
}

SystemConfig three_body_config() { return SystemConfig::paired(1, 1, {1.0, 1.0, 1.0}); }

SystemConfig restricted_config() { return SystemConfig::paired(1, 2, {1.0, 1.0, 1.0, 0.0}); }

State eight_initial_state(const EightConstants& constants) {
    State s;
    s.t = 0.0;
    s.pos.assign(constants.positions.begin(), constants.positions.end());
    s.vel.assign(constants.velocities.begin(), constants.velocities.end());
    return s;
}

State restricted_initial_state(double x40, double vy40, const EightConstants& constants) {
    const Vec2 particle{x40, 0.0};
    for (size_t i = 0; i < 3; ++i) {
        const double d = (constants.positions[i] - particle).norm();
        if (d <= kCollisionDistance) throw CollisionProximity(d, static_cast<int>(i), 3, 0.0);
    }
    State s = eight_initial_state(constants);
    s.pos.push_back(particle);
    s.vel.push_back({0.0, vy40});
    return s;
}

double measured_period(const EightConstants& constants, const IntegratorSettings& settings) {
    const SystemConfig cfg = three_body_config();
    const State u0 = eight_initial_state(constants);
    Trajectory traj = integrate(cfg, u0, 0.55 * constants.period, settings);
    if (!traj.ok()) throw Error("choreography integration failed while measuring the period");
    const double t_half =
        find_event(traj, [](const State& s) { return s.pos[2].y; }, 0.5 * constants.period);
    // Guard against having caught a center passage instead of the axis return.
    const SymmetryDescriptor desc{1, 1, 0.0, 1};
    if (inf_norm(fixed_point_residual(desc, traj.at(t_half))) > 1e-4)
        throw Error("half-period state is not a Fix(Phi_{0,1}) configuration");
    return 2.0 * t_half;
}

namespace {

// The six independent reversible-configuration parameters of a 3-body state.
struct EightParams {
    double x1, y1, vx1, vy1, x3, vy3;

    static EightParams of(const EightConstants& c) {
        return {c.positions[0].x, c.positions[0].y, c.velocities[0].x,
                c.velocities[0].y, c.positions[2].x, c.velocities[2].y};
    }
    EightConstants to_constants(double period) const {
        return {{Vec2{x1, y1}, Vec2{x1, -y1}, Vec2{x3, 0.0}},
                {Vec2{vx1, vy1}, Vec2{-vx1, vy1}, Vec2{0.0, vy3}},
                period};
    }
};

// Fix(Phi_{0,1}) violation of the flow endpoint at t = period/2, evaluated
// in extended precision: sensitive orbits later amplify any residual
// inconsistency of the choreography data by ~1e6, so the refinement has to
// land well below the double-flow noise.
void half_return_residual(const SystemConfig& cfg, const EightParams& p, double t_half,
                          const IntegratorSettings& settings, double* r) {
    IntegratorSettings tight = settings;
    tight.rel_tol = tight.abs_tol = std::min(settings.rel_tol, 1e-15);
    const State end =
        flow_extended(cfg, eight_initial_state(p.to_constants(2.0 * t_half)), t_half, tight);
    r[0] = end.pos[0].x - end.pos[1].x;
    r[1] = end.pos[0].y + end.pos[1].y;
    r[2] = end.vel[0].x + end.vel[1].x;
    r[3] = end.vel[0].y - end.vel[1].y;
    r[4] = end.pos[2].y;
    r[5] = end.vel[2].x;
}

}  // namespace

EightConstants refine_choreography(const EightConstants& constants,
                                   const IntegratorSettings& settings, RefineInfo* info) {
    const SystemConfig cfg = three_body_config();
    const double t_half = 0.5 * constants.period;
    EightParams p = EightParams::of(constants);
    double* q = &p.x1;

    double rn = 0.0;
    int iter = 0;
    for (; iter < 8; ++iter) {
        double r0[6];
        half_return_residual(cfg, p, t_half, settings, r0);
        rn = 0.0;
        for (double v : r0) rn = std::max(rn, std::abs(v));
        if (rn < 1e-14) break;

        std::vector<double> J(36), rhs(r0, r0 + 6);
        for (int j = 0; j < 6; ++j) {
            const double save = q[j];
            const double h = 1e-8 * std::max(1.0, std::abs(save));
            double rp[6], rm[6];
            q[j] = save + h;
            half_return_residual(cfg, p, t_half, settings, rp);
            q[j] = save - h;
            half_return_residual(cfg, p, t_half, settings, rm);
            q[j] = save;
            for (int i = 0; i < 6; ++i) J[static_cast<size_t>(i * 6 + j)] = (rp[i] - rm[i]) / (2.0 * h);
        }
        for (double& v : rhs) v = -v;
        detail::solve_dense(6, J, rhs);
        for (int j = 0; j < 6; ++j) q[j] += rhs[static_cast<size_t>(j)];
    }
    if (rn >= 1e-10)
        throw Error("choreography refinement did not converge (residual " + detail::sci(rn) + ")");

    const EightConstants refined = p.to_constants(constants.period);
    const double shift =
        state_inf_distance(eight_initial_state(refined), eight_initial_state(constants));
    if (shift > 1e-4)
        throw Error("given constants are too far from a symmetric choreography (shift " +
                    detail::sci(shift) + ")");
    if (info) *info = {iter, rn, shift};
    return refined;
}

namespace {

// Residuals of the three reversible configurations for a 3-body state.
struct LabelPick {
    int j;
    double best;
    double second;
};

LabelPick pick_label(const State& s) {
    double res[3];
    for (int j = 1; j <= 3; ++j) {
        const SymmetryDescriptor desc{1, 1, 0.0, j};
        res[j - 1] = inf_norm(fixed_point_residual(desc, s));
    }
    int jb = 0;
    for (int j = 1; j < 3; ++j)
        if (res[j] < res[jb]) jb = j;
    double second = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 3; ++j)
        if (j != jb) second = std::min(second, res[j]);
    return {jb + 1, res[jb], second};
}

LabelCycle scan_labels(const EightConstants& c, const IntegratorSettings& settings) {
    const double tbar = c.t_bar();
    Trajectory traj = integrate(three_body_config(), eight_initial_state(c), 13.0 * tbar, settings);
    if (!traj.ok()) throw Error("choreography integration failed during label scan");

    LabelPick picks[6];
    for (int m = 1; m <= 6; ++m) {
        picks[m - 1] = pick_label(traj.at(2.0 * m * tbar));
        const auto& p = picks[m - 1];
        if (p.best > 1e-6)
            throw Error("no reversible configuration at m=" + std::to_string(m));
        if (p.second - p.best < 1e-6) throw AmbiguousLabel(p.best, p.second);
    }
    if (picks[2].j != 1) throw Error("label cycle does not return to Fix(Phi_{0,1}) at m=3");
    for (int m = 0; m < 3; ++m)
        if (picks[m].j != picks[m + 3].j) throw Error("label cycle is not 3-periodic");
    return {{1, picks[0].j, picks[1].j}};
}

}  // namespace

EightContext EightContext::prepare(const EightConstants& constants,
                                   const IntegratorSettings& settings) {
    EightContext ctx;
    ctx.given = constants;
    ctx.settings = settings;
    ctx.refined = refine_choreography(constants, settings, &ctx.refine_info);
    ctx.labels = scan_labels(ctx.refined, settings);
    return ctx;
}

const EightContext& standard_context() {
    static const EightContext ctx = EightContext::prepare();
    return ctx;
}

int primary_configuration_label(const EightContext& ctx, int m) {
    if (m < 0) throw InvalidIndex("m must be nonnegative");
    return ctx.labels.label[static_cast<size_t>(m % 3)];
}

ChoreographyReport verify_choreography(const EightConstants& constants,
                                       const IntegratorSettings& settings) {
    ChoreographyReport rep{};
    rep.period_given = constants.period;

    const SystemConfig cfg = three_body_config();
    const State u0 = eight_initial_state(constants);
    const double span = constants.period * (4.0 / 3.0) + 0.1;
    Trajectory traj = integrate(cfg, u0, span, settings);
    if (!traj.ok()) throw Error("choreography integration failed");

    rep.closure_given = state_inf_distance(traj.at(constants.period), u0);
    try {
        rep.period_measured = measured_period(constants, settings);
        rep.closure_measured = state_inf_distance(traj.at(rep.period_measured), u0);
    } catch (const Error&) {
        // data too inconsistent for the half-return event to mean anything
        rep.period_measured = std::numeric_limits<double>::quiet_NaN();
        rep.closure_measured = std::numeric_limits<double>::infinity();
    }

    bool refinement_ok = true;
    try {
        RefineInfo info;
        const EightConstants refined = refine_choreography(constants, settings, &info);
        rep.refined_shift = info.state_shift;
        const State ur = eight_initial_state(refined);
        IntegratorSettings tight = settings;
        tight.rel_tol = tight.abs_tol = std::min(settings.rel_tol, 1e-15);
        rep.closure_internal =
            state_inf_distance(flow_extended(cfg, ur, refined.period, tight), ur);
    } catch (const Error&) {
        refinement_ok = false;
        rep.refined_shift = std::numeric_limits<double>::infinity();
        rep.closure_internal = std::numeric_limits<double>::infinity();
    }

    // Choreography shift: r_1(t + T/3) retraces some fixed body's path.
    const double third = constants.period / 3.0;
    {
        const State s = traj.at(third);
        int best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (int j = 0; j < 3; ++j) {
            const double d = (s.pos[0] - u0.pos[static_cast<size_t>(j)]).norm();
            if (d < bd) {
                bd = d;
                best = j;
            }
        }
        rep.shift_target_body = best + 1;
        double worst = 0.0;
        for (int g = 0; g < 200; ++g) {
            const double t = constants.period * g / 199.0;
            const Vec2 d = traj.at(t + third).pos[0] - traj.at(t).pos[static_cast<size_t>(best)];
            worst = std::max(worst, d.norm());
        }
        rep.shift_residual = worst;
    }

    const double tbar = constants.t_bar();
    for (int m = 1; m <= 6; ++m) {
        const auto p = pick_label(traj.at(2.0 * m * tbar));
        rep.isosceles[static_cast<size_t>(m - 1)] = {m, p.j, p.best, p.second};
    }

    rep.pass = refinement_ok && rep.closure_given < 1e-6 && rep.closure_internal < 1e-9 &&
               rep.refined_shift < 1e-6 && rep.shift_residual < 1e-5 &&
               rep.isosceles[0].residual < 1e-6;
    return rep;
}

}  // namespace fig8
