#include "fig8/porbits.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <limits>
#include <thread>
#include <tuple>

#include "linsolve.hpp"

namespace fig8 {

namespace {

constexpr double kSolverTol = 1e-10;     // residuals at accepted solutions
constexpr double kRefineTol = 1e-11;     // Newton target for orbit refinement
constexpr double kSoftGuard = 1e-3;      // near-collision truncation of curve traces
constexpr double kFdStep = 1e-7;         // finite-difference step scale
constexpr double kTimeScale = 0.1;       // T0 weight in the arclength metric

double fd_step(double x) { return kFdStep * std::max(1.0, std::abs(x)); }

}  // namespace

const RestrictedProblem& RestrictedProblem::standard() {
    static const RestrictedProblem pr = RestrictedProblem::make(standard_context());
    return pr;
}

BoundaryValues boundary_values(const RestrictedProblem& pr, double x40, double vy40, double T0) {
    const FlowSummary fs = flow_summary(pr.config, pr.initial_state(x40, vy40), T0, pr.ode);
    return {fs.state.pos[3].y, fs.state.vel[3].x, fs.min_pair_distance};
}

SeedPoint find_seed(const RestrictedProblem& pr, int p, SeedResidual which, SeedPoint guess,
                    FrozenCoord frozen) {
    if (p < 1) throw InvalidIndex("p must be a positive integer");
    const double T0 = 2.0 * p * pr.t_bar();
    auto residual = [&](double free_coord) {
        const double x = frozen == FrozenCoord::x40 ? guess.x40 : free_coord;
        const double v = frozen == FrozenCoord::x40 ? free_coord : guess.vy40;
        const BoundaryValues bv = boundary_values(pr, x, v, T0);
        return which == SeedResidual::y ? bv.y4 : bv.vx4;
    };

    double coord = frozen == FrozenCoord::x40 ? guess.vy40 : guess.x40;
    double r = residual(coord);
    for (int iter = 0; iter < 25; ++iter) {
        if (std::abs(r) < kSolverTol) {
            SeedPoint out = guess;
            out.T0 = T0;
            (frozen == FrozenCoord::x40 ? out.vy40 : out.x40) = coord;
            return out;
        }
        const double h = fd_step(coord);
        const double slope = (residual(coord + h) - residual(coord - h)) / (2.0 * h);
        if (slope == 0.0 || !std::isfinite(slope)) throw NoConvergence(iter, std::abs(r));
        const double next = coord - r / slope;
        if (!std::isfinite(next)) throw NoConvergence(iter, std::abs(r));
        coord = next;
        r = residual(coord);
    }
    throw NoConvergence(25, std::abs(r));
}

namespace {

// Continuation working set: scaled coordinates z = (x40, vy40[, T0/10]).
struct TraceWork {
    const RestrictedProblem& pr;
    CurveFamily family;
    double T0_fixed;  // fixed-time families
    int dim;          // unknowns: 2 or 3
    int neq;          // residuals: 1 or 2

    double T0_of(const std::vector<double>& z) const {
        return family == CurveFamily::c_r ? z[2] / kTimeScale : T0_fixed;
    }

    struct Eval {
        double r[2];
        double y4, vx4;
        double min_dist;
        double dy4_dT, dvx4_dT;  // endpoint field components for the c_r time column
    };

    Eval eval(const std::vector<double>& z) const {
        const State s0 = pr.initial_state(z[0], z[1]);
        const FlowSummary fs = flow_summary(pr.config, s0, T0_of(z), pr.ode);
        Eval e{};
        e.y4 = fs.state.pos[3].y;
        e.vx4 = fs.state.vel[3].x;
        e.min_dist = fs.min_pair_distance;
        if (family == CurveFamily::c_r) {
            const auto acc = accelerations(pr.config, fs.state);
            e.dy4_dT = fs.state.vel[3].y;
            e.dvx4_dT = acc[3].x;
        }
        e.r[0] = family == CurveFamily::c_vx ? e.vx4 : e.y4;
        e.r[1] = e.vx4;
        return e;
    }

    // Residual rows of the Jacobian in scaled coordinates; x and vy columns
    // by centered differences, the time column from the endpoint field.
    void jacobian(const std::vector<double>& z, const Eval& at, std::vector<double>& J) const {
        J.assign(static_cast<size_t>(neq * dim), 0.0);
        for (int col = 0; col < 2; ++col) {
            std::vector<double> zp = z, zm = z;
            const double h = fd_step(z[static_cast<size_t>(col)]);
            zp[static_cast<size_t>(col)] += h;
            zm[static_cast<size_t>(col)] -= h;
            const Eval ep = eval(zp), em = eval(zm);
            for (int row = 0; row < neq; ++row)
                J[static_cast<size_t>(row * dim + col)] = (ep.r[row] - em.r[row]) / (2.0 * h);
        }
        if (family == CurveFamily::c_r) {
            J[2] = at.dy4_dT / kTimeScale;
            J[static_cast<size_t>(dim + 2)] = at.dvx4_dT / kTimeScale;
        }
    }
};

double norm_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

void normalize(std::vector<double>& v) {
    const double n = norm_of(v);
    if (n == 0.0) throw Error("zero tangent in continuation");
    for (double& x : v) x /= n;
}

}  // namespace

ContinuationCurve trace_curve(const RestrictedProblem& pr, const SeedPoint& seed,
                              CurveFamily family, const TraceOptions& options) {
    const double tbar = pr.t_bar();
    ContinuationCurve curve;
    curve.family = family;
    curve.p = family == CurveFamily::c_r
                  ? 0
                  : static_cast<int>(std::lround(seed.T0 / (2.0 * tbar)));
    if (family != CurveFamily::c_r &&
        std::abs(seed.T0 - 2.0 * curve.p * tbar) > 1e-9 * std::max(1.0, seed.T0))
        throw DomainError("fixed-time seed T0 is not an even multiple of t_bar");

    TraceWork work{pr, family, seed.T0, family == CurveFamily::c_r ? 3 : 2,
                   family == CurveFamily::c_r ? 2 : 1};

    std::vector<double> z = {seed.x40, seed.vy40};
    if (family == CurveFamily::c_r) z.push_back(seed.T0 * kTimeScale);

    auto push_point = [&](const std::vector<double>& zz, const TraceWork::Eval& e) {
        const double r_def = e.r[0];
        const double r_other = family == CurveFamily::c_vx ? e.y4 : e.vx4;
        curve.points.push_back({zz[0], zz[1], work.T0_of(zz), r_def, r_other, e.min_dist});
    };

    if (options.max_points <= 0) return curve;

    TraceWork::Eval e0 = work.eval(z);
    {
        double worst = std::abs(e0.r[0]);
        if (work.neq == 2) worst = std::max(worst, std::abs(e0.r[1]));
        if (worst > kSolverTol)
            throw Error("continuation seed violates the family residual (" + detail::sci(worst) +
                        ")");
    }
    if (e0.min_dist < kSoftGuard) {
        curve.end_reason = CurveEnd::collision_guard;
        return curve;
    }
    push_point(z, e0);

    // Initial tangent from the Jacobian null space; a secant afterwards.
    std::vector<double> tangent(static_cast<size_t>(work.dim));
    {
        std::vector<double> J;
        work.jacobian(z, e0, J);
        if (work.dim == 2) {
            tangent = {-J[1], J[0]};
        } else {
            tangent = {J[1] * J[5] - J[2] * J[4], J[2] * J[3] - J[0] * J[5],
                       J[0] * J[4] - J[1] * J[3]};
        }
        normalize(tangent);
        size_t k = 0;
        for (size_t i = 1; i < tangent.size(); ++i)
            if (std::abs(tangent[i]) > std::abs(tangent[k])) k = i;
        if (tangent[k] < 0.0)
            for (double& v : tangent) v = -v;
        for (double& v : tangent) v *= options.direction;
    }

    double step = options.step;
    int halvings_left = 6;
    while (static_cast<int>(curve.points.size()) < options.max_points) {
        std::vector<double> z_pred(static_cast<size_t>(work.dim));
        for (size_t i = 0; i < z_pred.size(); ++i) z_pred[i] = z[i] + step * tangent[i];

        // Newton on [residuals; tangent . (z - z_pred)] = 0.
        std::vector<double> zc = z_pred;
        bool converged = false;
        TraceWork::Eval ec{};
        try {
            for (int iter = 0; iter < 8; ++iter) {
                ec = work.eval(zc);
                double worst = std::abs(ec.r[0]);
                if (work.neq == 2) worst = std::max(worst, std::abs(ec.r[1]));
                double c = 0.0;
                for (size_t i = 0; i < zc.size(); ++i) c += tangent[i] * (zc[i] - z_pred[i]);
                if (worst < kSolverTol && std::abs(c) < 1e-8) {
                    converged = true;
                    break;
                }
                std::vector<double> Jr;
                work.jacobian(zc, ec, Jr);
                const int n = work.dim;
                std::vector<double> A(static_cast<size_t>(n * n)), rhs(static_cast<size_t>(n));
                for (int row = 0; row < work.neq; ++row) {
                    for (int col = 0; col < n; ++col)
                        A[static_cast<size_t>(row * n + col)] = Jr[static_cast<size_t>(row * n + col)];
                    rhs[static_cast<size_t>(row)] = -ec.r[row];
                }
                for (int col = 0; col < n; ++col)
                    A[static_cast<size_t>((n - 1) * n + col)] = tangent[static_cast<size_t>(col)];
                rhs[static_cast<size_t>(n - 1)] = -c;
                detail::solve_dense(n, A, rhs);
                bool finite = true;
                for (double v : rhs) finite = finite && std::isfinite(v);
                if (!finite) break;
                for (size_t i = 0; i < zc.size(); ++i) zc[i] += rhs[i];
            }
        } catch (const CollisionProximity&) {
            curve.end_reason = CurveEnd::collision_guard;
            return curve;
        } catch (const StepSizeUnderflow&) {
            // unresolvable close encounter inside a corrector shot
            curve.end_reason = CurveEnd::collision_guard;
            return curve;
        }

        if (!converged) {
            if (--halvings_left < 0) {
                curve.end_reason = CurveEnd::corrector_failure;
                return curve;
            }
            step *= 0.5;
            continue;
        }
        if (ec.min_dist < kSoftGuard) {
            curve.end_reason = CurveEnd::collision_guard;
            return curve;
        }

        std::vector<double> secant(static_cast<size_t>(work.dim));
        for (size_t i = 0; i < secant.size(); ++i) secant[i] = zc[i] - z[i];
        normalize(secant);
        tangent = secant;
        z = zc;
        push_point(z, ec);
        halvings_left = 6;
        step = std::min(options.step, step * 2.0);
    }
    curve.end_reason = CurveEnd::max_points;
    return curve;
}

namespace {

// Newton on (y4(T0), vx4(T0)) over (x40, vy40); returns iterations used.
// The shots run in extended precision when requested: orbit sensitivities
// up to ~1e6 turn double-flow truncation into visible closure error.
int newton_boundary_pair(const RestrictedProblem& pr, double T0, double& x, double& v,
                         double& res_y, double& res_vx, int max_iter, double tol,
                         bool extended = false) {
    IntegratorSettings tight = pr.ode;
    if (extended) tight.rel_tol = tight.abs_tol = std::min(pr.ode.rel_tol, 1e-15);
    auto shoot = [&](double xx, double vv) {
        if (extended) {
            const State end = flow_extended(pr.config, pr.initial_state(xx, vv), T0, tight);
            return std::pair<double, double>(end.pos[3].y, end.vel[3].x);
        }
        const BoundaryValues bv = boundary_values(pr, xx, vv, T0);
        return std::pair<double, double>(bv.y4, bv.vx4);
    };
    auto [ry, rv] = shoot(x, v);
    for (int iter = 0;; ++iter) {
        const double rn = std::max(std::abs(ry), std::abs(rv));
        if (rn < tol) {
            res_y = ry;
            res_vx = rv;
            return iter;
        }
        if (iter >= max_iter) throw NoConvergence(iter, rn);
        const double hx = fd_step(x), hv = fd_step(v);
        const auto [ry_xp, rv_xp] = shoot(x + hx, v);
        const auto [ry_xm, rv_xm] = shoot(x - hx, v);
        const auto [ry_vp, rv_vp] = shoot(x, v + hv);
        const auto [ry_vm, rv_vm] = shoot(x, v - hv);
        std::vector<double> J = {(ry_xp - ry_xm) / (2 * hx), (ry_vp - ry_vm) / (2 * hv),
                                 (rv_xp - rv_xm) / (2 * hx), (rv_vp - rv_vm) / (2 * hv)};
        std::vector<double> rhs = {-ry, -rv};
        detail::solve_dense(2, J, rhs);
        if (!std::isfinite(rhs[0]) || !std::isfinite(rhs[1])) throw NoConvergence(iter, rn);
        // Sensitive legs floor above tol: once the step is below coordinate
        // rounding the residual cannot improve further.
        const double rel_step = std::max(std::abs(rhs[0]) / std::max(1.0, std::abs(x)),
                                         std::abs(rhs[1]) / std::max(1.0, std::abs(v)));
        if (rel_step < 1e-13) {
            if (rn < 1e-8) {
                res_y = ry;
                res_vx = rv;
                return iter;
            }
            throw NoConvergence(iter, rn);
        }
        x += rhs[0];
        v += rhs[1];
        std::tie(ry, rv) = shoot(x, v);
    }
}

bool segments_cross(const Vec2& a0, const Vec2& a1, const Vec2& b0, const Vec2& b1, Vec2& out) {
    const Vec2 r = a1 - a0, s = b1 - b0;
    const double denom = r.x * s.y - r.y * s.x;
    if (denom == 0.0) return false;
    const Vec2 d = b0 - a0;
    const double t = (d.x * s.y - d.y * s.x) / denom;
    const double u = (d.x * r.y - d.y * r.x) / denom;
    if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) return false;
    out = a0 + t * r;
    return true;
}

}  // namespace

std::vector<SeedPoint> find_intersection(const RestrictedProblem& pr, const ContinuationCurve& a,
                                         const ContinuationCurve& b) {
    if (a.family == b.family) return {};  // rejected; a crossing of one family with itself
    const ContinuationCurve& cy = a.family == CurveFamily::c_y ? a : b;
    const ContinuationCurve& cvx = a.family == CurveFamily::c_y ? b : a;
    if (cy.family != CurveFamily::c_y || cvx.family != CurveFamily::c_vx)
        throw DomainError("intersection expects one C_(y,2p) and one C_(vx,2p) curve");
    if (cy.p != cvx.p) throw DomainError("intersection expects curves with equal p");

    const double T0 = 2.0 * cy.p * pr.t_bar();
    std::vector<SeedPoint> found;
    for (size_t i = 0; i + 1 < cy.points.size(); ++i) {
        const Vec2 a0{cy.points[i].x40, cy.points[i].vy40};
        const Vec2 a1{cy.points[i + 1].x40, cy.points[i + 1].vy40};
        for (size_t j = 0; j + 1 < cvx.points.size(); ++j) {
            const Vec2 b0{cvx.points[j].x40, cvx.points[j].vy40};
            const Vec2 b1{cvx.points[j + 1].x40, cvx.points[j + 1].vy40};
            Vec2 guess;
            if (!segments_cross(a0, a1, b0, b1, guess)) continue;
            double x = guess.x, v = guess.y, ry = 0.0, rv = 0.0;
            try {
                newton_boundary_pair(pr, T0, x, v, ry, rv, 25, kSolverTol);
            } catch (const Error&) {
                continue;
            }
            bool duplicate = false;
            for (const SeedPoint& s : found)
                duplicate = duplicate ||
                            (std::abs(s.x40 - x) < 1e-8 && std::abs(s.vy40 - v) < 1e-8);
            if (!duplicate) found.push_back({x, v, T0});
        }
    }
    std::sort(found.begin(), found.end(),
              [](const SeedPoint& l, const SeedPoint& r) { return l.x40 < r.x40; });
    return found;
}

OrbitRecord refine_periodic(const RestrictedProblem& pr, double x40, double vy40, int m) {
    if (m < 1) throw InvalidIndex("m must be a positive integer");
    const double tbar = pr.t_bar();
    const double T0 = 2.0 * m * tbar;

    OrbitRecord rec;
    rec.T0_over_Tbar = 2 * m;
    rec.x4 = x40;
    rec.vy4 = vy40;
    rec.iterations = newton_boundary_pair(pr, T0, rec.x4, rec.vy4, rec.res_y, rec.res_vx, 25,
                                          kRefineTol, /*extended=*/true);
    rec.res_y = std::abs(rec.res_y);
    rec.res_vx = std::abs(rec.res_vx);

    // Classify the endpoint's reversible configuration.
    const State u0 = pr.initial_state(rec.x4, rec.vy4);
    const State end = flow(pr.config, u0, T0, pr.ode);
    double res[3];
    for (int j = 1; j <= 3; ++j)
        res[j - 1] = inf_norm(fixed_point_residual(SymmetryDescriptor::restricted(0.0, j), end));
    int jb = 0;
    for (int j = 1; j < 3; ++j)
        if (res[j] < res[jb]) jb = j;
    double second = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 3; ++j)
        if (j != jb) second = std::min(second, res[j]);
    if (res[jb] > 1e-6)
        throw Error("refined endpoint is not a reversible configuration (residual " +
                    detail::sci(res[jb]) + ")");
    if (second - res[jb] < 1e-6) throw AmbiguousLabel(res[jb], second);
    rec.j_end = jb + 1;

    const PeriodClassification pc = classify_period(1, rec.j_end, T0);
    rec.M = pc.M;
    rec.T_over_Tbar = 4 * m * pc.M;

    // Closure in extended precision: sensitive orbits amplify the double
    // integration noise by up to ~1e6 over the full period, which would
    // otherwise dominate the measurement.
    IntegratorSettings closure_settings = pr.ode;
    closure_settings.rel_tol = closure_settings.abs_tol = 1e-15;
    const State uT = flow_extended(pr.config, u0, pc.T, closure_settings);
    rec.res_closure = state_inf_distance(uT, u0);
    rec.res_closure_particle =
        std::max(std::max(std::abs(uT.pos[3].x - u0.pos[3].x), std::abs(uT.pos[3].y - u0.pos[3].y)),
                 std::max(std::abs(uT.vel[3].x - u0.vel[3].x), std::abs(uT.vel[3].y - u0.vel[3].y)));
    return rec;
}

std::vector<OrbitRecord> detect_periodic_on_curve(const RestrictedProblem& pr,
                                                  const ContinuationCurve& curve) {
    if (curve.family != CurveFamily::c_r)
        throw DomainError("periodic-orbit detection runs on C_R curves");
    const double tbar = pr.t_bar();
    std::vector<OrbitRecord> records;
    for (size_t i = 0; i + 1 < curve.points.size(); ++i) {
        const CurvePoint& a = curve.points[i];
        const CurvePoint& b = curve.points[i + 1];
        const double ma = a.T0 / (2.0 * tbar), mb = b.T0 / (2.0 * tbar);
        const int lo = static_cast<int>(std::ceil(std::min(ma, mb)));
        const int hi = static_cast<int>(std::floor(std::max(ma, mb)));
        for (int m = std::max(1, lo); m <= hi; ++m) {
            const double lambda = (2.0 * m * tbar - a.T0) / (b.T0 - a.T0);
            const double x = a.x40 + lambda * (b.x40 - a.x40);
            const double v = a.vy40 + lambda * (b.vy40 - a.vy40);
            try {
                const OrbitRecord rec = refine_periodic(pr, x, v, m);
                bool duplicate = false;
                for (const OrbitRecord& r : records)
                    duplicate = duplicate || (r.T0_over_Tbar == rec.T0_over_Tbar &&
                                              std::abs(r.x4 - rec.x4) < 1e-8);
                if (!duplicate) records.push_back(rec);
            } catch (const Error&) {
                // near-collision or non-converging crossing; skip
            }
        }
    }
    std::sort(records.begin(), records.end(),
              [](const OrbitRecord& l, const OrbitRecord& r) { return l.x4 < r.x4; });
    return records;
}

CatalogReport reproduce_table1(const RestrictedProblem& pr, std::span<const int> rows, int jobs) {
    const auto table = reference_table();
    std::vector<CatalogRow> work;
    if (rows.empty()) {
        work.assign(table.begin(), table.end());
    } else {
        for (int idx : rows) {
            if (idx < 1 || idx > static_cast<int>(table.size()))
                throw InvalidIndex("catalog has rows 1.." + std::to_string(table.size()));
            work.push_back(table[static_cast<size_t>(idx - 1)]);
        }
    }

    auto run_row = [&pr](const CatalogRow& row) {
        RowOutcome out;
        out.index = row.index;
        try {
            OrbitRecord rec = refine_periodic(pr, row.x4, row.vy4, row.T0_over_Tbar / 2);
            rec.index = row.index;
            out.record = rec;
            out.status = RowOutcome::Status::ok;
            out.dx = std::abs(rec.x4 - row.x4);
            out.dvy = std::abs(rec.vy4 - row.vy4);
            out.period_matches = rec.T_over_Tbar == row.T_over_Tbar;
        } catch (const CollisionProximity& e) {
            out.status = RowOutcome::Status::collision;
            out.message = e.what();
        } catch (const NoConvergence& e) {
            out.status = RowOutcome::Status::no_convergence;
            out.message = e.what();
        } catch (const AmbiguousLabel& e) {
            out.status = RowOutcome::Status::ambiguous;
            out.message = e.what();
        } catch (const Error& e) {
            out.status = RowOutcome::Status::error;
            out.message = e.what();
        }
        return out;
    };

    if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
    jobs = std::max(1, std::min<int>(jobs, static_cast<int>(work.size())));

    CatalogReport report;
    report.rows.resize(work.size());
    if (jobs == 1) {
        for (size_t i = 0; i < work.size(); ++i) report.rows[i] = run_row(work[i]);
    } else {
        std::vector<std::future<void>> workers;
        std::atomic<size_t> next{0};
        for (int w = 0; w < jobs; ++w)
            workers.push_back(std::async(std::launch::async, [&]() {
                for (size_t i = next.fetch_add(1); i < work.size(); i = next.fetch_add(1))
                    report.rows[i] = run_row(work[i]);
            }));
        for (auto& f : workers) f.get();
    }

    for (const RowOutcome& out : report.rows) {
        if (out.status == RowOutcome::Status::ok) {
            ++report.refined_ok;
            report.all_periods_match = report.all_periods_match && out.period_matches;
        } else if (out.status == RowOutcome::Status::collision) {
            ++report.failed_collision;
        } else {
            ++report.failed_other;
        }
    }
    return report;
}

}  // namespace fig8
