// Command-line front end: choreography verification, catalog reproduction,
// curve tracing, orbit export and closed-form seeding.
//
// Exit codes: 0 pass, 1 assertion fail, 2 systemic failure, 3 no
// convergence, 4 collision proximity, 5 domain error, 64 usage.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fig8/io.hpp"
#include "fig8/kepler2b.hpp"

using namespace fig8;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitSystemic = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitCollision = 4;
constexpr int kExitDomain = 5;
constexpr int kExitUsage = 64;

struct CommonFlags {
    double rtol = 1e-12;
    double atol = 1e-12;
    std::string constants_path;

    IntegratorSettings settings() const {
        IntegratorSettings s;
        s.rel_tol = rtol;
        s.abs_tol = atol;
        return s;
    }

    EightConstants constants() const {
        std::string path = constants_path;
        if (path.empty()) {
            if (const char* env = std::getenv("CHOREO_CONSTANTS")) path = env;
        }
        return path.empty() ? printed_eight() : load_constants_override(path);
    }
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--rtol", flags.rtol, "relative integration tolerance")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--atol", flags.atol, "absolute integration tolerance")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--constants", flags.constants_path,
                    "JSON constants override (default: $CHOREO_CONSTANTS or built-in)");
}

nlohmann::ordered_json report_json(const ChoreographyReport& rep) {
    nlohmann::ordered_json j;
    j["period_given"] = rep.period_given;
    j["period_measured"] = rep.period_measured;
    j["closure_given"] = rep.closure_given;
    j["closure_measured"] = rep.closure_measured;
    j["closure_internal"] = rep.closure_internal;
    j["refined_shift"] = rep.refined_shift;
    j["shift_target_body"] = rep.shift_target_body;
    j["shift_residual"] = rep.shift_residual;
    j["isosceles"] = nlohmann::ordered_json::array();
    for (const auto& ic : rep.isosceles)
        j["isosceles"].push_back(
            {{"m", ic.m}, {"j", ic.best_j}, {"residual", ic.residual},
             {"second_residual", ic.second_residual}});
    j["pass"] = rep.pass;
    return j;
}

int cmd_verify_eight(const CommonFlags& flags, bool as_json) {
    ChoreographyReport rep;
    try {
        rep = verify_choreography(flags.constants(), flags.settings());
    } catch (const Error& e) {
        std::cerr << "verify-eight: integration failure: " << e.what() << "\n";
        return kExitSystemic;
    }
    if (as_json) {
        std::cout << report_json(rep).dump(2) << "\n";
    } else {
        std::printf("period (given):            %.9f\n", rep.period_given);
        std::printf("period (measured):         %.12f\n", rep.period_measured);
        std::printf("closure, given period:     %.3e  (threshold 1e-6)\n", rep.closure_given);
        std::printf("closure, measured period:  %.3e\n", rep.closure_measured);
        std::printf("closure, internal refined: %.3e  (threshold 1e-9)\n", rep.closure_internal);
        std::printf("internal state shift:      %.3e\n", rep.refined_shift);
        std::printf("shift property: body 1 -> body %d, residual %.3e  (threshold 1e-5)\n",
                    rep.shift_target_body, rep.shift_residual);
        for (const auto& ic : rep.isosceles)
            std::printf("  t = %2d tbar: Fix(Phi_{0,%d}) residual %.3e (next best %.3e)\n",
                        2 * ic.m, ic.best_j, ic.residual, ic.second_residual);
        std::printf("verdict: %s\n", rep.pass ? "pass" : "FAIL");
    }
    return rep.pass ? kExitPass : kExitFail;
}

int cmd_table1(const CommonFlags& flags, std::vector<int> rows, const std::string& out_path,
               int jobs, bool as_json) {
    const ChoreographyReport chk = verify_choreography(flags.constants(), flags.settings());
    if (!chk.pass) {
        std::cerr << "table1: choreography verification failed (closure "
                  << chk.closure_given << ")\n";
        return kExitSystemic;
    }

    const RestrictedProblem pr =
        RestrictedProblem::make(EightContext::prepare(flags.constants(), flags.settings()));
    const CatalogReport report = reproduce_table1(pr, rows, jobs);
    const bool full_run = rows.empty();

    std::vector<OrbitRecord> records;
    int rows_pass = 0;
    bool noncollision_failure = false;
    std::printf("%3s %6s %6s %5s %10s %10s %9s %9s %9s %6s\n", "row", "T0/Tb", "T/Tb", "iter",
                "|dx4|", "|dvy4|", "res_y", "res_vx", "closure", "state");
    for (const RowOutcome& out : report.rows) {
        if (out.status == RowOutcome::Status::ok) {
            const OrbitRecord& r = out.record;
            records.push_back(r);
            const bool ok = out.period_matches && out.dx < 1e-6 && out.dvy < 1e-6 &&
                            r.res_y < 1e-8 && r.res_vx < 1e-8 && r.iterations <= 6;
            rows_pass += ok ? 1 : 0;
            noncollision_failure = noncollision_failure || !ok;
            std::printf("%3d %6d %6d %5d %10.2e %10.2e %9.1e %9.1e %9.1e %6s\n", r.index,
                        r.T0_over_Tbar, r.T_over_Tbar, r.iterations, out.dx, out.dvy, r.res_y,
                        r.res_vx, r.res_closure, ok ? "ok" : "FAIL");
        } else {
            const char* tag = out.status == RowOutcome::Status::collision ? "collision" : "error";
            noncollision_failure =
                noncollision_failure || out.status != RowOutcome::Status::collision;
            std::printf("%3d  %s: %s\n", out.index, tag, out.message.c_str());
        }
    }
    std::printf("rows passing: %d/%zu, period column matches: %s\n", rows_pass,
                report.rows.size(), report.all_periods_match ? "yes" : "no");

    if (!out_path.empty()) {
        write_orbit_records(out_path, records);
        std::printf("records written to %s\n", out_path.c_str());
    }
    if (as_json) {
        nlohmann::ordered_json j;
        j["rows_pass"] = rows_pass;
        j["rows_total"] = report.rows.size();
        j["failed_collision"] = report.failed_collision;
        j["all_periods_match"] = report.all_periods_match;
        std::cout << j.dump(2) << "\n";
    }

    if (full_run)
        return (rows_pass >= 32 && !noncollision_failure) ? kExitPass : kExitFail;
    return rows_pass == static_cast<int>(report.rows.size()) ? kExitPass : kExitFail;
}

int cmd_trace(const CommonFlags& flags, const std::string& family_arg, int p, double x40,
              double vy40, const std::string& frozen_arg, double step, int max_points,
              double direction, const std::string& out_path, const std::string& orbits_out) {
    std::vector<CurveFamily> families;
    {
        std::stringstream ss(family_arg);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (tok == "cy") families.push_back(CurveFamily::c_y);
            else if (tok == "cvx") families.push_back(CurveFamily::c_vx);
            else if (tok == "cr") families.push_back(CurveFamily::c_r);
            else {
                std::cerr << "trace: unknown family '" << tok << "'\n";
                return kExitUsage;
            }
        }
    }
    if (families.empty() || families.size() > 2 ||
        (families.size() == 2 && (families[0] == CurveFamily::c_r ||
                                  families[1] == CurveFamily::c_r ||
                                  families[0] == families[1]))) {
        std::cerr << "trace: --family takes cy, cvx, cr, or the pair cy,cvx\n";
        return kExitUsage;
    }

    const RestrictedProblem pr =
        RestrictedProblem::make(EightContext::prepare(flags.constants(), flags.settings()));
    const double T0 = 2.0 * p * pr.t_bar();
    const FrozenCoord frozen = frozen_arg == "vy40" ? FrozenCoord::vy40 : FrozenCoord::x40;

    std::ofstream out(out_path);
    if (!out) {
        std::cerr << "trace: cannot open " << out_path << "\n";
        return kExitSystemic;
    }
    if (max_points <= 0) {
        out << "family,p,x40,vy40,T0,res1,res2\n";
        return kExitPass;
    }

    TraceOptions opt;
    opt.step = step;
    opt.max_points = max_points;
    opt.direction = direction;

    std::vector<ContinuationCurve> curves;
    for (CurveFamily family : families) {
        SeedPoint seed{x40, vy40, T0};
        if (family == CurveFamily::c_r) {
            // polish both residuals before continuing in (x40, vy40, T0)
            OrbitRecord rec = refine_periodic(pr, x40, vy40, p);
            seed = {rec.x4, rec.vy4, T0};
        } else {
            seed = find_seed(pr, p, family == CurveFamily::c_y ? SeedResidual::y : SeedResidual::vx,
                             seed, frozen);
        }
        curves.push_back(trace_curve(pr, seed, family, opt));
        const ContinuationCurve& c = curves.back();
        const char* why = c.end_reason == CurveEnd::max_points        ? "max points"
                          : c.end_reason == CurveEnd::collision_guard ? "near-collision guard"
                                                                      : "corrector failure";
        std::printf("%s: %zu points, ended at %s\n", family_tag(family), c.points.size(), why);
    }

    bool first = true;
    for (const ContinuationCurve& c : curves) {
        if (first) {
            write_curve_csv(out, c);
            first = false;
        } else {
            std::stringstream tmp;
            write_curve_csv(tmp, c);
            std::string body = tmp.str();
            out << body.substr(body.find('\n') + 1);
        }
    }
    std::printf("curve data written to %s\n", out_path.c_str());

    if (families.size() == 2) {
        const auto points = find_intersection(pr, curves[0], curves[1]);
        std::printf("intersection candidates: %zu\n", points.size());
        for (const SeedPoint& s : points)
            std::printf("  x40 = %.15f  vy40 = %.15f  T0/tbar = %g\n", s.x40, s.vy40,
                        s.T0 / pr.t_bar());
    }
    if (curves.size() == 1 && curves[0].family == CurveFamily::c_r) {
        const auto records = detect_periodic_on_curve(pr, curves[0]);
        std::printf("periodic points detected: %zu\n", records.size());
        for (const OrbitRecord& r : records)
            std::printf("  T0/tbar = %2d  T/tbar = %3d  x4 = %.15f  vy4 = %.15f\n", r.T0_over_Tbar,
                        r.T_over_Tbar, r.x4, r.vy4);
        if (!orbits_out.empty()) {
            write_orbit_records(orbits_out, records);
            std::printf("periodic points written to %s\n", orbits_out.c_str());
        }
    }
    return kExitPass;
}

int cmd_orbit(const CommonFlags& flags, double x40, double vy40, int m, double sample_step,
              const std::string& out_path) {
    const RestrictedProblem pr =
        RestrictedProblem::make(EightContext::prepare(flags.constants(), flags.settings()));
    const OrbitRecord rec = refine_periodic(pr, x40, vy40, m);
    std::printf("refined: x4 = %.15f  vy4 = %.15f\n", rec.x4, rec.vy4);
    std::printf("T0/tbar = %d  T/tbar = %d  (j_end = %d, M = %d)\n", rec.T0_over_Tbar,
                rec.T_over_Tbar, rec.j_end, rec.M);
    std::printf("residuals: y4 %.2e, vx4 %.2e, closure %.2e\n", rec.res_y, rec.res_vx,
                rec.res_closure);

    const double T = rec.T_over_Tbar * pr.t_bar();
    Trajectory traj = integrate(pr.config, pr.initial_state(rec.x4, rec.vy4), T, pr.ode);
    if (!traj.ok()) {
        if (traj.status() == IntegrationStatus::collision) throw *traj.collision();
        throw Error("full-period integration failed");
    }
    if (sample_step <= 0.0) sample_step = pr.t_bar() / 10.0;
    write_trajectory_csv(out_path, traj, sample_step);
    std::printf("trajectory written to %s (sample step %g)\n", out_path.c_str(), sample_step);
    return kExitPass;
}

int cmd_kepler_seed(const CommonFlags& flags, int m, std::optional<double> e,
                    std::optional<double> x4, bool refine) {
    const EightConstants constants = flags.constants();
    const double tbar = constants.t_bar();
    double ecc;
    if (x4) {
        // The catalog family sweeps half an ellipse per leg: the ellipse
        // period is twice the leg, hence the doubled multiplier.
        ecc = eccentricity_from_period(*x4, 2 * m, tbar);
        std::printf("eccentricity from x4 = %.15f: e = %.15f\n", *x4, ecc);
    } else {
        ecc = *e;
    }
    const KeplerSeed seed = kepler_seed(m, ecc, tbar);
    std::printf("seed: x4 = %.15f  vy4 = %.15f  T0/tbar = %d  (a = %.15f, e = %.15f)\n", seed.x4,
                seed.vy4, 2 * m, seed.a, seed.e);
    if (!refine) return kExitPass;

    const RestrictedProblem pr =
        RestrictedProblem::make(EightContext::prepare(constants, flags.settings()));
    const OrbitRecord rec = refine_periodic(pr, seed.x4, seed.vy4, m);
    std::printf("refined: x4 = %.15f  vy4 = %.15f  (correction %.3e, %.3e; %d iterations)\n",
                rec.x4, rec.vy4, std::abs(rec.x4 - seed.x4), std::abs(rec.vy4 - seed.vy4),
                rec.iterations);
    std::printf("T0/tbar = %d  T/tbar = %d  residuals: y4 %.2e, vx4 %.2e, closure %.2e\n",
                rec.T0_over_Tbar, rec.T_over_Tbar, rec.res_y, rec.res_vx, rec.res_closure);
    return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Symmetric periodic orbits of the figure-eight restricted four-body problem"};
    app.require_subcommand(1);

    CommonFlags common;

    auto* verify = app.add_subcommand("verify-eight", "verify the choreography data");
    bool verify_json = false;
    verify->add_flag("--json", verify_json, "machine-readable report");
    add_common(verify, common);

    auto* table = app.add_subcommand("table1", "reproduce the reference orbit catalog");
    std::vector<int> table_rows;
    std::string table_out = "table1.jsonl";
    int table_jobs = 0;
    bool table_json = false;
    table->add_option("--rows", table_rows, "specific catalog rows (default: all 34)")
        ->delimiter(',');
    table->add_option("--out", table_out, "orbit-record JSONL path");
    table->add_option("--jobs", table_jobs, "worker threads (default: hardware)");
    table->add_flag("--json", table_json, "machine-readable summary");
    add_common(table, common);

    auto* trace = app.add_subcommand("trace", "trace boundary-problem solution curves");
    std::string trace_family, trace_frozen = "x40", trace_out = "curve.csv", trace_orbits_out;
    int trace_p = 0, trace_max_points = 200;
    double trace_x40 = 0, trace_vy40 = 0, trace_step = 1e-2, trace_direction = 1.0;
    trace->add_option("--family", trace_family, "cy | cvx | cr | cy,cvx")->required();
    trace->add_option("--p", trace_p, "leg multiplier: T0 = 2p tbar")
        ->required()
        ->check(CLI::PositiveNumber);
    trace->add_option("--x40", trace_x40, "particle x (exact if frozen, else guess)")->required();
    trace->add_option("--vy40", trace_vy40, "particle vy (guess if x40 frozen)")->required();
    trace->add_option("--frozen", trace_frozen, "seed coordinate to freeze: x40 | vy40")
        ->check(CLI::IsMember({"x40", "vy40"}));
    trace->add_option("--step", trace_step, "arclength step")->check(CLI::PositiveNumber);
    trace->add_option("--max-points", trace_max_points, "points per curve (0: header only)");
    trace->add_option("--direction", trace_direction, "initial tangent orientation (+1/-1)");
    trace->add_option("--out", trace_out, "curve CSV path");
    trace->add_option("--orbits-out", trace_orbits_out, "JSONL for detected periodic points (cr)");
    add_common(trace, common);

    auto* orbit = app.add_subcommand("orbit", "refine one orbit and export its full period");
    double orbit_x40 = 0, orbit_vy40 = 0, orbit_sample = 0;
    int orbit_m = 0;
    std::string orbit_out = "orbit.csv";
    orbit->add_option("--x40", orbit_x40, "particle x guess")->required();
    orbit->add_option("--vy40", orbit_vy40, "particle vy guess")->required();
    orbit->add_option("--m", orbit_m, "leg multiplier: T0 = 2m tbar")
        ->required()
        ->check(CLI::PositiveNumber);
    orbit->add_option("--sample-step", orbit_sample, "CSV sampling step (default tbar/10)");
    orbit->add_option("--out", orbit_out, "trajectory CSV path");
    add_common(orbit, common);

    auto* kepler = app.add_subcommand("kepler-seed", "closed-form two-body seed");
    int kepler_m = 0;
    bool kepler_refine = false;
    std::optional<double> kepler_e, kepler_x4;
    kepler->add_option("--m", kepler_m, "leg multiplier: T0 = 2m tbar")
        ->required()
        ->check(CLI::PositiveNumber);
    auto* eopt = kepler->add_option("--e", kepler_e, "eccentricity in [0,1)");
    kepler->add_option("--x4", kepler_x4, "derive e from this apocenter distance")->excludes(eopt);
    kepler->add_flag("--refine", kepler_refine, "chain into Newton refinement");
    add_common(kepler, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (verify->parsed()) return cmd_verify_eight(common, verify_json);
        if (table->parsed()) {
            for (int r : table_rows)
                if (r < 1 || r > 34) {
                    std::cerr << "table1: row " << r << " outside 1..34\n";
                    return kExitUsage;
                }
            return cmd_table1(common, table_rows, table_out, table_jobs, table_json);
        }
        if (trace->parsed())
            return cmd_trace(common, trace_family, trace_p, trace_x40, trace_vy40, trace_frozen,
                             trace_step, trace_max_points, trace_direction, trace_out,
                             trace_orbits_out);
        if (orbit->parsed())
            return cmd_orbit(common, orbit_x40, orbit_vy40, orbit_m, orbit_sample, orbit_out);
        if (kepler->parsed()) {
            if (!kepler_e && !kepler_x4) {
                std::cerr << "kepler-seed: give --e or --x4\n";
                return kExitUsage;
            }
            return cmd_kepler_seed(common, kepler_m, kepler_e, kepler_x4, kepler_refine);
        }
    } catch (const NoConvergence& e) {
        std::cerr << "no convergence: " << e.what() << "\n";
        return kExitNoConvergence;
    } catch (const CollisionProximity& e) {
        std::cerr << "collision proximity: " << e.what() << "\n";
        return kExitCollision;
    } catch (const StepSizeUnderflow& e) {
        // the field has no other singularities: underflow means an
        // unresolvable close encounter
        std::cerr << "unresolvable close encounter: " << e.what() << "\n";
        return kExitCollision;
    } catch (const NoPhysicalSolution& e) {
        std::cerr << "no physical solution: " << e.what() << "\n";
        return kExitDomain;
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const InvalidIndex& e) {
        std::cerr << "bad index: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return kExitSystemic;
    }
    return kExitUsage;
}
