#include "fig8/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>

#include <json.hpp>

namespace fig8 {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    return out;
}

}  // namespace

void write_orbit_records(std::ostream& out, std::span<const OrbitRecord> records) {
    for (const OrbitRecord& r : records) {
        nlohmann::ordered_json j;
        j["index"] = r.index;
        j["T0_over_Tbar"] = r.T0_over_Tbar;
        j["T_over_Tbar"] = r.T_over_Tbar;
        j["x4"] = r.x4;
        j["vy4"] = r.vy4;
        j["j_end"] = r.j_end;
        j["M"] = r.M;
        j["res_y"] = r.res_y;
        j["res_vx"] = r.res_vx;
        j["res_closure"] = r.res_closure;
        out << j.dump() << '\n';
    }
}

void write_orbit_records(const std::string& path, std::span<const OrbitRecord> records) {
    auto out = open_out(path);
    write_orbit_records(out, records);
}

std::vector<OrbitRecord> read_orbit_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::vector<OrbitRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DomainError("bad orbit-record line: " + std::string(e.what()));
        }
        OrbitRecord r;
        r.index = j.at("index").get<int>();
        r.T0_over_Tbar = j.at("T0_over_Tbar").get<int>();
        r.T_over_Tbar = j.at("T_over_Tbar").get<int>();
        r.x4 = j.at("x4").get<double>();
        r.vy4 = j.at("vy4").get<double>();
        r.j_end = j.at("j_end").get<int>();
        r.M = j.at("M").get<int>();
        r.res_y = j.at("res_y").get<double>();
        r.res_vx = j.at("res_vx").get<double>();
        r.res_closure = j.at("res_closure").get<double>();
        records.push_back(r);
    }
    return records;
}

const char* family_tag(CurveFamily family) {
    switch (family) {
        case CurveFamily::c_y: return "cy";
        case CurveFamily::c_vx: return "cvx";
        case CurveFamily::c_r: return "cr";
    }
    return "?";
}

void write_curve_csv(std::ostream& out, const ContinuationCurve& curve) {
    out << "family,p,x40,vy40,T0,res1,res2\n";
    out << std::setprecision(17);
    for (const CurvePoint& pt : curve.points)
        out << family_tag(curve.family) << ',' << curve.p << ',' << pt.x40 << ',' << pt.vy40
            << ',' << pt.T0 << ',' << pt.res1 << ',' << pt.res2 << '\n';
}

void write_curve_csv(const std::string& path, const ContinuationCurve& curve) {
    auto out = open_out(path);
    write_curve_csv(out, curve);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, double sample_step) {
    if (!(sample_step > 0.0)) throw DomainError("sample step must be positive");
    const int n = traj.initial_state().size();
    out << 't';
    for (int i = 1; i <= n; ++i)
        out << ",x" << i << ",y" << i << ",vx" << i << ",vy" << i;
    out << '\n';
    out << std::setprecision(17);

    const double t0 = traj.t_begin(), t1 = traj.t_end();
    const double dir = t1 >= t0 ? 1.0 : -1.0;
    auto emit = [&](double t) {
        const State s = traj.at(t);
        out << t;
        for (int i = 0; i < n; ++i)
            out << ',' << s.pos[static_cast<size_t>(i)].x << ',' << s.pos[static_cast<size_t>(i)].y
                << ',' << s.vel[static_cast<size_t>(i)].x << ',' << s.vel[static_cast<size_t>(i)].y;
        out << '\n';
    };
    double t = t0;
    while ((t1 - t) * dir > 1e-12 * std::max(1.0, std::abs(t1))) {
        emit(t);
        t += dir * sample_step;
        if ((t1 - t) * dir < 0.0) break;
    }
    emit(t1);
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj, double sample_step) {
    auto out = open_out(path);
    write_trajectory_csv(out, traj, sample_step);
}

EightConstants load_constants_override(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open constants override " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DomainError("bad constants override: " + std::string(e.what()));
    }
    EightConstants c;
    try {
        const auto& pos = j.at("positions");
        const auto& vel = j.at("velocities");
        if (pos.size() != 3 || vel.size() != 3)
            throw DomainError("constants override needs 3 positions and 3 velocities");
        for (size_t i = 0; i < 3; ++i) {
            c.positions[i] = {pos[i].at(0).get<double>(), pos[i].at(1).get<double>()};
            c.velocities[i] = {vel[i].at(0).get<double>(), vel[i].at(1).get<double>()};
        }
        c.period = j.at("period").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw DomainError("bad constants override: " + std::string(e.what()));
    }
    if (!(c.period > 0.0)) throw DomainError("constants override period must be positive");
    return c;
}

}  // namespace fig8
