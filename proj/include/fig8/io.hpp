#ifndef FIG8_IO_HPP
#define FIG8_IO_HPP

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fig8/choreography.hpp"
#include "fig8/porbits.hpp"

namespace fig8 {

/// Orbit records as JSON lines, one record per line with fields exactly:
/// index, T0_over_Tbar, T_over_Tbar, x4, vy4, j_end, M, res_y, res_vx,
/// res_closure.
void write_orbit_records(std::ostream& out, std::span<const OrbitRecord> records);
void write_orbit_records(const std::string& path, std::span<const OrbitRecord> records);
std::vector<OrbitRecord> read_orbit_records(const std::string& path);

/// Curve as CSV with header family,p,x40,vy40,T0,res1,res2.
void write_curve_csv(std::ostream& out, const ContinuationCurve& curve);
void write_curve_csv(const std::string& path, const ContinuationCurve& curve);

/// Trajectory sampled at a fixed step as CSV with columns
/// t,x1,y1,vx1,vy1,...,xN,yN,vxN,vyN. The final time is always emitted.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, double sample_step);
void write_trajectory_csv(const std::string& path, const Trajectory& traj, double sample_step);

/// Constants override: {"positions": [[x,y] x3], "velocities": [[x,y] x3],
/// "period": T}. Throws DomainError on malformed content.
EightConstants load_constants_override(const std::string& path);

const char* family_tag(CurveFamily family);

}  // namespace fig8

#endif
