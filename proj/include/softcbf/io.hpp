#pragma once

#include <ostream>
#include <string>

#include <json.hpp>

#include "softcbf/geometry.hpp"
#include "softcbf/sim.hpp"

namespace softcbf {

// Stable trajectory CSV schema:
//   t,q1..qN,qd1..qdN,rx,ry,unom1..unomN,u1..uN,n,F,rho,qp_status
std::string trajectory_csv_header(int n_seg);

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, int n_seg);

// Both polytopes, their vertices, and the deflection limit, serialized with
// round-trip-exact doubles for external plotting.
nlohmann::json safe_set_report(const HalfspacePolytope& env, const SafeSet& safe_set);

nlohmann::json run_summary(const std::string& preset_label, const RunReport& report,
                           int exit_code);

}  // namespace softcbf
