#include "softcbf/io.hpp"

#include <cstdio>

namespace softcbf {

namespace {

using nlohmann::json;

const char* status_token(TickStatus status) {
    return status == TickStatus::Optimal ? "optimal" : "bypass";
}

void append_number(std::string& line, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), ",%.12g", v);
    line += buf;
}

json row_json(const Vec2& normal, double offset, Orientation orientation) {
    return json{{"normal", {normal.x(), normal.y()}},
                {"offset", offset},
                {"orientation", orientation == Orientation::Upper ? "upper" : "lower"}};
}

}  // namespace

std::string trajectory_csv_header(int n_seg) {
    std::string header = "t";
    auto block = [&](const std::string& prefix) {
        for (int i = 1; i <= n_seg; ++i) header += "," + prefix + std::to_string(i);
    };
    block("q");
    block("qd");
    header += ",rx,ry";
    block("unom");
    block("u");
    header += ",n,F,rho,qp_status";
    return header;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, int n_seg) {
    out << trajectory_csv_header(n_seg) << '\n';
    std::string line;
    for (const TrajectoryRow& row : traj.rows) {
        line.clear();
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.12g", row.t);
        line += buf;
        for (int i = 0; i < n_seg; ++i) append_number(line, row.q[i]);
        for (int i = 0; i < n_seg; ++i) append_number(line, row.qd[i]);
        append_number(line, row.r.x());
        append_number(line, row.r.y());
        for (int i = 0; i < n_seg; ++i) append_number(line, row.u_nom[i]);
        for (int i = 0; i < n_seg; ++i) append_number(line, row.u[i]);
        append_number(line, row.n);
        append_number(line, row.force);
        append_number(line, row.rho);
        line += ',';
        line += status_token(row.qp_status);
        out << line << '\n';
    }
}

json safe_set_report(const HalfspacePolytope& env, const SafeSet& safe_set) {
    json no_contact;
    no_contact["rows"] = json::array();
    for (const PolytopeRow& row : env.rows) {
        no_contact["rows"].push_back(row_json(row.normal, row.offset, row.orientation));
    }
    no_contact["vertices"] = json::array();
    for (const PolytopeVertex& v : polytope_vertices(env)) {
        no_contact["vertices"].push_back(
            json{{"point", {v.point.x(), v.point.y()}}, {"facets", {v.facet_a, v.facet_b}}});
    }

    json force_safe;
    force_safe["rows"] = json::array();
    HalfspacePolytope expanded;
    for (const SafeSetRow& row : safe_set.rows) {
        json j = row_json(row.normal, row.offset, row.orientation);
        j["source_offset"] = row.source_offset;
        j["vertex_row"] = row.vertex_row;
        force_safe["rows"].push_back(j);
        expanded.rows.push_back({row.normal, row.offset, row.orientation});
    }
    force_safe["vertices"] = json::array();
    for (const PolytopeVertex& v : polytope_vertices(expanded)) {
        force_safe["vertices"].push_back(
            json{{"point", {v.point.x(), v.point.y()}}, {"facets", {v.facet_a, v.facet_b}}});
    }

    return json{{"n_max", safe_set.n_max},
                {"no_contact", no_contact},
                {"force_safe", force_safe}};
}

json run_summary(const std::string& preset_label, const RunReport& report, int exit_code) {
    json j{{"preset", preset_label},
           {"rho_min", report.rho_min},
           {"mean_qp_us", report.mean_qp_us},
           {"exit", exit_code}};
    if (report.t_violation) {
        j["t_violation"] = *report.t_violation;
    } else {
        j["t_violation"] = nullptr;
    }
    return j;
}

}  // namespace softcbf
