#include "softcbf/geometry.hpp"

#include <algorithm>
#include <limits>

namespace softcbf {

namespace {

constexpr double kFeasTol = 1e-9;        // vertex membership tolerance, meters
constexpr double kDuplicateTol = 1e-12;  // row identity tolerance
constexpr double kParallelTol = 1e-12;

double row_deflection(const Vec2& normal, double offset, const Vec2& r) {
    const double scale = std::sqrt(normal.x() * normal.x() + 1.0);
    const double violation = (normal.dot(r) - offset) / scale;
    return violation > 0.0 ? violation : 0.0;
}

}  // namespace

HalfspacePolytope normalize_polytope(const std::vector<std::pair<Vec2, double>>& raw_rows) {
    HalfspacePolytope poly;
    poly.rows.reserve(raw_rows.size());

    for (size_t i = 0; i < raw_rows.size(); ++i) {
        const Vec2& coeffs = raw_rows[i].first;
        const double bound = raw_rows[i].second;
        const double second = coeffs.y();
        if (second == 0.0 || !std::isfinite(1.0 / second)) {
            throw GeometryError(GeometryError::Kind::ZeroSecondColumn,
                                "row " + std::to_string(i) +
                                    ": facet is vertical (zero second coefficient), "
                                    "cannot be written in slope-intercept form",
                                static_cast<int>(i));
        }
        const double inv = 1.0 / std::abs(second);
        PolytopeRow row;
        row.normal = Vec2(coeffs.x() * inv, second > 0.0 ? 1.0 : -1.0);
        row.offset = bound * inv;
        row.orientation = second > 0.0 ? Orientation::Upper : Orientation::Lower;
        poly.rows.push_back(row);
    }

    for (size_t i = 0; i < poly.rows.size(); ++i) {
        for (size_t j = i + 1; j < poly.rows.size(); ++j) {
            const PolytopeRow& a = poly.rows[i];
            const PolytopeRow& b = poly.rows[j];
            if (a.orientation == b.orientation &&
                std::abs(a.normal.x() - b.normal.x()) <= kDuplicateTol &&
                std::abs(a.offset - b.offset) <= kDuplicateTol) {
                throw GeometryError(GeometryError::Kind::DuplicateRow,
                                    "rows " + std::to_string(i) + " and " + std::to_string(j) +
                                        " describe the same facet",
                                    static_cast<int>(j));
            }
        }
    }

    if (!interior_point(poly)) {
        throw GeometryError(GeometryError::Kind::EmptyPolytope,
                            "polytope has no interior point");
    }
    return poly;
}

Vec2 facet_normal(const PolytopeRow& row) {
    return row.normal / row.scale();
}

std::optional<Vec2> interior_point(const HalfspacePolytope& poly) {
    // Split rows into the two line families bounding y from above and below:
    // Upper rows give y <= m x + h, Lower rows give y >= m x - h. The gap
    // g(x) = upper_env(x) - lower_env(x) is concave piecewise linear, so its
    // maximum sits at a pairwise line crossing or grows along an unbounded
    // direction.
    std::vector<double> up_m, up_c, lo_m, lo_c;
    for (const PolytopeRow& row : poly.rows) {
        if (row.orientation == Orientation::Upper) {
            up_m.push_back(row.slope());
            up_c.push_back(row.offset);
        } else {
            lo_m.push_back(row.slope());
            lo_c.push_back(-row.offset);
        }
    }

    if (up_m.empty() && lo_m.empty()) return Vec2(0.0, 0.0);

    auto upper_env = [&](double x) {
        double v = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < up_m.size(); ++i) v = std::min(v, up_m[i] * x + up_c[i]);
        return v;
    };
    auto lower_env = [&](double x) {
        double v = -std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < lo_m.size(); ++i) v = std::max(v, lo_m[i] * x + lo_c[i]);
        return v;
    };

    if (lo_m.empty()) return Vec2(0.0, upper_env(0.0) - 1.0);
    if (up_m.empty()) return Vec2(0.0, lower_env(0.0) + 1.0);

    std::vector<double> all_m(up_m), all_c(up_c);
    all_m.insert(all_m.end(), lo_m.begin(), lo_m.end());
    all_c.insert(all_c.end(), lo_c.begin(), lo_c.end());

    std::vector<double> xs{0.0};
    for (size_t i = 0; i < all_m.size(); ++i) {
        for (size_t j = i + 1; j < all_m.size(); ++j) {
            const double dm = all_m[i] - all_m[j];
            if (std::abs(dm) > kParallelTol * (1.0 + std::abs(all_m[i]) + std::abs(all_m[j]))) {
                xs.push_back((all_c[j] - all_c[i]) / dm);
            }
        }
    }

    double best_x = xs.front();
    double best_g = -std::numeric_limits<double>::infinity();
    for (double x : xs) {
        const double g = upper_env(x) - lower_env(x);
        if (g > best_g) {
            best_g = g;
            best_x = x;
        }
    }

    if (!(best_g > 0.0)) {
        // Beyond the outermost crossing both envelopes are single lines, so
        // the gap is exactly linear there and a point with g = 1 can be
        // computed directly when the gap grows toward infinity.
        const double min_up = *std::min_element(up_m.begin(), up_m.end());
        const double max_up = *std::max_element(up_m.begin(), up_m.end());
        const double min_lo = *std::min_element(lo_m.begin(), lo_m.end());
        const double max_lo = *std::max_element(lo_m.begin(), lo_m.end());

        double span = 1.0;
        for (double x : xs) span = std::max(span, std::abs(x));

        if (min_up - max_lo > 0.0) {
            const double x0 = span + 1.0;
            const double g0 = upper_env(x0) - lower_env(x0);
            best_x = g0 > 0.0 ? x0 : x0 + (1.0 - g0) / (min_up - max_lo);
            best_g = upper_env(best_x) - lower_env(best_x);
        } else if (max_up - min_lo < 0.0) {
            const double x0 = -(span + 1.0);
            const double g0 = upper_env(x0) - lower_env(x0);
            best_x = g0 > 0.0 ? x0 : x0 - (1.0 - g0) / (min_lo - max_up);
            best_g = upper_env(best_x) - lower_env(best_x);
        }
        if (!(best_g > 0.0)) return std::nullopt;
    }

    return Vec2(best_x, 0.5 * (upper_env(best_x) + lower_env(best_x)));
}

std::vector<PolytopeVertex> polytope_vertices(const HalfspacePolytope& poly) {
    std::vector<PolytopeVertex> vertices;
    const int n = static_cast<int>(poly.rows.size());
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const Vec2& a = poly.rows[i].normal;
            const Vec2& b = poly.rows[j].normal;
            const double det = a.x() * b.y() - a.y() * b.x();
            if (std::abs(det) <= kParallelTol * (1.0 + a.norm() * b.norm())) continue;

            const double ha = poly.rows[i].offset;
            const double hb = poly.rows[j].offset;
            const Vec2 v((ha * b.y() - hb * a.y()) / det,
                         (a.x() * hb - b.x() * ha) / det);

            bool feasible = true;
            for (int k = 0; k < n && feasible; ++k) {
                feasible = poly.rows[k].normal.dot(v) <= poly.rows[k].offset + kFeasTol;
            }
            if (feasible) vertices.push_back({v, i, j});
        }
    }
    return vertices;
}

std::vector<double> deflections(const HalfspacePolytope& poly, const Vec2& r) {
    std::vector<double> out;
    out.reserve(poly.rows.size());
    for (const PolytopeRow& row : poly.rows) {
        out.push_back(row_deflection(row.normal, row.offset, r));
    }
    return out;
}

double contact_force(const DeformationModel& model, double n) {
    if (n < 0.0) {
        throw GeometryError(GeometryError::Kind::NegativeDeflection,
                            "contact_force requires a nonnegative deflection");
    }
    return model.stiffness * n;
}

double safety_margin(const DeformationModel& model, double n) {
    const double n_max = model.max_deflection();
    if (!(n_max > 0.0)) {
        throw std::invalid_argument("safety_margin requires a positive force limit");
    }
    return (n_max - n) / n_max;
}

bool SafeSet::contains(const Vec2& r, double tol) const {
    for (const SafeSetRow& row : rows) {
        if (row.normal.dot(r) > row.offset + tol) return false;
    }
    return true;
}

std::vector<double> SafeSet::source_deflections(const Vec2& r) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const SafeSetRow& row : rows) {
        out.push_back(row_deflection(row.normal, row.source_offset, r));
    }
    return out;
}

double SafeSet::max_deflection(const Vec2& r) const {
    double n = 0.0;
    for (const SafeSetRow& row : rows) {
        n = std::max(n, row_deflection(row.normal, row.source_offset, r));
    }
    return n;
}

double SafeSet::margin(const Vec2& r) const {
    return safety_margin(model, max_deflection(r));
}

SafeSet expand_safe_set(const HalfspacePolytope& env, const DeformationModel& model) {
    if (!(model.stiffness > 0.0)) {
        throw std::invalid_argument("deformation model requires positive stiffness");
    }
    if (model.force_limit < 0.0) {
        throw std::invalid_argument("deformation model requires a nonnegative force limit");
    }
    for (size_t i = 0; i < env.rows.size(); ++i) {
        if (std::abs(env.rows[i].normal.y()) != 1.0) {
            throw std::invalid_argument("expand_safe_set requires a normalized polytope (row " +
                                        std::to_string(i) + ")");
        }
    }

    SafeSet out;
    out.n_max = model.max_deflection();
    out.source = env;
    out.model = model;
    out.rows.reserve(env.rows.size());

    for (const PolytopeRow& row : env.rows) {
        SafeSetRow expanded;
        expanded.normal = row.normal;
        expanded.offset = row.offset + out.n_max * row.scale();
        expanded.source_offset = row.offset;
        expanded.orientation = row.orientation;
        expanded.vertex_row = false;
        out.rows.push_back(expanded);
    }

    if (out.n_max > 0.0 && env.rows.size() >= 2) {
        const std::optional<Vec2> inside = interior_point(env);
        if (!inside) {
            throw GeometryError(GeometryError::Kind::EmptyPolytope,
                                "polytope has no interior point");
        }

        for (const PolytopeVertex& vx : polytope_vertices(env)) {
            const Vec2 na = facet_normal(env.rows[vx.facet_a]);
            const Vec2 nb = facet_normal(env.rows[vx.facet_b]);
            const Vec2 pa = vx.point + out.n_max * na;
            const Vec2 pb = vx.point + out.n_max * nb;
            const Vec2 chord = pb - pa;

            if (chord.norm() <= kParallelTol * std::max(1.0, out.n_max)) {
                throw GeometryError(GeometryError::Kind::VertexDegenerate,
                                    "facets " + std::to_string(vx.facet_a) + " and " +
                                        std::to_string(vx.facet_b) +
                                        " are parallel at a shared vertex",
                                    vx.facet_a);
            }
            if (std::abs(chord.x()) <= kParallelTol * chord.norm()) {
                throw GeometryError(GeometryError::Kind::ZeroSecondColumn,
                                    "vertex guard between facets " + std::to_string(vx.facet_a) +
                                        " and " + std::to_string(vx.facet_b) + " is vertical",
                                    vx.facet_a);
            }

            // Line through the two offset points, oriented so the generating
            // polytope stays on the feasible side.
            const double m = chord.y() / chord.x();
            Vec2 normal(-m, 1.0);
            double offset = pa.y() - m * pa.x();
            if (normal.dot(*inside) > offset) {
                normal = -normal;
                offset = -offset;
            }

            SafeSetRow guard;
            guard.normal = normal;
            guard.offset = offset;
            guard.source_offset = normal.dot(vx.point);
            guard.orientation = normal.y() > 0.0 ? Orientation::Upper : Orientation::Lower;
            guard.vertex_row = true;
            out.rows.push_back(guard);
        }
    }

    return out;
}

}  // namespace softcbf
