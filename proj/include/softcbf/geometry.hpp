#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "softcbf/types.hpp"

namespace softcbf {

// Errors raised by polytope construction and contact queries. Carries the
// offending row index when one exists (-1 otherwise).
class GeometryError : public std::runtime_error {
public:
    enum class Kind {
        ZeroSecondColumn,   // facet parallel to the y-axis: no slope-intercept form
        EmptyPolytope,      // no strictly feasible point
        DuplicateRow,       // two identical facets
        VertexDegenerate,   // adjacent facets (nearly) parallel, no usable vertex
        NegativeDeflection,
    };

    GeometryError(Kind kind, const std::string& what, int row = -1)
        : std::runtime_error(what), kind_(kind), row_(row) {}

    Kind kind() const { return kind_; }
    int row() const { return row_; }

private:
    Kind kind_;
    int row_;
};

enum class Orientation { Upper, Lower };

// One normalized halfspace H·r <= h. The second component of H is exactly +1
// (Upper, bounds y from above) or -1 (Lower, bounds y from below).
struct PolytopeRow {
    Vec2 normal;       // H_i
    double offset;     // h_i
    Orientation orientation;

    // Slope of the facet line y = m x + (signed intercept).
    double slope() const {
        return orientation == Orientation::Upper ? -normal.x() : normal.x();
    }
    // ||H_i|| = sqrt(m^2 + 1); converts row residuals to distances.
    double scale() const { return std::sqrt(normal.x() * normal.x() + 1.0); }
};

// Convex no-contact region {r | H r <= h} in slope-intercept rows.
struct HalfspacePolytope {
    std::vector<PolytopeRow> rows;
};

// Linear-spring surface law: psi(n) = k n for n > 0, 0 otherwise, capped by
// the largest force the surface may safely carry.
struct DeformationModel {
    double stiffness = 0.0;     // k, N/m
    double force_limit = 0.0;   // largest safe normal force, N

    // Deflection at which the force limit is reached, psi^-1(force_limit).
    double max_deflection() const { return force_limit / stiffness; }
};

// Puts raw rows [a, b]·r <= c into slope-intercept form by dividing each row
// by |b|. The represented set is unchanged. Throws ZeroSecondColumn for
// vertical facets, DuplicateRow for repeated facets, EmptyPolytope when no
// strictly feasible point exists.
HalfspacePolytope normalize_polytope(const std::vector<std::pair<Vec2, double>>& raw_rows);

// Outward unit normal of a facet: H_i / ||H_i||.
Vec2 facet_normal(const PolytopeRow& row);

// A strictly feasible point, or nullopt when the interior is empty.
std::optional<Vec2> interior_point(const HalfspacePolytope& poly);

struct PolytopeVertex {
    Vec2 point;
    int facet_a = -1;    // row indices of the two active facets
    int facet_b = -1;
};

// All vertices of the polytope (pairwise facet intersections feasible for
// every row), in deterministic (facet_a, facet_b) order.
std::vector<PolytopeVertex> polytope_vertices(const HalfspacePolytope& poly);

// Per-row surface deflection caused by a tip at r: the distance from r to the
// facet line when the row is violated, clamped to 0 otherwise.
std::vector<double> deflections(const HalfspacePolytope& poly, const Vec2& r);

// Normal contact force psi(n) for a deflection n >= 0.
double contact_force(const DeformationModel& model, double n);

// Normalized distance to the force limit: 1 = no contact, 0 = at the limit,
// negative = violation.
double safety_margin(const DeformationModel& model, double n);

// One row of the expanded force-safe set. `offset` bounds the tip; the
// generating line (the undeformed surface for facet rows, the line through
// the source vertex for appended vertex rows) sits at `source_offset`.
struct SafeSetRow {
    Vec2 normal;
    double offset;          // h'_i
    double source_offset;   // intercept of the generating line
    Orientation orientation;
    bool vertex_row = false;
};

// Force-safe set of tip positions: every facet of the no-contact set pushed
// outward by the maximum safe deflection, plus one guard row per vertex that
// bounds the combined deflection of two adjacent facets.
struct SafeSet {
    std::vector<SafeSetRow> rows;
    double n_max = 0.0;
    HalfspacePolytope source;
    DeformationModel model;

    bool contains(const Vec2& r, double tol = 0.0) const;

    // Deflection of each generating line at r (clamped >= 0).
    std::vector<double> source_deflections(const Vec2& r) const;
    double max_deflection(const Vec2& r) const;

    // Safety margin of the worst row at r. Requires n_max > 0.
    double margin(const Vec2& r) const;
};

// Builds the force-safe set from a normalized no-contact polytope and a
// deformation model (force_limit may be 0, giving an identical polytope).
SafeSet expand_safe_set(const HalfspacePolytope& env, const DeformationModel& model);

}  // namespace softcbf
