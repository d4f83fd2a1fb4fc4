#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "snowgrid/geodata.hpp"

namespace snowgrid {

/// Rotated death bar. Corners are bottom-left, bottom-right, top-right,
/// top-left in the bar's own (pre-rotation) frame.
struct Quad {
    std::array<GridPoint, 4> corners;
    int case_id = 0;
};

/// Full bar width in meters.
inline constexpr double kBarWidth = 4.0;

/// Bar of width 4 m and height 2 * count, rotated counter-clockwise by
/// `angle_deg` about `base` (the middle of its bottom edge).
/// Throws DomainError when count < 1.
Quad rotated_bar(const GridPoint& base, int count, double angle_deg, int case_id = 0);

inline Quad bar_for_case(const CaseRecord& c) { return rotated_bar(c.location, c.count, c.angle_deg, c.id); }

struct Assignment {
    int case_id = 0;
    int pump_id = 0;
    /// Planar Euclidean distance, meters.
    double distance = 0.0;

    friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// Distances within this much are ties, resolved towards the lowest pump id.
inline constexpr double kTieTolerance = 1e-9;

/// Nearest pump by planar distance; `case_id` of the result is 0.
/// Throws EmptyInput when `pumps` is empty.
Assignment nearest_pump(const GridPoint& p, std::span<const Pump> pumps);

/// nearest_pump for every case, in case order.
std::vector<Assignment> assign_cases(std::span<const CaseRecord> cases, std::span<const Pump> pumps);

double distance(const GridPoint& a, const GridPoint& b) noexcept;

/// Distance from `p` to the closed segment `s`.
double point_segment_distance(const GridPoint& p, const StreetSegment& s) noexcept;

/// Counter-clockwise convex polygon, closed implicitly.
using Polygon = std::vector<GridPoint>;

struct VoronoiCell {
    int pump_id = 0;
    Polygon polygon;
};

/// Polygon clipping tolerance, meters.
inline constexpr double kClipEpsilon = 1e-9;

/// One cell per pump (same order), each the clip box intersected with the
/// bisector half-planes against every other pump.
/// Throws EmptyInput, ValidationError (duplicate sites), DomainError (site outside clip).
std::vector<VoronoiCell> voronoi(std::span<const Pump> pumps, const BoundingBox& clip);

/// Shoelace area; positive for counter-clockwise rings.
double signed_area(std::span<const GridPoint> polygon) noexcept;

/// Distance from `p` to the polygon boundary, negative when outside.
double signed_boundary_distance(std::span<const GridPoint> polygon, const GridPoint& p) noexcept;

/// Intersection of a segment with a box; nullopt when they do not meet.
std::optional<StreetSegment> clip_segment(const StreetSegment& s, const BoundingBox& box) noexcept;

/// Intersection of a convex polygon with a box (may be empty).
Polygon clip_polygon(std::span<const GridPoint> polygon, const BoundingBox& box);

}  // namespace snowgrid
