#include "snowgrid/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <utility>

#include <fmt/format.h>

#include "snowgrid/errors.hpp"

namespace snowgrid {

Quad rotated_bar(const GridPoint& base, int count, double angle_deg, int case_id) {
    if (count < 1) throw DomainError(fmt::format("bar count must be >= 1, got {}", count));
    const double theta = angle_deg * std::numbers::pi / 180.0;
    const double c = std::cos(theta), s = std::sin(theta);
    const double hw = kBarWidth / 2.0;
    const double hh = 2.0 * count;
    const std::array<std::pair<double, double>, 4> local{{{-hw, 0.0}, {hw, 0.0}, {hw, hh}, {-hw, hh}}};

    Quad q;
    q.case_id = case_id;
    for (std::size_t i = 0; i < 4; ++i) {
        const auto [x, y] = local[i];
        q.corners[i] = {base.easting + (c * x - s * y), base.northing + (s * x + c * y)};
    }
    return q;
}

double distance(const GridPoint& a, const GridPoint& b) noexcept {
    return std::hypot(a.easting - b.easting, a.northing - b.northing);
}

Assignment nearest_pump(const GridPoint& p, std::span<const Pump> pumps) {
    if (pumps.empty()) throw EmptyInput("nearest pump requested with no pumps");
    const Pump* best = &pumps.front();
    double best_d = distance(p, best->location);
    for (const auto& pump : pumps.subspan(1)) {
        const double d = distance(p, pump.location);
        if (d < best_d - kTieTolerance || (std::abs(d - best_d) <= kTieTolerance && pump.id < best->id)) {
            best = &pump;
            best_d = d;
        }
    }
    return {0, best->id, best_d};
}

std::vector<Assignment> assign_cases(std::span<const CaseRecord> cases, std::span<const Pump> pumps) {
    if (pumps.empty()) throw EmptyInput("assignment requested with no pumps");
    std::vector<Assignment> out;
    out.reserve(cases.size());
    for (const auto& c : cases) {
        auto a = nearest_pump(c.location, pumps);
        a.case_id = c.id;
        out.push_back(a);
    }
    return out;
}

double point_segment_distance(const GridPoint& p, const StreetSegment& s) noexcept {
    const double dx = s.end.easting - s.start.easting;
    const double dy = s.end.northing - s.start.northing;
    const double len2 = dx * dx + dy * dy;
    double t = 0.0;
    if (len2 > 0.0) {
        t = ((p.easting - s.start.easting) * dx + (p.northing - s.start.northing) * dy) / len2;
        t = std::clamp(t, 0.0, 1.0);
    }
    return distance(p, {s.start.easting + t * dx, s.start.northing + t * dy});
}

namespace {

struct Vec2 {
    double x;
    double y;
};

// Keeps the side where normal . (p - anchor) <= 0, in a local frame.
struct HalfPlane {
    Vec2 normal;  // unit length
    Vec2 anchor;

    double signed_distance(const Vec2& p) const noexcept {
        return normal.x * (p.x - anchor.x) + normal.y * (p.y - anchor.y);
    }
};

std::vector<Vec2> clip_halfplane(const std::vector<Vec2>& poly, const HalfPlane& hp) {
    std::vector<Vec2> out;
    if (poly.empty()) return out;
    out.reserve(poly.size() + 1);
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % poly.size()];
        const double da = hp.signed_distance(a);
        const double db = hp.signed_distance(b);
        const bool a_in = da <= kClipEpsilon;
        const bool b_in = db <= kClipEpsilon;
        if (a_in) out.push_back(a);
        if (a_in != b_in) {
            const double t = da / (da - db);
            out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
        }
    }
    // Drop coincident neighbours introduced by vertices lying on the line.
    std::vector<Vec2> dedup;
    dedup.reserve(out.size());
    for (const auto& v : out) {
        if (!dedup.empty() && std::hypot(v.x - dedup.back().x, v.y - dedup.back().y) <= kClipEpsilon) continue;
        dedup.push_back(v);
    }
    while (dedup.size() > 1 &&
           std::hypot(dedup.front().x - dedup.back().x, dedup.front().y - dedup.back().y) <= kClipEpsilon) {
        dedup.pop_back();
    }
    if (dedup.size() < 3) dedup.clear();
    return dedup;
}

std::vector<Vec2> box_ring(const BoundingBox& box, const GridPoint& origin) {
    const double x0 = box.min.easting - origin.easting, y0 = box.min.northing - origin.northing;
    const double x1 = box.max.easting - origin.easting, y1 = box.max.northing - origin.northing;
    return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}};
}

std::vector<HalfPlane> box_halfplanes(const BoundingBox& box, const GridPoint& origin) {
    const double x0 = box.min.easting - origin.easting, y0 = box.min.northing - origin.northing;
    const double x1 = box.max.easting - origin.easting, y1 = box.max.northing - origin.northing;
    return {{{-1, 0}, {x0, 0}}, {{1, 0}, {x1, 0}}, {{0, -1}, {0, y0}}, {{0, 1}, {0, y1}}};
}

}  // namespace

std::vector<VoronoiCell> voronoi(std::span<const Pump> pumps, const BoundingBox& clip) {
    if (pumps.empty()) throw EmptyInput("voronoi requested with no pumps");
    if (!clip.valid()) throw DomainError("invalid clip box");
    std::set<std::pair<double, double>> sites;
    for (const auto& p : pumps) {
        if (!clip.contains(p.location)) {
            throw DomainError(fmt::format("pump {} lies outside the clip box", p.id));
        }
        if (!sites.emplace(p.location.easting, p.location.northing).second) {
            throw ValidationError(fmt::format("duplicate pump site at pump {}", p.id), p.id);
        }
    }

    const GridPoint origin = clip.min;
    auto local = [&origin](const GridPoint& p) { return Vec2{p.easting - origin.easting, p.northing - origin.northing}; };

    std::vector<VoronoiCell> cells;
    cells.reserve(pumps.size());
    for (const auto& site : pumps) {
        std::vector<Vec2> poly = box_ring(clip, origin);
        const Vec2 s = local(site.location);
        for (const auto& other : pumps) {
            if (&other == &site) continue;
            const Vec2 o = local(other.location);
            const double nx = o.x - s.x, ny = o.y - s.y;
            const double len = std::hypot(nx, ny);
            poly = clip_halfplane(poly, {{nx / len, ny / len}, {(s.x + o.x) / 2, (s.y + o.y) / 2}});
            if (poly.empty()) break;
        }
        VoronoiCell cell{site.id, {}};
        cell.polygon.reserve(poly.size());
        for (const auto& v : poly) cell.polygon.push_back({v.x + origin.easting, v.y + origin.northing});
        cells.push_back(std::move(cell));
    }
    return cells;
}

double signed_area(std::span<const GridPoint> polygon) noexcept {
    if (polygon.size() < 3) return 0.0;
    // Relative to the first vertex to limit cancellation at grid magnitudes.
    const GridPoint o = polygon.front();
    double twice = 0.0;
    for (std::size_t i = 1; i + 1 < polygon.size(); ++i) {
        const double ax = polygon[i].easting - o.easting, ay = polygon[i].northing - o.northing;
        const double bx = polygon[i + 1].easting - o.easting, by = polygon[i + 1].northing - o.northing;
        twice += ax * by - bx * ay;
    }
    return twice / 2.0;
}

double signed_boundary_distance(std::span<const GridPoint> polygon, const GridPoint& p) noexcept {
    if (polygon.size() < 3) return -std::numeric_limits<double>::infinity();
    double nearest = std::numeric_limits<double>::infinity();
    bool inside = true;
    const bool ccw = signed_area(polygon) > 0;
    for (std::size_t i = 0; i < polygon.size(); ++i) {
        const GridPoint& a = polygon[i];
        const GridPoint& b = polygon[(i + 1) % polygon.size()];
        nearest = std::min(nearest, point_segment_distance(p, {a, b}));
        const double cross = (b.easting - a.easting) * (p.northing - a.northing) -
                             (b.northing - a.northing) * (p.easting - a.easting);
        if (ccw ? cross < 0 : cross > 0) inside = false;
    }
    return inside ? nearest : -nearest;
}

std::optional<StreetSegment> clip_segment(const StreetSegment& s, const BoundingBox& box) noexcept {
    // Liang-Barsky.
    const double dx = s.end.easting - s.start.easting;
    const double dy = s.end.northing - s.start.northing;
    double t0 = 0.0, t1 = 1.0;
    const double p[4] = {-dx, dx, -dy, dy};
    const double q[4] = {s.start.easting - box.min.easting, box.max.easting - s.start.easting,
                         s.start.northing - box.min.northing, box.max.northing - s.start.northing};
    for (int i = 0; i < 4; ++i) {
        if (p[i] == 0.0) {
            if (q[i] < 0.0) return std::nullopt;
            continue;
        }
        const double r = q[i] / p[i];
        if (p[i] < 0.0) {
            if (r > t1) return std::nullopt;
            t0 = std::max(t0, r);
        } else {
            if (r < t0) return std::nullopt;
            t1 = std::min(t1, r);
        }
    }
    if (t0 == 0.0 && t1 == 1.0) return s;
    return StreetSegment{{s.start.easting + t0 * dx, s.start.northing + t0 * dy},
                         {s.start.easting + t1 * dx, s.start.northing + t1 * dy}};
}

Polygon clip_polygon(std::span<const GridPoint> polygon, const BoundingBox& box) {
    const GridPoint origin = box.min;
    std::vector<Vec2> poly;
    poly.reserve(polygon.size());
    for (const auto& p : polygon) poly.push_back({p.easting - origin.easting, p.northing - origin.northing});
    for (const auto& hp : box_halfplanes(box, origin)) {
        poly = clip_halfplane(poly, hp);
        if (poly.empty()) break;
    }
    Polygon out;
    out.reserve(poly.size());
    for (const auto& v : poly) out.push_back({v.x + origin.easting, v.y + origin.northing});
    return out;
}

}  // namespace snowgrid
