#include "snowgrid/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iterator>
#include <numbers>

#include <fmt/format.h>

#include "snowgrid/errors.hpp"

namespace snowgrid {

void MapStyle::validate() const {
    if (!(canvas_width_px > 0.0) || !std::isfinite(canvas_width_px)) {
        throw DomainError("canvas width must be positive");
    }
    if (palette.empty()) throw DomainError("palette must not be empty");
}

const std::string& MapStyle::palette_color(int index) const {
    const int n = static_cast<int>(palette.size());
    return palette[static_cast<std::size_t>(((index % n) + n) % n)];
}

std::string_view to_string(LayerKind kind) noexcept {
    switch (kind) {
        case LayerKind::cases: return "cases";
        case LayerKind::pumps: return "pumps";
        case LayerKind::streets: return "streets";
        case LayerKind::bars: return "bars";
        case LayerKind::connections: return "connections";
        case LayerKind::voronoi: return "voronoi";
        case LayerKind::kde: return "kde";
    }
    return "unknown";
}

std::string svg_number(double v) {
    auto s = fmt::format("{:.3f}", v);
    if (s == "-0.000") s = "0.000";
    return s;
}

Layer cases_layer(std::span<const CaseRecord> cases) {
    return Layer{CasesPayload{{cases.begin(), cases.end()}, std::nullopt, std::nullopt}};
}

Layer pumps_layer(std::span<const Pump> pumps, PumpMarker marker) {
    return Layer{PumpsPayload{{pumps.begin(), pumps.end()}, marker}};
}

Layer streets_layer(std::span<const StreetSegment> segments, double opacity) {
    return Layer{StreetsPayload{{segments.begin(), segments.end()}, opacity}};
}

Layer render_bars(const Dataset& dataset, const MapStyle& style) {
    style.validate();
    BarsPayload payload;
    payload.quads.reserve(dataset.cases.size());
    for (const auto& c : dataset.cases) payload.quads.push_back(bar_for_case(c));
    return Layer{std::move(payload)};
}

Layer render_connections(std::span<const Assignment> assignments, const Dataset& dataset, const MapStyle& style) {
    style.validate();
    ConnectionsPayload payload;
    payload.lines.reserve(assignments.size());
    std::vector<int> used;
    for (const auto& a : assignments) {
        const CaseRecord* c = dataset.find_case(a.case_id);
        const int pump_idx = dataset.pump_index(a.pump_id);
        if (c == nullptr) throw ValidationError(fmt::format("unknown case {}", a.case_id), a.case_id);
        if (pump_idx < 0) throw ValidationError(fmt::format("unknown pump {}", a.pump_id), a.pump_id);
        const Pump& p = dataset.pumps[static_cast<std::size_t>(pump_idx)];
        payload.lines.push_back({c->location, p.location, c->id, p.id, style.palette_color(pump_idx)});
        if (std::find(used.begin(), used.end(), pump_idx) == used.end()) used.push_back(pump_idx);
    }
    std::sort(used.begin(), used.end());
    for (int idx : used) payload.pump_sites.push_back(dataset.pumps[static_cast<std::size_t>(idx)].location);
    return Layer{std::move(payload)};
}

Layer voronoi_layer(std::span<const VoronoiCell> cells, const Dataset& dataset, const MapStyle& style) {
    style.validate();
    VoronoiPayload payload;
    payload.cells.reserve(cells.size());
    for (const auto& cell : cells) {
        const int idx = dataset.pump_index(cell.pump_id);
        if (idx < 0) throw ValidationError(fmt::format("unknown pump {}", cell.pump_id), cell.pump_id);
        payload.cells.push_back({cell, style.palette_color(idx)});
    }
    return Layer{std::move(payload)};
}

Layer render_kde(const DensityGrid& grid, const MapStyle& style) {
    style.validate();
    return Layer{KdePayload{grid}};
}

std::string ramp_color(double t) {
    static constexpr std::array<std::array<int, 3>, 5> kStops{
        {{0xff, 0xff, 0xcc}, {0xfe, 0xd9, 0x76}, {0xfd, 0x8d, 0x3c}, {0xe3, 0x1a, 0x1c}, {0x80, 0x00, 0x26}}};
    t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0);
    const double pos = t * (kStops.size() - 1);
    const auto lo = std::min<std::size_t>(static_cast<std::size_t>(pos), kStops.size() - 2);
    const double f = pos - static_cast<double>(lo);
    std::array<int, 3> rgb{};
    for (std::size_t k = 0; k < 3; ++k) {
        rgb[k] = static_cast<int>(std::lround(kStops[lo][k] + f * (kStops[lo + 1][k] - kStops[lo][k])));
    }
    return fmt::format("#{:02x}{:02x}{:02x}", rgb[0], rgb[1], rgb[2]);
}

ScreenTransform::ScreenTransform(const BoundingBox& box, double width) : bbox(box), scale(width / box.width()) {}

namespace {

using Out = std::back_insert_iterator<std::string>;

std::string xml_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

class MapWriter {
public:
    MapWriter(std::string& out, const ScreenTransform& tf, const MapStyle& style)
        : out_(out), it_(std::back_inserter(out)), tf_(tf), style_(style) {}

    void operator()(const CasesPayload& p) {
        const auto& color = p.color ? *p.color : style_.case_color;
        const double r = p.radius_px.value_or(style_.case_radius_px);
        const double opacity = p.color ? 1.0 : style_.case_opacity;
        open_group("cases", fmt::format("fill=\"{}\" fill-opacity=\"{}\"", color, svg_number(opacity)));
        for (const auto& c : p.cases) {
            if (!tf_.bbox.contains(c.location)) continue;
            fmt::format_to(it_, "<circle cx=\"{}\" cy=\"{}\" r=\"{}\"/>\n", sx(c.location), sy(c.location),
                           svg_number(r));
        }
        close_group();
    }

    void operator()(const PumpsPayload& p) {
        const double size = style_.pump_size_px;
        switch (p.marker) {
            case PumpMarker::triangle:
                open_group("pumps", fmt::format("fill=\"{}\"", style_.pump_color));
                for (const auto& pump : p.pumps) {
                    if (!tf_.bbox.contains(pump.location)) continue;
                    triangle(pump.location, size);
                }
                break;
            case PumpMarker::dot:
                open_group("pumps", fmt::format("fill=\"{}\"", style_.pump_color));
                for (const auto& pump : p.pumps) {
                    if (!tf_.bbox.contains(pump.location)) continue;
                    fmt::format_to(it_, "<circle cx=\"{}\" cy=\"{}\" r=\"{}\"/>\n", sx(pump.location),
                                   sy(pump.location), svg_number(size / 3.0));
                }
                break;
            case PumpMarker::star:
                open_group("pumps", fmt::format("fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"", style_.pump_color,
                                                svg_number(1.5)));
                for (const auto& pump : p.pumps) {
                    if (!tf_.bbox.contains(pump.location)) continue;
                    star(pump.location, size);
                }
                break;
        }
        close_group();
    }

    void operator()(const StreetsPayload& p) {
        open_group("streets", fmt::format("stroke=\"{}\" stroke-width=\"{}\" stroke-opacity=\"{}\" stroke-linecap=\"round\"",
                                          style_.street_color, svg_number(style_.street_width_px),
                                          svg_number(p.opacity)));
        for (const auto& s : p.segments) line(s, {});
        close_group();
    }

    void operator()(const BarsPayload& p) {
        open_group("bars", fmt::format("fill=\"{}\" stroke=\"none\"", style_.bar_color));
        for (const auto& q : p.quads) polygon(std::span<const GridPoint>(q.corners.data(), q.corners.size()), {});
        close_group();
    }

    void operator()(const ConnectionsPayload& p) {
        open_group("connections", fmt::format("stroke-width=\"{}\"", svg_number(style_.connection_width_px)));
        for (const auto& c : p.lines) line({c.from, c.to}, fmt::format(" stroke=\"{}\"", c.color));
        close_group();
        open_group("connection-cases", fmt::format("fill=\"{}\"", style_.connection_case_color));
        for (const auto& c : p.lines) {
            if (!tf_.bbox.contains(c.from)) continue;
            fmt::format_to(it_, "<circle cx=\"{}\" cy=\"{}\" r=\"{}\"/>\n", sx(c.from), sy(c.from), svg_number(1.5));
        }
        close_group();
        open_group("connection-pumps", fmt::format("fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"",
                                                   style_.connection_pump_color, svg_number(1.5)));
        for (const auto& site : p.pump_sites) {
            if (tf_.bbox.contains(site)) star(site, style_.pump_size_px);
        }
        close_group();
    }

    void operator()(const VoronoiPayload& p) {
        open_group("voronoi", fmt::format("fill-opacity=\"{}\" stroke=\"{}\" stroke-width=\"{}\"",
                                          svg_number(style_.voronoi_fill_opacity), style_.voronoi_edge_color,
                                          svg_number(style_.voronoi_edge_width_px)));
        for (const auto& c : p.cells) {
            polygon(c.cell.polygon, fmt::format(" fill=\"{}\" data-pump=\"{}\"", c.color, c.cell.pump_id));
        }
        close_group();
    }

    void operator()(const KdePayload& p) {
        const auto& g = p.grid;
        const double vmax = g.max_value();
        open_group("kde", "stroke=\"none\" shape-rendering=\"crispEdges\"");
        if (vmax > 0.0) {
            for (int iy = 0; iy < g.ny; ++iy) {
                for (int ix = 0; ix < g.nx; ++ix) {
                    const double v = g.at(ix, iy);
                    if (!(v > 0.0)) continue;
                    const double e0 = std::max(g.origin.easting + ix * g.cell_size, tf_.bbox.min.easting);
                    const double e1 = std::min(g.origin.easting + (ix + 1) * g.cell_size, tf_.bbox.max.easting);
                    const double n0 = std::max(g.origin.northing + iy * g.cell_size, tf_.bbox.min.northing);
                    const double n1 = std::min(g.origin.northing + (iy + 1) * g.cell_size, tf_.bbox.max.northing);
                    if (!(e1 > e0) || !(n1 > n0)) continue;
                    fmt::format_to(it_, "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n",
                                   svg_number(tf_.x(e0)), svg_number(tf_.y(n1)), svg_number((e1 - e0) * tf_.scale),
                                   svg_number((n1 - n0) * tf_.scale), ramp_color(v / vmax));
                }
            }
        }
        close_group();
    }

    int next_layer_index() const noexcept { return layer_index_; }

private:
    std::string sx(const GridPoint& p) const { return svg_number(tf_.x(p.easting)); }
    std::string sy(const GridPoint& p) const { return svg_number(tf_.y(p.northing)); }

    void open_group(std::string_view name, std::string_view attrs) {
        fmt::format_to(it_, "<g id=\"layer-{}-{}\" {}>\n", layer_index_, name, attrs);
    }
    void close_group() {
        out_ += "</g>\n";
        ++layer_index_;
    }

    void line(const StreetSegment& s, std::string_view extra) {
        auto clipped = clip_segment(s, tf_.bbox);
        if (!clipped) return;
        fmt::format_to(it_, "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"{}/>\n", sx(clipped->start),
                       sy(clipped->start), sx(clipped->end), sy(clipped->end), extra);
    }

    void polygon(std::span<const GridPoint> ring, std::string_view extra) {
        const auto clipped = clip_polygon(ring, tf_.bbox);
        if (clipped.size() < 3) return;
        out_ += "<polygon points=\"";
        for (std::size_t i = 0; i < clipped.size(); ++i) {
            if (i) out_ += ' ';
            fmt::format_to(it_, "{},{}", sx(clipped[i]), sy(clipped[i]));
        }
        fmt::format_to(it_, "\"{}/>\n", extra);
    }

    void triangle(const GridPoint& c, double size) {
        // Equilateral, pointing up, centroid at the site.
        const double cx = tf_.x(c.easting), cy = tf_.y(c.northing);
        const double r = size / std::sqrt(3.0);
        fmt::format_to(it_, "<polygon points=\"{},{} {},{} {},{}\"/>\n", svg_number(cx), svg_number(cy - r),
                       svg_number(cx + size / 2), svg_number(cy + r / 2), svg_number(cx - size / 2),
                       svg_number(cy + r / 2));
    }

    void star(const GridPoint& c, double size) {
        // Plus overlaid with a cross, as an asterisk marker.
        const double cx = tf_.x(c.easting), cy = tf_.y(c.northing);
        const double h = size / 2, d = h / std::numbers::sqrt2;
        fmt::format_to(it_, "<path d=\"M{} {}H{}M{} {}V{}M{} {}L{} {}M{} {}L{} {}\"/>\n", svg_number(cx - h),
                       svg_number(cy), svg_number(cx + h), svg_number(cx), svg_number(cy - h), svg_number(cy + h),
                       svg_number(cx - d), svg_number(cy - d), svg_number(cx + d), svg_number(cy + d),
                       svg_number(cx - d), svg_number(cy + d), svg_number(cx + d), svg_number(cy - d));
    }

    std::string& out_;
    Out it_;
    const ScreenTransform& tf_;
    const MapStyle& style_;
    int layer_index_ = 0;
};

void svg_header(std::string& out, double w, double h, std::string_view title, std::string_view background) {
    auto it = std::back_inserter(out);
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    fmt::format_to(it,
                   "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0}\" height=\"{1}\" "
                   "viewBox=\"0 0 {0} {1}\">\n",
                   svg_number(w), svg_number(h));
    if (!title.empty()) fmt::format_to(it, "<title>{}</title>\n", xml_escape(title));
    fmt::format_to(it, "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n", svg_number(w),
                   svg_number(h), background);
}

}  // namespace

std::string render_map(std::span<const Layer> layers, const BoundingBox& bbox, const MapStyle& style,
                       std::string_view title) {
    if (layers.empty()) throw EmptyInput("render_map needs at least one layer");
    if (!bbox.valid()) throw DomainError("invalid render bounding box");
    style.validate();

    const ScreenTransform tf(bbox, style.canvas_width_px);
    std::string out;
    svg_header(out, tf.width_px(), tf.height_px(), title, style.background_color);
    MapWriter writer(out, tf, style);
    for (const auto& layer : layers) std::visit(writer, layer.payload());
    out += "</svg>\n";
    return out;
}

std::string render_pump_chart(std::span<const PumpSummary> summaries, const MapStyle& style) {
    if (summaries.empty()) throw EmptyInput("pump chart needs at least one summary");
    style.validate();

    const auto ranked = rank_by_deaths({summaries.begin(), summaries.end()});
    constexpr double kTop = 40.0, kRow = 32.0, kBar = 24.0, kBottom = 16.0;
    constexpr double kLabelWidth = 150.0, kValueWidth = 60.0;
    const double width = style.canvas_width_px;
    const double plot = std::max(1.0, width - kLabelWidth - kValueWidth);
    const double height = kTop + kRow * static_cast<double>(ranked.size()) + kBottom;
    long vmax = 0;
    for (const auto& s : ranked) vmax = std::max(vmax, s.assigned_deaths);

    std::string out;
    svg_header(out, width, height, "Deaths by nearest pump", style.background_color);
    auto it = std::back_inserter(out);
    fmt::format_to(it, "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"16\">{}</text>\n",
                   svg_number(8.0), svg_number(24.0), "Deaths by nearest pump");
    out += "<g id=\"bars\" font-family=\"sans-serif\" font-size=\"12\">\n";
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        const auto& s = ranked[i];
        const double y = kTop + kRow * static_cast<double>(i);
        const double w = vmax > 0 ? plot * static_cast<double>(s.assigned_deaths) / static_cast<double>(vmax) : 0.0;
        const std::string name = s.label.empty() ? fmt::format("Pump {}", s.pump_id) : s.label;
        fmt::format_to(it,
                       "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" dominant-baseline=\"middle\">{}</text>\n",
                       svg_number(kLabelWidth - 8.0), svg_number(y + kBar / 2), xml_escape(name));
        fmt::format_to(it, "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" data-pump=\"{}\"/>\n",
                       svg_number(kLabelWidth), svg_number(y), svg_number(w), svg_number(kBar), style.pump_color,
                       s.pump_id);
        fmt::format_to(it, "<text x=\"{}\" y=\"{}\" dominant-baseline=\"middle\">{}</text>\n",
                       svg_number(kLabelWidth + w + 6.0), svg_number(y + kBar / 2), s.assigned_deaths);
    }
    out += "</g>\n</svg>\n";
    return out;
}

}  // namespace snowgrid
