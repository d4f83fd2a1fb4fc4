#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "snowgrid/geodata.hpp"
#include "snowgrid/geometry.hpp"
#include "snowgrid/spatial_stats.hpp"

namespace snowgrid {

struct MapStyle {
    /// Canvas width; the height follows from the bbox aspect ratio.
    double canvas_width_px = 800.0;
    std::string background_color = "#ffffff";

    std::string case_color = "#ff0000";
    double case_opacity = 0.6;
    double case_radius_px = 3.0;

    std::string pump_color = "#0000ff";
    double pump_size_px = 10.0;

    std::string street_color = "#7f7f7f";
    double street_width_px = 1.0;

    std::string bar_color = "#000000";

    double connection_width_px = 1.0;
    std::string connection_case_color = "#000000";
    std::string connection_pump_color = "#ff0000";

    double voronoi_fill_opacity = 0.25;
    std::string voronoi_edge_color = "#333333";
    double voronoi_edge_width_px = 1.0;

    /// Categorical colors indexed by pump position in the dataset.
    std::vector<std::string> palette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                        "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
                                        "#393b79", "#637939", "#8c6d31"};

    /// Throws DomainError when the canvas is not positive or the palette is empty.
    void validate() const;
    const std::string& palette_color(int index) const;
};

enum class LayerKind { cases, pumps, streets, bars, connections, voronoi, kde };

std::string_view to_string(LayerKind kind) noexcept;

enum class PumpMarker { triangle, dot, star };

struct CasesPayload {
    std::vector<CaseRecord> cases;
    std::optional<std::string> color;
    std::optional<double> radius_px;
};

struct PumpsPayload {
    std::vector<Pump> pumps;
    PumpMarker marker = PumpMarker::triangle;
};

struct StreetsPayload {
    std::vector<StreetSegment> segments;
    double opacity = 1.0;
};

struct BarsPayload {
    std::vector<Quad> quads;
};

struct Connection {
    GridPoint from;
    GridPoint to;
    int case_id = 0;
    int pump_id = 0;
    std::string color;
};

/// Case-to-pump lines plus the pumps they lead to, drawn as stars.
struct ConnectionsPayload {
    std::vector<Connection> lines;
    std::vector<GridPoint> pump_sites;
};

struct ColoredCell {
    VoronoiCell cell;
    std::string color;
};

struct VoronoiPayload {
    std::vector<ColoredCell> cells;
};

struct KdePayload {
    DensityGrid grid;
};

/// A renderable data product. The kind is determined by the payload type.
class Layer {
public:
    using Payload = std::variant<CasesPayload, PumpsPayload, StreetsPayload, BarsPayload, ConnectionsPayload,
                                 VoronoiPayload, KdePayload>;

    explicit Layer(Payload payload) : payload_(std::move(payload)) {}

    LayerKind kind() const noexcept { return static_cast<LayerKind>(payload_.index()); }
    const Payload& payload() const noexcept { return payload_; }

private:
    Payload payload_;
};

Layer cases_layer(std::span<const CaseRecord> cases);
Layer pumps_layer(std::span<const Pump> pumps, PumpMarker marker = PumpMarker::triangle);
Layer streets_layer(std::span<const StreetSegment> segments, double opacity = 1.0);

/// One filled quad per case, from rotated_bar with height 2 * count.
Layer render_bars(const Dataset& dataset, const MapStyle& style);

/// One line per assignment, colored by the pump's position in `dataset.pumps`.
/// Throws ValidationError for ids missing from the dataset.
Layer render_connections(std::span<const Assignment> assignments, const Dataset& dataset, const MapStyle& style);

/// Cells colored like render_connections colors their pump.
Layer voronoi_layer(std::span<const VoronoiCell> cells, const Dataset& dataset, const MapStyle& style);

/// One rect per cell with a positive value; zero cells leave the background.
Layer render_kde(const DensityGrid& grid, const MapStyle& style);

/// Sequential ramp for t in [0, 1]: #ffffcc, #fed976, #fd8d3c, #e31a1c,
/// #800026 at equal spacing, interpolated linearly per channel.
std::string ramp_color(double t);

/// Uniform-scale, north-up mapping from grid meters to SVG pixels.
struct ScreenTransform {
    BoundingBox bbox;
    double scale = 1.0;  // px per meter

    ScreenTransform(const BoundingBox& box, double width_px);
    double width_px() const noexcept { return bbox.width() * scale; }
    double height_px() const noexcept { return bbox.height() * scale; }
    double x(double easting) const noexcept { return (easting - bbox.min.easting) * scale; }
    double y(double northing) const noexcept { return (bbox.max.northing - northing) * scale; }
};

/// SVG 1.1 document with viewBox "0 0 W H"; layers painted in order,
/// clipped to `bbox`. Coordinates are printed with 3 decimals.
/// Throws EmptyInput for an empty layer list.
std::string render_map(std::span<const Layer> layers, const BoundingBox& bbox, const MapStyle& style,
                       std::string_view title = {});

/// Horizontal bar chart of assigned deaths, longest first (ties by pump id).
/// Throws EmptyInput for no summaries.
std::string render_pump_chart(std::span<const PumpSummary> summaries, const MapStyle& style);

/// Fixed 3-decimal formatting used for every SVG coordinate ("-0.000" becomes "0.000").
std::string svg_number(double v);

}  // namespace snowgrid
