#include <map>
#include <regex>
#include <set>

#include <gtest/gtest.h>

#include "snowgrid/errors.hpp"
#include "snowgrid/geometry.hpp"
#include "snowgrid/render.hpp"
#include "snowgrid/spatial_stats.hpp"
#include "support.hpp"

using namespace snowgrid;

namespace {

// Body of the first <g id="layer-N-name" ...> group.
std::string group(const std::string& svg, const std::string& name) {
    const std::regex open("<g id=\"layer-[0-9]+-" + name + "\"[^>]*>\n");
    std::smatch m;
    if (!std::regex_search(svg, m, open)) return {};
    const auto start = static_cast<std::size_t>(m.position(0) + m.length(0));
    return svg.substr(start, svg.find("</g>", start) - start);
}

std::size_t count(const std::string& haystack, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) ++n;
    return n;
}

std::vector<std::string> attr_values(const std::string& text, const std::string& attr) {
    std::vector<std::string> out;
    const std::regex re(attr + "=\"([^\"]*)\"");
    for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it) {
        out.push_back((*it)[1]);
    }
    return out;
}

const BoundingBox kBox{{0, 0}, {200, 100}};

}  // namespace

TEST(Layer, KindFollowsPayload) {
    const auto& ds = test::vendored();
    MapStyle style;
    EXPECT_EQ(cases_layer(ds.cases).kind(), LayerKind::cases);
    EXPECT_EQ(pumps_layer(ds.pumps).kind(), LayerKind::pumps);
    EXPECT_EQ(streets_layer(ds.streets).kind(), LayerKind::streets);
    EXPECT_EQ(render_bars(ds, style).kind(), LayerKind::bars);
    EXPECT_EQ(render_connections(assign_cases(ds.cases, ds.pumps), ds, style).kind(), LayerKind::connections);
    EXPECT_EQ(voronoi_layer(voronoi(ds.pumps, ds.extent()), ds, style).kind(), LayerKind::voronoi);
    EXPECT_EQ(render_kde(kde(ds, 30, 20, ds.bbox), style).kind(), LayerKind::kde);
    EXPECT_EQ(to_string(LayerKind::connections), "connections");
}

TEST(MapStyle, Validate) {
    MapStyle s;
    EXPECT_NO_THROW(s.validate());
    s.canvas_width_px = 0;
    EXPECT_THROW(s.validate(), DomainError);
    s = MapStyle{};
    s.palette.clear();
    EXPECT_THROW(s.validate(), DomainError);
    s = MapStyle{};
    EXPECT_EQ(s.palette_color(static_cast<int>(s.palette.size()) + 2), s.palette[2]);
}

TEST(RenderMap, EmptyLayersRejected) {
    EXPECT_THROW(render_map(std::vector<Layer>{}, kBox, MapStyle{}), EmptyInput);
}

TEST(RenderMap, ViewBoxKeepsAspectRatio) {
    const std::vector<CaseRecord> cases{{1, {100, 50}, 1, 0}};
    const std::vector<Layer> layers{cases_layer(cases)};
    const std::string svg = render_map(layers, kBox, MapStyle{});
    EXPECT_NE(svg.find("viewBox=\"0 0 800.000 400.000\""), std::string::npos);
}

TEST(RenderMap, CenterCaseAtCanvasCenter) {
    const std::vector<CaseRecord> cases{{1, {100, 50}, 1, 0}};
    const std::vector<Layer> layers{cases_layer(cases)};
    const auto body = group(render_map(layers, kBox, MapStyle{}), "cases");
    EXPECT_NE(body.find("<circle cx=\"400.000\" cy=\"200.000\""), std::string::npos) << body;
}

TEST(RenderMap, NorthIsUp) {
    ScreenTransform t(kBox, 800);
    EXPECT_DOUBLE_EQ(t.y(100), 0.0);
    EXPECT_DOUBLE_EQ(t.y(0), 400.0);
    EXPECT_DOUBLE_EQ(t.x(200), 800.0);
}

TEST(RenderMap, ScreenDistanceIsWorldTimesScale) {
    const auto& ds = test::vendored();
    ScreenTransform t(ds.extent(), 800);
    for (std::size_t i = 1; i < ds.cases.size(); ++i) {
        const auto& a = ds.cases[i - 1].location;
        const auto& b = ds.cases[i].location;
        const double screen = std::hypot(t.x(a.easting) - t.x(b.easting), t.y(a.northing) - t.y(b.northing));
        EXPECT_NEAR(screen, distance(a, b) * t.scale, 0.01);
    }
}

TEST(RenderMap, PointMapEncoding) {
    const auto& ds = test::vendored();
    const std::vector<Layer> layers{cases_layer(ds.cases), pumps_layer(ds.pumps)};
    const std::string svg = render_map(layers, ds.extent(), MapStyle{});
    const std::regex cases_open("<g id=\"layer-0-cases\" fill=\"#ff0000\"");
    const std::regex pumps_open("<g id=\"layer-1-pumps\" fill=\"#0000ff\"");
    EXPECT_TRUE(std::regex_search(svg, cases_open));
    EXPECT_TRUE(std::regex_search(svg, pumps_open));
    EXPECT_EQ(count(group(svg, "cases"), "<circle"), ds.cases.size());
    EXPECT_EQ(count(group(svg, "pumps"), "<polygon"), ds.pumps.size());
}

TEST(RenderMap, LayersPaintedInOrder) {
    const auto& ds = test::vendored();
    const std::vector<Layer> layers{pumps_layer(ds.pumps), streets_layer(ds.streets), cases_layer(ds.cases)};
    const std::string svg = render_map(layers, ds.extent(), MapStyle{});
    const auto p = svg.find("layer-0-pumps");
    const auto s = svg.find("layer-1-streets");
    const auto c = svg.find("layer-2-cases");
    ASSERT_NE(p, std::string::npos);
    EXPECT_LT(p, s);
    EXPECT_LT(s, c);
}

TEST(RenderMap, Deterministic) {
    const auto& ds = test::vendored();
    MapStyle style;
    auto make = [&] {
        const std::vector<Layer> layers{streets_layer(ds.streets), render_bars(ds, style), pumps_layer(ds.pumps)};
        return render_map(layers, ds.extent(), style);
    };
    EXPECT_EQ(make(), make());
}

TEST(RenderMap, OutsideElementsAreClipped) {
    const std::vector<CaseRecord> cases{{1, {100, 50}, 1, 0}, {2, {500, 50}, 1, 0}};
    const std::vector<StreetSegment> streets{{{-100, 50}, {100, 50}}};
    const std::vector<Layer> layers{cases_layer(cases), streets_layer(streets)};
    const std::string svg = render_map(layers, kBox, MapStyle{});
    EXPECT_EQ(count(group(svg, "cases"), "<circle"), 1u);
    EXPECT_NE(group(svg, "streets").find("x1=\"0.000\""), std::string::npos);
}

TEST(RenderBars, AxisAlignedSingleBar) {
    Dataset ds;
    ds.bbox = kBox;
    ds.cases = {{1, {100, 50}, 1, 0.0}};
    const std::vector<Layer> layers{render_bars(ds, MapStyle{})};
    const std::string body = group(render_map(layers, kBox, MapStyle{}), "bars");
    // 800 px for 200 m: 4 px per meter; 4 x 2 m bar -> 16 x 8 px.
    EXPECT_NE(body.find("points=\"392.000,200.000 408.000,200.000 408.000,192.000 392.000,192.000\""),
              std::string::npos)
        << body;
}

TEST(RenderBars, OneQuadPerCase) {
    const auto& ds = test::vendored();
    const Layer layer = render_bars(ds, MapStyle{});
    EXPECT_EQ(std::get<BarsPayload>(layer.payload()).quads.size(), ds.cases.size());
    const std::vector<Layer> layers{layer};
    const std::string svg = render_map(layers, ds.extent(), MapStyle{});
    EXPECT_EQ(count(group(svg, "bars"), "<polygon"), ds.cases.size());
    EXPECT_NE(svg.find("fill=\"#000000\""), std::string::npos);
}

TEST(RenderConnections, OneCaseOnePump) {
    Dataset ds;
    ds.bbox = kBox;
    ds.cases = {{1, {50, 50}, 1, 0}};
    ds.pumps = {{1, "", {150, 50}}};
    const auto a = assign_cases(ds.cases, ds.pumps);
    MapStyle style;
    const std::vector<Layer> layers{render_connections(a, ds, style)};
    const std::string body = group(render_map(layers, kBox, style), "connections");
    EXPECT_EQ(count(body, "<line"), 1u);
    EXPECT_NE(body.find("x1=\"200.000\" y1=\"200.000\" x2=\"600.000\" y2=\"200.000\""), std::string::npos) << body;
    EXPECT_NE(body.find(style.palette[0]), std::string::npos);
}

TEST(RenderConnections, SharedPumpSharesColor) {
    const auto& ds = test::vendored();
    const auto a = assign_cases(ds.cases, ds.pumps);
    const Layer layer = render_connections(a, ds, MapStyle{});
    const auto& lines = std::get<ConnectionsPayload>(layer.payload()).lines;
    ASSERT_EQ(lines.size(), ds.cases.size());
    std::map<int, std::string> color_of;
    for (const auto& l : lines) {
        auto [it, fresh] = color_of.emplace(l.pump_id, l.color);
        EXPECT_EQ(it->second, l.color);
    }
}

TEST(RenderConnections, VendoredSegmentCountAndStars) {
    const auto& ds = test::vendored();
    const auto a = assign_cases(ds.cases, ds.pumps);
    const std::vector<Layer> layers{render_connections(a, ds, MapStyle{})};
    const std::string svg = render_map(layers, ds.extent(), MapStyle{});
    EXPECT_EQ(count(group(svg, "connections"), "<line"), ds.cases.size());
    std::set<int> used;
    for (const auto& x : a) used.insert(x.pump_id);
    EXPECT_EQ(count(svg.substr(svg.find("connection-pumps")), "<path"), used.size());
}

TEST(RenderConnections, UnknownPumpRejected) {
    const auto& ds = test::vendored();
    const std::vector<Assignment> bad{{ds.cases[0].id, 99, 1.0}};
    EXPECT_THROW(render_connections(bad, ds, MapStyle{}), ValidationError);
}

TEST(RenderVoronoi, OneCellPerPump) {
    const auto& ds = test::vendored();
    const std::vector<Layer> layers{voronoi_layer(voronoi(ds.pumps, ds.extent()), ds, MapStyle{})};
    const std::string body = group(render_map(layers, ds.extent(), MapStyle{}), "voronoi");
    EXPECT_EQ(count(body, "<polygon"), ds.pumps.size());
}

TEST(RenderKde, SingleNonzeroCell) {
    DensityGrid g{{0, 0}, 10.0, 20, 10, std::vector<double>(200, 0.0)};
    g.values[37] = 0.5;
    const std::vector<Layer> layers{render_kde(g, MapStyle{})};
    const std::string body = group(render_map(layers, kBox, MapStyle{}), "kde");
    EXPECT_EQ(count(body, "<rect"), 1u);
    EXPECT_NE(body.find("#800026"), std::string::npos);
}

TEST(RenderKde, AllZeroGridIsBackgroundOnly) {
    DensityGrid g{{0, 0}, 10.0, 20, 10, std::vector<double>(200, 0.0)};
    const std::vector<Layer> layers{render_kde(g, MapStyle{})};
    EXPECT_EQ(count(group(render_map(layers, kBox, MapStyle{}), "kde"), "<rect"), 0u);
}

TEST(RenderKde, UniformGridSameFill) {
    DensityGrid g{{0, 0}, 10.0, 20, 10, std::vector<double>(200, 2.0)};
    const std::vector<Layer> layers{render_kde(g, MapStyle{})};
    const auto fills = attr_values(group(render_map(layers, kBox, MapStyle{}), "kde"), "fill");
    ASSERT_EQ(fills.size(), 200u);
    for (const auto& f : fills) EXPECT_EQ(f, fills[0]);
}

TEST(RenderKde, DarkestCellNearBroadStreet) {
    const auto& ds = test::vendored();
    const auto g = kde(ds, default_bandwidth(ds), 2.0, ds.bbox);
    const std::vector<Layer> layers{render_kde(g, MapStyle{})};
    const BoundingBox view = ds.extent();
    const std::string body = group(render_map(layers, view, MapStyle{}), "kde");
    const std::regex darkest("<rect x=\"([0-9.]+)\" y=\"([0-9.]+)\" width=\"([0-9.]+)\" height=\"([0-9.]+)\" fill=\"#800026\"");
    std::smatch m;
    ASSERT_TRUE(std::regex_search(body, m, darkest));
    ScreenTransform t(view, MapStyle{}.canvas_width_px);
    const double cx = std::stod(m[1]) + std::stod(m[3]) / 2.0;
    const double cy = std::stod(m[2]) + std::stod(m[4]) / 2.0;
    const GridPoint world{view.min.easting + cx / t.scale, view.max.northing - cy / t.scale};
    EXPECT_LT(distance(world, ds.find_pump(test::kBroadStreetId)->location), 50.0);
}

TEST(RampColor, Stops) {
    EXPECT_EQ(ramp_color(0.0), "#ffffcc");
    EXPECT_EQ(ramp_color(0.5), "#fd8d3c");
    EXPECT_EQ(ramp_color(1.0), "#800026");
}

TEST(SvgNumber, FixedThreeDecimals) {
    EXPECT_EQ(svg_number(1.0), "1.000");
    EXPECT_EQ(svg_number(-0.0001), "0.000");
    EXPECT_EQ(svg_number(2.0005), "2.001");
}

TEST(PumpChart, SingleBarFullWidth) {
    const std::vector<PumpSummary> s{{1, "", 3, 6, 10.0}};
    const std::string svg = render_pump_chart(s, MapStyle{});
    EXPECT_EQ(count(svg, "<rect x=") - 1, 1u);  // minus background
    EXPECT_NE(svg.find(">6<"), std::string::npos);
}

TEST(PumpChart, SortedDescendingTiesById) {
    const std::vector<PumpSummary> s{{4, "", 1, 5, 1.0}, {2, "", 1, 5, 1.0}, {3, "", 2, 9, 1.0}};
    const auto order = attr_values(render_pump_chart(s, MapStyle{}), "data-pump");
    EXPECT_EQ(order, (std::vector<std::string>{"3", "2", "4"}));
}

TEST(PumpChart, VendoredFirstBarIsBroadStreet) {
    const auto& ds = test::vendored();
    const std::string svg = render_pump_chart(summarize_pumps(ds, assign_cases(ds.cases, ds.pumps)), MapStyle{});
    const auto first_label = svg.find("text-anchor=\"end\"");
    ASSERT_NE(first_label, std::string::npos);
    EXPECT_EQ(svg.find("Broad Street", first_label), svg.find('>', first_label) + 1);
}

TEST(PumpChart, EmptyRejected) {
    EXPECT_THROW(render_pump_chart(std::vector<PumpSummary>{}, MapStyle{}), EmptyInput);
}
