#include "cli.hpp"

#include <algorithm>
#include <iostream>
#include <numeric>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "snowgrid/errors.hpp"
#include "snowgrid/geometry.hpp"
#include "snowgrid/projection.hpp"
#include "snowgrid/service.hpp"
#include "snowgrid/spatial_stats.hpp"

namespace snowgrid::cli {

using nlohmann::json;

namespace {

// Bad flag values detected after parsing (exit 2).
class UsageError : public Error {
public:
    using Error::Error;
};

// A command ran and found invalid data (exit 1).
class ValidationFailed : public Error {
public:
    using Error::Error;
};

}  // namespace

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 computation failed");
    }
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
    return out;
}

std::vector<ManifestEntry> write_outputs(const std::vector<Product>& products, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error(fmt::format("cannot create output directory {}: {}", out_dir.string(), ec.message()));

    std::vector<ManifestEntry> entries;
    json listed = json::array();
    for (const auto& p : products) {
        write_text_file(out_dir / p.filename, p.contents);
        entries.push_back({p.filename, p.kind, sha256_hex(p.contents)});
        listed.push_back({{"file", p.filename}, {"kind", p.kind}, {"sha256", entries.back().sha256}});
    }
    write_text_file(out_dir / "manifest.json", json{{"products", listed}}.dump(2) + "\n");
    return entries;
}

Environment default_environment() {
    Environment env;
    env.out = &std::cout;
    env.err = &std::cerr;
    env.http_client_factory = [] { return make_http_client(); };
    return env;
}

namespace {

struct Context {
    RunConfig cfg;
    Environment env;
    std::ostream& out() { return *env.out; }
    std::ostream& err() { return *env.err; }
};

Dataset load(Context& ctx) {
    std::vector<std::string> warnings;
    Dataset ds = load_dataset(ctx.cfg.data_dir, &warnings);
    for (const auto& w : warnings) ctx.err() << "warning: " << w << '\n';
    return ds;
}

std::vector<Pump> active_pumps(const Context& ctx, const Dataset& ds) {
    for (int id : ctx.cfg.exclude_pumps) {
        if (ds.find_pump(id) == nullptr) throw UsageError(fmt::format("--exclude-pumps: unknown pump id {}", id));
    }
    std::vector<Pump> out;
    for (const auto& p : ds.pumps) {
        if (std::find(ctx.cfg.exclude_pumps.begin(), ctx.cfg.exclude_pumps.end(), p.id) == ctx.cfg.exclude_pumps.end()) {
            out.push_back(p);
        }
    }
    if (out.empty()) throw UsageError("--exclude-pumps: every pump is excluded");
    return out;
}

std::vector<StreetSegment> render_streets(const Context& ctx, const Dataset& ds) {
    if (!ctx.cfg.streets_csv) return load_streets_fallback(ds);
    return parse_streets_csv(read_text_file(*ctx.cfg.streets_csv));
}

std::string map_svg(const std::vector<Layer>& layers, const Dataset& ds, const MapStyle& style, std::string_view title) {
    return render_map(layers, ds.extent(), style, title);
}

Product validation_product(const Dataset& ds, const ValidationReport& report) {
    json findings = json::array();
    for (const auto& f : report.findings) {
        findings.push_back({{"message", f.message}, {"record_id", f.record_id ? json(*f.record_id) : json(nullptr)}});
    }
    json doc = {{"ok", report.ok()},
                {"counts", {{"cases", ds.cases.size()}, {"pumps", ds.pumps.size()}, {"streets", ds.streets.size()}}},
                {"findings", std::move(findings)}};
    return {"validation.json", "validation_report", doc.dump(2) + "\n"};
}

Product points_product(const Context& ctx, const Dataset& ds) {
    std::vector<Layer> layers{cases_layer(ds.cases), pumps_layer(ds.pumps, PumpMarker::triangle)};
    return {"points_map.svg", "points_map",
            map_svg(layers, ds, ctx.cfg.style, "Cholera deaths (red) and water pumps (blue)")};
}

Product overlay_product(const Context& ctx, const Dataset& ds) {
    const auto streets = render_streets(ctx, ds);
    std::vector<Layer> layers{streets_layer(streets), cases_layer(ds.cases), pumps_layer(ds.pumps)};
    return {"overlay_map.svg", "overlay_map",
            map_svg(layers, ds, ctx.cfg.style, "Cholera deaths and water pumps on the Soho street network")};
}

Product bars_product(const Context& ctx, const Dataset& ds) {
    const auto streets = render_streets(ctx, ds);
    std::vector<Layer> layers{streets_layer(streets, 0.6), render_bars(ds, ctx.cfg.style),
                              pumps_layer(ds.pumps, PumpMarker::dot)};
    return {"bars_map.svg", "bars_map", map_svg(layers, ds, ctx.cfg.style, "Deaths as stacked bars, pumps as dots")};
}

std::string assignments_csv(const std::vector<Assignment>& assignments) {
    std::string out = "case_id,pump_id,distance_m\n";
    for (const auto& a : assignments) out += fmt::format("{},{},{:.3f}\n", a.case_id, a.pump_id, a.distance);
    return out;
}

std::vector<Product> assign_products(const Context& ctx, const Dataset& ds) {
    const auto pumps = active_pumps(ctx, ds);
    const auto assignments = assign_cases(ds.cases, pumps);
    const auto streets = render_streets(ctx, ds);
    std::vector<Layer> layers{streets_layer(streets, 0.2), render_connections(assignments, ds, ctx.cfg.style)};
    return {{"assignments.csv", "assignments", assignments_csv(assignments)},
            {"connections.svg", "connections_map",
             map_svg(layers, ds, ctx.cfg.style, "Each death connected to its nearest pump")}};
}

Product voronoi_product(const Context& ctx, const Dataset& ds) {
    const auto pumps = active_pumps(ctx, ds);
    const auto cells = voronoi(pumps, ds.extent());
    const auto streets = render_streets(ctx, ds);
    std::vector<Layer> layers{voronoi_layer(cells, ds, ctx.cfg.style), streets_layer(streets, 0.5),
                              cases_layer(ds.cases), pumps_layer(pumps)};
    return {"voronoi.svg", "voronoi_map", map_svg(layers, ds, ctx.cfg.style, "Voronoi catchments of the pumps")};
}

double bandwidth_for(const Context& ctx, const Dataset& ds) {
    return ctx.cfg.bandwidth ? *ctx.cfg.bandwidth : default_bandwidth(ds);
}

std::vector<Product> kde_products(const Context& ctx, const Dataset& ds) {
    const double h = bandwidth_for(ctx, ds);
    const auto grid = kde(ds, h, ctx.cfg.cell_size, ds.bbox, 0);
    const auto streets = render_streets(ctx, ds);
    std::vector<Layer> layers{render_kde(grid, ctx.cfg.style), streets_layer(streets, 0.3), pumps_layer(ds.pumps)};
    return {{"kde.svg", "kde_map",
             map_svg(layers, ds, ctx.cfg.style, fmt::format("Kernel density of deaths, bandwidth {:.1f} m", h))},
            {"kde_grid.csv", "kde_raster", format_grid_csv(grid)}};
}

json summaries_json(const std::vector<PumpSummary>& summaries) {
    json out = json::array();
    for (const auto& s : summaries) {
        out.push_back({{"pump_id", s.pump_id},
                       {"label", s.label.empty() ? json(nullptr) : json(s.label)},
                       {"assigned_cases", s.assigned_cases},
                       {"assigned_deaths", s.assigned_deaths},
                       {"mean_distance_m", s.mean_distance ? json(*s.mean_distance) : json(nullptr)}});
    }
    return out;
}

Product stats_product(const Context& ctx, const Dataset& ds) {
    const auto pumps = active_pumps(ctx, ds);
    const auto assignments = assign_cases(ds.cases, pumps);
    const auto summaries = rank_by_deaths(summarize_pumps(pumps, ds.cases, assignments));
    const auto ce = clark_evans(ds, ds.bbox);

    std::vector<double> d;
    d.reserve(assignments.size());
    for (const auto& a : assignments) d.push_back(a.distance);
    std::sort(d.begin(), d.end());
    const double mean = d.empty() ? 0.0 : std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
    const double median =
        d.empty() ? 0.0 : (d.size() % 2 ? d[d.size() / 2] : (d[d.size() / 2 - 1] + d[d.size() / 2]) / 2.0);

    json doc = {{"n_cases", ds.cases.size()},
                {"total_deaths", ds.total_deaths()},
                {"excluded_pumps", ctx.cfg.exclude_pumps},
                {"default_bandwidth_m", default_bandwidth(ds)},
                {"clark_evans",
                 {{"n_points", ce.n_points},
                  {"area", ce.area},
                  {"observed_mean_nn", ce.observed_mean_nn},
                  {"expected_mean_nn", ce.expected_mean_nn},
                  {"clark_evans_r", ce.clark_evans_r}}},
                {"nearest_pump_distance_m",
                 {{"mean", mean}, {"median", median}, {"max", d.empty() ? 0.0 : d.back()}}},
                {"pump_summaries", summaries_json(summaries)}};
    return {"stats.json", "stats", doc.dump(2) + "\n"};
}

Product chart_product(const Context& ctx, const Dataset& ds) {
    const auto pumps = active_pumps(ctx, ds);
    const auto summaries = summarize_pumps(pumps, ds.cases, assign_cases(ds.cases, pumps));
    return {"pump_chart.svg", "pump_chart", render_pump_chart(summaries, ctx.cfg.style)};
}

void emit(Context& ctx, const std::vector<Product>& products) {
    for (const auto& e : write_outputs(products, ctx.cfg.out_dir)) {
        ctx.out() << (ctx.cfg.out_dir / e.filename).string() << "  " << e.sha256 << '\n';
    }
}

int cmd_validate(Context& ctx) {
    std::vector<std::string> warnings;
    const Dataset ds = read_dataset(ctx.cfg.data_dir, &warnings);
    for (const auto& w : warnings) ctx.err() << "warning: " << w << '\n';
    const auto report = validate(ds);
    emit(ctx, {validation_product(ds, report)});
    for (const auto& f : report.findings) ctx.err() << "finding: " << f.message << '\n';
    ctx.out() << fmt::format("{} cases, {} pumps, {} streets: {}\n", ds.cases.size(), ds.pumps.size(),
                             ds.streets.size(), report.ok() ? "valid" : "INVALID");
    return report.ok() ? kExitOk : kExitFailure;
}

int cmd_all(Context& ctx) {
    const Dataset ds = load(ctx);
    std::vector<Product> products{validation_product(ds, validate(ds)), points_product(ctx, ds),
                                  overlay_product(ctx, ds), bars_product(ctx, ds)};
    for (auto& p : assign_products(ctx, ds)) products.push_back(std::move(p));
    products.push_back(voronoi_product(ctx, ds));
    for (auto& p : kde_products(ctx, ds)) products.push_back(std::move(p));
    products.push_back(stats_product(ctx, ds));
    products.push_back(chart_product(ctx, ds));
    emit(ctx, products);
    return kExitOk;
}

struct FetchFlags {
    std::optional<std::filesystem::path> save_streets;
    int timeout_s = 25;
    std::string endpoint;
};

int cmd_fetch_streets(Context& ctx, const FetchFlags& flags) {
    const Dataset ds = load(ctx);
    std::vector<StreetSegment> streets;
    if (ctx.cfg.offline) {
        streets = load_streets_fallback(ds);
        ctx.out() << fmt::format("offline: {} vendored street segments\n", streets.size());
    } else {
        OverpassQuery q{transform_bbox(ds.bbox), "highway", flags.timeout_s};
        const std::string endpoint = flags.endpoint.empty() ? overpass_endpoint_from_env() : flags.endpoint;
        ctx.err() << "query: " << build_query(q) << '\n';
        auto client = ctx.env.http_client_factory();
        FetchOptions options;
        options.sleep = ctx.env.sleep;
        try {
            streets = fetch_streets(q, endpoint, *client, ds.bbox, options);
            ctx.out() << fmt::format("fetched {} street segments from {}\n", streets.size(), endpoint);
        } catch (const EmptyResult& e) {
            ctx.err() << "warning: " << e.what() << "; using vendored streets\n";
            streets = load_streets_fallback(ds);
        }
    }
    if (flags.save_streets) {
        write_text_file(*flags.save_streets, format_streets_csv(streets));
        ctx.out() << "saved " << flags.save_streets->string() << '\n';
    }
    return kExitOk;
}

int cmd_transform(Context& ctx, int from, int to, const std::vector<double>& xy) {
    if (xy.size() != 2) throw UsageError("transform expects exactly two coordinates");
    if (from == 27700 && to == 4326) {
        const auto g = grid_to_geo({xy[0], xy[1]});
        ctx.out() << fmt::format("{:.9f} {:.9f}\n", g.lon, g.lat);
    } else if (from == 4326 && to == 27700) {
        const auto p = geo_to_grid({xy[0], xy[1]});
        ctx.out() << fmt::format("{:.3f} {:.3f}\n", p.easting, p.northing);
    } else {
        throw UsageError(fmt::format("--from {} --to {}: only 27700 <-> 4326 is supported", from, to));
    }
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, Environment env) {
    if (!env.out) env.out = &std::cout;
    if (!env.err) env.err = &std::cerr;
    if (!env.http_client_factory) env.http_client_factory = [] { return make_http_client(); };

    Context ctx{RunConfig{}, env};
    RunConfig& cfg = ctx.cfg;

    CLI::App app{"Spatial analysis of the 1854 Broad Street cholera outbreak", "snowgrid"};
    app.require_subcommand(1, 1);
    app.set_config("--config", "", "Flat key=value file with option defaults");

    app.add_option("--data", cfg.data_dir, "Directory with cases.csv, pumps.csv, streets.csv")->capture_default_str();
    app.add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();
    app.add_option("--bandwidth", cfg.bandwidth, "KDE bandwidth in meters (default: rule of thumb)")
        ->check(CLI::PositiveNumber);
    app.add_option("--cell-size", cfg.cell_size, "KDE cell size in meters")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_flag("--offline", cfg.offline, "Never touch the network; use vendored streets");
    app.add_option("--exclude-pumps", cfg.exclude_pumps, "Comma-separated pump ids to remove (what-if)")
        ->delimiter(',');
    app.add_option("--streets", cfg.streets_csv, "Street CSV to draw instead of the vendored network");
    app.add_option("--canvas-width", cfg.style.canvas_width_px, "Map width in pixels")->check(CLI::PositiveNumber);
    app.add_option("--case-color", cfg.style.case_color, "Case marker color");
    app.add_option("--pump-color", cfg.style.pump_color, "Pump marker color");
    app.add_option("--background-color", cfg.style.background_color, "Map background color");

    auto sub = [&app](const char* name, const char* help) {
        auto* s = app.add_subcommand(name, help);
        s->fallthrough();
        return s;
    };
    auto* validate_cmd = sub("validate", "Check every dataset invariant, write validation.json");
    auto* map_cmd = sub("map", "Point map of deaths and pumps (points_map.svg)");
    auto* overlay_cmd = sub("overlay", "Point map over the street network (overlay_map.svg)");
    auto* bars_cmd = sub("bars", "Snow-style stacked death bars (bars_map.svg)");
    auto* assign_cmd = sub("assign", "Nearest-pump assignment (assignments.csv, connections.svg)");
    auto* voronoi_cmd = sub("voronoi", "Voronoi catchments (voronoi.svg)");
    auto* kde_cmd = sub("kde", "Kernel density heatmap (kde.svg, kde_grid.csv)");
    auto* stats_cmd = sub("stats", "Clustering and per-pump statistics (stats.json)");
    auto* chart_cmd = sub("chart", "Deaths per pump bar chart (pump_chart.svg)");
    auto* all_cmd = sub("all", "Every product above in one run");

    FetchFlags fetch_flags;
    auto* fetch_cmd = sub("fetch-streets", "Download streets for the study box from Overpass");
    fetch_cmd->add_option("--save-streets", fetch_flags.save_streets, "Write the street segments as CSV");
    fetch_cmd->add_option("--timeout", fetch_flags.timeout_s, "Overpass timeout in seconds")
        ->check(CLI::Range(1, 120))
        ->capture_default_str();
    fetch_cmd->add_option("--endpoint", fetch_flags.endpoint,
                          "Overpass interpreter URL (default: $SNOWGRID_OVERPASS_URL or the public instance)");

    int from_crs = 0, to_crs = 0;
    std::vector<double> coords;
    auto* transform_cmd = sub("transform", "Convert one coordinate pair between EPSG:27700 and EPSG:4326");
    transform_cmd->add_option("--from", from_crs, "Source EPSG code")->required()->check(CLI::IsMember({27700, 4326}));
    transform_cmd->add_option("--to", to_crs, "Target EPSG code")->required()->check(CLI::IsMember({27700, 4326}));
    transform_cmd->add_option("coords", coords, "x y (easting northing, or lon lat)")->expected(2)->required();

    std::string bind = kDefaultBind;
    std::filesystem::path static_dir;
    auto* serve_cmd = sub("serve", "Run the HTTP API for the browser explorer");
    serve_cmd->add_option("--bind", bind, "host:port")->capture_default_str();
    serve_cmd->add_option("--static", static_dir, "Directory of explorer assets served at /");

    std::vector<std::string> argv_rev(args.rbegin(), args.rend());
    if (!argv_rev.empty()) argv_rev.pop_back();  // program name
    try {
        app.parse(argv_rev);
    } catch (const CLI::ParseError& e) {
        const int code = e.get_exit_code();
        if (code == 0) {
            ctx.out() << app.help();
            return kExitOk;
        }
        ctx.err() << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        cfg.style.validate();
        if (validate_cmd->parsed()) return cmd_validate(ctx);
        if (fetch_cmd->parsed()) return cmd_fetch_streets(ctx, fetch_flags);
        if (transform_cmd->parsed()) return cmd_transform(ctx, from_crs, to_crs, coords);
        if (serve_cmd->parsed()) {
            const Dataset ds = load(ctx);
            serve(ds, bind, ServiceOptions{static_dir}, [&ctx](int port) {
                ctx.out() << "serving on port " << port << std::endl;
            });
            return kExitOk;
        }

        const Dataset ds = load(ctx);
        if (map_cmd->parsed()) emit(ctx, {points_product(ctx, ds)});
        else if (overlay_cmd->parsed()) emit(ctx, {overlay_product(ctx, ds)});
        else if (bars_cmd->parsed()) emit(ctx, {bars_product(ctx, ds)});
        else if (assign_cmd->parsed()) emit(ctx, assign_products(ctx, ds));
        else if (voronoi_cmd->parsed()) emit(ctx, {voronoi_product(ctx, ds)});
        else if (kde_cmd->parsed()) emit(ctx, kde_products(ctx, ds));
        else if (stats_cmd->parsed()) emit(ctx, {stats_product(ctx, ds)});
        else if (chart_cmd->parsed()) emit(ctx, {chart_product(ctx, ds)});
        else if (all_cmd->parsed()) return cmd_all(ctx);
        return kExitOk;
    } catch (const UsageError& e) {
        ctx.err() << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DomainError& e) {
        ctx.err() << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        ctx.err() << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

int run(int argc, const char* const* argv) {
    return run(std::vector<std::string>(argv, argv + argc), default_environment());
}

}  // namespace snowgrid::cli
