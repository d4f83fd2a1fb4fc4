#include "snowgrid/service.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <csignal>
#include <cmath>
#include <regex>
#include <set>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include "snowgrid/errors.hpp"
#include "snowgrid/geometry.hpp"
#include "snowgrid/projection.hpp"
#include "snowgrid/spatial_stats.hpp"

namespace snowgrid {

using nlohmann::json;

namespace {

constexpr const char* kGeoJson = "application/geo+json";
constexpr const char* kJson = "application/json";
constexpr double kDefaultServiceCell = 2.0;

struct ApiFailure {
    ApiError error;
};

[[noreturn]] void fail(int status, std::string code, std::string message) {
    throw ApiFailure{{status, std::move(code), std::move(message)}};
}

json lonlat(const GridPoint& p) {
    const auto g = grid_to_geo(p);
    return json::array({g.lon, g.lat});
}

json feature(json geometry, json properties) {
    return {{"type", "Feature"}, {"geometry", std::move(geometry)}, {"properties", std::move(properties)}};
}

json collection(json features) {
    return {{"type", "FeatureCollection"}, {"features", std::move(features)}};
}

ApiResponse ok(const json& body, const char* content_type) {
    return {200, content_type, body.dump(), {}};
}

std::vector<int> parse_id_list(const std::string& text) {
    std::vector<int> ids;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto comma = text.find(',', start);
        std::string_view item(text.data() + start, (comma == std::string::npos ? text.size() : comma) - start);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        if (!item.empty()) {
            int id = 0;
            auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), id);
            if (ec != std::errc{} || ptr != item.data() + item.size()) {
                fail(400, "bad_parameter", fmt::format("exclude: '{}' is not a pump id", item));
            }
            ids.push_back(id);
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return ids;
}

double parse_positive(const std::map<std::string, std::string>& params, const std::string& key, double fallback) {
    auto it = params.find(key);
    if (it == params.end() || it->second.empty()) return fallback;
    const std::string& s = it->second;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
        fail(400, "bad_parameter", fmt::format("{}: '{}' is not a number", key, s));
    }
    if (!(v > 0.0)) fail(400, "bad_parameter", fmt::format("{} must be positive", key));
    return v;
}

// Active pump set after applying ?exclude=.
std::vector<Pump> active_pumps(const Dataset& ds, const std::map<std::string, std::string>& params) {
    std::vector<int> excluded;
    if (auto it = params.find("exclude"); it != params.end()) excluded = parse_id_list(it->second);
    for (int id : excluded) {
        if (ds.find_pump(id) == nullptr) fail(422, "unknown_pump", fmt::format("no pump with id {}", id));
    }
    std::vector<Pump> out;
    for (const auto& p : ds.pumps) {
        if (std::find(excluded.begin(), excluded.end(), p.id) == excluded.end()) out.push_back(p);
    }
    if (out.empty()) fail(422, "no_pumps_remaining", "every pump is excluded");
    return out;
}

json optional_label(const std::string& label) {
    return label.empty() ? json(nullptr) : json(label);
}

json cases_geojson(const Dataset& ds) {
    json features = json::array();
    for (const auto& c : ds.cases) {
        features.push_back(feature({{"type", "Point"}, {"coordinates", lonlat(c.location)}},
                                   {{"id", c.id}, {"count", c.count}}));
    }
    return collection(std::move(features));
}

json pumps_geojson(const Dataset& ds) {
    json features = json::array();
    for (const auto& p : ds.pumps) {
        features.push_back(feature({{"type", "Point"}, {"coordinates", lonlat(p.location)}},
                                   {{"id", p.id}, {"label", optional_label(p.label)}}));
    }
    return collection(std::move(features));
}

json streets_geojson(const Dataset& ds) {
    json features = json::array();
    for (const auto& s : ds.streets) {
        features.push_back(feature(
            {{"type", "LineString"}, {"coordinates", json::array({lonlat(s.start), lonlat(s.end)})}}, json::object()));
    }
    return collection(std::move(features));
}

json assignment_json(const Dataset& ds, const std::vector<Pump>& pumps) {
    const auto assignments = assign_cases(ds.cases, pumps);
    const auto summaries = summarize_pumps(pumps, ds.cases, assignments);
    json rows = json::array();
    for (const auto& a : assignments) {
        rows.push_back({{"case_id", a.case_id}, {"pump_id", a.pump_id}, {"distance_m", a.distance}});
    }
    json sums = json::array();
    for (const auto& s : summaries) {
        sums.push_back({{"pump_id", s.pump_id},
                        {"label", optional_label(s.label)},
                        {"assigned_cases", s.assigned_cases},
                        {"assigned_deaths", s.assigned_deaths},
                        {"mean_distance_m", s.mean_distance ? json(*s.mean_distance) : json(nullptr)}});
    }
    json excluded = json::array();
    for (const auto& p : ds.pumps) {
        if (std::none_of(pumps.begin(), pumps.end(), [&p](const Pump& q) { return q.id == p.id; })) {
            excluded.push_back(p.id);
        }
    }
    return {{"excluded", std::move(excluded)}, {"assignments", std::move(rows)}, {"summaries", std::move(sums)}};
}

json voronoi_geojson(const Dataset& ds, const std::vector<Pump>& pumps) {
    json features = json::array();
    for (const auto& cell : voronoi(pumps, ds.extent())) {
        json ring = json::array();
        for (const auto& v : cell.polygon) ring.push_back(lonlat(v));
        if (!cell.polygon.empty()) ring.push_back(lonlat(cell.polygon.front()));
        features.push_back(feature({{"type", "Polygon"}, {"coordinates", json::array({std::move(ring)})}},
                                   {{"pump_id", cell.pump_id}}));
    }
    return collection(std::move(features));
}

json kde_json(const Dataset& ds, const std::map<std::string, std::string>& params) {
    const double bandwidth = parse_positive(params, "bandwidth", 0.0);
    const double cell = parse_positive(params, "cell", kDefaultServiceCell);
    const double h = bandwidth > 0.0 ? bandwidth : default_bandwidth(ds);
    DensityGrid grid;
    try {
        grid = kde(ds, h, cell, ds.bbox);
    } catch (const DomainError& e) {
        fail(400, "bad_parameter", e.what());
    }
    return {{"origin", {{"easting", grid.origin.easting}, {"northing", grid.origin.northing}}},
            {"cell_size", grid.cell_size},
            {"bandwidth", h},
            {"nx", grid.nx},
            {"ny", grid.ny},
            {"values", grid.values}};
}

json stats_json(const Dataset& ds) {
    const auto r = clark_evans(ds, ds.bbox);
    return {{"n_points", r.n_points},
            {"area", r.area},
            {"observed_mean_nn", r.observed_mean_nn},
            {"expected_mean_nn", r.expected_mean_nn},
            {"clark_evans_r", r.clark_evans_r}};
}

bool local_origin(const std::string& origin) {
    static const std::regex re(R"(^https?://(localhost|127\.0\.0\.1|\[::1\])(:\d+)?$)");
    return std::regex_match(origin, re);
}

}  // namespace

Service::Service(Dataset dataset) : dataset_(std::move(dataset)) {}

ApiResponse error_response(const ApiError& error) {
    json body = {{"error", {{"code", error.code}, {"message", error.message}}}};
    return {error.status, kJson, body.dump(), {}};
}

ApiResponse Service::handle(const ApiRequest& request) const {
    ApiResponse response;
    try {
        if (request.method == "OPTIONS") {
            response = {204, kJson, "", {}};
        } else if (request.method != "GET") {
            fail(404, "not_found", fmt::format("{} {} is not a route", request.method, request.path));
        } else if (request.path == "/api/cases") {
            response = ok(cases_geojson(dataset_), kGeoJson);
        } else if (request.path == "/api/pumps") {
            response = ok(pumps_geojson(dataset_), kGeoJson);
        } else if (request.path == "/api/streets") {
            response = ok(streets_geojson(dataset_), kGeoJson);
        } else if (request.path == "/api/assignment") {
            response = ok(assignment_json(dataset_, active_pumps(dataset_, request.params)), kJson);
        } else if (request.path == "/api/voronoi") {
            response = ok(voronoi_geojson(dataset_, active_pumps(dataset_, request.params)), kGeoJson);
        } else if (request.path == "/api/kde") {
            response = ok(kde_json(dataset_, request.params), kJson);
        } else if (request.path == "/api/stats") {
            response = ok(stats_json(dataset_), kJson);
        } else {
            fail(404, "not_found", fmt::format("no route {}", request.path));
        }
    } catch (const ApiFailure& f) {
        response = error_response(f.error);
    } catch (const std::exception& e) {
        response = error_response({500, "internal", e.what()});
    }
    if (!request.origin.empty() && local_origin(request.origin)) {
        response.headers.emplace_back("Access-Control-Allow-Origin", request.origin);
        response.headers.emplace_back("Vary", "Origin");
    }
    return response;
}

BindAddress parse_bind_address(const std::string& text) {
    const auto colon = text.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
        throw DomainError(fmt::format("bind address '{}' must be host:port", text));
    }
    BindAddress out{text.substr(0, colon), 0};
    const std::string port = text.substr(colon + 1);
    auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), out.port);
    if (ec != std::errc{} || ptr != port.data() + port.size() || out.port < 0 || out.port > 65535) {
        throw DomainError(fmt::format("bind address '{}' has an invalid port", text));
    }
    return out;
}

struct HttpServer::Impl {
    Impl(const Service& s, ServiceOptions o) : service(s), options(std::move(o)) {}

    const Service& service;
    ServiceOptions options;
    httplib::Server server;
};

HttpServer::HttpServer(const Service& service, ServiceOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
        ApiRequest request{req.method, req.path, {}, req.get_header_value("Origin")};
        for (const auto& [k, v] : req.params) request.params[k] = v;
        const auto reply = impl_->service.handle(request);
        res.status = reply.status;
        for (const auto& [k, v] : reply.headers) res.set_header(k, v);
        if (reply.status != 204) res.set_content(reply.body, reply.content_type);
    };
    impl_->server.Get(R"(/api/.*)", handler);
    impl_->server.Options(R"(/api/.*)", handler);
    if (!impl_->options.static_dir.empty()) {
        if (!impl_->server.set_mount_point("/", impl_->options.static_dir.string())) {
            throw MissingInput(fmt::format("static directory {} does not exist", impl_->options.static_dir.string()));
        }
    }
    impl_->server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
        if (!res.body.empty()) return;
        const auto reply = error_response({404, "not_found", fmt::format("no route {}", req.path)});
        res.set_content(reply.body, reply.content_type);
    });
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const BindAddress& address) {
    int port = address.port;
    if (port == 0) {
        port = impl_->server.bind_to_any_port(address.host);
        if (port < 0) throw Error(fmt::format("cannot bind {}", address.host));
    } else if (!impl_->server.bind_to_port(address.host, port)) {
        throw Error(fmt::format("cannot bind {}:{}", address.host, port));
    }
    return port;
}

void HttpServer::listen() {
    impl_->server.listen_after_bind();
}

void HttpServer::stop() {
    impl_->server.stop();
}

namespace {
std::atomic<HttpServer*> g_signal_target{nullptr};

extern "C" void stop_on_signal(int) {
    if (auto* s = g_signal_target.load()) s->stop();
}
}  // namespace

void serve(const Dataset& dataset, const std::string& bind_addr, const ServiceOptions& options,
           const std::function<void(int)>& on_ready) {
    const auto address = parse_bind_address(bind_addr);
    auto report = validate(dataset);
    if (!report.ok()) throw ValidationError(report.findings.front().message, report.findings.front().record_id);

    Service service(dataset);
    HttpServer server(service, options);
    const int port = server.bind(address);
    g_signal_target.store(&server);
    auto prev_int = std::signal(SIGINT, stop_on_signal);
    auto prev_term = std::signal(SIGTERM, stop_on_signal);
    if (on_ready) on_ready(port);
    server.listen();
    std::signal(SIGINT, prev_int);
    std::signal(SIGTERM, prev_term);
    g_signal_target.store(nullptr);
}

}  // namespace snowgrid
