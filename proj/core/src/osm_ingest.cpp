#include "snowgrid/osm_ingest.hpp"

#include <cctype>
#include <cstdlib>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include "snowgrid/errors.hpp"
#include "snowgrid/geometry.hpp"

namespace snowgrid {

using nlohmann::json;

std::string build_query(const OverpassQuery& q) {
    if (q.timeout_s < 1 || q.timeout_s > 120) {
        throw DomainError(fmt::format("Overpass timeout must be within [1, 120] s, got {}", q.timeout_s));
    }
    if (!q.bbox_geo.valid()) throw DomainError("invalid geographic bounding box");
    const auto& b = q.bbox_geo;
    return fmt::format("[out:json][timeout:{}];way[\"{}\"]({:.6f},{:.6f},{:.6f},{:.6f});out geom;", q.timeout_s,
                       q.feature_key, b.min.lat, b.min.lon, b.max.lat, b.max.lon);
}

std::vector<StreetSegment> parse_overpass_response(std::string_view json_text, const BoundingBox& grid_bbox) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(fmt::format("Overpass response is not valid JSON: {}", e.what()));
    }
    if (!doc.is_object() || !doc.contains("elements") || !doc["elements"].is_array()) {
        throw ParseError("Overpass response lacks an 'elements' array");
    }

    std::vector<StreetSegment> out;
    for (const auto& el : doc["elements"]) {
        if (!el.is_object() || el.value("type", "") != "way") continue;
        if (!el.contains("geometry")) continue;
        const auto& geom = el["geometry"];
        if (!geom.is_array()) throw ParseError("way geometry is not an array");

        std::vector<GridPoint> pts;
        pts.reserve(geom.size());
        for (const auto& v : geom) {
            if (!v.is_object() || !v.contains("lat") || !v.contains("lon") || !v["lat"].is_number() ||
                !v["lon"].is_number()) {
                throw ParseError("way geometry vertex lacks numeric lat/lon");
            }
            pts.push_back(geo_to_grid({v["lon"].get<double>(), v["lat"].get<double>()}));
        }
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            StreetSegment s{pts[i], pts[i + 1]};
            if (s.start == s.end) continue;
            if (!clip_segment(s, grid_bbox)) continue;
            out.push_back(s);
        }
    }
    if (out.empty()) throw EmptyResult("Overpass response contained no street segments in the study box");
    return out;
}

std::string form_urlencode(std::string_view s) {
    std::string out;
    out.reserve(s.size() * 3);
    for (unsigned char ch : s) {
        if (std::isalnum(ch) || ch == '-' || ch == '_' || ch == '.' || ch == '~') {
            out += static_cast<char>(ch);
        } else if (ch == ' ') {
            out += '+';
        } else {
            out += fmt::format("%{:02X}", ch);
        }
    }
    return out;
}

namespace {

class HttplibClient final : public HttpClient {
public:
    explicit HttplibClient(std::chrono::seconds timeout) : timeout_(timeout) {}

    HttpResponse post_form(const std::string& url, const std::string& body) override {
        // Split "scheme://host[:port]/path" for httplib.
        const auto scheme_end = url.find("://");
        if (scheme_end == std::string::npos) throw NetworkError(fmt::format("malformed URL {}", url), 0);
        const auto path_start = url.find('/', scheme_end + 3);
        const std::string origin = url.substr(0, path_start);
        const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

        httplib::Client cli(origin);
        cli.set_connection_timeout(timeout_);
        cli.set_read_timeout(timeout_);
        cli.set_follow_location(true);
        httplib::Headers headers{{"User-Agent", "snowgrid/0.1"}};
        auto res = cli.Post(path, headers, body, "application/x-www-form-urlencoded");
        if (!res) throw NetworkError(fmt::format("request to {} failed: {}", url, httplib::to_string(res.error())), 0);
        return {res->status, res->body};
    }

private:
    std::chrono::seconds timeout_;
};

}  // namespace

std::unique_ptr<HttpClient> make_http_client(std::chrono::seconds timeout) {
    return std::make_unique<HttplibClient>(timeout);
}

std::string overpass_endpoint_from_env() {
    if (const char* env = std::getenv(kOverpassEndpointEnv); env != nullptr && *env != '\0') return env;
    return std::string(kDefaultOverpassEndpoint);
}

std::vector<StreetSegment> fetch_streets(const OverpassQuery& q, const std::string& endpoint, HttpClient& client,
                                         const BoundingBox& grid_bbox, const FetchOptions& options) {
    const std::string body = "data=" + form_urlencode(build_query(q));
    auto sleep = options.sleep ? options.sleep
                               : std::function<void(std::chrono::milliseconds)>(
                                     [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); });

    HttpResponse res = client.post_form(endpoint, body);
    for (auto delay : options.retry_backoff) {
        if (res.status != 429 && res.status != 504) break;
        sleep(delay);
        res = client.post_form(endpoint, body);
    }
    if (res.status != 200) {
        throw NetworkError(fmt::format("Overpass returned HTTP {}", res.status), res.status);
    }
    return parse_overpass_response(res.body, grid_bbox);
}

std::vector<StreetSegment> load_streets_fallback(const Dataset& dataset) {
    return dataset.streets;
}

}  // namespace snowgrid
