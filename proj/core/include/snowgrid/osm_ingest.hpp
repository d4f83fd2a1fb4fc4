#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "snowgrid/geodata.hpp"
#include "snowgrid/projection.hpp"

namespace snowgrid {

struct OverpassQuery {
    GeoBoundingBox bbox_geo;
    std::string feature_key = "highway";
    int timeout_s = 25;
};

inline constexpr std::string_view kDefaultOverpassEndpoint = "https://overpass-api.de/api/interpreter";
inline constexpr const char* kOverpassEndpointEnv = "SNOWGRID_OVERPASS_URL";

/// `[out:json][timeout:T];way["key"](S,W,N,E);out geom;` with 6-decimal bounds.
/// Throws DomainError when timeout_s is outside [1, 120] or the bbox is invalid.
std::string build_query(const OverpassQuery& q);

/// Converts an Overpass JSON `out geom` response into 2-point segments in
/// grid coordinates. Zero-length pairs and segments entirely outside
/// `grid_bbox` are dropped. Throws ParseError for malformed JSON and
/// EmptyResult when no segment survives.
std::vector<StreetSegment> parse_overpass_response(std::string_view json_text, const BoundingBox& grid_bbox);

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// Minimal transport seam so callers and tests can replace the network.
class HttpClient {
public:
    virtual ~HttpClient() = default;
    /// POSTs an application/x-www-form-urlencoded body. Throws NetworkError
    /// (status 0) when no response arrives.
    virtual HttpResponse post_form(const std::string& url, const std::string& body) = 0;
};

/// cpp-httplib backed client (http and https).
std::unique_ptr<HttpClient> make_http_client(std::chrono::seconds timeout = std::chrono::seconds(130));

struct FetchOptions {
    /// Sleep before each retry on HTTP 429/504.
    std::vector<std::chrono::milliseconds> retry_backoff{std::chrono::seconds(1), std::chrono::seconds(2)};
    std::function<void(std::chrono::milliseconds)> sleep;  // defaults to this_thread::sleep_for
};

/// Endpoint from SNOWGRID_OVERPASS_URL, else the public instance.
std::string overpass_endpoint_from_env();

/// Runs the query against `endpoint` and parses the response.
/// Throws NetworkError (with HTTP status), ParseError, or EmptyResult.
std::vector<StreetSegment> fetch_streets(const OverpassQuery& q, const std::string& endpoint, HttpClient& client,
                                         const BoundingBox& grid_bbox, const FetchOptions& options = {});

/// The vendored street network, unchanged.
std::vector<StreetSegment> load_streets_fallback(const Dataset& dataset);

/// application/x-www-form-urlencoded escaping.
std::string form_urlencode(std::string_view s);

}  // namespace snowgrid
