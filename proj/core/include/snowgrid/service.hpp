#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "snowgrid/geodata.hpp"

namespace snowgrid {

struct ApiError {
    int status = 500;  // one of 400, 404, 422, 500
    std::string code;
    std::string message;
};

struct ApiRequest {
    std::string method = "GET";
    std::string path;
    std::map<std::string, std::string> params;
    /// Value of the Origin header, empty when absent.
    std::string origin;
};

struct ApiResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
    std::vector<std::pair<std::string, std::string>> headers;
};

inline constexpr const char* kDefaultBind = "127.0.0.1:8747";

struct ServiceOptions {
    /// Directory served at "/" (the browser explorer); empty disables.
    std::filesystem::path static_dir;
};

/// Read-only JSON/GeoJSON API over an immutable dataset. `handle` is pure
/// and safe to call concurrently.
///
///   GET /api/cases                  GeoJSON points {id, count}
///   GET /api/pumps                  GeoJSON points {id, label}
///   GET /api/streets                GeoJSON line strings
///   GET /api/assignment?exclude=a,b assignment rows + per-pump summaries
///   GET /api/voronoi?exclude=a,b    GeoJSON polygons {pump_id}
///   GET /api/kde?bandwidth=H&cell=C {origin, cell_size, nx, ny, values}
///   GET /api/stats                  Clark-Evans report
class Service {
public:
    explicit Service(Dataset dataset);

    ApiResponse handle(const ApiRequest& request) const;
    const Dataset& dataset() const noexcept { return dataset_; }

private:
    Dataset dataset_;
};

/// JSON body {"error": {"code", "message"}} with the error's status.
ApiResponse error_response(const ApiError& error);

struct BindAddress {
    std::string host;
    int port = 0;
};

/// Parses "host:port". Throws DomainError.
BindAddress parse_bind_address(const std::string& text);

/// Blocking HTTP/1.1 front end for a Service.
class HttpServer {
public:
    HttpServer(const Service& service, ServiceOptions options = {});
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds the socket; port 0 picks a free port. Throws Error on failure.
    int bind(const BindAddress& address);
    /// Serves until stop() is called.
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Convenience: bind and serve until the process is signalled.
/// `on_ready` receives the bound port.
void serve(const Dataset& dataset, const std::string& bind_addr, const ServiceOptions& options = {},
           const std::function<void(int)>& on_ready = {});

}  // namespace snowgrid
