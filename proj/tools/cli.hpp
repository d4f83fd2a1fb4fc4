#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "snowgrid/osm_ingest.hpp"
#include "snowgrid/render.hpp"

namespace snowgrid::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct RunConfig {
    std::filesystem::path data_dir = "data";
    std::filesystem::path out_dir = "out";
    std::optional<double> bandwidth;
    double cell_size = 2.0;
    bool offline = false;
    std::vector<int> exclude_pumps;
    /// Street network for map renders; vendored streets when unset.
    std::optional<std::filesystem::path> streets_csv;
    MapStyle style;
};

/// One output file of a subcommand.
struct Product {
    std::string filename;
    std::string kind;
    std::string contents;
};

struct ManifestEntry {
    std::string filename;
    std::string kind;
    std::string sha256;
};

/// Writes every product into `out_dir` followed by manifest.json.
/// Throws snowgrid::Error naming the path on I/O failure.
std::vector<ManifestEntry> write_outputs(const std::vector<Product>& products, const std::filesystem::path& out_dir);

std::string sha256_hex(std::string_view data);

/// Process-level dependencies, replaceable in tests.
struct Environment {
    std::ostream* out = nullptr;
    std::ostream* err = nullptr;
    std::function<std::unique_ptr<HttpClient>()> http_client_factory;
    std::function<void(std::chrono::milliseconds)> sleep;
};

Environment default_environment();

/// Entry point: `snowgrid <subcommand> [options]`. Returns 0 on success,
/// 1 on validation/IO failure, 2 on usage error.
int run(const std::vector<std::string>& args, Environment env);
int run(int argc, const char* const* argv);

}  // namespace snowgrid::cli
