#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "snowgrid/geodata.hpp"
#include "snowgrid/osm_ingest.hpp"

namespace snowgrid::test {

inline std::filesystem::path data_dir() { return SNOWGRID_TEST_DATA_DIR; }
inline std::filesystem::path fixture_dir() { return SNOWGRID_TEST_FIXTURE_DIR; }
inline std::filesystem::path golden_dir() { return fixture_dir() / "golden"; }

inline const Dataset& vendored() {
    static const Dataset ds = load_dataset(data_dir());
    return ds;
}

inline constexpr int kBroadStreetId = 9;

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("snowgrid-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

/// Records requests and replays canned responses in order.
class FakeHttpClient : public HttpClient {
public:
    explicit FakeHttpClient(std::vector<HttpResponse> responses) : responses_(std::move(responses)) {}

    HttpResponse post_form(const std::string& url, const std::string& body) override {
        urls.push_back(url);
        bodies.push_back(body);
        if (next_ >= responses_.size()) return {500, "no more canned responses"};
        return responses_[next_++];
    }

    std::vector<std::string> urls;
    std::vector<std::string> bodies;

private:
    std::vector<HttpResponse> responses_;
    std::size_t next_ = 0;
};

inline std::vector<GridPoint> uniform_points(const BoundingBox& box, int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ex(box.min.easting, box.max.easting);
    std::uniform_real_distribution<double> ny(box.min.northing, box.max.northing);
    std::vector<GridPoint> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double e = ex(rng);
        out.push_back({e, ny(rng)});
    }
    return out;
}

}  // namespace snowgrid::test
