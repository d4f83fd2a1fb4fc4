#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace snowgrid {

/// Planar position on the British National Grid (EPSG:27700), meters.
struct GridPoint {
    double easting = 0.0;
    double northing = 0.0;

    friend bool operator==(const GridPoint&, const GridPoint&) = default;
};

/// Sanity window applied to both grid axes.
inline constexpr double kGridAxisMin = 0.0;
inline constexpr double kGridAxisMax = 1.3e6;

struct BoundingBox {
    GridPoint min;
    GridPoint max;

    double width() const noexcept { return max.easting - min.easting; }
    double height() const noexcept { return max.northing - min.northing; }
    double area() const noexcept { return width() * height(); }
    bool valid() const noexcept;
    bool contains(const GridPoint& p) const noexcept;
    GridPoint center() const noexcept;
    BoundingBox expanded(double margin) const noexcept;

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Soho study area used throughout the original analysis.
inline constexpr BoundingBox kSohoStudyBox{{529150.0, 180720.6}, {529750.9, 181370.5}};

/// Case and pump locations must lie within the dataset box grown by this much.
inline constexpr double kDatasetMargin = 50.0;

/// One address where cholera deaths were recorded.
struct CaseRecord {
    int id = 0;
    GridPoint location;
    int count = 0;
    /// Counter-clockwise rotation of the death bar, degrees.
    double angle_deg = 0.0;

    friend bool operator==(const CaseRecord&, const CaseRecord&) = default;
};

struct Pump {
    int id = 0;
    /// Curated name; empty when the pump is unnamed.
    std::string label;
    GridPoint location;

    std::string display_name() const;

    friend bool operator==(const Pump&, const Pump&) = default;
};

struct StreetSegment {
    GridPoint start;
    GridPoint end;

    friend bool operator==(const StreetSegment&, const StreetSegment&) = default;
};

struct Dataset {
    std::vector<CaseRecord> cases;
    std::vector<Pump> pumps;
    std::vector<StreetSegment> streets;
    BoundingBox bbox = kSohoStudyBox;

    const Pump* find_pump(int id) const noexcept;
    const CaseRecord* find_case(int id) const noexcept;
    /// Index of the pump in `pumps`, or -1.
    int pump_index(int id) const noexcept;
    long total_deaths() const noexcept;
    /// `bbox` grown by kDatasetMargin; the extent every analysis product lives in.
    BoundingBox extent() const noexcept { return bbox.expanded(kDatasetMargin); }

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct Finding {
    std::string message;
    std::optional<int> record_id;
};

struct ValidationReport {
    std::vector<Finding> findings;

    bool ok() const noexcept { return findings.empty(); }
};

/// Checks every type invariant. Never throws for bad data; findings are data.
ValidationReport validate(const Dataset& dataset);

// CSV codecs. `warnings` (optional) receives one message per ignored column.
std::vector<CaseRecord> parse_cases_csv(std::string_view text,
                                        std::vector<std::string>* warnings = nullptr);
std::vector<Pump> parse_pumps_csv(std::string_view text,
                                  std::vector<std::string>* warnings = nullptr);
std::vector<StreetSegment> parse_streets_csv(std::string_view text,
                                             std::vector<std::string>* warnings = nullptr);

std::string format_cases_csv(std::span<const CaseRecord> cases);
std::string format_pumps_csv(std::span<const Pump> pumps);
std::string format_streets_csv(std::span<const StreetSegment> streets);

/// Reads cases.csv, pumps.csv and streets.csv from `dir` without validating.
/// Throws MissingInput or ParseError.
Dataset read_dataset(const std::filesystem::path& dir, std::vector<std::string>* warnings = nullptr);

/// read_dataset followed by validate.
/// Throws MissingInput, ParseError, or ValidationError (first finding).
Dataset load_dataset(const std::filesystem::path& dir,
                     std::vector<std::string>* warnings = nullptr);

/// Writes the three CSVs in canonical form (1 cm coordinate precision).
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace snowgrid
