#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "snowgrid/geodata.hpp"
#include "snowgrid/geometry.hpp"

namespace snowgrid {

/// Regular raster; values are row-major with row 0 the southernmost.
struct DensityGrid {
    GridPoint origin;  // lower-left corner of cell (0, 0)
    double cell_size = 0.0;
    int nx = 0;
    int ny = 0;
    std::vector<double> values;

    double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * nx + ix]; }
    GridPoint cell_center(int ix, int iy) const noexcept {
        return {origin.easting + (ix + 0.5) * cell_size, origin.northing + (iy + 0.5) * cell_size};
    }
    double max_value() const noexcept;
    /// Sum of values times cell area.
    double integral() const noexcept;
};

struct PumpSummary {
    int pump_id = 0;
    std::string label;
    int assigned_cases = 0;
    long assigned_deaths = 0;
    /// Absent when no case is assigned to the pump.
    std::optional<double> mean_distance;
};

struct ClusteringReport {
    int n_points = 0;
    double area = 0.0;
    double observed_mean_nn = 0.0;
    double expected_mean_nn = 0.0;
    double clark_evans_r = 0.0;
};

/// Per-pump tallies, one entry per pump in `pumps` order (zeros included).
/// Throws ValidationError unless `assignments` covers every case exactly
/// once and only references known pumps.
std::vector<PumpSummary> summarize_pumps(std::span<const Pump> pumps, std::span<const CaseRecord> cases,
                                         std::span<const Assignment> assignments);
std::vector<PumpSummary> summarize_pumps(const Dataset& dataset, std::span<const Assignment> assignments);

/// Summaries ordered by assigned deaths (descending), ties by pump id.
std::vector<PumpSummary> rank_by_deaths(std::vector<PumpSummary> summaries);

/// Count-weighted Gaussian KDE evaluated at every cell center:
///   f(s) = sum_i count_i * exp(-|s - s_i|^2 / (2 h^2)) / (2 pi h^2).
/// The grid starts at bbox.min and has ceil(extent / cell_size) cells per
/// axis. Rows are split across `threads` workers (0 = hardware concurrency);
/// the result is bitwise identical for any thread count.
/// Throws DomainError for nonpositive bandwidth/cell size or an invalid box.
DensityGrid kde(std::span<const CaseRecord> cases, double bandwidth, double cell_size, const BoundingBox& bbox,
                unsigned threads = 1);
DensityGrid kde(const Dataset& dataset, double bandwidth, double cell_size, const BoundingBox& bbox,
                unsigned threads = 1);

/// h = sigma * n^(-1/6), sigma = sqrt((var(easting) + var(northing)) / 2)
/// using population variances over the unweighted case locations.
/// Throws DegenerateInput for fewer than 2 cases or coincident locations.
double default_bandwidth(std::span<const CaseRecord> cases);
inline double default_bandwidth(const Dataset& dataset) { return default_bandwidth(dataset.cases); }

/// Clark-Evans aggregation index without edge correction.
/// Throws DegenerateInput for fewer than 2 cases, DomainError for a degenerate area.
ClusteringReport clark_evans(std::span<const CaseRecord> cases, const BoundingBox& study_area);
inline ClusteringReport clark_evans(const Dataset& dataset, const BoundingBox& study_area) {
    return clark_evans(dataset.cases, study_area);
}

/// Distance from each case to its nearest pump, case order preserved.
/// Throws EmptyInput when there are no pumps.
std::vector<double> nn_distances(const Dataset& dataset);

/// `x,y,value` CSV, one row per cell center, row 0 first.
std::string format_grid_csv(const DensityGrid& grid);

}  // namespace snowgrid
