#include "snowgrid/spatial_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <thread>

#include <fmt/format.h>

#include "snowgrid/errors.hpp"

namespace snowgrid {

namespace {
constexpr long kMaxGridCells = 50'000'000;
}

double DensityGrid::max_value() const noexcept {
    double m = 0.0;
    for (double v : values) m = std::max(m, v);
    return m;
}

double DensityGrid::integral() const noexcept {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum * cell_size * cell_size;
}

std::vector<PumpSummary> summarize_pumps(std::span<const Pump> pumps, std::span<const CaseRecord> cases,
                                         std::span<const Assignment> assignments) {
    std::map<int, std::size_t> pump_slot;
    std::vector<PumpSummary> out;
    out.reserve(pumps.size());
    for (const auto& p : pumps) {
        pump_slot.emplace(p.id, out.size());
        out.push_back({p.id, p.label, 0, 0, std::nullopt});
    }
    std::map<int, int> case_counts;
    for (const auto& c : cases) case_counts.emplace(c.id, c.count);

    std::map<int, int> seen;
    std::vector<double> dist_sum(out.size(), 0.0);
    for (const auto& a : assignments) {
        auto c = case_counts.find(a.case_id);
        if (c == case_counts.end()) {
            throw ValidationError(fmt::format("assignment references unknown case {}", a.case_id), a.case_id);
        }
        auto p = pump_slot.find(a.pump_id);
        if (p == pump_slot.end()) {
            throw ValidationError(fmt::format("assignment references unknown pump {}", a.pump_id), a.pump_id);
        }
        if (++seen[a.case_id] > 1) {
            throw ValidationError(fmt::format("case {} assigned more than once", a.case_id), a.case_id);
        }
        auto& s = out[p->second];
        s.assigned_cases += 1;
        s.assigned_deaths += c->second;
        dist_sum[p->second] += a.distance;
    }
    for (const auto& c : cases) {
        if (!seen.contains(c.id)) throw ValidationError(fmt::format("case {} has no assignment", c.id), c.id);
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (out[i].assigned_cases > 0) out[i].mean_distance = dist_sum[i] / out[i].assigned_cases;
    }
    return out;
}

std::vector<PumpSummary> summarize_pumps(const Dataset& dataset, std::span<const Assignment> assignments) {
    return summarize_pumps(dataset.pumps, dataset.cases, assignments);
}

std::vector<PumpSummary> rank_by_deaths(std::vector<PumpSummary> summaries) {
    std::stable_sort(summaries.begin(), summaries.end(), [](const PumpSummary& a, const PumpSummary& b) {
        if (a.assigned_deaths != b.assigned_deaths) return a.assigned_deaths > b.assigned_deaths;
        return a.pump_id < b.pump_id;
    });
    return summaries;
}

DensityGrid kde(std::span<const CaseRecord> cases, double bandwidth, double cell_size, const BoundingBox& bbox,
                unsigned threads) {
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
        throw DomainError(fmt::format("bandwidth must be positive, got {}", bandwidth));
    }
    if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
        throw DomainError(fmt::format("cell size must be positive, got {}", cell_size));
    }
    if (!bbox.valid()) throw DomainError("invalid KDE bounding box");

    DensityGrid grid;
    grid.origin = bbox.min;
    grid.cell_size = cell_size;
    // The small slack keeps exact multiples from growing an extra column.
    grid.nx = std::max(1, static_cast<int>(std::ceil(bbox.width() / cell_size - 1e-9)));
    grid.ny = std::max(1, static_cast<int>(std::ceil(bbox.height() / cell_size - 1e-9)));
    if (static_cast<long>(grid.nx) * grid.ny > kMaxGridCells) {
        throw DomainError(fmt::format("KDE grid of {} x {} cells is too large", grid.nx, grid.ny));
    }
    grid.values.assign(static_cast<std::size_t>(grid.nx) * grid.ny, 0.0);

    const double inv_two_h2 = 1.0 / (2.0 * bandwidth * bandwidth);
    const double norm = 1.0 / (2.0 * std::numbers::pi * bandwidth * bandwidth);

    auto fill_rows = [&](int row_begin, int row_end) {
        for (int iy = row_begin; iy < row_end; ++iy) {
            for (int ix = 0; ix < grid.nx; ++ix) {
                const GridPoint s = grid.cell_center(ix, iy);
                double sum = 0.0;
                for (const auto& c : cases) {
                    const double dx = s.easting - c.location.easting;
                    const double dy = s.northing - c.location.northing;
                    sum += c.count * std::exp(-(dx * dx + dy * dy) * inv_two_h2);
                }
                grid.values[static_cast<std::size_t>(iy) * grid.nx + ix] = sum * norm;
            }
        }
    };

    unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    workers = std::min<unsigned>(workers, static_cast<unsigned>(grid.ny));
    if (workers <= 1) {
        fill_rows(0, grid.ny);
        return grid;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const int chunk = (grid.ny + static_cast<int>(workers) - 1) / static_cast<int>(workers);
    for (unsigned w = 0; w < workers; ++w) {
        const int begin = static_cast<int>(w) * chunk;
        const int end = std::min(grid.ny, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(fill_rows, begin, end);
    }
    pool.clear();
    return grid;
}

DensityGrid kde(const Dataset& dataset, double bandwidth, double cell_size, const BoundingBox& bbox,
                unsigned threads) {
    return kde(dataset.cases, bandwidth, cell_size, bbox, threads);
}

double default_bandwidth(std::span<const CaseRecord> cases) {
    if (cases.size() < 2) throw DegenerateInput("bandwidth rule needs at least 2 case locations");
    const double n = static_cast<double>(cases.size());
    double mean_e = 0.0, mean_n = 0.0;
    for (const auto& c : cases) {
        mean_e += c.location.easting;
        mean_n += c.location.northing;
    }
    mean_e /= n;
    mean_n /= n;
    double var_e = 0.0, var_n = 0.0;
    for (const auto& c : cases) {
        var_e += (c.location.easting - mean_e) * (c.location.easting - mean_e);
        var_n += (c.location.northing - mean_n) * (c.location.northing - mean_n);
    }
    var_e /= n;
    var_n /= n;
    const double sigma = std::sqrt((var_e + var_n) / 2.0);
    if (!(sigma > 0.0)) throw DegenerateInput("all case locations coincide");
    return sigma * std::pow(n, -1.0 / 6.0);
}

ClusteringReport clark_evans(std::span<const CaseRecord> cases, const BoundingBox& study_area) {
    if (!study_area.valid() || !(study_area.area() > 0.0) || !std::isfinite(study_area.area())) {
        throw DomainError("study area is degenerate");
    }
    if (cases.size() < 2) throw DegenerateInput("Clark-Evans needs at least 2 points");

    double total = 0.0;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < cases.size(); ++j) {
            if (i != j) best = std::min(best, distance(cases[i].location, cases[j].location));
        }
        total += best;
    }
    ClusteringReport r;
    r.n_points = static_cast<int>(cases.size());
    r.area = study_area.area();
    r.observed_mean_nn = total / static_cast<double>(cases.size());
    r.expected_mean_nn = 0.5 / std::sqrt(r.n_points / r.area);
    r.clark_evans_r = r.observed_mean_nn / r.expected_mean_nn;
    return r;
}

std::vector<double> nn_distances(const Dataset& dataset) {
    if (dataset.pumps.empty()) throw EmptyInput("nearest-pump distances requested with no pumps");
    std::vector<double> out;
    out.reserve(dataset.cases.size());
    for (const auto& c : dataset.cases) out.push_back(nearest_pump(c.location, dataset.pumps).distance);
    return out;
}

std::string format_grid_csv(const DensityGrid& grid) {
    std::string out = "x,y,value\n";
    out.reserve(out.size() + grid.values.size() * 40);
    for (int iy = 0; iy < grid.ny; ++iy) {
        for (int ix = 0; ix < grid.nx; ++ix) {
            const auto c = grid.cell_center(ix, iy);
            out += fmt::format("{:.3f},{:.3f},{}\n", c.easting, c.northing, grid.at(ix, iy));
        }
    }
    return out;
}

}  // namespace snowgrid
