#include "snowgrid/geodata.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include <fmt/format.h>

#include "snowgrid/errors.hpp"

namespace snowgrid {

bool BoundingBox::valid() const noexcept {
    return std::isfinite(min.easting) && std::isfinite(min.northing) && std::isfinite(max.easting) &&
           std::isfinite(max.northing) && min.easting < max.easting && min.northing < max.northing;
}

bool BoundingBox::contains(const GridPoint& p) const noexcept {
    return p.easting >= min.easting && p.easting <= max.easting && p.northing >= min.northing &&
           p.northing <= max.northing;
}

GridPoint BoundingBox::center() const noexcept {
    return {(min.easting + max.easting) / 2.0, (min.northing + max.northing) / 2.0};
}

BoundingBox BoundingBox::expanded(double margin) const noexcept {
    return {{min.easting - margin, min.northing - margin}, {max.easting + margin, max.northing + margin}};
}

std::string Pump::display_name() const {
    return label.empty() ? fmt::format("Pump {}", id) : label;
}

const Pump* Dataset::find_pump(int id) const noexcept {
    auto it = std::find_if(pumps.begin(), pumps.end(), [id](const Pump& p) { return p.id == id; });
    return it == pumps.end() ? nullptr : &*it;
}

const CaseRecord* Dataset::find_case(int id) const noexcept {
    auto it = std::find_if(cases.begin(), cases.end(), [id](const CaseRecord& c) { return c.id == id; });
    return it == cases.end() ? nullptr : &*it;
}

int Dataset::pump_index(int id) const noexcept {
    for (std::size_t i = 0; i < pumps.size(); ++i) {
        if (pumps[i].id == id) return static_cast<int>(i);
    }
    return -1;
}

long Dataset::total_deaths() const noexcept {
    long total = 0;
    for (const auto& c : cases) total += c.count;
    return total;
}

namespace {

bool grid_point_sane(const GridPoint& p) {
    return std::isfinite(p.easting) && std::isfinite(p.northing) && p.easting >= kGridAxisMin &&
           p.easting <= kGridAxisMax && p.northing >= kGridAxisMin && p.northing <= kGridAxisMax;
}

std::string fmt_point(const GridPoint& p) {
    return fmt::format("({:.2f}, {:.2f})", p.easting, p.northing);
}

}  // namespace

ValidationReport validate(const Dataset& dataset) {
    ValidationReport report;
    auto add = [&report](std::string message, std::optional<int> id = std::nullopt) {
        report.findings.push_back({std::move(message), id});
    };

    if (!dataset.bbox.valid()) add("invalid bounding box");
    const BoundingBox allowed = dataset.extent();

    std::set<int> case_ids;
    for (const auto& c : dataset.cases) {
        if (c.id <= 0) add(fmt::format("nonpositive id, case {}", c.id), c.id);
        if (!case_ids.insert(c.id).second) add(fmt::format("duplicate case id {}", c.id), c.id);
        if (c.count < 1) add(fmt::format("nonpositive count, case {}", c.id), c.id);
        if (!std::isfinite(c.angle_deg)) add(fmt::format("non-finite angle, case {}", c.id), c.id);
        if (!grid_point_sane(c.location)) {
            add(fmt::format("location out of grid range, case {}", c.id), c.id);
        } else if (dataset.bbox.valid() && !allowed.contains(c.location)) {
            add(fmt::format("location {} outside study extent, case {}", fmt_point(c.location), c.id), c.id);
        }
    }

    std::set<int> pump_ids;
    std::map<std::pair<double, double>, int> pump_sites;
    for (const auto& p : dataset.pumps) {
        if (p.id <= 0) add(fmt::format("nonpositive id, pump {}", p.id), p.id);
        if (!pump_ids.insert(p.id).second) add(fmt::format("duplicate pump id {}", p.id), p.id);
        if (!grid_point_sane(p.location)) {
            add(fmt::format("location out of grid range, pump {}", p.id), p.id);
        } else if (dataset.bbox.valid() && !allowed.contains(p.location)) {
            add(fmt::format("location {} outside study extent, pump {}", fmt_point(p.location), p.id), p.id);
        }
        auto [it, fresh] = pump_sites.emplace(std::pair{p.location.easting, p.location.northing}, p.id);
        if (!fresh) add(fmt::format("duplicate pump location, pumps {} and {}", it->second, p.id), p.id);
    }

    for (std::size_t i = 0; i < dataset.streets.size(); ++i) {
        const auto& s = dataset.streets[i];
        if (!grid_point_sane(s.start) || !grid_point_sane(s.end)) {
            add(fmt::format("street {} out of grid range", i + 1));
        } else if (s.start == s.end) {
            add(fmt::format("zero-length street {}", i + 1));
        }
    }
    return report;
}

namespace {

struct CsvTable {
    // Column index of each required field, in the order requested.
    std::vector<std::size_t> columns;
    std::size_t width = 0;
    // (line number, cells)
    std::vector<std::pair<int, std::vector<std::string_view>>> rows;
};

std::vector<std::string_view> split_row(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return cells;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

CsvTable read_table(std::string_view text, std::span<const std::string_view> required,
                    std::string_view file, std::vector<std::string>* warnings) {
    CsvTable table;
    int line_no = 0;
    bool have_header = false;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (trim(line).empty()) continue;

        auto cells = split_row(line);
        for (auto& c : cells) c = trim(c);
        if (!have_header) {
            have_header = true;
            table.width = cells.size();
            for (auto name : required) {
                auto it = std::find(cells.begin(), cells.end(), name);
                if (it == cells.end()) {
                    throw ParseError(fmt::format("{}: missing column '{}'", file, name), line_no);
                }
                table.columns.push_back(static_cast<std::size_t>(it - cells.begin()));
            }
            for (auto c : cells) {
                if (std::find(required.begin(), required.end(), c) == required.end() && warnings) {
                    warnings->push_back(fmt::format("{}: ignoring unknown column '{}'", file, c));
                }
            }
            continue;
        }
        if (cells.size() != table.width) {
            throw ParseError(
                fmt::format("{}: expected {} fields, found {}", file, table.width, cells.size()), line_no);
        }
        table.rows.emplace_back(line_no, std::move(cells));
    }
    if (!have_header) throw ParseError(fmt::format("{}: empty file, header expected", file), 1);
    return table;
}

double parse_double(std::string_view cell, std::string_view what, std::string_view file, int line) {
    double value = 0.0;
    auto first = cell.data();
    auto last = cell.data() + cell.size();
    if (!cell.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (cell.empty() || ec != std::errc{} || ptr != last || !std::isfinite(value)) {
        throw ParseError(fmt::format("{}: invalid {} '{}'", file, what, cell), line);
    }
    return value;
}

int parse_int(std::string_view cell, std::string_view what, std::string_view file, int line) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw ParseError(fmt::format("{}: invalid {} '{}'", file, what, cell), line);
    }
    return value;
}

// Shortest representation that round-trips.
std::string fmt_shortest(double v) {
    return fmt::format("{}", v);
}

}  // namespace

std::vector<CaseRecord> parse_cases_csv(std::string_view text, std::vector<std::string>* warnings) {
    static constexpr std::string_view kCols[] = {"id", "easting", "northing", "count", "angle_deg"};
    constexpr std::string_view file = "cases.csv";
    auto table = read_table(text, kCols, file, warnings);
    std::vector<CaseRecord> out;
    out.reserve(table.rows.size());
    for (const auto& [line, cells] : table.rows) {
        auto cell = [&](int k) { return cells[table.columns[k]]; };
        out.push_back({parse_int(cell(0), "id", file, line),
                       {parse_double(cell(1), "easting", file, line), parse_double(cell(2), "northing", file, line)},
                       parse_int(cell(3), "count", file, line),
                       parse_double(cell(4), "angle_deg", file, line)});
    }
    return out;
}

std::vector<Pump> parse_pumps_csv(std::string_view text, std::vector<std::string>* warnings) {
    static constexpr std::string_view kCols[] = {"id", "label", "easting", "northing"};
    constexpr std::string_view file = "pumps.csv";
    auto table = read_table(text, kCols, file, warnings);
    std::vector<Pump> out;
    out.reserve(table.rows.size());
    for (const auto& [line, cells] : table.rows) {
        auto cell = [&](int k) { return cells[table.columns[k]]; };
        out.push_back({parse_int(cell(0), "id", file, line), std::string(cell(1)),
                       {parse_double(cell(2), "easting", file, line), parse_double(cell(3), "northing", file, line)}});
    }
    return out;
}

std::vector<StreetSegment> parse_streets_csv(std::string_view text, std::vector<std::string>* warnings) {
    static constexpr std::string_view kCols[] = {"start_easting", "start_northing", "end_easting", "end_northing"};
    constexpr std::string_view file = "streets.csv";
    auto table = read_table(text, kCols, file, warnings);
    std::vector<StreetSegment> out;
    out.reserve(table.rows.size());
    for (const auto& [line, cells] : table.rows) {
        auto coord = [&](int k, std::string_view what) { return parse_double(cells[table.columns[k]], what, file, line); };
        out.push_back({{coord(0, "start_easting"), coord(1, "start_northing")},
                       {coord(2, "end_easting"), coord(3, "end_northing")}});
    }
    return out;
}

std::string format_cases_csv(std::span<const CaseRecord> cases) {
    std::string out = "id,easting,northing,count,angle_deg\n";
    for (const auto& c : cases) {
        out += fmt::format("{},{:.2f},{:.2f},{},{}\n", c.id, c.location.easting, c.location.northing, c.count,
                           fmt_shortest(c.angle_deg));
    }
    return out;
}

std::string format_pumps_csv(std::span<const Pump> pumps) {
    std::string out = "id,label,easting,northing\n";
    for (const auto& p : pumps) {
        out += fmt::format("{},{},{:.2f},{:.2f}\n", p.id, p.label, p.location.easting, p.location.northing);
    }
    return out;
}

std::string format_streets_csv(std::span<const StreetSegment> streets) {
    std::string out = "start_easting,start_northing,end_easting,end_northing\n";
    for (const auto& s : streets) {
        out += fmt::format("{:.2f},{:.2f},{:.2f},{:.2f}\n", s.start.easting, s.start.northing, s.end.easting,
                           s.end.northing);
    }
    return out;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingInput(fmt::format("cannot open {}", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::move(ss).str();
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot write {}", path.string()));
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(fmt::format("write failed for {}", path.string()));
}

Dataset read_dataset(const std::filesystem::path& dir, std::vector<std::string>* warnings) {
    if (!std::filesystem::is_directory(dir)) {
        throw MissingInput(fmt::format("data directory {} does not exist", dir.string()));
    }
    auto need = [&dir](const char* name) {
        auto path = dir / name;
        if (!std::filesystem::is_regular_file(path)) throw MissingInput(fmt::format("missing {}", path.string()));
        return read_text_file(path);
    };

    Dataset ds;
    ds.cases = parse_cases_csv(need("cases.csv"), warnings);
    ds.pumps = parse_pumps_csv(need("pumps.csv"), warnings);
    ds.streets = parse_streets_csv(need("streets.csv"), warnings);
    return ds;
}

Dataset load_dataset(const std::filesystem::path& dir, std::vector<std::string>* warnings) {
    Dataset ds = read_dataset(dir, warnings);
    auto report = validate(ds);
    if (!report.ok()) {
        const auto& first = report.findings.front();
        throw ValidationError(first.message, first.record_id);
    }
    return ds;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_text_file(dir / "cases.csv", format_cases_csv(dataset.cases));
    write_text_file(dir / "pumps.csv", format_pumps_csv(dataset.pumps));
    write_text_file(dir / "streets.csv", format_streets_csv(dataset.streets));
}

}  // namespace snowgrid
