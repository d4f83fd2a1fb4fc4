#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "snowgrid/errors.hpp"
#include "snowgrid/projection.hpp"
#include "support.hpp"

using namespace snowgrid;

namespace {

struct OracleCase {
    const char* name;
    GridPoint grid;
    GeoPoint geo;
};

// PROJ (EPSG:27700 -> EPSG:4326 through the EPSG:1314 Helmert), from
// tests/oracles/projection_oracle.py.
const OracleCase kGridToGeo[] = {
    {"bbox_sw", {529150.0, 180720.6}, {-0.140330112025, 51.510661348531}},
    {"bbox_se", {529750.9, 180720.6}, {-0.131676031927, 51.510523811027}},
    {"bbox_ne", {529750.9, 181370.5}, {-0.131437050873, 51.516364240498}},
    {"bbox_nw", {529150.0, 181370.5}, {-0.140092236529, 51.516501806604}},
    {"mid", {529450.45, 181045.55}, {-0.135883859295, 51.513512882274}},
    {"broad_street", {529390.95, 181024.57}, {-0.136748518613, 51.513337958613}},
};

const OracleCase kGeoToGrid[] = {
    {"geo_a", {529401.363514, 181020.610756}, {-0.1366, 51.5133}},
    {"geo_b", {529241.340227, 180760.604917}, {-0.139, 51.511}},
};

// Ground distance between two nearby WGS84 points, meters.
double ground_distance(const GeoPoint& a, const GeoPoint& b) {
    constexpr double kR = 6371000.0;
    const double rad = std::numbers::pi / 180.0;
    const double dlat = (a.lat - b.lat) * rad * kR;
    const double dlon = (a.lon - b.lon) * rad * kR * std::cos(a.lat * rad);
    return std::hypot(dlat, dlon);
}

double grid_distance(const GridPoint& a, const GridPoint& b) { return std::hypot(a.easting - b.easting, a.northing - b.northing); }

}  // namespace

TEST(Projection, TrueOriginProjectsExactly) {
    const GridPoint p = osgb::project({49.0 * std::numbers::pi / 180.0, -2.0 * std::numbers::pi / 180.0});
    EXPECT_NEAR(p.easting, 400000.0, 1e-3);
    EXPECT_NEAR(p.northing, -100000.0, 1e-3);
    const auto ll = osgb::unproject({400000.0, -100000.0});
    EXPECT_NEAR(ll.lat * 180.0 / std::numbers::pi, 49.0, 1e-10);
    EXPECT_NEAR(ll.lon * 180.0 / std::numbers::pi, -2.0, 1e-10);
}

TEST(Projection, TrueOriginThroughDatumShift) {
    // WGS84 (-2, 49) is not the grid origin: the datum shift puts it
    // about 96 m east and 86 m south, just outside the grid window.
    const GeoPoint g = grid_to_geo({400000.0, -100000.0});
    const GridPoint back = geo_to_grid(g);
    EXPECT_NEAR(back.easting, 400000.0, 1e-3);
    EXPECT_NEAR(back.northing, -100000.0, 1e-3);
    const GridPoint fwd = geo_to_grid({-2.0, 49.0});
    EXPECT_NEAR(fwd.easting - 400000.0, 95.6, 0.5);
    EXPECT_NEAR(fwd.northing + 100000.0, -85.7, 0.5);
}

TEST(Projection, ProjectUnprojectRoundTrip) {
    for (const auto& p : test::uniform_points(kSohoStudyBox, 200, 11)) {
        EXPECT_LT(grid_distance(osgb::project(osgb::unproject(p)), p), 2e-5);
    }
}

TEST(Projection, GridToGeoMatchesOracle) {
    for (const auto& c : kGridToGeo) {
        EXPECT_LT(ground_distance(grid_to_geo(c.grid), c.geo), 1e-2) << c.name;
        EXPECT_LT(grid_distance(geo_to_grid(c.geo), c.grid), 1e-2) << c.name;
    }
}

TEST(Projection, GeoToGridMatchesOracle) {
    for (const auto& c : kGeoToGrid) EXPECT_LT(grid_distance(geo_to_grid(c.geo), c.grid), 1e-2) << c.name;
}

TEST(Projection, BboxCornerNearSoho) {
    const GeoPoint g = grid_to_geo({529150.0, 180720.6});
    EXPECT_NEAR(g.lon, -0.14, 0.005);
    EXPECT_NEAR(g.lat, 51.51, 0.005);
}

TEST(Projection, RoundTripOverRandomSohoPoints) {
    double worst = 0.0;
    for (const auto& p : test::uniform_points(kSohoStudyBox, 1000, 2024)) {
        worst = std::max(worst, grid_distance(geo_to_grid(grid_to_geo(p)), p));
    }
    EXPECT_LE(worst, 1e-3);
}

TEST(Projection, LongitudeIncreasesWithEasting) {
    for (double n : {180720.6, 181000.0, 181370.5}) {
        double prev = -1e9;
        for (double e = 529150.0; e <= 529750.9; e += 10.0) {
            const double lon = grid_to_geo({e, n}).lon;
            EXPECT_GT(lon, prev);
            prev = lon;
        }
    }
}

TEST(Projection, DomainErrors) {
    EXPECT_THROW(grid_to_geo({-1.0, 0.0}), DomainError);
    EXPECT_THROW(grid_to_geo({800001.0, 0.0}), DomainError);
    EXPECT_THROW(grid_to_geo({0.0, 1400001.0}), DomainError);
    EXPECT_THROW(grid_to_geo({0.0, -100001.0}), DomainError);
    EXPECT_THROW(grid_to_geo({NAN, 0.0}), DomainError);
    EXPECT_THROW(geo_to_grid({-9.5, 51.0}), DomainError);
    EXPECT_THROW(geo_to_grid({2.5, 51.0}), DomainError);
    EXPECT_THROW(geo_to_grid({0.0, 48.0}), DomainError);
    EXPECT_THROW(geo_to_grid({0.0, 62.0}), DomainError);
}

TEST(TransformBbox, HullContainsAllCorners) {
    const auto hull = transform_bbox(kSohoStudyBox);
    for (const auto& c : kGridToGeo) {
        if (std::string_view(c.name).starts_with("bbox_")) {
            const GeoPoint g = grid_to_geo(c.grid);
            EXPECT_LE(hull.min.lon, g.lon);
            EXPECT_GE(hull.max.lon, g.lon);
            EXPECT_LE(hull.min.lat, g.lat);
            EXPECT_GE(hull.max.lat, g.lat);
        }
    }
}

TEST(TransformBbox, StudyBoxMatchesOracle) {
    const auto hull = transform_bbox(kSohoStudyBox);
    // 1e-7 degrees is about 1 cm.
    EXPECT_NEAR(hull.min.lon, -0.140330112025, 1e-7);
    EXPECT_NEAR(hull.max.lon, -0.131437050873, 1e-7);
    EXPECT_NEAR(hull.min.lat, 51.510523811027, 1e-7);
    EXPECT_NEAR(hull.max.lat, 51.516501806604, 1e-7);
}

TEST(TransformBbox, OneMeterBoxHasPositiveExtent) {
    const auto hull = transform_bbox({{529400.0, 181000.0}, {529401.0, 181001.0}});
    EXPECT_TRUE(hull.valid());
    EXPECT_GT(hull.max.lon - hull.min.lon, 0.0);
    EXPECT_GT(hull.max.lat - hull.min.lat, 0.0);
}

TEST(TransformBbox, InvalidBoxRejected) {
    EXPECT_THROW(transform_bbox({{529401.0, 181000.0}, {529400.0, 181001.0}}), DomainError);
}
