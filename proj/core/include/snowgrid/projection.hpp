#pragma once

#include "snowgrid/geodata.hpp"

namespace snowgrid {

/// WGS84 geographic position (EPSG:4326), degrees.
struct GeoPoint {
    double lon = 0.0;
    double lat = 0.0;

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

struct GeoBoundingBox {
    GeoPoint min;
    GeoPoint max;

    bool valid() const noexcept { return min.lon < max.lon && min.lat < max.lat; }
};

/// British National Grid -> WGS84. Inverse transverse Mercator on Airy 1830
/// followed by the OSGB36 -> WGS84 Helmert shift; the OSGB36 point is taken
/// on the ellipsoid surface (height 0).
/// Throws DomainError outside easting [0, 800 km], northing [-100, 1400 km].
GeoPoint grid_to_geo(const GridPoint& p);

/// WGS84 -> British National Grid. Exact inverse of grid_to_geo: the WGS84
/// height is solved so the shifted point lies on the Airy surface.
/// Throws DomainError outside lon [-9, 2], lat [49, 61].
GridPoint geo_to_grid(const GeoPoint& p);

/// Axis-aligned lon/lat hull of the images of all four corners.
GeoBoundingBox transform_bbox(const BoundingBox& b);

namespace osgb {

// Airy 1830 ellipsoid and National Grid projection constants.
inline constexpr double kAiryA = 6377563.396;
inline constexpr double kAiryB = 6356256.909;
inline constexpr double kScaleF0 = 0.9996012717;
inline constexpr double kTrueOriginLatDeg = 49.0;
inline constexpr double kTrueOriginLonDeg = -2.0;
inline constexpr double kFalseEasting = 400000.0;
inline constexpr double kFalseNorthing = -100000.0;

inline constexpr double kWgs84A = 6378137.0;
inline constexpr double kWgs84InvF = 298.257223563;

/// OSGB36 -> WGS84 Helmert (position-vector convention, EPSG:1314).
struct HelmertParams {
    double tx, ty, tz;     // meters
    double rx, ry, rz;     // arc-seconds
    double scale_ppm;
};
inline constexpr HelmertParams kOsgb36ToWgs84{446.448, -125.157, 542.060, 0.150, 0.247, 0.842, -20.489};

/// Geodetic latitude/longitude in radians on the Airy ellipsoid.
struct LatLonRad {
    double lat;
    double lon;
};

/// Forward transverse Mercator on Airy 1830 (no datum shift).
GridPoint project(LatLonRad airy);
/// Inverse transverse Mercator on Airy 1830 (no datum shift).
LatLonRad unproject(const GridPoint& p);

}  // namespace osgb

}  // namespace snowgrid
