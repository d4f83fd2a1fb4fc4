#include "snowgrid/projection.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "snowgrid/errors.hpp"

namespace snowgrid {
namespace osgb {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

constexpr double kLat0 = kTrueOriginLatDeg * kDeg;
constexpr double kLon0 = kTrueOriginLonDeg * kDeg;
constexpr double kAiryE2 = (kAiryA * kAiryA - kAiryB * kAiryB) / (kAiryA * kAiryA);
constexpr double kN = (kAiryA - kAiryB) / (kAiryA + kAiryB);

constexpr int kMaxArcIterations = 20;
constexpr double kArcTolerance = 1e-5;  // meters

// Developed meridional arc from the true-origin latitude, scaled by F0.
double meridional_arc(double lat) {
    const double n = kN, n2 = n * n, n3 = n2 * n;
    const double dl = lat - kLat0, sl = lat + kLat0;
    return kAiryB * kScaleF0 *
           ((1 + n + 1.25 * n2 + 1.25 * n3) * dl - (3 * n + 3 * n2 + 21.0 / 8.0 * n3) * std::sin(dl) * std::cos(sl) +
            (15.0 / 8.0 * n2 + 15.0 / 8.0 * n3) * std::sin(2 * dl) * std::cos(2 * sl) -
            35.0 / 24.0 * n3 * std::sin(3 * dl) * std::cos(3 * sl));
}

struct Curvature {
    double nu;    // transverse radius, scaled by F0
    double rho;   // meridional radius, scaled by F0
    double eta2;
};

Curvature curvature(double lat) {
    const double s2 = std::sin(lat) * std::sin(lat);
    const double nu = kAiryA * kScaleF0 / std::sqrt(1 - kAiryE2 * s2);
    const double rho = kAiryA * kScaleF0 * (1 - kAiryE2) / std::pow(1 - kAiryE2 * s2, 1.5);
    return {nu, rho, nu / rho - 1};
}

}  // namespace

GridPoint project(LatLonRad airy) {
    const double lat = airy.lat;
    const auto [nu, rho, eta2] = curvature(lat);
    const double s = std::sin(lat), c = std::cos(lat), c3 = c * c * c, c5 = c3 * c * c;
    const double t = std::tan(lat), t2 = t * t, t4 = t2 * t2;

    const double i = meridional_arc(lat) + kFalseNorthing;
    const double ii = nu / 2 * s * c;
    const double iii = nu / 24 * s * c3 * (5 - t2 + 9 * eta2);
    const double iiia = nu / 720 * s * c5 * (61 - 58 * t2 + t4);
    const double iv = nu * c;
    const double v = nu / 6 * c3 * (nu / rho - t2);
    const double vi = nu / 120 * c5 * (5 - 18 * t2 + t4 + 14 * eta2 - 58 * t2 * eta2);

    const double dl = airy.lon - kLon0, dl2 = dl * dl;
    return {kFalseEasting + dl * (iv + dl2 * (v + dl2 * vi)), i + dl2 * (ii + dl2 * (iii + dl2 * iiia))};
}

LatLonRad unproject(const GridPoint& p) {
    const double dn = p.northing - kFalseNorthing;
    double lat = dn / (kAiryA * kScaleF0) + kLat0;
    double m = meridional_arc(lat);
    int iterations = 0;
    while (std::abs(dn - m) >= kArcTolerance) {
        if (++iterations > kMaxArcIterations) {
            throw DomainError(fmt::format("meridional arc did not converge for northing {}", p.northing));
        }
        lat += (dn - m) / (kAiryA * kScaleF0);
        m = meridional_arc(lat);
    }

    const auto [nu, rho, eta2] = curvature(lat);
    const double t = std::tan(lat), t2 = t * t, t4 = t2 * t2, t6 = t4 * t2;
    const double sec = 1 / std::cos(lat);
    const double nu3 = nu * nu * nu, nu5 = nu3 * nu * nu, nu7 = nu5 * nu * nu;

    const double vii = t / (2 * rho * nu);
    const double viii = t / (24 * rho * nu3) * (5 + 3 * t2 + eta2 - 9 * t2 * eta2);
    const double ix = t / (720 * rho * nu5) * (61 + 90 * t2 + 45 * t4);
    const double x = sec / nu;
    const double xi = sec / (6 * nu3) * (nu / rho + 2 * t2);
    const double xii = sec / (120 * nu5) * (5 + 28 * t2 + 24 * t4);
    const double xiia = sec / (5040 * nu7) * (61 + 662 * t2 + 1320 * t4 + 720 * t6);

    const double de = p.easting - kFalseEasting, de2 = de * de;
    return {lat - de2 * (vii - de2 * (viii - de2 * ix)), kLon0 + de * (x - de2 * (xi - de2 * (xii - de2 * xiia)))};
}

}  // namespace osgb

namespace {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

struct Ellipsoid {
    double a;
    double e2;
};

constexpr Ellipsoid kAiry{osgb::kAiryA, (osgb::kAiryA * osgb::kAiryA - osgb::kAiryB * osgb::kAiryB) /
                                            (osgb::kAiryA * osgb::kAiryA)};
constexpr Ellipsoid kWgs84{osgb::kWgs84A, (2 - 1 / osgb::kWgs84InvF) / osgb::kWgs84InvF};
constexpr double kDeg = std::numbers::pi / 180.0;

struct Geodetic {
    double lat;  // radians
    double lon;  // radians
    double h;    // meters
};

Vec3 to_cartesian(const Ellipsoid& ell, const Geodetic& g) {
    const double s = std::sin(g.lat), c = std::cos(g.lat);
    const double nu = ell.a / std::sqrt(1 - ell.e2 * s * s);
    return {(nu + g.h) * c * std::cos(g.lon), (nu + g.h) * c * std::sin(g.lon), ((1 - ell.e2) * nu + g.h) * s};
}

Geodetic to_geodetic(const Ellipsoid& ell, const Vec3& x) {
    const double p = std::hypot(x[0], x[1]);
    double lat = std::atan2(x[2], p * (1 - ell.e2));
    double nu = ell.a;
    for (int i = 0; i < 10; ++i) {
        const double s = std::sin(lat);
        nu = ell.a / std::sqrt(1 - ell.e2 * s * s);
        const double next = std::atan2(x[2] + ell.e2 * nu * s, p);
        const bool done = std::abs(next - lat) < 1e-14;
        lat = next;
        if (done) break;
    }
    const double s = std::sin(lat);
    nu = ell.a / std::sqrt(1 - ell.e2 * s * s);
    return {lat, std::atan2(x[1], x[0]), p / std::cos(lat) - nu};
}

// Linearised rotation matrix of the position-vector convention, times (1 + s).
Mat3 helmert_matrix(const osgb::HelmertParams& hp) {
    constexpr double arcsec = kDeg / 3600.0;
    const double rx = hp.rx * arcsec, ry = hp.ry * arcsec, rz = hp.rz * arcsec;
    const double k = 1 + hp.scale_ppm * 1e-6;
    return {{{k, -k * rz, k * ry}, {k * rz, k, -k * rx}, {-k * ry, k * rx, k}}};
}

Mat3 inverse(const Mat3& m) {
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    Mat3 r{};
    r[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
    r[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
    r[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
    r[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
    r[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
    r[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
    r[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
    r[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
    r[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
    return r;
}

Vec3 mul(const Mat3& m, const Vec3& v) {
    return {m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2], m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2]};
}

const Mat3& forward_matrix() {
    static const Mat3 m = helmert_matrix(osgb::kOsgb36ToWgs84);
    return m;
}

const Mat3& reverse_matrix() {
    static const Mat3 m = inverse(forward_matrix());
    return m;
}

Vec3 osgb36_to_wgs84(const Vec3& x) {
    const auto& hp = osgb::kOsgb36ToWgs84;
    auto r = mul(forward_matrix(), x);
    return {r[0] + hp.tx, r[1] + hp.ty, r[2] + hp.tz};
}

Vec3 wgs84_to_osgb36(const Vec3& x) {
    const auto& hp = osgb::kOsgb36ToWgs84;
    return mul(reverse_matrix(), {x[0] - hp.tx, x[1] - hp.ty, x[2] - hp.tz});
}

}  // namespace

GeoPoint grid_to_geo(const GridPoint& p) {
    if (!(p.easting >= 0.0 && p.easting <= 800000.0 && p.northing >= -100000.0 && p.northing <= 1400000.0)) {
        throw DomainError(fmt::format("grid point ({}, {}) outside the National Grid window", p.easting, p.northing));
    }
    const auto airy = osgb::unproject(p);
    const auto wgs = to_geodetic(kWgs84, osgb36_to_wgs84(to_cartesian(kAiry, {airy.lat, airy.lon, 0.0})));
    return {wgs.lon / kDeg, wgs.lat / kDeg};
}

GridPoint geo_to_grid(const GeoPoint& p) {
    if (!(p.lon >= -9.0 && p.lon <= 2.0 && p.lat >= 49.0 && p.lat <= 61.0)) {
        throw DomainError(fmt::format("geographic point ({}, {}) outside the Great Britain window", p.lon, p.lat));
    }
    Geodetic wgs{p.lat * kDeg, p.lon * kDeg, 0.0};
    Geodetic airy{};
    for (int i = 0; i < 8; ++i) {
        airy = to_geodetic(kAiry, wgs84_to_osgb36(to_cartesian(kWgs84, wgs)));
        if (std::abs(airy.h) < 1e-7) break;
        wgs.h -= airy.h;
    }
    return osgb::project({airy.lat, airy.lon});
}

GeoBoundingBox transform_bbox(const BoundingBox& b) {
    if (!b.valid()) throw DomainError("invalid bounding box");
    const std::array corners{grid_to_geo(b.min), grid_to_geo({b.max.easting, b.min.northing}), grid_to_geo(b.max),
                             grid_to_geo({b.min.easting, b.max.northing})};
    GeoBoundingBox out{corners[0], corners[0]};
    for (const auto& c : corners) {
        out.min.lon = std::min(out.min.lon, c.lon);
        out.min.lat = std::min(out.min.lat, c.lat);
        out.max.lon = std::max(out.max.lon, c.lon);
        out.max.lat = std::max(out.max.lat, c.lat);
    }
    return out;
}

}  // namespace snowgrid
