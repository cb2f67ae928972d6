#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "tidelink/errors.hpp"

namespace tidelink::geo {

inline constexpr double kEarthRadiusM = 6371000.0;
inline constexpr double kDegPerRad = 180.0 / std::numbers::pi;
inline constexpr double kRadPerDeg = std::numbers::pi / 180.0;

/// Wraps a longitude into [-180, 180).
inline double normalize_lon_deg(double lon) {
    double x = std::fmod(lon + 180.0, 360.0);
    if (x < 0.0) x += 360.0;
    return x - 180.0;
}

struct GeoPoint {
    double lat_deg = 0.0;
    double lon_deg = 0.0;

    GeoPoint() = default;
    GeoPoint(double lat, double lon) : lat_deg(lat), lon_deg(normalize_lon_deg(lon)) {
        if (!(lat >= -90.0 && lat <= 90.0))
            throw InvalidCoordinate("latitude out of [-90, 90]: " + std::to_string(lat));
    }
};

using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0]};
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline Vec3 to_unit_vector(const GeoPoint& p) {
    const double lat = p.lat_deg * kRadPerDeg;
    const double lon = p.lon_deg * kRadPerDeg;
    return {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
}

inline GeoPoint from_unit_vector(const Vec3& v) {
    const double z = std::fmin(1.0, std::fmax(-1.0, v[2] / norm(v)));
    return GeoPoint(std::asin(z) * kDegPerRad, std::atan2(v[1], v[0]) * kDegPerRad);
}

/// Central angle between two points, in radians. atan2 form stays accurate
/// for both nearly-coincident and nearly-antipodal pairs.
inline double central_angle_rad(const GeoPoint& a, const GeoPoint& b) {
    const Vec3 ua = to_unit_vector(a);
    const Vec3 ub = to_unit_vector(b);
    return std::atan2(norm(cross(ua, ub)), dot(ua, ub));
}

/// Great-circle distance on the spherical Earth, in meters.
inline double great_circle_distance(const GeoPoint& a, const GeoPoint& b) {
    return kEarthRadiusM * central_angle_rad(a, b);
}

inline constexpr double kAntipodalTolRad = 1e-9;

/// Point at fraction f in [0, 1] along the minor great-circle arc from a to b.
/// Endpoints are returned exactly. Antipodal inputs have no unique arc and
/// are rejected.
inline GeoPoint interpolate_great_circle(const GeoPoint& a, const GeoPoint& b, double f) {
    if (!(f >= 0.0 && f <= 1.0))
        throw InvalidCoordinate("interpolation fraction out of [0, 1]: " + std::to_string(f));
    if (f == 0.0) return a;
    if (f == 1.0) return b;
    const Vec3 ua = to_unit_vector(a);
    const Vec3 ub = to_unit_vector(b);
    const double omega = std::atan2(norm(cross(ua, ub)), dot(ua, ub));
    if (std::numbers::pi - omega < kAntipodalTolRad)
        throw AntipodalPoints("arc between antipodal points is not unique");
    if (omega < 1e-15) return a;  // coincident points, any interpolant works
    const double s = std::sin(omega);
    const double wa = std::sin((1.0 - f) * omega) / s;
    const double wb = std::sin(f * omega) / s;
    const Vec3 v = {wa * ua[0] + wb * ub[0], wa * ua[1] + wb * ub[1], wa * ua[2] + wb * ub[2]};
    return from_unit_vector(v);
}

struct RouteSegment {
    GeoPoint midpoint;
    double length_m = 0.0;
    double cumulative_start_m = 0.0;  // arc length before this segment, post scaling
};

struct CableRoute {
    std::string name;
    std::vector<GeoPoint> waypoints;
    std::vector<RouteSegment> segments;
    double geodesic_length_m = 0.0;  // sum of waypoint-to-waypoint arcs
    double total_length_m = 0.0;     // after slack scaling; equals sum of segment lengths
    std::optional<double> declared_length_m;
};

inline constexpr double kMaxSlackScale = 1.5;

/// Splits each waypoint leg into ceil(leg/step) equal sub-arcs and records the
/// midpoint and length of each. A declared physical length rescales segment
/// lengths uniformly; cable slack beyond 50% of the geodesic is rejected as a
/// data error.
inline CableRoute sample_route(const std::vector<GeoPoint>& waypoints, double step_m,
                               std::optional<double> declared_length_m = std::nullopt) {
    if (!(step_m > 0.0) || !std::isfinite(step_m))
        throw InvalidStep("sampling step must be positive and finite");
    if (waypoints.size() < 2)
        throw InvalidCoordinate("route needs at least two waypoints");

    CableRoute route;
    route.waypoints = waypoints;
    route.declared_length_m = declared_length_m;

    std::vector<double> leg_len(waypoints.size() - 1);
    for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
        leg_len[i] = great_circle_distance(waypoints[i], waypoints[i + 1]);
        route.geodesic_length_m += leg_len[i];
    }
    if (route.geodesic_length_m <= 0.0)
        throw InvalidCoordinate("route has zero geodesic length");

    double scale = 1.0;
    if (declared_length_m) {
        scale = *declared_length_m / route.geodesic_length_m;
        if (!(scale >= 1.0 && scale <= kMaxSlackScale))
            throw ScalingOutOfRange("declared length / geodesic length = " + std::to_string(scale)
                                    + ", expected within [1.0, " + std::to_string(kMaxSlackScale) + "]");
    }

    for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
        if (leg_len[i] == 0.0) continue;  // repeated waypoint, nothing to sample
        const auto n = static_cast<std::size_t>(std::ceil(leg_len[i] / step_m));
        const double seg_len = scale * leg_len[i] / static_cast<double>(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double f = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
            route.segments.push_back({interpolate_great_circle(waypoints[i], waypoints[i + 1], f),
                                      seg_len, route.total_length_m});
            route.total_length_m += seg_len;
        }
    }
    return route;
}

} // namespace tidelink::geo
