#include "curbscan/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "curbscan/errors.hpp"

namespace curbscan {

namespace {

constexpr double kMetersPerDegree = kEarthRadiusM * std::numbers::pi / 180.0;

}  // namespace

double deg_to_rad(double degrees) { return degrees * std::numbers::pi / 180.0; }

double rad_to_deg(double radians) { return radians * 180.0 / std::numbers::pi; }

double haversine_m(const LatLon& a, const LatLon& b) {
    const double lat1 = deg_to_rad(a.lat);
    const double lat2 = deg_to_rad(b.lat);
    const double dlat = lat2 - lat1;
    const double dlon = deg_to_rad(b.lon - a.lon);

    const double s = std::sin(dlat / 2.0) * std::sin(dlat / 2.0) +
                     std::cos(lat1) * std::cos(lat2) * std::sin(dlon / 2.0) * std::sin(dlon / 2.0);
    return kEarthRadiusM * 2.0 * std::asin(std::min(1.0, std::sqrt(s)));
}

LocalFrame::LocalFrame(const LatLon& origin)
    : origin_(origin), cos_lat_(std::cos(deg_to_rad(origin.lat))) {}

EnuVector LocalFrame::to_local(const LatLon& p) const {
    return {(p.lon - origin_.lon) * kMetersPerDegree * cos_lat_,
            (p.lat - origin_.lat) * kMetersPerDegree};
}

LatLon LocalFrame::from_local(const EnuVector& v) const {
    return {origin_.lat + v.north_m / kMetersPerDegree,
            origin_.lon + v.east_m / (kMetersPerDegree * cos_lat_)};
}

LatLon offset_point(const LatLon& p, double east_m, double north_m) {
    return LocalFrame(p).from_local({east_m, north_m});
}

LatLon destination_point(const LatLon& start, double bearing_deg, double distance_m) {
    const double b = deg_to_rad(bearing_deg);
    return offset_point(start, distance_m * std::sin(b), distance_m * std::cos(b));
}

double point_to_segment_m(const LatLon& p, const LatLon& a, const LatLon& b) {
    const LocalFrame frame(a);
    const EnuVector pv = frame.to_local(p);
    const EnuVector bv = frame.to_local(b);

    const double seg_len2 = bv.east_m * bv.east_m + bv.north_m * bv.north_m;
    double t = 0.0;
    if (seg_len2 > 0.0) {
        t = (pv.east_m * bv.east_m + pv.north_m * bv.north_m) / seg_len2;
        t = std::clamp(t, 0.0, 1.0);
    }
    const LatLon closest = frame.from_local({t * bv.east_m, t * bv.north_m});
    return haversine_m(p, closest);
}

double point_to_polyline_m(const LatLon& p, std::span<const LatLon> line) {
    if (line.empty()) {
        throw Error(Error::Code::invalid_argument, "polyline must have at least one vertex");
    }
    if (line.size() == 1) {
        return haversine_m(p, line[0]);
    }
    double best = haversine_m(p, line[0]);
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
        best = std::min(best, point_to_segment_m(p, line[i], line[i + 1]));
    }
    return best;
}

double polyline_length_m(std::span<const LatLon> line) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
        total += haversine_m(line[i], line[i + 1]);
    }
    return total;
}

LatLon point_along_polyline(std::span<const LatLon> line, double arc_m) {
    if (line.empty()) {
        throw Error(Error::Code::invalid_argument, "polyline must have at least one vertex");
    }
    if (arc_m <= 0.0 || line.size() == 1) {
        return line[0];
    }
    double remaining = arc_m;
    for (std::size_t i = 0; i + 1 < line.size(); ++i) {
        const double seg = haversine_m(line[i], line[i + 1]);
        if (remaining <= seg && seg > 0.0) {
            const LocalFrame frame(line[i]);
            const EnuVector bv = frame.to_local(line[i + 1]);
            const double t = remaining / seg;
            return frame.from_local({t * bv.east_m, t * bv.north_m});
        }
        remaining -= seg;
    }
    return line.back();
}

}  // namespace curbscan
