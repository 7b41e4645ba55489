#pragma once

#include <span>
#include <vector>

namespace curbscan {

inline constexpr double kEarthRadiusM = 6371000.0;

struct LatLon {
    double lat{0.0};
    double lon{0.0};

    bool operator==(const LatLon&) const = default;
};

struct EnuVector {
    double east_m{0.0};
    double north_m{0.0};
};

double deg_to_rad(double degrees);
double rad_to_deg(double radians);

// Great-circle distance between two points, meters.
double haversine_m(const LatLon& a, const LatLon& b);

// Equirectangular tangent plane anchored at a reference point. Adequate for
// the sub-kilometer extents this toolkit works at (error well under 1 cm).
class LocalFrame {
  public:
    explicit LocalFrame(const LatLon& origin);

    EnuVector to_local(const LatLon& p) const;
    LatLon from_local(const EnuVector& v) const;
    const LatLon& origin() const { return origin_; }

  private:
    LatLon origin_;
    double cos_lat_;
};

// Shift a point by east/north meters in its own tangent plane.
LatLon offset_point(const LatLon& p, double east_m, double north_m);

// Destination point from start along a bearing (degrees clockwise from north).
LatLon destination_point(const LatLon& start, double bearing_deg, double distance_m);

// Distance from p to the great-circle segment [a, b], meters.
double point_to_segment_m(const LatLon& p, const LatLon& a, const LatLon& b);

// Minimum distance from p to any segment of the polyline, meters.
double point_to_polyline_m(const LatLon& p, std::span<const LatLon> line);

double polyline_length_m(std::span<const LatLon> line);

// Point at arc length `arc_m` along the polyline, clamped to its extent.
LatLon point_along_polyline(std::span<const LatLon> line, double arc_m);

}  // namespace curbscan
