#include <doctest.h>

#include <algorithm>
#include <vector>

#include "curbscan/geo.hpp"

using namespace curbscan;

namespace {

const LatLon kRef{51.7480, -1.1405};

// Independent check: densely subdivide the segment and take the minimum
// haversine distance to any sample point.
double brute_force_segment_distance(const LatLon& p, const LatLon& a, const LatLon& b, int steps) {
    const LocalFrame frame(a);
    const EnuVector bv = frame.to_local(b);
    double best = haversine_m(p, a);
    for (int i = 0; i <= steps; ++i) {
        const double t = static_cast<double>(i) / steps;
        best = std::min(best, haversine_m(p, frame.from_local({t * bv.east_m, t * bv.north_m})));
    }
    return best;
}

}  // namespace

TEST_CASE("haversine basics") {
    CHECK(haversine_m(kRef, kRef) == 0.0);
    const LatLon east = offset_point(kRef, 100.0, 0.0);
    CHECK(haversine_m(kRef, east) == doctest::Approx(100.0).epsilon(1e-6));
    CHECK(haversine_m(east, kRef) == doctest::Approx(haversine_m(kRef, east)));

    const LatLon north = destination_point(kRef, 0.0, 250.0);
    CHECK(haversine_m(kRef, north) == doctest::Approx(250.0).epsilon(1e-6));
    CHECK(north.lon == doctest::Approx(kRef.lon));
}

TEST_CASE("local frame round trips") {
    const LocalFrame frame(kRef);
    const LatLon p = offset_point(kRef, 37.5, -12.25);
    const EnuVector v = frame.to_local(p);
    CHECK(v.east_m == doctest::Approx(37.5).epsilon(1e-9));
    CHECK(v.north_m == doctest::Approx(-12.25).epsilon(1e-9));
    const LatLon back = frame.from_local(v);
    CHECK(haversine_m(p, back) < 1e-6);
}

TEST_CASE("point to segment distance") {
    const LatLon a = kRef;
    const LatLon b = offset_point(kRef, 200.0, 0.0);

    CHECK(point_to_segment_m(a, a, b) == doctest::Approx(0.0));

    const LatLon above_mid = offset_point(kRef, 100.0, 25.0);
    const double mid = point_to_segment_m(above_mid, a, b);
    CHECK(mid == doctest::Approx(25.0).epsilon(1e-4));
    CHECK(mid == doctest::Approx(brute_force_segment_distance(above_mid, a, b, 20000)).epsilon(1e-4));

    const LatLon beyond = offset_point(kRef, 230.0, 0.0);
    CHECK(point_to_segment_m(beyond, a, b) == doctest::Approx(30.0).epsilon(1e-4));

    const LatLon diagonal = offset_point(kRef, 260.0, 40.0);
    CHECK(point_to_segment_m(diagonal, a, b) ==
          doctest::Approx(brute_force_segment_distance(diagonal, a, b, 20000)).epsilon(1e-4));
}

TEST_CASE("polyline queries") {
    const std::vector<LatLon> line{kRef, offset_point(kRef, 100.0, 0.0),
                                   offset_point(kRef, 100.0, 80.0)};
    CHECK(polyline_length_m(line) == doctest::Approx(180.0).epsilon(1e-5));

    const LatLon near_second_leg = offset_point(kRef, 104.0, 40.0);
    CHECK(point_to_polyline_m(near_second_leg, line) == doctest::Approx(4.0).epsilon(1e-3));

    CHECK(haversine_m(point_along_polyline(line, 0.0), kRef) < 1e-9);
    CHECK(haversine_m(point_along_polyline(line, 150.0), offset_point(kRef, 100.0, 50.0)) < 0.01);
    CHECK(haversine_m(point_along_polyline(line, 999.0), line.back()) < 1e-9);
}
