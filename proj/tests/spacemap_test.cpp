#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "curbscan/errors.hpp"
#include "curbscan/simgen.hpp"
#include "curbscan/spacemap.hpp"
#include "test_support.hpp"

using namespace curbscan;
using curbscan::testing::kTestOrigin;
using curbscan::testing::make_test_trace;

namespace {

ParkingZone east_zone(const std::string& id, double start_m, double end_m, int capacity,
                      double north_offset_m = 0.0) {
    ParkingZone zone;
    zone.zone_id = id;
    zone.capacity = capacity;
    zone.kerb_line = {offset_point(kTestOrigin, start_m, north_offset_m),
                      offset_point(kTestOrigin, end_m, north_offset_m)};
    return zone;
}

Detection parked_at(double east_m, double north_m, std::int64_t t = 0) {
    return {DetectionKind::parked_vehicle, offset_point(kTestOrigin, east_m, north_m), t,
            std::nullopt, "r1", false};
}

}  // namespace

TEST_CASE("assign_zone: vertex, buffer boundary, and far points") {
    const std::vector<ParkingZone> zones{east_zone("z1", 20.0, 50.0, 6)};

    CHECK(assign_zone(zones[0].kerb_line.front(), zones) == "z1");
    CHECK_FALSE(assign_zone(offset_point(kTestOrigin, 35.0, 50.0), zones).has_value());

    // 2.9 m lateral with a 3 m buffer, cross-checked against haversine
    const LatLon near = offset_point(kTestOrigin, 35.0, 2.9);
    CHECK(point_to_polyline_m(near, zones[0].kerb_line) == doctest::Approx(2.9).epsilon(1e-3));
    CHECK(assign_zone(near, zones) == "z1");

    CHECK_FALSE(assign_zone(offset_point(kTestOrigin, 35.0, 3.2), zones).has_value());
}

TEST_CASE("assign_zone: nearest wins and is order independent") {
    std::vector<ParkingZone> zones{east_zone("a", 0.0, 50.0, 4, 0.0),
                                   east_zone("b", 0.0, 50.0, 4, 4.0)};
    const LatLon p = offset_point(kTestOrigin, 25.0, 1.0);
    CHECK(assign_zone(p, zones) == "a");
    std::reverse(zones.begin(), zones.end());
    CHECK(assign_zone(p, zones) == "a");
}

TEST_CASE("flag_illegal partitions parked detections") {
    const std::vector<ParkingZone> zones{east_zone("z1", 0.0, 60.0, 6)};
    const std::vector<Detection> parked{parked_at(10.0, 0.5), parked_at(30.0, 40.0),
                                        parked_at(50.0, -1.0)};

    const std::vector<Detection> illegal = flag_illegal(parked, zones);
    REQUIRE(illegal.size() == 1);
    CHECK(illegal.front().illegal);
    CHECK(haversine_m(illegal.front().anchor, parked[1].anchor) < 1e-9);

    int assigned = 0;
    for (const Detection& d : parked) {
        assigned += assign_zone(d.anchor, zones).has_value() ? 1 : 0;
    }
    CHECK(assigned + static_cast<int>(illegal.size()) == static_cast<int>(parked.size()));

    CHECK(flag_illegal(std::vector<Detection>{parked_at(10.0, 0.5)}, zones).empty());
    CHECK(flag_illegal(std::vector<Detection>{}, zones).empty());
}

TEST_CASE("spaces_by_capacity subtracts and clamps") {
    const ParkingZone park1 = east_zone("park1", 0.0, 40.0, 6);
    CHECK(spaces_by_capacity(park1, 0) == park1.capacity);
    CHECK(spaces_by_capacity(park1, 3) == 3);
    CHECK(spaces_by_capacity(park1, 6) == 0);
    CHECK(spaces_by_capacity(park1, 9) == 0);

    const ParkingZone park4 = east_zone("park4", 0.0, 70.0, 11);
    CHECK(spaces_by_capacity(park4, 7) == 4);

    CHECK_THROWS_AS((void)spaces_by_capacity(park1, -1), Error);
}

TEST_CASE("variable-length spaces measure gap time times mean speed") {
    // obstacle 1 ends so its first clear sample is at t = 10.00 s; obstacle 2
    // begins at t = 11.25 s; 1.25 s at 20 km/h is 6.94 m.
    std::vector<double> distances(700, 500.0);
    for (std::size_t i = 100; i <= 199; ++i) {
        distances[i] = 150.0;
    }
    for (std::size_t i = 225; i <= 260; ++i) {
        distances[i] = 150.0;
    }
    const Trace trace = make_test_trace(distances, 20.0);
    const std::vector<Detection> parked{
        {DetectionKind::parked_vehicle, trace.points[100].position(), 5000, std::nullopt, "r", false},
        {DetectionKind::parked_vehicle, trace.points[225].position(), 11250, std::nullopt, "r",
         false}};

    const std::vector<Space> spaces = variable_length_spaces(trace, parked, {});
    REQUIRE(spaces.size() == 1);
    CHECK(spaces.front().length_m == doctest::Approx(7.0).epsilon(0.015));
    CHECK(spaces.front().timestamp_ms == 10000);
    CHECK(haversine_m(spaces.front().anchor, trace.points[200].position()) < 1e-9);
}

TEST_CASE("adjacent and sub-threshold gaps yield no space") {
    std::vector<double> distances(400, 500.0);
    for (std::size_t i = 100; i <= 120; ++i) {
        distances[i] = 150.0;  // obstacle 1
    }
    for (std::size_t i = 121; i <= 140; ++i) {
        distances[i] = 180.0;  // obstacle 2, immediately adjacent
    }
    for (std::size_t i = 147; i <= 170; ++i) {
        distances[i] = 150.0;  // obstacle 3 after a 1.67 m gap
    }
    const Trace trace = make_test_trace(distances, 20.0);

    // adjacent plateaus merge into one; treat detections as separate obstacles
    const std::vector<Detection> adjacent{
        {DetectionKind::parked_vehicle, trace.points[100].position(), 5000, std::nullopt, "r", false},
        {DetectionKind::parked_vehicle, trace.points[121].position(), 6050, std::nullopt, "r",
         false}};
    CHECK(variable_length_spaces(trace, adjacent, {}).empty());

    const std::vector<Detection> narrow{
        {DetectionKind::parked_vehicle, trace.points[121].position(), 6050, std::nullopt, "r", false},
        {DetectionKind::parked_vehicle, trace.points[147].position(), 7350, std::nullopt, "r",
         false}};
    CHECK(variable_length_spaces(trace, narrow, {}).empty());

    CHECK(variable_length_spaces(trace, std::vector<Detection>{adjacent[0]}, {}).empty());
}

TEST_CASE("unclassified in-lane clutter bounds spaces; far clutter does not") {
    StreetScene scene = make_straight_scene(120.0);
    scene.objects.push_back({ObjectKind::car, 15.0, 4.5, 150.0});
    scene.objects.push_back({ObjectKind::pole, 40.0, 0.3, 150.0});   // in lane
    scene.objects.push_back({ObjectKind::furniture, 70.0, 1.0, 330.0});  // beyond the band
    scene.objects.push_back({ObjectKind::car, 95.0, 4.5, 160.0});
    NoiseModel noise;
    noise.distance_sigma_cm = 0.0;
    const SimRun run = generate_trace(scene, 20.0, 50, noise, 21);

    const ClassifierConfig config;
    const ClassifyResult result = classify(run.trace, config);
    REQUIRE(result.parked.size() == 2);
    const std::vector<Space> spaces = variable_length_spaces(run.trace, result.parked, config);

    // car1 -> pole and pole -> car2; the 330 cm bin splits nothing
    REQUIRE(spaces.size() == 2);
    // pole visibility spans ~2.8 m either side of its center at 40.15
    CHECK(spaces[0].length_m == doctest::Approx(40.15 - 2.8 - 19.5).epsilon(0.05));
    CHECK(spaces[1].length_m == doctest::Approx(95.0 - (40.15 + 2.8)).epsilon(0.05));
}

TEST_CASE("zone budget: detected lengths plus spaces never exceed the span") {
    StreetScene scene = make_straight_scene(150.0);
    scene.objects.push_back({ObjectKind::car, 20.0, 4.5, 150.0});
    scene.objects.push_back({ObjectKind::car, 31.0, 5.0, 160.0});
    scene.objects.push_back({ObjectKind::car, 45.0, 3.0, 140.0});
    NoiseModel noise;
    noise.distance_sigma_cm = 0.0;
    const SimRun run = generate_trace(scene, 20.0, 50, noise, 9);

    const ClassifierConfig config;
    const ClassifyResult result = classify(run.trace, config);
    REQUIRE(result.parked.size() == 3);
    const auto candidates = extract_candidates(run.trace, config);
    REQUIRE(candidates.size() == 3);
    const std::vector<Space> spaces = variable_length_spaces(run.trace, result.parked, config);
    REQUIRE(spaces.size() == 2);

    double total = 0.0;
    for (const ContourCandidate& c : candidates) {
        total += c.length_m;
    }
    for (const Space& s : spaces) {
        total += s.length_m;
    }
    const double true_span = (45.0 + 3.0) - 20.0;  // first car start to last car end
    const double sample_len = 20.0 / 3.6 * 0.05;
    CHECK(total <= true_span + 2.0 * sample_len + 1e-9);
    CHECK(total >= true_span - 2.0 * sample_len - 1e-9);
}

TEST_CASE("zones geojson round trip") {
    const std::vector<ParkingZone> zones{east_zone("park1", 0.0, 40.0, 6),
                                         east_zone("park2", 55.0, 62.0, 1)};
    const std::string text = zones_geojson(zones);
    const std::vector<ParkingZone> back = parse_zones_geojson(text);
    REQUIRE(back.size() == 2);
    CHECK(back[0].zone_id == "park1");
    CHECK(back[0].capacity == 6);
    CHECK(back[0].buffer_m == doctest::Approx(3.0));
    CHECK(back[1].zone_id == "park2");
    CHECK(haversine_m(back[0].kerb_line[1], zones[0].kerb_line[1]) < 1e-6);
    CHECK(zones_geojson(back) == text);

    CHECK_THROWS_AS((void)parse_zones_geojson("{\"type\":\"Feature\"}"), Error);
}
