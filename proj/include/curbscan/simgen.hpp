#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "curbscan/calibrate.hpp"
#include "curbscan/classifier.hpp"
#include "curbscan/spacemap.hpp"
#include "curbscan/trace.hpp"

namespace curbscan {

enum class ObjectKind { car, pole, furniture };

std::string_view to_string(ObjectKind kind);
ObjectKind object_kind_from_string(std::string_view text);

struct SceneObject {
    ObjectKind kind{ObjectKind::car};
    double start_m{0.0};    // along the street
    double length_m{0.0};
    double lateral_cm{0.0};
};

struct Street {
    std::vector<LatLon> kerb;
    double background_cm{500.0};
};

struct StreetScene {
    Street street;
    std::vector<SceneObject> objects;
    std::vector<ParkingZone> zones;
    std::vector<EnvironmentSignature> signatures;

    double street_length_m() const;
    void validate() const;
};

// Straight east-west kerb of the given length; convenient scene skeleton.
StreetScene make_straight_scene(double length_m, double background_cm = 500.0,
                                LatLon origin = {51.7480, -1.1405}, double bearing_deg = 90.0);

// Zone covering [start_m, end_m] of the scene's kerb.
ParkingZone zone_along(const StreetScene& scene, std::string zone_id, double start_m, double end_m,
                       int capacity, double buffer_m = 3.0);

enum class DriftMode { none, constant, linear, random_walk };

struct GpsDrift {
    DriftMode mode{DriftMode::none};
    double magnitude_m{0.0};
    double bearing_deg{90.0};
};

struct NoiseModel {
    double distance_sigma_cm{5.0};
    GpsDrift gps_drift{};
    double dropout{0.0};  // fraction of samples lost

    void validate() const;
};

struct TruthCar {
    LatLon anchor;
    double start_m{0.0};
    double length_m{0.0};
};

struct TruthSpace {
    LatLon anchor;
    double start_m{0.0};
    double length_m{0.0};
};

struct GroundTruth {
    std::string run_id;
    std::vector<TruthCar> cars;
    std::vector<TruthSpace> spaces;  // gaps between consecutive objects
};

struct SimRun {
    Trace trace;
    GroundTruth truth;
};

// Simulates one constant-speed pass along the kerb. Cars and furniture echo
// their lateral distance over their footprint; poles echo slant range inside
// a fixed visibility window, reproducing the shallow V contour road clutter
// shows in real traces. Identical seed, identical output.
SimRun generate_trace(const StreetScene& scene, double speed_kmh,
                      std::int64_t sample_period_ms, const NoiseModel& noise, std::uint64_t seed,
                      std::string run_id = {});

struct ScheduleEntry {
    StreetScene scene;
    std::int64_t wall_clock{0};  // unix seconds
};

struct CrowdRun {
    Trace trace;
    GroundTruth truth;
    std::int64_t wall_clock{0};
};

// One run per schedule entry; per-entry seeds derive from (seed, index).
std::vector<CrowdRun> crowd_runs(std::span<const ScheduleEntry> schedule, double speed_kmh,
                                 std::int64_t sample_period_ms, const NoiseModel& noise,
                                 std::uint64_t seed);

struct EvalZoneRow {
    std::string zone_id;
    int detected{0};
    int truth{0};
    int capacity{0};
};

struct EvalReport {
    int tp{0};
    int fp{0};
    int fn{0};
    double detection_rate{0.0};
    double paper_accuracy{0.0};
    double precision{0.0};
    std::vector<EvalZoneRow> zones;
};

// Greedy one-to-one nearest matching of parked detections to truth cars
// within the radius; unmatched detections are false positives, unmatched
// truth false negatives.
EvalReport evaluate(std::span<const Detection> detections, const GroundTruth& truth,
                    double matching_radius_m = 5.0, std::span<const ParkingZone> zones = {});

// File formats.
std::string scene_json(const StreetScene& scene);
StreetScene parse_scene_json(const std::string& text);
StreetScene load_scene_json(const std::filesystem::path& path);
void save_scene_json(const std::filesystem::path& path, const StreetScene& scene);

std::string noise_model_json(const NoiseModel& noise);
NoiseModel parse_noise_model_json(const std::string& text);
NoiseModel load_noise_model_json(const std::filesystem::path& path);

std::string ground_truth_json(const GroundTruth& truth);
GroundTruth parse_ground_truth_json(const std::string& text);
GroundTruth load_ground_truth_json(const std::filesystem::path& path);

std::string eval_report_json(const EvalReport& report);
std::string eval_report_table(const EvalReport& report);

}  // namespace curbscan
