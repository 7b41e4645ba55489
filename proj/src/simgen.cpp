#include "curbscan/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "curbscan/aggregate.hpp"
#include "curbscan/errors.hpp"

namespace curbscan {

namespace {

using nlohmann::json;

// Point scatterers return an echo well before the vehicle is abeam of them;
// this window stands in for the beam geometry without modeling the cone.
// 2.8 m puts the extracted edge chord of a 1.5 m-lateral pole near the 55.7
// degree clutter exemplar.
constexpr double kPoleVisibilityHalfWidthM = 2.8;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double object_echo_cm(const SceneObject& object, double x_m, double background_cm) {
    switch (object.kind) {
        case ObjectKind::car:
        case ObjectKind::furniture: {
            if (x_m >= object.start_m && x_m < object.start_m + object.length_m) {
                return object.lateral_cm;
            }
            return background_cm;
        }
        case ObjectKind::pole: {
            const double center = object.start_m + object.length_m / 2.0;
            const double along = x_m - center;
            if (std::abs(along) > kPoleVisibilityHalfWidthM) {
                return background_cm;
            }
            const double lateral_m = object.lateral_cm / 100.0;
            return std::hypot(lateral_m, along) * 100.0;
        }
    }
    return background_cm;
}

json latlon_obj(const LatLon& p) { return {{"lat", p.lat}, {"lon", p.lon}}; }

LatLon latlon_from_obj(const json& doc) {
    return {doc.at("lat").get<double>(), doc.at("lon").get<double>()};
}

json zone_obj(const ParkingZone& zone) {
    json kerb = json::array();
    for (const LatLon& v : zone.kerb_line) {
        kerb.push_back(latlon_obj(v));
    }
    return {{"zone_id", zone.zone_id},
            {"capacity", zone.capacity},
            {"buffer_m", zone.buffer_m},
            {"kerb_line", kerb}};
}

ParkingZone zone_from_obj(const json& doc) {
    ParkingZone zone;
    zone.zone_id = doc.at("zone_id").get<std::string>();
    zone.capacity = doc.at("capacity").get<int>();
    zone.buffer_m = doc.value("buffer_m", 3.0);
    for (const auto& v : doc.at("kerb_line")) {
        zone.kerb_line.push_back(latlon_from_obj(v));
    }
    zone.validate();
    return zone;
}

const char* drift_mode_name(DriftMode mode) {
    switch (mode) {
        case DriftMode::none: return "none";
        case DriftMode::constant: return "constant";
        case DriftMode::linear: return "linear";
        case DriftMode::random_walk: return "random_walk";
    }
    return "none";
}

DriftMode drift_mode_from_string(std::string_view text) {
    if (text == "none") return DriftMode::none;
    if (text == "constant") return DriftMode::constant;
    if (text == "linear") return DriftMode::linear;
    if (text == "random_walk") return DriftMode::random_walk;
    throw Error(Error::Code::malformed_record, "unknown drift mode '" + std::string(text) + "'");
}

}  // namespace

std::string_view to_string(ObjectKind kind) {
    switch (kind) {
        case ObjectKind::car: return "car";
        case ObjectKind::pole: return "pole";
        case ObjectKind::furniture: return "furniture";
    }
    return "car";
}

ObjectKind object_kind_from_string(std::string_view text) {
    if (text == "car") return ObjectKind::car;
    if (text == "pole") return ObjectKind::pole;
    if (text == "furniture") return ObjectKind::furniture;
    throw Error(Error::Code::malformed_record, "unknown object kind '" + std::string(text) + "'");
}

double StreetScene::street_length_m() const { return polyline_length_m(street.kerb); }

void StreetScene::validate() const {
    if (street.kerb.size() < 2) {
        throw Error(Error::Code::invalid_argument, "street kerb needs at least 2 vertices");
    }
    if (!(street.background_cm > 0.0)) {
        throw Error(Error::Code::invalid_argument, "background distance must be positive");
    }
    const double length = street_length_m();
    if (!(length > 0.0)) {
        throw Error(Error::Code::invalid_argument, "street must have positive length");
    }
    std::vector<SceneObject> sorted(objects.begin(), objects.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const SceneObject& a, const SceneObject& b) { return a.start_m < b.start_m; });
    double previous_end = 0.0;
    bool first = true;
    for (const SceneObject& object : sorted) {
        if (object.start_m < 0.0 || object.length_m < 0.0 ||
            object.start_m + object.length_m > length) {
            throw Error(Error::Code::invalid_argument, "object extends outside the street");
        }
        if (!(object.lateral_cm < street.background_cm)) {
            throw Error(Error::Code::invalid_argument,
                        "object lateral distance must be closer than background");
        }
        if (!first && object.start_m < previous_end) {
            throw Error(Error::Code::invalid_argument, "objects must not overlap along the street");
        }
        previous_end = object.start_m + object.length_m;
        first = false;
    }
    for (const ParkingZone& zone : zones) {
        zone.validate();
    }
    for (const EnvironmentSignature& signature : signatures) {
        signature.validate();
    }
}

StreetScene make_straight_scene(double length_m, double background_cm, LatLon origin,
                                double bearing_deg) {
    StreetScene scene;
    scene.street.kerb = {origin, destination_point(origin, bearing_deg, length_m)};
    scene.street.background_cm = background_cm;
    return scene;
}

ParkingZone zone_along(const StreetScene& scene, std::string zone_id, double start_m, double end_m,
                       int capacity, double buffer_m) {
    ParkingZone zone;
    zone.zone_id = std::move(zone_id);
    zone.capacity = capacity;
    zone.buffer_m = buffer_m;
    zone.kerb_line = {point_along_polyline(scene.street.kerb, start_m),
                      point_along_polyline(scene.street.kerb, end_m)};
    zone.validate();
    return zone;
}

void NoiseModel::validate() const {
    if (distance_sigma_cm < 0.0 || gps_drift.magnitude_m < 0.0 || dropout < 0.0 ||
        dropout >= 1.0) {
        throw Error(Error::Code::invalid_argument,
                    "noise parameters must be non-negative with dropout < 1");
    }
}

SimRun generate_trace(const StreetScene& scene, double speed_kmh, std::int64_t sample_period_ms,
                      const NoiseModel& noise, std::uint64_t seed, std::string run_id) {
    scene.validate();
    noise.validate();
    if (!(speed_kmh > 0.0)) {
        throw Error(Error::Code::invalid_argument, "speed must be positive");
    }
    if (sample_period_ms <= 0) {
        throw Error(Error::Code::invalid_argument, "sample period must be positive");
    }
    if (run_id.empty()) {
        run_id = "sim-" + std::to_string(seed);
    }

    const double speed_ms = speed_kmh / 3.6;
    const double street_length = scene.street_length_m();
    const double step_m = speed_ms * static_cast<double>(sample_period_ms) / 1000.0;
    const std::size_t samples =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(street_length / step_m)));

    // Independent streams so switching drift on leaves the distance signal
    // untouched (drift-injection round trips rely on this).
    std::mt19937_64 distance_rng(splitmix64(seed ^ 0x5eed0001ULL));
    std::mt19937_64 drift_rng(splitmix64(seed ^ 0x5eed0002ULL));
    std::mt19937_64 dropout_rng(splitmix64(seed ^ 0x5eed0003ULL));
    std::normal_distribution<double> distance_noise(
        0.0, noise.distance_sigma_cm > 0.0 ? noise.distance_sigma_cm : 1.0);
    std::uniform_real_distribution<double> uniform01(0.0, 1.0);

    const double bearing = deg_to_rad(noise.gps_drift.bearing_deg);
    const double drift_east = std::sin(bearing);
    const double drift_north = std::cos(bearing);
    const double walk_sigma =
        noise.gps_drift.magnitude_m / std::sqrt(static_cast<double>(samples));
    std::normal_distribution<double> walk_step(0.0, walk_sigma > 0.0 ? walk_sigma : 1.0);

    SimRun run;
    run.truth.run_id = run_id;
    std::vector<TracePoint> points;
    points.reserve(samples);

    double walk_east = 0.0;
    double walk_north = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double x = static_cast<double>(i) * step_m;

        double distance = scene.street.background_cm;
        for (const SceneObject& object : scene.objects) {
            distance = std::min(distance, object_echo_cm(object, x, scene.street.background_cm));
        }
        if (noise.distance_sigma_cm > 0.0) {
            distance += distance_noise(distance_rng);
        }
        distance = std::clamp(distance, 0.0, kDefaultMaxRangeCm);

        double east = 0.0;
        double north = 0.0;
        switch (noise.gps_drift.mode) {
            case DriftMode::none:
                break;
            case DriftMode::constant:
                east = noise.gps_drift.magnitude_m * drift_east;
                north = noise.gps_drift.magnitude_m * drift_north;
                break;
            case DriftMode::linear: {
                const double f =
                    samples > 1 ? static_cast<double>(i) / static_cast<double>(samples - 1) : 0.0;
                east = f * noise.gps_drift.magnitude_m * drift_east;
                north = f * noise.gps_drift.magnitude_m * drift_north;
                break;
            }
            case DriftMode::random_walk:
                if (walk_sigma > 0.0) {
                    walk_east += walk_step(drift_rng);
                    walk_north += walk_step(drift_rng);
                }
                east = walk_east;
                north = walk_north;
                break;
        }

        const bool dropped = noise.dropout > 0.0 && uniform01(dropout_rng) < noise.dropout;
        if (dropped && !points.empty()) {
            continue;
        }

        TracePoint p;
        p.timestamp_ms = static_cast<std::int64_t>(i) * sample_period_ms;
        p.distance_cm = distance;
        const LatLon position =
            offset_point(point_along_polyline(scene.street.kerb, x), east, north);
        p.latitude = position.lat;
        p.longitude = position.lon;
        p.speed_kmh = speed_kmh;
        points.push_back(p);
    }

    run.trace = make_trace(std::move(points), {run_id, "sim-vehicle"});
    run.trace.sample_period_ms = sample_period_ms;

    std::vector<SceneObject> sorted(scene.objects.begin(), scene.objects.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const SceneObject& a, const SceneObject& b) { return a.start_m < b.start_m; });
    for (const SceneObject& object : sorted) {
        if (object.kind == ObjectKind::car) {
            run.truth.cars.push_back({point_along_polyline(scene.street.kerb, object.start_m),
                                      object.start_m, object.length_m});
        }
    }
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        const double gap_start = sorted[i].start_m + sorted[i].length_m;
        const double gap = sorted[i + 1].start_m - gap_start;
        if (gap > 0.0) {
            run.truth.spaces.push_back(
                {point_along_polyline(scene.street.kerb, gap_start), gap_start, gap});
        }
    }
    return run;
}

std::vector<CrowdRun> crowd_runs(std::span<const ScheduleEntry> schedule, double speed_kmh,
                                 std::int64_t sample_period_ms, const NoiseModel& noise,
                                 std::uint64_t seed) {
    if (schedule.empty()) {
        throw Error(Error::Code::invalid_argument, "schedule must be non-empty");
    }
    std::vector<CrowdRun> runs;
    runs.reserve(schedule.size());
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        const std::uint64_t run_seed = splitmix64(seed + i);
        SimRun sim = generate_trace(schedule[i].scene, speed_kmh, sample_period_ms, noise, run_seed,
                                    "run-" + std::to_string(schedule[i].wall_clock));
        runs.push_back({std::move(sim.trace), std::move(sim.truth), schedule[i].wall_clock});
    }
    return runs;
}

EvalReport evaluate(std::span<const Detection> detections, const GroundTruth& truth,
                    double matching_radius_m, std::span<const ParkingZone> zones) {
    std::vector<const Detection*> parked;
    for (const Detection& d : detections) {
        if (d.kind == DetectionKind::parked_vehicle) {
            parked.push_back(&d);
        }
    }

    struct Pair {
        double distance;
        std::size_t det;
        std::size_t truth;
    };
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < parked.size(); ++i) {
        for (std::size_t j = 0; j < truth.cars.size(); ++j) {
            const double d = haversine_m(parked[i]->anchor, truth.cars[j].anchor);
            if (d <= matching_radius_m) {
                pairs.push_back({d, i, j});
            }
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        return std::tie(a.distance, a.det, a.truth) < std::tie(b.distance, b.det, b.truth);
    });

    std::vector<bool> det_used(parked.size(), false);
    std::vector<bool> truth_used(truth.cars.size(), false);
    int tp = 0;
    for (const Pair& pair : pairs) {
        if (det_used[pair.det] || truth_used[pair.truth]) {
            continue;
        }
        det_used[pair.det] = true;
        truth_used[pair.truth] = true;
        ++tp;
    }

    EvalReport report;
    report.tp = tp;
    report.fp = static_cast<int>(parked.size()) - tp;
    report.fn = static_cast<int>(truth.cars.size()) - tp;

    const int gt = static_cast<int>(truth.cars.size());
    if (gt > 0) {
        const DetectionMetrics metrics = detection_metrics(tp, gt, report.fp);
        report.detection_rate = metrics.detection_rate;
        report.paper_accuracy = metrics.paper_accuracy;
        report.precision = metrics.precision;
    } else {
        report.detection_rate = 1.0;
        report.paper_accuracy = report.fp > 0 ? 0.0 : 1.0;
        report.precision = report.fp > 0 ? 0.0 : 1.0;
    }

    for (const ParkingZone& zone : zones) {
        EvalZoneRow row;
        row.zone_id = zone.zone_id;
        row.capacity = zone.capacity;
        for (const Detection* d : parked) {
            const auto assigned = assign_zone(d->anchor, zones);
            if (assigned && *assigned == zone.zone_id) {
                ++row.detected;
            }
        }
        for (const TruthCar& car : truth.cars) {
            const auto assigned = assign_zone(car.anchor, zones);
            if (assigned && *assigned == zone.zone_id) {
                ++row.truth;
            }
        }
        report.zones.push_back(std::move(row));
    }
    return report;
}

std::string scene_json(const StreetScene& scene) {
    json kerb = json::array();
    for (const LatLon& v : scene.street.kerb) {
        kerb.push_back(latlon_obj(v));
    }
    json objects = json::array();
    for (const SceneObject& object : scene.objects) {
        objects.push_back({{"kind", to_string(object.kind)},
                           {"start_m", object.start_m},
                           {"length_m", object.length_m},
                           {"lateral_cm", object.lateral_cm}});
    }
    json zones = json::array();
    for (const ParkingZone& zone : scene.zones) {
        zones.push_back(zone_obj(zone));
    }
    json doc{{"street", {{"kerb", kerb}, {"background_cm", scene.street.background_cm}}},
             {"objects", objects},
             {"zones", zones},
             {"signatures", json::parse(signatures_json(scene.signatures))}};
    return doc.dump(2);
}

StreetScene parse_scene_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(Error::Code::malformed_record, std::string("invalid scene JSON: ") + e.what());
    }
    StreetScene scene;
    try {
        for (const auto& v : doc.at("street").at("kerb")) {
            scene.street.kerb.push_back(latlon_from_obj(v));
        }
        scene.street.background_cm = doc.at("street").value("background_cm", 500.0);
        for (const auto& o : doc.value("objects", json::array())) {
            scene.objects.push_back({object_kind_from_string(o.at("kind").get<std::string>()),
                                     o.at("start_m").get<double>(), o.at("length_m").get<double>(),
                                     o.at("lateral_cm").get<double>()});
        }
        for (const auto& z : doc.value("zones", json::array())) {
            scene.zones.push_back(zone_from_obj(z));
        }
        if (doc.contains("signatures")) {
            scene.signatures = parse_signatures_json(doc["signatures"].dump());
        }
    } catch (const json::exception& e) {
        throw Error(Error::Code::malformed_record, std::string("invalid scene field: ") + e.what());
    }
    scene.validate();
    return scene;
}

StreetScene load_scene_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Error::Code::io_failure, "cannot open scene file " + path.string());
    }
    return parse_scene_json(std::string(std::istreambuf_iterator<char>(in), {}));
}

void save_scene_json(const std::filesystem::path& path, const StreetScene& scene) {
    std::ofstream out(path);
    if (!out) {
        throw Error(Error::Code::io_failure, "cannot write scene file " + path.string());
    }
    out << scene_json(scene) << '\n';
}

std::string noise_model_json(const NoiseModel& noise) {
    return json{{"distance_sigma_cm", noise.distance_sigma_cm},
                {"gps_drift",
                 {{"mode", drift_mode_name(noise.gps_drift.mode)},
                  {"magnitude_m", noise.gps_drift.magnitude_m},
                  {"bearing_deg", noise.gps_drift.bearing_deg}}},
                {"dropout", noise.dropout}}
        .dump(2);
}

NoiseModel parse_noise_model_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(Error::Code::malformed_record, std::string("invalid noise JSON: ") + e.what());
    }
    NoiseModel noise;
    try {
        noise.distance_sigma_cm = doc.value("distance_sigma_cm", 5.0);
        if (doc.contains("gps_drift")) {
            const auto& drift = doc["gps_drift"];
            noise.gps_drift.mode = drift_mode_from_string(drift.value("mode", "none"));
            noise.gps_drift.magnitude_m = drift.value("magnitude_m", 0.0);
            noise.gps_drift.bearing_deg = drift.value("bearing_deg", 90.0);
        }
        noise.dropout = doc.value("dropout", 0.0);
    } catch (const json::exception& e) {
        throw Error(Error::Code::malformed_record, std::string("invalid noise field: ") + e.what());
    }
    noise.validate();
    return noise;
}

NoiseModel load_noise_model_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Error::Code::io_failure, "cannot open noise file " + path.string());
    }
    return parse_noise_model_json(std::string(std::istreambuf_iterator<char>(in), {}));
}

std::string ground_truth_json(const GroundTruth& truth) {
    json cars = json::array();
    for (const TruthCar& car : truth.cars) {
        cars.push_back({{"lat", car.anchor.lat},
                        {"lon", car.anchor.lon},
                        {"start_m", car.start_m},
                        {"length_m", car.length_m}});
    }
    json spaces = json::array();
    for (const TruthSpace& space : truth.spaces) {
        spaces.push_back({{"lat", space.anchor.lat},
                          {"lon", space.anchor.lon},
                          {"start_m", space.start_m},
                          {"length_m", space.length_m}});
    }
    return json{{"run_id", truth.run_id}, {"cars", cars}, {"spaces", spaces}}.dump(2);
}

GroundTruth parse_ground_truth_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(Error::Code::malformed_record, std::string("invalid truth JSON: ") + e.what());
    }
    GroundTruth truth;
    try {
        truth.run_id = doc.value("run_id", std::string{});
        for (const auto& c : doc.value("cars", json::array())) {
            truth.cars.push_back({latlon_from_obj(c), c.at("start_m").get<double>(),
                                  c.at("length_m").get<double>()});
        }
        for (const auto& s : doc.value("spaces", json::array())) {
            truth.spaces.push_back({latlon_from_obj(s), s.at("start_m").get<double>(),
                                    s.at("length_m").get<double>()});
        }
    } catch (const json::exception& e) {
        throw Error(Error::Code::malformed_record, std::string("invalid truth field: ") + e.what());
    }
    return truth;
}

GroundTruth load_ground_truth_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Error::Code::io_failure, "cannot open truth file " + path.string());
    }
    return parse_ground_truth_json(std::string(std::istreambuf_iterator<char>(in), {}));
}

std::string eval_report_json(const EvalReport& report) {
    json zones = json::array();
    for (const EvalZoneRow& row : report.zones) {
        zones.push_back({{"zone_id", row.zone_id},
                         {"detected", row.detected},
                         {"truth", row.truth},
                         {"capacity", row.capacity}});
    }
    return json{{"tp", report.tp},
                {"fp", report.fp},
                {"fn", report.fn},
                {"detection_rate", report.detection_rate},
                {"paper_accuracy", report.paper_accuracy},
                {"precision", report.precision},
                {"zones", zones}}
        .dump(2);
}

std::string eval_report_table(const EvalReport& report) {
    std::string out;
    if (!report.zones.empty()) {
        out += "zone        detected/truth/capacity\n";
        for (const EvalZoneRow& row : report.zones) {
            out += row.zone_id;
            out.append(row.zone_id.size() < 12 ? 12 - row.zone_id.size() : 1, ' ');
            out += std::to_string(row.detected) + "/" + std::to_string(row.truth) + "/" +
                   std::to_string(row.capacity) + "\n";
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "TP %d  FP %d  FN %d\ndetection rate %.1f%%  accuracy %.1f%%  precision %.1f%%\n",
                  report.tp, report.fp, report.fn, report.detection_rate * 100.0,
                  report.paper_accuracy * 100.0, report.precision * 100.0);
    out += buf;
    return out;
}

}  // namespace curbscan
