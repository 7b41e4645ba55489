#include "curbscan/aggregate.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "curbscan/errors.hpp"

namespace curbscan {

namespace {

using nlohmann::json;

json detection_obj(const Detection& d) { return json::parse(detection_to_json(d)); }

Detection detection_from_obj(const json& doc) { return detection_from_json(doc.dump()); }

json space_obj(const Space& s) {
    return {{"lat", s.anchor.lat}, {"lon", s.anchor.lon}, {"length_m", s.length_m}};
}

Space space_from_obj(const json& doc) {
    return {{doc.at("lat").get<double>(), doc.at("lon").get<double>()},
            doc.at("length_m").get<double>(),
            std::nullopt};
}

json observation_obj(const ZoneObservation& obs) {
    json spaces = json::array();
    for (const Space& s : obs.variable_spaces) {
        spaces.push_back(space_obj(s));
    }
    return {{"parked", obs.parked},
            {"spaces_by_capacity", obs.spaces_by_capacity},
            {"variable_spaces", spaces}};
}

ZoneObservation observation_from_obj(const json& doc) {
    ZoneObservation obs;
    obs.parked = doc.at("parked").get<int>();
    obs.spaces_by_capacity = doc.at("spaces_by_capacity").get<int>();
    for (const auto& s : doc.at("variable_spaces")) {
        obs.variable_spaces.push_back(space_from_obj(s));
    }
    return obs;
}

}  // namespace

RunReport assemble_run_report(std::span<const Detection> detections,
                              std::span<const ParkingZone> zones, std::string run_id,
                              std::int64_t wall_clock) {
    RunReport report;
    report.run_id = std::move(run_id);
    report.wall_clock = wall_clock;

    for (const Detection& d : detections) {
        const std::optional<std::string> zone_id = assign_zone(d.anchor, zones);
        if (d.kind == DetectionKind::parked_vehicle) {
            if (zone_id) {
                report.zones[*zone_id].parked += 1;
            } else {
                Detection flagged = d;
                flagged.illegal = true;
                if (flagged.run_id.empty()) {
                    flagged.run_id = report.run_id;
                }
                report.illegal.push_back(std::move(flagged));
            }
        } else if (zone_id) {
            // A measured length marks a variable-length space; bare
            // empty-space detections still mark the zone as observed.
            if (d.length_m) {
                report.zones[*zone_id].variable_spaces.push_back(
                    {d.anchor, *d.length_m, zone_id});
            } else {
                report.zones[*zone_id];
            }
        }
    }

    for (auto& [zone_id, obs] : report.zones) {
        const auto it = std::find_if(zones.begin(), zones.end(), [&](const ParkingZone& z) {
            return z.zone_id == zone_id;
        });
        obs.spaces_by_capacity = spaces_by_capacity(*it, obs.parked);
    }
    return report;
}

RunReport assemble_run_report(const Trace& trace, std::span<const Detection> detections,
                              std::span<const ParkingZone> zones, std::int64_t wall_clock) {
    RunReport report = assemble_run_report(detections, zones, trace.run_id, wall_clock);
    for (const ParkingZone& zone : zones) {
        if (report.zones.contains(zone.zone_id)) {
            continue;
        }
        for (const TracePoint& p : trace.points) {
            if (point_to_polyline_m(p.position(), zone.kerb_line) <= zone.buffer_m) {
                report.zones[zone.zone_id].spaces_by_capacity = zone.capacity;
                break;
            }
        }
    }
    return report;
}

OccupancyMap::OccupancyMap(std::vector<ParkingZone> zones) {
    for (ParkingZone& zone : zones) {
        zone.validate();
        std::string id = zone.zone_id;
        zones_.emplace(std::move(id), std::move(zone));
    }
}

std::vector<IngestIssue> OccupancyMap::ingest(const RunReport& report) {
    std::vector<IngestIssue> issues;
    for (const auto& [zone_id, observation] : report.zones) {
        if (!zones_.contains(zone_id)) {
            issues.push_back({IngestIssue::Reason::unknown_zone, zone_id, report.run_id,
                              "zone " + zone_id + " is not in the zone set; observation dropped"});
            continue;
        }
        const auto it = states_.find(zone_id);
        if (it != states_.end() && report.wall_clock < it->second.last_update) {
            issues.push_back({IngestIssue::Reason::stale_run, zone_id, report.run_id,
                              "run " + report.run_id + " (" + std::to_string(report.wall_clock) +
                                  ") is older than zone " + zone_id + " state (" +
                                  std::to_string(it->second.last_update) + "); kept existing"});
            continue;
        }
        states_[zone_id] = {observation, report.wall_clock, report.run_id};
    }
    if (!report.illegal.empty()) {
        illegal_by_run_[report.run_id] = report.illegal;
    } else {
        illegal_by_run_.erase(report.run_id);
    }
    return issues;
}

std::optional<ZoneState> OccupancyMap::query_zone(const std::string& zone_id) const {
    const auto it = states_.find(zone_id);
    if (it == states_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::vector<Detection> OccupancyMap::illegal_detections() const {
    std::vector<Detection> all;
    for (const auto& [run_id, detections] : illegal_by_run_) {
        all.insert(all.end(), detections.begin(), detections.end());
    }
    std::stable_sort(all.begin(), all.end(), [](const Detection& a, const Detection& b) {
        return std::tie(a.run_id, a.timestamp_ms) < std::tie(b.run_id, b.timestamp_ms);
    });
    return all;
}

std::string OccupancyMap::export_geojson() const {
    json features = json::array();
    for (const auto& [zone_id, state] : states_) {
        const ParkingZone& zone = zones_.at(zone_id);
        json coords = json::array();
        for (const LatLon& v : zone.kerb_line) {
            coords.push_back({v.lon, v.lat});
        }
        json spaces = json::array();
        for (const Space& s : state.observation.variable_spaces) {
            spaces.push_back(space_obj(s));
        }
        features.push_back({
            {"type", "Feature"},
            {"geometry", {{"type", "LineString"}, {"coordinates", coords}}},
            {"properties",
             {{"zone_id", zone_id},
              {"capacity", zone.capacity},
              {"buffer_m", zone.buffer_m},
              {"parked", state.observation.parked},
              {"spaces_by_capacity", state.observation.spaces_by_capacity},
              {"variable_spaces", spaces},
              {"last_update", state.last_update},
              {"run_id", state.source_run_id}}},
        });
    }
    for (const Detection& d : illegal_detections()) {
        features.push_back({
            {"type", "Feature"},
            {"geometry", {{"type", "Point"}, {"coordinates", {d.anchor.lon, d.anchor.lat}}}},
            {"properties",
             {{"kind", "illegal_parking"},
              {"run_id", d.run_id},
              {"timestamp_ms", d.timestamp_ms}}},
        });
    }
    return json{{"type", "FeatureCollection"}, {"features", features}}.dump(2);
}

OccupancyMap OccupancyMap::import_geojson(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(Error::Code::malformed_record, std::string("invalid snapshot JSON: ") + e.what());
    }
    OccupancyMap map;
    try {
        if (doc.at("type").get<std::string>() != "FeatureCollection") {
            throw Error(Error::Code::malformed_record, "snapshot must be a FeatureCollection");
        }
        for (const auto& feature : doc.at("features")) {
            const auto& geometry = feature.at("geometry");
            const auto& properties = feature.at("properties");
            const std::string type = geometry.at("type").get<std::string>();
            if (type == "LineString") {
                ParkingZone zone;
                zone.zone_id = properties.at("zone_id").get<std::string>();
                zone.capacity = properties.at("capacity").get<int>();
                zone.buffer_m = properties.at("buffer_m").get<double>();
                for (const auto& pair : geometry.at("coordinates")) {
                    zone.kerb_line.push_back({pair.at(1).get<double>(), pair.at(0).get<double>()});
                }
                ZoneState state;
                state.observation.parked = properties.at("parked").get<int>();
                state.observation.spaces_by_capacity =
                    properties.at("spaces_by_capacity").get<int>();
                for (const auto& s : properties.at("variable_spaces")) {
                    state.observation.variable_spaces.push_back(space_from_obj(s));
                }
                state.last_update = properties.at("last_update").get<std::int64_t>();
                state.source_run_id = properties.at("run_id").get<std::string>();
                map.states_[zone.zone_id] = std::move(state);
                map.zones_[zone.zone_id] = std::move(zone);
            } else if (type == "Point") {
                Detection d;
                d.kind = DetectionKind::parked_vehicle;
                d.illegal = true;
                d.anchor = {geometry.at("coordinates").at(1).get<double>(),
                            geometry.at("coordinates").at(0).get<double>()};
                d.run_id = properties.at("run_id").get<std::string>();
                d.timestamp_ms = properties.at("timestamp_ms").get<std::int64_t>();
                map.illegal_by_run_[d.run_id].push_back(std::move(d));
            } else {
                throw Error(Error::Code::malformed_record,
                            "unexpected snapshot geometry type " + type);
            }
        }
    } catch (const json::exception& e) {
        throw Error(Error::Code::malformed_record,
                    std::string("invalid snapshot field: ") + e.what());
    }
    return map;
}

void write_snapshot_atomic(const std::filesystem::path& path, const std::string& geojson) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) {
            throw Error(Error::Code::io_failure, "cannot write snapshot " + tmp.string());
        }
        out << geojson << '\n';
    }
    std::filesystem::rename(tmp, path);
}

std::string run_report_to_json(const RunReport& report) {
    json zones = json::object();
    for (const auto& [zone_id, obs] : report.zones) {
        zones[zone_id] = observation_obj(obs);
    }
    json illegal = json::array();
    for (const Detection& d : report.illegal) {
        illegal.push_back(detection_obj(d));
    }
    return json{{"wall_clock", report.wall_clock},
                {"run_id", report.run_id},
                {"zones", zones},
                {"illegal", illegal}}
        .dump();
}

RunReport run_report_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(Error::Code::malformed_record, std::string("invalid run report: ") + e.what());
    }
    RunReport report;
    try {
        report.wall_clock = doc.at("wall_clock").get<std::int64_t>();
        report.run_id = doc.at("run_id").get<std::string>();
        for (const auto& [zone_id, obs] : doc.at("zones").items()) {
            report.zones[zone_id] = observation_from_obj(obs);
        }
        for (const auto& d : doc.at("illegal")) {
            report.illegal.push_back(detection_from_obj(d));
        }
    } catch (const json::exception& e) {
        throw Error(Error::Code::malformed_record,
                    std::string("invalid run report field: ") + e.what());
    }
    return report;
}

void append_run_log(const std::filesystem::path& path, const RunReport& report) {
    std::ofstream out(path, std::ios::app);
    if (!out) {
        throw Error(Error::Code::io_failure, "cannot append to run log " + path.string());
    }
    out << run_report_to_json(report) << '\n';
}

std::vector<RunReport> read_run_log(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Error::Code::io_failure, "cannot open run log " + path.string());
    }
    std::vector<RunReport> reports;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        reports.push_back(run_report_from_json(line));
    }
    return reports;
}

OccupancyMap replay_run_log(const std::filesystem::path& path, std::vector<ParkingZone> zones) {
    OccupancyMap map(std::move(zones));
    for (const RunReport& report : read_run_log(path)) {
        map.ingest(report);
    }
    return map;
}

DetectionMetrics detection_metrics(int true_positives, int ground_truth, int false_positives) {
    if (true_positives < 0 || false_positives < 0 || ground_truth < true_positives) {
        throw Error(Error::Code::invalid_argument,
                    "counts must satisfy GT >= TP >= 0 and FP >= 0");
    }
    if (ground_truth == 0) {
        throw Error(Error::Code::zero_ground_truth, "ground truth count is zero");
    }
    DetectionMetrics m;
    m.detection_rate = static_cast<double>(true_positives) / ground_truth;
    m.paper_accuracy = static_cast<double>(true_positives) / (ground_truth + false_positives);
    m.precision = (true_positives + false_positives) > 0
                      ? static_cast<double>(true_positives) / (true_positives + false_positives)
                      : 1.0;
    return m;
}

}  // namespace curbscan
