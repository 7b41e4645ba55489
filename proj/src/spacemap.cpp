#include "curbscan/spacemap.hpp"

#include <algorithm>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "curbscan/errors.hpp"

namespace curbscan {

namespace {

nlohmann::json zone_to_feature(const ParkingZone& zone) {
    nlohmann::json coords = nlohmann::json::array();
    for (const LatLon& v : zone.kerb_line) {
        coords.push_back({v.lon, v.lat});
    }
    return {
        {"type", "Feature"},
        {"geometry", {{"type", "LineString"}, {"coordinates", coords}}},
        {"properties",
         {{"zone_id", zone.zone_id}, {"capacity", zone.capacity}, {"buffer_m", zone.buffer_m}}},
    };
}

ParkingZone zone_from_feature(const nlohmann::json& feature) {
    ParkingZone zone;
    const auto& geometry = feature.at("geometry");
    if (geometry.at("type").get<std::string>() != "LineString") {
        throw Error(Error::Code::malformed_record, "zone geometry must be a LineString");
    }
    for (const auto& pair : geometry.at("coordinates")) {
        zone.kerb_line.push_back({pair.at(1).get<double>(), pair.at(0).get<double>()});
    }
    const auto& properties = feature.at("properties");
    zone.zone_id = properties.at("zone_id").get<std::string>();
    zone.capacity = properties.at("capacity").get<int>();
    zone.buffer_m = properties.value("buffer_m", 3.0);
    zone.validate();
    return zone;
}

}  // namespace

void ParkingZone::validate() const {
    if (zone_id.empty()) {
        throw Error(Error::Code::invalid_argument, "zone_id must be non-empty", "zone_id");
    }
    if (kerb_line.size() < 2) {
        throw Error(Error::Code::invalid_argument,
                    "zone " + zone_id + " needs at least 2 kerb vertices", "kerb_line");
    }
    if (capacity < 0) {
        throw Error(Error::Code::invalid_argument, "zone " + zone_id + " capacity must be >= 0",
                    "capacity");
    }
    if (!(buffer_m > 0.0)) {
        throw Error(Error::Code::invalid_argument, "zone " + zone_id + " buffer must be positive",
                    "buffer_m");
    }
}

std::vector<ParkingZone> parse_zones_geojson(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Error::Code::malformed_record, std::string("invalid zones GeoJSON: ") + e.what());
    }
    std::vector<ParkingZone> zones;
    try {
        if (doc.at("type").get<std::string>() != "FeatureCollection") {
            throw Error(Error::Code::malformed_record, "zones file must be a FeatureCollection");
        }
        for (const auto& feature : doc.at("features")) {
            zones.push_back(zone_from_feature(feature));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(Error::Code::malformed_record, std::string("invalid zones field: ") + e.what());
    }
    return zones;
}

std::vector<ParkingZone> load_zones_geojson(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Error::Code::io_failure, "cannot open zones file " + path.string());
    }
    return parse_zones_geojson(std::string(std::istreambuf_iterator<char>(in), {}));
}

std::string zones_geojson(std::span<const ParkingZone> zones) {
    nlohmann::json features = nlohmann::json::array();
    for (const ParkingZone& zone : zones) {
        features.push_back(zone_to_feature(zone));
    }
    return nlohmann::json{{"type", "FeatureCollection"}, {"features", features}}.dump(2);
}

void save_zones_geojson(const std::filesystem::path& path, std::span<const ParkingZone> zones) {
    std::ofstream out(path);
    if (!out) {
        throw Error(Error::Code::io_failure, "cannot write zones file " + path.string());
    }
    out << zones_geojson(zones) << '\n';
}

std::optional<std::string> assign_zone(const LatLon& point, std::span<const ParkingZone> zones) {
    std::optional<std::string> best;
    double best_distance = std::numeric_limits<double>::infinity();
    for (const ParkingZone& zone : zones) {
        const double d = point_to_polyline_m(point, zone.kerb_line);
        if (d <= zone.buffer_m && d < best_distance) {
            best = zone.zone_id;
            best_distance = d;
        }
    }
    return best;
}

std::vector<Detection> flag_illegal(std::span<const Detection> parked,
                                    std::span<const ParkingZone> zones) {
    std::vector<Detection> illegal;
    for (const Detection& d : parked) {
        if (d.kind != DetectionKind::parked_vehicle) {
            continue;
        }
        if (!assign_zone(d.anchor, zones)) {
            Detection flagged = d;
            flagged.illegal = true;
            illegal.push_back(std::move(flagged));
        }
    }
    return illegal;
}

int spaces_by_capacity(const ParkingZone& zone, int parked_in_zone) {
    if (parked_in_zone < 0) {
        throw Error(Error::Code::invalid_argument, "parked count must be >= 0");
    }
    return std::max(0, zone.capacity - parked_in_zone);
}

std::vector<Space> variable_length_spaces(const Trace& trace, std::span<const Detection> parked,
                                          const ClassifierConfig& config,
                                          std::optional<double> min_space_m) {
    const double min_space = min_space_m.value_or(config.length_min_m);
    if (!(min_space > 0.0)) {
        throw Error(Error::Code::invalid_argument, "min_space must be positive");
    }
    std::vector<Space> spaces;
    if (trace.size() < 2) {
        return spaces;
    }

    const double background = background_distance_cm(trace);
    const std::vector<IndexRange> plateaus =
        segment_plateaus(trace, background, config.background_gap_cm);
    const std::vector<double> positions = cumulative_positions(trace);

    // Spaces are bounded by every detected in-lane obstacle, not just the
    // classified vehicles: a plateau bounds a gap when its closest echo is
    // within the parking band. Parked detections are mapped back to their
    // plateaus; hand-supplied ones outside any plateau occupy one sample.
    std::vector<IndexRange> obstacles;
    for (const IndexRange& plateau : plateaus) {
        double closest = trace.points[plateau.first].distance_cm;
        for (std::size_t i = plateau.first; i <= plateau.last; ++i) {
            closest = std::min(closest, trace.points[i].distance_cm);
        }
        if (closest <= config.distance_max_cm) {
            obstacles.push_back(plateau);
        }
    }
    for (const Detection& d : parked) {
        if (d.kind != DetectionKind::parked_vehicle) {
            continue;
        }
        std::size_t index = 0;
        while (index + 1 < trace.size() && trace.points[index + 1].timestamp_ms <= d.timestamp_ms) {
            ++index;
        }
        IndexRange extent{index, index};
        for (const IndexRange& plateau : plateaus) {
            if (index >= plateau.first && index <= plateau.last) {
                extent = plateau;
                break;
            }
        }
        obstacles.push_back(extent);
    }
    std::sort(obstacles.begin(), obstacles.end(),
              [](const IndexRange& a, const IndexRange& b) { return a.first < b.first; });
    obstacles.erase(std::unique(obstacles.begin(), obstacles.end(),
                                [](const IndexRange& a, const IndexRange& b) {
                                    return a.first == b.first && a.last == b.last;
                                }),
                    obstacles.end());

    for (std::size_t k = 0; k + 1 < obstacles.size(); ++k) {
        const std::size_t gap_start = obstacles[k].last + 1;  // first sample past obstacle k
        const std::size_t next_start = obstacles[k + 1].first;
        if (gap_start >= next_start || gap_start >= trace.size()) {
            continue;
        }
        const double length = positions[next_start] - positions[gap_start];
        if (length >= min_space) {
            spaces.push_back({trace.points[gap_start].position(), length, std::nullopt,
                              trace.points[gap_start].timestamp_ms});
        }
    }
    return spaces;
}

}  // namespace curbscan
