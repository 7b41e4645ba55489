#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "curbscan/classifier.hpp"
#include "curbscan/geo.hpp"

namespace curbscan {

// A surveyed kerb zone: buffered polyline along the kerb plus its capacity.
struct ParkingZone {
    std::string zone_id;
    std::vector<LatLon> kerb_line;
    int capacity{0};
    double buffer_m{3.0};

    void validate() const;  // throws Error{invalid_argument}
};

// Zones file: GeoJSON FeatureCollection of LineString features with
// properties {zone_id, capacity, buffer_m}.
std::vector<ParkingZone> parse_zones_geojson(const std::string& text);
std::vector<ParkingZone> load_zones_geojson(const std::filesystem::path& path);
std::string zones_geojson(std::span<const ParkingZone> zones);
void save_zones_geojson(const std::filesystem::path& path, std::span<const ParkingZone> zones);

struct Space {
    LatLon anchor;
    double length_m{0.0};
    std::optional<std::string> zone_id;
    std::int64_t timestamp_ms{0};  // gap start
};

// Zone whose kerb line lies within its buffer of the point; nearest wins when
// buffers overlap, nullopt when no zone is close enough.
std::optional<std::string> assign_zone(const LatLon& point, std::span<const ParkingZone> zones);

// Parked detections outside every zone buffer, marked illegal.
std::vector<Detection> flag_illegal(std::span<const Detection> parked,
                                    std::span<const ParkingZone> zones);

// Capacity minus detected vehicles, clamped at zero.
int spaces_by_capacity(const ParkingZone& zone, int parked_in_zone);

// Gaps between consecutive detected obstacles, measured as time difference
// times mean speed over the gap; gaps shorter than min_space are dropped.
// Obstacles are the parked detections plus every other in-lane sonar return
// (closest echo within the parking band), so unclassified clutter such as a
// pole still bounds the space either side of it. min_space defaults to the
// minimum vehicle length.
std::vector<Space> variable_length_spaces(const Trace& trace, std::span<const Detection> parked,
                                          const ClassifierConfig& config,
                                          std::optional<double> min_space_m = std::nullopt);

}  // namespace curbscan
