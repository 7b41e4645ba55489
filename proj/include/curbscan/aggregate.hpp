#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "curbscan/classifier.hpp"
#include "curbscan/spacemap.hpp"

namespace curbscan {

// What one run reports for one zone.
struct ZoneObservation {
    int parked{0};
    int spaces_by_capacity{0};
    std::vector<Space> variable_spaces;
};

// One ingest event: everything a single pass contributes to the map.
struct RunReport {
    std::string run_id;
    std::int64_t wall_clock{0};  // unix seconds
    std::map<std::string, ZoneObservation> zones;
    std::vector<Detection> illegal;  // parked outside every zone buffer
};

// Groups a run's detections by zone buffer: parked counts, capacity
// subtraction, variable spaces (empty_space detections carrying a length),
// and unzoned illegal vehicles.
RunReport assemble_run_report(std::span<const Detection> detections,
                              std::span<const ParkingZone> zones, std::string run_id,
                              std::int64_t wall_clock);

// Same, but with the trace available every zone the vehicle actually passed
// is marked observed, so a fully empty zone still reports parked = 0.
RunReport assemble_run_report(const Trace& trace, std::span<const Detection> detections,
                              std::span<const ParkingZone> zones, std::int64_t wall_clock);

struct ZoneState {
    ZoneObservation observation;
    std::int64_t last_update{0};
    std::string source_run_id;
};

struct IngestIssue {
    enum class Reason { stale_run, unknown_zone };
    Reason reason{Reason::stale_run};
    std::string zone_id;
    std::string run_id;
    std::string message;
};

// Crowdsourced occupancy state: per-zone latest-wins replacement keyed by the
// run's wall clock. Writers must be serialized; reads see full runs only.
class OccupancyMap {
  public:
    OccupancyMap() = default;
    explicit OccupancyMap(std::vector<ParkingZone> zones);

    // Replaces each touched zone's state wholesale unless the report is older
    // than what the zone already holds (reported per zone, not fatal).
    std::vector<IngestIssue> ingest(const RunReport& report);

    std::optional<ZoneState> query_zone(const std::string& zone_id) const;

    const std::map<std::string, ParkingZone>& zones() const { return zones_; }
    const std::map<std::string, ZoneState>& states() const { return states_; }
    std::vector<Detection> illegal_detections() const;  // ordered by (run_id, timestamp)

    // FeatureCollection: one LineString per observed zone, one Point per
    // illegal detection. Deterministic: repeated export is byte-identical.
    std::string export_geojson() const;
    static OccupancyMap import_geojson(const std::string& text);

  private:
    std::map<std::string, ParkingZone> zones_;
    std::map<std::string, ZoneState> states_;
    std::map<std::string, std::vector<Detection>> illegal_by_run_;
};

void write_snapshot_atomic(const std::filesystem::path& path, const std::string& geojson);

// Append-only run log; replaying it rebuilds the map.
void append_run_log(const std::filesystem::path& path, const RunReport& report);
std::vector<RunReport> read_run_log(const std::filesystem::path& path);
OccupancyMap replay_run_log(const std::filesystem::path& path, std::vector<ParkingZone> zones);

std::string run_report_to_json(const RunReport& report);
RunReport run_report_from_json(const std::string& text);

struct DetectionMetrics {
    double detection_rate{0.0};   // TP / GT
    double paper_accuracy{0.0};   // TP / (GT + FP)
    double precision{0.0};        // TP / (TP + FP)
};

// Throws Error{zero_ground_truth}; requires GT >= TP >= 0 and FP >= 0.
DetectionMetrics detection_metrics(int true_positives, int ground_truth, int false_positives);

}  // namespace curbscan
