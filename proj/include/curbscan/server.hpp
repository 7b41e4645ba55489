#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "curbscan/aggregate.hpp"

namespace curbscan {

// Plain request/response ingest endpoint over the occupancy map:
//   POST /ingest?wall_clock=...[&run_id=...]   body: detections JSONL
//   GET  /zones/{id}                           zone state as JSON
//   GET  /map                                  GeoJSON snapshot
// Single writer; reads always see fully applied runs.
class MapServer {
  public:
    explicit MapServer(std::vector<ParkingZone> zones,
                       std::optional<std::filesystem::path> run_log = std::nullopt);
    ~MapServer();

    MapServer(const MapServer&) = delete;
    MapServer& operator=(const MapServer&) = delete;

    // Binds (port 0 picks an ephemeral port), serves on a background thread,
    // returns the bound port.
    int start(const std::string& host, int port);
    void stop();

    std::string snapshot_geojson() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace curbscan
