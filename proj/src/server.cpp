#include "curbscan/server.hpp"

#include <mutex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "curbscan/errors.hpp"

namespace curbscan {

namespace {

using nlohmann::json;

json zone_state_json(const std::string& zone_id, const ZoneState& state) {
    json spaces = json::array();
    for (const Space& s : state.observation.variable_spaces) {
        spaces.push_back({{"lat", s.anchor.lat}, {"lon", s.anchor.lon}, {"length_m", s.length_m}});
    }
    return {{"zone_id", zone_id},
            {"parked", state.observation.parked},
            {"spaces_by_capacity", state.observation.spaces_by_capacity},
            {"variable_spaces", spaces},
            {"last_update", state.last_update},
            {"run_id", state.source_run_id}};
}

}  // namespace

struct MapServer::Impl {
    std::vector<ParkingZone> zones;
    OccupancyMap map;
    std::optional<std::filesystem::path> run_log;
    mutable std::mutex mutex;
    httplib::Server server;
    std::thread worker;

    explicit Impl(std::vector<ParkingZone> zone_defs, std::optional<std::filesystem::path> log)
        : zones(std::move(zone_defs)), map(zones), run_log(std::move(log)) {
        server.Post("/ingest", [this](const httplib::Request& req, httplib::Response& res) {
            handle_ingest(req, res);
        });
        server.Get(R"(/zones/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
            const std::string zone_id = req.matches[1];
            std::lock_guard lock(mutex);
            const auto state = map.query_zone(zone_id);
            if (!state) {
                res.status = 404;
                res.set_content(json{{"error", "unknown zone " + zone_id}}.dump(), "application/json");
                return;
            }
            res.set_content(zone_state_json(zone_id, *state).dump(), "application/json");
        });
        server.Get("/map", [this](const httplib::Request&, httplib::Response& res) {
            std::lock_guard lock(mutex);
            res.set_content(map.export_geojson(), "application/geo+json");
        });
    }

    void handle_ingest(const httplib::Request& req, httplib::Response& res) {
        if (!req.has_param("wall_clock")) {
            res.status = 400;
            res.set_content(json{{"error", "wall_clock query parameter required"}}.dump(),
                            "application/json");
            return;
        }
        std::int64_t wall_clock = 0;
        try {
            wall_clock = std::stoll(req.get_param_value("wall_clock"));
        } catch (const std::exception&) {
            res.status = 400;
            res.set_content(json{{"error", "wall_clock must be an integer"}}.dump(),
                            "application/json");
            return;
        }

        std::vector<Detection> detections;
        try {
            std::istringstream body(req.body);
            detections = read_detections_jsonl(body);
        } catch (const Error& e) {
            res.status = 400;
            res.set_content(json{{"error", e.what()}}.dump(), "application/json");
            return;
        }

        std::string run_id = req.get_param_value("run_id");
        if (run_id.empty() && !detections.empty()) {
            run_id = detections.front().run_id;
        }
        if (run_id.empty()) {
            res.status = 400;
            res.set_content(json{{"error", "run_id missing (no detections carry one)"}}.dump(),
                            "application/json");
            return;
        }

        const RunReport report = assemble_run_report(detections, zones, run_id, wall_clock);
        json stale = json::array();
        json unknown = json::array();
        {
            std::lock_guard lock(mutex);
            for (const IngestIssue& issue : map.ingest(report)) {
                (issue.reason == IngestIssue::Reason::stale_run ? stale : unknown)
                    .push_back(issue.zone_id);
            }
            if (run_log) {
                append_run_log(*run_log, report);
            }
        }
        res.set_content(json{{"run_id", report.run_id},
                             {"zones_updated",
                              static_cast<int>(report.zones.size()) -
                                  static_cast<int>(stale.size() + unknown.size())},
                             {"stale", stale},
                             {"unknown", unknown},
                             {"illegal", static_cast<int>(report.illegal.size())}}
                            .dump(),
                        "application/json");
    }
};

MapServer::MapServer(std::vector<ParkingZone> zones, std::optional<std::filesystem::path> run_log)
    : impl_(std::make_unique<Impl>(std::move(zones), std::move(run_log))) {}

MapServer::~MapServer() { stop(); }

int MapServer::start(const std::string& host, int port) {
    int bound = port;
    if (port == 0) {
        bound = impl_->server.bind_to_any_port(host);
        if (bound < 0) {
            throw Error(Error::Code::io_failure, "cannot bind ingest server to " + host);
        }
    } else if (!impl_->server.bind_to_port(host, port)) {
        throw Error(Error::Code::io_failure,
                    "cannot bind ingest server to " + host + ":" + std::to_string(port));
    }
    impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return bound;
}

void MapServer::stop() {
    if (impl_ && impl_->worker.joinable()) {
        impl_->server.stop();
        impl_->worker.join();
    }
}

std::string MapServer::snapshot_geojson() const {
    std::lock_guard lock(impl_->mutex);
    return impl_->map.export_geojson();
}

}  // namespace curbscan
