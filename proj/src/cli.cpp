#include "curbscan/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "curbscan/aggregate.hpp"
#include "curbscan/calibrate.hpp"
#include "curbscan/classifier.hpp"
#include "curbscan/config.hpp"
#include "curbscan/errors.hpp"
#include "curbscan/fleet.hpp"
#include "curbscan/server.hpp"
#include "curbscan/simgen.hpp"
#include "curbscan/spacemap.hpp"
#include "curbscan/trace.hpp"

namespace curbscan {

namespace {

using nlohmann::json;

struct DetectOptions {
    std::string trace_path;
    bool paper_format{false};
    std::string zones_path;
    std::string config_path;
    std::string out_path;
    std::string report_path;
    std::string ingest_path;
    std::string run_id;
    std::int64_t wall_clock{0};
    double min_space{0.0};
};

struct SimulateOptions {
    std::string scene_path;
    std::string schedule_path;
    std::string noise_path;
    std::string out_dir;
    double speed_kmh{20.0};
    std::int64_t period_ms{kNominalSamplePeriodMs};
    std::uint64_t seed{42};
};

struct EvaluateOptions {
    std::string detections_path;
    std::string truth_path;
    std::string zones_path;
    std::string out_path;
    double radius_m{5.0};
    bool as_json{false};
};

struct CalibrateOptions {
    std::string trace_path;
    bool paper_format{false};
    std::string signatures_path;
    std::string config_path;
    std::string out_path;
};

struct MapOptions {
    std::string zones_path;
    std::string out_path;
    std::string log_path;
    std::string replay_path;
    std::vector<std::string> ingest_paths;
};

struct EstimateOptions {
    std::string params_path;
    std::string out_path;
    std::vector<double> updates_s;
    std::vector<double> speeds_kmh;
    std::vector<double> accuracies;
    bool as_json{false};
};

struct CruiseOptions {
    std::string params_path;
    std::string out_path;
    bool as_json{false};
};

struct ServeOptions {
    std::string zones_path;
    std::string log_path;
    std::string host{"127.0.0.1"};
    int port{8080};
};

ClassifierConfig resolve_config(const std::string& flag_path) {
    if (!flag_path.empty()) {
        return load_classifier_config(flag_path);
    }
    if (const char* env = std::getenv("CURBSCAN_CONFIG"); env != nullptr && *env != '\0') {
        return load_classifier_config(env);
    }
    return {};
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) {
        throw Error(Error::Code::io_failure, "cannot write " + path);
    }
    out << text;
    if (!text.empty() && text.back() != '\n') {
        out << '\n';
    }
}

int run_detect(const DetectOptions& options, std::ostream& out) {
    const ClassifierConfig config = resolve_config(options.config_path);
    const TraceFormat format = options.paper_format ? TraceFormat::paper : TraceFormat::csv;
    Trace trace = load_trace_file(options.trace_path, {options.run_id, ""}, format);

    std::vector<ParkingZone> zones;
    if (!options.zones_path.empty()) {
        zones = load_zones_geojson(options.zones_path);
    }

    ClassifyResult result = classify(trace, config);
    for (const std::string& warning : result.warnings) {
        out << "warning: " << warning << '\n';
    }

    if (!zones.empty()) {
        for (Detection& d : result.parked) {
            d.illegal = !assign_zone(d.anchor, zones).has_value();
        }
    }

    const std::optional<double> min_space =
        options.min_space > 0.0 ? std::optional<double>(options.min_space) : std::nullopt;
    const std::vector<Space> spaces =
        variable_length_spaces(trace, result.parked, config, min_space);

    std::vector<Detection> detections = result.parked;
    detections.insert(detections.end(), result.empty.begin(), result.empty.end());
    for (const Space& space : spaces) {
        detections.push_back({DetectionKind::empty_space, space.anchor, space.timestamp_ms,
                              space.length_m, trace.run_id, false});
    }
    write_detections_jsonl_file(options.out_path, detections);

    const RunReport report = assemble_run_report(trace, detections, zones, options.wall_clock);

    int illegal = 0;
    for (const Detection& d : result.parked) {
        illegal += d.illegal ? 1 : 0;
    }
    out << "run " << trace.run_id << ": " << result.parked.size() << " parked, "
        << result.empty.size() << " empty regions, " << spaces.size() << " variable spaces, "
        << illegal << " illegal\n";
    for (const auto& [zone_id, obs] : report.zones) {
        out << "  " << zone_id << ": parked " << obs.parked << ", spaces by capacity "
            << obs.spaces_by_capacity << ", variable spaces " << obs.variable_spaces.size()
            << '\n';
    }

    if (!options.report_path.empty()) {
        json zone_report = json::object();
        for (const auto& [zone_id, obs] : report.zones) {
            json vspaces = json::array();
            for (const Space& s : obs.variable_spaces) {
                vspaces.push_back(
                    {{"lat", s.anchor.lat}, {"lon", s.anchor.lon}, {"length_m", s.length_m}});
            }
            zone_report[zone_id] = {{"parked", obs.parked},
                                    {"spaces_by_capacity", obs.spaces_by_capacity},
                                    {"variable_spaces", vspaces}};
        }
        write_text_file(options.report_path,
                        json{{"run_id", trace.run_id},
                             {"parked", result.parked.size()},
                             {"empty_regions", result.empty.size()},
                             {"illegal", illegal},
                             {"zones", zone_report},
                             {"warnings", result.warnings}}
                            .dump(2));
    }
    if (!options.ingest_path.empty()) {
        write_text_file(options.ingest_path, run_report_to_json(report));
    }
    return 0;
}

int run_simulate(const SimulateOptions& options, std::ostream& out) {
    NoiseModel noise;
    if (!options.noise_path.empty()) {
        noise = load_noise_model_json(options.noise_path);
    }
    const std::filesystem::path out_dir(options.out_dir);
    std::filesystem::create_directories(out_dir);

    std::vector<ScheduleEntry> schedule;
    if (!options.schedule_path.empty()) {
        std::ifstream in(options.schedule_path);
        if (!in) {
            throw Error(Error::Code::io_failure,
                        "cannot open schedule file " + options.schedule_path);
        }
        json doc;
        try {
            doc = json::parse(std::string(std::istreambuf_iterator<char>(in), {}));
        } catch (const json::exception& e) {
            throw Error(Error::Code::malformed_record,
                        std::string("invalid schedule JSON: ") + e.what());
        }
        const std::filesystem::path base =
            std::filesystem::path(options.schedule_path).parent_path();
        for (const auto& entry : doc) {
            const std::filesystem::path scene_path(entry.at("scene").get<std::string>());
            schedule.push_back({load_scene_json(
                                    scene_path.is_absolute() ? scene_path : base / scene_path),
                                entry.at("wall_clock").get<std::int64_t>()});
        }
    } else {
        schedule.push_back({load_scene_json(options.scene_path), 0});
    }

    const std::vector<CrowdRun> runs =
        crowd_runs(schedule, options.speed_kmh, options.period_ms, noise, options.seed);

    json manifest = json::array();
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const std::string stem = "run" + std::to_string(i + 1);
        const std::filesystem::path trace_path = out_dir / (stem + ".csv");
        const std::filesystem::path truth_path = out_dir / (stem + ".truth.json");
        write_trace_csv_file(trace_path, runs[i].trace);
        write_text_file(truth_path.string(), ground_truth_json(runs[i].truth));
        manifest.push_back({{"trace", trace_path.filename().string()},
                            {"truth", truth_path.filename().string()},
                            {"run_id", runs[i].trace.run_id},
                            {"wall_clock", runs[i].wall_clock}});
        out << "wrote " << trace_path.string() << " (" << runs[i].trace.size() << " samples, "
            << runs[i].truth.cars.size() << " cars)\n";
    }
    if (!schedule.front().scene.zones.empty()) {
        save_zones_geojson(out_dir / "zones.geojson", schedule.front().scene.zones);
        out << "wrote " << (out_dir / "zones.geojson").string() << '\n';
    }
    write_text_file((out_dir / "manifest.json").string(), manifest.dump(2));
    return 0;
}

int run_evaluate(const EvaluateOptions& options, std::ostream& out) {
    const std::vector<Detection> detections = read_detections_jsonl_file(options.detections_path);
    const GroundTruth truth = load_ground_truth_json(options.truth_path);
    std::vector<ParkingZone> zones;
    if (!options.zones_path.empty()) {
        zones = load_zones_geojson(options.zones_path);
    }
    const EvalReport report = evaluate(detections, truth, options.radius_m, zones);
    out << (options.as_json ? eval_report_json(report) + "\n" : eval_report_table(report));
    if (!options.out_path.empty()) {
        write_text_file(options.out_path, eval_report_json(report));
    }
    return 0;
}

int run_calibrate(const CalibrateOptions& options, std::ostream& out) {
    const ClassifierConfig config = resolve_config(options.config_path);
    const TraceFormat format = options.paper_format ? TraceFormat::paper : TraceFormat::csv;
    const Trace trace = load_trace_file(options.trace_path, {}, format);
    const std::vector<EnvironmentSignature> signatures =
        load_signatures_json(options.signatures_path);

    const std::vector<ContourCandidate> candidates = extract_candidates(trace, config);
    const MatchReport matches = match_signatures(candidates, signatures);
    for (const std::string& skipped : matches.skipped) {
        out << "skipped: " << skipped << '\n';
    }
    const OffsetFunction offsets = compute_offsets(matches.matches, signatures);
    const Trace corrected = apply_offsets(trace, offsets);
    write_trace_csv_file(options.out_path, corrected);

    out << matches.matches.size() << " of " << signatures.size() << " signatures matched";
    if (!matches.matches.empty()) {
        const EnuVector first = offsets.at(matches.matches.front().timestamp_ms);
        out << "; first correction east " << first.east_m << " m, north " << first.north_m
            << " m";
    }
    out << '\n';
    return 0;
}

int run_map(const MapOptions& options, std::ostream& out) {
    std::vector<ParkingZone> zones = load_zones_geojson(options.zones_path);
    OccupancyMap map(zones);

    std::vector<RunReport> reports;
    if (!options.replay_path.empty()) {
        reports = read_run_log(options.replay_path);
    }
    for (const std::string& path : options.ingest_paths) {
        std::ifstream in(path);
        if (!in) {
            throw Error(Error::Code::io_failure, "cannot open ingest file " + path);
        }
        reports.push_back(
            run_report_from_json(std::string(std::istreambuf_iterator<char>(in), {})));
    }

    for (const RunReport& report : reports) {
        for (const IngestIssue& issue : map.ingest(report)) {
            out << "note: " << issue.message << '\n';
        }
        if (!options.log_path.empty()) {
            append_run_log(options.log_path, report);
        }
    }

    write_snapshot_atomic(options.out_path, map.export_geojson());
    out << "snapshot: " << map.states().size() << " zones, "
        << map.illegal_detections().size() << " illegal detections -> " << options.out_path
        << '\n';
    for (const auto& [zone_id, state] : map.states()) {
        out << "  " << zone_id << ": parked " << state.observation.parked
            << ", spaces by capacity " << state.observation.spaces_by_capacity << " (run "
            << state.source_run_id << ")\n";
    }
    return 0;
}

int run_estimate(const EstimateOptions& options, std::ostream& out) {
    const FleetParams params = load_fleet_params(options.params_path);
    const double length =
        road_length_m(params.city_area_m2, params.road_area_ratio, params.road_width_m);
    const UnitEstimate estimate = units_needed(length, params.cruising_speed_ms,
                                               params.update_frequency_hz,
                                               params.detection_accuracy);

    json doc{{"road_length_m", length}, {"exact", estimate.exact}, {"units", estimate.units}};
    if (!options.updates_s.empty()) {
        const std::vector<double> speeds = options.speeds_kmh.empty()
                                               ? std::vector<double>{params.cruising_speed_ms * 3.6}
                                               : options.speeds_kmh;
        const std::vector<double> accuracies = options.accuracies.empty()
                                                   ? std::vector<double>{params.detection_accuracy}
                                                   : options.accuracies;
        json curve = json::array();
        for (const UnitsCurveRow& row :
             units_curve(length, speeds, accuracies, options.updates_s)) {
            curve.push_back({{"update_s", row.update_s},
                             {"speed_kmh", row.speed_kmh},
                             {"accuracy", row.accuracy},
                             {"exact", row.exact},
                             {"units", row.units}});
        }
        doc["curve"] = curve;
    }

    if (options.as_json) {
        out << doc.dump(2) << '\n';
    } else {
        out << "road length: " << length << " m\n"
            << "units needed: " << estimate.units << " (exact " << estimate.exact << ")\n";
        if (doc.contains("curve")) {
            out << "curve rows: " << doc["curve"].size() << '\n';
        }
    }
    if (!options.out_path.empty()) {
        write_text_file(options.out_path, doc.dump(2));
    }
    return 0;
}

int run_cruise_cost(const CruiseOptions& options, std::ostream& out) {
    const CruisingParams params = load_cruising_params(options.params_path);
    const CruisingCost cost = cruising_cost(params);
    const json doc{{"min_per_day", cost.min_per_day},
                   {"min_per_year", cost.min_per_year},
                   {"km_per_day", cost.km_per_day},
                   {"km_per_year", cost.km_per_year},
                   {"litres_per_year", cost.litres_per_year},
                   {"km_per_day_exact", cost.km_per_day_exact},
                   {"km_per_year_exact", cost.km_per_year_exact},
                   {"litres_per_year_exact", cost.litres_per_year_exact}};
    if (options.as_json) {
        out << doc.dump(2) << '\n';
    } else {
        out << "cruising per spot: " << cost.min_per_day << " min/day, " << cost.min_per_year
            << " min/year\n"
            << "distance: " << cost.km_per_day << " km/day, " << cost.km_per_year << " km/year\n"
            << "fuel: " << cost.litres_per_year << " litres/year\n";
    }
    if (!options.out_path.empty()) {
        write_text_file(options.out_path, doc.dump(2));
    }
    return 0;
}

int run_serve(const ServeOptions& options, std::ostream& out) {
    MapServer server(load_zones_geojson(options.zones_path),
                     options.log_path.empty()
                         ? std::nullopt
                         : std::optional<std::filesystem::path>(options.log_path));
    const int port = server.start(options.host, options.port);
    out << "listening on " << options.host << ":" << port
        << " (POST /ingest, GET /zones/{id}, GET /map); Ctrl-C to stop\n";
    // Foreground daemon: the background worker owns the socket loop.
    while (true) {
        std::this_thread::sleep_for(std::chrono::seconds(1));
    }
    return 0;
}

}  // namespace

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"curbscan: kerbside parking detection from sonar drive traces"};
    app.require_subcommand(1);

    DetectOptions detect;
    CLI::App* detect_cmd =
        app.add_subcommand("detect", "classify a trace into parked vehicles and spaces");
    detect_cmd->add_option("--trace", detect.trace_path, "input trace")->required();
    detect_cmd->add_flag("--paper-format", detect.paper_format,
                         "trace uses the '/'-separated unit-suffixed layout");
    detect_cmd->add_option("--zones", detect.zones_path, "zones GeoJSON");
    detect_cmd->add_option("--config", detect.config_path,
                           "classifier config JSON (default: $CURBSCAN_CONFIG or built-ins)");
    detect_cmd->add_option("--out", detect.out_path, "detections JSONL output")->required();
    detect_cmd->add_option("--report", detect.report_path, "zone/space report JSON output");
    detect_cmd->add_option("--ingest-out", detect.ingest_path, "ingest event JSON for `map`");
    detect_cmd->add_option("--run-id", detect.run_id, "override run id (default: file stem)");
    detect_cmd->add_option("--wall-clock", detect.wall_clock, "observation unix time (seconds)");
    detect_cmd->add_option("--min-space", detect.min_space,
                           "variable space threshold, meters (default: length_min)");

    SimulateOptions simulate;
    CLI::App* simulate_cmd =
        app.add_subcommand("simulate", "generate drive traces with ground truth");
    auto* scene_opt = simulate_cmd->add_option("--scene", simulate.scene_path, "scene JSON");
    simulate_cmd->add_option("--schedule", simulate.schedule_path, "schedule JSON")
        ->excludes(scene_opt);
    simulate_cmd->add_option("--noise", simulate.noise_path, "noise model JSON");
    simulate_cmd->add_option("--out-dir", simulate.out_dir, "output directory")->required();
    simulate_cmd->add_option("--speed", simulate.speed_kmh, "cruising speed km/h (default 20)");
    simulate_cmd->add_option("--period", simulate.period_ms, "sample period ms (default 50)");
    simulate_cmd->add_option("--seed", simulate.seed, "RNG seed (default 42)");

    EvaluateOptions evaluate_opts;
    CLI::App* evaluate_cmd =
        app.add_subcommand("evaluate", "score detections against ground truth");
    evaluate_cmd->add_option("--detections", evaluate_opts.detections_path, "detections JSONL")
        ->required();
    evaluate_cmd->add_option("--truth", evaluate_opts.truth_path, "ground truth JSON")->required();
    evaluate_cmd->add_option("--zones", evaluate_opts.zones_path, "zones GeoJSON");
    evaluate_cmd->add_option("--radius", evaluate_opts.radius_m, "matching radius m (default 5)");
    evaluate_cmd->add_flag("--json", evaluate_opts.as_json, "machine-readable report on stdout");
    evaluate_cmd->add_option("--out", evaluate_opts.out_path, "write JSON report to file");

    CalibrateOptions calibrate_opts;
    CLI::App* calibrate_cmd =
        app.add_subcommand("calibrate", "offset GPS drift against surveyed signatures");
    calibrate_cmd->add_option("--trace", calibrate_opts.trace_path, "input trace")->required();
    calibrate_cmd->add_flag("--paper-format", calibrate_opts.paper_format,
                            "trace uses the paper layout");
    calibrate_cmd->add_option("--signatures", calibrate_opts.signatures_path, "signatures JSON")
        ->required();
    calibrate_cmd->add_option("--config", calibrate_opts.config_path, "classifier config JSON");
    calibrate_cmd->add_option("--out", calibrate_opts.out_path, "corrected trace CSV")->required();

    MapOptions map_opts;
    CLI::App* map_cmd = app.add_subcommand("map", "aggregate run reports into a GeoJSON snapshot");
    map_cmd->add_option("--zones", map_opts.zones_path, "zones GeoJSON")->required();
    map_cmd->add_option("--out", map_opts.out_path, "snapshot GeoJSON output")->required();
    map_cmd->add_option("--log", map_opts.log_path, "append ingested events to this run log");
    map_cmd->add_option("--replay", map_opts.replay_path, "rebuild from an existing run log");
    map_cmd->add_option("--ingest", map_opts.ingest_paths, "ingest event JSON (repeatable)");

    EstimateOptions estimate_opts;
    CLI::App* estimate_cmd =
        app.add_subcommand("estimate", "sensing units needed to cover a city");
    estimate_cmd->add_option("--params", estimate_opts.params_path, "fleet parameters JSON")
        ->required();
    estimate_cmd->add_option("--updates", estimate_opts.updates_s,
                             "updating times (s) for a curve sweep");
    estimate_cmd->add_option("--speeds", estimate_opts.speeds_kmh, "curve speeds (km/h)");
    estimate_cmd->add_option("--accuracies", estimate_opts.accuracies, "curve accuracies");
    estimate_cmd->add_flag("--json", estimate_opts.as_json, "machine-readable output");
    estimate_cmd->add_option("--out", estimate_opts.out_path, "write JSON result to file");

    CruiseOptions cruise_opts;
    CLI::App* cruise_cmd =
        app.add_subcommand("cruise-cost", "time/distance/fuel wasted searching per spot");
    cruise_cmd->add_option("--params", cruise_opts.params_path, "cruising parameters JSON")
        ->required();
    cruise_cmd->add_flag("--json", cruise_opts.as_json, "machine-readable output");
    cruise_cmd->add_option("--out", cruise_opts.out_path, "write JSON result to file");

    ServeOptions serve_opts;
    CLI::App* serve_cmd = app.add_subcommand("serve", "HTTP ingest endpoint over the map");
    serve_cmd->add_option("--zones", serve_opts.zones_path, "zones GeoJSON")->required();
    serve_cmd->add_option("--log", serve_opts.log_path, "run log to append ingests to");
    serve_cmd->add_option("--host", serve_opts.host, "bind host (default 127.0.0.1)");
    serve_cmd->add_option("--port", serve_opts.port, "bind port (default 8080)");

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n' << app.help() << '\n';
        return 2;
    }

    try {
        if (detect_cmd->parsed()) {
            return run_detect(detect, out);
        }
        if (simulate_cmd->parsed()) {
            if (simulate.scene_path.empty() && simulate.schedule_path.empty()) {
                err << "error: simulate needs --scene or --schedule\n";
                return 2;
            }
            return run_simulate(simulate, out);
        }
        if (evaluate_cmd->parsed()) {
            return run_evaluate(evaluate_opts, out);
        }
        if (calibrate_cmd->parsed()) {
            return run_calibrate(calibrate_opts, out);
        }
        if (map_cmd->parsed()) {
            return run_map(map_opts, out);
        }
        if (estimate_cmd->parsed()) {
            return run_estimate(estimate_opts, out);
        }
        if (cruise_cmd->parsed()) {
            return run_cruise_cost(cruise_opts, out);
        }
        if (serve_cmd->parsed()) {
            return run_serve(serve_opts, out);
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    err << app.help() << '\n';
    return 2;
}

}  // namespace curbscan
