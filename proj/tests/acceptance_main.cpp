// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned here, not tuned at run time.

#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "curbscan/aggregate.hpp"
#include "curbscan/calibrate.hpp"
#include "curbscan/classifier.hpp"
#include "curbscan/contour.hpp"
#include "curbscan/fleet.hpp"
#include "curbscan/simgen.hpp"
#include "curbscan/spacemap.hpp"

using namespace curbscan;

namespace {

int g_failures = 0;

struct Check {
    bool ok{true};
    std::string detail;

    void require(bool condition, const std::string& what) {
        if (!condition && ok) {
            ok = false;
            detail = what;
        }
    }
};

void report(int number, const std::string& name, const Check& check) {
    if (check.ok) {
        std::printf("PASS  %d. %s\n", number, name.c_str());
    } else {
        std::printf("FAIL  %d. %s  [%s]\n", number, name.c_str(), check.detail.c_str());
        ++g_failures;
    }
}

const LatLon kOrigin{51.7480, -1.1405};

NoiseModel no_noise() {
    NoiseModel noise;
    noise.distance_sigma_cm = 0.0;
    return noise;
}

// --- criterion 1: fleet worked example -------------------------------------

void criterion_fleet() {
    Check check;
    const double length = road_length_m(19.26e6, 0.10, 10.0);
    check.require(length == 1.926e5, "L != 1.926e5 exactly, got " + std::to_string(length));

    const UnitEstimate estimate = units_needed(length, 20.0 / 3.6, 1.0 / 120.0, 0.879);
    check.require(std::abs(static_cast<double>(estimate.units) - 328.0) <= 1.0,
                  "units " + std::to_string(estimate.units) + " not within 1 of 328");
    const double recomputed = 1.926e5 / ((20.0 / 3.6) * 120.0 * 0.879);
    check.require(std::abs(estimate.exact - recomputed) < 1e-9,
                  "exact " + std::to_string(estimate.exact));
    report(1, "fleet worked example: L = 1.926e5 m, units within 1 of 328", check);
}

// --- criterion 2: cruising-cost arithmetic ---------------------------------

void criterion_cruising() {
    Check check;
    const CruisingCost cost = cruising_cost({6.75, 10.0, 15.0, 10.0});
    const auto close = [](double a, double b) { return std::abs(a - b) < 1e-9; };
    check.require(close(cost.min_per_day, 67.5), "min_per_day " + std::to_string(cost.min_per_day));
    check.require(close(cost.min_per_year, 24637.5),
                  "min_per_year " + std::to_string(cost.min_per_year));
    check.require(close(cost.km_per_day, 16.87), "km_per_day " + std::to_string(cost.km_per_day));
    check.require(close(cost.km_per_year, 6157.55),
                  "km_per_year " + std::to_string(cost.km_per_year));
    check.require(close(cost.litres_per_year, 615.755),
                  "litres_per_year " + std::to_string(cost.litres_per_year));
    report(2, "cruising cost: 67.5 / 24637.5 / 16.87 / 6157.55 / 615.755", check);
}

// --- criterion 3: metrics bookkeeping ---------------------------------------

void criterion_metrics() {
    Check check;
    const DetectionMetrics metrics = detection_metrics(123, 124, 16);
    check.require(std::abs(metrics.detection_rate - 0.992) <= 0.0005,
                  "detection rate " + std::to_string(metrics.detection_rate));
    check.require(std::abs(metrics.paper_accuracy - 0.879) <= 0.0005,
                  "accuracy " + std::to_string(metrics.paper_accuracy));
    report(3, "metrics: 123/124 = 99.2%, 123/140 = 87.9% (+-0.05%)", check);
}

// --- criterion 4: classifier property over seeded scenes --------------------

StreetScene random_scene(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> car_count(2, 12);
    std::uniform_int_distribution<int> pole_count(0, 3);
    std::uniform_real_distribution<double> car_len(2.5, 8.0);
    std::uniform_real_distribution<double> pole_len(0.2, 0.4);
    std::uniform_real_distribution<double> lateral(90.0, 230.0);
    std::uniform_real_distribution<double> gap(3.0, 10.0);

    std::vector<ObjectKind> kinds(car_count(rng), ObjectKind::car);
    kinds.insert(kinds.end(), pole_count(rng), ObjectKind::pole);
    std::shuffle(kinds.begin(), kinds.end(), rng);

    StreetScene scene;
    scene.street.background_cm = 500.0;
    double cursor = 12.0;
    for (const ObjectKind kind : kinds) {
        // poles echo 2.8 m before and after their footprint; keep that clear
        const double pad = kind == ObjectKind::pole ? 2.8 : 0.0;
        const double length = kind == ObjectKind::car ? car_len(rng) : pole_len(rng);
        const double start = cursor + gap(rng) + pad;
        scene.objects.push_back({kind, start, length, lateral(rng)});
        cursor = start + length + pad;
    }
    scene.street.kerb = {kOrigin, destination_point(kOrigin, 90.0, cursor + 12.0)};
    return scene;
}

void criterion_classifier() {
    Check check;
    std::mt19937_64 rng(20250809);
    const ClassifierConfig config;

    int clean_tp = 0;
    int clean_fp = 0;
    int clean_gt = 0;
    int noisy_tp = 0;
    int noisy_fp = 0;
    int noisy_gt = 0;

    for (int i = 0; i < 100; ++i) {
        const StreetScene scene = random_scene(rng);

        const SimRun clean = generate_trace(scene, 20.0, 50, no_noise(), 9000 + i);
        const ClassifyResult clean_result = classify(clean.trace, config);
        const EvalReport clean_report = evaluate(clean_result.parked, clean.truth);
        clean_tp += clean_report.tp;
        clean_fp += clean_report.fp;
        clean_gt += static_cast<int>(clean.truth.cars.size());

        NoiseModel noisy_model;
        noisy_model.distance_sigma_cm = 5.0;
        const SimRun noisy = generate_trace(scene, 20.0, 50, noisy_model, 9000 + i);
        const ClassifyResult noisy_result = classify(noisy.trace, config);
        const EvalReport noisy_report = evaluate(noisy_result.parked, noisy.truth);
        noisy_tp += noisy_report.tp;
        noisy_fp += noisy_report.fp;
        noisy_gt += static_cast<int>(noisy.truth.cars.size());
    }

    check.require(clean_tp == clean_gt, "noise-free recall " + std::to_string(clean_tp) + "/" +
                                            std::to_string(clean_gt));
    check.require(clean_fp == 0, "noise-free false positives " + std::to_string(clean_fp));

    const double recall = static_cast<double>(noisy_tp) / noisy_gt;
    const double precision =
        noisy_tp + noisy_fp > 0 ? static_cast<double>(noisy_tp) / (noisy_tp + noisy_fp) : 1.0;
    check.require(recall >= 0.95, "noisy recall " + std::to_string(recall));
    check.require(precision >= 0.90, "noisy precision " + std::to_string(precision));
    report(4, "classifier: 100 scenes noise-free 100%/0 FP; 5 cm noise recall>=95% prec>=90%",
           check);
}

// --- criterion 5: variable-length space measurement -------------------------

void criterion_spaces() {
    Check check;
    std::mt19937_64 rng(5150);
    std::uniform_real_distribution<double> gap_dist(2.5, 12.0);
    const double speed_kmh = 20.0;
    const double sample_len = speed_kmh / 3.6 * 0.05;
    const ClassifierConfig config;

    for (int i = 0; i < 50; ++i) {
        const double gap = gap_dist(rng);
        StreetScene scene;
        scene.street.background_cm = 500.0;
        scene.objects.push_back({ObjectKind::car, 12.0, 4.5, 150.0});
        scene.objects.push_back({ObjectKind::car, 16.5 + gap, 4.5, 160.0});
        scene.street.kerb = {kOrigin, destination_point(kOrigin, 90.0, 33.0 + gap)};

        const SimRun run = generate_trace(scene, speed_kmh, 50, no_noise(), 100 + i);
        const ClassifyResult result = classify(run.trace, config);
        if (result.parked.size() != 2) {
            check.require(false, "scene " + std::to_string(i) + ": expected 2 cars, got " +
                                     std::to_string(result.parked.size()));
            continue;
        }
        const std::vector<Space> spaces =
            variable_length_spaces(run.trace, result.parked, config);
        if (spaces.size() != 1) {
            check.require(false, "scene " + std::to_string(i) + ": expected 1 space, got " +
                                     std::to_string(spaces.size()));
            continue;
        }
        const double error = std::abs(spaces.front().length_m - gap);
        check.require(error <= sample_len + 1e-9,
                      "gap " + std::to_string(gap) + " measured " +
                          std::to_string(spaces.front().length_m));
    }
    report(5, "variable spaces: 50 gaps in [2.5, 12] m within one sample length", check);
}

// --- criterion 6: calibration round trip ------------------------------------

ContourTemplate pole_template() {
    ContourTemplate t;
    t.length_min_m = 3.0;
    t.length_max_m = 8.0;
    t.distance_min_cm = 120.0;
    t.distance_max_cm = 320.0;
    t.angle_min_deg = 40.0;
    t.angle_max_deg = 75.0;
    return t;
}

StreetScene calibration_scene(std::vector<double> pole_positions) {
    StreetScene scene;
    scene.street.background_cm = 500.0;
    scene.street.kerb = {kOrigin, destination_point(kOrigin, 90.0, 400.0)};
    scene.objects.push_back({ObjectKind::car, 120.0, 4.5, 150.0});
    scene.objects.push_back({ObjectKind::car, 200.0, 6.0, 190.0});
    scene.objects.push_back({ObjectKind::car, 280.0, 5.0, 160.0});
    for (const double at : pole_positions) {
        scene.objects.push_back({ObjectKind::pole, at, 0.3, 150.0});
    }
    return scene;
}

std::vector<EnvironmentSignature> survey(const StreetScene& scene, std::uint64_t seed) {
    const SimRun reference = generate_trace(scene, 20.0, 50, no_noise(), seed);
    std::vector<EnvironmentSignature> signatures;
    for (const ContourCandidate& c : extract_candidates(reference.trace, {})) {
        if (pole_template().contains(c)) {
            EnvironmentSignature s;
            s.signature_id = "sig" + std::to_string(signatures.size() + 1);
            s.surveyed = c.anchor;
            s.expected = pole_template();
            signatures.push_back(std::move(s));
        }
    }
    return signatures;
}

double calibrate_and_measure(const StreetScene& scene, const NoiseModel& drift_model,
                             std::uint64_t seed, std::size_t expected_matches, Check& check,
                             double signature_tolerance) {
    const std::vector<EnvironmentSignature> signatures = survey(scene, seed);
    check.require(signatures.size() == expected_matches,
                  "expected " + std::to_string(expected_matches) + " signatures, surveyed " +
                      std::to_string(signatures.size()));

    const SimRun drifted = generate_trace(scene, 20.0, 50, drift_model, seed);
    const MatchReport matches =
        match_signatures(extract_candidates(drifted.trace, {}), signatures);
    check.require(matches.matches.size() == expected_matches,
                  "matched " + std::to_string(matches.matches.size()) + " of " +
                      std::to_string(expected_matches));

    const OffsetFunction offsets = compute_offsets(matches.matches, signatures);
    const Trace corrected = apply_offsets(drifted.trace, offsets);

    // residual at signatures: re-detect on the corrected trace
    const MatchReport recheck = match_signatures(extract_candidates(corrected, {}), signatures);
    check.require(recheck.matches.size() == expected_matches, "signatures lost after correction");
    for (const SignatureMatch& match : recheck.matches) {
        for (const EnvironmentSignature& s : signatures) {
            if (s.signature_id == match.signature_id) {
                const double residual = haversine_m(match.observed, s.surveyed);
                check.require(residual <= signature_tolerance,
                              "signature residual " + std::to_string(residual));
            }
        }
    }

    const SimRun reference = generate_trace(scene, 20.0, 50, no_noise(), seed);
    double worst = 0.0;
    for (std::size_t i = 0; i < corrected.size(); ++i) {
        worst = std::max(worst, haversine_m(corrected.points[i].position(),
                                            reference.trace.points[i].position()));
    }
    return worst;
}

void criterion_calibration() {
    Check check;

    for (const double magnitude : {5.0, 15.0}) {
        NoiseModel drift = no_noise();
        drift.gps_drift = {DriftMode::constant, magnitude, 62.0};
        const double worst = calibrate_and_measure(calibration_scene({40.0}), drift, 31337, 1,
                                                   check, 0.1);
        check.require(worst <= 0.5, "constant drift " + std::to_string(magnitude) +
                                        " m residual " + std::to_string(worst));
    }

    for (const double magnitude : {8.0, 15.0}) {
        NoiseModel drift = no_noise();
        drift.gps_drift = {DriftMode::linear, magnitude, 155.0};
        const double worst = calibrate_and_measure(calibration_scene({15.0, 385.0}), drift,
                                                   31338, 2, check, 0.1);
        check.require(worst <= 1.0, "linear drift " + std::to_string(magnitude) +
                                        " m residual " + std::to_string(worst));
    }

    report(6, "calibration: <=15 m drift, 0 (+-0.1 m) at signatures, <=0.5/<=1.0 m elsewhere",
           check);
}

// --- criterion 7: aggregation invariants ------------------------------------

void criterion_aggregation() {
    Check check;

    std::vector<ParkingZone> zones;
    std::vector<std::string> zone_ids;
    for (int i = 0; i < 5; ++i) {
        ParkingZone zone;
        zone.zone_id = "z" + std::to_string(i + 1);
        zone.capacity = 6 + i;
        zone.kerb_line = {offset_point(kOrigin, 50.0 * i, 0.0),
                          offset_point(kOrigin, 50.0 * i + 30.0, 0.0)};
        zone_ids.push_back(zone.zone_id);
        zones.push_back(std::move(zone));
    }

    std::mt19937_64 rng(1234);
    std::vector<RunReport> runs;
    for (int r = 0; r < 20; ++r) {
        RunReport report;
        report.run_id = "r" + std::to_string(r + 1);
        report.wall_clock = 50'000 + r * 13;  // distinct clocks
        for (std::size_t z = 0; z < zone_ids.size(); ++z) {
            if (std::uniform_int_distribution<int>(0, 3)(rng) == 0) {
                continue;  // this run did not pass this zone
            }
            ZoneObservation obs;
            obs.parked = std::uniform_int_distribution<int>(0, zones[z].capacity)(rng);
            obs.spaces_by_capacity = zones[z].capacity - obs.parked;
            if (std::uniform_int_distribution<int>(0, 1)(rng) == 0) {
                obs.variable_spaces.push_back(
                    {offset_point(kOrigin, 50.0 * static_cast<double>(z) + 5.0, 0.0),
                     2.1 + static_cast<double>(r) * 0.25, zone_ids[z]});
            }
            report.zones[zone_ids[z]] = obs;
        }
        if (r % 4 == 0) {
            report.illegal.push_back({DetectionKind::parked_vehicle,
                                      offset_point(kOrigin, 11.0 * r, 60.0),
                                      1000 * r, std::nullopt, report.run_id, true});
        }
        runs.push_back(std::move(report));
    }

    std::map<std::string, const RunReport*> expected;
    for (const RunReport& run : runs) {
        for (const auto& [zone_id, obs] : run.zones) {
            auto& owner = expected[zone_id];
            if (owner == nullptr || run.wall_clock > owner->wall_clock) {
                owner = &run;
            }
        }
    }

    std::string reference_export;
    std::vector<std::size_t> order(runs.size());
    std::iota(order.begin(), order.end(), 0);
    std::uniform_int_distribution<std::size_t> pick(0, runs.size() - 1);

    for (int trial = 0; trial < 1000 && check.ok; ++trial) {
        std::shuffle(order.begin(), order.end(), rng);
        OccupancyMap map(zones);
        for (const std::size_t idx : order) {
            map.ingest(runs[idx]);
        }

        const std::string exported = map.export_geojson();
        map.ingest(runs[pick(rng)]);  // re-ingest: idempotent
        check.require(map.export_geojson() == exported, "re-ingest changed the map");

        for (const auto& [zone_id, owner] : expected) {
            const auto state = map.query_zone(zone_id);
            if (!state || state->source_run_id != owner->run_id ||
                state->last_update != owner->wall_clock ||
                state->observation.parked != owner->zones.at(zone_id).parked) {
                check.require(false, "zone " + zone_id + " not owned by newest run after trial " +
                                         std::to_string(trial));
                break;
            }
        }

        if (trial == 0) {
            reference_export = exported;
        } else {
            check.require(exported == reference_export, "export depends on ingest order");
        }
    }

    const OccupancyMap imported = OccupancyMap::import_geojson(reference_export);
    check.require(imported.export_geojson() == reference_export,
                  "export -> import -> export not byte-identical");

    report(7, "aggregation: latest-wins + idempotence over 1000 orderings; snapshot round trip",
           check);
}

// --- criterion 8: drive-test replay -----------------------------------------

struct ReplayLayout {
    StreetScene base;
    std::vector<double> zone_starts;
    std::vector<int> capacities{6, 1, 1, 11, 5};
};

ReplayLayout replay_layout() {
    ReplayLayout layout;
    const double bay = 6.5;
    double cursor = 15.0;
    layout.base.street.background_cm = 500.0;
    for (std::size_t z = 0; z < layout.capacities.size(); ++z) {
        layout.zone_starts.push_back(cursor);
        cursor += layout.capacities[z] * bay + 12.0;
    }
    const double street_length = cursor + 3.0;
    layout.base.street.kerb = {kOrigin, destination_point(kOrigin, 90.0, street_length)};
    for (std::size_t z = 0; z < layout.capacities.size(); ++z) {
        layout.base.zones.push_back(zone_along(layout.base, "park" + std::to_string(z + 1),
                                               layout.zone_starts[z],
                                               layout.zone_starts[z] +
                                                   layout.capacities[z] * bay,
                                               layout.capacities[z]));
    }
    return layout;
}

StreetScene occupy(const ReplayLayout& layout, const std::vector<int>& occupancy) {
    StreetScene scene = layout.base;
    for (std::size_t z = 0; z < occupancy.size(); ++z) {
        for (int bay = 0; bay < occupancy[z]; ++bay) {
            scene.objects.push_back(
                {ObjectKind::car, layout.zone_starts[z] + bay * 6.5 + 1.0, 4.5, 150.0});
        }
    }
    return scene;
}

void criterion_replay() {
    Check check;
    const ReplayLayout layout = replay_layout();

    // per-zone ground-truth occupancy for the six passes
    const std::vector<std::vector<int>> occupancies{
        {6, 1, 1, 10, 5}, {6, 1, 1, 10, 5}, {6, 0, 1, 10, 5},
        {2, 0, 1, 10, 5}, {3, 1, 1, 10, 5}, {4, 1, 1, 7, 5},
    };

    std::vector<ScheduleEntry> schedule;
    for (std::size_t r = 0; r < occupancies.size(); ++r) {
        schedule.push_back({occupy(layout, occupancies[r]),
                            1'000 + static_cast<std::int64_t>(r) * 120});
    }

    const std::vector<CrowdRun> runs = crowd_runs(schedule, 20.0, 50, no_noise(), 88);
    check.require(runs.size() == 6, "expected 6 runs");

    int total_truth = 0;
    for (std::size_t r = 0; r < runs.size(); ++r) {
        const ClassifyResult result = classify(runs[r].trace, {});
        const EvalReport report =
            evaluate(result.parked, runs[r].truth, 5.0, layout.base.zones);
        total_truth += static_cast<int>(runs[r].truth.cars.size());

        check.require(report.zones.size() == 5, "expected 5 zone rows");
        for (std::size_t z = 0; z < report.zones.size(); ++z) {
            const EvalZoneRow& row = report.zones[z];
            const int want = occupancies[r][z];
            if (row.detected != want || row.truth != want) {
                check.require(false, "run " + std::to_string(r + 1) + " " + row.zone_id +
                                         ": detected " + std::to_string(row.detected) +
                                         ", truth " + std::to_string(row.truth) + ", want " +
                                         std::to_string(want));
            }
        }
        check.require(report.fp == 0,
                      "run " + std::to_string(r + 1) + " has " + std::to_string(report.fp) +
                          " false positives");
    }
    check.require(total_truth == 124, "schedule encodes " + std::to_string(total_truth) +
                                          " cars, drive tests had 124");

    report(8, "replay: 6-run schedule reproduces per-zone detected == ground truth (30 cells)",
           check);
}

}  // namespace

int main() {
    criterion_fleet();
    criterion_cruising();
    criterion_metrics();
    criterion_classifier();
    criterion_spaces();
    criterion_calibration();
    criterion_aggregation();
    criterion_replay();

    if (g_failures == 0) {
        std::printf("all 8 acceptance criteria passed\n");
        return 0;
    }
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
}
