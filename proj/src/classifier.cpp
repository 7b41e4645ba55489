#include "curbscan/classifier.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "curbscan/errors.hpp"

namespace curbscan {

namespace {

bool in_band(double value, double lo, double hi) { return value >= lo && value <= hi; }

}  // namespace

std::string_view to_string(DetectionKind kind) {
    return kind == DetectionKind::parked_vehicle ? "parked_vehicle" : "empty_space";
}

DetectionKind detection_kind_from_string(std::string_view text) {
    if (text == "parked_vehicle") {
        return DetectionKind::parked_vehicle;
    }
    if (text == "empty_space") {
        return DetectionKind::empty_space;
    }
    throw Error(Error::Code::malformed_record, "unknown detection kind '" + std::string(text) + "'",
                "kind");
}

std::string detection_to_json(const Detection& detection) {
    nlohmann::json doc{
        {"kind", to_string(detection.kind)}, {"lat", detection.anchor.lat},
        {"lon", detection.anchor.lon},       {"timestamp_ms", detection.timestamp_ms},
        {"run_id", detection.run_id},
    };
    if (detection.length_m) {
        doc["length_m"] = *detection.length_m;
    }
    if (detection.illegal) {
        doc["illegal"] = true;
    }
    return doc.dump();
}

Detection detection_from_json(std::string_view line) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Error::Code::malformed_record, std::string("invalid detection JSON: ") + e.what());
    }
    Detection d;
    try {
        d.kind = detection_kind_from_string(doc.at("kind").get<std::string>());
        d.anchor.lat = doc.at("lat").get<double>();
        d.anchor.lon = doc.at("lon").get<double>();
        d.timestamp_ms = doc.at("timestamp_ms").get<std::int64_t>();
        d.run_id = doc.value("run_id", std::string{});
        if (doc.contains("length_m")) {
            d.length_m = doc["length_m"].get<double>();
        }
        d.illegal = doc.value("illegal", false);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Error::Code::malformed_record, std::string("invalid detection field: ") + e.what());
    }
    if (d.length_m && d.kind != DetectionKind::empty_space) {
        throw Error(Error::Code::malformed_record,
                    "length_m is only valid on empty_space detections", "length_m");
    }
    return d;
}

void write_detections_jsonl(std::ostream& out, std::span<const Detection> detections) {
    for (const Detection& d : detections) {
        out << detection_to_json(d) << '\n';
    }
}

void write_detections_jsonl_file(const std::filesystem::path& path,
                                 std::span<const Detection> detections) {
    std::ofstream out(path);
    if (!out) {
        throw Error(Error::Code::io_failure, "cannot write detections file " + path.string());
    }
    write_detections_jsonl(out, detections);
}

std::vector<Detection> read_detections_jsonl(std::istream& in) {
    std::vector<Detection> detections;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            detections.push_back(detection_from_json(line));
        } catch (const Error& e) {
            throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what(), e.field(),
                        static_cast<std::ptrdiff_t>(line_no));
        }
    }
    return detections;
}

std::vector<Detection> read_detections_jsonl_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Error::Code::io_failure, "cannot open detections file " + path.string());
    }
    try {
        return read_detections_jsonl(in);
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what(), e.field(), e.index());
    }
}

bool is_parked_vehicle(const ContourCandidate& candidate, const ClassifierConfig& config) {
    return candidate.bottom_std_cm < config.sigma_small_cm &&
           candidate.context_std_cm > config.sigma_big_cm &&
           in_band(candidate.bottom_distance_cm, config.distance_min_cm, config.distance_max_cm) &&
           in_band(candidate.lead_angle_deg, config.angle_min_deg, config.angle_max_deg) &&
           in_band(candidate.trail_angle_deg, config.angle_min_deg, config.angle_max_deg) &&
           in_band(candidate.length_m, config.length_min_m, config.length_max_m);
}

ClassifyResult classify(const Trace& trace, const ClassifierConfig& config) {
    config.validate();
    ClassifyResult result;
    if (trace.empty()) {
        return result;
    }

    const std::size_t n = trace.size();

    // Stationary stretches cannot be converted to lengths; skip and report.
    std::vector<bool> stationary(n, false);
    for (std::size_t i = 0; i < n;) {
        if (trace.points[i].speed_kmh <= 0.0) {
            std::size_t j = i;
            while (j + 1 < n && trace.points[j + 1].speed_kmh <= 0.0) {
                ++j;
            }
            for (std::size_t k = i; k <= j; ++k) {
                stationary[k] = true;
            }
            result.warnings.push_back("zero-speed region at indices [" + std::to_string(i) + ", " +
                                      std::to_string(j) + "] skipped");
            i = j + 1;
        } else {
            ++i;
        }
    }

    std::vector<bool> claimed(n, false);
    const std::vector<ContourCandidate> candidates = extract_candidates(trace, config);
    for (const ContourCandidate& c : candidates) {
        bool overlaps_stationary = false;
        for (std::size_t i = c.start_index; i <= c.end_index && !overlaps_stationary; ++i) {
            overlaps_stationary = stationary[i];
        }
        if (overlaps_stationary) {
            result.warnings.push_back("candidate at index " + std::to_string(c.start_index) +
                                      " skipped: zero-speed samples in bottom");
            continue;
        }
        if (!is_parked_vehicle(c, config)) {
            continue;
        }
        for (std::size_t i = c.start_index; i <= c.end_index; ++i) {
            claimed[i] = true;
        }
        result.parked.push_back({DetectionKind::parked_vehicle, c.anchor, c.start_timestamp_ms,
                                 std::nullopt, trace.run_id, false});
    }

    // Empty branch: sustained far-distance regions, at least one maximum
    // vehicle length long. Indices claimed by parked detections are excluded
    // so the two detection sets stay disjoint.
    if (n >= 2) {
        const std::vector<double> positions = cumulative_positions(trace);
        const double mean_step = positions.back() / static_cast<double>(n - 1);
        std::size_t i = 0;
        while (i < n) {
            const bool far = trace.points[i].distance_cm > config.distance_max_cm && !claimed[i];
            if (!far) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j + 1 < n && trace.points[j + 1].distance_cm > config.distance_max_cm &&
                   !claimed[j + 1]) {
                ++j;
            }
            const double extent_end = (j + 1 < n) ? positions[j + 1] : positions[j] + mean_step;
            if (extent_end - positions[i] >= config.length_max_m) {
                result.empty.push_back({DetectionKind::empty_space, trace.points[i].position(),
                                        trace.points[i].timestamp_ms, std::nullopt, trace.run_id,
                                        false});
            }
            i = j + 1;
        }
    }

    return result;
}

}  // namespace curbscan
