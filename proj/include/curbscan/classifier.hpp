#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "curbscan/contour.hpp"

namespace curbscan {

enum class DetectionKind {
    parked_vehicle,
    empty_space,
};

std::string_view to_string(DetectionKind kind);
DetectionKind detection_kind_from_string(std::string_view text);

struct Detection {
    DetectionKind kind{DetectionKind::parked_vehicle};
    LatLon anchor;
    std::int64_t timestamp_ms{0};
    std::optional<double> length_m;  // empty_space only (variable-length mode)
    std::string run_id;
    bool illegal{false};
};

// JSONL encoding, one detection per line.
std::string detection_to_json(const Detection& detection);
Detection detection_from_json(std::string_view line);
void write_detections_jsonl(std::ostream& out, std::span<const Detection> detections);
void write_detections_jsonl_file(const std::filesystem::path& path,
                                 std::span<const Detection> detections);
std::vector<Detection> read_detections_jsonl(std::istream& in);
std::vector<Detection> read_detections_jsonl_file(const std::filesystem::path& path);

// The four-feature test: distance band, two-scale dispersion, length window,
// and both edge angles in range.
bool is_parked_vehicle(const ContourCandidate& candidate, const ClassifierConfig& config);

struct ClassifyResult {
    std::vector<Detection> parked;
    std::vector<Detection> empty;
    std::vector<std::string> warnings;
};

// Scans the trace once: accepted contour candidates become parked detections;
// maximal beyond-distance-band regions sustained for at least the maximum
// vehicle length become empty-space detections. Stationary stretches are
// skipped and reported in warnings.
ClassifyResult classify(const Trace& trace, const ClassifierConfig& config);

}  // namespace curbscan
