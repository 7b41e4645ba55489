#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "curbscan/geo.hpp"

namespace curbscan {

inline constexpr double kDefaultMaxRangeCm = 600.0;
inline constexpr std::int64_t kNominalSamplePeriodMs = 50;

// One sonar + GPS sample. Timestamps are run-relative milliseconds; wall
// clock lives in run metadata, not here.
struct TracePoint {
    std::int64_t timestamp_ms{0};
    double distance_cm{0.0};
    double latitude{0.0};
    double longitude{0.0};
    double speed_kmh{0.0};
    // Reading saturated at max range (sonar "no echo"); clamped, not rejected.
    bool range_clamped{false};

    LatLon position() const { return {latitude, longitude}; }

    bool operator==(const TracePoint&) const = default;
};

enum class TraceFormat {
    paper,  // "<int> ms/<int> cm/<lat>/<lon>/<float> km/h", read-only
    csv,    // canonical "timestamp_ms,distance_cm,lat,lon,speed_kmh"
};

inline constexpr std::string_view kTraceCsvHeader = "timestamp_ms,distance_cm,lat,lon,speed_kmh";

// Parses one record. Throws Error{malformed_record} on structural problems and
// Error{out_of_range} on invariant violations; both name the offending field.
TracePoint parse_trace_line(std::string_view text, TraceFormat format,
                            double max_range_cm = kDefaultMaxRangeCm);

// Canonical CSV rendition (shortest round-trip float formatting).
std::string serialize_trace_point(const TracePoint& point);

struct RunMetadata {
    std::string run_id;
    std::string vehicle_id;
};

struct Trace {
    std::string run_id;
    std::string vehicle_id;
    std::vector<TracePoint> points;
    std::int64_t sample_period_ms{kNominalSamplePeriodMs};

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

// Validates metadata and point ordering; infers sample_period from the median
// timestamp gap. Throws Error{empty_trace} / Error{non_monotone_timestamp}.
Trace make_trace(std::vector<TracePoint> points, RunMetadata metadata);

// Reads one record per line until EOF. Blank lines and (for CSV) a leading
// header row are skipped.
Trace load_trace(std::istream& in, RunMetadata metadata, TraceFormat format = TraceFormat::csv,
                 double max_range_cm = kDefaultMaxRangeCm);

Trace load_trace_file(const std::filesystem::path& path, RunMetadata metadata,
                      TraceFormat format = TraceFormat::csv,
                      double max_range_cm = kDefaultMaxRangeCm);

void write_trace_csv(std::ostream& out, const Trace& trace);
void write_trace_csv_file(const std::filesystem::path& path, const Trace& trace);

}  // namespace curbscan
