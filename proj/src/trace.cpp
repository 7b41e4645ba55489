#include "curbscan/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <system_error>

#include "curbscan/errors.hpp"

namespace curbscan {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t begin = 0;
    while (true) {
        const std::size_t pos = s.find(sep, begin);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(begin));
            return out;
        }
        out.push_back(s.substr(begin, pos - begin));
        begin = pos + 1;
    }
}

// Parses a numeric token with an optional unit suffix; any other trailing
// text is a malformed record.
double parse_field(std::string_view token, std::string_view field, std::string_view unit) {
    token = trim(token);
    if (token.empty()) {
        throw_malformed(field, "empty " + std::string(field) + " field");
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc()) {
        throw_malformed(field, "non-numeric " + std::string(field) + " '" + std::string(token) + "'");
    }
    const std::string_view rest = trim(std::string_view(ptr, token.data() + token.size() - ptr));
    if (!rest.empty() && rest != unit) {
        throw_malformed(field, "unexpected trailing text '" + std::string(rest) + "' in " +
                                   std::string(field));
    }
    if (!std::isfinite(value)) {
        throw_out_of_range(field, std::string(field) + " is not finite");
    }
    return value;
}

std::int64_t parse_timestamp(std::string_view token, std::string_view unit) {
    const double value = parse_field(token, "timestamp", unit);
    if (value < 0) {
        throw_out_of_range("timestamp", "timestamp must be non-negative");
    }
    if (value != std::floor(value)) {
        throw_malformed("timestamp", "timestamp must be an integer millisecond count");
    }
    return static_cast<std::int64_t>(value);
}

TracePoint validate_point(std::int64_t timestamp_ms, double distance_cm, double lat, double lon,
                          double speed_kmh, double max_range_cm) {
    TracePoint p;
    p.timestamp_ms = timestamp_ms;
    if (distance_cm < 0.0) {
        throw_out_of_range("distance", "distance must be non-negative");
    }
    if (distance_cm > max_range_cm) {
        // Sonar "no echo" saturates at max range; keep the evidence.
        p.distance_cm = max_range_cm;
        p.range_clamped = true;
    } else {
        p.distance_cm = distance_cm;
    }
    if (lat < -90.0 || lat > 90.0) {
        throw_out_of_range("latitude", "latitude must lie in [-90, 90]");
    }
    if (lon < -180.0 || lon > 180.0) {
        throw_out_of_range("longitude", "longitude must lie in [-180, 180]");
    }
    if (speed_kmh < 0.0) {
        throw_out_of_range("speed", "speed must be non-negative");
    }
    p.latitude = lat;
    p.longitude = lon;
    p.speed_kmh = speed_kmh;
    return p;
}

void append_number(std::string& out, double value) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    out.append(buf, ptr);
}

}  // namespace

TracePoint parse_trace_line(std::string_view text, TraceFormat format, double max_range_cm) {
    if (format == TraceFormat::csv) {
        const auto fields = split(text, ',');
        if (fields.size() != 5) {
            throw_malformed("record", "expected 5 comma-separated fields, got " +
                                          std::to_string(fields.size()));
        }
        return validate_point(parse_timestamp(fields[0], ""), parse_field(fields[1], "distance", ""),
                              parse_field(fields[2], "latitude", ""),
                              parse_field(fields[3], "longitude", ""),
                              parse_field(fields[4], "speed", ""), max_range_cm);
    }

    // Paper layout: the trailing "km/h" unit contributes a sixth '/' token.
    const auto fields = split(text, '/');
    if (fields.size() != 6 || trim(fields[5]) != "h") {
        throw_malformed("record", "expected 'timestamp ms/distance cm/lat/lon/speed km/h'");
    }
    return validate_point(parse_timestamp(fields[0], "ms"), parse_field(fields[1], "distance", "cm"),
                          parse_field(fields[2], "latitude", ""),
                          parse_field(fields[3], "longitude", ""),
                          parse_field(fields[4], "speed", "km"), max_range_cm);
}

std::string serialize_trace_point(const TracePoint& point) {
    std::string out = std::to_string(point.timestamp_ms);
    out.push_back(',');
    append_number(out, point.distance_cm);
    out.push_back(',');
    append_number(out, point.latitude);
    out.push_back(',');
    append_number(out, point.longitude);
    out.push_back(',');
    append_number(out, point.speed_kmh);
    return out;
}

Trace make_trace(std::vector<TracePoint> points, RunMetadata metadata) {
    if (metadata.run_id.empty()) {
        throw Error(Error::Code::invalid_argument, "run_id must be non-empty", "run_id");
    }
    if (points.empty()) {
        throw Error(Error::Code::empty_trace, "trace has no records");
    }
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (points[i].timestamp_ms <= points[i - 1].timestamp_ms) {
            throw Error(Error::Code::non_monotone_timestamp,
                        "timestamps must be strictly increasing at record index " +
                            std::to_string(i),
                        "timestamp", static_cast<std::ptrdiff_t>(i));
        }
    }

    Trace trace;
    trace.run_id = std::move(metadata.run_id);
    trace.vehicle_id = std::move(metadata.vehicle_id);
    trace.points = std::move(points);

    if (trace.points.size() >= 2) {
        std::vector<std::int64_t> gaps;
        gaps.reserve(trace.points.size() - 1);
        for (std::size_t i = 1; i < trace.points.size(); ++i) {
            gaps.push_back(trace.points[i].timestamp_ms - trace.points[i - 1].timestamp_ms);
        }
        const auto mid = gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2);
        std::nth_element(gaps.begin(), mid, gaps.end());
        trace.sample_period_ms = *mid;
    }
    return trace;
}

Trace load_trace(std::istream& in, RunMetadata metadata, TraceFormat format, double max_range_cm) {
    std::vector<TracePoint> points;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view text = trim(line);
        if (text.empty()) {
            continue;
        }
        if (format == TraceFormat::csv && line_no == 1 && text == kTraceCsvHeader) {
            continue;
        }
        try {
            points.push_back(parse_trace_line(text, format, max_range_cm));
        } catch (const Error& e) {
            throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what(), e.field(),
                        static_cast<std::ptrdiff_t>(line_no));
        }
    }
    return make_trace(std::move(points), std::move(metadata));
}

Trace load_trace_file(const std::filesystem::path& path, RunMetadata metadata, TraceFormat format,
                      double max_range_cm) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Error::Code::io_failure, "cannot open trace file " + path.string());
    }
    if (metadata.run_id.empty()) {
        metadata.run_id = path.stem().string();
    }
    try {
        return load_trace(in, std::move(metadata), format, max_range_cm);
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what(), e.field(), e.index());
    }
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
    out << kTraceCsvHeader << '\n';
    for (const TracePoint& p : trace.points) {
        out << serialize_trace_point(p) << '\n';
    }
}

void write_trace_csv_file(const std::filesystem::path& path, const Trace& trace) {
    std::ofstream out(path);
    if (!out) {
        throw Error(Error::Code::io_failure, "cannot write trace file " + path.string());
    }
    write_trace_csv(out, trace);
}

}  // namespace curbscan
