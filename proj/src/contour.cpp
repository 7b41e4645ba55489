#include "curbscan/contour.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "curbscan/errors.hpp"

namespace curbscan {

namespace {

// Plateau samples within this band of the plateau minimum form the flat
// bottom; edge chords are measured from its corners. Point-like clutter
// (slant-range V contours) keeps only its vertex here, so the chord to the
// adjacent background sample stays shallow while a vehicle's stays steep.
constexpr double kBottomBandCm = 25.0;
constexpr double kBackgroundPercentile = 0.95;

double mean(std::span<const double> values) {
    double sum = 0.0;
    for (const double v : values) {
        sum += v;
    }
    return sum / static_cast<double>(values.size());
}

// Last index i >= start with positions[i] <= positions[start] + length_m.
// Positions encode the mean-speed duration conversion, so this is the
// metric-length window even across varying speed.
std::size_t positional_window_end(std::span<const double> positions, std::size_t start,
                                  double length_m) {
    const double target = positions[start] + length_m + 1e-9;
    const auto it = std::upper_bound(positions.begin() + static_cast<std::ptrdiff_t>(start),
                                     positions.end(), target);
    return static_cast<std::size_t>(it - positions.begin()) - 1;
}

double window_std(const Trace& trace, std::span<const double> positions, std::size_t start,
                  double length_m) {
    const std::size_t end = positional_window_end(positions, start, length_m);
    if (end - start + 1 < 2) {
        return 0.0;
    }
    std::vector<double> values;
    values.reserve(end - start + 1);
    for (std::size_t i = start; i <= end; ++i) {
        values.push_back(trace.points[i].distance_cm);
    }
    return sample_std(values);
}

}  // namespace

IndexRange window_indices(const Trace& trace, std::size_t start, double window_length_m) {
    if (start >= trace.size()) {
        throw Error(Error::Code::invalid_argument, "window start index out of bounds");
    }
    const double speed_ms = trace.points[start].speed_kmh / 3.6;
    if (speed_ms <= 0.0) {
        throw Error(Error::Code::zero_speed,
                    "vehicle stationary at index " + std::to_string(start) +
                        "; window duration undefined",
                    "speed", static_cast<std::ptrdiff_t>(start));
    }
    const double duration_ms = window_length_m / speed_ms * 1000.0;
    const std::int64_t t0 = trace.points[start].timestamp_ms;
    std::size_t last = start;
    while (last + 1 < trace.size() &&
           static_cast<double>(trace.points[last + 1].timestamp_ms - t0) <= duration_ms + 1e-9) {
        ++last;
    }
    return {start, last};
}

double sample_std(std::span<const double> values) {
    if (values.size() < 2) {
        throw Error(Error::Code::too_few_samples,
                    "standard deviation needs at least 2 samples, got " +
                        std::to_string(values.size()));
    }
    const double m = mean(values);
    double ss = 0.0;
    for (const double v : values) {
        ss += (v - m) * (v - m);
    }
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

std::vector<double> cumulative_positions(const Trace& trace) {
    std::vector<double> positions(trace.size(), 0.0);
    for (std::size_t i = 1; i < trace.size(); ++i) {
        const double dt_s =
            static_cast<double>(trace.points[i].timestamp_ms - trace.points[i - 1].timestamp_ms) /
            1000.0;
        positions[i] = positions[i - 1] + trace.points[i - 1].speed_kmh / 3.6 * dt_s;
    }
    return positions;
}

double longitudinal_position(const Trace& trace, std::size_t i) {
    if (i >= trace.size()) {
        throw Error(Error::Code::invalid_argument, "index out of bounds");
    }
    double position = 0.0;
    for (std::size_t j = 0; j < i; ++j) {
        const double dt_s =
            static_cast<double>(trace.points[j + 1].timestamp_ms - trace.points[j].timestamp_ms) /
            1000.0;
        position += trace.points[j].speed_kmh / 3.6 * dt_s;
    }
    return position;
}

double edge_angle(double rise_m, double run_m) {
    if (!(rise_m > 0.0)) {
        throw Error(Error::Code::non_positive_rise, "edge rise must be positive");
    }
    return std::atan2(rise_m, run_m) * 180.0 / std::numbers::pi;
}

double background_distance_cm(const Trace& trace) {
    if (trace.empty()) {
        throw Error(Error::Code::empty_trace, "background undefined for an empty trace");
    }
    std::vector<double> distances;
    distances.reserve(trace.size());
    for (const TracePoint& p : trace.points) {
        distances.push_back(p.distance_cm);
    }
    const std::size_t rank =
        static_cast<std::size_t>(kBackgroundPercentile * static_cast<double>(distances.size() - 1));
    std::nth_element(distances.begin(), distances.begin() + static_cast<std::ptrdiff_t>(rank),
                     distances.end());
    return distances[rank];
}

std::vector<IndexRange> segment_plateaus(const Trace& trace, double background_cm, double gap_cm) {
    std::vector<IndexRange> plateaus;
    const double threshold = background_cm - gap_cm;
    std::size_t i = 0;
    while (i < trace.size()) {
        if (trace.points[i].distance_cm < threshold) {
            std::size_t j = i;
            while (j + 1 < trace.size() && trace.points[j + 1].distance_cm < threshold) {
                ++j;
            }
            plateaus.push_back({i, j});
            i = j + 1;
        } else {
            ++i;
        }
    }
    return plateaus;
}

std::vector<ContourCandidate> extract_candidates(const Trace& trace,
                                                 const ClassifierConfig& config) {
    std::vector<ContourCandidate> candidates;
    if (trace.size() < 2) {
        return candidates;
    }

    const double background = background_distance_cm(trace);
    const std::vector<IndexRange> plateaus =
        segment_plateaus(trace, background, config.background_gap_cm);
    if (plateaus.empty()) {
        return candidates;
    }

    const std::vector<double> positions = cumulative_positions(trace);
    const std::size_t n = trace.size();
    const double mean_step = positions.back() / static_cast<double>(n - 1);

    candidates.reserve(plateaus.size());
    for (const IndexRange& plateau : plateaus) {
        const std::size_t s = plateau.first;
        const std::size_t e = plateau.last;

        ContourCandidate c;
        c.start_index = s;
        c.end_index = e;
        c.start_timestamp_ms = trace.points[s].timestamp_ms;
        c.anchor = trace.points[s].position();

        std::vector<double> bottom;
        bottom.reserve(e - s + 1);
        double min_distance = trace.points[s].distance_cm;
        for (std::size_t i = s; i <= e; ++i) {
            bottom.push_back(trace.points[i].distance_cm);
            min_distance = std::min(min_distance, trace.points[i].distance_cm);
        }
        c.bottom_distance_cm = mean(bottom);

        // Extent measured to the first sample past the plateau; one sample of
        // quantization either way.
        const double extent_end = (e + 1 < n) ? positions[e + 1] : positions[e] + mean_step;
        c.length_m = extent_end - positions[s];

        c.bottom_std_cm = window_std(trace, positions, s, config.length_min_m);
        c.context_std_cm = window_std(trace, positions, s, config.length_max_m);

        // Flat-bottom corners: plateau samples within a fixed band of the
        // plateau minimum.
        const double band_top = min_distance + kBottomBandCm;
        std::size_t flat_first = s;
        while (trace.points[flat_first].distance_cm > band_top) {
            ++flat_first;
        }
        std::size_t flat_last = e;
        while (trace.points[flat_last].distance_cm > band_top) {
            --flat_last;
        }

        if (s > 0) {
            const double rise =
                (trace.points[s - 1].distance_cm - trace.points[flat_first].distance_cm) / 100.0;
            const double run = positions[flat_first] - positions[s - 1];
            c.lead_angle_deg = rise > 0.0 ? edge_angle(rise, run) : 90.0;
        }
        if (e + 1 < n) {
            const double rise =
                (trace.points[e + 1].distance_cm - trace.points[flat_last].distance_cm) / 100.0;
            const double run = positions[e + 1] - positions[flat_last];
            c.trail_angle_deg = rise > 0.0 ? edge_angle(rise, run) : 90.0;
        }

        candidates.push_back(c);
    }
    return candidates;
}

}  // namespace curbscan
