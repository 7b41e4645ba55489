#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "curbscan/config.hpp"
#include "curbscan/geo.hpp"
#include "curbscan/trace.hpp"

namespace curbscan {

// A segmented below-background plateau (a U-shape bottom) with the statistics
// the classifier tests: two-scale dispersion, edge angles, metric length.
struct ContourCandidate {
    std::size_t start_index{0};
    std::size_t end_index{0};  // inclusive
    std::int64_t start_timestamp_ms{0};
    double bottom_distance_cm{0.0};
    double bottom_std_cm{0.0};
    double context_std_cm{0.0};
    double lead_angle_deg{90.0};
    double trail_angle_deg{90.0};
    double length_m{0.0};
    LatLon anchor;
};

struct IndexRange {
    std::size_t first{0};
    std::size_t last{0};  // inclusive

    std::size_t count() const { return last - first + 1; }
};

// Indices i >= start with timestamp(i) <= timestamp(start) + length/speed,
// using the speed at the window start. Throws Error{zero_speed} when the
// vehicle is stationary there.
IndexRange window_indices(const Trace& trace, std::size_t start, double window_length_m);

// Sample standard deviation (n-1 denominator). Throws Error{too_few_samples}.
double sample_std(std::span<const double> values);

// Cumulative distance traveled before index i, meters (left-endpoint speed
// over each timestamp gap, km/h converted at exactly /3.6).
double longitudinal_position(const Trace& trace, std::size_t i);

// positions[i] == longitudinal_position(trace, i) for all i.
std::vector<double> cumulative_positions(const Trace& trace);

// Angle between the U-bottom direction and an edge vector, degrees in
// (0, 180): run > 0 leans forward (< 90), run < 0 leans backward (> 90).
// Throws Error{non_positive_rise}.
double edge_angle(double rise_m, double run_m);

// Robust no-obstacle baseline: 95th percentile of the distance signal.
double background_distance_cm(const Trace& trace);

// Maximal runs of samples closer than background - gap.
std::vector<IndexRange> segment_plateaus(const Trace& trace, double background_cm, double gap_cm);

std::vector<ContourCandidate> extract_candidates(const Trace& trace,
                                                 const ClassifierConfig& config);

}  // namespace curbscan
