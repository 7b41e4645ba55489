#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "curbscan/contour.hpp"
#include "curbscan/geo.hpp"
#include "curbscan/trace.hpp"

namespace curbscan {

// Acceptance ranges a detected contour must fall in to count as a given
// surveyed roadside object.
struct ContourTemplate {
    double length_min_m{0.0};
    double length_max_m{0.0};
    double distance_min_cm{0.0};
    double distance_max_cm{0.0};
    double angle_min_deg{0.0};
    double angle_max_deg{180.0};

    bool contains(const ContourCandidate& candidate) const;
};

struct EnvironmentSignature {
    std::string signature_id;
    LatLon surveyed;
    ContourTemplate expected;
    double search_radius_m{30.0};

    void validate() const;
};

// Signatures file: JSON array of signature records.
std::vector<EnvironmentSignature> parse_signatures_json(const std::string& text);
std::vector<EnvironmentSignature> load_signatures_json(const std::filesystem::path& path);
std::string signatures_json(std::span<const EnvironmentSignature> signatures);

struct SignatureMatch {
    std::string signature_id;
    std::size_t candidate_index{0};
    std::int64_t timestamp_ms{0};
    LatLon observed;
};

struct MatchReport {
    std::vector<SignatureMatch> matches;  // sorted by timestamp
    std::vector<std::string> skipped;     // absent or ambiguous signatures
};

// For each signature, the unique in-radius candidate matching its template.
// Ambiguous or absent signatures are skipped and reported, never guessed.
MatchReport match_signatures(std::span<const ContourCandidate> candidates,
                             std::span<const EnvironmentSignature> signatures);

struct DriftKnot {
    std::int64_t timestamp_ms{0};
    EnuVector correction;  // surveyed minus observed
};

// Piecewise-linear correction over time: linear between knots, constant
// outside, identically zero with no knots.
class OffsetFunction {
  public:
    OffsetFunction() = default;
    explicit OffsetFunction(std::vector<DriftKnot> knots);

    EnuVector at(std::int64_t timestamp_ms) const;
    bool is_zero() const { return knots_.empty(); }
    const std::vector<DriftKnot>& knots() const { return knots_; }

  private:
    std::vector<DriftKnot> knots_;
};

OffsetFunction compute_offsets(std::span<const SignatureMatch> matches,
                               std::span<const EnvironmentSignature> signatures);

// Shifts every point's coordinates by the correction at its timestamp;
// timestamps, distances and speeds are untouched.
Trace apply_offsets(const Trace& trace, const OffsetFunction& offsets);

}  // namespace curbscan
