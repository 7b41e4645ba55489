#include "curbscan/calibrate.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "curbscan/errors.hpp"

namespace curbscan {

namespace {

nlohmann::json signature_to_json(const EnvironmentSignature& s) {
    return {
        {"signature_id", s.signature_id},
        {"lat", s.surveyed.lat},
        {"lon", s.surveyed.lon},
        {"template",
         {{"length_m", {s.expected.length_min_m, s.expected.length_max_m}},
          {"distance_cm", {s.expected.distance_min_cm, s.expected.distance_max_cm}},
          {"angle_deg", {s.expected.angle_min_deg, s.expected.angle_max_deg}}}},
        {"search_radius_m", s.search_radius_m},
    };
}

EnvironmentSignature signature_from_json(const nlohmann::json& doc) {
    EnvironmentSignature s;
    s.signature_id = doc.at("signature_id").get<std::string>();
    s.surveyed.lat = doc.at("lat").get<double>();
    s.surveyed.lon = doc.at("lon").get<double>();
    const auto& tpl = doc.at("template");
    s.expected.length_min_m = tpl.at("length_m").at(0).get<double>();
    s.expected.length_max_m = tpl.at("length_m").at(1).get<double>();
    s.expected.distance_min_cm = tpl.at("distance_cm").at(0).get<double>();
    s.expected.distance_max_cm = tpl.at("distance_cm").at(1).get<double>();
    s.expected.angle_min_deg = tpl.at("angle_deg").at(0).get<double>();
    s.expected.angle_max_deg = tpl.at("angle_deg").at(1).get<double>();
    s.search_radius_m = doc.value("search_radius_m", 30.0);
    s.validate();
    return s;
}

}  // namespace

bool ContourTemplate::contains(const ContourCandidate& candidate) const {
    return candidate.length_m >= length_min_m && candidate.length_m <= length_max_m &&
           candidate.bottom_distance_cm >= distance_min_cm &&
           candidate.bottom_distance_cm <= distance_max_cm &&
           candidate.lead_angle_deg >= angle_min_deg && candidate.lead_angle_deg <= angle_max_deg &&
           candidate.trail_angle_deg >= angle_min_deg && candidate.trail_angle_deg <= angle_max_deg;
}

void EnvironmentSignature::validate() const {
    if (signature_id.empty()) {
        throw Error(Error::Code::invalid_argument, "signature_id must be non-empty", "signature_id");
    }
    if (!(expected.length_min_m <= expected.length_max_m) ||
        !(expected.distance_min_cm <= expected.distance_max_cm) ||
        !(expected.angle_min_deg <= expected.angle_max_deg)) {
        throw Error(Error::Code::invalid_argument,
                    "signature " + signature_id + " has an empty template range");
    }
    if (!(search_radius_m > 0.0)) {
        throw Error(Error::Code::invalid_argument,
                    "signature " + signature_id + " search radius must be positive");
    }
}

std::vector<EnvironmentSignature> parse_signatures_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Error::Code::malformed_record,
                    std::string("invalid signatures JSON: ") + e.what());
    }
    std::vector<EnvironmentSignature> signatures;
    try {
        for (const auto& entry : doc) {
            signatures.push_back(signature_from_json(entry));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(Error::Code::malformed_record,
                    std::string("invalid signature field: ") + e.what());
    }
    return signatures;
}

std::vector<EnvironmentSignature> load_signatures_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Error::Code::io_failure, "cannot open signatures file " + path.string());
    }
    return parse_signatures_json(std::string(std::istreambuf_iterator<char>(in), {}));
}

std::string signatures_json(std::span<const EnvironmentSignature> signatures) {
    nlohmann::json doc = nlohmann::json::array();
    for (const EnvironmentSignature& s : signatures) {
        doc.push_back(signature_to_json(s));
    }
    return doc.dump(2);
}

MatchReport match_signatures(std::span<const ContourCandidate> candidates,
                             std::span<const EnvironmentSignature> signatures) {
    MatchReport report;
    for (const EnvironmentSignature& signature : signatures) {
        std::vector<std::size_t> hits;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (haversine_m(candidates[i].anchor, signature.surveyed) > signature.search_radius_m) {
                continue;
            }
            if (signature.expected.contains(candidates[i])) {
                hits.push_back(i);
            }
        }
        if (hits.size() == 1) {
            const ContourCandidate& c = candidates[hits.front()];
            report.matches.push_back(
                {signature.signature_id, hits.front(), c.start_timestamp_ms, c.anchor});
        } else if (hits.empty()) {
            report.skipped.push_back("signature " + signature.signature_id +
                                     ": no matching candidate within radius");
        } else {
            report.skipped.push_back("signature " + signature.signature_id + ": ambiguous (" +
                                     std::to_string(hits.size()) + " candidates match)");
        }
    }
    std::sort(report.matches.begin(), report.matches.end(),
              [](const SignatureMatch& a, const SignatureMatch& b) {
                  return a.timestamp_ms < b.timestamp_ms;
              });
    return report;
}

OffsetFunction::OffsetFunction(std::vector<DriftKnot> knots) : knots_(std::move(knots)) {
    std::sort(knots_.begin(), knots_.end(),
              [](const DriftKnot& a, const DriftKnot& b) { return a.timestamp_ms < b.timestamp_ms; });
}

EnuVector OffsetFunction::at(std::int64_t timestamp_ms) const {
    if (knots_.empty()) {
        return {0.0, 0.0};
    }
    if (timestamp_ms <= knots_.front().timestamp_ms) {
        return knots_.front().correction;
    }
    if (timestamp_ms >= knots_.back().timestamp_ms) {
        return knots_.back().correction;
    }
    for (std::size_t i = 1; i < knots_.size(); ++i) {
        if (timestamp_ms <= knots_[i].timestamp_ms) {
            const DriftKnot& a = knots_[i - 1];
            const DriftKnot& b = knots_[i];
            const double t = static_cast<double>(timestamp_ms - a.timestamp_ms) /
                             static_cast<double>(b.timestamp_ms - a.timestamp_ms);
            return {a.correction.east_m + t * (b.correction.east_m - a.correction.east_m),
                    a.correction.north_m + t * (b.correction.north_m - a.correction.north_m)};
        }
    }
    return knots_.back().correction;
}

OffsetFunction compute_offsets(std::span<const SignatureMatch> matches,
                               std::span<const EnvironmentSignature> signatures) {
    std::vector<DriftKnot> knots;
    knots.reserve(matches.size());
    for (const SignatureMatch& match : matches) {
        const auto it = std::find_if(signatures.begin(), signatures.end(),
                                     [&](const EnvironmentSignature& s) {
                                         return s.signature_id == match.signature_id;
                                     });
        if (it == signatures.end()) {
            throw Error(Error::Code::invalid_argument,
                        "match references unknown signature " + match.signature_id);
        }
        const EnuVector correction = LocalFrame(match.observed).to_local(it->surveyed);
        knots.push_back({match.timestamp_ms, correction});
    }
    return OffsetFunction(std::move(knots));
}

Trace apply_offsets(const Trace& trace, const OffsetFunction& offsets) {
    Trace corrected = trace;
    if (offsets.is_zero()) {
        return corrected;
    }
    for (TracePoint& p : corrected.points) {
        const EnuVector c = offsets.at(p.timestamp_ms);
        const LatLon shifted = offset_point(p.position(), c.east_m, c.north_m);
        p.latitude = shifted.lat;
        p.longitude = shifted.lon;
    }
    return corrected;
}

}  // namespace curbscan
