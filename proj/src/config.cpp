#include "curbscan/config.hpp"

#include <fstream>

#include <json.hpp>

#include "curbscan/errors.hpp"

namespace curbscan {

namespace {

void require_positive(double value, const char* name) {
    if (!(value > 0.0)) {
        throw Error(Error::Code::invalid_argument, std::string(name) + " must be positive", name);
    }
}

}  // namespace

void ClassifierConfig::validate() const {
    require_positive(distance_min_cm, "distance_min_cm");
    require_positive(sigma_small_cm, "sigma_small_cm");
    require_positive(sigma_big_cm, "sigma_big_cm");
    require_positive(length_min_m, "length_min_m");
    require_positive(angle_min_deg, "angle_min_deg");
    require_positive(background_gap_cm, "background_gap_cm");
    if (!(distance_min_cm < distance_max_cm)) {
        throw Error(Error::Code::invalid_argument, "distance_min_cm must be < distance_max_cm");
    }
    if (!(length_min_m < length_max_m)) {
        throw Error(Error::Code::invalid_argument, "length_min_m must be < length_max_m");
    }
    if (!(angle_min_deg < angle_max_deg)) {
        throw Error(Error::Code::invalid_argument, "angle_min_deg must be < angle_max_deg");
    }
}

ClassifierConfig parse_classifier_config(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Error::Code::malformed_record, std::string("invalid config JSON: ") + e.what());
    }
    ClassifierConfig config;
    try {
        config.distance_min_cm = doc.value("distance_min_cm", config.distance_min_cm);
        config.distance_max_cm = doc.value("distance_max_cm", config.distance_max_cm);
        config.sigma_small_cm = doc.value("sigma_small_cm", config.sigma_small_cm);
        config.sigma_big_cm = doc.value("sigma_big_cm", config.sigma_big_cm);
        config.length_min_m = doc.value("length_min_m", config.length_min_m);
        config.length_max_m = doc.value("length_max_m", config.length_max_m);
        config.angle_min_deg = doc.value("angle_min_deg", config.angle_min_deg);
        config.angle_max_deg = doc.value("angle_max_deg", config.angle_max_deg);
        config.background_gap_cm = doc.value("background_gap_cm", config.background_gap_cm);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Error::Code::malformed_record, std::string("invalid config field: ") + e.what());
    }
    config.validate();
    return config;
}

ClassifierConfig load_classifier_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Error::Code::io_failure, "cannot open config file " + path.string());
    }
    return parse_classifier_config(std::string(std::istreambuf_iterator<char>(in), {}));
}

std::string classifier_config_json(const ClassifierConfig& config) {
    const nlohmann::json doc{
        {"distance_min_cm", config.distance_min_cm}, {"distance_max_cm", config.distance_max_cm},
        {"sigma_small_cm", config.sigma_small_cm},   {"sigma_big_cm", config.sigma_big_cm},
        {"length_min_m", config.length_min_m},       {"length_max_m", config.length_max_m},
        {"angle_min_deg", config.angle_min_deg},     {"angle_max_deg", config.angle_max_deg},
        {"background_gap_cm", config.background_gap_cm},
    };
    return doc.dump(2);
}

void save_classifier_config(const std::filesystem::path& path, const ClassifierConfig& config) {
    std::ofstream out(path);
    if (!out) {
        throw Error(Error::Code::io_failure, "cannot write config file " + path.string());
    }
    out << classifier_config_json(config) << '\n';
}

}  // namespace curbscan
