#pragma once

#include <filesystem>
#include <string>

namespace curbscan {

// Feature thresholds for the parked-vehicle classifier. Defaults are the
// drive-test calibration; all nine knobs are config-file tunable.
struct ClassifierConfig {
    double distance_min_cm{70.0};
    double distance_max_cm{250.0};
    double sigma_small_cm{10.9};
    double sigma_big_cm{51.3};
    double length_min_m{2.1};
    double length_max_m{9.0};
    double angle_min_deg{80.0};
    double angle_max_deg{130.0};
    double background_gap_cm{100.0};

    void validate() const;  // throws Error{invalid_argument}
};

ClassifierConfig parse_classifier_config(const std::string& json_text);
ClassifierConfig load_classifier_config(const std::filesystem::path& path);
std::string classifier_config_json(const ClassifierConfig& config);
void save_classifier_config(const std::filesystem::path& path, const ClassifierConfig& config);

}  // namespace curbscan
