#include "curbscan/fleet.hpp"

#include <cmath>
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

void require_non_negative(double value, const char* name) {
    if (!(value >= 0.0)) {
        throw Error(Error::Code::invalid_argument, std::string(name) + " must be non-negative",
                    name);
    }
}

double truncate_2dp(double value) { return std::trunc(value * 100.0) / 100.0; }

nlohmann::json parse_doc(const std::string& text, const char* what) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Error::Code::malformed_record,
                    std::string("invalid ") + what + " JSON: " + e.what());
    }
}

}  // namespace

void FleetParams::validate() const {
    require_positive(city_area_m2, "city_area_m2");
    require_positive(road_area_ratio, "road_area_ratio");
    require_positive(road_width_m, "road_width_m");
    require_positive(update_frequency_hz, "update_frequency_hz");
    require_positive(detection_accuracy, "detection_accuracy");
    require_positive(cruising_speed_ms, "cruising_speed_ms");
    if (road_area_ratio > 1.0) {
        throw Error(Error::Code::invalid_argument, "road_area_ratio must be <= 1");
    }
    if (detection_accuracy > 1.0) {
        throw Error(Error::Code::invalid_argument, "detection_accuracy must be <= 1");
    }
}

void CruisingParams::validate() const {
    require_non_negative(search_minutes, "search_minutes");
    require_non_negative(turnover_per_day, "turnover_per_day");
    require_non_negative(speed_kmh, "speed_kmh");
    require_non_negative(fuel_l_per_100km, "fuel_l_per_100km");
}

FleetParams parse_fleet_params(const std::string& json_text) {
    const nlohmann::json doc = parse_doc(json_text, "fleet parameters");
    FleetParams params;
    try {
        params.city_area_m2 = doc.at("area_km2").get<double>() * 1e6;
        params.road_area_ratio = doc.at("road_ratio").get<double>();
        params.road_width_m = doc.at("road_width_m").get<double>();
        params.update_frequency_hz = 1.0 / doc.at("update_s").get<double>();
        params.detection_accuracy = doc.at("accuracy").get<double>();
        params.cruising_speed_ms = doc.at("speed_kmh").get<double>() / 3.6;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Error::Code::malformed_record,
                    std::string("invalid fleet parameter: ") + e.what());
    }
    params.validate();
    return params;
}

FleetParams load_fleet_params(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Error::Code::io_failure, "cannot open parameter file " + path.string());
    }
    return parse_fleet_params(std::string(std::istreambuf_iterator<char>(in), {}));
}

CruisingParams parse_cruising_params(const std::string& json_text) {
    const nlohmann::json doc = parse_doc(json_text, "cruising parameters");
    CruisingParams params;
    try {
        params.search_minutes = doc.at("search_minutes").get<double>();
        params.turnover_per_day = doc.at("turnover_per_day").get<double>();
        params.speed_kmh = doc.at("speed_kmh").get<double>();
        params.fuel_l_per_100km = doc.at("fuel_l_per_100km").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(Error::Code::malformed_record,
                    std::string("invalid cruising parameter: ") + e.what());
    }
    params.validate();
    return params;
}

CruisingParams load_cruising_params(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(Error::Code::io_failure, "cannot open parameter file " + path.string());
    }
    return parse_cruising_params(std::string(std::istreambuf_iterator<char>(in), {}));
}

double road_length_m(double city_area_m2, double road_area_ratio, double road_width_m) {
    require_positive(city_area_m2, "city_area_m2");
    require_positive(road_area_ratio, "road_area_ratio");
    require_positive(road_width_m, "road_width_m");
    return city_area_m2 * road_area_ratio / road_width_m;
}

UnitEstimate units_needed(double road_length_m, double speed_ms, double update_frequency_hz,
                          double detection_accuracy) {
    require_positive(road_length_m, "road_length_m");
    require_positive(speed_ms, "speed_ms");
    require_positive(update_frequency_hz, "update_frequency_hz");
    require_positive(detection_accuracy, "detection_accuracy");

    UnitEstimate estimate;
    estimate.exact =
        road_length_m * update_frequency_hz / (speed_ms * detection_accuracy);
    // Guard against N.000...1 artifacts promoting an exact integer.
    estimate.units = static_cast<long long>(std::ceil(estimate.exact - 1e-9));
    return estimate;
}

std::vector<UnitsCurveRow> units_curve(double road_length_m, std::span<const double> speeds_kmh,
                                       std::span<const double> accuracies,
                                       std::span<const double> update_seconds) {
    if (speeds_kmh.empty() || accuracies.empty() || update_seconds.empty()) {
        throw Error(Error::Code::invalid_argument, "units_curve ranges must be non-empty");
    }
    std::vector<UnitsCurveRow> rows;
    rows.reserve(speeds_kmh.size() * accuracies.size() * update_seconds.size());
    for (const double update_s : update_seconds) {
        for (const double speed_kmh : speeds_kmh) {
            for (const double accuracy : accuracies) {
                const UnitEstimate e =
                    units_needed(road_length_m, speed_kmh / 3.6, 1.0 / update_s, accuracy);
                rows.push_back({update_s, speed_kmh, accuracy, e.exact, e.units});
            }
        }
    }
    return rows;
}

CruisingCost cruising_cost(const CruisingParams& params) {
    params.validate();
    CruisingCost cost;
    cost.min_per_day = params.search_minutes * params.turnover_per_day;
    cost.min_per_year = cost.min_per_day * 365.0;

    cost.km_per_day_exact = cost.min_per_day / 60.0 * params.speed_kmh;
    cost.km_per_year_exact = cost.km_per_day_exact * 365.0;
    cost.litres_per_year_exact = cost.km_per_year_exact * params.fuel_l_per_100km / 100.0;

    // Daily distance is truncated to 2 decimals before annualizing; the
    // rounded figures only reproduce under this order.
    cost.km_per_day = truncate_2dp(cost.km_per_day_exact);
    cost.km_per_year = cost.km_per_day * 365.0;
    cost.litres_per_year = cost.km_per_year * params.fuel_l_per_100km / 100.0;
    return cost;
}

}  // namespace curbscan
