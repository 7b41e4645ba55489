#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace curbscan {

// City-level inputs to the sensing-unit estimator. SI units internally;
// parameter files take km², seconds and km/h (see loaders below).
struct FleetParams {
    double city_area_m2{0.0};
    double road_area_ratio{0.0};       // fraction of city area that is road
    double road_width_m{0.0};
    double update_frequency_hz{0.0};   // how often each road point is re-observed
    double detection_accuracy{0.0};    // fraction
    double cruising_speed_ms{0.0};

    void validate() const;
};

struct CruisingParams {
    double search_minutes{0.0};    // per search
    double turnover_per_day{0.0};  // searches per spot per day
    double speed_kmh{0.0};
    double fuel_l_per_100km{0.0};

    void validate() const;
};

// Parameter files: flat JSON with unit-suffixed names
// {area_km2, road_ratio, road_width_m, update_s, accuracy, speed_kmh} and
// {search_minutes, turnover_per_day, speed_kmh, fuel_l_per_100km}.
FleetParams parse_fleet_params(const std::string& json_text);
FleetParams load_fleet_params(const std::filesystem::path& path);
CruisingParams parse_cruising_params(const std::string& json_text);
CruisingParams load_cruising_params(const std::filesystem::path& path);

// Total road length L = area * ratio / width, meters.
double road_length_m(double city_area_m2, double road_area_ratio, double road_width_m);

struct UnitEstimate {
    double exact{0.0};        // L * tau / (nu * gamma)
    long long units{0};       // ceiling: fractional vehicles cannot patrol
};

UnitEstimate units_needed(double road_length_m, double speed_ms, double update_frequency_hz,
                          double detection_accuracy);

struct UnitsCurveRow {
    double update_s{0.0};
    double speed_kmh{0.0};
    double accuracy{0.0};
    double exact{0.0};
    long long units{0};
};

// Grid evaluation of units_needed over updating time x speed x accuracy.
std::vector<UnitsCurveRow> units_curve(double road_length_m, std::span<const double> speeds_kmh,
                                       std::span<const double> accuracies,
                                       std::span<const double> update_seconds);

struct CruisingCost {
    double min_per_day{0.0};
    double min_per_year{0.0};
    double km_per_day{0.0};      // truncated to 2 decimals before annualizing
    double km_per_year{0.0};
    double litres_per_year{0.0};
    double km_per_day_exact{0.0};
    double km_per_year_exact{0.0};
    double litres_per_year_exact{0.0};
};

CruisingCost cruising_cost(const CruisingParams& params);

}  // namespace curbscan
