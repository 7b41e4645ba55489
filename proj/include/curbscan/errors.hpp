#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace curbscan {

// Single exception type for all domain errors. The code discriminates the
// failure class, field/index carry the offending location when one exists.
class Error : public std::runtime_error {
  public:
    enum class Code {
        malformed_record,
        out_of_range,
        non_monotone_timestamp,
        empty_trace,
        zero_speed,
        too_few_samples,
        non_positive_rise,
        zero_ground_truth,
        invalid_argument,
        io_failure,
    };

    Error(Code code, std::string message, std::string field = {}, std::ptrdiff_t index = -1)
        : std::runtime_error(std::move(message)), code_(code), field_(std::move(field)), index_(index) {}

    Code code() const noexcept { return code_; }
    const std::string& field() const noexcept { return field_; }
    std::ptrdiff_t index() const noexcept { return index_; }

  private:
    Code code_;
    std::string field_;
    std::ptrdiff_t index_;
};

[[noreturn]] inline void throw_malformed(std::string_view field, std::string_view detail) {
    throw Error(Error::Code::malformed_record,
                "malformed record: " + std::string(detail), std::string(field));
}

[[noreturn]] inline void throw_out_of_range(std::string_view field, std::string_view detail) {
    throw Error(Error::Code::out_of_range,
                "value out of range: " + std::string(detail), std::string(field));
}

}  // namespace curbscan
