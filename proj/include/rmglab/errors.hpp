#pragma once

#include <stdexcept>
#include <string>

namespace rmglab {

/// Classifies every error the engine can raise; tests and the CLI dispatch on it.
enum class error_kind {
    invalid_simplex_row,  // probability row has a negative entry or does not sum to 1
    reward_out_of_range,  // reward outside [0,1]
    radius_out_of_range,  // uncertainty radius outside (0,1]
    dimension_mismatch,   // inputs disagree on n/H/S/A sizes or indices
    parse_error,          // malformed or structurally incomplete document
    empty_vector,         // value/probability vector of length 0
    invalid_config,       // bad learner or schedule configuration
    resource_limit,       // projected sample count exceeds the configured budget
};

/// Single exception type carrying the kind tag plus a human-readable location/message.
class rmg_error : public std::runtime_error {
  public:
    rmg_error(error_kind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    error_kind kind() const { return kind_; }

  private:
    error_kind kind_;
};

inline const char* to_string(error_kind k) {
    switch (k) {
    case error_kind::invalid_simplex_row: return "invalid_simplex_row";
    case error_kind::reward_out_of_range: return "reward_out_of_range";
    case error_kind::radius_out_of_range: return "radius_out_of_range";
    case error_kind::dimension_mismatch: return "dimension_mismatch";
    case error_kind::parse_error: return "parse_error";
    case error_kind::empty_vector: return "empty_vector";
    case error_kind::invalid_config: return "invalid_config";
    case error_kind::resource_limit: return "resource_limit";
    }
    return "unknown";
}

} // namespace rmglab
