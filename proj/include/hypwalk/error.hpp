#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hypwalk {

enum class ErrorCode {
  invalid_letter,
  invalid_model,
  budget_exceeded,
  candidate_budget_exceeded,
  not_loxodromic,
  wrong_model,
  invalid_probabilities,
  wrong_distribution,
  index_out_of_range,
  invalid_epsilon,
  hypothesis_violated,
  h_gens_not_basis,
  adjacent_index,
  precondition,
  parse_error,
  schema_violation,
  io_error,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hypwalk
