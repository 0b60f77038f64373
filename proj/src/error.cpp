#include "hypwalk/error.hpp"

namespace hypwalk {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_letter: return "invalid-letter";
    case ErrorCode::invalid_model: return "invalid-model";
    case ErrorCode::budget_exceeded: return "budget-exceeded";
    case ErrorCode::candidate_budget_exceeded: return "candidate-budget-exceeded";
    case ErrorCode::not_loxodromic: return "not-loxodromic";
    case ErrorCode::wrong_model: return "wrong-model";
    case ErrorCode::invalid_probabilities: return "invalid-probabilities";
    case ErrorCode::wrong_distribution: return "wrong-distribution";
    case ErrorCode::index_out_of_range: return "index-out-of-range";
    case ErrorCode::invalid_epsilon: return "invalid-epsilon";
    case ErrorCode::hypothesis_violated: return "hypothesis-violated";
    case ErrorCode::h_gens_not_basis: return "H_gens-not-a-basis";
    case ErrorCode::adjacent_index: return "adjacent-index";
    case ErrorCode::precondition: return "precondition";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::schema_violation: return "schema-violation";
    case ErrorCode::io_error: return "io-error";
  }
  return "unknown";
}

}  // namespace hypwalk
