#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bifurc {

/// Shape or conformability violation (matrix/vector sizes, layer dims).
struct dimension_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// NaN or infinity where a finite value is required.
struct nonfinite_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Matrix singular to working tolerance during a direct solve.
struct singular_matrix_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid argument value (empty dataset, zero vector, bad count).
struct argument_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// An iteration failed to reach tolerance; carries the last iterate.
struct convergence_error : std::runtime_error {
  convergence_error(const std::string& msg, std::vector<double> last, double res_norm)
      : std::runtime_error(msg), last_iterate(std::move(last)), residual_norm(res_norm) {}
  std::vector<double> last_iterate;
  double residual_norm = 0.0;
};

/// Training produced a non-finite loss; `epoch` is where it happened.
struct divergence_error : std::runtime_error {
  divergence_error(const std::string& msg, std::size_t at_epoch)
      : std::runtime_error(msg + " (epoch " + std::to_string(at_epoch) + ")"), epoch(at_epoch) {}
  std::size_t epoch = 0;
};

/// Malformed input file; `field` names the offending entry.
struct parse_error : std::runtime_error {
  parse_error(const std::string& msg, std::string bad_field)
      : std::runtime_error(msg + " (field: " + bad_field + ")"), field(std::move(bad_field)) {}
  std::string field;
};

/// Data generation could not produce the requested structure.
struct generation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Every restart of a search produced a non-finite objective.
struct search_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace bifurc
