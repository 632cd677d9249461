#pragma once

#include <stdexcept>
#include <string>

namespace scedft {

// Error kinds map onto CLI exit codes: config errors -> 1, invariant
// violations -> 2, solver non-convergence -> 3.
enum class ErrorKind {
  invalid_argument,
  size_exceeded,
  ambiguous_assignment,
  singular_density,
  invalid_density,
  iteration_limit,
  invariant_violation,
  table_invalid,
  configuration_rejected,
  config,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error invalid_argument_error(const std::string& what) { return {ErrorKind::invalid_argument, what}; }
inline Error size_exceeded_error(const std::string& what) { return {ErrorKind::size_exceeded, what}; }
inline Error ambiguous_assignment_error(const std::string& what) { return {ErrorKind::ambiguous_assignment, what}; }
inline Error singular_density_error(const std::string& what) { return {ErrorKind::singular_density, what}; }
inline Error invalid_density_error(const std::string& what) { return {ErrorKind::invalid_density, what}; }
inline Error iteration_limit_error(const std::string& what) { return {ErrorKind::iteration_limit, what}; }
inline Error invariant_violation_error(const std::string& what) { return {ErrorKind::invariant_violation, what}; }
inline Error table_invalid_error(const std::string& what) { return {ErrorKind::table_invalid, what}; }
inline Error configuration_rejected_error(const std::string& what) { return {ErrorKind::configuration_rejected, what}; }
inline Error config_error(const std::string& what) { return {ErrorKind::config, what}; }

}  // namespace scedft
