#pragma once

#include <stdexcept>
#include <string>

namespace ppanova {

/// Bad arguments or inconsistent inputs (non-square matrices, invalid
/// parameters, unbalanced designs where a balanced one is required, ...).
class invalid_input : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed data file; carries the 1-based line number when known.
class parse_error : public std::runtime_error {
 public:
  parse_error(const std::string& file, long line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
        line_(line) {}
  long line() const noexcept { return line_; }

 private:
  long line_ = 0;
};

/// A statistic could not be evaluated on the observed data (zero variance,
/// non-positive covariance estimate, ...).
class degenerate_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Activity calibration failed to bracket the target intensity.
class calibration_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ppanova
