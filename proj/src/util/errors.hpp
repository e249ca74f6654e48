#ifndef LINKMSE_UTIL_ERRORS_HPP
#define LINKMSE_UTIL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace linkmse {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Violated precondition or contract (K < 2, infeasible labeling, ...).
struct ConstraintError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TooLargeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace linkmse

#endif
