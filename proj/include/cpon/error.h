#ifndef CPON_ERROR_H_
#define CPON_ERROR_H_

#include <stdexcept>
#include <string>

namespace cpon {

// Violated precondition or invariant on a model input.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The cycle cannot carry the mandatory per-ONU reports.
class InfeasibleCycle : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Scenario text could not be parsed. line() is 1-based, 0 when the error is
// not tied to a line (validation of the assembled spec).
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace cpon

#endif  // CPON_ERROR_H_
