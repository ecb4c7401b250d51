#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pcd {

// Malformed input file. line is 1-based; 0 means "no line information".
class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

// A module contract failed at runtime. The CLI maps this to exit code 3.
class InvariantViolation : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

} // namespace pcd
