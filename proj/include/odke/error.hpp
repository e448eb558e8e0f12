#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace odke {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. `line` is 1-based; 0 when not line oriented.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0, std::size_t offset = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ", byte offset " +
                         std::to_string(offset) + ")"
                   : what),
        line_(line),
        offset_(offset) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t line_;
  std::size_t offset_;
};

// Configuration or precondition failure detected before any work is done.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace odke
