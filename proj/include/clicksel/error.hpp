#pragma once

#include <stdexcept>
#include <string>

namespace clicksel {

// Each error class maps to a distinct process exit code in the CLI.
enum class ErrorCode {
  invalid_argument = 2,
  missing_file = 3,
  unsupported_format = 4,
  corrupt_data = 5,
  io_failure = 6,
  dimension_mismatch = 7,
  out_of_bounds = 8,
  empty_input = 9,
  overlapping_instances = 10,
  no_mislabeled_pixels = 11,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace clicksel
