#pragma once

#include <stdexcept>
#include <string>

namespace steal {

// Error taxonomy mirrored by the CLI exit codes: data errors exit 2,
// numeric failures exit 3 (usage errors are handled by the argument parser).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace steal
