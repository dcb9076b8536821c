#pragma once

#include <stdexcept>

namespace boxkit {

/// Raised when an enumeration would exceed its configured cap.
class cap_exceeded_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace boxkit
