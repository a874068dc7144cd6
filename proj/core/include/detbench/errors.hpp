#pragma once

#include <stdexcept>
#include <string>

namespace detbench {

// Raised on malformed caller input: bad geometry, unparseable files,
// dangling references, out-of-range arguments. The CLI maps this to
// exit code 1; everything else that escapes maps to exit code 2.
class input_error : public std::runtime_error {
 public:
  explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace detbench
