#pragma once

#include <stdexcept>

namespace mbt {

// Input-side failures: malformed files, schema/config violations,
// mismatched shapes between user-supplied artifacts. The CLI maps these
// to exit code 2; everything else (fit/runtime errors) exits 1.
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mbt
