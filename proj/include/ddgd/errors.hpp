#pragma once

#include <stdexcept>
#include <string>

namespace ddgd {

/// Invalid user input: bad ids, malformed configs, non-stochastic matrices.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numeric failure: eigensolver breakdown, certification failure,
/// push-sum weight collapse, non-contracting matrix powers.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ddgd
