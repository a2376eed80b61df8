#pragma once

#include <stdexcept>

namespace ttr {

/// Rank/shape structure violation (adjacent-rank disagreement, rank beyond
/// an unfolding dimension, non-orthogonal input where required).
struct StructureError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Bad configuration value (outlier fraction out of range, unknown mode).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// File missing, short, or malformed.
struct IOError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ttr
