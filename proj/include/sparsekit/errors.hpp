#pragma once

#include <stdexcept>
#include <string>

namespace sparsekit {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A matrix failed a full-rank requirement (relative SVD threshold 1e-10).
struct RankDeficient : Error {
  using Error::Error;
};

// Column to be added is numerically inside the span of the tracked matrix.
struct DegenerateColumn : Error {
  using Error::Error;
};

struct InvalidIndex : Error {
  using Error::Error;
};

struct InvalidDims : Error {
  using Error::Error;
};

// A greedy solver found no candidate above the correlation floor while its
// stopping criterion was still unmet.
struct NoProgress : Error {
  using Error::Error;
};

struct IterationCapExceeded : Error {
  using Error::Error;
};

// A saddle-point or Gram system was numerically singular.
struct SingularSystem : Error {
  using Error::Error;
};

// A cosupport update pivot 1 +/- alpha(i) fell below threshold.
struct DegeneratePivot : Error {
  using Error::Error;
};

// The Lagrange-multiplier search could not match the noise-norm target.
struct BisectionFailed : Error {
  using Error::Error;
};

// A subset enumeration would exceed its fixed budget.
struct BudgetExceeded : Error {
  using Error::Error;
};

// A bound formula was evaluated outside its admissible range.
struct InvalidDelta : Error {
  using Error::Error;
};

}  // namespace sparsekit
