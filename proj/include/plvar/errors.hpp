#pragma once

#include <stdexcept>
#include <string>

namespace plvar {

// Raised when a scatter submatrix fails its positive-definite factorization.
// Under the blanket-size guard p_i <= n-1 this indicates degenerate data
// (constant columns, duplicated rows) rather than an algorithmic state, so it
// is surfaced instead of being mapped to a -inf score.
class SingularScatterError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rank-deficient regression design (OLS or restricted GLS).
class SingularDesignError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Residual sample covariance is not positive definite.
class DegenerateResidualsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Random model generation exhausted its stabilization attempts.
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed external input (CSV / JSON files).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace plvar
