#pragma once

#include <Eigen/Cholesky>

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "plvar/errors.hpp"
#include "plvar/model.hpp"

namespace plvar {

/// Lagged data matrix Z = [Y_0 Y_-1 ... Y_-k]. Row r holds
/// [y_t, y_{t-1}, ..., y_{t-k}] for t = K+1+r (1-based), so every lag k <= K
/// produces the same N-K rows and scores stay comparable across k. The
/// variable v (1-based) at lag l occupies 0-based column l*d + v - 1.
struct LaggedDataMatrix {
  Matrix values;  // (N-K) x (k+1)d
  int d = 0;
  int k = 0;

  int rows() const { return static_cast<int>(values.rows()); }
};

/// 0-based column of variable `v` (1-based) at lag `lag` in a lagged matrix.
constexpr int lagged_column(int lag, int v, int d) { return lag * d + v - 1; }

inline LaggedDataMatrix build_lagged_matrix(const TimeSeries& series, int k,
                                            int max_lag) {
  const int n = series.length();
  const int d = series.dims();
  if (k < 1 || k > max_lag) {
    throw std::invalid_argument("lag k must satisfy 1 <= k <= max_lag");
  }
  if (max_lag >= n) {
    throw std::invalid_argument("max_lag must be smaller than the series length");
  }
  const int rows = n - max_lag;
  Matrix z(rows, (k + 1) * d);
  for (int r = 0; r < rows; ++r) {
    const int t = max_lag + r;  // 0-based time of the lag-0 entry
    for (int l = 0; l <= k; ++l) {
      z.block(r, l * d, 1, d) = series.values.row(t - l);
    }
  }
  return {std::move(z), d, k};
}

/// Unscaled cross-product S = Z'Z and the row count that produced it.
struct ScatterMatrix {
  Matrix S;
  int n = 0;
};

inline ScatterMatrix scatter(const LaggedDataMatrix& z) {
  return {z.values.transpose() * z.values, z.rows()};
}

/// Markov blanket of a node, as 0-based column indices into a scatter matrix.
struct MarkovBlanket {
  int target = -1;
  std::vector<int> members;  // sorted ascending, never contains target

  int size() const { return static_cast<int>(members.size()); }
};

namespace detail {

// log det via Cholesky; the caller provides context for the error message
inline double log_det_spd(const Matrix& m, int node, std::span<const int> blanket) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    std::string members = "{";
    for (size_t i = 0; i < blanket.size(); ++i) {
      members += (i ? "," : "") + std::to_string(blanket[i]);
    }
    members += "}";
    throw SingularScatterError("scatter submatrix not positive definite for node " +
                               std::to_string(node) + " with blanket " + members);
  }
  return 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
}

inline Matrix submatrix(const Matrix& s, std::span<const int> idx, double jitter) {
  const int m = static_cast<int>(idx.size());
  Matrix out(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) out(i, j) = s(idx[i], idx[j]);
    out(i, i) += jitter;
  }
  return out;
}

}  // namespace detail

/// Log local fractional marginal pseudo-likelihood of `node` given `blanket`:
///
///   -((n-1)/2) ln pi + lnG((n+p)/2) - lnG((p+1)/2) - ((2p+1)/2) ln n
///   - ((n-1)/2) (ln|S_fa| - ln|S_mb|)
///
/// with p = |blanket|, fa = blanket + node, and ln|S_{}| = 0. Evaluated fully
/// in the log domain; the literal Gamma form overflows for n beyond ~170.
/// `jitter` is an optional diagonal ridge for near-singular scatter matrices
/// from real data (0 disables it).
inline double log_local_fmpl(const Matrix& s, int node, std::span<const int> blanket,
                             int n, double jitter = 0.0) {
  const int p = static_cast<int>(blanket.size());
  if (p > n - 1) {
    throw std::invalid_argument("blanket size " + std::to_string(p) +
                                " exceeds the well-definedness bound n-1 = " +
                                std::to_string(n - 1));
  }
  std::vector<int> family(blanket.begin(), blanket.end());
  family.push_back(node);
  const double logdet_fa =
      detail::log_det_spd(detail::submatrix(s, family, jitter), node, blanket);
  const double logdet_mb =
      p == 0 ? 0.0
             : detail::log_det_spd(detail::submatrix(s, blanket, jitter), node, blanket);
  return -(n - 1) / 2.0 * std::log(std::numbers::pi) + std::lgamma((n + p) / 2.0) -
         std::lgamma((p + 1) / 2.0) - (2 * p + 1) / 2.0 * std::log(double(n)) -
         (n - 1) / 2.0 * (logdet_fa - logdet_mb);
}

inline double log_local_fmpl(const ScatterMatrix& s, int node,
                             std::span<const int> blanket, double jitter = 0.0) {
  return log_local_fmpl(s.S, node, blanket, s.n, jitter);
}

/// Temporal structure prior (base kd): log p(mb) = -gamma * p * ln(kd).
inline double log_prior_temporal(int p, int d, int k, double gamma) {
  if (p < 0 || d < 1 || k < 1 || gamma < 0.0) {
    throw std::invalid_argument("log_prior_temporal: invalid arguments");
  }
  if (k * d < 2) {
    throw std::invalid_argument("log_prior_temporal: kd < 2 degenerates the log base");
  }
  return -gamma * p * std::log(double(k) * d);
}

/// Contemporaneous structure prior (base d-1). For d = 2 the base is 1 and
/// the prior is identically zero.
inline double log_prior_contemporaneous(int p, int d, double gamma) {
  if (p < 0 || gamma < 0.0) {
    throw std::invalid_argument("log_prior_contemporaneous: invalid arguments");
  }
  if (d < 2) {
    throw std::invalid_argument("log_prior_contemporaneous: requires d >= 2");
  }
  return -gamma * p * std::log(double(d - 1));
}

}  // namespace plvar
