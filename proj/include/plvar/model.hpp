#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "plvar/errors.hpp"

namespace plvar {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Multivariate time series: rows are time steps, columns are variables.
struct TimeSeries {
  Matrix values;                    // N x d
  std::vector<std::string> names;  // optional column names, empty or size d

  explicit TimeSeries(Matrix v, std::vector<std::string> column_names = {})
      : values(std::move(v)), names(std::move(column_names)) {
    if (values.rows() < 2) {
      throw std::invalid_argument("TimeSeries needs at least 2 time steps, got " +
                                  std::to_string(values.rows()));
    }
    if (values.cols() < 1) {
      throw std::invalid_argument("TimeSeries needs at least 1 variable");
    }
    if (!values.allFinite()) {
      throw std::invalid_argument("TimeSeries contains non-finite entries");
    }
    if (!names.empty() && static_cast<Eigen::Index>(names.size()) != values.cols()) {
      throw std::invalid_argument("TimeSeries column name count does not match data");
    }
  }

  int length() const { return static_cast<int>(values.rows()); }
  int dims() const { return static_cast<int>(values.cols()); }
};

/// Gaussian VAR(k) model: y_t = sum_m A_m y_{t-m} + e_t with e_t ~ N(0, Omega^-1).
struct GvarModel {
  int d = 0;
  int k = 0;
  std::vector<Matrix> lag_matrices;  // A_1..A_k, each d x d
  Matrix precision;                  // Omega, symmetric positive definite

  GvarModel(std::vector<Matrix> lags, Matrix omega)
      : lag_matrices(std::move(lags)), precision(std::move(omega)) {
    if (lag_matrices.empty()) {
      throw std::invalid_argument("GvarModel needs at least one lag matrix");
    }
    k = static_cast<int>(lag_matrices.size());
    d = static_cast<int>(lag_matrices.front().rows());
    for (const Matrix& a : lag_matrices) {
      if (a.rows() != d || a.cols() != d) {
        throw std::invalid_argument("lag matrices must all be d x d");
      }
    }
    if (precision.rows() != d || precision.cols() != d) {
      throw std::invalid_argument("precision matrix must be d x d");
    }
    const double asym = (precision - precision.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12) {
      throw std::invalid_argument("precision matrix is not symmetric (max asymmetry " +
                                  std::to_string(asym) + ")");
    }
    // symmetrize exactly; round-tripped inputs often carry asymmetry below tolerance
    precision = ((precision + precision.transpose()) / 2.0).eval();
    Eigen::LLT<Matrix> llt(precision);
    if (llt.info() != Eigen::Success) {
      throw std::invalid_argument("precision matrix is not positive definite");
    }
  }
};

/// Directed temporal edge: variable `source` at lag `lag` influences `target`.
/// Corresponds to A_lag(target, source) != 0. All indices 1-based.
struct TemporalEdge {
  int lag;
  int source;
  int target;
  auto operator<=>(const TemporalEdge&) const = default;
};

/// GVAR structure: the directed temporal graph plus the undirected
/// contemporaneous graph (nonzero off-diagonals of the precision matrix).
/// Variables are numbered 1..d throughout.
struct GvarStructure {
  int d = 0;
  int k = 0;
  std::set<TemporalEdge> temporal_edges;
  std::set<std::pair<int, int>> contemporaneous_edges;  // {a, b} with a < b

  GvarStructure() = default;

  GvarStructure(int dim, int lag_length, std::set<TemporalEdge> temporal,
                std::set<std::pair<int, int>> contemporaneous)
      : d(dim),
        k(lag_length),
        temporal_edges(std::move(temporal)),
        contemporaneous_edges(std::move(contemporaneous)) {
    if (d < 1 || k < 1) {
      throw std::invalid_argument("GvarStructure needs d >= 1 and k >= 1");
    }
    for (const TemporalEdge& e : temporal_edges) {
      if (e.lag < 1 || e.lag > k || e.source < 1 || e.source > d || e.target < 1 ||
          e.target > d) {
        throw std::invalid_argument("temporal edge index out of range");
      }
    }
    for (const auto& [a, b] : contemporaneous_edges) {
      if (a == b) {
        throw std::invalid_argument("contemporaneous self-pairs are not allowed");
      }
      if (a < 1 || a > d || b < 1 || b > d || a > b) {
        throw std::invalid_argument("contemporaneous edge must satisfy 1 <= a < b <= d");
      }
    }
  }
};

/// Nonzero pattern of a model's lag matrices and precision off-diagonals.
inline GvarStructure structure_of(const GvarModel& model) {
  std::set<TemporalEdge> temporal;
  for (int m = 0; m < model.k; ++m) {
    for (int b = 0; b < model.d; ++b) {
      for (int a = 0; a < model.d; ++a) {
        if (model.lag_matrices[m](b, a) != 0.0) {
          temporal.insert({m + 1, a + 1, b + 1});
        }
      }
    }
  }
  std::set<std::pair<int, int>> contemporaneous;
  for (int a = 0; a < model.d; ++a) {
    for (int b = a + 1; b < model.d; ++b) {
      if (model.precision(a, b) != 0.0) {
        contemporaneous.insert({a + 1, b + 1});
      }
    }
  }
  return {model.d, model.k, std::move(temporal), std::move(contemporaneous)};
}

/// Stacked VAR(1) form of a VAR(k): top block row [A_1 ... A_k], identity
/// blocks on the subdiagonal, zeros elsewhere.
inline Matrix companion_matrix(const GvarModel& model) {
  const int d = model.d;
  const int k = model.k;
  Matrix companion = Matrix::Zero(k * d, k * d);
  for (int m = 0; m < k; ++m) {
    companion.block(0, m * d, d, d) = model.lag_matrices[m];
  }
  for (int i = 1; i < k; ++i) {
    companion.block(i * d, (i - 1) * d, d, d) = Matrix::Identity(d, d);
  }
  return companion;
}

inline double spectral_radius(const Matrix& m) {
  Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

/// True iff the spectral radius of the companion matrix is below 1 - margin.
inline bool is_stable(const GvarModel& model, double margin = 0.0) {
  if (margin < 0.0 || margin >= 1.0) {
    throw std::invalid_argument("stability margin must lie in [0, 1)");
  }
  return spectral_radius(companion_matrix(model)) < 1.0 - margin;
}

struct DetrendResult {
  TimeSeries series;  // residuals y_t - slope*t - intercept
  Vector slope;
  Vector intercept;
};

/// Per-column OLS fit against the time index t = 1..N; returns the residual
/// series together with the fitted slope and intercept vectors.
inline DetrendResult detrend(const TimeSeries& series) {
  const int n = series.length();
  const int d = series.dims();
  Vector t(n);
  for (int i = 0; i < n; ++i) t(i) = i + 1;
  const double t_mean = (n + 1) / 2.0;
  const Vector t_centered = t.array() - t_mean;
  const double t_ss = t_centered.squaredNorm();

  Vector slope(d), intercept(d);
  Matrix resid(n, d);
  for (int j = 0; j < d; ++j) {
    const double y_mean = series.values.col(j).mean();
    const double b =
        t_centered.dot(series.values.col(j) - Vector::Constant(n, y_mean)) / t_ss;
    const double c = y_mean - b * t_mean;
    slope(j) = b;
    intercept(j) = c;
    resid.col(j) = series.values.col(j) - b * t - Vector::Constant(n, c);
  }
  return {TimeSeries(std::move(resid), series.names), std::move(slope),
          std::move(intercept)};
}

struct CenterResult {
  TimeSeries series;
  Vector mean;
};

/// Subtract column means.
inline CenterResult center(const TimeSeries& series) {
  Vector mean = series.values.colwise().mean();
  Matrix centered = series.values.rowwise() - mean.transpose();
  return {TimeSeries(std::move(centered), series.names), std::move(mean)};
}

}  // namespace plvar
