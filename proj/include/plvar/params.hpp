#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <utility>
#include <vector>

#include "plvar/errors.hpp"
#include "plvar/model.hpp"
#include "plvar/scoring.hpp"
#include "plvar/search.hpp"

namespace plvar {

struct FitDiagnostics {
  int iterations = 0;
  std::vector<double> loglik_trajectory;  // one entry per outer iteration
  bool converged = false;
  double final_delta = std::numeric_limits<double>::infinity();
};

/// Gaussian log-likelihood of a precision matrix against a sample covariance
/// (MLE normalization): (n/2) (ln|Omega| - tr(W Omega) - d ln 2pi).
inline double gaussian_loglik(const Matrix& omega, const Matrix& sample_cov, int n) {
  Eigen::LLT<Matrix> llt(omega);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("gaussian_loglik: precision not positive definite");
  }
  const double logdet = 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
  const int d = static_cast<int>(omega.rows());
  return n / 2.0 *
         (logdet - (sample_cov * omega).trace() - d * std::log(2.0 * std::numbers::pi));
}

/// Restricted generalized least squares for the lag matrices: minimizes
/// sum_t (y_t - B z_t)' Omega (y_t - B z_t) over the structure-permitted
/// entries of B = [A_1 ... A_k], all other entries pinned at exactly zero.
/// The normal equations couple the free coefficients through Omega and the
/// Gram matrix of the lagged regressors and are solved by one SPD
/// factorization, coefficients ordered by (node, column).
inline std::vector<Matrix> estimate_lag_matrices_given_omega(
    const LaggedDataMatrix& z, const GvarStructure& structure, const Matrix& omega) {
  const int d = z.d;
  const int k = z.k;
  if (structure.d != d || structure.k != k) {
    throw std::invalid_argument("structure dimensions do not match the lagged matrix");
  }
  if (omega.rows() != d || omega.cols() != d) {
    throw std::invalid_argument("omega must be d x d");
  }

  if (Eigen::LLT<Matrix>(omega).info() != Eigen::Success) {
    throw std::invalid_argument("omega must be positive definite");
  }

  // free coefficients as (node b, lagged regressor column c in 0..kd-1)
  std::vector<std::pair<int, int>> free_coef;
  std::vector<int> per_node(d, 0);
  for (const TemporalEdge& e : structure.temporal_edges) {
    free_coef.emplace_back(e.target - 1, (e.lag - 1) * d + e.source - 1);
    if (++per_node[e.target - 1] > z.rows() - 1) {
      throw std::invalid_argument("node " + std::to_string(e.target) +
                                  " has more parents than rows allow");
    }
  }
  std::sort(free_coef.begin(), free_coef.end());

  std::vector<Matrix> lags(k, Matrix::Zero(d, d));
  if (free_coef.empty()) return lags;

  const auto& y = z.values.leftCols(d);         // responses, lag 0
  const auto& x = z.values.rightCols(k * d);    // lagged regressors
  const Matrix gram = x.transpose() * x;        // kd x kd
  const Matrix cross = y.transpose() * x;       // d x kd

  const int nf = static_cast<int>(free_coef.size());
  Matrix system(nf, nf);
  Vector rhs(nf);
  for (int r = 0; r < nf; ++r) {
    const auto [b, c] = free_coef[r];
    rhs(r) = omega.row(b).dot(cross.col(c));
    for (int s = 0; s < nf; ++s) {
      const auto [j, e] = free_coef[s];
      system(r, s) = omega(b, j) * gram(c, e);
    }
  }
  Eigen::LLT<Matrix> llt(system);
  if (llt.info() != Eigen::Success) {
    throw SingularDesignError("restricted GLS system is singular");
  }
  const Vector beta = llt.solve(rhs);
  for (int r = 0; r < nf; ++r) {
    const auto [b, c] = free_coef[r];
    lags[c / d](b, c % d) = beta(r);
  }
  return lags;
}

/// Maximum-likelihood precision matrix under a known zero pattern, via
/// cyclic node-wise regressions on the working covariance (Hastie et al.'s
/// modified regression algorithm). At convergence the inverse of the
/// estimate matches the sample covariance on the diagonal and on every edge,
/// and off-pattern entries are exactly zero.
inline Matrix estimate_omega_given_pattern(const TimeSeries& resid,
                                           const std::set<std::pair<int, int>>& edges,
                                           double tol = 1e-8, int max_cycles = 500) {
  const int n = resid.length();
  const int d = resid.dims();
  const Matrix sample_cov = resid.values.transpose() * resid.values / double(n);
  if (Eigen::LLT<Matrix>(sample_cov).info() != Eigen::Success) {
    throw DegenerateResidualsError(
        "residual sample covariance is not positive definite");
  }
  if (d == 1) {
    return Matrix::Constant(1, 1, 1.0 / sample_cov(0, 0));
  }

  std::vector<std::vector<int>> neighbors(d);
  for (const auto& [a, b] : edges) {
    if (a < 1 || b < 1 || a > d || b > d || a == b) {
      throw std::invalid_argument("invalid contemporaneous edge in pattern");
    }
    neighbors[a - 1].push_back(b - 1);
    neighbors[b - 1].push_back(a - 1);
  }
  for (auto& nb : neighbors) std::sort(nb.begin(), nb.end());

  // others[j] = all indices but j; pos maps variable -> row in the reduced block
  Matrix working = sample_cov;
  const auto solve_column = [&](int j, Vector* beta_out) -> Vector {
    std::vector<int> others;
    others.reserve(d - 1);
    for (int i = 0; i < d; ++i) {
      if (i != j) others.push_back(i);
    }
    Vector updated = Vector::Zero(d - 1);
    Vector beta = Vector::Zero(d - 1);
    const auto& nb = neighbors[j];
    if (!nb.empty()) {
      const int q = static_cast<int>(nb.size());
      Matrix reduced(q, q);
      Vector target(q);
      for (int r = 0; r < q; ++r) {
        target(r) = sample_cov(nb[r], j);
        for (int c = 0; c < q; ++c) reduced(r, c) = working(nb[r], nb[c]);
      }
      Eigen::LLT<Matrix> llt(reduced);
      if (llt.info() != Eigen::Success) {
        throw DegenerateResidualsError(
            "working covariance block lost positive definiteness");
      }
      const Vector reduced_beta = llt.solve(target);
      for (int r = 0; r < q; ++r) {
        const int row = nb[r] < j ? nb[r] : nb[r] - 1;
        beta(row) = reduced_beta(r);
      }
      for (int i = 0; i < d - 1; ++i) {
        double acc = 0.0;
        for (int r = 0; r < q; ++r) acc += working(others[i], nb[r]) * reduced_beta(r);
        updated(i) = acc;
      }
    }
    if (beta_out) *beta_out = beta;
    return updated;
  };

  for (int cycle = 0; cycle < max_cycles; ++cycle) {
    double max_change = 0.0;
    for (int j = 0; j < d; ++j) {
      const Vector updated = solve_column(j, nullptr);
      int row = 0;
      for (int i = 0; i < d; ++i) {
        if (i == j) continue;
        max_change = std::max(max_change, std::abs(working(i, j) - updated(row)));
        working(i, j) = updated(row);
        working(j, i) = updated(row);
        ++row;
      }
    }
    if (max_change < tol) break;
  }

  // recover the precision matrix column by column from the converged working
  // covariance; zeros off the pattern are exact because beta is zero there
  Matrix omega = Matrix::Zero(d, d);
  for (int j = 0; j < d; ++j) {
    Vector beta;
    const Vector w12 = solve_column(j, &beta);
    const double theta_jj = 1.0 / (sample_cov(j, j) - w12.dot(beta));
    omega(j, j) = theta_jj;
    int row = 0;
    for (int i = 0; i < d; ++i) {
      if (i == j) continue;
      if (beta(row) != 0.0) omega(i, j) = -beta(row) * theta_jj;
      ++row;
    }
  }
  // symmetrize; pattern zeros stay exact since both triangles are zero there
  return (omega + omega.transpose()) / 2.0;
}

struct FitOptions {
  double delta = 1e-6;       // stop when the log-likelihood change drops below this
  int max_iterations = 100;  // outer iteration cap; exceeding it reports converged=false
  double omega_tol = 1e-8;   // inner tolerance of the precision estimator
};

/// Sparsity-constrained ML estimation: alternate the restricted GLS estimate
/// of the lag matrices (given the current precision) with the constrained
/// precision estimate from the residuals, starting from the identity
/// precision, until the maximized Gaussian log-likelihood stabilizes.
inline std::pair<GvarModel, FitDiagnostics> fit_parameters(const TimeSeries& series,
                                                           const GvarStructure& structure,
                                                           const FitOptions& options = {}) {
  const int d = series.dims();
  const int k = structure.k;
  if (structure.d != d) {
    throw std::invalid_argument("structure dimension does not match the series");
  }
  if (series.length() - k < d + 1) {
    throw std::invalid_argument("series too short to fit d x d covariances");
  }

  const LaggedDataMatrix z = build_lagged_matrix(series, k, k);
  const int n = z.rows();

  Matrix omega = Matrix::Identity(d, d);
  std::vector<Matrix> lags;
  FitDiagnostics diag;
  double previous = std::numeric_limits<double>::quiet_NaN();
  for (int it = 1; it <= options.max_iterations; ++it) {
    lags = estimate_lag_matrices_given_omega(z, structure, omega);
    const TimeSeries resid = residuals(series, lags);
    omega = estimate_omega_given_pattern(resid, structure.contemporaneous_edges,
                                         options.omega_tol);
    const Matrix sample_cov = resid.values.transpose() * resid.values / double(n);
    const double loglik = gaussian_loglik(omega, sample_cov, n);
    diag.loglik_trajectory.push_back(loglik);
    diag.iterations = it;
    if (it >= 2) {
      diag.final_delta = std::abs(loglik - previous);
      if (diag.final_delta < options.delta) {
        diag.converged = true;
        break;
      }
    }
    previous = loglik;
  }
  return {GvarModel(std::move(lags), std::move(omega)), std::move(diag)};
}

}  // namespace plvar
