#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include "plvar/errors.hpp"
#include "plvar/model.hpp"

namespace plvar {

/// Reproducible random source: mt19937_64 with 53-bit uniforms and Box-Muller
/// normals. Both the engine and the transforms are pinned, so a seed produces
/// the same stream on every platform (std::normal_distribution would not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return (engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct SimConfig {
  int d = 1;
  int k = 1;
  double q = 0.0;            // target average temporal indegree
  double coef_lo = 0.1;      // lag coefficient magnitude range
  double coef_hi = 0.9;
  double contemp_strength = 0.3;   // precision off-diagonal magnitude on edges
  double stability_margin = 0.05;  // require spectral radius < 1 - margin
  int burn_in = 500;
  std::uint64_t seed = 0;
  int max_attempts = 1000;

  void validate() const {
    if (d < 1 || k < 1) throw std::invalid_argument("SimConfig: d and k must be >= 1");
    if (q < 0.0) throw std::invalid_argument("SimConfig: q must be >= 0");
    if (!(coef_lo > 0.0) || coef_lo > coef_hi) {
      throw std::invalid_argument("SimConfig: need 0 < coef_lo <= coef_hi");
    }
    if (q / (double(k) * d) > 1.0) {
      throw std::invalid_argument("SimConfig: edge probability q/(kd) exceeds 1");
    }
    if (stability_margin < 0.0 || stability_margin >= 1.0) {
      throw std::invalid_argument("SimConfig: stability margin must lie in [0, 1)");
    }
    if (burn_in < 0) throw std::invalid_argument("SimConfig: burn_in must be >= 0");
  }
};

struct SimulatedGvar {
  GvarModel model;
  GvarStructure structure;  // ground truth, exactly the nonzero pattern of the model
};

/// Random sparse stable GVAR model. Each potential temporal edge enters
/// independently with probability q/(kd) (average indegree q) and draws a
/// coefficient uniform on +-[coef_lo, coef_hi]; each contemporaneous pair
/// enters with probability q/(2(d-1)) (average neighbor count q/2) and puts
/// +-contemp_strength into the precision matrix, whose diagonal is raised to
/// max(1, absolute row sum + 0.1) so it is positive definite by Gershgorin.
/// Unstable draws are rescaled by 0.95 / spectral radius and rechecked, up to
/// max_attempts.
inline SimulatedGvar random_gvar(const SimConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const int d = config.d;
  const int k = config.k;

  std::vector<Matrix> lags(k, Matrix::Zero(d, d));
  const double edge_prob = config.q / (double(k) * d);
  for (int m = 0; m < k; ++m) {
    for (int b = 0; b < d; ++b) {
      for (int a = 0; a < d; ++a) {
        if (rng.bernoulli(edge_prob)) {
          const double magnitude = rng.uniform(config.coef_lo, config.coef_hi);
          lags[m](b, a) = rng.bernoulli(0.5) ? -magnitude : magnitude;
        }
      }
    }
  }

  Matrix omega = Matrix::Zero(d, d);
  if (d > 1) {
    const double pair_prob = std::min(1.0, config.q / (2.0 * (d - 1)));
    for (int a = 0; a < d; ++a) {
      for (int b = a + 1; b < d; ++b) {
        if (rng.bernoulli(pair_prob)) {
          const double value =
              rng.bernoulli(0.5) ? -config.contemp_strength : config.contemp_strength;
          omega(a, b) = value;
          omega(b, a) = value;
        }
      }
    }
  }
  for (int a = 0; a < d; ++a) {
    omega(a, a) = std::max(1.0, omega.row(a).cwiseAbs().sum() + 0.1);
  }

  GvarModel model(std::move(lags), std::move(omega));
  int attempts = 0;
  while (!is_stable(model, config.stability_margin)) {
    if (++attempts > config.max_attempts) {
      throw SimulationError("could not stabilize the drawn model within " +
                            std::to_string(config.max_attempts) + " attempts");
    }
    // shrink toward a radius strictly inside the margin; repeated for k > 1
    // where the companion radius is not homogeneous in the scale
    const double radius = spectral_radius(companion_matrix(model));
    const double scale = 0.95 * (1.0 - config.stability_margin) / radius;
    for (Matrix& a : model.lag_matrices) a *= scale;
  }
  GvarStructure truth = structure_of(model);
  return {std::move(model), std::move(truth)};
}

/// Simulate a stable GVAR model forward from zero presample values with
/// i.i.d. Gaussian innovations of covariance Omega^-1, discarding `burn_in`
/// steps. Deterministic given the seed.
inline TimeSeries draw_series(const GvarModel& model, int length, int burn_in,
                              std::uint64_t seed) {
  if (length < 1) throw std::invalid_argument("draw_series: length must be >= 1");
  if (burn_in < 0) throw std::invalid_argument("draw_series: burn_in must be >= 0");
  if (!is_stable(model)) {
    throw std::invalid_argument("draw_series: model is not stable");
  }
  const int d = model.d;
  const int k = model.k;
  Rng rng(seed);
  Eigen::LLT<Matrix> llt(model.precision);

  std::vector<Vector> history(k, Vector::Zero(d));  // history[m] = y_{t-1-m}
  Matrix out(length, d);
  Vector noise(d);
  for (int t = 0; t < burn_in + length; ++t) {
    for (int i = 0; i < d; ++i) noise(i) = rng.normal();
    // cov(U^-1 z) = (U' U)^-1 = Omega^-1
    Vector y = llt.matrixU().solve(noise);
    for (int m = 0; m < k; ++m) y += model.lag_matrices[m] * history[m];
    for (int m = k - 1; m > 0; --m) history[m] = history[m - 1];
    history[0] = y;
    if (t >= burn_in) out.row(t - burn_in) = y.transpose();
  }
  return TimeSeries(std::move(out));
}

}  // namespace plvar
