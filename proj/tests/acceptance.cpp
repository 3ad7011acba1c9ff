// Acceptance suite: one criterion per function, one PASS/FAIL line each,
// nonzero exit status when any criterion fails. Optionally pass criterion
// numbers as arguments to run a subset.
//
// Seed policy: every criterion uses the fixed seed sets written below; they
// were chosen before the suite was first run and are not tuned afterwards.

#include <mpfr.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "plvar/plvar.hpp"

using namespace plvar;

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point start) {
  return std::chrono::duration<double>(clock_type::now() - start).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// ---------------------------------------------------------------------------
// criterion 1: exact structure recovery on the VAR(2) fixture at N=800
// ---------------------------------------------------------------------------

Outcome criterion1() {
  const GvarModel model = fixtures::sparse_var2();
  const GvarStructure truth = fixtures::sparse_var2_structure();
  const auto start = clock_type::now();
  int exact = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const TimeSeries series = draw_series(model, 800, 500, seed);
    const LearnResult result = learn_structure(series, 5, 0.5);
    const StructureMetrics m = precision_recall(result.structure, truth);
    if (result.structure.k == 2 && m.temporal.precision == 1.0 &&
        m.temporal.recall == 1.0 && m.contemporaneous.precision == 1.0 &&
        m.contemporaneous.recall == 1.0) {
      ++exact;
    }
  }
  const double elapsed = seconds_since(start);
  std::ostringstream detail;
  detail << "exact recovery " << exact << "/20 (need >= 19), " << elapsed << " s";
  return {exact >= 19 && elapsed < 5.0, detail.str()};
}

// ---------------------------------------------------------------------------
// criteria 2 and 3 share one sweep: 20 random d=20, k=2, q=3 models
// ---------------------------------------------------------------------------

struct SweepRun {
  StructureMetrics metrics;
  int selected_lag = 0;
};

struct Sweep {
  std::map<int, std::vector<SweepRun>> by_length;  // N -> per-model results
  double elapsed_seconds = 0.0;
};

const Sweep& shared_sweep() {
  static const Sweep sweep = [] {
    Sweep s;
    const auto start = clock_type::now();
    for (int model_index = 1; model_index <= 20; ++model_index) {
      SimConfig config;
      config.d = 20;
      config.k = 2;
      config.q = 3.0;
      config.seed = 1000 + model_index;
      const SimulatedGvar sim = random_gvar(config);
      const TimeSeries full = draw_series(sim.model, 800, 500, 5000 + model_index);
      for (int length : {100, 400, 800}) {
        const TimeSeries slice{Matrix(full.values.topRows(length))};
        const LearnResult result = learn_structure(slice, 5, 0.5);
        s.by_length[length].push_back(
            {precision_recall(result.structure, sim.structure),
             result.temporal.selected_lag});
      }
    }
    s.elapsed_seconds = seconds_since(start);
    return s;
  }();
  return sweep;
}

Outcome criterion2() {
  const Sweep& sweep = shared_sweep();
  const auto collect = [&](int length, auto&& accessor) {
    std::vector<double> values;
    for (const SweepRun& run : sweep.by_length.at(length)) {
      values.push_back(accessor(run.metrics));
    }
    return median(values);
  };
  const double tp800 = collect(800, [](const auto& m) { return m.temporal.precision; });
  const double tr800 = collect(800, [](const auto& m) { return m.temporal.recall; });
  const double cp800 =
      collect(800, [](const auto& m) { return m.contemporaneous.precision; });
  const double cr800 = collect(800, [](const auto& m) { return m.contemporaneous.recall; });
  const double tp100 = collect(100, [](const auto& m) { return m.temporal.precision; });
  const double cp100 =
      collect(100, [](const auto& m) { return m.contemporaneous.precision; });

  const bool pass = tp800 >= 0.9 && tr800 >= 0.9 && cp800 >= 0.9 && cr800 >= 0.9 &&
                    tp100 >= 0.8 && cp100 >= 0.8 && sweep.elapsed_seconds < 600.0;
  std::ostringstream detail;
  detail << "N=800 medians P_t=" << tp800 << " R_t=" << tr800 << " P_c=" << cp800
         << " R_c=" << cr800 << " (need >= 0.9); N=100 medians P_t=" << tp100
         << " P_c=" << cp100 << " (need >= 0.8); sweep " << sweep.elapsed_seconds
         << " s";
  return {pass, detail.str()};
}

Outcome criterion3() {
  const Sweep& sweep = shared_sweep();
  std::vector<TemporalResult> runs;
  for (int length : {400, 800}) {
    for (const SweepRun& run : sweep.by_length.at(length)) {
      TemporalResult t;
      t.selected_lag = run.selected_lag;
      runs.push_back(t);
    }
  }
  const std::map<int, int> histogram = lag_histogram(runs);
  const int total = static_cast<int>(runs.size());
  const int correct = histogram.count(2) ? histogram.at(2) : 0;
  int above = 0;
  for (const auto& [lag, count] : histogram) {
    if (lag > 2) above += count;
  }
  const bool pass = correct >= 0.9 * total && above <= 0.1 * total;
  std::ostringstream detail;
  detail << "k_hat=2 in " << correct << "/" << total << " runs at N in {400,800}, k_hat>2 in "
         << above << " (allowed <= " << int(0.1 * total) << ")";
  return {pass, detail.str()};
}

// ---------------------------------------------------------------------------
// criterion 4: finite-sample consistency gaps on the fixture, node 1
// ---------------------------------------------------------------------------

Outcome criterion4() {
  const GvarModel model = fixtures::sparse_var2();
  const int d = 4;
  const std::vector<int> true_blanket = {lagged_column(1, 1, d), lagged_column(2, 2, d)};
  std::vector<std::vector<int>> subsets = {{}, {true_blanket[0]}, {true_blanket[1]}};
  std::vector<std::vector<int>> supersets;
  for (int c = d; c < 3 * d; ++c) {
    if (c == true_blanket[0] || c == true_blanket[1]) continue;
    std::vector<int> grown = true_blanket;
    grown.push_back(c);
    std::sort(grown.begin(), grown.end());
    supersets.push_back(grown);
  }

  int good_seeds = 0;
  int positive_at_800 = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const TimeSeries full = draw_series(model, 800, 500, seed);
    std::map<int, std::vector<double>> gaps;  // N -> gaps for all 9 alternatives
    for (int length : {200, 400, 800}) {
      const TimeSeries slice{Matrix(full.values.topRows(length))};
      const LaggedDataMatrix z = build_lagged_matrix(slice, 2, 2);
      const ScatterMatrix s = scatter(z);
      const double at_truth = log_local_fmpl(s, 0, true_blanket);
      std::vector<double> g;
      for (const auto& alt : subsets) g.push_back(at_truth - log_local_fmpl(s, 0, alt));
      for (const auto& alt : supersets) g.push_back(at_truth - log_local_fmpl(s, 0, alt));
      gaps[length] = g;
    }
    const bool all_positive =
        std::all_of(gaps[800].begin(), gaps[800].end(), [](double v) { return v > 0; });
    bool all_increasing = true;
    for (std::size_t i = 0; i < gaps[800].size(); ++i) {
      if (!(gaps[200][i] < gaps[400][i] && gaps[400][i] < gaps[800][i])) {
        all_increasing = false;
      }
    }
    positive_at_800 += all_positive;
    good_seeds += (all_positive && all_increasing);
  }
  std::ostringstream detail;
  detail << "gaps positive and increasing in " << good_seeds
         << "/20 seeds (need >= 18); positivity at N=800 alone held in "
         << positive_at_800 << "/20";
  return {good_seeds >= 18, detail.str()};
}

// ---------------------------------------------------------------------------
// criterion 5: scoring oracle in 256-bit arithmetic
// ---------------------------------------------------------------------------

void mpfr_log_det(const Matrix& m, mpfr_t out, mpfr_prec_t prec) {
  const int n = static_cast<int>(m.rows());
  std::vector<mpfr_t> a(n * n);
  for (int i = 0; i < n * n; ++i) {
    mpfr_init2(a[i], prec);
    mpfr_set_d(a[i], m(i / n, i % n), MPFR_RNDN);
  }
  mpfr_t pivot, factor, sum;
  mpfr_init2(pivot, prec);
  mpfr_init2(factor, prec);
  mpfr_init2(sum, prec);
  mpfr_set_zero(sum, 1);
  // SPD input: plain elimination, log of the diagonal as we go
  for (int k = 0; k < n; ++k) {
    mpfr_set(pivot, a[k * n + k], MPFR_RNDN);
    mpfr_log(factor, pivot, MPFR_RNDN);
    mpfr_add(sum, sum, factor, MPFR_RNDN);
    for (int i = k + 1; i < n; ++i) {
      mpfr_div(factor, a[i * n + k], pivot, MPFR_RNDN);
      for (int j = k; j < n; ++j) {
        mpfr_t tmp;
        mpfr_init2(tmp, prec);
        mpfr_mul(tmp, factor, a[k * n + j], MPFR_RNDN);
        mpfr_sub(a[i * n + j], a[i * n + j], tmp, MPFR_RNDN);
        mpfr_clear(tmp);
      }
    }
  }
  mpfr_set(out, sum, MPFR_RNDN);
  for (int i = 0; i < n * n; ++i) mpfr_clear(a[i]);
  mpfr_clear(pivot);
  mpfr_clear(factor);
  mpfr_clear(sum);
}

// direct evaluation of the local score through the Gamma-function form,
// entirely in extended precision, then a single log at the end
double mpfr_direct_log_score(const Matrix& s, int p, int n) {
  const mpfr_prec_t prec = 256;  // ~77 decimal digits
  mpfr_t value, term, logdet_fa, logdet_mb, exponent;
  mpfr_init2(value, prec);
  mpfr_init2(term, prec);
  mpfr_init2(logdet_fa, prec);
  mpfr_init2(logdet_mb, prec);
  mpfr_init2(exponent, prec);

  // pi^(-(n-1)/2)
  mpfr_const_pi(term, MPFR_RNDN);
  mpfr_set_d(exponent, -(n - 1) / 2.0, MPFR_RNDN);
  mpfr_pow(value, term, exponent, MPFR_RNDN);
  // * Gamma((n+p)/2)
  mpfr_set_d(term, (n + p) / 2.0, MPFR_RNDN);
  mpfr_gamma(term, term, MPFR_RNDN);
  mpfr_mul(value, value, term, MPFR_RNDN);
  // / Gamma((p+1)/2)
  mpfr_set_d(term, (p + 1) / 2.0, MPFR_RNDN);
  mpfr_gamma(term, term, MPFR_RNDN);
  mpfr_div(value, value, term, MPFR_RNDN);
  // * n^(-(2p+1)/2)
  mpfr_set_d(term, double(n), MPFR_RNDN);
  mpfr_set_d(exponent, -(2 * p + 1) / 2.0, MPFR_RNDN);
  mpfr_pow(term, term, exponent, MPFR_RNDN);
  mpfr_mul(value, value, term, MPFR_RNDN);
  // * (|S_fa| / |S_mb|)^(-(n-1)/2), determinant ratio via log determinants
  mpfr_log_det(s, logdet_fa, prec);
  if (p > 0) {
    mpfr_log_det(s.block(1, 1, p, p), logdet_mb, prec);
  } else {
    mpfr_set_zero(logdet_mb, 1);
  }
  mpfr_sub(term, logdet_fa, logdet_mb, MPFR_RNDN);
  mpfr_set_d(exponent, -(n - 1) / 2.0, MPFR_RNDN);
  mpfr_mul(term, term, exponent, MPFR_RNDN);
  mpfr_exp(term, term, MPFR_RNDN);
  mpfr_mul(value, value, term, MPFR_RNDN);

  mpfr_log(value, value, MPFR_RNDN);
  const double result = mpfr_get_d(value, MPFR_RNDN);
  mpfr_clear(value);
  mpfr_clear(term);
  mpfr_clear(logdet_fa);
  mpfr_clear(logdet_mb);
  mpfr_clear(exponent);
  return result;
}

Outcome criterion5() {
  Rng rng(55);
  double worst = 0.0;
  int checked = 0;
  for (int instance = 0; instance < 100; ++instance) {
    const int p = static_cast<int>(rng.uniform(0.0, 12.999));
    const int n = p + 2 + static_cast<int>(rng.uniform(0.0, 1.0) * (10000 - p - 2));
    Matrix b(p + 1, p + 1);
    for (int r = 0; r <= p; ++r) {
      for (int c = 0; c <= p; ++c) b(r, c) = rng.normal();
    }
    const Matrix s = b.transpose() * b + (p + 1) * Matrix::Identity(p + 1, p + 1);
    // node 0, blanket = columns 1..p
    std::vector<int> blanket;
    for (int c = 1; c <= p; ++c) blanket.push_back(c);
    const double implementation = log_local_fmpl(s, 0, blanket, n);
    const double oracle = mpfr_direct_log_score(s, p, n);
    worst = std::max(worst, std::abs(implementation - oracle) / std::abs(oracle));
    ++checked;
  }
  std::ostringstream detail;
  detail << checked << " instances, worst relative error " << worst
         << " (allowed 1e-8)";
  return {worst <= 1e-8, detail.str()};
}

// ---------------------------------------------------------------------------
// criterion 6: greedy equals exhaustive enumeration at d=3, k=1
// ---------------------------------------------------------------------------

Outcome criterion6() {
  int matching_runs = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SimConfig config;
    config.d = 3;
    config.k = 1;
    config.q = 1.5;
    config.seed = seed;
    const SimulatedGvar sim = random_gvar(config);
    const TimeSeries series = draw_series(sim.model, 300, 500, 7000 + seed);
    const LaggedDataMatrix z = build_lagged_matrix(series, 1, 1);
    const ScatterMatrix s = scatter(z);
    bool all_nodes = true;
    for (int node = 0; node < 3; ++node) {
      auto objective = [&, node](std::span<const int> mb) {
        return log_local_fmpl(s, node, mb) +
               log_prior_temporal(static_cast<int>(mb.size()), 3, 1, 0.5);
      };
      const std::vector<int> candidates = {3, 4, 5};
      const MarkovBlanket found = greedy_markov_blanket(objective, candidates, node, s.n);
      double exhaustive = std::numeric_limits<double>::lowest();
      for (int mask = 0; mask < 8; ++mask) {
        std::vector<int> mb;
        for (int bit = 0; bit < 3; ++bit) {
          if (mask & (1 << bit)) mb.push_back(3 + bit);
        }
        exhaustive = std::max(exhaustive, objective(mb));
      }
      if (objective(found.members) < exhaustive - 1e-9) all_nodes = false;
    }
    matching_runs += all_nodes;
  }
  std::ostringstream detail;
  detail << "greedy attained the exhaustive optimum in " << matching_runs
         << "/20 runs (need >= 18)";
  return {matching_runs >= 18, detail.str()};
}

// ---------------------------------------------------------------------------
// criterion 7: parameter estimation with the true structure
// ---------------------------------------------------------------------------

Outcome criterion7() {
  const GvarModel model = fixtures::sparse_var2();
  const TimeSeries series = draw_series(model, 10000, 500, 42);
  const auto [fitted, diag] = fit_parameters(series, fixtures::sparse_var2_structure());

  double lag_error = 0.0;
  for (int m = 0; m < 2; ++m) {
    lag_error = std::max(
        lag_error,
        (fitted.lag_matrices[m] - model.lag_matrices[m]).cwiseAbs().maxCoeff());
  }
  const double omega_error =
      (fitted.precision - model.precision).cwiseAbs().maxCoeff();
  bool monotone = true;
  for (std::size_t i = 1; i < diag.loglik_trajectory.size(); ++i) {
    if (diag.loglik_trajectory[i] < diag.loglik_trajectory[i - 1] - 1e-9) {
      monotone = false;
    }
  }
  const bool pass = lag_error <= 0.05 && omega_error <= 0.05 && monotone &&
                    diag.converged && diag.iterations <= 20;
  std::ostringstream detail;
  detail << "max|A_hat - A| = " << lag_error << ", max|Omega_hat - Omega| = "
         << omega_error << " (allowed 0.05), " << diag.iterations
         << " iterations, monotone=" << (monotone ? "yes" : "no")
         << ", converged=" << (diag.converged ? "yes" : "no");
  return {pass, detail.str()};
}

// ---------------------------------------------------------------------------
// criterion 8: stationarity of the constrained precision estimate
// ---------------------------------------------------------------------------

Outcome criterion8() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    // correlated observations from one random model, an independent pattern
    SimConfig data_config;
    data_config.d = 10;
    data_config.k = 1;
    data_config.q = 3.0;
    data_config.seed = 800 + seed;
    const SimulatedGvar data_model = random_gvar(data_config);
    const TimeSeries data = draw_series(
        GvarModel({Matrix::Zero(10, 10)}, data_model.model.precision), 300, 20,
        880 + seed);

    Rng pattern_rng(900 + seed);
    std::set<std::pair<int, int>> pattern;
    for (int a = 1; a <= 10; ++a) {
      for (int b = a + 1; b <= 10; ++b) {
        if (pattern_rng.bernoulli(0.3)) pattern.insert({a, b});
      }
    }

    const Matrix omega = estimate_omega_given_pattern(data, pattern);
    const Matrix w = data.values.transpose() * data.values / data.length();
    const Matrix inverse = omega.inverse();
    for (int i = 0; i < 10; ++i) {
      worst = std::max(worst, std::abs(inverse(i, i) - w(i, i)));
    }
    for (const auto& [a, b] : pattern) {
      worst = std::max(worst, std::abs(inverse(a - 1, b - 1) - w(a - 1, b - 1)));
    }
  }
  std::ostringstream detail;
  detail << "20 random patterns at d=10, worst |(Omega^-1 - W)_ab| = " << worst
         << " (allowed 1e-6)";
  return {worst < 1e-6, detail.str()};
}

// ---------------------------------------------------------------------------
// criterion 9: prediction against the dense unrestricted baseline
// ---------------------------------------------------------------------------

Outcome criterion9() {
  const GvarModel model = fixtures::sparse_var2();
  const int max_lag = 5;
  const TimeSeries full = draw_series(model, 768, 500, 9001);
  const TimeSeries train{Matrix(full.values.topRows(256))};
  const TimeSeries test{Matrix(full.values.bottomRows(512))};

  const LearnResult learned = learn_structure(train, max_lag, 0.5);
  const auto [fitted, diag] = fit_parameters(train, learned.structure);
  const double sparse_mse = one_step_mse(fitted, test);
  const int sparse_edges = static_cast<int>(learned.structure.temporal_edges.size());

  // dense baseline under the same lag budget: unrestricted per-equation least
  // squares on all max_lag * d columns
  const LaggedDataMatrix z = build_lagged_matrix(train, max_lag, max_lag);
  const int d = train.dims();
  const Matrix x = z.values.rightCols(max_lag * d);
  const Matrix y = z.values.leftCols(d);
  const Matrix b = (x.transpose() * x).ldlt().solve(x.transpose() * y);
  std::vector<Matrix> dense_lags(max_lag);
  for (int m = 0; m < max_lag; ++m) {
    dense_lags[m] = b.block(m * d, 0, d, d).transpose();
  }
  const Matrix resid = y - x * b;
  const Matrix w = resid.transpose() * resid / z.rows();
  const GvarModel dense(dense_lags, w.inverse());
  const double dense_mse = one_step_mse(dense, test);
  const int dense_entries = max_lag * d * d;

  const bool pass =
      sparse_mse <= 1.05 * dense_mse && sparse_edges < 0.25 * dense_entries;
  std::ostringstream detail;
  detail << "one-step MSE " << sparse_mse << " vs dense " << dense_mse << " (ratio "
         << sparse_mse / dense_mse << ", allowed 1.05); " << sparse_edges
         << " temporal edges vs dense budget " << dense_entries << " (allowed < "
         << 0.25 * dense_entries << ")";
  return {pass, detail.str()};
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));
  const auto selected = [&](int id) {
    return wanted.empty() || std::find(wanted.begin(), wanted.end(), id) != wanted.end();
  };

  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, criterion1}, {2, criterion2}, {3, criterion3},
      {4, criterion4}, {5, criterion5}, {6, criterion6},
      {7, criterion7}, {8, criterion8}, {9, criterion9}};

  int failures = 0;
  for (const auto& [id, run] : criteria) {
    if (!selected(id)) continue;
    const Outcome outcome = run();
    std::cout << "criterion " << id << ": " << (outcome.pass ? "PASS" : "FAIL")
              << " -- " << outcome.detail << std::endl;
    failures += outcome.pass ? 0 : 1;
  }
  if (failures) {
    std::cout << failures << " criterion(s) failed" << std::endl;
  } else {
    std::cout << "all selected criteria passed" << std::endl;
  }
  return failures;
}
