#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <functional>
#include <mutex>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <thread>
#include <utility>
#include <vector>

#include "plvar/errors.hpp"
#include "plvar/model.hpp"
#include "plvar/scoring.hpp"

namespace plvar {

struct SearchOptions {
  double jitter = 0.0;  // diagonal ridge passed through to the scoring layer
  int threads = 1;      // worker cap for the per-node subproblems
};

/// Objective values after each accepted add/remove step, starting with the
/// empty blanket. Non-decreasing by construction of the greedy search.
struct GreedyTrace {
  std::vector<double> objectives;
};

namespace detail {

inline std::vector<int> with_member(const std::vector<int>& mb, int j) {
  std::vector<int> out;
  out.reserve(mb.size() + 1);
  auto pos = std::lower_bound(mb.begin(), mb.end(), j);
  out.insert(out.end(), mb.begin(), pos);
  out.push_back(j);
  out.insert(out.end(), pos, mb.end());
  return out;
}

inline std::vector<int> without_member(const std::vector<int>& mb, int j) {
  std::vector<int> out;
  out.reserve(mb.size() - 1);
  for (int m : mb) {
    if (m != j) out.push_back(m);
  }
  return out;
}

// Runs f(i) for i in 0..count-1 on up to `threads` workers. The first
// exception thrown by any worker is rethrown after all workers join.
template <typename F>
void parallel_for(int count, int threads, F&& f) {
  if (threads <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) f(i);
    return;
  }
  const int workers = std::min(threads, count);
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// Greedy Markov blanket search. Alternates one greedy-addition sweep (adopt
/// the single candidate that most improves the objective, if any improves it)
/// with an inner greedy-deletion loop (repeat single best removals while they
/// improve), until a full outer iteration leaves the blanket unchanged or its
/// size reaches n-1. Candidates are swept in ascending index order and only
/// strict improvements are accepted, so ties resolve to the lowest index and
/// the search is deterministic.
inline MarkovBlanket greedy_markov_blanket(
    const std::function<double(std::span<const int>)>& objective,
    std::span<const int> candidates, int node, int n, GreedyTrace* trace = nullptr) {
  std::vector<int> sorted_candidates(candidates.begin(), candidates.end());
  std::sort(sorted_candidates.begin(), sorted_candidates.end());

  std::vector<int> best;
  double best_score = objective(best);
  if (trace) trace->objectives.push_back(best_score);

  bool changed = true;
  while (changed && static_cast<int>(best.size()) < n - 1) {
    const std::vector<int> at_outer_start = best;
    // addition sweep over candidates outside the current blanket
    if (static_cast<int>(best.size()) + 1 <= n - 1) {
      const std::vector<int> mb = best;
      for (int j : sorted_candidates) {
        if (std::binary_search(mb.begin(), mb.end(), j)) continue;
        const std::vector<int> grown = detail::with_member(mb, j);
        const double score = objective(grown);
        if (score > best_score) {
          best = grown;
          best_score = score;
        }
      }
      if (trace && best != mb) trace->objectives.push_back(best_score);
    }
    // deletion loop: keep removing the best single member while it improves
    while (true) {
      const std::vector<int> mb = best;
      bool improved = false;
      for (int j : mb) {
        const std::vector<int> shrunk = detail::without_member(mb, j);
        const double score = objective(shrunk);
        if (score > best_score) {
          best = shrunk;
          best_score = score;
          improved = true;
        }
      }
      if (!improved) break;
      if (trace) trace->objectives.push_back(best_score);
    }
    changed = (best != at_outer_start);
  }
  return {node, std::move(best)};
}

/// Parent of a node: variable `variable` (1-based) at lag `lag`.
struct ParentEdge {
  int lag;
  int variable;
  auto operator<=>(const ParentEdge&) const = default;
};

inline ParentEdge parent_of_column(int column, int d) {
  return {column / d, column % d + 1};
}

struct TemporalResult {
  int selected_lag = 0;                          // k_hat, maximizer of the objective
  std::vector<std::vector<ParentEdge>> parents;  // per node, sorted
  std::vector<double> local_scores;              // per node at k_hat, incl. prior
  std::vector<double> objective_per_k;           // index k-1, k = 1..max_lag
};

/// Temporal structure learning with lag selection. For each k = 1..max_lag the
/// lagged matrix is aligned to max_lag so all candidates see the same rows;
/// each node's blanket is searched over the lagged columns only and scored by
/// local FMPL plus the temporal prior. k_hat maximizes the summed objective,
/// ties resolving to the smaller k.
inline TemporalResult learn_temporal(const TimeSeries& series, int max_lag, double gamma,
                                     const SearchOptions& options = {}) {
  const int n_obs = series.length();
  const int d = series.dims();
  if (max_lag < 1) throw std::invalid_argument("max_lag must be >= 1");
  if (n_obs - max_lag < 2) {
    throw std::invalid_argument("series too short for max_lag " +
                                std::to_string(max_lag));
  }

  TemporalResult result;
  result.objective_per_k.resize(max_lag);
  double best_objective = 0.0;

  for (int k = 1; k <= max_lag; ++k) {
    const LaggedDataMatrix z = build_lagged_matrix(series, k, max_lag);
    const ScatterMatrix s = scatter(z);
    std::vector<int> candidates;
    for (int c = d; c < (k + 1) * d; ++c) candidates.push_back(c);

    std::vector<MarkovBlanket> blankets(d);
    std::vector<double> scores(d);
    detail::parallel_for(d, options.threads, [&](int i) {
      auto objective = [&, i](std::span<const int> mb) {
        return log_local_fmpl(s.S, i, mb, s.n, options.jitter) +
               log_prior_temporal(static_cast<int>(mb.size()), d, k, gamma);
      };
      blankets[i] = greedy_markov_blanket(objective, candidates, i, s.n);
      scores[i] = objective(blankets[i].members);
    });

    const double total = std::accumulate(scores.begin(), scores.end(), 0.0);
    result.objective_per_k[k - 1] = total;
    if (k == 1 || total > best_objective) {
      best_objective = total;
      result.selected_lag = k;
      result.local_scores = scores;
      result.parents.assign(d, {});
      for (int i = 0; i < d; ++i) {
        for (int c : blankets[i].members) {
          result.parents[i].push_back(parent_of_column(c, d));
        }
        std::sort(result.parents[i].begin(), result.parents[i].end());
      }
    }
  }
  return result;
}

/// Least-squares regression of node `node` (lag-0 column) on its parent
/// columns; coefficients come back in sorted parent order.
inline Vector ols_node(const LaggedDataMatrix& z, int node,
                       std::span<const ParentEdge> parents) {
  const int p = static_cast<int>(parents.size());
  if (p == 0) return Vector(0);
  if (p > z.rows() - 1) {
    throw std::invalid_argument("ols_node: more parents than rows allow");
  }
  std::vector<ParentEdge> sorted_parents(parents.begin(), parents.end());
  std::sort(sorted_parents.begin(), sorted_parents.end());
  Matrix design(z.rows(), p);
  for (int c = 0; c < p; ++c) {
    design.col(c) =
        z.values.col(lagged_column(sorted_parents[c].lag, sorted_parents[c].variable, z.d));
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  if (qr.rank() < p) {
    throw SingularDesignError("ols_node: rank-deficient design for node " +
                              std::to_string(node + 1));
  }
  return qr.solve(z.values.col(node));
}

/// Residuals e_t = y_t - sum_m A_m y_{t-m} for t = k+1..N.
inline TimeSeries residuals(const TimeSeries& series,
                            const std::vector<Matrix>& lag_matrices) {
  const int k = static_cast<int>(lag_matrices.size());
  const int n = series.length();
  const int d = series.dims();
  if (k >= n) throw std::invalid_argument("residuals: lag length must be below N");
  Matrix resid(n - k, d);
  for (int r = 0; r < n - k; ++r) {
    const int t = k + r;
    Vector e = series.values.row(t).transpose();
    for (int m = 0; m < k; ++m) {
      e -= lag_matrices[m] * series.values.row(t - 1 - m).transpose();
    }
    resid.row(r) = e.transpose();
  }
  return TimeSeries(std::move(resid), series.names);
}

struct ContemporaneousResult {
  std::set<std::pair<int, int>> edges;     // OR-closure, 1-based {a, b}, a < b
  std::vector<std::vector<int>> blankets;  // per node, 1-based variables, pre-OR
};

/// OR-rule symmetrization: {i, j} is an edge iff j is in blanket(i) or i is
/// in blanket(j). Blankets hold 1-based variable ids, indexed by node - 1.
inline std::set<std::pair<int, int>> or_closure(
    const std::vector<std::vector<int>>& blankets) {
  std::set<std::pair<int, int>> edges;
  for (std::size_t i = 0; i < blankets.size(); ++i) {
    const int node = static_cast<int>(i) + 1;
    for (int j : blankets[i]) {
      edges.insert({std::min(node, j), std::max(node, j)});
    }
  }
  return edges;
}

/// Contemporaneous structure from residuals: per-node FMPL blanket search over
/// the other variables, symmetrized with the OR rule ({i,j} is an edge iff
/// i is in mb(j) or j is in mb(i)).
inline ContemporaneousResult learn_contemporaneous(const TimeSeries& resid, double gamma,
                                                   const SearchOptions& options = {}) {
  const int n = resid.length();
  const int d = resid.dims();
  if (n < d + 1) {
    throw std::invalid_argument("learn_contemporaneous: needs at least d+1 rows");
  }
  const Matrix s = resid.values.transpose() * resid.values;

  std::vector<MarkovBlanket> found(d);
  detail::parallel_for(d, options.threads, [&](int i) {
    std::vector<int> candidates;
    for (int c = 0; c < d; ++c) {
      if (c != i) candidates.push_back(c);
    }
    auto objective = [&, i](std::span<const int> mb) {
      double prior = d >= 2 ? log_prior_contemporaneous(static_cast<int>(mb.size()), d,
                                                        gamma)
                            : 0.0;
      return log_local_fmpl(s, i, mb, n, options.jitter) + prior;
    };
    found[i] = greedy_markov_blanket(objective, candidates, i, n);
  });

  ContemporaneousResult result;
  result.blankets.resize(d);
  for (int i = 0; i < d; ++i) {
    for (int c : found[i].members) result.blankets[i].push_back(c + 1);
  }
  result.edges = or_closure(result.blankets);
  return result;
}

struct PhaseTimings {
  double temporal_ms = 0.0;
  double contemporaneous_ms = 0.0;
  double fit_ms = 0.0;  // filled by the caller when parameters are estimated
  double total_ms = 0.0;
};

struct LearnResult {
  GvarStructure structure;
  TemporalResult temporal;
  std::vector<std::vector<int>> contemporaneous_blankets;  // pre-OR, 1-based
  std::optional<GvarModel> model;  // parameter estimation fills this in
  PhaseTimings timings;
};

/// Full two-step pipeline: temporal search with lag selection, per-node OLS on
/// the k_hat-aligned lagged matrix (all N - k_hat rows), residuals, then
/// contemporaneous search. Parameter estimation is a separate step.
inline LearnResult learn_structure(const TimeSeries& series, int max_lag, double gamma,
                                   const SearchOptions& options = {}) {
  using clock = std::chrono::steady_clock;
  const auto ms_since = [](clock::time_point start) {
    return std::chrono::duration<double, std::milli>(clock::now() - start).count();
  };

  const auto t_start = clock::now();
  LearnResult result;
  result.temporal = learn_temporal(series, max_lag, gamma, options);
  result.timings.temporal_ms = ms_since(t_start);

  const int d = series.dims();
  const int k_hat = result.temporal.selected_lag;

  // refit on the k_hat-aligned matrix to use every available row
  const auto t_contemp = clock::now();
  const LaggedDataMatrix z = build_lagged_matrix(series, k_hat, k_hat);
  std::vector<Matrix> lag_estimates(k_hat, Matrix::Zero(d, d));
  for (int i = 0; i < d; ++i) {
    const auto& parents = result.temporal.parents[i];
    const Vector coef = ols_node(z, i, parents);
    for (size_t c = 0; c < parents.size(); ++c) {
      lag_estimates[parents[c].lag - 1](i, parents[c].variable - 1) = coef(c);
    }
  }
  const TimeSeries resid = residuals(series, lag_estimates);
  ContemporaneousResult contemporaneous = learn_contemporaneous(resid, gamma, options);
  result.timings.contemporaneous_ms = ms_since(t_contemp);

  std::set<TemporalEdge> temporal_edges;
  for (int i = 0; i < d; ++i) {
    for (const ParentEdge& parent : result.temporal.parents[i]) {
      temporal_edges.insert({parent.lag, parent.variable, i + 1});
    }
  }
  result.structure = GvarStructure(d, k_hat, std::move(temporal_edges),
                                   std::move(contemporaneous.edges));
  result.contemporaneous_blankets = std::move(contemporaneous.blankets);
  result.timings.total_ms = ms_since(t_start);
  return result;
}

}  // namespace plvar
