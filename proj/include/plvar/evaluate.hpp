#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <vector>

#include "plvar/model.hpp"
#include "plvar/search.hpp"

namespace plvar {

struct PrecisionRecall {
  double precision = 1.0;
  double recall = 1.0;
};

struct StructureMetrics {
  PrecisionRecall temporal;
  PrecisionRecall contemporaneous;
};

namespace detail {

template <typename Set>
PrecisionRecall precision_recall_sets(const Set& estimated, const Set& truth) {
  std::size_t hits = 0;
  for (const auto& e : estimated) hits += truth.count(e);
  PrecisionRecall pr;
  // empty sets score 1: no false positives emitted / nothing to detect
  pr.precision = estimated.empty() ? 1.0 : double(hits) / estimated.size();
  pr.recall = truth.empty() ? 1.0 : double(hits) / truth.size();
  return pr;
}

}  // namespace detail

/// Structure-recovery metrics, computed separately for the temporal and the
/// contemporaneous part. Temporal edges are compared as (lag, source, target)
/// triples, so an edge recovered at the wrong lag counts as both a false
/// positive and a false negative.
inline StructureMetrics precision_recall(const GvarStructure& estimated,
                                         const GvarStructure& truth) {
  if (estimated.d != truth.d) {
    throw std::invalid_argument("precision_recall: dimension mismatch");
  }
  return {detail::precision_recall_sets(estimated.temporal_edges, truth.temporal_edges),
          detail::precision_recall_sets(estimated.contemporaneous_edges,
                                        truth.contemporaneous_edges)};
}

/// Mean squared error of 1-step predictions y_hat_t = sum_m A_m y_{t-m} over
/// t = k+1..N and all coordinates. Uses the lag matrices only; the
/// contemporaneous part plays no role in point prediction.
inline double one_step_mse(const GvarModel& model, const TimeSeries& test) {
  const int k = model.k;
  const int n = test.length();
  const int d = test.dims();
  if (d != model.d) throw std::invalid_argument("one_step_mse: dimension mismatch");
  if (n <= k) throw std::invalid_argument("one_step_mse: test series shorter than lag");
  double error = 0.0;
  for (int t = k; t < n; ++t) {
    Vector prediction = Vector::Zero(d);
    for (int m = 0; m < k; ++m) {
      prediction += model.lag_matrices[m] * test.values.row(t - 1 - m).transpose();
    }
    error += (test.values.row(t).transpose() - prediction).squaredNorm();
  }
  return error / (double(n - k) * d);
}

/// Frequency of each selected lag over a collection of runs.
inline std::map<int, int> lag_histogram(std::span<const TemporalResult> runs) {
  if (runs.empty()) throw std::invalid_argument("lag_histogram: no runs given");
  std::map<int, int> counts;
  for (const TemporalResult& r : runs) ++counts[r.selected_lag];
  return counts;
}

}  // namespace plvar
