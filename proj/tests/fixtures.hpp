#pragma once

// Shared test fixture: a small sparse VAR(2) process over four variables with
// a known structure. Strong lag-1 coefficients (|a| in 0.2..0.3), two weak
// lag-2 coefficients (|a| = 0.1), and two contemporaneous edges.

#include <set>
#include <utility>
#include <vector>

#include "plvar/model.hpp"

namespace fixtures {

inline plvar::GvarModel sparse_var2() {
  plvar::Matrix a1(4, 4);
  a1 << 0.3, 0, 0, 0,
      -0.2, 0.2, 0, 0,
      0, 0, -0.3, 0,
      0, 0, 0.2, -0.2;
  plvar::Matrix a2(4, 4);
  a2 << 0, 0.1, 0, 0,
      0, 0, 0, 0,
      0, 0, 0, -0.1,
      0, 0, 0, 0;
  plvar::Matrix omega(4, 4);
  omega << 1, 0, 0.2, 0,
      0, 1, 0, 0,
      0.2, 0, 1, 0.2,
      0, 0, 0.2, 1;
  return plvar::GvarModel({a1, a2}, omega);
}

inline std::set<plvar::TemporalEdge> sparse_var2_temporal_edges() {
  // (lag, source, target): nonzeros of A_1 and A_2, A_lag(target, source)
  return {{1, 1, 1}, {1, 1, 2}, {1, 2, 2}, {1, 3, 3},
          {1, 3, 4}, {1, 4, 4}, {2, 2, 1}, {2, 4, 3}};
}

inline std::set<std::pair<int, int>> sparse_var2_contemporaneous_edges() {
  return {{1, 3}, {3, 4}};
}

inline plvar::GvarStructure sparse_var2_structure() {
  return {4, 2, sparse_var2_temporal_edges(), sparse_var2_contemporaneous_edges()};
}

}  // namespace fixtures
