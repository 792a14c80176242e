#pragma once

// Shared helpers for the unit tests. Reference constructions here are kept
// deliberately naive so they can serve as oracles for the library code.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "qsc/linalg.hpp"

namespace qsc::testing {

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline Matrix diag(std::initializer_list<double> values) {
  Matrix m = Matrix::Zero(static_cast<Index>(values.size()), static_cast<Index>(values.size()));
  Index i = 0;
  for (double v : values) {
    m(i, i) = v;
    ++i;
  }
  return m;
}

/// Partial trace by an explicit loop over all index pairs.
inline Matrix brute_partial_trace(const Matrix& rho, int n, const std::vector<int>& keep) {
  const Index dk = Index{1} << keep.size();
  Matrix out = Matrix::Zero(dk, dk);
  const Index d = Index{1} << n;
  auto kept_label = [&](Index s) {
    Index k = 0;
    for (int q : keep) k = (k << 1) | ((s >> (n - 1 - q)) & 1);
    return k;
  };
  auto traced_label = [&](Index s) {
    Index t = 0;
    for (int q = 0; q < n; ++q) {
      bool kept = false;
      for (int k : keep) kept = kept || k == q;
      if (!kept) t = (t << 1) | ((s >> (n - 1 - q)) & 1);
    }
    return t;
  };
  for (Index r = 0; r < d; ++r)
    for (Index c = 0; c < d; ++c)
      if (traced_label(r) == traced_label(c)) out(kept_label(r), kept_label(c)) += rho(r, c);
  return out;
}

/// -sum p ln p with the library's small-eigenvalue convention.
inline double entropy_of(const std::vector<double>& p) {
  double s = 0.0;
  for (double x : p)
    if (x > 1e-14) s -= x * std::log(x);
  return s;
}

inline double binary_entropy(double p) { return entropy_of({p, 1.0 - p}); }

/// Free-fermion ground energy of the critical ring, -2 / sin(pi / 2n).
inline double ring_ground_energy(int n) { return -2.0 / std::sin(M_PI / (2.0 * n)); }

}  // namespace qsc::testing
