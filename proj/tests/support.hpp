#pragma once

// Shared fixtures and brute-force oracles for the test binaries. The oracles
// deliberately avoid the library's own index arithmetic.

#include <cmath>
#include <vector>

#include "cpcoh/cp_model.hpp"
#include "cpcoh/random.hpp"

namespace cpcoh::test {

inline Hypermatrix random_tensor(std::vector<Index> dims, Rng& rng) {
  Hypermatrix t(std::move(dims));
  for (cplx& z : t.entries()) z = complex_gaussian(rng);
  return t;
}

inline Mat random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Mat m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) m.col(j) = random_complex_vector(rows, rng);
  return m;
}

inline CPModel random_model(const std::vector<Index>& dims, Index r, Rng& rng) {
  CPModel m;
  for (Index p = 0; p < r; ++p) m.weights.push_back(complex_gaussian(rng));
  for (Index n : dims) m.factors.push_back(random_matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(r), rng));
  return m;
}

// Odometer over a multi-index, last mode fastest.
inline bool next_index(std::vector<Index>& idx, const std::vector<Index>& dims) {
  for (Index k = dims.size(); k-- > 0;) {
    if (++idx[k] < dims[k]) return true;
    idx[k] = 0;
  }
  return false;
}

// Evaluates sum_p w_p prod_k a_k(i_k, p) entry by entry.
inline cplx model_entry(const CPModel& m, const std::vector<Index>& idx) {
  cplx s = 0.0;
  for (Index p = 0; p < m.rank(); ++p) {
    cplx term = m.weights[p];
    for (Index k = 0; k < m.order(); ++k)
      term *= m.factors[k](static_cast<Eigen::Index>(idx[k]), static_cast<Eigen::Index>(p));
    s += term;
  }
  return s;
}

// r unit vectors in C^n where vector s is a combination of vectors 0..s-1, so
// krank <= s while the span keeps dimension min(n, r - 1). Needs s + 2 <= r.
inline Mat planted_dependent_set(Index n, Index r, Index s, Rng& rng) {
  Mat a = random_matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(r), rng);
  const auto ss = static_cast<Eigen::Index>(s);
  a.col(ss) = a.leftCols(ss) * random_complex_vector(ss, rng);
  for (Eigen::Index j = 0; j < a.cols(); ++j) a.col(j).normalize();
  return a;
}

inline double rel_err(double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

}  // namespace cpcoh::test
