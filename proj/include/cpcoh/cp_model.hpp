#pragma once

#include <vector>

#include "cpcoh/tensor.hpp"

namespace cpcoh {

/// Weighted sum of rank-1 terms, sum_p w_p a_1p (x) ... (x) a_dp.
///
/// In canonical form the weights are real, positive and descending and
/// every factor column has unit norm. Non-canonical models (complex weights,
/// unnormalised columns) are accepted by cp_evaluate and canonicalize.
struct CPModel {
  std::vector<cplx> weights;
  std::vector<Mat> factors;  // mode k: n_k x r

  Index rank() const noexcept { return weights.size(); }
  Index order() const noexcept { return factors.size(); }
  std::vector<Index> dims() const;

  /// Throws ValidationError on inconsistent shapes.
  void validate() const;
  bool is_canonical(double tol = 1e-12) const;

  /// Column p of every mode.
  std::vector<Vec> term(Index p) const;
};

Hypermatrix cp_evaluate(const CPModel& model);

struct CanonicalForm {
  CPModel model;
  /// Input indices of terms removed because the weight or a factor was zero.
  std::vector<Index> dropped_terms;
};

CanonicalForm canonicalize(const CPModel& model);

/// Frobenius distance between two unit rank-1 terms, via the product formula.
double rank1_distance(std::span<const Vec> a, std::span<const Vec> b);

/// Equality up to permutation within equal-weight blocks and unimodulus
/// rescalings whose phases sum to zero. Both inputs must be canonical.
bool essentially_equal(const CPModel& m1, const CPModel& m2, double tol);

/// r unit-norm vectors of a common dimension, stored as columns.
class FactorSet {
 public:
  static constexpr double kUnitTolerance = 1e-9;

  explicit FactorSet(Mat vectors);
  /// Rescales every column to unit norm first; zero columns are rejected.
  static FactorSet normalized(Mat vectors);

  const Mat& vectors() const noexcept { return vectors_; }
  Index size() const noexcept { return static_cast<Index>(vectors_.cols()); }
  Index dim() const noexcept { return static_cast<Index>(vectors_.rows()); }

 private:
  Mat vectors_;
};

// The three-term target and its rank-2 approximants f_n from the classical
// border-rank example. phi and psi hold one vector per mode (d = 3).
CPModel lack_example_target(std::span<const Vec> phi, std::span<const Vec> psi);
CPModel lack_example_approximant(std::span<const Vec> phi, std::span<const Vec> psi, double n);

}  // namespace cpcoh
