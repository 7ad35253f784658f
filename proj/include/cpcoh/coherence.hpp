#pragma once

#include <optional>
#include <utility>

#include "cpcoh/cp_model.hpp"

namespace cpcoh {

struct CoherenceReport {
  double mu = 0.0;
  /// (1 - mu) / mu; meaningless when omega_infinite is set.
  double omega = 0.0;
  bool omega_infinite = false;
  std::pair<Index, Index> argpair{0, 0};
  /// Set when the set holds a single vector and mu = 0 by convention.
  bool single_vector = false;
};

/// Relative incoherence; +inf for mu = 0.
double relative_incoherence(double mu);

/// Pairwise scan over r(r-1)/2 inner products.
CoherenceReport coherence(const FactorSet& fs);

/// Max off-diagonal magnitude of the Gram matrix. Used as a cross-check.
double coherence_gram(const FactorSet& fs);

/// Largest k such that every k-subset has sigma_min > rel_tol * sigma_max.
/// Refuses (BudgetExceeded) when the set is larger than `budget`.
Index kruskal_rank_bruteforce(const FactorSet& fs, double rel_tol = 1e-8, Index budget = 14);

/// Size of the smallest dependent subset, or r + 1 when none exists.
Index spark_bruteforce(const FactorSet& fs, double rel_tol = 1e-8, Index budget = 14);

/// ceil(1/mu). Empty when mu = 0: the set is orthonormal and krank = r.
std::optional<Index> krank_lower_bound(const CoherenceReport& report);

}  // namespace cpcoh
