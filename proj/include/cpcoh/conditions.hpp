#pragma once

#include <optional>
#include <span>
#include <string>

#include "cpcoh/tensor.hpp"

// Scalar existence / uniqueness / recovery tests. Each verdict carries both
// sides of its inequality so reports can show the margin.
namespace cpcoh::conditions {

struct Verdict {
  bool holds = false;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string relation;  // "<", "<=", ">="
  bool flagged = false;
  std::string note;

  explicit operator bool() const noexcept { return holds; }
};

/// prod mu_k < 1/(r-1); r = 1 always holds.
Verdict existence_condition(std::span<const double> mus, Index r);
/// sum 1/mu_k >= 2r + d - 1. A zero coherence counts as +inf and is flagged.
Verdict uniqueness_condition(std::span<const double> mus, Index r);
/// (prod mu_k)^(1/d) <= d/(2r + d - 1). Requires d >= 3.
Verdict existence_uniqueness_condition(std::span<const double> mus, Index r);
/// sum mu_k <= d^2/(2r + d - 1).
Verdict sufficient_sum(std::span<const double> mus, Index r);
/// sum mu_k^2 <= d (d/(2r + d - 1))^2.
Verdict sufficient_sumsq(std::span<const double> mus, Index r);
/// 2r + d - 1 <= sum krank_k.
Verdict kruskal_condition(std::span<const Index> kranks, Index r);
/// r < t/(1+t) (1 + 1/mu).
Verdict temlyakov_condition(Index r, double mu, double t);

/// ceil(prod n_k / (1 - d + sum n_k)).
Index expected_rank(std::span<const Index> dims);
/// n1 + n2 - 2.
Index kruskal_simple_bound(Index n1, Index n2);

struct CoercivityBound {
  double value = 0.0;
  /// (r-1) prod mu_k >= 1, so the bound carries no information.
  bool negative = false;
};

/// [1 - (r-1) prod mu_k] * ||lambda||^2.
CoercivityBound coercivity_lower_bound(std::span<const cplx> weights, std::span<const double> mus);

enum class GreedyBoundKind { gms, tropp, det, liv };

struct GreedyBound {
  double factor = 0.0;
  Index iterate = 0;
};

/// Approximation-factor guarantees for the orthogonal greedy algorithm.
/// Item det uses the natural log with the iterate index rounded up (min 1).
std::optional<GreedyBound> greedy_bound_check(GreedyBoundKind kind, Index r, double mu);

const char* to_string(GreedyBoundKind kind);

}  // namespace cpcoh::conditions
