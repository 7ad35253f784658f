#include "cpcoh/conditions.hpp"

#include <cmath>
#include <limits>

#include "cpcoh/errors.hpp"

namespace cpcoh::conditions {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Inclusive bounds are met with equality at symmetric points such as mu_k = 3/10, r = 4,
// where the two sides round differently.
constexpr double kSlack = 1e-12;

void check_mus(std::span<const double> mus) {
  require(!mus.empty(), "at least one coherence is required");
  for (double m : mus) require(m >= 0.0 && m <= 1.0, "coherences must lie in [0,1]");
}

double product(std::span<const double> mus) {
  double p = 1.0;
  for (double m : mus) p *= m;
  return p;
}

void require_order3(std::span<const double> mus) {
  require(mus.size() >= 3,
          "condition needs d >= 3: for d = 2 no decomposition with r >= 2 is essentially unique");
}

Verdict make(double lhs, double rhs, const char* relation) {
  Verdict v;
  v.lhs = lhs;
  v.rhs = rhs;
  v.relation = relation;
  return v;
}

}  // namespace

Verdict existence_condition(std::span<const double> mus, Index r) {
  check_mus(mus);
  require(r >= 1, "rank must be at least 1");
  Verdict v = make(product(mus), 0.0, "<");
  if (r == 1) {
    v.rhs = kInf;
    v.holds = true;
    v.note = "r = 1: a best rank-1 approximation always exists";
    return v;
  }
  v.rhs = 1.0 / static_cast<double>(r - 1);
  v.holds = v.lhs < v.rhs;
  return v;
}

Verdict uniqueness_condition(std::span<const double> mus, Index r) {
  check_mus(mus);
  require(r >= 1, "rank must be at least 1");
  const auto d = static_cast<double>(mus.size());
  Verdict v = make(0.0, 2.0 * static_cast<double>(r) + d - 1.0, ">=");
  for (double m : mus) {
    if (m == 0.0) {
      v.flagged = true;
      v.note = "zero coherence treated as 1/mu = inf";
      v.lhs = kInf;
      continue;
    }
    v.lhs += 1.0 / m;
  }
  v.holds = v.lhs >= v.rhs * (1.0 - kSlack);
  return v;
}

Verdict existence_uniqueness_condition(std::span<const double> mus, Index r) {
  check_mus(mus);
  require_order3(mus);
  require(r >= 1, "rank must be at least 1");
  const auto d = static_cast<double>(mus.size());
  const double threshold = d / (2.0 * static_cast<double>(r) + d - 1.0);
  Verdict v = make(std::pow(product(mus), 1.0 / d), threshold, "<=");
  // Compare in the product domain, which avoids the rounding of the d-th root.
  v.holds = product(mus) <= std::pow(threshold, d) * (1.0 + kSlack);
  return v;
}

Verdict sufficient_sum(std::span<const double> mus, Index r) {
  check_mus(mus);
  require_order3(mus);
  const auto d = static_cast<double>(mus.size());
  Verdict v = make(0.0, d * d / (2.0 * static_cast<double>(r) + d - 1.0), "<=");
  for (double m : mus) v.lhs += m;
  v.holds = v.lhs <= v.rhs * (1.0 + kSlack);
  return v;
}

Verdict sufficient_sumsq(std::span<const double> mus, Index r) {
  check_mus(mus);
  require_order3(mus);
  const auto d = static_cast<double>(mus.size());
  const double t = d / (2.0 * static_cast<double>(r) + d - 1.0);
  Verdict v = make(0.0, d * t * t, "<=");
  for (double m : mus) v.lhs += m * m;
  v.holds = v.lhs <= v.rhs * (1.0 + kSlack);
  return v;
}

Verdict kruskal_condition(std::span<const Index> kranks, Index r) {
  require(!kranks.empty(), "at least one Kruskal rank is required");
  const auto d = static_cast<double>(kranks.size());
  Verdict v = make(2.0 * static_cast<double>(r) + d - 1.0, 0.0, "<=");
  for (Index k : kranks) v.rhs += static_cast<double>(k);
  v.holds = v.lhs <= v.rhs * (1.0 + kSlack);
  return v;
}

Verdict temlyakov_condition(Index r, double mu, double t) {
  require(t > 0.0 && t <= 1.0, "weakness parameter t must lie in (0,1]");
  require(mu >= 0.0 && mu < 1.0, "dictionary coherence must lie in [0,1)");
  Verdict v = make(static_cast<double>(r), 0.0, "<");
  if (mu == 0.0) {
    v.rhs = kInf;
    v.holds = true;
    v.flagged = true;
    v.note = "orthonormal dictionary: recovery holds for every finite r";
    return v;
  }
  v.rhs = t / (1.0 + t) * (1.0 + 1.0 / mu);
  v.holds = v.lhs < v.rhs;
  return v;
}

Index expected_rank(std::span<const Index> dims) {
  require(!dims.empty(), "expected_rank needs at least one dimension");
  double prod = 1.0;
  long long denom = 1 - static_cast<long long>(dims.size());
  for (Index n : dims) {
    require(n >= 1, "dimensions must be positive");
    prod *= static_cast<double>(n);
    denom += static_cast<long long>(n);
  }
  require(denom > 0, "expected rank undefined: 1 - d + sum n_k <= 0");
  return static_cast<Index>(std::ceil(prod / static_cast<double>(denom)));
}

Index kruskal_simple_bound(Index n1, Index n2) {
  require(n1 >= 1 && n2 >= 1, "subarray sizes must be positive");
  return n1 + n2 - 2;
}

CoercivityBound coercivity_lower_bound(std::span<const cplx> weights, std::span<const double> mus) {
  check_mus(mus);
  require(!weights.empty(), "at least one weight is required");
  double norm2 = 0.0;
  for (const cplx& w : weights) norm2 += std::norm(w);
  const double factor = 1.0 - static_cast<double>(weights.size() - 1) * product(mus);
  return {factor * norm2, factor <= 0.0};
}

std::optional<GreedyBound> greedy_bound_check(GreedyBoundKind kind, Index r, double mu) {
  require(mu > 0.0 && mu < 1.0, "coherence must lie in (0,1)");
  require(r >= 1, "rank must be at least 1");
  const auto rr = static_cast<double>(r);
  switch (kind) {
    case GreedyBoundKind::gms:
      if (rr < 1.0 / mu / 32.0) return GreedyBound{8.0 * std::sqrt(rr), r};
      break;
    case GreedyBoundKind::tropp:
      if (rr < 1.0 / mu / 3.0) return GreedyBound{std::sqrt(1.0 + 6.0 * rr), r};
      break;
    case GreedyBoundKind::det:
      // pow rounds, so r sitting exactly on the threshold (mu = 1e-3, r = 5) needs slack.
      if (rr <= std::pow(mu, -2.0 / 3.0) / 20.0 * (1.0 + kSlack)) {
        const auto it = static_cast<Index>(std::ceil(rr * std::log(rr)));
        return GreedyBound{24.0, std::max<Index>(it, 1)};
      }
      break;
    case GreedyBoundKind::liv:
      if (rr <= 1.0 / mu / 20.0) return GreedyBound{3.0, 2 * r};
      break;
  }
  return std::nullopt;
}

const char* to_string(GreedyBoundKind kind) {
  switch (kind) {
    case GreedyBoundKind::gms: return "gms";
    case GreedyBoundKind::tropp: return "tropp";
    case GreedyBoundKind::det: return "det";
    case GreedyBoundKind::liv: return "liv";
  }
  return "?";
}

}  // namespace cpcoh::conditions
