#include "cpcoh/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cpcoh/errors.hpp"

namespace cpcoh {

double relative_incoherence(double mu) {
  require(mu >= 0.0 && mu <= 1.0 + 1e-12, "coherence must lie in [0,1]");
  if (mu == 0.0) return std::numeric_limits<double>::infinity();
  return (1.0 - mu) / mu;
}

CoherenceReport coherence(const FactorSet& fs) {
  CoherenceReport rep;
  const Mat& v = fs.vectors();
  const auto r = v.cols();
  if (r == 1) {
    rep.single_vector = true;
    rep.omega_infinite = true;
    rep.omega = std::numeric_limits<double>::infinity();
    return rep;
  }
  double best = -1.0;
  for (Eigen::Index p = 0; p < r; ++p)
    for (Eigen::Index q = p + 1; q < r; ++q) {
      const double m = std::abs(v.col(p).dot(v.col(q)));
      if (m > best) {
        best = m;
        rep.argpair = {static_cast<Index>(p), static_cast<Index>(q)};
      }
    }
  // Rounding can push a collinear pair a hair above 1.
  rep.mu = std::min(best, 1.0);
  rep.omega = relative_incoherence(rep.mu);
  rep.omega_infinite = rep.mu == 0.0;
  return rep;
}

double coherence_gram(const FactorSet& fs) {
  const Mat g = fs.vectors().adjoint() * fs.vectors();
  double best = 0.0;
  for (Eigen::Index p = 0; p < g.rows(); ++p)
    for (Eigen::Index q = 0; q < g.cols(); ++q)
      if (p != q) best = std::max(best, std::abs(g(p, q)));
  return std::min(best, 1.0);
}

namespace {

bool independent(const Mat& v, const std::vector<Index>& subset, double rel_tol) {
  Mat sub(v.rows(), static_cast<Eigen::Index>(subset.size()));
  for (Index j = 0; j < subset.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = v.col(static_cast<Eigen::Index>(subset[j]));
  if (sub.cols() > sub.rows()) return false;
  Eigen::JacobiSVD<Mat> svd(sub);
  const auto& s = svd.singularValues();
  return s(s.size() - 1) > rel_tol * s(0);
}

// Calls visit on every k-subset of {0..r-1} in lexicographic order until it returns false.
template <class F>
bool for_each_subset(Index r, Index k, F&& visit) {
  std::vector<Index> idx(k);
  for (Index i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    if (!visit(idx)) return false;
    Index i = k;
    while (i > 0 && idx[i - 1] == r - k + i - 1) --i;
    if (i == 0) return true;
    ++idx[i - 1];
    for (Index j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

void check_budget(const FactorSet& fs, Index budget) {
  if (fs.size() > budget)
    throw BudgetExceeded("brute-force Kruskal rank refused: r = " + std::to_string(fs.size()) +
                         " exceeds budget " + std::to_string(budget) +
                         " (the problem is NP-hard; no approximation is attempted)");
}

}  // namespace

Index kruskal_rank_bruteforce(const FactorSet& fs, double rel_tol, Index budget) {
  check_budget(fs, budget);
  const Mat& v = fs.vectors();
  const Index r = fs.size();
  for (Index k = std::min(r, fs.dim()); k >= 1; --k) {
    const bool all = for_each_subset(r, k, [&](const std::vector<Index>& s) { return independent(v, s, rel_tol); });
    if (all) return k;
  }
  return 0;
}

Index spark_bruteforce(const FactorSet& fs, double rel_tol, Index budget) {
  check_budget(fs, budget);
  const Mat& v = fs.vectors();
  const Index r = fs.size();
  for (Index k = 1; k <= r; ++k) {
    const bool all = for_each_subset(r, k, [&](const std::vector<Index>& s) { return independent(v, s, rel_tol); });
    if (!all) return k;
  }
  return r + 1;
}

std::optional<Index> krank_lower_bound(const CoherenceReport& report) {
  require(report.mu >= 0.0 && report.mu <= 1.0, "coherence must lie in [0,1]");
  if (report.mu == 0.0) return std::nullopt;
  return static_cast<Index>(std::ceil(1.0 / report.mu - 1e-12));
}

}  // namespace cpcoh
