#include "cpcoh/cp_model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "cpcoh/errors.hpp"

namespace cpcoh {

std::vector<Index> CPModel::dims() const {
  std::vector<Index> d;
  d.reserve(factors.size());
  for (const Mat& a : factors) d.push_back(static_cast<Index>(a.rows()));
  return d;
}

void CPModel::validate() const {
  require(!factors.empty(), "CP model needs at least one mode");
  for (Index k = 0; k < factors.size(); ++k) {
    require(factors[k].rows() >= 1, "mode " + std::to_string(k) + " has no rows");
    require(static_cast<Index>(factors[k].cols()) == weights.size(),
            "mode " + std::to_string(k) + " has " + std::to_string(factors[k].cols()) +
                " columns, expected rank " + std::to_string(weights.size()));
  }
}

bool CPModel::is_canonical(double tol) const {
  validate();
  for (Index p = 0; p < rank(); ++p) {
    const cplx w = weights[p];
    if (std::abs(w.imag()) > tol || w.real() <= 0.0) return false;
    if (p > 0 && weights[p - 1].real() < w.real()) return false;
    for (const Mat& a : factors)
      if (std::abs(a.col(static_cast<Eigen::Index>(p)).norm() - 1.0) > tol) return false;
  }
  return true;
}

std::vector<Vec> CPModel::term(Index p) const {
  std::vector<Vec> out;
  out.reserve(factors.size());
  for (const Mat& a : factors) out.emplace_back(a.col(static_cast<Eigen::Index>(p)));
  return out;
}

Hypermatrix cp_evaluate(const CPModel& model) {
  model.validate();
  Hypermatrix out(model.dims());
  for (Index p = 0; p < model.rank(); ++p) {
    if (model.weights[p] == cplx{0.0, 0.0}) continue;
    const auto cols = model.term(p);
    out += model.weights[p] * rank1_outer(cols);
  }
  return out;
}

CanonicalForm canonicalize(const CPModel& model) {
  model.validate();
  const Index d = model.order();
  struct Term {
    double weight;
    std::vector<Vec> cols;
  };
  std::vector<Term> terms;
  CanonicalForm result;

  for (Index p = 0; p < model.rank(); ++p) {
    auto cols = model.term(p);
    cplx w = model.weights[p];
    bool zero = (w == cplx{0.0, 0.0});
    for (Vec& c : cols) {
      const double n = c.norm();
      if (n == 0.0 || !std::isfinite(n)) {
        zero = true;
        break;
      }
      c /= n;
      w *= n;
    }
    if (zero || std::abs(w) == 0.0) {
      result.dropped_terms.push_back(p);
      continue;
    }
    cplx carried = w / std::abs(w);
    for (Index k = 0; k + 1 < d; ++k) {
      Eigen::Index best = 0;
      for (Eigen::Index i = 1; i < cols[k].size(); ++i)
        if (std::abs(cols[k](i)) > std::abs(cols[k](best))) best = i;
      const cplx phase = cols[k](best) / std::abs(cols[k](best));
      cols[k] *= std::conj(phase);
      carried *= phase;
    }
    cols[d - 1] *= carried;
    terms.push_back({std::abs(w), std::move(cols)});
  }

  std::stable_sort(terms.begin(), terms.end(),
                   [](const Term& a, const Term& b) { return a.weight > b.weight; });

  CPModel& out = result.model;
  const auto dims = model.dims();
  const auto r = static_cast<Eigen::Index>(terms.size());
  for (Index k = 0; k < d; ++k) out.factors.emplace_back(static_cast<Eigen::Index>(dims[k]), r);
  for (Eigen::Index p = 0; p < r; ++p) {
    out.weights.emplace_back(terms[static_cast<Index>(p)].weight, 0.0);
    for (Index k = 0; k < d; ++k) out.factors[k].col(p) = terms[static_cast<Index>(p)].cols[k];
  }
  return result;
}

double rank1_distance(std::span<const Vec> a, std::span<const Vec> b) {
  require(a.size() == b.size(), "rank1_distance: order mismatch");
  // Track e = 1 - prod_k <a_k, b_k> through e <- e + delta - e delta, where
  // delta = 1 - <a_k, b_k> has real part ||a_k - b_k||^2 / 2. Forming the
  // product first and subtracting from 2 would lose everything below ~1e-8.
  cplx e{0.0, 0.0};
  for (Index k = 0; k < a.size(); ++k) {
    require(a[k].size() == b[k].size(), "rank1_distance: dimension mismatch");
    const cplx delta{0.5 * (a[k] - b[k]).squaredNorm(), -b[k].dot(a[k]).imag()};
    e = e + delta - e * delta;
  }
  return std::sqrt(std::max(0.0, 2.0 * e.real()));
}

bool essentially_equal(const CPModel& m1, const CPModel& m2, double tol) {
  require(m1.is_canonical(1e-9) && m2.is_canonical(1e-9), "essentially_equal requires canonical models");
  if (m1.rank() != m2.rank() || m1.dims() != m2.dims()) return false;
  const Index r = m1.rank();
  for (Index p = 0; p < r; ++p)
    if (std::abs(m1.weights[p].real() - m2.weights[p].real()) > tol) return false;

  std::vector<std::vector<Vec>> t1(r), t2(r);
  for (Index p = 0; p < r; ++p) {
    t1[p] = m1.term(p);
    t2[p] = m2.term(p);
  }

  // Blocks of (near-)equal weights; matching is a bipartite assignment inside each block.
  Index begin = 0;
  while (begin < r) {
    Index end = begin + 1;
    while (end < r && m1.weights[end - 1].real() - m1.weights[end].real() <= tol) ++end;
    const Index n = end - begin;
    std::vector<std::vector<bool>> ok(n, std::vector<bool>(n));
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) ok[i][j] = rank1_distance(t1[begin + i], t2[begin + j]) <= tol;

    std::vector<long> owner(n, -1);
    std::function<bool(Index, std::vector<bool>&)> augment = [&](Index i, std::vector<bool>& seen) {
      for (Index j = 0; j < n; ++j) {
        if (!ok[i][j] || seen[j]) continue;
        seen[j] = true;
        if (owner[j] < 0 || augment(static_cast<Index>(owner[j]), seen)) {
          owner[j] = static_cast<long>(i);
          return true;
        }
      }
      return false;
    };
    for (Index i = 0; i < n; ++i) {
      std::vector<bool> seen(n, false);
      if (!augment(i, seen)) return false;
    }
    begin = end;
  }
  return true;
}

FactorSet::FactorSet(Mat vectors) : vectors_(std::move(vectors)) {
  require(vectors_.cols() >= 1, "factor set needs at least one vector");
  require(vectors_.rows() >= 1, "factor set vectors must be nonempty");
  for (Eigen::Index p = 0; p < vectors_.cols(); ++p) {
    const double n = vectors_.col(p).norm();
    require(std::abs(n - 1.0) <= kUnitTolerance,
            "vector " + std::to_string(p) + " has norm " + std::to_string(n) + ", expected 1");
  }
}

FactorSet FactorSet::normalized(Mat vectors) {
  for (Eigen::Index p = 0; p < vectors.cols(); ++p) {
    const double n = vectors.col(p).norm();
    require(n > 0.0, "cannot normalise a zero vector");
    vectors.col(p) /= n;
  }
  return FactorSet(std::move(vectors));
}

namespace {

void check_lack_inputs(std::span<const Vec> phi, std::span<const Vec> psi) {
  require(phi.size() == 3 && psi.size() == 3, "lack example needs three phi and three psi vectors");
  for (Index k = 0; k < 3; ++k)
    require(phi[k].size() == psi[k].size() && phi[k].size() >= 1, "phi/psi length mismatch");
}

Mat columns(std::initializer_list<Vec> cols) {
  const auto& first = *cols.begin();
  Mat m(first.size(), static_cast<Eigen::Index>(cols.size()));
  Eigen::Index j = 0;
  for (const Vec& c : cols) m.col(j++) = c;
  return m;
}

}  // namespace

CPModel lack_example_target(std::span<const Vec> phi, std::span<const Vec> psi) {
  check_lack_inputs(phi, psi);
  CPModel m;
  m.weights.assign(3, cplx{1.0, 0.0});
  for (Index k = 0; k < 3; ++k) {
    Vec c0 = k == 0 ? psi[k] : phi[k];
    Vec c1 = k == 1 ? psi[k] : phi[k];
    Vec c2 = k == 2 ? psi[k] : phi[k];
    m.factors.push_back(columns({c0, c1, c2}));
  }
  return m;
}

CPModel lack_example_approximant(std::span<const Vec> phi, std::span<const Vec> psi, double n) {
  check_lack_inputs(phi, psi);
  require(n > 0.0, "approximant index must be positive");
  CPModel m;
  m.weights = {cplx{n, 0.0}, cplx{-n, 0.0}};
  for (Index k = 0; k < 3; ++k) m.factors.push_back(columns({Vec(phi[k] + psi[k] / n), phi[k]}));
  return m;
}

}  // namespace cpcoh
