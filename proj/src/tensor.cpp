#include "cpcoh/tensor.hpp"

#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "cpcoh/errors.hpp"

namespace cpcoh {
namespace {

Index checked_product(const std::vector<Index>& dims) {
  require(!dims.empty(), "hypermatrix needs at least one mode");
  Index total = 1;
  for (Index n : dims) {
    require(n >= 1, "hypermatrix dimensions must be positive");
    total *= n;
  }
  return total;
}

// Advances a row-major multi-index; returns false after the last entry.
bool advance(std::vector<Index>& index, const std::vector<Index>& dims) {
  for (Index k = dims.size(); k-- > 0;) {
    if (++index[k] < dims[k]) return true;
    index[k] = 0;
  }
  return false;
}

}  // namespace

Hypermatrix::Hypermatrix(std::vector<Index> dims) : dims_(std::move(dims)) {
  entries_.assign(checked_product(dims_), cplx{0.0, 0.0});
}

Hypermatrix::Hypermatrix(std::vector<Index> dims, std::vector<cplx> entries)
    : dims_(std::move(dims)), entries_(std::move(entries)) {
  const Index expected = checked_product(dims_);
  require(entries_.size() == expected,
          "entry count " + std::to_string(entries_.size()) + " does not match shape product " +
              std::to_string(expected));
}

Index Hypermatrix::flat_index(std::span<const Index> index) const {
  require(index.size() == dims_.size(), "index arity does not match tensor order");
  Index flat = 0;
  for (Index k = 0; k < dims_.size(); ++k) {
    require(index[k] < dims_[k], "index out of range");
    flat = flat * dims_[k] + index[k];
  }
  return flat;
}

std::vector<Index> Hypermatrix::multi_index(Index flat) const {
  std::vector<Index> index(dims_.size());
  for (Index k = dims_.size(); k-- > 0;) {
    index[k] = flat % dims_[k];
    flat /= dims_[k];
  }
  return index;
}

std::vector<Index> Hypermatrix::strides() const {
  std::vector<Index> s(dims_.size(), 1);
  for (Index k = dims_.size(); k-- > 1;) s[k - 1] = s[k] * dims_[k];
  return s;
}

double Hypermatrix::squared_norm() const {
  double sum = 0.0;
  for (const cplx& z : entries_) sum += std::norm(z);
  return sum;
}

double Hypermatrix::frobenius_norm() const { return std::sqrt(squared_norm()); }

double Hypermatrix::l1_norm() const {
  double sum = 0.0;
  for (const cplx& z : entries_) sum += std::abs(z);
  return sum;
}

bool Hypermatrix::all_finite() const {
  for (const cplx& z : entries_)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

Mat Hypermatrix::unfold(Index mode) const {
  require(mode < dims_.size(), "unfolding mode out of range");
  const Index rows = dims_[mode];
  const Index cols = entries_.size() / rows;
  Mat out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::vector<Index> index(dims_.size(), 0);
  Index flat = 0;
  do {
    Index col = 0;
    for (Index k = 0; k < dims_.size(); ++k)
      if (k != mode) col = col * dims_[k] + index[k];
    out(static_cast<Eigen::Index>(index[mode]), static_cast<Eigen::Index>(col)) = entries_[flat++];
  } while (advance(index, dims_));
  return out;
}

Hypermatrix Hypermatrix::fold(const Mat& unfolded, Index mode, std::vector<Index> dims) {
  Hypermatrix t(std::move(dims));
  require(mode < t.order(), "folding mode out of range");
  require(static_cast<Index>(unfolded.rows()) == t.dim(mode) &&
              static_cast<Index>(unfolded.cols()) * t.dim(mode) == t.size(),
          "unfolded matrix shape does not match target dims");
  std::vector<Index> index(t.order(), 0);
  Index flat = 0;
  do {
    Index col = 0;
    for (Index k = 0; k < t.order(); ++k)
      if (k != mode) col = col * t.dims_[k] + index[k];
    t.entries_[flat++] =
        unfolded(static_cast<Eigen::Index>(index[mode]), static_cast<Eigen::Index>(col));
  } while (advance(index, t.dims_));
  return t;
}

Hypermatrix& Hypermatrix::operator+=(const Hypermatrix& other) {
  require(same_shape(*this, other), "shape mismatch in tensor addition");
  for (Index i = 0; i < entries_.size(); ++i) entries_[i] += other.entries_[i];
  return *this;
}

Hypermatrix& Hypermatrix::operator-=(const Hypermatrix& other) {
  require(same_shape(*this, other), "shape mismatch in tensor subtraction");
  for (Index i = 0; i < entries_.size(); ++i) entries_[i] -= other.entries_[i];
  return *this;
}

Hypermatrix& Hypermatrix::operator*=(cplx scale) {
  for (cplx& z : entries_) z *= scale;
  return *this;
}

Hypermatrix operator+(Hypermatrix lhs, const Hypermatrix& rhs) { return lhs += rhs; }
Hypermatrix operator-(Hypermatrix lhs, const Hypermatrix& rhs) { return lhs -= rhs; }
Hypermatrix operator*(cplx scale, Hypermatrix rhs) { return rhs *= scale; }

bool same_shape(const Hypermatrix& a, const Hypermatrix& b) noexcept { return a.dims() == b.dims(); }

double max_abs_diff(const Hypermatrix& a, const Hypermatrix& b) {
  require(same_shape(a, b), "shape mismatch");
  double worst = 0.0;
  for (Index i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

Hypermatrix rank1_outer(std::span<const Vec> factors) {
  require(!factors.empty(), "rank1_outer needs at least one factor");
  std::vector<Index> dims;
  for (const Vec& v : factors) {
    require(v.size() > 0, "rank1_outer factors must be nonempty");
    dims.push_back(static_cast<Index>(v.size()));
  }
  Hypermatrix t(dims);
  std::vector<Index> index(dims.size(), 0);
  Index flat = 0;
  do {
    cplx value{1.0, 0.0};
    for (Index k = 0; k < dims.size(); ++k) value *= factors[k](static_cast<Eigen::Index>(index[k]));
    t[flat++] = value;
  } while (advance(index, dims));
  return t;
}

cplx inner_product(const Hypermatrix& f, const Hypermatrix& g) {
  require(same_shape(f, g), "inner_product: dims mismatch");
  cplx sum{0.0, 0.0};
  for (Index i = 0; i < f.size(); ++i) sum += f[i] * std::conj(g[i]);
  return sum;
}

namespace {

void check_factor_shapes(const Hypermatrix& t, std::span<const Vec> factors) {
  require(factors.size() == t.order(), "factor count does not match tensor order");
  for (Index k = 0; k < factors.size(); ++k)
    require(static_cast<Index>(factors[k].size()) == t.dim(k), "factor length does not match mode size");
}

}  // namespace

cplx contract_all(const Hypermatrix& t, std::span<const Vec> factors) {
  check_factor_shapes(t, factors);
  // Contract the last mode first, then fold inward; cost is O(size).
  std::vector<cplx> work(t.entries().begin(), t.entries().end());
  Index len = work.size();
  for (Index k = t.order(); k-- > 0;) {
    const Index n = t.dim(k);
    const Index outer = len / n;
    for (Index o = 0; o < outer; ++o) {
      cplx acc{0.0, 0.0};
      for (Index i = 0; i < n; ++i) acc += work[o * n + i] * std::conj(factors[k](static_cast<Eigen::Index>(i)));
      work[o] = acc;
    }
    len = outer;
  }
  return work[0];
}

Vec contract_except(const Hypermatrix& t, std::span<const Vec> factors, Index skip) {
  check_factor_shapes(t, factors);
  require(skip < t.order(), "contract_except: mode out of range");
  const auto& dims = t.dims();
  Vec out = Vec::Zero(static_cast<Eigen::Index>(dims[skip]));
  std::vector<Index> index(dims.size(), 0);
  Index flat = 0;
  do {
    cplx w{1.0, 0.0};
    for (Index k = 0; k < dims.size(); ++k)
      if (k != skip) w *= std::conj(factors[k](static_cast<Eigen::Index>(index[k])));
    out(static_cast<Eigen::Index>(index[skip])) += t[flat++] * w;
  } while (advance(index, dims));
  return out;
}

Hypermatrix multilinear_action(std::span<const Mat> matrices, const Hypermatrix& t) {
  require(matrices.size() == t.order(), "multilinear_action: one matrix per mode required");
  Hypermatrix current = t;
  for (Index k = 0; k < t.order(); ++k) {
    const Mat& m = matrices[k];
    require(static_cast<Index>(m.rows()) == t.dim(k) && static_cast<Index>(m.cols()) == t.dim(k),
            "multilinear_action: matrix " + std::to_string(k) + " must be n_k x n_k");
    current = Hypermatrix::fold(m * current.unfold(k), k, current.dims());
  }
  return current;
}

Mat khatri_rao_except(std::span<const Mat> factors, Index skip) {
  require(skip < factors.size(), "khatri_rao_except: mode out of range");
  const Eigen::Index r = factors[0].cols();
  Index rows = 1;
  for (Index k = 0; k < factors.size(); ++k)
    if (k != skip) rows *= static_cast<Index>(factors[k].rows());
  Mat out(static_cast<Eigen::Index>(rows), r);
  for (Eigen::Index p = 0; p < r; ++p) {
    Vec col = Vec::Ones(1);
    for (Index k = 0; k < factors.size(); ++k) {
      if (k == skip) continue;
      const Vec& a = factors[k].col(p);
      Vec next(col.size() * a.size());
      for (Eigen::Index i = 0; i < col.size(); ++i) next.segment(i * a.size(), a.size()) = col(i) * a;
      col = std::move(next);
    }
    out.col(p) = col;
  }
  return out;
}

}  // namespace cpcoh
