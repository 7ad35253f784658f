#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace cpcoh {

using cplx = std::complex<double>;
using Index = std::size_t;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

/// Dense d-way complex array.
///
/// Entries are stored row-major in lexicographic order with mode 1 varying
/// slowest. Every flattening and unfolding in the library uses this layout.
class Hypermatrix {
 public:
  Hypermatrix() = default;
  /// Zero-filled hypermatrix of the given shape.
  explicit Hypermatrix(std::vector<Index> dims);
  Hypermatrix(std::vector<Index> dims, std::vector<cplx> entries);

  const std::vector<Index>& dims() const noexcept { return dims_; }
  Index order() const noexcept { return dims_.size(); }
  Index size() const noexcept { return entries_.size(); }
  Index dim(Index mode) const { return dims_.at(mode); }

  std::span<const cplx> entries() const noexcept { return entries_; }
  std::span<cplx> entries() noexcept { return entries_; }

  cplx& operator[](Index flat) { return entries_[flat]; }
  const cplx& operator[](Index flat) const { return entries_[flat]; }
  cplx& at(std::span<const Index> index) { return entries_.at(flat_index(index)); }
  const cplx& at(std::span<const Index> index) const { return entries_.at(flat_index(index)); }

  Index flat_index(std::span<const Index> index) const;
  std::vector<Index> multi_index(Index flat) const;
  std::vector<Index> strides() const;

  double frobenius_norm() const;
  double squared_norm() const;
  /// Sum of entry magnitudes.
  double l1_norm() const;
  bool all_finite() const;

  /// Mode-k unfolding: rows indexed by i_k, columns by the remaining modes in
  /// row-major order.
  Mat unfold(Index mode) const;
  static Hypermatrix fold(const Mat& unfolded, Index mode, std::vector<Index> dims);

  Hypermatrix& operator+=(const Hypermatrix& other);
  Hypermatrix& operator-=(const Hypermatrix& other);
  Hypermatrix& operator*=(cplx scale);

 private:
  std::vector<Index> dims_;
  std::vector<cplx> entries_;
};

Hypermatrix operator+(Hypermatrix lhs, const Hypermatrix& rhs);
Hypermatrix operator-(Hypermatrix lhs, const Hypermatrix& rhs);
Hypermatrix operator*(cplx scale, Hypermatrix rhs);

bool same_shape(const Hypermatrix& a, const Hypermatrix& b) noexcept;
double max_abs_diff(const Hypermatrix& a, const Hypermatrix& b);

/// phi_1 (x) ... (x) phi_d.
Hypermatrix rank1_outer(std::span<const Vec> factors);

/// <f, g> = sum f(i) conj(g(i)).
cplx inner_product(const Hypermatrix& f, const Hypermatrix& g);

/// <t, phi_1 (x) ... (x) phi_d> without materialising the rank-1 term.
cplx contract_all(const Hypermatrix& t, std::span<const Vec> factors);

/// Contraction of t against conj(factors[j]) in every mode j != skip.
/// The result c satisfies <t, phi_1 (x) ... (x) phi_d> = phi_skip^H c.
Vec contract_except(const Hypermatrix& t, std::span<const Vec> factors, Index skip);

/// (M_1, ..., M_d) . T, i.e. entry (a,b,...) = sum M_1(a,i) M_2(b,j) ... T(i,j,...).
Hypermatrix multilinear_action(std::span<const Mat> matrices, const Hypermatrix& t);

/// Column p of the Khatri-Rao product of all factor matrices except `skip`,
/// laid out to match the columns of unfold(skip).
Mat khatri_rao_except(std::span<const Mat> factors, Index skip);

}  // namespace cpcoh
