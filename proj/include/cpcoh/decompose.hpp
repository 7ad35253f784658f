#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "cpcoh/cp_model.hpp"
#include "cpcoh/norms.hpp"

namespace cpcoh {

/// Finite set of unit-norm separable atoms, kept as factor tuples.
class Dictionary {
 public:
  explicit Dictionary(std::vector<std::vector<Vec>> atoms);

  Index size() const noexcept { return atoms_.size(); }
  const std::vector<Index>& dims() const noexcept { return dims_; }
  const std::vector<Vec>& atom(Index i) const { return atoms_.at(i); }
  /// <atom i, atom j> by the product formula.
  cplx inner(Index i, Index j) const;
  Hypermatrix materialize(Index i) const;
  /// max over i != j of |<atom i, atom j>|.
  double mu() const noexcept { return mu_; }

 private:
  std::vector<std::vector<Vec>> atoms_;
  std::vector<Index> dims_;
  double mu_ = 0.0;
};

struct GreedyResult {
  std::vector<Index> selected;
  /// Coefficients of the orthogonal projection onto the selected atoms.
  std::vector<cplx> coefficients;
  /// residuals[0] = ||f||, residuals[m] = ||f_m||.
  std::vector<double> residuals;
  bool converged = false;
  /// The Gram system was singular and a pseudoinverse was used.
  bool pinv_fallback = false;
  /// Stopped early because the residual stopped decreasing.
  bool stagnated = false;
};

/// Weakly orthogonal greedy algorithm with weakness parameter t.
GreedyResult woga(const Hypermatrix& f, const Dictionary& dict, double t, Index max_iter, double tol);

struct Rank1Approx {
  double weight = 0.0;
  std::vector<Vec> factors;
};

/// Spectral-norm witness: weight = max |<f, phi_1 (x) ... (x) phi_d>|.
Rank1Approx best_rank1(const Hypermatrix& f, const SpectralConfig& cfg = {});

struct OgaConfig {
  SpectralConfig spectral{};
  /// Minimum residual decrease per step; three misses in a row stop the run.
  double stagnation_tol = 1e-14;
};

struct OgaResult {
  CPModel model;  // canonical
  GreedyResult trace;
};

/// Greedy rank-1 selection over the continuous separable set with joint
/// re-projection after every step. A baseline, not an optimal solver.
OgaResult oga_continuous(const Hypermatrix& f, Index r, const OgaConfig& cfg = {});

enum class Orthogonality { none, per_mode, separable };

struct SolverConfig {
  Index r = 1;
  std::optional<std::vector<double>> coherence_caps;
  std::optional<double> tychonoff_lambda;
  Orthogonality orthogonality = Orthogonality::none;
  Index max_iter = 2000;
  double tol = 1e-10;
  std::uint64_t seed = 0;
  /// Start 0 is the greedy warm start (when enabled), the rest are random.
  Index starts = 1;
  bool warm_start = true;

  void validate(const std::vector<Index>& dims) const;
};

struct AlsResult {
  CPModel model;  // canonical
  double loss = 0.0;  // ||f - model||^2 (+ penalty in the Tychonoff regime)
  double residual = 0.0;  // ||f - model||
  std::vector<double> loss_trace;
  std::vector<double> coherences;
  Index iterations = 0;
  bool converged = false;
  /// Caps could not be met within the projection budget.
  bool caps_violated = false;
  /// Caps given but prod caps >= 1/(r-1): existence is not guaranteed.
  bool existence_warning = false;
  Index best_start = 0;
};

/// Alternating least squares under one constraint regime (none, coherence
/// caps, Tychonoff penalty, or orthogonality). Best start by final loss.
AlsResult constrained_als(const Hypermatrix& f, const SolverConfig& cfg);

struct DivergenceRow {
  Index n = 0;
  double loss = 0.0;
  double max_weight = 0.0;
  std::array<double, 3> coherences{};
};

/// Rank-2 approximants f_n of the rank-3 border example built from phi/psi
/// (one vector per mode), for n = n_min..n_max.
std::vector<DivergenceRow> divergence_witness(std::span<const Vec> phi, std::span<const Vec> psi, Index n_min,
                                              Index n_max);

}  // namespace cpcoh
