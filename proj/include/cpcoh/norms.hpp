#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cpcoh/cp_model.hpp"

namespace cpcoh {

struct SpectralConfig {
  Index restarts = 64;
  double tol = 1e-12;  // relative improvement per sweep
  Index max_sweeps = 500;
  std::uint64_t seed = 0;
};

struct SpectralResult {
  double value = 0.0;
  /// Unit vectors attaining `value`; empty for the zero tensor.
  std::vector<Vec> witness;
  Index restart = 0;
  Index sweeps = 0;
  bool converged = true;
};

/// max |<T, phi_1 (x) ... (x) phi_d>| over unit vectors, by alternating
/// maximisation. Restart 0 starts from the leading singular vectors of each
/// unfolding, the others from random unit vectors.
SpectralResult spectral_norm(const Hypermatrix& t, const SpectralConfig& cfg = {});

struct NuclearConfig {
  double rel_tol = 1e-3;
  Index max_entries = 256;
  /// Largest rank tried by the local search; 0 picks size / max n_k (at most 12).
  Index max_rank = 0;
  bool local_search = true;
  Index sweeps_per_stage = 60;
  SpectralConfig spectral{};
};

struct NormCertificate {
  double spectral = 0.0;
  std::vector<Vec> spectral_witness;
  double nuclear_lower = 0.0;
  double nuclear_upper = 0.0;
  /// Canonical decomposition whose weights sum to nuclear_upper.
  CPModel upper_witness;
  bool certified = false;
  std::string lower_source;
  std::string upper_source;
};

/// Duality lower bound and best-found decomposition upper bound.
/// Throws BudgetExceeded when the tensor has more than cfg.max_entries entries.
NormCertificate nuclear_norm_bounds(const Hypermatrix& t, const NuclearConfig& cfg = {});

/// Upper bound on ||t||_* from the decomposition search alone.
double nuclear_upper_bound(const Hypermatrix& t, const NuclearConfig& cfg = {});

/// ||f||_sigma * nuclear_upper(g) - |<f,g>|; nonnegative up to rounding.
double duality_gap_check(const Hypermatrix& f, const Hypermatrix& g, const NuclearConfig& cfg = {});

/// T_n in C^{n^2 x n^2 x n^2}; row-major pair index (i,j) -> i*n + j. n <= 4.
Hypermatrix mat_mult_tensor(Index n);

/// The n^3-term decomposition sum e_ij (x) e_jl (x) e_li.
CPModel mat_mult_standard_decomposition(Index n);

/// Strassen's 7-term decomposition of T_2 (unnormalised, unit weights).
CPModel strassen_decomposition();

}  // namespace cpcoh
