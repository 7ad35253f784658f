#include "cpcoh/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cpcoh/errors.hpp"
#include "cpcoh/random.hpp"

namespace cpcoh {
namespace {

std::vector<Vec> leading_singular_vectors(const Hypermatrix& t) {
  std::vector<Vec> out;
  for (Index k = 0; k < t.order(); ++k) {
    Eigen::JacobiSVD<Mat> svd(t.unfold(k), Eigen::ComputeThinU);
    out.emplace_back(svd.matrixU().col(0));
  }
  return out;
}

}  // namespace

SpectralResult spectral_norm(const Hypermatrix& t, const SpectralConfig& cfg) {
  require(t.order() >= 1 && t.size() >= 1, "spectral_norm: empty tensor");
  require(t.all_finite(), "spectral_norm: non-finite entries");
  SpectralResult best;
  if (t.squared_norm() == 0.0) return best;
  best.value = -1.0;
  Rng rng(cfg.seed);
  const Index restarts = std::max<Index>(cfg.restarts, 1);

  for (Index s = 0; s < restarts; ++s) {
    std::vector<Vec> phi;
    if (s == 0) {
      phi = leading_singular_vectors(t);
    } else {
      for (Index k = 0; k < t.order(); ++k) phi.push_back(random_unit_vector(static_cast<Eigen::Index>(t.dim(k)), rng));
    }
    double value = std::abs(contract_all(t, phi));
    bool converged = false;
    Index sweep = 0;
    while (sweep < cfg.max_sweeps) {
      ++sweep;
      double current = value;
      for (Index k = 0; k < t.order(); ++k) {
        Vec c = contract_except(t, phi, k);
        const double n = c.norm();
        if (n == 0.0) continue;
        phi[k] = c / n;
        current = n;
      }
      const double gain = current - value;
      value = std::max(value, current);
      if (gain <= cfg.tol * value) {
        converged = true;
        break;
      }
    }
    // Recompute from the final witness so the value is reproducible from it.
    value = std::abs(contract_all(t, phi));
    if (value > best.value) {
      best.value = value;
      best.witness = phi;
      best.restart = s;
      best.sweeps = sweep;
      best.converged = converged;
    }
  }
  return best;
}

namespace {

struct Term {
  double weight;
  std::vector<Vec> factors;
};

std::vector<Index> drop_mode(const std::vector<Index>& dims, Index k) {
  std::vector<Index> out;
  for (Index j = 0; j < dims.size(); ++j)
    if (j != k) out.push_back(dims[j]);
  return out;
}

double total_weight(const std::vector<Term>& terms) {
  double s = 0.0;
  for (const Term& t : terms) s += t.weight;
  return s;
}

// Recursive unfolding SVDs; every term is exact, the result is a decomposition of t
// up to the singular values that were discarded as numerically zero.
std::vector<Term> svd_tree(const Hypermatrix& t) {
  std::vector<Term> terms;
  const double norm = t.frobenius_norm();
  if (norm == 0.0) return terms;
  if (t.order() == 1) {
    Vec v(static_cast<Eigen::Index>(t.size()));
    for (Index i = 0; i < t.size(); ++i) v(static_cast<Eigen::Index>(i)) = t[i] / norm;
    terms.push_back({norm, {v}});
    return terms;
  }
  std::vector<Term> best;
  double best_weight = std::numeric_limits<double>::infinity();
  const Index modes = t.order() == 2 ? 1 : t.order();
  for (Index k = 0; k < modes; ++k) {
    Eigen::JacobiSVD<Mat> svd(t.unfold(k), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    const auto rest_dims = drop_mode(t.dims(), k);
    std::vector<Term> candidate;
    for (Eigen::Index j = 0; j < s.size(); ++j) {
      if (s(j) <= 1e-15 * s(0)) break;
      std::vector<cplx> entries(svd.matrixV().rows());
      for (Eigen::Index i = 0; i < svd.matrixV().rows(); ++i) entries[static_cast<Index>(i)] = std::conj(svd.matrixV()(i, j));
      const Hypermatrix rest(rest_dims, std::move(entries));
      for (Term& sub : svd_tree(rest)) {
        sub.weight *= s(j);
        sub.factors.insert(sub.factors.begin() + static_cast<std::ptrdiff_t>(k), svd.matrixU().col(j));
        candidate.push_back(std::move(sub));
      }
    }
    const double w = total_weight(candidate);
    if (w < best_weight) {
      best_weight = w;
      best = std::move(candidate);
    }
  }
  return best;
}

Hypermatrix evaluate_terms(const std::vector<Index>& dims, const std::vector<Term>& terms) {
  Hypermatrix out(dims);
  for (const Term& term : terms) out += cplx{term.weight, 0.0} * rank1_outer(term.factors);
  return out;
}

// Ridge-penalised ALS with a decreasing penalty; returns unit-factor terms.
std::vector<Term> penalised_als(const Hypermatrix& t, Index r, const std::vector<Term>& init, Index sweeps, Rng& rng) {
  const Index d = t.order();
  std::vector<Mat> a(d);
  for (Index k = 0; k < d; ++k) {
    a[k].resize(static_cast<Eigen::Index>(t.dim(k)), static_cast<Eigen::Index>(r));
    for (Index p = 0; p < r; ++p) {
      Vec col = p < init.size() ? Vec(init[p].factors[k]) : random_unit_vector(a[k].rows(), rng);
      if (p < init.size()) col *= std::pow(init[p].weight, 1.0 / static_cast<double>(d));
      a[k].col(static_cast<Eigen::Index>(p)) = col;
    }
  }
  const double scale = t.frobenius_norm();
  const double stages[] = {1e-2, 1e-3, 1e-4, 1e-6, 0.0};
  const Mat eye = Mat::Identity(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r));
  for (double tau : stages) {
    for (Index it = 0; it < sweeps; ++it) {
      for (Index k = 0; k < d; ++k) {
        Mat g = Mat::Ones(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r));
        for (Index j = 0; j < d; ++j)
          if (j != k) g = g.cwiseProduct(a[j].adjoint() * a[j]);
        const Mat kr = khatri_rao_except(a, k);
        const Mat m = t.unfold(k) * kr.conjugate();
        const Mat lhs = g.conjugate() + tau * scale * eye;
        a[k] = lhs.transpose().completeOrthogonalDecomposition().solve(m.transpose()).transpose();
      }
    }
  }
  std::vector<Term> out;
  for (Index p = 0; p < r; ++p) {
    Term term{1.0, {}};
    for (Index k = 0; k < d; ++k) {
      Vec c = a[k].col(static_cast<Eigen::Index>(p));
      const double n = c.norm();
      if (n == 0.0 || !std::isfinite(n)) {
        term.weight = 0.0;
        break;
      }
      term.weight *= n;
      term.factors.push_back(c / n);
    }
    if (term.weight > 0.0) out.push_back(std::move(term));
  }
  return out;
}

struct UpperCandidate {
  double value = std::numeric_limits<double>::infinity();
  std::vector<Term> terms;
  Hypermatrix residual;
  std::string source;
};

// Any decomposition D gives ||t||_* <= sum weights(D) + ||t - D||_1, since the residual
// splits into scaled basis rank-1 terms.
void consider(const Hypermatrix& t, std::vector<Term> terms, const std::string& source, UpperCandidate& best) {
  Hypermatrix residual = t - evaluate_terms(t.dims(), terms);
  const double value = total_weight(terms) + residual.l1_norm();
  if (value < best.value) {
    best.value = value;
    best.terms = std::move(terms);
    best.residual = std::move(residual);
    best.source = source;
  }
}

CPModel witness_model(const Hypermatrix& t, const UpperCandidate& c) {
  CPModel m;
  std::vector<std::vector<Vec>> cols;
  for (const Term& term : c.terms) {
    m.weights.emplace_back(term.weight, 0.0);
    cols.push_back(term.factors);
  }
  for (Index i = 0; i < c.residual.size(); ++i) {
    if (c.residual[i] == cplx{0.0, 0.0}) continue;
    const auto idx = t.multi_index(i);
    std::vector<Vec> basis;
    for (Index k = 0; k < t.order(); ++k) {
      Vec e = Vec::Zero(static_cast<Eigen::Index>(t.dim(k)));
      e(static_cast<Eigen::Index>(idx[k])) = 1.0;
      basis.push_back(e);
    }
    m.weights.push_back(c.residual[i]);
    cols.push_back(std::move(basis));
  }
  for (Index k = 0; k < t.order(); ++k) {
    Mat a(static_cast<Eigen::Index>(t.dim(k)), static_cast<Eigen::Index>(cols.size()));
    for (Index p = 0; p < cols.size(); ++p) a.col(static_cast<Eigen::Index>(p)) = cols[p][k];
    m.factors.push_back(std::move(a));
  }
  return canonicalize(m).model;
}

UpperCandidate search_upper(const Hypermatrix& t, const NuclearConfig& cfg, double stop_below) {
  UpperCandidate best;
  consider(t, {}, "entrywise", best);
  if (best.value <= stop_below) return best;

  const auto tree = svd_tree(t);
  consider(t, tree, "unfolding-svd", best);
  if (best.value <= stop_below || !cfg.local_search || t.order() < 3) return best;

  Index max_dim = 0;
  for (Index n : t.dims()) max_dim = std::max(max_dim, n);
  const Index cap = cfg.max_rank > 0 ? cfg.max_rank : std::min<Index>(std::max<Index>(t.size() / max_dim, 1), 12);
  std::vector<Term> sorted = tree;
  std::stable_sort(sorted.begin(), sorted.end(), [](const Term& a, const Term& b) { return a.weight > b.weight; });
  Rng rng(cfg.spectral.seed ^ 0x9e3779b97f4a7c15ULL);
  for (Index r = 1; r <= cap; ++r) {
    consider(t, penalised_als(t, r, sorted, cfg.sweeps_per_stage, rng), "penalised-als", best);
    if (best.value <= stop_below) break;
  }
  return best;
}

void check_nuclear_input(const Hypermatrix& t, const NuclearConfig& cfg) {
  require(t.all_finite(), "nuclear_norm_bounds: non-finite entries");
  if (t.size() > cfg.max_entries)
    throw BudgetExceeded("nuclear norm search refused: " + std::to_string(t.size()) + " entries exceed cap " +
                         std::to_string(cfg.max_entries));
}

}  // namespace

NormCertificate nuclear_norm_bounds(const Hypermatrix& t, const NuclearConfig& cfg) {
  check_nuclear_input(t, cfg);
  require(t.squared_norm() > 0.0, "nuclear_norm_bounds: zero tensor");
  NormCertificate cert;
  const SpectralResult sr = spectral_norm(t, cfg.spectral);
  cert.spectral = sr.value;
  cert.spectral_witness = sr.witness;

  cert.nuclear_lower = t.squared_norm() / sr.value;
  cert.lower_source = "self-dual";
  for (Index k = 0; k < t.order(); ++k) {
    Eigen::JacobiSVD<Mat> svd(t.unfold(k), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Mat polar = svd.matrixU() * svd.matrixV().adjoint();
    const Hypermatrix g = Hypermatrix::fold(polar, k, t.dims());
    const double gs = spectral_norm(g, cfg.spectral).value;
    if (gs <= 0.0) continue;
    const double bound = std::abs(inner_product(t, g)) / gs;
    if (bound > cert.nuclear_lower) {
      cert.nuclear_lower = bound;
      cert.lower_source = "polar-unfolding-" + std::to_string(k + 1);
    }
  }

  const double target = cert.nuclear_lower * (1.0 + cfg.rel_tol);
  const UpperCandidate up = search_upper(t, cfg, target);
  cert.nuclear_upper = up.value;
  cert.upper_source = up.source;
  cert.upper_witness = witness_model(t, up);
  // The lower bound divides by a computed spectral norm, which can only be
  // underestimated; clip rounding-level overshoot so the sandwich stays ordered.
  if (cert.nuclear_lower > cert.nuclear_upper && cert.nuclear_lower - cert.nuclear_upper <= 1e-9 * cert.nuclear_upper)
    cert.nuclear_lower = cert.nuclear_upper;
  cert.certified = cert.nuclear_upper - cert.nuclear_lower <= cfg.rel_tol * cert.nuclear_upper;
  return cert;
}

double nuclear_upper_bound(const Hypermatrix& t, const NuclearConfig& cfg) {
  check_nuclear_input(t, cfg);
  if (t.squared_norm() == 0.0) return 0.0;
  return search_upper(t, cfg, 0.0).value;
}

double duality_gap_check(const Hypermatrix& f, const Hypermatrix& g, const NuclearConfig& cfg) {
  require(same_shape(f, g), "duality_gap_check: shape mismatch");
  const double fs = spectral_norm(f, cfg.spectral).value;
  return fs * nuclear_upper_bound(g, cfg) - std::abs(inner_product(f, g));
}

Hypermatrix mat_mult_tensor(Index n) {
  require(n >= 1 && n <= 4, "mat_mult_tensor: n must lie in 1..4");
  const Index m = n * n;
  Hypermatrix t({m, m, m});
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (Index l = 0; l < n; ++l) {
        const Index idx[3] = {i * n + j, j * n + l, l * n + i};
        t.at(idx) = 1.0;
      }
  return t;
}

CPModel mat_mult_standard_decomposition(Index n) {
  require(n >= 1 && n <= 4, "mat_mult_standard_decomposition: n must lie in 1..4");
  const auto m = static_cast<Eigen::Index>(n * n);
  const auto r = static_cast<Eigen::Index>(n * n * n);
  CPModel model;
  model.weights.assign(static_cast<Index>(r), cplx{1.0, 0.0});
  for (int k = 0; k < 3; ++k) model.factors.push_back(Mat::Zero(m, r));
  Eigen::Index p = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (Index l = 0; l < n; ++l, ++p) {
        model.factors[0](static_cast<Eigen::Index>(i * n + j), p) = 1.0;
        model.factors[1](static_cast<Eigen::Index>(j * n + l), p) = 1.0;
        model.factors[2](static_cast<Eigen::Index>(l * n + i), p) = 1.0;
      }
  return model;
}

CPModel strassen_decomposition() {
  // Entry order of every factor: (11, 12, 21, 22). The third factor stores the
  // transpose of each product's contribution to C = AB, as trace(ABC) requires.
  const double a[7][4] = {{1, 0, 0, 1}, {0, 0, 1, 1}, {1, 0, 0, 0}, {0, 0, 0, 1},
                          {1, 1, 0, 0}, {-1, 0, 1, 0}, {0, 1, 0, -1}};
  const double b[7][4] = {{1, 0, 0, 1}, {1, 0, 0, 0}, {0, 1, 0, -1}, {-1, 0, 1, 0},
                          {0, 0, 0, 1}, {1, 1, 0, 0}, {0, 0, 1, 1}};
  const double c[7][4] = {{1, 0, 0, 1}, {0, 1, 0, -1}, {0, 0, 1, 1}, {1, 1, 0, 0},
                          {-1, 0, 1, 0}, {0, 0, 0, 1}, {1, 0, 0, 0}};
  CPModel model;
  model.weights.assign(7, cplx{1.0, 0.0});
  for (int k = 0; k < 3; ++k) model.factors.push_back(Mat::Zero(4, 7));
  for (int p = 0; p < 7; ++p)
    for (int i = 0; i < 4; ++i) {
      model.factors[0](i, p) = a[p][i];
      model.factors[1](i, p) = b[p][i];
      model.factors[2](i, p) = c[p][i];
    }
  return model;
}

}  // namespace cpcoh
