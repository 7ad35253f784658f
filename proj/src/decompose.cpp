#include "cpcoh/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cpcoh/coherence.hpp"
#include "cpcoh/conditions.hpp"
#include "cpcoh/errors.hpp"
#include "cpcoh/random.hpp"

namespace cpcoh {

// ---- dictionary -----------------------------------------------------------

Dictionary::Dictionary(std::vector<std::vector<Vec>> atoms) : atoms_(std::move(atoms)) {
  require(!atoms_.empty(), "dictionary must contain at least one atom");
  for (const Vec& v : atoms_[0]) dims_.push_back(static_cast<Index>(v.size()));
  require(!dims_.empty(), "dictionary atoms need at least one mode");
  for (Index i = 0; i < atoms_.size(); ++i) {
    require(atoms_[i].size() == dims_.size(), "atom " + std::to_string(i) + " has the wrong order");
    double norm = 1.0;
    for (Index k = 0; k < dims_.size(); ++k) {
      require(static_cast<Index>(atoms_[i][k].size()) == dims_[k], "atom " + std::to_string(i) + " has the wrong shape");
      norm *= atoms_[i][k].norm();
    }
    require(std::abs(norm - 1.0) <= 1e-12, "atom " + std::to_string(i) + " does not have unit norm");
  }
  for (Index i = 0; i < atoms_.size(); ++i)
    for (Index j = i + 1; j < atoms_.size(); ++j) mu_ = std::max(mu_, std::abs(inner(i, j)));
}

cplx Dictionary::inner(Index i, Index j) const {
  cplx ip{1.0, 0.0};
  for (Index k = 0; k < dims_.size(); ++k) ip *= atoms_.at(j)[k].dot(atoms_.at(i)[k]);
  return ip;
}

Hypermatrix Dictionary::materialize(Index i) const { return rank1_outer(atoms_.at(i)); }

namespace {

// Gram system G c = b with G(i,j) = <g_j, g_i>; falls back to a pseudoinverse.
std::vector<cplx> project(const Mat& gram, const Vec& rhs, bool& pinv_used) {
  Eigen::JacobiSVD<Mat> svd(gram, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  Vec c;
  if (s(s.size() - 1) < 1e-12 * s(0)) {
    pinv_used = true;
    svd.setThreshold(1e-12);
    c = svd.solve(rhs);
  } else {
    c = gram.partialPivLu().solve(rhs);
  }
  return {c.data(), c.data() + c.size()};
}

}  // namespace

GreedyResult woga(const Hypermatrix& f, const Dictionary& dict, double t, Index max_iter, double tol) {
  require(t > 0.0 && t <= 1.0, "woga: t must lie in (0,1]");
  require(f.dims() == dict.dims(), "woga: target shape does not match dictionary");
  require(f.all_finite(), "woga: non-finite entries");
  GreedyResult res;
  Hypermatrix residual = f;
  res.residuals.push_back(f.frobenius_norm());
  if (res.residuals.back() <= tol) {
    res.converged = true;
    return res;
  }
  std::vector<cplx> projections(dict.size());
  for (Index i = 0; i < dict.size(); ++i) projections[i] = contract_all(f, dict.atom(i));

  for (Index m = 0; m < max_iter; ++m) {
    std::vector<double> score(dict.size());
    double top = 0.0;
    for (Index i = 0; i < dict.size(); ++i) {
      score[i] = std::abs(contract_all(residual, dict.atom(i)));
      top = std::max(top, score[i]);
    }
    Index pick = 0;
    while (score[pick] < t * top) ++pick;
    res.selected.push_back(pick);

    const auto n = static_cast<Eigen::Index>(res.selected.size());
    Mat gram(n, n);
    Vec rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      rhs(i) = projections[res.selected[static_cast<Index>(i)]];
      for (Eigen::Index j = 0; j < n; ++j)
        gram(i, j) = dict.inner(res.selected[static_cast<Index>(j)], res.selected[static_cast<Index>(i)]);
    }
    res.coefficients = project(gram, rhs, res.pinv_fallback);

    residual = f;
    for (Index j = 0; j < res.selected.size(); ++j) residual -= res.coefficients[j] * dict.materialize(res.selected[j]);
    res.residuals.push_back(residual.frobenius_norm());
    if (res.residuals.back() <= tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

Rank1Approx best_rank1(const Hypermatrix& f, const SpectralConfig& cfg) {
  require(f.squared_norm() > 0.0, "best_rank1: zero tensor");
  const SpectralResult s = spectral_norm(f, cfg);
  return {s.value, s.witness};
}

namespace {

CPModel model_from_terms(const std::vector<std::vector<Vec>>& terms, const std::vector<cplx>& weights,
                         const std::vector<Index>& dims) {
  CPModel m;
  m.weights = weights;
  for (Index k = 0; k < dims.size(); ++k) {
    Mat a(static_cast<Eigen::Index>(dims[k]), static_cast<Eigen::Index>(terms.size()));
    for (Index p = 0; p < terms.size(); ++p) a.col(static_cast<Eigen::Index>(p)) = terms[p][k];
    m.factors.push_back(std::move(a));
  }
  return m;
}

cplx term_inner(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  cplx ip{1.0, 0.0};
  for (Index k = 0; k < a.size(); ++k) ip *= b[k].dot(a[k]);
  return ip;
}

}  // namespace

OgaResult oga_continuous(const Hypermatrix& f, Index r, const OgaConfig& cfg) {
  require(r >= 1, "oga_continuous: r must be at least 1");
  require(f.all_finite(), "oga_continuous: non-finite entries");
  OgaResult out;
  GreedyResult& tr = out.trace;
  const double fnorm = f.frobenius_norm();
  tr.residuals.push_back(fnorm);
  std::vector<std::vector<Vec>> atoms;
  std::vector<cplx> rhs_all;
  Hypermatrix residual = f;
  Index misses = 0;

  for (Index m = 0; m < r; ++m) {
    if (residual.frobenius_norm() <= 1e-14 * fnorm || fnorm == 0.0) {
      tr.converged = true;
      break;
    }
    const Rank1Approx pick = best_rank1(residual, cfg.spectral);
    atoms.push_back(pick.factors);
    tr.selected.push_back(m);
    rhs_all.push_back(contract_all(f, pick.factors));

    const auto n = static_cast<Eigen::Index>(atoms.size());
    Mat gram(n, n);
    Vec rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      rhs(i) = rhs_all[static_cast<Index>(i)];
      for (Eigen::Index j = 0; j < n; ++j) gram(i, j) = term_inner(atoms[static_cast<Index>(j)], atoms[static_cast<Index>(i)]);
    }
    tr.coefficients = project(gram, rhs, tr.pinv_fallback);
    residual = f - cp_evaluate(model_from_terms(atoms, tr.coefficients, f.dims()));
    const double prev = tr.residuals.back();
    tr.residuals.push_back(residual.frobenius_norm());
    misses = (prev - tr.residuals.back() < cfg.stagnation_tol * fnorm) ? misses + 1 : 0;
    if (misses >= 3) {
      tr.stagnated = true;
      break;
    }
  }
  if (!tr.stagnated && tr.residuals.back() <= 1e-10 * std::max(fnorm, 1e-300)) tr.converged = true;
  out.model = atoms.empty() ? CPModel{{}, std::vector<Mat>(f.order())}
                            : canonicalize(model_from_terms(atoms, tr.coefficients, f.dims())).model;
  if (atoms.empty())
    for (Index k = 0; k < f.order(); ++k) out.model.factors[k].resize(static_cast<Eigen::Index>(f.dim(k)), 0);
  return out;
}

// ---- constrained ALS --------------------------------------------------------

void SolverConfig::validate(const std::vector<Index>& dims) const {
  require(r >= 1, "solver rank must be at least 1");
  Index total = 1, min_dim = dims.empty() ? 0 : dims[0], max_dim = 0;
  for (Index n : dims) {
    total *= n;
    min_dim = std::min(min_dim, n);
    max_dim = std::max(max_dim, n);
  }
  require(r <= total, "solver rank exceeds the number of tensor entries");
  int regimes = 0;
  if (coherence_caps) {
    ++regimes;
    require(coherence_caps->size() == dims.size(), "one coherence cap per mode is required");
    for (double c : *coherence_caps) require(c > 0.0 && c <= 1.0, "coherence caps must lie in (0,1]");
  }
  if (tychonoff_lambda) {
    ++regimes;
    require(*tychonoff_lambda >= 0.0 && std::isfinite(*tychonoff_lambda), "Tychonoff parameter must be >= 0");
  }
  if (orthogonality != Orthogonality::none) {
    ++regimes;
    if (orthogonality == Orthogonality::per_mode)
      require(r <= min_dim, "per-mode orthogonality needs r <= min n_k");
    else
      require(r <= max_dim, "separable orthogonality needs r <= max n_k");
  }
  require(regimes <= 1, "at most one constraint regime (caps, Tychonoff, orthogonality) may be active");
  require(max_iter >= 1, "max_iter must be positive");
  require(starts >= 1, "at least one start is required");
}

namespace {

Vec orthogonal_direction(const Vec& x) {
  Vec best;
  double best_norm = -1.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vec e = Vec::Zero(x.size());
    e(i) = 1.0;
    Vec v = e - x * x.dot(e);
    if (v.norm() > best_norm) {
      best_norm = v.norm();
      best = v;
    }
  }
  return best / best_norm;
}

// Rotates offending pairs apart inside their own plane until every pairwise
// |<a_p, a_q>| <= cap. Returns false if 20 passes were not enough.
bool project_caps(Mat& a, double cap) {
  if (cap >= 1.0) return true;
  const double target = cap * (1.0 - 1e-9);
  const auto r = a.cols();
  for (int pass = 0; pass < 20; ++pass) {
    bool clean = true;
    for (Eigen::Index p = 0; p < r; ++p)
      for (Eigen::Index q = p + 1; q < r; ++q) {
        const cplx c = a.col(p).dot(a.col(q));
        const double m = std::abs(c);
        if (m <= cap) continue;
        clean = false;
        const cplx phase = c / m;
        const Vec x = a.col(p);
        const Vec y = std::conj(phase) * a.col(q);
        Vec u = x + y;
        Vec v = x - y;
        u /= u.norm();
        v = v.norm() > 1e-12 ? Vec(v / v.norm()) : orthogonal_direction(u);
        const double half = 0.5 * std::acos(target);
        a.col(p) = std::cos(half) * u + std::sin(half) * v;
        a.col(q) = phase * (std::cos(half) * u - std::sin(half) * v);
      }
    if (clean) return true;
  }
  for (Eigen::Index p = 0; p < r; ++p)
    for (Eigen::Index q = p + 1; q < r; ++q)
      if (std::abs(a.col(p).dot(a.col(q))) > cap) return false;
  return true;
}

Mat polar(const Mat& n) {
  Eigen::JacobiSVD<Mat> svd(n, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

struct AlsState {
  std::vector<Mat> a;  // unit columns
  Vec lambda;
};

Mat hadamard_gram(const std::vector<Mat>& a, Index skip) {
  const auto r = a[0].cols();
  Mat g = Mat::Ones(r, r);
  for (Index j = 0; j < a.size(); ++j)
    if (j != skip) g = g.cwiseProduct(a[j].adjoint() * a[j]);
  return g;
}

// Least-squares weights for fixed unit factors: G lambda = c.
Vec refit_weights(const Hypermatrix& f, const std::vector<Mat>& a) {
  const auto r = a[0].cols();
  const Mat g = hadamard_gram(a, a.size());
  Vec c(r);
  for (Eigen::Index p = 0; p < r; ++p) {
    std::vector<Vec> cols;
    for (const Mat& m : a) cols.emplace_back(m.col(p));
    c(p) = contract_all(f, cols);
  }
  // G(p,q) = <term q, term p>.
  return g.completeOrthogonalDecomposition().solve(c);
}

double objective(const Hypermatrix& f, const AlsState& s, double reg, double* residual_norm) {
  CPModel m;
  m.weights.assign(s.lambda.data(), s.lambda.data() + s.lambda.size());
  m.factors = s.a;
  const double res2 = (f - cp_evaluate(m)).squared_norm();
  if (residual_norm) *residual_norm = std::sqrt(res2);
  return res2 + reg * s.lambda.squaredNorm();
}

void normalise_columns(Mat& b, Vec& lambda, const Mat& fallback) {
  lambda.resize(b.cols());
  for (Eigen::Index p = 0; p < b.cols(); ++p) {
    const double n = b.col(p).norm();
    if (n > 0.0 && std::isfinite(n)) {
      lambda(p) = n;
      b.col(p) /= n;
    } else {
      lambda(p) = 0.0;
      b.col(p) = fallback.col(p);
    }
  }
}

struct StartResult {
  AlsState state;
  double loss = 0.0;
  double residual = 0.0;
  std::vector<double> trace;
  Index iterations = 0;
  bool converged = false;
  bool caps_violated = false;
};

StartResult run_als(const Hypermatrix& f, const std::vector<Mat>& unfolded, const SolverConfig& cfg, AlsState s) {
  const Index d = f.order();
  const auto r = static_cast<Eigen::Index>(cfg.r);
  const double reg = cfg.tychonoff_lambda.value_or(0.0);
  const double floor = 1e-28 * f.squared_norm();
  Index orth_mode = 0;
  for (Index k = 1; k < d; ++k)
    if (f.dim(k) > f.dim(orth_mode)) orth_mode = k;
  auto orthogonal = [&](Index k) {
    return cfg.orthogonality == Orthogonality::per_mode ||
           (cfg.orthogonality == Orthogonality::separable && k == orth_mode);
  };

  StartResult out;
  double prev = objective(f, s, reg, nullptr);
  out.trace.push_back(prev);
  const Mat eye = Mat::Identity(r, r);
  for (Index it = 1; it <= cfg.max_iter; ++it) {
    for (Index k = 0; k < d; ++k) {
      const Mat kr = khatri_rao_except(s.a, k);
      const Mat m = unfolded[k] * kr.conjugate();
      if (orthogonal(k)) {
        s.a[k] = polar(Mat(m * s.lambda.conjugate().asDiagonal()));
        s.lambda = refit_weights(f, s.a);
        continue;
      }
      const Mat lhs = hadamard_gram(s.a, k).conjugate() + reg * eye;
      Mat b = lhs.transpose().completeOrthogonalDecomposition().solve(m.transpose()).transpose();
      normalise_columns(b, s.lambda, s.a[k]);
      s.a[k] = std::move(b);
      if (cfg.coherence_caps) {
        if (!project_caps(s.a[k], (*cfg.coherence_caps)[k])) out.caps_violated = true;
        s.lambda = refit_weights(f, s.a);
      }
    }
    const double cur = objective(f, s, reg, nullptr);
    out.trace.push_back(cur);
    out.iterations = it;
    if (!std::isfinite(cur)) break;
    if (cur <= floor || std::abs(prev - cur) < cfg.tol * std::max(prev, floor)) {
      out.converged = true;
      break;
    }
    prev = cur;
  }
  out.loss = objective(f, s, reg, &out.residual);
  if (cfg.coherence_caps) {
    out.caps_violated = false;
    for (Index k = 0; k < d; ++k)
      if (r > 1 && coherence(FactorSet(s.a[k])).mu > (*cfg.coherence_caps)[k] + 1e-12) out.caps_violated = true;
  }
  out.state = std::move(s);
  return out;
}

AlsState random_state(const Hypermatrix& f, Index r, Rng& rng) {
  AlsState s;
  for (Index k = 0; k < f.order(); ++k) {
    Mat a(static_cast<Eigen::Index>(f.dim(k)), static_cast<Eigen::Index>(r));
    for (Index p = 0; p < r; ++p) a.col(static_cast<Eigen::Index>(p)) = random_unit_vector(a.rows(), rng);
    s.a.push_back(std::move(a));
  }
  return s;
}

}  // namespace

AlsResult constrained_als(const Hypermatrix& f, const SolverConfig& cfg) {
  require(f.all_finite(), "constrained_als: non-finite entries");
  require(f.squared_norm() > 0.0, "constrained_als: zero tensor");
  cfg.validate(f.dims());
  const Index d = f.order();
  std::vector<Mat> unfolded;
  for (Index k = 0; k < d; ++k) unfolded.push_back(f.unfold(k));

  Rng rng(cfg.seed);
  std::optional<StartResult> best;
  Index best_start = 0;
  for (Index start = 0; start < cfg.starts; ++start) {
    AlsState s = random_state(f, cfg.r, rng);
    if (start == 0 && cfg.warm_start) {
      OgaConfig oc;
      oc.spectral.seed = cfg.seed;
      oc.spectral.restarts = 8;
      const OgaResult warm = oga_continuous(f, cfg.r, oc);
      for (Index p = 0; p < warm.model.rank() && p < cfg.r; ++p)
        for (Index k = 0; k < d; ++k)
          s.a[k].col(static_cast<Eigen::Index>(p)) = warm.model.factors[k].col(static_cast<Eigen::Index>(p));
    }
    if (cfg.orthogonality != Orthogonality::none)
      for (Index k = 0; k < d; ++k)
        if (cfg.orthogonality == Orthogonality::per_mode || s.a[k].rows() >= s.a[k].cols()) {
          if (cfg.orthogonality == Orthogonality::separable) {
            Index widest = 0;
            for (Index j = 1; j < d; ++j)
              if (f.dim(j) > f.dim(widest)) widest = j;
            if (k != widest) continue;
          }
          s.a[k] = polar(s.a[k]);
        }
    if (cfg.coherence_caps)
      for (Index k = 0; k < d; ++k) project_caps(s.a[k], (*cfg.coherence_caps)[k]);
    s.lambda = refit_weights(f, s.a);

    StartResult run = run_als(f, unfolded, cfg, std::move(s));
    if (!best || run.loss < best->loss) {
      best = std::move(run);
      best_start = start;
    }
  }

  AlsResult out;
  const AlsState& s = best->state;
  CPModel raw;
  raw.weights.assign(s.lambda.data(), s.lambda.data() + s.lambda.size());
  raw.factors = s.a;
  out.model = canonicalize(raw).model;
  out.loss = best->loss;
  out.residual = best->residual;
  out.loss_trace = best->trace;
  out.iterations = best->iterations;
  out.converged = best->converged;
  out.caps_violated = best->caps_violated;
  out.best_start = best_start;
  for (Index k = 0; k < d; ++k)
    out.coherences.push_back(out.model.rank() >= 2 ? coherence(FactorSet(out.model.factors[k])).mu : 0.0);
  if (cfg.coherence_caps)
    out.existence_warning = !conditions::existence_condition(*cfg.coherence_caps, cfg.r).holds;
  return out;
}

// ---- divergence witness ------------------------------------------------------

std::vector<DivergenceRow> divergence_witness(std::span<const Vec> phi, std::span<const Vec> psi, Index n_min,
                                              Index n_max) {
  require(phi.size() == 3 && psi.size() == 3, "divergence_witness needs three phi and three psi vectors");
  require(n_min >= 1 && n_min <= n_max, "divergence_witness: need 1 <= n_min <= n_max");
  for (Index k = 0; k < 3; ++k) {
    require(phi[k].size() == psi[k].size() && phi[k].size() >= 2, "phi/psi must share a length >= 2");
    Mat pair(phi[k].size(), 2);
    pair << phi[k], psi[k];
    Eigen::JacobiSVD<Mat> svd(pair);
    require(svd.singularValues()(1) > 1e-10 * svd.singularValues()(0),
            "phi and psi are linearly dependent in mode " + std::to_string(k + 1) + "; the target would drop rank");
  }
  const Hypermatrix target = cp_evaluate(lack_example_target(phi, psi));
  std::vector<DivergenceRow> rows;
  for (Index n = n_min; n <= n_max; ++n) {
    const auto nn = static_cast<double>(n);
    DivergenceRow row;
    row.n = n;
    row.loss = (target - cp_evaluate(lack_example_approximant(phi, psi, nn))).frobenius_norm();
    double gamma = nn, eta = nn;
    for (Index k = 0; k < 3; ++k) {
      const Vec g = phi[k] + psi[k] / nn;
      gamma *= g.norm();
      eta *= phi[k].norm();
      row.coherences[k] = std::abs(phi[k].dot(g)) / (g.norm() * phi[k].norm());
    }
    row.max_weight = std::max(gamma, eta);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace cpcoh
