// Acceptance suite. One line per criterion, nonzero exit if any fails.
// Pass a list of criterion numbers to run a subset.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <numbers>
#include <set>
#include <string>

#include "cpcoh/coherence.hpp"
#include "cpcoh/conditions.hpp"
#include "cpcoh/decompose.hpp"
#include "cpcoh/norms.hpp"
#include "cpcoh/sim_apps.hpp"
#include "support.hpp"

using namespace cpcoh;
namespace cond = cpcoh::conditions;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<double> model_coherences(const CPModel& m) {
  std::vector<double> mus;
  for (const Mat& a : m.factors) mus.push_back(coherence(FactorSet(a)).mu);
  return mus;
}

// 1 ---------------------------------------------------------------------------
Outcome kruskal_table() {
  // (n1, n2) subarray factorizations and the r_max column of the table.
  const Index rows[6][3] = {{3, 2, 3}, {4, 2, 4}, {2, 3, 3}, {3, 3, 4}, {6, 2, 6}, {4, 4, 6}};
  int bad = 0;
  std::string got;
  for (const auto& r : rows) {
    const Index v = cond::kruskal_simple_bound(r[0], r[1]);
    bad += v != r[2];
    got += std::to_string(v) + " ";
  }
  return {bad == 0, "bounds " + got + "(want 3 4 3 4 6 6)"};
}

// 2 ---------------------------------------------------------------------------
Outcome matmul_norms() {
  const Hypermatrix t = mat_mult_tensor(2);
  const double spec = spectral_norm(t).value;
  const NormCertificate c = nuclear_norm_bounds(t);
  const double fro_lower = t.squared_norm() / spec;
  const bool ok = std::abs(spec - 1.0) <= 1e-6 && c.certified && std::abs(c.nuclear_lower - 8.0) <= 1e-3 &&
                  std::abs(c.nuclear_upper - 8.0) <= 1e-3 && fro_lower >= 8.0 - 1e-6 &&
                  std::abs(cp_evaluate(mat_mult_standard_decomposition(2)).l1_norm() - 8.0) < 1e-12;
  return {ok, fmt("spectral %.12f, nuclear in [%.9f, %.9f], |T|_F^2/spectral %.9f, certified %d", spec,
                  c.nuclear_lower, c.nuclear_upper, fro_lower, int(c.certified))};
}

// 3 ---------------------------------------------------------------------------
Outcome nonexistence_witness() {
  std::vector<Vec> phi(3, Vec::Unit(2, 0)), psi(3, Vec::Unit(2, 1));
  const auto rows = divergence_witness(phi, psi, 8, 64);
  double lo_l = 1e300, hi_l = 0.0, lo_w = 1e300, hi_w = 0.0, worst_mu_margin = 1e300;
  for (const auto& r : rows) {
    const double n = static_cast<double>(r.n);
    lo_l = std::min(lo_l, r.loss * n);
    hi_l = std::max(hi_l, r.loss * n);
    lo_w = std::min(lo_w, r.max_weight / n);
    hi_w = std::max(hi_w, r.max_weight / n);
    for (double mu : r.coherences) worst_mu_margin = std::min(worst_mu_margin, mu - (1.0 - 5.0 / n));
  }
  // Some constant c has every value in [0.85 c, 1.15 c] iff the half-range is within 15% of the midrange.
  const double spread_l = (hi_l - lo_l) / (hi_l + lo_l), spread_w = (hi_w - lo_w) / (hi_w + lo_w);
  const bool ok = rows.size() == 57 && spread_l <= 0.15 && spread_w <= 0.15 && worst_mu_margin >= 0.0;
  return {ok, fmt("loss*n in [%.4f, %.4f] (spread %.2f%%), weight/n in [%.4f, %.4f] (spread %.2f%%), "
                  "min mu - (1 - 5/n) = %.3g",
                  lo_l, hi_l, 100 * spread_l, lo_w, hi_w, 100 * spread_w, worst_mu_margin)};
}

// 4 ---------------------------------------------------------------------------
// 40 of the 64 elements of a random orthonormal product basis of C^{4x4x4},
// each factor perturbed and renormalised; redrawn until mu < 0.09.
Dictionary incoherent_dictionary(Rng& rng, double& mu) {
  for (;;) {
    std::vector<Mat> u{random_unitary(4, rng), random_unitary(4, rng), random_unitary(4, rng)};
    std::vector<Index> cells(64);
    for (Index i = 0; i < 64; ++i) cells[i] = i;
    std::shuffle(cells.begin(), cells.end(), rng);
    std::vector<std::vector<Vec>> atoms;
    for (Index a = 0; a < 40; ++a) {
      const Index c = cells[a];
      const Eigen::Index idx[3] = {static_cast<Eigen::Index>(c / 16), static_cast<Eigen::Index>((c / 4) % 4),
                                   static_cast<Eigen::Index>(c % 4)};
      std::vector<Vec> atom;
      for (int k = 0; k < 3; ++k) {
        Vec v = u[static_cast<Index>(k)].col(idx[k]) + 0.02 * random_complex_vector(4, rng);
        atom.push_back(v.normalized());
      }
      atoms.push_back(atom);
    }
    Dictionary d(atoms);
    if (d.mu() < 0.09) {
      mu = d.mu();
      return d;
    }
  }
}

Outcome temlyakov_recovery() {
  int ok_runs = 0, cond_true = 0;
  double worst_rel = 0.0, worst_mu = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(4000 + seed);
    double mu = 0.0;
    const Dictionary dict = incoherent_dictionary(rng, mu);
    worst_mu = std::max(worst_mu, mu);
    cond_true += cond::temlyakov_condition(5, mu, 1.0).holds;

    std::vector<Index> support(40);
    for (Index i = 0; i < 40; ++i) support[i] = i;
    std::shuffle(support.begin(), support.end(), rng);
    support.resize(5);
    Hypermatrix f({4, 4, 4});
    std::uniform_real_distribution<double> mag(1.0, 2.0), ph(0.0, 2.0 * kPi);
    for (Index i : support) f += std::polar(mag(rng), ph(rng)) * dict.materialize(i);

    const GreedyResult g = woga(f, dict, 1.0, 5, 0.0);
    const double rel = g.residuals.back() / f.frobenius_norm();
    worst_rel = std::max(worst_rel, rel);
    std::set<Index> got(g.selected.begin(), g.selected.end()), want(support.begin(), support.end());
    ok_runs += g.selected.size() == 5 && rel <= 1e-10 && got == want;
  }
  return {ok_runs == 50 && cond_true == 50,
          fmt("%d/50 exact recoveries, condition 5 < t/(1+t)(1+1/mu) true in %d/50, max mu %.4f, "
              "worst residual %.2e ||f||",
              ok_runs, cond_true, worst_mu, worst_rel)};
}

// 5 ---------------------------------------------------------------------------
Outcome coercivity_property() {
  Rng rng(5000);
  int violations = 0, positive = 0;
  double worst = 1e300;
  std::uniform_int_distribution<int> dim(3, 6), rank(2, 5);
  std::uniform_real_distribution<double> eps(0.0, 0.6);
  for (int trial = 0; trial < 1000; ++trial) {
    const Index n = static_cast<Index>(dim(rng));
    const Index r = std::min<Index>(n, static_cast<Index>(rank(rng)));
    CPModel m;
    for (Index p = 0; p < r; ++p) m.weights.push_back(complex_gaussian(rng));
    std::array<double, 3> caps{};
    for (int k = 0; k < 3; ++k) {
      // Orthonormal columns pushed off by a random amount; the cap is the measured coherence.
      const double e = eps(rng);
      Mat a = random_unitary(static_cast<Eigen::Index>(n), rng).leftCols(static_cast<Eigen::Index>(r)) +
              e * test::random_matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(r), rng);
      a = FactorSet::normalized(a).vectors();
      caps[static_cast<Index>(k)] = coherence(FactorSet(a)).mu;
      m.factors.push_back(a);
    }
    const auto bound = cond::coercivity_lower_bound(m.weights, caps);
    positive += !bound.negative;
    const double margin = cp_evaluate(m).squared_norm() - bound.value;
    worst = std::min(worst, margin);
    violations += margin < -1e-9;
  }
  return {violations == 0,
          fmt("%d violations in 1000 sets (%d with a positive bound), min ||f||^2 - bound = %.3g", violations,
              positive, worst)};
}

// 6 ---------------------------------------------------------------------------
Outcome duality_property() {
  Rng rng(6000);
  int violations = 0;
  double worst = 1e300;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::vector<Index> dims = trial % 2 ? std::vector<Index>{3, 2, 2} : std::vector<Index>{2, 2, 2};
    const Hypermatrix f = test::random_tensor(dims, rng), g = test::random_tensor(dims, rng);
    NuclearConfig cfg;
    cfg.spectral.seed = static_cast<std::uint64_t>(trial);
    const double gap = spectral_norm(f, cfg.spectral).value * nuclear_upper_bound(g, cfg) - std::abs(inner_product(f, g));
    worst = std::min(worst, gap);
    violations += gap < -1e-9;
  }
  return {violations == 0, fmt("%d violations in 1000 pairs, min gap %.3g", violations, worst)};
}

// 7 ---------------------------------------------------------------------------
Outcome matrix_specialization() {
  Rng rng(7000);
  std::uniform_int_distribution<int> side(1, 6);
  double e_spec = 0.0, e_nuc = 0.0, e_oga = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = static_cast<Index>(side(rng)), n = static_cast<Index>(side(rng));
    const Mat a = test::random_matrix(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n), rng);
    const Hypermatrix t = Hypermatrix::fold(a, 0, {m, n});
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Mat>(a).singularValues();
    e_spec = std::max(e_spec, std::abs(spectral_norm(t).value - sv(0)));
    const NormCertificate c = nuclear_norm_bounds(t);
    e_nuc = std::max({e_nuc, std::abs(c.nuclear_lower - sv.sum()), std::abs(c.nuclear_upper - sv.sum())});
    const Index r = std::min(m, n);
    const OgaResult o = oga_continuous(t, r);
    for (Index k = 1; k < o.trace.residuals.size(); ++k)
      e_oga = std::max(e_oga, std::abs(o.trace.residuals[k] - sv.tail(sv.size() - static_cast<Eigen::Index>(k)).norm()));
  }
  return {e_spec <= 1e-8 && e_nuc <= 1e-8 && e_oga <= 1e-8,
          fmt("max error: spectral %.2e, nuclear %.2e, greedy residual vs SVD tail %.2e", e_spec, e_nuc, e_oga)};
}

// 8 ---------------------------------------------------------------------------
Outcome implication_chain() {
  long cases = 0, violations = 0, sumsq_true = 0, eu_true = 0;
  std::string first;
  for (int a = 1; a <= 19; ++a)
    for (int b = 1; b <= 19; ++b)
      for (int c = 1; c <= 19; ++c) {
        const std::array<double, 3> mus{a / 20.0, b / 20.0, c / 20.0};
        for (Index r = 1; r <= 8; ++r) {
          ++cases;
          const bool sq = cond::sufficient_sumsq(mus, r).holds;
          const bool sum = cond::sufficient_sum(mus, r).holds;
          const bool eu = cond::existence_uniqueness_condition(mus, r).holds;
          const bool both = cond::existence_condition(mus, r).holds && cond::uniqueness_condition(mus, r).holds;
          sumsq_true += sq;
          eu_true += eu;
          const int bad = (sq && !sum) + (sum && !eu) + (eu && !both);
          if (bad && first.empty())
            first = fmt(", first at mu = (%d, %d, %d)/20, r = %d (%d%d%d%d)", a, b, c, int(r), sq, sum, eu, both);
          violations += bad;
        }
      }
  return {violations == 0, fmt("%ld violations over %ld cases (sumsq true in %ld, combined condition in %ld)",
                               violations, cases, sumsq_true, eu_true) + first};
}

// 9 ---------------------------------------------------------------------------
sim::Point random_direction(Rng& rng) {
  std::normal_distribution<double> g;
  sim::Point v(g(rng), g(rng), g(rng));
  return v.normalized();
}

double best_matching_max_angle(const std::vector<sim::Point>& truth, const std::vector<sim::Point>& est) {
  std::vector<Index> perm(truth.size());
  for (Index i = 0; i < perm.size(); ++i) perm[i] = i;
  double best = 1e300;
  do {
    double worst = 0.0;
    for (Index i = 0; i < perm.size(); ++i) worst = std::max(worst, sim::angle_between(truth[i], est[perm[i]]));
    best = std::min(best, worst);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

Outcome blind_identification() {
  constexpr Index r = 4, n3 = 32;
  sim::ArrayScene scene;
  scene.b = sim::grid_positions(3, 3, 3, 0.45 * scene.wavelength());
  scene.delta = sim::grid_positions(3, 3, 3, 1.35 * scene.wavelength());
  const double n12 = static_cast<double>(scene.b.size() * scene.delta.size());
  const bool triad = sim::has_resolvent_triad(scene.b, scene.wavelength());

  int successes = 0, eq_ok = 0, doa_ok = 0, checker_ok = 0;
  double worst_err = 0.0, max_signal_mu = 0.0;
  long redraws = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(9000 + seed);
    // s1, s2 at coherence 0.8 exactly, s3, s4 Gaussian.
    Mat q = Eigen::HouseholderQR<Mat>(test::random_matrix(n3, 2, rng)).householderQ() * Mat::Identity(n3, 2);
    sim::PathSet paths;
    paths.signals.resize(n3, r);
    paths.signals.col(0) = q.col(0);
    paths.signals.col(1) = 0.8 * q.col(0) + 0.6 * q.col(1);
    paths.signals.col(2) = random_complex_vector(n3, rng);
    paths.signals.col(3) = random_complex_vector(n3, rng);
    const double weights[r] = {1.9, 1.6, 1.3, 1.0};
    for (Eigen::Index p = 0; p < static_cast<Eigen::Index>(r); ++p)
      paths.signals.col(p) *= weights[p] / (paths.signals.col(p).norm() * std::sqrt(n12));

    // Directions at least 10 degrees apart that pass the combined condition.
    sim::Simulation clean;
    bool accepted = false;
    for (int attempt = 0; attempt < 5000 && !accepted; ++attempt, ++redraws) {
      paths.directions.clear();
      while (paths.directions.size() < r) {
        const sim::Point d = random_direction(rng);
        bool far = true;
        for (const auto& e : paths.directions) far = far && sim::angle_between(d, e) >= 10.0 * kDeg;
        if (far) paths.directions.push_back(d);
      }
      clean = sim::simulate_array(scene, paths, 0.0, 0);
      accepted = cond::existence_uniqueness_condition(model_coherences(clean.truth), r).holds;
    }
    if (!accepted) continue;
    ++checker_ok;
    max_signal_mu = std::max(max_signal_mu, coherence(FactorSet::normalized(paths.signals)).mu);

    // 30 dB: per-entry noise power is 1e-3 of the mean signal power.
    const double sigma = clean.tensor.frobenius_norm() / std::sqrt(static_cast<double>(clean.tensor.size())) * std::sqrt(1e-3);
    const sim::Simulation noisy = sim::simulate_array(scene, paths, sigma, 100 + seed);

    SolverConfig cfg;
    cfg.r = r;
    cfg.seed = seed;
    cfg.starts = 2;
    const AlsResult fit = constrained_als(noisy.tensor, cfg);
    const bool eq = essentially_equal(clean.truth, fit.model, 0.05);

    const auto est = sim::doa_estimate(fit.model.factors[0], scene, 1.0 * kDeg);
    std::vector<sim::Point> est_dirs;
    for (const auto& e : est) est_dirs.push_back(e.direction);
    const double err = best_matching_max_angle(paths.directions, est_dirs);
    worst_err = std::max(worst_err, err);
    eq_ok += eq;
    doa_ok += err < 1.0 * kDeg;
    successes += eq && err < 1.0 * kDeg;
  }
  return {triad && checker_ok == 50 && successes >= 45,
          fmt("%d/50 seeds recovered (essentially equal %d, DOA < 1 deg %d), checker true %d/50 after %ld draws, "
              "resolvent triad %d, signal coherence %.3f, worst DOA error %.3f deg",
              successes, eq_ok, doa_ok, checker_ok, redraws, int(triad), max_signal_mu, worst_err / kDeg)};
}

// 10 --------------------------------------------------------------------------
Outcome krank_lemma() {
  Rng rng(10000);
  std::uniform_int_distribution<int> size(3, 10);
  int bound_bad = 0, spark_bad = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto r = static_cast<Index>(size(rng));
    // Plant a dependent (s+1)-subset so that krank <= s < dim span, the lemma's hypothesis.
    std::uniform_int_distribution<Index> pick(1, std::min<Index>(r - 2, 6));
    const Index s = pick(rng);
    const FactorSet fs(test::planted_dependent_set(8, r, s, rng));
    const auto rep = coherence(fs);
    const Index k = kruskal_rank_bruteforce(fs);
    bound_bad += rep.mu == 0.0 || k < *krank_lower_bound(rep);
    spark_bad += spark_bruteforce(fs) != k + 1;
  }
  return {bound_bad == 0 && spark_bad == 0,
          fmt("krank < ceil(1/mu) in %d/500 sets, spark != krank + 1 in %d/500", bound_bad, spark_bad)};
}

// 11 --------------------------------------------------------------------------
Outcome array_properties() {
  Rng rng(11000);
  int collinear_bad = 0, polar_bad = 0, manifold_bad = 0, off_bad = 0;
  // Resolvent-triad scenes: random jitter of a 2x2x2 grid at 0.4 lambda keeps the short differences.
  for (int trial = 0; trial < 1000; ++trial) {
    sim::ArrayScene s;
    s.b = sim::grid_positions(2, 2, 2, 0.4 * s.wavelength());
    std::uniform_real_distribution<double> jitter(-0.02, 0.02);
    for (auto& b : s.b) b += sim::Point(jitter(rng), jitter(rng), jitter(rng)) * s.wavelength();
    s.delta = {sim::Point::Zero()};
    sim::Point dp, dq;
    do {
      dp = random_direction(rng);
      dq = random_direction(rng);
    } while (sim::angle_between(dp, dq) < 1.0 * kDeg);
    const auto c = sim::collinearity_check(s, dp, dq);
    collinear_bad += !c.separation_guaranteed || c.value >= 1.0 - 1e-9;
  }

  std::uniform_real_distribution<double> th(0.0, 2.0 * kPi), el(-1.5, 1.5), al(-kPi, kPi), be(-0.78, 0.78);
  auto beta = [&] {
    double b = be(rng);
    return b == 0.0 ? 0.1 : b;
  };
  for (int trial = 0; trial < 1000; ++trial) {
    const double t1 = th(rng), p1 = el(rng), a1 = al(rng), b1 = beta();
    const Vec v1 = sim::polarization_vector(t1, p1, a1, b1);
    const Vec v2 = sim::polarization_vector(th(rng), el(rng), al(rng), beta());
    polar_bad += std::abs(v2.dot(v1)) > 1.0 + 1e-12;

    // Equality manifold: same beta, phi, theta shifted by 2 pi k', alpha shifted by pi k.
    std::uniform_int_distribution<int> k(-3, 3);
    const Vec v3 = sim::polarization_vector(t1 + 2.0 * kPi * k(rng), p1, a1 + kPi * k(rng), b1);
    manifold_bad += std::abs(std::abs(v3.dot(v1)) - 1.0) > 1e-9;

    // Off the manifold: theta moved by at least one degree modulo pi.
    double dt = 0.0;
    do dt = th(rng);
    while (std::abs(std::remainder(dt, kPi)) < 1.0 * kDeg);
    const Vec v4 = sim::polarization_vector(t1 + dt, p1, a1, b1);
    off_bad += std::abs(v4.dot(v1)) >= 1.0 - 1e-9;
  }
  return {collinear_bad + polar_bad + manifold_bad + off_bad == 0,
          fmt("violations: collinearity %d/1000, |<v_p,v_q>| > 1 %d/1000, equality manifold %d/1000, "
              "off-manifold equality %d/1000",
              collinear_bad, polar_bad, manifold_bad, off_bad)};
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "kruskal-bound-table", 0.001, kruskal_table},
      {2, "matmul-tensor-norms", 10.0, matmul_norms},
      {3, "nonexistence-witness", 1.0, nonexistence_witness},
      {4, "weak-greedy-exact-recovery", 30.0, temlyakov_recovery},
      {5, "coercivity-property", 10.0, coercivity_property},
      {6, "duality-property", 60.0, duality_property},
      {7, "matrix-specialization", 60.0, matrix_specialization},
      {8, "condition-implication-chain", 60.0, implication_chain},
      {9, "blind-identification", 300.0, blind_identification},
      {10, "krank-coherence-lemma", 60.0, krank_lemma},
      {11, "array-identifiability", 60.0, array_properties},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0, ran = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.limit_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    ++ran;
    std::printf("[%s] %2d %-28s %s; %.3f s (limit %g s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                secs, c.limit_s, in_time ? "" : ", exceeded");
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
