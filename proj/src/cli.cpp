#include "cpcoh/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "cpcoh/coherence.hpp"
#include "cpcoh/conditions.hpp"
#include "cpcoh/decompose.hpp"
#include "cpcoh/errors.hpp"
#include "cpcoh/htns_io.hpp"
#include "cpcoh/norms.hpp"
#include "cpcoh/random.hpp"
#include "cpcoh/report.hpp"
#include "cpcoh/sim_apps.hpp"

namespace cpcoh::cli {
namespace {

using report::json;
namespace cond = conditions;

/// Raised by subcommands that still wrote their report.
struct NonConvergence {
  std::string what;
};

json make_report(const std::string& command) { return {{"report_version", report::kReportVersion}, {"command", command}}; }

void emit(const json& j, const std::string& path, std::ostream& out) {
  const std::string text = report::dump(j);
  if (path.empty())
    out << text;
  else
    report::write_atomic(path, text);
}

std::vector<double> model_coherences(const CPModel& m) {
  std::vector<double> mus;
  for (const Mat& a : m.factors) mus.push_back(m.rank() >= 2 ? coherence(FactorSet(a)).mu : 0.0);
  return mus;
}

json conditions_block(std::span<const double> mus, Index r) {
  json j;
  j["existence"] = report::verdict_to_json(cond::existence_condition(mus, r));
  j["uniqueness"] = report::verdict_to_json(cond::uniqueness_condition(mus, r));
  if (mus.size() >= 3) {
    j["existence_uniqueness"] = report::verdict_to_json(cond::existence_uniqueness_condition(mus, r));
    j["sufficient_sum"] = report::verdict_to_json(cond::sufficient_sum(mus, r));
    j["sufficient_sumsq"] = report::verdict_to_json(cond::sufficient_sumsq(mus, r));
  } else {
    const json na = {{"holds", false}, {"note", "not applicable for d < 3: no essentially unique decomposition"}};
    j["existence_uniqueness"] = na;
    j["sufficient_sum"] = na;
    j["sufficient_sumsq"] = na;
  }
  return j;
}

json dims_json(const std::vector<Index>& dims) {
  json j = json::array();
  for (Index n : dims) j.push_back(n);
  return j;
}

json load_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FormatError("cannot open '" + path + "'");
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw FormatError("'" + path + "': " + e.what());
  }
}

Index span_dimension(const Mat& a) {
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Mat>(a).singularValues();
  Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > 1e-8 * sv(0)) ++rank;
  return rank;
}

// ---- scene parsing ---------------------------------------------------------

sim::Point parse_point(const json& j) {
  require(j.is_array() && j.size() == 3, "points must be [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::vector<sim::Point> parse_points(const json& scene, const std::string& key, double wavelength) {
  if (scene.contains(key)) {
    std::vector<sim::Point> pts;
    for (const auto& p : scene.at(key)) pts.push_back(parse_point(p));
    return pts;
  }
  const std::string grid_key = key + "_grid";
  require(scene.contains(grid_key), "scene needs '" + key + "' or '" + grid_key + "'");
  const json& g = scene.at(grid_key);
  const auto n = g.at("n").get<std::vector<Index>>();
  require(n.size() == 3, grid_key + ".n must have three entries");
  const double spacing = g.at("spacing_wavelengths").get<double>() * wavelength;
  return sim::grid_positions(n[0], n[1], n[2], spacing);
}

Vec random_signal(Index n, const std::string& kind, Rng& rng) {
  Vec s(static_cast<Eigen::Index>(n));
  if (kind == "gaussian") {
    for (Eigen::Index i = 0; i < s.size(); ++i) s(i) = complex_gaussian(rng);
  } else if (kind == "qpsk") {
    std::uniform_int_distribution<int> pick(0, 3);
    const double h = 1.0 / std::sqrt(2.0);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      const int q = pick(rng);
      s(i) = cplx{(q & 1) ? h : -h, (q & 2) ? h : -h};
    }
  } else {
    throw ValidationError("unknown signal kind '" + kind + "' (expected qpsk or gaussian)");
  }
  return s;
}

json simulate_array_cmd(const json& scene_json, double noise, std::uint64_t seed, sim::Simulation& sim_out) {
  sim::ArrayScene scene;
  scene.pulsation = scene_json.value("pulsation", scene.pulsation);
  scene.celerity = scene_json.value("celerity", scene.celerity);
  require(scene.pulsation > 0.0 && scene.celerity > 0.0, "pulsation and celerity must be positive");
  scene.b = parse_points(scene_json, "b", scene.wavelength());
  scene.delta = parse_points(scene_json, "delta", scene.wavelength());

  const Index n3 = scene_json.value("snapshots", Index{32});
  require(n3 >= 1, "snapshots must be positive");
  Rng rng(seed);
  sim::PathSet paths;
  const json& pj = scene_json.at("paths");
  require(pj.is_array() && !pj.empty(), "scene needs a nonempty 'paths' array");
  paths.signals.resize(static_cast<Eigen::Index>(n3), static_cast<Eigen::Index>(pj.size()));
  Eigen::Index p = 0;
  for (const auto& path : pj) {
    sim::Point d = path.contains("direction")
                       ? parse_point(path.at("direction"))
                       : sim::direction_from_angles(path.at("theta").get<double>(), path.at("phi").get<double>());
    paths.directions.push_back(d);
    paths.signals.col(p++) = path.value("gain", 1.0) * random_signal(n3, path.value("signal", std::string("qpsk")), rng);
  }
  sim_out = sim::simulate_array(scene, paths, noise, seed + 1);

  json j;
  j["wavelength"] = scene.wavelength();
  j["resolvent_triad"] = sim::has_resolvent_triad(scene.b, scene.wavelength());
  j["kruskal_simple_bound"] = cond::kruskal_simple_bound(scene.b.size(), scene.delta.size());
  return j;
}

Mat random_matrix(Index rows, Index cols, Rng& rng) {
  Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = complex_gaussian(rng);
  return m;
}

json simulate_cdma_cmd(const json& s, double noise, std::uint64_t seed, sim::Simulation& sim_out) {
  const Index r = s.at("users").get<Index>();
  const Index m = s.value("sensors", Index{4});
  const Index nsym = s.value("symbols", Index{16});
  const Index nchip = s.value("chips", Index{8});
  const Index lh = s.value("channel_length", Index{1});
  require(r >= 1 && m >= 1 && nsym >= 1 && nchip >= 1 && lh >= 1, "CDMA sizes must be positive");
  Rng rng(seed);
  sim::CdmaScene scene;
  scene.gains = random_matrix(m, r, rng);
  scene.symbols.resize(static_cast<Eigen::Index>(nsym), static_cast<Eigen::Index>(r));
  for (Index p = 0; p < r; ++p) scene.symbols.col(static_cast<Eigen::Index>(p)) = random_signal(nsym, "qpsk", rng);
  Mat spreading(static_cast<Eigen::Index>(nchip), static_cast<Eigen::Index>(r));
  std::bernoulli_distribution coin(0.5);
  for (Eigen::Index c = 0; c < spreading.cols(); ++c)
    for (Eigen::Index i = 0; i < spreading.rows(); ++i) spreading(i, c) = coin(rng) ? 1.0 : -1.0;
  Mat impulse = random_matrix(lh, r, rng);
  impulse.row(0).setOnes();
  scene.codes = sim::effective_codes(spreading, impulse, nchip);
  sim_out = sim::simulate_cdma(scene, noise, seed + 1);
  return json::object();
}

Eigen::MatrixXd parse_real_matrix(const json& rows) {
  require(rows.is_array() && !rows.empty(), "matrices are given as nonempty lists of rows");
  const auto cols = rows[0].size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (Index i = 0; i < rows.size(); ++i) {
    require(rows[i].size() == cols, "ragged matrix rows");
    for (Index j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
  }
  return m;
}

json simulate_fluorescence_cmd(const json& s, double noise, std::uint64_t seed, sim::Simulation& sim_out) {
  const auto fl = sim::simulate_fluorescence(parse_real_matrix(s.at("x")), parse_real_matrix(s.at("y")),
                                             parse_real_matrix(s.at("z")), noise, seed);
  sim_out = fl.sim;
  return {{"concentration_coherence", fl.coherences[0]},
          {"absorbance_coherence", fl.coherences[1]},
          {"emission_coherence", fl.coherences[2]}};
}

// ---- subcommands -------------------------------------------------------------

struct SimulateOpts {
  std::string kind = "array", scene, out, out_tensor;
  double noise = 0.0;
  std::uint64_t seed = 0;
};

int cmd_simulate(const SimulateOpts& o, std::ostream& out) {
  const json scene = load_json(o.scene);
  sim::Simulation s;
  json extra;
  if (o.kind == "array")
    extra = simulate_array_cmd(scene, o.noise, o.seed, s);
  else if (o.kind == "cdma")
    extra = simulate_cdma_cmd(scene, o.noise, o.seed, s);
  else if (o.kind == "fluorescence")
    extra = simulate_fluorescence_cmd(scene, o.noise, o.seed, s);
  else
    throw ValidationError("unknown --kind '" + o.kind + "'");

  json j = make_report("simulate");
  j["kind"] = o.kind;
  j["seed"] = o.seed;
  j["noise_std"] = o.noise;
  j["dims"] = dims_json(s.tensor.dims());
  j["truth"] = report::model_to_json(s.truth);
  const auto mus = model_coherences(s.truth);
  j["truth_coherences"] = mus;
  j["conditions"] = conditions_block(mus, s.truth.rank());
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  if (!o.out_tensor.empty()) {
    std::ostringstream ss;
    io::write_htns(ss, s.tensor);
    report::write_atomic(o.out_tensor, ss.str());
    j["tensor_file"] = o.out_tensor;
  }
  emit(j, o.out, out);
  return kExitOk;
}

struct DecomposeOpts {
  std::string input, out, method = "als", dict, orthogonality = "none";
  Index rank = 1, starts = 1, max_iter = 2000;
  std::vector<double> caps;
  double tychonoff = -1.0, t = 1.0, tol = 1e-10;
  std::uint64_t seed = 0;
};

int cmd_decompose(const DecomposeOpts& o, std::ostream& out) {
  const Hypermatrix f = io::read_htns_file(o.input);
  json j = make_report("decompose");
  j["method"] = o.method;
  j["seed"] = o.seed;
  j["dims"] = dims_json(f.dims());
  j["input_norm"] = f.frobenius_norm();
  bool converged = true;

  if (o.method == "woga") {
    require(!o.dict.empty(), "--method woga needs --dict");
    const Dictionary dict(io::read_dictionary_file(o.dict));
    const GreedyResult g = woga(f, dict, o.t, o.rank, o.tol * f.frobenius_norm());
    json coeffs = json::array();
    for (const cplx& c : g.coefficients) coeffs.push_back(report::complex_to_json(c));
    j["selected"] = g.selected;
    j["coefficients"] = coeffs;
    j["residuals"] = g.residuals;
    j["residual"] = g.residuals.back();
    j["pinv_fallback"] = g.pinv_fallback;
    j["dictionary_coherence"] = dict.mu();
    j["t"] = o.t;
    if (dict.mu() < 1.0) j["conditions"] = {{"recovery", report::verdict_to_json(cond::temlyakov_condition(o.rank, dict.mu(), o.t))}};
    j["converged"] = g.converged;
    converged = g.converged;
  } else if (o.method == "oga") {
    OgaConfig cfg;
    cfg.spectral.seed = o.seed;
    const OgaResult r = oga_continuous(f, o.rank, cfg);
    const auto mus = model_coherences(r.model);
    j["model"] = report::model_to_json(r.model);
    j["residuals"] = r.trace.residuals;
    j["residual"] = r.trace.residuals.back();
    j["stagnated"] = r.trace.stagnated;
    j["achieved_coherences"] = mus;
    if (r.model.rank() >= 1) j["conditions"] = conditions_block(mus, r.model.rank());
    j["converged"] = !r.trace.stagnated;
    converged = !r.trace.stagnated;
  } else if (o.method == "als") {
    SolverConfig cfg;
    cfg.r = o.rank;
    cfg.seed = o.seed;
    cfg.starts = o.starts;
    cfg.max_iter = o.max_iter;
    cfg.tol = o.tol;
    if (!o.caps.empty()) cfg.coherence_caps = o.caps;
    if (o.tychonoff >= 0.0) cfg.tychonoff_lambda = o.tychonoff;
    if (o.orthogonality == "per-mode")
      cfg.orthogonality = Orthogonality::per_mode;
    else if (o.orthogonality == "separable")
      cfg.orthogonality = Orthogonality::separable;
    else
      require(o.orthogonality == "none", "--orthogonality must be none, per-mode or separable");
    const AlsResult r = constrained_als(f, cfg);
    j["model"] = report::model_to_json(r.model);
    j["loss"] = r.loss;
    j["residual"] = r.residual;
    j["iterations"] = r.iterations;
    j["loss_trace_length"] = r.loss_trace.size();
    j["achieved_coherences"] = r.coherences;
    j["best_start"] = r.best_start;
    if (cfg.coherence_caps) {
      j["caps"] = o.caps;
      j["caps_violated"] = r.caps_violated;
      j["existence_warning"] = r.existence_warning;
      j["cap_conditions"] = conditions_block(o.caps, o.rank);
    }
    j["conditions"] = conditions_block(r.coherences, r.model.rank() > 0 ? r.model.rank() : 1);
    j["converged"] = r.converged;
    converged = r.converged;
  } else {
    throw ValidationError("unknown --method '" + o.method + "' (expected als, oga or woga)");
  }
  emit(j, o.out, out);
  if (!converged) throw NonConvergence{"decomposition did not converge"};
  return kExitOk;
}

struct CheckOpts {
  std::vector<double> mus;
  std::vector<std::string> factors;
  Index r = 1, d = 0;
  double t = 1.0;
  std::string out;
  bool bruteforce = false;
};

int cmd_check(const CheckOpts& o, std::ostream& out) {
  json j = make_report("check");
  std::vector<double> mus = o.mus;
  std::vector<Index> kranks;
  if (!o.factors.empty()) {
    require(mus.empty(), "give either --mus or --factors, not both");
    for (const auto& path : o.factors) {
      const FactorSet fs = FactorSet::normalized(io::read_matrix_file(path));
      const auto rep = coherence(fs);
      mus.push_back(rep.mu);
      if (o.bruteforce)
        kranks.push_back(kruskal_rank_bruteforce(fs));
      else
        kranks.push_back(rep.mu == 0.0 ? fs.size() : std::min(*krank_lower_bound(rep), span_dimension(fs.vectors())));
    }
  }
  require(!mus.empty(), "check needs --mus or --factors");
  require(o.d == 0 || o.d == mus.size(), "--d does not match the number of coherences");
  j["r"] = o.r;
  j["d"] = mus.size();
  j["mus"] = mus;
  j["conditions"] = conditions_block(mus, o.r);
  if (!kranks.empty()) {
    j["kranks"] = kranks;
    j["kranks_source"] = o.bruteforce ? "bruteforce" : "min(ceil(1/mu), span dimension)";
    j["conditions"]["kruskal"] = report::verdict_to_json(cond::kruskal_condition(kranks, o.r));
  }
  double prod = 1.0;
  for (double m : mus) prod *= m;
  if (prod < 1.0) j["conditions"]["recovery"] = report::verdict_to_json(cond::temlyakov_condition(o.r, prod, o.t));
  if (prod > 0.0 && prod < 1.0) {
    json g = json::object();
    for (auto kind : {cond::GreedyBoundKind::gms, cond::GreedyBoundKind::tropp, cond::GreedyBoundKind::det,
                      cond::GreedyBoundKind::liv}) {
      const auto b = cond::greedy_bound_check(kind, o.r, prod);
      g[cond::to_string(kind)] = b ? json{{"factor", b->factor}, {"iterate", b->iterate}} : json(nullptr);
    }
    j["greedy_bounds"] = g;
  }
  emit(j, o.out, out);
  return kExitOk;
}

struct CoherenceOpts {
  std::string input, out;
  bool bruteforce = false;
  Index budget = 14;
};

int cmd_coherence(const CoherenceOpts& o, std::ostream& out) {
  const FactorSet fs = FactorSet::normalized(io::read_matrix_file(o.input));
  const auto rep = coherence(fs);
  json j = make_report("coherence");
  j["n"] = fs.dim();
  j["r"] = fs.size();
  j["mu"] = rep.mu;
  j["omega"] = rep.omega_infinite ? json("inf") : json(rep.omega);
  j["argpair"] = {rep.argpair.first, rep.argpair.second};
  const Index span = span_dimension(fs.vectors());
  j["span_dimension"] = span;
  if (const auto lb = krank_lower_bound(rep)) {
    // ceil(1/mu) only applies when krank < dim span; otherwise krank = dim span.
    j["krank_lower_bound"] = *lb;
    j["krank_guaranteed"] = std::min(*lb, span);
  } else {
    j["krank_lower_bound"] = {{"orthonormal", true}, {"krank", fs.size()}};
    j["krank_guaranteed"] = fs.size();
  }
  if (o.bruteforce) {
    j["krank_bruteforce"] = kruskal_rank_bruteforce(fs, 1e-8, o.budget);
    j["spark"] = spark_bruteforce(fs, 1e-8, o.budget);
  }
  emit(j, o.out, out);
  return kExitOk;
}

struct NormsOpts {
  std::string input, fixture, out;
  Index restarts = 64, max_entries = 256;
  double rel_tol = 1e-3;
  std::uint64_t seed = 0;
};

int cmd_norms(const NormsOpts& o, std::ostream& out) {
  Hypermatrix t;
  json j = make_report("norms");
  if (!o.fixture.empty()) {
    require(o.input.empty(), "give either --input or --fixture");
    require(o.fixture.rfind("matmul:", 0) == 0, "fixture must look like matmul:n");
    const auto n = static_cast<Index>(std::stoul(o.fixture.substr(7)));
    t = mat_mult_tensor(n);
    j["fixture"] = o.fixture;
  } else {
    require(!o.input.empty(), "norms needs --input or --fixture");
    t = io::read_htns_file(o.input);
  }
  NuclearConfig cfg;
  cfg.rel_tol = o.rel_tol;
  cfg.max_entries = o.max_entries;
  cfg.spectral.restarts = o.restarts;
  cfg.spectral.seed = o.seed;
  const NormCertificate c = nuclear_norm_bounds(t, cfg);
  j["dims"] = dims_json(t.dims());
  j["frobenius"] = t.frobenius_norm();
  j["spectral"] = c.spectral;
  json w = json::array();
  for (const Vec& v : c.spectral_witness) {
    json col = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) col.push_back(report::complex_to_json(v(i)));
    w.push_back(col);
  }
  j["spectral_witness"] = w;
  j["nuclear_lower"] = c.nuclear_lower;
  j["nuclear_upper"] = c.nuclear_upper;
  j["lower_source"] = c.lower_source;
  j["upper_source"] = c.upper_source;
  j["upper_witness_rank"] = c.upper_witness.rank();
  j["certified"] = c.certified;
  j["rel_tol"] = o.rel_tol;
  emit(j, o.out, out);
  if (!c.certified) throw NonConvergence{"nuclear norm sandwich not certified"};
  return kExitOk;
}

struct NonexistenceOpts {
  Index nmin = 1, nmax = 64;
  std::string out;
};

int cmd_demo_nonexistence(const NonexistenceOpts& o, std::ostream& out) {
  std::vector<Vec> phi(3, Vec::Unit(2, 0)), psi(3, Vec::Unit(2, 1));
  const auto rows = divergence_witness(phi, psi, o.nmin, o.nmax);
  json j = make_report("demo-nonexistence");
  json table = json::array();
  for (const auto& r : rows)
    table.push_back({{"n", r.n},
                     {"loss", r.loss},
                     {"max_weight", r.max_weight},
                     {"loss_times_n", r.loss * static_cast<double>(r.n)},
                     {"weight_over_n", r.max_weight / static_cast<double>(r.n)},
                     {"coherences", r.coherences}});
  j["rows"] = table;
  const auto& last = rows.back();
  std::vector<double> mus(last.coherences.begin(), last.coherences.end());
  j["conditions_at_nmax"] = {{"existence", report::verdict_to_json(cond::existence_condition(mus, 2))}};
  emit(j, o.out, out);
  return kExitOk;
}

struct RecoveryOpts {
  std::uint64_t seed = 0;
  Index n = 8, r = 3;
  double noise = 0.01;
  std::string out;
};

int cmd_demo_recovery(const RecoveryOpts& o, std::ostream& out) {
  require(o.r >= 1 && o.n >= 2 && o.r <= o.n, "demo-recovery needs 1 <= r <= n and n >= 2");
  Rng rng(o.seed);
  CPModel truth;
  std::uniform_real_distribution<double> w(1.0, 2.0);
  for (Index p = 0; p < o.r; ++p) truth.weights.emplace_back(w(rng), 0.0);
  for (int k = 0; k < 3; ++k) {
    Mat a(static_cast<Eigen::Index>(o.n), static_cast<Eigen::Index>(o.r));
    for (Eigen::Index p = 0; p < a.cols(); ++p) a.col(p) = random_unit_vector(a.rows(), rng);
    truth.factors.push_back(a);
  }
  truth = canonicalize(truth).model;
  Hypermatrix f = cp_evaluate(truth);
  const double std = o.noise * f.frobenius_norm() / std::sqrt(static_cast<double>(f.size()));
  for (cplx& z : f.entries()) z += complex_gaussian(rng, std);

  SolverConfig cfg;
  cfg.r = o.r;
  cfg.seed = o.seed;
  cfg.starts = 3;
  const AlsResult res = constrained_als(f, cfg);
  const auto mus = model_coherences(truth);
  json j = make_report("demo-recovery");
  j["seed"] = o.seed;
  j["dims"] = dims_json(f.dims());
  j["noise_relative"] = o.noise;
  j["truth_coherences"] = mus;
  j["conditions"] = conditions_block(mus, o.r);
  j["achieved_coherences"] = res.coherences;
  j["residual"] = res.residual;
  j["essentially_equal_tol_0_05"] = essentially_equal(truth, res.model, 0.05);
  j["truth"] = report::model_to_json(truth);
  j["model"] = report::model_to_json(res.model);
  j["converged"] = res.converged;
  emit(j, o.out, out);
  if (!res.converged) throw NonConvergence{"ALS did not converge"};
  return kExitOk;
}

int cmd_bench(const std::string& path, std::ostream& out) {
  using clock = std::chrono::steady_clock;
  auto ms = [](clock::time_point a) { return std::chrono::duration<double, std::milli>(clock::now() - a).count(); };
  json j = make_report("bench");
  Rng rng(0);
  Hypermatrix t({4, 4, 4});
  for (cplx& z : t.entries()) z = complex_gaussian(rng);

  auto t0 = clock::now();
  spectral_norm(t);
  j["spectral_norm_4x4x4_ms"] = ms(t0);

  t0 = clock::now();
  nuclear_norm_bounds(mat_mult_tensor(2));
  j["nuclear_bounds_matmul2_ms"] = ms(t0);

  Hypermatrix f({8, 8, 8});
  for (cplx& z : f.entries()) z = complex_gaussian(rng);
  SolverConfig cfg;
  cfg.r = 3;
  t0 = clock::now();
  constrained_als(f, cfg);
  j["als_8x8x8_rank3_ms"] = ms(t0);

  std::vector<std::vector<Vec>> atoms;
  for (int i = 0; i < 40; ++i) {
    std::vector<Vec> a;
    for (int k = 0; k < 3; ++k) a.push_back(random_unit_vector(4, rng));
    atoms.push_back(a);
  }
  const Dictionary dict(atoms);
  t0 = clock::now();
  woga(t, dict, 1.0, 5, 0.0);
  j["woga_40_atoms_5_iter_ms"] = ms(t0);
  emit(j, path, out);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coherence-bounded CP decomposition toolkit", "cpcoh"};
  app.require_subcommand(1);

  SimulateOpts so;
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a tensor from a physical forward model");
  sim_cmd->add_option("--kind", so.kind, "array | cdma | fluorescence")->check(CLI::IsMember({"array", "cdma", "fluorescence"}));
  sim_cmd->add_option("--scene", so.scene, "Scene description (JSON)")->required();
  sim_cmd->add_option("--noise", so.noise, "Per-entry noise standard deviation");
  sim_cmd->add_option("--seed", so.seed);
  sim_cmd->add_option("--out", so.out, "Report path (stdout if omitted)");
  sim_cmd->add_option("--out-tensor", so.out_tensor, "Write the tensor as HTNS1");

  DecomposeOpts dopt;
  auto* dec_cmd = app.add_subcommand("decompose", "Fit a rank-r model");
  dec_cmd->add_option("--input", dopt.input, "HTNS1 tensor")->required();
  dec_cmd->add_option("--rank", dopt.rank)->required();
  dec_cmd->add_option("--method", dopt.method, "als | oga | woga")->check(CLI::IsMember({"als", "oga", "woga"}));
  dec_cmd->add_option("--caps", dopt.caps, "Per-mode coherence caps")->delimiter(',');
  dec_cmd->add_option("--tychonoff", dopt.tychonoff, "Tychonoff penalty on the weights");
  dec_cmd->add_option("--orthogonality", dopt.orthogonality, "none | per-mode | separable");
  dec_cmd->add_option("--dict", dopt.dict, "HTNSD dictionary (woga)");
  dec_cmd->add_option("--t", dopt.t, "WOGA weakness parameter");
  dec_cmd->add_option("--starts", dopt.starts);
  dec_cmd->add_option("--max-iter", dopt.max_iter);
  dec_cmd->add_option("--tol", dopt.tol);
  dec_cmd->add_option("--seed", dopt.seed);
  dec_cmd->add_option("--out", dopt.out);

  CheckOpts co;
  auto* check_cmd = app.add_subcommand("check", "Evaluate existence / uniqueness / recovery conditions");
  check_cmd->add_option("--mus", co.mus, "Per-mode coherences")->delimiter(',');
  check_cmd->add_option("--factors", co.factors, "Per-mode factor matrices (HTNS1, d = 2)")->delimiter(',');
  check_cmd->add_option("--r", co.r)->required();
  check_cmd->add_option("--d", co.d);
  check_cmd->add_option("--t", co.t);
  check_cmd->add_flag("--bruteforce", co.bruteforce, "Brute-force Kruskal ranks for --factors");
  check_cmd->add_option("--out", co.out);

  CoherenceOpts ho;
  auto* coh_cmd = app.add_subcommand("coherence", "Coherence and Kruskal rank of a factor matrix");
  coh_cmd->add_option("--input", ho.input, "n x r factor matrix (HTNS1, d = 2)")->required();
  coh_cmd->add_flag("--bruteforce", ho.bruteforce);
  coh_cmd->add_option("--budget", ho.budget);
  coh_cmd->add_option("--out", ho.out);

  NormsOpts no;
  auto* norms_cmd = app.add_subcommand("norms", "Spectral norm and nuclear norm bounds");
  norms_cmd->add_option("--input", no.input);
  norms_cmd->add_option("--fixture", no.fixture, "matmul:n");
  norms_cmd->add_option("--restarts", no.restarts);
  norms_cmd->add_option("--rel-tol", no.rel_tol);
  norms_cmd->add_option("--max-entries", no.max_entries);
  norms_cmd->add_option("--seed", no.seed);
  norms_cmd->add_option("--out", no.out);

  NonexistenceOpts xo;
  auto* nx_cmd = app.add_subcommand("demo-nonexistence", "Diverging rank-2 approximants of a rank-3 tensor");
  nx_cmd->add_option("--nmin", xo.nmin);
  nx_cmd->add_option("--nmax", xo.nmax);
  nx_cmd->add_option("--out", xo.out);

  RecoveryOpts ro;
  auto* rec_cmd = app.add_subcommand("demo-recovery", "Planted noisy CP recovery");
  rec_cmd->add_option("--seed", ro.seed);
  rec_cmd->add_option("--n", ro.n);
  rec_cmd->add_option("--r", ro.r);
  rec_cmd->add_option("--noise", ro.noise, "Noise level relative to ||f|| / sqrt(N)");
  rec_cmd->add_option("--out", ro.out);

  std::string bench_out;
  auto* bench_cmd = app.add_subcommand("bench", "Time the main kernels");
  bench_cmd->add_option("--out", bench_out);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*sim_cmd) return cmd_simulate(so, out);
    if (*dec_cmd) return cmd_decompose(dopt, out);
    if (*check_cmd) return cmd_check(co, out);
    if (*coh_cmd) return cmd_coherence(ho, out);
    if (*norms_cmd) return cmd_norms(no, out);
    if (*nx_cmd) return cmd_demo_nonexistence(xo, out);
    if (*rec_cmd) return cmd_demo_recovery(ro, out);
    if (*bench_cmd) return cmd_bench(bench_out, out);
  } catch (const NonConvergence& e) {
    err << "warning: " << e.what << " (uncertified result written)\n";
    return kExitNonConvergence;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const BudgetExceeded& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const json::exception& e) {
    err << "error: malformed scene: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace cpcoh::cli
