#include "cpcoh/sim_apps.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cpcoh/coherence.hpp"
#include "cpcoh/errors.hpp"
#include "cpcoh/random.hpp"

namespace cpcoh::sim {
namespace {

constexpr double kPi = 3.141592653589793;

void require_unit(const Point& d) {
  require(d.allFinite() && std::abs(d.norm() - 1.0) <= 1e-9, "direction vectors must have unit norm");
}

void add_noise(Hypermatrix& t, double noise_std, std::uint64_t seed) {
  require(noise_std >= 0.0 && std::isfinite(noise_std), "noise_std must be a finite nonnegative number");
  if (noise_std == 0.0) return;
  Rng rng(seed);
  for (cplx& z : t.entries()) z += complex_gaussian(rng, noise_std);
}

}  // namespace

void ArrayScene::validate() const {
  require(!b.empty(), "array scene needs at least one sensor");
  require(!delta.empty(), "array scene needs at least one translation");
  require(delta[0].norm() <= 1e-12, "the first translation must be the zero vector");
  for (const Point& p : b) require(p.allFinite(), "sensor positions must be finite");
  for (const Point& p : delta) require(p.allFinite(), "translations must be finite");
  require(pulsation > 0.0 && std::isfinite(pulsation), "pulsation must be positive");
  require(celerity > 0.0 && std::isfinite(celerity), "celerity must be positive");
}

Vec steering_vector(std::span<const Point> sensors, double wavenumber, const Point& d) {
  require(!sensors.empty(), "steering_vector needs at least one sensor");
  require_unit(d);
  const auto n = static_cast<Eigen::Index>(sensors.size());
  Vec u(n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double phase = wavenumber * sensors[static_cast<Index>(i)].dot(d);
    u(i) = cplx{std::cos(phase), std::sin(phase)} * scale;
  }
  return u;
}

std::pair<Mat, Mat> steering_vectors(const ArrayScene& scene, std::span<const Point> dirs) {
  scene.validate();
  const auto r = static_cast<Eigen::Index>(dirs.size());
  Mat u(static_cast<Eigen::Index>(scene.b.size()), r);
  Mat v(static_cast<Eigen::Index>(scene.delta.size()), r);
  for (Eigen::Index p = 0; p < r; ++p) {
    const Point& d = dirs[static_cast<Index>(p)];
    u.col(p) = steering_vector(scene.b, scene.wavenumber(), d);
    v.col(p) = steering_vector(scene.delta, scene.wavenumber(), d);
  }
  return {u, v};
}

Simulation simulate_array(const ArrayScene& scene, const PathSet& paths, double noise_std, std::uint64_t seed) {
  const auto r = static_cast<Eigen::Index>(paths.directions.size());
  require(r >= 1, "at least one path is required");
  require(paths.signals.cols() == r, "signals must have one column per path");
  require(paths.signals.rows() >= 1, "signals need at least one time sample");
  auto [u, v] = steering_vectors(scene, paths.directions);
  const double gain = std::sqrt(static_cast<double>(u.rows() * v.rows()));

  CPModel raw;
  Mat w = paths.signals;
  for (Eigen::Index p = 0; p < r; ++p) {
    const double n = w.col(p).norm();
    require(n > 0.0 && std::isfinite(n), "path " + std::to_string(p) + " has a zero or non-finite signal");
    w.col(p) /= n;
    raw.weights.emplace_back(n * gain, 0.0);
  }
  raw.factors = {u, v, w};
  Simulation out{cp_evaluate(raw), canonicalize(raw).model};
  add_noise(out.tensor, noise_std, seed);
  return out;
}

bool is_resolvent(std::span<const Point> points, const Point& v, double wavelength) {
  require(wavelength > 0.0, "wavelength must be positive");
  const double len = v.norm();
  if (!(len > 0.0 && len < wavelength / 2.0)) return false;
  for (const Point& a : points)
    for (const Point& b : points)
      if ((a - b - v).norm() <= 1e-12 * std::max(1.0, len)) return true;
  return false;
}

bool has_resolvent_triad(std::span<const Point> points, double wavelength) {
  require(wavelength > 0.0, "wavelength must be positive");
  std::vector<Point> shorts;
  for (Index k = 0; k < points.size(); ++k)
    for (Index l = k + 1; l < points.size(); ++l) {
      const Point v = points[k] - points[l];
      const double len = v.norm();
      if (len > 0.0 && len < wavelength / 2.0) shorts.push_back(v / len);
    }
  if (shorts.size() < 3) return false;
  Eigen::MatrixXd m(3, static_cast<Eigen::Index>(shorts.size()));
  for (Index i = 0; i < shorts.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = shorts[i];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(2) > 1e-9 * svd.singularValues()(0);
}

std::vector<Point> grid_positions(Index nx, Index ny, Index nz, double spacing) {
  std::vector<Point> out;
  for (Index i = 0; i < nx; ++i)
    for (Index j = 0; j < ny; ++j)
      for (Index k = 0; k < nz; ++k)
        out.emplace_back(spacing * static_cast<double>(i), spacing * static_cast<double>(j),
                         spacing * static_cast<double>(k));
  return out;
}

Collinearity collinearity_check(const ArrayScene& scene, const Point& dp, const Point& dq) {
  scene.validate();
  require_unit(dp);
  require_unit(dq);
  const Vec up = steering_vector(scene.b, scene.wavenumber(), dp);
  const Vec uq = steering_vector(scene.b, scene.wavenumber(), dq);
  return {std::min(1.0, std::abs(up.dot(uq))), has_resolvent_triad(scene.b, scene.wavelength())};
}

Point direction_from_angles(double theta, double phi) {
  return {std::cos(theta) * std::cos(phi), std::sin(theta) * std::cos(phi), std::sin(phi)};
}

std::pair<double, double> angles_from_direction(const Point& d) {
  require_unit(d);
  double theta = std::atan2(d.y(), d.x());
  if (theta < 0.0) theta += 2.0 * kPi;
  return {theta, std::asin(std::clamp(d.z(), -1.0, 1.0))};
}

PolarizationState polarization_state(double theta, double phi, double alpha, double beta) {
  require(std::isfinite(theta) && std::isfinite(phi) && std::isfinite(alpha), "angles must be finite");
  require(beta != 0.0 && std::abs(beta) < kPi / 4.0,
          "ellipticity beta must be nonzero with |beta| < pi/4 (neither linear nor circular polarization)");
  PolarizationState s;
  s.d = direction_from_angles(theta, phi);
  s.e = Point(-std::sin(theta), std::cos(theta), 0.0);
  s.f = Point(-std::cos(theta) * std::sin(phi), -std::sin(theta) * std::sin(phi), std::cos(phi));
  const Eigen::Vector2cd h(std::cos(beta), cplx{0.0, std::sin(beta)});
  Eigen::Matrix2cd q;
  q << std::cos(alpha), std::sin(alpha), -std::sin(alpha), std::cos(alpha);
  s.g = q * h;
  s.v.resize(6);
  const double k = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < 3; ++i) {
    s.v(i) = k * (s.e(i) * s.g(0) + s.f(i) * s.g(1));
    s.v(i + 3) = k * (s.f(i) * s.g(0) - s.e(i) * s.g(1));
  }
  return s;
}

Vec polarization_vector(double theta, double phi, double alpha, double beta) {
  return polarization_state(theta, phi, alpha, beta).v;
}

Mat effective_codes(const Mat& spreading, const Mat& impulse, Index n_chip) {
  require(spreading.cols() == impulse.cols(), "one impulse response per spreading code is required");
  require(spreading.rows() >= 1 && impulse.rows() >= 1 && n_chip >= 1, "codes and responses must be nonempty");
  const auto n = static_cast<Eigen::Index>(n_chip);
  Mat b = Mat::Zero(n, spreading.cols());
  for (Eigen::Index p = 0; p < spreading.cols(); ++p)
    for (Eigen::Index k = 0; k < n; ++k)
      for (Eigen::Index t = 0; t < spreading.rows() && t <= k; ++t)
        if (k - t < impulse.rows()) b(k, p) += impulse(k - t, p) * spreading(t, p);
  return b;
}

Simulation simulate_cdma(const CdmaScene& scene, double noise_std, std::uint64_t seed) {
  const auto r = scene.gains.cols();
  require(r >= 1, "at least one user is required");
  require(scene.symbols.cols() == r && scene.codes.cols() == r, "gains, symbols and codes need the same column count");
  require(scene.gains.rows() >= 1 && scene.symbols.rows() >= 1 && scene.codes.rows() >= 1,
          "CDMA factors must be nonempty");
  CPModel raw;
  raw.weights.assign(static_cast<Index>(r), cplx{1.0, 0.0});
  raw.factors = {scene.gains, scene.symbols, scene.codes};
  Simulation out{cp_evaluate(raw), canonicalize(raw).model};
  add_noise(out.tensor, noise_std, seed);
  return out;
}

Fluorescence simulate_fluorescence(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const Eigen::MatrixXd& z,
                                   double noise_std, std::uint64_t seed) {
  require(x.cols() >= 1 && x.cols() == y.cols() && x.cols() == z.cols(), "x, y, z need the same positive column count");
  require(x.minCoeff() >= 0.0 && y.minCoeff() >= 0.0 && z.minCoeff() >= 0.0, "fluorescence factors must be nonnegative");
  require(noise_std >= 0.0 && std::isfinite(noise_std), "noise_std must be a finite nonnegative number");
  CPModel raw;
  raw.weights.assign(static_cast<Index>(x.cols()), cplx{1.0, 0.0});
  raw.factors = {x.cast<cplx>(), y.cast<cplx>(), z.cast<cplx>()};
  for (const Mat& a : raw.factors)
    for (Eigen::Index p = 0; p < a.cols(); ++p) require(a.col(p).norm() > 0.0, "fluorescence factor columns must be nonzero");

  Fluorescence out{{cp_evaluate(raw), canonicalize(raw).model}, {}};
  if (noise_std > 0.0) {
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, noise_std);
    for (cplx& v : out.sim.tensor.entries()) v += normal(rng);
  }
  for (Index k = 0; k < 3; ++k)
    out.coherences[k] = x.cols() >= 2 ? coherence(FactorSet::normalized(raw.factors[k])).mu : 0.0;
  return out;
}

std::vector<Point> fibonacci_sphere(Index n) {
  require(n >= 1, "fibonacci_sphere needs at least one point");
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  std::vector<Point> out;
  out.reserve(n);
  for (Index i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double a = golden * static_cast<double>(i);
    out.emplace_back(rho * std::cos(a), rho * std::sin(a), z);
  }
  return out;
}

double angle_between(const Point& a, const Point& b) {
  return std::acos(std::clamp(a.normalized().dot(b.normalized()), -1.0, 1.0));
}

namespace {

double match_score(std::span<const Point> sensors, double wavenumber, const Point& d, const Vec& target) {
  const Vec u = steering_vector(sensors, wavenumber, d);
  return std::abs(u.dot(target));
}

std::pair<Point, double> local_ascent(std::span<const Point> sensors, double wavenumber, const Vec& target, Point d,
                                      double step) {
  double best = match_score(sensors, wavenumber, d, target);
  for (int it = 0; it < 20; ++it) {
    Point helper = std::abs(d.x()) < 0.9 ? Point::UnitX() : Point::UnitY();
    const Point t1 = d.cross(helper).normalized();
    const Point t2 = d.cross(t1);
    Point next = d;
    double next_score = best;
    for (int a = -1; a <= 1; ++a)
      for (int b = -1; b <= 1; ++b) {
        if (a == 0 && b == 0) continue;
        const Point cand = (d + step * (a * t1 + b * t2)).normalized();
        const double s = match_score(sensors, wavenumber, cand, target);
        if (s > next_score) {
          next_score = s;
          next = cand;
        }
      }
    if (next_score > best) {
      d = next;
      best = next_score;
    } else {
      step *= 0.5;
    }
  }
  return {d, best};
}

}  // namespace

std::vector<DoaEstimate> doa_estimate(const Mat& u_est, const ArrayScene& scene, double resolution) {
  scene.validate();
  require(resolution > 0.0 && resolution < 1.0, "grid resolution must lie in (0, 1) radians");
  require(u_est.rows() == static_cast<Eigen::Index>(scene.b.size()), "steering estimate rows must match the sensor count");
  const auto n = static_cast<Index>(std::ceil(4.0 * kPi / (resolution * resolution)));
  const auto grid = fibonacci_sphere(n);
  const double kw = scene.wavenumber();
  constexpr Index kPeaks = 64;

  std::vector<DoaEstimate> out;
  for (Eigen::Index p = 0; p < u_est.cols(); ++p) {
    const double norm = u_est.col(p).norm();
    require(norm > 0.0, "steering estimate column " + std::to_string(p) + " is zero");
    const Vec target = u_est.col(p) / norm;
    std::vector<double> score(n);
    for (Index i = 0; i < n; ++i) score[i] = match_score(scene.b, kw, grid[i], target);
    std::vector<Index> order(n);
    std::iota(order.begin(), order.end(), Index{0});
    const Index keep = std::min(kPeaks, n);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                      [&](Index a, Index b) { return score[a] > score[b] || (score[a] == score[b] && a < b); });

    std::vector<std::pair<Point, double>> refined;
    for (Index i = 0; i < keep; ++i) refined.push_back(local_ascent(scene.b, kw, target, grid[order[i]], resolution));
    Index best = 0;
    for (Index i = 1; i < refined.size(); ++i)
      if (refined[i].second > refined[best].second) best = i;

    DoaEstimate est{refined[best].first, refined[best].second, false, {}};
    for (const auto& [d, s] : refined) {
      if (s < est.score - 1e-6 || angle_between(d, est.direction) <= 3.0 * resolution) continue;
      const bool seen = std::any_of(est.alternatives.begin(), est.alternatives.end(),
                                    [&](const Point& a) { return angle_between(a, d) <= 3.0 * resolution; });
      if (!seen) est.alternatives.push_back(d);
    }
    est.ambiguous = !est.alternatives.empty();
    out.push_back(std::move(est));
  }
  return out;
}

}  // namespace cpcoh::sim
