#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "cpcoh/cp_model.hpp"

namespace cpcoh::sim {

using Point = Eigen::Vector3d;

/// Reference sensors b_i and translations Delta_j (Delta_1 = 0).
struct ArrayScene {
  std::vector<Point> b;
  std::vector<Point> delta;
  double pulsation = 2.0 * 3.141592653589793;  // rad/s
  double celerity = 1.0;                     // m/s

  double wavelength() const { return 2.0 * 3.141592653589793 * celerity / pulsation; }
  double wavenumber() const { return pulsation / celerity; }
  void validate() const;
};

/// Directions d_p (unit) and complex signals, one column per path (n3 x r).
struct PathSet {
  std::vector<Point> directions;
  Mat signals;
};

struct Simulation {
  Hypermatrix tensor;
  CPModel truth;  // canonical
};

/// Unit-norm steering columns for the reference sensors (U) and translations (V).
std::pair<Mat, Mat> steering_vectors(const ArrayScene& scene, std::span<const Point> dirs);

/// Steering column for the reference sensors only.
Vec steering_vector(std::span<const Point> sensors, double wavenumber, const Point& d);

/// s_ij(k) = sum_p sigma_p(t_k) exp(j (w/C)(b_i + Delta_j)^T d_p) plus circular
/// complex Gaussian noise. The ground-truth weight of path p is
/// ||sigma_p|| sqrt(n1 n2) because the steering columns are unit-normalised.
Simulation simulate_array(const ArrayScene& scene, const PathSet& paths, double noise_std, std::uint64_t seed);

/// Some pair satisfies b_k - b_l = v (within 1e-12) and 0 < ||v|| < wavelength/2.
bool is_resolvent(std::span<const Point> points, const Point& v, double wavelength);

/// Short pairwise differences (0 < ||v|| < wavelength/2) span R^3.
bool has_resolvent_triad(std::span<const Point> points, double wavelength);

/// nx x ny x nz grid with the given spacing, first point at the origin.
std::vector<Point> grid_positions(Index nx, Index ny, Index nz, double spacing);

struct Collinearity {
  double value = 0.0;  // |<u_p, u_q>|
  /// The sensors form a resolvent triad, so value = 1 only for d_p = d_q.
  bool separation_guaranteed = false;
};

Collinearity collinearity_check(const ArrayScene& scene, const Point& dp, const Point& dq);

/// Azimuth theta, elevation phi.
Point direction_from_angles(double theta, double phi);
std::pair<double, double> angles_from_direction(const Point& d);

struct PolarizationState {
  Point d, e, f;
  Eigen::Vector2cd g;
  Vec v;  // length 6
};

/// v = B g with B = [[e, f], [f, -e]] / sqrt(2), g = Q(alpha) (cos beta, j sin beta).
/// beta must be nonzero with |beta| < pi/4.
PolarizationState polarization_state(double theta, double phi, double alpha, double beta);
Vec polarization_vector(double theta, double phi, double alpha, double beta);

/// Gains A (m x r), symbols S (n_sym x r), effective codes B (n_chip x r).
struct CdmaScene {
  Mat gains;
  Mat symbols;
  Mat codes;
};

/// B_kp = sum_t H_p(k - t) C_p(t) for k < n_chip; plain convolution, no guard chips.
Mat effective_codes(const Mat& spreading, const Mat& impulse, Index n_chip);

Simulation simulate_cdma(const CdmaScene& scene, double noise_std, std::uint64_t seed);

struct Fluorescence {
  Simulation sim;
  /// Concentration, absorbance (excitation) and emission likeness.
  std::array<double, 3> coherences{};
};

/// A = sum_p x_p (x) y_p (x) z_p plus real Gaussian noise. Inputs must be nonnegative.
Fluorescence simulate_fluorescence(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const Eigen::MatrixXd& z,
                                   double noise_std, std::uint64_t seed);

/// n points spread over the unit sphere by the golden-angle spiral.
std::vector<Point> fibonacci_sphere(Index n);

struct DoaEstimate {
  Point direction;
  double score = 0.0;  // |<u(d), u_hat>| / ||u_hat||
  bool ambiguous = false;
  /// Other maxima scoring within 1e-6 of the best (reported when ambiguous).
  std::vector<Point> alternatives;
};

/// Grid search over the sphere at `resolution` radians followed by local
/// ascent, one estimate per column of u_est.
std::vector<DoaEstimate> doa_estimate(const Mat& u_est, const ArrayScene& scene, double resolution);

double angle_between(const Point& a, const Point& b);

}  // namespace cpcoh::sim
