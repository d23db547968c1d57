// Seeded sampling helpers shared by the verification routines.

#ifndef HDIST_SAMPLING_HPP
#define HDIST_SAMPLING_HPP

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

namespace hdist {

/// Uniform point in the polydisc of the given radius.
inline Eigen::VectorXcd sample_polydisc(std::mt19937_64& rng, int k, double radius) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXcd v(k);
  for (int i = 0; i < k; ++i) {
    const double r = radius * std::sqrt(unit(rng));
    const double t = 2.0 * std::numbers::pi * unit(rng);
    v(i) = std::polar(r, t);
  }
  return v;
}

/// Uniform point in the Euclidean ball of C^k (= R^{2k}) of the given radius.
inline Eigen::VectorXcd sample_ball(std::mt19937_64& rng, int k, double radius) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXcd v(k);
  for (int i = 0; i < k; ++i) v(i) = {gauss(rng), gauss(rng)};
  const double scale = radius * std::pow(unit(rng), 1.0 / (2.0 * k)) / v.norm();
  return v * scale;
}

inline Eigen::VectorXcd clamp_to_polydisc(Eigen::VectorXcd v, double radius) {
  for (int i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i));
    if (a > radius) v(i) *= radius / a;
  }
  return v;
}

inline double sup_norm(const Eigen::VectorXcd& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

}  // namespace hdist

#endif  // HDIST_SAMPLING_HPP
