#pragma once

#include "qfb/qubit.hpp"

#include <random>

namespace qfb::testing {

inline constexpr double kPi = 3.141592653589793;

/// Mixed state from a random Bloch vector of length below `max_radius`.
inline DensityMatrix random_state(std::mt19937_64& gen, double max_radius = 1.0) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::Vector3d r(n(gen), n(gen), n(gen));
  r *= max_radius * std::cbrt(u(gen)) / r.norm();
  return from_bloch({r.x(), r.y(), r.z()});
}

/// Random Hermitian traceless matrix: a tangent vector to the state space.
inline Mat2 random_tangent(std::mt19937_64& gen) {
  std::normal_distribution<double> n(0.0, 1.0);
  return n(gen) * sigma_x() + n(gen) * sigma_y() + n(gen) * sigma_z();
}

inline Mat2 random_hermitian(std::mt19937_64& gen) {
  std::normal_distribution<double> n(0.0, 1.0);
  return n(gen) * Mat2::Identity() + random_tangent(gen);
}

inline double max_abs(const Mat2& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace qfb::testing
