#pragma once

// Qubit master equation with homodyne-based Markovian feedback and detection
// efficiency eta:
//
//   d rho/dt = -i[Omega sx + (c^+ F + F c)/2, rho] + D(c - iF) rho
//              + D(sqrt((1 - eta)/eta) F) rho,        c = sqrt(gamma) sigma_-
//
// Time is measured in units of 1/gamma when gamma_eff = 1 (the default).

#include "qfb/qubit.hpp"

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace qfb {

struct IdentityScaled {
  double scale = 1.0;
};
/// lambda (sin(beta) sigma_x + cos(beta) sigma_y)
struct XYPlane {
  double lambda = 1.0;
  double beta = 0.0;
};
/// lambda sigma_z
struct ZAxis {
  double lambda = 1.0;
};
struct General {
  HermitianOp op;
};

using FeedbackSpec = std::variant<IdentityScaled, XYPlane, ZAxis, General>;

Mat2 feedback_matrix(const FeedbackSpec& f);
std::string describe(const FeedbackSpec& f);

struct ModelParams {
  double omega = 0.0;
  double eta = 1.0;
  double gamma_eff = 1.0;
  FeedbackSpec feedback = IdentityScaled{0.0};

  /// Throws DomainError naming the offending field.
  void validate() const;
  ModelParams with_eta(double e) const {
    ModelParams p = *this;
    p.eta = e;
    return p;
  }
};

/// D(c) rho = c rho c^+ - (c^+ c rho + rho c^+ c) / 2
template <typename C, typename R>
Mat2 dissipator(const Eigen::MatrixBase<C>& c, const Eigen::MatrixBase<R>& rho) {
  const Mat2 cd = c.adjoint();
  const Mat2 cdc = cd * c;
  return c * rho * cd - 0.5 * (cdc * rho + rho * cdc);
}

inline Mat2 dissipator(const Mat2& c, const DensityMatrix& rho) {
  return dissipator(c, rho.matrix());
}

/// Right-hand side of the feedback master equation. The matrix overload is
/// linear in rho and accepts arguments outside the state space.
Mat2 rhs(const Mat2& rho, const ModelParams& p);
inline Mat2 rhs(const DensityMatrix& rho, const ModelParams& p) {
  return rhs(rho.matrix(), p);
}

/// 4x4 superoperator acting on column-major vec(rho).
using Superop = Eigen::Matrix4cd;
using VecRho = Eigen::Vector4cd;

Superop liouvillian(const ModelParams& p);

inline VecRho vectorize(const Mat2& m) {
  return Eigen::Map<const VecRho>(m.data());
}
inline Mat2 unvectorize(const VecRho& v) { return Eigen::Map<const Mat2>(v.data()); }

/// One classical fourth-order Runge-Kutta step of y' = f(y).
template <typename State, typename F>
State rk4_step(const State& y, double h, F&& f) {
  const State k1 = f(y);
  const State k2 = f((y + 0.5 * h * k1).eval());
  const State k3 = f((y + 0.5 * h * k2).eval());
  const State k4 = f((y + h * k3).eval());
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct EvolveOptions {
  double dt = 1e-3;
  bool estimate_error = true;
  /// Step-halving estimate per unit time above which evolve refuses.
  double max_error_rate = 1e-8;
};

struct EvolutionResult {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  ModelParams params;
  double dt = 0.0;
  std::string method = "rk4-fixed-step";
  /// max over grid points of |rho_dt - rho_dt/2| / t; 0 when not estimated.
  double error_rate = 0.0;
};

/// Fixed-step RK4. Steps are shortened within each grid interval so that
/// every grid time is hit exactly. No trace renormalization is applied.
EvolutionResult evolve(const DensityMatrix& rho0, const ModelParams& p,
                       std::span<const double> t_grid, const EvolveOptions& opt = {});

/// Final state only; same integrator as evolve.
DensityMatrix evolve_to(const DensityMatrix& rho0, const ModelParams& p, double t,
                        const EvolveOptions& opt = {});

/// Stationary state of the generator from a linear solve in Bloch
/// coordinates; throws DegenerateSteadyStateError when not unique.
DensityMatrix steady_state(const ModelParams& p);

/// gamma = g^2 / kappa from adiabatic elimination of the cavity.
double effective_damping(double g, double kappa);

}  // namespace qfb
