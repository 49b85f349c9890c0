#pragma once

// Exact solutions of the feedback master equation for the three feedback
// families with zero drive and unit damping. They serve as independent
// checks on the integrator and the finite-difference QFI.

#include "qfb/qubit.hpp"

namespace qfb::exact {

struct AnalyticAux {
  double chi = 1.0;      // exp(t D2 / eta)
  double tau = 1.0;      // exp(2 t / eta)
  double gamma_z = 1.0;  // exp(2 t lambda^2 / eta)
  double y = 0.0;        // 2 eta lambda cos(beta)
  double lambda_aux = 0.0;  // eta - chi eta + 4 eta t + 6 t lambda^2 + 2 t y
  double theta = 0.0;    // eta + lambda^2 + y
  double d2 = 0.0;       // eta + 2 lambda^2 + y
};

AnalyticAux analytic_aux(double t, double eta, double lambda, double beta);

/// |1> evolved under lambda (sin(beta) sx + cos(beta) sy): diagonal state.
DensityMatrix rho_xy_excited(double t, double eta, double lambda, double beta);

/// Long-time excited population lambda^2 / D2 for the XY family.
double steady_excited_xy(double eta, double lambda, double beta);

/// Time-dependent QFI of eta for the XY family from |1>, evaluated exactly as
/// published. Disagrees with the exact Fisher information of rho_xy_excited;
/// see qfi_xy_excited_corrected.
double qfi_xy_excited(double t, double eta, double lambda, double beta);

/// Same expression with the factor (Theta - lambda^2)^2 replaced by
/// (Theta + lambda^2)^2 = D2^2, which reproduces (d_eta p)^2 / (p (1 - p)).
double qfi_xy_excited_corrected(double t, double eta, double lambda, double beta);

/// F = -sigma_y from cos(alpha)|0> + sin(alpha)|1>.
DensityMatrix rho_minus_sy(double t, double eta, double alpha);

/// F = lambda sigma_z from cos(alpha)|0> + sin(alpha)|1>. Throws
/// SingularityError within 1e-9 of eta = 4 lambda^2.
DensityMatrix rho_z(double t, double eta, double lambda, double alpha);

/// Dynamic-balance QFI of the XY family; independent of the initial state.
double qfi_steady(double eta, double lambda, double beta);

}  // namespace qfb::exact
