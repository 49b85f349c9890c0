#pragma once

// Quantum Fisher information of the detection efficiency.
//
// d rho / d eta comes from finite differences of the integrated flow, so every
// feedback family is covered; the closed forms only arbitrate.

#include "qfb/dynamics.hpp"
#include "qfb/qubit.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace qfb {

enum class QfiMethod { qubit_explicit, spectral, sld_trace };

std::string_view to_string(QfiMethod m);

struct QfiResult {
  double value = 0.0;
  QfiMethod method = QfiMethod::qubit_explicit;
  double det_rho = 0.0;
  double fd_step = 0.0;
};

struct SpectralDecomposition {
  Eigen::Vector2d eigenvalues;
  Mat2 eigenvectors;  // columns
};

SpectralDecomposition spectral_decomposition(const DensityMatrix& rho);

/// Eigenvalues below this are treated as zero in the spectral sums.
inline constexpr double kEigenFloor = 1e-12;

/// Below this determinant the qubit formula is refused.
inline constexpr double kMinDeterminant = 1e-12;

/// d rho / d eta together with the stencil that produced it.
struct DerivativeEstimate {
  Mat2 drho = Mat2::Zero();
  double step = 0.0;
  bool one_sided = false;
};

/// Base finite-difference step in eta.
double fd_step(double eta);

/// Centered difference with one Richardson refinement; second-order one-sided
/// stencil (also Richardson refined) when eta is within one step of a domain
/// boundary.
DerivativeEstimate drho_deta(const DensityMatrix& rho0, const ModelParams& p, double t,
                             const EvolveOptions& opt = {});

/// Same stencil applied to a whole time grid (one integration per stencil
/// point).
std::vector<DerivativeEstimate> drho_deta_curve(const DensityMatrix& rho0,
                                                const ModelParams& p,
                                                std::span<const double> t_grid,
                                                const EvolveOptions& opt = {});

/// Stencil applied to the stationary state.
DerivativeEstimate drho_deta_steady(const ModelParams& p);

/// Tr[(d rho)^2] + Tr[(rho d rho)^2] / det(rho). Throws DomainError when
/// det(rho) < kMinDeterminant.
QfiResult qfi_qubit(const DensityMatrix& rho, const Mat2& drho);

/// Eigen-decomposition form: classical part sum (d lambda_k)^2 / lambda_k plus
/// coherence part with weights 2 (lambda_k - lambda_k')^2 / (lambda_k +
/// lambda_k') and squared eigenvector overlaps.
QfiResult qfi_spectral(const DensityMatrix& rho, const Mat2& drho);

/// Classical (eigenvalue) part of qfi_spectral alone.
double qfi_classical_part(const DensityMatrix& rho, const Mat2& drho);

/// Symmetric logarithmic derivative: d rho = (rho L + L rho) / 2.
Mat2 sld(const DensityMatrix& rho, const Mat2& drho);

/// Tr(rho L^2).
QfiResult qfi_sld(const DensityMatrix& rho, const Mat2& drho);

/// qubit-explicit when det(rho) is comfortably away from zero, spectral
/// otherwise.
QfiResult qfi(const DensityMatrix& rho, const Mat2& drho);

/// Variance bound 1 / (M F) for M independent repetitions.
double cramer_rao_bound(double qfi, long repetitions = 1);

}  // namespace qfb
