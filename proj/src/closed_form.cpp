#include "qfb/closed_form.hpp"

#include "qfb/errors.hpp"

#include <cmath>
#include <sstream>

namespace qfb::exact {

namespace {

void check_eta(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) {
    std::ostringstream os;
    os << "eta = " << eta << " is outside the domain (0, 1]";
    throw DomainError(os.str());
  }
}

void check_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("time must be finite and >= 0");
}

double d2_of(double eta, double lambda, double beta) {
  return eta + 2.0 * lambda * lambda + 2.0 * eta * lambda * std::cos(beta);
}

// Eq. for F_eta(t) with every chi-dependent factor divided through by chi so
// that late times do not overflow. `corrected` selects D2^2 in place of
// (Theta - lambda^2)^2.
double qfi_xy_formula(double t, double eta, double lambda, double beta, bool corrected) {
  check_eta(eta);
  check_time(t);
  if (t == 0.0) return 0.0;
  const AnalyticAux a = analytic_aux(t, eta, lambda, beta);
  const double l2 = lambda * lambda;
  const double inv_chi = 1.0 / a.chi;  // exp(-t D2 / eta)
  // Lambda / chi
  const double lam_over_chi =
      (eta + 4.0 * eta * t + 6.0 * t * l2 + 2.0 * t * a.y) * inv_chi - eta;
  // [eta^2 (1 - chi + 2t) + 6 eta t lambda^2 + 4 t lambda^4 + Y Lambda] / chi
  const double inner = eta * eta * ((1.0 + 2.0 * t) * inv_chi - 1.0) +
                       (6.0 * eta * t * l2 + 4.0 * t * l2 * l2) * inv_chi +
                       a.y * lam_over_chi;
  const double num = l2 * l2 * inner * inner;
  const double mid = corrected ? a.d2 : a.theta - l2;
  // (chi - 1)/chi * eta^4 Theta mid^2 * (eta + (1 + chi) lambda^2 + Y)/chi
  const double den = -std::expm1(-t * a.d2 / eta) * std::pow(eta, 4) * a.theta * mid * mid *
                     ((eta + l2 + a.y) * inv_chi + l2);
  if (num == 0.0) return 0.0;
  return num / den;
}

}  // namespace

AnalyticAux analytic_aux(double t, double eta, double lambda, double beta) {
  check_eta(eta);
  check_time(t);
  AnalyticAux a;
  a.y = 2.0 * eta * lambda * std::cos(beta);
  a.d2 = eta + 2.0 * lambda * lambda + a.y;
  a.theta = eta + lambda * lambda + a.y;
  a.chi = std::exp(t * a.d2 / eta);
  a.tau = std::exp(2.0 * t / eta);
  a.gamma_z = std::exp(2.0 * t * lambda * lambda / eta);
  a.lambda_aux = eta - a.chi * eta + 4.0 * eta * t + 6.0 * t * lambda * lambda + 2.0 * t * a.y;
  return a;
}

DensityMatrix rho_xy_excited(double t, double eta, double lambda, double beta) {
  check_eta(eta);
  check_time(t);
  const double d2 = d2_of(eta, lambda, beta);
  const double l2 = lambda * lambda;
  // (eta + (1 + chi) lambda^2 + Y) / (chi D2), written with 1/chi.
  const double decay = std::exp(-t * d2 / eta);
  const double p = ((eta + l2 + 2.0 * eta * lambda * std::cos(beta)) * decay + l2) / d2;
  Mat2 m = Mat2::Zero();
  m(0, 0) = p;
  m(1, 1) = 1.0 - p;
  return DensityMatrix(m);
}

double steady_excited_xy(double eta, double lambda, double beta) {
  check_eta(eta);
  return lambda * lambda / d2_of(eta, lambda, beta);
}

double qfi_xy_excited(double t, double eta, double lambda, double beta) {
  return qfi_xy_formula(t, eta, lambda, beta, false);
}

double qfi_xy_excited_corrected(double t, double eta, double lambda, double beta) {
  return qfi_xy_formula(t, eta, lambda, beta, true);
}

DensityMatrix rho_minus_sy(double t, double eta, double alpha) {
  check_eta(eta);
  check_time(t);
  // Divide numerator and denominator by tau = exp(2t/eta).
  const double ratio = std::exp(t - 2.0 * t / eta);  // e^t / tau
  const double p =
      (-2.0 + ratio * (eta - (eta - 2.0) * std::cos(2.0 * alpha))) / (2.0 * (eta - 2.0));
  const double coh = 0.5 * std::exp(1.5 * t - 2.0 * t / eta) * std::sin(2.0 * alpha);
  Mat2 m;
  m << p, coh, coh, 1.0 - p;
  return DensityMatrix(m);
}

DensityMatrix rho_z(double t, double eta, double lambda, double alpha) {
  check_eta(eta);
  check_time(t);
  const double l2 = lambda * lambda;
  if (std::abs(eta - 4.0 * l2) < 1e-9) {
    std::ostringstream os;
    os << "closed form for sigma_z feedback is singular at eta = 4 lambda^2 (eta = " << eta
       << ", lambda = " << lambda << "); integrate the master equation instead";
    throw SingularityError(os.str());
  }
  const double s = std::sin(alpha);
  const double p = std::exp(-t) * s * s;
  // e^{-t/2} sin(2a) / (2 Gamma)
  const double re = 0.5 * std::exp(-0.5 * t - 2.0 * t * l2 / eta) * std::sin(2.0 * alpha);
  // 8 e^{-t} (e^{t/2} - Gamma) eta lambda sin^2(a) / (2 Gamma (eta - 4 lambda^2))
  const double im = 4.0 * (std::exp(-0.5 * t - 2.0 * t * l2 / eta) - std::exp(-t)) * eta *
                    lambda * s * s / (eta - 4.0 * l2);
  const cplx coh(re, -im);
  Mat2 m;
  m << p, coh, std::conj(coh), 1.0 - p;
  return DensityMatrix(m);
}

double qfi_steady(double eta, double lambda, double beta) {
  check_eta(eta);
  const double c = std::cos(beta);
  const double l2 = lambda * lambda;
  const double g = 1.0 + 2.0 * lambda * c;
  const double theta = eta + l2 + 2.0 * eta * lambda * c;
  const double d2 = eta + 2.0 * l2 + 2.0 * eta * lambda * c;
  return l2 * g * g / (theta * d2 * d2);
}

}  // namespace qfb::exact
