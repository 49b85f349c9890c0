#include "qfb/closed_form.hpp"
#include "qfb/errors.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace qfb;
using namespace qfb::testing;

namespace {

// (d_eta p)^2 / (p (1 - p)) for the diagonal xy-family state, by a
// five-point stencil on the closed-form population.
double diagonal_fisher(double t, double eta, double lambda, double beta) {
  const double h = 1e-4;
  const auto p = [&](double e) { return exact::rho_xy_excited(t, e, lambda, beta).rho11(); };
  const double dp = (-p(eta + 2 * h) + 8 * p(eta + h) - 8 * p(eta - h) + p(eta - 2 * h)) /
                    (12 * h);
  const double p0 = p(eta);
  return dp * dp / (p0 * (1 - p0));
}

}  // namespace

TEST_CASE("xy family from |1>") {
  CHECK(exact::rho_xy_excited(0.0, 0.3, 1.2, 0.4).rho11() == doctest::Approx(1.0));
  CHECK(exact::rho_xy_excited(1.0, 0.5, 1.0, kPi).rho11() ==
        doctest::Approx(0.6832624).epsilon(1e-7));
  CHECK(exact::rho_xy_excited(80.0, 0.5, 1.0, kPi).rho11() ==
        doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(exact::steady_excited_xy(0.5, 1.0, kPi) == doctest::Approx(2.0 / 3.0));
  CHECK(std::abs(exact::rho_xy_excited(3.0, 0.7, 0.4, 2.0).rho12()) == 0.0);
  CHECK_THROWS_AS(exact::rho_xy_excited(-1.0, 0.5, 1.0, 0.0), DomainError);
  CHECK_THROWS_AS(exact::rho_xy_excited(1.0, 1.2, 1.0, 0.0), DomainError);
}

TEST_CASE("xy family stays finite at long times and small eta") {
  const DensityMatrix r = exact::rho_xy_excited(500.0, 0.01, 2.0, 0.0);
  CHECK(std::isfinite(r.rho11()));
  CHECK(r.rho11() == doctest::Approx(exact::steady_excited_xy(0.01, 2.0, 0.0)));
  CHECK(std::isfinite(exact::qfi_xy_excited_corrected(500.0, 0.01, 2.0, 0.0)));
}

TEST_CASE("feedback -sigma_y") {
  const DensityMatrix r0 = exact::rho_minus_sy(0.0, 0.5, kPi / 4);
  CHECK(r0.rho11() == doctest::Approx(0.5));
  const DensityMatrix r1 = exact::rho_minus_sy(1.0, 0.5, kPi / 4);
  CHECK(r1.rho11() == doctest::Approx(0.6583688).epsilon(1e-7));
  CHECK(r1.rho12().real() == doctest::Approx(0.0410425).epsilon(1e-6));
  CHECK(std::abs(r1.rho12().imag()) < 1e-15);
  for (double alpha : {0.0, 0.5, kPi / 2}) {
    const DensityMatrix late = exact::rho_minus_sy(60.0, 0.5, alpha);
    CHECK(late.rho11() == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(std::abs(late.rho12()) < 1e-12);
  }
  CHECK(max_abs(exact::rho_minus_sy(1.3, 0.6, kPi / 2).matrix() -
                exact::rho_xy_excited(1.3, 0.6, 1.0, kPi).matrix()) < 1e-14);
}

TEST_CASE("feedback lambda sigma_z") {
  for (double t : {0.0, 0.7, 5.0}) {
    const DensityMatrix g = exact::rho_z(t, 0.4, 1.3, 0.0);
    CHECK(g.rho11() == 0.0);
    CHECK(std::abs(g.rho12()) == 0.0);
  }
  CHECK(exact::rho_z(1.0, 0.5, 1.0, kPi / 2).rho11() == doctest::Approx(std::exp(-1.0)));
  const cplx c = exact::rho_z(1.0, 0.5, 1.0, kPi / 4).rho12();
  CHECK(c.real() == doctest::Approx(0.0055545).epsilon(1e-5));
  CHECK(c.imag() == doctest::Approx(-0.1019344).epsilon(1e-6));
  CHECK_THROWS_AS(exact::rho_z(1.0, 1.0, 0.5, kPi / 4), SingularityError);
  CHECK_NOTHROW(exact::rho_z(1.0, 1.0, 0.5 + 1e-6, kPi / 4));
}

TEST_CASE("rho_z is continuous across the removable singularity") {
  const double a = kPi / 3;
  const cplx below = exact::rho_z(2.0, 1.0, 0.5 - 1e-7, a).rho12();
  const cplx above = exact::rho_z(2.0, 1.0, 0.5 + 1e-7, a).rho12();
  CHECK(std::abs(below - above) < 1e-6);
}

TEST_CASE("steady QFI values") {
  CHECK(exact::qfi_steady(0.5, 1.0, kPi) == doctest::Approx(8.0 / 9.0).epsilon(1e-12));
  CHECK(exact::qfi_steady(0.5, 1.0, kPi / 2) == doctest::Approx(1.0 / 9.375).epsilon(1e-12));
  CHECK(exact::qfi_steady(0.9, 1.0, kPi) == doctest::Approx(1.0 / 0.121).epsilon(1e-12));
  CHECK(exact::qfi_steady(0.3, 1.0, 0.0) == doctest::Approx(0.56324).epsilon(1e-5));
  CHECK(exact::qfi_steady(0.3, 1.0, kPi) == doctest::Approx(0.49432).epsilon(1e-5));
  CHECK(exact::qfi_steady(0.5, 0.0, 1.0) == 0.0);
}

TEST_CASE("steady QFI equals the Fisher information of the stationary population") {
  for (double eta : {0.2, 0.5, 0.8})
    for (double lambda : {0.4, 1.0, 1.7})
      for (double beta : {0.3, 2.0, 4.0})
        CHECK(exact::qfi_steady(eta, lambda, beta) ==
              doctest::Approx(diagonal_fisher(200.0, eta, lambda, beta)).epsilon(1e-7));
}

TEST_CASE("time-dependent QFI: corrected form is the exact Fisher information") {
  for (double t : {0.3, 1.0, 4.0})
    for (double eta : {0.3, 0.7})
      for (double beta : {0.0, kPi / 2, kPi, 3 * kPi / 2})
        CHECK(exact::qfi_xy_excited_corrected(t, eta, 1.0, beta) ==
              doctest::Approx(diagonal_fisher(t, eta, 1.0, beta)).epsilon(1e-7));
  CHECK(exact::qfi_xy_excited_corrected(0.0, 0.5, 1.0, 0.0) == 0.0);
  CHECK(exact::qfi_xy_excited_corrected(60.0, 0.5, 1.0, kPi) ==
        doctest::Approx(8.0 / 9.0).epsilon(1e-9));
  CHECK(exact::qfi_xy_excited_corrected(2.0, 0.5, 0.0, 1.0) == 0.0);
}

TEST_CASE("time-dependent QFI: the published form is off by a constant factor") {
  // Ratio published / exact = D2^2 / (eta^2 (1 + 2 lambda cos beta)^2).
  for (double beta : {0.0, kPi / 2, kPi, 3 * kPi / 2}) {
    const double eta = 0.5, lambda = 1.0;
    const double d2 = eta + 2 * lambda * lambda + 2 * eta * lambda * std::cos(beta);
    const double k = 1 + 2 * lambda * std::cos(beta);
    const double ratio = d2 * d2 / (eta * eta * k * k);
    for (double t : {0.5, 2.0})
      CHECK(exact::qfi_xy_excited(t, eta, lambda, beta) ==
            doctest::Approx(ratio * exact::qfi_xy_excited_corrected(t, eta, lambda, beta))
                .epsilon(1e-9));
  }
  // At the -sigma_y point the factor is 9, so the published form tends to 8
  // rather than to the dynamic-balance value 8/9.
  CHECK(exact::qfi_xy_excited(60.0, 0.5, 1.0, kPi) == doctest::Approx(8.0).epsilon(1e-9));
  CHECK(exact::qfi_xy_excited(0.0, 0.5, 1.0, 0.0) == 0.0);
  CHECK(exact::qfi_xy_excited(3.0, 0.5, 0.0, 0.0) == 0.0);
  CHECK_THROWS_AS(exact::qfi_xy_excited(-0.1, 0.5, 1.0, 0.0), DomainError);
}

TEST_CASE("analytic auxiliaries") {
  const exact::AnalyticAux a = exact::analytic_aux(1.0, 0.5, 1.0, kPi);
  CHECK(a.d2 == doctest::Approx(1.5));
  CHECK(a.y == doctest::Approx(-1.0));
  CHECK(a.theta == doctest::Approx(0.5));
  CHECK(a.chi == doctest::Approx(std::exp(3.0)));
  CHECK(a.tau == doctest::Approx(std::exp(4.0)));
  CHECK(a.gamma_z == doctest::Approx(std::exp(4.0)));
}
