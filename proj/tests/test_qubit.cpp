#include "qfb/errors.hpp"
#include "qfb/qubit.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace qfb;
using namespace qfb::testing;

TEST_CASE("Pauli algebra holds exactly") {
  const PauliCheck c = check_pauli_algebra();
  CHECK(c.ok);
  CHECK(c.max_defect == 0.0);
  const Mat2 id = Mat2::Identity();
  CHECK(max_abs(anticommutator(sigma_x(), sigma_y())) == 0.0);
  CHECK(max_abs(commutator(sigma_y(), sigma_z()) - 2.0 * kI * sigma_x()) == 0.0);
  CHECK(max_abs(commutator(sigma_z(), sigma_x()) - 2.0 * kI * sigma_y()) == 0.0);
  CHECK(max_abs(sigma_minus() * sigma_plus() + sigma_plus() * sigma_minus() - id) == 0.0);
  CHECK(max_abs(sigma_plus() - 0.5 * (sigma_x() + kI * sigma_y())) == 0.0);
}

TEST_CASE("Pauli check names a corrupted relation") {
  PauliSet bad;
  bad.y = -bad.y;
  const PauliCheck c = check_pauli_algebra(bad);
  CHECK_FALSE(c.ok);
  CHECK(c.worst_relation == "[sigma_x, sigma_y] = 2i sigma_z");
  CHECK(c.max_defect == doctest::Approx(4.0));

  PauliSet swapped;
  std::swap(swapped.plus, swapped.minus);
  CHECK_FALSE(check_pauli_algebra(swapped).ok);
}

TEST_CASE("Pauli matrices in single precision") {
  const Matrix2c<float> y = sigma_y<float>();
  CHECK((y * y - Matrix2c<float>::Identity()).cwiseAbs().maxCoeff() == 0.0f);
}

TEST_CASE("basis states and make_state") {
  const DensityMatrix ground;
  CHECK(ground.rho11() == 0.0);
  const DensityMatrix excited = make_state(kPi / 2);
  CHECK(excited.rho11() == doctest::Approx(1.0));
  CHECK(to_bloch(excited).z == doctest::Approx(1.0));
  const DensityMatrix plus = make_state(kPi / 4);
  CHECK(plus.rho11() == doctest::Approx(0.5));
  CHECK(plus.rho12().real() == doctest::Approx(0.5));
  CHECK(to_bloch(plus).x == doctest::Approx(1.0));
  CHECK_THROWS_AS(make_state(std::numeric_limits<double>::infinity()), DomainError);
}

TEST_CASE("density matrix validation") {
  Mat2 m = Mat2::Zero();
  m(0, 0) = 0.5;
  m(1, 1) = 0.6;
  CHECK_THROWS_AS(DensityMatrix{m}, InvalidStateError);

  Mat2 nonherm = 0.5 * Mat2::Identity();
  nonherm(0, 1) = 0.1;
  CHECK_THROWS_AS(DensityMatrix{nonherm}, InvalidStateError);
  CHECK_FALSE(validate(nonherm).hermitian());

  Mat2 negative = 0.5 * Mat2::Identity();
  negative(0, 1) = negative(1, 0) = 0.7;
  const ValidationReport r = validate(negative);
  CHECK(r.hermitian());
  CHECK(r.unit_trace());
  CHECK_FALSE(r.positive());
  CHECK(r.min_eigenvalue == doctest::Approx(-0.2));
  CHECK_THROWS_AS(DensityMatrix{negative}, InvalidStateError);

  Mat2 nan = 0.5 * Mat2::Identity();
  nan(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(DensityMatrix{nan}, InvalidStateError);
}

TEST_CASE("realize Hermitian operators") {
  const Mat2 f = realize({0.5, 2.0, Eigen::Vector3d(0.0, 1.0, 0.0)});
  CHECK(max_abs(f - (0.5 * Mat2::Identity() + 2.0 * sigma_y())) == 0.0);
  CHECK_THROWS_AS(realize({0.0, 1.0, Eigen::Vector3d(1.0, 1.0, 0.0)}), InvalidOperatorError);
  CHECK_NOTHROW(realize({1.0, 0.0, Eigen::Vector3d(3.0, 0.0, 0.0)}));
}

TEST_CASE("eig2 on random Hermitian matrices") {
  std::mt19937_64 gen(11);
  for (int i = 0; i < 1000; ++i) {
    const Mat2 h = random_hermitian(gen);
    const Eigen2 e = eig2(h);
    CHECK(e.values(0) >= e.values(1));
    const Mat2 recon = e.vectors * e.values.cast<cplx>().asDiagonal() * e.vectors.adjoint();
    CHECK(max_abs(recon - h) < 1e-12 * std::max(1.0, max_abs(h)));
    CHECK(max_abs(e.vectors.adjoint() * e.vectors - Mat2::Identity()) < 1e-13);
  }
}

TEST_CASE("eig2 edge cases") {
  const Eigen2 deg = eig2(0.5 * Mat2::Identity());
  CHECK(deg.values(0) == 0.5);
  CHECK(deg.values(1) == 0.5);
  CHECK(max_abs(deg.vectors - Mat2::Identity()) == 0.0);

  const Eigen2 z = eig2(sigma_z());
  CHECK(z.values(0) == 1.0);
  CHECK(std::abs(z.vectors(0, 0)) == doctest::Approx(1.0));

  Mat2 bad = sigma_x();
  bad(0, 1) = 2.0;
  CHECK_THROWS_AS(eig2(bad), InvalidOperatorError);
}

TEST_CASE("Bloch round trip on random states") {
  std::mt19937_64 gen(12);
  for (int i = 0; i < 1000; ++i) {
    const DensityMatrix rho = random_state(gen);
    const BlochVector b = to_bloch(rho);
    CHECK(b.norm() <= 1.0 + 1e-12);
    CHECK(max_abs(from_bloch(b).matrix() - rho.matrix()) < 1e-15);
    const Mat2 expect = 0.5 * (Mat2::Identity() + b.x * sigma_x() + b.y * sigma_y() +
                               b.z * sigma_z());
    CHECK(max_abs(expect - rho.matrix()) < 1e-15);
  }
  CHECK_THROWS_AS(from_bloch({1.0, 0.1, 0.0}), InvalidStateError);
}
