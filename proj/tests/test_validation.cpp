#include "qfb/closed_form.hpp"
#include "qfb/validation.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace qfb;
using namespace qfb::testing;

TEST_CASE("state closed forms agree with the integrator") {
  const OracleGrid g;
  for (const OracleVerdict& v : {check_xy_excited(g), check_minus_sy(g), check_z_axis(g)}) {
    INFO(v.describe());
    CHECK(v.authoritative());
    CHECK(v.max_defect <= 1e-6);
    CHECK(v.points > 0);
  }
  CHECK(check_xy_excited(g).points == 4 * 3 * 4 * 6);
  CHECK(check_minus_sy(g).points == 4 * 3 * 6);
}

TEST_CASE("sigma_z closed form skips its singular line") {
  OracleGrid g;
  g.etas = {1.0};
  g.lambdas = {0.5, 1.0};
  const OracleVerdict v = check_z_axis(g);
  CHECK(v.skipped > 0);
  CHECK(v.authoritative());
}

TEST_CASE("time-dependent QFI arbitration") {
  OracleGrid g;
  g.times = {0.0, 0.5, 1.0, 2.0, 5.0};
  const OracleVerdict published = check_qfi_xy(false, g);
  const OracleVerdict corrected = check_qfi_xy(true, g);
  INFO(published.describe());
  INFO(corrected.describe());
  CHECK_FALSE(published.authoritative());
  CHECK(published.max_defect > 1.0);
  CHECK(corrected.authoritative());
  CHECK(corrected.relative);
  CHECK(published.describe().find("NON-AUTHORITATIVE") != std::string::npos);
}

TEST_CASE("steady QFI closed form") {
  const OracleVerdict v = check_qfi_steady(OracleGrid{});
  INFO(v.describe());
  CHECK(v.authoritative());
}

TEST_CASE("crossover to -sigma_y") {
  CrossoverSpec spec = default_crossover_spec();
  CHECK(spec.etas.size() == 81);
  CHECK(spec.etas.front() == 0.01);
  CHECK(spec.etas.back() == 1.0);
  // A coarse bracket around the expected location keeps this fast.
  spec.etas = {0.2, 0.3, 0.35, 0.38, 0.39, 0.4, 0.45, 0.6};
  const auto eta = find_crossover(spec);
  REQUIRE(eta.has_value());
  CHECK(*eta == 0.39);

  spec.etas = {0.1, 0.2};
  CHECK_FALSE(find_crossover(spec).has_value());

  spec.lambda_target = 1.01;
  CHECK_THROWS(find_crossover(spec));
}

TEST_CASE("selftest passes on the shipped operators") {
  const SelftestReport r = run_selftest();
  INFO(r.describe());
  CHECK(r.ok());
  REQUIRE(r.groups.size() == 3);
  CHECK(r.groups[0].name == "pauli-algebra");
  CHECK(r.describe().find("[PASS]") != std::string::npos);
}

TEST_CASE("selftest catches a sign flip in sigma_y") {
  SelftestOptions opt;
  opt.paulis.y = -opt.paulis.y;
  const SelftestReport r = run_selftest(opt);
  CHECK_FALSE(r.ok());
  CHECK_FALSE(r.groups[0].ok);
  CHECK(r.groups[0].defect == doctest::Approx(4.0));
  CHECK(r.describe().find("[FAIL] pauli-algebra") != std::string::npos);
}

TEST_CASE("selftest catches a coarse integrator") {
  SelftestOptions opt;
  opt.evolve.dt = 0.05;
  const SelftestReport r = run_selftest(opt);
  CHECK_FALSE(r.ok());
  const SelftestGroup& oracle = r.groups[1];
  CHECK(oracle.name == "oracle-agreement");
  CHECK_FALSE(oracle.ok);
  CHECK(oracle.defect > 1e-6);
  CHECK(std::isfinite(oracle.defect));
}
