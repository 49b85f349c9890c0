#include "qfb/dynamics.hpp"
#include "qfb/errors.hpp"
#include "qfb/trajectory.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cstdlib>

using namespace qfb;
using namespace qfb::testing;

namespace {

ModelParams perfect(FeedbackSpec f, double omega = 0.0) {
  ModelParams p;
  p.eta = 1.0;
  p.omega = omega;
  p.feedback = f;
  return p;
}

TrajectoryConfig config(long steps, long record_every, long ntraj = 1, std::uint64_t seed = 7) {
  TrajectoryConfig c;
  c.steps = steps;
  c.record_every = record_every;
  c.ntraj = ntraj;
  c.seed = seed;
  return c;
}

// Every Bloch component of the ensemble within k standard errors (plus a
// floor for discretization bias) of the master equation.
void check_against_master(const EnsembleResult& e, const DensityMatrix& rho0,
                          const ModelParams& p, double k, double floor) {
  const auto ref = evolve(rho0, p, e.times);
  for (std::size_t i = 0; i < e.times.size(); ++i) {
    const Eigen::Vector3d want = to_bloch(ref.states[i]).vec();
    for (int c = 0; c < 3; ++c) {
      INFO("t = " << e.times[i] << ", component " << c);
      CHECK(std::abs(e.bloch_mean[i](c) - want(c)) <= k * e.bloch_stderr[i](c) + floor);
    }
  }
}

class WorkerOverride {
 public:
  explicit WorkerOverride(const char* n) {
    if (const char* old = std::getenv("QFB_WORKERS")) saved_ = old;
    setenv("QFB_WORKERS", n, 1);
  }
  ~WorkerOverride() {
    if (saved_.empty())
      unsetenv("QFB_WORKERS");
    else
      setenv("QFB_WORKERS", saved_.c_str(), 1);
  }

 private:
  std::string saved_;
};

}  // namespace

TEST_CASE("measurement superoperators") {
  std::mt19937_64 gen(41);
  for (int i = 0; i < 200; ++i) {
    const DensityMatrix rho = random_state(gen, 0.9);
    const Mat2 r = sigma_minus() + 0.3 * sigma_x();
    const Mat2 h = superop_h(r, rho.matrix());
    CHECK(std::abs(h.trace()) < 1e-14);
    CHECK(hermiticity_defect(h) < 1e-14);
    const Mat2 g = superop_g(r, rho);
    CHECK(std::abs(g.trace()) < 1e-14);
    const ValidationReport v = validate(rho.matrix() + g);
    CHECK(v.positive());
  }
  CHECK_THROWS_AS(superop_g(sigma_minus(), DensityMatrix{}), DomainError);
}

TEST_CASE("zero-noise homodyne trajectory is the master equation") {
  for (const FeedbackSpec& f :
       {FeedbackSpec{XYPlane{1.0, kPi}}, FeedbackSpec{XYPlane{0.7, kPi / 2}},
        FeedbackSpec{ZAxis{0.8}}}) {
    const ModelParams p = perfect(f, 0.4);
    const DensityMatrix rho0 = make_state(1.2);
    const auto rec = homodyne_trajectory(rho0, p, config(2000, 250), 0, NoiseMode::zero);
    const auto ref = evolve(rho0, p, rec.times);
    REQUIRE(rec.times.size() == 9);
    for (std::size_t i = 0; i < rec.times.size(); ++i)
      CHECK(max_abs(rec.states[i].matrix() - ref.states[i].matrix()) <= 1e-6);
    CHECK(rec.positivity_projections == 0);
  }
}

TEST_CASE("homodyne noise increments have Wiener statistics") {
  const auto rec = homodyne_trajectory(make_state(kPi / 2), perfect(XYPlane{1.0, kPi}),
                                       config(20000, 20000));
  REQUIRE(rec.dw.size() == 20000);
  const double n = static_cast<double>(rec.dw.size());
  double sum = 0.0, sq = 0.0;
  for (double w : rec.dw) {
    sum += w;
    sq += w * w;
  }
  const double dt = 1e-3;
  CHECK(std::abs(sum / n) <= 4.0 * std::sqrt(dt / n));
  CHECK(std::abs(sq / n - dt) <= 4.0 * std::sqrt(2.0 / n) * dt);
  for (std::size_t k = 0; k < rec.dw.size(); ++k)
    CHECK(std::abs(rec.photocurrent[k] - rec.dw[k] / dt) <= 1.0 + 1e-9);
}

TEST_CASE("record times") {
  const auto rec = homodyne_trajectory(make_state(0.3), perfect(ZAxis{1.0}), config(1000, 300));
  const std::vector<double> want{0.0, 0.3, 0.6, 0.9, 1.0};
  REQUIRE(rec.times.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i)
    CHECK(rec.times[i] == doctest::Approx(want[i]).epsilon(1e-15));
  CHECK(rec.states.size() == want.size());
}

TEST_CASE("seeds are reproducible and distinct") {
  CHECK(trajectory_seed(0, 0) != trajectory_seed(0, 1));
  CHECK(trajectory_seed(0, 1) != trajectory_seed(1, 0));
  CHECK(trajectory_seed(5, 9) == trajectory_seed(5, 9));
  const ModelParams p = perfect(XYPlane{0.6, 1.0});
  const auto a = homodyne_trajectory(make_state(1.0), p, config(500, 100), 3);
  const auto b = homodyne_trajectory(make_state(1.0), p, config(500, 100), 3);
  const auto c = homodyne_trajectory(make_state(1.0), p, config(500, 100), 4);
  CHECK(a.dw == b.dw);
  CHECK(a.seed == trajectory_seed(7, 3));
  CHECK(a.dw != c.dw);
  CHECK(max_abs(a.states.back().matrix() - b.states.back().matrix()) == 0.0);
}

TEST_CASE("homodyne ensemble with feedback reproduces the master equation") {
  const ModelParams p = perfect(XYPlane{0.7, kPi / 2}, 0.5);
  const DensityMatrix rho0 = make_state(kPi / 4);
  const EnsembleResult e = run_ensemble(Unravelling::homodyne, rho0, p, config(1500, 250, 2000));
  CHECK(e.count == 2000);
  check_against_master(e, rho0, p, 4.0, 1e-3);
}

TEST_CASE("jump ensemble with a local oscillator reproduces the master equation") {
  TrajectoryConfig cfg = config(1500, 250, 2000);
  cfg.local_osc = 0.3;
  const ModelParams p = perfect(IdentityScaled{0.0}, 0.5);
  const DensityMatrix rho0 = make_state(kPi / 4);
  const EnsembleResult e = run_ensemble(Unravelling::jump, rho0, p, cfg);
  check_against_master(e, rho0, p, 4.0, 2e-3);
}

TEST_CASE("jump records count clicks") {
  TrajectoryConfig cfg = config(20000, 10000);
  const auto rec = jump_trajectory(make_state(kPi / 2), perfect(IdentityScaled{1.0}), cfg);
  // Pure decay from |1>: exactly one click, after which the state is |0>.
  CHECK(rec.jump_steps.size() == 1);
  CHECK(rec.states.back().rho11() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("ensembles do not depend on the worker count") {
  const ModelParams p = perfect(XYPlane{1.0, kPi});
  const auto run = [&](const char* workers) {
    WorkerOverride w(workers);
    return run_ensemble(Unravelling::homodyne, make_state(kPi / 2), p, config(200, 50, 300, 11));
  };
  const EnsembleResult a = run("1");
  const EnsembleResult b = run("3");
  REQUIRE(a.times == b.times);
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    CHECK(a.bloch_mean[i] == b.bloch_mean[i]);
    CHECK(a.bloch_stderr[i] == b.bloch_stderr[i]);
    CHECK(a.mean[i].matrix() == b.mean[i].matrix());
  }
}

TEST_CASE("unravellings are rejected outside their domain") {
  ModelParams lossy = perfect(XYPlane{1.0, kPi});
  lossy.eta = 0.5;
  CHECK_THROWS_AS(homodyne_trajectory(make_state(0.1), lossy, config(10, 1)), DomainError);
  CHECK_THROWS_AS(jump_trajectory(make_state(0.1), perfect(XYPlane{1.0, kPi}), config(10, 1)),
                  DomainError);
  CHECK_NOTHROW(jump_trajectory(make_state(0.1), perfect(IdentityScaled{2.0}), config(10, 1)));

  TrajectoryConfig c = config(10, 1);
  c.dt = 0.0;
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = config(0, 1);
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = config(30000, 1);
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = config(10, 0);
  CHECK_THROWS_AS(c.validate(), DomainError);
  c = config(10, 1, 0);
  CHECK_THROWS_AS(c.validate(), DomainError);
}

TEST_CASE("coarse jump steps are refused") {
  TrajectoryConfig c = config(10, 1);
  c.dt = 0.2;
  CHECK_THROWS_AS(jump_trajectory(make_state(kPi / 2), perfect(IdentityScaled{0.0}), c),
                  AccuracyError);
}

TEST_CASE("ensemble accumulator") {
  EnsembleAccumulator acc;
  CHECK_THROWS_AS(acc.result(), DomainError);
  const ModelParams p = perfect(ZAxis{0.5});
  acc.add(homodyne_trajectory(make_state(0.2), p, config(100, 50)));
  const EnsembleResult one = acc.result();
  CHECK(one.count == 1);
  CHECK(one.bloch_stderr[1].norm() == 0.0);
  CHECK_THROWS_AS(acc.add(homodyne_trajectory(make_state(0.2), p, config(100, 25))),
                  DomainError);

  std::vector<TrajectoryRecord> recs;
  for (std::uint64_t i = 0; i < 4; ++i)
    recs.push_back(homodyne_trajectory(make_state(0.2), p, config(100, 50), i));
  const EnsembleResult e = ensemble_mean(recs);
  Mat2 manual = Mat2::Zero();
  for (const auto& r : recs) manual += r.states.back().matrix();
  CHECK(max_abs(e.mean.back().matrix() - manual / 4.0) < 1e-15);
  CHECK(e.bloch_mean.back()(2) == doctest::Approx(to_bloch(e.mean.back()).z).epsilon(1e-12));
}

TEST_CASE("jump ensemble decays at the bare rate") {
  const EnsembleResult e = run_ensemble(Unravelling::jump, make_state(kPi / 2),
                                        perfect(IdentityScaled{0.0}), config(1000, 1000, 10000));
  REQUIRE(e.times.back() == doctest::Approx(1.0));
  const double p = 0.5 * (1.0 + e.bloch_mean.back()(2));
  const double se = 0.5 * e.bloch_stderr.back()(2);
  CHECK(std::abs(p - std::exp(-1.0)) <= 4.0 * se);
}
