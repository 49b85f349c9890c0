#include "qfb/trajectory.hpp"

#include "qfb/errors.hpp"
#include "qfb/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace qfb {

namespace {

constexpr double kMaxJumpProbability = 0.1;
constexpr double kPositivityGuard = -1e-3;
constexpr double kRefineBelow = -1e-5;
constexpr int kMaxRefinements = 8;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

void require_perfect_detection(const ModelParams& p, const char* what) {
  p.validate();
  if (p.eta != 1.0) {
    std::ostringstream os;
    os << what << " unravelling is defined for perfect detection only (eta = 1, got "
       << p.eta << ")";
    throw DomainError(os.str());
  }
}

double min_eigenvalue(const Mat2& raw) {
  Mat2 m = 0.5 * (raw + raw.adjoint());
  const double tr = m.trace().real();
  if (!std::isfinite(tr) || tr <= 0.0) return -std::numeric_limits<double>::infinity();
  return eig2(m / tr).values(1);
}

// Hermitize, renormalize and clip a slightly negative eigenvalue. Updates the
// record's bookkeeping; throws when the step overshoots the positivity guard.
Mat2 repair(const Mat2& raw, TrajectoryRecord& rec, long step) {
  Mat2 m = 0.5 * (raw + raw.adjoint());
  const double tr = m.trace().real();
  if (!std::isfinite(tr) || tr <= 0.0) {
    std::ostringstream os;
    os << "conditioned state lost its trace at step " << step << "; dt too coarse";
    throw AccuracyError(os.str());
  }
  rec.max_trace_correction = std::max(rec.max_trace_correction, std::abs(tr - 1.0));
  m /= tr;
  const Eigen2 e = eig2(m);
  const double lmin = e.values(1);
  rec.min_eigenvalue_seen = std::min(rec.min_eigenvalue_seen, lmin);
  if (lmin < kPositivityGuard) {
    std::ostringstream os;
    os << "conditioned state eigenvalue " << lmin << " at step " << step
       << " violates positivity beyond " << -kPositivityGuard << "; dt too coarse";
    throw AccuracyError(os.str());
  }
  if (lmin < 0.0) {
    ++rec.positivity_projections;
    const Vec2 v = e.vectors.col(0);
    m = v * v.adjoint();  // the only non-negative eigenvalue, renormalized
  }
  return m;
}

void begin_record(TrajectoryRecord& rec, const DensityMatrix& rho0,
                  const TrajectoryConfig& cfg, std::uint64_t seed) {
  rec.seed = seed;
  rec.times.push_back(0.0);
  rec.states.push_back(rho0);
  if (cfg.keep_noise) {
    rec.photocurrent.reserve(static_cast<std::size_t>(cfg.steps));
    rec.dw.reserve(static_cast<std::size_t>(cfg.steps));
  }
}

void maybe_record(TrajectoryRecord& rec, const Mat2& rho, long step,
                  const TrajectoryConfig& cfg) {
  if (step % cfg.record_every == 0 || step == cfg.steps) {
    rec.times.push_back(static_cast<double>(step) * cfg.dt);
    rec.states.emplace_back(rho);
  }
}

}  // namespace

void TrajectoryConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("trajectory dt must be positive");
  if (steps < 1) throw DomainError("trajectory steps must be positive");
  if (dt * static_cast<double>(steps) > 20.0 + 1e-9)
    throw DomainError("trajectory duration dt * steps must not exceed 20");
  if (ntraj < 1) throw DomainError("ntraj must be at least 1");
  if (record_every < 1) throw DomainError("record_every must be at least 1");
  if (!std::isfinite(local_osc)) throw DomainError("local oscillator amplitude must be finite");
}

Mat2 superop_g(const Mat2& r, const DensityMatrix& rho) {
  const Mat2 jumped = r * rho.matrix() * r.adjoint();
  const double norm = jumped.trace().real();
  if (!(norm > 1e-14))
    throw DomainError("jump has vanishing probability: Tr[R rho R^+] = 0");
  return jumped / norm - rho.matrix();
}

Mat2 superop_h(const Mat2& r, const Mat2& rho) {
  const Mat2 s = r * rho + rho * r.adjoint();
  return s - s.trace() * rho;
}

std::uint64_t trajectory_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(master ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

TrajectoryRecord jump_trajectory(const DensityMatrix& rho0, const ModelParams& p,
                                 const TrajectoryConfig& cfg, std::uint64_t index) {
  require_perfect_detection(p, "jump");
  cfg.validate();
  const Mat2 f = feedback_matrix(p.feedback);
  const Mat2 traceless = f - 0.5 * f.trace() * Mat2::Identity();
  if (traceless.cwiseAbs().maxCoeff() > 0.0)
    throw DomainError("jump unravelling supports no feedback (identity feedback only)");

  const Mat2 c = std::sqrt(p.gamma_eff) * sigma_minus();
  const Mat2 r = c + cfg.local_osc * Mat2::Identity();
  const Mat2 rdr = r.adjoint() * r;
  const Mat2 h = p.omega * sigma_x();
  const Mat2 no_jump = -kI * h - cfg.local_osc * c - 0.5 * c.adjoint() * c;

  TrajectoryRecord rec;
  const std::uint64_t seed = trajectory_seed(cfg.seed, index);
  begin_record(rec, rho0, cfg, seed);
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  Mat2 rho = rho0.matrix();
  for (long step = 1; step <= cfg.steps; ++step) {
    const double prob = (rdr * rho).trace().real() * cfg.dt;
    if (prob > kMaxJumpProbability) {
      std::ostringstream os;
      os << "jump probability " << prob << " per step exceeds " << kMaxJumpProbability
         << "; dt too coarse";
      throw AccuracyError(os.str());
    }
    const bool jump = uniform(gen) < prob;
    if (jump) {
      rho = rho + superop_g(r, DensityMatrix(rho));
      rec.jump_steps.push_back(step);
    } else {
      rho = rho + cfg.dt * superop_h(no_jump, rho);
    }
    rho = repair(rho, rec, step);
    if (cfg.keep_noise) {
      rec.dw.push_back(jump ? 1.0 : 0.0);
      rec.photocurrent.push_back(jump ? 1.0 / cfg.dt : 0.0);
    }
    maybe_record(rec, rho, step, cfg);
  }
  return rec;
}

TrajectoryRecord homodyne_trajectory(const DensityMatrix& rho0, const ModelParams& p,
                                     const TrajectoryConfig& cfg, std::uint64_t index,
                                     NoiseMode noise) {
  require_perfect_detection(p, "homodyne");
  cfg.validate();
  const Mat2 f = feedback_matrix(p.feedback);
  const Mat2 c = std::sqrt(p.gamma_eff) * sigma_minus();
  const Mat2 x = c + c.adjoint();
  const Mat2 ct = c - kI * f;
  const Mat2 ct_dag = ct.adjoint();
  const Superop l = liouvillian(p);
  const auto drift = [&l](const VecRho& v) -> VecRho { return l * v; };

  TrajectoryRecord rec;
  const std::uint64_t seed = trajectory_seed(cfg.seed, index);
  begin_record(rec, rho0, cfg, seed);
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(cfg.dt));

  std::normal_distribution<double> unit(0.0, 1.0);

  // One Milstein step of length h driven by the increment dw. A step that
  // leaves rho clearly non-positive is redone as two half steps, with the
  // midpoint of W drawn from the Brownian bridge so that the total increment
  // is unchanged.
  const auto advance = [&](auto&& self, const Mat2& rho, double h, double dw, int depth,
                           long step) -> Mat2 {
    const double iterated = noise == NoiseMode::wiener ? 0.5 * (dw * dw - h) : 0.0;
    const Mat2 g = superop_h(ct, rho);
    // Derivative of rho -> H[ct] rho along g.
    const cplx mean_ct = (ct * rho + rho * ct_dag).trace();
    const Mat2 s = ct * g + g * ct_dag;
    const Mat2 g_prime = s - s.trace() * rho - mean_ct * g;
    const Mat2 next =
        unvectorize(rk4_step(vectorize(rho), h, drift)) + dw * g + iterated * g_prime;
    if (depth < kMaxRefinements && min_eigenvalue(next) < kRefineBelow) {
      const double first = 0.5 * dw + std::sqrt(0.25 * h) * unit(gen);
      const Mat2 mid = repair(self(self, rho, 0.5 * h, first, depth + 1, step), rec, step);
      return self(self, mid, 0.5 * h, dw - first, depth + 1, step);
    }
    return next;
  };

  Mat2 rho = rho0.matrix();
  for (long step = 1; step <= cfg.steps; ++step) {
    const double dw = noise == NoiseMode::wiener ? normal(gen) : 0.0;
    const double current = (x * rho).trace().real() + dw / cfg.dt;
    rho = repair(advance(advance, rho, cfg.dt, dw, 0, step), rec, step);
    if (cfg.keep_noise) {
      rec.dw.push_back(dw);
      rec.photocurrent.push_back(current);
    }
    maybe_record(rec, rho, step, cfg);
  }
  return rec;
}

void EnsembleAccumulator::add(const TrajectoryRecord& r) {
  if (n_ == 0) {
    times_ = r.times;
    sum_.assign(times_.size(), Mat2::Zero());
    mean_.assign(times_.size(), Eigen::Vector3d::Zero());
    m2_.assign(times_.size(), Eigen::Vector3d::Zero());
  } else if (r.times != times_) {
    throw DomainError("ensemble records have mismatched time grids");
  }
  ++n_;
  for (std::size_t k = 0; k < times_.size(); ++k) {
    sum_[k] += r.states[k].matrix();
    const Eigen::Vector3d b = to_bloch(r.states[k]).vec();
    const Eigen::Vector3d delta = b - mean_[k];
    mean_[k] += delta / static_cast<double>(n_);
    m2_[k] += delta.cwiseProduct(b - mean_[k]);
  }
}

EnsembleResult EnsembleAccumulator::result() const {
  if (n_ == 0) throw DomainError("empty ensemble");
  EnsembleResult out;
  out.times = times_;
  out.count = n_;
  const double n = static_cast<double>(n_);
  for (std::size_t k = 0; k < times_.size(); ++k) {
    out.mean.emplace_back(sum_[k] / n);
    out.bloch_mean.push_back(mean_[k]);
    Eigen::Vector3d se = Eigen::Vector3d::Zero();
    if (n_ > 1) se = (m2_[k].cwiseMax(0.0) / (n - 1.0) / n).cwiseSqrt();
    out.bloch_stderr.push_back(se);
  }
  return out;
}

EnsembleResult ensemble_mean(std::span<const TrajectoryRecord> records) {
  EnsembleAccumulator acc;
  for (const auto& r : records) acc.add(r);
  return acc.result();
}

EnsembleResult run_ensemble(Unravelling kind, const DensityMatrix& rho0,
                            const ModelParams& p, const TrajectoryConfig& cfg) {
  cfg.validate();
  TrajectoryConfig single = cfg;
  single.keep_noise = false;
  constexpr std::size_t kBatch = 256;
  const auto total = static_cast<std::size_t>(cfg.ntraj);
  EnsembleAccumulator acc;
  std::vector<TrajectoryRecord> batch;
  for (std::size_t start = 0; start < total; start += kBatch) {
    const std::size_t count = std::min(kBatch, total - start);
    batch.assign(count, TrajectoryRecord{});
    parallel_for(count, [&](std::size_t i) {
      const std::uint64_t index = start + i;
      batch[i] = kind == Unravelling::homodyne
                     ? homodyne_trajectory(rho0, p, single, index)
                     : jump_trajectory(rho0, p, single, index);
    });
    for (const auto& r : batch) acc.add(r);
  }
  return acc.result();
}

}  // namespace qfb
