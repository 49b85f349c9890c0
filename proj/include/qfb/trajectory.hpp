#pragma once

// Conditioned (unravelled) dynamics under continuous measurement with
// perfect detection. Ensemble averages reproduce the feedback master
// equation at eta = 1.

#include "qfb/dynamics.hpp"
#include "qfb/qubit.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace qfb {

struct TrajectoryConfig {
  double dt = 1e-3;
  long steps = 1000;
  std::uint64_t seed = 0;
  /// Real local-oscillator amplitude added to the jump operator (jump
  /// unravelling only).
  double local_osc = 0.0;
  long ntraj = 1;
  /// Conditioned states are stored every record_every steps (and at the end).
  long record_every = 1;
  /// Keep the per-step noise and photocurrent sequences.
  bool keep_noise = true;

  void validate() const;
};

enum class NoiseMode {
  wiener,
  /// Forced W(t) = 0: both the increment and the iterated integral vanish.
  zero,
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  /// One sample per step: Tr[x rho_c] + dW/dt (homodyne) or dN/dt (jumps).
  std::vector<double> photocurrent;
  std::vector<double> dw;
  std::vector<long> jump_steps;
  std::uint64_t seed = 0;
  /// Largest |Tr rho - 1| removed by per-step renormalization.
  double max_trace_correction = 0.0;
  /// Steps at which a negative eigenvalue was clipped, and the most negative
  /// eigenvalue seen before clipping.
  long positivity_projections = 0;
  double min_eigenvalue_seen = 0.0;
};

/// G[R] rho = R rho R^+ / Tr[R rho R^+] - rho
Mat2 superop_g(const Mat2& r, const DensityMatrix& rho);

/// H[R] rho = R rho + rho R^+ - Tr[R rho + rho R^+] rho
Mat2 superop_h(const Mat2& r, const Mat2& rho);

/// Counter-based per-trajectory seed; independent of generation order.
std::uint64_t trajectory_seed(std::uint64_t master, std::uint64_t index);

/// Photon-counting unravelling with jump operator c + local_osc. Requires
/// eta = 1 and feedback without a traceless part.
TrajectoryRecord jump_trajectory(const DensityMatrix& rho0, const ModelParams& p,
                                 const TrajectoryConfig& cfg, std::uint64_t index = 0);

/// Diffusive homodyne unravelling with Markovian feedback (eta = 1). The
/// deterministic part is advanced with one RK4 step of the master equation;
/// the innovation term is applied with its Milstein correction. Steps that
/// would leave the state non-positive are refined by Brownian-bridge halving.
TrajectoryRecord homodyne_trajectory(const DensityMatrix& rho0, const ModelParams& p,
                                     const TrajectoryConfig& cfg, std::uint64_t index = 0,
                                     NoiseMode noise = NoiseMode::wiener);

struct EnsembleResult {
  std::vector<double> times;
  std::vector<DensityMatrix> mean;
  std::vector<Eigen::Vector3d> bloch_mean;
  std::vector<Eigen::Vector3d> bloch_stderr;
  long count = 0;
};

/// Streaming reduction; records must be added in a fixed order for
/// bit-reproducible sums.
class EnsembleAccumulator {
 public:
  void add(const TrajectoryRecord& r);
  EnsembleResult result() const;
  long count() const noexcept { return n_; }

 private:
  long n_ = 0;
  std::vector<double> times_;
  std::vector<Mat2> sum_;
  std::vector<Eigen::Vector3d> mean_;
  std::vector<Eigen::Vector3d> m2_;
};

EnsembleResult ensemble_mean(std::span<const TrajectoryRecord> records);

enum class Unravelling { homodyne, jump };

/// cfg.ntraj trajectories with seeds trajectory_seed(cfg.seed, i), generated
/// in parallel and reduced in index order.
EnsembleResult run_ensemble(Unravelling kind, const DensityMatrix& rho0,
                            const ModelParams& p, const TrajectoryConfig& cfg);

}  // namespace qfb
