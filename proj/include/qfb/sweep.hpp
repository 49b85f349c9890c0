#pragma once

// QFI curves, dynamic-balance detection, max-over-time QFI, feedback
// optimization and grid sweeps.

#include "qfb/dynamics.hpp"
#include "qfb/qfi.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qfb {

struct QfiSeries {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<QfiMethod> methods;
  ModelParams params;
  /// Angle of the initial state when it was built with make_state; NaN
  /// otherwise.
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double fd_step = 0.0;
  bool one_sided = false;
};

/// evolve -> d rho / d eta -> QFI at every grid time.
QfiSeries qfi_curve(const DensityMatrix& rho0, const ModelParams& p,
                    std::span<const double> t_grid, const EvolveOptions& opt = {});
QfiSeries qfi_curve(double alpha, const ModelParams& p, std::span<const double> t_grid,
                    const EvolveOptions& opt = {});

/// QFI at a single time.
double qfi_at(const DensityMatrix& rho0, const ModelParams& p, double t,
              const EvolveOptions& opt = {});

/// QFI of the stationary state (finite differences of steady_state).
double qfi_steady_state(const ModelParams& p);

/// Values whose magnitude is below this count as numerically zero in
/// detect_balance and max_qfi_over_time.
inline constexpr double kBalanceFloor = 1e-12;

/// First time t_b at which (max - min) over the trailing window of `window`
/// intervals is at most rel_tol * max(|F(t_b)|, kBalanceFloor).
std::optional<double> detect_balance(const QfiSeries& series, double rel_tol = 1e-6,
                                     std::size_t window = 10);

struct TimeMaximum {
  double t_star = 0.0;
  double f_star = 0.0;
};

/// Dense scan on grid_n points of [0, t_max], then golden-section refinement
/// on the bracketing interval. A curve that never exceeds kBalanceFloor
/// yields {0, 0}.
TimeMaximum max_qfi_over_time(const DensityMatrix& rho0, const ModelParams& p, double t_max,
                              std::size_t grid_n = 81, const EvolveOptions& opt = {});

/// Golden-section search for a maximum of f on [a, b].
double golden_section_max(const std::function<double(double)>& f, double a, double b,
                          double x_tol);

enum class FeedbackFamily { xy_plane, z_axis };
enum class Objective { steady_qfi, max_t_qfi };

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n = 81;

  std::vector<double> grid() const;
};

struct OptimizeSpec {
  double eta = 0.5;
  FeedbackFamily family = FeedbackFamily::xy_plane;
  Range lambda{0.0, 2.0, 81};
  Range beta{0.0, 6.283185307179586, 81};  // ignored for z_axis
  Objective objective = Objective::steady_qfi;
  /// Initial state and horizon for the max_t_qfi objective.
  double alpha = 1.5707963267948966;
  double t_max = 10.0;
  std::size_t t_grid_n = 81;
  int refine_passes = 3;
  EvolveOptions evolve{};
};

struct GridPoint {
  double lambda = 0.0;
  double beta = 0.0;
  double value = 0.0;
};

struct OptimizeResult {
  GridPoint best;       // after refinement
  GridPoint best_grid;  // best grid point
  std::vector<GridPoint> table;  // row-major, lambda outer
};

OptimizeResult optimize_feedback(const OptimizeSpec& spec);

/// Objective value for one feedback setting.
double feedback_objective(const OptimizeSpec& spec, double lambda, double beta);

enum class SweepQuantity { qfi_t, qfi_steady, max_qfi };

struct SweepAxis {
  std::string name;  // eta | lambda | beta | alpha | t
  std::vector<double> grid;
};

struct SweepSpec {
  std::vector<SweepAxis> axes;
  ModelParams base;  // feedback family and fixed values
  double alpha = 1.5707963267948966;
  double t = 1.0;
  double t_max = 10.0;
  std::size_t t_grid_n = 81;
  SweepQuantity quantity = SweepQuantity::qfi_t;
  EvolveOptions evolve{};

  void validate() const;
};

struct SweepCell {
  std::vector<double> coords;
  std::optional<double> value;  // empty: missing, see reason
  std::string reason;
};

struct SweepTable {
  std::vector<std::string> axis_names;
  std::vector<std::size_t> shape;
  std::vector<SweepCell> cells;  // row-major, last axis fastest
};

SweepTable sweep_grid(const SweepSpec& spec);

}  // namespace qfb
