#pragma once

// Cross-checks between the integrator, the finite-difference QFI and the
// closed forms, plus the self-test groups run by `qfb selftest`.

#include "qfb/dynamics.hpp"
#include "qfb/qubit.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qfb {

struct OracleGrid {
  std::vector<double> etas{0.3, 0.5, 0.7, 0.9};
  std::vector<double> lambdas{0.5, 1.0, 1.5};
  std::vector<double> betas{0.0, 1.5707963267948966, 3.141592653589793, 4.71238898038469};
  std::vector<double> alphas{0.0, 0.7853981633974483, 1.5707963267948966};
  std::vector<double> times{0.0, 0.5, 1.0, 2.0, 5.0, 10.0};
};

/// Outcome of comparing one closed form against the numerical pipeline.
/// A formula whose defect exceeds the tolerance is marked non-authoritative.
struct OracleVerdict {
  std::string name;
  double max_defect = 0.0;
  double tolerance = 0.0;
  bool relative = false;
  long points = 0;
  long skipped = 0;  // closed form singular at the point
  std::string worst_point;
  bool authoritative() const { return max_defect <= tolerance; }
  std::string describe() const;
};

/// Elementwise max |rho_ode - rho_exact| over the grid.
OracleVerdict check_xy_excited(const OracleGrid& g, const EvolveOptions& opt = {});
OracleVerdict check_minus_sy(const OracleGrid& g, const EvolveOptions& opt = {});
OracleVerdict check_z_axis(const OracleGrid& g, const EvolveOptions& opt = {});

/// Relative defect between the time-dependent closed-form QFI (XY family,
/// |1> start) and the finite-difference QFI of the integrated flow.
OracleVerdict check_qfi_xy(bool corrected, const OracleGrid& g, const EvolveOptions& opt = {});

/// Relative defect between qfi_steady_state and the closed-form
/// dynamic-balance QFI.
OracleVerdict check_qfi_steady(const OracleGrid& g);

struct CrossoverSpec {
  std::vector<double> etas;  // scanned in order
  std::size_t lambda_n = 81;
  std::size_t beta_n = 81;
  double lambda_target = 1.0;
  double beta_target = 3.141592653589793;
};

CrossoverSpec default_crossover_spec();

/// Smallest eta in spec.etas at which (lambda_target, beta_target) is the
/// strict global argmax of qfi_steady_state over the (lambda, beta) grid
/// [0, 2] x [0, 2 pi], endpoints included.
std::optional<double> find_crossover(const CrossoverSpec& spec);

struct SelftestOptions {
  PauliSet paulis{};
  EvolveOptions evolve{1e-3, false, 1e-8};
  double oracle_tolerance = 1e-6;
  double null_tolerance = 1e-10;
};

struct SelftestGroup {
  std::string name;
  bool ok = false;
  std::string quantity;
  double defect = 0.0;
  std::string detail;
};

struct SelftestReport {
  std::vector<SelftestGroup> groups;
  bool ok() const;
  std::string describe() const;
};

SelftestReport run_selftest(const SelftestOptions& opt = {});

}  // namespace qfb
