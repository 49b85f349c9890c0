#include "qfb/cli.hpp"

#include "qfb/csv.hpp"
#include "qfb/errors.hpp"
#include "qfb/figures.hpp"
#include "qfb/sweep.hpp"
#include "qfb/trajectory.hpp"
#include "qfb/validation.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace qfb {

namespace {

struct Flags {
  std::string feedback = "identity";
  double lambda = 1.0;
  double beta = 0.0;
  double alpha = std::numbers::pi / 2;
  double eta = 0.5;
  double omega = 0.0;
  double eps1 = 0.0, eps2 = 0.0, ax = 0.0, ay = 0.0, az = 1.0;
  double t_max = 10.0;
  double dt = 1e-3;
  std::size_t grid_n = 81;
  std::uint64_t seed = 0;
  std::string out;

  double t = 1.0;
  std::string quantity = "qfi_t";
  std::vector<std::string> axes;

  std::string family = "xy";
  std::string objective = "steady_qfi";
  std::string lambda_range = "0:2:81";
  std::string beta_range = "0:6.283185307179586:81";

  std::string kind = "homodyne";
  long ntraj = 1000;
  double local_osc = 0.0;
  long record_every = 100;

  std::string figure = "all";
  std::string outdir = ".";
  std::string inject = "none";
};

std::string num(double v) { return format_exact(v); }

void require(bool ok, const std::string& flag, const std::string& message) {
  if (!ok) throw DomainError(flag + ": " + message);
}

void check_finite(double v, const std::string& flag) {
  require(std::isfinite(v), flag, "value must be finite");
}

void check_eta(double eta) {
  std::ostringstream os;
  os << "eta = " << eta << " is outside the domain (0, 1]";
  require(eta > 0.0 && eta <= 1.0, "--eta", os.str());
}

void check_time_flags(const Flags& f) {
  require(f.t_max > 0.0 && std::isfinite(f.t_max), "--t-max", "must be positive and finite");
  require(f.dt > 0.0 && std::isfinite(f.dt), "--dt", "must be positive and finite");
  require(f.dt <= f.t_max, "--dt", "must not exceed --t-max");
  require(f.grid_n >= 2, "--grid-n", "must be at least 2");
}

void check_physics_flags(const Flags& f) {
  check_eta(f.eta);
  check_finite(f.lambda, "--lambda");
  require(f.lambda >= 0.0, "--lambda", "feedback strength must be non-negative");
  check_finite(f.beta, "--beta");
  check_finite(f.alpha, "--alpha");
  check_finite(f.omega, "--omega");
  require(f.omega >= 0.0, "--omega", "drive must be non-negative");
  if (f.feedback == "general") {
    check_finite(f.eps1, "--eps1");
    check_finite(f.eps2, "--eps2");
    const double norm = std::sqrt(f.ax * f.ax + f.ay * f.ay + f.az * f.az);
    std::ostringstream os;
    os << "axis (--ax, --ay, --az) must be a unit vector, |a| = " << norm;
    require(f.eps2 == 0.0 || std::abs(norm - 1.0) <= 1e-12, "--ax/--ay/--az", os.str());
  }
}

FeedbackSpec feedback_from(const Flags& f) {
  if (f.feedback == "identity") return IdentityScaled{f.lambda};
  if (f.feedback == "xy") return XYPlane{f.lambda, f.beta};
  if (f.feedback == "z") return ZAxis{f.lambda};
  return General{HermitianOp{f.eps1, f.eps2, Eigen::Vector3d(f.ax, f.ay, f.az)}};
}

ModelParams params_from(const Flags& f, double eta) {
  ModelParams p;
  p.eta = eta;
  p.omega = f.omega;
  p.feedback = feedback_from(f);
  p.validate();
  return p;
}

std::vector<double> time_grid(const Flags& f) { return Range{0.0, f.t_max, f.grid_n}.grid(); }

EvolveOptions evolve_options(const Flags& f) {
  EvolveOptions o;
  o.dt = f.dt;
  return o;
}

Range parse_range(const std::string& text, const std::string& flag) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() != 3) throw UsageError(flag + ": expected lo:hi:n, got '" + text + "'");
  try {
    std::size_t used = 0;
    Range r;
    r.lo = std::stod(parts[0], &used);
    if (used != parts[0].size()) throw std::invalid_argument(parts[0]);
    r.hi = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument(parts[1]);
    const long n = std::stol(parts[2], &used);
    if (used != parts[2].size() || n < 0) throw std::invalid_argument(parts[2]);
    r.n = static_cast<std::size_t>(n);
    return r;
  } catch (const std::logic_error&) {
    throw UsageError(flag + ": malformed range '" + text + "'");
  }
}

class Command {
 public:
  Command(std::string name, const std::vector<std::string>& args) : name_(std::move(name)) {
    std::string echo = std::string(kToolName);
    for (const auto& a : args) echo += " " + a;
    header_.push_back(std::string(kToolName) + " " + kVersion);
    header_.push_back("command: " + echo);
  }

  void param(const std::string& key, double v) { params_ += key + "=" + num(v) + " "; }
  void param(const std::string& key, const std::string& v) { params_ += key + "=" + v + " "; }

  std::vector<std::string> header(std::uint64_t seed) const {
    std::vector<std::string> h = header_;
    h.push_back("seed: " + std::to_string(seed));
    if (!params_.empty()) h.push_back("params: " + params_.substr(0, params_.size() - 1));
    return h;
  }

 private:
  std::string name_;
  std::vector<std::string> header_;
  std::string params_;
};

void echo_physics(Command& c, const Flags& f, double eta) {
  c.param("feedback", f.feedback);
  c.param("lambda", f.lambda);
  c.param("beta", f.beta);
  c.param("eta", eta);
  c.param("omega", f.omega);
  if (f.feedback == "general") {
    c.param("eps1", f.eps1);
    c.param("eps2", f.eps2);
    c.param("ax", f.ax);
    c.param("ay", f.ay);
    c.param("az", f.az);
  }
}

void echo_time(Command& c, const Flags& f) {
  c.param("t_max", f.t_max);
  c.param("dt", f.dt);
  c.param("grid_n", static_cast<double>(f.grid_n));
}

void emit(const CsvTable& t, const Flags& f, std::ostream& out) {
  if (f.out.empty()) out << t.render();
  else t.write(f.out);
}

std::vector<double> state_row(const DensityMatrix& rho) {
  const BlochVector b = to_bloch(rho);
  return {rho.rho11(), rho.rho12().real(), rho.rho12().imag(), b.x, b.y, b.z};
}

const std::vector<std::string> kStateColumns{"rho11", "rho12_re", "rho12_im", "x", "y", "z"};

int cmd_evolve(const Flags& f, Command& c, std::ostream& out) {
  check_physics_flags(f);
  check_time_flags(f);
  const ModelParams p = params_from(f, f.eta);
  echo_physics(c, f, f.eta);
  c.param("alpha", f.alpha);
  echo_time(c, f);
  const EvolutionResult r = evolve(make_state(f.alpha), p, time_grid(f), evolve_options(f));
  CsvTable t;
  t.comments = c.header(f.seed);
  t.comments.push_back("method: " + r.method + ", step-halving error rate " + num(r.error_rate));
  t.columns = {"t"};
  t.columns.insert(t.columns.end(), kStateColumns.begin(), kStateColumns.end());
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    std::vector<double> row{r.times[k]};
    const auto s = state_row(r.states[k]);
    row.insert(row.end(), s.begin(), s.end());
    t.add_row(std::move(row));
  }
  emit(t, f, out);
  return 0;
}

int cmd_steady(const Flags& f, Command& c, std::ostream& out) {
  check_physics_flags(f);
  const ModelParams p = params_from(f, f.eta);
  echo_physics(c, f, f.eta);
  const DensityMatrix rho = steady_state(p);
  const double q = qfi_steady_state(p);
  CsvTable t;
  t.comments = c.header(f.seed);
  t.columns = {"eta", "lambda", "beta"};
  t.columns.insert(t.columns.end(), kStateColumns.begin(), kStateColumns.end());
  t.columns.push_back("qfi_steady");
  std::vector<double> row{f.eta, f.lambda, f.beta};
  const auto s = state_row(rho);
  row.insert(row.end(), s.begin(), s.end());
  row.push_back(q);
  t.add_row(std::move(row));
  emit(t, f, out);
  return 0;
}

int cmd_qfi_curve(const Flags& f, Command& c, std::ostream& out) {
  check_physics_flags(f);
  check_time_flags(f);
  const ModelParams p = params_from(f, f.eta);
  echo_physics(c, f, f.eta);
  c.param("alpha", f.alpha);
  echo_time(c, f);
  const QfiSeries s = qfi_curve(f.alpha, p, time_grid(f), evolve_options(f));
  CsvTable t;
  t.comments = c.header(f.seed);
  t.comments.push_back("fd_step: " + num(s.fd_step) + (s.one_sided ? " (one-sided)" : ""));
  if (s.values.size() > 10) {
    const auto tb = detect_balance(s);
    t.comments.push_back("balance_time: " + (tb ? num(*tb) : std::string("not reached")));
  }
  t.columns = {"t", "qfi"};
  for (std::size_t k = 0; k < s.times.size(); ++k) t.add_row({s.times[k], s.values[k]});
  emit(t, f, out);
  return 0;
}

int cmd_sweep(const Flags& f, Command& c, std::ostream& out) {
  SweepSpec spec;
  if (f.quantity == "qfi_t") spec.quantity = SweepQuantity::qfi_t;
  else if (f.quantity == "qfi_steady") spec.quantity = SweepQuantity::qfi_steady;
  else spec.quantity = SweepQuantity::max_qfi;
  if (f.axes.empty()) throw UsageError("--axis: at least one axis is required");
  for (const auto& a : f.axes) {
    const auto colon = a.find(':');
    if (colon == std::string::npos) throw UsageError("--axis: expected name:lo:hi:n, got '" + a + "'");
    const Range r = parse_range(a.substr(colon + 1), "--axis");
    require(r.n >= 1, "--axis", "axis '" + a.substr(0, colon) + "' has no points");
    spec.axes.push_back({a.substr(0, colon), r.grid()});
  }
  check_physics_flags(f);
  check_time_flags(f);
  check_finite(f.t, "--t");
  require(f.t >= 0.0, "--t", "time must be non-negative");
  spec.base.eta = f.eta;
  spec.base.omega = f.omega;
  spec.base.feedback = feedback_from(f);
  spec.alpha = f.alpha;
  spec.t = f.t;
  spec.t_max = f.t_max;
  spec.t_grid_n = f.grid_n;
  spec.evolve = evolve_options(f);
  try {
    spec.validate();
  } catch (const DomainError& e) {
    throw DomainError(std::string("--axis: ") + e.what());
  }
  echo_physics(c, f, f.eta);
  c.param("alpha", f.alpha);
  c.param("t", f.t);
  echo_time(c, f);
  c.param("quantity", f.quantity);
  const SweepTable table = sweep_grid(spec);
  emit(to_csv(table, f.quantity, c.header(f.seed)), f, out);
  return 0;
}

int cmd_optimize(const Flags& f, Command& c, std::ostream& out) {
  check_eta(f.eta);
  check_time_flags(f);
  check_finite(f.alpha, "--alpha");
  OptimizeSpec spec;
  spec.eta = f.eta;
  spec.family = f.family == "z" ? FeedbackFamily::z_axis : FeedbackFamily::xy_plane;
  spec.objective = f.objective == "max_t_qfi" ? Objective::max_t_qfi : Objective::steady_qfi;
  spec.lambda = parse_range(f.lambda_range, "--lambda-range");
  spec.beta = parse_range(f.beta_range, "--beta-range");
  spec.alpha = f.alpha;
  spec.t_max = f.t_max;
  spec.t_grid_n = f.grid_n;
  spec.evolve = evolve_options(f);
  require(spec.lambda.n >= 1 && spec.lambda.lo <= spec.lambda.hi, "--lambda-range",
          "range is empty");
  require(spec.lambda.lo >= 0.0 && spec.lambda.hi <= 4.0, "--lambda-range",
          "must lie within [0, 4]");
  if (spec.family == FeedbackFamily::xy_plane) {
    require(spec.beta.n >= 1 && spec.beta.lo <= spec.beta.hi, "--beta-range", "range is empty");
    require(spec.beta.lo >= 0.0 && spec.beta.hi <= 2.0 * std::numbers::pi, "--beta-range",
            "must lie within [0, 2 pi]");
  }
  c.param("eta", f.eta);
  c.param("family", f.family);
  c.param("objective", f.objective);
  c.param("lambda_range", f.lambda_range);
  c.param("beta_range", f.beta_range);
  c.param("alpha", f.alpha);
  echo_time(c, f);
  const OptimizeResult r = optimize_feedback(spec);
  CsvTable t;
  t.comments = c.header(f.seed);
  t.comments.push_back("best_grid: lambda=" + num(r.best_grid.lambda) + " beta=" +
                       num(r.best_grid.beta) + " value=" + num(r.best_grid.value));
  t.comments.push_back("best_refined: lambda=" + num(r.best.lambda) + " beta=" +
                       num(r.best.beta) + " value=" + num(r.best.value));
  t.columns = {"lambda", "beta", f.objective};
  for (const auto& g : r.table) t.add_row({g.lambda, g.beta, g.value});
  emit(t, f, out);
  return 0;
}

int cmd_trajectories(const Flags& f, Command& c, std::ostream& out) {
  check_physics_flags(f);
  require(f.dt > 0.0 && std::isfinite(f.dt), "--dt", "must be positive and finite");
  require(f.t_max > 0.0 && f.t_max <= 20.0, "--t-max", "must lie in (0, 20]");
  require(f.ntraj >= 1, "--ntraj", "must be at least 1");
  require(f.record_every >= 1, "--record-every", "must be at least 1");
  check_finite(f.local_osc, "--local-osc");
  const long steps = std::lround(f.t_max / f.dt);
  require(steps >= 1, "--dt", "must not exceed --t-max");
  require(std::abs(static_cast<double>(steps) * f.dt - f.t_max) <= 1e-9 * f.t_max, "--t-max",
          "must be an integer multiple of --dt");
  require(f.eta == 1.0, "--eta", "trajectories require perfect detection (eta = 1)");
  const ModelParams p = params_from(f, f.eta);
  const Unravelling kind = f.kind == "jump" ? Unravelling::jump : Unravelling::homodyne;

  TrajectoryConfig cfg;
  cfg.dt = f.dt;
  cfg.steps = steps;
  cfg.seed = f.seed;
  cfg.local_osc = f.local_osc;
  cfg.ntraj = f.ntraj;
  cfg.record_every = f.record_every;
  echo_physics(c, f, f.eta);
  c.param("alpha", f.alpha);
  c.param("kind", f.kind);
  c.param("t_max", f.t_max);
  c.param("dt", f.dt);
  c.param("ntraj", static_cast<double>(f.ntraj));
  c.param("local_osc", f.local_osc);
  c.param("record_every", static_cast<double>(f.record_every));
  const EnsembleResult e = run_ensemble(kind, make_state(f.alpha), p, cfg);
  CsvTable t;
  t.comments = c.header(f.seed);
  t.comments.push_back("trajectories: " + std::to_string(e.count));
  t.columns = {"t", "x", "y", "z", "x_se", "y_se", "z_se", "rho11"};
  for (std::size_t k = 0; k < e.times.size(); ++k) {
    const auto& m = e.bloch_mean[k];
    const auto& s = e.bloch_stderr[k];
    t.add_row({e.times[k], m.x(), m.y(), m.z(), s.x(), s.y(), s.z(), e.mean[k].rho11()});
  }
  emit(t, f, out);
  return 0;
}

int cmd_reproduce(const Flags& f, Command& c, std::ostream& out) {
  check_time_flags(f);
  const auto& ids = figure_ids();
  if (f.figure != "all" && std::find(ids.begin(), ids.end(), f.figure) == ids.end())
    throw UsageError("--figure: unknown figure '" + f.figure + "' (expected fig2 ... fig8 or all)");
  echo_time(c, f);
  c.param("figure", f.figure);
  FigureOptions opt;
  opt.evolve = evolve_options(f);
  opt.grid_n = f.grid_n;
  opt.t_max = f.t_max;
  opt.header = c.header(f.seed);
  const std::vector<std::string> todo =
      f.figure == "all" ? ids : std::vector<std::string>{f.figure};
  for (const auto& id : todo)
    for (const auto& path : reproduce_figure(id, f.outdir, opt)) out << path << '\n';
  return 0;
}

int cmd_selftest(const Flags& f, std::ostream& out, std::ostream& err) {
  require(f.dt > 0.0 && f.dt <= 1.0, "--dt", "must lie in (0, 1]");
  SelftestOptions opt;
  opt.evolve.dt = f.dt;
  if (f.inject == "sigma-y-sign") opt.paulis.y = -opt.paulis.y;
  const SelftestReport r = run_selftest(opt);
  out << r.describe();
  if (r.ok()) return 0;
  for (const auto& g : r.groups)
    if (!g.ok) err << "qfb: selftest group '" << g.name << "' failed: " << g.quantity
                   << " defect " << g.defect << '\n';
  return AccuracyError("").exit_code();
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Flags f;
  double traj_eta = 1.0;
  CLI::App app{"Detection-efficiency estimation with homodyne-mediated feedback", kToolName};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  const auto physics = [&](CLI::App* s) {
    s->add_option("--feedback", f.feedback, "identity | xy | z | general")
        ->check(CLI::IsMember({"identity", "xy", "z", "general"}));
    s->add_option("--lambda", f.lambda, "feedback strength (identity: scale)");
    s->add_option("--beta", f.beta, "xy feedback angle, radians");
    s->add_option("--omega", f.omega, "Rabi drive");
    s->add_option("--eps1", f.eps1, "general feedback: identity part");
    s->add_option("--eps2", f.eps2, "general feedback: Pauli part");
    s->add_option("--ax", f.ax, "general feedback axis x");
    s->add_option("--ay", f.ay, "general feedback axis y");
    s->add_option("--az", f.az, "general feedback axis z");
  };
  const auto timing = [&](CLI::App* s) {
    s->add_option("--t-max", f.t_max, "final time");
    s->add_option("--dt", f.dt, "integration step");
    s->add_option("--grid-n", f.grid_n, "points per grid axis");
  };
  const auto common = [&](CLI::App* s) {
    s->add_option("--seed", f.seed, "master seed");
    s->add_option("--out", f.out, "output CSV path (default: standard output)");
  };

  auto* evolve_cmd = app.add_subcommand("evolve", "integrate the master equation");
  physics(evolve_cmd);
  evolve_cmd->add_option("--eta", f.eta, "detection efficiency in (0, 1]");
  evolve_cmd->add_option("--alpha", f.alpha, "initial state sin(a)|1> + cos(a)|0>");
  timing(evolve_cmd);
  common(evolve_cmd);

  auto* steady_cmd = app.add_subcommand("steady", "stationary state and its QFI");
  physics(steady_cmd);
  steady_cmd->add_option("--eta", f.eta, "detection efficiency in (0, 1]");
  common(steady_cmd);

  auto* curve_cmd = app.add_subcommand("qfi-curve", "QFI of eta versus time");
  physics(curve_cmd);
  curve_cmd->add_option("--eta", f.eta, "detection efficiency in (0, 1]");
  curve_cmd->add_option("--alpha", f.alpha, "initial state angle");
  timing(curve_cmd);
  common(curve_cmd);

  auto* sweep_cmd = app.add_subcommand("sweep", "evaluate a quantity on a parameter grid");
  physics(sweep_cmd);
  sweep_cmd->add_option("--eta", f.eta, "detection efficiency in (0, 1]");
  sweep_cmd->add_option("--alpha", f.alpha, "initial state angle");
  sweep_cmd->add_option("--t", f.t, "time for --quantity qfi_t without a t axis");
  sweep_cmd->add_option("--axis", f.axes, "name:lo:hi:n with name in eta|lambda|beta|alpha|t")
      ->take_all();
  sweep_cmd->add_option("--quantity", f.quantity, "qfi_t | qfi_steady | max_qfi")
      ->check(CLI::IsMember({"qfi_t", "qfi_steady", "max_qfi"}));
  timing(sweep_cmd);
  common(sweep_cmd);

  auto* opt_cmd = app.add_subcommand("optimize", "grid search plus refinement over feedback");
  opt_cmd->add_option("--eta", f.eta, "detection efficiency in (0, 1]");
  opt_cmd->add_option("--family", f.family, "xy | z")->check(CLI::IsMember({"xy", "z"}));
  opt_cmd->add_option("--objective", f.objective, "steady_qfi | max_t_qfi")
      ->check(CLI::IsMember({"steady_qfi", "max_t_qfi"}));
  opt_cmd->add_option("--lambda-range", f.lambda_range, "lo:hi:n");
  opt_cmd->add_option("--beta-range", f.beta_range, "lo:hi:n");
  opt_cmd->add_option("--alpha", f.alpha, "initial state angle (max_t_qfi)");
  timing(opt_cmd);
  common(opt_cmd);

  auto* traj_cmd = app.add_subcommand("trajectories", "conditioned-state ensembles");
  physics(traj_cmd);
  traj_cmd->add_option("--eta", traj_eta, "detection efficiency (must be 1)");
  traj_cmd->add_option("--alpha", f.alpha, "initial state angle");
  traj_cmd->add_option("--kind", f.kind, "homodyne | jump")
      ->check(CLI::IsMember({"homodyne", "jump"}));
  traj_cmd->add_option("--ntraj", f.ntraj, "number of trajectories");
  traj_cmd->add_option("--local-osc", f.local_osc, "local-oscillator amplitude (jump)");
  traj_cmd->add_option("--record-every", f.record_every, "steps between recorded states");
  traj_cmd->add_option("--t-max", f.t_max, "final time");
  traj_cmd->add_option("--dt", f.dt, "time step");
  common(traj_cmd);

  auto* repro_cmd = app.add_subcommand("reproduce", "write the data behind a figure");
  repro_cmd->add_option("--figure", f.figure, "fig2 ... fig8 or all");
  repro_cmd->add_option("--outdir", f.outdir, "output directory");
  timing(repro_cmd);
  repro_cmd->add_option("--seed", f.seed, "master seed");

  auto* self_cmd = app.add_subcommand("selftest", "run the internal consistency checks");
  self_cmd->add_option("--dt", f.dt, "integration step for the oracle checks");
  self_cmd->add_option("--inject", f.inject, "fault to inject: none | sigma-y-sign")
      ->check(CLI::IsMember({"none", "sigma-y-sign"}));

  std::vector<std::string> storage{kToolName};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : UsageError("").exit_code();
  }

  try {
    Command cmd(app.get_subcommands().front()->get_name(), args);
    if (*evolve_cmd) return cmd_evolve(f, cmd, out);
    if (*steady_cmd) return cmd_steady(f, cmd, out);
    if (*curve_cmd) return cmd_qfi_curve(f, cmd, out);
    if (*sweep_cmd) return cmd_sweep(f, cmd, out);
    if (*opt_cmd) return cmd_optimize(f, cmd, out);
    if (*traj_cmd) {
      f.eta = traj_eta;
      return cmd_trajectories(f, cmd, out);
    }
    if (*repro_cmd) return cmd_reproduce(f, cmd, out);
    return cmd_selftest(f, out, err);
  } catch (const Error& e) {
    err << kToolName << ": error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    err << kToolName << ": internal error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace qfb
