#include "qfb/sweep.hpp"

#include "qfb/errors.hpp"
#include "qfb/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace qfb {

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n == 1) return {lo};
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  g.back() = hi;
  return g;
}

void check_range(const Range& r, const char* name, double lo_bound, double hi_bound) {
  std::ostringstream os;
  if (r.n == 0 || !(r.lo <= r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi)) {
    os << name << " range is empty";
    throw DomainError(os.str());
  }
  if (r.lo < lo_bound || r.hi > hi_bound) {
    os << name << " range [" << r.lo << ", " << r.hi << "] must lie within [" << lo_bound
       << ", " << hi_bound << "]";
    throw DomainError(os.str());
  }
}

FeedbackSpec family_feedback(FeedbackFamily fam, double lambda, double beta) {
  if (fam == FeedbackFamily::z_axis) return ZAxis{lambda};
  return XYPlane{lambda, beta};
}

}  // namespace

std::vector<double> Range::grid() const { return linspace(lo, hi, n); }

QfiSeries qfi_curve(const DensityMatrix& rho0, const ModelParams& p,
                    std::span<const double> t_grid, const EvolveOptions& opt) {
  const EvolutionResult centre = evolve(rho0, p, t_grid, opt);
  const std::vector<DerivativeEstimate> d = drho_deta_curve(rho0, p, t_grid, opt);
  QfiSeries s;
  s.params = p;
  s.times = centre.times;
  s.fd_step = d.front().step;
  s.one_sided = d.front().one_sided;
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    const QfiResult q = qfi(centre.states[k], d[k].drho);
    s.values.push_back(q.value);
    s.methods.push_back(q.method);
  }
  return s;
}

QfiSeries qfi_curve(double alpha, const ModelParams& p, std::span<const double> t_grid,
                    const EvolveOptions& opt) {
  QfiSeries s = qfi_curve(make_state(alpha), p, t_grid, opt);
  s.alpha = alpha;
  return s;
}

double qfi_at(const DensityMatrix& rho0, const ModelParams& p, double t,
              const EvolveOptions& opt) {
  if (t == 0.0) return 0.0;
  const double grid[] = {0.0, t};
  return qfi_curve(rho0, p, grid, opt).values.back();
}

double qfi_steady_state(const ModelParams& p) {
  const DerivativeEstimate d = drho_deta_steady(p);
  return qfi(steady_state(p), d.drho).value;
}

std::optional<double> detect_balance(const QfiSeries& series, double rel_tol,
                                     std::size_t window) {
  const std::size_t n = series.values.size();
  if (window == 0 || n <= window)
    throw DomainError("balance window must be positive and shorter than the series");
  for (std::size_t i = window; i < n; ++i) {
    const auto first = series.values.begin() + static_cast<long>(i - window);
    const auto last = series.values.begin() + static_cast<long>(i + 1);
    const auto [lo, hi] = std::minmax_element(first, last);
    const double scale = std::max(std::abs(series.values[i]), kBalanceFloor);
    if (*hi - *lo <= rel_tol * scale) return series.times[i];
  }
  return std::nullopt;
}

double golden_section_max(const std::function<double(double)>& f, double a, double b,
                          double x_tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > x_tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? c : d;
}

TimeMaximum max_qfi_over_time(const DensityMatrix& rho0, const ModelParams& p, double t_max,
                              std::size_t grid_n, const EvolveOptions& opt) {
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw DomainError("t_max must be positive");
  if (grid_n < 16) throw DomainError("grid_n must be at least 16");
  const std::vector<double> grid = linspace(0.0, t_max, grid_n);
  const QfiSeries s = qfi_curve(rho0, p, grid, opt);
  const auto it = std::max_element(s.values.begin(), s.values.end());
  // Finite-difference noise on a curve that vanishes identically.
  if (*it <= kBalanceFloor) return {grid.front(), 0.0};

  const auto k = static_cast<std::size_t>(it - s.values.begin());
  const double a = grid[k == 0 ? 0 : k - 1];
  const double b = grid[std::min(k + 1, grid_n - 1)];
  // dt adequacy was established on the dense scan over the whole horizon.
  EvolveOptions fast = opt;
  fast.estimate_error = false;
  const auto f = [&](double t) { return qfi_at(rho0, p, t, fast); };
  const double t_star = golden_section_max(f, a, b, 1e-7 * t_max);
  const double f_star = f(t_star);
  if (f_star >= *it) return {t_star, f_star};
  return {grid[k], *it};
}

double feedback_objective(const OptimizeSpec& spec, double lambda, double beta) {
  ModelParams p;
  p.eta = spec.eta;
  p.feedback = family_feedback(spec.family, lambda, beta);
  if (spec.objective == Objective::steady_qfi) return qfi_steady_state(p);
  return max_qfi_over_time(make_state(spec.alpha), p, spec.t_max, spec.t_grid_n, spec.evolve)
      .f_star;
}

OptimizeResult optimize_feedback(const OptimizeSpec& spec) {
  ModelParams probe;
  probe.eta = spec.eta;
  probe.validate();
  check_range(spec.lambda, "lambda", 0.0, 4.0);
  const bool xy = spec.family == FeedbackFamily::xy_plane;
  if (xy) check_range(spec.beta, "beta", 0.0, 2.0 * std::numbers::pi);

  const std::vector<double> lambdas = spec.lambda.grid();
  const std::vector<double> betas = xy ? spec.beta.grid() : std::vector<double>{0.0};
  OptimizeResult res;
  res.table.resize(lambdas.size() * betas.size());
  parallel_for(res.table.size(), [&](std::size_t i) {
    GridPoint& g = res.table[i];
    g.lambda = lambdas[i / betas.size()];
    g.beta = betas[i % betas.size()];
    try {
      g.value = feedback_objective(spec, g.lambda, g.beta);
    } catch (const DomainError&) {
      g.value = std::numeric_limits<double>::quiet_NaN();
    }
  });

  const GridPoint* best = nullptr;
  for (const auto& g : res.table)
    if (std::isfinite(g.value) && (best == nullptr || g.value > best->value)) best = &g;
  if (best == nullptr) throw DomainError("objective undefined on every grid point");
  res.best_grid = *best;
  res.best = *best;

  const auto safe = [&](double l, double b) {
    try {
      return feedback_objective(spec, l, b);
    } catch (const DomainError&) {
      return -std::numeric_limits<double>::infinity();
    }
  };
  const double dl = lambdas.size() > 1 ? lambdas[1] - lambdas[0] : 0.0;
  const double db = betas.size() > 1 ? betas[1] - betas[0] : 0.0;
  for (int pass = 0; pass < spec.refine_passes; ++pass) {
    if (dl > 0.0) {
      const double lo = std::max(spec.lambda.lo, res.best.lambda - dl);
      const double hi = std::min(spec.lambda.hi, res.best.lambda + dl);
      const double b = res.best.beta;
      const double l = golden_section_max([&](double x) { return safe(x, b); }, lo, hi,
                                          1e-9 * std::max(1.0, hi));
      const double v = safe(l, b);
      if (v > res.best.value) res.best = {l, b, v};
    }
    if (xy && db > 0.0) {
      const double lo = std::max(spec.beta.lo, res.best.beta - db);
      const double hi = std::min(spec.beta.hi, res.best.beta + db);
      const double l = res.best.lambda;
      const double b = golden_section_max([&](double x) { return safe(l, x); }, lo, hi,
                                          1e-9 * std::max(1.0, hi));
      const double v = safe(l, b);
      if (v > res.best.value) res.best = {l, b, v};
    }
  }
  return res;
}

void SweepSpec::validate() const {
  static const std::set<std::string> known = {"eta", "lambda", "beta", "alpha", "t"};
  std::set<std::string> seen;
  if (axes.empty()) throw DomainError("sweep needs at least one axis");
  for (const auto& a : axes) {
    if (!known.count(a.name)) throw DomainError("unknown sweep axis '" + a.name + "'");
    if (!seen.insert(a.name).second) throw DomainError("duplicate sweep axis '" + a.name + "'");
    if (a.grid.empty()) throw DomainError("sweep axis '" + a.name + "' has an empty grid");
    for (std::size_t i = 1; i < a.grid.size(); ++i)
      if (!(a.grid[i] > a.grid[i - 1]))
        throw DomainError("sweep axis '" + a.name + "' must be strictly increasing");
    if (a.name == "eta" && !(a.grid.front() > 0.0 && a.grid.back() <= 1.0))
      throw DomainError("sweep axis 'eta' must lie in (0, 1]");
    if (a.name == "t" && a.grid.front() < 0.0)
      throw DomainError("sweep axis 't' must be non-negative");
  }
  const bool has_lambda_or_beta = seen.count("lambda") || seen.count("beta");
  if (has_lambda_or_beta) {
    const bool xy = std::holds_alternative<XYPlane>(base.feedback);
    const bool z = std::holds_alternative<ZAxis>(base.feedback);
    if (seen.count("beta") && !xy) throw DomainError("sweep axis 'beta' needs xy feedback");
    if (seen.count("lambda") && !xy && !z)
      throw DomainError("sweep axis 'lambda' needs xy or z feedback");
  }
  if (!seen.count("eta")) base.validate();
}

SweepTable sweep_grid(const SweepSpec& spec) {
  spec.validate();
  SweepTable table;
  std::size_t total = 1;
  for (const auto& a : spec.axes) {
    table.axis_names.push_back(a.name);
    table.shape.push_back(a.grid.size());
    total *= a.grid.size();
  }
  table.cells.resize(total);
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t rem = i;
    std::vector<double> coords(spec.axes.size());
    for (std::size_t j = spec.axes.size(); j-- > 0;) {
      coords[j] = spec.axes[j].grid[rem % table.shape[j]];
      rem /= table.shape[j];
    }
    table.cells[i].coords = std::move(coords);
  }

  const auto point_params = [&](const std::vector<double>& coords, double& alpha, double& t) {
    ModelParams p = spec.base;
    alpha = spec.alpha;
    t = spec.t;
    for (std::size_t j = 0; j < spec.axes.size(); ++j) {
      const std::string& name = spec.axes[j].name;
      const double v = coords[j];
      if (name == "eta") p.eta = v;
      else if (name == "alpha") alpha = v;
      else if (name == "t") t = v;
      else if (name == "lambda") {
        if (auto* xy = std::get_if<XYPlane>(&p.feedback)) xy->lambda = v;
        if (auto* z = std::get_if<ZAxis>(&p.feedback)) z->lambda = v;
      } else if (name == "beta") {
        std::get<XYPlane>(p.feedback).beta = v;
      }
    }
    return p;
  };

  // Cells sharing every coordinate except t form one curve for qfi_t.
  const auto t_axis = std::find_if(spec.axes.begin(), spec.axes.end(),
                                   [](const SweepAxis& a) { return a.name == "t"; });
  const bool curves = spec.quantity == SweepQuantity::qfi_t && t_axis != spec.axes.end();
  std::vector<std::vector<std::size_t>> groups;
  if (curves) {
    const auto t_pos = static_cast<std::size_t>(t_axis - spec.axes.begin());
    std::map<std::vector<double>, std::size_t> index;
    for (std::size_t i = 0; i < total; ++i) {
      std::vector<double> key = table.cells[i].coords;
      key.erase(key.begin() + static_cast<long>(t_pos));
      auto [it, inserted] = index.emplace(std::move(key), groups.size());
      if (inserted) groups.emplace_back();
      groups[it->second].push_back(i);
    }
  } else {
    for (std::size_t i = 0; i < total; ++i) groups.push_back({i});
  }

  parallel_for(groups.size(), [&](std::size_t g) {
    const std::vector<std::size_t>& members = groups[g];
    double alpha = 0.0;
    double t = 0.0;
    const ModelParams p = point_params(table.cells[members.front()].coords, alpha, t);
    try {
      if (curves) {
        std::vector<double> grid = t_axis->grid;
        const bool prepend = grid.front() != 0.0;
        if (prepend) grid.insert(grid.begin(), 0.0);
        const QfiSeries s = qfi_curve(make_state(alpha), p, grid, spec.evolve);
        for (std::size_t m = 0; m < members.size(); ++m)
          table.cells[members[m]].value = s.values[m + (prepend ? 1 : 0)];
        return;
      }
      double v = 0.0;
      switch (spec.quantity) {
        case SweepQuantity::qfi_t: v = qfi_at(make_state(alpha), p, t, spec.evolve); break;
        case SweepQuantity::qfi_steady: v = qfi_steady_state(p); break;
        case SweepQuantity::max_qfi:
          v = max_qfi_over_time(make_state(alpha), p, spec.t_max, spec.t_grid_n, spec.evolve)
                  .f_star;
          break;
      }
      table.cells[members.front()].value = v;
    } catch (const Error& e) {
      for (std::size_t m : members) {
        table.cells[m].value.reset();
        table.cells[m].reason = e.what();
      }
    }
  });
  return table;
}

}  // namespace qfb
