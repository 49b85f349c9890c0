#include "qfb/validation.hpp"

#include "qfb/closed_form.hpp"
#include "qfb/errors.hpp"
#include "qfb/parallel.hpp"
#include "qfb/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

namespace qfb {

namespace {

struct PointDefect {
  double defect = 0.0;
  long points = 0;
  long skipped = 0;
  std::string where;
};

// Runs f over n independent cases and keeps the worst one; reduction is in
// index order so the verdict does not depend on the worker count.
OracleVerdict reduce(std::string name, double tol, bool relative, std::size_t n,
                     const std::function<PointDefect(std::size_t)>& f) {
  std::vector<PointDefect> parts(n);
  parallel_for(n, [&](std::size_t i) { parts[i] = f(i); });
  OracleVerdict v;
  v.name = std::move(name);
  v.tolerance = tol;
  v.relative = relative;
  for (const auto& p : parts) {
    v.points += p.points;
    v.skipped += p.skipped;
    if (p.points > 0 && (v.worst_point.empty() || p.defect > v.max_defect)) {
      v.max_defect = p.defect;
      v.worst_point = p.where;
    }
  }
  return v;
}

std::string point_label(std::initializer_list<std::pair<const char*, double>> kv) {
  std::ostringstream os;
  os.precision(6);
  bool first = true;
  for (const auto& [k, val] : kv) {
    os << (first ? "" : " ") << k << "=" << val;
    first = false;
  }
  return os.str();
}

double max_abs(const Mat2& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

std::string OracleVerdict::describe() const {
  std::ostringstream os;
  os.precision(3);
  os << name << ": max " << (relative ? "relative " : "") << "defect " << max_defect
     << " (tol " << tolerance << ") over " << points << " points";
  if (skipped > 0) os << ", " << skipped << " singular points skipped";
  if (!worst_point.empty()) os << "; worst at " << worst_point;
  os << (authoritative() ? "; authoritative" : "; NON-AUTHORITATIVE");
  return os.str();
}

OracleVerdict check_xy_excited(const OracleGrid& g, const EvolveOptions& opt) {
  const std::size_t nl = g.lambdas.size(), nb = g.betas.size();
  return reduce("rho(t), xy feedback from |1>", 1e-6, false, g.etas.size() * nl * nb,
                [&](std::size_t i) {
                  const double eta = g.etas[i / (nl * nb)];
                  const double lambda = g.lambdas[(i / nb) % nl];
                  const double beta = g.betas[i % nb];
                  ModelParams p;
                  p.eta = eta;
                  p.feedback = XYPlane{lambda, beta};
                  const auto r = evolve(make_state(std::numbers::pi / 2), p, g.times, opt);
                  PointDefect d;
                  for (std::size_t k = 0; k < g.times.size(); ++k) {
                    const double e = max_abs(
                        r.states[k].matrix() -
                        exact::rho_xy_excited(g.times[k], eta, lambda, beta).matrix());
                    ++d.points;
                    if (e >= d.defect) {
                      d.defect = e;
                      d.where = point_label({{"eta", eta}, {"lambda", lambda},
                                             {"beta", beta}, {"t", g.times[k]}});
                    }
                  }
                  return d;
                });
}

OracleVerdict check_minus_sy(const OracleGrid& g, const EvolveOptions& opt) {
  const std::size_t na = g.alphas.size();
  return reduce("rho(t), feedback -sigma_y", 1e-6, false, g.etas.size() * na,
                [&](std::size_t i) {
                  const double eta = g.etas[i / na];
                  const double alpha = g.alphas[i % na];
                  ModelParams p;
                  p.eta = eta;
                  p.feedback = XYPlane{1.0, std::numbers::pi};
                  const auto r = evolve(make_state(alpha), p, g.times, opt);
                  PointDefect d;
                  for (std::size_t k = 0; k < g.times.size(); ++k) {
                    const double e = max_abs(r.states[k].matrix() -
                                             exact::rho_minus_sy(g.times[k], eta, alpha).matrix());
                    ++d.points;
                    if (e >= d.defect) {
                      d.defect = e;
                      d.where = point_label({{"eta", eta}, {"alpha", alpha}, {"t", g.times[k]}});
                    }
                  }
                  return d;
                });
}

OracleVerdict check_z_axis(const OracleGrid& g, const EvolveOptions& opt) {
  const std::size_t nl = g.lambdas.size(), na = g.alphas.size();
  return reduce("rho(t), feedback lambda sigma_z", 1e-6, false, g.etas.size() * nl * na,
                [&](std::size_t i) {
                  const double eta = g.etas[i / (nl * na)];
                  const double lambda = g.lambdas[(i / na) % nl];
                  const double alpha = g.alphas[i % na];
                  ModelParams p;
                  p.eta = eta;
                  p.feedback = ZAxis{lambda};
                  const auto r = evolve(make_state(alpha), p, g.times, opt);
                  PointDefect d;
                  for (std::size_t k = 0; k < g.times.size(); ++k) {
                    try {
                      const double e = max_abs(
                          r.states[k].matrix() -
                          exact::rho_z(g.times[k], eta, lambda, alpha).matrix());
                      ++d.points;
                      if (e >= d.defect) {
                        d.defect = e;
                        d.where = point_label({{"eta", eta}, {"lambda", lambda},
                                               {"alpha", alpha}, {"t", g.times[k]}});
                      }
                    } catch (const SingularityError&) {
                      ++d.skipped;
                    }
                  }
                  return d;
                });
}

OracleVerdict check_qfi_xy(bool corrected, const OracleGrid& g, const EvolveOptions& opt) {
  const std::size_t nl = g.lambdas.size(), nb = g.betas.size();
  const auto closed = corrected ? exact::qfi_xy_excited_corrected : exact::qfi_xy_excited;
  return reduce(corrected ? "F(t), xy feedback from |1>, corrected closed form"
                          : "F(t), xy feedback from |1>, printed closed form",
                1e-5, true, g.etas.size() * nl * nb, [&](std::size_t i) {
                  const double eta = g.etas[i / (nl * nb)];
                  const double lambda = g.lambdas[(i / nb) % nl];
                  const double beta = g.betas[i % nb];
                  ModelParams p;
                  p.eta = eta;
                  p.feedback = XYPlane{lambda, beta};
                  const QfiSeries s = qfi_curve(std::numbers::pi / 2, p, g.times, opt);
                  PointDefect d;
                  for (std::size_t k = 0; k < g.times.size(); ++k) {
                    const double ref = s.values[k];
                    const double value = closed(g.times[k], eta, lambda, beta);
                    // 0/0 in the printed form where Theta = lambda^2.
                    if (!std::isfinite(value)) {
                      ++d.skipped;
                      continue;
                    }
                    const double e = std::abs(value - ref) / std::max(std::abs(ref), 1e-8);
                    ++d.points;
                    if (e >= d.defect) {
                      d.defect = e;
                      d.where = point_label({{"eta", eta}, {"lambda", lambda},
                                             {"beta", beta}, {"t", g.times[k]}});
                    }
                  }
                  return d;
                });
}

OracleVerdict check_qfi_steady(const OracleGrid& g) {
  const std::size_t nl = g.lambdas.size(), nb = g.betas.size();
  return reduce("steady F, xy feedback", 1e-6, true, g.etas.size() * nl * nb,
                [&](std::size_t i) {
                  const double eta = g.etas[i / (nl * nb)];
                  const double lambda = g.lambdas[(i / nb) % nl];
                  const double beta = g.betas[i % nb];
                  ModelParams p;
                  p.eta = eta;
                  p.feedback = XYPlane{lambda, beta};
                  const double ref = exact::qfi_steady(eta, lambda, beta);
                  PointDefect d;
                  d.points = 1;
                  d.defect = std::abs(qfi_steady_state(p) - ref) / std::max(std::abs(ref), 1e-8);
                  d.where = point_label({{"eta", eta}, {"lambda", lambda}, {"beta", beta}});
                  return d;
                });
}

CrossoverSpec default_crossover_spec() {
  CrossoverSpec s;
  s.etas = Range{0.01, 1.0, 81}.grid();
  return s;
}

std::optional<double> find_crossover(const CrossoverSpec& spec) {
  const std::vector<double> lambdas = Range{0.0, 2.0, spec.lambda_n}.grid();
  const std::vector<double> betas = Range{0.0, 2.0 * std::numbers::pi, spec.beta_n}.grid();
  const auto li = std::find(lambdas.begin(), lambdas.end(), spec.lambda_target);
  const auto bi = std::find(betas.begin(), betas.end(), spec.beta_target);
  if (li == lambdas.end() || bi == betas.end())
    throw DomainError("crossover target is not a grid point");
  const std::size_t target =
      static_cast<std::size_t>(li - lambdas.begin()) * betas.size() +
      static_cast<std::size_t>(bi - betas.begin());

  std::vector<double> values(lambdas.size() * betas.size());
  for (double eta : spec.etas) {
    parallel_for(values.size(), [&](std::size_t i) {
      ModelParams p;
      p.eta = eta;
      p.feedback = XYPlane{lambdas[i / betas.size()], betas[i % betas.size()]};
      try {
        values[i] = qfi_steady_state(p);
      } catch (const DomainError&) {
        values[i] = -std::numeric_limits<double>::infinity();
      }
    });
    bool strict_max = true;
    for (std::size_t i = 0; i < values.size() && strict_max; ++i)
      if (i != target && values[i] >= values[target]) strict_max = false;
    if (strict_max) return eta;
  }
  return std::nullopt;
}

bool SelftestReport::ok() const {
  return std::all_of(groups.begin(), groups.end(), [](const auto& g) { return g.ok; });
}

std::string SelftestReport::describe() const {
  std::ostringstream os;
  os.precision(3);
  for (const auto& g : groups) {
    os << (g.ok ? "[PASS] " : "[FAIL] ") << g.name << ": " << g.quantity << " defect "
       << g.defect;
    if (!g.detail.empty()) os << " (" << g.detail << ")";
    os << '\n';
  }
  return os.str();
}

SelftestReport run_selftest(const SelftestOptions& opt) {
  SelftestReport rep;

  {
    const PauliCheck pc = check_pauli_algebra(opt.paulis);
    rep.groups.push_back({"pauli-algebra", pc.ok, pc.worst_relation, pc.max_defect, ""});
  }

  {
    SelftestGroup g{"oracle-agreement", false, "", 0.0, ""};
    try {
      const OracleGrid grid;
      for (const auto& v : {check_xy_excited(grid, opt.evolve), check_minus_sy(grid, opt.evolve),
                            check_z_axis(grid, opt.evolve)}) {
        if (g.quantity.empty() || v.max_defect > g.defect) {
          g.quantity = v.name;
          g.defect = v.max_defect;
          g.detail = v.worst_point;
        }
      }
      g.ok = g.defect <= opt.oracle_tolerance;
    } catch (const Error& e) {
      g.quantity = "integration";
      g.defect = std::numeric_limits<double>::infinity();
      g.detail = e.what();
    }
    rep.groups.push_back(g);
  }

  {
    SelftestGroup g{"identity-feedback", false, "", 0.0, ""};
    try {
      ModelParams fed;
      fed.eta = 0.5;
      fed.feedback = IdentityScaled{1.0};
      ModelParams bare = fed;
      bare.feedback = IdentityScaled{0.0};
      const DensityMatrix rho = make_state(std::numbers::pi / 3);
      const double gen = max_abs(rhs(rho, fed) - rhs(rho, bare));
      const std::vector<double> times = Range{0.0, 10.0, 81}.grid();
      double qmax = 0.0;
      for (double eta : {0.3, 0.5, 0.7, 0.9}) {
        const QfiSeries s = qfi_curve(std::numbers::pi / 2, fed.with_eta(eta), times, opt.evolve);
        qmax = std::max(qmax, *std::max_element(s.values.begin(), s.values.end()));
      }
      if (gen >= qmax) {
        g.quantity = "generator difference";
        g.defect = gen;
      } else {
        g.quantity = "max F(t)";
        g.defect = qmax;
      }
      g.ok = gen <= 1e-14 && qmax <= opt.null_tolerance;
    } catch (const Error& e) {
      g.quantity = "integration";
      g.defect = std::numeric_limits<double>::infinity();
      g.detail = e.what();
    }
    rep.groups.push_back(g);
  }
  return rep;
}

}  // namespace qfb
