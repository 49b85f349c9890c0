#include "qfb/figures.hpp"

#include "qfb/errors.hpp"
#include "qfb/parallel.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

namespace qfb {

namespace {

constexpr double kPi = std::numbers::pi;
const std::vector<double> kPanelEtas{0.3, 0.5, 0.7, 0.9};

std::string num(double v) { return format_exact(v); }

struct Panel {
  std::string description;
  CsvTable table;
};

struct Figure {
  std::string caption;
  std::vector<std::string> settings;
  std::vector<Panel> panels;
};

CsvTable start_table(const FigureOptions& opt, const std::string& id, std::size_t k,
                     const std::string& description) {
  CsvTable t;
  t.comments = opt.header;
  t.comments.push_back("figure: " + id + " panel " + std::to_string(k));
  t.comments.push_back("panel: " + description);
  t.comments.push_back("dt: " + num(opt.evolve.dt) + " t_max: " + num(opt.t_max) +
                       " grid_n: " + std::to_string(opt.grid_n));
  return t;
}

std::vector<double> time_grid(const FigureOptions& opt) {
  return Range{0.0, opt.t_max, opt.grid_n}.grid();
}

// QFI curves sharing a time column, one column per parameter set.
CsvTable curve_panel(const FigureOptions& opt, const std::string& id, std::size_t k,
                     const std::string& description, double alpha,
                     const std::vector<std::pair<std::string, ModelParams>>& curves) {
  const std::vector<double> times = time_grid(opt);
  CsvTable t = start_table(opt, id, k, description);
  t.columns.push_back("t");
  std::vector<QfiSeries> series;
  for (const auto& [name, p] : curves) {
    t.columns.push_back(name);
    series.push_back(qfi_curve(alpha, p, times, opt.evolve));
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    std::vector<double> row{times[i]};
    for (const auto& s : series) row.push_back(s.values[i]);
    t.add_row(std::move(row));
  }
  return t;
}

CsvTable sweep_panel(const FigureOptions& opt, const std::string& id, std::size_t k,
                     const std::string& description, const SweepSpec& spec,
                     const std::string& value_name) {
  CsvTable head = start_table(opt, id, k, description);
  return to_csv(sweep_grid(spec), value_name, head.comments);
}

ModelParams xy(double eta, double lambda, double beta) {
  ModelParams p;
  p.eta = eta;
  p.feedback = XYPlane{lambda, beta};
  return p;
}

ModelParams zaxis(double eta, double lambda) {
  ModelParams p;
  p.eta = eta;
  p.feedback = ZAxis{lambda};
  return p;
}

Figure fig2(const FigureOptions& opt) {
  Figure f{"QFI versus t for identity and lambda = 1 xy feedback, |1> start", {}, {}};
  f.settings = {"initial state: |1> (alpha = pi/2)", "lambda: 1",
                "columns: identity feedback and beta in {0, pi/2, pi, 3pi/2}"};
  std::size_t k = 1;
  for (double eta : kPanelEtas) {
    ModelParams id;
    id.eta = eta;
    id.feedback = IdentityScaled{1.0};
    const std::string d = "eta = " + num(eta);
    f.panels.push_back({d, curve_panel(opt, "fig2", k, d, kPi / 2,
                                       {{"qfi_identity", id},
                                        {"qfi_beta_0", xy(eta, 1, 0)},
                                        {"qfi_beta_pi_2", xy(eta, 1, kPi / 2)},
                                        {"qfi_beta_pi", xy(eta, 1, kPi)},
                                        {"qfi_beta_3pi_2", xy(eta, 1, 3 * kPi / 2)}})});
    ++k;
  }
  return f;
}

Figure alpha_time_figure(const FigureOptions& opt, const std::string& id,
                         const FeedbackSpec& fb, const std::string& fb_name) {
  Figure f{"QFI over (alpha, t) for feedback " + fb_name, {}, {}};
  f.settings = {"feedback: " + fb_name, "alpha grid: [0, pi/2], " + std::to_string(opt.grid_n) +
                                            " points",
                "initial state: sin(alpha)|1> + cos(alpha)|0>"};
  std::size_t k = 1;
  for (double eta : kPanelEtas) {
    SweepSpec s;
    s.base.eta = eta;
    s.base.feedback = fb;
    s.axes = {{"alpha", Range{0.0, kPi / 2, opt.grid_n}.grid()}, {"t", time_grid(opt)}};
    s.quantity = SweepQuantity::qfi_t;
    s.evolve = opt.evolve;
    const std::string d = "eta = " + num(eta) + ", feedback " + fb_name;
    f.panels.push_back({d, sweep_panel(opt, id, k, d, s, "qfi")});
    ++k;
  }
  return f;
}

Figure fig4(const FigureOptions& opt) {
  Figure f{"dynamic-balance QFI over (lambda, beta), xy feedback", {}, {}};
  f.settings = {"lambda grid: [0, 2], " + std::to_string(opt.grid_n) + " points",
                "beta grid: [0, 2 pi], " + std::to_string(opt.grid_n) + " points",
                "quantity: steady-state QFI"};
  std::size_t k = 1;
  for (double eta : kPanelEtas) {
    SweepSpec s;
    s.base.eta = eta;
    s.base.feedback = XYPlane{1.0, 0.0};
    s.axes = {{"lambda", Range{0.0, 2.0, opt.grid_n}.grid()},
              {"beta", Range{0.0, 2 * kPi, opt.grid_n}.grid()}};
    s.quantity = SweepQuantity::qfi_steady;
    const std::string d = "eta = " + num(eta);
    f.panels.push_back({d, sweep_panel(opt, "fig4", k, d, s, "qfi_steady")});
    ++k;
  }
  return f;
}

Figure fig5(const FigureOptions& opt) {
  Figure f{"dynamic-balance QFI over (eta, beta), lambda = 1", {}, {}};
  f.settings = {"eta grid: [0.2, 1], " + std::to_string(opt.grid_n) + " points",
                "beta grid: [0, 2 pi], " + std::to_string(opt.grid_n) + " points", "lambda: 1"};
  SweepSpec s;
  s.base.feedback = XYPlane{1.0, 0.0};
  s.axes = {{"eta", Range{0.2, 1.0, opt.grid_n}.grid()},
            {"beta", Range{0.0, 2 * kPi, opt.grid_n}.grid()}};
  s.quantity = SweepQuantity::qfi_steady;
  f.panels.push_back({"lambda = 1", sweep_panel(opt, "fig5", 1, "lambda = 1", s, "qfi_steady")});
  return f;
}

Figure fig6(const FigureOptions& opt) {
  Figure f{"QFI versus t for lambda sigma_z feedback, lambda = 1, |1> start", {}, {}};
  f.settings = {"initial state: |1> (alpha = pi/2)", "feedback: sigma_z, lambda = 1",
                "columns: eta in {0.3, 0.5, 0.7, 0.9}"};
  std::vector<std::pair<std::string, ModelParams>> curves;
  for (double eta : kPanelEtas) curves.push_back({"qfi_eta_" + num(eta), zaxis(eta, 1.0)});
  f.panels.push_back({"lambda = 1", curve_panel(opt, "fig6", 1, "lambda = 1", kPi / 2, curves)});
  return f;
}

Figure fig7(const FigureOptions& opt) {
  Figure f{"max over t of the QFI versus lambda, sigma_z feedback, eta = 0.5", {}, {}};
  f.settings = {"initial state: |1> (alpha = pi/2)", "eta: 0.5",
                "lambda grid: {0.2, 0.4, ..., 2.0}"};
  CsvTable t = start_table(opt, "fig7", 1, "eta = 0.5");
  t.columns = {"lambda", "t_star", "max_qfi"};
  std::vector<double> lambdas;
  for (int i = 1; i <= 10; ++i) lambdas.push_back(0.2 * i);
  std::vector<TimeMaximum> maxima(lambdas.size());
  parallel_for(lambdas.size(), [&](std::size_t i) {
    maxima[i] = max_qfi_over_time(make_state(kPi / 2), zaxis(0.5, lambdas[i]), opt.t_max,
                                  opt.grid_n, opt.evolve);
  });
  for (std::size_t i = 0; i < lambdas.size(); ++i)
    t.add_row({lambdas[i], maxima[i].t_star, maxima[i].f_star});
  f.panels.push_back({"eta = 0.5", std::move(t)});
  return f;
}

}  // namespace

const std::vector<std::string>& figure_ids() {
  static const std::vector<std::string> ids{"fig2", "fig3", "fig4", "fig5",
                                            "fig6", "fig7", "fig8"};
  return ids;
}

CsvTable to_csv(const SweepTable& t, const std::string& value_name,
                const std::vector<std::string>& header) {
  CsvTable out;
  out.comments = header;
  out.columns = t.axis_names;
  out.columns.push_back(value_name);
  std::map<std::string, long> reasons;
  for (const auto& c : t.cells) {
    std::vector<double> row = c.coords;
    row.push_back(c.value ? *c.value : std::numeric_limits<double>::quiet_NaN());
    if (!c.value) ++reasons[c.reason];
    out.add_row(std::move(row));
  }
  for (const auto& [why, n] : reasons)
    out.comments.push_back("missing: " + std::to_string(n) + " cells: " + why);
  return out;
}

std::vector<std::string> reproduce_figure(const std::string& id, const std::string& outdir,
                                          const FigureOptions& opt) {
  Figure f;
  if (id == "fig2") f = fig2(opt);
  else if (id == "fig3") f = alpha_time_figure(opt, "fig3", XYPlane{1.0, kPi}, "-sigma_y");
  else if (id == "fig4") f = fig4(opt);
  else if (id == "fig5") f = fig5(opt);
  else if (id == "fig6") f = fig6(opt);
  else if (id == "fig7") f = fig7(opt);
  else if (id == "fig8") f = alpha_time_figure(opt, "fig8", ZAxis{1.0}, "sigma_z, lambda = 1");
  else throw UsageError("--figure: unknown figure '" + id + "' (expected fig2 ... fig8)");

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(outdir, ec);
  if (ec) throw IoError("cannot create output directory '" + outdir + "'");

  std::vector<std::string> written;
  std::ostringstream manifest;
  for (const auto& h : opt.header) manifest << "# " << h << '\n';
  manifest << "figure: " << id << '\n' << "caption: " << f.caption << '\n';
  manifest << "dt: " << num(opt.evolve.dt) << '\n'
           << "t_max: " << num(opt.t_max) << '\n'
           << "grid_n: " << opt.grid_n << '\n';
  for (const auto& s : f.settings) manifest << s << '\n';
  for (std::size_t k = 0; k < f.panels.size(); ++k) {
    const std::string name = id + "_panel" + std::to_string(k + 1) + ".csv";
    const std::string path = (fs::path(outdir) / name).string();
    f.panels[k].table.write(path);
    written.push_back(path);
    manifest << "panel " << k + 1 << ": " << name << " (" << f.panels[k].description << ")\n";
  }
  const std::string mpath = (fs::path(outdir) / (id + "_manifest.txt")).string();
  {
    std::ofstream m(mpath, std::ios::binary | std::ios::trunc);
    if (!m) throw IoError("cannot write '" + mpath + "'");
    m << manifest.str();
    if (!m) throw IoError("write to '" + mpath + "' failed");
  }
  written.push_back(mpath);
  return written;
}

}  // namespace qfb
