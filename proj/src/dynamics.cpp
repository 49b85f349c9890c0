#include "qfb/dynamics.hpp"

#include "qfb/errors.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qfb {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string(what) + " must be finite");
}

// Number of RK4 steps covering an interval of length span at step <= dt.
long steps_for(double span, double dt) {
  return std::max(1L, static_cast<long>(std::ceil(span / dt - 1e-9)));
}

}  // namespace

Mat2 feedback_matrix(const FeedbackSpec& f) {
  return std::visit(
      overloaded{
          [](const IdentityScaled& s) -> Mat2 {
            require_finite(s.scale, "identity feedback scale");
            return s.scale * Mat2::Identity();
          },
          [](const XYPlane& s) -> Mat2 {
            require_finite(s.lambda, "lambda");
            require_finite(s.beta, "beta");
            return s.lambda *
                   (std::sin(s.beta) * sigma_x() + std::cos(s.beta) * sigma_y());
          },
          [](const ZAxis& s) -> Mat2 {
            require_finite(s.lambda, "lambda");
            return s.lambda * sigma_z();
          },
          [](const General& s) -> Mat2 { return realize(s.op); },
      },
      f);
}

std::string describe(const FeedbackSpec& f) {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{
                 [&](const IdentityScaled& s) { os << "identity(scale=" << s.scale << ")"; },
                 [&](const XYPlane& s) {
                   os << "xy(lambda=" << s.lambda << ", beta=" << s.beta << ")";
                 },
                 [&](const ZAxis& s) { os << "z(lambda=" << s.lambda << ")"; },
                 [&](const General& s) {
                   os << "general(eps1=" << s.op.eps1 << ", eps2=" << s.op.eps2
                      << ", axis=(" << s.op.axis.x() << ", " << s.op.axis.y() << ", "
                      << s.op.axis.z() << "))";
                 },
             },
             f);
  return os.str();
}

void ModelParams::validate() const {
  if (!(eta > 0.0 && eta <= 1.0)) {
    std::ostringstream os;
    os << "eta = " << eta << " is outside the domain (0, 1]";
    throw DomainError(os.str());
  }
  if (!(gamma_eff > 0.0) || !std::isfinite(gamma_eff))
    throw DomainError("gamma_eff must be positive and finite");
  if (!(omega >= 0.0) || !std::isfinite(omega))
    throw DomainError("omega must be non-negative and finite");
  const Mat2 f = feedback_matrix(feedback);
  if (hermiticity_defect(f) > 1e-14) throw InvalidOperatorError("feedback is not Hermitian");
}

Mat2 rhs(const Mat2& rho, const ModelParams& p) {
  p.validate();
  const Mat2 f = feedback_matrix(p.feedback);
  const Mat2 c = std::sqrt(p.gamma_eff) * sigma_minus();
  const Mat2 h = p.omega * sigma_x() + 0.5 * (c.adjoint() * f + f * c);
  Mat2 out = -kI * commutator(h, rho) + dissipator(c - kI * f, rho);
  if (p.eta < 1.0) out += dissipator((std::sqrt((1.0 - p.eta) / p.eta) * f).eval(), rho);
  return out;
}

Superop liouvillian(const ModelParams& p) {
  Superop l;
  for (int k = 0; k < 4; ++k) {
    VecRho e = VecRho::Zero();
    e(k) = 1.0;
    l.col(k) = vectorize(rhs(unvectorize(e), p));
  }
  return l;
}

namespace {

// `refine` multiplies the step count of every interval, so refine = 2 halves
// exactly the steps taken with refine = 1 even when dt exceeds the spacing.
std::vector<Mat2> integrate(const Superop& l, const Mat2& rho0,
                            std::span<const double> t_grid, double dt, long refine = 1) {
  std::vector<Mat2> out;
  out.reserve(t_grid.size());
  VecRho v = vectorize(rho0);
  out.push_back(rho0);
  const auto f = [&l](const VecRho& y) -> VecRho { return l * y; };
  for (std::size_t k = 1; k < t_grid.size(); ++k) {
    const double span = t_grid[k] - t_grid[k - 1];
    const long n = steps_for(span, dt) * refine;
    const double h = span / static_cast<double>(n);
    for (long s = 0; s < n; ++s) v = rk4_step(v, h, f);
    out.push_back(unvectorize(v));
  }
  return out;
}

void check_grid(std::span<const double> t_grid, double dt) {
  if (t_grid.empty()) throw DomainError("time grid is empty");
  if (t_grid.front() != 0.0) throw DomainError("time grid must start at 0");
  for (std::size_t k = 1; k < t_grid.size(); ++k)
    if (!(t_grid[k] > t_grid[k - 1]) || !std::isfinite(t_grid[k]))
      throw DomainError("time grid must be strictly increasing and finite");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("dt must be positive");
}

}  // namespace

EvolutionResult evolve(const DensityMatrix& rho0, const ModelParams& p,
                       std::span<const double> t_grid, const EvolveOptions& opt) {
  p.validate();
  check_grid(t_grid, opt.dt);
  const Superop l = liouvillian(p);
  std::vector<Mat2> coarse = integrate(l, rho0.matrix(), t_grid, opt.dt);

  EvolutionResult res;
  res.params = p;
  res.dt = opt.dt;
  res.times.assign(t_grid.begin(), t_grid.end());

  if (opt.estimate_error && t_grid.size() > 1) {
    const std::vector<Mat2> fine = integrate(l, rho0.matrix(), t_grid, opt.dt, 2);
    for (std::size_t k = 1; k < t_grid.size(); ++k) {
      const double diff = (coarse[k] - fine[k]).cwiseAbs().maxCoeff();
      res.error_rate = std::max(res.error_rate, diff / t_grid[k]);
    }
    if (!(res.error_rate <= opt.max_error_rate)) {
      std::ostringstream os;
      os << "step-halving error estimate " << res.error_rate
         << " per unit time exceeds " << opt.max_error_rate << "; reduce dt (now "
         << opt.dt << ")";
      throw AccuracyError(os.str());
    }
  }

  res.states.reserve(coarse.size());
  for (std::size_t k = 0; k < coarse.size(); ++k) {
    const ValidationReport r = validate(coarse[k]);
    if (!r.ok()) {
      std::ostringstream os;
      os << "integrated state at t = " << t_grid[k] << " is invalid: " << r.describe();
      throw AccuracyError(os.str());
    }
    res.states.emplace_back(coarse[k]);
  }
  return res;
}

DensityMatrix evolve_to(const DensityMatrix& rho0, const ModelParams& p, double t,
                        const EvolveOptions& opt) {
  if (t == 0.0) return rho0;
  const double grid[] = {0.0, t};
  return evolve(rho0, p, grid, opt).states.back();
}

DensityMatrix steady_state(const ModelParams& p) {
  p.validate();
  // rhs is affine in the Bloch vector: d r/dt = A r + b.
  const auto flow = [&p](const Eigen::Vector3d& r) {
    return to_bloch(rhs(bloch_matrix(r), p)).vec();
  };
  const Eigen::Vector3d b = flow(Eigen::Vector3d::Zero());
  Eigen::Matrix3d a;
  for (int j = 0; j < 3; ++j) a.col(j) = flow(Eigen::Vector3d::Unit(j)) - b;

  Eigen::FullPivLU<Eigen::Matrix3d> lu(a);
  lu.setThreshold(1e-12);
  if (lu.rank() < 3) {
    const int null_dim = 3 - static_cast<int>(lu.rank());
    std::ostringstream os;
    os << "steady state is not unique: generator null space has dimension "
       << null_dim + 1 << " (" << null_dim << " free Bloch directions)";
    throw DegenerateSteadyStateError(os.str(), null_dim + 1);
  }
  Eigen::Vector3d r = lu.solve(-b);
  r += lu.solve(-(a * r + b));  // one refinement sweep
  const Mat2 rho = bloch_matrix(r);
  // Residual measured relative to the generator scale (stiff feedback at
  // small eta has entries of order lambda^2 / eta).
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double residual = rhs(rho, p).cwiseAbs().maxCoeff() / scale;
  if (residual > 1e-12) {
    std::ostringstream os;
    os << "steady-state residual " << residual << " exceeds 1e-12";
    throw AccuracyError(os.str());
  }
  return DensityMatrix(rho);
}

double effective_damping(double g, double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa))
    throw DomainError("cavity decay kappa must be positive");
  if (!(g >= 0.0) || !std::isfinite(g)) throw DomainError("coupling g must be non-negative");
  return g * g / kappa;
}

}  // namespace qfb
