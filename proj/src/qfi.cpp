#include "qfb/qfi.hpp"

#include "qfb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qfb {

namespace {

constexpr double kNegativeClamp = -1e-12;
// Determinant above which qfi() prefers the explicit qubit formula.
constexpr double kAutoDeterminant = 1e-10;

double clamp_nonnegative(double v, const char* what) {
  if (v >= 0.0) return v;
  if (v >= kNegativeClamp) return 0.0;
  std::ostringstream os;
  os << what << " returned a negative Fisher information " << v;
  throw AccuracyError(os.str());
}

// Applies the eta stencil to a sampler returning one matrix per requested
// point (time or stationary state).
template <typename Sampler>
std::vector<DerivativeEstimate> stencil(double eta, Sampler&& sample) {
  const double h = fd_step(eta);
  std::vector<DerivativeEstimate> out;
  const auto finish = [&](const auto& combine, bool one_sided) {
    const std::size_t n = combine.size();
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = {combine[i], h, one_sided};
  };

  if (eta - h > 0.0 && eta + h <= 1.0) {
    const auto fp = sample(eta + h);
    const auto fm = sample(eta - h);
    const auto fph = sample(eta + 0.5 * h);
    const auto fmh = sample(eta - 0.5 * h);
    std::vector<Mat2> r(fp.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
      const Mat2 coarse = (fp[i] - fm[i]) / (2.0 * h);
      const Mat2 fine = (fph[i] - fmh[i]) / h;
      r[i] = (4.0 * fine - coarse) / 3.0;
    }
    finish(r, false);
    return out;
  }

  // One-sided second-order stencil towards the interior, then Richardson.
  const double dir = (eta + h > 1.0) ? -1.0 : 1.0;
  if (dir > 0.0 && eta + 2.0 * h > 1.0)
    throw DomainError("eta domain too narrow for a finite-difference stencil");
  const auto f0 = sample(eta);
  const auto f1 = sample(eta + dir * 0.5 * h);
  const auto f2 = sample(eta + dir * h);
  const auto f4 = sample(eta + dir * 2.0 * h);
  std::vector<Mat2> r(f0.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const Mat2 fine = dir * (-3.0 * f0[i] + 4.0 * f1[i] - f2[i]) / h;
    const Mat2 coarse = dir * (-3.0 * f0[i] + 4.0 * f2[i] - f4[i]) / (2.0 * h);
    r[i] = (4.0 * fine - coarse) / 3.0;
  }
  finish(r, true);
  return out;
}

}  // namespace

std::string_view to_string(QfiMethod m) {
  switch (m) {
    case QfiMethod::qubit_explicit: return "qubit-explicit";
    case QfiMethod::spectral: return "spectral";
    case QfiMethod::sld_trace: return "sld-trace";
  }
  return "unknown";
}

SpectralDecomposition spectral_decomposition(const DensityMatrix& rho) {
  const Eigen2 e = eig2(rho.matrix());
  return {e.values, e.vectors};
}

double fd_step(double eta) {
  return std::max(1e-5, 1e-4 * std::min({eta, 1.0 - eta, 0.5}));
}

DerivativeEstimate drho_deta(const DensityMatrix& rho0, const ModelParams& p, double t,
                             const EvolveOptions& opt) {
  const double grid[] = {0.0, t};
  const std::span<const double> g =
      t == 0.0 ? std::span<const double>(grid, 1) : std::span<const double>(grid, 2);
  return drho_deta_curve(rho0, p, g, opt).back();
}

std::vector<DerivativeEstimate> drho_deta_curve(const DensityMatrix& rho0,
                                                const ModelParams& p,
                                                std::span<const double> t_grid,
                                                const EvolveOptions& opt) {
  p.validate();
  return stencil(p.eta, [&](double eta) {
    const EvolutionResult r = evolve(rho0, p.with_eta(eta), t_grid, opt);
    std::vector<Mat2> m;
    m.reserve(r.states.size());
    for (const auto& s : r.states) m.push_back(s.matrix());
    return m;
  });
}

DerivativeEstimate drho_deta_steady(const ModelParams& p) {
  p.validate();
  return stencil(p.eta, [&](double eta) {
           return std::vector<Mat2>{steady_state(p.with_eta(eta)).matrix()};
         })
      .front();
}

QfiResult qfi_qubit(const DensityMatrix& rho, const Mat2& drho) {
  const Mat2& r = rho.matrix();
  const double det = r.determinant().real();
  if (det < kMinDeterminant) {
    std::ostringstream os;
    os << "det(rho) = " << det << " is below " << kMinDeterminant
       << "; state is (nearly) pure, use the spectral formula";
    throw DomainError(os.str());
  }
  const Mat2 rd = r * drho;
  const double value = (drho * drho).trace().real() + (rd * rd).trace().real() / det;
  return {clamp_nonnegative(value, "qubit formula"), QfiMethod::qubit_explicit, det, 0.0};
}

double qfi_classical_part(const DensityMatrix& rho, const Mat2& drho) {
  const SpectralDecomposition sd = spectral_decomposition(rho);
  double classical = 0.0;
  for (int k = 0; k < 2; ++k) {
    const double lk = sd.eigenvalues(k);
    if (lk <= kEigenFloor) continue;
    const Vec2 v = sd.eigenvectors.col(k);
    const double dl = (v.adjoint() * drho * v)(0, 0).real();
    classical += dl * dl / lk;
  }
  return classical;
}

QfiResult qfi_spectral(const DensityMatrix& rho, const Mat2& drho) {
  const SpectralDecomposition sd = spectral_decomposition(rho);
  const Mat2 d = sd.eigenvectors.adjoint() * drho * sd.eigenvectors;  // <k|d rho|k'>
  const Eigen::Vector2d& l = sd.eigenvalues;

  double coherence = 0.0;
  if (l(0) + l(1) > kEigenFloor) {
    const double gap = l(0) - l(1);
    if (std::abs(gap) <= kEigenFloor) {
      if (std::abs(d(0, 1)) > kEigenFloor)
        throw DomainError(
            "degenerate eigenvalues with non-zero off-diagonal derivative: "
            "degenerate perturbation theory required");
    } else {
      for (int k = 0; k < 2; ++k) {
        const int kp = 1 - k;
        const cplx overlap = d(k, kp) / (l(kp) - l(k));  // <k| d k'>
        const double w = 2.0 * (l(k) - l(kp)) * (l(k) - l(kp)) / (l(k) + l(kp));
        coherence += w * std::norm(overlap);
      }
    }
  }
  const double value = qfi_classical_part(rho, drho) + coherence;
  return {clamp_nonnegative(value, "spectral formula"), QfiMethod::spectral,
          rho.matrix().determinant().real(), 0.0};
}

Mat2 sld(const DensityMatrix& rho, const Mat2& drho) {
  const SpectralDecomposition sd = spectral_decomposition(rho);
  const Mat2 d = sd.eigenvectors.adjoint() * drho * sd.eigenvectors;
  Mat2 l = Mat2::Zero();
  for (int k = 0; k < 2; ++k)
    for (int kp = 0; kp < 2; ++kp) {
      const double s = sd.eigenvalues(k) + sd.eigenvalues(kp);
      if (s > kEigenFloor) l(k, kp) = 2.0 * d(k, kp) / s;
    }
  return sd.eigenvectors * l * sd.eigenvectors.adjoint();
}

QfiResult qfi_sld(const DensityMatrix& rho, const Mat2& drho) {
  const Mat2 l = sld(rho, drho);
  const double value = (rho.matrix() * l * l).trace().real();
  return {clamp_nonnegative(value, "SLD trace"), QfiMethod::sld_trace,
          rho.matrix().determinant().real(), 0.0};
}

QfiResult qfi(const DensityMatrix& rho, const Mat2& drho) {
  if (rho.matrix().determinant().real() >= kAutoDeterminant) return qfi_qubit(rho, drho);
  return qfi_spectral(rho, drho);
}

double cramer_rao_bound(double qfi, long repetitions) {
  if (repetitions < 1) throw DomainError("number of repetitions must be positive");
  if (!(qfi > 0.0))
    throw DomainError("Fisher information is zero: the measurement is uninformative and "
                      "the variance bound is infinite");
  return 1.0 / (static_cast<double>(repetitions) * qfi);
}

}  // namespace qfb
