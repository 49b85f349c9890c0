#include "qfb/qubit.hpp"

#include "qfb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace qfb {

namespace {

// Smallest eigenvalue of the Hermitian part; no eigenvector work.
double min_eigenvalue(const Mat2& m) {
  const double a = m(0, 0).real();
  const double d = m(1, 1).real();
  const cplx b = 0.5 * (m(0, 1) + std::conj(m(1, 0)));
  return 0.5 * (a + d) - std::hypot(0.5 * (a - d), std::abs(b));
}

}  // namespace

DensityMatrix::DensityMatrix() : m_(Mat2::Zero()) { m_(1, 1) = 1.0; }

DensityMatrix::DensityMatrix(const Mat2& m) : m_(m) {
  if (!m_.allFinite()) throw InvalidStateError("density matrix has non-finite entries");
  const ValidationReport r = validate(m_);
  if (!r.ok()) throw InvalidStateError("invalid density matrix: " + r.describe());
}

DensityMatrix make_state(double alpha) {
  if (!std::isfinite(alpha)) throw DomainError("alpha must be finite");
  Vec2 ket(std::sin(alpha), std::cos(alpha));
  return DensityMatrix(ket * ket.adjoint());
}

Mat2 realize(const HermitianOp& op) {
  if (!std::isfinite(op.eps1) || !std::isfinite(op.eps2) || !op.axis.allFinite())
    throw InvalidOperatorError("Hermitian operator has non-finite parameters");
  if (op.eps2 != 0.0 && std::abs(op.axis.norm() - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "Hermitian operator axis must be a unit vector (|a| = " << op.axis.norm()
       << ")";
    throw InvalidOperatorError(os.str());
  }
  return op.eps1 * Mat2::Identity() +
         op.eps2 * (op.axis.x() * sigma_x() + op.axis.y() * sigma_y() +
                    op.axis.z() * sigma_z());
}

Eigen2 eig2(const Mat2& m) {
  if (!m.allFinite()) throw InvalidOperatorError("eig2: non-finite matrix");
  const double defect = hermiticity_defect(m);
  if (defect > 1e-10) {
    std::ostringstream os;
    os << "eig2: matrix is not Hermitian (defect " << defect << ")";
    throw InvalidOperatorError(os.str());
  }
  const double a = m(0, 0).real();
  const double d = m(1, 1).real();
  const cplx b = 0.5 * (m(0, 1) + std::conj(m(1, 0)));
  const double half_gap = 0.5 * (a - d);
  const double radius = std::hypot(half_gap, std::abs(b));
  const double mean = 0.5 * (a + d);

  Eigen2 out;
  out.values << mean + radius, mean - radius;
  if (radius == 0.0) {
    out.vectors = Mat2::Identity();
    return out;
  }
  // Top eigenvector from whichever row of (m - lambda I) is better conditioned.
  Vec2 top;
  if (half_gap >= 0.0)
    top << half_gap + radius, std::conj(b);
  else
    top << b, radius - half_gap;
  top.normalize();
  Vec2 bottom(-std::conj(top(1)), std::conj(top(0)));
  out.vectors.col(0) = top;
  out.vectors.col(1) = bottom;
  return out;
}

BlochVector to_bloch(const Mat2& m) {
  // Tr(rho sigma) for the three Pauli matrices.
  return {(m(0, 1) + m(1, 0)).real(), (kI * (m(0, 1) - m(1, 0))).real(),
          (m(0, 0) - m(1, 1)).real()};
}

Mat2 bloch_matrix(const Eigen::Vector3d& r) {
  return 0.5 * (Mat2::Identity() + r.x() * sigma_x() + r.y() * sigma_y() +
                r.z() * sigma_z());
}

DensityMatrix from_bloch(const BlochVector& b) {
  const double n = b.norm();
  if (!std::isfinite(n) || n > 1.0 + 1e-10) {
    std::ostringstream os;
    os << "Bloch vector outside the unit ball (|r| = " << n << ")";
    throw InvalidStateError(os.str());
  }
  return DensityMatrix(bloch_matrix(b.vec()));
}

ValidationReport validate(const Mat2& m) {
  ValidationReport r;
  r.hermiticity_defect = hermiticity_defect(m);
  r.trace_defect = std::abs(m.trace() - 1.0);
  r.min_eigenvalue = min_eigenvalue(m);
  return r;
}

std::string ValidationReport::describe() const {
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "hermiticity defect %.3g%s, trace defect %.3g%s, min eigenvalue "
                "%.3g%s",
                hermiticity_defect, hermitian() ? "" : " (violation)", trace_defect,
                unit_trace() ? "" : " (violation)", min_eigenvalue,
                positive() ? "" : " (violation)");
  return buf;
}

PauliCheck check_pauli_algebra(const PauliSet& s, double tol) {
  const Mat2 id = Mat2::Identity();
  Mat2 excited = Mat2::Zero();
  excited(0, 0) = 1.0;
  const std::pair<const char*, double> relations[] = {
      {"sigma_x^2 = I", (s.x * s.x - id).cwiseAbs().maxCoeff()},
      {"sigma_y^2 = I", (s.y * s.y - id).cwiseAbs().maxCoeff()},
      {"sigma_z^2 = I", (s.z * s.z - id).cwiseAbs().maxCoeff()},
      {"sigma_+ sigma_- = |1><1|", (s.plus * s.minus - excited).cwiseAbs().maxCoeff()},
      {"[sigma_x, sigma_y] = 2i sigma_z",
       (commutator(s.x, s.y) - 2.0 * kI * s.z).cwiseAbs().maxCoeff()},
  };
  PauliCheck out;
  out.max_defect = -1.0;
  for (const auto& [name, defect] : relations) {
    if (defect > out.max_defect) {
      out.max_defect = defect;
      out.worst_relation = name;
    }
  }
  out.ok = out.max_defect <= tol;
  return out;
}

}  // namespace qfb
