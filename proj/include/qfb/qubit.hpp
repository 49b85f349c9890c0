#pragma once

// Two-level algebra. Basis order is (|1>, |0>): row/column 0 is the excited
// state, so rho(0,0) is the excited population and rho(0,1) = <1|rho|0>.

#include <Eigen/Dense>

#include <complex>
#include <string>

namespace qfb {

template <typename Scalar>
using Matrix2c = Eigen::Matrix<std::complex<Scalar>, 2, 2>;
template <typename Scalar>
using Vector2c = Eigen::Matrix<std::complex<Scalar>, 2, 1>;

using cplx = std::complex<double>;
using Mat2 = Matrix2c<double>;
using Vec2 = Vector2c<double>;

inline constexpr cplx kI{0.0, 1.0};

template <typename Scalar = double>
Matrix2c<Scalar> sigma_x() {
  Matrix2c<Scalar> m;
  m << 0, 1, 1, 0;
  return m;
}

template <typename Scalar = double>
Matrix2c<Scalar> sigma_y() {
  using C = std::complex<Scalar>;
  Matrix2c<Scalar> m;
  m << C(0), C(0, -1), C(0, 1), C(0);
  return m;
}

template <typename Scalar = double>
Matrix2c<Scalar> sigma_z() {
  Matrix2c<Scalar> m;
  m << 1, 0, 0, -1;
  return m;
}

/// |0><1|, the lowering operator.
template <typename Scalar = double>
Matrix2c<Scalar> sigma_minus() {
  Matrix2c<Scalar> m;
  m << 0, 0, 1, 0;
  return m;
}

/// |1><0|, the raising operator.
template <typename Scalar = double>
Matrix2c<Scalar> sigma_plus() {
  Matrix2c<Scalar> m;
  m << 0, 1, 0, 0;
  return m;
}

template <typename A, typename B>
auto commutator(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  return (a * b - b * a).eval();
}

template <typename A, typename B>
auto anticommutator(const Eigen::MatrixBase<A>& a,
                    const Eigen::MatrixBase<B>& b) {
  return (a * b + b * a).eval();
}

/// max |m - m^dagger| over entries.
template <typename Derived>
double hermiticity_defect(const Eigen::MatrixBase<Derived>& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

/// Valid qubit state: Hermitian, unit trace and positive semidefinite within
/// the tolerances below. Construction validates; the value is immutable.
class DensityMatrix {
 public:
  static constexpr double kHermitianTol = 1e-12;
  static constexpr double kTraceTol = 1e-10;
  static constexpr double kPositivityTol = 1e-10;

  DensityMatrix();  // |0><0|
  explicit DensityMatrix(const Mat2& m);

  const Mat2& matrix() const noexcept { return m_; }
  cplx operator()(int r, int c) const { return m_(r, c); }
  double rho11() const noexcept { return m_(0, 0).real(); }
  cplx rho12() const noexcept { return m_(0, 1); }

 private:
  Mat2 m_;
};

/// eps1 * I + eps2 * (axis . sigma)
struct HermitianOp {
  double eps1 = 0.0;
  double eps2 = 0.0;
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
};

struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Eigen::Vector3d vec() const { return {x, y, z}; }
  double norm() const { return vec().norm(); }
};

/// Projector onto cos(alpha)|0> + sin(alpha)|1>.
DensityMatrix make_state(double alpha);

Mat2 realize(const HermitianOp& op);

/// Eigenpairs of a Hermitian 2x2 matrix, descending, eigenvectors as columns.
struct Eigen2 {
  Eigen::Vector2d values;
  Mat2 vectors;
};

Eigen2 eig2(const Mat2& m);

BlochVector to_bloch(const Mat2& m);
inline BlochVector to_bloch(const DensityMatrix& rho) {
  return to_bloch(rho.matrix());
}
DensityMatrix from_bloch(const BlochVector& b);

/// (I + r . sigma) / 2 without validation; the matrix may lie outside the
/// state space.
Mat2 bloch_matrix(const Eigen::Vector3d& r);

struct ValidationReport {
  double hermiticity_defect = 0.0;
  double trace_defect = 0.0;
  double min_eigenvalue = 0.0;

  bool hermitian() const {
    return hermiticity_defect <= DensityMatrix::kHermitianTol;
  }
  bool unit_trace() const { return trace_defect <= DensityMatrix::kTraceTol; }
  bool positive() const {
    return min_eigenvalue >= -DensityMatrix::kPositivityTol;
  }
  bool ok() const { return hermitian() && unit_trace() && positive(); }
  std::string describe() const;
};

ValidationReport validate(const Mat2& m);
inline ValidationReport validate(const DensityMatrix& rho) {
  return validate(rho.matrix());
}

/// Pauli matrices as a set so that the algebra check can be run against
/// deliberately corrupted inputs.
struct PauliSet {
  Mat2 x = sigma_x();
  Mat2 y = sigma_y();
  Mat2 z = sigma_z();
  Mat2 plus = sigma_plus();
  Mat2 minus = sigma_minus();
};

struct PauliCheck {
  double max_defect = 0.0;
  std::string worst_relation;
  bool ok = true;
};

/// sigma_i^2 = I, sigma_+ sigma_- = |1><1|, [sigma_x, sigma_y] = 2i sigma_z.
PauliCheck check_pauli_algebra(const PauliSet& s = {}, double tol = 1e-15);

}  // namespace qfb
