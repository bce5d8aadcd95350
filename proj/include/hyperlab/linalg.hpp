#ifndef HYPERLAB_LINALG_HPP_
#define HYPERLAB_LINALG_HPP_

#include <vector>

#include <Eigen/Dense>

namespace hyperlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, stopping once
// the off-diagonal Frobenius mass drops below 1e-12 of the total. Returned in
// descending order.
std::vector<double> symmetric_eigenvalues(Matrix a);

// Singular values in descending order. d = 2 uses the closed form from
// tr(M^T M) and det M; larger d diagonalises M^T M.
std::vector<double> singular_values(const Matrix& m);

double spectral_norm(const Matrix& m);

// A matrix stored as exp(log_scale) * unit with the spectral norm of unit
// kept inside [0.5, 2]. Rescaling is by powers of two so it is exact in
// floating point; only log_scale accumulates rounding.
class ScaledMatrix {
 public:
  ScaledMatrix() = default;
  explicit ScaledMatrix(Matrix m, double log_scale = 0.0);

  static ScaledMatrix identity(int dimension);

  const Matrix& unit() const { return unit_; }
  double log_scale() const { return log_scale_; }
  int dimension() const { return static_cast<int>(unit_.rows()); }

  // exp(log_scale) * unit; overflows for long products.
  Matrix value() const;

  // this <- this * m
  void right_multiply(const Matrix& m);
  // this <- m * this
  void left_multiply(const Matrix& m);

  // Moves the largest power of two out of unit regardless of its norm.
  void renormalize();

  // When false, products are never rescaled (for testing the rescaling).
  void set_auto_rescale(bool on) { auto_rescale_ = on; }

 private:
  void rescale_if_needed();

  Matrix unit_;
  double log_scale_ = 0.0;
  bool auto_rescale_ = true;
};

double log_operator_norm(const ScaledMatrix& m);

// Descending log singular values of the represented matrix.
std::vector<double> cartan_vector(const ScaledMatrix& m);

// Sum of the k largest log singular values (log of the norm on the k-th
// exterior power).
double log_exterior_norm(const ScaledMatrix& m, int k);

// log |det| of the represented matrix.
double log_abs_det(const ScaledMatrix& m);

// Hyperbolic distance d(g i, i) in the upper half-plane for g in SL(2, R).
double displacement_h2(const ScaledMatrix& m);

}  // namespace hyperlab

#endif  // HYPERLAB_LINALG_HPP_
