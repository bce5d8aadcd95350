#include "hyperlab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "hyperlab/error.hpp"

namespace hyperlab {

std::vector<double> symmetric_eigenvalues(Matrix a) {
  const Eigen::Index n = a.rows();
  const double total = a.squaredNorm();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) off += 2.0 * a(i, j) * a(i, j);
    }
    if (off <= 1e-24 * total || off == 0.0) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = std::copysign(1.0, theta) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> values(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) values[static_cast<std::size_t>(i)] = a(i, i);
  std::sort(values.begin(), values.end(), std::greater<>());
  return values;
}

namespace {

void singular_values_2x2(double a, double b, double c, double d, double& s1,
                         double& s2) {
  const double t = a * a + b * b + c * c + d * d;
  const double det = std::abs(a * d - b * c);
  const double disc = std::sqrt(std::max(0.0, (t - 2.0 * det) * (t + 2.0 * det)));
  s1 = std::sqrt(0.5 * (t + disc));
  s2 = s1 > 0.0 ? det / s1 : 0.0;
}

}  // namespace

std::vector<double> singular_values(const Matrix& m) {
  if (m.rows() == 2 && m.cols() == 2) {
    double s1, s2;
    singular_values_2x2(m(0, 0), m(0, 1), m(1, 0), m(1, 1), s1, s2);
    return {s1, s2};
  }
  std::vector<double> ev = symmetric_eigenvalues(m.transpose() * m);
  for (double& x : ev) x = std::sqrt(std::max(0.0, x));
  return ev;
}

double spectral_norm(const Matrix& m) {
  if (m.rows() == 2 && m.cols() == 2) {
    double s1, s2;
    singular_values_2x2(m(0, 0), m(0, 1), m(1, 0), m(1, 1), s1, s2);
    return s1;
  }
  if (m.size() == 0) return 0.0;
  return singular_values(m).front();
}

ScaledMatrix::ScaledMatrix(Matrix m, double log_scale)
    : unit_(std::move(m)), log_scale_(log_scale) {
  if (unit_.rows() != unit_.cols()) {
    throw Error(ErrorCode::InvalidArgument, "ScaledMatrix needs a square matrix");
  }
  if (!unit_.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "ScaledMatrix entries must be finite");
  }
  rescale_if_needed();
}

ScaledMatrix ScaledMatrix::identity(int dimension) {
  return ScaledMatrix(Matrix::Identity(dimension, dimension));
}

Matrix ScaledMatrix::value() const { return std::exp(log_scale_) * unit_; }

void ScaledMatrix::right_multiply(const Matrix& m) {
  unit_ = unit_ * m;
  rescale_if_needed();
}

void ScaledMatrix::left_multiply(const Matrix& m) {
  unit_ = m * unit_;
  rescale_if_needed();
}

void ScaledMatrix::renormalize() {
  const double norm = spectral_norm(unit_);
  if (norm <= 0.0 || !std::isfinite(norm)) return;
  const long e = std::lround(std::log2(norm));
  if (e == 0) return;
  unit_ *= std::ldexp(1.0, static_cast<int>(-e));
  log_scale_ += static_cast<double>(e) * std::numbers::ln2;
}

void ScaledMatrix::rescale_if_needed() {
  if (!auto_rescale_) return;
  // Cheap Frobenius bounds first: ||M||_2 <= ||M||_F <= sqrt(d) ||M||_2.
  const double frob = unit_.norm();
  const double root_d = std::sqrt(static_cast<double>(unit_.rows()));
  if (frob <= 2.0 && frob >= 0.5 * root_d) return;
  const double norm = spectral_norm(unit_);
  if (norm >= 0.5 && norm <= 2.0) return;
  renormalize();
}

double log_operator_norm(const ScaledMatrix& m) {
  return m.log_scale() + std::log(spectral_norm(m.unit()));
}

std::vector<double> cartan_vector(const ScaledMatrix& m) {
  std::vector<double> sv = singular_values(m.unit());
  for (double& s : sv) s = m.log_scale() + std::log(s);
  return sv;
}

double log_exterior_norm(const ScaledMatrix& m, int k) {
  const std::vector<double> sv = singular_values(m.unit());
  double total = 0.0;
  for (int i = 0; i < k && i < static_cast<int>(sv.size()); ++i) {
    total += std::log(sv[static_cast<std::size_t>(i)]);
  }
  return total + k * m.log_scale();
}

double log_abs_det(const ScaledMatrix& m) {
  return m.dimension() * m.log_scale() + std::log(std::abs(m.unit().determinant()));
}

double displacement_h2(const ScaledMatrix& m) {
  if (m.dimension() != 2) {
    throw Error(ErrorCode::NotUnimodular, "displacement needs a 2x2 matrix");
  }
  // det(unit) carries absolute error ~ eps * ||unit||^2, so the tolerance is
  // relative to the scale of the entries for long, ill-conditioned products.
  const double det_unit = m.unit().determinant();
  const double target = std::exp(-2.0 * m.log_scale());
  const double slack = 1e-9 * std::max(target, m.unit().squaredNorm());
  if (std::abs(det_unit - target) > slack) {
    throw Error(ErrorCode::NotUnimodular, "determinant differs from 1");
  }
  // cosh d = (a^2 + b^2 + c^2 + d^2) / 2, evaluated in log space.
  const double log_x =
      2.0 * m.log_scale() + std::log(m.unit().squaredNorm()) - std::numbers::ln2;
  if (log_x < 20.0) {
    return std::acosh(std::max(1.0, std::exp(log_x)));
  }
  return log_x + std::log1p(std::sqrt(1.0 - std::exp(-2.0 * log_x)));
}

}  // namespace hyperlab
