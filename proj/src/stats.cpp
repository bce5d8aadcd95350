#include "hyperlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "hyperlab/error.hpp"

namespace hyperlab {

void RunningStats::add(double x) {
  if (n_ == 0) {
    min_ = max_ = x;
  } else {
    min_ = std::min(min_, x);
    max_ = std::max(max_, x);
  }
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

void RunningStats::merge(const RunningStats& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double delta = other.mean_ - mean_;
  const double total = na + nb;
  mean_ += delta * nb / total;
  m2_ += other.m2_ + delta * delta * na * nb / total;
  n_ += other.n_;
  min_ = std::min(min_, other.min_);
  max_ = std::max(max_, other.max_);
}

double RunningStats::variance() const {
  return n_ == 0 ? 0.0 : std::max(0.0, m2_ / static_cast<double>(n_));
}

double RunningStats::sample_variance() const {
  return n_ < 2 ? 0.0 : std::max(0.0, m2_ / static_cast<double>(n_ - 1));
}

double RunningStats::standard_error() const {
  return n_ < 2 ? 0.0 : std::sqrt(sample_variance() / static_cast<double>(n_));
}

double normal_cdf(double x, double mean, double sd) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::numbers::sqrt2));
}

double ks_distance_normal(std::vector<double> values, double mean, double sd) {
  if (values.empty()) throw Error(ErrorCode::InsufficientData, "no values");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < values.size()) {
    std::size_t j = i;
    while (j < values.size() && values[j] == values[i]) ++j;
    const double f = normal_cdf(values[i], mean, sd);
    d = std::max(d, std::abs(static_cast<double>(i) / n - f));
    d = std::max(d, std::abs(static_cast<double>(j) / n - f));
    i = j;
  }
  return d;
}

double grid_distance_normal(std::vector<double> values, double sd, double half_width,
                            int grid_points) {
  if (values.empty()) throw Error(ErrorCode::InsufficientData, "no values");
  if (!(sd > 0.0)) throw Error(ErrorCode::SigmaZero, "sigma must be positive");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (int k = 0; k < grid_points; ++k) {
    const double t = -half_width + 2.0 * half_width * k / (grid_points - 1);
    const auto below = std::upper_bound(values.begin(), values.end(), t) - values.begin();
    d = std::max(d, std::abs(static_cast<double>(below) / n - normal_cdf(t, 0.0, sd)));
  }
  return d;
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

TwoSampleKs ks_two_sample(std::vector<double> x, std::vector<double> y) {
  if (x.empty() || y.empty()) throw Error(ErrorCode::InsufficientData, "empty sample");
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size());
  const double ny = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double t = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == t) ++i;
    while (j < y.size() && y[j] == t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  const double ne = nx * ny / (nx + ny);
  const double root = std::sqrt(ne);
  TwoSampleKs out;
  out.statistic = d;
  out.p_value = kolmogorov_survival((root + 0.12 + 0.11 / root) * d);
  return out;
}

std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::InsufficientData, "linear fit needs two or more points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit fit;
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = (sxx > 0.0 && syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

std::vector<double> least_squares(const std::vector<std::vector<double>>& design,
                                  const std::vector<double>& y) {
  if (design.empty() || design.size() != y.size()) {
    throw Error(ErrorCode::InsufficientData, "least squares needs matching rows");
  }
  const auto rows = static_cast<Eigen::Index>(design.size());
  const auto cols = static_cast<Eigen::Index>(design.front().size());
  if (rows < cols) throw Error(ErrorCode::InsufficientData, "fewer rows than unknowns");
  Eigen::MatrixXd a(rows, cols);
  Eigen::VectorXd b(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      a(i, j) = design[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    b(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);
  return {c.data(), c.data() + c.size()};
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::InsufficientData, "no values");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

double freedman_diaconis_width(std::vector<double> values) {
  if (values.size() < 2) return 1.0;
  const double iqr = quantile(values, 0.75) - quantile(values, 0.25);
  const double w = 2.0 * iqr * std::pow(static_cast<double>(values.size()), -1.0 / 3.0);
  return w > 0.0 ? w : 1.0;
}

Histogram make_histogram(const std::vector<double>& values, double lo, double width, int bins) {
  Histogram h;
  h.lo = lo;
  h.width = width;
  h.mass.assign(static_cast<std::size_t>(std::max(bins, 1)), 0.0);
  if (values.empty()) return h;
  const double each = 1.0 / static_cast<double>(values.size());
  for (double v : values) {
    long b = static_cast<long>(std::floor((v - lo) / width));
    b = std::clamp(b, 0L, static_cast<long>(h.mass.size()) - 1);
    h.mass[static_cast<std::size_t>(b)] += each;
  }
  return h;
}

double binomial_cdf(long k, long n, double p) {
  if (k < 0) return 0.0;
  if (k >= n) return 1.0;
  double sum = 0.0;
  for (long i = 0; i <= k; ++i) {
    const double log_term = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) +
                            i * std::log(p) + (n - i) * std::log1p(-p);
    sum += std::exp(log_term);
  }
  return std::min(1.0, sum);
}

}  // namespace hyperlab
