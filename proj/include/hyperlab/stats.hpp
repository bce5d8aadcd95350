#ifndef HYPERLAB_STATS_HPP_
#define HYPERLAB_STATS_HPP_

#include <cstdint>
#include <utility>
#include <vector>

namespace hyperlab {

// Streaming mean/variance (Welford) with an associative merge.
class RunningStats {
 public:
  void add(double x);
  void merge(const RunningStats& other);

  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;         // population
  double sample_variance() const;  // n - 1 denominator
  double standard_error() const;   // of the mean
  double min() const { return min_; }
  double max() const { return max_; }

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  double min_ = 0.0;
  double max_ = 0.0;
};

double normal_cdf(double x, double mean = 0.0, double sd = 1.0);

// sup_t |F_n(t) - Phi((t - mean)/sd)| over the empirical law of values.
double ks_distance_normal(std::vector<double> values, double mean, double sd);

// sup_t |F_n(t) - Phi(t/sd)| evaluated on an equally spaced grid of
// grid_points points spanning [-half_width, half_width].
double grid_distance_normal(std::vector<double> values, double sd, double half_width,
                            int grid_points);

struct TwoSampleKs {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Asymptotic Kolmogorov p-value with Stephens' small-sample correction.
TwoSampleKs ks_two_sample(std::vector<double> x, std::vector<double> y);
double kolmogorov_survival(double lambda);

std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t trials,
                                          double z = 1.96);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// Least squares for y = sum_k c_k f_k(x) with the given design rows.
std::vector<double> least_squares(const std::vector<std::vector<double>>& design,
                                  const std::vector<double>& y);

struct Histogram {
  double lo = 0.0;
  double width = 1.0;
  std::vector<double> mass;  // sums to 1 when filled from data
};

// Bin width 2 IQR n^(-1/3); falls back to 1 for degenerate data.
double freedman_diaconis_width(std::vector<double> values);
Histogram make_histogram(const std::vector<double>& values, double lo, double width, int bins);

// P(X <= k) for X ~ Binomial(n, p).
double binomial_cdf(long k, long n, double p);

double quantile(std::vector<double> values, double q);

}  // namespace hyperlab

#endif  // HYPERLAB_STATS_HPP_
