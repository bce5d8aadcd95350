#ifndef HYPERLAB_BOUNDARY_HPP_
#define HYPERLAB_BOUNDARY_HPP_

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "hyperlab/automaton.hpp"
#include "hyperlab/representation.hpp"
#include "hyperlab/rng.hpp"
#include "hyperlab/spectral.hpp"

namespace hyperlab {

// lambda^-k q(x_k) / q(*) for an admissible vertex path (*, x_1, ..., x_k).
// Throws InadmissiblePrefix otherwise.
double ps_cylinder_mass(const Matrix& a, const LimitVectors& lv, const std::vector<int>& prefix);

struct Ray {
  std::vector<int> vertices;  // start vertex first
  Word word;
};

// h-transform chain P(v -> u) = A(v,u) q(u) / (lambda q(v)); its prefix law
// is the cylinder mass above.
class RaySampler {
 public:
  RaySampler(const Automaton& aut, const LimitVectors& lv);

  Ray sample(int length, Rng& rng) const;
  // Vertex path only (faster for long rays).
  std::vector<int> sample_vertices(int length, Rng& rng) const;
  double transition(int from, int to) const { return kernel_(from, to); }

 private:
  const Automaton* aut_;
  Matrix kernel_;
  std::vector<std::vector<std::pair<double, int>>> cdf_;
};

// nu_hat(sigma^-k [v]) / mu([v]) for v in the component of `parry`.
// Throws VertexNotMaximal.
double alpha_coefficient(const Matrix& a, const LimitVectors& lv, const ParryMeasure& parry,
                         int k, int v);

// Exact mass of the shadow {xi : <xi, g> > |g| - R} for tree-like oracles,
// summed over cylinders on which the Gromov product is already constant.
// Throws NotTreeLike for Dehn oracles.
double shadow_mass_tree(const Automaton& aut, const GroupOracle& oracle, const LimitVectors& lv,
                        const Word& g, double R);
// Same mass by summing all cylinders of the given depth, for validation.
double shadow_mass_brute(const Automaton& aut, const GroupOracle& oracle, const LimitVectors& lv,
                         const Word& g, double R, int depth);

struct QuasiconformalityReport {
  double min = 1.0;
  double max = 1.0;
  int elements = 0;
};

// Extremes of nu(O(g,R)) lambda^|g| over 1 <= |g| <= n_max (only g = id when
// n_max = 0).
QuasiconformalityReport quasiconformality_report(const Automaton& aut, const GroupOracle& oracle,
                                                 const LimitVectors& lv, int n_max, double R);

struct PsRegression {
  double tv_conditioned = 0.0;  // weights on |g| >= k, normalised
  double tv_ball = 0.0;         // weights on the whole ball, short elements kept in the total
};

// Finite-n measure sum_{|g| <= n} lambda^-|g| delta_g pushed to depth-k
// cylinders, compared with the closed-form cylinder masses.
PsRegression ps_regression(const Matrix& a, const LimitVectors& lv, int n, int k);

struct RayOptions {
  int length = 1000;
  int trials = 100;
  double lambda = 0.0;
  double sigma = 0.0;
  std::vector<double> eps;
  std::vector<int> checkpoints;  // default: geometric from 16 plus length
  std::vector<double> marginal_times{0.25, 0.5, 1.0};
  std::uint64_t seed = 0;
  int workers = 1;
};

struct RayStatReport {
  std::vector<int> checkpoints;
  std::vector<double> mean_rate;         // mean of phi(xi_n)/n per checkpoint
  std::vector<double> median_abs_error;  // median |phi(xi_n)/n - lambda|
  std::vector<std::vector<double>> deviation;  // [eps][checkpoint]
  bool clt_available = false;
  std::vector<double> terminal_normalized;      // (phi - n lambda)/(sigma sqrt n)
  double terminal_ks = 0.0;                     // against N(0,1)
  std::vector<std::vector<double>> marginals;   // [ray][time]
  std::vector<std::vector<double>> marginal_cov;
  std::vector<double> lil_final_max;
  std::vector<double> lil_final_min;
  std::vector<int> entry_times;
  std::vector<double> entry_survival;  // P(entry > k), k = 0, 1, ...
  double entry_ratio = 0.0;
  double entry_r2 = 1.0;
  bool entry_degenerate = false;  // every ray enters at step 1
};

RayStatReport ray_statistics(const Automaton& aut, const SpectralReport& report,
                             const SubadditiveFunctional& f, const RayOptions& options);

}  // namespace hyperlab

#endif  // HYPERLAB_BOUNDARY_HPP_
