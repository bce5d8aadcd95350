#ifndef HYPERLAB_MARKOV_HPP_
#define HYPERLAB_MARKOV_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hyperlab/automaton.hpp"
#include "hyperlab/linalg.hpp"
#include "hyperlab/representation.hpp"
#include "hyperlab/rng.hpp"
#include "hyperlab/spectral.hpp"

namespace hyperlab {

// Markov chain on states 0..size()-1 with a row-stochastic kernel.
class FiniteChain {
 public:
  FiniteChain() = default;
  // Rows and the initial law must sum to 1 within 1e-12.
  FiniteChain(Matrix kernel, Vector initial, std::vector<std::string> names = {});

  int size() const { return static_cast<int>(kernel_.rows()); }
  const Matrix& kernel() const { return kernel_; }
  const Vector& initial() const { return initial_; }
  const std::vector<std::string>& names() const { return names_; }
  bool irreducible() const { return irreducible_; }
  // lcm of the periods of the closed classes; 1 means every class is aperiodic.
  int period() const { return period_; }
  // Stationary law of an irreducible chain (NotIrreducible otherwise).
  Vector stationary() const;

  int sample_initial(Rng& rng) const { return draw(initial_cdf_, rng); }
  int step(int state, Rng& rng) const {
    return draw(row_cdf_[static_cast<std::size_t>(state)], rng);
  }

 private:
  static int draw(const std::vector<double>& cdf, Rng& rng);

  Matrix kernel_;
  Vector initial_;
  std::vector<std::string> names_;
  bool irreducible_ = false;
  int period_ = 1;
  std::vector<std::vector<double>> row_cdf_;
  std::vector<double> initial_cdf_;
};

// Path chain on admissible length-p paths: P((x),(y)) = P(x_p,y_1) prod P(y_j,y_{j+1}).
// Its initial law is the law of the first p states of the original chain.
FiniteChain hat_chain(const FiniteChain& chain, int p);
// The length-p path behind each hat state, in the same order as hat_chain.
std::vector<std::vector<int>> hat_paths(const FiniteChain& chain, int p);

struct MarkovMatrixProcess {
  FiniteChain chain;
  std::vector<Matrix> images;  // X(state), all d x d and invertible

  int dimension() const { return images.empty() ? 0 : static_cast<int>(images[0].rows()); }
};

MarkovMatrixProcess make_process(FiniteChain chain, std::vector<Matrix> images);
// X_hat((x_1..x_p)) = X(x_p) ... X(x_1) on hat_chain(chain, p).
MarkovMatrixProcess hat_process(const MarkovMatrixProcess& proc, int p);
// Edge-chain process of a Parry measure with X((v1,v2)) = rho(label(v1,v2))^T,
// started from the stationary law.
MarkovMatrixProcess parry_product_process(const Automaton& aut, const ParryMeasure& parry,
                                          const LinearRepresentation& rep);
// States heads / tails with probability 1/2 each, images diag(4,1/4) and I.
MarkovMatrixProcess coin_diagonal_process();
MarkovMatrixProcess single_state_process(const Matrix& x);

struct Trajectory {
  int length = 0;
  std::vector<int> states;
  std::vector<double> log_norm;         // log ||M_k||, k = 1..length
  std::vector<double> log_norm_wedge2;  // log ||wedge^2 M_k||, empty when d = 1
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

Trajectory simulate(const MarkovMatrixProcess& proc, int n, std::uint64_t seed,
                    std::uint64_t stream = 0);
Trajectory simulate(const MarkovMatrixProcess& proc, int n, Rng& rng);

struct LyapunovSpectrum {
  std::vector<double> exponents;  // descending
  std::vector<double> errors;
  int n = 0;
  int trials = 0;
  double det_mean = 0.0;  // E_pi log|det X|, exact
};

LyapunovSpectrum lyapunov_spectrum(const MarkovMatrixProcess& proc, int n, int trials,
                                   std::uint64_t seed, int workers = 1);

// E_pi log|det X| under the stationary law.
double stationary_log_det(const MarkovMatrixProcess& proc);

struct GapRow {
  int n = 0;
  double mean = 0.0;
  double standard_error = 0.0;
  // Lower-tail frequencies at gap - eps for eps = 0.1 gap and 0.2 gap, where
  // gap is the mean at the largest n.
  double tail_10 = 0.0;
  double tail_20 = 0.0;
  std::optional<double> rate_10;  // (1/n) log tail, absent when the tail is 0
  std::optional<double> rate_20;
};

// Statistic (2 log||M_n|| - log||wedge^2 M_n||)/n.
std::vector<GapRow> simplicity_gap(const MarkovMatrixProcess& proc, const std::vector<int>& n_list,
                                   int trials, std::uint64_t seed, int workers = 1);

enum class ProcessFunctional { LogNorm, Displacement };

struct DeviationRow {
  int n = 0;
  std::uint64_t exceed = 0;
  std::uint64_t trials = 0;
  double frequency = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
  std::optional<double> rate;  // (1/n) log frequency
};

struct DeviationCurve {
  std::vector<DeviationRow> rows;
  double slope = 0.0;  // fit of log frequency on n over rows with positive counts
  bool nonnegative_slope = false;
};

// Frequency of |phi(M_n) - n lambda_ref| >= n eps.
DeviationCurve deviation_curve(const MarkovMatrixProcess& proc, ProcessFunctional functional,
                               double lambda_ref, double eps, const std::vector<int>& n_list,
                               int trials, std::uint64_t seed, int workers = 1);

struct BerryEsseenRow {
  int n = 0;
  double sup_distance = 0.0;
  double scaled = 0.0;  // sup_distance sqrt(n) / log n
};

// Throws SigmaZero unless sigma > 0.
std::vector<BerryEsseenRow> berry_esseen_curve(const MarkovMatrixProcess& proc, double lambda,
                                               double sigma, const std::vector<int>& n_list,
                                               int trials, std::uint64_t seed, int workers = 1);

// (log||M_n|| - n lambda)/sqrt(n) at each n of n_list for `trials` runs;
// result[i][t] belongs to n_list[i].
std::vector<std::vector<double>> normalized_endpoints(const MarkovMatrixProcess& proc,
                                                      double lambda,
                                                      const std::vector<int>& n_list, int trials,
                                                      std::uint64_t seed, int workers = 1);

// S_n(t) on grid_points equally spaced t in [0,1].
std::vector<double> wiener_path(const Trajectory& traj, double lambda, double sigma,
                                int grid_points = 101);
double wiener_value(const std::vector<double>& log_norm, double lambda, double sigma, double t);

struct LilRecord {
  int n = 0;
  double value = 0.0;
  double running_max = 0.0;
  double running_min = 0.0;
};

// Geometric checkpoints 16 = k_0 < k_1 < ... <= n with ratio `growth`.
std::vector<int> lil_checkpoints(int n, double growth = 1.2);
// (log||M_k|| - k lambda)/sqrt(2 sigma^2 k log log k) at checkpoints >= 16.
std::vector<LilRecord> lil_statistic(const std::vector<double>& log_norm, double lambda,
                                     double sigma, const std::vector<int>& checkpoints);

struct LilSummary {
  std::vector<double> final_max;  // running max at the last checkpoint, per trajectory
  std::vector<double> final_min;
  double fraction_in_band = 0.0;  // final max in [0.5, 1.5]
};

// Streams trajectories of length n, evaluating norms only at checkpoints.
LilSummary lil_experiment(const MarkovMatrixProcess& proc, double lambda, double sigma, int n,
                          int trajectories, std::uint64_t seed, int workers = 1,
                          double growth = 1.2);

struct ComponentEstimate {
  int component = 0;
  int parry_index = 0;
  double lambda = 0.0;
  double lambda_error = 0.0;
  double sigma2 = 0.0;
  double sigma2_error = 0.0;
};

struct ConsistencyReport {
  std::vector<ComponentEstimate> components;
  bool consistent = true;
  double worst_z = 0.0;
};

// Per maximal component, lambda from (log||M_n|| - log||M_{n/4}||)/(3n/4)
// and sigma^2 from the variance of log||M_n||/sqrt(n).
ConsistencyReport cross_component_consistency(const Automaton& aut,
                                              const LinearRepresentation& rep, int n, int trials,
                                              std::uint64_t seed, int workers = 1);

}  // namespace hyperlab

#endif  // HYPERLAB_MARKOV_HPP_
