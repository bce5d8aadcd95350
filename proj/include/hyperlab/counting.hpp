#ifndef HYPERLAB_COUNTING_HPP_
#define HYPERLAB_COUNTING_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "hyperlab/automaton.hpp"
#include "hyperlab/representation.hpp"
#include "hyperlab/rng.hpp"
#include "hyperlab/spectral.hpp"
#include "hyperlab/stats.hpp"

namespace hyperlab {

using BigInt = boost::multiprecision::cpp_int;

// FNV-1a of the canonical automaton serialisation.
std::uint64_t automaton_hash(const Automaton& aut);

// c_v(m): number of length-m paths from counting vertex v avoiding 0.
class CountTable {
 public:
  CountTable() = default;
  CountTable(const Automaton& aut, int n_max);

  int depth() const { return static_cast<int>(counts_.size()) - 1; }
  int vertices() const { return counts_.empty() ? 0 : static_cast<int>(counts_[0].size()); }
  std::uint64_t hash() const { return hash_; }

  const BigInt& count(int v, int m) const;
  const BigInt& sphere_size(int n) const { return count(0, n); }
  // Largest depth for which every count fits in 63 bits.
  int small_depth() const { return static_cast<int>(small_.size()) - 1; }
  std::uint64_t small_count(int v, int m) const {
    return small_[static_cast<std::size_t>(m)][static_cast<std::size_t>(v)];
  }

  // Header line "# hyperlab-counts <hash> <depth> <vertices>" followed by
  // "vertex m count" lines in decimal.
  std::string serialize() const;
  // Throws ParseError on malformed text or a hash that does not match aut.
  static CountTable deserialize(const Automaton& aut, std::string_view text);
  // Reuses <dir>/counts-<hash>.txt when it is deep enough, else builds and
  // writes it. The result is identical either way.
  static CountTable load_or_build(const Automaton& aut, int n_max,
                                  const std::filesystem::path& dir);

 private:
  void fill_small();

  std::uint64_t hash_ = 0;
  std::vector<std::vector<BigInt>> counts_;          // [m][v]
  std::vector<std::vector<std::uint64_t>> small_;    // prefix of counts_
};

CountTable build_count_table(const Automaton& aut, int n_max);

inline constexpr int kExactLimit = 16;

// Every length-n path from the start, in lexicographic successor order, as
// (decoded word, end vertex).
void enumerate_sphere(const Automaton& aut, int n,
                      const std::function<void(const Word&, int)>& visit,
                      int limit = kExactLimit);
std::vector<Word> sphere_words(const Automaton& aut, int n, int limit = kExactLimit);

// Exact uniform draw from S_n by unranking a uniform integer below #S_n.
Word sample_sphere_uniform(const Automaton& aut, const CountTable& table, int n, Rng& rng);
// Same draw returning the vertex path (start vertex included).
std::vector<int> sample_sphere_path(const Automaton& aut, const CountTable& table, int n,
                                    Rng& rng);
// Uniform integer in [0, bound), bound > 0.
BigInt uniform_below(const BigInt& bound, Rng& rng);

struct SphereMode {
  bool exact = true;
  std::uint64_t samples = 0;  // Monte Carlo only
  std::uint64_t seed = 0;

  static SphereMode exact_mode() { return {}; }
  static SphereMode monte_carlo(std::uint64_t samples, std::uint64_t seed) {
    return {false, samples, seed};
  }
};

struct HistogramSpec {
  double lo = 0.0;
  double width = 1.0;
  int bins = 1;
};

struct SphereOptions {
  double lambda_ref = 0.0;
  std::vector<double> eps;
  // Fixed bins for (phi - n lambda_ref)/sqrt(n); Freedman-Diaconis on this
  // law when absent.
  std::optional<HistogramSpec> histogram;
  bool keep_values = false;  // keep the normalised values
  bool cartan = false;       // sphere means of the Cartan vector / n
  int workers = 1;
  int exact_limit = kExactLimit;
};

struct SphereStatistics {
  int n = 0;
  BigInt count;              // #S_n
  std::uint64_t evaluated = 0;
  double mean = 0.0;         // of phi(g)
  double variance = 0.0;
  double standard_error = 0.0;  // of the mean; 0 in exact mode
  std::vector<std::pair<double, double>> deviation_fractions;  // (eps, fraction)
  Histogram histogram;
  SphereMode mode;
  double lambda_ref = 0.0;
  std::vector<double> normalized;   // when keep_values
  std::vector<double> cartan_mean;  // when cartan
};

SphereStatistics spherical_statistics(const Automaton& aut, const SubadditiveFunctional& f,
                                      int n, const SphereMode& mode,
                                      const SphereOptions& options,
                                      const CountTable* table = nullptr);

// Exact sphere means of the Cartan vector divided by n.
std::vector<double> cartan_sphere_mean(const Automaton& aut, const LinearRepresentation& rep,
                                       int n, int workers = 1);

struct LimitSchedule {
  std::vector<int> exact_depths;
  std::vector<std::pair<int, std::uint64_t>> monte_carlo;  // (depth, samples)
  std::uint64_t seed = 0;
  int workers = 1;
};

struct MonteCarloCheck {
  int n = 0;
  std::uint64_t samples = 0;
  double mean = 0.0;
  double standard_error = 0.0;
  double predicted = 0.0;  // extrapolated mean at n
  double z = 0.0;          // (mean - predicted) / standard_error
};

struct LimitEstimates {
  double lambda = 0.0;
  double sigma2 = 0.0;
  std::string method = "counting_extrapolation";
  double standard_error = 0.0;
  double sigma2_error = 0.0;
  // m_n ~ lambda n + intercept + curvature / n on the exact depths.
  double intercept = 0.0;
  double curvature = 0.0;
  std::vector<int> depths;
  std::vector<double> means;
  std::vector<double> variances;
  std::vector<MonteCarloCheck> checks;
};

// Throws InsufficientData with fewer than 3 exact depths.
LimitEstimates estimate_limits(const Automaton& aut, const SubadditiveFunctional& f,
                               const LimitSchedule& schedule);

struct TauMuRow {
  int r = 0;
  int n = 0;
  double tv = 0.0;
  std::optional<double> tv_exhaustive;  // when the supports are small
};

struct ApproxRow {
  double c = 0.0;
  int n = 0;
  int outer = 0;        // floor(c log n)
  int inner_length = 0; // np - 2p outer
  double tv = 0.0;
  std::optional<double> tv_exhaustive;
};

struct CltSuiteReport {
  int p = 1;
  double lambda = 0.0;
  std::vector<TauMuRow> tau_mu;
  std::map<int, double> geometric_ratio;  // per residue r
  std::vector<ApproxRow> approx;
  std::map<double, double> power_exponent;  // per c, slope of log tv on log n
};

// Both total-variation tables. Exhaustive path measures are built alongside
// the grouped formulas whenever their supports stay below max_support.
CltSuiteReport clt_comparison_suite(const Automaton& aut, const std::vector<int>& n_list,
                                    int p_common, const std::vector<double>& c_list,
                                    const std::vector<int>& r_list,
                                    std::size_t max_support = 200'000);

}  // namespace hyperlab

#endif  // HYPERLAB_COUNTING_HPP_
