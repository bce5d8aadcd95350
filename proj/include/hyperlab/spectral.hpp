#ifndef HYPERLAB_SPECTRAL_HPP_
#define HYPERLAB_SPECTRAL_HPP_

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hyperlab/automaton.hpp"
#include "hyperlab/linalg.hpp"

namespace hyperlab {

// 0/1 adjacency on the counting vertices (vertex 0 discarded); row 0 is the
// start vertex.
Matrix transition_matrix(const Automaton& aut);

struct ComponentDecomposition {
  // Strongly connected components in topological order: a component only
  // reaches components listed after it.
  std::vector<std::vector<int>> components;
  std::vector<int> component_of;
  std::vector<bool> trivial;  // singleton without a self-loop
  std::vector<int> periods;   // 0 for trivial components
  // reaches[c][d]: a nonempty path leads from component c into component d.
  std::vector<std::vector<bool>> reaches;
};

ComponentDecomposition scc_decomposition(const Matrix& a);

Matrix submatrix(const Matrix& a, const std::vector<int>& vertices);

struct PerronData {
  double radius = 0.0;
  Vector right;  // positive, sums to 1
  Vector left;   // positive, left.dot(right) = 1
  int iterations = 0;
};

// Perron root and vectors of an irreducible nonnegative block, by power
// iteration on I + B with Collatz-Wielandt stopping at relative gap tol.
PerronData perron(const Matrix& block, double tol = 1e-12);

// gcd of cycle lengths of an irreducible block.
int period(const Matrix& block);

struct GrowthRate {
  double lambda = 0.0;
  std::vector<double> radii;  // per component, 0 for trivial ones
};

// Throws NoGrowth when every component is trivial.
GrowthRate growth_rate(const Matrix& a, const ComponentDecomposition& decomp,
                       double tol = 1e-12);

struct MaximalComponents {
  std::vector<int> indices;
  bool disjoint = true;
};

MaximalComponents maximal_components(const ComponentDecomposition& decomp,
                                     const GrowthRate& growth, double tol = 1e-9);

struct ParryMeasure {
  std::vector<int> vertices;  // counting-vertex indices of the component
  Matrix kernel;
  Vector stationary;
  int period = 1;
  double radius = 0.0;
  Vector right;
  Vector left;

  int local_index(int vertex) const;  // -1 when absent
  double entropy() const;
};

ParryMeasure parry_measure(const Matrix& a, const std::vector<int>& component,
                           double tol = 1e-12);

// Chain on the edges of a component: (v1,v2) -> (v2,v3) with probability
// P(v2,v3); stationary law pi(v1) P(v1,v2).
struct EdgeChain {
  std::vector<std::pair<int, int>> edges;
  Matrix kernel;
  Vector stationary;
  int period = 1;
};

EdgeChain edge_chain(const ParryMeasure& parry);

struct LimitVectors {
  double lambda = 0.0;
  int p_common = 1;
  Matrix a_infinity;  // lim (A^p / lambda^p)^n
  Vector p;           // A_inf 1
  Vector u;           // e_*^T A_inf
  Vector q;           // lambda-harmonic: A q = lambda q
  int squarings = 0;
};

LimitVectors limit_vectors(const Matrix& a, double lambda, int p_common, double tol = 1e-12);

// lcm of the periods of the maximal components.
int common_period(const ComponentDecomposition& decomp, const MaximalComponents& maximal);

struct SpectralReport {
  Matrix a;
  ComponentDecomposition decomposition;
  GrowthRate growth;
  MaximalComponents maximal;
  int p_common = 1;
  std::vector<ParryMeasure> parry;  // one per maximal component
  std::optional<LimitVectors> limits;
  double pure_growth_min = 0.0;  // min / max of #S_n lambda^-n, n in [5, 30]
  double pure_growth_max = 0.0;
  bool has_growth() const { return growth.lambda > 1.0 + 1e-9; }
};

// Full analysis. Limit vectors are only computed when lambda > 1 and the
// maximal components are disjoint.
SpectralReport analyze(const Automaton& aut);
std::string report_json(const Automaton& aut, const SpectralReport& report);

// Finite law on vertex paths of one fixed length (length = number of edges).
struct PathMeasure {
  int length = 0;
  std::map<std::vector<int>, double> weights;

  double total() const;
};

double tv_distance(const PathMeasure& m1, const PathMeasure& m2);

// Measures on paths from the start vertex compared in the CLT argument.
// Support sizes beyond max_support raise SupportTooLarge.
inline constexpr std::size_t kDefaultMaxSupport = 4'000'000;

// Uniform law on the n-sphere, as paths from *.
PathMeasure uniform_sphere_measure(const Matrix& a, int n,
                                   std::size_t max_support = kDefaultMaxSupport);
// mu_r on length-r paths from *.
PathMeasure mu_r_measure(const Matrix& a, const LimitVectors& lv, int r,
                         std::size_t max_support = kDefaultMaxSupport);
// mu_{np+r}: mu_r on the first r steps, uniform continuation afterwards.
PathMeasure mu_measure(const Matrix& a, const LimitVectors& lv, int n, int r,
                       std::size_t max_support = kDefaultMaxSupport);
// pi_{kp} on length-kp paths from any vertex: u_{w0} p_{wkp} / (lambda^{kp} p_*).
PathMeasure pi_measure(const Matrix& a, const LimitVectors& lv, int length,
                       std::size_t max_support = kDefaultMaxSupport);
// tilde tau^c_{np} on middle segments of length np - 2p floor(c log n).
PathMeasure tilde_tau_measure(const Matrix& a, const LimitVectors& lv, double c, int n,
                              std::size_t max_support = kDefaultMaxSupport);

struct CltMeasures {
  PathMeasure pi_kp;
  PathMeasure mu_r;
  PathMeasure tilde_tau;
};

CltMeasures clt_measures(const Matrix& a, const LimitVectors& lv, int k, int r, double c,
                         int n, std::size_t max_support = kDefaultMaxSupport);

// floor(c log n), the length of the outer blocks in units of p.
int outer_blocks(double c, int n);

// The same total-variation distances computed by grouping paths on their
// endpoints, which is exact and avoids enumerating supports.
double tv_tau_mu_grouped(const Matrix& a, const LimitVectors& lv, int n, int r);
// Returns nullopt when np - 2p floor(c log n) < 0.
std::optional<double> tv_pi_tilde_tau_grouped(const Matrix& a, const LimitVectors& lv,
                                              double c, int n);

}  // namespace hyperlab

#endif  // HYPERLAB_SPECTRAL_HPP_
