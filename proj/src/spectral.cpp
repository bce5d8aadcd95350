#include "hyperlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <queue>

#include "hyperlab/error.hpp"
#include "json.hpp"

namespace hyperlab {

Matrix transition_matrix(const Automaton& aut) {
  const int n = aut.counting_size();
  Matrix a = Matrix::Zero(n, n);
  for (int v = 0; v < n; ++v) {
    for (const auto& [u, l] : aut.successors(v)) {
      (void)l;
      a(v, u) = 1.0;
    }
  }
  return a;
}

Matrix submatrix(const Matrix& a, const std::vector<int>& vertices) {
  const auto k = static_cast<Eigen::Index>(vertices.size());
  Matrix out(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      out(i, j) = a(vertices[static_cast<std::size_t>(i)], vertices[static_cast<std::size_t>(j)]);
    }
  }
  return out;
}

ComponentDecomposition scc_decomposition(const Matrix& a) {
  const int n = static_cast<int>(a.rows());
  std::vector<int> index(static_cast<std::size_t>(n), -1);
  std::vector<int> low(static_cast<std::size_t>(n), 0);
  std::vector<bool> on_stack(static_cast<std::size_t>(n), false);
  std::vector<int> stack;
  std::vector<std::vector<int>> found;
  int counter = 0;

  std::function<void(int)> strongconnect = [&](int v) {
    const auto sv = static_cast<std::size_t>(v);
    index[sv] = low[sv] = counter++;
    stack.push_back(v);
    on_stack[sv] = true;
    for (int w = 0; w < n; ++w) {
      if (a(v, w) == 0.0) continue;
      const auto sw = static_cast<std::size_t>(w);
      if (index[sw] < 0) {
        strongconnect(w);
        low[sv] = std::min(low[sv], low[sw]);
      } else if (on_stack[sw]) {
        low[sv] = std::min(low[sv], index[sw]);
      }
    }
    if (low[sv] == index[sv]) {
      std::vector<int> comp;
      int w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[static_cast<std::size_t>(w)] = false;
        comp.push_back(w);
      } while (w != v);
      std::sort(comp.begin(), comp.end());
      found.push_back(std::move(comp));
    }
  };
  for (int v = 0; v < n; ++v) {
    if (index[static_cast<std::size_t>(v)] < 0) strongconnect(v);
  }

  // Tarjan emits sinks first.
  std::reverse(found.begin(), found.end());
  ComponentDecomposition d;
  d.components = std::move(found);
  const std::size_t m = d.components.size();
  d.component_of.assign(static_cast<std::size_t>(n), -1);
  for (std::size_t c = 0; c < m; ++c) {
    for (int v : d.components[c]) d.component_of[static_cast<std::size_t>(v)] = static_cast<int>(c);
  }
  d.trivial.resize(m);
  d.periods.resize(m);
  for (std::size_t c = 0; c < m; ++c) {
    const auto& comp = d.components[c];
    d.trivial[c] = comp.size() == 1 && a(comp[0], comp[0]) == 0.0;
    d.periods[c] = d.trivial[c] ? 0 : period(submatrix(a, comp));
  }
  d.reaches.assign(m, std::vector<bool>(m, false));
  for (std::size_t c = m; c-- > 0;) {
    for (int v : d.components[c]) {
      for (int w = 0; w < n; ++w) {
        if (a(v, w) == 0.0) continue;
        const auto e = static_cast<std::size_t>(d.component_of[static_cast<std::size_t>(w)]);
        if (e == c) {
          d.reaches[c][c] = true;
          continue;
        }
        d.reaches[c][e] = true;
        for (std::size_t f = 0; f < m; ++f) {
          if (d.reaches[e][f]) d.reaches[c][f] = true;
        }
      }
    }
  }
  return d;
}

int period(const Matrix& block) {
  const int n = static_cast<int>(block.rows());
  if (n == 0) return 0;
  std::vector<int> level(static_cast<std::size_t>(n), -1);
  std::queue<int> queue;
  level[0] = 0;
  queue.push(0);
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop();
    for (int w = 0; w < n; ++w) {
      if (block(v, w) != 0.0 && level[static_cast<std::size_t>(w)] < 0) {
        level[static_cast<std::size_t>(w)] = level[static_cast<std::size_t>(v)] + 1;
        queue.push(w);
      }
    }
  }
  int g = 0;
  for (int v = 0; v < n; ++v) {
    for (int w = 0; w < n; ++w) {
      if (block(v, w) == 0.0) continue;
      if (level[static_cast<std::size_t>(v)] < 0 || level[static_cast<std::size_t>(w)] < 0) {
        throw Error(ErrorCode::NotIrreducible, "block is not strongly connected");
      }
      g = std::gcd(g, std::abs(level[static_cast<std::size_t>(v)] + 1 -
                               level[static_cast<std::size_t>(w)]));
    }
  }
  return g;
}

namespace {

Vector power_vector(const Matrix& m, double tol, double& radius, int& iterations) {
  const Eigen::Index n = m.rows();
  Vector x = Vector::Constant(n, 1.0 / static_cast<double>(n));
  const Matrix shifted = m + Matrix::Identity(n, n);
  for (int it = 1; it <= 100000; ++it) {
    Vector y = shifted * x;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double ratio = y(i) / x(i);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    x = y / y.sum();
    if (hi - lo <= tol * hi) {
      iterations = it;
      radius = 0.5 * (lo + hi) - 1.0;
      return x;
    }
  }
  throw Error(ErrorCode::NonConvergence, "power iteration did not converge");
}

}  // namespace

PerronData perron(const Matrix& block, double tol) {
  if (block.rows() == 0) throw Error(ErrorCode::InvalidArgument, "empty block");
  if ((block.array() < 0.0).any()) {
    throw Error(ErrorCode::InvalidArgument, "block must be nonnegative");
  }
  PerronData out;
  double radius_t = 0.0;
  int it_t = 0;
  out.right = power_vector(block, tol, out.radius, out.iterations);
  out.left = power_vector(block.transpose(), tol, radius_t, it_t);
  if ((out.right.array() <= 0.0).any() || (out.left.array() <= 0.0).any()) {
    throw Error(ErrorCode::NotIrreducible, "Perron vector has zero entries");
  }
  // Two-sided Rayleigh quotient: error quadratic in the vector errors.
  out.radius = out.left.dot(block * out.right) / out.left.dot(out.right);
  out.left /= out.left.dot(out.right);
  out.iterations = std::max(out.iterations, it_t);
  return out;
}

GrowthRate growth_rate(const Matrix& a, const ComponentDecomposition& decomp, double tol) {
  GrowthRate g;
  bool any = false;
  for (std::size_t c = 0; c < decomp.components.size(); ++c) {
    if (decomp.trivial[c]) {
      g.radii.push_back(0.0);
      continue;
    }
    any = true;
    const double r = perron(submatrix(a, decomp.components[c]), tol).radius;
    g.radii.push_back(r);
    g.lambda = std::max(g.lambda, r);
  }
  if (!any) throw Error(ErrorCode::NoGrowth, "no nontrivial component");
  return g;
}

MaximalComponents maximal_components(const ComponentDecomposition& decomp,
                                     const GrowthRate& growth, double tol) {
  MaximalComponents out;
  for (std::size_t c = 0; c < decomp.components.size(); ++c) {
    if (!decomp.trivial[c] && growth.radii[c] >= growth.lambda * (1.0 - tol)) {
      out.indices.push_back(static_cast<int>(c));
    }
  }
  for (int c : out.indices) {
    for (int d : out.indices) {
      if (c != d && decomp.reaches[static_cast<std::size_t>(c)][static_cast<std::size_t>(d)]) {
        out.disjoint = false;
      }
    }
  }
  return out;
}

int common_period(const ComponentDecomposition& decomp, const MaximalComponents& maximal) {
  int p = 1;
  for (int c : maximal.indices) p = std::lcm(p, decomp.periods[static_cast<std::size_t>(c)]);
  return p;
}

int ParryMeasure::local_index(int vertex) const {
  auto it = std::find(vertices.begin(), vertices.end(), vertex);
  return it == vertices.end() ? -1 : static_cast<int>(it - vertices.begin());
}

double ParryMeasure::entropy() const {
  double h = 0.0;
  for (Eigen::Index i = 0; i < kernel.rows(); ++i) {
    for (Eigen::Index j = 0; j < kernel.cols(); ++j) {
      const double p = kernel(i, j);
      if (p > 0.0) h -= stationary(i) * p * std::log(p);
    }
  }
  return h;
}

ParryMeasure parry_measure(const Matrix& a, const std::vector<int>& component, double tol) {
  ParryMeasure m;
  m.vertices = component;
  const Matrix block = submatrix(a, component);
  if (block.rows() == 1 && block(0, 0) == 0.0) {
    throw Error(ErrorCode::NotIrreducible, "trivial component has no Parry measure");
  }
  const PerronData pd = perron(block, tol);
  m.radius = pd.radius;
  m.right = pd.right;
  m.left = pd.left;
  m.period = period(block);
  const Eigen::Index n = block.rows();
  m.kernel = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (block(i, j) != 0.0) m.kernel(i, j) = block(i, j) * pd.right(j) / (pd.radius * pd.right(i));
    }
    m.kernel.row(i) /= m.kernel.row(i).sum();
  }
  m.stationary = pd.left.cwiseProduct(pd.right);
  m.stationary /= m.stationary.sum();
  // Polish against the renormalised kernel: solve pi (P - I) = 0 with one
  // equation replaced by sum(pi) = 1.
  Matrix system = m.kernel.transpose() - Matrix::Identity(n, n);
  system.row(n - 1).setOnes();
  Vector rhs = Vector::Zero(n);
  rhs(n - 1) = 1.0;
  const Vector polished = system.fullPivLu().solve(rhs);
  if (polished.allFinite() && (polished - m.stationary).cwiseAbs().maxCoeff() < 1e-8) {
    m.stationary = polished;
  }
  return m;
}

EdgeChain edge_chain(const ParryMeasure& parry) {
  EdgeChain e;
  const Eigen::Index n = parry.kernel.rows();
  std::vector<std::pair<int, int>> local;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (parry.kernel(i, j) > 0.0) local.emplace_back(static_cast<int>(i), static_cast<int>(j));
    }
  }
  const auto m = static_cast<Eigen::Index>(local.size());
  e.kernel = Matrix::Zero(m, m);
  e.stationary = Vector::Zero(m);
  for (Eigen::Index s = 0; s < m; ++s) {
    const auto [i, j] = local[static_cast<std::size_t>(s)];
    e.stationary(s) = parry.stationary(i) * parry.kernel(i, j);
    for (Eigen::Index t = 0; t < m; ++t) {
      const auto [k, l] = local[static_cast<std::size_t>(t)];
      if (k == j) e.kernel(s, t) = parry.kernel(k, l);
    }
  }
  for (const auto& [i, j] : local) {
    e.edges.emplace_back(parry.vertices[static_cast<std::size_t>(i)],
                         parry.vertices[static_cast<std::size_t>(j)]);
  }
  e.period = parry.period;
  return e;
}

LimitVectors limit_vectors(const Matrix& a, double lambda, int p_common, double tol) {
  if (p_common < 1) throw Error(ErrorCode::InvalidArgument, "p_common must be >= 1");
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be positive");
  LimitVectors lv;
  lv.lambda = lambda;
  lv.p_common = p_common;
  const Eigen::Index n = a.rows();
  Matrix step = a / lambda;
  Matrix m = Matrix::Identity(n, n);
  for (int i = 0; i < p_common; ++i) m = m * step;
  double previous = std::numeric_limits<double>::infinity();
  bool converged = false;
  for (int it = 1; it <= 64; ++it) {
    Matrix next = m * m;
    if (!next.allFinite()) break;
    const double scale = std::max(1.0, next.cwiseAbs().maxCoeff());
    const double change = (next - m).cwiseAbs().maxCoeff() / scale;
    m = std::move(next);
    lv.squarings = it;
    if (change < tol) {
      converged = true;
      break;
    }
    // A plateau above tol means lambda or p_common is wrong.
    if (it > 12 && change >= 0.5 * previous) break;
    previous = change;
  }
  if (!converged) {
    throw Error(ErrorCode::NonConvergence, "A^p / lambda^p powers do not converge");
  }
  lv.a_infinity = m;
  const Vector one = Vector::Ones(n);
  lv.p = m * one;
  lv.u = m.row(0).transpose();
  lv.q = Vector::Zero(n);
  Vector ar1 = one;
  for (int r = 0; r < p_common; ++r) {
    lv.q += std::pow(lambda, -r) * (m * ar1);
    ar1 = a * ar1;
  }
  lv.q /= static_cast<double>(p_common);
  return lv;
}

namespace {

std::vector<double> sphere_counts_double(const Matrix& a, int depth) {
  Vector c = Vector::Ones(a.rows());
  std::vector<double> out{1.0};
  for (int n = 1; n <= depth; ++n) {
    c = a * c;
    out.push_back(c(0));
  }
  return out;
}

}  // namespace

SpectralReport analyze(const Automaton& aut) {
  SpectralReport r;
  r.a = transition_matrix(aut);
  r.decomposition = scc_decomposition(r.a);
  r.growth = growth_rate(r.a, r.decomposition);
  r.maximal = maximal_components(r.decomposition, r.growth);
  r.p_common = common_period(r.decomposition, r.maximal);
  for (int c : r.maximal.indices) {
    r.parry.push_back(parry_measure(r.a, r.decomposition.components[static_cast<std::size_t>(c)]));
  }
  const std::vector<double> counts = sphere_counts_double(r.a, 30);
  r.pure_growth_min = std::numeric_limits<double>::infinity();
  for (int n = 5; n <= 30; ++n) {
    const double x = counts[static_cast<std::size_t>(n)] * std::pow(r.growth.lambda, -n);
    r.pure_growth_min = std::min(r.pure_growth_min, x);
    r.pure_growth_max = std::max(r.pure_growth_max, x);
  }
  if (r.has_growth() && r.maximal.disjoint) {
    r.limits = limit_vectors(r.a, r.growth.lambda, r.p_common);
  }
  return r;
}

std::string report_json(const Automaton& aut, const SpectralReport& r) {
  nlohmann::ordered_json doc;
  auto names = [&](const std::vector<int>& vs) {
    std::vector<std::string> out;
    for (int v : vs) out.push_back(aut.name(v));
    return out;
  };
  auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  doc["lambda"] = r.growth.lambda;
  doc["has_growth"] = r.has_growth();
  nlohmann::ordered_json comps = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < r.decomposition.components.size(); ++c) {
    nlohmann::ordered_json j;
    j["vertices"] = names(r.decomposition.components[c]);
    j["trivial"] = static_cast<bool>(r.decomposition.trivial[c]);
    j["period"] = r.decomposition.periods[c];
    j["radius"] = r.growth.radii[c];
    j["maximal"] = std::find(r.maximal.indices.begin(), r.maximal.indices.end(),
                             static_cast<int>(c)) != r.maximal.indices.end();
    comps.push_back(j);
  }
  doc["components"] = comps;
  doc["maximal_disjoint"] = r.maximal.disjoint;
  doc["p_common"] = r.p_common;
  doc["pure_growth_constants"] = {r.pure_growth_min, r.pure_growth_max};
  nlohmann::ordered_json parry = nlohmann::ordered_json::array();
  for (const ParryMeasure& m : r.parry) {
    nlohmann::ordered_json j;
    j["vertices"] = names(m.vertices);
    j["radius"] = m.radius;
    j["period"] = m.period;
    j["stationary"] = vec(m.stationary);
    j["entropy"] = m.entropy();
    parry.push_back(j);
  }
  doc["parry"] = parry;
  if (r.limits) {
    nlohmann::ordered_json j;
    j["p_common"] = r.limits->p_common;
    j["p"] = vec(r.limits->p);
    j["u"] = vec(r.limits->u);
    j["q"] = vec(r.limits->q);
    j["vertices"] = names([&] {
      std::vector<int> all(static_cast<std::size_t>(aut.counting_size()));
      std::iota(all.begin(), all.end(), 0);
      return all;
    }());
    doc["limit_vectors"] = j;
  }
  return doc.dump(2) + "\n";
}

double PathMeasure::total() const {
  double s = 0.0;
  for (const auto& [path, w] : weights) s += w;
  return s;
}

double tv_distance(const PathMeasure& m1, const PathMeasure& m2) {
  if (m1.length != m2.length) throw Error(ErrorCode::LengthMismatch, "path lengths differ");
  double sum = 0.0;
  auto it1 = m1.weights.begin();
  auto it2 = m2.weights.begin();
  while (it1 != m1.weights.end() || it2 != m2.weights.end()) {
    if (it2 == m2.weights.end() || (it1 != m1.weights.end() && it1->first < it2->first)) {
      sum += std::abs(it1->second);
      ++it1;
    } else if (it1 == m1.weights.end() || it2->first < it1->first) {
      sum += std::abs(it2->second);
      ++it2;
    } else {
      sum += std::abs(it1->second - it2->second);
      ++it1;
      ++it2;
    }
  }
  return std::min(1.0, 0.5 * sum);
}

namespace {

// Calls visit(path) for every length-len path starting at one of starts.
template <typename Visit>
void for_each_path(const Matrix& a, const std::vector<int>& starts, int len,
                   std::size_t max_support, Visit visit) {
  const int n = static_cast<int>(a.rows());
  std::vector<std::vector<int>> succ(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    for (int w = 0; w < n; ++w) {
      if (a(v, w) != 0.0) succ[static_cast<std::size_t>(v)].push_back(w);
    }
  }
  // Count first so that oversized supports fail before any work.
  Vector c = Vector::Ones(n);
  for (int i = 0; i < len; ++i) c = a * c;
  double total = 0.0;
  for (int s : starts) total += c(s);
  if (total > static_cast<double>(max_support)) {
    throw Error(ErrorCode::SupportTooLarge,
                "support of " + std::to_string(static_cast<long long>(total)) + " paths");
  }
  std::vector<int> path;
  std::function<void()> rec = [&]() {
    if (static_cast<int>(path.size()) == len + 1) {
      visit(path);
      return;
    }
    for (int w : succ[static_cast<std::size_t>(path.back())]) {
      path.push_back(w);
      rec();
      path.pop_back();
    }
  };
  for (int s : starts) {
    path.assign(1, s);
    rec();
  }
}

Vector power_times_ones(const Matrix& a, int k) {
  Vector c = Vector::Ones(a.rows());
  for (int i = 0; i < k; ++i) c = a * c;
  return c;
}

}  // namespace

PathMeasure uniform_sphere_measure(const Matrix& a, int n, std::size_t max_support) {
  PathMeasure m;
  m.length = n;
  const double total = power_times_ones(a, n)(0);
  for_each_path(a, {0}, n, max_support,
                [&](const std::vector<int>& p) { m.weights.emplace(p, 1.0 / total); });
  return m;
}

PathMeasure mu_r_measure(const Matrix& a, const LimitVectors& lv, int r, std::size_t max_support) {
  PathMeasure m;
  m.length = r;
  Vector ar = Vector::Zero(a.rows());
  ar(0) = 1.0;
  for (int i = 0; i < r; ++i) ar = a.transpose() * ar;
  const double denom = ar.dot(lv.p);
  for_each_path(a, {0}, r, max_support, [&](const std::vector<int>& p) {
    const double w = lv.p(p.back()) / denom;
    if (w > 0.0) m.weights.emplace(p, w);
  });
  return m;
}

PathMeasure mu_measure(const Matrix& a, const LimitVectors& lv, int n, int r,
                       std::size_t max_support) {
  const int p = lv.p_common;
  PathMeasure m;
  m.length = n * p + r;
  const PathMeasure head = mu_r_measure(a, lv, r, max_support);
  const Vector cont = power_times_ones(a, n * p);
  for (const auto& [h, w] : head.weights) {
    const double each = w / cont(h.back());
    for_each_path(a, {h.back()}, n * p, max_support, [&](const std::vector<int>& tail) {
      std::vector<int> full = h;
      full.insert(full.end(), tail.begin() + 1, tail.end());
      m.weights.emplace(std::move(full), each);
    });
  }
  return m;
}

PathMeasure pi_measure(const Matrix& a, const LimitVectors& lv, int length,
                       std::size_t max_support) {
  PathMeasure m;
  m.length = length;
  std::vector<int> starts;
  for (int v = 0; v < a.rows(); ++v) {
    if (lv.u(v) > 0.0) starts.push_back(v);
  }
  const double scale = std::pow(lv.lambda, -length) / lv.p(0);
  for_each_path(a, starts, length, max_support, [&](const std::vector<int>& p) {
    const double w = lv.u(p.front()) * lv.p(p.back()) * scale;
    if (w > 0.0) m.weights.emplace(p, w);
  });
  return m;
}

int outer_blocks(double c, int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
  return static_cast<int>(std::floor(c * std::log(static_cast<double>(n))));
}

PathMeasure tilde_tau_measure(const Matrix& a, const LimitVectors& lv, double c, int n,
                              std::size_t max_support) {
  const int p = lv.p_common;
  const int outer = p * outer_blocks(c, n);
  const int middle = n * p - 2 * outer;
  if (middle < 0) throw Error(ErrorCode::InvalidArgument, "outer blocks exceed path length");
  Vector head = Vector::Zero(a.rows());
  head(0) = 1.0;
  for (int i = 0; i < outer; ++i) head = a.transpose() * head;
  const Vector tail = power_times_ones(a, outer);
  const double total = power_times_ones(a, n * p)(0);
  std::vector<int> starts;
  for (int v = 0; v < a.rows(); ++v) {
    if (head(v) > 0.0) starts.push_back(v);
  }
  PathMeasure m;
  m.length = middle;
  for_each_path(a, starts, middle, max_support, [&](const std::vector<int>& path) {
    const double w = head(path.front()) * tail(path.back()) / total;
    if (w > 0.0) m.weights.emplace(path, w);
  });
  return m;
}

CltMeasures clt_measures(const Matrix& a, const LimitVectors& lv, int k, int r, double c, int n,
                         std::size_t max_support) {
  CltMeasures out;
  out.pi_kp = pi_measure(a, lv, k * lv.p_common, max_support);
  out.mu_r = mu_r_measure(a, lv, r, max_support);
  out.tilde_tau = tilde_tau_measure(a, lv, c, n, max_support);
  return out;
}

double tv_tau_mu_grouped(const Matrix& a, const LimitVectors& lv, int n, int r) {
  const int np = n * lv.p_common;
  // Normalised powers keep large n finite.
  Vector cont = Vector::Ones(a.rows());
  for (int i = 0; i < np; ++i) cont = (a * cont) / lv.lambda;
  Vector ar = Vector::Zero(a.rows());
  ar(0) = 1.0;
  for (int i = 0; i < r; ++i) ar = a.transpose() * ar;
  const double total = ar.dot(cont);  // #S_{np+r} / lambda^{np}
  const double denom = ar.dot(lv.p);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (ar(i) == 0.0) continue;
    sum += ar(i) * std::abs(lv.p(i) / denom - cont(i) / total);
  }
  return 0.5 * sum;
}

std::optional<double> tv_pi_tilde_tau_grouped(const Matrix& a, const LimitVectors& lv, double c,
                                              int n) {
  const int p = lv.p_common;
  const int outer = p * outer_blocks(c, n);
  const int middle = n * p - 2 * outer;
  if (middle < 0) return std::nullopt;
  const double lambda = lv.lambda;
  const Eigen::Index size = a.rows();
  Vector head = Vector::Zero(size);
  head(0) = 1.0;
  for (int i = 0; i < outer; ++i) head = (a.transpose() * head) / lambda;
  Vector tail = Vector::Ones(size);
  for (int i = 0; i < outer; ++i) tail = (a * tail) / lambda;
  Vector all = Vector::Ones(size);
  for (int i = 0; i < n * p; ++i) all = (a * all) / lambda;
  const double z = all(0);
  Matrix mid = Matrix::Identity(size, size);
  for (int i = 0; i < middle; ++i) mid = (mid * a) / lambda;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < size; ++i) {
    for (Eigen::Index j = 0; j < size; ++j) {
      if (mid(i, j) == 0.0) continue;
      sum += mid(i, j) * std::abs(lv.u(i) * lv.p(j) / lv.p(0) - head(i) * tail(j) / z);
    }
  }
  return 0.5 * sum;
}

}  // namespace hyperlab
