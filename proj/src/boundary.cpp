#include "hyperlab/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "hyperlab/error.hpp"
#include "hyperlab/markov.hpp"
#include "hyperlab/parallel.hpp"
#include "hyperlab/stats.hpp"

namespace hyperlab {

double ps_cylinder_mass(const Matrix& a, const LimitVectors& lv, const std::vector<int>& prefix) {
  if (prefix.empty() || prefix.front() != 0) {
    throw Error(ErrorCode::InadmissiblePrefix, "prefix must start at the start vertex");
  }
  const auto size = static_cast<int>(a.rows());
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (prefix[i] < 0 || prefix[i] >= size) {
      throw Error(ErrorCode::InadmissiblePrefix, "vertex out of range or the 0 vertex");
    }
    if (i > 0 && a(prefix[i - 1], prefix[i]) <= 0.0) {
      throw Error(ErrorCode::InadmissiblePrefix, "no edge " + std::to_string(prefix[i - 1]) +
                                                     " -> " + std::to_string(prefix[i]));
    }
  }
  const int k = static_cast<int>(prefix.size()) - 1;
  return std::pow(lv.lambda, -k) * lv.q(prefix.back()) / lv.q(0);
}

RaySampler::RaySampler(const Automaton& aut, const LimitVectors& lv) : aut_(&aut) {
  const Matrix a = transition_matrix(aut);
  const auto size = a.rows();
  if (lv.q.size() != size) throw Error(ErrorCode::InvalidArgument, "limit vectors size mismatch");
  kernel_ = Matrix::Zero(size, size);
  cdf_.resize(static_cast<std::size_t>(size));
  for (Eigen::Index v = 0; v < size; ++v) {
    if (lv.q(v) <= 0.0) continue;
    double total = 0.0;
    for (Eigen::Index u = 0; u < size; ++u) {
      if (a(v, u) > 0.0 && lv.q(u) > 0.0) {
        kernel_(v, u) = a(v, u) * lv.q(u) / (lv.lambda * lv.q(v));
        total += kernel_(v, u);
      }
    }
    if (total <= 0.0) continue;
    kernel_.row(v) /= total;
    double acc = 0.0;
    auto& row = cdf_[static_cast<std::size_t>(v)];
    for (Eigen::Index u = 0; u < size; ++u) {
      if (kernel_(v, u) > 0.0) {
        acc += kernel_(v, u);
        row.emplace_back(acc, static_cast<int>(u));
      }
    }
    row.back().first = 1.0;
  }
  if (cdf_[0].empty()) throw Error(ErrorCode::NoGrowth, "start vertex carries no boundary mass");
}

std::vector<int> RaySampler::sample_vertices(int length, Rng& rng) const {
  if (length < 1) throw Error(ErrorCode::InvalidArgument, "ray length must be positive");
  std::vector<int> path{aut_->start()};
  path.reserve(static_cast<std::size_t>(length) + 1);
  int v = aut_->start();
  for (int k = 0; k < length; ++k) {
    const auto& row = cdf_[static_cast<std::size_t>(v)];
    const double u = rng.uniform();
    auto it = std::upper_bound(row.begin(), row.end(), u,
                               [](double x, const std::pair<double, int>& e) { return x < e.first; });
    if (it == row.end()) --it;
    v = it->second;
    path.push_back(v);
  }
  return path;
}

Ray RaySampler::sample(int length, Rng& rng) const {
  Ray ray;
  ray.vertices = sample_vertices(length, rng);
  ray.word = aut_->decode(ray.vertices);
  return ray;
}

double alpha_coefficient(const Matrix& a, const LimitVectors& lv, const ParryMeasure& parry, int k,
                         int v) {
  const int local = parry.local_index(v);
  if (local < 0) throw Error(ErrorCode::VertexNotMaximal, "vertex outside the component");
  if (k < 0) throw Error(ErrorCode::InvalidArgument, "k must be nonnegative");
  if (k == 0) return 0.0;
  // Sum of cylinder masses over all length-k paths from * ending at v.
  Vector reach = Vector::Zero(a.rows());
  reach(0) = 1.0;
  for (int i = 0; i < k; ++i) reach = (a.transpose() * reach) / lv.lambda;
  const double mass = reach(v) * lv.q(v) / lv.q(0);
  return mass / parry.stationary(local);
}

namespace {

std::size_t common_prefix(const Word& x, const Word& y) {
  std::size_t c = 0;
  while (c < x.size() && c < y.size() && x[c] == y[c]) ++c;
  return c;
}

void require_tree(const Automaton& aut, const GroupOracle& oracle) {
  if (!oracle.tree_like()) {
    throw Error(ErrorCode::NotTreeLike, "shadows are only exact for tree-like oracles");
  }
  if (!(aut.alphabet() == oracle.alphabet())) {
    throw Error(ErrorCode::LabelMismatch, "automaton and oracle alphabets differ");
  }
}

}  // namespace

double shadow_mass_tree(const Automaton& aut, const GroupOracle& oracle, const LimitVectors& lv,
                        const Word& g, double R) {
  require_tree(aut, oracle);
  if (!(R > 0.0)) throw Error(ErrorCode::InvalidArgument, "R must be positive");
  const Word gn = oracle.reduce(g);
  const auto length = gn.size();
  const double threshold = 2.0 * (static_cast<double>(length) - R);
  const std::size_t settle = static_cast<std::size_t>(oracle.max_syllable_length()) + 1;
  const double q0 = lv.q(0);

  double total = 0.0;
  Word word;
  // Once the ray has left g's normal form by more than one syllable, every
  // extension has the same Gromov product with g.
  auto visit = [&](auto&& self, int v, double scale) -> void {
    const std::size_t c = common_prefix(word, gn);
    if (c == length) {
      total += scale * lv.q(v) / q0;  // the ray passes through g
      return;
    }
    if (word.size() >= c + settle) {
      if (static_cast<double>(oracle.gromov_product_doubled(word, gn)) > threshold) {
        total += scale * lv.q(v) / q0;
      }
      return;
    }
    for (const auto& [u, label] : aut.successors(v)) {
      if (lv.q(u) <= 0.0) continue;
      word.push_back(label);
      self(self, u, scale / lv.lambda);
      word.pop_back();
    }
  };
  visit(visit, aut.start(), 1.0);
  return std::min(total, 1.0);
}

double shadow_mass_brute(const Automaton& aut, const GroupOracle& oracle, const LimitVectors& lv,
                         const Word& g, double R, int depth) {
  require_tree(aut, oracle);
  const Word gn = oracle.reduce(g);
  const double threshold = 2.0 * (static_cast<double>(gn.size()) - R);
  double total = 0.0;
  const double scale = std::pow(lv.lambda, -depth) / lv.q(0);
  {
    Word word;
    auto visit = [&](auto&& self, int v, int remaining) -> void {
      if (remaining == 0) {
        if (static_cast<double>(oracle.gromov_product_doubled(word, gn)) > threshold) {
          total += scale * lv.q(v);
        }
        return;
      }
      for (const auto& [u, label] : aut.successors(v)) {
        word.push_back(label);
        self(self, u, remaining - 1);
        word.pop_back();
      }
    };
    visit(visit, aut.start(), depth);
  }
  return std::min(total, 1.0);
}

QuasiconformalityReport quasiconformality_report(const Automaton& aut, const GroupOracle& oracle,
                                                 const LimitVectors& lv, int n_max, double R) {
  require_tree(aut, oracle);
  if (n_max < 0) throw Error(ErrorCode::InvalidArgument, "n_max must be nonnegative");
  QuasiconformalityReport out;
  if (n_max == 0) {
    const double m = shadow_mass_tree(aut, oracle, lv, Word{}, R);
    out.min = out.max = m;
    out.elements = 1;
    return out;
  }
  out.min = std::numeric_limits<double>::infinity();
  out.max = -std::numeric_limits<double>::infinity();
  Word word;
  auto visit = [&](auto&& self, int v) -> void {
    if (!word.empty()) {
      const double m = shadow_mass_tree(aut, oracle, lv, word, R) *
                       std::pow(lv.lambda, static_cast<double>(word.size()));
      out.min = std::min(out.min, m);
      out.max = std::max(out.max, m);
      ++out.elements;
    }
    if (static_cast<int>(word.size()) == n_max) return;
    for (const auto& [u, label] : aut.successors(v)) {
      word.push_back(label);
      self(self, u);
      word.pop_back();
    }
  };
  visit(visit, aut.start());
  return out;
}

PsRegression ps_regression(const Matrix& a, const LimitVectors& lv, int n, int k) {
  if (k < 0 || n < k) throw Error(ErrorCode::InvalidArgument, "need 0 <= k <= n");
  const double lambda = lv.lambda;
  // tails[j] = (A / lambda)^j 1.
  std::vector<Vector> tails{Vector::Ones(a.rows())};
  for (int j = 1; j <= n; ++j) tails.push_back((a * tails.back()) / lambda);
  Vector suffix = Vector::Zero(a.rows());  // sum_{j=0}^{n-k} tails[j]
  for (int j = 0; j <= n - k; ++j) suffix += tails[static_cast<std::size_t>(j)];
  double ball = 0.0;
  for (int m = 0; m <= n; ++m) ball += tails[static_cast<std::size_t>(m)](0);

  // Cylinder weights lambda^-k suffix(v) over length-k paths from *.
  std::vector<std::pair<double, double>> cylinders;  // (weight, closed form)
  const double scale = std::pow(lambda, -k);
  auto visit = [&](auto&& self, int v, int remaining) -> void {
    if (remaining == 0) {
      cylinders.emplace_back(scale * suffix(v), scale * lv.q(v) / lv.q(0));
      return;
    }
    for (Eigen::Index u = 0; u < a.rows(); ++u) {
      if (a(v, u) > 0.0) self(self, static_cast<int>(u), remaining - 1);
    }
  };
  visit(visit, 0, k);
  double conditioned = 0.0;
  for (const auto& c : cylinders) conditioned += c.first;
  PsRegression out;
  for (const auto& [w, closed] : cylinders) {
    out.tv_conditioned += std::abs(w / conditioned - closed);
    out.tv_ball += std::abs(w / ball - closed);
  }
  out.tv_conditioned *= 0.5;
  out.tv_ball *= 0.5;
  return out;
}

RayStatReport ray_statistics(const Automaton& aut, const SpectralReport& report,
                             const SubadditiveFunctional& f, const RayOptions& options) {
  if (!report.limits) throw Error(ErrorCode::NoGrowth, "no limit vectors for this automaton");
  if (options.length < 1 || options.trials < 1) {
    throw Error(ErrorCode::InsufficientData, "need positive length and trials");
  }
  const LimitVectors& lv = *report.limits;
  const int n = options.length;

  std::vector<int> checkpoints = options.checkpoints;
  if (checkpoints.empty()) checkpoints = lil_checkpoints(n);
  if (checkpoints.empty()) checkpoints.push_back(n);
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
  checkpoints.erase(std::remove_if(checkpoints.begin(), checkpoints.end(),
                                   [&](int k) { return k < 1 || k > n; }),
                    checkpoints.end());
  if (checkpoints.empty() || checkpoints.back() != n) checkpoints.push_back(n);

  std::vector<int> marginal_steps;
  for (double t : options.marginal_times) {
    marginal_steps.push_back(std::clamp(static_cast<int>(std::lround(t * n)), 0, n));
  }
  std::set<int> wanted(checkpoints.begin(), checkpoints.end());
  wanted.insert(marginal_steps.begin(), marginal_steps.end());

  std::vector<bool> maximal(static_cast<std::size_t>(report.a.rows()), false);
  for (int c : report.maximal.indices) {
    for (int v : report.decomposition.components[static_cast<std::size_t>(c)]) {
      maximal[static_cast<std::size_t>(v)] = true;
    }
  }

  const RaySampler sampler(aut, lv);
  const auto trials = static_cast<std::size_t>(options.trials);
  std::vector<std::map<int, double>> values(trials);
  std::vector<int> entry(trials, n + 1);
  parallel_for(trials, options.workers, [&](std::size_t t) {
    Rng rng(options.seed, t);
    const auto path = sampler.sample_vertices(n, rng);
    IncrementalEvaluator eval(f);
    auto& out = values[t];
    if (wanted.count(0)) out[0] = eval.value();
    for (int k = 1; k <= n; ++k) {
      const int from = path[static_cast<std::size_t>(k - 1)];
      const int to = path[static_cast<std::size_t>(k)];
      if (entry[t] > n && maximal[static_cast<std::size_t>(to)]) entry[t] = k;
      eval.push(*aut.label(from, to));
      if (wanted.count(k)) out[k] = eval.value();
    }
  });

  RayStatReport rep;
  rep.checkpoints = checkpoints;
  rep.deviation.assign(options.eps.size(), {});
  for (int k : checkpoints) {
    RunningStats rate;
    std::vector<double> abs_err;
    std::vector<std::size_t> exceed(options.eps.size(), 0);
    for (const auto& v : values) {
      const double r = v.at(k) / k;
      rate.add(r);
      const double e = std::abs(r - options.lambda);
      abs_err.push_back(e);
      for (std::size_t i = 0; i < options.eps.size(); ++i) {
        if (e > options.eps[i]) ++exceed[i];
      }
    }
    rep.mean_rate.push_back(rate.mean());
    rep.median_abs_error.push_back(quantile(abs_err, 0.5));
    for (std::size_t i = 0; i < options.eps.size(); ++i) {
      rep.deviation[i].push_back(static_cast<double>(exceed[i]) / options.trials);
    }
  }

  rep.clt_available = options.sigma > 0.0;
  if (rep.clt_available) {
    const double sigma = options.sigma;
    const double root = std::sqrt(static_cast<double>(n));
    for (const auto& v : values) {
      rep.terminal_normalized.push_back((v.at(n) - n * options.lambda) / (sigma * root));
      std::vector<double> m;
      for (int k : marginal_steps) m.push_back((v.at(k) - k * options.lambda) / (sigma * root));
      rep.marginals.push_back(std::move(m));
      double hi = -std::numeric_limits<double>::infinity();
      double lo = std::numeric_limits<double>::infinity();
      for (int k : checkpoints) {
        if (k < 16) continue;
        const double denom = std::sqrt(2.0 * sigma * sigma * k * std::log(std::log(double(k))));
        const double s = (v.at(k) - k * options.lambda) / denom;
        hi = std::max(hi, s);
        lo = std::min(lo, s);
      }
      rep.lil_final_max.push_back(hi);
      rep.lil_final_min.push_back(lo);
    }
    rep.terminal_ks = ks_distance_normal(rep.terminal_normalized, 0.0, 1.0);
    const std::size_t times = marginal_steps.size();
    std::vector<double> mean(times, 0.0);
    for (const auto& m : rep.marginals) {
      for (std::size_t i = 0; i < times; ++i) mean[i] += m[i] / options.trials;
    }
    rep.marginal_cov.assign(times, std::vector<double>(times, 0.0));
    for (const auto& m : rep.marginals) {
      for (std::size_t i = 0; i < times; ++i) {
        for (std::size_t j = 0; j < times; ++j) {
          rep.marginal_cov[i][j] += (m[i] - mean[i]) * (m[j] - mean[j]);
        }
      }
    }
    const double denom = options.trials > 1 ? options.trials - 1.0 : 1.0;
    for (auto& row : rep.marginal_cov) {
      for (double& x : row) x /= denom;
    }
  }

  rep.entry_times = entry;
  const int last = *std::max_element(entry.begin(), entry.end());
  for (int k = 0; k <= last; ++k) {
    const auto above = std::count_if(entry.begin(), entry.end(), [&](int e) { return e > k; });
    rep.entry_survival.push_back(static_cast<double>(above) / options.trials);
  }
  rep.entry_degenerate = rep.entry_survival.size() < 2 || rep.entry_survival[1] == 0.0;
  if (!rep.entry_degenerate) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t k = 1; k < rep.entry_survival.size(); ++k) {
      if (rep.entry_survival[k] <= 0.0) break;
      xs.push_back(static_cast<double>(k));
      ys.push_back(std::log(rep.entry_survival[k]));
    }
    if (xs.size() >= 2) {
      const LinearFit fit = linear_fit(xs, ys);
      rep.entry_ratio = std::exp(fit.slope);
      rep.entry_r2 = fit.r2;
    }
  }
  return rep;
}

}  // namespace hyperlab
