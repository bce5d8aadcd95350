#include "hyperlab/counting.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "hyperlab/error.hpp"
#include "hyperlab/parallel.hpp"

namespace hyperlab {

std::uint64_t automaton_hash(const Automaton& aut) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : aut.to_json()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

CountTable::CountTable(const Automaton& aut, int n_max) : hash_(automaton_hash(aut)) {
  if (n_max < 0) throw Error(ErrorCode::InvalidArgument, "n_max must be nonnegative");
  const auto size = static_cast<std::size_t>(aut.counting_size());
  counts_.assign(static_cast<std::size_t>(n_max) + 1, std::vector<BigInt>(size));
  for (auto& c : counts_[0]) c = 1;
  for (int m = 1; m <= n_max; ++m) {
    const auto& prev = counts_[static_cast<std::size_t>(m - 1)];
    auto& cur = counts_[static_cast<std::size_t>(m)];
    for (std::size_t v = 0; v < size; ++v) {
      BigInt sum = 0;
      for (const auto& [u, label] : aut.successors(static_cast<int>(v))) {
        sum += prev[static_cast<std::size_t>(u)];
      }
      cur[v] = sum;
    }
  }
  fill_small();
}

void CountTable::fill_small() {
  small_.clear();
  const BigInt cap = BigInt(std::numeric_limits<std::int64_t>::max());
  for (const auto& row : counts_) {
    if (std::any_of(row.begin(), row.end(), [&](const BigInt& c) { return c > cap; })) break;
    std::vector<std::uint64_t> small;
    small.reserve(row.size());
    for (const auto& c : row) small.push_back(static_cast<std::uint64_t>(c));
    small_.push_back(std::move(small));
  }
}

const BigInt& CountTable::count(int v, int m) const {
  if (m < 0 || m > depth()) {
    throw Error(ErrorCode::DepthTooLarge, "count table depth " + std::to_string(depth()) +
                                              " does not reach " + std::to_string(m));
  }
  if (v < 0 || v >= vertices()) throw Error(ErrorCode::InvalidArgument, "vertex out of range");
  return counts_[static_cast<std::size_t>(m)][static_cast<std::size_t>(v)];
}

CountTable build_count_table(const Automaton& aut, int n_max) { return CountTable(aut, n_max); }

std::string CountTable::serialize() const {
  std::ostringstream out;
  out << "# hyperlab-counts " << hash_ << ' ' << depth() << ' ' << vertices() << '\n';
  for (int m = 0; m <= depth(); ++m) {
    for (int v = 0; v < vertices(); ++v) {
      out << v << ' ' << m << ' ' << counts_[static_cast<std::size_t>(m)][static_cast<std::size_t>(v)]
          << '\n';
    }
  }
  return out.str();
}

CountTable CountTable::deserialize(const Automaton& aut, std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string hashmark;
  std::string tag;
  std::uint64_t hash = 0;
  int depth = 0;
  int vertices = 0;
  if (!(in >> hashmark >> tag >> hash >> depth >> vertices) || hashmark != "#" ||
      tag != "hyperlab-counts" || depth < 0 || vertices <= 0) {
    throw Error(ErrorCode::ParseError, "bad count table header");
  }
  if (hash != automaton_hash(aut) || vertices != aut.counting_size()) {
    throw Error(ErrorCode::ParseError, "count table belongs to a different automaton");
  }
  CountTable table;
  table.hash_ = hash;
  table.counts_.assign(static_cast<std::size_t>(depth) + 1,
                       std::vector<BigInt>(static_cast<std::size_t>(vertices)));
  for (int m = 0; m <= depth; ++m) {
    for (int v = 0; v < vertices; ++v) {
      int vv = 0;
      int mm = 0;
      std::string digits;
      if (!(in >> vv >> mm >> digits) || vv != v || mm != m ||
          digits.find_first_not_of("0123456789") != std::string::npos) {
        throw Error(ErrorCode::ParseError, "bad count table line");
      }
      table.counts_[static_cast<std::size_t>(m)][static_cast<std::size_t>(v)] = BigInt(digits);
    }
  }
  table.fill_small();
  return table;
}

CountTable CountTable::load_or_build(const Automaton& aut, int n_max,
                                     const std::filesystem::path& dir) {
  char name[64];
  std::snprintf(name, sizeof(name), "counts-%016llx.txt",
                static_cast<unsigned long long>(automaton_hash(aut)));
  const auto path = dir / name;
  if (std::filesystem::exists(path)) {
    std::ifstream in(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
      CountTable cached = deserialize(aut, buffer.str());
      if (cached.depth() >= n_max) {
        cached.counts_.resize(static_cast<std::size_t>(n_max) + 1);
        if (cached.small_.size() > cached.counts_.size()) cached.small_.resize(cached.counts_.size());
        return cached;
      }
    } catch (const Error&) {
      // Stale or damaged cache: rebuild below.
    }
  }
  CountTable table(aut, n_max);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    out << table.serialize();
  }
  std::filesystem::rename(tmp, path, ec);
  return table;
}

namespace {

// Depth-first walk over all length-`remaining` paths from `from`, reporting
// each pushed label, each pop and each leaf.
template <class Push, class Pop, class Leaf>
void walk_paths(const Automaton& aut, int from, int remaining, Push&& push, Pop&& pop,
                Leaf&& leaf) {
  if (remaining == 0) {
    leaf(from);
    return;
  }
  struct Frame {
    int vertex;
    std::size_t next;
  };
  std::vector<Frame> stack;
  stack.reserve(static_cast<std::size_t>(remaining) + 1);
  stack.push_back({from, 0});
  while (!stack.empty()) {
    Frame& top = stack.back();
    const auto& succ = aut.successors(top.vertex);
    if (top.next >= succ.size()) {
      stack.pop_back();
      if (!stack.empty()) pop();
      continue;
    }
    const auto [u, label] = succ[top.next++];
    push(label);
    if (static_cast<int>(stack.size()) == remaining) {
      leaf(u);
      pop();
    } else {
      stack.push_back({u, 0});
    }
  }
}

void check_limit(int n, int limit) {
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "depth must be nonnegative");
  if (n > limit) {
    throw Error(ErrorCode::DepthTooLarge,
                "exact enumeration limited to depth " + std::to_string(limit));
  }
}

}  // namespace

void enumerate_sphere(const Automaton& aut, int n,
                      const std::function<void(const Word&, int)>& visit, int limit) {
  check_limit(n, limit);
  Word word;
  walk_paths(
      aut, aut.start(), n, [&](Letter x) { word.push_back(x); }, [&] { word.pop_back(); },
      [&](int end) { visit(word, end); });
}

std::vector<Word> sphere_words(const Automaton& aut, int n, int limit) {
  std::vector<Word> out;
  enumerate_sphere(aut, n, [&](const Word& w, int) { out.push_back(w); }, limit);
  return out;
}

BigInt uniform_below(const BigInt& bound, Rng& rng) {
  if (bound <= 0) throw Error(ErrorCode::InvalidArgument, "bound must be positive");
  const auto bits = static_cast<unsigned>(boost::multiprecision::msb(bound)) + 1;
  const unsigned words = (bits + 63) / 64;
  const BigInt mask = (BigInt(1) << bits) - 1;
  for (;;) {
    BigInt x = 0;
    for (unsigned i = 0; i < words; ++i) {
      x <<= 64;
      x |= BigInt(rng());
    }
    x &= mask;
    if (x < bound) return x;
  }
}

std::vector<int> sample_sphere_path(const Automaton& aut, const CountTable& table, int n,
                                    Rng& rng) {
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "depth must be nonnegative");
  if (n > table.depth()) {
    throw Error(ErrorCode::DepthTooLarge, "count table too shallow for depth " + std::to_string(n));
  }
  std::vector<int> path{aut.start()};
  path.reserve(static_cast<std::size_t>(n) + 1);
  int v = aut.start();
  if (n <= table.small_depth()) {
    std::uint64_t x = rng.below(table.small_count(v, n));
    for (int k = n; k > 0; --k) {
      for (const auto& [u, label] : aut.successors(v)) {
        const std::uint64_t c = table.small_count(u, k - 1);
        if (x < c) {
          v = u;
          break;
        }
        x -= c;
      }
      path.push_back(v);
    }
    return path;
  }
  BigInt x = uniform_below(table.count(v, n), rng);
  for (int k = n; k > 0; --k) {
    for (const auto& [u, label] : aut.successors(v)) {
      const BigInt& c = table.count(u, k - 1);
      if (x < c) {
        v = u;
        break;
      }
      x -= c;
    }
    path.push_back(v);
  }
  return path;
}

Word sample_sphere_uniform(const Automaton& aut, const CountTable& table, int n, Rng& rng) {
  return aut.decode(sample_sphere_path(aut, table, n, rng));
}

namespace {

struct Accumulator {
  RunningStats stats;
  std::vector<std::uint64_t> exceed;
  std::vector<double> values;
  std::vector<std::uint64_t> bins;
  std::vector<RunningStats> cartan;

  void merge(const Accumulator& o) {
    stats.merge(o.stats);
    for (std::size_t i = 0; i < exceed.size(); ++i) exceed[i] += o.exceed[i];
    values.insert(values.end(), o.values.begin(), o.values.end());
    for (std::size_t i = 0; i < bins.size(); ++i) bins[i] += o.bins[i];
    for (std::size_t i = 0; i < cartan.size(); ++i) cartan[i].merge(o.cartan[i]);
  }
};

struct Recorder {
  int n;
  const SphereOptions* options;
  bool collect_values;
  int cartan_dim;

  Accumulator make() const {
    Accumulator acc;
    acc.exceed.assign(options->eps.size(), 0);
    if (options->histogram) acc.bins.assign(static_cast<std::size_t>(options->histogram->bins), 0);
    acc.cartan.assign(static_cast<std::size_t>(cartan_dim), RunningStats{});
    return acc;
  }

  void record(Accumulator& acc, double phi, const ScaledMatrix* product) const {
    acc.stats.add(phi);
    const double scale = n > 0 ? static_cast<double>(n) : 1.0;
    const double rate = phi / scale;
    for (std::size_t i = 0; i < options->eps.size(); ++i) {
      if (std::abs(rate - options->lambda_ref) > options->eps[i]) ++acc.exceed[i];
    }
    const double z = (phi - n * options->lambda_ref) / std::sqrt(scale);
    if (collect_values) acc.values.push_back(z);
    if (options->histogram) {
      const auto& h = *options->histogram;
      long b = static_cast<long>(std::floor((z - h.lo) / h.width));
      b = std::clamp(b, 0L, static_cast<long>(h.bins) - 1);
      ++acc.bins[static_cast<std::size_t>(b)];
    }
    if (cartan_dim > 0 && product) {
      const auto kappa = cartan_vector(*product);
      for (int i = 0; i < cartan_dim; ++i) {
        acc.cartan[static_cast<std::size_t>(i)].add(kappa[static_cast<std::size_t>(i)] / scale);
      }
    }
  }
};

int cartan_dimension(const SubadditiveFunctional& f, bool wanted) {
  if (!wanted) return 0;
  if (const auto* ln = std::get_if<LogNormFunctional>(&f)) return ln->rep.dimension();
  throw Error(ErrorCode::InvalidArgument, "Cartan means need a log-norm functional");
}

Histogram finish_histogram(const Accumulator& acc, const SphereOptions& options) {
  if (options.histogram) {
    Histogram h;
    h.lo = options.histogram->lo;
    h.width = options.histogram->width;
    const double total = static_cast<double>(acc.stats.count());
    for (auto c : acc.bins) h.mass.push_back(total > 0 ? static_cast<double>(c) / total : 0.0);
    return h;
  }
  if (acc.values.empty()) return {};
  const auto [lo_it, hi_it] = std::minmax_element(acc.values.begin(), acc.values.end());
  const double width = freedman_diaconis_width(acc.values);
  const int bins = std::clamp(static_cast<int>(std::floor((*hi_it - *lo_it) / width)) + 1, 1, 1000);
  const double w = bins == 1000 ? (*hi_it - *lo_it) / 999.0 : width;
  return make_histogram(acc.values, *lo_it, w > 0 ? w : 1.0, bins);
}

}  // namespace

SphereStatistics spherical_statistics(const Automaton& aut, const SubadditiveFunctional& f, int n,
                                      const SphereMode& mode, const SphereOptions& options,
                                      const CountTable* table) {
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "depth must be nonnegative");
  for (double e : options.eps) {
    if (!(e >= 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be nonnegative");
  }
  std::optional<CountTable> own;
  if (!table || table->depth() < n) {
    own.emplace(aut, n);
    table = &*own;
  }
  const bool collect = options.keep_values || !options.histogram;
  const Recorder recorder{n, &options, collect, cartan_dimension(f, options.cartan)};
  const bool matrix = std::holds_alternative<LogNormFunctional>(f) ||
                      std::holds_alternative<DisplacementFunctional>(f);

  std::vector<Accumulator> parts;
  if (mode.exact) {
    check_limit(n, options.exact_limit);
    if (n == 0) {
      parts.push_back(recorder.make());
      IncrementalEvaluator eval(f);
      recorder.record(parts[0], eval.value(), matrix ? &eval.product() : nullptr);
    } else {
      const auto& first = aut.successors(aut.start());
      parts.resize(first.size());
      parallel_for(first.size(), options.workers, [&](std::size_t i) {
        Accumulator acc = recorder.make();
        IncrementalEvaluator eval(f);
        const auto [u, label] = first[i];
        eval.push(label);
        walk_paths(
            aut, u, n - 1, [&](Letter x) { eval.push(x); }, [&] { eval.pop(); },
            [&](int) { recorder.record(acc, eval.value(), matrix ? &eval.product() : nullptr); });
        parts[i] = std::move(acc);
      });
    }
  } else {
    if (mode.samples == 0) throw Error(ErrorCode::InsufficientData, "no Monte Carlo samples");
    constexpr std::uint64_t kChunk = 4096;
    const std::uint64_t chunks = (mode.samples + kChunk - 1) / kChunk;
    parts.resize(static_cast<std::size_t>(chunks));
    parallel_for(static_cast<std::size_t>(chunks), options.workers, [&](std::size_t c) {
      Accumulator acc = recorder.make();
      Rng rng(mode.seed, c);
      const std::uint64_t begin = c * kChunk;
      const std::uint64_t end = std::min(mode.samples, begin + kChunk);
      IncrementalEvaluator eval(f);
      for (std::uint64_t s = begin; s < end; ++s) {
        const Word w = sample_sphere_uniform(aut, *table, n, rng);
        while (eval.depth() > 0) eval.pop();
        for (Letter x : w) eval.push(x);
        recorder.record(acc, eval.value(), matrix ? &eval.product() : nullptr);
      }
      parts[c] = std::move(acc);
    });
  }

  Accumulator total = recorder.make();
  for (const auto& part : parts) total.merge(part);

  SphereStatistics out;
  out.n = n;
  out.count = table->sphere_size(n);
  out.evaluated = total.stats.count();
  out.mean = total.stats.mean();
  out.mode = mode;
  out.lambda_ref = options.lambda_ref;
  if (mode.exact) {
    out.variance = total.stats.variance();
  } else {
    out.variance = total.stats.sample_variance();
    out.standard_error = total.stats.standard_error();
  }
  const double evaluated = static_cast<double>(out.evaluated);
  for (std::size_t i = 0; i < options.eps.size(); ++i) {
    out.deviation_fractions.emplace_back(options.eps[i],
                                         static_cast<double>(total.exceed[i]) / evaluated);
  }
  out.histogram = finish_histogram(total, options);
  for (const auto& c : total.cartan) out.cartan_mean.push_back(c.mean());
  if (options.keep_values) out.normalized = std::move(total.values);
  return out;
}

std::vector<double> cartan_sphere_mean(const Automaton& aut, const LinearRepresentation& rep,
                                       int n, int workers) {
  SphereOptions options;
  options.cartan = true;
  options.histogram = HistogramSpec{};
  options.workers = workers;
  return spherical_statistics(aut, LogNormFunctional{rep}, n, SphereMode::exact_mode(), options)
      .cartan_mean;
}

LimitEstimates estimate_limits(const Automaton& aut, const SubadditiveFunctional& f,
                               const LimitSchedule& schedule) {
  std::vector<int> depths = schedule.exact_depths;
  std::sort(depths.begin(), depths.end());
  depths.erase(std::unique(depths.begin(), depths.end()), depths.end());
  depths.erase(std::remove_if(depths.begin(), depths.end(), [](int n) { return n < 1; }),
               depths.end());
  if (depths.size() < 3) {
    throw Error(ErrorCode::InsufficientData, "limit estimation needs three or more depths");
  }
  int deepest = depths.back();
  for (const auto& [n, samples] : schedule.monte_carlo) deepest = std::max(deepest, n);
  const CountTable table(aut, deepest);

  SphereOptions options;
  options.histogram = HistogramSpec{};
  options.workers = schedule.workers;

  LimitEstimates est;
  est.depths = depths;
  for (int n : depths) {
    const auto s = spherical_statistics(aut, f, n, SphereMode::exact_mode(), options, &table);
    est.means.push_back(s.mean);
    est.variances.push_back(s.variance);
  }

  // m_n = lambda n + a + b / n by least squares.
  const auto k = static_cast<Eigen::Index>(depths.size());
  Eigen::MatrixXd x(k, 3);
  Eigen::VectorXd y(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double n = depths[static_cast<std::size_t>(i)];
    x(i, 0) = n;
    x(i, 1) = 1.0;
    x(i, 2) = 1.0 / n;
    y(i) = est.means[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector3d coef = x.colPivHouseholderQr().solve(y);
  est.lambda = coef(0);
  est.intercept = coef(1);
  est.curvature = coef(2);
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  if (k > 3) {
    const double rss = (x * coef - y).squaredNorm();
    cov = (x.transpose() * x).inverse() * (rss / static_cast<double>(k - 3));
  }
  // Rounding floor: exact means carry relative error near 1e-15.
  const double floor = 1e-12 * std::max(1.0, std::abs(est.lambda));
  est.standard_error = std::max(std::sqrt(std::max(cov(0, 0), 0.0)), floor);

  // v_n / n = sigma^2 + c / n.
  std::vector<double> inv;
  std::vector<double> ratio;
  for (std::size_t i = 0; i < depths.size(); ++i) {
    inv.push_back(1.0 / depths[i]);
    ratio.push_back(est.variances[i] / depths[i]);
  }
  const LinearFit vfit = linear_fit(inv, ratio);
  est.sigma2 = std::max(0.0, vfit.intercept);
  {
    double rss = 0.0;
    double mx = 0.0;
    for (double v : inv) mx += v;
    mx /= static_cast<double>(inv.size());
    double sxx = 0.0;
    for (std::size_t i = 0; i < inv.size(); ++i) {
      const double r = ratio[i] - (vfit.intercept + vfit.slope * inv[i]);
      rss += r * r;
      sxx += (inv[i] - mx) * (inv[i] - mx);
    }
    const double s2 = inv.size() > 2 ? rss / static_cast<double>(inv.size() - 2) : 0.0;
    const double nn = static_cast<double>(inv.size());
    est.sigma2_error = sxx > 0.0 ? std::sqrt(s2 * (1.0 / nn + mx * mx / sxx)) : 0.0;
  }

  // Monte Carlo at larger depths: compare with the extrapolation and refine
  // lambda from the deepest run.
  auto mc = schedule.monte_carlo;
  std::sort(mc.begin(), mc.end());
  for (std::size_t i = 0; i < mc.size(); ++i) {
    const auto [n, samples] = mc[i];
    const auto s = spherical_statistics(aut, f, n, SphereMode::monte_carlo(samples,
                                                                           schedule.seed + i),
                                        options, &table);
    MonteCarloCheck check;
    check.n = n;
    check.samples = samples;
    check.mean = s.mean;
    check.standard_error = s.standard_error;
    check.predicted = est.lambda * n + est.intercept + est.curvature / n;
    const double se = std::max(s.standard_error, floor * n);
    check.z = (check.mean - check.predicted) / se;
    est.checks.push_back(check);
  }
  if (!est.checks.empty()) {
    const auto& deep = est.checks.back();
    const double n = deep.n;
    // Offset uncertainty of a + b/n from the exact fit, propagated to lambda.
    const Eigen::Vector3d g(0.0, 1.0, 1.0 / n);
    const double offset_var = std::max(0.0, static_cast<double>(g.transpose() * cov * g));
    est.lambda = (deep.mean - est.intercept - est.curvature / n) / n;
    est.standard_error =
        std::max(std::sqrt(deep.standard_error * deep.standard_error + offset_var) / n, floor);
  }
  return est;
}

namespace {

double fit_log_slope(const std::vector<double>& x, const std::vector<double>& tv) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (tv[i] > 0.0) {
      xs.push_back(x[i]);
      ys.push_back(std::log(tv[i]));
    }
  }
  if (xs.size() < 2) return 0.0;
  return linear_fit(xs, ys).slope;
}

}  // namespace

CltSuiteReport clt_comparison_suite(const Automaton& aut, const std::vector<int>& n_list,
                                    int p_common, const std::vector<double>& c_list,
                                    const std::vector<int>& r_list, std::size_t max_support) {
  if (p_common < 1) throw Error(ErrorCode::InvalidArgument, "period must be positive");
  const SpectralReport report = analyze(aut);
  if (!report.has_growth()) throw Error(ErrorCode::NoGrowth, "no exponential growth");
  const Matrix& a = report.a;
  const LimitVectors lv = limit_vectors(a, report.growth.lambda, p_common);
  const int deepest = n_list.empty() ? 0 : *std::max_element(n_list.begin(), n_list.end());
  const int max_r = r_list.empty() ? 0 : *std::max_element(r_list.begin(), r_list.end());
  const CountTable table(aut, deepest * p_common + max_r);

  CltSuiteReport out;
  out.p = p_common;
  out.lambda = lv.lambda;
  for (int r : r_list) {
    if (r < 0 || r >= p_common) throw Error(ErrorCode::InvalidArgument, "residue out of range");
    std::vector<double> xs;
    std::vector<double> tvs;
    for (int n : n_list) {
      TauMuRow row;
      row.r = r;
      row.n = n;
      row.tv = tv_tau_mu_grouped(a, lv, n, r);
      if (table.sphere_size(n * p_common + r) <= max_support) {
        row.tv_exhaustive = tv_distance(uniform_sphere_measure(a, n * p_common + r, max_support),
                                        mu_measure(a, lv, n, r, max_support));
      }
      xs.push_back(n);
      tvs.push_back(row.tv);
      out.tau_mu.push_back(row);
    }
    out.geometric_ratio[r] = std::exp(fit_log_slope(xs, tvs));
  }
  for (double c : c_list) {
    std::vector<double> xs;
    std::vector<double> tvs;
    for (int n : n_list) {
      const auto tv = tv_pi_tilde_tau_grouped(a, lv, c, n);
      if (!tv) continue;
      ApproxRow row;
      row.c = c;
      row.n = n;
      row.outer = outer_blocks(c, n);
      row.inner_length = n * p_common - 2 * p_common * row.outer;
      row.tv = *tv;
      try {
        row.tv_exhaustive = tv_distance(pi_measure(a, lv, row.inner_length, max_support),
                                        tilde_tau_measure(a, lv, c, n, max_support));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::SupportTooLarge) throw;
      }
      xs.push_back(std::log(static_cast<double>(n)));
      tvs.push_back(row.tv);
      out.approx.push_back(row);
    }
    out.power_exponent[c] = fit_log_slope(xs, tvs);
  }
  return out;
}

}  // namespace hyperlab
