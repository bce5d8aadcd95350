#include "hyperlab/markov.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

#include "hyperlab/error.hpp"
#include "hyperlab/parallel.hpp"
#include "hyperlab/stats.hpp"

namespace hyperlab {

namespace {

constexpr double kStochasticTol = 1e-12;

std::vector<double> cumulative(const Vector& row) {
  std::vector<double> cdf(static_cast<std::size_t>(row.size()));
  double total = row.sum();
  double acc = 0.0;
  int last = -1;
  for (Eigen::Index i = 0; i < row.size(); ++i) {
    acc += row(i) / total;
    cdf[static_cast<std::size_t>(i)] = acc;
    if (row(i) > 0.0) last = static_cast<int>(i);
  }
  if (last >= 0) {
    for (std::size_t i = static_cast<std::size_t>(last); i < cdf.size(); ++i) cdf[i] = 1.0;
  }
  return cdf;
}

void check_law(const Vector& v, const std::string& what) {
  if (!v.allFinite() || (v.array() < 0.0).any()) {
    throw Error(ErrorCode::InvalidArgument, what + " has negative or non-finite entries");
  }
  if (std::abs(v.sum() - 1.0) > kStochasticTol) {
    throw Error(ErrorCode::InvalidArgument, what + " does not sum to 1");
  }
}

Matrix support(const Matrix& kernel) {
  return (kernel.array() > 0.0).cast<double>().matrix();
}

}  // namespace

FiniteChain::FiniteChain(Matrix kernel, Vector initial, std::vector<std::string> names)
    : kernel_(std::move(kernel)), initial_(std::move(initial)), names_(std::move(names)) {
  if (kernel_.rows() == 0 || kernel_.rows() != kernel_.cols()) {
    throw Error(ErrorCode::InvalidArgument, "kernel must be a nonempty square matrix");
  }
  if (initial_.size() != kernel_.rows()) {
    throw Error(ErrorCode::InvalidArgument, "initial law size differs from the kernel");
  }
  if (names_.empty()) {
    for (Eigen::Index i = 0; i < kernel_.rows(); ++i) names_.push_back(std::to_string(i));
  }
  if (names_.size() != static_cast<std::size_t>(kernel_.rows())) {
    throw Error(ErrorCode::InvalidArgument, "one name per state required");
  }
  for (Eigen::Index i = 0; i < kernel_.rows(); ++i) {
    check_law(kernel_.row(i).transpose(), "kernel row " + std::to_string(i));
    row_cdf_.push_back(cumulative(kernel_.row(i).transpose()));
  }
  check_law(initial_, "initial law");
  initial_cdf_ = cumulative(initial_);

  const auto decomp = scc_decomposition(support(kernel_));
  irreducible_ = decomp.components.size() == 1 && !decomp.trivial[0];
  period_ = 1;
  for (std::size_t c = 0; c < decomp.components.size(); ++c) {
    if (!decomp.trivial[c]) period_ = std::lcm(period_, decomp.periods[c]);
  }
}

int FiniteChain::draw(const std::vector<double>& cdf, Rng& rng) {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) return static_cast<int>(cdf.size()) - 1;
  return static_cast<int>(it - cdf.begin());
}

Vector FiniteChain::stationary() const {
  if (!irreducible_) throw Error(ErrorCode::NotIrreducible, "chain is not irreducible");
  const Eigen::Index n = kernel_.rows();
  Matrix m = kernel_.transpose() - Matrix::Identity(n, n);
  m.row(n - 1).setOnes();
  Vector rhs = Vector::Zero(n);
  rhs(n - 1) = 1.0;
  Vector pi = m.fullPivLu().solve(rhs);
  pi = pi.cwiseMax(0.0);
  return pi / pi.sum();
}

std::vector<std::vector<int>> hat_paths(const FiniteChain& chain, int p) {
  if (p < 1) throw Error(ErrorCode::InvalidArgument, "path length must be positive");
  std::vector<std::vector<int>> paths;
  std::vector<int> path;
  const Matrix& k = chain.kernel();
  auto extend = [&](auto&& self) -> void {
    if (static_cast<int>(path.size()) == p) {
      paths.push_back(path);
      return;
    }
    const int last = path.back();
    for (int y = 0; y < chain.size(); ++y) {
      if (k(last, y) > 0.0) {
        path.push_back(y);
        self(self);
        path.pop_back();
      }
    }
  };
  for (int x = 0; x < chain.size(); ++x) {
    path.assign(1, x);
    extend(extend);
  }
  return paths;
}

FiniteChain hat_chain(const FiniteChain& chain, int p) {
  if (!chain.irreducible()) throw Error(ErrorCode::NotIrreducible, "chain is not irreducible");
  if (p < 1 || p % chain.period() != 0) {
    throw Error(ErrorCode::InvalidArgument, "p must be a positive multiple of the period");
  }
  const auto paths = hat_paths(chain, p);
  const Matrix& k = chain.kernel();
  const auto size = static_cast<Eigen::Index>(paths.size());
  auto inner = [&](const std::vector<int>& y) {
    double w = 1.0;
    for (std::size_t j = 0; j + 1 < y.size(); ++j) w *= k(y[j], y[j + 1]);
    return w;
  };
  Matrix kernel = Matrix::Zero(size, size);
  Vector initial(size);
  std::vector<std::string> names;
  for (Eigen::Index i = 0; i < size; ++i) {
    const auto& x = paths[static_cast<std::size_t>(i)];
    initial(i) = chain.initial()(x.front()) * inner(x);
    std::string name;
    for (int s : x) {
      if (!name.empty()) name += '.';
      name += chain.names()[static_cast<std::size_t>(s)];
    }
    names.push_back(name);
    for (Eigen::Index j = 0; j < size; ++j) {
      const auto& y = paths[static_cast<std::size_t>(j)];
      kernel(i, j) = k(x.back(), y.front()) * inner(y);
    }
  }
  // Renormalise away rounding in the products.
  for (Eigen::Index i = 0; i < size; ++i) kernel.row(i) /= kernel.row(i).sum();
  initial /= initial.sum();
  return FiniteChain(std::move(kernel), std::move(initial), std::move(names));
}

MarkovMatrixProcess make_process(FiniteChain chain, std::vector<Matrix> images) {
  if (images.size() != static_cast<std::size_t>(chain.size())) {
    throw Error(ErrorCode::InvalidArgument, "one matrix per state required");
  }
  const auto d = images.front().rows();
  for (const auto& x : images) {
    if (x.rows() != d || x.cols() != d || d == 0) {
      throw Error(ErrorCode::InvalidArgument, "images must share one square shape");
    }
    if (!x.allFinite()) throw Error(ErrorCode::InvalidArgument, "non-finite image");
    const auto sv = singular_values(x);
    if (!(sv.back() > 1e-14 * sv.front())) {
      throw Error(ErrorCode::SingularImage, "process image is not invertible");
    }
  }
  return MarkovMatrixProcess{std::move(chain), std::move(images)};
}

MarkovMatrixProcess hat_process(const MarkovMatrixProcess& proc, int p) {
  FiniteChain hat = hat_chain(proc.chain, p);
  const auto paths = hat_paths(proc.chain, p);
  std::vector<Matrix> images;
  for (const auto& path : paths) {
    Matrix m = Matrix::Identity(proc.dimension(), proc.dimension());
    for (int s : path) m = proc.images[static_cast<std::size_t>(s)] * m;
    images.push_back(m);
  }
  return make_process(std::move(hat), std::move(images));
}

MarkovMatrixProcess parry_product_process(const Automaton& aut, const ParryMeasure& parry,
                                          const LinearRepresentation& rep) {
  if (!(rep.alphabet() == aut.alphabet())) {
    throw Error(ErrorCode::LabelMismatch, "representation alphabet differs from the automaton's");
  }
  const EdgeChain chain = edge_chain(parry);
  std::vector<Matrix> images;
  std::vector<std::string> names;
  for (const auto& [v1, v2] : chain.edges) {
    const auto label = aut.label(v1, v2);
    if (!label || !rep.alphabet().contains(*label)) {
      throw Error(ErrorCode::LabelMismatch, "edge without a generator label");
    }
    images.push_back(rep.image(*label).transpose());
    names.push_back(aut.name(v1) + ">" + aut.name(v2));
  }
  Vector initial = chain.stationary / chain.stationary.sum();
  Matrix kernel = chain.kernel;
  for (Eigen::Index i = 0; i < kernel.rows(); ++i) kernel.row(i) /= kernel.row(i).sum();
  return make_process(FiniteChain(std::move(kernel), std::move(initial), std::move(names)),
                      std::move(images));
}

MarkovMatrixProcess coin_diagonal_process() {
  Matrix kernel(2, 2);
  kernel << 0.5, 0.5, 0.5, 0.5;
  Vector initial(2);
  initial << 0.5, 0.5;
  Matrix heads(2, 2);
  heads << 4.0, 0.0, 0.0, 0.25;
  return make_process(FiniteChain(kernel, initial, {"heads", "tails"}),
                      {heads, Matrix::Identity(2, 2)});
}

MarkovMatrixProcess single_state_process(const Matrix& x) {
  return make_process(FiniteChain(Matrix::Ones(1, 1), Vector::Ones(1), {"x"}), {x});
}

namespace {

// Precomputed per-state data for fast products.
struct Engine {
  const MarkovMatrixProcess* proc;
  int d;
  std::vector<std::array<double, 4>> small;  // d = 2 images
  std::vector<double> log_det;
  bool unimodular = true;

  explicit Engine(const MarkovMatrixProcess& p) : proc(&p), d(p.dimension()) {
    for (const auto& x : p.images) {
      if (d == 2) small.push_back({x(0, 0), x(0, 1), x(1, 0), x(1, 1)});
      const double det = x.determinant();
      // Exact det 1 keeps the wedge-2 sequence identically zero.
      const double ld = std::abs(det) == 1.0 ? 0.0 : std::log(std::abs(det));
      log_det.push_back(ld);
      if (std::abs(std::abs(det) - 1.0) > 1e-12) unimodular = false;
    }
  }
};

// Running product M_k = X(z_k) ... X(z_1).
class Tracker {
 public:
  explicit Tracker(const Engine& e) : e_(&e) {
    if (e.d == 2) {
      m_ = {1.0, 0.0, 0.0, 1.0};
    } else {
      general_ = ScaledMatrix::identity(e.d);
    }
  }

  void apply(int state) {
    const auto s = static_cast<std::size_t>(state);
    log_det_ += e_->log_det[s];
    if (e_->d != 2) {
      general_.left_multiply(e_->proc->images[s]);
      return;
    }
    const auto& x = e_->small[s];
    const double a = x[0] * m_[0] + x[1] * m_[2];
    const double b = x[0] * m_[1] + x[1] * m_[3];
    const double c = x[2] * m_[0] + x[3] * m_[2];
    const double d = x[2] * m_[1] + x[3] * m_[3];
    m_ = {a, b, c, d};
    const double big = std::max(std::max(std::abs(a), std::abs(b)), std::max(std::abs(c), std::abs(d)));
    if (big > 0x1p32 || big < 0x1p-32) {
      int exp = 0;
      std::frexp(big, &exp);
      for (double& v : m_) v = std::ldexp(v, -exp);
      scale_ += exp;
    }
  }

  double log_norm() const {
    if (e_->d != 2) return log_operator_norm(general_);
    const auto [a, b, c, d] = m_;
    const double t = a * a + b * b + c * c + d * d;
    const double p = ((a - d) * (a - d) + (b + c) * (b + c)) * ((a + d) * (a + d) + (b - c) * (b - c));
    const double s1sq = 0.5 * (t + std::sqrt(p));
    return 0.5 * std::log(s1sq) + scale_ * std::numbers::ln2;
  }

  double log_wedge2() const {
    if (e_->d == 2) return log_det_;
    return log_exterior_norm(general_, 2);
  }

  double displacement() const {
    if (e_->d != 2) throw Error(ErrorCode::NotUnimodular, "displacement needs d = 2");
    const auto [a, b, c, d] = m_;
    const double log_x = 2.0 * scale_ * std::numbers::ln2 + std::log(a * a + b * b + c * c + d * d) -
                         std::numbers::ln2;
    if (log_x < 20.0) return std::acosh(std::max(1.0, std::exp(log_x)));
    return log_x + std::log1p(std::sqrt(1.0 - std::exp(-2.0 * log_x)));
  }

  double log_det() const { return log_det_; }

  std::vector<double> cartan() const {
    if (e_->d == 2) {
      const double top = log_norm();
      return {top, log_det_ - top};
    }
    return cartan_vector(general_);
  }

 private:
  const Engine* e_;
  std::array<double, 4> m_{};
  long scale_ = 0;
  ScaledMatrix general_;
  double log_det_ = 0.0;
};

// Runs one trajectory of length n, calling visit(k, state, tracker) after
// each step k = 1..n.
template <class Visit>
void run(const Engine& e, int n, Rng& rng, Visit&& visit) {
  Tracker t(e);
  int z = e.proc->chain.sample_initial(rng);
  for (int k = 1; k <= n; ++k) {
    if (k > 1) z = e.proc->chain.step(z, rng);
    t.apply(z);
    visit(k, z, t);
  }
}

int max_of(const std::vector<int>& n_list) {
  if (n_list.empty()) throw Error(ErrorCode::InsufficientData, "empty n list");
  const int n = *std::max_element(n_list.begin(), n_list.end());
  if (*std::min_element(n_list.begin(), n_list.end()) < 1) {
    throw Error(ErrorCode::InvalidArgument, "lengths must be positive");
  }
  return n;
}

// Index of each k in n_list, -1 for unlisted k.
std::vector<int> slot_of(const std::vector<int>& n_list, int n) {
  std::vector<int> slot(static_cast<std::size_t>(n) + 1, -1);
  for (std::size_t i = 0; i < n_list.size(); ++i) slot[static_cast<std::size_t>(n_list[i])] = static_cast<int>(i);
  return slot;
}

// values[i][t]: f(tracker) at n_list[i] on trajectory t (stream t).
template <class F>
std::vector<std::vector<double>> sample_at(const MarkovMatrixProcess& proc,
                                           const std::vector<int>& n_list, int trials,
                                           std::uint64_t seed, int workers, F&& f) {
  if (trials < 1) throw Error(ErrorCode::InsufficientData, "need at least one trial");
  const int n = max_of(n_list);
  const auto slot = slot_of(n_list, n);
  const Engine e(proc);
  std::vector<std::vector<double>> out(n_list.size(),
                                       std::vector<double>(static_cast<std::size_t>(trials)));
  parallel_for(static_cast<std::size_t>(trials), workers, [&](std::size_t t) {
    Rng rng(seed, t);
    run(e, n, rng, [&](int k, int, const Tracker& tr) {
      const int i = slot[static_cast<std::size_t>(k)];
      if (i >= 0) {
        const double v = f(tr, k);
        for (std::size_t j = 0; j < n_list.size(); ++j) {
          if (n_list[j] == k) out[j][t] = v;
        }
      }
    });
  });
  return out;
}

}  // namespace

Trajectory simulate(const MarkovMatrixProcess& proc, int n, Rng& rng) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "trajectory length must be positive");
  const Engine e(proc);
  Trajectory traj;
  traj.length = n;
  traj.states.reserve(static_cast<std::size_t>(n));
  traj.log_norm.reserve(static_cast<std::size_t>(n));
  const bool wedge = e.d >= 2;
  run(e, n, rng, [&](int, int z, const Tracker& t) {
    traj.states.push_back(z);
    traj.log_norm.push_back(t.log_norm());
    if (wedge) traj.log_norm_wedge2.push_back(t.log_wedge2());
  });
  return traj;
}

Trajectory simulate(const MarkovMatrixProcess& proc, int n, std::uint64_t seed,
                    std::uint64_t stream) {
  Rng rng(seed, stream);
  Trajectory traj = simulate(proc, n, rng);
  traj.seed = seed;
  traj.stream = stream;
  return traj;
}

double stationary_log_det(const MarkovMatrixProcess& proc) {
  const Vector pi = proc.chain.stationary();
  const Engine e(proc);
  double total = 0.0;
  for (std::size_t s = 0; s < e.log_det.size(); ++s) total += pi(static_cast<Eigen::Index>(s)) * e.log_det[s];
  return total;
}

LyapunovSpectrum lyapunov_spectrum(const MarkovMatrixProcess& proc, int n, int trials,
                                   std::uint64_t seed, int workers) {
  if (!proc.chain.irreducible()) throw Error(ErrorCode::NotIrreducible, "chain is not irreducible");
  if (n < 1 || trials < 1) throw Error(ErrorCode::InsufficientData, "need n, trials >= 1");
  const Engine e(proc);
  const int d = e.d;
  std::vector<std::vector<double>> per_trial(static_cast<std::size_t>(trials));
  parallel_for(static_cast<std::size_t>(trials), workers, [&](std::size_t t) {
    Rng rng(seed, t);
    if (d == 2) {
      std::vector<double> kappa;
      run(e, n, rng, [&](int k, int, const Tracker& tr) {
        if (k == n) kappa = tr.cartan();
      });
      for (double& v : kappa) v /= n;
      per_trial[t] = kappa;
      return;
    }
    // Orthogonal re-triangularisation: sum of log |R_ii| per coordinate.
    Matrix q = Matrix::Identity(d, d);
    std::vector<double> sums(static_cast<std::size_t>(d), 0.0);
    int z = proc.chain.sample_initial(rng);
    for (int k = 1; k <= n; ++k) {
      if (k > 1) z = proc.chain.step(z, rng);
      Eigen::HouseholderQR<Matrix> qr(proc.images[static_cast<std::size_t>(z)] * q);
      q = qr.householderQ();
      const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
      for (int i = 0; i < d; ++i) {
        sums[static_cast<std::size_t>(i)] += std::log(std::abs(r(i, i)));
      }
    }
    std::sort(sums.begin(), sums.end(), std::greater<>());
    for (double& v : sums) v /= n;
    per_trial[t] = sums;
  });
  LyapunovSpectrum out;
  out.n = n;
  out.trials = trials;
  out.det_mean = stationary_log_det(proc);
  for (int i = 0; i < d; ++i) {
    RunningStats s;
    for (const auto& v : per_trial) s.add(v[static_cast<std::size_t>(i)]);
    out.exponents.push_back(s.mean());
    out.errors.push_back(trials > 1 ? s.standard_error() : 0.0);
  }
  return out;
}

std::vector<GapRow> simplicity_gap(const MarkovMatrixProcess& proc, const std::vector<int>& n_list,
                                   int trials, std::uint64_t seed, int workers) {
  if (proc.dimension() < 2) throw Error(ErrorCode::InvalidArgument, "gap needs d >= 2");
  const auto values = sample_at(proc, n_list, trials, seed, workers, [](const Tracker& t, int k) {
    return (2.0 * t.log_norm() - t.log_wedge2()) / k;
  });
  const auto deepest = static_cast<std::size_t>(
      std::max_element(n_list.begin(), n_list.end()) - n_list.begin());
  RunningStats ref;
  for (double v : values[deepest]) ref.add(v);
  const double gap = ref.mean();
  std::vector<GapRow> rows;
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    RunningStats s;
    std::uint64_t t10 = 0;
    std::uint64_t t20 = 0;
    for (double v : values[i]) {
      s.add(v);
      if (v < gap - 0.1 * gap) ++t10;
      if (v < gap - 0.2 * gap) ++t20;
    }
    GapRow row;
    row.n = n_list[i];
    row.mean = s.mean();
    row.standard_error = s.standard_error();
    row.tail_10 = static_cast<double>(t10) / trials;
    row.tail_20 = static_cast<double>(t20) / trials;
    if (t10 > 0) row.rate_10 = std::log(row.tail_10) / row.n;
    if (t20 > 0) row.rate_20 = std::log(row.tail_20) / row.n;
    rows.push_back(row);
  }
  return rows;
}

DeviationCurve deviation_curve(const MarkovMatrixProcess& proc, ProcessFunctional functional,
                               double lambda_ref, double eps, const std::vector<int>& n_list,
                               int trials, std::uint64_t seed, int workers) {
  if (functional == ProcessFunctional::Displacement) {
    const Engine e(proc);
    if (e.d != 2 || !e.unimodular) {
      throw Error(ErrorCode::NotUnimodular, "displacement needs a 2x2 unimodular process");
    }
  }
  const auto values = sample_at(proc, n_list, trials, seed, workers, [&](const Tracker& t, int) {
    return functional == ProcessFunctional::LogNorm ? t.log_norm() : t.displacement();
  });
  DeviationCurve curve;
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    const int n = n_list[i];
    DeviationRow row;
    row.n = n;
    row.trials = static_cast<std::uint64_t>(trials);
    for (double v : values[i]) {
      if (std::abs(v - n * lambda_ref) >= n * eps) ++row.exceed;
    }
    row.frequency = static_cast<double>(row.exceed) / trials;
    std::tie(row.wilson_lo, row.wilson_hi) = wilson_interval(row.exceed, row.trials);
    if (row.exceed > 0) {
      row.rate = std::log(row.frequency) / n;
      xs.push_back(n);
      ys.push_back(std::log(row.frequency));
    }
    curve.rows.push_back(row);
  }
  if (xs.size() >= 2) {
    curve.slope = linear_fit(xs, ys).slope;
    curve.nonnegative_slope = curve.slope >= 0.0;
  }
  return curve;
}

std::vector<std::vector<double>> normalized_endpoints(const MarkovMatrixProcess& proc,
                                                      double lambda,
                                                      const std::vector<int>& n_list, int trials,
                                                      std::uint64_t seed, int workers) {
  return sample_at(proc, n_list, trials, seed, workers, [&](const Tracker& t, int k) {
    return (t.log_norm() - k * lambda) / std::sqrt(static_cast<double>(k));
  });
}

std::vector<BerryEsseenRow> berry_esseen_curve(const MarkovMatrixProcess& proc, double lambda,
                                               double sigma, const std::vector<int>& n_list,
                                               int trials, std::uint64_t seed, int workers) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::SigmaZero, "sigma must be positive");
  const auto values = normalized_endpoints(proc, lambda, n_list, trials, seed, workers);
  std::vector<BerryEsseenRow> rows;
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    BerryEsseenRow row;
    row.n = n_list[i];
    row.sup_distance = grid_distance_normal(values[i], sigma, 4.0 * sigma, 1000);
    const double n = row.n;
    row.scaled = n > 1 ? row.sup_distance * std::sqrt(n) / std::log(n) : row.sup_distance;
    rows.push_back(row);
  }
  return rows;
}

double wiener_value(const std::vector<double>& log_norm, double lambda, double sigma, double t) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::SigmaZero, "sigma must be positive");
  const int n = static_cast<int>(log_norm.size());
  if (n == 0) throw Error(ErrorCode::InsufficientData, "empty trajectory");
  t = std::clamp(t, 0.0, 1.0);
  const double nt = n * t;
  const int k = std::min(static_cast<int>(std::floor(nt)), n);
  auto at = [&](int j) { return j == 0 ? 0.0 : log_norm[static_cast<std::size_t>(j - 1)]; };
  double value = at(k) - k * lambda;
  if (k < n) value += (nt - k) * (at(k + 1) - at(k) - lambda);
  return value / (sigma * std::sqrt(static_cast<double>(n)));
}

std::vector<double> wiener_path(const Trajectory& traj, double lambda, double sigma,
                                int grid_points) {
  if (grid_points < 2) throw Error(ErrorCode::InvalidArgument, "grid needs two points");
  std::vector<double> path;
  for (int j = 0; j < grid_points; ++j) {
    path.push_back(wiener_value(traj.log_norm, lambda, sigma,
                                static_cast<double>(j) / (grid_points - 1)));
  }
  return path;
}

std::vector<int> lil_checkpoints(int n, double growth) {
  if (growth <= 1.0) throw Error(ErrorCode::InvalidArgument, "growth must exceed 1");
  std::vector<int> out;
  double k = 16.0;
  while (k <= n) {
    const int ki = static_cast<int>(std::floor(k));
    if (out.empty() || ki > out.back()) out.push_back(ki);
    k *= growth;
  }
  if (n >= 16 && (out.empty() || out.back() != n)) out.push_back(n);
  return out;
}

namespace {

double lil_value(double log_norm, int k, double lambda, double sigma) {
  const double kk = k;
  const double denom = std::sqrt(2.0 * sigma * sigma * kk * std::log(std::log(kk)));
  return denom > 0.0 ? (log_norm - kk * lambda) / denom : 0.0;
}

}  // namespace

std::vector<LilRecord> lil_statistic(const std::vector<double>& log_norm, double lambda,
                                     double sigma, const std::vector<int>& checkpoints) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::SigmaZero, "sigma must be positive");
  std::vector<LilRecord> out;
  double hi = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  for (int k : checkpoints) {
    if (k < 16 || k > static_cast<int>(log_norm.size())) continue;
    LilRecord r;
    r.n = k;
    r.value = lil_value(log_norm[static_cast<std::size_t>(k - 1)], k, lambda, sigma);
    hi = std::max(hi, r.value);
    lo = std::min(lo, r.value);
    r.running_max = hi;
    r.running_min = lo;
    out.push_back(r);
  }
  return out;
}

LilSummary lil_experiment(const MarkovMatrixProcess& proc, double lambda, double sigma, int n,
                          int trajectories, std::uint64_t seed, int workers, double growth) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::SigmaZero, "sigma must be positive");
  const auto checkpoints = lil_checkpoints(n, growth);
  if (checkpoints.empty()) throw Error(ErrorCode::InvalidArgument, "n must be at least 16");
  const auto values = sample_at(proc, checkpoints, trajectories, seed, workers,
                                [&](const Tracker& t, int k) {
                                  return lil_value(t.log_norm(), k, lambda, sigma);
                                });
  LilSummary out;
  std::size_t inside = 0;
  for (int t = 0; t < trajectories; ++t) {
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& row : values) {
      hi = std::max(hi, row[static_cast<std::size_t>(t)]);
      lo = std::min(lo, row[static_cast<std::size_t>(t)]);
    }
    out.final_max.push_back(hi);
    out.final_min.push_back(lo);
    if (hi >= 0.5 && hi <= 1.5) ++inside;
  }
  out.fraction_in_band = static_cast<double>(inside) / trajectories;
  return out;
}

ConsistencyReport cross_component_consistency(const Automaton& aut,
                                              const LinearRepresentation& rep, int n, int trials,
                                              std::uint64_t seed, int workers) {
  if (n < 4 || trials < 2) throw Error(ErrorCode::InsufficientData, "need n >= 4, trials >= 2");
  const SpectralReport report = analyze(aut);
  const int early = n / 4;
  ConsistencyReport out;
  for (std::size_t c = 0; c < report.parry.size(); ++c) {
    const auto proc = parry_product_process(aut, report.parry[c], rep);
    const auto values = sample_at(proc, {early, n}, trials, seed + c, workers,
                                  [](const Tracker& t, int) { return t.log_norm(); });
    RunningStats slope;
    RunningStats endpoint;
    for (int t = 0; t < trials; ++t) {
      const auto ti = static_cast<std::size_t>(t);
      slope.add((values[1][ti] - values[0][ti]) / (n - early));
      endpoint.add(values[1][ti] / std::sqrt(static_cast<double>(n)));
    }
    ComponentEstimate est;
    est.component = report.maximal.indices[c];
    est.parry_index = static_cast<int>(c);
    est.lambda = slope.mean();
    est.lambda_error = slope.standard_error();
    est.sigma2 = endpoint.sample_variance();
    est.sigma2_error = est.sigma2 * std::sqrt(2.0 / (trials - 1));
    out.components.push_back(est);
  }
  for (std::size_t i = 0; i < out.components.size(); ++i) {
    for (std::size_t j = i + 1; j < out.components.size(); ++j) {
      const auto& a = out.components[i];
      const auto& b = out.components[j];
      const double zl = std::abs(a.lambda - b.lambda) /
                        std::max(std::hypot(a.lambda_error, b.lambda_error), 1e-300);
      const double zs = std::abs(a.sigma2 - b.sigma2) /
                        std::max(std::hypot(a.sigma2_error, b.sigma2_error), 1e-300);
      out.worst_z = std::max({out.worst_z, zl, zs});
    }
  }
  out.consistent = out.worst_z <= 3.0;
  return out;
}

}  // namespace hyperlab
