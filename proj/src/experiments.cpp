#include "hyperlab/experiments.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "hyperlab/boundary.hpp"
#include "hyperlab/counting.hpp"
#include "hyperlab/error.hpp"
#include "hyperlab/markov.hpp"
#include "hyperlab/spectral.hpp"

namespace hyperlab {

using Json = nlohmann::ordered_json;

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot read " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

template <class T>
void take(const Json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

}  // namespace

void ExperimentConfig::apply_json(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "config must be a JSON object");
  try {
    take(j, "group", group);
    take(j, "automaton_file", automaton_file);
    take(j, "presentation_file", presentation_file);
    take(j, "rep", rep);
    take(j, "functional", functional);
    take(j, "exact_to", exact_to);
    take(j, "mc_depths", mc_depths);
    take(j, "samples", samples);
    take(j, "seed", seed);
    take(j, "eps", eps);
    take(j, "out", out);
    take(j, "workers", workers);
    take(j, "depth", depth);
    take(j, "n_list", n_list);
    take(j, "trials", trials);
    take(j, "length", length);
    if (j.contains("lambda")) lambda = j.at("lambda").get<double>();
    if (j.contains("sigma")) sigma = j.at("sigma").get<double>();
    take(j, "clt_n", clt_n);
    take(j, "c_list", c_list);
    take(j, "period", period);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("config: ") + e.what());
  }
}

std::string ExperimentConfig::canonical_json() const {
  Json j;
  j["group"] = group;
  j["automaton_file"] = automaton_file;
  j["presentation_file"] = presentation_file;
  j["rep"] = rep;
  j["functional"] = functional;
  j["exact_to"] = exact_to;
  j["mc_depths"] = mc_depths;
  j["samples"] = samples;
  j["seed"] = seed;
  j["eps"] = eps;
  j["depth"] = depth;
  j["n_list"] = n_list;
  j["trials"] = trials;
  j["length"] = length;
  j["lambda"] = lambda ? Json(*lambda) : Json(nullptr);
  j["sigma"] = sigma ? Json(*sigma) : Json(nullptr);
  j["clt_n"] = clt_n;
  j["c_list"] = c_list;
  j["period"] = period;
  // Inputs read from files are hashed by content.
  if (!automaton_file.empty()) j["automaton_content"] = read_file(automaton_file);
  if (!presentation_file.empty()) j["presentation_content"] = read_file(presentation_file);
  if (rep.find(".json") != std::string::npos) j["rep_content"] = read_file(rep);
  return j.dump();
}

std::uint64_t ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_json()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string ExperimentConfig::hash_hex() const {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

Automaton load_automaton(const ExperimentConfig& config) {
  if (!config.automaton_file.empty()) return Automaton::from_json(read_file(config.automaton_file));
  return builtin_automaton(config.group);
}

std::optional<GroupOracle> load_oracle(const ExperimentConfig& config) {
  if (!config.presentation_file.empty()) {
    return GroupOracle::dehn_from_json(read_file(config.presentation_file));
  }
  if (!config.group.empty()) return parse_group_spec(config.group);
  return std::nullopt;
}

LinearRepresentation load_representation(const ExperimentConfig& config,
                                         const GeneratorAlphabet& alphabet) {
  std::string rep = config.rep;
  const bool from_file = rep.find(".json") != std::string::npos;
  if (rep == "auto") {
    if (!config.automaton_file.empty()) {
      throw Error(ErrorCode::InvalidArgument, "--rep is required with --automaton-file");
    }
    const GroupOracle oracle = parse_group_spec(config.group);
    if (oracle.kind() == GroupOracle::Kind::FreeProduct) {
      rep = "free_product";
    } else {
      rep = oracle.alphabet().size() == 4 ? "sanov" : "orthogonal";
    }
  }
  LinearRepresentation out;
  if (from_file) {
    out = LinearRepresentation::from_json(read_file(rep));
  } else if (rep == "sanov") {
    out = LinearRepresentation::sanov();
  } else if (rep == "orthogonal") {
    out = LinearRepresentation::orthogonal(static_cast<int>(alphabet.size() / 2));
  } else if (rep == "free_product") {
    out = LinearRepresentation::free_product(parse_group_spec(config.group).orders());
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown representation " + rep);
  }
  if (!(out.alphabet() == alphabet)) {
    throw Error(ErrorCode::LabelMismatch, "representation alphabet differs from the automaton's");
  }
  return out;
}

SubadditiveFunctional load_functional(const ExperimentConfig& config, const Automaton& aut) {
  const std::string& f = config.functional;
  if (f == "log_norm") return LogNormFunctional{load_representation(config, aut.alphabet())};
  if (f == "displacement") {
    return DisplacementFunctional{load_representation(config, aut.alphabet())};
  }
  if (f == "word_length") {
    const auto oracle = load_oracle(config);
    if (!oracle) throw Error(ErrorCode::InvalidArgument, "word_length needs a group");
    return identity_word_length(*oracle);
  }
  if (f == "abs_homomorphism") return first_exponent_sum(aut.alphabet());
  throw Error(ErrorCode::InvalidArgument, "unknown functional " + f);
}

namespace {

std::string csv_header(const char* command, const ExperimentConfig& config) {
  return std::string("# hyperlab ") + command + " config_hash=" + config.hash_hex() +
         " seed=" + std::to_string(config.seed) + "\n";
}

std::string join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  return out + "\n";
}

const LimitVectors& require_limits(const SpectralReport& report) {
  if (!report.limits) throw Error(ErrorCode::NoGrowth, "automaton has no limit vectors");
  return *report.limits;
}

LimitEstimates reference_limits(const Automaton& aut, const SubadditiveFunctional& f,
                                const ExperimentConfig& config) {
  LimitSchedule schedule;
  for (int n = std::max(1, config.exact_to - 5); n <= config.exact_to; ++n) {
    schedule.exact_depths.push_back(n);
  }
  schedule.seed = config.seed;
  schedule.workers = config.workers;
  return estimate_limits(aut, f, schedule);
}

}  // namespace

CommandOutput run_analyze(const ExperimentConfig& config) {
  const Automaton aut = load_automaton(config);
  const SpectralReport report = analyze(aut);
  Json doc = Json::parse(report_json(aut, report));
  Json out;
  out["command"] = "analyze";
  out["config_hash"] = config.hash_hex();
  out["seed"] = config.seed;
  for (auto& [k, v] : doc.items()) out[k] = v;
  const std::string text = out.dump(2) + "\n";
  CommandOutput result;
  result.summary = "lambda=" + format_double(report.growth.lambda) +
                   " p_common=" + std::to_string(report.p_common) +
                   " maximal=" + std::to_string(report.maximal.indices.size()) + "\n";
  result.files.emplace_back("analyze.json", text);
  return result;
}

CommandOutput run_validate(const ExperimentConfig& config) {
  const Automaton aut = load_automaton(config);
  const auto oracle = load_oracle(config);
  if (!oracle) throw Error(ErrorCode::InvalidArgument, "validate needs --group or a presentation");
  const ValidationReport report = validate_strongly_markov(aut, *oracle, config.depth, config.depth);
  Json out;
  out["command"] = "validate";
  out["config_hash"] = config.hash_hex();
  out["seed"] = config.seed;
  out["max_depth"] = report.max_depth;
  out["bijection_ok"] = report.bijection_ok;
  out["length_preserving_ok"] = report.length_preserving_ok;
  out["counts_ok"] = report.counts_ok;
  out["path_counts"] = report.path_counts;
  out["sphere_sizes"] = report.sphere_sizes;
  if (report.first_failure) {
    Json f;
    f["depth"] = report.first_failure->depth;
    f["reason"] = report.first_failure->reason;
    std::vector<std::string> words;
    for (const Word& w : report.first_failure->witnesses) words.push_back(aut.alphabet().format(w));
    f["witnesses"] = words;
    out["first_failure"] = f;
  }
  CommandOutput result;
  result.exit_code = report.ok() ? 0 : 2;
  result.summary = std::string(report.ok() ? "valid" : "invalid") + " through depth " +
                   std::to_string(config.depth) + "\n";
  result.files.emplace_back("validate.json", out.dump(2) + "\n");
  return result;
}

CommandOutput run_count(const ExperimentConfig& config) {
  if (config.exact_to < 1) throw Error(ErrorCode::InvalidArgument, "--exact-to must be >= 1");
  const Automaton aut = load_automaton(config);
  const SubadditiveFunctional f = load_functional(config, aut);
  int deepest = config.exact_to;
  for (int n : config.mc_depths) deepest = std::max(deepest, n);
  CountTable table;
  if (const char* dir = std::getenv("HYPERLAB_CACHE_DIR"); dir && *dir) {
    table = CountTable::load_or_build(aut, deepest, dir);
  } else {
    table = CountTable(aut, deepest);
  }
  double lambda_ref = 0.0;
  if (config.exact_to >= 3) lambda_ref = reference_limits(aut, f, config).lambda;

  SphereOptions options;
  options.lambda_ref = lambda_ref;
  options.eps = config.eps;
  options.workers = config.workers;
  std::string csv = csv_header("count", config);
  csv += "# functional=" + functional_name(f) + " lambda_ref=" + format_double(lambda_ref) + "\n";
  csv += "n,count,mean,variance,standard_error,eps,fraction,mode,seed\n";
  auto emit = [&](const SphereStatistics& s, const std::string& mode, std::uint64_t seed) {
    for (const auto& [e, frac] : s.deviation_fractions) {
      csv += join({std::to_string(s.n), s.count.str(), format_double(s.mean),
                   format_double(s.variance), format_double(s.standard_error), format_double(e),
                   format_double(frac), mode, std::to_string(seed)});
    }
  };
  for (int n = 1; n <= config.exact_to; ++n) {
    emit(spherical_statistics(aut, f, n, SphereMode::exact_mode(), options, &table), "exact",
         config.seed);
  }
  for (std::size_t i = 0; i < config.mc_depths.size(); ++i) {
    const int n = config.mc_depths[i];
    const std::uint64_t seed = config.seed + i;
    emit(spherical_statistics(aut, f, n, SphereMode::monte_carlo(config.samples, seed), options,
                              &table),
         "monte_carlo", seed);
  }
  CommandOutput result;
  result.summary = "lambda_ref=" + format_double(lambda_ref) + " rows=" +
                   std::to_string(config.exact_to + config.mc_depths.size()) + "\n";
  result.files.emplace_back("count.csv", csv);
  return result;
}

CommandOutput run_simulate(const ExperimentConfig& config) {
  const Automaton aut = load_automaton(config);
  const LinearRepresentation rep = load_representation(config, aut.alphabet());
  const SpectralReport report = analyze(aut);
  if (report.parry.empty()) throw Error(ErrorCode::NoGrowth, "no maximal component");
  const MarkovMatrixProcess proc = parry_product_process(aut, report.parry.front(), rep);
  if (config.n_list.empty()) throw Error(ErrorCode::InvalidArgument, "empty --n-list");
  const int n_max = *std::max_element(config.n_list.begin(), config.n_list.end());

  const LyapunovSpectrum spec = lyapunov_spectrum(proc, n_max, config.trials, config.seed,
                                                  config.workers);
  const double lambda = spec.exponents.front();
  const auto endpoints = normalized_endpoints(proc, lambda, {n_max}, config.trials,
                                              config.seed + 1, config.workers);
  RunningStats spread;
  for (double v : endpoints[0]) spread.add(v);
  const double sigma = std::sqrt(spread.sample_variance());

  std::string csv = csv_header("simulate", config);
  csv += "# process=parry_edge_chain states=" + std::to_string(proc.chain.size()) +
         " lambda=" + format_double(lambda) + " sigma=" + format_double(sigma) + "\n";
  csv += "section,n,key,value\n";
  for (std::size_t i = 0; i < spec.exponents.size(); ++i) {
    csv += join({"lyapunov", std::to_string(n_max), "lambda" + std::to_string(i + 1),
                 format_double(spec.exponents[i])});
    csv += join({"lyapunov", std::to_string(n_max), "error" + std::to_string(i + 1),
                 format_double(spec.errors[i])});
  }
  csv += join({"lyapunov", std::to_string(n_max), "det_mean", format_double(spec.det_mean)});
  const double eps = config.eps.empty() ? 0.2 * lambda : config.eps.front();
  const DeviationCurve dev = deviation_curve(proc, ProcessFunctional::LogNorm, lambda, eps,
                                             config.n_list, config.trials, config.seed + 2,
                                             config.workers);
  for (const auto& row : dev.rows) {
    csv += join({"deviation", std::to_string(row.n), "frequency", format_double(row.frequency)});
    csv += join({"deviation", std::to_string(row.n), "wilson_lo", format_double(row.wilson_lo)});
    csv += join({"deviation", std::to_string(row.n), "wilson_hi", format_double(row.wilson_hi)});
    csv += join({"deviation", std::to_string(row.n), "rate",
                 row.rate ? format_double(*row.rate) : "nan"});
  }
  if (sigma > 0.0) {
    for (const auto& row : berry_esseen_curve(proc, lambda, sigma, config.n_list, config.trials,
                                              config.seed + 3, config.workers)) {
      csv += join({"berry_esseen", std::to_string(row.n), "sup_distance",
                   format_double(row.sup_distance)});
      csv += join({"berry_esseen", std::to_string(row.n), "scaled", format_double(row.scaled)});
    }
  }
  if (proc.dimension() >= 2) {
    for (const auto& row : simplicity_gap(proc, config.n_list, config.trials, config.seed + 4,
                                          config.workers)) {
      csv += join({"gap", std::to_string(row.n), "mean", format_double(row.mean)});
      csv += join({"gap", std::to_string(row.n), "tail_10", format_double(row.tail_10)});
      csv += join({"gap", std::to_string(row.n), "tail_20", format_double(row.tail_20)});
    }
  }
  CommandOutput result;
  result.summary = "lambda1=" + format_double(lambda) + " sigma=" + format_double(sigma) + "\n";
  result.files.emplace_back("simulate.csv", csv);
  return result;
}

CommandOutput run_boundary(const ExperimentConfig& config) {
  const Automaton aut = load_automaton(config);
  const SubadditiveFunctional f = load_functional(config, aut);
  const SpectralReport report = analyze(aut);
  require_limits(report);
  double lambda = 0.0;
  double sigma = 0.0;
  if (config.lambda && config.sigma) {
    lambda = *config.lambda;
    sigma = *config.sigma;
  } else {
    const LimitEstimates est = reference_limits(aut, f, config);
    lambda = config.lambda.value_or(est.lambda);
    sigma = config.sigma.value_or(std::sqrt(est.sigma2));
  }
  RayOptions options;
  options.length = config.length;
  options.trials = config.trials;
  options.lambda = lambda;
  options.sigma = sigma;
  options.eps = config.eps;
  options.seed = config.seed;
  options.workers = config.workers;
  const RayStatReport rays = ray_statistics(aut, report, f, options);

  std::string csv = csv_header("boundary", config);
  csv += "# functional=" + functional_name(f) + " lambda=" + format_double(lambda) +
         " sigma=" + format_double(sigma) + "\n";
  csv += "n,mean_rate,median_abs_error";
  for (double e : config.eps) csv += ",deviation_" + format_double(e);
  csv += "\n";
  for (std::size_t c = 0; c < rays.checkpoints.size(); ++c) {
    std::vector<std::string> cells{std::to_string(rays.checkpoints[c]),
                                   format_double(rays.mean_rate[c]),
                                   format_double(rays.median_abs_error[c])};
    for (const auto& row : rays.deviation) cells.push_back(format_double(row[c]));
    csv += join(cells);
  }
  std::string summary = "rays=" + std::to_string(config.trials) +
                        " terminal_rate=" + format_double(rays.mean_rate.back());
  if (rays.clt_available) summary += " terminal_ks=" + format_double(rays.terminal_ks);
  summary += " entry_degenerate=" + std::string(rays.entry_degenerate ? "true" : "false") + "\n";
  CommandOutput result;
  result.summary = summary;
  result.files.emplace_back("boundary.csv", csv);
  return result;
}

CommandOutput run_clt_compare(const ExperimentConfig& config) {
  const Automaton aut = load_automaton(config);
  const SpectralReport report = analyze(aut);
  const int p = config.period > 0 ? config.period : report.p_common;
  std::vector<int> residues;
  for (int r = 0; r < p; ++r) residues.push_back(r);
  const CltSuiteReport suite = clt_comparison_suite(aut, config.clt_n, p, config.c_list, residues);
  std::string csv = csv_header("clt-compare", config);
  csv += "# p=" + std::to_string(p) + " lambda=" + format_double(suite.lambda) + "\n";
  csv += "comparison,parameter,n,tv,tv_exhaustive\n";
  for (const auto& row : suite.tau_mu) {
    csv += join({"tau_mu", "r=" + std::to_string(row.r), std::to_string(row.n),
                 format_double(row.tv),
                 row.tv_exhaustive ? format_double(*row.tv_exhaustive) : ""});
  }
  for (const auto& row : suite.approx) {
    csv += join({"pi_tilde_tau", "c=" + format_double(row.c), std::to_string(row.n),
                 format_double(row.tv),
                 row.tv_exhaustive ? format_double(*row.tv_exhaustive) : ""});
  }
  std::string summary;
  for (const auto& [r, ratio] : suite.geometric_ratio) {
    summary += "tau_mu r=" + std::to_string(r) + " ratio=" + format_double(ratio) + "\n";
  }
  for (const auto& [c, slope] : suite.power_exponent) {
    summary += "pi_tilde_tau c=" + format_double(c) + " exponent=" + format_double(slope) + "\n";
  }
  CommandOutput result;
  result.summary = summary;
  result.files.emplace_back("clt.csv", csv);
  return result;
}

}  // namespace hyperlab
