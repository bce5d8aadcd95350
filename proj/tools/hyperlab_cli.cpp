// hyperlab: counting and boundary experiments on hyperbolic groups.
//
// Exit codes: 0 success, 2 validation failure, 1 runtime error, 64 usage.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"

#include "hyperlab/error.hpp"
#include "hyperlab/experiments.hpp"
#include "hyperlab/parallel.hpp"

namespace {

constexpr int kUsage = 64;

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw hyperlab::Error(hyperlab::ErrorCode::ParseError, "cannot read " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

int main(int argc, char** argv) {
  using hyperlab::ExperimentConfig;

  CLI::App app{"hyperlab: counting and boundary experiments on hyperbolic groups"};
  app.require_subcommand(1);

  ExperimentConfig flags;
  flags.workers = hyperlab::default_workers();
  std::string config_file;
  double lambda = 0.0;
  double sigma = 0.0;

  std::map<std::string, CLI::Option*> opt;
  opt["config"] = app.add_option("--config", config_file, "JSON config file; flags override it");
  opt["group"] = app.add_option("--group", flags.group, "free:k or free_product:n1,n2,...");
  opt["automaton_file"] = app.add_option("--automaton-file", flags.automaton_file,
                                         "automaton JSON instead of a built-in group");
  opt["presentation_file"] = app.add_option("--presentation", flags.presentation_file,
                                            "Dehn presentation JSON for validate");
  opt["rep"] = app.add_option("--rep", flags.rep, "auto, sanov, orthogonal, free_product or a JSON file");
  opt["functional"] = app.add_option("--functional", flags.functional,
                                     "log_norm, displacement, word_length or abs_homomorphism");
  opt["exact_to"] = app.add_option("--exact-to", flags.exact_to, "deepest exact sphere");
  opt["mc_depths"] = app.add_option("--mc-depths", flags.mc_depths, "Monte Carlo sphere depths")
                         ->delimiter(',');
  opt["samples"] = app.add_option("--samples", flags.samples, "Monte Carlo samples per depth");
  opt["seed"] = app.add_option("--seed", flags.seed, "base seed");
  opt["eps"] = app.add_option("--eps", flags.eps, "deviation thresholds")->delimiter(',');
  opt["out"] = app.add_option("--out", flags.out, "output directory");
  opt["workers"] = app.add_option("--workers", flags.workers, "worker threads")
                       ->check(CLI::PositiveNumber);
  opt["depth"] = app.add_option("--depth", flags.depth, "validation depth");
  opt["n_list"] = app.add_option("--n-list", flags.n_list, "trajectory lengths")->delimiter(',');
  opt["trials"] = app.add_option("--trials", flags.trials, "trajectories or rays");
  opt["length"] = app.add_option("--length", flags.length, "ray length");
  opt["lambda"] = app.add_option("--lambda", lambda, "reference drift for boundary");
  opt["sigma"] = app.add_option("--sigma", sigma, "reference standard deviation for boundary");
  opt["clt_n"] = app.add_option("--clt-n", flags.clt_n, "n values for clt-compare")->delimiter(',');
  opt["c_list"] = app.add_option("--c-list", flags.c_list, "c values for clt-compare")->delimiter(',');
  opt["period"] = app.add_option("--period", flags.period, "period p (0: automatic)");

  using Runner = std::function<hyperlab::CommandOutput(const ExperimentConfig&)>;
  const std::map<std::string, Runner> runners{
      {"analyze", hyperlab::run_analyze},   {"validate", hyperlab::run_validate},
      {"count", hyperlab::run_count},       {"simulate", hyperlab::run_simulate},
      {"boundary", hyperlab::run_boundary}, {"clt-compare", hyperlab::run_clt_compare},
  };
  const std::map<std::string, std::string> help{
      {"analyze", "spectral report of the automaton"},
      {"validate", "check the automaton against the group oracle"},
      {"count", "exact and Monte Carlo sphere statistics"},
      {"simulate", "Markovian matrix product experiments"},
      {"boundary", "boundary ray experiments"},
      {"clt-compare", "total variation comparisons of path measures"},
  };
  for (const auto& [name, text] : help) app.add_subcommand(name, text)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  ExperimentConfig config;
  config.workers = flags.workers;
  try {
    if (!config_file.empty()) config.apply_json(read_text(config_file));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  auto given = [&](const char* key) { return opt.at(key)->count() > 0; };
  if (given("group")) config.group = flags.group;
  if (given("automaton_file")) config.automaton_file = flags.automaton_file;
  if (given("presentation_file")) config.presentation_file = flags.presentation_file;
  if (given("rep")) config.rep = flags.rep;
  if (given("functional")) config.functional = flags.functional;
  if (given("exact_to")) config.exact_to = flags.exact_to;
  if (given("mc_depths")) config.mc_depths = flags.mc_depths;
  if (given("samples")) config.samples = flags.samples;
  if (given("seed")) config.seed = flags.seed;
  if (given("eps")) config.eps = flags.eps;
  if (given("out")) config.out = flags.out;
  if (given("workers")) config.workers = flags.workers;
  if (given("depth")) config.depth = flags.depth;
  if (given("n_list")) config.n_list = flags.n_list;
  if (given("trials")) config.trials = flags.trials;
  if (given("length")) config.length = flags.length;
  if (given("lambda")) config.lambda = lambda;
  if (given("sigma")) config.sigma = sigma;
  if (given("clt_n")) config.clt_n = flags.clt_n;
  if (given("c_list")) config.c_list = flags.c_list;
  if (given("period")) config.period = flags.period;

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const hyperlab::CommandOutput out = runners.at(command)(config);
    std::filesystem::create_directories(config.out);
    for (const auto& [name, content] : out.files) {
      const auto path = std::filesystem::path(config.out) / name;
      std::ofstream file(path, std::ios::binary);
      file << content;
      if (!file) throw hyperlab::Error(hyperlab::ErrorCode::InvalidArgument,
                                       "cannot write " + path.string());
      std::cout << "wrote " << path.string() << "\n";
    }
    std::cout << out.summary;
    return out.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
