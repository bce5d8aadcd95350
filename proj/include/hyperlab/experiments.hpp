#ifndef HYPERLAB_EXPERIMENTS_HPP_
#define HYPERLAB_EXPERIMENTS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hyperlab/automaton.hpp"
#include "hyperlab/representation.hpp"

namespace hyperlab {

// Everything that determines an experiment's output. Workers and the output
// directory are excluded from the hash: they never change results.
struct ExperimentConfig {
  std::string group = "free:2";
  std::string automaton_file;
  std::string presentation_file;  // Dehn presentation for validate
  std::string rep = "auto";       // auto | sanov | orthogonal | free_product | JSON path
  std::string functional = "log_norm";
  int exact_to = 10;
  std::vector<int> mc_depths;
  std::uint64_t samples = 10000;
  std::uint64_t seed = 1;
  std::vector<double> eps{0.1};
  std::string out = ".";
  int workers = 1;
  int depth = 8;                         // validate
  std::vector<int> n_list{64, 256, 1024};  // simulate
  int trials = 1000;                     // simulate, boundary
  int length = 1000;                     // boundary
  std::optional<double> lambda;          // boundary reference values
  std::optional<double> sigma;
  std::vector<int> clt_n{2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<double> c_list{1.0, 2.0, 4.0};
  int period = 0;                        // 0: common period of the automaton

  // Keys as in the JSON config file: group, automaton_file, ...
  void apply_json(std::string_view text);
  std::string canonical_json() const;
  std::uint64_t hash() const;
  std::string hash_hex() const;
};

struct CommandOutput {
  int exit_code = 0;
  std::string summary;  // printed on stdout
  std::vector<std::pair<std::string, std::string>> files;  // (name, content)
};

Automaton load_automaton(const ExperimentConfig& config);
std::optional<GroupOracle> load_oracle(const ExperimentConfig& config);
LinearRepresentation load_representation(const ExperimentConfig& config,
                                         const GeneratorAlphabet& alphabet);
SubadditiveFunctional load_functional(const ExperimentConfig& config, const Automaton& aut);

CommandOutput run_analyze(const ExperimentConfig& config);
CommandOutput run_validate(const ExperimentConfig& config);
CommandOutput run_count(const ExperimentConfig& config);
CommandOutput run_simulate(const ExperimentConfig& config);
CommandOutput run_boundary(const ExperimentConfig& config);
CommandOutput run_clt_compare(const ExperimentConfig& config);

// Formats doubles with 17 significant digits so outputs round-trip.
std::string format_double(double x);

}  // namespace hyperlab

#endif  // HYPERLAB_EXPERIMENTS_HPP_
