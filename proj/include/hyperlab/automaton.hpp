#ifndef HYPERLAB_AUTOMATON_HPP_
#define HYPERLAB_AUTOMATON_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hyperlab/group.hpp"

namespace hyperlab {

struct Edge {
  int from = 0;
  int to = 0;
  Letter label = kIdentityLabel;
  friend bool operator==(const Edge&, const Edge&) = default;
};

// A strongly Markov structure. Vertex 0 of the internal numbering is the start
// vertex; when augmented, the vertex named "0" is the last one. All other
// vertices are the counting vertices, numbered 0..counting_size()-1 with the
// start vertex first.
class Automaton {
 public:
  Automaton() = default;
  // Vertex names must be unique; vertices[0] is the start vertex and, when
  // augmented, vertices.back() must be "0". Edge lists may come in any order.
  Automaton(GeneratorAlphabet alphabet, std::vector<std::string> vertices,
            std::vector<Edge> edges, bool augmented);

  static Automaton from_json(std::string_view text);
  // Canonical serialisation: edges sorted by (from, to, label) names.
  std::string to_json() const;

  const GeneratorAlphabet& alphabet() const { return alphabet_; }
  const std::vector<std::string>& vertices() const { return vertices_; }
  const std::string& name(int v) const { return vertices_[static_cast<std::size_t>(v)]; }
  std::optional<int> find_vertex(std::string_view name) const;
  int start() const { return 0; }
  bool augmented() const { return augmented_; }
  std::optional<int> zero() const {
    if (!augmented_) return std::nullopt;
    return static_cast<int>(vertices_.size()) - 1;
  }
  std::size_t size() const { return vertices_.size(); }
  // Vertices other than 0.
  int counting_size() const {
    return static_cast<int>(vertices_.size()) - (augmented_ ? 1 : 0);
  }

  const std::vector<Edge>& edges() const { return edges_; }
  // Outgoing (target, label) pairs, excluding edges into 0.
  const std::vector<std::pair<int, Letter>>& successors(int v) const {
    return successors_[static_cast<std::size_t>(v)];
  }
  std::optional<Letter> label(int from, int to) const;

  // Word read along a vertex path starting anywhere; id labels are skipped.
  Word decode(const std::vector<int>& path) const;

  friend bool operator==(const Automaton& a, const Automaton& b) {
    return a.alphabet_ == b.alphabet_ && a.vertices_ == b.vertices_ && a.edges_ == b.edges_ &&
           a.augmented_ == b.augmented_;
  }

 private:
  GeneratorAlphabet alphabet_;
  std::vector<std::string> vertices_;
  std::vector<Edge> edges_;
  bool augmented_ = false;
  std::vector<std::vector<std::pair<int, Letter>>> successors_;
};

Automaton build_free_group_automaton(int rank);
// Syllable automaton: a state per (factor, power) where powers are spelled by
// their geodesic normal form t^m (2m <= n) or T^(n-m).
Automaton build_free_product_automaton(const std::vector<int>& orders);
Automaton augment_zero_vertex(const Automaton& aut);

// Two disjoint copies of the free-group automaton of rank 2 joined only at
// the start vertex; the second copy reads letters c, d. Not a coding of any
// group, used as a fixture with two maximal components.
Automaton build_two_component_fixture();

// "free:k" or "free_product:n1,n2,...".
GroupOracle parse_group_spec(std::string_view spec);
Automaton builtin_automaton(std::string_view spec);
// The built-in group specs exercised by tests and the CLI.
std::vector<std::string> builtin_group_specs();

struct ValidationFailure {
  int depth = 0;
  std::string reason;
  std::vector<Word> witnesses;
};

struct ValidationReport {
  int max_depth = 0;
  int counts_depth = 0;
  bool bijection_ok = true;
  bool length_preserving_ok = true;
  bool counts_ok = true;
  std::vector<std::uint64_t> path_counts;    // depth 0..counts_depth
  std::vector<std::uint64_t> sphere_sizes;   // oracle BFS, same depths
  std::optional<ValidationFailure> first_failure;

  bool ok() const { return bijection_ok && length_preserving_ok && counts_ok; }
};

// Exhaustive check of the path -> element bijection up to n_max, then a
// counts-only comparison against oracle BFS up to counts_depth (>= n_max).
ValidationReport validate_strongly_markov(const Automaton& aut, const GroupOracle& oracle,
                                          int n_max, int counts_depth = 0);

// Number of length-n paths from the start vertex avoiding 0, n = 0..depth
// (64-bit; see CountTable for exact counts).
std::vector<std::uint64_t> path_counts(const Automaton& aut, int depth);

}  // namespace hyperlab

#endif  // HYPERLAB_AUTOMATON_HPP_
