#ifndef HYPERLAB_GROUP_HPP_
#define HYPERLAB_GROUP_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hyperlab {

using Letter = std::int32_t;
using Word = std::vector<Letter>;

// Edge label of the augmented automaton's edges into the 0 vertex.
inline constexpr Letter kIdentityLabel = -1;

// A finite symmetric generating set together with its inverse involution.
class GeneratorAlphabet {
 public:
  GeneratorAlphabet() = default;
  GeneratorAlphabet(std::vector<std::string> symbols, std::vector<Letter> inverse);

  // Symbols missing from the pairing are treated as involutions.
  static GeneratorAlphabet from_pairing(
      std::vector<std::string> symbols,
      const std::map<std::string, std::string>& pairing);

  // Letters x_i and their inverses named by case: a, A, b, B, ...
  static GeneratorAlphabet letters(int count);

  std::size_t size() const { return symbols_.size(); }
  const std::vector<std::string>& symbols() const { return symbols_; }
  const std::string& symbol(Letter x) const;
  Letter inverse(Letter x) const;
  Word inverse(const Word& w) const;

  std::optional<Letter> find(std::string_view symbol) const;
  Letter letter(std::string_view symbol) const;  // throws UnknownSymbol
  bool contains(Letter x) const {
    return x >= 0 && static_cast<std::size_t>(x) < symbols_.size();
  }

  // Parses either whitespace/dot separated symbols or, when every symbol is
  // a single character, a plain concatenation such as "abAB".
  Word parse(std::string_view text) const;
  std::string format(const Word& w) const;

  std::map<std::string, std::string> pairing() const;

  friend bool operator==(const GeneratorAlphabet&, const GeneratorAlphabet&) = default;

 private:
  std::vector<std::string> symbols_;
  std::vector<Letter> inverse_;
};

// Word problem and word metric for one of the supported group families.
class GroupOracle {
 public:
  enum class Kind { Free, FreeProduct, Dehn };

  static GroupOracle free(int rank);
  // Generators per factor: an involution for order 2, otherwise x and X.
  static GroupOracle free_product(std::vector<int> orders);
  // Relators over alphabet; must satisfy the metric C'(1/6) condition.
  static GroupOracle dehn(GeneratorAlphabet alphabet, std::vector<Word> relators);
  // JSON presentation: {"generators": [...], "relators": [...],
  // optional "inverse_pairing": {...}}.
  static GroupOracle dehn_from_json(std::string_view text);

  Kind kind() const { return kind_; }
  const GeneratorAlphabet& alphabet() const { return alphabet_; }
  const std::vector<int>& orders() const { return orders_; }
  const std::vector<Word>& relators() const { return relators_; }

  // Free and free-product oracles return the unique geodesic normal form.
  // The Dehn oracle returns a Dehn-reduced word, which is empty iff the input
  // is trivial; its length is an upper bound on the word length.
  Word reduce(const Word& w) const;
  std::size_t word_length(const Word& w) const { return reduce(w).size(); }

  // 2 <g, h> = |g| + |h| - |g^-1 h|, kept doubled so it stays integral.
  long gromov_product_doubled(const Word& g, const Word& h) const;
  double gromov_product(const Word& g, const Word& h) const {
    return 0.5 * static_cast<double>(gromov_product_doubled(g, h));
  }

  bool equal(const Word& g, const Word& h) const;

  // True for oracles whose reduce() is a canonical normal form and whose
  // Cayley graphs are trees of finite cliques (free, free products).
  bool tree_like() const { return kind_ != Kind::Dehn; }
  // Hyperbolicity constant; only housed for the tree oracles (0).
  std::optional<double> hyperbolicity_constant() const;
  // Longest geodesic spelling of a single syllable (1 for free groups).
  int max_syllable_length() const;

  // #S_n for n = 0..depth by breadth-first search in the Cayley graph, using
  // reduce() only to identify group elements.
  std::vector<std::uint64_t> sphere_sizes_bfs(int depth) const;
  // All elements of the ball of radius depth, grouped by BFS distance.
  std::vector<std::vector<Word>> spheres_bfs(int depth) const;

 private:
  GroupOracle() = default;

  Word reduce_free(const Word& w) const;
  Word reduce_free_product(const Word& w) const;
  Word reduce_dehn(const Word& w) const;

  Kind kind_ = Kind::Free;
  GeneratorAlphabet alphabet_;
  std::vector<int> orders_;
  // Free products: factor index and power (+1 / -1) carried by each letter.
  std::vector<int> factor_of_;
  std::vector<int> power_of_;
  std::vector<Word> relators_;
  std::vector<Word> symmetrized_;
};

// Pieces of the symmetrised relators must be shorter than 1/6 of each relator
// they occur in. Returns a description of the first violation, if any.
std::optional<std::string> small_cancellation_violation(
    const GeneratorAlphabet& alphabet, const std::vector<Word>& relators);

}  // namespace hyperlab

#endif  // HYPERLAB_GROUP_HPP_
