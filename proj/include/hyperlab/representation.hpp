#ifndef HYPERLAB_REPRESENTATION_HPP_
#define HYPERLAB_REPRESENTATION_HPP_

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hyperlab/group.hpp"
#include "hyperlab/linalg.hpp"

namespace hyperlab {

// Generator -> GL_d(R) map. Images of paired letters must be mutually inverse
// to relative tolerance 1e-10.
class LinearRepresentation {
 public:
  LinearRepresentation() = default;
  LinearRepresentation(GeneratorAlphabet alphabet, std::vector<Matrix> images);

  // {"dimension": d, "images": {"a": [row-major entries]}, "inverse_pairing": {...}}.
  // Symbols without an image get the inverse of their partner's image.
  static LinearRepresentation from_json(std::string_view text);
  std::string to_json() const;

  // a -> [[1,2],[0,1]], b -> [[1,0],[2,1]] on the free group of rank 2.
  static LinearRepresentation sanov();
  // Rotations of R^3 by irrational angles about alternating axes; the image
  // is relatively compact.
  static LinearRepresentation orthogonal(int rank);
  // A faithful-looking GL_2 image of a free product of cyclic groups, laid out
  // on the alphabet of GroupOracle::free_product(orders).
  static LinearRepresentation free_product(const std::vector<int>& orders);

  int dimension() const { return dimension_; }
  const GeneratorAlphabet& alphabet() const { return alphabet_; }
  const Matrix& image(Letter x) const;

  ScaledMatrix evaluate(const Word& w) const;
  // Entrywise largest relative deviation of image(x) image(x^-1) from I.
  double inverse_defect() const;

 private:
  GeneratorAlphabet alphabet_;
  std::vector<Matrix> images_;
  int dimension_ = 0;
};

struct LogNormFunctional {
  LinearRepresentation rep;
};

// d(g i, i) in the upper half-plane; the representation must land in SL_2.
struct DisplacementFunctional {
  LinearRepresentation rep;
};

// |g|_{S'} where each source letter is spelled as a word over the target
// oracle's alphabet.
struct WordLengthFunctional {
  GroupOracle target;
  std::vector<Word> translation;
};

struct AbsHomomorphismFunctional {
  std::vector<double> weights;  // indexed by letter
};

using SubadditiveFunctional =
    std::variant<LogNormFunctional, DisplacementFunctional, WordLengthFunctional,
                 AbsHomomorphismFunctional>;

// Word length on the oracle's own generating set.
SubadditiveFunctional identity_word_length(const GroupOracle& oracle);
// Exponent sum of the first generator: a -> +1, a^-1 -> -1, others 0.
SubadditiveFunctional first_exponent_sum(const GeneratorAlphabet& alphabet);

std::string functional_name(const SubadditiveFunctional& f);
double eval_functional(const SubadditiveFunctional& f, const Word& w);

// Largest |phi(s)| over single letters: the Lipschitz constant in the word metric.
double lipschitz_constant(const SubadditiveFunctional& f, const GeneratorAlphabet& alphabet);

// Evaluates a functional along a growing word. Used by depth-first
// enumeration and by ray sampling where words are extended letter by letter.
class IncrementalEvaluator {
 public:
  explicit IncrementalEvaluator(const SubadditiveFunctional& f);

  void push(Letter x);
  void pop();
  std::size_t depth() const { return word_.size(); }
  const Word& word() const { return word_; }
  double value() const;
  // Current product for the matrix functionals.
  const ScaledMatrix& product() const { return products_.back(); }

 private:
  const SubadditiveFunctional* f_;
  Word word_;
  std::vector<ScaledMatrix> products_;
  std::vector<double> sums_;
};

}  // namespace hyperlab

#endif  // HYPERLAB_REPRESENTATION_HPP_
