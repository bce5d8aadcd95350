#include "hyperlab/representation.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include "hyperlab/error.hpp"
#include "json.hpp"

namespace hyperlab {

namespace {

Matrix rotation3(int axis, double angle) {
  Matrix r = Matrix::Identity(3, 3);
  const int i = (axis + 1) % 3;
  const int j = (axis + 2) % 3;
  r(i, i) = std::cos(angle);
  r(i, j) = -std::sin(angle);
  r(j, i) = std::sin(angle);
  r(j, j) = std::cos(angle);
  return r;
}

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

LinearRepresentation::LinearRepresentation(GeneratorAlphabet alphabet,
                                           std::vector<Matrix> images)
    : alphabet_(std::move(alphabet)), images_(std::move(images)) {
  if (images_.size() != alphabet_.size() || images_.empty()) {
    throw Error(ErrorCode::InvalidRepresentation, "one image per symbol required");
  }
  dimension_ = static_cast<int>(images_.front().rows());
  if (dimension_ < 1) throw Error(ErrorCode::InvalidRepresentation, "empty image");
  for (std::size_t i = 0; i < images_.size(); ++i) {
    const Matrix& m = images_[i];
    if (m.rows() != dimension_ || m.cols() != dimension_) {
      throw Error(ErrorCode::InvalidRepresentation,
                  "image of " + alphabet_.symbol(static_cast<Letter>(i)) + " has wrong shape");
    }
    if (!m.allFinite()) {
      throw Error(ErrorCode::InvalidRepresentation, "non-finite image entry");
    }
    const std::vector<double> sv = singular_values(m);
    if (sv.back() <= 1e-14 * sv.front() || sv.front() == 0.0) {
      throw Error(ErrorCode::SingularImage,
                  "image of " + alphabet_.symbol(static_cast<Letter>(i)) + " is singular");
    }
  }
  if (inverse_defect() > 1e-10) {
    throw Error(ErrorCode::InvalidRepresentation,
                "images of paired symbols are not mutually inverse");
  }
}

double LinearRepresentation::inverse_defect() const {
  double worst = 0.0;
  const Matrix id = Matrix::Identity(dimension_, dimension_);
  for (std::size_t i = 0; i < images_.size(); ++i) {
    const Matrix& m = images_[i];
    const Matrix& inv = images_[static_cast<std::size_t>(alphabet_.inverse(static_cast<Letter>(i)))];
    const double scale = std::max(1.0, spectral_norm(m) * spectral_norm(inv));
    worst = std::max(worst, (m * inv - id).cwiseAbs().maxCoeff() / scale);
  }
  return worst;
}

const Matrix& LinearRepresentation::image(Letter x) const {
  if (!alphabet_.contains(x)) throw Error(ErrorCode::UnknownSymbol, std::to_string(x));
  return images_[static_cast<std::size_t>(x)];
}

ScaledMatrix LinearRepresentation::evaluate(const Word& w) const {
  ScaledMatrix out = ScaledMatrix::identity(dimension_);
  for (Letter x : w) out.right_multiply(image(x));
  return out;
}

LinearRepresentation LinearRepresentation::from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  try {
    const int d = doc.at("dimension").get<int>();
    if (d < 1) throw Error(ErrorCode::InvalidRepresentation, "dimension must be positive");
    std::map<std::string, std::string> pairing;
    if (doc.contains("inverse_pairing")) {
      pairing = doc.at("inverse_pairing").get<std::map<std::string, std::string>>();
    }
    std::vector<std::string> symbols;
    auto add = [&](const std::string& s) {
      if (std::find(symbols.begin(), symbols.end(), s) == symbols.end()) symbols.push_back(s);
    };
    for (const auto& [k, v] : doc.at("images").items()) {
      (void)v;
      add(k);
      if (auto it = pairing.find(k); it != pairing.end()) add(it->second);
    }
    for (const auto& [k, v] : pairing) {
      add(k);
      add(v);
    }
    std::map<std::string, std::string> sym_pairing = pairing;
    for (const auto& [k, v] : pairing) sym_pairing[v] = k;
    GeneratorAlphabet alphabet = GeneratorAlphabet::from_pairing(symbols, sym_pairing);

    std::vector<Matrix> images(alphabet.size());
    std::vector<bool> given(alphabet.size(), false);
    for (const auto& [k, v] : doc.at("images").items()) {
      std::vector<double> flat;
      if (!v.empty() && v.front().is_array()) {
        for (const auto& row : v) {
          for (const auto& x : row) flat.push_back(x.get<double>());
        }
      } else {
        flat = v.get<std::vector<double>>();
      }
      if (flat.size() != static_cast<std::size_t>(d) * static_cast<std::size_t>(d)) {
        throw Error(ErrorCode::InvalidRepresentation, "image of " + k + " has wrong size");
      }
      Matrix m(d, d);
      for (int r = 0; r < d; ++r) {
        for (int c = 0; c < d; ++c) m(r, c) = flat[static_cast<std::size_t>(r * d + c)];
      }
      const auto x = static_cast<std::size_t>(alphabet.letter(k));
      images[x] = std::move(m);
      given[x] = true;
    }
    for (std::size_t x = 0; x < images.size(); ++x) {
      if (given[x]) continue;
      const auto y = static_cast<std::size_t>(alphabet.inverse(static_cast<Letter>(x)));
      if (!given[y]) {
        throw Error(ErrorCode::InvalidRepresentation,
                    "no image for " + alphabet.symbol(static_cast<Letter>(x)));
      }
      Eigen::FullPivLU<Matrix> lu(images[y]);
      if (!lu.isInvertible()) {
        throw Error(ErrorCode::SingularImage, "image of " + alphabet.symbol(static_cast<Letter>(y)));
      }
      images[x] = lu.inverse();
    }
    return LinearRepresentation(std::move(alphabet), std::move(images));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

std::string LinearRepresentation::to_json() const {
  nlohmann::ordered_json doc;
  doc["dimension"] = dimension_;
  nlohmann::ordered_json images = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < images_.size(); ++i) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (int r = 0; r < dimension_; ++r) {
      nlohmann::ordered_json row = nlohmann::ordered_json::array();
      for (int c = 0; c < dimension_; ++c) row.push_back(images_[i](r, c));
      rows.push_back(row);
    }
    images[alphabet_.symbol(static_cast<Letter>(i))] = rows;
  }
  doc["images"] = images;
  doc["inverse_pairing"] = alphabet_.pairing();
  return doc.dump(2);
}

LinearRepresentation LinearRepresentation::sanov() {
  return LinearRepresentation(GeneratorAlphabet::letters(2),
                              {mat2(1, 2, 0, 1), mat2(1, -2, 0, 1), mat2(1, 0, 2, 1),
                               mat2(1, 0, -2, 1)});
}

LinearRepresentation LinearRepresentation::orthogonal(int rank) {
  GeneratorAlphabet alphabet = GeneratorAlphabet::letters(rank);
  std::vector<Matrix> images;
  for (int i = 0; i < rank; ++i) {
    const double angle = std::sqrt(2.0 + i);
    images.push_back(rotation3(i % 3, angle));
    images.push_back(rotation3(i % 3, -angle));
  }
  return LinearRepresentation(std::move(alphabet), std::move(images));
}

LinearRepresentation LinearRepresentation::free_product(const std::vector<int>& orders) {
  const GroupOracle oracle = GroupOracle::free_product(orders);
  const GeneratorAlphabet& alphabet = oracle.alphabet();
  std::vector<Matrix> images(alphabet.size());
  Letter x = 0;
  for (std::size_t f = 0; f < orders.size(); ++f) {
    const int n = orders[f];
    const double c = 2.0 + static_cast<double>(f);
    Matrix g;
    switch (n) {
      case 2:
        // Involutions alternate between lower and upper triangular shapes.
        g = f % 2 == 0 ? mat2(1, 0, c, -1) : mat2(1, c, 0, -1);
        break;
      case 3: g = mat2(0, -1, 1, -1); break;
      case 4: g = mat2(0, -1, 1, 0); break;
      case 6: g = mat2(1, -1, 1, 0); break;
      default: {
        const double t = 2.0 * std::numbers::pi / n;
        g = mat2(std::cos(t), -std::sin(t), std::sin(t), std::cos(t));
      }
    }
    if (n != 2 && f > 0) {
      // Conjugate later factors apart so their images do not commute.
      const Matrix h = mat2(1, static_cast<double>(f), 0, 1);
      const Matrix hinv = mat2(1, -static_cast<double>(f), 0, 1);
      g = h * g * hinv;
    }
    images[static_cast<std::size_t>(x)] = g;
    if (n == 2) {
      x += 1;
    } else {
      images[static_cast<std::size_t>(x + 1)] = g.inverse();
      x += 2;
    }
  }
  return LinearRepresentation(alphabet, std::move(images));
}

SubadditiveFunctional identity_word_length(const GroupOracle& oracle) {
  std::vector<Word> translation;
  for (std::size_t i = 0; i < oracle.alphabet().size(); ++i) {
    translation.push_back(Word{static_cast<Letter>(i)});
  }
  return WordLengthFunctional{oracle, std::move(translation)};
}

SubadditiveFunctional first_exponent_sum(const GeneratorAlphabet& alphabet) {
  std::vector<double> weights(alphabet.size(), 0.0);
  weights[0] = 1.0;
  const Letter inv = alphabet.inverse(0);
  if (inv != 0) weights[static_cast<std::size_t>(inv)] = -1.0;
  return AbsHomomorphismFunctional{std::move(weights)};
}

std::string functional_name(const SubadditiveFunctional& f) {
  switch (f.index()) {
    case 0: return "log_norm";
    case 1: return "displacement";
    case 2: return "word_length";
    default: return "abs_homomorphism";
  }
}

double eval_functional(const SubadditiveFunctional& f, const Word& w) {
  if (const auto* g = std::get_if<LogNormFunctional>(&f)) {
    return log_operator_norm(g->rep.evaluate(w));
  }
  if (const auto* g = std::get_if<DisplacementFunctional>(&f)) {
    return displacement_h2(g->rep.evaluate(w));
  }
  if (const auto* g = std::get_if<WordLengthFunctional>(&f)) {
    Word translated;
    for (Letter x : w) {
      if (x < 0 || static_cast<std::size_t>(x) >= g->translation.size()) {
        throw Error(ErrorCode::UnknownSymbol, std::to_string(x));
      }
      const Word& t = g->translation[static_cast<std::size_t>(x)];
      translated.insert(translated.end(), t.begin(), t.end());
    }
    return static_cast<double>(g->target.word_length(translated));
  }
  const auto& h = std::get<AbsHomomorphismFunctional>(f);
  double sum = 0.0;
  for (Letter x : w) {
    if (x < 0 || static_cast<std::size_t>(x) >= h.weights.size()) {
      throw Error(ErrorCode::UnknownSymbol, std::to_string(x));
    }
    sum += h.weights[static_cast<std::size_t>(x)];
  }
  return std::abs(sum);
}

double lipschitz_constant(const SubadditiveFunctional& f, const GeneratorAlphabet& alphabet) {
  double best = 0.0;
  for (std::size_t i = 0; i < alphabet.size(); ++i) {
    best = std::max(best, std::abs(eval_functional(f, Word{static_cast<Letter>(i)})));
  }
  return best;
}

IncrementalEvaluator::IncrementalEvaluator(const SubadditiveFunctional& f) : f_(&f) {
  if (const auto* g = std::get_if<LogNormFunctional>(&f)) {
    products_.push_back(ScaledMatrix::identity(g->rep.dimension()));
  } else if (const auto* g = std::get_if<DisplacementFunctional>(&f)) {
    products_.push_back(ScaledMatrix::identity(g->rep.dimension()));
  }
  sums_.push_back(0.0);
}

void IncrementalEvaluator::push(Letter x) {
  word_.push_back(x);
  const LinearRepresentation* rep = nullptr;
  if (const auto* g = std::get_if<LogNormFunctional>(f_)) rep = &g->rep;
  if (const auto* g = std::get_if<DisplacementFunctional>(f_)) rep = &g->rep;
  if (rep != nullptr) {
    ScaledMatrix next = products_.back();
    next.right_multiply(rep->image(x));
    products_.push_back(std::move(next));
  } else if (const auto* g = std::get_if<AbsHomomorphismFunctional>(f_)) {
    if (x < 0 || static_cast<std::size_t>(x) >= g->weights.size()) {
      word_.pop_back();
      throw Error(ErrorCode::UnknownSymbol, std::to_string(x));
    }
    sums_.push_back(sums_.back() + g->weights[static_cast<std::size_t>(x)]);
  }
}

void IncrementalEvaluator::pop() {
  if (word_.empty()) return;
  word_.pop_back();
  if (products_.size() > 1) products_.pop_back();
  if (sums_.size() > 1) sums_.pop_back();
}

double IncrementalEvaluator::value() const {
  switch (f_->index()) {
    case 0: return log_operator_norm(products_.back());
    case 1: return displacement_h2(products_.back());
    case 2: return eval_functional(*f_, word_);
    default: return std::abs(sums_.back());
  }
}

}  // namespace hyperlab
