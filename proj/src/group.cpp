#include "hyperlab/group.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <set>

#include "json.hpp"

#include "hyperlab/error.hpp"

namespace hyperlab {

// ---------------------------------------------------------------------------
// GeneratorAlphabet
// ---------------------------------------------------------------------------

GeneratorAlphabet::GeneratorAlphabet(std::vector<std::string> symbols,
                                     std::vector<Letter> inverse)
    : symbols_(std::move(symbols)), inverse_(std::move(inverse)) {
  if (symbols_.size() != inverse_.size()) {
    throw Error(ErrorCode::InvalidArgument, "inverse pairing size mismatch");
  }
  std::set<std::string> seen;
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (symbols_[i].empty() || symbols_[i] == "id") {
      throw Error(ErrorCode::InvalidArgument, "reserved or empty symbol");
    }
    if (!seen.insert(symbols_[i]).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate symbol " + symbols_[i]);
    }
    const Letter j = inverse_[i];
    if (j < 0 || static_cast<std::size_t>(j) >= symbols_.size() ||
        inverse_[static_cast<std::size_t>(j)] != static_cast<Letter>(i)) {
      throw Error(ErrorCode::InvalidArgument,
                  "inverse pairing is not an involution at " + symbols_[i]);
    }
  }
}

GeneratorAlphabet GeneratorAlphabet::from_pairing(
    std::vector<std::string> symbols,
    const std::map<std::string, std::string>& pairing) {
  std::vector<Letter> inverse(symbols.size());
  auto index_of = [&](const std::string& s) -> Letter {
    auto it = std::find(symbols.begin(), symbols.end(), s);
    if (it == symbols.end()) throw Error(ErrorCode::UnknownSymbol, s);
    return static_cast<Letter>(it - symbols.begin());
  };
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    auto it = pairing.find(symbols[i]);
    inverse[i] = it == pairing.end() ? static_cast<Letter>(i) : index_of(it->second);
  }
  return GeneratorAlphabet(std::move(symbols), std::move(inverse));
}

GeneratorAlphabet GeneratorAlphabet::letters(int count) {
  if (count < 1 || count > 26) {
    throw Error(ErrorCode::InvalidArgument, "letter alphabets hold 1..26 generators");
  }
  std::vector<std::string> symbols;
  std::vector<Letter> inverse;
  for (int i = 0; i < count; ++i) {
    symbols.emplace_back(1, static_cast<char>('a' + i));
    symbols.emplace_back(1, static_cast<char>('A' + i));
    inverse.push_back(2 * i + 1);
    inverse.push_back(2 * i);
  }
  return GeneratorAlphabet(std::move(symbols), std::move(inverse));
}

const std::string& GeneratorAlphabet::symbol(Letter x) const {
  if (!contains(x)) throw Error(ErrorCode::UnknownSymbol, std::to_string(x));
  return symbols_[static_cast<std::size_t>(x)];
}

Letter GeneratorAlphabet::inverse(Letter x) const {
  if (!contains(x)) throw Error(ErrorCode::UnknownSymbol, std::to_string(x));
  return inverse_[static_cast<std::size_t>(x)];
}

Word GeneratorAlphabet::inverse(const Word& w) const {
  Word out(w.rbegin(), w.rend());
  for (Letter& x : out) x = inverse(x);
  return out;
}

std::optional<Letter> GeneratorAlphabet::find(std::string_view symbol) const {
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (symbols_[i] == symbol) return static_cast<Letter>(i);
  }
  return std::nullopt;
}

Letter GeneratorAlphabet::letter(std::string_view symbol) const {
  if (auto x = find(symbol)) return *x;
  throw Error(ErrorCode::UnknownSymbol, std::string(symbol));
}

Word GeneratorAlphabet::parse(std::string_view text) const {
  Word out;
  const bool separated = text.find_first_of(" .\t") != std::string_view::npos;
  const bool single_chars = std::all_of(symbols_.begin(), symbols_.end(),
                                        [](const std::string& s) { return s.size() == 1; });
  if (!separated && single_chars) {
    for (char c : text) out.push_back(letter(std::string_view(&c, 1)));
    return out;
  }
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t start = text.find_first_not_of(" .\t", pos);
    if (start == std::string_view::npos) break;
    const std::size_t end = text.find_first_of(" .\t", start);
    out.push_back(letter(text.substr(start, end - start)));
    pos = end;
  }
  return out;
}

std::string GeneratorAlphabet::format(const Word& w) const {
  const bool single_chars = std::all_of(symbols_.begin(), symbols_.end(),
                                        [](const std::string& s) { return s.size() == 1; });
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!single_chars && i > 0) out += '.';
    out += symbol(w[i]);
  }
  return out;
}

std::map<std::string, std::string> GeneratorAlphabet::pairing() const {
  std::map<std::string, std::string> out;
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    out[symbols_[i]] = symbols_[static_cast<std::size_t>(inverse_[i])];
  }
  return out;
}

// ---------------------------------------------------------------------------
// GroupOracle
// ---------------------------------------------------------------------------

GroupOracle GroupOracle::free(int rank) {
  if (rank < 1) throw Error(ErrorCode::InvalidArgument, "free rank must be >= 1");
  GroupOracle g;
  g.kind_ = Kind::Free;
  g.alphabet_ = GeneratorAlphabet::letters(rank);
  return g;
}

GroupOracle GroupOracle::free_product(std::vector<int> orders) {
  if (orders.size() < 2) {
    throw Error(ErrorCode::InvalidOrders, "a free product needs at least two factors");
  }
  if (orders.size() > 26) throw Error(ErrorCode::InvalidOrders, "too many factors");
  GroupOracle g;
  g.kind_ = Kind::FreeProduct;
  std::vector<std::string> symbols;
  std::vector<Letter> inverse;
  for (std::size_t f = 0; f < orders.size(); ++f) {
    if (orders[f] < 2) {
      throw Error(ErrorCode::InvalidOrders, "factor orders must be >= 2");
    }
    const auto base = static_cast<Letter>(symbols.size());
    symbols.emplace_back(1, static_cast<char>('a' + f));
    g.factor_of_.push_back(static_cast<int>(f));
    g.power_of_.push_back(1);
    if (orders[f] == 2) {
      inverse.push_back(base);
    } else {
      symbols.emplace_back(1, static_cast<char>('A' + f));
      g.factor_of_.push_back(static_cast<int>(f));
      g.power_of_.push_back(-1);
      inverse.push_back(base + 1);
      inverse.push_back(base);
    }
  }
  g.alphabet_ = GeneratorAlphabet(std::move(symbols), std::move(inverse));
  g.orders_ = std::move(orders);
  return g;
}

namespace {

Word free_reduce(const GeneratorAlphabet& alphabet, const Word& w) {
  Word out;
  out.reserve(w.size());
  for (Letter x : w) {
    if (!alphabet.contains(x)) throw Error(ErrorCode::UnknownSymbol, std::to_string(x));
    if (!out.empty() && out.back() == alphabet.inverse(x)) {
      out.pop_back();
    } else {
      out.push_back(x);
    }
  }
  return out;
}

Word cyclic_reduce(const GeneratorAlphabet& alphabet, Word w) {
  w = free_reduce(alphabet, w);
  std::size_t lo = 0;
  std::size_t hi = w.size();
  while (hi - lo >= 2 && w[lo] == alphabet.inverse(w[hi - 1])) {
    ++lo;
    --hi;
  }
  return Word(w.begin() + static_cast<long>(lo), w.begin() + static_cast<long>(hi));
}

std::vector<Word> symmetrize(const GeneratorAlphabet& alphabet,
                             const std::vector<Word>& relators) {
  std::set<Word> all;
  for (const Word& r0 : relators) {
    const Word r = cyclic_reduce(alphabet, r0);
    if (r.empty()) continue;
    for (const Word& base : {r, alphabet.inverse(r)}) {
      for (std::size_t s = 0; s < base.size(); ++s) {
        Word rot(base.begin() + static_cast<long>(s), base.end());
        rot.insert(rot.end(), base.begin(), base.begin() + static_cast<long>(s));
        all.insert(std::move(rot));
      }
    }
  }
  return {all.begin(), all.end()};
}

}  // namespace

std::optional<std::string> small_cancellation_violation(
    const GeneratorAlphabet& alphabet, const std::vector<Word>& relators) {
  const std::vector<Word> sym = symmetrize(alphabet, relators);
  for (std::size_t i = 0; i < sym.size(); ++i) {
    for (std::size_t j = i + 1; j < sym.size(); ++j) {
      const Word& r1 = sym[i];
      const Word& r2 = sym[j];
      std::size_t piece = 0;
      while (piece < r1.size() && piece < r2.size() && r1[piece] == r2[piece]) ++piece;
      if (6 * piece >= r1.size() || 6 * piece >= r2.size()) {
        return "piece of length " + std::to_string(piece) + " shared by " +
               alphabet.format(r1) + " and " + alphabet.format(r2);
      }
    }
  }
  return std::nullopt;
}

GroupOracle GroupOracle::dehn(GeneratorAlphabet alphabet, std::vector<Word> relators) {
  for (const Word& r : relators) {
    for (Letter x : r) {
      if (!alphabet.contains(x)) throw Error(ErrorCode::UnknownSymbol, std::to_string(x));
    }
  }
  if (auto why = small_cancellation_violation(alphabet, relators)) {
    throw Error(ErrorCode::InvalidPresentation, "not C'(1/6): " + *why);
  }
  GroupOracle g;
  g.kind_ = Kind::Dehn;
  g.symmetrized_ = symmetrize(alphabet, relators);
  g.alphabet_ = std::move(alphabet);
  g.relators_ = std::move(relators);
  return g;
}

GroupOracle GroupOracle::dehn_from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  if (!doc.contains("generators") || !doc.contains("relators")) {
    throw Error(ErrorCode::ParseError, "presentation needs generators and relators");
  }
  std::vector<std::string> symbols;
  std::map<std::string, std::string> pairing;
  try {
    const auto gens = doc.at("generators").get<std::vector<std::string>>();
    if (doc.contains("inverse_pairing")) {
      symbols = gens;
      pairing = doc.at("inverse_pairing").get<std::map<std::string, std::string>>();
      for (const auto& [k, v] : pairing) {
        if (std::find(symbols.begin(), symbols.end(), v) == symbols.end()) symbols.push_back(v);
        pairing[v] = k;
      }
    } else {
      // Generators are named by lower-case letters; inverses by upper case.
      for (const std::string& s : gens) {
        std::string inv = s;
        for (char& c : inv) {
          c = static_cast<char>(std::isupper(static_cast<unsigned char>(c))
                                    ? std::tolower(static_cast<unsigned char>(c))
                                    : std::toupper(static_cast<unsigned char>(c)));
        }
        symbols.push_back(s);
        symbols.push_back(inv);
        pairing[s] = inv;
        pairing[inv] = s;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  GeneratorAlphabet alphabet = GeneratorAlphabet::from_pairing(symbols, pairing);
  std::vector<Word> relators;
  for (const auto& r : doc.at("relators")) {
    if (!r.is_string()) throw Error(ErrorCode::ParseError, "relators must be strings");
    relators.push_back(alphabet.parse(r.get<std::string>()));
  }
  return dehn(std::move(alphabet), std::move(relators));
}

Word GroupOracle::reduce(const Word& w) const {
  switch (kind_) {
    case Kind::Free: return reduce_free(w);
    case Kind::FreeProduct: return reduce_free_product(w);
    case Kind::Dehn: return reduce_dehn(w);
  }
  return w;
}

Word GroupOracle::reduce_free(const Word& w) const { return free_reduce(alphabet_, w); }

Word GroupOracle::reduce_free_product(const Word& w) const {
  struct Syllable {
    int factor;
    int power;
  };
  std::vector<Syllable> stack;
  for (Letter x : w) {
    if (!alphabet_.contains(x)) throw Error(ErrorCode::UnknownSymbol, std::to_string(x));
    const int f = factor_of_[static_cast<std::size_t>(x)];
    const int n = orders_[static_cast<std::size_t>(f)];
    const int p = power_of_[static_cast<std::size_t>(x)];
    if (!stack.empty() && stack.back().factor == f) {
      const int q = ((stack.back().power + p) % n + n) % n;
      if (q == 0) {
        stack.pop_back();
      } else {
        stack.back().power = q;
      }
    } else {
      stack.push_back({f, (p % n + n) % n});
    }
  }
  Word out;
  for (const Syllable& s : stack) {
    const int n = orders_[static_cast<std::size_t>(s.factor)];
    // First letter of the factor is the positive generator.
    Letter pos = 0;
    while (factor_of_[static_cast<std::size_t>(pos)] != s.factor) ++pos;
    if (2 * s.power <= n) {
      out.insert(out.end(), static_cast<std::size_t>(s.power), pos);
    } else {
      out.insert(out.end(), static_cast<std::size_t>(n - s.power), alphabet_.inverse(pos));
    }
  }
  return out;
}

Word GroupOracle::reduce_dehn(const Word& w) const {
  Word cur = free_reduce(alphabet_, w);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t pos = 0; pos < cur.size() && !changed; ++pos) {
      for (const Word& r : symmetrized_) {
        std::size_t len = 0;
        while (pos + len < cur.size() && len < r.size() && cur[pos + len] == r[len]) ++len;
        if (2 * len <= r.size()) continue;
        // cur[pos, pos+len) = u with r = u v, so u = v^-1.
        Word v(r.begin() + static_cast<long>(len), r.end());
        Word replacement = alphabet_.inverse(v);
        Word next(cur.begin(), cur.begin() + static_cast<long>(pos));
        next.insert(next.end(), replacement.begin(), replacement.end());
        next.insert(next.end(), cur.begin() + static_cast<long>(pos + len), cur.end());
        cur = free_reduce(alphabet_, next);
        changed = true;
        break;
      }
    }
  }
  return cur;
}

long GroupOracle::gromov_product_doubled(const Word& g, const Word& h) const {
  Word ginv_h = alphabet_.inverse(g);
  ginv_h.insert(ginv_h.end(), h.begin(), h.end());
  return static_cast<long>(word_length(g)) + static_cast<long>(word_length(h)) -
         static_cast<long>(word_length(ginv_h));
}

bool GroupOracle::equal(const Word& g, const Word& h) const {
  Word ginv_h = alphabet_.inverse(g);
  ginv_h.insert(ginv_h.end(), h.begin(), h.end());
  return reduce(ginv_h).empty();
}

std::optional<double> GroupOracle::hyperbolicity_constant() const {
  if (kind_ == Kind::Free) return 0.0;
  return std::nullopt;
}

int GroupOracle::max_syllable_length() const {
  if (kind_ != Kind::FreeProduct) return 1;
  int best = 1;
  for (int n : orders_) best = std::max(best, n / 2);
  return best;
}

namespace {

struct Packing {
  int bits;
  std::uint64_t encode(const Word& w) const {
    std::uint64_t key = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      key |= static_cast<std::uint64_t>(w[i] + 1) << (static_cast<unsigned>(bits) * i);
    }
    return key;
  }
  Word decode(std::uint64_t key) const {
    Word w;
    const std::uint64_t mask = (std::uint64_t{1} << bits) - 1;
    while (key != 0) {
      w.push_back(static_cast<Letter>(key & mask) - 1);
      key >>= bits;
    }
    return w;
  }
};

}  // namespace

std::vector<std::uint64_t> GroupOracle::sphere_sizes_bfs(int depth) const {
  if (kind_ == Kind::Dehn) {
    std::vector<std::uint64_t> sizes;
    for (const auto& sphere : spheres_bfs(depth)) sizes.push_back(sphere.size());
    return sizes;
  }
  const Packing pack{static_cast<int>(std::bit_width(alphabet_.size()))};
  if (static_cast<long>(depth) * pack.bits > 64) {
    throw Error(ErrorCode::DepthTooLarge, "BFS depth exceeds 64-bit word packing");
  }
  std::vector<std::uint64_t> sizes{1};
  std::vector<std::uint64_t> previous;
  std::vector<std::uint64_t> current{0};
  for (int n = 1; n <= depth; ++n) {
    std::vector<std::uint64_t> next;
    next.reserve(current.size() * alphabet_.size());
    for (std::uint64_t key : current) {
      Word w = pack.decode(key);
      w.push_back(0);
      for (std::size_t s = 0; s < alphabet_.size(); ++s) {
        w.back() = static_cast<Letter>(s);
        next.push_back(pack.encode(reduce(w)));
      }
    }
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    std::vector<std::uint64_t> fresh;
    std::set_difference(next.begin(), next.end(), current.begin(), current.end(),
                        std::back_inserter(fresh));
    next.clear();
    std::set_difference(fresh.begin(), fresh.end(), previous.begin(), previous.end(),
                        std::back_inserter(next));
    sizes.push_back(next.size());
    previous = std::move(current);
    current = std::move(next);
  }
  return sizes;
}

std::vector<std::vector<Word>> GroupOracle::spheres_bfs(int depth) const {
  std::vector<std::vector<Word>> spheres{{Word{}}};
  for (int n = 1; n <= depth; ++n) {
    const auto& current = spheres.back();
    const std::vector<Word>* previous =
        spheres.size() >= 2 ? &spheres[spheres.size() - 2] : nullptr;
    std::vector<Word> next;
    std::set<Word> next_keys;
    for (const Word& g : current) {
      for (std::size_t s = 0; s < alphabet_.size(); ++s) {
        Word c = g;
        c.push_back(static_cast<Letter>(s));
        c = reduce(c);
        if (tree_like()) {
          if (next_keys.count(c) != 0) continue;
          if (std::binary_search(current.begin(), current.end(), c)) continue;
          if (previous && std::binary_search(previous->begin(), previous->end(), c)) continue;
          next_keys.insert(c);
          continue;
        }
        auto same = [&](const Word& x) { return equal(x, c); };
        if (std::any_of(current.begin(), current.end(), same)) continue;
        if (previous && std::any_of(previous->begin(), previous->end(), same)) continue;
        if (std::any_of(next.begin(), next.end(), same)) continue;
        next.push_back(c);
      }
    }
    if (tree_like()) next.assign(next_keys.begin(), next_keys.end());
    spheres.push_back(std::move(next));
  }
  return spheres;
}

}  // namespace hyperlab
