#include "hyperlab/automaton.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <map>
#include <set>
#include <tuple>

#include "hyperlab/error.hpp"
#include "json.hpp"

namespace hyperlab {

Automaton::Automaton(GeneratorAlphabet alphabet, std::vector<std::string> vertices,
                     std::vector<Edge> edges, bool augmented)
    : alphabet_(std::move(alphabet)),
      vertices_(std::move(vertices)),
      edges_(std::move(edges)),
      augmented_(augmented) {
  if (vertices_.empty()) throw Error(ErrorCode::InvalidArgument, "automaton needs a start vertex");
  std::set<std::string> names(vertices_.begin(), vertices_.end());
  if (names.size() != vertices_.size()) {
    throw Error(ErrorCode::InvalidArgument, "duplicate vertex names");
  }
  if (augmented_ && (vertices_.size() < 2 || vertices_.back() != "0")) {
    throw Error(ErrorCode::InvalidArgument, "augmented automaton must end with vertex 0");
  }
  if (!augmented_ && names.count("0") != 0) {
    throw Error(ErrorCode::InvalidArgument, "vertex 0 present but automaton not augmented");
  }
  const int n = static_cast<int>(vertices_.size());
  const int zero = augmented_ ? n - 1 : -1;
  std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.from, a.to) < std::tie(b.from, b.to);
  });
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const Edge& e = edges_[i];
    if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n) {
      throw Error(ErrorCode::InvalidArgument, "edge endpoint out of range");
    }
    if (e.to == 0) {
      throw Error(ErrorCode::EdgeIntoStart, "edge " + name(e.from) + " -> " + name(e.to));
    }
    if (i > 0 && edges_[i - 1].from == e.from && edges_[i - 1].to == e.to) {
      throw Error(ErrorCode::DuplicateEdge, "edge " + name(e.from) + " -> " + name(e.to));
    }
    if (e.to == zero || e.from == zero) {
      if (e.label != kIdentityLabel) {
        throw Error(ErrorCode::LabelMismatch, "edges into 0 must be labelled id");
      }
    } else if (!alphabet_.contains(e.label)) {
      throw Error(ErrorCode::UnknownSymbol, "edge label out of alphabet");
    }
  }
  if (augmented_) {
    for (int v = 0; v < n; ++v) {
      if (!label(v, zero)) {
        throw Error(ErrorCode::InvalidArgument, "vertex " + name(v) + " has no edge to 0");
      }
    }
  }
  successors_.assign(vertices_.size(), {});
  for (const Edge& e : edges_) {
    if (e.to == zero) continue;
    successors_[static_cast<std::size_t>(e.from)].emplace_back(e.to, e.label);
  }
}

std::optional<int> Automaton::find_vertex(std::string_view name) const {
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (vertices_[i] == name) return static_cast<int>(i);
  }
  return std::nullopt;
}

std::optional<Letter> Automaton::label(int from, int to) const {
  auto it = std::lower_bound(edges_.begin(), edges_.end(), std::pair{from, to},
                             [](const Edge& e, const std::pair<int, int>& key) {
                               return std::tie(e.from, e.to) < std::tie(key.first, key.second);
                             });
  if (it == edges_.end() || it->from != from || it->to != to) return std::nullopt;
  return it->label;
}

Word Automaton::decode(const std::vector<int>& path) const {
  Word w;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const auto l = label(path[i - 1], path[i]);
    if (!l) {
      throw Error(ErrorCode::InadmissiblePrefix,
                  "no edge " + name(path[i - 1]) + " -> " + name(path[i]));
    }
    if (*l != kIdentityLabel) w.push_back(*l);
  }
  return w;
}

Automaton Automaton::from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  try {
    auto symbols = doc.at("alphabet").get<std::vector<std::string>>();
    std::map<std::string, std::string> pairing;
    if (doc.contains("inverse_pairing")) {
      pairing = doc.at("inverse_pairing").get<std::map<std::string, std::string>>();
    }
    for (const auto& [k, v] : pairing) {
      if (std::find(symbols.begin(), symbols.end(), k) == symbols.end() ||
          std::find(symbols.begin(), symbols.end(), v) == symbols.end()) {
        throw Error(ErrorCode::ParseError, "pairing mentions unknown symbol " + k + "/" + v);
      }
    }
    std::map<std::string, std::string> sym = pairing;
    for (const auto& [k, v] : pairing) {
      if (auto it = sym.find(v); it != sym.end() && it->second != k) {
        throw Error(ErrorCode::ParseError, "inverse pairing is not an involution at " + v);
      }
      sym[v] = k;
    }
    GeneratorAlphabet alphabet;
    try {
      alphabet = GeneratorAlphabet::from_pairing(symbols, sym);
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, e.what());
    }

    const std::string start = doc.value("start", std::string("*"));
    const bool augmented = doc.value("augmented", false);
    auto names = doc.at("vertices").get<std::vector<std::string>>();
    if (std::find(names.begin(), names.end(), start) == names.end()) {
      throw Error(ErrorCode::ParseError, "start vertex " + start + " not listed");
    }
    std::vector<std::string> ordered{start};
    for (const auto& v : names) {
      if (v != start && v != "0") ordered.push_back(v);
    }
    const bool has_zero = std::find(names.begin(), names.end(), "0") != names.end();
    if (has_zero != augmented) {
      throw Error(ErrorCode::ParseError, "augmented flag disagrees with presence of vertex 0");
    }
    if (has_zero) ordered.push_back("0");
    if (std::set<std::string>(names.begin(), names.end()).size() != names.size()) {
      throw Error(ErrorCode::ParseError, "duplicate vertex names");
    }
    auto index = [&](const std::string& v) {
      auto it = std::find(ordered.begin(), ordered.end(), v);
      if (it == ordered.end()) throw Error(ErrorCode::ParseError, "unknown vertex " + v);
      return static_cast<int>(it - ordered.begin());
    };
    std::vector<Edge> edges;
    for (const auto& e : doc.at("edges")) {
      if (!e.is_array() || e.size() != 3) {
        throw Error(ErrorCode::ParseError, "edges are [from, to, label] triples");
      }
      const std::string lab = e[2].get<std::string>();
      Letter label = kIdentityLabel;
      if (lab != "id") {
        auto x = alphabet.find(lab);
        if (!x) throw Error(ErrorCode::ParseError, "unknown label symbol " + lab);
        label = *x;
      }
      edges.push_back({index(e[0].get<std::string>()), index(e[1].get<std::string>()), label});
    }
    try {
      return Automaton(std::move(alphabet), std::move(ordered), std::move(edges), augmented);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::EdgeIntoStart || e.code() == ErrorCode::DuplicateEdge) throw;
      throw Error(ErrorCode::ParseError, e.what());
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

std::string Automaton::to_json() const {
  std::vector<std::array<std::string, 3>> rows;
  for (const Edge& e : edges_) {
    rows.push_back({name(e.from), name(e.to),
                    e.label == kIdentityLabel ? std::string("id") : alphabet_.symbol(e.label)});
  }
  std::sort(rows.begin(), rows.end());
  nlohmann::ordered_json doc;
  doc["alphabet"] = alphabet_.symbols();
  doc["inverse_pairing"] = alphabet_.pairing();
  doc["vertices"] = vertices_;
  doc["start"] = vertices_.front();
  nlohmann::ordered_json edges = nlohmann::ordered_json::array();
  for (const auto& r : rows) edges.push_back({r[0], r[1], r[2]});
  doc["edges"] = edges;
  doc["augmented"] = augmented_;
  return doc.dump(1) + "\n";
}

Automaton build_free_group_automaton(int rank) {
  GeneratorAlphabet alphabet = GeneratorAlphabet::letters(rank);
  std::vector<std::string> vertices{"*"};
  for (const auto& s : alphabet.symbols()) vertices.push_back(s);
  std::vector<Edge> edges;
  const int k = static_cast<int>(alphabet.size());
  for (int x = 0; x < k; ++x) {
    edges.push_back({0, x + 1, x});
    for (int y = 0; y < k; ++y) {
      if (y != alphabet.inverse(x)) edges.push_back({x + 1, y + 1, y});
    }
  }
  return Automaton(std::move(alphabet), std::move(vertices), std::move(edges), false);
}

Automaton build_free_product_automaton(const std::vector<int>& orders) {
  const GroupOracle oracle = GroupOracle::free_product(orders);
  const GeneratorAlphabet& alphabet = oracle.alphabet();
  std::vector<std::string> vertices{"*"};
  struct State {
    int factor;
    int length;
    Letter letter;
  };
  std::vector<State> states;  // vertex i + 1
  Letter x = 0;
  for (std::size_t f = 0; f < orders.size(); ++f) {
    const int n = orders[f];
    const Letter pos = x;
    const Letter neg = alphabet.inverse(pos);
    for (int m = 1; 2 * m <= n; ++m) {
      states.push_back({static_cast<int>(f), m, pos});
      vertices.push_back(std::string(static_cast<std::size_t>(m), alphabet.symbol(pos)[0]));
    }
    if (neg != pos) {
      for (int m = 1; 2 * (n - m) > n; ++m) {
        states.push_back({static_cast<int>(f), m, neg});
        vertices.push_back(std::string(static_cast<std::size_t>(m), alphabet.symbol(neg)[0]));
      }
    }
    x += neg == pos ? 1 : 2;
  }
  std::vector<Edge> edges;
  const int count = static_cast<int>(states.size());
  for (int v = 0; v <= count; ++v) {
    const State* from = v == 0 ? nullptr : &states[static_cast<std::size_t>(v - 1)];
    for (int u = 1; u <= count; ++u) {
      const State& to = states[static_cast<std::size_t>(u - 1)];
      const bool opens = to.length == 1 && (from == nullptr || from->factor != to.factor);
      const bool extends = from != nullptr && from->factor == to.factor &&
                           from->letter == to.letter && to.length == from->length + 1;
      if (opens || extends) edges.push_back({v, u, to.letter});
    }
  }
  return Automaton(alphabet, std::move(vertices), std::move(edges), false);
}

Automaton augment_zero_vertex(const Automaton& aut) {
  if (aut.augmented()) throw Error(ErrorCode::AlreadyAugmented, "vertex 0 already present");
  std::vector<std::string> vertices = aut.vertices();
  vertices.push_back("0");
  const int zero = static_cast<int>(vertices.size()) - 1;
  std::vector<Edge> edges = aut.edges();
  for (int v = 0; v <= zero; ++v) edges.push_back({v, zero, kIdentityLabel});
  return Automaton(aut.alphabet(), std::move(vertices), std::move(edges), true);
}

Automaton build_two_component_fixture() {
  GeneratorAlphabet alphabet = GeneratorAlphabet::letters(4);
  std::vector<std::string> vertices{"*"};
  for (const auto& s : alphabet.symbols()) vertices.push_back(s);
  std::vector<Edge> edges;
  for (int copy = 0; copy < 2; ++copy) {
    for (int x = 4 * copy; x < 4 * copy + 4; ++x) {
      edges.push_back({0, x + 1, x});
      for (int y = 4 * copy; y < 4 * copy + 4; ++y) {
        if (y != alphabet.inverse(x)) edges.push_back({x + 1, y + 1, y});
      }
    }
  }
  return Automaton(std::move(alphabet), std::move(vertices), std::move(edges), false);
}

namespace {

std::vector<int> parse_int_list(std::string_view text) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find(',', pos), text.size());
    const std::string_view item = text.substr(pos, end - pos);
    int value = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
    if (ec != std::errc() || ptr != item.data() + item.size() || item.empty()) {
      throw Error(ErrorCode::InvalidArgument, "bad integer list '" + std::string(text) + "'");
    }
    out.push_back(value);
    pos = end + 1;
  }
  return out;
}

}  // namespace

GroupOracle parse_group_spec(std::string_view spec) {
  const std::size_t colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::InvalidArgument, "group spec must look like free:2 or free_product:2,3");
  }
  const std::string_view kind = spec.substr(0, colon);
  const std::vector<int> args = parse_int_list(spec.substr(colon + 1));
  if (kind == "free") {
    if (args.size() != 1) throw Error(ErrorCode::InvalidArgument, "free:k takes one rank");
    return GroupOracle::free(args[0]);
  }
  if (kind == "free_product") return GroupOracle::free_product(args);
  throw Error(ErrorCode::InvalidArgument, "unknown group kind " + std::string(kind));
}

Automaton builtin_automaton(std::string_view spec) {
  const GroupOracle g = parse_group_spec(spec);
  if (g.kind() == GroupOracle::Kind::Free) {
    return build_free_group_automaton(static_cast<int>(g.alphabet().size() / 2));
  }
  return build_free_product_automaton(g.orders());
}

std::vector<std::string> builtin_group_specs() {
  return {"free:2", "free:3", "free_product:2,3", "free_product:2,4", "free_product:2,2,2",
          "free_product:3,3"};
}

std::vector<std::uint64_t> path_counts(const Automaton& aut, int depth) {
  const int n = aut.counting_size();
  std::vector<std::uint64_t> at(static_cast<std::size_t>(n), 0);
  at[0] = 1;
  std::vector<std::uint64_t> out{1};
  for (int d = 1; d <= depth; ++d) {
    std::vector<std::uint64_t> next(static_cast<std::size_t>(n), 0);
    for (int v = 0; v < n; ++v) {
      if (at[static_cast<std::size_t>(v)] == 0) continue;
      for (const auto& [u, l] : aut.successors(v)) {
        (void)l;
        next[static_cast<std::size_t>(u)] += at[static_cast<std::size_t>(v)];
      }
    }
    at = std::move(next);
    std::uint64_t total = 0;
    for (auto c : at) total += c;
    out.push_back(total);
  }
  return out;
}

namespace {

void collect_paths(const Automaton& aut, int depth, std::vector<int>& path,
                   std::vector<std::vector<int>>& out) {
  if (static_cast<int>(path.size()) == depth + 1) {
    out.push_back(path);
    return;
  }
  for (const auto& [u, l] : aut.successors(path.back())) {
    (void)l;
    path.push_back(u);
    collect_paths(aut, depth, path, out);
    path.pop_back();
  }
}

}  // namespace

ValidationReport validate_strongly_markov(const Automaton& aut, const GroupOracle& oracle,
                                          int n_max, int counts_depth) {
  if (!(aut.alphabet() == oracle.alphabet())) {
    throw Error(ErrorCode::LabelMismatch, "automaton and oracle alphabets differ");
  }
  ValidationReport report;
  report.max_depth = n_max;
  report.counts_depth = std::max(n_max, counts_depth);
  auto fail = [&](int depth, std::string reason, std::vector<Word> witnesses) {
    if (!report.first_failure) {
      report.first_failure = ValidationFailure{depth, std::move(reason), std::move(witnesses)};
    }
  };

  const auto spheres = oracle.sphere_sizes_bfs(report.counts_depth);
  report.sphere_sizes = spheres;
  report.path_counts = path_counts(aut, report.counts_depth);

  for (int n = 0; n <= n_max; ++n) {
    std::vector<std::vector<int>> paths;
    std::vector<int> path{aut.start()};
    collect_paths(aut, n, path, paths);
    std::vector<Word> reduced;
    reduced.reserve(paths.size());
    for (const auto& p : paths) {
      const Word w = aut.decode(p);
      Word r = oracle.reduce(w);
      if (static_cast<int>(w.size()) != n || static_cast<int>(r.size()) != n) {
        report.length_preserving_ok = false;
        fail(n, "decoded word has length " + std::to_string(r.size()) + " instead of " +
                    std::to_string(n),
             {w});
      }
      reduced.push_back(std::move(r));
    }
    if (oracle.tree_like()) {
      std::map<Word, std::size_t> seen;
      for (std::size_t i = 0; i < reduced.size(); ++i) {
        auto [it, fresh] = seen.emplace(reduced[i], i);
        if (!fresh) {
          report.bijection_ok = false;
          fail(n, "two paths decode to the same element",
               {aut.decode(paths[it->second]), aut.decode(paths[i])});
        }
      }
    } else {
      for (std::size_t i = 0; i < reduced.size(); ++i) {
        for (std::size_t j = i + 1; j < reduced.size(); ++j) {
          if (oracle.equal(reduced[i], reduced[j])) {
            report.bijection_ok = false;
            fail(n, "two paths decode to the same element",
                 {aut.decode(paths[i]), aut.decode(paths[j])});
          }
        }
      }
    }
    if (paths.size() != spheres[static_cast<std::size_t>(n)]) {
      report.bijection_ok = false;
      fail(n, "path count " + std::to_string(paths.size()) + " differs from sphere size " +
                  std::to_string(spheres[static_cast<std::size_t>(n)]),
           {});
    }
  }
  for (int n = n_max + 1; n <= report.counts_depth; ++n) {
    if (report.path_counts[static_cast<std::size_t>(n)] !=
        report.sphere_sizes[static_cast<std::size_t>(n)]) {
      report.counts_ok = false;
      fail(n, "path count differs from sphere size", {});
    }
  }
  return report;
}

}  // namespace hyperlab
