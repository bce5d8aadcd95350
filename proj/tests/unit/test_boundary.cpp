#include "doctest.h"

#include <cmath>
#include <functional>

#include "hyperlab/automaton.hpp"
#include "hyperlab/boundary.hpp"
#include "hyperlab/error.hpp"

using namespace hyperlab;
using doctest::Approx;

namespace {

struct Fixture {
  Automaton aut;
  GroupOracle oracle;
  SpectralReport report;
  explicit Fixture(const std::string& spec)
      : aut(builtin_automaton(spec)), oracle(parse_group_spec(spec)), report(analyze(aut)) {}
  const LimitVectors& lv() const { return *report.limits; }
  int v(const char* name) const { return *aut.find_vertex(name); }
};

// Sums children masses against the parent for every prefix up to depth.
void check_additivity(const Fixture& f, std::vector<int>& prefix, int depth, double& worst) {
  const double parent = ps_cylinder_mass(f.report.a, f.lv(), prefix);
  double children = 0.0;
  bool any = false;
  for (const auto& [u, x] : f.aut.successors(prefix.back())) {
    (void)x;
    prefix.push_back(u);
    children += ps_cylinder_mass(f.report.a, f.lv(), prefix);
    if (static_cast<int>(prefix.size()) <= depth) check_additivity(f, prefix, depth, worst);
    prefix.pop_back();
    any = true;
  }
  if (any) worst = std::max(worst, std::abs(parent - children));
}

}  // namespace

TEST_CASE("cylinder masses on the free group") {
  const Fixture f("free:2");
  CHECK(ps_cylinder_mass(f.report.a, f.lv(), {0}) == Approx(1.0));
  CHECK(ps_cylinder_mass(f.report.a, f.lv(), {0, f.v("a")}) == Approx(0.25));
  CHECK(ps_cylinder_mass(f.report.a, f.lv(), {0, f.v("a"), f.v("b")}) == Approx(1.0 / 12));
  try {
    ps_cylinder_mass(f.report.a, f.lv(), {0, f.v("a"), f.v("A")});
    FAIL("expected InadmissiblePrefix");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InadmissiblePrefix);
  }
}

TEST_CASE("cylinder additivity") {
  for (const char* spec : {"free:2", "free_product:2,3", "free_product:2,4"}) {
    CAPTURE(spec);
    const Fixture f(spec);
    std::vector<int> prefix{0};
    double worst = 0.0;
    check_additivity(f, prefix, 8, worst);
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("ray sampler") {
  const Fixture f("free:2");
  const RaySampler sampler(f.aut, f.lv());
  CHECK(sampler.transition(f.v("a"), f.v("A")) == 0.0);
  CHECK(sampler.transition(0, f.v("a")) == Approx(0.25));
  Rng rng(1, 0);
  std::map<int, int> first;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const auto path = sampler.sample_vertices(3, rng);
    REQUIRE(path.size() == 4);
    ++first[path[1]];
    for (std::size_t k = 1; k + 1 < path.size(); ++k)
      CHECK(f.aut.label(path[k], path[k + 1]).has_value());
  }
  const double se = std::sqrt(0.25 * 0.75 / draws);
  for (const auto& [v, c] : first) CHECK(std::abs(c / double(draws) - 0.25) < 4 * se);

  const auto ray = sampler.sample(20, rng);
  CHECK(ray.vertices.size() == 21);
  CHECK(ray.word == f.aut.decode(ray.vertices));
  CHECK(f.oracle.word_length(ray.word) == 20);

  const Fixture g("free_product:2,3");
  const RaySampler s23(g.aut, g.lv());
  CHECK(s23.transition(g.v("a"), g.v("b")) == Approx(0.5));
  CHECK(s23.transition(g.v("a"), g.v("B")) == Approx(0.5));
  CHECK(s23.transition(g.v("b"), g.v("a")) == Approx(1.0));
}

TEST_CASE("alpha coefficients") {
  const Fixture f("free:2");
  const auto& parry = f.report.parry[0];
  CHECK(alpha_coefficient(f.report.a, f.lv(), parry, 1, f.v("a")) == Approx(1.0));
  CHECK(alpha_coefficient(f.report.a, f.lv(), parry, 0, f.v("a")) == 0.0);
  CHECK(alpha_coefficient(f.report.a, f.lv(), parry, 3, f.v("b")) == Approx(1.0));
  try {
    alpha_coefficient(f.report.a, f.lv(), parry, 1, 0);
    FAIL("expected VertexNotMaximal");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::VertexNotMaximal);
  }

  // Weighted by the Parry stationary law the coefficients average to one.
  const Fixture g("free_product:2,3");
  const auto& p23 = g.report.parry[0];
  double total = 0.0;
  for (int v : p23.vertices) {
    const double alpha = alpha_coefficient(g.report.a, g.lv(), p23, 2, v);
    CHECK(alpha >= 0.0);
    total += alpha * p23.stationary(p23.local_index(v));
  }
  CHECK(total == Approx(1.0));
}

TEST_CASE("alpha vanishes exactly when no path of that length exists") {
  // Three layers of two vertices, each joined to the next: period 3, growth 2.
  // From * the mass sits in layer (k - 1) mod 3 after k steps.
  const GeneratorAlphabet s = GeneratorAlphabet::letters(2);
  std::vector<Edge> edges{{0, 1, 0}};
  for (int layer = 0; layer < 3; ++layer)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        edges.push_back({1 + 2 * layer + i, 1 + 2 * ((layer + 1) % 3) + j, static_cast<Letter>(j)});
  const Automaton layered(s, {"*", "x1", "x2", "y1", "y2", "z1", "z2"}, edges, false);
  const auto r = analyze(layered);
  REQUIRE(r.limits.has_value());
  CHECK(r.growth.lambda == Approx(2.0));
  const auto& parry = r.parry[0];
  CHECK(parry.period == 3);
  CHECK(alpha_coefficient(r.a, *r.limits, parry, 1, 1) > 0.0);
  CHECK(alpha_coefficient(r.a, *r.limits, parry, 1, 3) == 0.0);
  CHECK(alpha_coefficient(r.a, *r.limits, parry, 1, 5) == 0.0);
  CHECK(alpha_coefficient(r.a, *r.limits, parry, 2, 3) > 0.0);
  CHECK(alpha_coefficient(r.a, *r.limits, parry, 2, 6) == 0.0);
  CHECK(alpha_coefficient(r.a, *r.limits, parry, 4, 2) > 0.0);
}

TEST_CASE("shadows on the free group") {
  const Fixture f("free:2");
  const auto& s = f.aut.alphabet();
  CHECK(shadow_mass_tree(f.aut, f.oracle, f.lv(), s.parse("a"), 0.5) == Approx(0.25));
  CHECK(shadow_mass_tree(f.aut, f.oracle, f.lv(), s.parse("ab"), 3.0) == Approx(1.0));
  CHECK(shadow_mass_tree(f.aut, f.oracle, f.lv(), {}, 0.5) == Approx(1.0));
  for (const char* w : {"a", "ab", "abA", "bbbA", "abABab"}) {
    const Word g = s.parse(w);
    const double mass = shadow_mass_tree(f.aut, f.oracle, f.lv(), g, 0.5);
    CHECK(mass * std::pow(3.0, static_cast<double>(g.size())) == Approx(0.75));
    CHECK(mass == Approx(shadow_mass_brute(f.aut, f.oracle, f.lv(), g, 0.5, static_cast<int>(g.size()) + 2)));
  }
  // R = 1.5 around ab: the rays through a, minus those turning back at a.
  CHECK(shadow_mass_tree(f.aut, f.oracle, f.lv(), s.parse("ab"), 1.5) == Approx(0.25));
  CHECK(shadow_mass_tree(f.aut, f.oracle, f.lv(), s.parse("ab"), 1.5) ==
        Approx(shadow_mass_brute(f.aut, f.oracle, f.lv(), s.parse("ab"), 1.5, 5)));
}

TEST_CASE("shadows on free products agree with brute force") {
  const Fixture f("free_product:2,3");
  const auto& s = f.aut.alphabet();
  for (const char* w : {"a", "ab", "aBa", "abaB"})
    for (double R : {0.5, 1.0, 1.5, 2.5}) {
      const Word g = s.parse(w);
      CAPTURE(w);
      CAPTURE(R);
      CHECK(shadow_mass_tree(f.aut, f.oracle, f.lv(), g, R) ==
            Approx(shadow_mass_brute(f.aut, f.oracle, f.lv(), g, R, static_cast<int>(g.size()) + 4)));
    }
}

TEST_CASE("shadow preconditions") {
  const Fixture f("free:2");
  const auto s = GeneratorAlphabet::letters(4);
  const auto dehn = GroupOracle::dehn(s, {s.parse("abABcdCD")});
  try {
    shadow_mass_tree(f.aut, dehn, f.lv(), {}, 0.5);
    FAIL("expected NotTreeLike");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotTreeLike);
  }
}

TEST_CASE("quasiconformality") {
  const Fixture f("free:2");
  const auto q = quasiconformality_report(f.aut, f.oracle, f.lv(), 8, 0.5);
  CHECK(q.min == Approx(0.75).epsilon(1e-9));
  CHECK(q.max == Approx(0.75).epsilon(1e-9));
  const auto id = quasiconformality_report(f.aut, f.oracle, f.lv(), 0, 0.5);
  CHECK(id.min == 1.0);
  CHECK(id.max == 1.0);
  const Fixture g("free_product:2,3");
  const auto q23 = quasiconformality_report(g.aut, g.oracle, g.lv(), 8, 0.5);
  CHECK(q23.min > 0.0);
  CHECK(q23.max / q23.min <= 4.0);
}

TEST_CASE("finite weighted measures approach the cylinder masses") {
  const Fixture f("free:2");
  const auto reg = ps_regression(f.report.a, f.lv(), 40, 4);
  CHECK(reg.tv_conditioned < 1e-12);
  CHECK(reg.tv_ball > 0.0);
  const Fixture g("free_product:2,2,2");
  CHECK(ps_regression(g.report.a, g.lv(), 40, 4).tv_conditioned < 1e-3);
}

TEST_CASE("ray statistics") {
  const Fixture f("free:2");
  RayOptions options;
  options.length = 200;
  options.trials = 50;
  options.lambda = 1.0;
  options.sigma = 0.0;
  options.eps = {0.1};
  options.seed = 3;
  const auto length = ray_statistics(f.aut, f.report, identity_word_length(f.oracle), options);
  for (double m : length.mean_rate) CHECK(m == Approx(1.0));
  for (double d : length.deviation[0]) CHECK(d == 0.0);
  CHECK_FALSE(length.clt_available);
  CHECK(length.entry_degenerate);

  options.lambda = 0.0;
  const auto hom = ray_statistics(f.aut, f.report, first_exponent_sum(f.aut.alphabet()), options);
  CHECK(hom.mean_rate.back() < 0.2);

  RayOptions sanov;
  sanov.length = 2000;
  sanov.trials = 200;
  sanov.lambda = 0.642;
  sanov.sigma = 0.218;
  sanov.eps = {0.2 * 0.642};
  sanov.checkpoints = {200, 2000};
  sanov.seed = 4;
  const auto r = ray_statistics(f.aut, f.report, LogNormFunctional{LinearRepresentation::sanov()}, sanov);
  CHECK(r.deviation[0][1] <= r.deviation[0][0]);
  CHECK(r.median_abs_error[1] < r.median_abs_error[0]);
  CHECK(r.clt_available);
  CHECK(r.terminal_normalized.size() == 200);
  CHECK(r.marginals.size() == 200);
}

TEST_CASE("entry times on a fixture with a transient loop") {
  // The free-group block plus a vertex t with a loop that feeds into it; rays
  // leave t with probability 2/3 per step.
  const auto f2 = build_free_group_automaton(2);
  auto vertices = f2.vertices();
  vertices.push_back("t");
  const int t = static_cast<int>(vertices.size()) - 1;
  auto edges = f2.edges();
  const auto& s = f2.alphabet();
  edges.push_back({0, t, s.letter("b")});
  edges.push_back({t, t, s.letter("b")});
  edges.push_back({t, *f2.find_vertex("a"), s.letter("a")});
  const Automaton aut(s, vertices, edges, false);
  const auto report = analyze(aut);
  RayOptions options;
  options.length = 40;
  options.trials = 20000;
  options.eps = {0.1};
  options.seed = 9;
  const auto r = ray_statistics(aut, report, first_exponent_sum(s), options);
  CHECK_FALSE(r.entry_degenerate);
  CHECK(r.entry_ratio == Approx(1.0 / 3).epsilon(0.1));
  CHECK(r.entry_r2 > 0.95);
}
