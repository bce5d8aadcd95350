#include "doctest.h"

#include <cmath>

#include "hyperlab/automaton.hpp"
#include "hyperlab/error.hpp"
#include "hyperlab/spectral.hpp"

using namespace hyperlab;
using doctest::Approx;

namespace {

Matrix cycle3() {
  Matrix a = Matrix::Zero(3, 3);
  a(0, 1) = a(1, 2) = a(2, 0) = 1;
  return a;
}

int vertex(const Automaton& aut, const char* name) { return *aut.find_vertex(name); }

}  // namespace

TEST_CASE("component decomposition") {
  const auto f2 = analyze(build_free_group_automaton(2));
  const auto& d = f2.decomposition;
  int nontrivial = 0;
  for (std::size_t c = 0; c < d.components.size(); ++c) {
    if (d.trivial[c]) continue;
    ++nontrivial;
    CHECK(d.components[c].size() == 4);
  }
  CHECK(nontrivial == 1);
  CHECK(d.trivial[static_cast<std::size_t>(d.component_of[0])]);

  const auto a23 = analyze(build_free_product_automaton({2, 3}));
  CHECK(a23.maximal.indices.size() == 1);
  CHECK(a23.decomposition.components[static_cast<std::size_t>(a23.maximal.indices[0])].size() == 3);

  Matrix chain = Matrix::Zero(3, 3);
  chain(0, 1) = chain(1, 2) = 1;
  const auto dc = scc_decomposition(chain);
  REQUIRE(dc.components.size() == 3);
  CHECK(dc.components[0] == std::vector<int>{0});
  CHECK(dc.components[1] == std::vector<int>{1});
  CHECK(dc.components[2] == std::vector<int>{2});
  CHECK(dc.trivial == std::vector<bool>{true, true, true});
  CHECK(dc.reaches[0][2]);
  CHECK_FALSE(dc.reaches[2][0]);
}

TEST_CASE("growth rates") {
  CHECK(analyze(build_free_group_automaton(2)).growth.lambda == Approx(3.0).epsilon(1e-12));
  CHECK(analyze(build_free_product_automaton({2, 3})).growth.lambda ==
        Approx(std::sqrt(2.0)).epsilon(1e-12));
  const auto z = analyze(build_free_group_automaton(1));
  CHECK(z.growth.lambda == Approx(1.0));
  CHECK_FALSE(z.has_growth());
  CHECK_FALSE(z.limits.has_value());

  Matrix chain = Matrix::Zero(2, 2);
  chain(0, 1) = 1;
  try {
    growth_rate(chain, scc_decomposition(chain));
    FAIL("expected NoGrowth");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoGrowth);
  }
}

TEST_CASE("maximal components") {
  CHECK(analyze(build_free_group_automaton(2)).maximal.indices.size() == 1);
  const auto two = analyze(build_two_component_fixture());
  CHECK(two.maximal.indices.size() == 2);
  CHECK(two.maximal.disjoint);
  CHECK(two.growth.lambda == Approx(3.0));
  for (const auto& spec : builtin_group_specs()) CHECK(analyze(builtin_automaton(spec)).maximal.disjoint);
}

TEST_CASE("periods") {
  const auto f2 = analyze(build_free_group_automaton(2));
  CHECK(f2.parry[0].period == 1);
  const auto a23 = analyze(build_free_product_automaton({2, 3}));
  CHECK(a23.parry[0].period == 2);
  CHECK(a23.p_common == 2);
  CHECK(period(cycle3()) == 3);
}

TEST_CASE("perron data") {
  const Matrix a = transition_matrix(build_free_product_automaton({2, 3}));
  const auto pd = perron(submatrix(a, {1, 2, 3}));
  CHECK(pd.radius == Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK((submatrix(a, {1, 2, 3}) * pd.right - pd.radius * pd.right).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(pd.left.dot(pd.right) == Approx(1.0));
}

TEST_CASE("parry measures") {
  const auto f2 = analyze(build_free_group_automaton(2));
  const auto& p = f2.parry[0];
  CHECK(p.vertices.size() == 4);
  for (Eigen::Index i = 0; i < 4; ++i) {
    CHECK(p.stationary(i) == Approx(0.25));
    for (Eigen::Index j = 0; j < 4; ++j)
      CHECK((p.kernel(i, j) == Approx(1.0 / 3) || p.kernel(i, j) == 0.0));
  }
  CHECK(p.entropy() == Approx(std::log(3.0)).epsilon(1e-10));

  const auto c = parry_measure(cycle3(), {0, 1, 2});
  CHECK(c.kernel(0, 1) == Approx(1.0));
  CHECK(c.stationary(2) == Approx(1.0 / 3));
  CHECK(c.period == 3);

  const auto aut = build_free_product_automaton({2, 3});
  const auto a23 = analyze(aut);
  const auto& q = a23.parry[0];
  CHECK(q.stationary(q.local_index(vertex(aut, "a"))) == Approx(0.5));
  CHECK(q.stationary(q.local_index(vertex(aut, "b"))) == Approx(0.25));
  CHECK(q.stationary(q.local_index(vertex(aut, "B"))) == Approx(0.25));
  CHECK((q.stationary.transpose() * q.kernel - q.stationary.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(q.entropy() == Approx(std::log(std::sqrt(2.0))).epsilon(1e-10));
  CHECK(q.local_index(0) == -1);
}

TEST_CASE("edge chains") {
  const auto f2 = edge_chain(analyze(build_free_group_automaton(2)).parry[0]);
  CHECK(f2.edges.size() == 12);
  for (Eigen::Index i = 0; i < 12; ++i) CHECK(f2.stationary(i) == Approx(1.0 / 12));
  CHECK((f2.stationary.transpose() * f2.kernel - f2.stationary.transpose()).cwiseAbs().maxCoeff() < 1e-12);

  const auto c = edge_chain(parry_measure(cycle3(), {0, 1, 2}));
  CHECK(c.edges.size() == 3);
  CHECK(c.kernel.cwiseEqual(1.0).count() == 3);

  const auto aut = build_free_product_automaton({2, 3});
  const auto e = edge_chain(analyze(aut).parry[0]);
  CHECK(e.edges.size() == 4);
  for (Eigen::Index i = 0; i < 4; ++i) CHECK(e.stationary(i) == Approx(0.25));
  CHECK(e.period == 2);
}

TEST_CASE("limit vectors") {
  const auto aut = build_free_group_automaton(2);
  const auto r = analyze(aut);
  REQUIRE(r.limits.has_value());
  const auto& lv = *r.limits;
  const double qa = lv.q(vertex(aut, "a"));
  for (const char* v : {"A", "b", "B"}) {
    CHECK(lv.q(vertex(aut, v)) == Approx(qa));
    CHECK(lv.p(vertex(aut, v)) == Approx(lv.p(vertex(aut, "a"))));
  }
  CHECK(lv.q(0) / qa == Approx(4.0 / 3));
  CHECK((r.a * lv.q - 3.0 * lv.q).cwiseAbs().maxCoeff() < 1e-10);

  const auto aut23 = build_free_product_automaton({2, 3});
  const auto r23 = analyze(aut23);
  const auto& l23 = *r23.limits;
  CHECK(l23.p_common == 2);
  CHECK(l23.q(vertex(aut23, "b")) == Approx(l23.q(vertex(aut23, "B"))));
  CHECK(l23.q(vertex(aut23, "a")) == Approx(std::sqrt(2.0) * l23.q(vertex(aut23, "b"))));
  CHECK((r23.a * l23.q - std::sqrt(2.0) * l23.q).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("pure exponential growth") {
  for (const auto& spec : builtin_group_specs()) {
    const auto r = analyze(builtin_automaton(spec));
    CHECK(r.pure_growth_min > 0.0);
    CHECK(r.pure_growth_max / r.pure_growth_min < 1e3);
  }
}

TEST_CASE("report json") {
  const auto aut = build_free_group_automaton(2);
  const auto text = report_json(aut, analyze(aut));
  CHECK(text.find("\"lambda\"") != std::string::npos);
}

TEST_CASE("path measures") {
  const auto aut = build_free_group_automaton(2);
  const auto r = analyze(aut);
  const auto& lv = *r.limits;

  const auto pi2 = pi_measure(r.a, lv, 2);
  CHECK(pi2.weights.size() == 36);
  for (const auto& [path, w] : pi2.weights) {
    CHECK(w > 0.0);
    for (int v : path) CHECK(v != 0);
  }
  CHECK(pi2.total() == Approx(1.0).epsilon(1e-12));

  // Summing out the last step recovers the shorter law.
  const auto pi3 = pi_measure(r.a, lv, 3);
  std::map<std::vector<int>, double> marginal;
  for (const auto& [path, w] : pi3.weights) marginal[{path.begin(), path.end() - 1}] += w;
  for (const auto& [path, w] : pi2.weights) CHECK(marginal[path] == Approx(w).epsilon(1e-12));

  const auto mu0 = mu_r_measure(r.a, lv, 0);
  REQUIRE(mu0.weights.size() == 1);
  CHECK(mu0.weights.begin()->first == std::vector<int>{0});
  CHECK(mu0.weights.begin()->second == Approx(1.0));

  // floor(0.6 log 6) = 1: middle paths of length 4, mass (1 * 3) / #S_6.
  CHECK(outer_blocks(0.6, 6) == 1);
  const auto tau = tilde_tau_measure(r.a, lv, 0.6, 6);
  CHECK(tau.length == 4);
  CHECK(tau.weights.size() == 324);
  for (const auto& [path, w] : tau.weights) CHECK(w == Approx(3.0 / 972.0).epsilon(1e-12));
}

TEST_CASE("total variation") {
  PathMeasure a{1, {{{0, 1}, 0.5}, {{0, 2}, 0.5}}};
  PathMeasure b{1, {{{0, 3}, 1.0}}};
  PathMeasure c{2, {{{0, 1, 1}, 1.0}}};
  CHECK(tv_distance(a, a) == 0.0);
  CHECK(tv_distance(a, b) == Approx(1.0));
  try {
    tv_distance(a, c);
    FAIL("expected LengthMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LengthMismatch);
  }
}

TEST_CASE("grouped distances agree with exhaustive measures") {
  for (const char* spec : {"free:2", "free_product:2,3", "free_product:2,4"}) {
    CAPTURE(spec);
    const auto r = analyze(builtin_automaton(spec));
    const auto& lv = *r.limits;
    const int p = lv.p_common;
    for (int n = 2; n <= 4; ++n) {
      for (int res = 0; res < p; ++res) {
        const int len = n * p + res;
        // tau_n: uniform on the sphere; mu_n: mu_r then uniform continuation.
        const double tv =
            tv_distance(uniform_sphere_measure(r.a, len), mu_measure(r.a, lv, n, res));
        CHECK(tv_tau_mu_grouped(r.a, lv, n, res) == Approx(tv).epsilon(1e-10).scale(1.0));
      }
      const auto cm = clt_measures(r.a, lv, 0, 0, 1.0, n);
      const auto grouped = tv_pi_tilde_tau_grouped(r.a, lv, 1.0, n);
      if (grouped) {
        const auto pi = pi_measure(r.a, lv, cm.tilde_tau.length);
        CHECK(*grouped == Approx(tv_distance(pi, cm.tilde_tau)).epsilon(1e-10).scale(1.0));
      }
    }
  }
}

TEST_CASE("sphere and mu laws decay geometrically apart") {
  // On the symmetric groups the two laws coincide; the 2,4 product is lopsided.
  const auto f2 = analyze(build_free_group_automaton(2));
  for (int n = 2; n <= 10; ++n) CHECK(tv_tau_mu_grouped(f2.a, *f2.limits, n, 0) < 1e-12);

  const auto r = analyze(builtin_automaton("free_product:2,4"));
  double previous = 1.0;
  for (int n = 2; n <= 10; ++n) {
    const double tv = tv_tau_mu_grouped(r.a, *r.limits, n, 1);
    CHECK(tv < previous);
    previous = tv;
  }
  CHECK(previous > 0.0);
}

TEST_CASE("support limit") {
  const auto r = analyze(build_free_group_automaton(2));
  try {
    uniform_sphere_measure(r.a, 10, 1000);
    FAIL("expected SupportTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SupportTooLarge);
  }
}

TEST_CASE("limit vector invariants on every built-in") {
  for (const auto& spec : builtin_group_specs()) {
    CAPTURE(spec);
    const auto r = analyze(builtin_automaton(spec));
    REQUIRE(r.limits.has_value());
    const auto& lv = *r.limits;
    CHECK((r.a * lv.q - lv.lambda * lv.q).cwiseAbs().maxCoeff() < 1e-10 * lv.q.cwiseAbs().maxCoeff());
    for (const auto& parry : r.parry) {
      CHECK(parry.entropy() == Approx(std::log(parry.radius)).epsilon(1e-8));
      CHECK((parry.stationary.transpose() * parry.kernel - parry.stationary.transpose())
                .cwiseAbs()
                .maxCoeff() < 1e-12);
    }
  }
}
