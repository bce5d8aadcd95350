#include "doctest.h"

#include <cmath>
#include <array>
#include <filesystem>
#include <set>

#include "hyperlab/counting.hpp"
#include "hyperlab/error.hpp"
#include "hyperlab/stats.hpp"

using namespace hyperlab;
using doctest::Approx;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no exception");
  return ErrorCode::InvalidArgument;
}

BigInt power(int base, int exp) {
  BigInt r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

}  // namespace

TEST_CASE("exact sphere counts") {
  const auto f2 = build_free_group_automaton(2);
  const CountTable t(f2, 60);
  CHECK(t.sphere_size(0) == 1);
  for (int n = 1; n <= 60; ++n) CHECK(t.sphere_size(n) == 4 * power(3, n - 1));
  CHECK(t.small_depth() >= 39);
  CHECK(t.small_count(0, 20) == 4 * 1162261467ULL);

  const CountTable t23(build_free_product_automaton({2, 3}), 3);
  CHECK(t23.sphere_size(1) == 3);
  CHECK(t23.sphere_size(2) == 4);
  CHECK(t23.sphere_size(3) == 6);
  CHECK(code_of([&] { t23.count(0, 4); }) == ErrorCode::DepthTooLarge);
}

TEST_CASE("counts agree with the oracle on every built-in") {
  for (const auto& spec : builtin_group_specs()) {
    CAPTURE(spec);
    const CountTable t(builtin_automaton(spec), 8);
    const auto bfs = parse_group_spec(spec).sphere_sizes_bfs(8);
    for (int n = 0; n <= 8; ++n) CHECK(t.sphere_size(n) == bfs[static_cast<std::size_t>(n)]);
  }
}

TEST_CASE("count table files") {
  const auto f2 = build_free_group_automaton(2);
  const CountTable t(f2, 12);
  const auto text = t.serialize();
  CHECK(text.rfind("# hyperlab-counts ", 0) == 0);
  const auto back = CountTable::deserialize(f2, text);
  CHECK(back.depth() == 12);
  CHECK(back.serialize() == text);
  CHECK(code_of([&] { CountTable::deserialize(build_free_group_automaton(3), text); }) ==
        ErrorCode::ParseError);
  CHECK(code_of([&] { CountTable::deserialize(f2, "garbage"); }) == ErrorCode::ParseError);

  const auto dir = std::filesystem::temp_directory_path() / "hyperlab_count_cache_test";
  std::filesystem::remove_all(dir);
  const auto built = CountTable::load_or_build(f2, 10, dir);
  const auto cached = CountTable::load_or_build(f2, 8, dir);
  CHECK(cached.depth() == 8);
  CHECK(cached.sphere_size(8) == built.sphere_size(8));
  const auto deeper = CountTable::load_or_build(f2, 14, dir);
  CHECK(deeper.sphere_size(14) == 4 * power(3, 13));
  std::filesystem::remove_all(dir);
}

TEST_CASE("sphere enumeration") {
  const auto f2 = build_free_group_automaton(2);
  const auto& s = f2.alphabet();
  const auto s1 = sphere_words(f2, 1);
  CHECK(std::set<Word>(s1.begin(), s1.end()) ==
        std::set<Word>{s.parse("a"), s.parse("A"), s.parse("b"), s.parse("B")});
  const auto s2 = sphere_words(f2, 2);
  CHECK(s2.size() == 12);
  for (const auto& w : s2) CHECK(w[1] != s.inverse(w[0]));

  const auto a23 = build_free_product_automaton({2, 3});
  const auto w3 = sphere_words(a23, 3);
  const auto& t = a23.alphabet();
  std::set<Word> expected;
  for (const char* w : {"aba", "aBa", "bab", "baB", "Bab", "BaB"}) expected.insert(t.parse(w));
  CHECK(std::set<Word>(w3.begin(), w3.end()) == expected);

  CHECK(code_of([&] { sphere_words(f2, 20); }) == ErrorCode::DepthTooLarge);
  CHECK(sphere_words(f2, 0) == std::vector<Word>{Word{}});
}

TEST_CASE("uniform sphere sampling") {
  const auto f2 = build_free_group_automaton(2);
  const CountTable table(f2, 40);
  Rng rng(5, 0);
  CHECK(sample_sphere_uniform(f2, table, 0, rng).empty());

  std::map<Word, int> freq;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++freq[sample_sphere_uniform(f2, table, 1, rng)];
  CHECK(freq.size() == 4);
  const double se = std::sqrt(0.25 * 0.75 / draws);
  for (const auto& [w, c] : freq) CHECK(std::abs(c / double(draws) - 0.25) < 4 * se);

  // Large n goes through the big-integer path; draws are reduced words.
  const auto oracle = GroupOracle::free(2);
  for (int i = 0; i < 50; ++i) CHECK(oracle.word_length(sample_sphere_uniform(f2, table, 40, rng)) == 40);

  // Every element of S_4 is hit at a rate near 1/108.
  std::map<Word, int> s4;
  for (int i = 0; i < 108000; ++i) ++s4[sample_sphere_uniform(f2, table, 4, rng)];
  CHECK(s4.size() == 108);
  const double p = 1.0 / 108;
  const double se4 = std::sqrt(p * (1 - p) / 108000);
  int outside = 0;
  for (const auto& [w, c] : s4) outside += std::abs(c / 108000.0 - p) > 5 * se4;
  CHECK(outside <= 1);
}

TEST_CASE("uniform big integers") {
  Rng rng(2, 0);
  const BigInt bound = power(3, 50);
  for (int i = 0; i < 100; ++i) {
    const BigInt x = uniform_below(bound, rng);
    CHECK(x >= 0);
    CHECK(x < bound);
  }
  // Bound 3: each residue about a third of the time.
  std::array<int, 3> hits{};
  for (int i = 0; i < 30000; ++i) ++hits[uniform_below(3, rng).convert_to<std::size_t>()];
  for (int h : hits) CHECK(std::abs(h - 10000) < 4 * std::sqrt(30000 * (2.0 / 9)));
}

TEST_CASE("spherical statistics of simple functionals") {
  const auto f2 = build_free_group_automaton(2);
  const auto oracle = GroupOracle::free(2);
  SphereOptions options;
  options.lambda_ref = 1.0;
  options.eps = {0.05, 0.5};
  const auto length = spherical_statistics(f2, identity_word_length(oracle), 8,
                                           SphereMode::exact_mode(), options);
  CHECK(length.count == 8748);
  CHECK(length.evaluated == 8748);
  CHECK(length.mean / 8 == Approx(1.0));
  CHECK(length.variance == Approx(0.0).scale(1.0));
  for (const auto& [eps, frac] : length.deviation_fractions) CHECK(frac == 0.0);

  const auto hom = first_exponent_sum(f2.alphabet());
  SphereOptions plain;
  double previous = 1.0;
  for (int n : {4, 8, 12}) {
    const auto st = spherical_statistics(f2, hom, n, SphereMode::exact_mode(), plain);
    CHECK(st.mean / n < previous);
    previous = st.mean / n;
  }
}

TEST_CASE("monte carlo agrees with exact enumeration") {
  const auto f2 = build_free_group_automaton(2);
  const SubadditiveFunctional f = LogNormFunctional{LinearRepresentation::sanov()};
  SphereOptions options;
  const auto exact = spherical_statistics(f2, f, 10, SphereMode::exact_mode(), options);
  const auto mc = spherical_statistics(f2, f, 10, SphereMode::monte_carlo(100000, 3), options);
  CHECK(mc.evaluated == 100000);
  CHECK(std::abs(mc.mean - exact.mean) < 4 * mc.standard_error);
  const auto again = spherical_statistics(f2, f, 10, SphereMode::monte_carlo(100000, 3), options);
  CHECK(again.mean == mc.mean);

  SphereOptions parallel;
  parallel.workers = 3;
  CHECK(spherical_statistics(f2, f, 10, SphereMode::exact_mode(), parallel).mean ==
        Approx(exact.mean).epsilon(1e-14));
}

TEST_CASE("deviation fractions shrink") {
  const auto f2 = build_free_group_automaton(2);
  const SubadditiveFunctional f = LogNormFunctional{LinearRepresentation::sanov()};
  LimitSchedule schedule;
  for (int n = 2; n <= 10; ++n) schedule.exact_depths.push_back(n);
  const auto est = estimate_limits(f2, f, schedule);
  SphereOptions options;
  options.lambda_ref = est.lambda;
  options.eps = {0.2 * est.lambda, 0.5 * est.lambda};
  const auto s6 = spherical_statistics(f2, f, 6, SphereMode::exact_mode(), options);
  const auto s10 = spherical_statistics(f2, f, 10, SphereMode::exact_mode(), options);
  CHECK(s10.deviation_fractions[0].second < s6.deviation_fractions[0].second);
  // At half of Lambda nothing on S_6 deviates: ||g|| lies in [12, 199] there.
  CHECK(s6.deviation_fractions[1].second == 0.0);
  CHECK(s10.deviation_fractions[1].second > 0.0);
}

TEST_CASE("limit estimates") {
  const auto f2 = build_free_group_automaton(2);
  LimitSchedule schedule;
  schedule.exact_depths = {2, 3, 4, 5, 6, 7, 8};
  const auto length = estimate_limits(f2, identity_word_length(GroupOracle::free(2)), schedule);
  CHECK(length.lambda == Approx(1.0));
  CHECK(std::abs(length.sigma2) < 1e-9);

  const auto sanov = estimate_limits(f2, LogNormFunctional{LinearRepresentation::sanov()}, schedule);
  CHECK(sanov.lambda > 0.6);
  CHECK(sanov.lambda < 0.7);
  CHECK(sanov.lambda > 5 * sanov.standard_error);
  CHECK(sanov.method == "counting_extrapolation");

  LimitSchedule few;
  few.exact_depths = {2, 3};
  CHECK(code_of([&] { estimate_limits(f2, identity_word_length(GroupOracle::free(2)), few); }) ==
        ErrorCode::InsufficientData);
}

TEST_CASE("cartan vector means") {
  const auto f2 = build_free_group_automaton(2);
  const auto m8 = cartan_sphere_mean(f2, LinearRepresentation::sanov(), 8);
  CHECK(m8.size() == 2);
  CHECK(m8[0] > 0.0);
  CHECK(m8[0] > m8[1]);
  CHECK(m8[0] + m8[1] == Approx(0.0).scale(1.0));
}

TEST_CASE("clt comparison suite") {
  const auto aut = builtin_automaton("free_product:2,3");
  const auto report = clt_comparison_suite(aut, {2, 3, 4, 5, 6}, 2, {1.0, 2.0}, {0, 1});
  CHECK(report.p == 2);
  CHECK(report.geometric_ratio.count(0) == 1);
  CHECK(report.geometric_ratio.count(1) == 1);
  for (const auto& row : report.tau_mu)
    if (row.tv_exhaustive) CHECK(row.tv == Approx(*row.tv_exhaustive).scale(1.0));

  const auto f2 = build_free_group_automaton(2);
  const auto flat = clt_comparison_suite(f2, {2, 3, 4}, 1, {1.0}, {0});
  for (const auto& row : flat.tau_mu) CHECK(row.tv < 1e-12);
}
