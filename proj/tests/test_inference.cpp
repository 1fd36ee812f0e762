// Copyright 2026  The voweldpp Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <map>

#include "oracles.hpp"
#include "voweldpp/dpp.hpp"
#include "voweldpp/inference.hpp"

using namespace voweldpp;

namespace {

UniversalModel random_model(int N, Rng& rng, double s2 = 0.4, bool affine = true) {
  std::normal_distribution<double> g(0.0, 1.0);
  UniversalModel m;
  for (int i = 0; i < N; ++i) m.means.emplace_back(g(rng), g(rng));
  m.sigma2 = s2;
  m.rho = 1.0;
  m.lambda = 5.0;
  m.foc = FocalizationNet::random_init(4, 0.5, rng);
  for (int h = 0; h < 4; ++h) m.foc.U2[h] = 0.3 * g(rng);
  if (affine) {
    DiffeoLayer layer;
    layer.W = Mat2::Identity() + 0.2 * Mat2::NullaryExpr([&] { return g(rng); });
    layer.b = 0.1 * Vec2::NullaryExpr([&] { return g(rng); });
    m.diffeo.layers.push_back(layer);
  }
  return m;
}

LanguageInventory language_of(std::vector<Vec2> pts, const std::string& id = "x") {
  LanguageInventory lang{id, std::move(pts), {}};
  lang.labels.assign(lang.pronunciations.size(), "");
  return lang;
}

LanguageInventory random_language(int n, Rng& rng, const std::string& id = "x") {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Vec2> pts;
  for (int k = 0; k < n; ++k) pts.emplace_back(g(rng), g(rng));
  return language_of(pts, id);
}

// Empirical alignment frequencies of the MH chain against the exact posterior.
double chain_tv(const UniversalModel& m, const LanguageInventory& lang, long updates,
                std::uint64_t seed, const GibbsOptions& opts = {}) {
  const auto exact = oracle::alignment_posterior(m, lang);
  const Eigen::MatrixXd L = m.L();
  LanguageSampler sampler(L, m.diagonal_only(), emission_table(m, lang));
  Rng rng(seed);
  Alignment a = sampler.greedy_init(rng);
  const int n = static_cast<int>(lang.size());
  for (int t = 0; t < 2000; ++t) sampler.update(a, t % n, rng, opts);
  std::map<Alignment, double> counts;
  for (long t = 0; t < updates; ++t) {
    sampler.update(a, static_cast<int>(t % n), rng, opts);
    counts[a] += 1.0;
  }
  std::vector<double> p, q;
  for (const auto& [al, prob] : exact) {
    p.push_back(prob);
    q.push_back(counts[al] / static_cast<double>(updates));
  }
  return oracle::total_variation(p, q);
}

}  // namespace

TEST_CASE("emission table matches the direct density") {
  Rng rng(1);
  const UniversalModel m = random_model(5, rng);
  const LanguageInventory lang = random_language(3, rng);
  const Eigen::MatrixXd t = emission_table(m, lang);
  REQUIRE(t.rows() == 3);
  REQUIRE(t.cols() == 5);
  for (int k = 0; k < 3; ++k)
    for (int j = 0; j < 5; ++j)
      CHECK(t(k, j) == doctest::Approx(oracle::emission(m, j, lang.pronunciations[k])).epsilon(1e-12));
}

TEST_CASE("initial alignments") {
  Rng rng(2);
  SUBCASE("one phone, one vowel") {
    const UniversalModel m = random_model(1, rng);
    Corpus c;
    c.languages.push_back(random_language(1, rng));
    const ChainState s = init_alignments(m, c, 4);
    REQUIRE(s.alignments.size() == 1);
    CHECK(s.alignments[0] == Alignment{0});
  }
  SUBCASE("tiny variance picks the nearest phone") {
    UniversalModel m;
    m.means = {Vec2(-2, 0), Vec2(0, 0), Vec2(2, 0), Vec2(0, 2)};
    m.sigma2 = 1e-4;
    m.foc = FocalizationNet::zeros(2);
    Corpus c;
    c.languages.push_back(language_of({Vec2(1.9, 0.1), Vec2(0.1, 1.8), Vec2(-2.1, 0)}));
    for (std::uint64_t seed = 0; seed < 10; ++seed)
      CHECK(init_alignments(m, c, seed).alignments[0] == Alignment{2, 3, 0});
  }
  SUBCASE("every alignment is injective and in range") {
    const UniversalModel m = random_model(6, rng);
    Corpus c;
    for (int l = 0; l < 20; ++l) c.languages.push_back(random_language(1 + l % 6, rng));
    const ChainState s = init_alignments(m, c, 9);
    REQUIRE(s.alignments.size() == 20);
    REQUIRE(s.language_rngs.size() == 20);
    for (int l = 0; l < 20; ++l)
      CHECK_NOTHROW(validate_alignment(s.alignments[l], c.languages[l].size(), 6));
  }
  SUBCASE("too many vowels names the language") {
    const UniversalModel m = random_model(2, rng);
    Corpus c;
    c.languages.push_back(random_language(2, rng, "ok"));
    c.languages.push_back(random_language(3, rng, "xyzzy"));
    try {
      init_alignments(m, c, 1);
      FAIL("expected a contract error");
    } catch (const ContractError& e) {
      CHECK(std::string(e.what()).find("xyzzy") != std::string::npos);
    }
  }
}

TEST_CASE("update with every phone in use is a no-op") {
  Rng rng(3);
  const UniversalModel m = random_model(3, rng);
  const LanguageInventory lang = random_language(3, rng);
  const Alignment a{2, 0, 1};
  for (int t = 0; t < 50; ++t) CHECK(gibbs_update_one(m, lang, a, t % 3, rng) == a);
}

TEST_CASE("update only changes the chosen slot") {
  Rng rng(4);
  const UniversalModel m = random_model(7, rng);
  const LanguageInventory lang = random_language(3, rng);
  Alignment a{0, 1, 2};
  for (int t = 0; t < 300; ++t) {
    const int k = t % 3;
    const Alignment b = gibbs_update_one(m, lang, a, k, rng);
    for (int j = 0; j < 3; ++j)
      if (j != k) CHECK(b[j] == a[j]);
    CHECK_NOTHROW(validate_alignment(b, 3, 7));
    a = b;
  }
}

TEST_CASE("chain leaves the exact posterior invariant") {
  Rng rng(5);
  SUBCASE("dpp, affine map") {
    const UniversalModel m = random_model(5, rng);
    CHECK(chain_tv(m, random_language(2, rng), 200000, 11) < 0.02);
  }
  SUBCASE("dpp, strongly repulsive kernel") {
    UniversalModel m = random_model(4, rng, 1.0, false);
    m.means = {Vec2(0, 0), Vec2(0.2, 0), Vec2(1.5, 0), Vec2(0, 1.5)};
    m.foc = FocalizationNet::zeros(2);
    m.foc.b2 = -3.0;
    CHECK(chain_tv(m, random_language(2, rng), 200000, 12) < 0.02);
  }
  SUBCASE("bpp") {
    UniversalModel m = random_model(5, rng);
    m.prior = SubsetPrior::kBpp;
    CHECK(chain_tv(m, random_language(3, rng), 200000, 13) < 0.02);
  }
  SUBCASE("bpp with equal diagonals samples the likelihood-only posterior") {
    UniversalModel m = random_model(5, rng, 0.4, false);
    m.prior = SubsetPrior::kBpp;
    m.foc = FocalizationNet::zeros(2);
    const LanguageInventory lang = random_language(2, rng);
    // Equal L_ii makes every injective alignment equally likely a priori.
    std::map<Alignment, double> lik;
    double total = 0.0;
    for_each_injective(2, 5, [&](const Alignment& a) {
      const double w = std::exp(oracle::emission(m, a[0], lang.pronunciations[0]) +
                                oracle::emission(m, a[1], lang.pronunciations[1]));
      lik[a] = w;
      total += w;
    });
    const auto post = oracle::alignment_posterior(m, lang);
    for (const auto& [a, w] : lik) CHECK(post.at(a) == doctest::Approx(w / total).epsilon(1e-10));
    CHECK(chain_tv(m, lang, 200000, 14) < 0.02);
  }
}

TEST_CASE("heuristic acceptance is biased on a repulsive instance") {
  // Two nearby phones near the single vowel; the exact chain stays close to
  // the posterior, the heuristic does not.
  UniversalModel m;
  m.means = {Vec2(0, 0), Vec2(0.3, 0), Vec2(3, 0)};
  m.sigma2 = 0.5;
  m.foc = FocalizationNet::zeros(2);
  m.foc.b2 = -2.0;
  const LanguageInventory lang = language_of({Vec2(0.1, 0), Vec2(0.2, 0.1)});
  const double exact = chain_tv(m, lang, 200000, 21);
  GibbsOptions h;
  h.barker_heuristic = true;
  const double heuristic = chain_tv(m, lang, 200000, 21, h);
  CHECK(exact < 0.02);
  CHECK(heuristic > exact);
}

TEST_CASE("e-step sampling") {
  Rng rng(6);
  const UniversalModel m = random_model(8, rng);
  Corpus c;
  for (int l = 0; l < 6; ++l) c.languages.push_back(random_language(2 + l % 4, rng, "l" + std::to_string(l)));

  SUBCASE("sample count and sweep counter") {
    ChainState s = init_alignments(m, c, 3);
    const auto samples = e_step(m, c, s, 4);
    CHECK(samples.size() == 4);
    CHECK(s.sweep_count == 4);
    for (const auto& sample : samples) {
      REQUIRE(sample.size() == 6);
      for (int l = 0; l < 6; ++l) CHECK_NOTHROW(validate_alignment(sample[l], c.languages[l].size(), 8));
    }
    CHECK(samples.back() == s.alignments);
    e_step(m, c, s, 3);
    CHECK(s.sweep_count == 7);
    CHECK(s.proposals > 0);
  }
  SUBCASE("same seed, same samples; warm start continues the chain") {
    ChainState a = init_alignments(m, c, 17), b = init_alignments(m, c, 17);
    CHECK(e_step(m, c, a, 5) == e_step(m, c, b, 5));
    const auto more = e_step(m, c, a, 5);
    ChainState fresh = init_alignments(m, c, 17);
    const auto ten = e_step(m, c, fresh, 10);
    CHECK(more.back() == ten.back());
  }
  SUBCASE("thread count does not change the samples") {
    ChainState a = init_alignments(m, c, 23), b = init_alignments(m, c, 23);
    CHECK(e_step(m, c, a, 5, {}, 1) == e_step(m, c, b, 5, {}, 4));
  }
  SUBCASE("random scan still yields valid alignments") {
    GibbsOptions o;
    o.random_scan = true;
    ChainState s = init_alignments(m, c, 5);
    for (const auto& sample : e_step(m, c, s, 10, o))
      for (int l = 0; l < 6; ++l) CHECK_NOTHROW(validate_alignment(sample[l], c.languages[l].size(), 8));
  }
  SUBCASE("mismatched state is rejected") {
    ChainState s = init_alignments(m, c, 5);
    s.alignments.pop_back();
    CHECK_THROWS_AS(e_step(m, c, s, 1), ContractError);
  }
}

TEST_CASE("reversible jump bookkeeping") {
  Rng rng(7);
  SUBCASE("no death when every phone is in use") {
    UniversalModel m = random_model(3, rng);
    m.lambda = 1e-6;  // births essentially never accepted
    Corpus c;
    c.languages.push_back(random_language(3, rng));
    ChainState s = init_alignments(m, c, 1);
    const RjStats st = rjmcmc_resample_N(m, c, s, 200);
    CHECK(st.deaths_accepted == 0);
    CHECK(st.births_accepted == 0);
    CHECK(m.num_phones() == 3);
  }
  SUBCASE("huge lambda accepts births") {
    UniversalModel m = random_model(5, rng, 1.0, false);
    m.lambda = 1e6;
    Corpus c;
    c.languages.push_back(random_language(1, rng));
    ChainState s = init_alignments(m, c, 2);
    const RjStats st = rjmcmc_resample_N(m, c, s, 1000);
    REQUIRE(st.births_proposed > 0);
    CHECK(static_cast<double>(st.births_accepted) / st.births_proposed > 0.9);
    CHECK(m.num_phones() == 5 + st.births_accepted - st.deaths_accepted);
  }
  SUBCASE("alignments follow the phones they point to") {
    UniversalModel m = random_model(10, rng, 0.5, false);
    m.lambda = 10.0;
    Corpus c;
    for (int l = 0; l < 4; ++l) c.languages.push_back(random_language(2, rng));
    ChainState s = init_alignments(m, c, 3);
    std::vector<std::vector<Vec2>> before;
    for (const auto& a : s.alignments) {
      before.emplace_back();
      for (int j : a) before.back().push_back(m.means[j]);
    }
    for (int round = 0; round < 20; ++round) rjmcmc_resample_N(m, c, s, 10);
    for (std::size_t l = 0; l < s.alignments.size(); ++l) {
      CHECK_NOTHROW(validate_alignment(s.alignments[l], 2, m.num_phones()));
      for (std::size_t k = 0; k < 2; ++k) CHECK(m.means[s.alignments[l][k]] == before[l][k]);
    }
  }
}

TEST_CASE("reversible jump targets the joint over N") {
  // Means restricted to a three-point grid; with one language holding one
  // vowel the joint over (N, means, alignment) is enumerable.
  const std::vector<Vec2> grid{Vec2(-1, 0), Vec2(0, 0.5), Vec2(1, 0)};
  const std::vector<double> q{0.2, 0.5, 0.3};
  UniversalModel m;
  m.sigma2 = 0.5;
  m.lambda = 1.5;
  m.foc = FocalizationNet::zeros(2);
  const LanguageInventory lang = language_of({Vec2(0.2, 0.1)});
  Corpus c;
  c.languages.push_back(lang);

  const int n_max = 8;
  std::vector<double> exact(n_max + 1, 0.0);
  double log_fact = 0.0;
  for (int N = 1; N <= n_max; ++N) {
    log_fact += std::log(static_cast<double>(N));
    const double log_pois = N * std::log(m.lambda) - m.lambda - log_fact;
    std::vector<int> idx(static_cast<std::size_t>(N), 0);
    while (true) {
      UniversalModel t = m;
      double log_q = 0.0;
      for (int i : idx) {
        t.means.push_back(grid[i]);
        log_q += std::log(q[i]);
      }
      const Eigen::MatrixXd L = oracle::L_matrix(t);
      const double z = oracle::det(L + Eigen::MatrixXd::Identity(N, N));
      for (int a = 0; a < N; ++a)
        exact[N] += std::exp(log_pois + log_q + oracle::emission(t, a, lang.pronunciations[0])) *
                    L(a, a) / z;
      int pos = 0;
      while (pos < N && ++idx[pos] == 3) idx[pos++] = 0;
      if (pos == N) break;
    }
  }
  double total = 0.0;
  for (double e : exact) total += e;
  for (double& e : exact) e /= total;

  auto draw = [&](Rng& r) {
    std::discrete_distribution<int> d(q.begin(), q.end());
    return grid[d(r)];
  };
  m.means = {grid[1], grid[2]};
  ChainState s = init_alignments(m, c, 8);
  const long iters = 300000;
  std::vector<double> counts(n_max + 1, 0.0);
  double beyond = 0.0;
  for (long t = 0; t < iters; ++t) {
    rjmcmc_resample_N(m, c, s, 1, draw);
    e_step(m, c, s, 1);
    if (m.num_phones() <= n_max)
      counts[m.num_phones()] += 1.0;
    else
      beyond += 1.0;
  }
  for (double& x : counts) x /= iters;
  CHECK(beyond / iters < 0.005);
  CHECK(oracle::total_variation(exact, counts) < 0.02);
}
