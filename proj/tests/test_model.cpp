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

#include <numbers>

#include "oracles.hpp"
#include "voweldpp/dpp.hpp"
#include "voweldpp/model.hpp"

using namespace voweldpp;

namespace {

UniversalModel random_model(int N, Rng& rng, int depth = 1, double s2 = 0.3) {
  std::normal_distribution<double> g(0.0, 1.0);
  UniversalModel m;
  for (int i = 0; i < N; ++i) m.means.emplace_back(g(rng), g(rng));
  m.sigma2 = s2;
  m.rho = 0.8;
  m.lambda = 7.0;
  m.foc = FocalizationNet::random_init(8, 0.5, rng);
  for (int h = 0; h < 8; ++h) m.foc.U2[h] = 0.3 * g(rng);
  m.foc.b2 = 0.2 * g(rng);
  for (int l = 0; l < depth; ++l) {
    DiffeoLayer layer;
    layer.W = Mat2::Identity() + 0.2 * Mat2::NullaryExpr([&] { return g(rng); });
    layer.b = 0.1 * Vec2::NullaryExpr([&] { return g(rng); });
    m.diffeo.layers.push_back(layer);
  }
  return m;
}

LanguageInventory random_language(int n, Rng& rng, const std::string& id = "x") {
  std::normal_distribution<double> g(0.0, 1.0);
  LanguageInventory lang{id, {}, {}};
  for (int k = 0; k < n; ++k) {
    lang.pronunciations.emplace_back(g(rng), g(rng));
    lang.labels.emplace_back();
  }
  return lang;
}

}  // namespace

TEST_CASE("Poisson prior on N") {
  UniversalModel m;
  m.lambda = 1.0;
  CHECK(log_prior_N(m) == doctest::Approx(-1.0));
  m.means = {Vec2(0, 0)};
  CHECK(log_prior_N(m) == doctest::Approx(-1.0));

  // pmf over N in [0, 400] sums to one at lambda = 100.
  m.lambda = 100.0;
  double total = 0.0, at100 = 0.0;
  double log_pmf = -100.0;  // N = 0, then recurrence p(N) = p(N-1) lambda / N
  for (int N = 0; N <= 400; ++N) {
    if (N > 0) log_pmf += std::log(100.0) - std::log(static_cast<double>(N));
    total += std::exp(log_pmf);
    if (N == 100) at100 = log_pmf;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  m.means.assign(100, Vec2(0, 0));
  CHECK(log_prior_N(m) == doctest::Approx(at100).epsilon(1e-12));
}

TEST_CASE("standard normal prior on means") {
  UniversalModel m;
  m.means = {Vec2(0, 0)};
  CHECK(log_prior_means(m) == doctest::Approx(-std::log(2 * std::numbers::pi)));
  m.means.push_back(Vec2(0, 0));
  CHECK(log_prior_means(m) == doctest::Approx(-2 * std::log(2 * std::numbers::pi)));
  Rng rng(1);
  const UniversalModel r = random_model(7, rng);
  double sq = 0.0;
  for (const auto& mu : r.means) sq += mu.squaredNorm();
  CHECK(log_prior_means(r) == doctest::Approx(-7 * std::log(2 * std::numbers::pi) - 0.5 * sq));
}

TEST_CASE("complete data with no languages is the priors") {
  Rng rng(2);
  const UniversalModel m = random_model(4, rng);
  const Corpus empty;
  CHECK(complete_data_log_likelihood(m, empty, {}) ==
        doctest::Approx(log_prior_means(m) + log_prior_N(m)));
}

TEST_CASE("single language, single phone") {
  Rng rng(3);
  const UniversalModel m = random_model(1, rng);
  Corpus c;
  c.languages.push_back(random_language(1, rng));
  const std::vector<Alignment> a{{0}};
  const Eigen::MatrixXd L = m.L();
  const double expect = transformed_logpdf(m.diffeo, m.means[0], m.sigma2, c.languages[0].pronunciations[0]) +
                        dpp_log_prob(L, {0}) + log_prior_means(m) + log_prior_N(m);
  CHECK(complete_data_log_likelihood(m, c, a) == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("complete data matches a direct transcription") {
  Rng rng(4);
  for (auto prior : {SubsetPrior::kDpp, SubsetPrior::kBpp}) {
    UniversalModel m = random_model(4, rng);
    m.prior = prior;
    Corpus c;
    c.languages.push_back(random_language(2, rng, "a"));
    c.languages.push_back(random_language(3, rng, "b"));
    const std::vector<Alignment> a{{3, 1}, {0, 2, 1}};

    const auto wa = oracle::alignment_log_weights(m, c.languages[0]);
    const auto wb = oracle::alignment_log_weights(m, c.languages[1]);
    double sq = 0.0;
    for (const auto& mu : m.means) sq += mu.squaredNorm();
    const double priors = -4 * std::log(2 * std::numbers::pi) - 0.5 * sq +
                          (4 * std::log(m.lambda) - m.lambda - std::log(24.0));
    const double expect = wa.at(a[0]) + wb.at(a[1]) + priors;
    CHECK(std::abs(complete_data_log_likelihood(m, c, a) - expect) < 1e-10);

    const JointTerms t = complete_data_terms(m, c, a);
    CHECK(t.total() == doctest::Approx(expect).epsilon(1e-13));
    CHECK(t.log_prior_means == doctest::Approx(log_prior_means(m)));
    CHECK(t.log_prior_N == doctest::Approx(log_prior_N(m)));
  }
}

TEST_CASE("alignment contracts") {
  Rng rng(5);
  const UniversalModel m = random_model(4, rng);
  Corpus c;
  c.languages.push_back(random_language(2, rng));
  CHECK_THROWS_AS(complete_data_log_likelihood(m, c, std::vector<Alignment>{{0}}), ContractError);
  CHECK_THROWS_AS(complete_data_log_likelihood(m, c, std::vector<Alignment>{{1, 1}}), ContractError);
  CHECK_THROWS_AS(complete_data_log_likelihood(m, c, std::vector<Alignment>{{0, 4}}), ContractError);
  CHECK_THROWS_AS(complete_data_log_likelihood(m, c, std::vector<Alignment>{}), ContractError);
}

TEST_CASE("identity mode emission is the plain Gaussian") {
  Rng rng(6);
  UniversalModel m = random_model(3, rng, 0);
  const Vec2 v(0.4, -0.2);
  for (int i = 0; i < 3; ++i) {
    CHECK(emission_logpdf(m, i, v) == gaussian_logpdf(v, m.means[i], m.sigma2));
    CHECK(std::abs(emission_logpdf(m, i, v) - std::log(oracle::gauss2(v, m.means[i], m.sigma2))) <
          1e-13);
  }
}

TEST_CASE("injective enumeration counts") {
  int count = 0;
  for_each_injective(2, 3, [&](const Alignment&) { ++count; });
  CHECK(count == 6);
  count = 0;
  for_each_injective(3, 6, [&](const Alignment&) { ++count; });
  CHECK(count == 120);
}

TEST_CASE("brute-force marginal") {
  Rng rng(7);
  SUBCASE("one phone, one vowel is the single completed term") {
    const UniversalModel m = random_model(1, rng);
    const LanguageInventory lang = random_language(1, rng);
    const Eigen::MatrixXd L = m.L();
    CHECK(marginal_log_likelihood_bruteforce(m, lang) ==
          doctest::Approx(language_complete_log_prob(m, L, dpp_log_normalizer(L), lang, {0})));
  }
  SUBCASE("matches the enumeration oracle and dominates every term") {
    for (int t = 0; t < 10; ++t) {
      const UniversalModel m = random_model(6, rng);
      const LanguageInventory lang = random_language(1 + t % 3, rng);
      const double got = marginal_log_likelihood_bruteforce(m, lang);
      CHECK(std::abs(got - oracle::log_marginal(m, lang)) < 1e-9);
      const Eigen::MatrixXd L = m.L();
      const double lz = dpp_log_normalizer(L);
      for_each_injective(static_cast<int>(lang.size()), 6, [&](const Alignment& a) {
        CHECK(got >= language_complete_log_prob(m, L, lz, lang, a));
      });
    }
  }
  SUBCASE("more vowels than phones has zero mass") {
    const UniversalModel m = random_model(2, rng);
    CHECK(marginal_log_likelihood_bruteforce(m, random_language(3, rng)) == kNegInf);
  }
  SUBCASE("refuses oversized instances") {
    const UniversalModel m = random_model(30, rng);
    CHECK_THROWS_AS(marginal_log_likelihood_bruteforce(m, random_language(6, rng)), ContractError);
  }
}

TEST_CASE("generated corpus construction") {
  GenerateConfig cfg;
  cfg.lambda = 5.0;
  cfg.num_languages = 3;
  cfg.seed = 11;
  Rng rng(1);
  cfg.diffeo = DiffeoParams::near_identity(2, 3.0, 0.2, rng);
  const GeneratedCorpus a = generate_corpus(cfg);
  const GeneratedCorpus b = generate_corpus(cfg);
  REQUIRE(a.corpus.size() == 3);
  CHECK(a.model.num_phones() >= 1);
  CHECK(a.model.means == b.model.means);
  for (std::size_t l = 0; l < 3; ++l) {
    const auto& lang = a.corpus.languages[l];
    CHECK(lang.size() >= 1);
    CHECK(lang.pronunciations == b.corpus.languages[l].pronunciations);
    CHECK_NOTHROW(validate_alignment(a.alignments[l], lang.size(), a.model.num_phones()));
    for (std::size_t k = 0; k < lang.size(); ++k)
      CHECK((diffeo_forward(a.model.diffeo, a.latents[l][k]) - lang.pronunciations[k]).norm() < 1e-14);
  }
}

TEST_CASE("vanishing noise puts vowels on their phones") {
  GenerateConfig cfg;
  cfg.sigma2 = 1e-6;
  cfg.num_languages = 20;
  cfg.num_phones = 8;
  cfg.seed = 3;
  const GeneratedCorpus g = generate_corpus(cfg);
  for (std::size_t l = 0; l < g.corpus.size(); ++l)
    for (std::size_t k = 0; k < g.corpus.languages[l].size(); ++k)
      CHECK((g.corpus.languages[l].pronunciations[k] - g.model.means[g.alignments[l][k]]).norm() < 0.01);
}

TEST_CASE("inventory sizes follow the DPP cardinality") {
  GenerateConfig cfg;
  cfg.lambda = 10.0;
  cfg.sigma2 = 0.05;
  cfg.num_phones = 10;
  cfg.num_languages = 500;
  cfg.seed = 5;
  const GeneratedCorpus g = generate_corpus(cfg);
  const Eigen::MatrixXd L = g.model.L();
  // Zero-truncated: E|S| / (1 - P(empty)), P(empty) = 1 / det(L + I).
  const Eigen::VectorXd lam = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(L).eigenvalues();
  double mean = 0.0, second = 0.0, p_empty = 1.0;
  for (int i = 0; i < lam.size(); ++i) {
    mean += lam[i] / (1 + lam[i]);
    second += lam[i] / ((1 + lam[i]) * (1 + lam[i]));
    p_empty /= 1 + lam[i];
  }
  const double truncated_mean = mean / (1 - p_empty);
  const double var = second + mean * mean;  // E|S|^2 untruncated
  const double truncated_var = var / (1 - p_empty) - truncated_mean * truncated_mean;
  double emp = 0.0;
  for (const auto& lang : g.corpus.languages) emp += static_cast<double>(lang.size());
  emp /= 500.0;
  const double se = std::sqrt(truncated_var / 500.0);
  CHECK(std::abs(emp - truncated_mean) < 3 * se);
}
