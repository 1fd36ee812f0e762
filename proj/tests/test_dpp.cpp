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

#include <numeric>

#include "oracles.hpp"
#include "voweldpp/dpp.hpp"

using namespace voweldpp;

namespace {

unsigned mask_of(const PhoneSubset& s) {
  unsigned m = 0;
  for (int i : s) m |= 1u << i;
  return m;
}

}  // namespace

TEST_CASE("identity L gives the uniform distribution over subsets") {
  const Eigen::MatrixXd L = Eigen::MatrixXd::Identity(2, 2);
  CHECK(dpp_log_prob(L, {}) == doctest::Approx(std::log(0.25)));
  for (const PhoneSubset& s : std::vector<PhoneSubset>{{}, {0}, {1}, {0, 1}})
    CHECK(std::exp(dpp_log_prob(L, s)) == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("probabilities sum to one and match determinants") {
  Rng rng(1);
  for (int N = 1; N <= 10; ++N) {
    const Eigen::MatrixXd L = oracle::random_spd(N, rng);
    const auto ref = oracle::dpp_probs(L);
    double total = 0.0;
    for (unsigned mask = 0; mask < (1u << N); ++mask) {
      const double p = std::exp(dpp_log_prob(L, oracle::subset_from_mask(mask, N)));
      total += p;
      CHECK(std::abs(p - ref[mask]) < 1e-12);
    }
    CHECK(std::abs(total - 1.0) < 1e-10);
  }
}

TEST_CASE("subset outside the ground set is rejected") {
  const Eigen::MatrixXd L = Eigen::MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(dpp_log_prob(L, {0, 3}), ContractError);
  CHECK_THROWS_AS(dpp_log_prob(L, {1, 1}), ContractError);
}

TEST_CASE("bpp is the dpp of the diagonal") {
  Rng rng(2);
  const int N = 6;
  const Eigen::MatrixXd L = oracle::random_spd(N, rng);
  const Eigen::MatrixXd D = L.diagonal().asDiagonal();
  double total = 0.0;
  for (unsigned mask = 0; mask < (1u << N); ++mask) {
    const auto s = oracle::subset_from_mask(mask, N);
    const double b = bpp_log_prob(L, s);
    CHECK(b == doctest::Approx(dpp_log_prob(D, s)).epsilon(1e-12));
    double direct = 0.0;
    for (int i = 0; i < N; ++i) direct -= std::log1p(L(i, i));
    for (int i : s) direct += std::log(L(i, i));
    CHECK(b == doctest::Approx(direct).epsilon(1e-13));
    total += std::exp(b);
  }
  CHECK(std::abs(total - 1.0) < 1e-12);

  const Eigen::MatrixXd ones = Eigen::MatrixXd::Identity(4, 4);
  CHECK(bpp_log_prob(ones, {1, 3}) == doctest::Approx(4 * std::log(0.5)));
}

TEST_CASE("sampler on identity L is uniform over subsets") {
  const Eigen::MatrixXd L = Eigen::MatrixXd::Identity(2, 2);
  DppSampler sampler(L);
  Rng rng(3);
  std::vector<double> counts(4, 0.0);
  const int draws = 200000;
  for (int t = 0; t < draws; ++t) counts[mask_of(sampler.sample(rng))] += 1.0;
  for (double c : counts) CHECK(std::abs(c / draws - 0.25) < 0.005);
}

TEST_CASE("sampler on diagonal L includes items independently") {
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(2, 2);
  L(0, 0) = 0.5;
  L(1, 1) = 3.0;
  DppSampler sampler(L);
  Rng rng(4);
  const int draws = 100000;
  std::vector<double> counts(4, 0.0);
  for (int t = 0; t < draws; ++t) counts[mask_of(sampler.sample(rng))] += 1.0;
  const double pa = 0.5 / 1.5, pb = 3.0 / 4.0;
  CHECK(std::abs(counts[1] / draws - pa * (1 - pb)) < 0.006);
  CHECK(std::abs(counts[2] / draws - (1 - pa) * pb) < 0.006);
  CHECK(std::abs(counts[3] / draws - pa * pb) < 0.006);
}

TEST_CASE("sampler is deterministic under a seed") {
  Rng r0(9);
  const Eigen::MatrixXd L = oracle::random_spd(7, r0);
  Rng a(5), b(5);
  for (int t = 0; t < 100; ++t) CHECK(dpp_sample(L, a) == dpp_sample(L, b));
}

TEST_CASE("sampled subsets are sorted and in range") {
  Rng r0(10);
  const Eigen::MatrixXd L = oracle::random_spd(8, r0, 1.0);
  Rng rng(6);
  DppSampler sampler(L);
  for (int t = 0; t < 500; ++t) {
    const auto s = sampler.sample(rng);
    CHECK(std::is_sorted(s.begin(), s.end()));
    CHECK(std::adjacent_find(s.begin(), s.end()) == s.end());
    for (int i : s) CHECK((i >= 0 && i < 8));
  }
}

TEST_CASE("expected size is the sum of lambda / (1 + lambda)") {
  Rng r0(11);
  const Eigen::MatrixXd L = oracle::random_spd(5, r0, 0.5);
  const auto probs = oracle::dpp_probs(L);
  double expected = 0.0;
  for (unsigned mask = 0; mask < probs.size(); ++mask)
    expected += probs[mask] * std::popcount(mask);
  CHECK(DppSampler(L).expected_size() == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("swap ratio matches naive determinants") {
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(5, 5);
  CHECK(conditional_inclusion_weight(I, {0, 2}, 2, 4) == doctest::Approx(1.0));

  Rng rng(12);
  for (int t = 0; t < 50; ++t) {
    const Eigen::MatrixXd L = oracle::random_spd(5, rng);
    const PhoneSubset s{0, 2, 3};
    for (int i : s)
      for (int j : {1, 4}) {
        PhoneSubset s2;
        for (int x : s)
          if (x != i) s2.push_back(x);
        s2.push_back(j);
        std::sort(s2.begin(), s2.end());
        const double naive = oracle::det(oracle::sub(L, s2)) / oracle::det(oracle::sub(L, s));
        const double got = conditional_inclusion_weight(L, s, i, j);
        CHECK(std::abs(got - naive) / std::abs(naive) < 1e-9);
        CHECK(log_conditional_inclusion_weight(L, s, i, j) == doctest::Approx(std::log(naive)));
      }
  }
}

TEST_CASE("swap preconditions") {
  const Eigen::MatrixXd L = Eigen::MatrixXd::Identity(4, 4);
  CHECK_THROWS_AS(conditional_inclusion_weight(L, {0, 1}, 1, 1), ContractError);
  CHECK_THROWS_AS(conditional_inclusion_weight(L, {0, 1}, 2, 3), ContractError);
  CHECK_THROWS_AS(conditional_inclusion_weight(L, {0, 1}, 0, 1), ContractError);
}

TEST_CASE("near-duplicate phones repel") {
  // Phones 0 and 1 almost coincide; 2 is far away.
  UniversalModel m;
  m.means = {Vec2(0, 0), Vec2(1e-3, 0), Vec2(3, 3)};
  m.sigma2 = 0.1;
  m.foc = FocalizationNet::zeros(2);
  m.foc.b2 = -8.0;
  const Eigen::MatrixXd L = oracle::L_matrix(m);
  const auto probs = oracle::dpp_probs(L);
  double p0 = 0, p1 = 0, p01 = 0;
  for (unsigned mask = 0; mask < probs.size(); ++mask) {
    if (mask & 1u) p0 += probs[mask];
    if (mask & 2u) p1 += probs[mask];
    if ((mask & 3u) == 3u) p01 += probs[mask];
  }
  double lib01 = std::exp(dpp_log_prob(L, {0, 1})) + std::exp(dpp_log_prob(L, {0, 1, 2}));
  CHECK(lib01 == doctest::Approx(p01).epsilon(1e-9));
  CHECK(p01 < 0.01);
  CHECK(p01 < p0 * p1);
}

TEST_CASE("size mass is the elementary symmetric polynomial") {
  Rng rng(13);
  const Eigen::MatrixXd L = oracle::random_spd(6, rng);
  const auto probs = oracle::dpp_probs(L);
  const double log_z = std::log(oracle::det(L + Eigen::MatrixXd::Identity(6, 6)));
  for (int n = 0; n <= 6; ++n) {
    double mass = 0.0;
    for (unsigned mask = 0; mask < probs.size(); ++mask)
      if (std::popcount(mask) == n) mass += probs[mask];
    CHECK(std::exp(log_size_mass(L, n) - log_z) == doctest::Approx(mass).epsilon(1e-10));
  }
  // Diagonal-only variant uses L_ii alone.
  const Eigen::MatrixXd D = L.diagonal().asDiagonal();
  CHECK(log_size_mass(L, 2, true) == doctest::Approx(log_size_mass(D, 2)).epsilon(1e-12));
}
