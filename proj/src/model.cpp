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

#include "voweldpp/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

#include "voweldpp/dpp.hpp"

namespace voweldpp {

Eigen::MatrixXd UniversalModel::L() const {
  return build_L(means, kernel(), foc, diagonal_only());
}

double log_prior_N(const UniversalModel& m) {
  const double n = m.num_phones();
  return n * std::log(m.lambda) - m.lambda - std::lgamma(n + 1.0);
}

double log_prior_means(const UniversalModel& m) {
  double lp = 0.0;
  for (const auto& mu : m.means) lp += -std::log(2.0 * std::numbers::pi) - 0.5 * mu.squaredNorm();
  return lp;
}

double emission_logpdf(const UniversalModel& m, int phone, const Vec2& v) {
  return transformed_logpdf(m.diffeo, m.means[static_cast<std::size_t>(phone)], m.sigma2, v);
}

double subset_log_prob(const UniversalModel& m, const Eigen::MatrixXd& L, double log_normalizer,
                       const PhoneSubset& s) {
  if (m.diagonal_only()) return bpp_log_prob(L, s);
  return dpp_log_prob(L, s, log_normalizer);
}

void validate_alignment(const Alignment& a, std::size_t n, int num_phones) {
  if (a.size() != n)
    throw ContractError("alignment has " + std::to_string(a.size()) + " entries for " +
                        std::to_string(n) + " vowels");
  std::vector<char> seen(static_cast<std::size_t>(std::max(num_phones, 0)), 0);
  for (int j : a) {
    if (j < 0 || j >= num_phones)
      throw ContractError("alignment phone " + std::to_string(j) + " out of range");
    if (seen[j]) throw ContractError("alignment uses phone " + std::to_string(j) + " twice");
    seen[j] = 1;
  }
}

double language_complete_log_prob(const UniversalModel& m, const Eigen::MatrixXd& L,
                                  double log_normalizer, const LanguageInventory& lang,
                                  const Alignment& a) {
  double lp = subset_log_prob(m, L, log_normalizer, subset_of(a));
  for (std::size_t k = 0; k < a.size(); ++k) lp += emission_logpdf(m, a[k], lang.pronunciations[k]);
  return lp;
}

JointTerms complete_data_terms(const UniversalModel& m, const Corpus& corpus,
                               std::span<const Alignment> alignments) {
  if (alignments.size() != corpus.size())
    throw ContractError("need one alignment per language");
  JointTerms t;
  t.log_prior_N = log_prior_N(m);
  t.log_prior_means = log_prior_means(m);
  if (corpus.size() == 0) return t;

  const Eigen::MatrixXd L = m.L();
  const double log_norm = m.diagonal_only() ? 0.0 : dpp_log_normalizer(L);
  for (std::size_t l = 0; l < corpus.size(); ++l) {
    const auto& lang = corpus.languages[l];
    const auto& a = alignments[l];
    validate_alignment(a, lang.size(), m.num_phones());
    t.log_subsets += subset_log_prob(m, L, log_norm, subset_of(a));
    for (std::size_t k = 0; k < a.size(); ++k)
      t.log_emissions += emission_logpdf(m, a[k], lang.pronunciations[k]);
  }
  return t;
}

double complete_data_log_likelihood(const UniversalModel& m, const Corpus& corpus,
                                    std::span<const Alignment> alignments) {
  return complete_data_terms(m, corpus, alignments).total();
}

double marginal_log_likelihood_bruteforce(const UniversalModel& m, const LanguageInventory& lang,
                                          double max_alignments) {
  const int n = static_cast<int>(lang.size());
  const int N = m.num_phones();
  if (n > N) return kNegInf;
  double count = 1.0;
  for (int k = 0; k < n; ++k) count *= N - k;
  if (count > max_alignments)
    throw ContractError("brute-force marginal refused: " + std::to_string(count) + " alignments");

  const Eigen::MatrixXd L = m.L();
  const double log_norm = m.diagonal_only() ? 0.0 : dpp_log_normalizer(L);
  // Emission table so each alignment costs only the subset term.
  std::vector<std::vector<double>> emit(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < N; ++j) emit[k].push_back(emission_logpdf(m, j, lang.pronunciations[k]));

  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(count));
  for_each_injective(n, N, [&](const Alignment& a) {
    double lp = subset_log_prob(m, L, log_norm, subset_of(a));
    for (int k = 0; k < n; ++k) lp += emit[k][a[k]];
    terms.push_back(lp);
  });
  return log_sum_exp(terms);
}

GeneratedCorpus generate_corpus(const GenerateConfig& cfg) {
  Rng rng(cfg.seed);
  GeneratedCorpus out;
  UniversalModel& m = out.model;
  m.sigma2 = cfg.sigma2;
  m.rho = cfg.rho;
  m.lambda = cfg.lambda;
  m.foc = cfg.foc;
  m.diffeo = cfg.diffeo;
  m.prior = cfg.prior;

  int n_phones = 0;
  if (cfg.num_phones) {
    n_phones = *cfg.num_phones;
    if (n_phones < 1) throw ContractError("number of phones must be positive");
  } else {
    std::poisson_distribution<int> poisson(cfg.lambda);
    do {
      n_phones = poisson(rng);
    } while (n_phones < 1);
  }

  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < n_phones; ++i) {
    const double x = normal(rng);
    const double y = normal(rng);
    m.means.emplace_back(x, y);
  }

  const Eigen::MatrixXd L = m.L();
  const DppSampler sampler(L);
  const double noise = std::sqrt(cfg.sigma2);
  out.corpus.norm = Normalization::identity();
  for (int l = 0; l < cfg.num_languages; ++l) {
    PhoneSubset s;
    do {
      s = m.diagonal_only() ? bpp_sample(L, rng) : sampler.sample(rng);
    } while (s.empty());
    Alignment a(s.begin(), s.end());
    std::shuffle(a.begin(), a.end(), rng);

    char id[32];
    std::snprintf(id, sizeof id, "syn%04d", l + 1);
    LanguageInventory lang;
    lang.language_id = id;
    std::vector<Vec2> latents;
    for (int phone : a) {
      const Vec2& mu = m.means[static_cast<std::size_t>(phone)];
      const double x = normal(rng);
      const double y = normal(rng);
      const Vec2 latent = mu + noise * Vec2(x, y);
      latents.push_back(latent);
      lang.pronunciations.push_back(diffeo_forward(m.diffeo, latent));
      lang.labels.emplace_back();
    }
    out.corpus.languages.push_back(std::move(lang));
    out.alignments.push_back(std::move(a));
    out.latents.push_back(std::move(latents));
  }
  return out;
}

}  // namespace voweldpp
