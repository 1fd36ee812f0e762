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

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "voweldpp/corpus.hpp"
#include "voweldpp/diffeo.hpp"
#include "voweldpp/kernel.hpp"
#include "voweldpp/types.hpp"

namespace voweldpp {

enum class SubsetPrior { kDpp, kBpp };

/// Every cross-linguistic parameter of the vowel-inventory model.
struct UniversalModel {
  std::vector<Vec2> means;  // latent phone means, one per universal phone
  double sigma2 = 1.0;
  double rho = 1.0;
  double lambda = 100.0;  // Poisson rate on the number of phones
  FocalizationNet foc = FocalizationNet::zeros();
  DiffeoParams diffeo;  // empty = identity
  SubsetPrior prior = SubsetPrior::kDpp;

  int num_phones() const { return static_cast<int>(means.size()); }
  KernelParams kernel() const { return {sigma2, rho}; }
  bool diagonal_only() const { return prior == SubsetPrior::kBpp; }

  /// The L matrix implied by the current parameters (diagonal in BPP mode).
  Eigen::MatrixXd L() const;
};

/// log Poisson(N; lambda).
double log_prior_N(const UniversalModel& m);

/// sum_i log N(mu_i; 0, I).
double log_prior_means(const UniversalModel& m);

/// log p(v | mu) for one pronunciation (-inf outside the image).
double emission_logpdf(const UniversalModel& m, int phone, const Vec2& v);

/// log p(phone set) under the DPP or BPP, using precomputed L and normalizer.
double subset_log_prob(const UniversalModel& m, const Eigen::MatrixXd& L, double log_normalizer,
                       const PhoneSubset& s);

/// Throws ContractError unless `a` is a valid alignment of n vowels to
/// distinct phones in [0, num_phones).
void validate_alignment(const Alignment& a, std::size_t n, int num_phones);

/// Complete-data terms, exposed separately.
struct JointTerms {
  double log_prior_N = 0.0;       // factor 1
  double log_prior_means = 0.0;   // factor 2
  double log_subsets = 0.0;       // factor 3 summed over languages
  double log_emissions = 0.0;     // factor 4 summed over all vowels
  double total() const { return log_prior_N + log_prior_means + log_subsets + log_emissions; }
};

JointTerms complete_data_terms(const UniversalModel& m, const Corpus& corpus,
                               std::span<const Alignment> alignments);

double complete_data_log_likelihood(const UniversalModel& m, const Corpus& corpus,
                                    std::span<const Alignment> alignments);

/// Sum of factors 3 and 4 for a single language under one alignment.
double language_complete_log_prob(const UniversalModel& m, const Eigen::MatrixXd& L,
                                  double log_normalizer, const LanguageInventory& lang,
                                  const Alignment& a);

/// Exact log marginal over every injective alignment of the language.
/// Refuses (ContractError) when there are more than `max_alignments`.
double marginal_log_likelihood_bruteforce(const UniversalModel& m, const LanguageInventory& lang,
                                          double max_alignments = 1e6);

/// Calls fn(a) for every injective map of n slots into [0, num_phones).
template <typename Fn>
void for_each_injective(int n, int num_phones, Fn&& fn) {
  Alignment a(static_cast<std::size_t>(n), -1);
  std::vector<char> used(static_cast<std::size_t>(num_phones), 0);
  auto rec = [&](auto&& self, int slot) -> void {
    if (slot == n) {
      fn(static_cast<const Alignment&>(a));
      return;
    }
    for (int j = 0; j < num_phones; ++j) {
      if (used[j]) continue;
      used[j] = 1;
      a[slot] = j;
      self(self, slot + 1);
      used[j] = 0;
    }
  };
  rec(rec, 0);
}

/// Settings for the forward generative process.
struct GenerateConfig {
  double lambda = 10.0;
  double sigma2 = 0.01;
  double rho = 1.0;
  FocalizationNet foc = FocalizationNet::zeros();
  DiffeoParams diffeo;
  SubsetPrior prior = SubsetPrior::kDpp;
  int num_languages = 100;
  /// Draw N from Poisson(lambda) when unset.
  std::optional<int> num_phones;
  std::uint64_t seed = 0;
};

struct GeneratedCorpus {
  UniversalModel model;
  Corpus corpus;  // normalized units = model space, identity normalization
  std::vector<Alignment> alignments;
  std::vector<std::vector<Vec2>> latents;  // underlying v-tilde per vowel
};

/// Runs the generative process: N, means, one DPP draw per language
/// (redrawn while empty), latent Gaussian noise, then the diffeomorphism.
GeneratedCorpus generate_corpus(const GenerateConfig& cfg);

}  // namespace voweldpp
