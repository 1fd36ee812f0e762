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
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "voweldpp/inference.hpp"
#include "voweldpp/model.hpp"

namespace voweldpp {

struct EvalOptions {
  int samples = 50;
  int burn_in = 20;
  std::uint64_t seed = 0;
  int threads = 1;
  GibbsOptions gibbs;
};

/// Harmonic-mean estimate of log p(v_1..v_n) for one language. Alignments
/// are drawn from the posterior with the Gibbs sampler (greedy start, then
/// burn-in sweeps, one sample per sweep) and
///   log p(v) ~= log Z - log mean_s [1 / p(v | a_s)],
/// where p(v | a) is the product of emission densities and
/// Z = sum_a p(phone set of a) = n! e_n(L) / det(L + I) normalizes the
/// subset prior over injective alignments.
double harmonic_mean_log_marginal(const UniversalModel& m, const Eigen::MatrixXd& L,
                                  const LanguageInventory& lang, int samples, int burn_in,
                                  Rng& rng, const GibbsOptions& gibbs = {});

struct CrossEntropy {
  std::vector<double> log_marginals;  // per language
  double total_nats = 0.0;            // -sum log p
  double mean_nats = 0.0;             // per language
};

/// Held-out cross-entropy. Throws ContractError if a language has more
/// vowels than the model has phones.
CrossEntropy cross_entropy(const UniversalModel& m, const Corpus& heldout,
                           const EvalOptions& opts = {});

/// Cloze prediction: the sampler sees the observed vowels plus `hidden`
/// unobserved slots whose phones are driven only by the subset prior.
/// Returns, per posterior sample, the predictions nu(mu_i) for the hidden
/// slots.
std::vector<std::vector<Vec2>> cloze_predict(const UniversalModel& m, const Eigen::MatrixXd& L,
                                             std::span<const Vec2> observed, int hidden,
                                             int samples, int burn_in, Rng& rng,
                                             const GibbsOptions& gibbs = {});

/// Euclidean error of one prediction set against the truth; with two
/// hidden vowels the cheaper of the two pairings is used. The error is the
/// mean distance per hidden vowel. If `norm` is given, distances are
/// measured after mapping both sides back to Hz.
double cloze_error(std::span<const Vec2> predicted, std::span<const Vec2> truth,
                   const Normalization* norm = nullptr);

struct ClozeScore {
  double error = 0.0;     // normalized units
  double error_hz = 0.0;  // Hz
  bool scored = false;    // false when the language is too small
};

/// Expected cloze error for a language, averaged over every choice of
/// `hidden` held-out vowels and over the posterior samples.
ClozeScore cloze_language(const UniversalModel& m, const Eigen::MatrixXd& L,
                          const LanguageInventory& lang, const Normalization& norm, int hidden,
                          const EvalOptions& opts, std::uint64_t stream);

struct LanguageEval {
  std::string language_id;
  int num_vowels = 0;
  double log_marginal = 0.0;
  ClozeScore cloze1;
  ClozeScore cloze12;
};

struct EvalReport {
  double cross_entropy_total = 0.0;
  double cross_entropy_mean = 0.0;
  /// The same per-language figure for densities over Hz, comparable across
  /// models trained with different normalizations.
  double cross_entropy_mean_hz = 0.0;
  double cloze1 = 0.0;
  double cloze1_hz = 0.0;
  double cloze12 = 0.0;
  double cloze12_hz = 0.0;
  int num_languages = 0;
  std::vector<LanguageEval> languages;
};

EvalReport evaluate(const UniversalModel& m, const Corpus& heldout, const EvalOptions& opts = {},
                    bool with_cloze = true);

/// Fixed-field JSON rendering of the report.
void write_report_json(std::ostream& out, const EvalReport& report);
/// One row per language.
void write_report_csv(std::ostream& out, const EvalReport& report);

}  // namespace voweldpp
