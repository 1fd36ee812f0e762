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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voweldpp/inference.hpp"
#include "voweldpp/model.hpp"

namespace voweldpp {

struct TrainConfig {
  int em_iters = 100;
  int e_samples = 5;
  int m_sgd_iters = 50;
  double learning_rate = 0.05;
  double sigma2 = 0.1;
  double rho = 1.0;
  double lambda = 100.0;
  /// Fixed number of phones; unset means reversible-jump moves on N.
  std::optional<int> n_phones = 50;
  int rj_moves = 10;
  SubsetPrior prior = SubsetPrior::kDpp;
  int diffeo_layers = 1;  // 0 = identity map
  int focal_hidden = 16;
  bool supervised = false;
  GibbsOptions gibbs;
  /// L2 penalty on the focalization weights; off unless set.
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Flat layout of the learned parameters: means, then diffeomorphism
/// layers (W row-major, b), then focalization net (U1 row-major, b1, U2, b2).
/// sigma2, rho and lambda are hyperparameters and not part of it.
struct ParameterLayout {
  int num_phones = 0;
  int depth = 0;
  int hidden = 0;

  explicit ParameterLayout(const UniversalModel& m);
  std::size_t size() const;
  std::size_t means_offset() const { return 0; }
  std::size_t diffeo_offset() const { return 2 * static_cast<std::size_t>(num_phones); }
  std::size_t foc_offset() const { return diffeo_offset() + 6 * static_cast<std::size_t>(depth); }
  std::string name(std::size_t index) const;
};

std::vector<double> pack_parameters(const UniversalModel& m);
void unpack_parameters(std::span<const double> flat, UniversalModel& m);

/// MAP objective averaged over sample alignments:
/// (1/S) sum_s [sum_l (factor 3 + factor 4)] + log p(means) + log p(N).
double map_objective(const UniversalModel& m, const Corpus& corpus,
                     std::span<const std::vector<Alignment>> samples, int threads = 1,
                     double weight_decay = 0.0);

struct ObjectiveGradient {
  double value = 0.0;
  std::vector<double> gradient;  // ParameterLayout order
};

/// Analytic gradient of map_objective with respect to every learned parameter.
ObjectiveGradient map_objective_gradient(const UniversalModel& m, const Corpus& corpus,
                                         std::span<const std::vector<Alignment>> samples,
                                         int threads = 1, double weight_decay = 0.0);

struct MStepStats {
  double objective_before = 0.0;
  double objective_after = 0.0;
  int steps_taken = 0;
  int steps_skipped = 0;
};

/// Gradient ascent on the MAP objective with per-parameter RMS scaling and
/// backtracking: a trial step is halved (at most 20 times) until the
/// objective is finite and does not decrease, L stays positive definite,
/// and every diffeomorphism layer keeps |det W| > kMinAbsDet.
MStepStats m_step(UniversalModel& m, const Corpus& corpus,
                  std::span<const std::vector<Alignment>> samples, const TrainConfig& cfg);

struct TraceRecord {
  int iteration = 0;
  double objective = 0.0;
  int num_phones = 0;
  double gibbs_acceptance = 0.0;
  double rj_acceptance = 0.0;
};

struct TrainResult {
  UniversalModel model;
  std::vector<TraceRecord> trace;
  std::vector<Alignment> final_alignments;
};

/// Initial model for a corpus: near-identity diffeomorphism, means seeded
/// from the data by k-means++ in latent space, small random focalization net.
UniversalModel initial_model(const Corpus& corpus, const TrainConfig& cfg);

/// MAP-EM: per iteration, optional reversible-jump moves on N, an S-sweep
/// E-step warm-started from the previous chain state, then an M-step.
TrainResult map_em(const Corpus& corpus, const TrainConfig& cfg,
                   const std::function<void(const TraceRecord&)>& on_iteration = {});

/// Phone index per IPA symbol (sorted symbol order) and the fixed alignments
/// they induce. Throws ValidationError on unlabeled vowels or a symbol used
/// twice within one language.
struct LabelAlignment {
  std::vector<std::string> symbols;
  std::vector<Alignment> alignments;
};
LabelAlignment alignments_from_labels(const Corpus& corpus);

/// Supervised baseline: one phone per IPA symbol, alignments fixed by the
/// labels, M-steps only.
TrainResult supervised_fit(const Corpus& corpus, const TrainConfig& cfg);

}  // namespace voweldpp
