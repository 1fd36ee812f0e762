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
#include <span>
#include <vector>

#include "voweldpp/model.hpp"
#include "voweldpp/types.hpp"

namespace voweldpp {

struct GibbsOptions {
  /// Accept the swap with probability w_j / (w_i + w_j) on the product of
  /// emission and subset terms, without the proposal correction. Not
  /// posterior-invariant; kept for comparison runs.
  bool barker_heuristic = false;
  /// Visit vowels in a random order each sweep instead of index order.
  bool random_scan = false;
};

/// log p(v_k | mu_j) for every vowel slot k (rows) and phone j (columns).
/// Each pronunciation is pulled back through the diffeomorphism once.
Eigen::MatrixXd emission_table(const UniversalModel& m, const LanguageInventory& lang);

/// Everything needed to resample one language's alignment under a fixed
/// model: the shared L matrix and the language's emission table. Rows of
/// the table that are all zero act as unobserved slots (prior only).
class LanguageSampler {
 public:
  LanguageSampler(const Eigen::MatrixXd& L, bool diagonal_only, Eigen::MatrixXd emissions);

  /// One Metropolis-Hastings update of slot k: propose an unused phone j
  /// with probability proportional to the slot's likelihood under j, then
  /// accept with the posterior ratio times the reverse/forward proposal
  /// ratio. Returns true when the alignment changed.
  bool update(Alignment& a, int k, Rng& rng, const GibbsOptions& opts = {}) const;

  /// Visits every slot once; returns the number of accepted moves.
  int sweep(Alignment& a, Rng& rng, const GibbsOptions& opts = {}) const;

  /// Greedy start: slots in random order, each takes the unused phone with
  /// the highest emission log-density.
  Alignment greedy_init(Rng& rng) const;

  const Eigen::MatrixXd& emissions() const { return emissions_; }

 private:
  const Eigen::MatrixXd* L_;
  bool diagonal_only_;
  Eigen::MatrixXd emissions_;
};

/// Convenience single update straight from a model (recomputes L and the
/// emission table; use LanguageSampler in loops).
Alignment gibbs_update_one(const UniversalModel& m, const LanguageInventory& lang,
                           const Alignment& a, int k, Rng& rng, const GibbsOptions& opts = {});

/// Warm-startable state of the E-step chain.
struct ChainState {
  std::vector<Alignment> alignments;  // one per training language
  std::vector<Rng> language_rngs;     // one stream per language
  Rng move_rng;                       // reversible-jump moves
  std::uint64_t seed = 0;
  long sweep_count = 0;
  long proposals = 0;
  long accepted = 0;

  double acceptance_rate() const {
    return proposals == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposals);
  }
};

/// Greedy initial alignments. Throws ContractError naming the first
/// language with more vowels than the model has phones.
ChainState init_alignments(const UniversalModel& m, const Corpus& corpus, std::uint64_t seed);

/// S full sweeps (languages in index order, vowels in index order unless
/// random_scan); returns the alignments after each sweep.
std::vector<std::vector<Alignment>> e_step(const UniversalModel& m, const Corpus& corpus,
                                           ChainState& state, int sweeps,
                                           const GibbsOptions& opts = {}, int threads = 1);

struct RjStats {
  int births_proposed = 0;
  int births_accepted = 0;
  int deaths_proposed = 0;
  int deaths_accepted = 0;

  double acceptance_rate() const {
    const int p = births_proposed + deaths_proposed;
    return p == 0 ? 0.0 : static_cast<double>(births_accepted + deaths_accepted) / p;
  }
};

/// Draws a new phone mean from the means prior.
using MeanDraw = std::function<Vec2(Rng&)>;
Vec2 draw_standard_normal_mean(Rng& rng);

/// Birth/death reversible-jump moves on the number of phones. A birth
/// inserts a phone drawn from the means prior at a uniform position; a
/// death removes a phone that no language currently uses. `draw_mean`
/// must sample the same prior the model places on means, since the
/// acceptance ratio relies on proposal and prior cancelling.
RjStats rjmcmc_resample_N(UniversalModel& m, const Corpus& corpus, ChainState& state, int moves,
                          const MeanDraw& draw_mean = draw_standard_normal_mean);

}  // namespace voweldpp
