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

#include "voweldpp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include <nlohmann/json.hpp>

#include "voweldpp/dpp.hpp"
#include "voweldpp/parallel.hpp"

namespace voweldpp {

namespace {

double log_alignment_mass(const UniversalModel& m, const Eigen::MatrixXd& L, int n) {
  const double log_norm =
      m.diagonal_only() ? L.diagonal().array().log1p().sum() : dpp_log_normalizer(L);
  return std::lgamma(n + 1.0) + log_size_mass(L, n, m.diagonal_only()) - log_norm;
}

double harmonic_mean_with_mass(const UniversalModel& m, const Eigen::MatrixXd& L,
                               const LanguageInventory& lang, double log_mass, int samples,
                               int burn_in, Rng& rng, const GibbsOptions& gibbs) {
  const int n = static_cast<int>(lang.size());
  if (n > m.num_phones())
    throw ContractError("language '" + lang.language_id + "' has " + std::to_string(n) +
                        " vowels but the model has only " + std::to_string(m.num_phones()) +
                        " phones");
  if (samples < 1) throw ContractError("harmonic-mean estimator needs at least one sample");
  LanguageSampler sampler(L, m.diagonal_only(), emission_table(m, lang));
  Alignment a = sampler.greedy_init(rng);
  for (int s = 0; s < burn_in; ++s) sampler.sweep(a, rng, gibbs);

  const Eigen::MatrixXd& emit = sampler.emissions();
  std::vector<double> neg_loglik;
  neg_loglik.reserve(static_cast<std::size_t>(samples));
  for (int s = 0; s < samples; ++s) {
    sampler.sweep(a, rng, gibbs);
    double ll = 0.0;
    for (int k = 0; k < n; ++k) ll += emit(k, a[k]);
    neg_loglik.push_back(-ll);
  }
  const double log_mean_inverse = log_sum_exp(neg_loglik) - std::log(static_cast<double>(samples));
  return log_mass - log_mean_inverse;
}

}  // namespace

double harmonic_mean_log_marginal(const UniversalModel& m, const Eigen::MatrixXd& L,
                                  const LanguageInventory& lang, int samples, int burn_in,
                                  Rng& rng, const GibbsOptions& gibbs) {
  const int n = static_cast<int>(lang.size());
  const double log_mass = n > m.num_phones() ? 0.0 : log_alignment_mass(m, L, n);
  return harmonic_mean_with_mass(m, L, lang, log_mass, samples, burn_in, rng, gibbs);
}

CrossEntropy cross_entropy(const UniversalModel& m, const Corpus& heldout,
                           const EvalOptions& opts) {
  for (const auto& lang : heldout.languages)
    if (static_cast<int>(lang.size()) > m.num_phones())
      throw ContractError("language '" + lang.language_id + "' has " +
                          std::to_string(lang.size()) + " vowels but the model has only " +
                          std::to_string(m.num_phones()) + " phones");

  const Eigen::MatrixXd L = m.L();
  std::map<int, double> mass;
  for (const auto& lang : heldout.languages) {
    const int n = static_cast<int>(lang.size());
    if (!mass.contains(n)) mass[n] = log_alignment_mass(m, L, n);
  }

  CrossEntropy ce;
  ce.log_marginals.assign(heldout.size(), 0.0);
  parallel_for(heldout.size(), opts.threads, [&](std::size_t l) {
    const auto& lang = heldout.languages[l];
    Rng rng(derive_seed(opts.seed, l));
    ce.log_marginals[l] = harmonic_mean_with_mass(m, L, lang, mass.at(static_cast<int>(lang.size())),
                                                  opts.samples, opts.burn_in, rng, opts.gibbs);
  });
  for (double lp : ce.log_marginals) ce.total_nats -= lp;
  ce.mean_nats = heldout.size() == 0 ? 0.0 : ce.total_nats / static_cast<double>(heldout.size());
  return ce;
}

std::vector<std::vector<Vec2>> cloze_predict(const UniversalModel& m, const Eigen::MatrixXd& L,
                                             std::span<const Vec2> observed, int hidden,
                                             int samples, int burn_in, Rng& rng,
                                             const GibbsOptions& gibbs) {
  if (hidden < 1 || hidden > 2) throw ContractError("cloze hides one or two vowels");
  if (observed.empty()) throw ContractError("cloze needs at least one observed vowel");
  const int n = static_cast<int>(observed.size()) + hidden;
  if (n > m.num_phones())
    throw ContractError("cloze inventory of " + std::to_string(n) + " vowels exceeds " +
                        std::to_string(m.num_phones()) + " phones");

  LanguageInventory partial;
  partial.pronunciations.assign(observed.begin(), observed.end());
  Eigen::MatrixXd table = Eigen::MatrixXd::Zero(n, m.num_phones());
  table.topRows(static_cast<Eigen::Index>(observed.size())) = emission_table(m, partial);

  LanguageSampler sampler(L, m.diagonal_only(), std::move(table));
  Alignment a = sampler.greedy_init(rng);
  for (int s = 0; s < burn_in; ++s) sampler.sweep(a, rng, gibbs);

  std::vector<Vec2> phone_pred;
  phone_pred.reserve(m.means.size());
  for (const auto& mu : m.means) phone_pred.push_back(diffeo_forward(m.diffeo, mu));

  std::vector<std::vector<Vec2>> out;
  out.reserve(static_cast<std::size_t>(samples));
  for (int s = 0; s < samples; ++s) {
    sampler.sweep(a, rng, gibbs);
    std::vector<Vec2> pred;
    for (int h = 0; h < hidden; ++h)
      pred.push_back(phone_pred[a[observed.size() + static_cast<std::size_t>(h)]]);
    out.push_back(std::move(pred));
  }
  return out;
}

double cloze_error(std::span<const Vec2> predicted, std::span<const Vec2> truth,
                   const Normalization* norm) {
  if (predicted.size() != truth.size() || predicted.empty() || predicted.size() > 2)
    throw ContractError("cloze error compares one or two vowels");
  auto dist = [&](const Vec2& p, const Vec2& t) {
    return norm ? (norm->invert(p) - norm->invert(t)).norm() : (p - t).norm();
  };
  if (predicted.size() == 1) return dist(predicted[0], truth[0]);
  const double straight = dist(predicted[0], truth[0]) + dist(predicted[1], truth[1]);
  const double crossed = dist(predicted[0], truth[1]) + dist(predicted[1], truth[0]);
  return 0.5 * std::min(straight, crossed);
}

ClozeScore cloze_language(const UniversalModel& m, const Eigen::MatrixXd& L,
                          const LanguageInventory& lang, const Normalization& norm, int hidden,
                          const EvalOptions& opts, std::uint64_t stream) {
  ClozeScore score;
  const int n = static_cast<int>(lang.size());
  if (n <= hidden || n > m.num_phones()) return score;

  // Every choice of hidden vowels.
  std::vector<std::vector<int>> choices;
  for (int i = 0; i < n; ++i) {
    if (hidden == 1) {
      choices.push_back({i});
      continue;
    }
    for (int j = i + 1; j < n; ++j) choices.push_back({i, j});
  }

  Rng rng(derive_seed(opts.seed, stream));
  double total = 0.0, total_hz = 0.0;
  for (const auto& choice : choices) {
    std::vector<Vec2> observed, truth;
    for (int k = 0; k < n; ++k) {
      if (std::find(choice.begin(), choice.end(), k) != choice.end())
        truth.push_back(lang.pronunciations[k]);
      else
        observed.push_back(lang.pronunciations[k]);
    }
    const auto preds =
        cloze_predict(m, L, observed, hidden, opts.samples, opts.burn_in, rng, opts.gibbs);
    double err = 0.0, err_hz = 0.0;
    for (const auto& p : preds) {
      err += cloze_error(p, truth);
      err_hz += cloze_error(p, truth, &norm);
    }
    total += err / static_cast<double>(preds.size());
    total_hz += err_hz / static_cast<double>(preds.size());
  }
  score.error = total / static_cast<double>(choices.size());
  score.error_hz = total_hz / static_cast<double>(choices.size());
  score.scored = true;
  return score;
}

EvalReport evaluate(const UniversalModel& m, const Corpus& heldout, const EvalOptions& opts,
                    bool with_cloze) {
  EvalReport report;
  const CrossEntropy ce = cross_entropy(m, heldout, opts);
  report.cross_entropy_total = ce.total_nats;
  report.cross_entropy_mean = ce.mean_nats;
  const double log_scale = std::log(heldout.norm.std.x()) + std::log(heldout.norm.std.y());
  for (const auto& lang : heldout.languages)
    report.cross_entropy_mean_hz += static_cast<double>(lang.size()) * log_scale;
  if (heldout.size() > 0)
    report.cross_entropy_mean_hz =
        ce.mean_nats + report.cross_entropy_mean_hz / static_cast<double>(heldout.size());
  report.num_languages = static_cast<int>(heldout.size());
  report.languages.resize(heldout.size());

  const Eigen::MatrixXd L = m.L();
  const std::uint64_t cloze_seed = derive_seed(opts.seed, 0xC102Eull);
  parallel_for(heldout.size(), opts.threads, [&](std::size_t l) {
    const auto& lang = heldout.languages[l];
    LanguageEval& row = report.languages[l];
    row.language_id = lang.language_id;
    row.num_vowels = static_cast<int>(lang.size());
    row.log_marginal = ce.log_marginals[l];
    if (!with_cloze) return;
    EvalOptions o = opts;
    o.seed = cloze_seed;
    row.cloze1 = cloze_language(m, L, lang, heldout.norm, 1, o, 2 * l);
    row.cloze12 = cloze_language(m, L, lang, heldout.norm, 2, o, 2 * l + 1);
  });

  int n1 = 0, n12 = 0;
  for (const auto& row : report.languages) {
    if (row.cloze1.scored) {
      report.cloze1 += row.cloze1.error;
      report.cloze1_hz += row.cloze1.error_hz;
      ++n1;
    }
    if (row.cloze12.scored) {
      report.cloze12 += row.cloze12.error;
      report.cloze12_hz += row.cloze12.error_hz;
      ++n12;
    }
  }
  if (n1 > 0) {
    report.cloze1 /= n1;
    report.cloze1_hz /= n1;
  }
  if (n12 > 0) {
    report.cloze12 /= n12;
    report.cloze12_hz /= n12;
  }
  return report;
}

void write_report_json(std::ostream& out, const EvalReport& report) {
  nlohmann::ordered_json j;
  j["num_languages"] = report.num_languages;
  j["cross_entropy_total_nats"] = report.cross_entropy_total;
  j["cross_entropy_nats_per_language"] = report.cross_entropy_mean;
  j["cross_entropy_hz_nats_per_language"] = report.cross_entropy_mean_hz;
  j["cloze1_error"] = report.cloze1;
  j["cloze1_error_hz"] = report.cloze1_hz;
  j["cloze12_error"] = report.cloze12;
  j["cloze12_error_hz"] = report.cloze12_hz;
  auto& rows = j["languages"] = nlohmann::ordered_json::array();
  for (const auto& row : report.languages) {
    nlohmann::ordered_json r;
    r["language"] = row.language_id;
    r["num_vowels"] = row.num_vowels;
    r["log_marginal"] = row.log_marginal;
    auto opt = [](bool scored, double v) { return scored ? nlohmann::ordered_json(v) : nlohmann::ordered_json(); };
    r["cloze1_error"] = opt(row.cloze1.scored, row.cloze1.error);
    r["cloze1_error_hz"] = opt(row.cloze1.scored, row.cloze1.error_hz);
    r["cloze12_error"] = opt(row.cloze12.scored, row.cloze12.error);
    r["cloze12_error_hz"] = opt(row.cloze12.scored, row.cloze12.error_hz);
    rows.push_back(std::move(r));
  }
  out << j.dump(2) << '\n';
}

void write_report_csv(std::ostream& out, const EvalReport& report) {
  out << "language,num_vowels,log_marginal,cloze1_error,cloze1_error_hz,cloze12_error,"
         "cloze12_error_hz\n";
  out.precision(10);
  for (const auto& row : report.languages) {
    out << row.language_id << ',' << row.num_vowels << ',' << row.log_marginal << ',';
    if (row.cloze1.scored) out << row.cloze1.error << ',' << row.cloze1.error_hz;
    else out << ',';
    out << ',';
    if (row.cloze12.scored) out << row.cloze12.error << ',' << row.cloze12.error_hz;
    else out << ',';
    out << '\n';
  }
}

}  // namespace voweldpp
