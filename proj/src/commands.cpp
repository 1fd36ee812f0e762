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

#include "voweldpp/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "voweldpp/log.hpp"

namespace voweldpp {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::vector<LanguageInventory> load_languages(const std::filesystem::path& path,
                                              std::uint64_t seed) {
  const auto rows = load_raw(path);
  if (rows.empty()) throw ValidationError(path.string() + " contains no observations");
  return dedup_languages(rows, seed);
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string field;
  while (std::getline(in, field, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(field, &used));
      if (used != field.size()) throw std::invalid_argument(field);
    } catch (const std::exception&) {
      throw ParseError("bad number '" + field + "' in list '" + text + "'");
    }
  }
  if (out.empty()) throw ParseError("empty list");
  return out;
}

std::optional<int> parse_n_phones(const std::string& text) {
  if (text == "auto") return std::nullopt;
  try {
    std::size_t used = 0;
    const int n = std::stoi(text, &used);
    if (used == text.size() && n >= 1) return n;
  } catch (const std::exception&) {
  }
  throw ParseError("--n-phones must be a positive integer or 'auto', got '" + text + "'");
}

SubsetPrior parse_mode(const std::string& text) {
  return text == "bpp" ? SubsetPrior::kBpp : SubsetPrior::kDpp;
}

std::string fmt_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

}  // namespace

CorpusPart parse_part(const std::string& name) {
  if (name == "train") return CorpusPart::kTrain;
  if (name == "dev") return CorpusPart::kDev;
  if (name == "test") return CorpusPart::kTest;
  if (name == "all") return CorpusPart::kAll;
  throw ParseError("unknown corpus part '" + name + "' (train, dev, test, all)");
}

ModelFile cmd_train(const TrainOptions& opts) {
  const auto langs = load_languages(opts.corpus, opts.config.seed);
  const CorpusSplit parts = split(langs, opts.split, opts.config.seed);
  log::info("training on {} languages ({} dev, {} test held out)", parts.train.size(),
            parts.dev.size(), parts.test.size());

  std::ofstream trace = open_out(opts.trace);
  auto on_iteration = [&](const TraceRecord& rec) {
    trace << trace_line(rec) << '\n';
    log::info("iteration {}: objective {:.6f}, N = {}", rec.iteration, rec.objective,
              rec.num_phones);
  };
  TrainResult result;
  if (opts.config.supervised) {
    result = supervised_fit(parts.train, opts.config);
    for (const auto& rec : result.trace) on_iteration(rec);
  } else {
    result = map_em(parts.train, opts.config, on_iteration);
  }

  ModelFile file;
  file.model = std::move(result.model);
  file.norm = parts.train.norm;
  file.config = opts.config;
  file.split = opts.split;
  for (std::size_t l = 0; l < parts.train.size(); ++l)
    file.alignments.emplace_back(parts.train.languages[l].language_id, result.final_alignments[l]);
  save_model(opts.out, file);
  return file;
}

Corpus select_part(const ModelFile& model, const std::filesystem::path& corpus_path,
                   CorpusPart part) {
  const auto langs = load_languages(corpus_path, model.config.seed);
  if (part == CorpusPart::kAll) return normalize(langs, model.norm);
  const HzSplit parts = split_hz(langs, model.split, model.config.seed);
  switch (part) {
    case CorpusPart::kTrain: return normalize(parts.train, model.norm);
    case CorpusPart::kDev: return normalize(parts.dev, model.norm);
    default: return normalize(parts.test, model.norm);
  }
}

EvalReport cmd_eval(const EvalCommandOptions& opts) {
  const ModelFile model = load_model(opts.model);
  const Corpus corpus = select_part(model, opts.corpus, opts.part);
  const EvalReport report = evaluate(model.model, corpus, opts.eval, opts.cloze);
  std::ofstream out = open_out(opts.out);
  write_report_json(out, report);
  if (!opts.csv.empty()) {
    std::ofstream csv = open_out(opts.csv);
    write_report_csv(csv, report);
  }
  return report;
}

void cmd_cloze(const ClozeCommandOptions& opts) {
  if (opts.hidden < 1 || opts.hidden > 2) throw ContractError("--hidden must be 1 or 2");
  const ModelFile model = load_model(opts.model);
  const Corpus corpus = select_part(model, opts.corpus, opts.part);
  const UniversalModel& m = model.model;
  const Eigen::MatrixXd L = m.L();

  std::ofstream out = open_out(opts.out);
  out << "language,hidden,truth_f1_hz,truth_f2_hz,pred_f1_hz,pred_f2_hz,expected_error_hz\n";
  for (std::size_t l = 0; l < corpus.size(); ++l) {
    const auto& lang = corpus.languages[l];
    const int n = static_cast<int>(lang.size());
    if (n <= opts.hidden || n > m.num_phones()) continue;
    Rng rng(derive_seed(opts.eval.seed, l));
    std::vector<std::vector<int>> choices;
    for (int i = 0; i < n; ++i) {
      if (opts.hidden == 1) choices.push_back({i});
      else
        for (int j = i + 1; j < n; ++j) choices.push_back({i, j});
    }
    for (const auto& choice : choices) {
      std::vector<Vec2> observed, truth;
      for (int k = 0; k < n; ++k) {
        if (std::find(choice.begin(), choice.end(), k) != choice.end())
          truth.push_back(lang.pronunciations[k]);
        else
          observed.push_back(lang.pronunciations[k]);
      }
      const auto preds = cloze_predict(m, L, observed, opts.hidden, opts.eval.samples,
                                       opts.eval.burn_in, rng, opts.eval.gibbs);
      // Posterior mean per hidden vowel, pairing each sample with the truth
      // the same way the error does.
      std::vector<Vec2> mean(truth.size(), Vec2::Zero());
      std::vector<double> err(truth.size(), 0.0);
      for (auto p : preds) {
        if (p.size() == 2) {
          const double straight = (p[0] - truth[0]).norm() + (p[1] - truth[1]).norm();
          const double crossed = (p[0] - truth[1]).norm() + (p[1] - truth[0]).norm();
          if (crossed < straight) std::swap(p[0], p[1]);
        }
        for (std::size_t h = 0; h < p.size(); ++h) {
          mean[h] += corpus.norm.invert(p[h]);
          err[h] += (corpus.norm.invert(p[h]) - corpus.norm.invert(truth[h])).norm();
        }
      }
      std::string hidden;
      for (int k : choice) hidden += (hidden.empty() ? "" : ";") + std::to_string(k + 1);
      for (std::size_t h = 0; h < truth.size(); ++h) {
        const Vec2 t = corpus.norm.invert(truth[h]);
        const Vec2 p = mean[h] / static_cast<double>(preds.size());
        out << lang.language_id << ',' << hidden << ',' << fmt_double(t.x()) << ','
            << fmt_double(t.y()) << ',' << fmt_double(p.x()) << ',' << fmt_double(p.y()) << ','
            << fmt_double(err[h] / static_cast<double>(preds.size())) << '\n';
      }
    }
  }
}

Normalization default_hz_map() {
  Normalization n;
  n.mean = Vec2(550.0, 1650.0);
  n.std = Vec2(120.0, 350.0);
  return n;
}

GeneratedCorpus cmd_generate(const GenerateOptions& opts) {
  GenerateConfig cfg = opts.config;
  Rng rng(derive_seed(cfg.seed, 0x9e4e));
  if (opts.diffeo_layers < 0 || opts.diffeo_layers > kMaxDiffeoDepth)
    throw ContractError("--diffeo-layers must be between 0 and 4");
  cfg.diffeo = DiffeoParams::near_identity(opts.diffeo_layers, 3.0, 0.3, rng);
  if (cfg.foc.hidden() != opts.focal_hidden) cfg.foc = FocalizationNet::zeros(opts.focal_hidden);
  GeneratedCorpus gen = generate_corpus(cfg);

  std::vector<RawObservation> rows;
  for (std::size_t l = 0; l < gen.corpus.size(); ++l) {
    const auto& lang = gen.corpus.languages[l];
    for (std::size_t k = 0; k < lang.size(); ++k) {
      const Vec2 hz = opts.hz.invert(lang.pronunciations[k]);
      if (!(hz.x() > 0.0) || !(hz.y() > 0.0))
        throw ValidationError("generated vowel in " + lang.language_id +
                              " maps to a non-positive formant; choose another seed or Hz map");
      rows.push_back({lang.language_id, "", "p" + std::to_string(gen.alignments[l][k] + 1), hz.x(),
                      hz.y()});
    }
  }
  std::ofstream out = open_out(opts.out);
  write_raw(out, rows);

  ModelFile truth;
  truth.model = gen.model;
  truth.norm = opts.hz;
  truth.config.sigma2 = cfg.sigma2;
  truth.config.rho = cfg.rho;
  truth.config.lambda = cfg.lambda;
  truth.config.prior = cfg.prior;
  truth.config.n_phones = gen.model.num_phones();
  truth.config.diffeo_layers = opts.diffeo_layers;
  truth.config.focal_hidden = opts.focal_hidden;
  truth.config.seed = cfg.seed;
  for (std::size_t l = 0; l < gen.corpus.size(); ++l)
    truth.alignments.emplace_back(gen.corpus.languages[l].language_id, gen.alignments[l]);
  save_model(opts.truth, truth);
  return gen;
}

std::vector<SweepRow> cmd_sweep(const SweepOptions& opts) {
  const auto langs = load_languages(opts.corpus, opts.config.seed);
  const CorpusSplit parts = split(langs, opts.split, opts.config.seed);
  std::vector<SweepRow> rows;
  for (double s2 : opts.sigma2_grid) {
    for (double rho : opts.rho_grid) {
      TrainConfig cfg = opts.config;
      cfg.sigma2 = s2;
      cfg.rho = rho;
      const TrainResult fit =
          cfg.supervised ? supervised_fit(parts.train, cfg) : map_em(parts.train, cfg);
      const CrossEntropy ce = cross_entropy(fit.model, parts.dev, opts.eval);
      log::info("sigma2 {} rho {}: dev cross-entropy {:.4f}", s2, rho, ce.mean_nats);
      rows.push_back({s2, rho, ce.mean_nats});
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return a.dev_cross_entropy < b.dev_cross_entropy;
  });
  std::ofstream out = open_out(opts.out);
  out << "sigma2,rho,dev_cross_entropy_nats\n";
  for (const auto& r : rows)
    out << fmt_double(r.sigma2) << ',' << fmt_double(r.rho) << ','
        << fmt_double(r.dev_cross_entropy) << '\n';
  return rows;
}

namespace {

void write_svg(std::ostream& out, const std::vector<PlotPoint>& points, int num_phones) {
  const double w = 640, h = 480, pad = 40;
  double f1_lo = 1e300, f1_hi = -1e300, f2_lo = 1e300, f2_hi = -1e300;
  for (const auto& p : points) {
    f1_lo = std::min(f1_lo, p.f1_hz);
    f1_hi = std::max(f1_hi, p.f1_hz);
    f2_lo = std::min(f2_lo, p.f2_hz);
    f2_hi = std::max(f2_hi, p.f2_hz);
  }
  if (points.empty()) f1_lo = f2_lo = 0, f1_hi = f2_hi = 1;
  const double f1_span = std::max(f1_hi - f1_lo, 1e-9), f2_span = std::max(f2_hi - f2_lo, 1e-9);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << w / 2 << "\" y=\"" << h - 8
      << "\" text-anchor=\"middle\" font-size=\"12\">F2 (Hz)</text>\n"
      << "<text x=\"12\" y=\"" << h / 2 << "\" font-size=\"12\" transform=\"rotate(-90 12 "
      << h / 2 << ")\" text-anchor=\"middle\">F1 (Hz)</text>\n";
  // Phonetic convention: F2 decreases to the right, F1 increases downwards.
  for (const auto& p : points) {
    const double x = pad + (f2_hi - p.f2_hz) / f2_span * (w - 2 * pad);
    const double y = pad + (p.f1_hz - f1_lo) / f1_span * (h - 2 * pad);
    const double hue = 360.0 * (p.phone - 1) / std::max(num_phones, 1);
    out << "<circle cx=\"" << fmt_double(x) << "\" cy=\"" << fmt_double(y)
        << "\" r=\"2.5\" fill=\"hsl(" << fmt_double(hue) << ",70%,45%)\"><title>"
        << p.language_id << " phone " << p.phone << "</title></circle>\n";
  }
  out << "</svg>\n";
}

}  // namespace

std::vector<PlotPoint> cmd_plot(const PlotOptions& opts) {
  const ModelFile model = load_model(opts.model);
  const Corpus corpus = select_part(model, opts.corpus, opts.part);
  const UniversalModel& m = model.model;
  std::map<std::string, const Alignment*> stored;
  for (const auto& [id, a] : model.alignments) stored[id] = &a;

  const Eigen::MatrixXd L = m.L();
  std::vector<PlotPoint> points;
  for (std::size_t l = 0; l < corpus.size(); ++l) {
    const auto& lang = corpus.languages[l];
    Alignment a;
    const auto it = stored.find(lang.language_id);
    if (it != stored.end() && it->second->size() == lang.size()) {
      a = *it->second;
    } else {
      if (static_cast<int>(lang.size()) > m.num_phones())
        throw ContractError("language '" + lang.language_id + "' has more vowels than the model has phones");
      Rng rng(derive_seed(opts.eval.seed, l));
      LanguageSampler sampler(L, m.diagonal_only(), emission_table(m, lang));
      a = sampler.greedy_init(rng);
      for (int s = 0; s <= opts.eval.burn_in; ++s) sampler.sweep(a, rng, opts.eval.gibbs);
    }
    for (std::size_t k = 0; k < lang.size(); ++k) {
      const Vec2 hz = corpus.norm.invert(lang.pronunciations[k]);
      points.push_back({lang.language_id, hz.x(), hz.y(), a[k] + 1});
    }
  }

  std::ofstream csv = open_out(opts.out);
  csv << "language,f1_hz,f2_hz,phone\n";
  for (const auto& p : points)
    csv << p.language_id << ',' << fmt_double(p.f1_hz) << ',' << fmt_double(p.f2_hz) << ','
        << p.phone << '\n';
  if (!opts.svg.empty()) {
    std::ofstream svg = open_out(opts.svg);
    write_svg(svg, points, m.num_phones());
  }
  return points;
}

namespace {

struct TrainFlags {
  std::string n_phones = "50";
  std::string mode = "dpp";
  std::string split = "0.8:0.1:0.1";
};

void add_model_flags(CLI::App* app, TrainConfig& cfg, TrainFlags& f) {
  app->add_option("--n-phones", f.n_phones, "Number of universal phones, or 'auto'")
      ->capture_default_str();
  app->add_option("--lambda", cfg.lambda, "Poisson mean of the prior on N")->capture_default_str();
  app->add_option("--sigma2", cfg.sigma2, "Phone variance")->capture_default_str();
  app->add_option("--rho", cfg.rho, "Probability-product kernel exponent")->capture_default_str();
  app->add_option("--mode", f.mode, "Subset prior")
      ->check(CLI::IsMember({"dpp", "bpp"}))
      ->capture_default_str();
  app->add_option("--diffeo-layers", cfg.diffeo_layers, "Depth of the diffeomorphism, 0 = identity")
      ->check(CLI::Range(0, kMaxDiffeoDepth))
      ->capture_default_str();
}

void add_train_flags(CLI::App* app, TrainConfig& cfg, TrainFlags& f) {
  add_model_flags(app, cfg, f);
  app->add_flag("--supervised", cfg.supervised, "Fix alignments from the IPA labels");
  app->add_option("--em-iters", cfg.em_iters, "EM iterations")->capture_default_str();
  app->add_option("--e-samples", cfg.e_samples, "Gibbs sweeps per E-step")->capture_default_str();
  app->add_option("--sgd-iters", cfg.m_sgd_iters, "Gradient steps per M-step")
      ->capture_default_str();
  app->add_option("--lr", cfg.learning_rate, "M-step learning rate")->capture_default_str();
  app->add_option("--rj-moves", cfg.rj_moves, "Birth/death moves per iteration with --n-phones auto")
      ->capture_default_str();
  app->add_option("--weight-decay", cfg.weight_decay, "L2 penalty on the focalization weights")
      ->capture_default_str();
  app->add_option("--split", f.split, "train:dev:test fractions")->capture_default_str();
}

void finish_train_flags(TrainConfig& cfg, const TrainFlags& f, SplitFractions& split_out) {
  cfg.n_phones = parse_n_phones(f.n_phones);
  cfg.prior = parse_mode(f.mode);
  split_out = parse_split(f.split);
}

void add_eval_flags(CLI::App* app, EvalOptions& e) {
  app->add_option("--samples", e.samples, "Posterior samples per estimate")->capture_default_str();
  app->add_option("--burn-in", e.burn_in, "Gibbs sweeps discarded first")->capture_default_str();
}

void add_common_flags(CLI::App* app, std::uint64_t& seed, int& threads, bool& heuristic) {
  app->add_option("--seed", seed, "Random seed")->capture_default_str();
  app->add_option("--threads", threads, "Worker threads (1 is bit-reproducible)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_flag("--barker-heuristic", heuristic,
                "Accept swaps by w_j/(w_i+w_j) without the proposal correction");
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Generative vowel-inventory model: DPP over latent phones with a learned "
               "diffeomorphism into formant space.\nSet VOWELDPP_LOG=info for progress."};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  int threads = 1;
  bool heuristic = false;

  // train
  TrainOptions train;
  TrainFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "Fit a model by MAP-EM");
  train_cmd->add_option("--corpus", train.corpus, "Formant CSV")->required();
  train_cmd->add_option("--out", train.out, "Model file")->capture_default_str();
  train_cmd->add_option("--trace", train.trace, "Per-iteration trace (JSON lines)")
      ->capture_default_str();
  add_train_flags(train_cmd, train.config, train_flags);
  add_common_flags(train_cmd, seed, threads, heuristic);

  // eval
  EvalCommandOptions ev;
  std::string ev_part = "test";
  bool no_cloze = false;
  auto* eval_cmd = app.add_subcommand("eval", "Held-out cross-entropy and cloze error");
  eval_cmd->add_option("--model", ev.model, "Model file")->required();
  eval_cmd->add_option("--corpus", ev.corpus, "Formant CSV")->required();
  eval_cmd->add_option("--part", ev_part, "train, dev, test or all")->capture_default_str();
  eval_cmd->add_option("--out", ev.out, "JSON report")->capture_default_str();
  eval_cmd->add_option("--csv", ev.csv, "Per-language CSV report");
  eval_cmd->add_flag("--no-cloze", no_cloze, "Skip the cloze tasks");
  add_eval_flags(eval_cmd, ev.eval);
  add_common_flags(eval_cmd, seed, threads, heuristic);

  // cloze
  ClozeCommandOptions cz;
  std::string cz_part = "test";
  auto* cloze_cmd = app.add_subcommand("cloze", "Predict held-out vowels of each language");
  cloze_cmd->add_option("--model", cz.model, "Model file")->required();
  cloze_cmd->add_option("--corpus", cz.corpus, "Formant CSV")->required();
  cloze_cmd->add_option("--part", cz_part, "train, dev, test or all")->capture_default_str();
  cloze_cmd->add_option("--hidden", cz.hidden, "Vowels hidden at a time")
      ->check(CLI::Range(1, 2))
      ->capture_default_str();
  cloze_cmd->add_option("--out", cz.out, "Prediction CSV")->capture_default_str();
  add_eval_flags(cloze_cmd, cz.eval);
  add_common_flags(cloze_cmd, seed, threads, heuristic);

  // generate
  GenerateOptions gen;
  gen.hz = default_hz_map();
  std::string gen_n = "auto", gen_mode = "dpp";
  auto* gen_cmd = app.add_subcommand("generate", "Sample a synthetic corpus from the model");
  gen_cmd->add_option("--out", gen.out, "Corpus CSV")->capture_default_str();
  gen_cmd->add_option("--truth", gen.truth, "Ground-truth model file")->capture_default_str();
  gen_cmd->add_option("--languages", gen.config.num_languages, "Number of languages")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen_cmd->add_option("--n-phones", gen_n, "Number of phones, or 'auto' to draw from the prior")
      ->capture_default_str();
  gen_cmd->add_option("--lambda", gen.config.lambda, "Poisson mean of N")->capture_default_str();
  gen_cmd->add_option("--sigma2", gen.config.sigma2, "Phone variance")->capture_default_str();
  gen_cmd->add_option("--rho", gen.config.rho, "Kernel exponent")->capture_default_str();
  gen_cmd->add_option("--mode", gen_mode, "Subset prior")
      ->check(CLI::IsMember({"dpp", "bpp"}))
      ->capture_default_str();
  gen_cmd->add_option("--diffeo-layers", gen.diffeo_layers, "Depth of the true diffeomorphism")
      ->check(CLI::Range(0, kMaxDiffeoDepth))
      ->capture_default_str();
  gen_cmd->add_option("--seed", gen.config.seed, "Random seed")->capture_default_str();

  // sweep
  SweepOptions sw;
  TrainFlags sw_flags;
  std::string sigma2_grid = "0.01,0.1,1,10,100", rho_grid = "0.25,0.5,1,2,4";
  auto* sweep_cmd = app.add_subcommand("sweep", "Grid search over (sigma2, rho) on the dev part");
  sweep_cmd->add_option("--corpus", sw.corpus, "Formant CSV")->required();
  sweep_cmd->add_option("--out", sw.out, "Result table")->capture_default_str();
  sweep_cmd->add_option("--sigma2-grid", sigma2_grid, "Comma-separated sigma2 values")
      ->capture_default_str();
  sweep_cmd->add_option("--rho-grid", rho_grid, "Comma-separated rho values")
      ->capture_default_str();
  add_train_flags(sweep_cmd, sw.config, sw_flags);
  add_eval_flags(sweep_cmd, sw.eval);
  add_common_flags(sweep_cmd, seed, threads, heuristic);

  // plot
  PlotOptions pl;
  std::string pl_part = "train";
  auto* plot_cmd = app.add_subcommand("plot", "Export formants colored by inferred phone");
  plot_cmd->add_option("--model", pl.model, "Model file")->required();
  plot_cmd->add_option("--corpus", pl.corpus, "Formant CSV")->required();
  plot_cmd->add_option("--part", pl_part, "train, dev, test or all")->capture_default_str();
  plot_cmd->add_option("--out", pl.out, "Point CSV")->capture_default_str();
  plot_cmd->add_option("--svg", pl.svg, "Scatter plot")->capture_default_str();
  add_eval_flags(plot_cmd, pl.eval);
  add_common_flags(plot_cmd, seed, threads, heuristic);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*train_cmd) {
      finish_train_flags(train.config, train_flags, train.split);
      train.config.seed = seed;
      train.config.threads = threads;
      train.config.gibbs.barker_heuristic = heuristic;
      cmd_train(train);
    } else if (*eval_cmd) {
      ev.part = parse_part(ev_part);
      ev.cloze = !no_cloze;
      ev.eval.seed = seed;
      ev.eval.threads = threads;
      ev.eval.gibbs.barker_heuristic = heuristic;
      const EvalReport r = cmd_eval(ev);
      std::cout << "cross-entropy " << fmt_double(r.cross_entropy_mean)
                << " nats/language (" << fmt_double(r.cross_entropy_mean_hz)
                << " over Hz) on " << r.num_languages << " languages\n";
    } else if (*cloze_cmd) {
      cz.part = parse_part(cz_part);
      cz.eval.seed = seed;
      cz.eval.threads = threads;
      cz.eval.gibbs.barker_heuristic = heuristic;
      cmd_cloze(cz);
    } else if (*gen_cmd) {
      gen.config.num_phones = parse_n_phones(gen_n);
      gen.config.prior = parse_mode(gen_mode);
      const auto g = cmd_generate(gen);
      std::cout << "generated " << g.corpus.size() << " languages over " << g.model.num_phones()
                << " phones\n";
    } else if (*sweep_cmd) {
      finish_train_flags(sw.config, sw_flags, sw.split);
      sw.sigma2_grid = parse_list(sigma2_grid);
      sw.rho_grid = parse_list(rho_grid);
      sw.config.seed = seed;
      sw.config.threads = threads;
      sw.config.gibbs.barker_heuristic = heuristic;
      sw.eval.seed = seed;
      sw.eval.threads = threads;
      sw.eval.gibbs.barker_heuristic = heuristic;
      const auto rows = cmd_sweep(sw);
      std::cout << "best sigma2 " << fmt_double(rows.front().sigma2) << " rho "
                << fmt_double(rows.front().rho) << ": " << fmt_double(rows.front().dev_cross_entropy)
                << " nats/language\n";
    } else if (*plot_cmd) {
      pl.part = parse_part(pl_part);
      pl.eval.seed = seed;
      pl.eval.gibbs.barker_heuristic = heuristic;
      cmd_plot(pl);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace voweldpp
