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

#include "voweldpp/model_io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace voweldpp {

using json = nlohmann::ordered_json;

namespace {

json vec(const Vec2& v) { return json::array({v.x(), v.y()}); }

Vec2 to_vec(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ParseError("expected a 2-vector");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

const char* mode_name(SubsetPrior p) { return p == SubsetPrior::kBpp ? "bpp" : "dpp"; }

SubsetPrior mode_from(const std::string& s) {
  if (s == "dpp") return SubsetPrior::kDpp;
  if (s == "bpp") return SubsetPrior::kBpp;
  throw ParseError("unknown mode '" + s + "'");
}

json model_json(const UniversalModel& m) {
  json j;
  j["num_phones"] = m.num_phones();
  j["mode"] = mode_name(m.prior);
  j["sigma2"] = m.sigma2;
  j["rho"] = m.rho;
  j["lambda"] = m.lambda;
  json means = json::array();
  for (const auto& mu : m.means) means.push_back(vec(mu));
  j["means"] = std::move(means);
  json layers = json::array();
  for (const auto& layer : m.diffeo.layers) {
    json l;
    l["W"] = json::array({vec(layer.W.row(0).transpose()), vec(layer.W.row(1).transpose())});
    l["b"] = vec(layer.b);
    layers.push_back(std::move(l));
  }
  j["diffeo"] = std::move(layers);
  json foc;
  json u1 = json::array();
  for (Eigen::Index h = 0; h < m.foc.U1.rows(); ++h)
    u1.push_back(json::array({m.foc.U1(h, 0), m.foc.U1(h, 1)}));
  foc["U1"] = std::move(u1);
  foc["b1"] = std::vector<double>(m.foc.b1.data(), m.foc.b1.data() + m.foc.b1.size());
  foc["U2"] = std::vector<double>(m.foc.U2.data(), m.foc.U2.data() + m.foc.U2.size());
  foc["b2"] = m.foc.b2;
  j["focalization"] = std::move(foc);
  return j;
}

UniversalModel model_from(const json& j) {
  UniversalModel m;
  m.prior = mode_from(j.at("mode").get<std::string>());
  m.sigma2 = j.at("sigma2").get<double>();
  m.rho = j.at("rho").get<double>();
  m.lambda = j.at("lambda").get<double>();
  for (const auto& mu : j.at("means")) m.means.push_back(to_vec(mu));
  if (j.at("num_phones").get<int>() != m.num_phones())
    throw ParseError("num_phones does not match the number of means");
  for (const auto& l : j.at("diffeo")) {
    DiffeoLayer layer;
    layer.W.row(0) = to_vec(l.at("W").at(0)).transpose();
    layer.W.row(1) = to_vec(l.at("W").at(1)).transpose();
    layer.b = to_vec(l.at("b"));
    m.diffeo.layers.push_back(layer);
  }
  if (m.diffeo.depth() > kMaxDiffeoDepth) throw ParseError("diffeomorphism deeper than 4 layers");
  const json& foc = j.at("focalization");
  const auto H = static_cast<int>(foc.at("U1").size());
  m.foc = FocalizationNet::zeros(H);
  for (int h = 0; h < H; ++h) {
    const Vec2 row = to_vec(foc.at("U1").at(h));
    m.foc.U1(h, 0) = row.x();
    m.foc.U1(h, 1) = row.y();
  }
  const auto b1 = foc.at("b1").get<std::vector<double>>();
  const auto u2 = foc.at("U2").get<std::vector<double>>();
  if (static_cast<int>(b1.size()) != H || static_cast<int>(u2.size()) != H)
    throw ParseError("focalization net has inconsistent hidden width");
  for (int h = 0; h < H; ++h) {
    m.foc.b1[h] = b1[h];
    m.foc.U2[h] = u2[h];
  }
  m.foc.b2 = foc.at("b2").get<double>();
  return m;
}

json config_json(const TrainConfig& c) {
  json j;
  j["em_iters"] = c.em_iters;
  j["e_samples"] = c.e_samples;
  j["sgd_iters"] = c.m_sgd_iters;
  j["lr"] = c.learning_rate;
  j["sigma2"] = c.sigma2;
  j["rho"] = c.rho;
  j["lambda"] = c.lambda;
  j["n_phones"] = c.n_phones ? json(*c.n_phones) : json("auto");
  j["rj_moves"] = c.rj_moves;
  j["mode"] = mode_name(c.prior);
  j["diffeo_layers"] = c.diffeo_layers;
  j["focal_hidden"] = c.focal_hidden;
  j["supervised"] = c.supervised;
  j["barker_heuristic"] = c.gibbs.barker_heuristic;
  j["random_scan"] = c.gibbs.random_scan;
  j["weight_decay"] = c.weight_decay;
  j["seed"] = c.seed;
  return j;
}

TrainConfig config_from(const json& j) {
  TrainConfig c;
  c.em_iters = j.at("em_iters").get<int>();
  c.e_samples = j.at("e_samples").get<int>();
  c.m_sgd_iters = j.at("sgd_iters").get<int>();
  c.learning_rate = j.at("lr").get<double>();
  c.sigma2 = j.at("sigma2").get<double>();
  c.rho = j.at("rho").get<double>();
  c.lambda = j.at("lambda").get<double>();
  if (j.at("n_phones").is_string()) c.n_phones.reset();
  else c.n_phones = j.at("n_phones").get<int>();
  c.rj_moves = j.at("rj_moves").get<int>();
  c.prior = mode_from(j.at("mode").get<std::string>());
  c.diffeo_layers = j.at("diffeo_layers").get<int>();
  c.focal_hidden = j.at("focal_hidden").get<int>();
  c.supervised = j.at("supervised").get<bool>();
  c.gibbs.barker_heuristic = j.at("barker_heuristic").get<bool>();
  c.gibbs.random_scan = j.at("random_scan").get<bool>();
  c.weight_decay = j.at("weight_decay").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

void write_model(std::ostream& out, const ModelFile& file) {
  json j;
  j["format_version"] = file.format_version;
  j["model"] = model_json(file.model);
  j["normalization"] = {{"mean_hz", vec(file.norm.mean)}, {"std_hz", vec(file.norm.std)}};
  j["config"] = config_json(file.config);
  j["split"] = json::array({file.split.train, file.split.dev, file.split.test});
  json aligns = json::array();
  for (const auto& [id, a] : file.alignments) {
    json phones = json::array();
    for (int p : a) phones.push_back(p + 1);
    aligns.push_back({{"language", id}, {"phones", std::move(phones)}});
  }
  j["alignments"] = std::move(aligns);
  out << j.dump(2) << '\n';
}

ModelFile read_model(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    ModelFile f;
    f.format_version = j.at("format_version").get<int>();
    if (f.format_version != kModelFormatVersion)
      throw ParseError("unsupported model format version " + std::to_string(f.format_version));
    f.model = model_from(j.at("model"));
    f.norm.mean = to_vec(j.at("normalization").at("mean_hz"));
    f.norm.std = to_vec(j.at("normalization").at("std_hz"));
    f.config = config_from(j.at("config"));
    const auto& sp = j.at("split");
    f.split = {sp.at(0).get<double>(), sp.at(1).get<double>(), sp.at(2).get<double>()};
    for (const auto& entry : j.at("alignments")) {
      Alignment a;
      for (const auto& p : entry.at("phones")) a.push_back(p.get<int>() - 1);
      validate_alignment(a, a.size(), f.model.num_phones());
      f.alignments.emplace_back(entry.at("language").get<std::string>(), std::move(a));
    }
    return f;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
  } catch (const ContractError& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const ModelFile& file) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model file " + path.string());
  write_model(out, file);
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model file " + path.string());
  return read_model(in);
}

std::string trace_line(const TraceRecord& rec) {
  json j;
  j["iteration"] = rec.iteration;
  j["objective"] = rec.objective;
  j["num_phones"] = rec.num_phones;
  j["gibbs_acceptance"] = rec.gibbs_acceptance;
  j["rj_acceptance"] = rec.rj_acceptance;
  return j.dump();
}

}  // namespace voweldpp
