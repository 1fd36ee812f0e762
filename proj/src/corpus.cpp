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

#include "voweldpp/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace voweldpp {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

struct Columns {
  int language = -1;
  int study = -1;
  int symbol = -1;
  int f1 = -1;
  int f2 = -1;
  std::size_t count = 0;
};

Columns columns_from_header(const std::vector<std::string>& header) {
  Columns c;
  c.count = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string& h = header[i];
    const int idx = static_cast<int>(i);
    if (h == "language") c.language = idx;
    else if (h == "study") c.study = idx;
    else if (h == "symbol") c.symbol = idx;
    else if (h == "f1_hz") c.f1 = idx;
    else if (h == "f2_hz") c.f2 = idx;
  }
  return c;
}

Columns columns_from_width(std::size_t width) {
  if (width == 4) return {0, -1, 1, 2, 3, 4};
  if (width == 5) return {0, 1, 2, 3, 4, 5};
  return {};
}

double parse_number(const std::string& text, int line_no, const char* what) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (text.empty() || ec != std::errc() || ptr != end)
    throw ParseError("line " + std::to_string(line_no) + ": cannot parse " + what + " '" +
                     text + "'");
  return value;
}

}  // namespace

bool LanguageInventory::fully_labeled() const {
  return labels.size() == pronunciations.size() &&
         std::all_of(labels.begin(), labels.end(), [](const auto& l) { return !l.empty(); });
}

std::size_t Corpus::max_inventory_size() const {
  std::size_t n = 0;
  for (const auto& lang : languages) n = std::max(n, lang.size());
  return n;
}

std::size_t Corpus::total_pronunciations() const {
  std::size_t n = 0;
  for (const auto& lang : languages) n += lang.size();
  return n;
}

std::vector<RawObservation> parse_raw(std::istream& in) {
  std::vector<RawObservation> rows;
  std::optional<Columns> cols;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    auto fields = split_fields(stripped);
    if (!cols) {
      if (std::find(fields.begin(), fields.end(), "language") != fields.end()) {
        cols = columns_from_header(fields);
        if (cols->language < 0 || cols->f1 < 0 || cols->f2 < 0)
          throw ParseError("line " + std::to_string(line_no) +
                           ": header must name language, f1_hz and f2_hz");
        continue;
      }
      cols = columns_from_width(fields.size());
      if (cols->count == 0)
        throw ParseError("line " + std::to_string(line_no) + ": expected 4 or 5 fields, got " +
                         std::to_string(fields.size()));
    }
    if (fields.size() != cols->count)
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(cols->count) + " fields, got " +
                       std::to_string(fields.size()));

    RawObservation obs;
    obs.language_id = fields[cols->language];
    if (obs.language_id.empty())
      throw ParseError("line " + std::to_string(line_no) + ": empty language id");
    if (cols->study >= 0) obs.study_id = fields[cols->study];
    if (cols->symbol >= 0 && !fields[cols->symbol].empty()) obs.ipa_label = fields[cols->symbol];
    obs.f1 = parse_number(fields[cols->f1], line_no, "f1_hz");
    obs.f2 = parse_number(fields[cols->f2], line_no, "f2_hz");
    if (!(obs.f1 > 0.0) || !(obs.f2 > 0.0) || !std::isfinite(obs.f1) || !std::isfinite(obs.f2))
      throw ValidationError("line " + std::to_string(line_no) +
                            ": formant values must be positive and finite");
    rows.push_back(std::move(obs));
  }
  return rows;
}

std::vector<RawObservation> load_raw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file " + path.string());
  return parse_raw(in);
}

void write_raw(std::ostream& out, std::span<const RawObservation> rows) {
  out << "language,study,symbol,f1_hz,f2_hz\n";
  std::ostringstream num;
  num.precision(17);
  for (const auto& r : rows) {
    num.str({});
    num << r.f1 << ',' << r.f2;
    out << r.language_id << ',' << r.study_id << ',' << r.ipa_label.value_or("") << ','
        << num.str() << '\n';
  }
}

std::vector<LanguageInventory> dedup_languages(std::span<const RawObservation> observations,
                                               std::uint64_t seed) {
  // language -> studies in order of first appearance -> rows
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::pair<std::string, std::vector<const RawObservation*>>>>
      grouped;
  for (const auto& obs : observations) {
    auto [it, fresh] = grouped.try_emplace(obs.language_id);
    if (fresh) order.push_back(obs.language_id);
    auto& studies = it->second;
    auto st = std::find_if(studies.begin(), studies.end(),
                           [&](const auto& s) { return s.first == obs.study_id; });
    if (st == studies.end()) {
      studies.emplace_back(obs.study_id, std::vector<const RawObservation*>{});
      st = std::prev(studies.end());
    }
    st->second.push_back(&obs);
  }

  Rng rng(seed);
  std::vector<LanguageInventory> out;
  out.reserve(order.size());
  for (const auto& id : order) {
    const auto& studies = grouped.at(id);
    std::size_t pick = 0;
    if (studies.size() > 1) {
      std::uniform_int_distribution<std::size_t> choose(0, studies.size() - 1);
      pick = choose(rng);
    }
    LanguageInventory inv;
    inv.language_id = id;
    for (const RawObservation* row : studies[pick].second) {
      inv.pronunciations.emplace_back(row->f1, row->f2);
      inv.labels.push_back(row->ipa_label.value_or(""));
    }
    out.push_back(std::move(inv));
  }
  return out;
}

Normalization fit_normalization(std::span<const LanguageInventory> train) {
  std::size_t count = 0;
  Vec2 sum = Vec2::Zero();
  for (const auto& lang : train)
    for (const auto& p : lang.pronunciations) {
      sum += p;
      ++count;
    }
  if (count < 2) throw ValidationError("normalization needs at least 2 pronunciations");
  const Vec2 mean = sum / static_cast<double>(count);
  Vec2 sq = Vec2::Zero();
  for (const auto& lang : train)
    for (const auto& p : lang.pronunciations) sq += (p - mean).cwiseAbs2();
  const Vec2 std = (sq / static_cast<double>(count)).cwiseSqrt();
  for (int d = 0; d < 2; ++d)
    if (!(std[d] > 0.0))
      throw ValidationError("zero variance in formant dimension " + std::to_string(d + 1));
  return {mean, std};
}

Corpus normalize(std::span<const LanguageInventory> hz, const Normalization& norm) {
  Corpus c;
  c.norm = norm;
  c.languages.assign(hz.begin(), hz.end());
  for (auto& lang : c.languages)
    for (auto& p : lang.pronunciations) p = norm.apply(p);
  return c;
}

std::vector<LanguageInventory> denormalize(const Corpus& corpus) {
  std::vector<LanguageInventory> out = corpus.languages;
  for (auto& lang : out)
    for (auto& p : lang.pronunciations) p = corpus.norm.invert(p);
  return out;
}

HzSplit split_hz(std::span<const LanguageInventory> hz, const SplitFractions& fractions,
                 std::uint64_t seed) {
  if (!(fractions.train > 0.0) || !(fractions.dev > 0.0) || !(fractions.test > 0.0))
    throw ValidationError("split fractions must all be positive");
  if (std::abs(fractions.train + fractions.dev + fractions.test - 1.0) > 1e-9)
    throw ValidationError("split fractions must sum to 1");

  const std::size_t m = hz.size();
  const auto n_dev = static_cast<std::size_t>(std::llround(fractions.dev * m));
  const auto n_test = static_cast<std::size_t>(std::llround(fractions.test * m));
  if (n_dev == 0 || n_test == 0 || n_dev + n_test >= m)
    throw ValidationError("split of " + std::to_string(m) + " languages leaves an empty part");

  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);

  auto take = [&](std::size_t from, std::size_t to) {
    std::vector<std::size_t> idx(perm.begin() + from, perm.begin() + to);
    std::sort(idx.begin(), idx.end());
    std::vector<LanguageInventory> part;
    for (std::size_t i : idx) part.push_back(hz[i]);
    return part;
  };
  const std::size_t n_train = m - n_dev - n_test;
  auto train = take(0, n_train);
  auto dev = take(n_train, n_train + n_dev);
  auto test = take(n_train + n_dev, m);
  return {std::move(train), std::move(dev), std::move(test)};
}

CorpusSplit split(std::span<const LanguageInventory> hz, const SplitFractions& fractions,
                  std::uint64_t seed) {
  const HzSplit parts = split_hz(hz, fractions, seed);
  const Normalization norm = fit_normalization(parts.train);
  return {normalize(parts.train, norm), normalize(parts.dev, norm), normalize(parts.test, norm)};
}

SplitFractions parse_split(const std::string& spec) {
  std::vector<double> parts;
  std::istringstream in(spec);
  std::string field;
  while (std::getline(in, field, ':')) parts.push_back(parse_number(trim(field), 0, "split"));
  if (parts.size() != 3) throw ParseError("split must look like a:b:c, got '" + spec + "'");
  const double total = parts[0] + parts[1] + parts[2];
  if (!(total > 0.0)) throw ValidationError("split fractions must be positive");
  return {parts[0] / total, parts[1] / total, parts[2] / total};
}

}  // namespace voweldpp
