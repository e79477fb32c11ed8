// Copyright 2026 The normconflict Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Data model for contracts, norms and labeled norm pairs.
//
// Dataset files hold one JSON object per line (UTF-8):
//   {"id":"p1","norm1":"...","norm2":"...","label":"deontic-modality",
//    "provenance":"authored"}
// "provenance" may be omitted (defaults to "original"). Unknown keys are
// ignored on load, so stores may carry extra annotations. Blank lines are
// skipped.

#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "normconflict/error.hpp"
#include "normconflict/text.hpp"

namespace normconflict {

enum class DeonticMeaning { kObligation, kPermission, kProhibition };

inline constexpr std::array<DeonticMeaning, 3> kAllMeanings = {
    DeonticMeaning::kObligation, DeonticMeaning::kPermission,
    DeonticMeaning::kProhibition};

inline std::string_view MeaningName(DeonticMeaning m) {
  switch (m) {
    case DeonticMeaning::kObligation: return "obligation";
    case DeonticMeaning::kPermission: return "permission";
    case DeonticMeaning::kProhibition: return "prohibition";
  }
  return "";
}

inline std::optional<DeonticMeaning> ParseMeaning(std::string_view name) {
  for (auto m : kAllMeanings)
    if (MeaningName(m) == name) return m;
  return std::nullopt;
}

// Canonical class order. Confusion matrices and model rows follow it.
enum class ConflictLabel {
  kNonConflict,
  kDeonticModality,
  kDeonticStructure,
  kDeonticObject,
  kObjectConditional,
};

inline constexpr std::size_t kNumLabels = 5;

inline constexpr std::array<ConflictLabel, kNumLabels> kAllLabels = {
    ConflictLabel::kNonConflict, ConflictLabel::kDeonticModality,
    ConflictLabel::kDeonticStructure, ConflictLabel::kDeonticObject,
    ConflictLabel::kObjectConditional};

inline constexpr std::array<ConflictLabel, 4> kConflictLabels = {
    ConflictLabel::kDeonticModality, ConflictLabel::kDeonticStructure,
    ConflictLabel::kDeonticObject, ConflictLabel::kObjectConditional};

inline std::size_t LabelIndex(ConflictLabel l) {
  return static_cast<std::size_t>(l);
}

inline bool IsConflict(ConflictLabel l) {
  return l != ConflictLabel::kNonConflict;
}

inline std::string_view LabelName(ConflictLabel l) {
  switch (l) {
    case ConflictLabel::kNonConflict: return "non-conflict";
    case ConflictLabel::kDeonticModality: return "deontic-modality";
    case ConflictLabel::kDeonticStructure: return "deontic-structure";
    case ConflictLabel::kDeonticObject: return "deontic-object";
    case ConflictLabel::kObjectConditional: return "object-conditional";
  }
  return "";
}

// Two-letter abbreviation for compact tables.
inline std::string_view LabelAbbrev(ConflictLabel l) {
  switch (l) {
    case ConflictLabel::kNonConflict: return "NC";
    case ConflictLabel::kDeonticModality: return "DM";
    case ConflictLabel::kDeonticStructure: return "DS";
    case ConflictLabel::kDeonticObject: return "DO";
    case ConflictLabel::kObjectConditional: return "OC";
  }
  return "";
}

inline std::optional<ConflictLabel> ParseLabel(std::string_view name) {
  for (auto l : kAllLabels)
    if (LabelName(l) == name) return l;
  return std::nullopt;
}

inline ConflictLabel LabelFromName(std::string_view name) {
  if (auto l = ParseLabel(name)) return *l;
  throw Error(ErrorCode::kUnknownLabel, std::string(name));
}

enum class Provenance { kOriginal, kAuthored, kGenerated };

inline std::string_view ProvenanceName(Provenance p) {
  switch (p) {
    case Provenance::kOriginal: return "original";
    case Provenance::kAuthored: return "authored";
    case Provenance::kGenerated: return "generated";
  }
  return "";
}

inline std::optional<Provenance> ParseProvenance(std::string_view name) {
  for (auto p : {Provenance::kOriginal, Provenance::kAuthored,
                 Provenance::kGenerated})
    if (ProvenanceName(p) == name) return p;
  return std::nullopt;
}

// One clause sentence. Party, action and condition are free-text
// annotations that are never filled automatically.
struct Norm {
  std::string id;
  std::string contract_id;
  std::string text;
  Span span;  // bytes of the contract body
  std::optional<DeonticMeaning> modality;
  std::optional<Span> modal_span;  // bytes of `text`
  std::optional<std::string> party;
  std::optional<std::string> action;
  std::optional<std::string> condition;

  bool operator==(const Norm&) const = default;
};

struct Contract {
  std::string id;
  std::string title;
  std::string body;
  std::vector<Norm> norms;
};

struct NormPair {
  std::string id;
  std::string norm1;
  std::string norm2;
  ConflictLabel label = ConflictLabel::kNonConflict;
  Provenance provenance = Provenance::kOriginal;

  bool operator==(const NormPair&) const = default;
};

struct Dataset {
  std::string name;
  std::vector<NormPair> pairs;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
  bool operator==(const Dataset&) const = default;
};

// ---------------------------------------------------------------------------
// Record serialization

inline nlohmann::ordered_json PairToJson(const NormPair& p) {
  nlohmann::ordered_json j;
  j["id"] = p.id;
  j["norm1"] = p.norm1;
  j["norm2"] = p.norm2;
  j["label"] = LabelName(p.label);
  j["provenance"] = ProvenanceName(p.provenance);
  return j;
}

inline std::string PairToLine(const NormPair& p) {
  try {
    return PairToJson(p).dump();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kIoFailure,
                "cannot encode pair '" + p.id + "': " + e.what());
  }
}

inline NormPair PairFromLine(std::string_view line, std::size_t line_no) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, e.what(), line_no);
  }
  if (!j.is_object())
    throw Error(ErrorCode::kMalformedRecord, "record is not an object",
                line_no);
  auto field = [&](const char* key) -> std::string {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string())
      throw Error(ErrorCode::kMalformedRecord,
                  std::string("missing string field '") + key + "'", line_no);
    return it->get<std::string>();
  };
  NormPair p;
  p.id = field("id");
  p.norm1 = field("norm1");
  p.norm2 = field("norm2");
  p.label = LabelFromName(field("label"));
  if (j.contains("provenance")) {
    auto prov = ParseProvenance(field("provenance"));
    if (!prov)
      throw Error(ErrorCode::kMalformedRecord, "unknown provenance", line_no);
    p.provenance = *prov;
  }
  if (p.id.empty())
    throw Error(ErrorCode::kMalformedRecord, "empty id", line_no);
  if (p.norm1.empty() || p.norm2.empty())
    throw Error(ErrorCode::kMalformedRecord, "empty norm text", line_no);
  return p;
}

// ---------------------------------------------------------------------------
// Dataset files

inline Dataset ReadDataset(std::istream& in, std::string name) {
  Dataset d;
  d.name = std::move(name);
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    NormPair p = PairFromLine(line, line_no);
    if (!seen.insert(p.id).second)
      throw Error(ErrorCode::kDuplicateId, p.id, line_no);
    d.pairs.push_back(std::move(p));
  }
  return d;
}

// The dataset name is the file stem.
inline Dataset LoadDataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  return ReadDataset(in, path.stem().string());
}

inline void WriteDataset(const Dataset& d, std::ostream& out) {
  for (const auto& p : d.pairs) out << PairToLine(p) << '\n';
}

// Writes to a sibling temporary file and renames it into place.
inline void SaveDataset(const Dataset& d, const std::filesystem::path& path) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw Error(ErrorCode::kIoFailure, "cannot write " + tmp.string());
    WriteDataset(d, out);
    out.flush();
    if (!out)
      throw Error(ErrorCode::kIoFailure, "write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    throw Error(ErrorCode::kIoFailure,
                "cannot move " + tmp.string() + " to " + path.string());
}

// ---------------------------------------------------------------------------
// Statistics

struct DatasetStats {
  std::array<std::size_t, kNumLabels> counts{};
  std::size_t total = 0;

  std::size_t count(ConflictLabel l) const { return counts[LabelIndex(l)]; }
  std::size_t conflicts() const {
    return total - count(ConflictLabel::kNonConflict);
  }

  // Conflict classes are reported as a share of all conflicts; the
  // non-conflict class as a share of all pairs. Empty denominators give 0.
  double fraction(ConflictLabel l) const {
    const std::size_t denom = IsConflict(l) ? conflicts() : total;
    return denom == 0 ? 0.0
                      : static_cast<double>(count(l)) /
                            static_cast<double>(denom);
  }
};

inline DatasetStats ComputeStats(const Dataset& d) {
  DatasetStats s;
  for (const auto& p : d.pairs) ++s.counts[LabelIndex(p.label)];
  s.total = d.pairs.size();
  return s;
}

inline std::string FormatStatsTable(const DatasetStats& s) {
  std::ostringstream out;
  out << std::left << std::setw(20) << "type" << std::right << std::setw(8)
      << "count" << std::setw(10) << "share" << '\n';
  auto row = [&](ConflictLabel l) {
    out << std::left << std::setw(20) << LabelName(l) << std::right
        << std::setw(8) << s.count(l) << std::setw(9) << std::fixed
        << std::setprecision(1) << 100.0 * s.fraction(l) << "%\n";
  };
  for (auto l : kConflictLabels) row(l);
  out << std::left << std::setw(20) << "conflicts" << std::right
      << std::setw(8) << s.conflicts() << '\n';
  row(ConflictLabel::kNonConflict);
  out << std::left << std::setw(20) << "total" << std::right << std::setw(8)
      << s.total << '\n';
  return out.str();
}

inline nlohmann::ordered_json StatsToJson(const DatasetStats& s) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json counts, fractions;
  for (auto l : kAllLabels) {
    counts[std::string(LabelName(l))] = s.count(l);
    fractions[std::string(LabelName(l))] = s.fraction(l);
  }
  j["counts"] = counts;
  j["fractions"] = fractions;
  j["conflicts"] = s.conflicts();
  j["total"] = s.total;
  return j;
}

// ---------------------------------------------------------------------------
// Merging

// Appends b to a. A pair of b whose id is already taken is renamed to
// "<id>~2", "<id>~3", ... (first free suffix).
inline Dataset MergeDatasets(const Dataset& a, const Dataset& b) {
  Dataset out = a;
  std::unordered_set<std::string> ids;
  for (const auto& p : out.pairs) ids.insert(p.id);
  for (NormPair p : b.pairs) {
    if (ids.count(p.id)) {
      const std::string base = p.id;
      for (std::size_t n = 2;; ++n) {
        std::string candidate = base + "~" + std::to_string(n);
        if (!ids.count(candidate)) {
          p.id = std::move(candidate);
          break;
        }
      }
    }
    ids.insert(p.id);
    out.pairs.push_back(std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Contracts

inline std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A contract is a plain-text file; its id and title are the file stem.
inline Contract LoadContract(const std::filesystem::path& path) {
  Contract c;
  c.id = path.stem().string();
  c.title = c.id;
  c.body = ReadFile(path);
  return c;
}

}  // namespace normconflict
