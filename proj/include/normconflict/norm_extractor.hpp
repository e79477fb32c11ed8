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

// Norm extraction from contract text: sentence segmentation, deontic modal
// detection against a phrase lexicon, and candidate pair generation.
//
// A sentence counts as a norm when it contains a modal phrase. This is a
// proxy; clauses that impose duties without a modal are missed.

#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "normconflict/corpus.hpp"
#include "normconflict/error.hpp"
#include "normconflict/text.hpp"

namespace normconflict {

// ---------------------------------------------------------------------------
// Lexicon

struct ModalEntry {
  std::vector<std::string> phrase;  // lowercased tokens
  DeonticMeaning meaning;
};

class ModalLexicon {
 public:
  ModalLexicon() = default;

  void Add(std::string_view phrase, DeonticMeaning meaning) {
    auto tokens = Tokenize(phrase);
    if (tokens.empty())
      throw Error(ErrorCode::kInvalidArgument, "empty modal phrase");
    entries_.push_back({std::move(tokens), meaning});
  }

  void AddNegator(std::string_view word) {
    auto tokens = Tokenize(word);
    if (tokens.size() != 1)
      throw Error(ErrorCode::kInvalidArgument,
                  "negator must be a single token: " + std::string(word));
    negators_.insert(tokens.front());
  }

  const std::vector<ModalEntry>& entries() const { return entries_; }
  const std::set<std::string>& negators() const { return negators_; }

  bool IsNegator(std::string_view token) const {
    return negators_.count(std::string(token)) > 0;
  }

  // Throws unless every deontic meaning has at least one phrase.
  void Validate() const {
    for (auto m : kAllMeanings) {
      bool found = std::any_of(entries_.begin(), entries_.end(),
                               [m](const ModalEntry& e) { return e.meaning == m; });
      if (!found)
        throw Error(ErrorCode::kInvalidArgument,
                    "lexicon has no phrase for " + std::string(MeaningName(m)));
    }
  }

  // Entries in match priority: longer phrases first, then file order.
  std::vector<const ModalEntry*> MatchOrder() const {
    std::vector<const ModalEntry*> order;
    for (const auto& e : entries_) order.push_back(&e);
    std::stable_sort(order.begin(), order.end(),
                     [](const ModalEntry* a, const ModalEntry* b) {
                       return a->phrase.size() > b->phrase.size();
                     });
    return order;
  }

  static ModalLexicon Default() {
    ModalLexicon lex;
    for (auto p : {"shall", "must", "will", "ought", "ought to",
                   "is required to"})
      lex.Add(p, DeonticMeaning::kObligation);
    for (auto p : {"may", "can", "is entitled to"})
      lex.Add(p, DeonticMeaning::kPermission);
    for (auto p : {"shall not", "must not", "may not", "will not", "cannot",
                   "is prohibited from"})
      lex.Add(p, DeonticMeaning::kProhibition);
    for (auto n : {"not", "never", "no"}) lex.AddNegator(n);
    return lex;
  }

 private:
  std::vector<ModalEntry> entries_;
  std::set<std::string> negators_;
};

// Lexicon file: one "phrase<TAB>meaning" per line, meaning one of
// obligation, permission, prohibition, negator. '#' starts a comment line.
inline ModalLexicon ReadLexicon(std::istream& in) {
  ModalLexicon lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = Trim(line);
    if (view.empty() || view.front() == '#') continue;
    auto tab = view.find('\t');
    if (tab == std::string_view::npos)
      throw Error(ErrorCode::kMalformedRecord, "expected phrase<TAB>meaning",
                  line_no);
    auto phrase = Trim(view.substr(0, tab));
    auto meaning = Trim(view.substr(tab + 1));
    if (meaning == "negator") {
      lex.AddNegator(phrase);
    } else if (auto m = ParseMeaning(meaning)) {
      lex.Add(phrase, *m);
    } else {
      throw Error(ErrorCode::kMalformedRecord,
                  "unknown meaning '" + std::string(meaning) + "'", line_no);
    }
  }
  lex.Validate();
  return lex;
}

inline ModalLexicon LoadLexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoFailure, "cannot open " + path.string());
  return ReadLexicon(in);
}

inline void WriteLexicon(const ModalLexicon& lex, std::ostream& out) {
  for (const auto& e : lex.entries()) {
    std::string phrase;
    for (const auto& t : e.phrase) phrase += (phrase.empty() ? "" : " ") + t;
    out << phrase << '\t' << MeaningName(e.meaning) << '\n';
  }
  for (const auto& n : lex.negators()) out << n << "\tnegator\n";
}

// ---------------------------------------------------------------------------
// Sentence segmentation

struct Sentence {
  std::string text;
  Span span;
};

namespace detail {

inline bool IsClosingPunct(char c) {
  return c == '"' || c == '\'' || c == ')' || c == ']';
}

inline bool IsLowerAscii(char c) { return c >= 'a' && c <= 'z'; }

// Words that are commonly followed by a period without ending a sentence.
inline bool IsAbbreviation(std::string_view word) {
  static const std::set<std::string, std::less<>> kAbbrev = {
      "inc", "ltd", "co", "corp", "mr", "mrs", "ms", "dr", "st", "jr",
      "sr", "vs", "art", "sec", "para", "cl", "approx", "al", "ref",
      "dept", "llc"};
  return kAbbrev.count(AsciiLower(word)) > 0;
}

// "1", "12", "a", "iv", "2.1", optionally wrapped in parentheses.
inline bool IsListMarker(std::string_view s) {
  s = Trim(s);
  if (!s.empty() && s.front() == '(') s.remove_prefix(1);
  if (!s.empty() && s.back() == ')') s.remove_suffix(1);
  if (s.empty()) return false;
  bool all_digits_dots = std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= '0' && c <= '9') || c == '.';
  });
  if (all_digits_dots && s.front() != '.') return true;
  if (s.size() == 1 && ((s[0] >= 'a' && s[0] <= 'z') ||
                        (s[0] >= 'A' && s[0] <= 'Z')))
    return true;
  return s.size() <= 6 && std::all_of(s.begin(), s.end(), [](char c) {
    return std::string_view("ivxlcdmIVXLCDM").find(c) != std::string_view::npos;
  });
}

inline std::size_t SkipSpace(std::string_view text, std::size_t i) {
  while (i < text.size() && IsSpace(text[i])) ++i;
  return i;
}

// Blank line (newline, optional horizontal space, newline) starting at i.
inline bool ParagraphBreakAt(std::string_view text, std::size_t i) {
  if (text[i] != '\n') return false;
  for (std::size_t j = i + 1; j < text.size(); ++j) {
    if (text[j] == '\n') return true;
    if (!IsSpace(text[j])) return false;
  }
  return false;
}

// Whether the terminator at `i` ends the sentence that began at `start`.
inline bool EndsSentence(std::string_view text, std::size_t start,
                         std::size_t i) {
  const char c = text[i];
  if (c == ';') return true;
  const std::size_t after = i + 1;
  // "1.5", "U.S.A", "e.g.," : terminator glued to the next character.
  if (after < text.size() && !IsSpace(text[after]) &&
      !IsClosingPunct(text[after]))
    return false;
  if (c != '.') return true;

  std::size_t next = SkipSpace(text, after);
  while (next < text.size() && IsClosingPunct(text[next])) ++next;
  if (next < text.size() && IsLowerAscii(text[next])) return false;

  std::size_t w = i;
  while (w > start && IsWordByte(static_cast<unsigned char>(text[w - 1]))) --w;
  const std::string word = AsciiLower(text.substr(w, i - w));
  if (IsAbbreviation(word)) return false;
  // "No. 5", "Nos. 3-4"
  if ((word == "no" || word == "nos") && next < text.size() &&
      text[next] >= '0' && text[next] <= '9')
    return false;
  return !IsListMarker(text.substr(start, i - start));
}

}  // namespace detail

// Splits text on '.', '!', '?' and ';' and on blank lines. A period does not
// split after a known abbreviation, after a bare list marker ("1.", "(a)."),
// when glued to the next character, or when the next word is lowercase.
// Sentence spans are trimmed and include the terminator plus any closing
// quotes or brackets.
inline std::vector<Sentence> SegmentSentences(std::string_view text) {
  std::vector<Sentence> out;
  std::size_t start = detail::SkipSpace(text, 0);
  auto emit = [&](std::size_t end) {
    std::size_t e = end;
    while (e > start && IsSpace(text[e - 1])) --e;
    if (e > start)
      out.push_back({std::string(text.substr(start, e - start)), {start, e}});
  };
  std::size_t i = start;
  while (i < text.size()) {
    const char c = text[i];
    if (detail::ParagraphBreakAt(text, i)) {
      emit(i);
      start = i = detail::SkipSpace(text, i);
      continue;
    }
    if ((c == '.' || c == '!' || c == '?' || c == ';') &&
        detail::EndsSentence(text, start, i)) {
      std::size_t end = i + 1;
      while (end < text.size() && detail::IsClosingPunct(text[end])) ++end;
      emit(end);
      start = i = detail::SkipSpace(text, end);
      continue;
    }
    ++i;
  }
  if (start < text.size()) emit(text.size());
  return out;
}

// ---------------------------------------------------------------------------
// Modality detection

struct ModalMatch {
  DeonticMeaning meaning;
  Span span;  // bytes of the sentence

  bool operator==(const ModalMatch&) const = default;
};

// Leftmost match wins; at one position longer phrases win. An obligation or
// permission followed by a negator within the next two tokens becomes a
// prohibition ("will never", "can not", "will assume no").
inline std::optional<ModalMatch> DetectModality(std::string_view sentence,
                                                const ModalLexicon& lexicon) {
  const auto tokens = TokenizeWithSpans(sentence);
  const auto order = lexicon.MatchOrder();
  for (std::size_t pos = 0; pos < tokens.size(); ++pos) {
    for (const ModalEntry* e : order) {
      const std::size_t len = e->phrase.size();
      if (pos + len > tokens.size()) continue;
      bool match = true;
      for (std::size_t k = 0; k < len && match; ++k)
        match = tokens[pos + k].text == e->phrase[k];
      if (!match) continue;

      ModalMatch m{e->meaning, {tokens[pos].span.begin,
                                tokens[pos + len - 1].span.end}};
      if (m.meaning != DeonticMeaning::kProhibition) {
        for (std::size_t k = pos + len;
             k < std::min(tokens.size(), pos + len + 2); ++k) {
          if (lexicon.IsNegator(tokens[k].text)) {
            m.meaning = DeonticMeaning::kProhibition;
            m.span.end = tokens[k].span.end;
            break;
          }
        }
      }
      return m;
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Norm extraction

inline std::string NormId(std::string_view contract_id, std::size_t index) {
  std::string num = std::to_string(index);
  if (num.size() < 4) num.insert(0, 4 - num.size(), '0');
  return std::string(contract_id) + "#" + num;
}

// One norm per sentence that carries a modal phrase, numbered from 1.
inline std::vector<Norm> ExtractNorms(const Contract& contract,
                                      const ModalLexicon& lexicon) {
  std::vector<Norm> norms;
  for (auto& s : SegmentSentences(contract.body)) {
    auto m = DetectModality(s.text, lexicon);
    if (!m) continue;
    Norm n;
    n.id = NormId(contract.id, norms.size() + 1);
    n.contract_id = contract.id;
    n.text = std::move(s.text);
    n.span = s.span;
    n.modality = m->meaning;
    n.modal_span = m->span;
    norms.push_back(std::move(n));
  }
  return norms;
}

enum class PairScope { kAllPairs, kSameContract };

// Unordered candidate pairs, ordered by (norm1 id, norm2 id). Candidates are
// labeled non-conflict with generated provenance until annotated.
inline std::vector<NormPair> GeneratePairs(const std::vector<Norm>& norms,
                                           PairScope scope) {
  std::vector<const Norm*> sorted;
  for (const auto& n : norms) sorted.push_back(&n);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const Norm* a, const Norm* b) { return a->id < b->id; });
  std::vector<NormPair> pairs;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      const Norm& a = *sorted[i];
      const Norm& b = *sorted[j];
      if (scope == PairScope::kSameContract && a.contract_id != b.contract_id)
        continue;
      pairs.push_back({a.id + "|" + b.id, a.text, b.text,
                       ConflictLabel::kNonConflict, Provenance::kGenerated});
    }
  }
  return pairs;
}

// ---------------------------------------------------------------------------
// Norms file: one JSON object per line
//   {"id","contract_id","text","modality","span":[b,e],"modal_span":[b,e]}

inline nlohmann::ordered_json NormToJson(const Norm& n) {
  nlohmann::ordered_json j;
  j["id"] = n.id;
  j["contract_id"] = n.contract_id;
  j["text"] = n.text;
  j["modality"] = n.modality ? nlohmann::ordered_json(MeaningName(*n.modality))
                             : nlohmann::ordered_json(nullptr);
  j["span"] = {n.span.begin, n.span.end};
  if (n.modal_span) j["modal_span"] = {n.modal_span->begin, n.modal_span->end};
  if (n.party) j["party"] = *n.party;
  if (n.action) j["action"] = *n.action;
  if (n.condition) j["condition"] = *n.condition;
  return j;
}

inline Norm NormFromJson(const nlohmann::json& j, std::size_t line_no) {
  try {
    Norm n;
    n.id = j.at("id").get<std::string>();
    n.contract_id = j.at("contract_id").get<std::string>();
    n.text = j.at("text").get<std::string>();
    if (j.contains("modality") && !j["modality"].is_null()) {
      auto m = ParseMeaning(j["modality"].get<std::string>());
      if (!m)
        throw Error(ErrorCode::kMalformedRecord, "unknown modality", line_no);
      n.modality = *m;
    }
    auto span = j.at("span");
    n.span = {span.at(0).get<std::size_t>(), span.at(1).get<std::size_t>()};
    if (j.contains("modal_span")) {
      auto ms = j["modal_span"];
      n.modal_span = Span{ms.at(0).get<std::size_t>(),
                          ms.at(1).get<std::size_t>()};
    }
    if (j.contains("party")) n.party = j["party"].get<std::string>();
    if (j.contains("action")) n.action = j["action"].get<std::string>();
    if (j.contains("condition"))
      n.condition = j["condition"].get<std::string>();
    return n;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, e.what(), line_no);
  }
}

inline void WriteNorms(const std::vector<Norm>& norms, std::ostream& out) {
  for (const auto& n : norms) out << NormToJson(n).dump() << '\n';
}

inline std::vector<Norm> ReadNorms(std::istream& in) {
  std::vector<Norm> norms;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedRecord, e.what(), line_no);
    }
    norms.push_back(NormFromJson(j, line_no));
  }
  return norms;
}

}  // namespace normconflict
