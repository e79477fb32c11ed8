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

// Template-based synthetic corpus of contract norm pairs, plus a matching
// deterministic word-vector file, so the full pipeline runs without the
// external corpus or a pretrained model.
//
// Each conflict type has its own generator:
//   deontic-modality    one clause, two modals of different deontic meaning
//   deontic-structure   an obligation and its contradiction phrased with a
//                       different sentence structure
//   deontic-object      one clause, same modal, a conflicting date, amount,
//                       quantity or object
//   object-conditional  a clause and a conditioned copy of it
//   non-conflict        two unrelated clauses
// The order of the two norms in a pair is randomized, so the first norm
// carries no information about which side was edited.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "normconflict/corpus.hpp"
#include "normconflict/embedding.hpp"
#include "normconflict/random.hpp"
#include "normconflict/text.hpp"

namespace normconflict {

struct SyntheticCorpusConfig {
  // Pairs per label, indexed by LabelIndex.
  std::array<std::size_t, kNumLabels> counts{};
  std::uint64_t seed = 42;

  // 97 / 61 / 30 / 40 conflicts and 11,329 non-conflicts.
  static SyntheticCorpusConfig Standard(std::uint64_t seed = 42) {
    SyntheticCorpusConfig c;
    c.counts = {11329, 97, 61, 30, 40};
    c.seed = seed;
    return c;
  }
};

namespace synth {

using Slots = std::map<std::string, std::string>;

// Replaces every "{name}" in `tmpl` with slots.at(name).
inline std::string Fill(std::string_view tmpl, const Slots& slots) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i);
      out += slots.at(std::string(tmpl.substr(i + 1, close - i - 1)));
      i = close + 1;
    } else {
      out += tmpl[i++];
    }
  }
  return out;
}

template <typename T, std::size_t N>
const T& Pick(SplitMix64& rng, const std::array<T, N>& items) {
  return items[rng.UniformBelow(N)];
}

// Two distinct elements.
template <typename T, std::size_t N>
std::pair<T, T> PickTwo(SplitMix64& rng, const std::array<T, N>& items) {
  const auto a = rng.UniformBelow(N);
  auto b = rng.UniformBelow(N - 1);
  if (b >= a) ++b;
  return {items[a], items[b]};
}

inline constexpr std::array<std::pair<std::string_view, std::string_view>, 8>
    kParties = {{{"Seller", "Buyer"},
                 {"Supplier", "Customer"},
                 {"Licensor", "Licensee"},
                 {"Autotote", "Sisal"},
                 {"CoPacker", "Distributor"},
                 {"Contractor", "Owner"},
                 {"Company", "Consultant"},
                 {"Vendor", "Purchaser"}}};

inline constexpr std::array<std::string_view, 8> kProducts = {
    "Products",  "Terminal",          "Software", "Equipment",
    "Components", "Licensed Materials", "Goods",   "air chamber Products"};

inline constexpr std::array<std::pair<std::string_view, std::string_view>, 8>
    kNumbers = {{{"one", "1"},
                 {"two", "2"},
                 {"five", "5"},
                 {"ten", "10"},
                 {"fifteen", "15"},
                 {"thirty", "30"},
                 {"sixty", "60"},
                 {"ninety", "90"}}};

inline constexpr std::array<std::string_view, 8> kDates = {
    "May 1",      "June 12",    "July 15",     "August 30",
    "September 1", "October 31", "December 15", "March 3"};

inline constexpr std::array<std::string_view, 6> kYears = {
    "1998", "1999", "2000", "2001", "2002", "2003"};

inline constexpr std::array<std::string_view, 6> kAmounts = {
    "five hundred", "one thousand",  "two thousand",
    "ten thousand", "fifty thousand", "two hundred"};

inline constexpr std::array<std::string_view, 6> kStates = {
    "Delaware", "New York", "California", "Texas", "Illinois", "Florida"};

inline constexpr std::array<std::string_view, 4> kShipModes = {
    "air freight", "ocean freight", "rail", "ground transportation"};

inline constexpr std::array<std::string_view, 3> kPeriods = {
    "week", "month", "quarter"};

inline constexpr std::array<std::string_view, 6> kRomans = {
    "I", "II", "III", "IV", "V", "VI"};

// Modal verbs by deontic meaning (Obligation, Permission, Prohibition).
inline constexpr std::array<std::string_view, 3> kObligationModals = {
    "shall", "must", "will"};
inline constexpr std::array<std::string_view, 2> kPermissionModals = {
    "may", "can"};
inline constexpr std::array<std::string_view, 5> kProhibitionModals = {
    "shall not", "must not", "may not", "will not", "cannot"};

inline std::string_view PickModal(SplitMix64& rng, DeonticMeaning m) {
  switch (m) {
    case DeonticMeaning::kObligation: return Pick(rng, kObligationModals);
    case DeonticMeaning::kPermission: return Pick(rng, kPermissionModals);
    case DeonticMeaning::kProhibition: return Pick(rng, kProhibitionModals);
  }
  return "shall";
}

// Clauses shared by the modality, conditional and non-conflict generators.
// {M} is the modal slot.
inline constexpr std::array<std::string_view, 16> kClauses = {
    "{A} {M} deliver the {product} to {B} within {numw} ({num}) days of each "
    "purchase order",
    "{A} {M} disclose the confidential information of {B} to any third party",
    "{B} {M} audit the books and records of {A} during normal business hours",
    "The Specifications {M} be amended by the NCR design release process",
    "The terms of this Letter Agreement {M} become effective immediately "
    "prior to the closing under the APA",
    "{A} {M} assign this Agreement without the prior written consent of {B}",
    "{B} {M} terminate this Agreement upon {numw} ({num}) days written "
    "notice to {A}",
    "{A} {M} use the trademarks of {B} in connection with the marketing of "
    "the {product}",
    "{A} {M} maintain commercial liability insurance during the term of this "
    "Agreement",
    "{B} {M} inspect the manufacturing facility of {A} at any reasonable "
    "time",
    "The Facility {M} meet all legal and administrative code standards "
    "applicable to the conduct of the Principal Activity thereat",
    "{A} {M} subcontract any portion of the services to an affiliate of {B}",
    "{B} {M} withhold payment of disputed invoices submitted by {A}",
    "{A} {M} provide monthly sales reports for the {product} to {B}",
    "{A} {M} purchase the {product} exclusively from {B}",
    "{B} {M} publish the results of the joint research with {A}",
};

inline constexpr std::array<std::string_view, 8> kConditions = {
    "Only if previously agreed,",
    "Unless otherwise requested by {B},",
    "Except where {B} consents in writing,",
    "If the cost of the invoice is adjusted,",
    "Only when required by applicable law,",
    "Provided that {B} gives prior approval,",
    "Subject to the availability of funds,",
    "In the event of a force majeure delay,",
};

inline constexpr std::array<std::string_view, 3> kConditionalModals = {
    "ought to", "shall", "may"};

// Obligation phrased one way, contradicted with a different structure.
inline constexpr std::array<std::pair<std::string_view, std::string_view>, 8>
    kStructurePairs = {{
        {"All inquiries that {A} receives on a worldwide basis relative to the "
         "{product} of {B} as specified in Exhibit {roman}, shall be directed "
         "to {B}",
         "{A} may not redirect inquiries concerning the {product} of {B}"},
        {"{B} shall receive every notice regarding the {product} directly "
         "from {A}",
         "{A} shall not send any notice about the {product} to {B}"},
        {"Payment for each shipment of {product} shall be made by {B} upon "
         "delivery",
         "{B} is not required to pay for shipments of {product} at the time "
         "they are delivered"},
        {"{A} must keep all records relating to the {product} confidential",
         "{A} may freely publish records relating to the {product} to the "
         "public"},
        {"The warranty for the {product} shall be extended by {A} at the "
         "request of {B}",
         "{A} cannot grant any extension of the {product} warranty requested "
         "by {B}"},
        {"Every dispute concerning the {product} must be resolved by binding "
         "arbitration",
         "Neither {A} nor {B} may refer disputes about the {product} to "
         "arbitration"},
        {"{A} shall obtain the written approval of {B} before changing the "
         "{product} design",
         "{A} may change the design of the {product} without asking {B}"},
        {"Title to the {product} will pass to {B} upon shipment",
         "{A} retains title to the {product} and title shall not pass to {B} "
         "on shipment"},
    }};

inline std::string Capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 32);
  return s;
}

inline std::string Decapitalize(std::string s) {
  // Only the leading article; proper nouns keep their case.
  if (s.rfind("The ", 0) == 0) s[0] = 't';
  return s;
}

class Generator {
 public:
  explicit Generator(std::uint64_t seed) : rng_(seed) {}

  std::pair<std::string, std::string> Make(ConflictLabel label) {
    Slots s = BaseSlots();
    switch (label) {
      case ConflictLabel::kDeonticModality: return Modality(s);
      case ConflictLabel::kDeonticStructure: return Structure(s);
      case ConflictLabel::kDeonticObject: return Object(s);
      case ConflictLabel::kObjectConditional: return Conditional(s);
      case ConflictLabel::kNonConflict: return Unrelated(s);
    }
    return Unrelated(s);
  }

  SplitMix64& rng() { return rng_; }

 private:
  Slots BaseSlots() {
    const auto& [a, b] = Pick(rng_, kParties);
    const auto& [numw, num] = Pick(rng_, kNumbers);
    return {{"A", std::string(a)},
            {"B", std::string(b)},
            {"product", std::string(Pick(rng_, kProducts))},
            {"numw", std::string(numw)},
            {"num", std::string(num)},
            {"roman", std::string(Pick(rng_, kRomans))}};
  }

  // Occasional boilerplate around a norm, drawn independently per norm.
  std::string Decorate(std::string sentence) {
    const double u = rng_.Uniform01();
    if (u < 0.15) {
      sentence = "In accordance with Section " +
                 std::to_string(1 + rng_.UniformBelow(20)) + ", " +
                 Decapitalize(sentence);
    } else if (u < 0.30) {
      sentence += ", as set forth in Exhibit " +
                  std::string(Pick(rng_, kRomans));
    }
    return sentence + ".";
  }

  std::pair<std::string, std::string> Finish(std::string a, std::string b) {
    a = Decorate(std::move(a));
    b = Decorate(std::move(b));
    if (rng_.UniformBelow(2) == 1) std::swap(a, b);
    return {a, b};
  }

  DeonticMeaning PickMeaning() {
    return kAllMeanings[rng_.UniformBelow(kAllMeanings.size())];
  }

  std::pair<std::string, std::string> Modality(Slots s) {
    const auto clause = Pick(rng_, kClauses);
    const DeonticMeaning m1 = PickMeaning();
    DeonticMeaning m2 = kAllMeanings[rng_.UniformBelow(2)];
    if (m2 == m1) m2 = kAllMeanings[2];
    s["M"] = std::string(PickModal(rng_, m1));
    std::string a = Capitalize(Fill(clause, s));
    s["M"] = std::string(PickModal(rng_, m2));
    std::string b = Capitalize(Fill(clause, s));
    return Finish(std::move(a), std::move(b));
  }

  std::pair<std::string, std::string> Structure(Slots s) {
    const auto& [first, second] = Pick(rng_, kStructurePairs);
    return Finish(Capitalize(Fill(first, s)), Capitalize(Fill(second, s)));
  }

  std::pair<std::string, std::string> Object(Slots s) {
    std::string a, b;
    switch (rng_.UniformBelow(7)) {
      case 0: {
        const auto [d1, d2] = PickTwo(rng_, kDates);
        s["year"] = std::string(Pick(rng_, kYears));
        const std::string_view t =
            "{A} shall make available to {B} {numw} ({num}) working "
            "prototype of the {product} by {date}, {year}";
        s["date"] = std::string(d1);
        a = Fill(t, s);
        s["date"] = std::string(d2);
        b = Fill(t, s);
        break;
      }
      case 1:
        a = Fill("{A} will assume no costs of transportation and handling "
                 "for such rejected {product}", s);
        b = Fill("{A} shall assume all costs of transportation and handling "
                 "for rejected {product}", s);
        break;
      case 2: {
        const auto [x1, x2] = PickTwo(rng_, kAmounts);
        const std::string_view t =
            "{B} shall pay {A} a fee of {amount} dollars for each unit of "
            "{product}";
        s["amount"] = std::string(x1);
        a = Fill(t, s);
        s["amount"] = std::string(x2);
        b = Fill(t, s);
        break;
      }
      case 3: {
        const auto [n1, n2] = PickTwo(rng_, kNumbers);
        s["period"] = std::string(Pick(rng_, kPeriods));
        const std::string_view t =
            "{A} shall deliver {qty} units of the {product} to {B} every "
            "{period}";
        s["qty"] = std::string(n1.second);
        a = Fill(t, s);
        s["qty"] = std::string(n2.second);
        b = Fill(t, s);
        break;
      }
      case 4: {
        const auto [m1, m2] = PickTwo(rng_, kShipModes);
        const std::string_view t = "{A} must ship the {product} to {B} by {via}";
        s["via"] = std::string(m1);
        a = Fill(t, s);
        s["via"] = std::string(m2);
        b = Fill(t, s);
        break;
      }
      case 5: {
        const auto [s1, s2] = PickTwo(rng_, kStates);
        const std::string_view t =
            "This Agreement shall be governed by the laws of the State of "
            "{state}";
        s["state"] = std::string(s1);
        a = Fill(t, s);
        s["state"] = std::string(s2);
        b = Fill(t, s);
        break;
      }
      default: {
        const auto [n1, n2] = PickTwo(rng_, kNumbers);
        const std::string_view t =
            "The initial term of this Agreement shall be {yw} ({y}) years "
            "from the Effective Date";
        s["yw"] = std::string(n1.first);
        s["y"] = std::string(n1.second);
        a = Fill(t, s);
        s["yw"] = std::string(n2.first);
        s["y"] = std::string(n2.second);
        b = Fill(t, s);
        break;
      }
    }
    return Finish(std::move(a), std::move(b));
  }

  std::pair<std::string, std::string> Conditional(Slots s) {
    const auto clause = Pick(rng_, kClauses);
    s["M"] = std::string(rng_.UniformBelow(2) ? PickModal(rng_, DeonticMeaning::kObligation)
                                              : PickModal(rng_, DeonticMeaning::kPermission));
    std::string a = Capitalize(Fill(clause, s));
    s["M"] = std::string(Pick(rng_, kConditionalModals));
    std::string b = Fill(Pick(rng_, kConditions), s) + " " +
                    Decapitalize(Fill(clause, s));
    return Finish(std::move(a), std::move(b));
  }

  std::pair<std::string, std::string> Unrelated(Slots s) {
    const auto [c1, c2] = PickTwo(rng_, kClauses);
    s["M"] = std::string(PickModal(rng_, PickMeaning()));
    std::string a = Capitalize(Fill(c1, s));
    if (rng_.UniformBelow(2) == 0) s = BaseSlots();
    s["M"] = std::string(PickModal(rng_, PickMeaning()));
    std::string b = Capitalize(Fill(c2, s));
    return Finish(std::move(a), std::move(b));
  }

  SplitMix64 rng_;
};

}  // namespace synth

// Pairs are generated class by class and then shuffled into one order.
// Ids are "syn-<abbrev>-<n>"; provenance is generated.
inline Dataset GenerateSyntheticCorpus(const SyntheticCorpusConfig& config,
                                       std::string name = "synthetic") {
  synth::Generator gen(config.seed);
  Dataset d;
  d.name = std::move(name);
  for (auto label : kAllLabels) {
    for (std::size_t i = 0; i < config.counts[LabelIndex(label)]; ++i) {
      auto [a, b] = gen.Make(label);
      std::string abbrev(LabelAbbrev(label));
      for (auto& c : abbrev) c = AsciiLower(c);
      d.pairs.push_back({"syn-" + abbrev + "-" + std::to_string(i + 1),
                         std::move(a), std::move(b), label,
                         Provenance::kGenerated});
    }
  }
  gen.rng().Shuffle(d.pairs);
  return d;
}

// Sorted distinct tokens of every norm in the dataset.
inline std::vector<std::string> CorpusVocabulary(const Dataset& d) {
  std::set<std::string> vocab;
  for (const auto& p : d.pairs) {
    for (auto& t : Tokenize(p.norm1)) vocab.insert(std::move(t));
    for (auto& t : Tokenize(p.norm2)) vocab.insert(std::move(t));
  }
  return {vocab.begin(), vocab.end()};
}

// The vector of a token depends only on (token, seed, dim): component j is
// 2u - 1 for the j-th Uniform01 draw u of
// SplitMix64(DeriveSeed(seed, Fnv1a64(token))), rounded to float.
inline std::vector<float> SyntheticVector(std::string_view token,
                                          std::size_t dim,
                                          std::uint64_t seed) {
  SplitMix64 rng(DeriveSeed(seed, Fnv1a64(token)));
  std::vector<float> v(dim);
  for (auto& x : v) x = static_cast<float>(2.0 * rng.Uniform01() - 1.0);
  return v;
}

// Writes a "count dim" header and one line per token.
inline void WriteSyntheticVectors(const std::vector<std::string>& vocab,
                                  std::size_t dim, std::uint64_t seed,
                                  std::ostream& out) {
  out << vocab.size() << ' ' << dim << '\n';
  char buf[64];
  for (const auto& token : vocab) {
    out << token;
    for (float x : SyntheticVector(token, dim, seed)) {
      auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
      out << ' ' << std::string_view(buf, static_cast<std::size_t>(p - buf));
    }
    out << '\n';
  }
}

inline WordVectorStore SyntheticVectorStore(const std::vector<std::string>& vocab,
                                            std::size_t dim,
                                            std::uint64_t seed) {
  WordVectorStore store(dim);
  for (const auto& token : vocab)
    store.Insert(token, SyntheticVector(token, dim, seed));
  return store;
}

}  // namespace normconflict
